//! Bit-interleaved coded modulation over the parallel beamformed subchannels:
//! Gray-mapped square QAM, max-log bit metrics, the bit interleaver and
//! per-stream accounting of error events.

mod interleaver;
mod modulation;

pub use interleaver::{
    build_interleaver, check_criteria, compute_alpha_vector, CriteriaReport, InterleaverMap, Resource,
};
pub use modulation::{bit_metrics, ModulationSpec};

use num_complex::Complex64;

/// Maps coded bits onto constellation symbols through the interleaver.
///
/// The input is zero-padded to a whole number of OFDM symbols. Output index
/// `(o·K + k)·Ns + s` holds the symbol of OFDM symbol `o`, subcarrier `k`,
/// stream `s`.
pub fn map_symbols(modulation: &ModulationSpec, coded: &[u8], map: &InterleaverMap) -> Vec<Complex64> {
    map_labels(coded, map).into_iter().map(|label| modulation.point(label)).collect()
}

/// Gray labels per resource, in the same layout as [`map_symbols`].
pub fn map_labels(coded: &[u8], map: &InterleaverMap) -> Vec<usize> {
    let block = map.block_len();
    let frames = coded.len().div_ceil(block);
    let per_frame = map.subcarriers() * map.streams();
    let m = map.bits_per_symbol();
    let mut labels = vec![0usize; frames * per_frame];
    for (pos, &bit) in coded.iter().enumerate() {
        if bit & 1 == 0 {
            continue;
        }
        let (frame, t) = (pos / block, pos % block);
        let r = map.resource(t);
        labels[frame * per_frame + r.k * map.streams() + r.s] |= 1 << (m - 1 - r.i);
    }
    labels
}

/// Inverse of [`map_labels`]: recovers `len` coded bits from hard labels.
pub fn demap_labels(labels: &[usize], map: &InterleaverMap, len: usize) -> Vec<u8> {
    let block = map.block_len();
    let per_frame = map.subcarriers() * map.streams();
    let m = map.bits_per_symbol();
    (0..len)
        .map(|pos| {
            let (frame, t) = (pos / block, pos % block);
            let r = map.resource(t);
            ((labels[frame * per_frame + r.k * map.streams() + r.s] >> (m - 1 - r.i)) & 1) as u8
        })
        .collect()
}

/// Reorders per-symbol bit metrics (`symbol_metrics[idx·m + i]`, same layout
/// as [`map_symbols`]) back into coded-bit order, keeping the first `len`.
pub fn deinterleave_metrics(symbol_metrics: &[[f64; 2]], map: &InterleaverMap, len: usize) -> Vec<[f64; 2]> {
    let block = map.block_len();
    let per_frame = map.subcarriers() * map.streams();
    let m = map.bits_per_symbol();
    (0..len)
        .map(|pos| {
            let (frame, t) = (pos / block, pos % block);
            let r = map.resource(t);
            symbol_metrics[(frame * per_frame + r.k * map.streams() + r.s) * m + r.i]
        })
        .collect()
}
