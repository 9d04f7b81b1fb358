use log::warn;

use crate::{Error, Result};

/// Where a coded bit lands: subcarrier `k`, stream `s`, label bit `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Resource {
    pub k: usize,
    pub s: usize,
    pub i: usize,
}

/// Bit interleaver for one OFDM symbol of `K·Ns·m` coded bits, applied
/// identically to every OFDM symbol.
///
/// Coded bit `t` goes to stream `t mod Ns`. Its row `r = t div Ns` picks
/// label bit `r div K` and subcarrier `(r·stride + s·⌊K/Ns⌋) mod K`, where
/// `stride` is coprime to `K`. Consecutive bits thus alternate streams and
/// hop subcarriers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterleaverMap {
    subcarriers: usize,
    streams: usize,
    bits: usize,
    stride: usize,
    map: Vec<Resource>,
    /// Diagnostics for sizes too small to spread a `dfree` window.
    pub warnings: Vec<String>,
}

impl InterleaverMap {
    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn streams(&self) -> usize {
        self.streams
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Coded bits per OFDM symbol.
    pub fn block_len(&self) -> usize {
        self.map.len()
    }

    /// Resource of coded bit `t` (`t < block_len`).
    pub fn resource(&self, t: usize) -> Resource {
        self.map[t]
    }

    pub fn resources(&self) -> &[Resource] {
        &self.map
    }

    /// Builds a map from an explicit assignment.
    pub fn from_resources(subcarriers: usize, streams: usize, bits: usize, map: Vec<Resource>) -> Result<Self> {
        if map.len() != subcarriers * streams * bits {
            return Err(Error::Dimension(format!(
                "map has {} entries, expected {}",
                map.len(),
                subcarriers * streams * bits
            )));
        }
        Ok(Self { subcarriers, streams, bits, stride: 0, map, warnings: Vec::new() })
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Constructs the round-robin interleaver for `K` subcarriers, `Ns` streams
/// and `m` bits per symbol.
pub fn build_interleaver(subcarriers: usize, streams: usize, bits: usize, dfree: usize) -> Result<InterleaverMap> {
    if subcarriers == 0 || streams == 0 || bits == 0 {
        return Err(Error::Config("interleaver sizes must be positive".into()));
    }
    let mut warnings = Vec::new();
    if subcarriers * streams < dfree {
        warnings.push(format!(
            "K·Ns = {} is below dfree = {dfree}; a dfree window cannot reach distinct resources",
            subcarriers * streams
        ));
    }
    if subcarriers * streams * bits < dfree {
        warnings.push(format!("block of {} bits is shorter than dfree = {dfree}", subcarriers * streams * bits));
    }
    for w in &warnings {
        warn!("{w}");
    }

    // Spread the rows covering one dfree window across the band, then walk
    // to the next coprime stride until the audit passes.
    let rows = dfree.div_ceil(streams).max(1);
    let first = (subcarriers / rows).max(1);
    let candidates =
        (first..first + subcarriers).filter(|c| gcd(*c % subcarriers, subcarriers) == 1 || subcarriers == 1);
    let mut chosen = None;
    for stride in candidates {
        let map = assemble(subcarriers, streams, bits, stride % subcarriers.max(1), &warnings);
        if check_criteria(&map, dfree).all_pass() {
            return Ok(map);
        }
        chosen.get_or_insert(map);
    }
    let mut map = chosen.ok_or_else(|| Error::Config("no stride coprime to K".into()))?;
    let msg = format!("no stride satisfies every criterion for K={subcarriers}, Ns={streams}, m={bits}");
    warn!("{msg}");
    map.warnings.push(msg);
    Ok(map)
}

fn assemble(subcarriers: usize, streams: usize, bits: usize, stride: usize, warnings: &[String]) -> InterleaverMap {
    let shift = subcarriers / streams;
    let block = subcarriers * streams * bits;
    let map = (0..block)
        .map(|t| {
            let s = t % streams;
            let r = t / streams;
            let i = r / subcarriers;
            let k = ((r % subcarriers) * stride + s * shift) % subcarriers;
            Resource { k, s, i }
        })
        .collect();
    InterleaverMap { subcarriers, streams, bits, stride, map, warnings: warnings.to_vec() }
}

/// Outcome of auditing an interleaver against the three design rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CriteriaReport {
    /// Each block of `block_len` consecutive bits fills exactly one OFDM symbol.
    pub within_symbol: bool,
    /// Every `dfree`-bit window touches every stream.
    pub all_streams_in_dfree: bool,
    /// Consecutive bits never share a subcarrier.
    pub distinct_subcarriers: bool,
}

impl CriteriaReport {
    pub fn all_pass(&self) -> bool {
        self.within_symbol && self.all_streams_in_dfree && self.distinct_subcarriers
    }
}

pub fn check_criteria(map: &InterleaverMap, dfree: usize) -> CriteriaReport {
    let (k_count, ns, m) = (map.subcarriers, map.streams, map.bits);
    let block = map.block_len();

    let mut seen = vec![false; block];
    let within_symbol = block == k_count * ns * m
        && map.map.iter().all(|r| {
            if r.k >= k_count || r.s >= ns || r.i >= m {
                return false;
            }
            let idx = (r.k * ns + r.s) * m + r.i;
            !std::mem::replace(&mut seen[idx], true)
        });

    // Windows wrap because the same map repeats on every OFDM symbol.
    let window = dfree.min(block);
    let all_streams_in_dfree = ns == 1
        || (window > 0
            && (0..block).all(|start| {
                let mut hit = vec![false; ns];
                for off in 0..window {
                    hit[map.map[(start + off) % block].s] = true;
                }
                hit.iter().all(|&h| h)
            }));

    let distinct_subcarriers = map.map.windows(2).all(|w| w[0].k != w[1].k);

    CriteriaReport { within_symbol, all_streams_in_dfree, distinct_subcarriers }
}

/// Per-stream count of the differing bits of `event` when it starts at coded
/// bit `offset` of the interleaver frame.
pub fn compute_alpha_vector(map: &InterleaverMap, event: &[u8], offset: usize) -> Vec<usize> {
    let block = map.block_len();
    let mut alpha = vec![0usize; map.streams];
    for (j, &b) in event.iter().enumerate() {
        if b != 0 {
            alpha[map.map[(offset + j) % block].s] += 1;
        }
    }
    alpha
}
