//! Rate-1/n feedforward convolutional codes: encoding, soft-decision
//! Viterbi decoding and distance-spectrum enumeration.

mod spectrum;
mod viterbi;

pub use spectrum::{compute_free_distance, enumerate_error_events, worst_case_error_events, ErrorEvent, Spectrum};
pub use viterbi::viterbi_decode;

use crate::{Error, Result};

/// Whether a block is driven back to the zero state with tail bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// `constraint_length − 1` zero tail bits appended.
    Terminated,
    Truncated,
}

/// A feedforward convolutional code with one input bit per trellis step.
///
/// Generator bit `constraint_length − 1` (the MSB) taps the current input,
/// so `(133, 171)` octal gives the impulse response `11 01 11 11 00 10 11`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSpec {
    generators: Vec<u32>,
    constraint_length: usize,
    dfree: usize,
    /// `[state][input] → (next state, output bits as a mask, bit j = generator j)`.
    trellis: Vec<[(usize, u32); 2]>,
}

impl CodeSpec {
    /// Builds a code from generator polynomials given as octal digits
    /// (e.g. `0o133`) and computes its free distance.
    pub fn new(generators: &[u32], constraint_length: usize) -> Result<Self> {
        if generators.is_empty() || generators.len() > 32 {
            return Err(Error::Config("a code needs between 1 and 32 generators".into()));
        }
        if !(2..=16).contains(&constraint_length) {
            return Err(Error::Config(format!("constraint length must be in 2..=16, got {constraint_length}")));
        }
        let reg_mask = (1u32 << constraint_length) - 1;
        if generators.iter().any(|g| *g == 0 || g & !reg_mask != 0) {
            return Err(Error::Config(format!("generators must be nonzero and fit in {constraint_length} bits")));
        }
        let states = 1usize << (constraint_length - 1);
        let trellis = (0..states)
            .map(|st| {
                let step = |u: usize| {
                    let reg = ((u << (constraint_length - 1)) | st) as u32;
                    let out = generators
                        .iter()
                        .enumerate()
                        .fold(0u32, |acc, (j, g)| acc | (((reg & g).count_ones() & 1) << j));
                    ((reg >> 1) as usize, out)
                };
                [step(0), step(1)]
            })
            .collect();
        let mut code = Self { generators: generators.to_vec(), constraint_length, dfree: 0, trellis };
        // Free distance is bounded by the impulse-response weight.
        let impulse_weight: u32 = generators.iter().map(|g| g.count_ones()).sum();
        code.dfree = compute_free_distance(&code, (impulse_weight as usize).max(constraint_length))?.dfree;
        Ok(code)
    }

    /// The 64-state rate-1/2 `(133, 171)` code.
    pub fn standard() -> Self {
        Self::new(&[0o133, 0o171], 7).expect("(133,171) is a valid code")
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    pub fn constraint_length(&self) -> usize {
        self.constraint_length
    }

    pub fn states(&self) -> usize {
        self.trellis.len()
    }

    /// Coded bits per input bit.
    pub fn outputs(&self) -> usize {
        self.generators.len()
    }

    /// `(input bits, output bits)` per trellis step.
    pub fn rate(&self) -> (usize, usize) {
        (1, self.outputs())
    }

    pub fn dfree(&self) -> usize {
        self.dfree
    }

    pub fn tail_len(&self) -> usize {
        self.constraint_length - 1
    }

    pub(crate) fn transition(&self, state: usize, input: usize) -> (usize, u32) {
        self.trellis[state][input]
    }

    /// Encodes from the all-zero state.
    pub fn encode(&self, bits: &[u8], termination: Termination) -> Vec<u8> {
        conv_encode(self, bits, termination)
    }
}

/// Feedforward encoding from the all-zero state. With
/// [`Termination::Terminated`] the output also covers the zero tail.
pub fn conv_encode(code: &CodeSpec, bits: &[u8], termination: Termination) -> Vec<u8> {
    let n = code.outputs();
    let tail = match termination {
        Termination::Terminated => code.tail_len(),
        Termination::Truncated => 0,
    };
    let mut out = Vec::with_capacity((bits.len() + tail) * n);
    let mut state = 0;
    for &b in bits.iter().chain(std::iter::repeat_n(&0u8, tail)) {
        let (next, mask) = code.transition(state, (b & 1) as usize);
        out.extend((0..n).map(|j| ((mask >> j) & 1) as u8));
        state = next;
    }
    out
}
