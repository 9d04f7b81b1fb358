use super::{CodeSpec, Termination};
use crate::{Error, Result};

/// Soft-decision Viterbi decoding over additive bit costs.
///
/// `metrics[j] = [cost if coded bit j is 0, cost if it is 1]`. The decoder
/// returns the information sequence whose codeword has the smallest
/// accumulated cost. Equal-cost survivors keep the smaller predecessor state,
/// and an unterminated block ends in the smallest-index best state. For a
/// terminated block the tail bits are dropped from the output.
pub fn viterbi_decode(code: &CodeSpec, metrics: &[[f64; 2]], termination: Termination) -> Result<Vec<u8>> {
    let n = code.outputs();
    if !metrics.len().is_multiple_of(n) {
        return Err(Error::InvalidInput(format!("metric length {} is not a multiple of {n}", metrics.len())));
    }
    if metrics.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput("bit costs must be finite".into()));
    }
    let steps = metrics.len() / n;
    let tail = match termination {
        Termination::Terminated => code.tail_len(),
        Termination::Truncated => 0,
    };
    if steps < tail {
        return Err(Error::InvalidInput(format!("terminated block needs at least {tail} steps, got {steps}")));
    }

    let states = code.states();
    let high = code.constraint_length() - 2;
    let mask = states - 1;
    let mut pm = vec![f64::INFINITY; states];
    pm[0] = 0.0;
    let mut next_pm = vec![0.0; states];
    let mut decisions = vec![0u8; steps * states];
    // Branch cost for each output mask, rebuilt per step.
    let mut branch = vec![0.0; 1 << n];

    for t in 0..steps {
        let m = &metrics[t * n..(t + 1) * n];
        for (mask_bits, cost) in branch.iter_mut().enumerate() {
            *cost = m.iter().enumerate().map(|(j, c)| c[(mask_bits >> j) & 1]).sum();
        }
        let row = &mut decisions[t * states..(t + 1) * states];
        for ns in 0..states {
            let u = ns >> high;
            let p0 = (ns << 1) & mask;
            let p1 = p0 | 1;
            let c0 = pm[p0] + branch[code.transition(p0, u).1 as usize];
            let c1 = pm[p1] + branch[code.transition(p1, u).1 as usize];
            if c1 < c0 {
                next_pm[ns] = c1;
                row[ns] = 1;
            } else {
                next_pm[ns] = c0;
                row[ns] = 0;
            }
        }
        std::mem::swap(&mut pm, &mut next_pm);
    }

    let mut state = match termination {
        Termination::Terminated => 0,
        Termination::Truncated => {
            let mut best = 0;
            for s in 1..states {
                if pm[s] < pm[best] {
                    best = s;
                }
            }
            best
        }
    };
    let mut bits = vec![0u8; steps];
    for t in (0..steps).rev() {
        bits[t] = (state >> high) as u8;
        state = ((state << 1) & mask) | decisions[t * states + state] as usize;
    }
    bits.truncate(steps - tail);
    Ok(bits)
}
