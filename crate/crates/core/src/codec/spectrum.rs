use std::collections::BTreeMap;

use super::CodeSpec;
use crate::{Error, Result};

/// A path that leaves the zero state and first returns to it, expressed as
/// the coded-bit difference against the all-zeros codeword.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorEvent {
    pub coded: Vec<u8>,
    pub input: Vec<u8>,
}

impl ErrorEvent {
    /// Hamming weight of the coded difference.
    pub fn weight(&self) -> usize {
        self.coded.iter().filter(|&&b| b != 0).count()
    }

    pub fn input_weight(&self) -> usize {
        self.input.iter().filter(|&&b| b != 0).count()
    }

    pub fn to_bit_string(&self) -> String {
        self.coded.iter().map(|b| if *b != 0 { '1' } else { '0' }).collect()
    }
}

/// Free distance and event counts per output weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spectrum {
    pub dfree: usize,
    pub dmax: usize,
    /// `weight → number of distinct error events`.
    pub events: BTreeMap<usize, usize>,
    /// `weight → total information weight over those events`.
    pub info_weight: BTreeMap<usize, usize>,
}

impl Spectrum {
    /// `W_I(d)`: count of error events of weight `d` (0 when none).
    pub fn count(&self, d: usize) -> usize {
        self.events.get(&d).copied().unwrap_or(0)
    }
}

/// Enumerates every error event with output weight at most `dmax` by a
/// depth-first walk of the trellis, pruning on accumulated weight.
pub fn enumerate_error_events(code: &CodeSpec, dmax: usize) -> Result<Vec<ErrorEvent>> {
    let n = code.outputs();
    // Any path this long without remerging must contain a zero-weight cycle.
    let max_steps = code.states() * (dmax + 1) + code.constraint_length();
    let mut events = Vec::new();
    let mut coded = Vec::new();
    let mut input = Vec::new();
    walk(code, n, 0, 0, dmax, max_steps, &mut coded, &mut input, &mut events)?;
    Ok(events)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    code: &CodeSpec,
    n: usize,
    state: usize,
    weight: usize,
    dmax: usize,
    max_steps: usize,
    coded: &mut Vec<u8>,
    input: &mut Vec<u8>,
    events: &mut Vec<ErrorEvent>,
) -> Result<()> {
    if input.len() > max_steps {
        return Err(Error::InvalidInput("code appears catastrophic: unbounded zero-weight cycle".into()));
    }
    for u in 0..2usize {
        if input.is_empty() && u == 0 {
            continue;
        }
        let (next, mask) = code.transition(state, u);
        let w = weight + mask.count_ones() as usize;
        if w > dmax {
            continue;
        }
        coded.extend((0..n).map(|j| ((mask >> j) & 1) as u8));
        input.push(u as u8);
        if next == 0 {
            events.push(ErrorEvent { coded: coded.clone(), input: input.clone() });
        } else {
            walk(code, n, next, w, dmax, max_steps, coded, input, events)?;
        }
        coded.truncate(coded.len() - n);
        input.pop();
    }
    Ok(())
}

/// Free distance and weight spectrum up to `dmax`.
pub fn compute_free_distance(code: &CodeSpec, dmax: usize) -> Result<Spectrum> {
    if dmax < code.constraint_length() {
        return Err(Error::InvalidInput(format!(
            "dmax ({dmax}) must be at least the constraint length ({})",
            code.constraint_length()
        )));
    }
    let all = enumerate_error_events(code, dmax)?;
    let mut events = BTreeMap::new();
    let mut info_weight = BTreeMap::new();
    for ev in &all {
        *events.entry(ev.weight()).or_insert(0) += 1;
        *info_weight.entry(ev.weight()).or_insert(0) += ev.input_weight();
    }
    let dfree = *events
        .keys()
        .next()
        .ok_or_else(|| Error::InvalidInput(format!("no remerging path of weight ≤ {dmax}; increase dmax")))?;
    Ok(Spectrum { dfree, dmax, events, info_weight })
}

/// All error events of coded weight exactly `d`. Empty below `dfree`.
pub fn worst_case_error_events(code: &CodeSpec, d: usize) -> Vec<ErrorEvent> {
    if d < code.dfree() {
        return Vec::new();
    }
    enumerate_error_events(code, d).map(|evs| evs.into_iter().filter(|e| e.weight() == d).collect()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_spectrum() {
        let code = CodeSpec::standard();
        let sp = compute_free_distance(&code, 14).unwrap();
        assert_eq!(sp.dfree, 10);
        assert_eq!(sp.count(10), 11);
        assert_eq!(sp.count(11), 0);
        assert_eq!(sp.count(12), 38);
        assert_eq!(sp.count(14), 193);
        // Total information weight at dfree.
        assert_eq!(sp.info_weight[&10], 36);
    }

    #[test]
    fn dfree_events_contain_reference_pattern() {
        let code = CodeSpec::standard();
        let evs = worst_case_error_events(&code, 10);
        assert_eq!(evs.len(), 11);
        assert!(evs.iter().any(|e| e.to_bit_string().starts_with("111001010001010111")));
    }

    #[test]
    fn below_dfree_is_empty() {
        assert!(worst_case_error_events(&CodeSpec::standard(), 9).is_empty());
    }

    #[test]
    fn seven_five_single_event() {
        let code = CodeSpec::new(&[0o7, 0o5], 3).unwrap();
        let evs = worst_case_error_events(&code, 5);
        assert_eq!(evs.len(), 1);
        assert_eq!(evs[0].to_bit_string(), "111011");
    }

    #[test]
    fn dmax_below_constraint_length() {
        assert!(compute_free_distance(&CodeSpec::standard(), 6).is_err());
    }

    #[test]
    fn dmax_without_remerge() {
        // (133,171) has nothing below weight 10.
        assert!(compute_free_distance(&CodeSpec::standard(), 9).is_err());
    }
}
