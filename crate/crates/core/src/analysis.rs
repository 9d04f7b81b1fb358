//! Closed-form error-probability bounds and diversity diagnostics.
//!
//! Averaging the Chernoff-bounded conditional PEP over exponentially
//! distributed subchannel powers gives, for an error event that places
//! `α_s` of its differing bits on stream `s`,
//!
//! ```text
//! PEP ≤ ½ · Π_s (1 + d_min²·Nr·SNR / (4L))^(−α_s)
//! ```
//!
//! and the BER union bound sums this over the code's error events.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::bicmb::{compute_alpha_vector, InterleaverMap};
use crate::codec::{enumerate_error_events, CodeSpec};
use crate::{Error, Result};

/// Upper bound on the pairwise error probability of an event with
/// per-stream usage `alpha`.
pub fn pep_bound(alpha: &[usize], d_min: f64, nr: usize, paths: usize, snr: f64) -> Result<f64> {
    if snr.is_nan() || snr < 0.0 {
        return Err(Error::InvalidInput(format!("SNR must be non-negative, got {snr}")));
    }
    if paths == 0 {
        return Err(Error::InvalidInput("path count must be positive".into()));
    }
    let c = d_min * d_min * nr as f64 * snr / (4.0 * paths as f64);
    let total: usize = alpha.iter().sum();
    Ok(0.5 * (-(total as f64) * c.ln_1p()).exp())
}

/// One union-bound term: an error event and its per-stream usage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventTerm {
    pub weight: usize,
    pub alpha: Vec<usize>,
    /// Starting coded-bit offset within the interleaver frame.
    pub offset: usize,
    pub coded: Vec<u8>,
}

impl EventTerm {
    /// `Δ(α) = Σ_s α_s`.
    pub fn delta(&self) -> usize {
        self.alpha.iter().sum()
    }
}

/// Everything the union bound needs.
#[derive(Debug, Clone)]
pub struct BoundInputs {
    pub terms: Vec<EventTerm>,
    pub dfree: usize,
    pub d_min: f64,
    pub nr: usize,
    pub paths: usize,
    /// Large-scale fading (linear); scales the SNR seen by the bound.
    pub beta: f64,
    /// Information bits per trellis step.
    pub k_c: usize,
    /// Linear SNR values.
    pub snr_grid: Vec<f64>,
}

impl BoundInputs {
    /// Enumerates events up to `dmax` and, for each, picks the codeword-aligned
    /// interleaver offset that minimizes `Δ(α)`, the smallest one on ties.
    #[allow(clippy::too_many_arguments)]
    pub fn from_code(
        code: &CodeSpec,
        map: &InterleaverMap,
        d_min: f64,
        nr: usize,
        paths: usize,
        beta: f64,
        snr_grid: Vec<f64>,
        dmax: usize,
    ) -> Result<Self> {
        if dmax < code.dfree() {
            return Err(Error::InvalidInput(format!("dmax ({dmax}) is below dfree ({})", code.dfree())));
        }
        let step = code.outputs();
        let mut terms = Vec::new();
        for ev in enumerate_error_events(code, dmax)? {
            let mut best: Option<EventTerm> = None;
            for offset in (0..map.block_len()).step_by(step) {
                let alpha = compute_alpha_vector(map, &ev.coded, offset);
                let delta: usize = alpha.iter().sum();
                let better = match &best {
                    None => true,
                    Some(b) => delta < b.delta(),
                };
                if better {
                    best = Some(EventTerm { weight: ev.weight(), alpha, offset, coded: ev.coded.clone() });
                }
            }
            terms.extend(best);
        }
        Ok(Self { terms, dfree: code.dfree(), d_min, nr, paths, beta, k_c: 1, snr_grid })
    }

    /// Term of weight `dfree` with the smallest `Δ`, first in enumeration order.
    pub fn dominant_term(&self) -> Option<&EventTerm> {
        self.terms.iter().filter(|t| t.weight == self.dfree).min_by_key(|t| t.delta())
    }
}

/// Most unbalanced stream usage over all weight-`d` events and even offsets:
/// the `(event index, offset, α)` whose smallest entry is smallest.
pub fn worst_alpha(code: &CodeSpec, map: &InterleaverMap, d: usize) -> Option<(usize, usize, Vec<usize>)> {
    let events = crate::codec::worst_case_error_events(code, d);
    let mut worst: Option<(usize, usize, Vec<usize>)> = None;
    for (idx, ev) in events.iter().enumerate() {
        for offset in (0..map.block_len()).step_by(code.outputs()) {
            let alpha = compute_alpha_vector(map, &ev.coded, offset);
            let key = alpha.iter().min().copied().unwrap_or(0);
            if worst.as_ref().is_none_or(|w| key < *w.2.iter().min().unwrap_or(&0)) {
                worst = Some((idx, offset, alpha));
            }
        }
    }
    worst
}

/// Truncated union bound on the BER at every SNR of `inputs.snr_grid`,
/// summing terms of weight `dfree..=dmax`. The bound sees `β·SNR`.
pub fn union_bound_ber(inputs: &BoundInputs, dmax: usize) -> Result<Vec<f64>> {
    if dmax < inputs.dfree {
        return Err(Error::InvalidInput(format!("dmax ({dmax}) is below dfree ({})", inputs.dfree)));
    }
    if inputs.k_c == 0 {
        return Err(Error::InvalidInput("k_c must be positive".into()));
    }
    inputs
        .snr_grid
        .iter()
        .map(|&snr| {
            let mut total = 0.0;
            for term in inputs.terms.iter().filter(|t| t.weight <= dmax) {
                total += pep_bound(&term.alpha, inputs.d_min, inputs.nr, inputs.paths, inputs.beta * snr)?;
            }
            Ok(total / inputs.k_c as f64)
        })
        .collect()
}

/// Predicted diversity order `min(dfree, Mr·Mt·L)`.
pub fn diversity_gain(dfree: usize, mr: usize, mt: usize, paths: usize) -> usize {
    dfree.min(mr * mt * paths)
}

/// One SNR cell of a BER curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRow {
    pub snr_db: f64,
    pub trials: u64,
    pub info_bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// The cell met its error-count target.
    pub reliable: bool,
}

/// Result of a log-log least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    /// Decades of BER per decade of SNR, sign-flipped (positive = diversity).
    pub slope: f64,
    pub std_err: f64,
    pub window: (f64, f64),
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BerCurve {
    pub rows: Vec<BerRow>,
    pub fit: Option<SlopeFit>,
}

impl BerCurve {
    pub fn reliable_rows(&self) -> impl Iterator<Item = &BerRow> {
        self.rows.iter().filter(|r| r.reliable)
    }

    /// Window spanning the `n` highest-SNR reliable cells.
    pub fn top_window(&self, n: usize) -> Option<(f64, f64)> {
        let rel: Vec<f64> = self.reliable_rows().map(|r| r.snr_db).collect();
        if rel.len() < n || n == 0 {
            return None;
        }
        Some((rel[rel.len() - n], rel[rel.len() - 1]))
    }

    /// BER at `target` by log-linear interpolation between adjacent reliable
    /// cells, returned as the SNR (dB) where the curve crosses it.
    pub fn snr_at_ber(&self, target: f64) -> Option<f64> {
        let rel: Vec<&BerRow> = self.reliable_rows().filter(|r| r.ber > 0.0).collect();
        rel.windows(2).find_map(|w| {
            let (a, b) = (w[0], w[1]);
            if (a.ber - target) * (b.ber - target) <= 0.0 && a.ber != b.ber {
                let (la, lb, lt) = (a.ber.log10(), b.ber.log10(), target.log10());
                Some(a.snr_db + (lt - la) / (lb - la) * (b.snr_db - a.snr_db))
            } else {
                None
            }
        })
    }
}

/// Least-squares slope of `log10(BER)` against `log10(SNR)` over `(snr_db, ber)`
/// points inside `window` (dB, inclusive), sign-flipped.
pub fn fit_slope(points: &[(f64, f64)], window: (f64, f64)) -> Result<SlopeFit> {
    let (lo, hi) = window;
    let inside: Vec<(f64, f64)> = points.iter().copied().filter(|(s, _)| *s >= lo - 1e-9 && *s <= hi + 1e-9).collect();
    let zero: Vec<f64> = inside.iter().filter(|(_, b)| b.is_nan() || *b <= 0.0).map(|(s, _)| *s).collect();
    if !zero.is_empty() {
        return Err(Error::InsufficientData { reason: "zero-BER cells inside window".into(), cells: zero });
    }
    if inside.len() < 3 {
        return Err(Error::InsufficientData {
            reason: format!("{} points inside window {lo}:{hi}, need 3", inside.len()),
            cells: inside.iter().map(|p| p.0).collect(),
        });
    }
    let n = inside.len() as f64;
    let xs: Vec<f64> = inside.iter().map(|(s, _)| s / 10.0).collect();
    let ys: Vec<f64> = inside.iter().map(|(_, b)| b.log10()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData { reason: "window has a single SNR value".into(), cells: xs });
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let std_err = if inside.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(SlopeFit { slope: -slope, std_err, window, points: inside.len() })
}

/// Fitted diversity order of `curve` over `window` (dB).
pub fn estimate_slope(curve: &BerCurve, window: (f64, f64)) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = curve.rows.iter().map(|r| (r.snr_db, r.ber)).collect();
    fit_slope(&pts, window)
}

/// Magnitude of the correlation between subcarriers `k` and `k + delta_k`
/// for one RAU pair: `(1/L)·|Σ_l exp(−j2π·Δk·τ_l/(K·Ts))|`.
pub fn subcarrier_correlation(delays: &[f64], delta_k: i64, subcarriers: usize, ts: f64) -> f64 {
    if delays.is_empty() {
        return 0.0;
    }
    let sum: Complex64 = delays
        .iter()
        .map(|tau| Complex64::from_polar(1.0, -2.0 * PI * delta_k as f64 * tau / (subcarriers as f64 * ts)))
        .sum();
    sum.norm() / delays.len() as f64
}
