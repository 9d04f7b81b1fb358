//! Hybrid beamformers and the per-subcarrier scalar channels they induce.
//!
//! With many antennas per RAU the optimal analog precoder/combiner reduce to
//! the steering columns of the strongest rays, and each stream sees a scalar
//! channel `y_s[k] = σ_s[k]·γ_s[k]·x_s[k] + n_s[k]`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{sorted_path_gains, ChannelRealization, PathSet};
use crate::{Error, Result, SystemConfig};

/// How the effective singular values are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkMode {
    /// Large-array limit: `σ_s = √(β·Nr·Nt/L)·|α_(s)|`.
    #[default]
    Asymptotic,
    /// Singular values of `H[k]`.
    Svd,
    /// Diagonal of `W_RFᴴ·H[k]·F_RF` with the asymptotic beamformers.
    Hybrid,
}

impl FromStr for LinkMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asymptotic" | "asymptotic-paths" => Ok(Self::Asymptotic),
            "svd" | "exact-svd" => Ok(Self::Svd),
            "hybrid" | "hybrid-finite" => Ok(Self::Hybrid),
            other => Err(Error::Config(format!("unknown link mode `{other}`"))),
        }
    }
}

impl fmt::Display for LinkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Asymptotic => "asymptotic",
            Self::Svd => "svd",
            Self::Hybrid => "hybrid",
        })
    }
}

/// Per-subcarrier power allocation across streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerPolicy {
    #[default]
    Uniform,
    Waterfill,
}

impl FromStr for PowerPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "waterfill" | "water-filling" => Ok(Self::Waterfill),
            other => Err(Error::Config(format!("unknown power policy `{other}`"))),
        }
    }
}

/// Scalar-channel view of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveLink {
    /// `K×Ns` amplitude gains, non-increasing along each row.
    pub sigma: DMatrix<f64>,
    /// `K×Ns` power amplitudes; each row satisfies `Σ γ² = Ns`.
    pub gamma: DMatrix<f64>,
    pub mode: LinkMode,
    /// Inter-stream leakage power relative to the diagonal, per subcarrier.
    /// Only populated in [`LinkMode::Hybrid`].
    pub leakage: Option<Vec<f64>>,
}

impl EffectiveLink {
    /// Wraps gains with uniform power `γ = 1` (total power `Ns` per subcarrier).
    pub fn from_sigma(sigma: DMatrix<f64>, mode: LinkMode) -> Self {
        let gamma = DMatrix::from_element(sigma.nrows(), sigma.ncols(), 1.0);
        Self { sigma, gamma, mode, leakage: None }
    }

    /// Same gains on every subcarrier.
    pub fn constant(subcarriers: usize, gains: &[f64]) -> Self {
        let sigma = DMatrix::from_fn(subcarriers, gains.len(), |_, s| gains[s]);
        Self::from_sigma(sigma, LinkMode::Asymptotic)
    }

    /// Large-array link straight from the ray gains, without assembling `H[k]`.
    pub fn asymptotic(cfg: &SystemConfig, paths: &PathSet) -> Result<Self> {
        cfg.validate()?;
        let gains = sorted_path_gains(cfg, paths);
        if gains.len() < cfg.streams {
            return Err(Error::Config(format!("{} streams but only {} paths", cfg.streams, gains.len())));
        }
        Ok(Self::constant(cfg.subcarriers, &gains[..cfg.streams]))
    }

    pub fn subcarriers(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn streams(&self) -> usize {
        self.sigma.ncols()
    }

    /// Recomputes `gamma` for the given policy at complex noise variance
    /// `noise_power`, with a per-subcarrier budget of `Ns`.
    pub fn apply_power(&mut self, policy: PowerPolicy, noise_power: f64) -> Result<()> {
        let ns = self.streams();
        let total = ns as f64;
        for k in 0..self.subcarriers() {
            let powers = match policy {
                PowerPolicy::Uniform => uniform_power(ns, total)?,
                PowerPolicy::Waterfill => {
                    let gains: Vec<f64> = self.sigma.row(k).iter().map(|g| g.max(f64::MIN_POSITIVE)).collect();
                    water_fill(&gains, noise_power, total)?
                }
            };
            for (s, p) in powers.into_iter().enumerate() {
                self.gamma[(k, s)] = p.sqrt();
            }
        }
        Ok(())
    }
}

/// Analog precoder and combiner: the first `Ns` sorted columns of `A_t` and `A_r`.
pub fn asymptotic_beamformers(
    real: &ChannelRealization,
    streams: usize,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let ls = real.total_paths();
    if streams == 0 || streams > ls {
        return Err(Error::Config(format!("streams must be in 1..={ls}, got {streams}")));
    }
    let f_rf = real.at.columns(0, streams).into_owned();
    let w_rf = real.ar.columns(0, streams).into_owned();
    Ok((f_rf, w_rf))
}

/// Equal split of `total` over `streams`.
pub fn uniform_power(streams: usize, total: f64) -> Result<Vec<f64>> {
    if streams == 0 || total.is_nan() || total <= 0.0 {
        return Err(Error::InvalidInput("uniform power needs streams ≥ 1 and a positive budget".into()));
    }
    Ok(vec![total / streams as f64; streams])
}

/// Water-filling powers maximizing `Σ log(1 + g_s²·p_s/N)` under `Σ p_s = total`.
pub fn water_fill(gains: &[f64], noise_power: f64, total: f64) -> Result<Vec<f64>> {
    if gains.is_empty() {
        return Err(Error::InvalidInput("water-filling needs at least one gain".into()));
    }
    if [total, noise_power].iter().any(|v| v.is_nan() || *v <= 0.0) {
        return Err(Error::InvalidInput("budget and noise power must be positive".into()));
    }
    if gains.iter().any(|g| g.is_nan() || *g <= 0.0) {
        return Err(Error::InvalidInput("gains must be positive".into()));
    }
    let floors: Vec<f64> = gains.iter().map(|g| noise_power / (g * g)).collect();
    let mut sorted = floors.clone();
    sorted.sort_by(f64::total_cmp);

    // Largest active set whose water level clears every active floor.
    let mut level = sorted[0] + total;
    let mut acc = 0.0;
    for (m, floor) in sorted.iter().enumerate() {
        acc += floor;
        let candidate = (total + acc) / (m + 1) as f64;
        if candidate > *floor {
            level = candidate;
        } else {
            break;
        }
    }
    Ok(floors.iter().map(|f| (level - f).max(0.0)).collect())
}

/// Sum-rate objective `Σ log(1 + g²·p/N)`.
pub fn rate_objective(gains: &[f64], powers: &[f64], noise_power: f64) -> f64 {
    gains.iter().zip(powers).map(|(g, p)| (1.0 + g * g * p / noise_power).ln()).sum()
}

/// Effective scalar channels for one realization with uniform power.
pub fn effective_link(cfg: &SystemConfig, real: &ChannelRealization, mode: LinkMode) -> Result<EffectiveLink> {
    cfg.validate()?;
    let ns = cfg.streams;
    let k_count = real.subcarriers();
    match mode {
        LinkMode::Asymptotic => {
            let sigma = DMatrix::from_fn(k_count, ns, |k, s| real.d[k][s].norm());
            Ok(EffectiveLink::from_sigma(sigma, mode))
        }
        LinkMode::Svd => {
            // H[k] = Q_r (R_r·D[k]·R_tᴴ) Q_tᴴ with orthonormal Q, so the small
            // core carries the full singular spectrum.
            let qr_r = real.ar.clone().qr();
            let qr_t = real.at.clone().qr();
            let (rr, rt) = (qr_r.r(), qr_t.r());
            let mut sigma = DMatrix::zeros(k_count, ns);
            for k in 0..k_count {
                let mut scaled = rr.clone();
                for (mut col, g) in scaled.column_iter_mut().zip(real.d[k].iter()) {
                    col *= *g;
                }
                let core = scaled * rt.adjoint();
                let mut sv: Vec<f64> = core.singular_values().iter().copied().collect();
                sv.sort_by(|a, b| b.total_cmp(a));
                sv.resize(ns.max(sv.len()), 0.0);
                for s in 0..ns {
                    sigma[(k, s)] = sv[s];
                }
            }
            Ok(EffectiveLink::from_sigma(sigma, mode))
        }
        LinkMode::Hybrid => {
            let (f_rf, w_rf) = asymptotic_beamformers(real, ns)?;
            let mut sigma = DMatrix::zeros(k_count, ns);
            let mut leakage = Vec::with_capacity(k_count);
            for k in 0..k_count {
                let g = w_rf.adjoint() * &real.h[k] * &f_rf;
                let mut diag: Vec<f64> = (0..ns).map(|s| g[(s, s)].norm()).collect();
                let diag_power: f64 = diag.iter().map(|d| d * d).sum();
                let off_power = g.norm_squared() - diag_power;
                leakage.push(if diag_power > 0.0 { off_power.max(0.0) / diag_power } else { f64::INFINITY });
                diag.sort_by(|a, b| b.total_cmp(a));
                for s in 0..ns {
                    sigma[(k, s)] = diag[s];
                }
            }
            let mut link = EffectiveLink::from_sigma(sigma, mode);
            link.leakage = Some(leakage);
            Ok(link)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_channel, draw_paths};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_stream_takes_budget() {
        assert_eq!(water_fill(&[0.3], 2.0, 5.0).unwrap(), vec![5.0]);
    }

    #[test]
    fn equal_gains_split_evenly() {
        let p = water_fill(&[1.5, 1.5], 0.7, 3.0).unwrap();
        assert!((p[0] - 1.5).abs() < 1e-12 && (p[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn two_stream_closed_form() {
        let p = water_fill(&[2f64.sqrt(), 1.0], 1.0, 1.0).unwrap();
        assert!((p[0] - 0.75).abs() < 1e-12);
        assert!((p[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn weak_stream_shut_off() {
        let p = water_fill(&[10.0, 0.01], 1.0, 1.0).unwrap();
        assert_eq!(p[1], 0.0);
        assert!((p[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn water_fill_rejects_bad_inputs() {
        assert!(water_fill(&[], 1.0, 1.0).is_err());
        assert!(water_fill(&[1.0], 1.0, 0.0).is_err());
        assert!(water_fill(&[0.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn full_selection_returns_whole_matrices() {
        let cfg = SystemConfig { nt: 4, nr: 4, paths: 1, subcarriers: 4, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let real = build_channel(&cfg, &draw_paths(&cfg, &mut rng).unwrap()).unwrap();
        let (f, w) = asymptotic_beamformers(&real, 4).unwrap();
        assert_eq!(f, real.at);
        assert_eq!(w, real.ar);
        assert!(asymptotic_beamformers(&real, 5).is_err());
    }

    #[test]
    fn strongest_of_two_selected() {
        let cfg =
            SystemConfig { mt: 1, mr: 1, nt: 4, nr: 4, paths: 2, streams: 1, subcarriers: 4, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let ps = draw_paths(&cfg, &mut rng).unwrap();
        let real = build_channel(&cfg, &ps).unwrap();
        let strongest = if ps.paths[0].alpha.norm() >= ps.paths[1].alpha.norm() { 0 } else { 1 };
        let (f, _) = asymptotic_beamformers(&real, 1).unwrap();
        let expected = crate::channel::array_response_ula(ps.paths[strongest].phi, 4, cfg.spacing_ratio).unwrap();
        assert!((f.column(0) - expected).norm() < 1e-12);
    }

    #[test]
    fn single_path_link_is_frequency_flat() {
        let cfg =
            SystemConfig { mt: 1, mr: 1, nt: 3, nr: 5, paths: 1, streams: 1, subcarriers: 8, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let real = build_channel(&cfg, &draw_paths(&cfg, &mut rng).unwrap()).unwrap();
        for mode in [LinkMode::Asymptotic, LinkMode::Svd, LinkMode::Hybrid] {
            let link = effective_link(&cfg, &real, mode).unwrap();
            for k in 1..8 {
                assert!((link.sigma[(k, 0)] - link.sigma[(0, 0)]).abs() < 1e-12, "{mode}");
            }
        }
    }

    #[test]
    fn power_rows_meet_budget() {
        let mut link = EffectiveLink::constant(4, &[2.0, 0.5]);
        for policy in [PowerPolicy::Uniform, PowerPolicy::Waterfill] {
            link.apply_power(policy, 0.8).unwrap();
            for k in 0..4 {
                let total: f64 = link.gamma.row(k).iter().map(|g| g * g).sum();
                assert!((total - 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("svd".parse::<LinkMode>().unwrap(), LinkMode::Svd);
        assert_eq!("asymptotic".parse::<LinkMode>().unwrap(), LinkMode::Asymptotic);
        assert!("foo".parse::<LinkMode>().is_err());
    }
}
