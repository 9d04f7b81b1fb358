//! Frequency-selective distributed-subarray mm-Wave channel.
//!
//! Every RAU pair `(i, j)` contributes `L` rays. Each ray has a complex gain
//! drawn from CN(0,1), an angle of arrival and departure uniform on
//! `[0, 2π]`, and a delay on the sampling grid inside the cyclic prefix.
//! The subcarrier-`k` channel is assembled blockwise; its rank-one
//! decomposition `H[k] = A_r·diag(D[k])·A_tᴴ` uses zero-padded steering
//! vectors so that each column lives only on its RAU's antenna block.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::Serialize;

use crate::{Error, Result, SystemConfig};

/// One propagation ray between receive RAU `rx` and transmit RAU `tx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub rx: usize,
    pub tx: usize,
    pub index: usize,
    /// Complex gain, CN(0,1).
    pub alpha: Complex64,
    /// Angle of arrival (radians).
    pub theta: f64,
    /// Angle of departure (radians).
    pub phi: f64,
    /// Delay in seconds.
    pub tau: f64,
}

/// The random state of one channel realization: `Mr·Mt·L` rays ordered by
/// receive RAU, then transmit RAU, then ray index.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub paths: Vec<Path>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Rays of a single RAU pair.
    pub fn pair(&self, rx: usize, tx: usize) -> impl Iterator<Item = &Path> {
        self.paths.iter().filter(move |p| p.rx == rx && p.tx == tx)
    }

    fn check_against(&self, cfg: &SystemConfig) -> Result<()> {
        if self.paths.len() != cfg.total_paths() {
            return Err(Error::Dimension(format!(
                "path set has {} entries, config expects {}",
                self.paths.len(),
                cfg.total_paths()
            )));
        }
        if let Some(p) = self.paths.iter().find(|p| p.rx >= cfg.mr || p.tx >= cfg.mt) {
            return Err(Error::Dimension(format!(
                "path references RAU pair ({}, {}) outside {}x{}",
                p.rx, p.tx, cfg.mr, cfg.mt
            )));
        }
        Ok(())
    }
}

/// Draws one realization of all `Mr·Mt·L` rays.
///
/// Delays are uniform on `{0, Ts, …, Ncp·Ts}`.
pub fn draw_paths<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<PathSet> {
    cfg.validate()?;
    let mut paths = Vec::with_capacity(cfg.total_paths());
    for rx in 0..cfg.mr {
        for tx in 0..cfg.mt {
            for index in 0..cfg.paths {
                let alpha = complex_gaussian(rng, 1.0);
                let theta = rng.random_range(0.0..=2.0 * PI);
                let phi = rng.random_range(0.0..=2.0 * PI);
                let tau = rng.random_range(0..=cfg.cp_len) as f64 * cfg.sample_interval;
                paths.push(Path { rx, tx, index, alpha, theta, phi, tau });
            }
        }
    }
    Ok(PathSet { paths })
}

/// Circularly-symmetric complex Gaussian sample with total variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// Normalized ULA response toward `varphi`:
/// entry `n` is `exp(j·2π·(d/λ)·n·sin varphi) / √N`.
pub fn array_response_ula(varphi: f64, n: usize, spacing_ratio: f64) -> Result<DVector<Complex64>> {
    if n == 0 {
        return Err(Error::InvalidInput("array must have at least one element".into()));
    }
    let norm = 1.0 / (n as f64).sqrt();
    let step = 2.0 * PI * spacing_ratio * varphi.sin();
    Ok(DVector::from_fn(n, |i, _| Complex64::from_polar(norm, step * i as f64)))
}

/// Steering vector of `n_block` elements placed in block `block` of an
/// `n_blocks·n_block` vector, zero elsewhere.
pub fn padded_response(
    varphi: f64,
    block: usize,
    n_blocks: usize,
    n_block: usize,
    spacing_ratio: f64,
) -> Result<DVector<Complex64>> {
    if block >= n_blocks {
        return Err(Error::Dimension(format!("block {block} out of {n_blocks}")));
    }
    let a = array_response_ula(varphi, n_block, spacing_ratio)?;
    let mut v = DVector::zeros(n_blocks * n_block);
    v.rows_mut(block * n_block, n_block).copy_from(&a);
    Ok(v)
}

/// Per-subcarrier delay phase `exp(−j2π·(k/K)·(τ/Ts))`.
pub fn delay_phase(k: usize, subcarriers: usize, tau: f64, ts: f64) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * (k as f64 / subcarriers as f64) * (tau / ts))
}

/// Magnitudes `√(β·Nr·Nt/L)·|α|` sorted in descending order. These are the
/// subcarrier-independent diagonal magnitudes of `D[k]`.
pub fn sorted_path_gains(cfg: &SystemConfig, paths: &PathSet) -> Vec<f64> {
    let scale = cfg.path_scale();
    let mut g: Vec<f64> = paths.paths.iter().map(|p| scale * p.alpha.norm()).collect();
    g.sort_by(|a, b| b.total_cmp(a));
    g
}

/// Global descending order of ray indices by `|α|`, ties broken by index.
pub fn sort_order(paths: &PathSet) -> Vec<usize> {
    let mut order: Vec<usize> = (0..paths.len()).collect();
    order.sort_by(|&a, &b| paths.paths[b].alpha.norm().total_cmp(&paths.paths[a].alpha.norm()).then(a.cmp(&b)));
    order
}

/// Per-subcarrier channel matrices and their sorted rank-one decomposition.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// `H[k]`, each `(Mr·Nr)×(Mt·Nt)`.
    pub h: Vec<DMatrix<Complex64>>,
    /// Zero-padded receive steering vectors in sorted order, `(Mr·Nr)×Ls`.
    pub ar: DMatrix<Complex64>,
    /// Zero-padded transmit steering vectors in sorted order, `(Mt·Nt)×Ls`.
    pub at: DMatrix<Complex64>,
    /// Sorted complex gains `α̃_l[k]` per subcarrier.
    pub d: Vec<DVector<Complex64>>,
    /// Sorted position → index into the originating [`PathSet`].
    pub order: Vec<usize>,
}

impl ChannelRealization {
    pub fn subcarriers(&self) -> usize {
        self.h.len()
    }

    pub fn total_paths(&self) -> usize {
        self.order.len()
    }

    /// `A_r·diag(D[k])·A_tᴴ`.
    pub fn reconstruct(&self, k: usize) -> DMatrix<Complex64> {
        let mut scaled = self.ar.clone();
        for (mut col, g) in scaled.column_iter_mut().zip(self.d[k].iter()) {
            col *= *g;
        }
        scaled * self.at.adjoint()
    }
}

/// Assembles `H[k]` for every subcarrier block by block, together with the
/// sorted decomposition factors.
pub fn build_channel(cfg: &SystemConfig, paths: &PathSet) -> Result<ChannelRealization> {
    cfg.validate()?;
    paths.check_against(cfg)?;
    let scale = cfg.path_scale();
    let (nrx, ntx) = (cfg.rx_antennas(), cfg.tx_antennas());
    let k_count = cfg.subcarriers;

    let mut responses = Vec::with_capacity(paths.len());
    for p in &paths.paths {
        let ar = array_response_ula(p.theta, cfg.nr, cfg.spacing_ratio)?;
        let at = array_response_ula(p.phi, cfg.nt, cfg.spacing_ratio)?;
        // Rank-one outer product shared by all subcarriers.
        responses.push(&ar * at.adjoint());
    }

    let mut h = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let mut hk = DMatrix::<Complex64>::zeros(nrx, ntx);
        for rx in 0..cfg.mr {
            for tx in 0..cfg.mt {
                let mut block = hk.view_mut((rx * cfg.nr, tx * cfg.nt), (cfg.nr, cfg.nt));
                for (p, outer) in paths.paths.iter().zip(&responses) {
                    if p.rx != rx || p.tx != tx {
                        continue;
                    }
                    let g = p.alpha * delay_phase(k, k_count, p.tau, cfg.sample_interval) * scale;
                    block.zip_apply(outer, |b, o| *b += g * o);
                }
            }
        }
        h.push(hk);
    }

    let order = sort_order(paths);
    let ls = order.len();
    let mut ar = DMatrix::<Complex64>::zeros(nrx, ls);
    let mut at = DMatrix::<Complex64>::zeros(ntx, ls);
    for (col, &idx) in order.iter().enumerate() {
        let p = &paths.paths[idx];
        ar.set_column(col, &padded_response(p.theta, p.rx, cfg.mr, cfg.nr, cfg.spacing_ratio)?);
        at.set_column(col, &padded_response(p.phi, p.tx, cfg.mt, cfg.nt, cfg.spacing_ratio)?);
    }
    let d = (0..k_count)
        .map(|k| {
            DVector::from_iterator(
                ls,
                order.iter().map(|&idx| {
                    let p = &paths.paths[idx];
                    p.alpha * scale * delay_phase(k, k_count, p.tau, cfg.sample_interval)
                }),
            )
        })
        .collect();

    Ok(ChannelRealization { h, ar, at, d, order })
}

/// Time-domain channel taps indexed by delay sample.
#[derive(Debug, Clone)]
pub struct TapSequence {
    /// `taps[n]` is the full `(Mr·Nr)×(Mt·Nt)` tap matrix at delay `n·Ts`.
    pub taps: Vec<DMatrix<Complex64>>,
    nr: usize,
    nt: usize,
}

impl TapSequence {
    /// The `(rx, tx)` RAU block of tap `n`.
    pub fn block(&self, n: usize, rx: usize, tx: usize) -> DMatrix<Complex64> {
        self.taps[n].view((rx * self.nr, tx * self.nt), (self.nr, self.nt)).into_owned()
    }

    /// K-point DFT over the delay index, one transform per matrix entry.
    pub fn to_frequency(&self, subcarriers: usize) -> Vec<DMatrix<Complex64>> {
        let (rows, cols) = self.taps[0].shape();
        let mut out = vec![DMatrix::<Complex64>::zeros(rows, cols); subcarriers];
        let fft = FftPlanner::new().plan_fft_forward(subcarriers);
        let mut buf = vec![Complex64::new(0.0, 0.0); subcarriers];
        for r in 0..rows {
            for c in 0..cols {
                buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
                for (n, tap) in self.taps.iter().enumerate() {
                    buf[n % subcarriers] += tap[(r, c)];
                }
                fft.process(&mut buf);
                for (k, v) in buf.iter().enumerate() {
                    out[k][(r, c)] = *v;
                }
            }
        }
        out
    }
}

/// Builds the tap sequence `0..=Ncp`. Every delay must sit on the sampling grid.
pub fn time_domain_taps(cfg: &SystemConfig, paths: &PathSet) -> Result<TapSequence> {
    cfg.validate()?;
    paths.check_against(cfg)?;
    let ts = cfg.sample_interval;
    let scale = cfg.path_scale();
    let (nrx, ntx) = (cfg.rx_antennas(), cfg.tx_antennas());
    let mut taps = vec![DMatrix::<Complex64>::zeros(nrx, ntx); cfg.cp_len + 1];
    for p in &paths.paths {
        let pos = p.tau / ts;
        let n = pos.round();
        if (pos - n).abs() > 1e-9 || n < 0.0 || n as usize > cfg.cp_len {
            return Err(Error::OffGridDelay { tau: p.tau, ts });
        }
        let ar = array_response_ula(p.theta, cfg.nr, cfg.spacing_ratio)?;
        let at = array_response_ula(p.phi, cfg.nt, cfg.spacing_ratio)?;
        let outer = (ar * at.adjoint()) * (p.alpha * scale);
        let mut block = taps[n as usize].view_mut((p.rx * cfg.nr, p.tx * cfg.nt), (cfg.nr, cfg.nt));
        block += outer;
    }
    Ok(TapSequence { taps, nr: cfg.nr, nt: cfg.nt })
}

#[derive(Debug, Clone, Serialize)]
pub struct PathRecord {
    pub rx: usize,
    pub tx: usize,
    pub index: usize,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub theta: f64,
    pub phi: f64,
    pub tau: f64,
}

/// Serializable snapshot of a realization for debugging.
#[derive(Debug, Clone, Serialize)]
pub struct ChannelDump {
    pub config: SystemConfig,
    pub paths: Vec<PathRecord>,
    /// Sorted position → path index.
    pub order: Vec<usize>,
    /// Singular values of `H[k]` for each subcarrier, descending.
    pub singular_values: Vec<Vec<f64>>,
}

impl ChannelDump {
    pub fn new(cfg: &SystemConfig, paths: &PathSet, real: &ChannelRealization) -> Self {
        let records = paths
            .paths
            .iter()
            .map(|p| PathRecord {
                rx: p.rx,
                tx: p.tx,
                index: p.index,
                alpha_re: p.alpha.re,
                alpha_im: p.alpha.im,
                theta: p.theta,
                phi: p.phi,
                tau: p.tau,
            })
            .collect();
        let singular_values = real
            .h
            .iter()
            .map(|hk| {
                let mut sv: Vec<f64> = hk.singular_values().iter().copied().collect();
                sv.sort_by(|a, b| b.total_cmp(a));
                sv
            })
            .collect();
        Self { config: cfg.clone(), paths: records, order: real.order.clone(), singular_values }
    }
}
