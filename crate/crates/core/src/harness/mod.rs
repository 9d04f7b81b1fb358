//! Monte Carlo BER engine.
//!
//! One trial draws a channel realization and carries one terminated coded
//! block through encode → interleave → map → scalar channels with AWGN →
//! bit metrics → deinterleave → Viterbi. Each SNR cell accumulates trials in
//! fixed-size batches until it has enough bit errors or hits the trial cap.

mod output;
mod seed;

pub use output::{slope_comment, write_csv, write_rows, Source, CSV_HEADER};
pub use seed::TrialSeeder;

use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{estimate_slope, BerCurve, BerRow};
use crate::beamforming::{effective_link, EffectiveLink, LinkMode, PowerPolicy};
use crate::bicmb::{build_interleaver, deinterleave_metrics, map_labels, InterleaverMap, ModulationSpec};
use crate::channel::{build_channel, complex_gaussian, draw_paths};
use crate::codec::{conv_encode, viterbi_decode, CodeSpec, Termination};
use crate::{Error, Result, SystemConfig};

/// Everything a BER sweep needs. Loads from TOML; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub system: SystemConfig,
    /// SNR grid in dB, strictly increasing.
    pub snr_db: Vec<f64>,
    pub min_bit_errors: u64,
    pub max_trials: u64,
    pub seed: u64,
    pub mode: LinkMode,
    pub power_policy: PowerPolicy,
    /// Information bits per trial, excluding the zero tail.
    pub bits_per_trial: usize,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    /// Trials between stopping-rule checks. Results depend on this, not on `workers`.
    pub batch: u64,
    pub modulation_order: usize,
    /// Generator polynomials (octal literals such as `0o133` in TOML).
    pub generators: Vec<u32>,
    pub constraint_length: usize,
    /// When false, information bits are mapped uncoded and sliced hard.
    pub coded: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            snr_db: (0..=8).map(|i| 20.0 + 2.5 * i as f64).collect(),
            min_bit_errors: 100,
            max_trials: 200_000,
            seed: 1,
            mode: LinkMode::Asymptotic,
            power_policy: PowerPolicy::Uniform,
            bits_per_trial: 1024,
            workers: 0,
            batch: 256,
            modulation_order: 16,
            generators: vec![0o133, 0o171],
            constraint_length: 7,
            coded: true,
        }
    }
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("sweep config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.snr_db.is_empty() {
            return Err(Error::Config("SNR grid is empty".into()));
        }
        if self.snr_db.windows(2).any(|w| w[1] <= w[0]) || self.snr_db.iter().any(|s| s.is_nan()) {
            return Err(Error::Config("SNR grid must be strictly increasing".into()));
        }
        if self.min_bit_errors == 0 {
            return Err(Error::Config("min_bit_errors must be at least 1".into()));
        }
        if self.max_trials == 0 || self.batch == 0 || self.bits_per_trial == 0 {
            return Err(Error::Config("max_trials, batch and bits_per_trial must be positive".into()));
        }
        if self.max_trials >= 1 << 40 {
            return Err(Error::Config("max_trials must be below 2^40".into()));
        }
        Ok(())
    }
}

/// Parses `LO:HI:STEP` (dB) into an inclusive grid.
pub fn parse_snr_range(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Config(format!("SNR range must look like LO:HI:STEP, got `{spec}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    let (lo, hi, step) = (nums[0], nums[1], nums[2]);
    if step.is_nan() || step <= 0.0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(bad());
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + step * i as f64).collect())
}

/// Complex noise variance per stream, `Nt/SNR`.
pub fn noise_variance(nt: usize, snr_db: f64) -> f64 {
    nt as f64 / 10f64.powf(snr_db / 10.0)
}

/// Bits sent and bit errors from one or more trials. Merging is
/// associative and commutative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialOutcome {
    pub info_bits: u64,
    pub bit_errors: u64,
}

impl std::ops::Add for TrialOutcome {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self { info_bits: self.info_bits + rhs.info_bits, bit_errors: self.bit_errors + rhs.bit_errors }
    }
}

/// Prepared link: code, constellation and interleaver built once per sweep.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SweepConfig,
    code: CodeSpec,
    modulation: ModulationSpec,
    map: InterleaverMap,
}

impl Simulator {
    pub fn new(cfg: SweepConfig) -> Result<Self> {
        cfg.validate()?;
        let code = CodeSpec::new(&cfg.generators, cfg.constraint_length)?;
        let modulation = ModulationSpec::square_qam(cfg.modulation_order)?;
        let map =
            build_interleaver(cfg.system.subcarriers, cfg.system.streams, modulation.bits_per_symbol(), code.dfree())?;
        Ok(Self { cfg, code, modulation, map })
    }

    pub fn config(&self) -> &SweepConfig {
        &self.cfg
    }

    pub fn code(&self) -> &CodeSpec {
        &self.code
    }

    pub fn modulation(&self) -> &ModulationSpec {
        &self.modulation
    }

    pub fn interleaver(&self) -> &InterleaverMap {
        &self.map
    }

    /// Draws the effective link of one channel realization.
    pub fn draw_link<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<EffectiveLink> {
        let sys = &self.cfg.system;
        let paths = draw_paths(sys, rng)?;
        match self.cfg.mode {
            LinkMode::Asymptotic => EffectiveLink::asymptotic(sys, &paths),
            mode => effective_link(sys, &build_channel(sys, &paths)?, mode),
        }
    }

    /// One trial at `snr_db`: a fresh channel realization and one block.
    pub fn run_trial<R: Rng + ?Sized>(&self, snr_db: f64, rng: &mut R) -> Result<TrialOutcome> {
        let mut link = self.draw_link(rng)?;
        let n0 = noise_variance(self.cfg.system.nt, snr_db);
        if self.cfg.power_policy != PowerPolicy::Uniform {
            link.apply_power(self.cfg.power_policy, n0.max(f64::MIN_POSITIVE))?;
        }
        self.run_link(&link, n0, rng)
    }

    /// Carries one block over a fixed link with complex noise variance `n0`.
    pub fn run_link<R: Rng + ?Sized>(&self, link: &EffectiveLink, n0: f64, rng: &mut R) -> Result<TrialOutcome> {
        let (k_count, ns) = (self.map.subcarriers(), self.map.streams());
        if link.subcarriers() != k_count || link.streams() != ns {
            return Err(Error::Dimension(format!(
                "link is {}x{}, interleaver expects {k_count}x{ns}",
                link.subcarriers(),
                link.streams()
            )));
        }
        let info: Vec<u8> = (0..self.cfg.bits_per_trial).map(|_| rng.random::<bool>() as u8).collect();
        let coded = if self.cfg.coded { conv_encode(&self.code, &info, Termination::Terminated) } else { info.clone() };

        let m = self.modulation.bits_per_symbol();
        let labels = map_labels(&coded, &self.map);
        let mut sym_metrics = vec![[0.0; 2]; labels.len() * m];
        for (idx, &label) in labels.iter().enumerate() {
            let (k, s) = ((idx / ns) % k_count, idx % ns);
            let amp = link.sigma[(k, s)] * link.gamma[(k, s)];
            let noise = if n0 > 0.0 { complex_gaussian(rng, n0) } else { Complex64::new(0.0, 0.0) };
            let y = self.modulation.point(label) * amp + noise;
            self.modulation.bit_metrics_into(y, amp, &mut sym_metrics[idx * m..(idx + 1) * m]);
        }
        let metrics = deinterleave_metrics(&sym_metrics, &self.map, coded.len());

        let decoded = if self.cfg.coded {
            viterbi_decode(&self.code, &metrics, Termination::Terminated)?
        } else {
            metrics.iter().map(|c| (c[1] < c[0]) as u8).collect()
        };
        let bit_errors = info.iter().zip(&decoded).filter(|(a, b)| a != b).count() as u64;
        Ok(TrialOutcome { info_bits: info.len() as u64, bit_errors })
    }

    /// Runs one SNR cell, checking the stopping rule after every batch.
    pub fn run_cell(&self, cell: usize, snr_db: f64, seeder: &TrialSeeder) -> Result<BerRow> {
        let mut trials = 0u64;
        let mut acc = TrialOutcome::default();
        while acc.bit_errors < self.cfg.min_bit_errors && trials < self.cfg.max_trials {
            let n = self.cfg.batch.min(self.cfg.max_trials - trials);
            let batch = (trials..trials + n)
                .into_par_iter()
                .map(|t| self.run_trial(snr_db, &mut seeder.rng(cell, t)))
                .try_reduce(TrialOutcome::default, |a, b| Ok(a + b))?;
            acc = acc + batch;
            trials += n;
        }
        let ber = if acc.info_bits > 0 { acc.bit_errors as f64 / acc.info_bits as f64 } else { 0.0 };
        Ok(BerRow {
            snr_db,
            trials,
            info_bits: acc.info_bits,
            bit_errors: acc.bit_errors,
            ber,
            reliable: acc.bit_errors >= self.cfg.min_bit_errors,
        })
    }

    pub fn run_sweep(&self) -> Result<BerCurve> {
        let seeder = TrialSeeder::new(self.cfg.seed);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.workers)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        let rows = pool.install(|| {
            self.cfg
                .snr_db
                .iter()
                .enumerate()
                .map(|(cell, &snr)| {
                    let row = self.run_cell(cell, snr, &seeder)?;
                    log::info!(
                        "snr {:>6.2} dB: {} trials, {} errors, ber {:.3e}{}",
                        row.snr_db,
                        row.trials,
                        row.bit_errors,
                        row.ber,
                        if row.reliable { "" } else { " (unreliable)" }
                    );
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let mut curve = BerCurve { rows, fit: None };
        curve.fit = curve.top_window(3).and_then(|w| estimate_slope(&curve, w).ok());
        Ok(curve)
    }
}

/// Builds the simulator for `cfg` and runs the whole SNR grid.
pub fn run_sweep(cfg: &SweepConfig) -> Result<BerCurve> {
    Simulator::new(cfg.clone())?.run_sweep()
}

/// One trial of `cfg` at `snr_db`.
pub fn run_trial<R: Rng + ?Sized>(cfg: &SweepConfig, snr_db: f64, rng: &mut R) -> Result<TrialOutcome> {
    Simulator::new(cfg.clone())?.run_trial(snr_db, rng)
}
