use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Scenario parameters shared by every stage of the link.
///
/// Defaults follow the reference setup: a 2×2 RAU deployment, 64 subcarriers
/// with a 16-sample cyclic prefix at 50 ns sampling (3.2 µs useful symbol +
/// 0.8 µs CP), β = −20 dB, half-wavelength ULAs and two streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Transmit RAUs.
    pub mt: usize,
    /// Receive RAUs.
    pub mr: usize,
    /// Antennas per transmit RAU.
    pub nt: usize,
    /// Antennas per receive RAU.
    pub nr: usize,
    /// Propagation paths per RAU pair.
    pub paths: usize,
    /// Subcarriers per OFDM symbol.
    pub subcarriers: usize,
    /// Cyclic-prefix length in samples.
    pub cp_len: usize,
    /// Sampling interval in seconds.
    pub sample_interval: f64,
    /// Large-scale fading coefficient in dB.
    pub beta_db: f64,
    /// Antenna spacing over wavelength.
    pub spacing_ratio: f64,
    /// Data streams per subcarrier.
    pub streams: usize,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            mt: 2,
            mr: 2,
            nt: 16,
            nr: 16,
            paths: 3,
            subcarriers: 64,
            cp_len: 16,
            sample_interval: 50e-9,
            beta_db: -20.0,
            spacing_ratio: 0.5,
            streams: 2,
        }
    }
}

impl SystemConfig {
    /// Total number of propagation paths, `Mr·Mt·L`.
    pub fn total_paths(&self) -> usize {
        self.mr * self.mt * self.paths
    }

    pub fn rx_antennas(&self) -> usize {
        self.mr * self.nr
    }

    pub fn tx_antennas(&self) -> usize {
        self.mt * self.nt
    }

    pub fn beta(&self) -> f64 {
        10f64.powf(self.beta_db / 10.0)
    }

    /// Amplitude scale `√(β·Nr·Nt/L)` applied to every path.
    pub fn path_scale(&self) -> f64 {
        (self.beta() * (self.nr * self.nt) as f64 / self.paths as f64).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("mt", self.mt),
            ("mr", self.mr),
            ("nt", self.nt),
            ("nr", self.nr),
            ("paths", self.paths),
            ("subcarriers", self.subcarriers),
            ("streams", self.streams),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !self.subcarriers.is_power_of_two() {
            return Err(Error::Config(format!("subcarriers must be a power of two, got {}", self.subcarriers)));
        }
        if !(self.sample_interval > 0.0 && self.sample_interval.is_finite()) {
            return Err(Error::Config("sample_interval must be positive".into()));
        }
        if !self.beta_db.is_finite() || !self.spacing_ratio.is_finite() {
            return Err(Error::Config("beta_db and spacing_ratio must be finite".into()));
        }
        let rank_cap = self.rx_antennas().min(self.tx_antennas());
        if self.streams > rank_cap {
            return Err(Error::Config(format!("streams ({}) exceed min(Mr·Nr, Mt·Nt) = {rank_cap}", self.streams)));
        }
        if self.streams > self.total_paths() {
            return Err(Error::Config(format!(
                "streams ({}) exceed the path count Mr·Mt·L = {}",
                self.streams,
                self.total_paths()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = SystemConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.subcarriers as f64 * cfg.sample_interval, 3.2e-6);
        assert!((cfg.cp_len as f64 * cfg.sample_interval - 0.8e-6).abs() < 1e-15);
        assert!((cfg.beta() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_counts() {
        let cfg = SystemConfig { paths: 0, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let cfg = SystemConfig { subcarriers: 48, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = SystemConfig { mt: 1, mr: 1, paths: 1, streams: 2, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
