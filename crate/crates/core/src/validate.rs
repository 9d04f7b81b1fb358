//! Fast self-checks of the core invariants, run by `bicmb validate`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::beamforming::{rate_objective, uniform_power, water_fill};
use crate::bicmb::{bit_metrics, build_interleaver, check_criteria, compute_alpha_vector, ModulationSpec};
use crate::channel::{array_response_ula, build_channel, draw_paths, time_domain_taps};
use crate::codec::{compute_free_distance, conv_encode, enumerate_error_events, viterbi_decode, CodeSpec, Termination};
use crate::{Result, SystemConfig};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

/// Runs every check against `cfg` with a fixed seed.
pub fn run_all(cfg: &SystemConfig, seed: u64) -> Result<Vec<Check>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for i in 0..=720 {
        let ang = 2.0 * PI * i as f64 / 720.0;
        for n in [1, 2, 7, cfg.nr, cfg.nt] {
            worst = worst.max((array_response_ula(ang, n, cfg.spacing_ratio)?.norm() - 1.0).abs());
        }
    }
    out.push(check("steering-unit-norm", worst < 1e-12, format!("max |‖a‖−1| = {worst:.2e}")));

    let mut recon = 0.0f64;
    let mut taps_err = 0.0f64;
    for _ in 0..3 {
        let paths = draw_paths(cfg, &mut rng)?;
        let real = build_channel(cfg, &paths)?;
        let freq = time_domain_taps(cfg, &paths)?.to_frequency(cfg.subcarriers);
        for (k, (h, f)) in real.h.iter().zip(&freq).enumerate() {
            let norm = h.norm().max(f64::MIN_POSITIVE);
            recon = recon.max((h - real.reconstruct(k)).norm() / norm);
            taps_err = taps_err.max((f - h).norm() / norm);
        }
    }
    out.push(check("rank-one-reconstruction", recon < 1e-12, format!("max rel err {recon:.2e}")));
    out.push(check("taps-dft-equivalence", taps_err < 1e-10, format!("max rel err {taps_err:.2e}")));

    let mut wf_ok = true;
    for _ in 0..100 {
        let ns = rng.random_range(1..=4);
        let gains: Vec<f64> = (0..ns).map(|_| rng.random_range(0.05..3.0)).collect();
        let noise = rng.random_range(0.1..2.0);
        let total = rng.random_range(0.1..5.0);
        let p = water_fill(&gains, noise, total)?;
        let sum: f64 = p.iter().sum();
        let active: Vec<f64> =
            p.iter().zip(&gains).filter(|(p, _)| **p > 0.0).map(|(p, g)| p + noise / (g * g)).collect();
        let level = active[0];
        let kkt = active.iter().all(|l| (l - level).abs() < 1e-8)
            && p.iter().zip(&gains).all(|(p, g)| *p > 0.0 || noise / (g * g) >= level - 1e-8);
        let beats_uniform =
            rate_objective(&gains, &p, noise) >= rate_objective(&gains, &uniform_power(ns, total)?, noise) - 1e-12;
        wf_ok &= (sum - total).abs() < 1e-10 && kkt && beats_uniform;
    }
    out.push(check("water-filling-kkt", wf_ok, "100 random instances".into()));

    let code = CodeSpec::standard();
    let sp = compute_free_distance(&code, 12)?;
    out.push(check(
        "code-spectrum",
        sp.dfree == 10 && sp.count(10) == 11,
        format!("dfree={} W(10)={}", sp.dfree, sp.count(10)),
    ));

    let modulation = ModulationSpec::qam16();
    let map = build_interleaver(cfg.subcarriers, cfg.streams, modulation.bits_per_symbol(), code.dfree())?;
    let rep = check_criteria(&map, code.dfree());
    out.push(check("interleaver-criteria", rep.all_pass(), format!("{rep:?}")));

    let mut alpha_ok = true;
    for ev in enumerate_error_events(&code, 12)? {
        for offset in 0..map.block_len() {
            alpha_ok &= compute_alpha_vector(&map, &ev.coded, offset).iter().sum::<usize>() == ev.weight();
        }
    }
    out.push(check("alpha-sums", alpha_ok, "every event of weight ≤ 12, every offset".into()));

    let mut ml_ok = true;
    for _ in 0..20 {
        let len = rng.random_range(1..=8);
        let metrics: Vec<[f64; 2]> =
            (0..2 * (len + code.tail_len())).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let decoded = viterbi_decode(&code, &metrics, Termination::Terminated)?;
        let cost = |msg: &[u8]| -> f64 {
            conv_encode(&code, msg, Termination::Terminated).iter().zip(&metrics).map(|(b, c)| c[*b as usize]).sum()
        };
        let best = (0..1u32 << len)
            .map(|w| cost(&(0..len).map(|i| ((w >> i) & 1) as u8).collect::<Vec<_>>()))
            .fold(f64::INFINITY, f64::min);
        ml_ok &= (cost(&decoded) - best).abs() < 1e-12;
    }
    out.push(check("viterbi-ml", ml_ok, "20 brute-force instances".into()));

    let mut metric_ok = true;
    for _ in 0..1000 {
        let y = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let amp = rng.random_range(0.0..2.0);
        let m = bit_metrics(&modulation, y, amp, 1.0);
        for (i, c) in m.iter().enumerate() {
            for b in 0..2u8 {
                let scan = modulation
                    .half_set(i, b)
                    .iter()
                    .map(|&l| (y - modulation.point(l) * amp).norm_sqr())
                    .fold(f64::INFINITY, f64::min);
                metric_ok &= scan == c[b as usize];
            }
        }
    }
    out.push(check("bit-metrics-scan", metric_ok, "1000 random scalars".into()));

    Ok(out)
}
