#![allow(dead_code)]

use bicmb::beamforming::{rate_objective, water_fill};
use bicmb::bicmb::{bit_metrics, build_interleaver, compute_alpha_vector, ModulationSpec};
use bicmb::channel::{build_channel, draw_paths, time_domain_taps};
use bicmb::codec::{conv_encode, enumerate_error_events, viterbi_decode, CodeSpec, Termination};
use bicmb::{Complex64, SystemConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Outcome = Result<String, String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn bits_of(word: u32, len: usize) -> Vec<u8> {
    (0..len).map(|i| ((word >> i) & 1) as u8).collect()
}

fn path_cost(code: &CodeSpec, msg: &[u8], metrics: &[[f64; 2]]) -> f64 {
    conv_encode(code, msg, Termination::Terminated).iter().zip(metrics).map(|(b, c)| c[*b as usize]).sum()
}

/// Viterbi output against exhaustive search over every message.
pub fn viterbi_vs_brute_force(instances: usize, seed: u64) -> Outcome {
    let code = CodeSpec::standard();
    let mut rng = rng(seed);
    for n in 0..instances {
        let len = 1 + n % 12;
        let metrics: Vec<[f64; 2]> =
            (0..2 * (len + code.tail_len())).map(|_| [rng.random::<f64>() * 4.0, rng.random::<f64>() * 4.0]).collect();
        let decoded = viterbi_decode(&code, &metrics, Termination::Terminated).map_err(|e| e.to_string())?;
        let (best_word, best) = (0..1u32 << len)
            .map(|w| (w, path_cost(&code, &bits_of(w, len), &metrics)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        let got = path_cost(&code, &decoded, &metrics);
        if decoded != bits_of(best_word, len) || (got - best).abs() > 1e-9 {
            return Err(format!("instance {n} (len {len}): viterbi cost {got}, ML cost {best}"));
        }
    }
    Ok(format!("{instances} instances, 1..=12 info bits"))
}

/// DFT of the delay taps against the directly assembled frequency response.
pub fn taps_match_frequency(realizations: usize, seed: u64) -> Outcome {
    let cfgs = [
        SystemConfig { nt: 4, nr: 4, ..Default::default() },
        SystemConfig { mt: 1, mr: 3, nt: 8, nr: 2, paths: 5, ..Default::default() },
        SystemConfig { nt: 8, nr: 8, paths: 2, subcarriers: 16, cp_len: 15, ..Default::default() },
    ];
    let mut rng = rng(seed);
    let mut worst = 0.0f64;
    for n in 0..realizations {
        let cfg = &cfgs[n % cfgs.len()];
        let paths = draw_paths(cfg, &mut rng).map_err(|e| e.to_string())?;
        let real = build_channel(cfg, &paths).map_err(|e| e.to_string())?;
        let freq = time_domain_taps(cfg, &paths).map_err(|e| e.to_string())?.to_frequency(cfg.subcarriers);
        for (f, h) in freq.iter().zip(&real.h) {
            worst = worst.max((f - h).norm() / h.norm());
        }
    }
    if worst < 1e-10 {
        Ok(format!("{realizations} realizations, max rel err {worst:.2e}"))
    } else {
        Err(format!("max rel err {worst:.2e}"))
    }
}

fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    // The optimum can sit on the boundary (a stream switched off).
    [(lo, f(lo)), (hi, f(hi)), ((a + b) / 2.0, f((a + b) / 2.0))].into_iter().fold((lo, f64::NEG_INFINITY), |acc, x| {
        if x.1 > acc.1 {
            x
        } else {
            acc
        }
    })
}

/// Best objective over the power simplex by nested golden-section search.
/// The rate objective is concave, so each nested maximum is concave too.
fn simplex_search(gains: &[f64], noise: f64, total: f64) -> f64 {
    fn rec(gains: &[f64], noise: f64, left: f64, fixed: &mut Vec<f64>) -> f64 {
        if fixed.len() + 1 == gains.len() {
            fixed.push(left);
            let v = rate_objective(gains, fixed, noise);
            fixed.pop();
            return v;
        }
        golden_max(
            |p| {
                let mut f = fixed.clone();
                f.push(p);
                rec(gains, noise, left - p, &mut f)
            },
            0.0,
            left,
        )
        .1
    }
    rec(gains, noise, total, &mut Vec::new())
}

/// Water-filling against a direct search of the power simplex.
pub fn water_filling_vs_search(instances: usize, seed: u64) -> Outcome {
    let mut rng = rng(seed);
    let mut worst = 0.0f64;
    for n in 0..instances {
        let ns = 1 + n % 3;
        let gains: Vec<f64> = (0..ns).map(|_| rng.random_range(0.05..3.0)).collect();
        let noise = rng.random_range(0.05..2.0);
        let total = rng.random_range(0.1..6.0);
        let p = water_fill(&gains, noise, total).map_err(|e| e.to_string())?;
        let gap = simplex_search(&gains, noise, total) - rate_objective(&gains, &p, noise);
        worst = worst.max(gap.abs());
        if gap.abs() >= 1e-6 {
            return Err(format!("instance {n}: gains {gains:?} noise {noise} total {total} gap {gap:.3e}"));
        }
    }
    Ok(format!("{instances} instances, max gap {worst:.2e}"))
}

/// Per-bit metrics against a scan of each half-set.
pub fn bit_metrics_vs_scan(scalars: usize, seed: u64) -> Outcome {
    let modulation = ModulationSpec::qam16();
    let mut rng = rng(seed);
    for n in 0..scalars {
        let y = Complex64::new(rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5));
        let sigma = rng.random_range(0.0..3.0);
        let gamma = rng.random_range(0.0..1.5);
        let m = bit_metrics(&modulation, y, sigma, gamma);
        let amp = sigma * gamma;
        for (i, c) in m.iter().enumerate() {
            for b in 0..2u8 {
                let scan = modulation
                    .half_set(i, b)
                    .iter()
                    .map(|&l| (y - modulation.point(l) * amp).norm_sqr())
                    .fold(f64::INFINITY, f64::min);
                if scan != c[b as usize] {
                    return Err(format!("scalar {n}: bit {i} value {b}: {} vs scan {scan}", c[b as usize]));
                }
            }
        }
    }
    Ok(format!("{scalars} scalars, exact"))
}

/// Every error event up to `dmax` splits its weight over the streams at
/// every interleaver offset.
pub fn alpha_sums(dmax: usize) -> Outcome {
    let code = CodeSpec::standard();
    let map = build_interleaver(64, 2, 4, code.dfree()).map_err(|e| e.to_string())?;
    let events = enumerate_error_events(&code, dmax).map_err(|e| e.to_string())?;
    for ev in &events {
        for offset in 0..map.block_len() {
            let alpha = compute_alpha_vector(&map, &ev.coded, offset);
            if alpha.iter().sum::<usize>() != ev.weight() {
                return Err(format!("event {} offset {offset}: {alpha:?}", ev.to_bit_string()));
            }
        }
    }
    Ok(format!("{} events up to weight {dmax}, {} offsets each", events.len(), map.block_len()))
}

/// Sample mean of `|alpha|²` over freshly drawn rays.
pub fn alpha_second_moment(draws: usize, seed: u64) -> Outcome {
    let cfg = SystemConfig { mt: 1, mr: 1, paths: 10, ..Default::default() };
    let mut rng = rng(seed);
    let mut sum = 0.0;
    let mut n = 0usize;
    while n < draws {
        for p in draw_paths(&cfg, &mut rng).map_err(|e| e.to_string())?.paths {
            sum += p.alpha.norm_sqr();
            n += 1;
        }
    }
    let mean = sum / n as f64;
    let detail = format!("E|alpha|^2 = {mean:.4} over {n} draws");
    if (mean - 1.0).abs() <= 0.02 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Sample variance of the injected noise against `Nt/SNR`.
pub fn noise_calibration(samples: usize, seed: u64) -> Outcome {
    let mut rng = rng(seed);
    let mut details = Vec::new();
    for (nt, snr_db) in [(16usize, 20.0), (8, 5.0), (32, 32.5)] {
        let n0 = bicmb::harness::noise_variance(nt, snr_db);
        let (mut re, mut im) = (0.0, 0.0);
        for _ in 0..samples {
            let z = bicmb::channel::complex_gaussian(&mut rng, n0);
            re += z.re * z.re;
            im += z.im * z.im;
        }
        let var = (re + im) / samples as f64;
        let split = re / (re + im);
        details.push(format!("Nt={nt} {snr_db} dB: var/N0 = {:.4}, real share {split:.4}", var / n0));
        if (var / n0 - 1.0).abs() > 0.01 || (split - 0.5).abs() > 0.01 {
            return Err(details.join("; "));
        }
    }
    Ok(details.join("; "))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Median relative gap between the exact singular values and the scaled,
/// sorted ray gains, for `Nt = Nr = N`, `Mt = Mr = 2`, `L = 2`.
pub fn singular_value_gap(n: usize, realizations: usize, seed: u64) -> Result<f64, String> {
    use bicmb::beamforming::{effective_link, LinkMode};
    let cfg = SystemConfig { nt: n, nr: n, paths: 2, subcarriers: 4, cp_len: 3, ..Default::default() };
    let mut rng = rng(seed);
    let mut gaps = Vec::new();
    for _ in 0..realizations {
        let paths = draw_paths(&cfg, &mut rng).map_err(|e| e.to_string())?;
        let gains = bicmb::channel::sorted_path_gains(&cfg, &paths);
        let real = build_channel(&cfg, &paths).map_err(|e| e.to_string())?;
        let link = effective_link(&cfg, &real, LinkMode::Svd).map_err(|e| e.to_string())?;
        for (s, g) in gains.iter().take(cfg.streams).enumerate() {
            gaps.push((link.sigma[(0, s)] - g).abs() / g);
        }
    }
    Ok(median(gaps))
}

/// Convergence of the exact singular values to the ray gains as the arrays grow.
pub fn singular_value_convergence(realizations: usize, seed: u64) -> Outcome {
    let sizes = [8, 32, 128];
    let gaps = sizes.iter().map(|&n| singular_value_gap(n, realizations, seed)).collect::<Result<Vec<_>, _>>()?;
    let detail = format!("median gaps N=8: {:.4}, N=32: {:.4}, N=128: {:.4}", gaps[0], gaps[1], gaps[2]);
    if gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] < 0.05 {
        Ok(detail)
    } else {
        Err(detail)
    }
}
