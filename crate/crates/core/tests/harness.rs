use std::path::Path;

use bicmb::harness::{run_sweep, write_csv, Source, SweepConfig};

fn small_sweep() -> SweepConfig {
    SweepConfig {
        snr_db: vec![12.5, 15.0, 17.5, 20.0],
        max_trials: 3000,
        bits_per_trial: 512,
        batch: 64,
        seed: 7,
        ..Default::default()
    }
}

fn csv(cfg: &SweepConfig) -> String {
    let mut out = Vec::new();
    write_csv(&mut out, &run_sweep(cfg).unwrap(), Source::Sim, cfg.seed).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn output_independent_of_worker_count() {
    let one = csv(&SweepConfig { workers: 1, ..small_sweep() });
    let eight = csv(&SweepConfig { workers: 8, ..small_sweep() });
    assert_eq!(one, eight);
    assert!(one.starts_with("source,snr_db,trials,info_bits,bit_errors,ber\n"));
    assert!(one.lines().last().unwrap().starts_with("# slope="));
}

#[test]
fn reliable_cells_meet_error_target_and_ber_falls() {
    let cfg = small_sweep();
    let curve = run_sweep(&cfg).unwrap();
    for row in &curve.rows {
        assert_eq!(row.reliable, row.bit_errors >= cfg.min_bit_errors);
        assert!(row.reliable || row.trials == cfg.max_trials);
        assert_eq!(row.info_bits, row.trials * cfg.bits_per_trial as u64);
    }
    let reliable: Vec<_> = curve.reliable_rows().collect();
    assert!(reliable.len() >= 2);
    for w in reliable.windows(2) {
        let sd = |r: &bicmb::analysis::BerRow| (r.ber / r.info_bits as f64).sqrt();
        assert!(w[1].ber <= w[0].ber + 3.0 * (sd(w[0]) + sd(w[1])), "{:?}", w);
    }
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            SweepConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 3);
}
