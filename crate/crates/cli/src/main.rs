use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bicmb::analysis::{fit_slope, union_bound_ber, worst_alpha, BerCurve, BerRow, BoundInputs};
use bicmb::beamforming::LinkMode;
use bicmb::bicmb::ModulationSpec;
use bicmb::channel::{build_channel, draw_paths, ChannelDump};
use bicmb::harness::{parse_snr_range, write_csv, Simulator, Source, SweepConfig};
use bicmb::{validate, Error};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Union-bound truncation beyond dfree.
const BOUND_EXTRA_WEIGHT: usize = 6;

#[derive(Parser)]
#[command(name = "bicmb", version, about = "BICMB-OFDM link simulator and diversity analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER sweep.
    Sweep(CommonArgs),
    /// Union-bound curve over the SNR grid.
    Bound(CommonArgs),
    /// Run the invariant self-checks.
    Validate(CommonArgs),
    /// Write one channel realization as JSON.
    DumpChannel(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// SNR grid as LO:HI:STEP in dB.
    #[arg(long = "snr-db")]
    snr_db: Option<String>,
    #[arg(long = "min-errors")]
    min_errors: Option<u64>,
    /// Trial cap per SNR cell.
    #[arg(long = "max-trials")]
    max_trials: Option<u64>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 3 when any cell is unreliable.
    #[arg(long)]
    strict: bool,
}

enum Failure {
    Config(String),
    Runtime(String),
    Unreliable,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parse(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn load(args: &CommonArgs) -> Result<SweepConfig, Failure> {
    let mut cfg = match &args.config {
        Some(p) => SweepConfig::load(p)?,
        None => SweepConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(r) = &args.snr_db {
        cfg.snr_db = parse_snr_range(r)?;
    }
    if let Some(n) = args.min_errors {
        cfg.min_bit_errors = n;
    }
    if let Some(n) = args.max_trials {
        cfg.max_trials = n;
    }
    if let Some(m) = &args.mode {
        cfg.mode = m.parse::<LinkMode>()?;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn sweep(args: &CommonArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    let sim = Simulator::new(cfg.clone())?;
    let curve = sim.run_sweep()?;
    let mut out = output(&args.out)?;
    write_csv(&mut out, &curve, Source::Sim, cfg.seed)?;
    out.flush()?;
    let unreliable: Vec<f64> = curve.rows.iter().filter(|r| !r.reliable).map(|r| r.snr_db).collect();
    if !unreliable.is_empty() {
        log::warn!("unreliable cells (dB): {unreliable:?}");
        if args.strict {
            return Err(Failure::Unreliable);
        }
    }
    Ok(())
}

fn bound(args: &CommonArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    let sim = Simulator::new(cfg.clone())?;
    let sys = &cfg.system;
    let dmax = sim.code().dfree() + BOUND_EXTRA_WEIGHT;
    let snr_lin: Vec<f64> = cfg.snr_db.iter().map(|db| 10f64.powf(db / 10.0)).collect();
    let inputs = BoundInputs::from_code(
        sim.code(),
        sim.interleaver(),
        sim.modulation().d_min(),
        sys.nr,
        sys.paths,
        sys.beta(),
        snr_lin,
        dmax,
    )?;
    let values = union_bound_ber(&inputs, dmax)?;
    let rows: Vec<BerRow> = cfg
        .snr_db
        .iter()
        .zip(&values)
        .map(|(&snr_db, &ber)| BerRow { snr_db, trials: 0, info_bits: 0, bit_errors: 0, ber, reliable: true })
        .collect();
    let mut curve = BerCurve { rows, fit: None };
    if let Some(w) = curve.top_window(3) {
        let pts: Vec<(f64, f64)> = curve.rows.iter().map(|r| (r.snr_db, r.ber)).collect();
        curve.fit = fit_slope(&pts, w).ok();
    }
    let mut out = output(&args.out)?;
    write_csv(&mut out, &curve, Source::Bound, cfg.seed)?;
    if let Some(t) = inputs.dominant_term() {
        writeln!(out, "# dominant alpha={:?} offset={} delta={}", t.alpha, t.offset, t.delta())?;
    }
    if let Some((_, offset, alpha)) = worst_alpha(sim.code(), sim.interleaver(), sim.code().dfree()) {
        writeln!(out, "# most unbalanced dfree alpha={alpha:?} offset={offset}")?;
    }
    out.flush()?;
    Ok(())
}

fn run_validate(args: &CommonArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    let checks = validate::run_all(&cfg.system, cfg.seed)?;
    let mut out = output(&args.out)?;
    let mut failed = 0;
    for c in &checks {
        writeln!(out, "{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        failed += usize::from(!c.passed);
    }
    writeln!(out, "{}", ModulationSpec::square_qam(cfg.modulation_order)?.table())?;
    out.flush()?;
    if failed > 0 {
        return Err(Failure::Runtime(format!("{failed} checks failed")));
    }
    Ok(())
}

fn dump_channel(args: &CommonArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let paths = draw_paths(&cfg.system, &mut rng)?;
    let real = build_channel(&cfg.system, &paths)?;
    let dump = ChannelDump::new(&cfg.system, &paths, &real);
    let mut out = output(&args.out)?;
    serde_json::to_writer_pretty(&mut out, &dump).map_err(|e| Failure::Runtime(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Bound(a) => bound(a),
        Command::Validate(a) => run_validate(a),
        Command::DumpChannel(a) => dump_channel(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Unreliable) => {
            eprintln!("error: unreliable cells present");
            ExitCode::from(3)
        }
    }
}
