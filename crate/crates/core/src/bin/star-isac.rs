use std::fs;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use star_isac::ao::{run_ao, AoOptions};
use star_isac::channels::{generate_channel_set, write_channel_dump};
use star_isac::error::{Error, Result};
use star_isac::harness::{run_convergence, run_sweep, SweepParam, SweepSpec, TrialStatus};
use star_isac::scenario::{build_from_raw, RawScenario};
use star_isac::selftest::run_selftest;

#[derive(Parser)]
#[command(name = "star-isac", version, about = "Active STAR-RIS ISAC beamforming simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one alternating optimization.
    Run {
        /// Scenario TOML; desk-scale defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// ued, eed, sd or passive (overrides the config).
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Per-iteration CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Text dump of the generated channels.
        #[arg(long)]
        dump_channels: Option<PathBuf>,
    },
    /// Monte-Carlo sweep described by a TOML spec.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        /// Output directory (defaults to `out` in the sweep file, then `sweep-out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 0 uses one per core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Oracle cross-checks.
    Selftest,
}

fn run(
    config: Option<PathBuf>,
    mode: Option<String>,
    seed: Option<u64>,
    trace_path: Option<PathBuf>,
    dump: Option<PathBuf>,
) -> Result<bool> {
    let mut raw: RawScenario = match &config {
        Some(path) => toml::from_str(&fs::read_to_string(path)?).map_err(|e| Error::Parse(e.to_string()))?,
        None => RawScenario {
            m: Some(4),
            n: Some(16),
            ..Default::default()
        },
    };
    if mode.is_some() {
        raw.mode = mode;
    }
    if seed.is_some() {
        raw.seed = seed;
    }
    raw.mode.get_or_insert_with(|| "ued".into());
    raw.seed.get_or_insert(1);
    let sc = build_from_raw(raw)?;

    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let channels = generate_channel_set(&sc, &mut rng)?;
    if let Some(path) = dump {
        write_channel_dump(&channels, &mut BufWriter::new(fs::File::create(path)?))?;
    }
    let trace = run_ao(&sc, &channels, &AoOptions::default())?;
    if let Some(path) = trace_path {
        trace.write_csv(&mut BufWriter::new(fs::File::create(path)?))?;
    }

    let last = trace.records.last().map(|r| &r.feasibility).unwrap_or(&trace.initial_feasibility);
    println!("mode        {}", sc.mode.name());
    println!("seed        {}", sc.seed);
    println!("iterations  {}", trace.iterations_used());
    println!("converged   {}", trace.converged);
    println!("sum rate    {:.6} bit/s/Hz (initial {:.6})", trace.final_sum_rate(), trace.initial_sum_rate);
    println!("radar SNR   {:.6e}", trace.final_radar_snr());
    println!("worst slack {:.3e}", last.worst_slack());

    let mut ok = true;
    if let Some(msg) = &trace.failure {
        eprintln!("error: block failed: {msg}");
        ok = false;
    }
    if trace.stalled {
        eprintln!("error: radar SNR floor out of reach, restoration stalled");
        ok = false;
    }
    if last.worst_slack() < -1e-6 {
        eprintln!("error: final iterate violates a constraint (slack {:.3e})", last.worst_slack());
        ok = false;
    }
    Ok(ok)
}

fn sweep(spec_path: PathBuf, out: Option<PathBuf>, jobs: usize) -> Result<bool> {
    let spec = SweepSpec::from_toml(&fs::read_to_string(&spec_path)?)?;
    let dir = out
        .or_else(|| spec.out.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("sweep-out"));
    let results = run_sweep(&spec, jobs)?;
    results.write_all(&dir)?;
    if spec.param == SweepParam::Iterations {
        run_convergence(&spec, jobs)?.write_all(&dir)?;
    }
    for s in results.summary() {
        println!(
            "{}={:<8} {:<10} median {:>10.4} [{:.4}, {:.4}]  ok {}/{}",
            spec.param.name(),
            s.value,
            s.mode,
            s.sum_rate.median,
            s.sum_rate.q1,
            s.sum_rate.q3,
            s.ok,
            s.trials
        );
    }
    let failed: Vec<_> = results.rows.iter().filter(|r| r.status != TrialStatus::Ok).collect();
    for r in &failed {
        eprintln!(
            "error: {}={} {} trial {}: {} {}",
            spec.param.name(),
            r.value,
            r.mode,
            r.trial,
            r.status.label(),
            r.message
        );
    }
    println!("wrote {}", dir.display());
    Ok(failed.is_empty())
}

fn selftest() -> bool {
    let checks = run_selftest();
    for c in &checks {
        println!("{} {:<45} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    checks.iter().all(|c| c.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            mode,
            seed,
            trace,
            dump_channels,
        } => run(config, mode, seed, trace, dump_channels),
        Command::Sweep { spec, out, jobs } => sweep(spec, out, jobs),
        Command::Selftest => Ok(selftest()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
