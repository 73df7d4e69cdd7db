//! Monte-Carlo sweeps and convergence curves.
//!
//! A sweep document is flat TOML:
//!
//! ```toml
//! param = "total_power_dBm"
//! values = [10, 14, 18, 22, 26]
//! modes = ["UED", "EED", "EED:CCM", "SD", "Passive"]
//! trials = 20
//! seed = 1
//!
//! [base]
//! gamma_t_db = 0.0
//! ```
//!
//! `base` takes the keys of a scenario document; `mode` and `seed` there are
//! ignored. Array sizes default to the desk scale (M=4, N=16) unless
//! `full_scale = true`.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use super::format::fmt_float;
use super::stats::Quartiles;
use crate::ao::{run_ao, AoOptions, AoTrace};
use crate::channels::generate_channel_set;
use crate::error::{Error, Result};
use crate::subproblems::BlockStatus;
use crate::scenario::{build_from_raw, db_to_linear, ModeSpec, PhaseSolver, RawScenario, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    TotalPowerDbm,
    GammaTDb,
    Elements,
    RisBsDistance,
    /// Sum rate after a given number of AO iterations.
    Iterations,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::TotalPowerDbm => "total_power_dBm",
            SweepParam::GammaTDb => "Gamma_t_dB",
            SweepParam::Elements => "N",
            SweepParam::RisBsDistance => "ris_bs_distance_m",
            SweepParam::Iterations => "iterations",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "total_power_dBm" | "total_power_dbm" => Ok(SweepParam::TotalPowerDbm),
            "Gamma_t_dB" | "gamma_t_db" => Ok(SweepParam::GammaTDb),
            "N" | "n" => Ok(SweepParam::Elements),
            "ris_bs_distance_m" => Ok(SweepParam::RisBsDistance),
            "iterations" => Ok(SweepParam::Iterations),
            other => Err(Error::Invalid {
                field: "param",
                reason: format!(
                    "unknown sweep parameter `{other}` (expected total_power_dBm, Gamma_t_dB, N, ris_bs_distance_m or iterations)"
                ),
            }),
        }
    }
}

/// One compared configuration: a mode plus its phase solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeEntry {
    pub label: String,
    pub mode: String,
    pub solver: PhaseSolver,
}

impl ModeEntry {
    /// Parses `MODE` or `MODE:SOLVER`, e.g. `EED:CCM`.
    pub fn parse(s: &str, default_solver: PhaseSolver) -> Result<Self> {
        let (mode, solver) = match s.split_once(':') {
            Some((m, sol)) => (m.trim(), PhaseSolver::from_name(sol.trim())?),
            None => (s.trim(), default_solver),
        };
        ModeSpec::from_name(mode, 2)?;
        let label = match s.split_once(':') {
            Some(_) => format!("{}-{}", mode.to_ascii_uppercase(), solver.name().to_ascii_uppercase()),
            None => mode.to_ascii_uppercase(),
        };
        Ok(ModeEntry {
            label,
            mode: mode.to_string(),
            solver,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub modes: Vec<ModeEntry>,
    pub trials: usize,
    pub base: ScenarioConfig,
    pub seed: u64,
    /// Reuse one seed per trial index across sweep points, so every point
    /// sees the same user drop and fading draw.
    pub fixed_positions: bool,
    /// Output directory named in the document, if any.
    pub out: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    param: String,
    values: Vec<f64>,
    modes: Option<Vec<String>>,
    trials: Option<usize>,
    seed: Option<u64>,
    phase_solver: Option<String>,
    fixed_positions: Option<bool>,
    full_scale: Option<bool>,
    out: Option<String>,
    base: Option<RawScenario>,
}

impl SweepSpec {
    pub fn from_toml(doc: &str) -> Result<Self> {
        let raw: RawSweep = toml::from_str(doc).map_err(|e| Error::Parse(e.to_string()))?;
        let seed = raw.seed.unwrap_or(1);
        let mut base = raw.base.unwrap_or_default();
        if !raw.full_scale.unwrap_or(false) {
            base.m.get_or_insert(4);
            base.n.get_or_insert(16);
        }
        base.mode = Some("ued".into());
        base.seed = Some(seed);
        let base = build_from_raw(base)?;
        let solver = match raw.phase_solver {
            Some(s) => PhaseSolver::from_name(&s)?,
            None => base.phase_solver,
        };
        let names = raw
            .modes
            .unwrap_or_else(|| ["UED", "EED", "SD", "Passive"].map(String::from).to_vec());
        let modes = names
            .iter()
            .map(|s| ModeEntry::parse(s, solver))
            .collect::<Result<Vec<_>>>()?;
        let spec = SweepSpec {
            param: SweepParam::from_name(&raw.param)?,
            values: raw.values,
            modes,
            trials: raw.trials.unwrap_or(20),
            base,
            seed,
            fixed_positions: raw.fixed_positions.unwrap_or(false),
            out: raw.out,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |field: &'static str, reason: String| Err(Error::Invalid { field, reason });
        if self.values.is_empty() {
            return invalid("values", "value list is empty".into());
        }
        if self.trials == 0 {
            return invalid("trials", "need at least one trial".into());
        }
        if self.modes.is_empty() {
            return invalid("modes", "no modes to compare".into());
        }
        for &v in &self.values {
            if !v.is_finite() {
                return invalid("values", format!("{v} is not finite"));
            }
            let ok = match self.param {
                SweepParam::Elements | SweepParam::Iterations => v >= 1.0 && v.fract() == 0.0,
                SweepParam::RisBsDistance => v > 0.0,
                SweepParam::TotalPowerDbm | SweepParam::GammaTDb => true,
            };
            if !ok {
                return invalid("values", format!("{v} is not valid for {}", self.param.name()));
            }
        }
        Ok(())
    }

    /// Scenario of one (point, mode) pair, without the trial seed.
    pub fn scenario(&self, value: f64, mode: &ModeEntry) -> Result<ScenarioConfig> {
        let mut sc = self.base.clone();
        match self.param {
            SweepParam::TotalPowerDbm => {
                let fraction = self.base.p_bs / self.base.total_power();
                sc.set_total_power_dbm(value, fraction);
            }
            SweepParam::GammaTDb => sc.gamma_t = db_to_linear(value),
            SweepParam::Elements => sc.set_elements(value as usize),
            SweepParam::RisBsDistance => {
                let (b, r) = (self.base.bs_pos, self.base.ris_pos);
                let dir = [r[0] - b[0], r[1] - b[1], r[2] - b[2]];
                let len = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
                sc.ris_pos = std::array::from_fn(|i| b[i] + dir[i] * value / len);
            }
            SweepParam::Iterations => sc.q_max = self.max_iterations(),
        }
        let parsed = ModeSpec::from_name(&mode.mode, sc.n)?;
        sc.mode = match (&parsed, &self.base.mode) {
            (ModeSpec::Sd(_), ModeSpec::Sd(mask)) if mask.len() == sc.n => self.base.mode.clone(),
            _ => parsed,
        };
        sc.phase_solver = mode.solver;
        sc.validate()?;
        Ok(sc)
    }

    fn max_iterations(&self) -> usize {
        match self.param {
            SweepParam::Iterations => self.values.iter().fold(1.0f64, |a, &b| a.max(b)) as usize,
            _ => self.base.q_max,
        }
    }

    pub fn trial_seed(&self, point: usize, trial: usize) -> u64 {
        let point = if self.fixed_positions { 0 } else { point };
        derive_seed(self.seed, point as u64, trial as u64)
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `splitmix64(splitmix64(splitmix64(base) ^ point) ^ trial)`.
pub fn derive_seed(base: u64, point: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ point) ^ trial)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialStatus {
    Ok,
    /// A block failed at some iteration and kept its previous iterate.
    BlockFailed,
    /// No block failed but the final iterate violates a constraint.
    Infeasible,
    /// Setup or solver error before any result.
    Error,
}

impl TrialStatus {
    pub fn label(self) -> &'static str {
        match self {
            TrialStatus::Ok => "ok",
            TrialStatus::BlockFailed => "block_failed",
            TrialStatus::Infeasible => "infeasible",
            TrialStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub point: usize,
    pub value: f64,
    pub mode_index: usize,
    pub mode: String,
    pub trial: usize,
    pub seed: u64,
    pub status: TrialStatus,
    pub sum_rate: f64,
    pub radar_snr: f64,
    pub iterations: usize,
    pub converged: bool,
    pub feasible: bool,
    pub worst_slack: f64,
    pub message: String,
    pub wall_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResults {
    pub param: SweepParam,
    pub rows: Vec<TrialRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub value: f64,
    pub mode: String,
    pub trials: usize,
    pub ok: usize,
    pub converged: usize,
    pub sum_rate: Quartiles,
    pub radar_snr_median: f64,
    pub iterations_median: f64,
}

struct Job {
    point: usize,
    value: f64,
    mode_index: usize,
    trial: usize,
}

struct TrialRun {
    job: Job,
    seed: u64,
    trace: Result<AoTrace>,
    wall_s: f64,
}

fn run_jobs(spec: &SweepSpec, points: &[f64], jobs: usize) -> Result<Vec<TrialRun>> {
    let mut list = Vec::new();
    for (point, &value) in points.iter().enumerate() {
        for mode_index in 0..spec.modes.len() {
            for trial in 0..spec.trials {
                list.push(Job {
                    point,
                    value,
                    mode_index,
                    trial,
                });
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    let mut runs: Vec<TrialRun> = pool.install(|| {
        list.into_par_iter()
            .map(|job| {
                let seed = spec.trial_seed(job.point, job.trial);
                let start = Instant::now();
                let trace = spec.scenario(job.value, &spec.modes[job.mode_index]).and_then(|mut sc| {
                    sc.seed = seed;
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let channels = generate_channel_set(&sc, &mut rng)?;
                    run_ao(&sc, &channels, &AoOptions::default())
                });
                TrialRun {
                    job,
                    seed,
                    trace,
                    wall_s: start.elapsed().as_secs_f64(),
                }
            })
            .collect()
    });
    runs.sort_by_key(|r| (r.job.point, r.job.mode_index, r.job.trial));
    Ok(runs)
}

fn row_from(spec: &SweepSpec, run: &TrialRun, value: f64, point: usize, upto: Option<usize>) -> TrialRow {
    let mut row = TrialRow {
        point,
        value,
        mode_index: run.job.mode_index,
        mode: spec.modes[run.job.mode_index].label.clone(),
        trial: run.job.trial,
        seed: run.seed,
        status: TrialStatus::Error,
        sum_rate: f64::NAN,
        radar_snr: f64::NAN,
        iterations: 0,
        converged: false,
        feasible: false,
        worst_slack: f64::NAN,
        message: String::new(),
        wall_s: run.wall_s,
    };
    match &run.trace {
        Err(e) => row.message = e.to_string(),
        Ok(trace) => {
            let used = trace.iterations_used();
            let take = upto.map_or(used, |q| q.min(used));
            let (rate, snr, feas) = match take {
                0 => (trace.initial_sum_rate, trace.initial_feasibility.radar_snr, &trace.initial_feasibility),
                t => {
                    let r = &trace.records[t - 1];
                    (r.sum_rate, r.radar_snr, &r.feasibility)
                }
            };
            row.sum_rate = rate;
            row.radar_snr = snr;
            row.iterations = take;
            row.converged = trace.converged && take == used;
            row.feasible = feas.feasible;
            row.worst_slack = feas.worst_slack();
            let failed = trace.records[..take].iter().find_map(|r| {
                [&r.transmit_status, &r.star_status].into_iter().find_map(|s| match s {
                    BlockStatus::Failed(msg) => Some(msg.clone()),
                    _ => None,
                })
            });
            (row.status, row.message) = match failed {
                Some(msg) => (TrialStatus::BlockFailed, msg),
                None if !feas.feasible && trace.stalled && take == used => {
                    (TrialStatus::Infeasible, "radar floor out of reach, restoration stalled".into())
                }
                None if !feas.feasible => (TrialStatus::Infeasible, "final iterate violates a constraint".into()),
                None => (TrialStatus::Ok, String::new()),
            };
        }
    }
    row
}

/// Runs every (value, mode, trial) combination on `jobs` worker threads
/// (0 picks one per core). Trial failures are recorded per row.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<SweepResults> {
    spec.validate()?;
    if spec.param == SweepParam::Iterations {
        let runs = run_jobs(spec, &[spec.max_iterations() as f64], jobs)?;
        return Ok(iteration_rows(spec, &runs));
    }
    let runs = run_jobs(spec, &spec.values, jobs)?;
    let rows = runs
        .iter()
        .map(|r| row_from(spec, r, r.job.value, r.job.point, None))
        .collect();
    Ok(SweepResults { param: spec.param, rows })
}

fn iteration_rows(spec: &SweepSpec, runs: &[TrialRun]) -> SweepResults {
    let mut rows = Vec::new();
    for (point, &v) in spec.values.iter().enumerate() {
        for run in runs {
            rows.push(row_from(spec, run, v, point, Some(v as usize)));
        }
    }
    rows.sort_by_key(|r| (r.point, r.mode_index, r.trial));
    SweepResults { param: spec.param, rows }
}

impl SweepResults {
    /// Quartiles per (value, mode) over rows with status `ok`.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut keys: Vec<(usize, usize)> = self.rows.iter().map(|r| (r.point, r.mode_index)).collect();
        keys.sort();
        keys.dedup();
        keys.iter()
            .map(|&(p, m)| {
                let group: Vec<&TrialRow> = self.rows.iter().filter(|r| r.point == p && r.mode_index == m).collect();
                let ok: Vec<&&TrialRow> = group.iter().filter(|r| r.status == TrialStatus::Ok).collect();
                let rates: Vec<f64> = ok.iter().map(|r| r.sum_rate).collect();
                let snrs: Vec<f64> = ok.iter().map(|r| r.radar_snr).collect();
                let iters: Vec<f64> = ok.iter().map(|r| r.iterations as f64).collect();
                SummaryRow {
                    value: group[0].value,
                    mode: group[0].mode.clone(),
                    trials: group.len(),
                    ok: ok.len(),
                    converged: ok.iter().filter(|r| r.converged).count(),
                    sum_rate: Quartiles::of(&rates),
                    radar_snr_median: Quartiles::of(&snrs).median,
                    iterations_median: Quartiles::of(&iters).median,
                }
            })
            .collect()
    }

    /// Long format, one row per trial; no timing so reruns are byte-identical.
    pub fn write_results_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(
            out,
            "param,value,mode,trial,seed,status,sum_rate,radar_snr,iterations,converged,feasible,worst_slack,message"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.param.name(),
                fmt_float(r.value),
                r.mode,
                r.trial,
                r.seed,
                r.status.label(),
                fmt_float(r.sum_rate),
                fmt_float(r.radar_snr),
                r.iterations,
                r.converged,
                r.feasible,
                fmt_float(r.worst_slack),
                csv_text(&r.message)
            )?;
        }
        Ok(())
    }

    pub fn write_timings_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "param,value,mode,trial,wall_s,per_iteration_s")?;
        for r in &self.rows {
            let per = if r.iterations > 0 { r.wall_s / r.iterations as f64 } else { f64::NAN };
            writeln!(
                out,
                "{},{},{},{},{},{}",
                self.param.name(),
                fmt_float(r.value),
                r.mode,
                r.trial,
                fmt_float(r.wall_s),
                fmt_float(per)
            )?;
        }
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(
            out,
            "param,value,mode,trials,ok,converged,median,q1,q3,radar_snr_median,iterations_median"
        )?;
        for s in self.summary() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                self.param.name(),
                fmt_float(s.value),
                s.mode,
                s.trials,
                s.ok,
                s.converged,
                fmt_float(s.sum_rate.median),
                fmt_float(s.sum_rate.q1),
                fmt_float(s.sum_rate.q3),
                fmt_float(s.radar_snr_median),
                fmt_float(s.iterations_median)
            )?;
        }
        Ok(())
    }

    /// One gnuplot data block per mode, selectable with `index`.
    pub fn write_gnuplot<W: Write>(&self, out: &mut W) -> Result<()> {
        let summary = self.summary();
        let mut modes: Vec<&str> = Vec::new();
        for s in &summary {
            if !modes.contains(&s.mode.as_str()) {
                modes.push(&s.mode);
            }
        }
        writeln!(out, "# sum rate (bit/s/Hz) versus {}", self.param.name())?;
        writeln!(out, "# columns: value median q1 q3")?;
        for (i, mode) in modes.iter().enumerate() {
            if i > 0 {
                writeln!(out)?;
                writeln!(out)?;
            }
            writeln!(out, "# index {i}: {mode}")?;
            for s in summary.iter().filter(|s| s.mode == *mode) {
                writeln!(
                    out,
                    "{} {} {} {}",
                    fmt_float(s.value),
                    fmt_float(s.sum_rate.median),
                    fmt_float(s.sum_rate.q1),
                    fmt_float(s.sum_rate.q3)
                )?;
            }
        }
        Ok(())
    }

    /// Writes `results.csv`, `timings.csv`, `summary.csv` and `summary.dat`.
    pub fn write_all(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut buf = Vec::new();
        self.write_results_csv(&mut buf)?;
        fs::write(dir.join("results.csv"), &buf)?;
        buf.clear();
        self.write_timings_csv(&mut buf)?;
        fs::write(dir.join("timings.csv"), &buf)?;
        buf.clear();
        self.write_summary_csv(&mut buf)?;
        fs::write(dir.join("summary.csv"), &buf)?;
        buf.clear();
        self.write_gnuplot(&mut buf)?;
        fs::write(dir.join("summary.dat"), &buf)?;
        Ok(())
    }
}

fn csv_text(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergencePoint {
    pub iteration: usize,
    pub sum_rate: f64,
    pub fp_objective: f64,
    pub delta: f64,
    pub radar_snr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceCurve {
    pub mode_index: usize,
    pub mode: String,
    pub trial: usize,
    pub seed: u64,
    pub converged: bool,
    pub error: Option<String>,
    pub points: Vec<ConvergencePoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub q_max: usize,
    pub curves: Vec<ConvergenceCurve>,
}

/// Runs each (mode, trial) once on the base scenario and keeps the
/// per-iteration sum rate. With `param = "iterations"` the iteration cap is
/// the largest listed value; otherwise the first value of the sweep is used.
pub fn run_convergence(spec: &SweepSpec, jobs: usize) -> Result<ConvergenceTable> {
    spec.validate()?;
    let value = match spec.param {
        SweepParam::Iterations => spec.max_iterations() as f64,
        _ => spec.values[0],
    };
    let runs = run_jobs(spec, &[value], jobs)?;
    let q_max = spec.scenario(value, &spec.modes[0])?.q_max;
    let curves = runs
        .into_iter()
        .map(|run| {
            let mode = spec.modes[run.job.mode_index].label.clone();
            let (points, converged, error) = match run.trace {
                Ok(t) => (
                    t.records
                        .iter()
                        .map(|r| ConvergencePoint {
                            iteration: r.iteration,
                            sum_rate: r.sum_rate,
                            fp_objective: r.fp_objective(),
                            delta: r.delta,
                            radar_snr: r.radar_snr,
                        })
                        .collect(),
                    t.converged,
                    t.failure,
                ),
                Err(e) => (Vec::new(), false, Some(e.to_string())),
            };
            ConvergenceCurve {
                mode_index: run.job.mode_index,
                mode,
                trial: run.job.trial,
                seed: run.seed,
                converged,
                error,
                points,
            }
        })
        .collect();
    Ok(ConvergenceTable { q_max, curves })
}

impl ConvergenceTable {
    /// Quartiles of the sum rate at each iteration per mode. A converged run
    /// holds its final value for the remaining iterations.
    pub fn summary(&self) -> Vec<(String, usize, Quartiles)> {
        let mut modes: Vec<(usize, &str)> = self.curves.iter().map(|c| (c.mode_index, c.mode.as_str())).collect();
        modes.sort();
        modes.dedup();
        let mut out = Vec::new();
        for (idx, name) in modes {
            let curves: Vec<&ConvergenceCurve> = self
                .curves
                .iter()
                .filter(|c| c.mode_index == idx && c.error.is_none() && !c.points.is_empty())
                .collect();
            for it in 1..=self.q_max {
                let vals: Vec<f64> = curves
                    .iter()
                    .map(|c| c.points[(it - 1).min(c.points.len() - 1)].sum_rate)
                    .collect();
                out.push((name.to_string(), it, Quartiles::of(&vals)));
            }
        }
        out
    }

    /// One row per executed iteration of every run.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "mode,trial,seed,iteration,sum_rate,fp_objective,delta,radar_snr")?;
        for c in &self.curves {
            for p in &c.points {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    c.mode,
                    c.trial,
                    c.seed,
                    p.iteration,
                    fmt_float(p.sum_rate),
                    fmt_float(p.fp_objective),
                    fmt_float(p.delta),
                    fmt_float(p.radar_snr)
                )?;
            }
        }
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "mode,iteration,median,q1,q3")?;
        for (mode, it, q) in self.summary() {
            writeln!(
                out,
                "{mode},{it},{},{},{}",
                fmt_float(q.median),
                fmt_float(q.q1),
                fmt_float(q.q3)
            )?;
        }
        Ok(())
    }

    pub fn write_gnuplot<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "# sum rate (bit/s/Hz) versus AO iteration")?;
        writeln!(out, "# columns: iteration median q1 q3")?;
        let summary = self.summary();
        let mut current: Option<&str> = None;
        let mut index = 0;
        for (mode, it, q) in &summary {
            if current != Some(mode.as_str()) {
                if current.is_some() {
                    writeln!(out)?;
                    writeln!(out)?;
                }
                writeln!(out, "# index {index}: {mode}")?;
                index += 1;
                current = Some(mode);
            }
            writeln!(
                out,
                "{it} {} {} {}",
                fmt_float(q.median),
                fmt_float(q.q1),
                fmt_float(q.q3)
            )?;
        }
        Ok(())
    }

    /// Writes `convergence.csv`, `convergence_summary.csv` and `convergence.dat`.
    pub fn write_all(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        fs::write(dir.join("convergence.csv"), &buf)?;
        buf.clear();
        self.write_summary_csv(&mut buf)?;
        fs::write(dir.join("convergence_summary.csv"), &buf)?;
        buf.clear();
        self.write_gnuplot(&mut buf)?;
        fs::write(dir.join("convergence.dat"), &buf)?;
        Ok(())
    }
}
