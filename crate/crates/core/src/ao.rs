//! Alternating optimization driver.
//!
//! Each outer iteration updates, in order: the FP auxiliaries `(γ, ρ)`, the
//! radar filter `u`, the DFBS beams `W`, and the surface coefficients for the
//! configured protocol. The surrogate value is recorded after every block so
//! the block-ascent property can be audited from the trace.

use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channels::ChannelSet;
use crate::error::{Error, Result};
use crate::fp::{fp_objective, update_gamma, update_rho, Noise};
use crate::harness::fmt_float;
use crate::linalg::{c, cis, CMat, CVec, RVec};
use crate::metrics::{
    check_feasibility, equivalent_channels, incident_power, squared_norm_mat, sum_rate, BeamformingState, FeasibilityReport,
    StarState, SystemParams,
};
use crate::scenario::{ModeSpec, ScenarioConfig, Side};
use crate::subproblems::{
    assemble_transmit_problem, solve_radar_filter, solve_star_eed, solve_star_sd, solve_star_ued, solve_transmit_beamforming,
    BlockStatus,
};

/// Fraction of each budget used by the initial point.
pub const INIT_BUDGET_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AoOptions {
    /// Overrides the scenario's iteration cap.
    pub q_max: Option<usize>,
    /// Overrides the scenario's stopping threshold.
    pub delta_th: Option<f64>,
    /// Seed of the initial surface phases; defaults to the scenario seed.
    pub init_seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlockTimings {
    pub aux: f64,
    pub radar: f64,
    pub transmit: f64,
    pub star: f64,
}

impl BlockTimings {
    pub fn total(&self) -> f64 {
        self.aux + self.radar + self.transmit + self.star
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Surrogate after the auxiliary, radar, transmit, and surface blocks.
    pub fp_blocks: [f64; 4],
    pub sum_rate: f64,
    pub radar_snr: f64,
    pub delta: f64,
    pub feasibility: FeasibilityReport,
    pub bs_power: f64,
    pub timing: BlockTimings,
    pub radar_degenerate: bool,
    pub transmit_status: BlockStatus,
    pub star_status: BlockStatus,
}

impl IterationRecord {
    pub fn fp_objective(&self) -> f64 {
        self.fp_blocks[3]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoTrace {
    pub mode: ModeSpec,
    pub initial_fp: f64,
    pub initial_sum_rate: f64,
    pub initial_feasibility: FeasibilityReport,
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    /// First subproblem failure, if any. A failed block keeps its previous
    /// iterate and the run continues.
    pub failure: Option<String>,
    /// Radar restoration stopped gaining ground, so the sensing floor is out of
    /// reach from this point and the run ended early.
    pub stalled: bool,
    pub state: BeamformingState,
    pub star: StarState,
}

pub const TRACE_COLUMNS: [&str; 23] = [
    "iteration",
    "fp_objective",
    "fp_after_aux",
    "fp_after_radar",
    "fp_after_transmit",
    "fp_after_star",
    "sum_rate",
    "radar_snr",
    "delta",
    "slack_c1",
    "slack_c2",
    "slack_c3",
    "slack_c4",
    "slack_c5",
    "slack_passive",
    "bs_power",
    "ris_power",
    "t_aux_s",
    "t_radar_s",
    "t_transmit_s",
    "t_star_s",
    "transmit_status",
    "star_status",
];

impl AoTrace {
    pub fn iterations_used(&self) -> usize {
        self.records.len()
    }

    pub fn final_sum_rate(&self) -> f64 {
        self.records.last().map_or(self.initial_sum_rate, |r| r.sum_rate)
    }

    pub fn final_radar_snr(&self) -> f64 {
        self.records
            .last()
            .map_or(self.initial_feasibility.radar_snr, |r| r.radar_snr)
    }

    pub fn sum_rates(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.sum_rate).collect()
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.delta).collect()
    }

    /// Initial surrogate followed by its value after every block update.
    pub fn fp_sequence(&self) -> Vec<f64> {
        std::iter::once(self.initial_fp)
            .chain(self.records.iter().flat_map(|r| r.fp_blocks))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "{}", TRACE_COLUMNS.join(","))?;
        for r in &self.records {
            let f = &r.feasibility;
            let nums = [
                r.fp_objective(),
                r.fp_blocks[0],
                r.fp_blocks[1],
                r.fp_blocks[2],
                r.fp_blocks[3],
                r.sum_rate,
                r.radar_snr,
                r.delta,
                f.c1,
                f.c2,
                f.c3,
                f.c4,
                f.c5,
                f.passive,
                r.bs_power,
                f.ris_power,
                r.timing.aux,
                r.timing.radar,
                r.timing.transmit,
                r.timing.star,
            ];
            let body: Vec<String> = nums.iter().map(|&v| fmt_float(v)).collect();
            writeln!(
                out,
                "{},{},{},{}",
                r.iteration,
                body.join(","),
                r.transmit_status.label(),
                r.star_status.label()
            )?;
        }
        Ok(())
    }
}

/// Per-element side weights `(β_r, β_t)` of a mode.
fn side_weights(mode: &ModeSpec, n: usize) -> (RVec, RVec) {
    match mode {
        ModeSpec::Sd(mask) => (
            RVec::from_fn(n, |i, _| if mask[i] == Side::Reflect { 1.0 } else { 0.0 }),
            RVec::from_fn(n, |i, _| if mask[i] == Side::Transmit { 1.0 } else { 0.0 }),
        ),
        _ => (RVec::from_element(n, 1.0), RVec::from_element(n, 1.0)),
    }
}

/// Matched-filter user beams plus identity radar beams at 90% of the DFBS
/// budget, random surface phases with a common amplitude at 90% of the surface
/// budget (or `|ψ_r,n|² + |ψ_t,n|² = 0.9` for the passive surrogate), and the
/// radar filter aligned with the target channel.
pub fn initialize<R: Rng + ?Sized>(
    scenario: &ScenarioConfig,
    channels: &ChannelSet,
    rng: &mut R,
) -> Result<(BeamformingState, StarState)> {
    let params = SystemParams::from_scenario(scenario);
    let (m, n, k) = (channels.m(), channels.n(), channels.k());
    let (beta_r, beta_t) = side_weights(&scenario.mode, n);
    let phases = |rng: &mut R| CVec::from_fn(n, |_, _| cis(2.0 * std::f64::consts::PI * rng.random::<f64>()));
    let phi_r = phases(rng);
    let phi_t = phases(rng);
    let mut star = StarState {
        a_r: beta_r.clone(),
        a_t: beta_t.clone(),
        phi_r,
        phi_t,
    };

    let h = equivalent_channels(channels, &star)?;
    let mut w = CMat::zeros(m, k + m);
    for (i, hk) in h.iter().enumerate() {
        let norm = hk.norm();
        if norm > 0.0 {
            w.set_column(i, &(hk / c(norm, 0.0)));
        } else {
            w[(0, i)] = c(1.0, 0.0);
        }
    }
    for j in 0..m {
        w[(j, k + j)] = c(1.0, 0.0);
    }
    let scale = (INIT_BUDGET_FRACTION * params.p_bs / squared_norm_mat(&w)).sqrt();
    w *= c(scale, 0.0);

    let amplitude = match params.p_ris {
        Some(budget) => {
            let inc = incident_power(&w, &channels.g);
            let base: f64 = (0..n)
                .map(|i| (beta_r[i].powi(2) + beta_t[i].powi(2)) * (inc[i] + params.sigma_v_sq))
                .sum();
            (INIT_BUDGET_FRACTION * budget / base).sqrt()
        }
        None => (INIT_BUDGET_FRACTION / 2.0).sqrt(),
    };
    star.a_r = &beta_r * amplitude;
    star.a_t = &beta_t * amplitude;

    let u = &channels.h_dt / c(channels.h_dt.norm().max(f64::MIN_POSITIVE), 0.0);
    Ok((BeamformingState::new(w, u), star))
}

fn check_inputs(scenario: &ScenarioConfig, channels: &ChannelSet) -> Result<()> {
    scenario.validate()?;
    channels.validate()?;
    if channels.m() != scenario.m || channels.n() != scenario.n || channels.k() != scenario.k() {
        return Err(Error::Dimension(format!(
            "channels are M={} N={} K={}, scenario is M={} N={} K={}",
            channels.m(),
            channels.n(),
            channels.k(),
            scenario.m,
            scenario.n,
            scenario.k()
        )));
    }
    Ok(())
}

/// `|R_pre − R| / R`, infinite when `R = 0`.
pub fn relative_change(previous: f64, current: f64) -> f64 {
    if current > 0.0 {
        (previous - current).abs() / current
    } else {
        f64::INFINITY
    }
}

/// Random stream for the initial point, separate from the channel stream.
pub fn init_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

pub fn run_ao(scenario: &ScenarioConfig, channels: &ChannelSet, options: &AoOptions) -> Result<AoTrace> {
    check_inputs(scenario, channels)?;
    let mut rng = init_rng(options.init_seed.unwrap_or(scenario.seed));
    let (state, star) = initialize(scenario, channels, &mut rng)?;
    run_ao_from(scenario, channels, options, state, star)
}

/// Runs the iterations from a given starting point.
pub fn run_ao_from(
    scenario: &ScenarioConfig,
    channels: &ChannelSet,
    options: &AoOptions,
    mut state: BeamformingState,
    mut star: StarState,
) -> Result<AoTrace> {
    check_inputs(scenario, channels)?;
    let params = SystemParams::from_scenario(scenario);
    let noise = Noise::from(&params);
    let q_max = options.q_max.unwrap_or(scenario.q_max);
    let delta_th = options.delta_th.unwrap_or(scenario.delta_th);
    let f = |st: &BeamformingState, s: &StarState| fp_objective(&st.gamma, &st.rho, &st.w, s, channels, noise);

    let initial_fp = f(&state, &star)?;
    let initial_sum_rate = sum_rate(&state.w, &star, channels, noise.sigma_k_sq, noise.sigma_v_sq)?;
    let initial_feasibility = check_feasibility(&state, &star, scenario, channels, 1e-6)?;
    let mut r_pre = initial_sum_rate;
    let mut records = Vec::new();
    let mut converged = false;
    let mut failure = None;
    let mut stalled = false;
    let mut prev_radar = initial_feasibility.radar_snr;

    for iteration in 1..=q_max {
        let mut timing = BlockTimings::default();
        let mut fp_blocks = [0.0; 4];

        let t0 = Instant::now();
        state.gamma = update_gamma(&state.w, &star, channels, noise)?;
        state.rho = update_rho(&state.gamma, &state.w, &star, channels, noise)?;
        timing.aux = t0.elapsed().as_secs_f64();
        fp_blocks[0] = f(&state, &star)?;

        let t0 = Instant::now();
        let radar = solve_radar_filter(&state.w, &channels.h_dt, params.sigma_z_sq)?;
        state.u = radar.u;
        timing.radar = t0.elapsed().as_secs_f64();
        fp_blocks[1] = f(&state, &star)?;

        let t0 = Instant::now();
        let data = assemble_transmit_problem(&state, &star, channels, &params, &state.w)?;
        let tx = solve_transmit_beamforming(&data);
        state.w = tx.value;
        timing.transmit = t0.elapsed().as_secs_f64();
        fp_blocks[2] = f(&state, &star)?;

        let t0 = Instant::now();
        let st = match &scenario.mode {
            ModeSpec::Ued | ModeSpec::PassiveBaseline => solve_star_ued(&state, &star, channels, &params)?,
            ModeSpec::Eed => solve_star_eed(&state, &star, channels, &params, scenario.phase_solver)?,
            ModeSpec::Sd(mask) => solve_star_sd(
                &state,
                &star,
                channels,
                &params,
                mask,
                scenario.phase_solver,
                scenario.sd_freeze_amplitudes,
            )?,
        };
        star = st.value;
        timing.star = t0.elapsed().as_secs_f64();
        fp_blocks[3] = f(&state, &star)?;

        let rate = sum_rate(&state.w, &star, channels, noise.sigma_k_sq, noise.sigma_v_sq)?;
        let delta = relative_change(r_pre, rate);
        r_pre = rate;
        let feasibility = check_feasibility(&state, &star, scenario, channels, 1e-6)?;
        for status in [&tx.status, &st.status] {
            if let BlockStatus::Failed(msg) = status {
                failure.get_or_insert_with(|| msg.clone());
            }
        }
        let radar_snr = feasibility.radar_snr;
        let restoring = tx.status == BlockStatus::Restoring;
        records.push(IterationRecord {
            iteration,
            fp_blocks,
            sum_rate: rate,
            radar_snr,
            delta,
            bs_power: squared_norm_mat(&state.w),
            feasibility,
            timing,
            radar_degenerate: radar.degenerate,
            transmit_status: tx.status,
            star_status: st.status,
        });
        if restoring {
            if relative_change(prev_radar, radar_snr) < delta_th {
                stalled = true;
                break;
            }
        } else if delta < delta_th {
            converged = true;
            break;
        }
        prev_radar = radar_snr;
    }

    Ok(AoTrace {
        mode: scenario.mode.clone(),
        initial_fp,
        initial_sum_rate,
        initial_feasibility,
        records,
        converged,
        failure,
        stalled,
        state,
        star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::generate_channel_set;
    use crate::metrics::ris_power;

    fn setup(mode: ModeSpec, seed: u64) -> (ScenarioConfig, ChannelSet) {
        let sc = ScenarioConfig::desk_scale(mode, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = generate_channel_set(&sc, &mut rng).unwrap();
        (sc, ch)
    }

    #[test]
    fn initial_point_uses_ninety_percent_of_budgets() {
        for mode in [ModeSpec::Ued, ModeSpec::Eed, ModeSpec::Sd(crate::scenario::alternating_mask(16))] {
            let (sc, ch) = setup(mode, 3);
            let (st, star) = initialize(&sc, &ch, &mut init_rng(3)).unwrap();
            assert!((squared_norm_mat(&st.w) - 0.9 * sc.p_bs).abs() <= 1e-10 * sc.p_bs);
            let pr = ris_power(&st.w, &star, &ch.g, sc.sigma_v_sq);
            assert!((pr - 0.9 * sc.p_ris).abs() <= 1e-8 * sc.p_ris);
            assert!((st.u.norm() - 1.0).abs() < 1e-12);
            let (st2, star2) = initialize(&sc, &ch, &mut init_rng(3)).unwrap();
            assert_eq!(st, st2);
            assert_eq!(star, star2);
        }
    }

    #[test]
    fn passive_initial_point_is_below_unit_gain() {
        let (sc, ch) = setup(ModeSpec::PassiveBaseline, 4);
        let (st, star) = initialize(&sc, &ch, &mut init_rng(4)).unwrap();
        assert!((squared_norm_mat(&st.w) - 0.9 * sc.total_power()).abs() <= 1e-10 * sc.total_power());
        for i in 0..sc.n {
            assert!((star.a_r[i].powi(2) + star.a_t[i].powi(2) - 0.9).abs() < 1e-12);
        }
    }

    #[test]
    fn single_iteration_cap() {
        let (sc, ch) = setup(ModeSpec::Ued, 5);
        let trace = run_ao(
            &sc,
            &ch,
            &AoOptions {
                q_max: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(trace.iterations_used(), 1);
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().next().unwrap().split(',').count(), TRACE_COLUMNS.len());
        assert_eq!(text.lines().nth(1).unwrap().split(',').count(), TRACE_COLUMNS.len());
    }

    #[test]
    fn delta_follows_recorded_rates() {
        let (sc, ch) = setup(ModeSpec::Ued, 6);
        let trace = run_ao(
            &sc,
            &ch,
            &AoOptions {
                q_max: Some(8),
                ..Default::default()
            },
        )
        .unwrap();
        let mut prev = trace.initial_sum_rate;
        for r in &trace.records {
            assert_eq!(r.delta, relative_change(prev, r.sum_rate));
            prev = r.sum_rate;
            assert!(r.sum_rate >= 0.0);
        }
        assert_eq!(relative_change(1.0, 0.0), f64::INFINITY);
    }

    #[test]
    fn mismatched_channels_rejected() {
        let (sc, _) = setup(ModeSpec::Ued, 7);
        let mut small = sc.clone();
        small.set_elements(8);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = generate_channel_set(&small, &mut rng).unwrap();
        assert!(matches!(run_ao(&sc, &ch, &AoOptions::default()), Err(Error::Dimension(_))));
    }

    #[test]
    fn unreachable_radar_floor_stalls() {
        let (mut sc, ch) = setup(ModeSpec::Ued, 6);
        sc.gamma_t = 1e9;
        let trace = run_ao(&sc, &ch, &AoOptions::default()).unwrap();
        assert!(trace.stalled && !trace.converged);
        assert!(trace.iterations_used() < sc.q_max);
        assert!(trace.records.iter().all(|r| r.transmit_status == BlockStatus::Restoring));
        assert!(!trace.records.last().unwrap().feasibility.feasible);
    }
}
