//! Experiment configuration: geometry, power budgets, noise, and operating mode.
//!
//! Configuration documents are flat TOML key-value files. Powers may be given
//! in dBm and ratios in dB at the interface (`p_total_dbm`, `gamma_t_db`,
//! `noise_dbm`, ...) or directly in linear units (`p_bs_w`, `gamma_t`,
//! `sigma_k_sq`, ...). Internally everything is linear. [`ScenarioConfig::to_toml`]
//! always writes the linear keys so that a round trip is lossless.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Side of the STAR-RIS an element (or a user) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Reflect,
    Transmit,
}

impl Side {
    pub fn as_char(self) -> char {
        match self {
            Side::Reflect => 'r',
            Side::Transmit => 't',
        }
    }
}

/// STAR-RIS operating mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModeSpec {
    /// Unequal energy division: independent reflect/transmit amplitudes.
    Ued,
    /// Equal energy division: one amplitude vector shared by both sides.
    Eed,
    /// Space division: each element is reflect-only or transmit-only.
    Sd(Vec<Side>),
    /// Passive STAR-RIS surrogate: no amplification noise, the whole power
    /// budget at the base station, `|ψ_r,n|² + |ψ_t,n|² ≤ 1` per element.
    PassiveBaseline,
}

impl ModeSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModeSpec::Ued => "ued",
            ModeSpec::Eed => "eed",
            ModeSpec::Sd(_) => "sd",
            ModeSpec::PassiveBaseline => "passive",
        }
    }

    /// Parses a mode name; SD gets the alternating mask for `n` elements.
    pub fn from_name(name: &str, n: usize) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "ued" => Ok(ModeSpec::Ued),
            "eed" => Ok(ModeSpec::Eed),
            "sd" => Ok(ModeSpec::Sd(alternating_mask(n))),
            "passive" | "passivebaseline" | "passive_baseline" => Ok(ModeSpec::PassiveBaseline),
            other => Err(Error::Invalid {
                field: "mode",
                reason: format!("unknown mode `{other}` (expected ued, eed, sd or passive)"),
            }),
        }
    }
}

/// Reflect on even elements, transmit on odd ones.
pub fn alternating_mask(n: usize) -> Vec<Side> {
    (0..n)
        .map(|i| if i % 2 == 0 { Side::Reflect } else { Side::Transmit })
        .collect()
}

fn parse_mask(s: &str) -> Result<Vec<Side>> {
    s.chars()
        .filter(|ch| !ch.is_whitespace() && *ch != ',')
        .map(|ch| match ch {
            'r' | 'R' => Ok(Side::Reflect),
            't' | 'T' => Ok(Side::Transmit),
            other => Err(Error::Invalid {
                field: "sd_mask",
                reason: format!("unexpected character `{other}` (use r or t)"),
            }),
        })
        .collect()
}

/// Solver used for the unit-modulus phase subproblems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseSolver {
    /// Majorization-minimization.
    #[default]
    Mm,
    /// Complex circle manifold (Riemannian gradient descent).
    Ccm,
}

impl PhaseSolver {
    pub fn name(self) -> &'static str {
        match self {
            PhaseSolver::Mm => "mm",
            PhaseSolver::Ccm => "ccm",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mm" => Ok(PhaseSolver::Mm),
            "ccm" => Ok(PhaseSolver::Ccm),
            other => Err(Error::Invalid {
                field: "phase_solver",
                reason: format!("unknown solver `{other}` (expected mm or ccm)"),
            }),
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0 - 3.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Validated experiment configuration, all quantities in linear units.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// DFBS antenna count.
    pub m: usize,
    /// STAR-RIS element count.
    pub n: usize,
    pub k_r: usize,
    pub k_t: usize,
    pub bs_pos: [f64; 3],
    pub ris_pos: [f64; 3],
    pub user_region_radius: f64,
    pub target_region_radius: f64,
    /// DFBS power budget (W).
    pub p_bs: f64,
    /// STAR-RIS power budget (W).
    pub p_ris: f64,
    /// Radar SNR floor, linear.
    pub gamma_t: f64,
    pub xi_sq: f64,
    pub sigma_k_sq: f64,
    pub sigma_v_sq: f64,
    pub sigma_z_sq: f64,
    pub kappa: f64,
    pub mode: ModeSpec,
    pub phase_solver: PhaseSolver,
    /// SD only: keep amplitudes at their initial values and optimize phases.
    pub sd_freeze_amplitudes: bool,
    /// Distances below this are clamped before evaluating pathloss (m).
    pub min_distance: f64,
    pub q_max: usize,
    pub delta_th: f64,
    pub seed: u64,
}

pub const DEFAULT_Q_MAX: usize = 100;
pub const DEFAULT_DELTA_TH: f64 = 1e-3;

impl ScenarioConfig {
    /// Full-scale reference configuration.
    pub fn full_scale(mode: ModeSpec, seed: u64) -> Self {
        let total = dbm_to_watts(26.0);
        let noise = dbm_to_watts(-80.0);
        let mut cfg = ScenarioConfig {
            m: 8,
            n: 128,
            k_r: 2,
            k_t: 2,
            bs_pos: [0.0, 0.0, 0.0],
            ris_pos: [0.0, 15.0, 0.0],
            user_region_radius: 10.0,
            target_region_radius: 5.0,
            p_bs: 0.5 * total,
            p_ris: 0.5 * total,
            gamma_t: 1.0,
            xi_sq: 1.0,
            sigma_k_sq: noise,
            sigma_v_sq: noise,
            sigma_z_sq: noise,
            kappa: 1.0,
            mode: ModeSpec::Ued,
            phase_solver: PhaseSolver::Mm,
            sd_freeze_amplitudes: false,
            min_distance: 1.0,
            q_max: DEFAULT_Q_MAX,
            delta_th: DEFAULT_DELTA_TH,
            seed,
        };
        cfg.set_mode(mode);
        cfg
    }

    /// Reduced size (M=4, N=16, K=4) used by the Monte-Carlo harness.
    pub fn desk_scale(mode: ModeSpec, seed: u64) -> Self {
        let mut cfg = Self::full_scale(ModeSpec::Ued, seed);
        cfg.m = 4;
        cfg.n = 16;
        cfg.set_mode(mode);
        cfg
    }

    pub fn k(&self) -> usize {
        self.k_r + self.k_t
    }

    /// Sets the mode; an SD mask of the wrong length is replaced by the
    /// alternating mask.
    pub fn set_mode(&mut self, mode: ModeSpec) {
        self.mode = match mode {
            ModeSpec::Sd(mask) if mask.len() != self.n => ModeSpec::Sd(alternating_mask(self.n)),
            other => other,
        };
    }

    /// Changes the element count, regenerating the alternating SD mask if needed.
    pub fn set_elements(&mut self, n: usize) {
        self.n = n;
        if let ModeSpec::Sd(mask) = &self.mode {
            if mask.len() != n {
                self.mode = ModeSpec::Sd(alternating_mask(n));
            }
        }
    }

    /// Sets both budgets from a total in dBm and a DFBS share.
    pub fn set_total_power_dbm(&mut self, dbm: f64, bs_fraction: f64) {
        let total = dbm_to_watts(dbm);
        self.p_bs = bs_fraction * total;
        self.p_ris = (1.0 - bs_fraction) * total;
    }

    pub fn total_power(&self) -> f64 {
        self.p_bs + self.p_ris
    }

    /// Per-user side tags: `k_r` reflect users followed by `k_t` transmit users.
    pub fn user_sides(&self) -> Vec<Side> {
        std::iter::repeat_n(Side::Reflect, self.k_r)
            .chain(std::iter::repeat_n(Side::Transmit, self.k_t))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |field: &'static str, reason: &str| {
            Err(Error::Invalid {
                field,
                reason: reason.to_string(),
            })
        };
        if self.m == 0 {
            return invalid("m", "must be at least 1");
        }
        if self.n == 0 {
            return invalid("n", "must be at least 1");
        }
        if self.k_r + self.k_t == 0 {
            return Err(Error::NoUsers);
        }
        let positive = [
            ("p_bs", self.p_bs),
            ("p_ris", self.p_ris),
            ("sigma_k_sq", self.sigma_k_sq),
            ("sigma_v_sq", self.sigma_v_sq),
            ("sigma_z_sq", self.sigma_z_sq),
            ("xi_sq", self.xi_sq),
            ("user_region_radius", self.user_region_radius),
            ("target_region_radius", self.target_region_radius),
            ("min_distance", self.min_distance),
            ("delta_th", self.delta_th),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return invalid(field, &format!("must be finite and > 0, got {v}"));
            }
        }
        if !(self.gamma_t.is_finite() && self.gamma_t >= 0.0) {
            return invalid("gamma_t", "must be >= 0");
        }
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return invalid("kappa", "must be >= 0");
        }
        if self.q_max == 0 {
            return invalid("q_max", "must be at least 1");
        }
        if self.bs_pos.iter().chain(&self.ris_pos).any(|x| !x.is_finite()) {
            return invalid("bs_pos", "coordinates must be finite");
        }
        if let ModeSpec::Sd(mask) = &self.mode {
            if mask.len() != self.n {
                return Err(Error::MaskLength {
                    expected: self.n,
                    got: mask.len(),
                });
            }
            if self.k_r > 0 && !mask.contains(&Side::Reflect) {
                return invalid("sd_mask", "reflect users present but no reflect element");
            }
            if self.k_t > 0 && !mask.contains(&Side::Transmit) {
                return invalid("sd_mask", "transmit users present but no transmit element");
            }
        }
        Ok(())
    }

    /// Serializes to a flat TOML document using linear-unit keys.
    pub fn to_toml(&self) -> String {
        let raw = RawScenario {
            m: Some(self.m),
            n: Some(self.n),
            k_r: Some(self.k_r),
            k_t: Some(self.k_t),
            bs_pos: Some(self.bs_pos),
            ris_pos: Some(self.ris_pos),
            user_region_radius: Some(self.user_region_radius),
            target_region_radius: Some(self.target_region_radius),
            p_bs_w: Some(self.p_bs),
            p_ris_w: Some(self.p_ris),
            gamma_t: Some(self.gamma_t),
            xi_sq: Some(self.xi_sq),
            sigma_k_sq: Some(self.sigma_k_sq),
            sigma_v_sq: Some(self.sigma_v_sq),
            sigma_z_sq: Some(self.sigma_z_sq),
            kappa: Some(self.kappa),
            mode: Some(self.mode.name().to_string()),
            sd_mask: match &self.mode {
                ModeSpec::Sd(mask) => Some(mask.iter().map(|s| s.as_char()).collect()),
                _ => None,
            },
            phase_solver: Some(self.phase_solver.name().to_string()),
            sd_freeze_amplitudes: Some(self.sd_freeze_amplitudes),
            min_distance: Some(self.min_distance),
            q_max: Some(self.q_max),
            delta_th: Some(self.delta_th),
            seed: Some(self.seed),
            ..Default::default()
        };
        toml::to_string(&raw).expect("flat scenario always serializes")
    }
}

/// The document as written by the user: every key optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bs_pos: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ris_pos: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub user_region_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_region_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_total_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bs_power_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_bs_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_ris_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_bs_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_ris_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_t_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_sq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_k_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_v_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_z_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_k_sq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_v_sq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_z_sq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sd_mask: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_solver: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sd_freeze_amplitudes: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_th: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Picks the linear value from a pair of alternative keys.
fn one_of(
    linear: Option<f64>,
    lin_key: &'static str,
    log: Option<f64>,
    log_key: &'static str,
    convert: fn(f64) -> f64,
) -> Result<Option<f64>> {
    match (linear, log) {
        (Some(_), Some(_)) => Err(Error::ConflictingKeys(lin_key, log_key)),
        (Some(v), None) => Ok(Some(v)),
        (None, Some(v)) => Ok(Some(convert(v))),
        (None, None) => Ok(None),
    }
}

/// Parses and validates a flat TOML scenario document.
///
/// `mode` and `seed` are required; quantities fixed by the published setup
/// (array sizes, geometry, noise, power split, radar floor, Rician factor)
/// default to those values.
pub fn build_scenario(doc: &str) -> Result<ScenarioConfig> {
    let raw: RawScenario = toml::from_str(doc).map_err(|e| Error::Parse(e.to_string()))?;
    build_from_raw(raw)
}

pub fn build_from_raw(raw: RawScenario) -> Result<ScenarioConfig> {
    let mode_name = raw.mode.clone().ok_or(Error::MissingKey("mode"))?;
    let seed = raw.seed.ok_or(Error::MissingKey("seed"))?;
    let mut cfg = ScenarioConfig::full_scale(ModeSpec::Ued, seed);

    if let Some(v) = raw.m {
        cfg.m = v;
    }
    if let Some(v) = raw.n {
        cfg.n = v;
    }
    if let Some(v) = raw.k_r {
        cfg.k_r = v;
    }
    if let Some(v) = raw.k_t {
        cfg.k_t = v;
    }
    if let Some(v) = raw.bs_pos {
        cfg.bs_pos = v;
    }
    if let Some(v) = raw.ris_pos {
        cfg.ris_pos = v;
    }
    if let Some(v) = raw.user_region_radius {
        cfg.user_region_radius = v;
    }
    if let Some(v) = raw.target_region_radius {
        cfg.target_region_radius = v;
    }

    // Power budgets: explicit linear pair, explicit dBm pair, or total + split.
    let p_bs = one_of(raw.p_bs_w, "p_bs_w", raw.p_bs_dbm, "p_bs_dbm", dbm_to_watts)?;
    let p_ris = one_of(raw.p_ris_w, "p_ris_w", raw.p_ris_dbm, "p_ris_dbm", dbm_to_watts)?;
    match (p_bs, p_ris) {
        (Some(b), Some(r)) => {
            if raw.p_total_dbm.is_some() {
                return Err(Error::ConflictingKeys("p_total_dbm", "p_bs_*/p_ris_*"));
            }
            cfg.p_bs = b;
            cfg.p_ris = r;
        }
        (None, None) => {
            let fraction = raw.bs_power_fraction.unwrap_or(0.5);
            if !(0.0..=1.0).contains(&fraction) {
                return Err(Error::Invalid {
                    field: "bs_power_fraction",
                    reason: format!("must lie in [0, 1], got {fraction}"),
                });
            }
            cfg.set_total_power_dbm(raw.p_total_dbm.unwrap_or(26.0), fraction);
        }
        (Some(_), None) => return Err(Error::MissingKey("p_ris_w")),
        (None, Some(_)) => return Err(Error::MissingKey("p_bs_w")),
    }

    if let Some(v) = one_of(raw.gamma_t, "gamma_t", raw.gamma_t_db, "gamma_t_db", db_to_linear)? {
        cfg.gamma_t = v;
    }
    if let Some(v) = raw.xi_sq {
        cfg.xi_sq = v;
    }
    if let Some(common) = raw.noise_dbm {
        let w = dbm_to_watts(common);
        cfg.sigma_k_sq = w;
        cfg.sigma_v_sq = w;
        cfg.sigma_z_sq = w;
    }
    if let Some(v) = one_of(raw.sigma_k_sq, "sigma_k_sq", raw.sigma_k_dbm, "sigma_k_dbm", dbm_to_watts)? {
        cfg.sigma_k_sq = v;
    }
    if let Some(v) = one_of(raw.sigma_v_sq, "sigma_v_sq", raw.sigma_v_dbm, "sigma_v_dbm", dbm_to_watts)? {
        cfg.sigma_v_sq = v;
    }
    if let Some(v) = one_of(raw.sigma_z_sq, "sigma_z_sq", raw.sigma_z_dbm, "sigma_z_dbm", dbm_to_watts)? {
        cfg.sigma_z_sq = v;
    }
    if let Some(v) = raw.kappa {
        cfg.kappa = v;
    }
    if let Some(v) = raw.phase_solver {
        cfg.phase_solver = PhaseSolver::from_name(&v)?;
    }
    if let Some(v) = raw.sd_freeze_amplitudes {
        cfg.sd_freeze_amplitudes = v;
    }
    if let Some(v) = raw.min_distance {
        cfg.min_distance = v;
    }
    if let Some(v) = raw.q_max {
        cfg.q_max = v;
    }
    if let Some(v) = raw.delta_th {
        cfg.delta_th = v;
    }

    cfg.mode = match (ModeSpec::from_name(&mode_name, cfg.n)?, raw.sd_mask) {
        (ModeSpec::Sd(_), Some(mask)) => ModeSpec::Sd(parse_mask(&mask)?),
        (mode, _) => mode,
    };
    cfg.validate()?;
    Ok(cfg)
}
