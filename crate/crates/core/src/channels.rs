//! Rician-fading channel realizations and equivalent end-to-end channels.
//!
//! All nodes sit in the `z = 0` plane. The LoS component of every link is the
//! outer product of half-wavelength ULA steering vectors whose arrays lie along
//! the x-axis, with angles taken from the endpoint geometry.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{c, cis, CMat, CVec};
use crate::scenario::{ScenarioConfig, Side};

/// `10^(−(37.3 + 22 log10 d)/10)`
pub fn pathloss_linear(d: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::NonPositiveDistance(d));
    }
    Ok(10f64.powf(-(37.3 + 22.0 * d.log10()) / 10.0))
}

/// Half-wavelength ULA steering vector for direction sine `sin_theta`.
pub fn ula_steering(len: usize, sin_theta: f64) -> CVec {
    CVec::from_fn(len, |k, _| cis(PI * k as f64 * sin_theta))
}

/// Sine of the angle between the broadside (y-axis) of an x-aligned array at
/// `from` and the direction towards `to`.
fn direction_sine(from: [f64; 2], to: [f64; 2]) -> f64 {
    let dx = to[0] - from[0];
    let dy = to[1] - from[1];
    let d = dx.hypot(dy);
    if d == 0.0 {
        0.0
    } else {
        dx / d
    }
}

fn planar_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// `sqrt(PL)·(sqrt(κ/(κ+1))·H_LoS + sqrt(1/(κ+1))·H_NLoS)` with unit-variance
/// circularly-symmetric Gaussian NLoS entries.
pub fn rician_channel<R: Rng + ?Sized>(los: &CMat, kappa: f64, pl_linear: f64, rng: &mut R) -> Result<CMat> {
    let (rows, cols) = los.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension(format!("channel must be at least 1x1, got {rows}x{cols}")));
    }
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::Invalid {
            field: "kappa",
            reason: format!("must be >= 0, got {kappa}"),
        });
    }
    if !(pl_linear > 0.0) {
        return Err(Error::Invalid {
            field: "pl_linear",
            reason: format!("must be > 0, got {pl_linear}"),
        });
    }
    let los_w = (kappa / (kappa + 1.0)).sqrt();
    let nlos_w = (1.0 / (kappa + 1.0)).sqrt();
    let amp = pl_linear.sqrt();
    let half = std::f64::consts::FRAC_1_SQRT_2;
    Ok(CMat::from_fn(rows, cols, |i, j| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        (los[(i, j)] * los_w + c(re, im) * (half * nlos_w)) * amp
    }))
}

/// Node positions of one Monte-Carlo trial.
///
/// Users are stored relative to the STAR-RIS and the target relative to the
/// DFBS, so moving either node keeps the drawn layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub user_offsets: Vec<[f64; 2]>,
    pub target_offset: [f64; 2],
}

impl Geometry {
    /// Users uniform in half-discs around the RIS (reflect side faces the
    /// DFBS), target uniform in a disc around the DFBS.
    pub fn draw<R: Rng + ?Sized>(scenario: &ScenarioConfig, rng: &mut R) -> Self {
        let bs = [scenario.bs_pos[0], scenario.bs_pos[1]];
        let ris = [scenario.ris_pos[0], scenario.ris_pos[1]];
        let towards_bs = if bs == ris {
            -PI / 2.0
        } else {
            (bs[1] - ris[1]).atan2(bs[0] - ris[0])
        };
        let user_offsets = scenario
            .user_sides()
            .into_iter()
            .map(|side| {
                let centre = match side {
                    Side::Reflect => towards_bs,
                    Side::Transmit => towards_bs + PI,
                };
                let r = scenario.user_region_radius * rng.random::<f64>().sqrt();
                let theta = centre + (rng.random::<f64>() - 0.5) * PI;
                [r * theta.cos(), r * theta.sin()]
            })
            .collect();
        let r = scenario.target_region_radius * rng.random::<f64>().sqrt();
        let theta = 2.0 * PI * rng.random::<f64>();
        Geometry {
            user_offsets,
            target_offset: [r * theta.cos(), r * theta.sin()],
        }
    }

    pub fn user_positions(&self, scenario: &ScenarioConfig) -> Vec<[f64; 2]> {
        self.user_offsets
            .iter()
            .map(|o| [scenario.ris_pos[0] + o[0], scenario.ris_pos[1] + o[1]])
            .collect()
    }

    pub fn target_position(&self, scenario: &ScenarioConfig) -> [f64; 2] {
        [
            scenario.bs_pos[0] + self.target_offset[0],
            scenario.bs_pos[1] + self.target_offset[1],
        ]
    }
}

/// One realization of every link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// DFBS → RIS, N×M.
    pub g: CMat,
    /// RIS → user k, length N each.
    pub f: Vec<CVec>,
    /// DFBS → user k, length M each.
    pub h_d: Vec<CVec>,
    /// DFBS → target, length M.
    pub h_dt: CVec,
    /// Reflect users first, then transmit users.
    pub user_side: Vec<Side>,
}

impl ChannelSet {
    pub fn m(&self) -> usize {
        self.g.ncols()
    }

    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    pub fn k(&self) -> usize {
        self.user_side.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m) = self.g.shape();
        let k = self.user_side.len();
        if self.f.len() != k || self.h_d.len() != k {
            return Err(Error::Dimension(format!(
                "{k} users but {} RIS links and {} direct links",
                self.f.len(),
                self.h_d.len()
            )));
        }
        if self.f.iter().any(|v| v.len() != n) || self.h_d.iter().any(|v| v.len() != m) || self.h_dt.len() != m {
            return Err(Error::Dimension("channel vector length".into()));
        }
        if self
            .user_side
            .windows(2)
            .any(|w| w[0] == Side::Transmit && w[1] == Side::Reflect)
        {
            return Err(Error::Dimension("reflect users must precede transmit users".into()));
        }
        let finite = self.g.iter().all(|z| z.re.is_finite() && z.im.is_finite())
            && self
                .f
                .iter()
                .chain(&self.h_d)
                .chain(std::iter::once(&self.h_dt))
                .all(|v| v.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        if !finite {
            return Err(Error::Dimension("non-finite channel entry".into()));
        }
        Ok(())
    }
}

/// Draws positions and all channels for one trial.
pub fn generate_channel_set<R: Rng + ?Sized>(scenario: &ScenarioConfig, rng: &mut R) -> Result<ChannelSet> {
    let geometry = Geometry::draw(scenario, rng);
    channels_for_geometry(scenario, &geometry, rng)
}

/// Fills all channels for a fixed geometry.
pub fn channels_for_geometry<R: Rng + ?Sized>(
    scenario: &ScenarioConfig,
    geometry: &Geometry,
    rng: &mut R,
) -> Result<ChannelSet> {
    scenario.validate()?;
    if geometry.user_offsets.len() != scenario.k() {
        return Err(Error::Dimension(format!(
            "geometry has {} users, scenario {}",
            geometry.user_offsets.len(),
            scenario.k()
        )));
    }
    let (m, n) = (scenario.m, scenario.n);
    let bs = [scenario.bs_pos[0], scenario.bs_pos[1]];
    let ris = [scenario.ris_pos[0], scenario.ris_pos[1]];
    let dist = |a, b| planar_distance(a, b).max(scenario.min_distance);

    let los_g = ula_steering(n, direction_sine(ris, bs)) * ula_steering(m, direction_sine(bs, ris)).adjoint();
    let g = rician_channel(&los_g, scenario.kappa, pathloss_linear(dist(bs, ris))?, rng)?;

    let users = geometry.user_positions(scenario);
    let mut f = Vec::with_capacity(users.len());
    let mut h_d = Vec::with_capacity(users.len());
    for &u in &users {
        let los = CMat::from_column_slice(n, 1, ula_steering(n, direction_sine(ris, u)).as_slice());
        let fk = rician_channel(&los, scenario.kappa, pathloss_linear(dist(ris, u))?, rng)?;
        f.push(fk.column(0).into_owned());
        let los = CMat::from_column_slice(m, 1, ula_steering(m, direction_sine(bs, u)).as_slice());
        let hk = rician_channel(&los, scenario.kappa, pathloss_linear(dist(bs, u))?, rng)?;
        h_d.push(hk.column(0).into_owned());
    }
    let target = geometry.target_position(scenario);
    let los = CMat::from_column_slice(m, 1, ula_steering(m, direction_sine(bs, target)).as_slice());
    let h_dt = rician_channel(&los, scenario.kappa, pathloss_linear(dist(bs, target))?, rng)?
        .column(0)
        .into_owned();

    Ok(ChannelSet {
        g,
        f,
        h_d,
        h_dt,
        user_side: scenario.user_sides(),
    })
}

/// `h̃` with `h̃ᴴ = h_dᴴ + f_kᴴ diag(ψ) G`, i.e. `h̃ = h_d + Gᴴ (conj(ψ) ∘ f_k)`.
pub fn equivalent_channel(h_dk: &CVec, f_k: &CVec, psi: &CVec, g: &CMat) -> Result<CVec> {
    let (n, m) = g.shape();
    if h_dk.len() != m || f_k.len() != n || psi.len() != n {
        return Err(Error::Dimension(format!(
            "equivalent channel: G is {n}x{m}, h_d {}, f {}, psi {}",
            h_dk.len(),
            f_k.len(),
            psi.len()
        )));
    }
    let weighted = CVec::from_fn(n, |i, _| psi[i].conj() * f_k[i]);
    Ok(h_dk + g.ad_mul(&weighted))
}

const DUMP_HEADER: &str = "# star-isac channel dump v1";

fn write_block<W: Write>(out: &mut W, name: &str, mat: &CMat) -> std::io::Result<()> {
    writeln!(out, "{name} {} {}", mat.nrows(), mat.ncols())?;
    for i in 0..mat.nrows() {
        let row: Vec<String> = (0..mat.ncols())
            .map(|j| format!("{:e} {:e}", mat[(i, j)].re, mat[(i, j)].im))
            .collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

fn column(v: &CVec) -> CMat {
    CMat::from_column_slice(v.len(), 1, v.as_slice())
}

/// Writes a channel set as text: a `sides` line, then one block per matrix
/// (`name rows cols` followed by `rows` lines of row-major `re im` pairs).
pub fn write_channel_dump<W: Write>(set: &ChannelSet, out: &mut W) -> Result<()> {
    writeln!(out, "{DUMP_HEADER}")?;
    let sides: String = set.user_side.iter().map(|s| s.as_char()).collect();
    writeln!(out, "sides {sides}")?;
    write_block(out, "G", &set.g)?;
    for (k, fk) in set.f.iter().enumerate() {
        write_block(out, &format!("f{k}"), &column(fk))?;
    }
    for (k, hk) in set.h_d.iter().enumerate() {
        write_block(out, &format!("h_d{k}"), &column(hk))?;
    }
    write_block(out, "h_dt", &column(&set.h_dt))?;
    Ok(())
}

/// Reads a dump produced by [`write_channel_dump`].
pub fn read_channel_dump<R: BufRead>(input: R) -> Result<ChannelSet> {
    let bad = |msg: &str| Error::Parse(format!("channel dump: {msg}"));
    let mut lines = input.lines();
    let mut next = || -> Result<String> { lines.next().ok_or_else(|| bad("unexpected end of file"))?.map_err(Error::from) };
    if next()? != DUMP_HEADER {
        return Err(bad("missing header"));
    }
    let sides_line = next()?;
    let sides: Vec<Side> = sides_line
        .strip_prefix("sides ")
        .ok_or_else(|| bad("missing sides line"))?
        .chars()
        .map(|ch| match ch {
            'r' => Ok(Side::Reflect),
            't' => Ok(Side::Transmit),
            _ => Err(bad("bad side tag")),
        })
        .collect::<Result<_>>()?;
    let k = sides.len();

    let mut read_block = |expect: &str| -> Result<CMat> {
        let head = next()?;
        let parts: Vec<&str> = head.split_whitespace().collect();
        if parts.len() != 3 || parts[0] != expect {
            return Err(bad(&format!("expected block `{expect}`, got `{head}`")));
        }
        let rows: usize = parts[1].parse().map_err(|_| bad("bad row count"))?;
        let cols: usize = parts[2].parse().map_err(|_| bad("bad column count"))?;
        let mut data = CMat::zeros(rows, cols);
        for i in 0..rows {
            let line = next()?;
            let nums: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| bad("bad number")))
                .collect::<Result<_>>()?;
            if nums.len() != 2 * cols {
                return Err(bad("row length"));
            }
            for j in 0..cols {
                data[(i, j)] = c(nums[2 * j], nums[2 * j + 1]);
            }
        }
        Ok(data)
    };
    let g = read_block("G")?;
    let f = (0..k)
        .map(|i| read_block(&format!("f{i}")).map(|m| m.column(0).into_owned()))
        .collect::<Result<Vec<_>>>()?;
    let h_d = (0..k)
        .map(|i| read_block(&format!("h_d{i}")).map(|m| m.column(0).into_owned()))
        .collect::<Result<Vec<_>>>()?;
    let h_dt = read_block("h_dt")?.column(0).into_owned();
    let set = ChannelSet {
        g,
        f,
        h_d,
        h_dt,
        user_side: sides,
    };
    set.validate()?;
    Ok(set)
}
