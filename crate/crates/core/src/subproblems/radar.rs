//! Radar receive filter.

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec};
use crate::solvers::max_generalized_rayleigh;

#[derive(Debug, Clone, PartialEq)]
pub struct RadarFilter {
    pub u: CVec,
    /// Set when `h_dtᴴW = 0`, so every filter gives zero SNR.
    pub degenerate: bool,
}

/// Maximizes `uᴴH_tWWᴴH_tᴴu / (σ_z²uᴴu)` with `H_t = h_dt h_dtᴴ`.
pub fn solve_radar_filter(w: &CMat, h_dt: &CVec, sigma_z_sq: f64) -> Result<RadarFilter> {
    let m = h_dt.len();
    if w.nrows() != m {
        return Err(Error::Dimension(format!("W has {} rows, target channel has {m}", w.nrows())));
    }
    let hn = h_dt.norm();
    if hn == 0.0 {
        return Err(Error::Invalid {
            field: "h_dt",
            reason: "target channel is zero".into(),
        });
    }
    let fallback = || h_dt / c(hn, 0.0);
    let beam = w.ad_mul(h_dt); // (hᴴW)ᴴ
    if beam.norm() <= 1e-14 * hn * w.norm() || beam.norm() == 0.0 {
        return Ok(RadarFilter {
            u: fallback(),
            degenerate: true,
        });
    }
    let ht = h_dt * h_dt.adjoint();
    let hw = &ht * w;
    let cm = &hw * hw.adjoint();
    let e = CMat::identity(m, m) * c(sigma_z_sq, 0.0);
    let r = max_generalized_rayleigh(&cm, &e)?;
    Ok(RadarFilter {
        u: r.vector,
        degenerate: false,
    })
}
