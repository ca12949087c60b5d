//! Single-vote primitives: quadratic utility, the reflection map about the
//! median, and pairwise majority votes for a continuum of voters or a finite
//! panel.
//!
//! With single-peaked quadratic preferences a voter prefers the proposal iff
//! its peak lies on the proposal's side of the midpoint `m = (p + q) / 2`, so
//! the continuum vote reduces to one CDF evaluation. Ties of every kind go to
//! the proposal.

use serde::Serialize;

use crate::distributions::TypeDistribution;
use crate::error::{check_unit, Error, Result};
use crate::numerics::CDF_TOL;

/// Two distances closer than this count as equal for a panel voter.
pub const DIST_TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VoteOutcome {
    pub winner: f64,
    /// Mass (or panel fraction) of voters weakly preferring the proposal.
    pub proposal_share: f64,
    /// The result hinged on the tie rule, or the two alternatives coincide.
    pub tie_broken: bool,
}

/// `-(x - theta)²`.
pub fn utility(theta: f64, x: f64) -> Result<f64> {
    check_unit("theta", theta)?;
    check_unit("x", x)?;
    Ok(u(theta, x))
}

/// `clamp(2 theta_mu - x, 0, 1)`: the farthest alternative on the other side
/// of the median that the median voter still weakly prefers to `x`.
pub fn reflect(theta_mu: f64, x: f64) -> Result<f64> {
    check_unit("theta_mu", theta_mu)?;
    check_unit("x", x)?;
    Ok(mirror(theta_mu, x))
}

#[inline]
pub(crate) fn u(theta: f64, x: f64) -> f64 {
    let d = x - theta;
    -d * d
}

#[inline]
pub(crate) fn mirror(theta_mu: f64, x: f64) -> f64 {
    (2.0 * theta_mu - x).clamp(0.0, 1.0)
}

/// Majority vote of the whole population between `proposal` and `status_quo`.
///
/// The share is compared with 1/2 up to `CDF_TOL`: at the reflection boundary
/// the midpoint is the median itself, and `F(median)` is only 1/2 to within
/// the accuracy the median was solved to.
pub fn pairwise_vote(d: &TypeDistribution, proposal: f64, status_quo: f64) -> Result<VoteOutcome> {
    check_unit("proposal", proposal)?;
    check_unit("status_quo", status_quo)?;
    Ok(vote_unchecked(d, proposal, status_quo))
}

pub(crate) fn vote_unchecked(d: &TypeDistribution, p: f64, q: f64) -> VoteOutcome {
    if p == q {
        return VoteOutcome { winner: p, proposal_share: 1.0, tie_broken: true };
    }
    let fm = d.cdf_ext(0.5 * (p + q));
    let share = if p > q { 1.0 - fm } else { fm };
    VoteOutcome {
        winner: if share >= 0.5 - CDF_TOL { p } else { q },
        proposal_share: share,
        tie_broken: (share - 0.5).abs() <= CDF_TOL,
    }
}

/// Majority vote of a finite panel of peaks.
///
/// Voters equidistant from both alternatives side with the proposal, and so
/// does an even split of the panel.
pub fn panel_vote(panel: &[f64], proposal: f64, status_quo: f64) -> Result<VoteOutcome> {
    if panel.is_empty() {
        return Err(Error::InvalidArgument("voter panel is empty".into()));
    }
    check_unit("proposal", proposal)?;
    check_unit("status_quo", status_quo)?;
    let m = panel.len();
    if proposal == status_quo {
        return Ok(VoteOutcome { winner: proposal, proposal_share: 1.0, tie_broken: true });
    }
    let mut strict = 0usize;
    let mut weak = 0usize;
    for &v in panel {
        let dp = (v - proposal).abs();
        let dq = (v - status_quo).abs();
        if dp < dq - DIST_TIE_TOL {
            strict += 1;
            weak += 1;
        } else if dp <= dq + DIST_TIE_TOL {
            weak += 1;
        }
    }
    let passes = 2 * weak >= m;
    Ok(VoteOutcome {
        winner: if passes { proposal } else { status_quo },
        proposal_share: weak as f64 / m as f64,
        tie_broken: passes && 2 * strict <= m,
    })
}

/// `M` voters at the quantiles `F^{-1}((i - 1/2) / M)`, sorted. For odd `M`
/// the middle voter sits exactly at the cached median.
pub fn quantile_panel(d: &TypeDistribution, m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::InvalidArgument("panel size must be positive".into()));
    }
    let mut panel: Vec<f64> =
        (1..=m).map(|i| d.quantile((i as f64 - 0.5) / m as f64)).collect();
    if m % 2 == 1 {
        panel[m / 2] = d.median();
    }
    Ok(panel)
}
