//! Threshold types: the most extreme proposers who still prefer putting
//! their own peak on the table over proposing the median.
//!
//! A low type `theta` that wins with its own peak in an intermediate round
//! faces, in the final round, a lottery over every peak above `theta` (the
//! final proposer pulls the outcome to their own peak within
//! `[theta, c(theta)]`, and `c(theta) = 1` below `2 theta_mu - 1`). The
//! lower gap compares that lottery with the sure median; it decreases in
//! `theta`, so a single bisection finds the crossing.

use serde::Serialize;

use crate::distributions::{MedianBranch, TypeDistribution};
use crate::error::{Error, Result};
use crate::numerics::bisect_increasing;

/// Accuracy required of a reported threshold.
pub const ROOT_TOL: f64 = 1e-9;

/// Slack on the two-round variance inequality.
pub const TWO_ROUND_SLACK: f64 = 1e-9;

/// Offset of the bisection bracket from the ends of the search interval.
const BRACKET_EPS: f64 = 1e-12;

/// Bisection width; tighter than `ROOT_TOL` so the residual stays small too.
const BISECT_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EquilibriumThresholds {
    pub theta_mu: f64,
    pub theta_lower: f64,
    pub theta_upper: f64,
    pub lower_root_found: bool,
    pub upper_root_found: bool,
}

impl EquilibriumThresholds {
    /// Mass of proposers who push their own peak in an intermediate round:
    /// `F(theta_lower)` when the median is at or above 1/2, `1 - F(theta_upper)`
    /// otherwise.
    pub fn own_type_mass(&self, d: &TypeDistribution) -> f64 {
        if self.theta_mu >= 0.5 {
            d.cdf_ext(self.theta_lower)
        } else {
            1.0 - d.cdf_ext(self.theta_upper)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwoRoundCertificate {
    pub branch: MedianBranch,
    pub lhs_variance: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `∫_θ^1 -(v - θ)² dF(v) + (θ_μ - θ)²`; positive when type `theta` prefers
/// the lottery over winners above its peak to the median.
pub fn indifference_gap_low(d: &TypeDistribution, theta: f64) -> f64 {
    let med = d.median();
    d.expected_loss_on(theta, theta, 1.0) + (med - theta) * (med - theta)
}

/// Mirror image of [`indifference_gap_low`] for high types.
pub fn indifference_gap_high(d: &TypeDistribution, theta: f64) -> f64 {
    let med = d.median();
    d.expected_loss_on(theta, 0.0, theta) + (med - theta) * (med - theta)
}

/// Thresholds for an admissible distribution.
pub fn solve_thresholds(d: &TypeDistribution) -> Result<EquilibriumThresholds> {
    let report = d.check_admissibility();
    if !report.admissible {
        return Err(Error::Inadmissible(d.to_string()));
    }
    Ok(compute_thresholds(d))
}

/// Thresholds without the admissibility gate. The values are well defined for
/// any distribution, but the equilibrium built on them is not.
pub fn compute_thresholds(d: &TypeDistribution) -> EquilibriumThresholds {
    let med = d.median();

    let (theta_lower, lower_root_found) = {
        let (lo, hi) = (BRACKET_EPS, 2.0 * med - 1.0 - BRACKET_EPS);
        if hi <= lo || indifference_gap_low(d, lo) <= 0.0 {
            (0.0, false)
        } else if indifference_gap_low(d, hi) > 0.0 {
            // every type below 2θ_μ - 1 would push its own peak
            ((2.0 * med - 1.0 - ROOT_TOL).max(0.0), false)
        } else {
            (bisect_increasing(|t| -indifference_gap_low(d, t), lo, hi, BISECT_TOL), true)
        }
    };

    let (theta_upper, upper_root_found) = {
        let (lo, hi) = (2.0 * med + BRACKET_EPS, 1.0 - BRACKET_EPS);
        if hi <= lo || indifference_gap_high(d, hi) <= 0.0 {
            (1.0, false)
        } else if indifference_gap_high(d, lo) > 0.0 {
            ((2.0 * med + ROOT_TOL).min(1.0), false)
        } else {
            (bisect_increasing(|t| indifference_gap_high(d, t), lo, hi, BISECT_TOL), true)
        }
    };

    EquilibriumThresholds {
        theta_mu: med,
        theta_lower,
        theta_upper,
        lower_root_found,
        upper_root_found,
    }
}

/// Variance condition under which two rounds already implement the median.
///
/// The branch split is at `theta_mu >= 0.5`, matching the probability formula;
/// a median of exactly 1/2 makes both sides of either inequality agree up to
/// the moments' symmetry.
pub fn two_round_condition(d: &TypeDistribution) -> TwoRoundCertificate {
    let med = d.median();
    let (mean, var) = d.moments();
    let (branch, rhs) = if med >= 0.5 {
        (MedianBranch::MedianHigh, med * med - mean * mean)
    } else {
        let (a, b) = (1.0 - med, 1.0 - mean);
        (MedianBranch::MedianLow, a * a - b * b)
    };
    TwoRoundCertificate { branch, lhs_variance: var, rhs, holds: var >= rhs - TWO_ROUND_SLACK }
}
