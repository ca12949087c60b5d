//! Analytic equilibrium: who proposes what in each round, the final-round
//! winner map, the proposer's value of an intermediate winner, and the
//! probability that the median is the final outcome.
//!
//! In the final round a proposer facing status quo `q` can win with anything
//! between `q` and its reflection `c(q)`, so the outcome is the proposer's
//! peak clamped to that interval. One round earlier, a winner `w` therefore
//! buys a lottery: the next proposer's peak clamped to `[min(w, c(w)),
//! max(w, c(w))]`. [`expected_utility_of_winner`] values that lottery.

use serde::Serialize;

use crate::distributions::TypeDistribution;
use crate::error::{check_unit, Error, Result};
use crate::mechanism::{mirror, u};
use crate::thresholds::EquilibriumThresholds;

/// Candidate winners whose values differ by less than this are tied.
pub const EU_TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RoundKind {
    Intermediate,
    Final,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rationale {
    OwnType,
    CondorcetWinner,
    ClampedToReflection,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProposalDecision {
    pub round_kind: RoundKind,
    pub proposal: f64,
    pub rationale: Rationale,
}

/// Equilibrium proposal in any round but the last.
///
/// Extreme proposers facing an extreme status quo on their own side put
/// their peak forward; everyone else proposes the median. A proposer exactly
/// at a threshold is indifferent and is sent to the median.
pub fn optimal_proposal_intermediate(
    th: &EquilibriumThresholds,
    proposer_type: f64,
    status_quo: f64,
) -> ProposalDecision {
    let own = in_own_type_regime(th, proposer_type, status_quo);
    ProposalDecision {
        round_kind: RoundKind::Intermediate,
        proposal: if own { proposer_type } else { th.theta_mu },
        rationale: if own { Rationale::OwnType } else { Rationale::CondorcetWinner },
    }
}

pub(crate) fn in_own_type_regime(th: &EquilibriumThresholds, s: f64, q: f64) -> bool {
    q.max(s) < th.theta_lower || q.min(s) > th.theta_upper
}

/// Winner of an intermediate round when everyone follows the equilibrium.
///
/// In the own-type regime both alternatives lie on the same extreme side and
/// the one nearer the median carries the vote; otherwise the median is
/// proposed and beats anything.
pub fn intermediate_round_winner(th: &EquilibriumThresholds, proposer_type: f64, status_quo: f64) -> f64 {
    if proposer_type.max(status_quo) < th.theta_lower {
        proposer_type.max(status_quo)
    } else if proposer_type.min(status_quo) > th.theta_upper {
        proposer_type.min(status_quo)
    } else {
        th.theta_mu
    }
}

/// Equilibrium proposal in the last round: the proposer's peak, pulled back
/// to the reflection of the status quo if it would otherwise lose.
pub fn optimal_proposal_final(theta_mu: f64, proposer_type: f64, status_quo: f64) -> ProposalDecision {
    let c = mirror(theta_mu, status_quo);
    let proposal = if status_quo <= theta_mu { proposer_type.min(c) } else { proposer_type.max(c) };
    ProposalDecision {
        round_kind: RoundKind::Final,
        proposal,
        rationale: if proposal == proposer_type { Rationale::OwnType } else { Rationale::ClampedToReflection },
    }
}

/// The proposer's peak clamped to the interval between `q` and `c(q)`.
pub fn final_round_winner(theta_mu: f64, proposer_type: f64, status_quo: f64) -> f64 {
    let c = mirror(theta_mu, status_quo);
    let (a, b) = (status_quo.min(c), status_quo.max(c));
    proposer_type.clamp(a, b)
}

/// Expected final-round utility to type `proposer_type` of entering the last
/// round with status quo `w`.
pub fn expected_utility_of_winner(d: &TypeDistribution, proposer_type: f64, w: f64) -> Result<f64> {
    check_unit("proposer_type", proposer_type)?;
    check_unit("w", w)?;
    Ok(eu_unchecked(d, proposer_type, w))
}

pub(crate) fn eu_unchecked(d: &TypeDistribution, s: f64, w: f64) -> f64 {
    let c = mirror(d.median(), w);
    let (lo, hi) = (w.min(c), w.max(c));
    if lo == hi {
        return u(s, w);
    }
    // partial moments are exact for the analytic families, so the middle
    // piece needs no splitting at the median
    u(s, lo) * d.cdf_ext(lo) + d.expected_loss_on(s, lo, hi) + u(s, hi) * (1.0 - d.cdf_ext(hi))
}

/// The best winner a proposer can aim for one round before the end, among
/// the three candidates the first-order conditions leave.
pub fn optimal_intermediate_winner(d: &TypeDistribution, th: &EquilibriumThresholds, proposer_type: f64) -> f64 {
    let med = th.theta_mu;
    let s = proposer_type;
    let below = (2.0 * med - 1.0).min(s).clamp(0.0, 1.0);
    let above = (2.0 * med).max(s).clamp(0.0, 1.0);
    let mut best = med;
    let mut best_v = eu_unchecked(d, s, med);
    for w in [below, above] {
        let v = eu_unchecked(d, s, w);
        if v > best_v + EU_TIE_TOL {
            best = w;
            best_v = v;
        }
    }
    best
}

/// `1 - F(θ̲)^(T-1)` for a median at or above 1/2, `1 - (1 - F(θ̄))^(T-1)`
/// below.
pub fn closed_form_probability(d: &TypeDistribution, th: &EquilibriumThresholds, rounds: u32) -> Result<f64> {
    if rounds < 2 {
        return Err(Error::InvalidArgument(format!("closed form needs at least 2 rounds, got {rounds}")));
    }
    Ok(1.0 - th.own_type_mass(d).powi(rounds as i32 - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::pairwise_vote;
    use crate::thresholds::{compute_thresholds, solve_thresholds};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn zoo() -> Vec<TypeDistribution> {
        vec![
            TypeDistribution::uniform(),
            TypeDistribution::beta(4.0, 2.0).unwrap(),
            TypeDistribution::beta(20.0, 2.0).unwrap(),
            TypeDistribution::beta(0.3, 0.2).unwrap(),
            TypeDistribution::beta(2.0, 20.0).unwrap(),
            TypeDistribution::beta(8.0, 1.5).unwrap(),
            TypeDistribution::truncated_normal(0.7, 0.2).unwrap(),
            TypeDistribution::truncated_logistic(0.3, 0.1).unwrap(),
        ]
    }

    fn beta20() -> (TypeDistribution, EquilibriumThresholds) {
        let d = TypeDistribution::beta(20.0, 2.0).unwrap();
        let t = solve_thresholds(&d).unwrap();
        (d, t)
    }

    #[test]
    fn intermediate_proposals() {
        let ut = solve_thresholds(&TypeDistribution::uniform()).unwrap();
        for &(s, q) in &[(0.0, 0.0), (0.1, 0.9), (1.0, 0.3), (0.5, 0.5)] {
            let p = optimal_proposal_intermediate(&ut, s, q);
            assert_eq!(p.proposal, 0.5);
            assert_eq!(p.rationale, Rationale::CondorcetWinner);
        }

        let (d, t) = beta20();
        let p = optimal_proposal_intermediate(&t, 0.5, 0.6);
        assert_eq!((p.proposal, p.rationale), (0.5, Rationale::OwnType));
        let p = optimal_proposal_intermediate(&t, 0.5, 0.8);
        assert_eq!(p.proposal, d.median());
        assert_abs_diff_eq!(p.proposal, 0.921356, epsilon = 1e-4);
        // the threshold type itself is indifferent and goes to the median
        let p = optimal_proposal_intermediate(&t, t.theta_lower, 0.1);
        assert_eq!(p.rationale, Rationale::CondorcetWinner);
    }

    #[test]
    fn final_proposals_and_winners() {
        assert_abs_diff_eq!(optimal_proposal_final(0.5, 0.9, 0.3).proposal, 0.7, epsilon = 1e-15);
        assert_eq!(optimal_proposal_final(0.5, 0.9, 0.3).rationale, Rationale::ClampedToReflection);
        assert_eq!(optimal_proposal_final(0.5, 0.6, 0.3).proposal, 0.6);
        assert_abs_diff_eq!(optimal_proposal_final(0.5, 0.1, 0.8).proposal, 0.2, epsilon = 1e-15);

        assert_eq!(final_round_winner(0.5, 0.05, 0.3), 0.3);
        assert_abs_diff_eq!(final_round_winner(0.5, 0.95, 0.3), 0.7, epsilon = 1e-15);
        assert_eq!(final_round_winner(0.5, 0.5, 0.5), 0.5);
    }

    #[test]
    fn final_round_matches_the_vote() {
        let zoo = zoo();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let d = &zoo[rng.gen_range(0..zoo.len())];
            let (s, q): (f64, f64) = (rng.gen(), rng.gen());
            let med = d.median();
            let dec = optimal_proposal_final(med, s, q);
            assert!(dec.proposal == s || dec.proposal == mirror(med, q));
            let voted = pairwise_vote(d, dec.proposal, q).unwrap().winner;
            assert_eq!(voted, final_round_winner(med, s, q), "{d} s={s} q={q}");
        }
    }

    #[test]
    fn expected_utility_examples() {
        let d = TypeDistribution::uniform();
        assert_eq!(expected_utility_of_winner(&d, 0.5, 0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(expected_utility_of_winner(&d, 0.5, 0.2).unwrap(), -0.054, epsilon = 1e-12);
        assert!(expected_utility_of_winner(&d, 1.5, 0.2).is_err());

        let (d, t) = beta20();
        let eu = expected_utility_of_winner(&d, t.theta_lower, t.theta_lower).unwrap();
        assert_abs_diff_eq!(eu, u(t.theta_lower, t.theta_mu), epsilon = 1e-6);
    }

    #[test]
    fn expected_utility_at_median_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in zoo() {
            for _ in 0..50 {
                let s: f64 = rng.gen();
                assert_eq!(eu_unchecked(&d, s, d.median()), u(s, d.median()));
            }
        }
    }

    #[test]
    fn expected_utility_matches_monte_carlo_lottery() {
        // independent route: simulate the last round directly
        let (d, _) = beta20();
        let med = d.median();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 200_000;
        for &(s, w) in &[(0.3, 0.3), (0.3, 0.85), (0.95, 0.95), (0.0, 0.99)] {
            let mut acc = 0.0;
            for _ in 0..n {
                let t = d.quantile(rng.gen());
                acc += u(s, final_round_winner(med, t, w));
            }
            let mc = acc / n as f64;
            assert_abs_diff_eq!(eu_unchecked(&d, s, w), mc, epsilon = 2e-3);
        }
    }

    #[test]
    fn intermediate_winner_examples() {
        let d = TypeDistribution::uniform();
        let t = solve_thresholds(&d).unwrap();
        assert_eq!(optimal_intermediate_winner(&d, &t, 0.1), 0.5);

        let (d, t) = beta20();
        assert_eq!(optimal_intermediate_winner(&d, &t, 0.3), 0.3);
        assert_eq!(optimal_intermediate_winner(&d, &t, 0.85), d.median());
    }

    #[test]
    fn intermediate_winner_beats_rejected_candidates() {
        let zoo = zoo();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let d = &zoo[rng.gen_range(0..zoo.len())];
            let t = compute_thresholds(d);
            let s: f64 = rng.gen();
            let med = t.theta_mu;
            let w = optimal_intermediate_winner(d, &t, s);
            let best = eu_unchecked(d, s, w);
            for c in [(2.0 * med - 1.0).min(s).clamp(0.0, 1.0), med, (2.0 * med).max(s).clamp(0.0, 1.0)] {
                assert!(best >= eu_unchecked(d, s, c) - 1e-9);
            }
            // and it is the own type exactly outside the thresholds
            if s < t.theta_lower - 1e-9 || s > t.theta_upper + 1e-9 {
                assert_eq!(w, s, "{d} s={s}");
            } else if s > t.theta_lower + 1e-9 && s < t.theta_upper - 1e-9 {
                assert_eq!(w, med, "{d} s={s}");
            }
        }
    }

    #[test]
    fn threshold_types_are_indifferent_and_interior_types_prefer_the_median() {
        for d in zoo() {
            let t = compute_thresholds(&d);
            if t.lower_root_found {
                let eu = eu_unchecked(&d, t.theta_lower, t.theta_lower);
                assert_abs_diff_eq!(eu, u(t.theta_lower, t.theta_mu), epsilon = 1e-6);
            }
            if t.upper_root_found {
                let eu = eu_unchecked(&d, t.theta_upper, t.theta_upper);
                assert_abs_diff_eq!(eu, u(t.theta_upper, t.theta_mu), epsilon = 1e-6);
            }
            for i in 1..200 {
                let s = t.theta_lower + (t.theta_upper - t.theta_lower) * i as f64 / 200.0;
                assert!(eu_unchecked(&d, s, s) <= u(s, t.theta_mu) + 1e-9, "{d} s={s}");
            }
        }
    }

    #[test]
    fn extreme_types_prefer_in_bound_winners() {
        for d in zoo() {
            let t = compute_thresholds(&d);
            if t.theta_lower == 0.0 {
                continue;
            }
            for i in 0..200 {
                let s = t.theta_lower * i as f64 / 199.0;
                for j in 0..20 {
                    let w = s + (t.theta_lower - s) * j as f64 / 19.0;
                    assert!(eu_unchecked(&d, s, w) >= u(s, t.theta_mu) - 1e-9, "{d} s={s} w={w}");
                }
            }
        }
    }

    #[test]
    fn probability_examples() {
        let d = TypeDistribution::uniform();
        let t = solve_thresholds(&d).unwrap();
        assert_eq!(closed_form_probability(&d, &t, 3).unwrap(), 1.0);
        assert!(closed_form_probability(&d, &t, 1).is_err());

        let (d, t) = beta20();
        assert_abs_diff_eq!(closed_form_probability(&d, &t, 2).unwrap(), 0.967892, epsilon = 2e-4);

        let d = TypeDistribution::beta(0.3, 0.2).unwrap();
        let t = solve_thresholds(&d).unwrap();
        assert_abs_diff_eq!(closed_form_probability(&d, &t, 3).unwrap(), 0.921628, epsilon = 5e-4);
    }

    #[test]
    fn six_rounds_clear_the_bound() {
        for d in zoo() {
            if !d.check_admissibility().admissible || d.median() < 0.5 {
                continue;
            }
            let t = solve_thresholds(&d).unwrap();
            let p = closed_form_probability(&d, &t, 6).unwrap();
            assert!(p >= 0.96875, "{d}: {p}");
            for r in 2..10 {
                let a = closed_form_probability(&d, &t, r).unwrap();
                let b = closed_form_probability(&d, &t, r + 1).unwrap();
                assert!(b >= a);
            }
        }
    }
}
