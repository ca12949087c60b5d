//! Brute-force check of the analytic equilibrium on a discretised game.
//!
//! Alternatives live on an `N`-point grid, the electorate is a panel of `M`
//! voters at the quantiles of the type distribution, and the proposer's type
//! is integrated over a `K`-point type grid whose weights are the CDF masses
//! of the cells around each node (cell masses, unlike trapezoid weights, stay
//! finite for densities that blow up at an endpoint).
//!
//! Backward induction keeps, for every evaluator (each type-grid node and
//! each panel voter) and every grid status quo, the expected utility of the
//! final outcome when the game continues from that status quo. A round is
//! then three passes over the grid:
//!
//! 1. panel votes between every ordered pair of alternatives, each voter
//!    comparing the continuation values of the two possible winners;
//! 2. the proposer picks the best winner among the status quo and every
//!    alternative that beats it;
//! 3. values for the previous round average over the proposer's type.
//!
//! The verification passes recompute values independently from the stored
//! policy alone (as distributions over final outcomes) before looking for
//! profitable deviations.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::TypeDistribution;
use crate::equilibrium::{eu_unchecked, final_round_winner, intermediate_round_winner};
use crate::error::{Error, Result};
use crate::mechanism::{mirror, quantile_panel, u};
use crate::output::machine;
use crate::thresholds::EquilibriumThresholds;

/// Default number of nodes on the proposer-type grid.
pub const DEFAULT_TYPE_NODES: usize = 401;

/// Proposer values closer than this are tied.
pub const VALUE_TIE_TOL: f64 = 1e-12;

/// A voter whose two continuation values differ by at most this votes as if
/// the round were the last one.
pub const VOTE_TIE_TOL: f64 = 1e-12;

/// Gain below which a deviation does not count as profitable.
pub const DEV_TOL: f64 = 1e-9;

/// Slack when deciding whether an achievable winner is optimal.
pub const OPT_TOL: f64 = 1e-9;

/// Tolerance for the sign and in-bound scans.
pub const SCAN_TOL: f64 = 1e-9;

const DIST_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct DiscreteGame {
    pub grid: Vec<f64>,
    pub distribution: TypeDistribution,
    pub rounds: u32,
    pub panel: Vec<f64>,
    pub types: Vec<f64>,
    pub type_weights: Vec<f64>,
    pub median_index: usize,
    pub snapped_median: f64,
}

impl DiscreteGame {
    pub fn n(&self) -> usize {
        self.grid.len()
    }

    /// Grid spacing.
    pub fn h(&self) -> f64 {
        1.0 / (self.grid.len() - 1) as f64
    }

    fn evaluators(&self) -> usize {
        self.types.len() + self.panel.len()
    }

    fn evaluator(&self, x: usize) -> f64 {
        if x < self.types.len() {
            self.types[x]
        } else {
            self.panel[x - self.types.len()]
        }
    }
}

pub fn build_discrete_game(d: &TypeDistribution, n: usize, m: usize, rounds: u32) -> Result<DiscreteGame> {
    build_discrete_game_with_types(d, n, m, rounds, DEFAULT_TYPE_NODES)
}

pub fn build_discrete_game_with_types(
    d: &TypeDistribution,
    n: usize,
    m: usize,
    rounds: u32,
    k: usize,
) -> Result<DiscreteGame> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("grid needs at least 3 points, got {n}")));
    }
    if m.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("panel size must be odd and positive, got {m}")));
    }
    if rounds < 1 {
        return Err(Error::InvalidArgument("the game needs at least one round".into()));
    }
    if k < 2 {
        return Err(Error::InvalidArgument(format!("type grid needs at least 2 nodes, got {k}")));
    }
    if n > u32::MAX as usize {
        return Err(Error::InvalidArgument(format!("grid of {n} points is too large")));
    }
    let grid: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let types: Vec<f64> = (0..k).map(|i| i as f64 / (k - 1) as f64).collect();
    let mut edges = Vec::with_capacity(k + 1);
    edges.push(0.0);
    edges.extend(types.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    edges.push(1.0);
    let cdf: Vec<f64> = edges.iter().map(|&e| d.cdf_ext(e)).collect();
    let type_weights: Vec<f64> = cdf.windows(2).map(|w| w[1] - w[0]).collect();

    let med = d.median();
    let median_index = ((med * (n - 1) as f64).round() as usize).min(n - 1);
    Ok(DiscreteGame {
        snapped_median: grid[median_index],
        grid,
        distribution: d.clone(),
        rounds,
        panel: quantile_panel(d, m)?,
        types,
        type_weights,
        median_index,
    })
}

/// Solved discrete game. Round `t` (1-based) is stored at index `t - 1`.
#[derive(Clone, Debug)]
pub struct ValueTable {
    n: usize,
    k: usize,
    /// `values[t - 1][x * n + w]`: evaluator `x`'s expected utility of the final
    /// outcome when round `t` starts with status quo `w`; `values[T]` is the
    /// plain utility.
    values: Vec<Vec<f64>>,
    /// `winners[t - 1][k * n + q]`: grid index of round `t`'s winner when
    /// the proposer has type node `k` and the status quo is `q`.
    winners: Vec<Vec<u32>>,
    /// `beats[t - 1][p * n + q]`: proposal `p` defeats status quo `q`.
    beats: Vec<Vec<bool>>,
}

impl ValueTable {
    pub fn rounds(&self) -> u32 {
        self.winners.len() as u32
    }

    /// Index of round `t`'s winner for type node `k` and status quo `q`.
    pub fn winner(&self, t: u32, k: usize, q: usize) -> usize {
        self.winners[t as usize - 1][k * self.n + q] as usize
    }

    pub fn beats(&self, t: u32, p: usize, q: usize) -> bool {
        self.beats[t as usize - 1][p * self.n + q]
    }

    /// Expected utility to evaluator `x` (type nodes first, then panel voters)
    /// of entering round `t` with status quo `w`; `t = T + 1` is the outcome.
    pub fn value(&self, t: u32, x: usize, w: usize) -> f64 {
        self.values[t as usize - 1][x * self.n + w]
    }

    /// Continuation value for type node `k` of winning round `t` with `w`.
    pub fn continuation(&self, t: u32, k: usize, w: usize) -> f64 {
        self.value(t + 1, k, w)
    }

    pub fn type_nodes(&self) -> usize {
        self.k
    }
}

/// Does voter `v` support `p` over `q` given continuation values `cp`, `cq`?
#[inline]
fn supports(v: f64, p: f64, q: f64, cp: f64, cq: f64) -> bool {
    let diff = cp - cq;
    if diff > VOTE_TIE_TOL {
        true
    } else if diff < -VOTE_TIE_TOL {
        false
    } else {
        (v - p).abs() <= (v - q).abs() + DIST_TOL
    }
}

/// Is candidate `(value, index)` better for a proposer at `tau` than the incumbent?
#[inline]
fn prefer(grid: &[f64], tau: f64, cand: usize, cv: f64, best: usize, bv: f64) -> bool {
    if cv > bv + VALUE_TIE_TOL {
        return true;
    }
    if cv < bv - VALUE_TIE_TOL {
        return false;
    }
    let (dc, db) = ((grid[cand] - tau).abs(), (grid[best] - tau).abs());
    dc < db - DIST_TOL || (dc <= db + DIST_TOL && cand < best)
}

pub fn backward_induction(g: &DiscreteGame) -> ValueTable {
    let n = g.n();
    let k = g.types.len();
    let ex = g.evaluators();
    let rounds = g.rounds as usize;

    let terminal: Vec<f64> = (0..ex)
        .flat_map(|x| {
            let v = g.evaluator(x);
            g.grid.iter().map(move |&w| u(v, w))
        })
        .collect();

    let mut values = vec![Vec::new(); rounds + 1];
    let mut winners = vec![Vec::new(); rounds];
    let mut beats = vec![Vec::new(); rounds];
    values[rounds] = terminal;

    for t in (0..rounds).rev() {
        let next = &values[t + 1];
        let m = g.panel.len();

        // beats[p * n + q], built one status quo at a time
        let cols: Vec<Vec<bool>> = (0..n)
            .into_par_iter()
            .map(|q| {
                (0..n)
                    .map(|p| {
                        if p == q {
                            return true;
                        }
                        let count = g
                            .panel
                            .iter()
                            .enumerate()
                            .filter(|&(j, &v)| {
                                let row = (k + j) * n;
                                supports(v, g.grid[p], g.grid[q], next[row + p], next[row + q])
                            })
                            .count();
                        2 * count >= m
                    })
                    .collect()
            })
            .collect();
        let mut b = vec![false; n * n];
        for (q, col) in cols.iter().enumerate() {
            for (p, &x) in col.iter().enumerate() {
                b[p * n + q] = x;
            }
        }

        let w_cols: Vec<Vec<u32>> = (0..n)
            .into_par_iter()
            .map(|q| {
                let achievable: Vec<usize> = (0..n).filter(|&p| p != q && b[p * n + q]).collect();
                (0..k)
                    .map(|kk| {
                        let tau = g.types[kk];
                        let row = kk * n;
                        let mut best = q;
                        let mut bv = next[row + q];
                        for &p in &achievable {
                            let v = next[row + p];
                            if prefer(&g.grid, tau, p, v, best, bv) {
                                best = p;
                                bv = v;
                            }
                        }
                        best as u32
                    })
                    .collect()
            })
            .collect();
        let mut w = vec![0u32; k * n];
        for (q, col) in w_cols.iter().enumerate() {
            for (kk, &x) in col.iter().enumerate() {
                w[kk * n + q] = x;
            }
        }

        let v_cols: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|q| {
                (0..ex)
                    .map(|x| {
                        let row = x * n;
                        (0..k).map(|kk| g.type_weights[kk] * next[row + w[kk * n + q] as usize]).sum()
                    })
                    .collect()
            })
            .collect();
        let mut vals = vec![0.0; ex * n];
        for (q, col) in v_cols.iter().enumerate() {
            for (x, &v) in col.iter().enumerate() {
                vals[x * n + q] = v;
            }
        }

        values[t] = vals;
        winners[t] = w;
        beats[t] = b;
    }

    ValueTable { n, k, values, winners, beats }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    /// The analytic equilibrium sends the outcome to the median, but the
    /// proposer does better keeping (or steering to) an outcome on its own
    /// side of the median.
    ProposerSideOutcome,
    /// The oracle's advantage over the analytic choice is no larger than
    /// the utility shift that snapping the median to the grid gives the
    /// oracle's choice.
    MedianSnapping,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub round: u32,
    pub type_index: usize,
    pub q_index: usize,
    pub analytic: f64,
    pub oracle: f64,
    pub gap: f64,
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WinnerReport {
    pub checked: usize,
    pub excluded: usize,
    /// Largest distance from the analytic winner to the nearest optimal
    /// achievable winner, over all checked cells.
    pub max_deviation: f64,
    pub violations: Vec<Violation>,
}

impl WinnerReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

/// `u(tau, snapped median) - u(tau, median)`: how much more a type likes the
/// grid's Condorcet winner than the true median.
/// Gain to `tau` from the grid outcome `near` standing in for the true median.
fn snapping_bias(th: &EquilibriumThresholds, tau: f64, near: f64) -> f64 {
    u(tau, near) - u(tau, th.theta_mu)
}

/// `margin` is how much better the oracle's choice is than the best
/// achievable winner near the analytic one (infinite if there is none).
fn classify(
    g: &DiscreteGame,
    th: &EquilibriumThresholds,
    tau: f64,
    analytic: f64,
    oracle: f64,
    margin: f64,
) -> ViolationKind {
    let med = th.theta_mu;
    let h = g.h();
    // off-grid medians leave final-round lotteries from nearby status quos
    // lopsided, so any winner within a cell of the median counts as "at" it
    let oracle_at_median = (oracle - med).abs() <= h + DIST_TOL;
    let analytic_at_median = analytic == med;
    if oracle_at_median && !analytic_at_median && margin <= snapping_bias(th, tau, oracle) + OPT_TOL {
        return ViolationKind::MedianSnapping;
    }
    if analytic_at_median && !oracle_at_median && margin <= -snapping_bias(th, tau, g.snapped_median) + OPT_TOL {
        return ViolationKind::MedianSnapping;
    }
    if analytic_at_median && ((tau < med && oracle < med - h) || (tau > med && oracle > med + h)) {
        ViolationKind::ProposerSideOutcome
    } else {
        ViolationKind::Other
    }
}

/// Type nodes within two grid cells of an interior threshold, where the
/// proposer is (nearly) indifferent and discretisation decides.
fn in_indifference_band(th: &EquilibriumThresholds, h: f64, tau: f64) -> bool {
    (th.theta_lower > 0.0 && (tau - th.theta_lower).abs() <= 2.0 * h)
        || (th.theta_upper < 1.0 && (tau - th.theta_upper).abs() <= 2.0 * h)
}

/// Compares the oracle's intermediate-round play with the analytic winner.
///
/// A cell passes when some achievable winner that is optimal for the
/// proposer (within `OPT_TOL`) lies within one grid cell of the analytic
/// winner, so genuine indifference between winners is not flagged.
pub fn verify_theorem(g: &DiscreteGame, table: &ValueTable, th: &EquilibriumThresholds) -> WinnerReport {
    let n = g.n();
    let h = g.h();
    let mut report = WinnerReport { checked: 0, excluded: 0, max_deviation: 0.0, violations: Vec::new() };
    for t in 1..g.rounds {
        let per_q: Vec<(usize, usize, f64, Vec<Violation>)> = (0..n)
            .into_par_iter()
            .map(|q| {
                let achievable: Vec<usize> = (0..n).filter(|&p| table.beats(t, p, q)).collect();
                let (mut checked, mut excluded, mut dev, mut out) = (0, 0, 0.0f64, Vec::new());
                for (kk, &tau) in g.types.iter().enumerate() {
                    if in_indifference_band(th, h, tau) {
                        excluded += 1;
                        continue;
                    }
                    checked += 1;
                    let analytic = intermediate_round_winner(th, tau, g.grid[q]);
                    let best = achievable
                        .iter()
                        .map(|&w| table.continuation(t, kk, w))
                        .fold(f64::NEG_INFINITY, f64::max);
                    let nearest = achievable
                        .iter()
                        .filter(|&&w| table.continuation(t, kk, w) >= best - OPT_TOL)
                        .map(|&w| (g.grid[w] - analytic).abs())
                        .fold(f64::INFINITY, f64::min);
                    dev = dev.max(nearest);
                    if nearest > h + DIST_TOL {
                        let oracle = g.grid[table.winner(t, kk, q)];
                        let near_value = achievable
                            .iter()
                            .filter(|&&w| (g.grid[w] - analytic).abs() <= h + DIST_TOL)
                            .map(|&w| table.continuation(t, kk, w))
                            .fold(f64::NEG_INFINITY, f64::max);
                        out.push(Violation {
                            round: t,
                            type_index: kk,
                            q_index: q,
                            analytic,
                            oracle,
                            gap: (oracle - analytic).abs(),
                            kind: classify(g, th, tau, analytic, oracle, best - near_value),
                        });
                    }
                }
                (checked, excluded, dev, out)
            })
            .collect();
        for (c, e, d, v) in per_q {
            report.checked += c;
            report.excluded += e;
            report.max_deviation = report.max_deviation.max(d);
            report.violations.extend(v);
        }
    }
    report
        .violations
        .sort_by_key(|v| (v.round, v.type_index, v.q_index));
    report
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinalRoundReport {
    pub checked: usize,
    pub mismatches: Vec<Violation>,
}

impl FinalRoundReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Last-round play against the closed-form winner: the oracle must pick a
/// grid point in `[min(q, c(q)), max(q, c(q))]` that is as close as any
/// other such point to `final_round_winner`.
pub fn verify_final_round(g: &DiscreteGame, table: &ValueTable) -> FinalRoundReport {
    let n = g.n();
    let t = g.rounds;
    let med = g.distribution.median();
    let mut mismatches: Vec<Violation> = (0..n)
        .into_par_iter()
        .flat_map_iter(|q| {
            let qv = g.grid[q];
            let c = mirror(med, qv);
            let (a, b) = (qv.min(c) - DIST_TOL, qv.max(c) + DIST_TOL);
            let inside: Vec<usize> = (0..n).filter(|&p| g.grid[p] >= a && g.grid[p] <= b).collect();
            g.types
                .iter()
                .enumerate()
                .filter_map(|(kk, &tau)| {
                    let target = final_round_winner(med, tau, qv);
                    let best = inside.iter().map(|&p| (g.grid[p] - target).abs()).fold(f64::INFINITY, f64::min);
                    let w = table.winner(t, kk, q);
                    let ok = inside.contains(&w) && (g.grid[w] - target).abs() <= best + DIST_TOL;
                    (!ok).then(|| Violation {
                        round: t,
                        type_index: kk,
                        q_index: q,
                        analytic: target,
                        oracle: g.grid[w],
                        gap: (g.grid[w] - target).abs(),
                        kind: ViolationKind::Other,
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect();
    mismatches.sort_by_key(|v| (v.round, v.type_index, v.q_index));
    FinalRoundReport { checked: n * g.types.len(), mismatches }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrategyProofnessReport {
    pub proposer_checks: usize,
    pub proposer_violations: usize,
    pub max_proposer_gain: f64,
    pub voter_checks: usize,
    pub voter_violations: usize,
    /// Zero when no voter is ever pivotal.
    pub max_voter_gain: f64,
    /// Largest gap between the stored values and the values recomputed
    /// from the policy.
    pub value_mismatch: f64,
}

impl StrategyProofnessReport {
    pub fn passed(&self) -> bool {
        self.proposer_violations == 0 && self.voter_violations == 0
    }
}

/// Looks for profitable one-shot deviations from the oracle's equilibrium.
///
/// Continuation values are rebuilt from the stored winner maps as
/// distributions over final outcomes, so arithmetic slips in the induction
/// show up as gains. Proposers may try every grid alternative; a panel voter
/// may flip its vote wherever it is pivotal.
pub fn verify_strategy_proofness(g: &DiscreteGame, table: &ValueTable) -> StrategyProofnessReport {
    let n = g.n();
    let k = g.types.len();
    let ex = g.evaluators();
    let m = g.panel.len();
    let utils: Vec<f64> =
        (0..ex).flat_map(|x| g.grid.iter().map(move |&z| u(g.evaluator(x), z))).collect();

    // outcome distribution from each status quo; identity after the last round
    let mut dist: Vec<f64> = (0..n * n).map(|i| if i / n == i % n { 1.0 } else { 0.0 }).collect();
    let mut report = StrategyProofnessReport {
        proposer_checks: 0,
        proposer_violations: 0,
        max_proposer_gain: f64::NEG_INFINITY,
        voter_checks: 0,
        voter_violations: 0,
        max_voter_gain: 0.0,
        value_mismatch: 0.0,
    };

    for t in (1..=g.rounds).rev() {
        // value[x * n + w] of entering round t + 1 with status quo w
        let v_rows: Vec<Vec<f64>> = (0..ex)
            .into_par_iter()
            .map(|x| {
                let ur = &utils[x * n..(x + 1) * n];
                (0..n).map(|w| dist[w * n..(w + 1) * n].iter().zip(ur).map(|(p, u)| p * u).sum()).collect()
            })
            .collect();
        let value: Vec<f64> = v_rows.concat();
        let mismatch = (0..ex * n)
            .map(|i| (value[i] - table.value(t + 1, i / n, i % n)).abs())
            .fold(0.0, f64::max);
        report.value_mismatch = report.value_mismatch.max(mismatch);

        let proposer: Vec<(usize, f64)> = (0..n)
            .into_par_iter()
            .map(|q| {
                let (mut bad, mut gain) = (0, f64::NEG_INFINITY);
                for kk in 0..k {
                    let base = value[kk * n + table.winner(t, kk, q)];
                    for p in 0..n {
                        let o = if table.beats(t, p, q) { p } else { q };
                        let d = value[kk * n + o] - base;
                        gain = gain.max(d);
                        bad += (d > DEV_TOL) as usize;
                    }
                }
                (bad, gain)
            })
            .collect();
        for (bad, gain) in proposer {
            report.proposer_violations += bad;
            report.max_proposer_gain = report.max_proposer_gain.max(gain);
        }
        report.proposer_checks += k * n * n;

        let voter: Vec<(usize, usize, f64)> = (0..n)
            .into_par_iter()
            .map(|q| {
                let (mut checks, mut bad, mut gain) = (0, 0, 0.0f64);
                for p in (0..n).filter(|&p| p != q) {
                    let votes: Vec<bool> = g
                        .panel
                        .iter()
                        .enumerate()
                        .map(|(j, &v)| {
                            let x = k + j;
                            supports(v, g.grid[p], g.grid[q], table.value(t + 1, x, p), table.value(t + 1, x, q))
                        })
                        .collect();
                    let count = votes.iter().filter(|&&b| b).count();
                    let passes = table.beats(t, p, q);
                    if passes != (2 * count >= m) {
                        bad += 1;
                    }
                    for (j, &yes) in votes.iter().enumerate() {
                        let flipped = if yes { count - 1 } else { count + 1 };
                        if (2 * flipped >= m) == passes {
                            continue;
                        }
                        checks += 1;
                        let x = k + j;
                        let (now, alt) = if passes { (p, q) } else { (q, p) };
                        let d = value[x * n + alt] - value[x * n + now];
                        gain = gain.max(d);
                        bad += (d > DEV_TOL) as usize;
                    }
                }
                (checks, bad, gain)
            })
            .collect();
        for (c, bad, gain) in voter {
            report.voter_checks += c;
            report.voter_violations += bad;
            report.max_voter_gain = report.max_voter_gain.max(gain);
        }

        // distribution from round t onwards
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|q| {
                let mut row = vec![0.0; n];
                for kk in 0..k {
                    let w = table.winner(t, kk, q);
                    let wt = g.type_weights[kk];
                    for (r, &p) in row.iter_mut().zip(&dist[w * n..(w + 1) * n]) {
                        *r += wt * p;
                    }
                }
                row
            })
            .collect();
        dist = rows.concat();
    }
    report
}

/// Sign pattern of `EU_s(s) - u(s, θ_μ)` on `k` evenly spaced types:
/// nonnegative below an interior `θ̲`, nonpositive between the thresholds,
/// nonnegative above an interior `θ̄`.
pub fn verify_lemma1_sign(d: &TypeDistribution, th: &EquilibriumThresholds, k: usize) -> Result<bool> {
    if k < 10 {
        return Err(Error::InvalidArgument(format!("sign scan needs at least 10 points, got {k}")));
    }
    let med = th.theta_mu;
    Ok((0..k).all(|i| {
        let s = i as f64 / (k - 1) as f64;
        let gap = eu_unchecked(d, s, s) - u(s, med);
        let low_ok = !(th.theta_lower > 0.0 && s <= th.theta_lower) || gap >= -SCAN_TOL;
        let mid_ok = !(s >= th.theta_lower && s <= th.theta_upper) || gap <= SCAN_TOL;
        let high_ok = !(th.theta_upper < 1.0 && s >= th.theta_upper) || gap >= -SCAN_TOL;
        low_ok && mid_ok && high_ok
    }))
}

/// Extreme types value any winner between their peak and the threshold at
/// least as much as the median. Scans `points` types and `points` winners per
/// type on each nondegenerate side.
pub fn verify_in_bound_scan(d: &TypeDistribution, th: &EquilibriumThresholds, points: usize) -> bool {
    let med = th.theta_mu;
    let span = |a: f64, b: f64, i: usize| a + (b - a) * i as f64 / (points.max(2) - 1) as f64;
    let low = th.theta_lower <= 0.0
        || (0..points).all(|i| {
            let s = span(0.0, th.theta_lower, i);
            (0..points).all(|j| eu_unchecked(d, s, span(s, th.theta_lower, j)) >= u(s, med) - SCAN_TOL)
        });
    let high = th.theta_upper >= 1.0
        || (0..points).all(|i| {
            let s = span(th.theta_upper, 1.0, i);
            (0..points).all(|j| eu_unchecked(d, s, span(th.theta_upper, s, j)) >= u(s, med) - SCAN_TOL)
        });
    low && high
}

/// Discrete counterpart of [`verify_in_bound_scan`] on the oracle's own
/// continuation values one round before the end. Returns the number of
/// (type, winner) pairs that fail; type nodes in the indifference band are
/// skipped.
pub fn in_bound_discrete_failures(g: &DiscreteGame, table: &ValueTable, th: &EquilibriumThresholds) -> usize {
    if g.rounds < 2 {
        return 0;
    }
    let t = g.rounds - 1;
    let h = g.h();
    let med = th.theta_mu;
    let mut failures = 0;
    for (kk, &tau) in g.types.iter().enumerate() {
        if in_indifference_band(th, h, tau) {
            continue;
        }
        let low = tau < th.theta_lower;
        let high = tau > th.theta_upper;
        if !low && !high {
            continue;
        }
        for (w, &x) in g.grid.iter().enumerate() {
            let in_bound = if low { x >= tau && x <= th.theta_lower } else { x <= tau && x >= th.theta_upper };
            if in_bound && table.continuation(t, kk, w) < u(tau, med) - SCAN_TOL {
                failures += 1;
            }
        }
    }
    failures
}

/// Round `T - 1` winners that are not within a grid cell of one of the three
/// first-order candidates `min(2θ_μ - 1, s)`, `θ_μ`, `max(2θ_μ, s)`.
pub fn cases_coverage(g: &DiscreteGame, table: &ValueTable, th: &EquilibriumThresholds) -> Vec<Violation> {
    if g.rounds < 2 {
        return Vec::new();
    }
    let t = g.rounds - 1;
    let h = g.h();
    let med = th.theta_mu;
    let mut out = Vec::new();
    for (kk, &tau) in g.types.iter().enumerate() {
        let cands = [(2.0 * med - 1.0).min(tau).clamp(0.0, 1.0), med, (2.0 * med).max(tau).clamp(0.0, 1.0)];
        for q in 0..g.n() {
            let w = g.grid[table.winner(t, kk, q)];
            let (nearest, gap) = cands
                .iter()
                .map(|&c| (c, (w - c).abs()))
                .fold((med, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            if gap > h + DIST_TOL {
                out.push(Violation {
                    round: t,
                    type_index: kk,
                    q_index: q,
                    analytic: nearest,
                    oracle: w,
                    gap,
                    kind: classify(g, th, tau, med, w, f64::INFINITY),
                });
            }
        }
    }
    out
}

pub const VIOLATION_HEADER: &str = "round,type_index,q_index,analytic,oracle,gap";

pub fn format_violations(violations: &[Violation]) -> String {
    let mut s = String::from(VIOLATION_HEADER);
    s.push('\n');
    for v in violations {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            v.round,
            v.type_index,
            v.q_index,
            machine(v.analytic),
            machine(v.oracle),
            machine(v.gap)
        );
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationSummary {
    pub winners: WinnerReport,
    pub final_round: FinalRoundReport,
    pub strategy_proofness: StrategyProofnessReport,
    pub sign_scan: bool,
    pub in_bound_scan: bool,
}

impl VerificationSummary {
    pub fn passed(&self) -> bool {
        self.winners.passed()
            && self.final_round.passed()
            && self.strategy_proofness.passed()
            && self.sign_scan
            && self.in_bound_scan
    }
}

/// Every oracle check on one game.
pub fn verify_all(g: &DiscreteGame, th: &EquilibriumThresholds) -> Result<VerificationSummary> {
    let table = backward_induction(g);
    Ok(VerificationSummary {
        winners: verify_theorem(g, &table, th),
        final_round: verify_final_round(g, &table),
        strategy_proofness: verify_strategy_proofness(g, &table),
        sign_scan: verify_lemma1_sign(&g.distribution, th, g.types.len().max(10))?,
        in_bound_scan: verify_in_bound_scan(&g.distribution, th, 200),
    })
}
