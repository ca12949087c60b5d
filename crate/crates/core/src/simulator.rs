//! Seeded Monte Carlo of the multi-round game.
//!
//! Each replication owns a ChaCha stream selected by its index, so a
//! replication is reproducible on its own and the aggregate does not depend
//! on how replications are spread over threads. Outcomes are gathered in
//! index order and summed sequentially, which keeps even the floating-point
//! mean bit-identical across thread counts.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::TypeDistribution;
use crate::equilibrium::{
    closed_form_probability, optimal_proposal_final, optimal_proposal_intermediate,
};
use crate::error::{check_unit, Error, Result};
use crate::mechanism::vote_unchecked;
use crate::output::machine;
use crate::thresholds::{solve_thresholds, EquilibriumThresholds};

/// A final winner within this distance of the median counts as the median.
pub const WIN_TOL: f64 = 1e-9;

const CHUNK: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VoterMode {
    Sophisticated,
    Myopic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProposerMode {
    Equilibrium,
    OwnPeakNaive,
}

/// Round-one status quo, fixed or drawn per replication.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum InitialStatusQuo {
    Fixed(f64),
    Uniform { lo: f64, hi: f64 },
}

impl InitialStatusQuo {
    /// The status quo least favourable to the median: the end of `[0, 1]`
    /// on the side of the long tail. Extreme proposers can then move the
    /// outcome, and the closed-form probability is attained exactly.
    pub fn worst_case(d: &TypeDistribution) -> Self {
        InitialStatusQuo::Fixed(if d.median() >= 0.5 { 0.0 } else { 1.0 })
    }

    fn validate(&self) -> Result<()> {
        match *self {
            InitialStatusQuo::Fixed(x) => check_unit("q1", x).map(|_| ()),
            InitialStatusQuo::Uniform { lo, hi } => {
                check_unit("q1 lower bound", lo)?;
                check_unit("q1 upper bound", hi)?;
                if lo > hi {
                    return Err(Error::InvalidArgument(format!("q1 range [{lo}, {hi}] is empty")));
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct GameConfig {
    pub distribution: TypeDistribution,
    pub rounds: u32,
    pub initial_status_quo: InitialStatusQuo,
    pub voter_mode: VoterMode,
    pub proposer_mode: ProposerMode,
    pub seed: u64,
    pub replications: u64,
}

impl GameConfig {
    /// Equilibrium play, sophisticated voters, worst-case status quo.
    pub fn new(distribution: TypeDistribution, rounds: u32, seed: u64, replications: u64) -> Self {
        let initial_status_quo = InitialStatusQuo::worst_case(&distribution);
        GameConfig {
            distribution,
            rounds,
            initial_status_quo,
            voter_mode: VoterMode::Sophisticated,
            proposer_mode: ProposerMode::Equilibrium,
            seed,
            replications,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds < 1 {
            return Err(Error::InvalidArgument("the game needs at least one round".into()));
        }
        if self.replications < 1 {
            return Err(Error::InvalidArgument("replications must be positive".into()));
        }
        self.initial_status_quo.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub t: u32,
    pub proposer_type: f64,
    pub proposal: f64,
    pub status_quo: f64,
    pub winner: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub replication: u64,
    pub rounds: Vec<RoundRecord>,
    pub final_winner: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub distribution: String,
    pub rounds: u32,
    pub initial_status_quo: InitialStatusQuo,
    pub voter_mode: VoterMode,
    pub proposer_mode: ProposerMode,
    pub seed: u64,
    pub replications: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationReport {
    pub config: ConfigEcho,
    pub theta_mu: f64,
    pub p_hat: f64,
    pub standard_error: f64,
    /// `None` for a single-round game, where the formula does not apply.
    pub closed_form: Option<f64>,
    /// `None` when there is no closed form or the standard error vanishes.
    pub z_score: Option<f64>,
    pub mean_final_distance_to_median: f64,
    pub successes: u64,
}

/// A validated configuration with its thresholds solved once.
#[derive(Clone, Debug)]
pub struct Simulator {
    config: GameConfig,
    thresholds: EquilibriumThresholds,
}

impl Simulator {
    pub fn new(config: GameConfig) -> Result<Self> {
        config.validate()?;
        let thresholds = solve_thresholds(&config.distribution)?;
        Ok(Simulator { config, thresholds })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn thresholds(&self) -> &EquilibriumThresholds {
        &self.thresholds
    }

    pub fn trajectory(&self, replication: u64) -> Trajectory {
        self.trajectory_with(replication, self.config.voter_mode)
    }

    fn trajectory_with(&self, replication: u64, voter_mode: VoterMode) -> Trajectory {
        let cfg = &self.config;
        let d = &cfg.distribution;
        let th = &self.thresholds;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(replication);

        let mut q = match cfg.initial_status_quo {
            InitialStatusQuo::Fixed(x) => x,
            InitialStatusQuo::Uniform { lo, hi } => lo + (hi - lo) * rng.gen::<f64>(),
        };
        let mut rounds = Vec::with_capacity(cfg.rounds as usize);
        for t in 1..=cfg.rounds {
            let s = d.quantile(rng.gen::<f64>());
            let last = t == cfg.rounds;
            let equilibrium = cfg.proposer_mode == ProposerMode::Equilibrium;
            let p = match (equilibrium, last) {
                (false, _) => s,
                (true, false) => optimal_proposal_intermediate(th, s, q).proposal,
                (true, true) => optimal_proposal_final(th.theta_mu, s, q).proposal,
            };
            // voters look ahead only where the equilibrium says how play continues
            let w = if equilibrium && !last && voter_mode == VoterMode::Sophisticated {
                if p.max(q) < th.theta_lower {
                    p.max(q)
                } else if p.min(q) > th.theta_upper {
                    p.min(q)
                } else {
                    vote_unchecked(d, p, q).winner
                }
            } else {
                vote_unchecked(d, p, q).winner
            };
            rounds.push(RoundRecord { t, proposer_type: s, proposal: p, status_quo: q, winner: w });
            q = w;
        }
        Trajectory { replication, rounds, final_winner: q }
    }

    /// Runs every replication on the current rayon pool.
    pub fn monte_carlo(&self) -> SimulationReport {
        let cfg = &self.config;
        let med = self.thresholds.theta_mu;
        let n = cfg.replications;
        let mut successes = 0u64;
        let mut dist_sum = 0.0;
        let mut start = 0u64;
        while start < n {
            let end = (start + CHUNK as u64).min(n);
            let chunk: Vec<(bool, f64)> = (start..end)
                .into_par_iter()
                .map(|r| {
                    let dist = (self.trajectory(r).final_winner - med).abs();
                    (dist <= WIN_TOL, dist)
                })
                .collect();
            for (hit, dist) in chunk {
                successes += hit as u64;
                dist_sum += dist;
            }
            start = end;
        }

        let p_hat = successes as f64 / n as f64;
        let standard_error = (p_hat * (1.0 - p_hat) / n as f64).sqrt();
        let closed_form = closed_form_probability(&cfg.distribution, &self.thresholds, cfg.rounds).ok();
        let z_score = match closed_form {
            Some(p) if standard_error > 0.0 => Some((p_hat - p) / standard_error),
            _ => None,
        };
        SimulationReport {
            config: ConfigEcho {
                distribution: cfg.distribution.to_string(),
                rounds: cfg.rounds,
                initial_status_quo: cfg.initial_status_quo,
                voter_mode: cfg.voter_mode,
                proposer_mode: cfg.proposer_mode,
                seed: cfg.seed,
                replications: n,
            },
            theta_mu: med,
            p_hat,
            standard_error,
            closed_form,
            z_score,
            mean_final_distance_to_median: dist_sum / n as f64,
            successes,
        }
    }

    /// Same as [`Simulator::monte_carlo`] on a dedicated pool of `threads` workers.
    pub fn monte_carlo_with_threads(&self, threads: usize) -> Result<SimulationReport> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot build thread pool: {e}")))?;
        Ok(pool.install(|| self.monte_carlo()))
    }

    /// True iff sophisticated and myopic voting produce the same final
    /// winner in every replication.
    pub fn voter_modes_agree(&self) -> Result<bool> {
        if self.config.proposer_mode != ProposerMode::Equilibrium {
            return Err(Error::InvalidArgument(
                "voter modes are only compared under equilibrium proposals".into(),
            ));
        }
        Ok((0..self.config.replications).into_par_iter().all(|r| {
            let a = self.trajectory_with(r, VoterMode::Sophisticated).final_winner;
            let b = self.trajectory_with(r, VoterMode::Myopic).final_winner;
            (a - b).abs() <= WIN_TOL
        }))
    }
}

pub fn run_trajectory(config: &GameConfig, replication: u64) -> Result<Trajectory> {
    Ok(Simulator::new(config.clone())?.trajectory(replication))
}

pub fn run_monte_carlo(config: &GameConfig) -> Result<SimulationReport> {
    Ok(Simulator::new(config.clone())?.monte_carlo())
}

pub fn compare_voter_modes(config: &GameConfig) -> Result<bool> {
    Simulator::new(config.clone())?.voter_modes_agree()
}

pub const TRAJECTORY_HEADER: &str = "replication,t,proposer_type,proposal,status_quo,winner";

pub fn write_trajectories_csv<W: Write>(out: &mut W, trajectories: &[Trajectory]) -> std::io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for tr in trajectories {
        for r in &tr.rounds {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                tr.replication,
                r.t,
                machine(r.proposer_type),
                machine(r.proposal),
                machine(r.status_quo),
                machine(r.winner)
            )?;
        }
    }
    Ok(())
}
