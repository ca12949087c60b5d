pub mod cli;
pub mod distributions;
pub mod equilibrium;
pub mod error;
pub mod mechanism;
pub mod numerics;
pub mod oracle;
pub mod output;
pub mod simulator;
pub mod thresholds;

pub use distributions::{AdmissibilityReport, EmpiricalCdf, Family, MedianBranch, TypeDistribution};
pub use equilibrium::{
    closed_form_probability, expected_utility_of_winner, final_round_winner,
    intermediate_round_winner, optimal_intermediate_winner, optimal_proposal_final,
    optimal_proposal_intermediate, ProposalDecision, Rationale, RoundKind,
};
pub use error::{Error, Result};
pub use mechanism::{pairwise_vote, panel_vote, quantile_panel, reflect, utility, VoteOutcome};
pub use oracle::{
    backward_induction, build_discrete_game, verify_all, verify_final_round, verify_in_bound_scan,
    verify_lemma1_sign, verify_strategy_proofness, verify_theorem, DiscreteGame, ValueTable,
    ViolationKind,
};
pub use simulator::{
    compare_voter_modes, run_monte_carlo, run_trajectory, GameConfig, InitialStatusQuo,
    ProposerMode, SimulationReport, Simulator, Trajectory, VoterMode,
};
pub use thresholds::{
    compute_thresholds, indifference_gap_high, indifference_gap_low, solve_thresholds,
    two_round_condition, EquilibriumThresholds, TwoRoundCertificate,
};
