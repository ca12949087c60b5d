use proptest::prelude::*;

use vrp_core::{
    closed_form_probability, expected_utility_of_winner, final_round_winner, intermediate_round_winner,
    optimal_intermediate_winner, pairwise_vote, panel_vote, quantile_panel, reflect, run_trajectory,
    solve_thresholds, utility, GameConfig, InitialStatusQuo, TypeDistribution,
};

fn shape() -> impl Strategy<Value = (f64, f64)> {
    (0.5f64..25.0, 0.5f64..25.0)
}

fn admissible_beta() -> impl Strategy<Value = TypeDistribution> {
    shape().prop_filter_map("inadmissible", |(a, b)| {
        let d = TypeDistribution::beta(a, b).ok()?;
        d.check_admissibility().admissible.then_some(d)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn final_winner_is_median_preferred_and_closest_to_proposer(
        med in 0.0f64..=1.0, s in 0.0f64..=1.0, q in 0.0f64..=1.0,
    ) {
        let w = final_round_winner(med, s, q);
        let c = reflect(med, q).unwrap();
        let (lo, hi) = (q.min(c), q.max(c));
        prop_assert!(w >= lo - 1e-12 && w <= hi + 1e-12);
        // nothing in the acceptable interval is closer to the proposer
        let best = s.clamp(lo, hi);
        prop_assert!(((w - s).abs() - (best - s).abs()).abs() < 1e-12);
    }

    #[test]
    fn median_never_loses_a_continuum_vote(d in admissible_beta(), q in 0.0f64..=1.0) {
        let med = d.median();
        prop_assert_eq!(pairwise_vote(&d, med, q).unwrap().winner, med);
    }

    #[test]
    fn panel_vote_agrees_with_continuum_away_from_ties(
        (a, b) in shape(), p in 0.0f64..=1.0, q in 0.0f64..=1.0,
    ) {
        let d = TypeDistribution::beta(a, b).unwrap();
        let cont = pairwise_vote(&d, p, q).unwrap();
        prop_assume!((cont.proposal_share - 0.5).abs() > 0.01);
        let panel = quantile_panel(&d, 1001).unwrap();
        prop_assert_eq!(panel_vote(&panel, p, q).unwrap().winner, cont.winner);
    }

    #[test]
    fn closed_form_is_a_probability_increasing_in_rounds(d in admissible_beta(), t in 2u32..8) {
        let th = solve_thresholds(&d).unwrap();
        let p = closed_form_probability(&d, &th, t).unwrap();
        let next = closed_form_probability(&d, &th, t + 1).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(next >= p - 1e-15);
        if d.median() >= 0.5 {
            prop_assert!(p >= 1.0 - 0.5f64.powi(t as i32 - 1) - 1e-12);
        }
    }

    #[test]
    fn thresholds_bracket_the_median(d in admissible_beta()) {
        let th = solve_thresholds(&d).unwrap();
        prop_assert!(th.theta_lower <= th.theta_mu && th.theta_mu <= th.theta_upper);
        prop_assert!(th.theta_lower >= 0.0 && th.theta_upper <= 1.0);
    }

    #[test]
    fn analytic_winner_is_optimal_for_the_proposer(d in admissible_beta(), s in 0.0f64..=1.0) {
        let th = solve_thresholds(&d).unwrap();
        let w = optimal_intermediate_winner(&d, &th, s);
        let eu = expected_utility_of_winner(&d, s, w).unwrap();
        let at_median = expected_utility_of_winner(&d, s, th.theta_mu).unwrap();
        let at_own = expected_utility_of_winner(&d, s, s).unwrap();
        prop_assert!(eu >= at_median - 1e-9);
        prop_assert!(eu >= at_own - 1e-9);
    }

    #[test]
    fn trajectories_are_reproducible_and_consistent(
        d in admissible_beta(), rounds in 1u32..6, seed in any::<u64>(), rep in 0u64..1000,
    ) {
        let mut config = GameConfig::new(d, rounds, seed, 1);
        config.initial_status_quo = InitialStatusQuo::Uniform { lo: 0.0, hi: 1.0 };
        let a = run_trajectory(&config, rep).unwrap();
        let b = run_trajectory(&config, rep).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.rounds.len(), rounds as usize);
        for pair in a.rounds.windows(2) {
            prop_assert_eq!(pair[1].status_quo, pair[0].winner);
        }
        for r in &a.rounds {
            prop_assert!(r.winner == r.proposal || r.winner == r.status_quo);
        }
        prop_assert_eq!(a.final_winner, a.rounds.last().unwrap().winner);
    }

    #[test]
    fn own_type_regime_keeps_the_higher_alternative(
        a in 8.0f64..40.0, u in 0.0f64..1.0, v in 0.0f64..1.0,
    ) {
        // long left tails put an interior lower threshold in play
        let d = TypeDistribution::beta(a, 2.0).unwrap();
        let th = solve_thresholds(&d).unwrap();
        prop_assert!(th.theta_lower > 0.0);
        let (s, q) = (u * th.theta_lower, v * th.theta_lower);
        prop_assert_eq!(intermediate_round_winner(&th, s, q), s.max(q));
    }

    #[test]
    fn utility_is_symmetric_about_the_peak(theta in 0.0f64..=1.0, d in 0.0f64..0.5) {
        prop_assume!(theta - d >= 0.0 && theta + d <= 1.0);
        prop_assert!((utility(theta, theta - d).unwrap() - utility(theta, theta + d).unwrap()).abs() < 1e-15);
    }
}
