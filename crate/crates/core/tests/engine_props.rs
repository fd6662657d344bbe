mod common;

use common::{game_params, ks_distance, mixture};
use opphunt_core::{
    derive_seed, markov_value_for, realized_payoff, sample_play, simulate_batch, simulate_plays,
    DelayDistribution, GameParams, Outcome, Player, PlayerSet, SimConfig, Strategy,
};
use proptest::prelude::*;

fn first_time(s1: &Strategy, s2: &Strategy, p: &GameParams, seed: u64) -> f64 {
    let res = sample_play(s1, s2, p, &SimConfig::default(), seed).unwrap();
    let first = res.play.history.records().next().map_or(f64::INFINITY, |r| r.time);
    first
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn same_seed_same_play(d1 in mixture(), d2 in mixture(), p in game_params(), seed in any::<u64>()) {
        let (s1, s2) = (Strategy::from_distribution(d1), Strategy::from_distribution(d2));
        let a = sample_play(&s1, &s2, &p, &SimConfig::default(), seed).unwrap();
        let b = sample_play(&s1, &s2, &p, &SimConfig::default(), seed).unwrap();
        prop_assert_eq!(a.play.to_text(), b.play.to_text());
        prop_assert_eq!(a.rng_trace_len, b.rng_trace_len);
        prop_assert!(a.play.validate().is_empty());
    }

    #[test]
    fn first_inspection_follows_the_minimum(d1 in mixture(), d2 in mixture(), p in game_params(), master in any::<u64>()) {
        let (s1, s2) = (Strategy::from_distribution(d1.clone()), Strategy::from_distribution(d2.clone()));
        let mut xs: Vec<f64> = (0..3000).map(|i| first_time(&s1, &s2, &p, derive_seed(master, i))).collect();
        let cdf = |x: f64| 1.0 - d1.survival(x) * d2.survival(x);
        let cdf_left = |x: f64| {
            1.0 - (d1.survival(x) + d1.atom_mass_at(x)) * (d2.survival(x) + d2.atom_mass_at(x))
        };
        let ks = ks_distance(&mut xs, cdf, cdf_left);
        // 0.1% critical value for n = 3000 is about 0.036
        prop_assert!(ks < 0.036, "ks {ks}");
    }

    #[test]
    fn realized_payoff_charges_actual_inspectors(d1 in mixture(), d2 in mixture(), p in game_params(), seed in any::<u64>()) {
        let (s1, s2) = (Strategy::from_distribution(d1), Strategy::from_distribution(d2));
        let res = sample_play(&s1, &s2, &p, &SimConfig::default(), seed).unwrap();
        for who in Player::BOTH {
            let mut expected = 0.0;
            for r in res.play.history.records() {
                if r.actual == PlayerSet::only(who) {
                    expected -= p.cost_of(who) * (-p.r * r.time).exp();
                }
            }
            if let Outcome::Discovered { by, at } = res.play.outcome {
                expected += (-p.r * at).exp() * if by == who { p.v_finder } else { p.v_other };
            }
            prop_assert!((realized_payoff(&res.play, &p, who) - expected).abs() < 1e-12 * (1.0 + expected.abs()));
            prop_assert_eq!(res.payoff[who.index()], realized_payoff(&res.play, &p, who));
        }
    }
}

#[test]
fn symmetric_ties_split_evenly() {
    let s = Strategy::deterministic(0.6);
    let p = GameParams::new(0.0, 1.0, 0.3, 1.0, 0.2);
    let n = 20_000;
    let wins = (0..n)
        .filter(|&i| {
            let res = sample_play(&s, &s, &p, &SimConfig::default(), derive_seed(11, i)).unwrap();
            let first = res.play.history.records().next().unwrap();
            assert_eq!(first.attempted, PlayerSet::BOTH);
            first.actual_player() == Some(Player::One)
        })
        .count() as f64;
    let rate = wins / n as f64;
    let se = (0.25 / n as f64).sqrt();
    assert!((rate - 0.5).abs() <= 3.0 * se, "rate {rate}");
}

#[test]
fn batches_do_not_depend_on_thread_count() {
    let s1 = Strategy::exponential(0.9);
    let s2 = Strategy::mixture(vec![(0.5, Strategy::deterministic(0.7)), (0.5, Strategy::Never)]);
    let p = GameParams::new(0.05, 1.3, 0.2, 1.0, 0.4);
    let cfg = SimConfig {
        replications: 5000,
        master_seed: 3,
        ..SimConfig::default()
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_batch(&s1, &s2, &p, &cfg).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one.csv_row(), run(3).csv_row());
    let plays = simulate_plays(&s1, &s2, &p, &cfg).unwrap();
    let mean = plays.iter().map(|r| r.payoff[0]).sum::<f64>() / plays.len() as f64;
    assert!((mean - one.mean[0]).abs() < 1e-12);
}

#[test]
fn monte_carlo_matches_fixed_point() {
    let cases = [
        (Strategy::deterministic(0.8), Strategy::Never, GameParams::new(0.0, 1.0, 0.0, 1.0, 0.0)),
        (Strategy::exponential(1.2), Strategy::deterministic(1.0), GameParams::new(0.2, 0.7, 0.3, 1.5, 0.5)),
        (Strategy::deterministic(0.5), Strategy::deterministic(0.5), GameParams::new(0.0, 2.0, 0.4, 1.0, 0.6)),
    ];
    for (k, (s1, s2, p)) in cases.iter().enumerate() {
        let cfg = SimConfig {
            replications: 40_000,
            master_seed: 100 + k as u64,
            ..SimConfig::default()
        };
        let stats = simulate_batch(s1, s2, p, &cfg).unwrap();
        let f1 = s1.respond(&Default::default(), Player::One).unwrap();
        let f2 = s2.respond(&Default::default(), Player::Two).unwrap();
        for who in Player::BOTH {
            let v = markov_value_for(who, &f1, &f2, p).unwrap();
            let i = who.index();
            assert!(
                (stats.mean[i] - v).abs() <= 3.0 * stats.se[i],
                "case {k} player {who}: {} vs {v} (se {})",
                stats.mean[i],
                stats.se[i]
            );
        }
    }
}

#[test]
fn horizon_truncates() {
    let cfg = SimConfig {
        horizon: 3.5,
        ..SimConfig::default()
    };
    let p = GameParams::new(0.0, 1e-9, 0.1, 1.0, 0.0);
    let res = sample_play(&Strategy::deterministic(1.0), &Strategy::Never, &p, &cfg, 1).unwrap();
    assert!(res.play.truncated);
    assert_eq!(res.play.history.inspection_count(), 3);
    let never = DelayDistribution::never();
    assert!(never.is_never());
}
