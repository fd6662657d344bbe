mod common;

use common::{game_params, mixture};
use opphunt_core::payoff::{evaluate_recursive, payoff_report};
use opphunt_core::{
    cycle, lambda_ratio, markov_value, tilde_u, DelayDistribution, GameParams, History, Method,
    Player, ReactiveRule, Strategy,
};
use proptest::prelude::*;
use proptest::strategy::Strategy as PropStrategy;

/// Independent evaluation for atoms-only pairs: enumerate every pair of atoms.
fn atoms_oracle(f1: &[(f64, f64)], f2: &[(f64, f64)], p: &GameParams) -> (f64, f64, f64) {
    let a = |s: f64| (-p.r * s).exp() * (-p.cost + (1.0 - (-p.lambda * s).exp()) * p.v_finder);
    let b = |s: f64| (-p.r * s).exp() * (1.0 - (-p.lambda * s).exp()) * p.v_other;
    let never1 = 1.0 - f1.iter().map(|x| x.1).sum::<f64>();
    let never2 = 1.0 - f2.iter().map(|x| x.1).sum::<f64>();
    let (mut u, mut pt, mut q) = (0.0, 0.0, 0.0);
    let mut add = |s: f64, w: f64, val: f64| {
        u += w * val;
        pt += w * (-p.r * s).exp();
        q += w * (-(p.r + p.lambda) * s).exp();
    };
    for &(s1, m1) in f1 {
        for &(s2, m2) in f2 {
            let w = m1 * m2;
            if s1 < s2 {
                add(s1, w, a(s1));
            } else if s2 < s1 {
                add(s2, w, b(s2));
            } else {
                add(s1, w, 0.5 * (a(s1) + b(s1)));
            }
        }
        add(s1, m1 * never2, a(s1));
    }
    for &(s2, m2) in f2 {
        add(s2, m2 * never1, b(s2));
    }
    (u, pt, q)
}

fn atoms(spec: &[(f64, f64)]) -> DelayDistribution {
    let never = 1.0 - spec.iter().map(|x| x.1).sum::<f64>();
    DelayDistribution::new(
        spec.iter().map(|&(delay, mass)| opphunt_core::Atom { delay, mass }).collect(),
        never.max(0.0),
        vec![],
    )
    .unwrap()
}

fn atom_spec() -> impl PropStrategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((1u32..8, 0.05f64..0.4), 1..4).prop_map(|v| {
        v.into_iter().map(|(k, m)| (k as f64 * 0.3, m)).collect::<Vec<_>>()
    })
    .prop_filter("distinct delays, total ≤ 1", |v| {
        let mut d: Vec<f64> = v.iter().map(|x| x.0).collect();
        d.sort_by(f64::total_cmp);
        d.dedup();
        d.len() == v.len() && v.iter().map(|x| x.1).sum::<f64>() <= 1.0
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_form_agrees_with_quadrature(f1 in mixture(), f2 in mixture(), p in game_params()) {
        for me in Player::BOTH {
            let a = cycle(me, &f1, &f2, &p, Some(Method::ClosedForm)).unwrap();
            let b = cycle(me, &f1, &f2, &p, Some(Method::Quadrature)).unwrap();
            prop_assert!((a.u_tilde - b.u_tilde).abs() <= 1e-8, "{a:?} {b:?}");
            prop_assert!((a.p_tilde - b.p_tilde).abs() <= 1e-8);
            prop_assert!((a.q_factor() - b.q_factor()).abs() <= 1e-8);
        }
    }

    #[test]
    fn report_invariants(f1 in mixture(), f2 in mixture(), p in game_params()) {
        let rep = payoff_report(Player::One, &f1, &f2, &p, None).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&rep.p_tilde));
        prop_assert!((0.0..=1.0 + 1e-12).contains(&rep.q_factor));
        prop_assert!(rep.q_factor <= rep.p_tilde + 1e-15);
        if rep.p_tilde > 0.0 {
            prop_assert!((rep.lambda_ratio * rep.p_tilde - rep.u_tilde).abs() <= 1e-10);
        }
    }

    #[test]
    fn atom_pairs_match_enumeration(s1 in atom_spec(), s2 in atom_spec(), p in game_params()) {
        let (f1, f2) = (atoms(&s1), atoms(&s2));
        let (u, pt, q) = atoms_oracle(&s1, &s2, &p);
        let cyc = cycle(Player::One, &f1, &f2, &p, None).unwrap();
        prop_assert!((cyc.u_tilde - u).abs() < 1e-13);
        prop_assert!((cyc.p_tilde - pt).abs() < 1e-13);
        prop_assert!((cyc.q_factor() - q).abs() < 1e-13);
    }

    #[test]
    fn unrolled_tail_bound_dominates(f1 in mixture(), f2 in mixture(), p in game_params(), d in 0u32..40) {
        let (s1, s2) = (Strategy::from_distribution(f1), Strategy::from_distribution(f2));
        let h = History::new();
        if let (Ok(a), Ok(b)) = (evaluate_recursive(&s1, &s2, &h, &p, d), evaluate_recursive(&s1, &s2, &h, &p, d + 5)) {
            prop_assert!((a.value - b.value).abs() <= a.tail_bound);
        }
    }

    #[test]
    fn reactive_tail_bound_dominates(x in 0.1f64..2.0, y in 0.1f64..2.0, z in 0.1f64..2.0, tau in 0.1f64..2.0, p in game_params(), d in 0u32..12) {
        let probe = Strategy::Reactive(ReactiveRule::ByLastInspector { initial: x, after_self: y, after_other: z, exponential: false });
        let tie = Strategy::Reactive(ReactiveRule::TieAware { after_tie: y, otherwise: tau });
        let h = History::new();
        for (s1, s2) in [(&probe, &Strategy::deterministic(tau)), (&probe, &tie)] {
            let a = evaluate_recursive(s1, s2, &h, &p, d).unwrap();
            let b = evaluate_recursive(s1, s2, &h, &p, d + 5).unwrap();
            prop_assert!((a.value - b.value).abs() <= a.tail_bound);
        }
        let gap = Strategy::Reactive(ReactiveRule::GapScaled { base: x, factor: 0.3, min: 0.1, max: 2.0 });
        let a = evaluate_recursive(&gap, &Strategy::deterministic(tau), &h, &p, d.min(6)).unwrap();
        let b = evaluate_recursive(&gap, &Strategy::deterministic(tau), &h, &p, d.min(6) + 5).unwrap();
        prop_assert!((a.value - b.value).abs() <= a.tail_bound);
    }
}

#[test]
fn symmetric_deterministic_fixed_point() {
    let p = GameParams::new(0.0, 0.9, 0.2, 1.0, 0.5);
    let tau = 1.3;
    let f = DelayDistribution::atom(tau).unwrap();
    let u = tilde_u(&f, &f, &p).unwrap();
    let expected = u / (1.0 - (-p.lambda * tau).exp());
    assert!((markov_value(&f, &f, &p).unwrap() - expected).abs() < 1e-14);
    // with r = 0 the discount is 1, so the ratio equals the per-cycle payoff
    assert!((lambda_ratio(&f, &f, &p).unwrap() - u).abs() < 1e-15);
}

#[test]
fn fixed_point_and_ratio_differ() {
    let p = GameParams::new(0.0, 0.9, 0.2, 1.0, 0.5);
    let f = DelayDistribution::atom(1.3).unwrap();
    let l = lambda_ratio(&f, &f, &p).unwrap();
    let u = markov_value(&f, &f, &p).unwrap();
    assert!((l - u).abs() > 1e-3);
}

#[test]
fn zeno_unrolling_has_no_finite_bound() {
    let p = GameParams::new(0.1, 1.0, 0.2, 1.0, 0.0);
    let res = evaluate_recursive(&Strategy::zeno(), &Strategy::Never, &History::new(), &p, 20).unwrap();
    assert_eq!(res.tail_bound, f64::INFINITY);
    // 21 inspections at 1/2, 2/3, ...: each pays c and finds with the gap hazard
    let mut expected = 0.0;
    let mut reach = 1.0;
    let mut prev = 0.0;
    for n in 1..=21 {
        let t = n as f64 / (n as f64 + 1.0);
        let found = 1.0 - (-p.lambda * (t - prev)).exp();
        expected += reach * (-p.r * t).exp() * (-p.cost + found * p.v_finder);
        reach *= 1.0 - found;
        prev = t;
    }
    assert!((res.value - expected).abs() < 1e-12);
}
