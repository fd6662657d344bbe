#![allow(dead_code)]

use opphunt_core::{Atom, Continuous, DelayDistribution, GameParams};
use proptest::prelude::*;

/// Atom/exponential mixtures, optionally with a never atom. Atom delays are
/// drawn from a small lattice so that ties between players actually occur.
pub fn mixture() -> impl Strategy<Value = DelayDistribution> {
    (
        prop::collection::vec((1u32..=12, 0.05f64..1.0), 0..3),
        prop::collection::vec((0.1f64..4.0, 0.05f64..1.0), 0..3),
        prop_oneof![Just(0.0), 0.05f64..0.5],
    )
        .prop_filter("some mass", |(a, e, n)| !a.is_empty() || !e.is_empty() || *n > 0.0)
        .prop_map(|(atoms, exps, never)| {
            let total: f64 = atoms.iter().map(|a| a.1).sum::<f64>() + exps.iter().map(|e| e.1).sum::<f64>();
            let scale = if total > 0.0 { (1.0 - never) / total } else { 0.0 };
            let never = if total > 0.0 { never } else { 1.0 };
            DelayDistribution::new(
                atoms
                    .iter()
                    .map(|&(k, m)| Atom { delay: k as f64 * 0.25, mass: m * scale })
                    .collect(),
                never,
                exps.iter()
                    .map(|&(rate, w)| Continuous::Exponential { rate, weight: w * scale })
                    .collect(),
            )
            .expect("normalized mixture")
        })
}

pub fn game_params() -> impl Strategy<Value = GameParams> {
    (0.0f64..0.5, 0.2f64..3.0, 0.0f64..1.0, 0.0f64..2.0, 0.0f64..1.0)
        .prop_map(|(r, lambda, c, v1, v2)| GameParams::new(r, lambda, c, v1, v2))
}

/// Kolmogorov–Smirnov distance between a sample (possibly containing +∞)
/// and a CDF evaluated at finite points.
pub fn ks_distance(sample: &mut [f64], cdf: impl Fn(f64) -> f64, cdf_left: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sample.len() {
        let x = sample[i];
        if x.is_infinite() {
            break;
        }
        let mut j = i;
        while j < sample.len() && sample[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let at = j as f64 / n;
        d = d.max((at - cdf(x)).abs()).max((below - cdf_left(x)).abs());
        i = j;
    }
    d
}
