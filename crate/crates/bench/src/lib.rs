//! Shared inputs for the criterion benchmarks.

use opphunt_core::{Atom, Continuous, DelayDistribution, GameParams};

pub fn params() -> GameParams {
    GameParams::new(0.1, 1.0, 0.2, 1.0, 0.3)
}

/// A mixture with two atoms, a never atom and two exponential components.
pub fn mixed(shift: f64) -> DelayDistribution {
    DelayDistribution::new(
        vec![
            Atom { delay: 0.5 + shift, mass: 0.2 },
            Atom { delay: 1.5 + shift, mass: 0.2 },
        ],
        0.1,
        vec![
            Continuous::Exponential { rate: 0.8, weight: 0.3 },
            Continuous::Exponential { rate: 2.5, weight: 0.2 },
        ],
    )
    .expect("valid mixture")
}
