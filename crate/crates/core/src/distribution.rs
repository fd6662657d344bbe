//! Distributions of the delay until a player's next inspection.
//!
//! A [`DelayDistribution`] lives on `(0, ∞]`: finitely many atoms, an atom at
//! `∞` (never inspecting), exponential components and optional components
//! given by an arbitrary [`DelayLaw`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Total mass must equal one within this tolerance.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("total mass {0} differs from 1")]
    Mass(f64),
    #[error("atom delay {0} is not a positive finite number")]
    AtomDelay(f64),
    #[error("weight {0} is outside [0, 1]")]
    Weight(f64),
    #[error("exponential rate {0} is not positive and finite")]
    Rate(f64),
    #[error("continuous law {0} cannot be serialized")]
    CustomLaw(String),
}

/// A continuous law on `(0, ∞)` known through its CDF and density.
pub trait DelayLaw: Send + Sync + fmt::Debug {
    /// Unique description including parameters; used for equality.
    fn name(&self) -> String;
    fn cdf(&self, x: f64) -> f64;
    fn density(&self, x: f64) -> f64;

    /// Inverse CDF. The default bisects [`DelayLaw::cdf`].
    fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let mut hi = 1.0;
        while self.cdf(hi) < u {
            hi *= 2.0;
            if hi > 1e300 {
                return f64::INFINITY;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// Points where the density is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Serializable description, when the law is one of the built-ins.
    fn spec(&self) -> Option<LawSpec> {
        None
    }
}

/// Built-in continuous laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum LawSpec {
    Uniform { lo: f64, hi: f64 },
    Erlang { shape: u32, rate: f64 },
}

impl LawSpec {
    pub fn build(self) -> Arc<dyn DelayLaw> {
        match self {
            LawSpec::Uniform { lo, hi } => Arc::new(UniformDelay { lo, hi }),
            LawSpec::Erlang { shape, rate } => Arc::new(ErlangDelay { shape, rate }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformDelay {
    pub lo: f64,
    pub hi: f64,
}

impl DelayLaw for UniformDelay {
    fn name(&self) -> String {
        format!("uniform({}, {})", self.lo, self.hi)
    }
    fn cdf(&self, x: f64) -> f64 {
        ((x - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }
    fn density(&self, x: f64) -> f64 {
        if x >= self.lo && x <= self.hi {
            1.0 / (self.hi - self.lo)
        } else {
            0.0
        }
    }
    fn quantile(&self, u: f64) -> f64 {
        self.lo + u * (self.hi - self.lo)
    }
    fn breakpoints(&self) -> Vec<f64> {
        vec![self.lo, self.hi]
    }
    fn spec(&self) -> Option<LawSpec> {
        Some(LawSpec::Uniform {
            lo: self.lo,
            hi: self.hi,
        })
    }
}

/// Sum of `shape` independent exponentials with the given rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErlangDelay {
    pub shape: u32,
    pub rate: f64,
}

impl DelayLaw for ErlangDelay {
    fn name(&self) -> String {
        format!("erlang({}, {})", self.shape, self.rate)
    }
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let y = self.rate * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 1..self.shape {
            term *= y / n as f64;
            sum += term;
        }
        (1.0 - (-y).exp() * sum).clamp(0.0, 1.0)
    }
    fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let y = self.rate * x;
        let k = self.shape as i32;
        let mut fact = 1.0;
        for n in 1..k {
            fact *= n as f64;
        }
        self.rate * y.powi(k - 1) * (-y).exp() / fact
    }
    fn spec(&self) -> Option<LawSpec> {
        Some(LawSpec::Erlang {
            shape: self.shape,
            rate: self.rate,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub delay: f64,
    pub mass: f64,
}

#[derive(Debug, Clone)]
pub enum Continuous {
    Exponential { rate: f64, weight: f64 },
    Law { law: Arc<dyn DelayLaw>, weight: f64 },
}

impl Continuous {
    pub fn weight(&self) -> f64 {
        match self {
            Continuous::Exponential { weight, .. } | Continuous::Law { weight, .. } => *weight,
        }
    }

    fn with_weight(&self, w: f64) -> Continuous {
        match self {
            Continuous::Exponential { rate, .. } => Continuous::Exponential {
                rate: *rate,
                weight: w,
            },
            Continuous::Law { law, .. } => Continuous::Law {
                law: law.clone(),
                weight: w,
            },
        }
    }

    /// Unweighted CDF.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Continuous::Exponential { rate, .. } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Continuous::Law { law, .. } => law.cdf(x),
        }
    }

    /// Unweighted density.
    pub fn density(&self, x: f64) -> f64 {
        match self {
            Continuous::Exponential { rate, .. } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Continuous::Law { law, .. } => law.density(x),
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Continuous::Exponential { rate, .. } => -(-u).ln_1p() / rate,
            Continuous::Law { law, .. } => law.quantile(u),
        }
    }

    fn same_law(&self, other: &Continuous) -> bool {
        match (self, other) {
            (Continuous::Exponential { rate: a, .. }, Continuous::Exponential { rate: b, .. }) => {
                a == b
            }
            (Continuous::Law { law: a, .. }, Continuous::Law { law: b, .. }) => {
                Arc::ptr_eq(a, b) || a.name() == b.name()
            }
            _ => false,
        }
    }
}

impl PartialEq for Continuous {
    fn eq(&self, other: &Self) -> bool {
        self.same_law(other) && self.weight() == other.weight()
    }
}

/// Probability distribution of a delay in `(0, ∞]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayDistribution {
    atoms: Vec<Atom>,
    never_mass: f64,
    continuous: Vec<Continuous>,
}

impl DelayDistribution {
    /// Validates and normalizes: atoms are sorted and merged, zero-mass
    /// entries dropped, and exponential components with equal rates merged.
    pub fn new(
        atoms: Vec<Atom>,
        never_mass: f64,
        continuous: Vec<Continuous>,
    ) -> Result<Self, DistributionError> {
        for a in &atoms {
            if !(a.delay.is_finite() && a.delay > 0.0) {
                return Err(DistributionError::AtomDelay(a.delay));
            }
            check_weight(a.mass)?;
        }
        check_weight(never_mass)?;
        for c in &continuous {
            check_weight(c.weight())?;
            if let Continuous::Exponential { rate, .. } = c {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(DistributionError::Rate(*rate));
                }
            }
        }
        let mut sorted: Vec<Atom> = atoms.into_iter().filter(|a| a.mass > 0.0).collect();
        sorted.sort_by(|a, b| a.delay.total_cmp(&b.delay));
        let mut merged: Vec<Atom> = Vec::with_capacity(sorted.len());
        for a in sorted {
            match merged.last_mut() {
                Some(last) if last.delay == a.delay => last.mass += a.mass,
                _ => merged.push(a),
            }
        }
        let mut parts: Vec<Continuous> = Vec::new();
        for c in continuous.into_iter().filter(|c| c.weight() > 0.0) {
            match parts.iter_mut().find(|p| p.same_law(&c)) {
                Some(p) => *p = p.with_weight(p.weight() + c.weight()),
                None => parts.push(c),
            }
        }
        let d = DelayDistribution {
            atoms: merged,
            never_mass,
            continuous: parts,
        };
        let total = d.total_mass();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(DistributionError::Mass(total));
        }
        Ok(d)
    }

    pub fn never() -> Self {
        DelayDistribution {
            atoms: Vec::new(),
            never_mass: 1.0,
            continuous: Vec::new(),
        }
    }

    pub fn atom(delay: f64) -> Result<Self, DistributionError> {
        Self::new(vec![Atom { delay, mass: 1.0 }], 0.0, Vec::new())
    }

    pub fn exponential(rate: f64) -> Result<Self, DistributionError> {
        Self::new(
            Vec::new(),
            0.0,
            vec![Continuous::Exponential { rate, weight: 1.0 }],
        )
    }

    pub fn law(law: Arc<dyn DelayLaw>) -> Self {
        DelayDistribution {
            atoms: Vec::new(),
            never_mass: 0.0,
            continuous: vec![Continuous::Law { law, weight: 1.0 }],
        }
    }

    /// Weighted mixture; weights must sum to one.
    pub fn mixture(parts: &[(f64, DelayDistribution)]) -> Result<Self, DistributionError> {
        let mut atoms = Vec::new();
        let mut never = 0.0;
        let mut continuous = Vec::new();
        for (w, d) in parts {
            check_weight(*w)?;
            atoms.extend(d.atoms.iter().map(|a| Atom {
                delay: a.delay,
                mass: a.mass * w,
            }));
            never += d.never_mass * w;
            continuous.extend(d.continuous.iter().map(|c| c.with_weight(c.weight() * w)));
        }
        Self::new(atoms, never, continuous)
    }

    /// Atoms in ascending delay order.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn never_mass(&self) -> f64 {
        self.never_mass
    }

    pub fn continuous(&self) -> &[Continuous] {
        &self.continuous
    }

    pub fn is_never(&self) -> bool {
        self.never_mass == 1.0
    }

    pub fn has_custom_laws(&self) -> bool {
        self.continuous
            .iter()
            .any(|c| matches!(c, Continuous::Law { .. }))
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum::<f64>()
            + self.never_mass
            + self.continuous.iter().map(Continuous::weight).sum::<f64>()
    }

    pub fn atom_mass_at(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .find(|a| a.delay == x)
            .map_or(0.0, |a| a.mass)
    }

    /// `P(delay > x)`, counting the never atom.
    pub fn survival(&self, x: f64) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| a.delay > x)
            .map(|a| a.mass)
            .sum();
        let cont: f64 = self
            .continuous
            .iter()
            .map(|c| c.weight() * (1.0 - c.cdf(x)))
            .sum();
        self.never_mass + atoms + cont
    }

    /// `P(delay ≤ x)` for finite `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| a.delay <= x)
            .map(|a| a.mass)
            .sum();
        let cont: f64 = self
            .continuous
            .iter()
            .map(|c| c.weight() * c.cdf(x))
            .sum();
        atoms + cont
    }

    /// `P(delay < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x) - self.atom_mass_at(x)
    }

    /// Inverse-CDF sampling from a uniform draw in `[0, 1)`. Mass is laid out
    /// as: atoms by ascending delay, then continuous components in order,
    /// then the never atom.
    pub fn sample(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.mass;
            if u < acc {
                return a.delay;
            }
        }
        for c in &self.continuous {
            let w = c.weight();
            if u < acc + w {
                let v = ((u - acc) / w).clamp(0.0, 1.0);
                return c.quantile(v);
            }
            acc += w;
        }
        f64::INFINITY
    }

    /// Equality of atoms, masses and continuous parameters within `tol`.
    pub fn approx_eq(&self, other: &DelayDistribution, tol: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= tol;
        self.atoms.len() == other.atoms.len()
            && self.continuous.len() == other.continuous.len()
            && close(self.never_mass, other.never_mass)
            && self
                .atoms
                .iter()
                .zip(&other.atoms)
                .all(|(a, b)| close(a.delay, b.delay) && close(a.mass, b.mass))
            && self
                .continuous
                .iter()
                .zip(&other.continuous)
                .all(|(a, b)| {
                    close(a.weight(), b.weight())
                        && match (a, b) {
                            (
                                Continuous::Exponential { rate: x, .. },
                                Continuous::Exponential { rate: y, .. },
                            ) => close(*x, *y),
                            _ => a.same_law(b),
                        }
                })
    }

    /// The distribution if it is a single finite atom.
    pub fn as_single_atom(&self) -> Option<f64> {
        match (self.atoms.as_slice(), self.continuous.is_empty()) {
            ([a], true) if a.mass == 1.0 => Some(a.delay),
            _ => None,
        }
    }

    /// The rate if the distribution is a single exponential.
    pub fn as_single_exponential(&self) -> Option<f64> {
        match self.continuous.as_slice() {
            [Continuous::Exponential { rate, weight }]
                if *weight == 1.0 && self.atoms.is_empty() && self.never_mass == 0.0 =>
            {
                Some(*rate)
            }
            _ => None,
        }
    }
}

fn check_weight(w: f64) -> Result<(), DistributionError> {
    if (0.0..=1.0 + MASS_TOLERANCE).contains(&w) {
        Ok(())
    } else {
        Err(DistributionError::Weight(w))
    }
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    #[serde(default)]
    atoms: Vec<(f64, f64)>,
    #[serde(default)]
    never: f64,
    #[serde(default)]
    exponentials: Vec<(f64, f64)>,
    #[serde(default)]
    laws: Vec<(LawSpec, f64)>,
}

impl Serialize for DelayDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut repr = DistributionRepr {
            atoms: self.atoms.iter().map(|a| (a.delay, a.mass)).collect(),
            never: self.never_mass,
            exponentials: Vec::new(),
            laws: Vec::new(),
        };
        for c in &self.continuous {
            match c {
                Continuous::Exponential { rate, weight } => repr.exponentials.push((*rate, *weight)),
                Continuous::Law { law, weight } => match law.spec() {
                    Some(spec) => repr.laws.push((spec, *weight)),
                    None => {
                        return Err(serde::ser::Error::custom(DistributionError::CustomLaw(
                            law.name(),
                        )))
                    }
                },
            }
        }
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DelayDistribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = DistributionRepr::deserialize(deserializer)?;
        let atoms = repr
            .atoms
            .into_iter()
            .map(|(delay, mass)| Atom { delay, mass })
            .collect();
        let mut continuous: Vec<Continuous> = repr
            .exponentials
            .into_iter()
            .map(|(rate, weight)| Continuous::Exponential { rate, weight })
            .collect();
        continuous.extend(repr.laws.into_iter().map(|(spec, weight)| Continuous::Law {
            law: spec.build(),
            weight,
        }));
        DelayDistribution::new(atoms, repr.never, continuous).map_err(serde::de::Error::custom)
    }
}
