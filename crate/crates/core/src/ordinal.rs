//! Countable ordinals below ω^ω in Cantor normal form.
//!
//! An [`Ordinal`] is a finite list of `(exponent, coefficient)` pairs read as
//! `ω^e₁·c₁ + ω^e₂·c₂ + … + n` with strictly decreasing exponents. Only the
//! operations needed to index inspection histories are provided: ordering,
//! successor, addition and canonical fundamental sequences for limits.
//!
//! The text form is `w^k*c + … + n`, e.g. `w^2*3 + w + 4`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdinalError {
    #[error("fundamental sequences exist only for nonzero limit ordinals, got {0}")]
    NotALimit(Ordinal),
    #[error("cannot parse ordinal {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

/// One `ω^exponent · coefficient` summand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Term {
    pub exponent: u32,
    pub coefficient: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Ordinal {
    terms: Vec<Term>,
}

impl Ordinal {
    pub const fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn finite(n: u64) -> Self {
        Self::monomial(0, n)
    }

    /// ω itself.
    pub fn omega() -> Self {
        Self::monomial(1, 1)
    }

    /// `ω^exponent · coefficient`; a zero coefficient gives 0.
    pub fn monomial(exponent: u32, coefficient: u64) -> Self {
        if coefficient == 0 {
            return Self::zero();
        }
        Ordinal {
            terms: vec![Term {
                exponent,
                coefficient,
            }],
        }
    }

    /// Builds an ordinal from CNF terms. Returns `None` unless exponents are
    /// strictly decreasing and every coefficient is positive.
    pub fn from_terms(terms: Vec<Term>) -> Option<Self> {
        let decreasing = terms.windows(2).all(|w| w[0].exponent > w[1].exponent);
        let positive = terms.iter().all(|t| t.coefficient > 0);
        (decreasing && positive).then_some(Ordinal { terms })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.terms.iter().all(|t| t.exponent == 0)
    }

    /// The value as a natural number, if finite.
    pub fn as_finite(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [t] if t.exponent == 0 => Some(t.coefficient),
            _ => None,
        }
    }

    /// True iff there is no ω⁰ term. Zero counts as a limit ordinal.
    pub fn is_limit(&self) -> bool {
        self.terms.last().is_none_or(|t| t.exponent > 0)
    }

    pub fn is_successor(&self) -> bool {
        !self.is_limit()
    }

    pub fn successor(&self) -> Self {
        self.plus_finite(1)
    }

    /// The predecessor of a successor ordinal.
    pub fn predecessor(&self) -> Option<Self> {
        if self.is_limit() {
            return None;
        }
        let mut terms = self.terms.clone();
        let last = terms.last_mut().expect("successor has a unit term");
        last.coefficient -= 1;
        if last.coefficient == 0 {
            terms.pop();
        }
        Some(Ordinal { terms })
    }

    /// `self + n`.
    pub fn plus_finite(&self, n: u64) -> Self {
        if n == 0 {
            return self.clone();
        }
        let mut terms = self.terms.clone();
        match terms.last_mut() {
            Some(t) if t.exponent == 0 => t.coefficient += n,
            _ => terms.push(Term {
                exponent: 0,
                coefficient: n,
            }),
        }
        Ordinal { terms }
    }

    /// Splits `self` into `(λ, n)` with `λ` a limit (possibly 0) and `self = λ + n`.
    pub fn split_finite(&self) -> (Self, u64) {
        match self.terms.last() {
            Some(t) if t.exponent == 0 => {
                let mut terms = self.terms.clone();
                let n = terms.pop().map_or(0, |t| t.coefficient);
                (Ordinal { terms }, n)
            }
            _ => (self.clone(), 0),
        }
    }

    /// Ordinal addition. Terms of `self` whose exponent is below the leading
    /// exponent of `other` are absorbed.
    pub fn add(&self, other: &Ordinal) -> Ordinal {
        let Some(lead) = other.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<Term> = self
            .terms
            .iter()
            .copied()
            .take_while(|t| t.exponent >= lead.exponent)
            .collect();
        let mut rest = other.terms.iter().copied();
        if let Some(last) = terms.last_mut() {
            if last.exponent == lead.exponent {
                last.coefficient += lead.coefficient;
                rest.next();
            }
        }
        terms.extend(rest);
        Ordinal { terms }
    }

    /// The least limit ordinal strictly greater than `self`: `λ + ω` where
    /// `self = λ + n`.
    pub fn next_limit(&self) -> Ordinal {
        self.split_finite().0.add(&Ordinal::omega())
    }

    /// The `n`-th element of the canonical fundamental sequence of a nonzero
    /// limit ordinal: for `γ + ω^(k+1)` this is `γ + ω^k · n`.
    pub fn fundamental_term(&self, n: u64) -> Result<Ordinal, OrdinalError> {
        if self.is_zero() || !self.is_limit() {
            return Err(OrdinalError::NotALimit(self.clone()));
        }
        let mut terms = self.terms.clone();
        let last = terms.last_mut().expect("nonzero");
        let exponent = last.exponent;
        last.coefficient -= 1;
        if last.coefficient == 0 {
            terms.pop();
        }
        let gamma = Ordinal { terms };
        Ok(gamma.add(&Ordinal::monomial(exponent - 1, n)))
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            let ord = a
                .exponent
                .cmp(&b.exponent)
                .then(a.coefficient.cmp(&b.coefficient));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::finite(n)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match (t.exponent, t.coefficient) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => f.write_str("w")?,
                (1, c) => write!(f, "w*{c}")?,
                (e, 1) => write!(f, "w^{e}")?,
                (e, c) => write!(f, "w^{e}*{c}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for Ordinal {
    type Err = OrdinalError;

    /// Parses the canonical rendering. Summands must already be in Cantor
    /// normal form order.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| OrdinalError::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = s.trim();
        if trimmed == "0" {
            return Ok(Ordinal::zero());
        }
        let mut terms = Vec::new();
        for part in trimmed.split('+') {
            let part = part.trim();
            if part.is_empty() {
                return Err(err("empty summand"));
            }
            terms.push(parse_term(part).ok_or_else(|| err("malformed summand"))?);
        }
        Ordinal::from_terms(terms).ok_or_else(|| err("summands not in Cantor normal form"))
    }
}

fn parse_term(part: &str) -> Option<Term> {
    let Some(rest) = part.strip_prefix('w') else {
        let coefficient = part.parse::<u64>().ok()?;
        return Some(Term {
            exponent: 0,
            coefficient,
        });
    };
    let (exp_part, coef_part) = match rest.split_once('*') {
        Some((e, c)) => (e, Some(c)),
        None => (rest, None),
    };
    let exponent = match exp_part {
        "" => 1,
        e => e.strip_prefix('^')?.parse::<u32>().ok()?,
    };
    let coefficient = match coef_part {
        Some(c) => c.parse::<u64>().ok()?,
        None => 1,
    };
    // w^0 and explicit unit exponents are not canonical
    if exponent == 0 || exp_part == "^1" || coef_part == Some("1") {
        return None;
    }
    Some(Term {
        exponent,
        coefficient,
    })
}

impl Serialize for Ordinal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Ordinal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    /// Every ordinal with exponents ≤ 2 and coefficients ≤ 3.
    pub(crate) fn small_ordinals() -> Vec<Ordinal> {
        let mut out = Vec::new();
        for c2 in 0..=3u64 {
            for c1 in 0..=3u64 {
                for c0 in 0..=3u64 {
                    let mut terms = Vec::new();
                    for (e, c) in [(2, c2), (1, c1), (0, c0)] {
                        if c > 0 {
                            terms.push(Term {
                                exponent: e,
                                coefficient: c,
                            });
                        }
                    }
                    out.push(Ordinal::from_terms(terms).unwrap());
                }
            }
        }
        out
    }

    #[test]
    fn compare_examples() {
        assert_eq!(Ordinal::omega().cmp(&Ordinal::finite(5)), Ordering::Greater);
        assert_eq!(o("w + 3").cmp(&o("w*2")), Ordering::Less);
        assert_eq!(o("w*2").cmp(&o("w*2")), Ordering::Equal);
    }

    #[test]
    fn successor_examples() {
        assert_eq!(Ordinal::zero().successor(), Ordinal::finite(1));
        assert_eq!(Ordinal::omega().successor(), o("w + 1"));
        assert_eq!(o("w*2 + 4").successor(), o("w*2 + 5"));
    }

    #[test]
    fn limit_classification() {
        assert!(o("w*2").is_limit());
        assert!(!o("w + 3").is_limit());
        assert!(Ordinal::zero().is_limit());
    }

    #[test]
    fn add_examples() {
        assert_eq!(Ordinal::finite(3).add(&Ordinal::omega()), Ordinal::omega());
        assert_eq!(Ordinal::omega().add(&Ordinal::finite(3)), o("w + 3"));
        assert_eq!(o("w + 1").add(&Ordinal::omega()), o("w*2"));
        assert_eq!(o("w^2 + w*3 + 1").add(&o("w^2*2 + 5")), o("w^2*3 + 5"));
    }

    #[test]
    fn fundamental_examples() {
        for n in 0..20 {
            assert_eq!(
                Ordinal::omega().fundamental_term(n).unwrap(),
                Ordinal::finite(n)
            );
            assert_eq!(
                o("w*2").fundamental_term(n).unwrap(),
                Ordinal::omega().plus_finite(n)
            );
            assert_eq!(
                o("w^2").fundamental_term(n).unwrap(),
                Ordinal::monomial(1, n)
            );
        }
    }

    #[test]
    fn fundamental_rejects_non_limits() {
        assert!(Ordinal::zero().fundamental_term(1).is_err());
        assert!(o("w + 1").fundamental_term(1).is_err());
    }

    #[test]
    fn fundamental_sequences_increase_below_their_limit() {
        for a in small_ordinals() {
            if a.is_zero() || !a.is_limit() {
                continue;
            }
            let mut prev = a.fundamental_term(0).unwrap();
            assert!(prev < a);
            for n in 1..=100 {
                let next = a.fundamental_term(n).unwrap();
                assert!(next < a, "{next} !< {a}");
                assert!(prev < next, "{prev} !< {next}");
                prev = next;
            }
        }
    }

    #[test]
    fn next_limit_is_least_limit_above() {
        assert_eq!(Ordinal::zero().next_limit(), Ordinal::omega());
        assert_eq!(o("5").next_limit(), Ordinal::omega());
        assert_eq!(o("w + 7").next_limit(), o("w*2"));
        assert_eq!(o("w^2").next_limit(), o("w^2 + w"));
    }

    #[test]
    fn predecessor_inverts_successor() {
        for a in small_ordinals() {
            assert_eq!(a.successor().predecessor(), Some(a.clone()));
        }
        assert_eq!(Ordinal::omega().predecessor(), None);
    }

    #[test]
    fn text_round_trip() {
        for a in small_ordinals() {
            let text = a.to_string();
            assert_eq!(o(&text), a, "{text}");
        }
        assert_eq!(o("w^2*3 + w + 4").to_string(), "w^2*3 + w + 4");
        assert!("w + w^2".parse::<Ordinal>().is_err());
        assert!("w^1".parse::<Ordinal>().is_err());
        assert!("w*0".parse::<Ordinal>().is_err());
        assert!("".parse::<Ordinal>().is_err());
    }
}
