//! Strategies: pure maps from histories to next-inspection delay distributions.
//!
//! Delays are measured from `t_{α*}`, the time of the last index of the
//! history, so a Markov strategy is literally one that returns the same
//! [`DelayDistribution`] after every history.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::{DelayDistribution, DistributionError};
use crate::history::{CascadeFormula, History, Player, PlayerSet, Violation};

/// Schedule times closer than this to the current time count as already passed.
const SCHEDULE_SLACK: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error("history is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidHistory(Vec<Violation>),
    #[error("invalid strategy parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

/// How much of the history a strategy looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Memory {
    /// Same distribution after every history.
    Stationary,
    /// Depends only on the attempted/actual sets of the record at `α*`.
    LastEvent,
    /// Depends on times or deeper structure.
    Full,
}

/// The attempted/actual sets of the last record, or `Start` when `α*` is a
/// limit index (including the empty history).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LastEvent {
    Start,
    Inspection { attempted: u8, actual: Player },
}

impl LastEvent {
    pub fn of(h: &History) -> LastEvent {
        match h.last_record() {
            Some(r) => match r.actual_player() {
                Some(actual) => LastEvent::Inspection {
                    attempted: if r.was_tie() { 3 } else { actual.number() },
                    actual,
                },
                None => LastEvent::Start,
            },
            None => LastEvent::Start,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weighted {
    pub weight: f64,
    pub strategy: Strategy,
}

/// Inspects at `k + n/(n+1)` for `n = 1, 2, …` in every unit block `[k, k+1)`,
/// for the first `blocks` blocks (all blocks when `None`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ZenoSchedule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<u32>,
}

impl ZenoSchedule {
    /// The next scheduled time after `t`, as (block, step).
    pub fn next_after(&self, t: f64) -> Option<(u64, u64)> {
        let block = t.floor();
        if self.blocks.is_some_and(|b| block >= b as f64) {
            return None;
        }
        let formula = CascadeFormula::Harmonic { offset: block };
        let mut step = formula.first_step_at_or_after(t + SCHEDULE_SLACK).max(1);
        while formula.time(step) <= t + SCHEDULE_SLACK {
            step += 1;
        }
        if formula.time(step) >= formula.supremum() {
            // schedule no longer separable from its limit in f64
            return None;
        }
        Some((block as u64, step))
    }
}

/// History-dependent rules used to probe non-Markov deviations. Every rule
/// returns delays within fixed positive bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "params", rename_all = "kebab-case")]
pub enum ReactiveRule {
    /// Behaves exactly like `of`, but is not declared Markov.
    Copy { of: Box<Strategy> },
    /// Delay chosen by who actually inspected last. With `exponential` the
    /// values are mean delays of exponential draws.
    ByLastInspector {
        initial: f64,
        after_self: f64,
        after_other: f64,
        #[serde(default)]
        exponential: bool,
    },
    /// Deterministic delay `clamp(base + factor·gap, min, max)` where `gap`
    /// is the time between the last two indices.
    GapScaled {
        base: f64,
        factor: f64,
        min: f64,
        max: f64,
    },
    /// Deterministic delay depending on whether the last record was a tie.
    TieAware { after_tie: f64, otherwise: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    Never,
    Deterministic { tau: f64 },
    Exponential { mu: f64 },
    Mixture { components: Vec<Weighted> },
    Zeno(ZenoSchedule),
    Reactive(ReactiveRule),
    /// An arbitrary stationary law, e.g. one extracted from a history.
    Stationary { distribution: DelayDistribution },
}

impl Strategy {
    pub fn deterministic(tau: f64) -> Self {
        Strategy::Deterministic { tau }
    }

    pub fn exponential(mu: f64) -> Self {
        Strategy::Exponential { mu }
    }

    pub fn zeno() -> Self {
        Strategy::Zeno(ZenoSchedule::default())
    }

    pub fn mixture(parts: Vec<(f64, Strategy)>) -> Self {
        Strategy::Mixture {
            components: parts
                .into_iter()
                .map(|(weight, strategy)| Weighted { weight, strategy })
                .collect(),
        }
    }

    /// The canonical Markov strategy with the given stationary law.
    pub fn from_distribution(d: DelayDistribution) -> Self {
        if d.is_never() {
            Strategy::Never
        } else if let Some(tau) = d.as_single_atom() {
            Strategy::Deterministic { tau }
        } else if let Some(mu) = d.as_single_exponential() {
            Strategy::Exponential { mu }
        } else {
            Strategy::Stationary { distribution: d }
        }
    }

    /// Checks parameters, recursively.
    pub fn validate(&self) -> Result<(), StrategyError> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(StrategyError::InvalidParameter(format!(
                    "{name} must be positive and finite, got {x}"
                )))
            }
        };
        match self {
            Strategy::Never | Strategy::Zeno(_) | Strategy::Stationary { .. } => Ok(()),
            Strategy::Deterministic { tau } => positive("tau", *tau),
            Strategy::Exponential { mu } => positive("mu", *mu),
            Strategy::Mixture { components } => {
                if components.is_empty() {
                    return Err(StrategyError::InvalidParameter(
                        "mixture has no components".into(),
                    ));
                }
                let total: f64 = components.iter().map(|c| c.weight).sum();
                if components.iter().any(|c| !(c.weight >= 0.0)) || (total - 1.0).abs() > 1e-12 {
                    return Err(StrategyError::InvalidParameter(format!(
                        "mixture weights must be non-negative and sum to 1, got {total}"
                    )));
                }
                components.iter().try_for_each(|c| c.strategy.validate())
            }
            Strategy::Reactive(rule) => match rule {
                ReactiveRule::Copy { of } => of.validate(),
                ReactiveRule::ByLastInspector {
                    initial,
                    after_self,
                    after_other,
                    ..
                } => {
                    positive("initial", *initial)?;
                    positive("after_self", *after_self)?;
                    positive("after_other", *after_other)
                }
                ReactiveRule::GapScaled {
                    base,
                    factor,
                    min,
                    max,
                } => {
                    positive("min", *min)?;
                    positive("max", *max)?;
                    if !(base.is_finite() && factor.is_finite()) || min > max {
                        return Err(StrategyError::InvalidParameter(
                            "gap-scaled needs finite base/factor and min <= max".into(),
                        ));
                    }
                    Ok(())
                }
                ReactiveRule::TieAware {
                    after_tie,
                    otherwise,
                } => {
                    positive("after_tie", *after_tie)?;
                    positive("otherwise", *otherwise)
                }
            },
        }
    }

    pub fn memory(&self) -> Memory {
        match self {
            Strategy::Never
            | Strategy::Deterministic { .. }
            | Strategy::Exponential { .. }
            | Strategy::Stationary { .. } => Memory::Stationary,
            Strategy::Mixture { components } => components
                .iter()
                .map(|c| c.strategy.memory())
                .max()
                .unwrap_or(Memory::Stationary),
            Strategy::Zeno(_) => Memory::Full,
            Strategy::Reactive(rule) => match rule {
                ReactiveRule::Copy { of } => of.memory().max(Memory::LastEvent),
                ReactiveRule::ByLastInspector { .. } | ReactiveRule::TieAware { .. } => {
                    Memory::LastEvent
                }
                ReactiveRule::GapScaled { .. } => Memory::Full,
            },
        }
    }

    /// Stationary kinds and mixtures of them. Reactive rules are never Markov,
    /// even when they happen to behave like one.
    pub fn is_markov(&self) -> bool {
        self.memory() == Memory::Stationary
    }

    /// Distribution of the delay to the next inspection after `h`, for the
    /// player `me`.
    pub fn next_distribution(
        &self,
        h: &History,
        me: Player,
    ) -> Result<DelayDistribution, StrategyError> {
        let violations = h.validate();
        if !violations.is_empty() {
            return Err(StrategyError::InvalidHistory(violations));
        }
        self.respond(h, me)
    }

    /// [`Strategy::next_distribution`] without validating `h`.
    pub fn respond(&self, h: &History, me: Player) -> Result<DelayDistribution, StrategyError> {
        let d = match self {
            Strategy::Never => DelayDistribution::never(),
            Strategy::Deterministic { tau } => DelayDistribution::atom(*tau)?,
            Strategy::Exponential { mu } => DelayDistribution::exponential(*mu)?,
            Strategy::Stationary { distribution } => distribution.clone(),
            Strategy::Mixture { components } => {
                let parts = components
                    .iter()
                    .map(|c| Ok((c.weight, c.strategy.respond(h, me)?)))
                    .collect::<Result<Vec<_>, StrategyError>>()?;
                DelayDistribution::mixture(&parts)?
            }
            Strategy::Zeno(z) => {
                let now = h.final_time();
                match z.next_after(now) {
                    Some((block, step)) => {
                        let at = CascadeFormula::Harmonic {
                            offset: block as f64,
                        }
                        .time(step);
                        DelayDistribution::atom(at - now)?
                    }
                    None => DelayDistribution::never(),
                }
            }
            Strategy::Reactive(rule) => match rule {
                ReactiveRule::Copy { of } => of.respond(h, me)?,
                ReactiveRule::ByLastInspector {
                    initial,
                    after_self,
                    after_other,
                    exponential,
                } => {
                    let delay = match h.last_record().and_then(|r| r.actual_player()) {
                        None => *initial,
                        Some(p) if p == me => *after_self,
                        Some(_) => *after_other,
                    };
                    if *exponential {
                        DelayDistribution::exponential(1.0 / delay)?
                    } else {
                        DelayDistribution::atom(delay)?
                    }
                }
                ReactiveRule::GapScaled {
                    base,
                    factor,
                    min,
                    max,
                } => {
                    let gap = h
                        .previous_time()
                        .map_or(0.0, |prev| h.final_time() - prev);
                    DelayDistribution::atom((base + factor * gap).clamp(*min, *max))?
                }
                ReactiveRule::TieAware {
                    after_tie,
                    otherwise,
                } => {
                    let tie = h.last_record().is_some_and(|r| r.attempted == PlayerSet::BOTH);
                    DelayDistribution::atom(if tie { *after_tie } else { *otherwise })?
                }
            },
        };
        Ok(d)
    }

    /// For schedule-form strategies: the closed-form cascade the next
    /// inspection belongs to and its step number.
    pub fn cascade_form(&self, h: &History) -> Option<(CascadeFormula, u64)> {
        match self {
            Strategy::Zeno(z) => {
                let (block, step) = z.next_after(h.final_time())?;
                Some((
                    CascadeFormula::Harmonic {
                        offset: block as f64,
                    },
                    step,
                ))
            }
            _ => None,
        }
    }

    /// The Markov strategy that repeats `self`'s response to `h0` after every
    /// history, shifted to the time of the last inspection.
    pub fn markov_from_history(&self, h0: &History, me: Player) -> Result<Strategy, StrategyError> {
        Ok(Strategy::from_distribution(self.next_distribution(h0, me)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::zeno_example_history;

    fn one_record(time: f64, who: Player) -> History {
        History::new()
            .append_inspection(time, who.into(), who.into())
            .unwrap()
    }

    #[test]
    fn deterministic_is_single_atom() {
        for h in [History::new(), one_record(3.0, Player::Two)] {
            let d = Strategy::deterministic(0.5).next_distribution(&h, Player::One).unwrap();
            assert_eq!(d.as_single_atom(), Some(0.5));
        }
    }

    #[test]
    fn never_is_all_infinity() {
        let d = Strategy::Never.next_distribution(&History::new(), Player::One).unwrap();
        assert_eq!(d.never_mass(), 1.0);
    }

    #[test]
    fn zeno_follows_the_schedule() {
        let mut h = History::new();
        let s = Strategy::zeno();
        for n in 0..50u64 {
            let d = s.next_distribution(&h, Player::One).unwrap();
            let delay = d.as_single_atom().unwrap();
            let at = h.final_time() + delay;
            let expected = (n + 1) as f64 / (n + 2) as f64;
            assert!((at - expected).abs() < 1e-15, "step {n}: {at} vs {expected}");
            h.push_inspection(at, Player::One.into(), Player::One.into())
                .unwrap();
        }
    }

    #[test]
    fn zeno_after_limits() {
        let h = zeno_example_history();
        let d = Strategy::zeno().next_distribution(&h, Player::One).unwrap();
        assert_eq!(d.as_single_atom(), Some(0.5));
        let capped = Strategy::Zeno(ZenoSchedule { blocks: Some(2) });
        assert!(capped.next_distribution(&h, Player::One).unwrap().is_never());
        let mut one = History::new();
        one.push_cascade(CascadeFormula::Harmonic { offset: 0.0 }, 1, None, Player::One)
            .unwrap();
        one.close_limit_in_place(1.0).unwrap();
        let d = capped.next_distribution(&one, Player::One).unwrap();
        assert_eq!(d.as_single_atom(), Some(0.5));
        assert_eq!(
            capped.cascade_form(&one),
            Some((CascadeFormula::Harmonic { offset: 1.0 }, 1))
        );
    }

    #[test]
    fn markov_flags() {
        assert!(Strategy::deterministic(1.0).is_markov());
        assert!(Strategy::Never.is_markov());
        assert!(Strategy::mixture(vec![(0.5, Strategy::Never), (0.5, Strategy::exponential(1.0))]).is_markov());
        assert!(!Strategy::zeno().is_markov());
        let reactive = Strategy::Reactive(ReactiveRule::TieAware {
            after_tie: 1.0,
            otherwise: 2.0,
        });
        assert!(!reactive.is_markov());
        assert!(!Strategy::mixture(vec![(0.5, Strategy::Never), (0.5, reactive)]).is_markov());
    }

    #[test]
    fn markov_from_history_examples() {
        let h = one_record(0.7, Player::Two);
        assert_eq!(
            Strategy::deterministic(0.3).markov_from_history(&h, Player::One).unwrap(),
            Strategy::deterministic(0.3)
        );
        assert_eq!(
            Strategy::zeno().markov_from_history(&History::new(), Player::One).unwrap(),
            Strategy::deterministic(0.5)
        );
        let rule = Strategy::Reactive(ReactiveRule::ByLastInspector {
            initial: 1.0,
            after_self: 3.0,
            after_other: 0.5,
            exponential: true,
        });
        assert_eq!(
            rule.markov_from_history(&h, Player::One).unwrap(),
            Strategy::exponential(2.0)
        );
        assert!(Strategy::deterministic(0.3).markov_from_history(&h, Player::One).unwrap().is_markov());
    }

    #[test]
    fn rejects_invalid_history() {
        let mut h = History::new();
        h.push_cascade(CascadeFormula::Harmonic { offset: 0.0 }, 1, None, Player::One)
            .unwrap();
        assert!(matches!(
            Strategy::Never.next_distribution(&h, Player::One),
            Err(StrategyError::InvalidHistory(_))
        ));
    }

    #[test]
    fn reactive_rules_read_the_last_record() {
        let by = Strategy::Reactive(ReactiveRule::ByLastInspector {
            initial: 1.0,
            after_self: 2.0,
            after_other: 3.0,
            exponential: false,
        });
        let me = Player::One;
        assert_eq!(by.respond(&History::new(), me).unwrap().as_single_atom(), Some(1.0));
        assert_eq!(by.respond(&one_record(0.5, me), me).unwrap().as_single_atom(), Some(2.0));
        assert_eq!(
            by.respond(&one_record(0.5, Player::Two), me).unwrap().as_single_atom(),
            Some(3.0)
        );
        let gap = Strategy::Reactive(ReactiveRule::GapScaled {
            base: 0.1,
            factor: 2.0,
            min: 0.2,
            max: 1.0,
        });
        let h = one_record(0.25, me);
        assert_eq!(gap.respond(&h, me).unwrap().as_single_atom(), Some(0.6));
        assert_eq!(gap.respond(&History::new(), me).unwrap().as_single_atom(), Some(0.2));
        let tie = Strategy::Reactive(ReactiveRule::TieAware {
            after_tie: 0.4,
            otherwise: 0.9,
        });
        let tied = History::new()
            .append_inspection(1.0, PlayerSet::BOTH, Player::Two.into())
            .unwrap();
        assert_eq!(tie.respond(&tied, me).unwrap().as_single_atom(), Some(0.4));
        assert_eq!(LastEvent::of(&tied), LastEvent::Inspection { attempted: 3, actual: Player::Two });
    }

    #[test]
    fn config_schema() {
        let s: Strategy = serde_json::from_str(r#"{"kind": "deterministic", "tau": 0.5}"#).unwrap();
        assert_eq!(s, Strategy::deterministic(0.5));
        let s: Strategy = serde_json::from_str(r#"{"kind": "zeno"}"#).unwrap();
        assert_eq!(s, Strategy::zeno());
        let s: Strategy = serde_json::from_str(
            r#"{"kind": "mixture", "components": [
                {"weight": 0.5, "strategy": {"kind": "never"}},
                {"weight": 0.5, "strategy": {"kind": "exponential", "mu": 2}}]}"#,
        )
        .unwrap();
        assert!(s.is_markov());
        let s: Strategy = serde_json::from_str(
            r#"{"kind": "reactive", "rule": "tie-aware", "params": {"after_tie": 1, "otherwise": 2}}"#,
        )
        .unwrap();
        assert_eq!(s.memory(), Memory::LastEvent);
        assert!(serde_json::from_str::<Strategy>(r#"{"kind": "bogus"}"#).is_err());
    }
}
