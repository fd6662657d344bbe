//! Markov best responses, equilibrium checks against Markov deviations,
//! Monte Carlo probes with history-dependent deviations, and extraction of a
//! Markov ε-best response from an arbitrary strategy.
//!
//! Against a fixed stationary opponent the expected payoff of a stationary
//! law `F` is `Ũ(F)/(1 − Q(F))`, a ratio of two functionals that are linear
//! in `F`. Its supremum over mixtures is therefore approached by point
//! masses, which is what the optional refinement step searches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::DelayDistribution;
use crate::engine::{derive_seed, simulate_batch, simulate_plays, EngineError, GameParams, SimConfig};
use crate::history::{History, Player, Segment};
use crate::payoff::{cycle, evaluate_recursive, markov_value_for, PayoffError, Unrolled};
use crate::strategy::{Memory, ReactiveRule, Strategy, StrategyError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriumError {
    #[error("invalid deviation family: {0}")]
    InvalidFamily(String),
    #[error("every family member has a divergent payoff")]
    AllDivergent,
    #[error("epsilon must be positive, got {0}")]
    Epsilon(f64),
    #[error(transparent)]
    Payoff(#[from] PayoffError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

/// Finite set of Markov deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationFamily {
    #[serde(default)]
    pub deterministic_grid: Vec<f64>,
    #[serde(default)]
    pub exponential_grid: Vec<f64>,
    #[serde(default)]
    pub include_never: bool,
    /// `(τ, w)`: inspect at `τ` with probability `w`, otherwise never.
    #[serde(default)]
    pub mixture_grid: Vec<(f64, f64)>,
    /// Also search point masses near the best grid delay and at the
    /// opponent's atoms.
    #[serde(default = "yes")]
    pub refine: bool,
}

fn yes() -> bool {
    true
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

impl DeviationFamily {
    /// 64 log-spaced delays in `[0.01, 20]/λ`, 64 log-spaced rates in
    /// `[0.05, 100]·λ`, never, and every fourth delay mixed with never at
    /// weights 1/4, 1/2, 3/4.
    pub fn default_for(lambda: f64) -> Self {
        let taus = log_grid(0.01 / lambda, 20.0 / lambda, 64);
        let mixture_grid = taus
            .iter()
            .step_by(4)
            .flat_map(|&t| [0.25, 0.5, 0.75].map(|w| (t, w)))
            .collect();
        DeviationFamily {
            deterministic_grid: taus,
            exponential_grid: log_grid(0.05 * lambda, 100.0 * lambda, 64),
            include_never: true,
            mixture_grid,
            refine: true,
        }
    }

    pub fn validate(&self) -> Result<(), EquilibriumError> {
        if self.deterministic_grid.is_empty()
            && self.exponential_grid.is_empty()
            && self.mixture_grid.is_empty()
            && !self.include_never
        {
            return Err(EquilibriumError::InvalidFamily("family is empty".into()));
        }
        let positive = |x: &f64| x.is_finite() && *x > 0.0;
        if !self.deterministic_grid.iter().all(positive)
            || !self.exponential_grid.iter().all(positive)
            || !self.mixture_grid.iter().all(|(t, _)| positive(t))
        {
            return Err(EquilibriumError::InvalidFamily(
                "delays and rates must be positive and finite".into(),
            ));
        }
        if !self.mixture_grid.iter().all(|(_, w)| (0.0..=1.0).contains(w)) {
            return Err(EquilibriumError::InvalidFamily(
                "mixture weights must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Members in tie-break order: delays ascending, rates ascending,
    /// mixtures as listed, never.
    pub fn members(&self) -> Vec<Strategy> {
        let mut taus = self.deterministic_grid.clone();
        taus.sort_by(f64::total_cmp);
        let mut mus = self.exponential_grid.clone();
        mus.sort_by(f64::total_cmp);
        let mut out: Vec<Strategy> = taus.into_iter().map(Strategy::deterministic).collect();
        out.extend(mus.into_iter().map(Strategy::exponential));
        out.extend(self.mixture_grid.iter().map(|&(t, w)| {
            Strategy::mixture(vec![(w, Strategy::deterministic(t)), (1.0 - w, Strategy::Never)])
        }));
        if self.include_never {
            out.push(Strategy::Never);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestResponse {
    pub strategy: Strategy,
    pub value: f64,
    /// The maximizer came from refinement rather than the grid.
    pub refined: bool,
    pub members_evaluated: usize,
}

fn value_against(
    me: Player,
    mine: &DelayDistribution,
    opponent: &DelayDistribution,
    params: &GameParams,
) -> Result<Option<f64>, PayoffError> {
    let (f1, f2) = match me {
        Player::One => (mine, opponent),
        Player::Two => (opponent, mine),
    };
    match markov_value_for(me, f1, f2, params) {
        Ok(v) => Ok(Some(v)),
        Err(PayoffError::Divergent { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Best stationary response of player 1 to `opponent` within `family`.
pub fn best_markov_response(
    opponent: &DelayDistribution,
    family: &DeviationFamily,
    params: &GameParams,
) -> Result<BestResponse, EquilibriumError> {
    best_markov_response_for(Player::One, opponent, family, params)
}

pub fn best_markov_response_for(
    me: Player,
    opponent: &DelayDistribution,
    family: &DeviationFamily,
    params: &GameParams,
) -> Result<BestResponse, EquilibriumError> {
    family.validate()?;
    let members = family.members();
    let values = members
        .par_iter()
        .map(|s| {
            let d = s.respond(&History::new(), me)?;
            Ok(value_against(me, &d, opponent, params)?)
        })
        .collect::<Result<Vec<Option<f64>>, EquilibriumError>>()?;
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = *v {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    let (index, mut value) = best.ok_or(EquilibriumError::AllDivergent)?;
    let mut strategy = members[index].clone();
    let mut refined = false;
    let mut evaluated = members.len();
    if family.refine {
        let point = |tau: f64| -> Result<Option<f64>, EquilibriumError> {
            Ok(value_against(me, &DelayDistribution::atom(tau).map_err(StrategyError::from)?, opponent, params)?)
        };
        let mut candidates = Vec::new();
        for a in opponent.atoms() {
            candidates.extend([a.delay * (1.0 - 1e-9), a.delay, a.delay * (1.0 + 1e-9)]);
        }
        let mut taus = family.deterministic_grid.clone();
        taus.sort_by(f64::total_cmp);
        if let Some(k) = best_grid_delay(&taus, &values) {
            let lo = taus[k.saturating_sub(1)];
            let hi = taus[(k + 1).min(taus.len() - 1)];
            if lo < hi {
                candidates.push(golden_max(|t| point(t).ok().flatten().unwrap_or(f64::NEG_INFINITY), lo, hi));
            }
        }
        for tau in candidates {
            evaluated += 1;
            if let Some(v) = point(tau)? {
                if v > value {
                    value = v;
                    strategy = Strategy::deterministic(tau);
                    refined = true;
                }
            }
        }
    }
    Ok(BestResponse {
        strategy,
        value,
        refined,
        members_evaluated: evaluated,
    })
}

/// Index of the best delay among the deterministic members (which come first).
fn best_grid_delay(taus: &[f64], values: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.iter().take(taus.len()).enumerate() {
        if let Some(v) = *v {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    best.map(|(i, _)| i)
}

/// Golden-section search for a maximum of `f` over `[lo, hi]` in log scale.
fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c.exp()), f(d.exp()));
    for _ in 0..80 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d.exp());
        }
    }
    (0.5 * (a + b)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ConfirmedWithinEpsilon,
    Refuted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerCheck {
    pub player: Player,
    pub candidate_value: f64,
    pub best_deviation: BestResponse,
    /// Best deviation value minus candidate value.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub epsilon: f64,
    pub players: [PlayerCheck; 2],
    pub verdict: Verdict,
}

/// Checks whether the stationary pair `(f1, f2)` admits a profitable
/// deviation within `family` for either player.
pub fn verify_mpe(
    f1: &DelayDistribution,
    f2: &DelayDistribution,
    family: &DeviationFamily,
    params: &GameParams,
    epsilon: f64,
) -> Result<VerificationReport, EquilibriumError> {
    if !(epsilon > 0.0) {
        return Err(EquilibriumError::Epsilon(epsilon));
    }
    let check = |me: Player| -> Result<PlayerCheck, EquilibriumError> {
        let theirs = match me {
            Player::One => f2,
            Player::Two => f1,
        };
        let candidate_value = markov_value_for(me, f1, f2, params)?;
        let best = best_markov_response_for(me, theirs, family, params)?;
        Ok(PlayerCheck {
            player: me,
            candidate_value,
            gap: best.value - candidate_value,
            best_deviation: best,
        })
    };
    let players = [check(Player::One)?, check(Player::Two)?];
    let verdict = if players.iter().all(|p| p.gap <= epsilon) {
        Verdict::ConfirmedWithinEpsilon
    } else {
        Verdict::Refuted
    };
    Ok(VerificationReport {
        epsilon,
        players,
        verdict,
    })
}

/// A symmetric stationary profile chosen from the family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetricCandidate {
    pub strategy: Strategy,
    pub value: f64,
    pub best_response: BestResponse,
    pub gap: f64,
}

/// The family member `F` whose symmetric profile `(F, F)` leaves player 1
/// the smallest gain from deviating (first such member on ties).
pub fn grid_symmetric_candidate(
    family: &DeviationFamily,
    params: &GameParams,
) -> Result<SymmetricCandidate, EquilibriumError> {
    family.validate()?;
    let members = family.members();
    let scored = members
        .par_iter()
        .map(|s| {
            let d = s.respond(&History::new(), Player::One)?;
            let Some(value) = value_against(Player::One, &d, &d, params)? else {
                return Ok(None);
            };
            let best = best_markov_response(&d, family, params)?;
            Ok(Some((value, best)))
        })
        .collect::<Result<Vec<_>, EquilibriumError>>()?;
    let mut pick: Option<SymmetricCandidate> = None;
    for (s, entry) in members.iter().zip(scored) {
        if let Some((value, best)) = entry {
            let gap = best.value - value;
            if pick.as_ref().is_none_or(|p| gap < p.gap) {
                pick = Some(SymmetricCandidate {
                    strategy: s.clone(),
                    value,
                    best_response: best,
                    gap,
                });
            }
        }
    }
    pick.ok_or(EquilibriumError::AllDivergent)
}

/// Everything needed to rerun one probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproBundle {
    pub params: GameParams,
    pub opponent: DelayDistribution,
    pub probe: Strategy,
    pub sim: SimConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeOutcome {
    pub index: usize,
    pub mean: f64,
    pub se: f64,
    /// 3-SE interval.
    pub interval: (f64, f64),
    /// Unrolled expected payoff when the probe only remembers the last event.
    pub analytic: Option<Unrolled>,
    pub exceeds: bool,
    pub bundle: ReproBundle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub best_markov: Option<BestResponse>,
    pub epsilon: f64,
    pub outcomes: Vec<ProbeOutcome>,
    /// Index of the probe with the largest estimate.
    pub max_probe: Option<usize>,
    pub exceedances: Vec<usize>,
}

/// Depth used for analytic probe values.
const PROBE_UNROLL_DEPTH: u32 = 2000;

/// Estimates each probe's payoff as player 1 against the stationary `f2`
/// and flags estimates above the best Markov value by more than `ε + 3 SE`.
/// Probe `i` uses master seed `derive_seed(cfg.master_seed, i)`.
pub fn probe_nonmarkov_deviations(
    f2: &DelayDistribution,
    probes: &[Strategy],
    family: &DeviationFamily,
    params: &GameParams,
    cfg: &SimConfig,
    epsilon: f64,
) -> Result<ProbeReport, EquilibriumError> {
    if probes.is_empty() {
        return Ok(ProbeReport {
            best_markov: None,
            epsilon,
            outcomes: Vec::new(),
            max_probe: None,
            exceedances: Vec::new(),
        });
    }
    let best = best_markov_response(f2, family, params)?;
    let opponent = Strategy::from_distribution(f2.clone());
    let mut outcomes = Vec::with_capacity(probes.len());
    for (index, probe) in probes.iter().enumerate() {
        let sim = SimConfig {
            master_seed: derive_seed(cfg.master_seed, index as u64),
            ..*cfg
        };
        let stats = simulate_batch(probe, &opponent, params, &sim)?;
        let (mean, se) = (stats.mean[0], stats.se[0]);
        let analytic = if probe.memory() <= Memory::LastEvent {
            evaluate_recursive(probe, &opponent, &History::new(), params, PROBE_UNROLL_DEPTH).ok()
        } else {
            None
        };
        outcomes.push(ProbeOutcome {
            index,
            mean,
            se,
            interval: (mean - 3.0 * se, mean + 3.0 * se),
            analytic,
            exceeds: mean > best.value + epsilon + 3.0 * se,
            bundle: ReproBundle {
                params: *params,
                opponent: f2.clone(),
                probe: probe.clone(),
                sim,
            },
        });
    }
    let max_probe = outcomes
        .iter()
        .enumerate()
        .fold(None, |acc: Option<(usize, f64)>, (i, o)| match acc {
            Some((_, m)) if m >= o.mean => acc,
            _ => Some((i, o.mean)),
        })
        .map(|(i, _)| i);
    let exceedances = outcomes.iter().filter(|o| o.exceeds).map(|o| o.index).collect();
    Ok(ProbeReport {
        best_markov: Some(best),
        epsilon,
        outcomes,
        max_probe,
        exceedances,
    })
}

/// `n` history-dependent strategies whose delays lie in `[0.05, 5]/λ`,
/// cycling through the reactive rule kinds.
pub fn reactive_battery(n: usize, lambda: f64, seed: u64) -> Vec<Strategy> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut delay = move || (0.05 * 100f64.powf(rng.gen::<f64>())) / lambda;
    (0..n)
        .map(|i| {
            let rule = match i % 5 {
                0 => ReactiveRule::ByLastInspector {
                    initial: delay(),
                    after_self: delay(),
                    after_other: delay(),
                    exponential: false,
                },
                1 => ReactiveRule::ByLastInspector {
                    initial: delay(),
                    after_self: delay(),
                    after_other: delay(),
                    exponential: true,
                },
                2 => ReactiveRule::TieAware {
                    after_tie: delay(),
                    otherwise: delay(),
                },
                3 => {
                    let (a, b) = (delay(), delay());
                    ReactiveRule::GapScaled {
                        base: delay(),
                        factor: 0.5,
                        min: a.min(b),
                        max: a.max(b),
                    }
                }
                _ => ReactiveRule::Copy {
                    of: Box::new(if i % 2 == 0 {
                        Strategy::deterministic(delay())
                    } else {
                        Strategy::exponential(1.0 / delay())
                    }),
                },
            };
            Strategy::Reactive(rule)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extraction {
    pub strategy: Strategy,
    /// Expected payoff of the extracted stationary strategy against `F2`.
    pub achieved_value: f64,
    /// Largest `Λ` among the examined histories; `None` when none were examined.
    pub max_lambda: Option<f64>,
    /// The maximizing history, in text form.
    pub h0: Option<String>,
    pub histories_examined: usize,
    pub replications: u64,
}

/// Caps on the history search.
const MAX_HISTORIES: usize = 200_000;
const CASCADE_ENUMERATION: u64 = 1000;

/// Samples plays of `s1` against the stationary `f2`, evaluates `Λ` after
/// every prefix (and after the first steps of closed-form cascades), and
/// returns the stationary strategy that repeats `s1`'s response to the
/// maximizing prefix.
pub fn extract_markov_eps_best_response(
    s1: &Strategy,
    f2: &DelayDistribution,
    params: &GameParams,
    cfg: &SimConfig,
) -> Result<Extraction, EquilibriumError> {
    s1.validate()?;
    if matches!(s1, Strategy::Never) {
        let never = DelayDistribution::never();
        return Ok(Extraction {
            strategy: Strategy::Never,
            achieved_value: markov_value_for(Player::One, &never, f2, params)?,
            max_lambda: None,
            h0: None,
            histories_examined: 0,
            replications: 0,
        });
    }
    let opponent = Strategy::from_distribution(f2.clone());
    let plays = simulate_plays(s1, &opponent, params, cfg)?;
    let mut search = Search {
        s1,
        f2,
        params,
        best: None,
        examined: 0,
    };
    'plays: for res in &plays {
        let mut h = History::new();
        search.consider(&h)?;
        for seg in res.play.history.segments() {
            if search.examined >= MAX_HISTORIES {
                break 'plays;
            }
            match seg {
                Segment::Explicit(records) => {
                    for r in records {
                        h.push_inspection(r.time, r.attempted, r.actual).map_err(EngineError::from)?;
                        search.consider(&h)?;
                    }
                }
                Segment::Cascade(c) => {
                    let inspector = c.attempted.single().expect("cascades have one inspector");
                    let steps_end = c.last_step.unwrap_or(u64::MAX);
                    let mut walk = h.clone();
                    let mut n = c.first_step;
                    while n <= steps_end && n < c.first_step + CASCADE_ENUMERATION {
                        walk.push_inspection(c.formula.time(n), c.attempted, c.actual)
                            .map_err(EngineError::from)?;
                        search.consider(&walk)?;
                        n += 1;
                    }
                    h.push_cascade(c.formula, c.first_step, c.last_step, inspector)
                        .map_err(EngineError::from)?;
                    if let Some(t) = c.limit_time {
                        h.close_limit_in_place(t).map_err(EngineError::from)?;
                        search.consider(&h)?;
                    } else if c.last_step.is_none() {
                        break;
                    }
                }
            }
        }
    }
    let Some((lambda, h0)) = search.best else {
        return Ok(Extraction {
            strategy: Strategy::Never,
            achieved_value: markov_value_for(Player::One, &DelayDistribution::never(), f2, params)?,
            max_lambda: None,
            h0: None,
            histories_examined: 0,
            replications: cfg.replications,
        });
    };
    let strategy = s1.markov_from_history(&h0, Player::One)?;
    let f1 = strategy.respond(&History::new(), Player::One)?;
    Ok(Extraction {
        achieved_value: markov_value_for(Player::One, &f1, f2, params)?,
        strategy,
        max_lambda: Some(lambda),
        h0: Some(h0.to_text()),
        histories_examined: search.examined,
        replications: cfg.replications,
    })
}

struct Search<'a> {
    s1: &'a Strategy,
    f2: &'a DelayDistribution,
    params: &'a GameParams,
    best: Option<(f64, History)>,
    examined: usize,
}

impl Search<'_> {
    fn consider(&mut self, h: &History) -> Result<(), EquilibriumError> {
        self.examined += 1;
        let f1 = self.s1.respond(h, Player::One)?;
        let cyc = cycle(Player::One, &f1, self.f2, self.params, None)?;
        let lambda = if cyc.p_tilde > 0.0 { cyc.u_tilde / cyc.p_tilde } else { 0.0 };
        if self.best.as_ref().is_none_or(|(b, _)| lambda > *b) {
            self.best = Some((lambda, h.clone()));
        }
        Ok(())
    }
}
