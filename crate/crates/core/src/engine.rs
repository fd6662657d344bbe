//! Seeded Monte Carlo sampling of plays.
//!
//! Starting from the empty history, each step draws both players' delays
//! from their strategies' responses to the current history, lets the earlier
//! one inspect (a fair coin settles exact ties), and checks for the prize
//! with probability `1 − e^{−λΔ}` where `Δ` is the time since the previous
//! index. A failed check appends the record and both players draw afresh.
//!
//! Draw order per step is fixed: player-1 delay, player-2 delay, tie coin
//! (only on a tie), prize check. Per-replication seeds come from
//! [`derive_seed`]; the draw stream for a seed is `ChaCha8Rng::seed_from_u64`
//! producing `f64` values in `[0, 1)` with 53 random bits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::DelayDistribution;
use crate::history::{History, HistoryError, Outcome, Play, Player, PlayerSet, Segment};
use crate::strategy::{Strategy, StrategyError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    History(#[from] HistoryError),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> EngineError {
    EngineError::InvalidConfig {
        field,
        reason: reason.into(),
    }
}

/// Economic parameters of the game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    /// Discount rate.
    pub r: f64,
    /// Prize arrival rate.
    pub lambda: f64,
    /// Cost per actual inspection (player 1, and player 2 unless overridden).
    pub cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost2: Option<f64>,
    /// Value to the player who finds the prize.
    pub v_finder: f64,
    /// Value to the other player when the prize is found.
    pub v_other: f64,
}

impl GameParams {
    pub fn new(r: f64, lambda: f64, cost: f64, v_finder: f64, v_other: f64) -> Self {
        GameParams {
            r,
            lambda,
            cost,
            cost2: None,
            v_finder,
            v_other,
        }
    }

    pub fn cost_of(&self, p: Player) -> f64 {
        match p {
            Player::One => self.cost,
            Player::Two => self.cost2.unwrap_or(self.cost),
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(invalid("lambda", format!("must be positive, got {}", self.lambda)));
        }
        if !(self.r.is_finite() && self.r >= 0.0) {
            return Err(invalid("r", format!("must be non-negative, got {}", self.r)));
        }
        for (field, c) in [("cost", Some(self.cost)), ("cost2", self.cost2)] {
            if let Some(c) = c {
                if !(c.is_finite() && c >= 0.0) {
                    return Err(invalid(field, format!("must be non-negative, got {c}")));
                }
            }
        }
        if !(self.v_finder.is_finite() && self.v_other.is_finite()) {
            return Err(invalid("v_finder/v_other", "values must be finite"));
        }
        Ok(())
    }

    /// Multiplies values and costs by `k`.
    pub fn scaled(&self, k: f64) -> GameParams {
        GameParams {
            cost: self.cost * k,
            cost2: self.cost2.map(|c| c * k),
            v_finder: self.v_finder * k,
            v_other: self.v_other * k,
            ..*self
        }
    }
}

/// Truncation and replication settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Plays stop (truncated) before any inspection later than this time.
    pub horizon: f64,
    /// Maximum number of inspection events per play.
    pub budget: u64,
    pub replications: u64,
    pub master_seed: u64,
    /// Replace the infinite tail of a schedule cascade by its closed form when
    /// the opponent is Markov and never inspects, so plays can pass limit indices.
    pub collapse_cascades: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            horizon: 1e9,
            budget: 100_000,
            replications: 10_000,
            master_seed: 0,
            collapse_cascades: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if !(self.horizon > 0.0) {
            return Err(invalid("horizon", format!("must be positive, got {}", self.horizon)));
        }
        if self.budget < 1 {
            return Err(invalid("budget", "must be at least 1"));
        }
        if self.replications < 1 {
            return Err(invalid("replications", "must be at least 1"));
        }
        Ok(())
    }
}

/// Seed of replication `i`: the SplitMix64 finalizer applied to
/// `master XOR (i · 0x9E3779B97F4A7C15)`.
pub fn derive_seed(master: u64, i: u64) -> u64 {
    let mut z = master ^ i.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// What a uniform draw is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrawKind {
    Delay(Player),
    TieCoin,
    PrizeCheck,
}

/// Source of uniforms in `[0, 1)`.
pub trait DrawSource {
    fn draw(&mut self, kind: DrawKind) -> f64;
    fn draws_taken(&self) -> u64;
}

pub struct SeededDraws {
    rng: ChaCha8Rng,
    taken: u64,
}

impl SeededDraws {
    pub fn new(seed: u64) -> Self {
        SeededDraws {
            rng: ChaCha8Rng::seed_from_u64(seed),
            taken: 0,
        }
    }
}

impl DrawSource for SeededDraws {
    fn draw(&mut self, _kind: DrawKind) -> f64 {
        self.taken += 1;
        self.rng.gen::<f64>()
    }

    fn draws_taken(&self) -> u64 {
        self.taken
    }
}

/// Draws supplied by a closure, for forcing particular traces.
pub struct ScriptedDraws<F: FnMut(DrawKind) -> f64> {
    script: F,
    taken: u64,
}

impl<F: FnMut(DrawKind) -> f64> ScriptedDraws<F> {
    pub fn new(script: F) -> Self {
        ScriptedDraws { script, taken: 0 }
    }
}

impl<F: FnMut(DrawKind) -> f64> DrawSource for ScriptedDraws<F> {
    fn draw(&mut self, kind: DrawKind) -> f64 {
        self.taken += 1;
        (self.script)(kind)
    }

    fn draws_taken(&self) -> u64 {
        self.taken
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayResult {
    pub play: Play,
    /// Realized discounted payoffs of players 1 and 2.
    pub payoff: [f64; 2],
    pub rng_trace_len: u64,
}

/// Caches the response of Markov strategies, which never changes.
struct Responder<'a> {
    strategy: &'a Strategy,
    me: Player,
    fixed: Option<DelayDistribution>,
}

impl<'a> Responder<'a> {
    fn new(strategy: &'a Strategy, me: Player) -> Result<Self, EngineError> {
        strategy.validate()?;
        let fixed = if strategy.is_markov() {
            Some(strategy.respond(&History::new(), me)?)
        } else {
            None
        };
        Ok(Responder {
            strategy,
            me,
            fixed,
        })
    }

    fn respond(&self, h: &History) -> Result<DelayDistribution, EngineError> {
        match &self.fixed {
            Some(d) => Ok(d.clone()),
            None => Ok(self.strategy.respond(h, self.me)?),
        }
    }
}

/// Samples one play with the seeded draw stream.
pub fn sample_play(
    s1: &Strategy,
    s2: &Strategy,
    params: &GameParams,
    cfg: &SimConfig,
    seed: u64,
) -> Result<PlayResult, EngineError> {
    sample_play_with(s1, s2, params, cfg, &mut SeededDraws::new(seed))
}

/// Samples one play using `draws` for every random choice.
pub fn sample_play_with(
    s1: &Strategy,
    s2: &Strategy,
    params: &GameParams,
    cfg: &SimConfig,
    draws: &mut impl DrawSource,
) -> Result<PlayResult, EngineError> {
    params.validate()?;
    cfg.validate()?;
    let responders = [Responder::new(s1, Player::One)?, Responder::new(s2, Player::Two)?];
    let mut h = History::new();
    let mut events = 0u64;
    let mut truncated = false;
    let mut outcome = Outcome::Undiscovered;

    loop {
        if events >= cfg.budget {
            truncated = true;
            break;
        }
        let now = h.final_time();
        let dists = [responders[0].respond(&h)?, responders[1].respond(&h)?];
        let u1 = draws.draw(DrawKind::Delay(Player::One));
        let u2 = draws.draw(DrawKind::Delay(Player::Two));
        let delays = [dists[0].sample(u1), dists[1].sample(u2)];

        if cfg.collapse_cascades {
            if let Some(done) =
                try_collapse(&responders, &dists, &mut h, params, cfg, draws)?
            {
                events += 1;
                if let Some(found) = done {
                    outcome = found;
                    break;
                }
                continue;
            }
        }

        let first = delays[0].min(delays[1]);
        if first == f64::INFINITY {
            break;
        }
        let mut at = now + first;
        if at > cfg.horizon {
            truncated = true;
            break;
        }
        if at <= now {
            at = now.next_up();
        }
        let (attempted, actual) = if delays[0] < delays[1] {
            (PlayerSet::only(Player::One), Player::One)
        } else if delays[1] < delays[0] {
            (PlayerSet::only(Player::Two), Player::Two)
        } else {
            let coin = draws.draw(DrawKind::TieCoin);
            let who = if coin < 0.5 { Player::One } else { Player::Two };
            (PlayerSet::BOTH, who)
        };
        let success = -(-params.lambda * (at - now)).exp_m1();
        let found = draws.draw(DrawKind::PrizeCheck) < success;
        h.push_inspection(at, attempted, actual.into())?;
        events += 1;
        if found {
            outcome = Outcome::Discovered { by: actual, at };
            break;
        }
    }

    let play = Play {
        history: h,
        outcome,
        truncated,
    };
    let payoff = [
        realized_payoff(&play, params, Player::One),
        realized_payoff(&play, params, Player::Two),
    ];
    Ok(PlayResult {
        play,
        payoff,
        rng_trace_len: draws.draws_taken(),
    })
}

/// Collapses the tail of a schedule cascade when the opponent is Markov and
/// never inspects. Returns `None` when no collapse applies, otherwise
/// `Some(outcome)` with the discovery if the prize was found in the tail.
fn try_collapse(
    responders: &[Responder<'_>; 2],
    dists: &[DelayDistribution; 2],
    h: &mut History,
    params: &GameParams,
    cfg: &SimConfig,
    draws: &mut impl DrawSource,
) -> Result<Option<Option<Outcome>>, EngineError> {
    for who in Player::BOTH {
        let other = who.other();
        if !(dists[other.index()].is_never() && responders[other.index()].fixed.is_some()) {
            continue;
        }
        let Some((formula, step)) = responders[who.index()].strategy.cascade_form(h) else {
            continue;
        };
        let limit = formula.supremum();
        if limit > cfg.horizon {
            return Ok(None);
        }
        let now = h.final_time();
        let u = draws.draw(DrawKind::PrizeCheck);
        let tail_success = -(-params.lambda * (limit - now)).exp_m1();
        let arrival = now - (-u).ln_1p() / params.lambda;
        if u < tail_success && arrival < limit {
            let last = formula.first_step_at_or_after(arrival).max(step);
            if formula.time(last) < limit {
                h.push_cascade(formula, step, Some(last), who)?;
                return Ok(Some(Some(Outcome::Discovered {
                    by: who,
                    at: formula.time(last),
                })));
            }
        }
        h.push_cascade(formula, step, None, who)?;
        h.close_limit_in_place(limit)?;
        return Ok(Some(None));
    }
    Ok(None)
}

/// Cascade runs longer than this are summed exactly up to the cap; the rest
/// is charged at the run's final discount factor.
const EXACT_CASCADE_TERMS: u64 = 10_000_000;

/// Realized discounted payoff of `player`: `−c·e^{−rt}` for each inspection
/// the player actually performed, plus the discounted prize value on discovery.
pub fn realized_payoff(play: &Play, params: &GameParams, player: Player) -> f64 {
    let c = params.cost_of(player);
    let disc = |t: f64| (-params.r * t).exp();
    let mine = PlayerSet::only(player);
    let mut total = 0.0;
    for seg in play.history.segments() {
        match seg {
            Segment::Explicit(records) => {
                for r in records.iter().filter(|r| r.actual == mine) {
                    total -= c * disc(r.time);
                }
            }
            Segment::Cascade(cascade) if cascade.actual == mine && c > 0.0 => {
                let Some(last) = cascade.last_step else {
                    return f64::NEG_INFINITY;
                };
                let exact_end = last.min(cascade.first_step.saturating_add(EXACT_CASCADE_TERMS));
                for n in cascade.first_step..=exact_end {
                    total -= c * disc(cascade.formula.time(n));
                }
                if last > exact_end {
                    total -= (last - exact_end) as f64 * c * disc(cascade.formula.time(last));
                }
            }
            Segment::Cascade(_) => {}
        }
    }
    if let Outcome::Discovered { by, at } = play.outcome {
        let v = if by == player {
            params.v_finder
        } else {
            params.v_other
        };
        total += disc(at) * v;
    }
    total
}

/// Summary of a batch of replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatchStats {
    pub replications: u64,
    pub mean: [f64; 2],
    pub se: [f64; 2],
    pub discovery_rate: f64,
    pub truncation_rate: f64,
}

impl BatchStats {
    pub const CSV_HEADER: &'static str =
        "replications,mean1,se1,mean2,se2,discovery_rate,truncation_rate";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.replications,
            self.mean[0],
            self.se[0],
            self.mean[1],
            self.se[1],
            self.discovery_rate,
            self.truncation_rate
        )
    }
}

struct Summary {
    payoff: [f64; 2],
    discovered: bool,
    truncated: bool,
}

/// Neumaier-compensated sum.
fn stable_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean and standard error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = stable_sum(xs.iter().copied()) / n;
    if !mean.is_finite() || xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = stable_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs `cfg.replications` plays with seeds `derive_seed(master_seed, i)`.
/// Results do not depend on the thread count.
pub fn simulate_batch(
    s1: &Strategy,
    s2: &Strategy,
    params: &GameParams,
    cfg: &SimConfig,
) -> Result<BatchStats, EngineError> {
    cfg.validate()?;
    let summaries: Vec<Summary> = (0..cfg.replications)
        .into_par_iter()
        .map(|i| {
            let res = sample_play(s1, s2, params, cfg, derive_seed(cfg.master_seed, i))?;
            Ok(Summary {
                payoff: res.payoff,
                discovered: matches!(res.play.outcome, Outcome::Discovered { .. }),
                truncated: res.play.truncated,
            })
        })
        .collect::<Result<_, EngineError>>()?;
    Ok(summarize(&summaries))
}

fn summarize(summaries: &[Summary]) -> BatchStats {
    let n = summaries.len() as f64;
    let mut mean = [0.0; 2];
    let mut se = [0.0; 2];
    for p in Player::BOTH {
        let xs: Vec<f64> = summaries.iter().map(|s| s.payoff[p.index()]).collect();
        (mean[p.index()], se[p.index()]) = mean_and_se(&xs);
    }
    BatchStats {
        replications: summaries.len() as u64,
        mean,
        se,
        discovery_rate: summaries.iter().filter(|s| s.discovered).count() as f64 / n,
        truncation_rate: summaries.iter().filter(|s| s.truncated).count() as f64 / n,
    }
}

/// Like [`simulate_batch`] but keeps every play. Memory grows with the
/// number and length of plays.
pub fn simulate_plays(
    s1: &Strategy,
    s2: &Strategy,
    params: &GameParams,
    cfg: &SimConfig,
) -> Result<Vec<PlayResult>, EngineError> {
    cfg.validate()?;
    (0..cfg.replications)
        .into_par_iter()
        .map(|i| sample_play(s1, s2, params, cfg, derive_seed(cfg.master_seed, i)))
        .collect()
}

/// Cost accounting of the schedule strategy against a player who never inspects.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZenoDiagnosis {
    pub cost: f64,
    pub r: f64,
    /// `lim c·e^{−r·u_n}` over the first cascade, whose times approach 1.
    pub term_limit: f64,
    /// The expected cost is infinite whenever the terms do not vanish.
    pub divergent: bool,
    /// `(K, Σ_{n ≤ K} c·e^{−r·u_n})`.
    pub partial_sums: Vec<(u64, f64)>,
    /// `(B, cost paid)` in an engine play truncated at budget `B` along the
    /// path where every prize check fails.
    pub truncated_costs: Vec<(u64, f64)>,
}

pub fn zeno_cost_diagnosis(params: &GameParams, budgets: &[u64]) -> Result<ZenoDiagnosis, EngineError> {
    params.validate()?;
    let c = params.cost;
    let term = |n: u64| {
        let n = n as f64;
        c * (-params.r * (n / (n + 1.0))).exp()
    };
    let partial_sums = budgets
        .iter()
        .map(|&k| (k, stable_sum((1..=k).map(term))))
        .collect();
    let mut truncated_costs = Vec::new();
    for &b in budgets {
        let cfg = SimConfig {
            budget: b,
            replications: 1,
            ..SimConfig::default()
        };
        let mut fail = ScriptedDraws::new(|kind| match kind {
            DrawKind::PrizeCheck => 1.0 - f64::EPSILON,
            _ => 0.5,
        });
        let res = sample_play_with(&Strategy::zeno(), &Strategy::Never, params, &cfg, &mut fail)?;
        truncated_costs.push((b, -res.payoff[0]));
    }
    let term_limit = c * (-params.r).exp();
    Ok(ZenoDiagnosis {
        cost: c,
        r: params.r,
        term_limit,
        divergent: term_limit > 0.0,
        partial_sums,
        truncated_costs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordinal::Ordinal;

    fn params() -> GameParams {
        GameParams::new(0.0, 1.0, 0.25, 2.0, 0.5)
    }

    fn always(prize: f64) -> ScriptedDraws<impl FnMut(DrawKind) -> f64> {
        ScriptedDraws::new(move |kind| match kind {
            DrawKind::PrizeCheck => prize,
            _ => 0.5,
        })
    }

    #[test]
    fn never_never_is_empty() {
        let res = sample_play(&Strategy::Never, &Strategy::Never, &params(), &SimConfig::default(), 7)
            .unwrap();
        assert!(res.play.history.is_empty());
        assert_eq!(res.play.outcome, Outcome::Undiscovered);
        assert!(!res.play.truncated);
        assert_eq!(res.payoff, [0.0, 0.0]);
    }

    #[test]
    fn single_discovery() {
        let p = params();
        let res = sample_play_with(
            &Strategy::deterministic(1.0),
            &Strategy::Never,
            &p,
            &SimConfig::default(),
            &mut always(0.0),
        )
        .unwrap();
        assert_eq!(res.play.outcome, Outcome::Discovered { by: Player::One, at: 1.0 });
        assert_eq!(res.payoff[0], p.v_finder - p.cost);
        assert_eq!(res.payoff[1], p.v_other);
        assert_eq!(res.rng_trace_len, 3);
    }

    #[test]
    fn zeno_budget_trace() {
        let cfg = SimConfig {
            budget: 100,
            ..SimConfig::default()
        };
        let res = sample_play_with(&Strategy::zeno(), &Strategy::Never, &params(), &cfg, &mut always(0.999))
            .unwrap();
        assert!(res.play.truncated);
        let times: Vec<f64> = res.play.history.records().map(|r| r.time).collect();
        assert_eq!(times.len(), 100);
        for (i, t) in times.iter().enumerate() {
            let n = (i + 1) as f64;
            assert!((t - n / (n + 1.0)).abs() < 1e-15);
        }
        assert!(res.play.validate().is_empty());
    }

    #[test]
    fn collapse_passes_limits() {
        let cfg = SimConfig {
            budget: 10,
            collapse_cascades: true,
            ..SimConfig::default()
        };
        let zeno2 = Strategy::Zeno(crate::strategy::ZenoSchedule { blocks: Some(2) });
        let res = sample_play_with(&zeno2, &Strategy::Never, &params(), &cfg, &mut always(0.999))
            .unwrap();
        assert_eq!(res.play.history.alpha_star(), "w*2".parse::<Ordinal>().unwrap());
        assert_eq!(res.play.history.final_time(), 2.0);
        assert_eq!(res.play.outcome, Outcome::Undiscovered);
        assert!(!res.play.truncated);
        assert!(res.play.validate().is_empty());
        assert_eq!(res.payoff[0], f64::NEG_INFINITY);
        assert_eq!(res.payoff[1], 0.0);
    }

    #[test]
    fn collapse_discovery_inside_tail() {
        let cfg = SimConfig {
            collapse_cascades: true,
            ..SimConfig::default()
        };
        // λ = 1, u = 0.5: arrival at ln 2 ≈ 0.693, first schedule time after it is 3/4
        let res = sample_play_with(&Strategy::zeno(), &Strategy::Never, &params(), &cfg, &mut always(0.5))
            .unwrap();
        assert_eq!(res.play.outcome, Outcome::Discovered { by: Player::One, at: 0.75 });
        assert_eq!(res.play.history.inspection_count(), 3);
        assert!(res.play.validate().is_empty());
        let p = params();
        assert!((res.payoff[0] - (p.v_finder - 3.0 * p.cost)).abs() < 1e-12);
    }

    #[test]
    fn tie_uses_coin_and_charges_actual_only() {
        let p = params();
        let mut coin_high = ScriptedDraws::new(|kind| match kind {
            DrawKind::TieCoin => 0.75,
            DrawKind::PrizeCheck => 0.0,
            _ => 0.5,
        });
        let s = Strategy::deterministic(1.0);
        let res = sample_play_with(&s, &s, &p, &SimConfig::default(), &mut coin_high).unwrap();
        let r = res.play.history.last_record().unwrap();
        assert_eq!(r.attempted, PlayerSet::BOTH);
        assert_eq!(r.actual_player(), Some(Player::Two));
        assert_eq!(res.payoff[0], p.v_other);
        assert_eq!(res.payoff[1], p.v_finder - p.cost);
        assert_eq!(res.rng_trace_len, 4);
    }

    #[test]
    fn realized_payoff_other_finder() {
        let p = GameParams::new(0.3, 1.0, 0.2, 1.0, 0.7);
        let h = History::new()
            .append_inspection(2.0, Player::Two.into(), Player::Two.into())
            .unwrap();
        let play = Play {
            history: h,
            outcome: Outcome::Discovered { by: Player::Two, at: 2.0 },
            truncated: false,
        };
        assert_eq!(realized_payoff(&play, &p, Player::One), 0.7 * (-0.6f64).exp());
        assert_eq!(
            realized_payoff(&Play { history: History::new(), outcome: Outcome::Undiscovered, truncated: false }, &p, Player::One),
            0.0
        );
    }

    #[test]
    fn seeds_reproduce() {
        let s1 = Strategy::exponential(1.3);
        let s2 = Strategy::mixture(vec![(0.5, Strategy::deterministic(0.8)), (0.5, Strategy::Never)]);
        let a = sample_play(&s1, &s2, &params(), &SimConfig::default(), 99).unwrap();
        let b = sample_play(&s1, &s2, &params(), &SimConfig::default(), 99).unwrap();
        assert_eq!(a.play.to_text(), b.play.to_text());
    }

    #[test]
    fn batch_of_one_matches_single_play() {
        let cfg = SimConfig {
            replications: 1,
            master_seed: 5,
            ..SimConfig::default()
        };
        let s1 = Strategy::exponential(0.7);
        let s2 = Strategy::deterministic(1.1);
        let stats = simulate_batch(&s1, &s2, &params(), &cfg).unwrap();
        let one = sample_play(&s1, &s2, &params(), &cfg, derive_seed(5, 0)).unwrap();
        assert_eq!(stats.mean, one.payoff);
        assert_eq!(stats.replications, 1);
    }

    #[test]
    fn rejects_bad_config() {
        let bad = SimConfig {
            budget: 0,
            ..SimConfig::default()
        };
        assert!(matches!(
            sample_play(&Strategy::Never, &Strategy::Never, &params(), &bad, 1),
            Err(EngineError::InvalidConfig { field: "budget", .. })
        ));
        let mut p = params();
        p.lambda = 0.0;
        assert!(matches!(
            sample_play(&Strategy::Never, &Strategy::Never, &p, &SimConfig::default(), 1),
            Err(EngineError::InvalidConfig { field: "lambda", .. })
        ));
    }

    #[test]
    fn seed_derivation_is_stable() {
        assert_eq!(derive_seed(0, 0), 0);
        assert_ne!(derive_seed(0, 1), derive_seed(1, 0));
        assert_eq!(derive_seed(42, 7), derive_seed(42, 7));
    }

    #[test]
    fn zeno_diagnosis_agrees_with_partial_sums() {
        let p = GameParams::new(0.2, 1.0, 0.5, 1.0, 0.0);
        let d = zeno_cost_diagnosis(&p, &[10, 100, 1000]).unwrap();
        assert!(d.divergent);
        for ((k, s), (b, c)) in d.partial_sums.iter().zip(&d.truncated_costs) {
            assert_eq!(k, b);
            assert!((s - c).abs() < 1e-9 * s.abs());
            assert!(*c >= *k as f64 * d.term_limit);
        }
    }
}
