//! Expected payoffs of one inspection cycle and of whole plays.
//!
//! For the player `me` with delay `S_me ~ F_me` against `S_o ~ F_o`, the
//! first inspection after the current time is at `min(S_me, S_o)`. With
//!
//! ```text
//! a(s) = e^{−rs}(−c + (1 − e^{−λs})·v_finder)   (me inspects first)
//! b(s) = e^{−rs}(1 − e^{−λs})·v_other          (the opponent inspects first)
//! ```
//!
//! the per-cycle payoff is `Ũ = E[a(S_me); S_me < S_o] + E[b(S_o); S_o < S_me]
//! + ½·E[(a + b)(S); S_me = S_o < ∞]`, the expected discount is
//! `P̃ = E[e^{−r·min}]`, and the continuation factor is
//! `Q = E[e^{−(r+λ)·min}]` (both zero when nobody ever inspects). For a
//! stationary pair the expected payoff solves `U = Ũ + Q·U`.
//!
//! Each cycle quantity is a sum of integrals of `e^{−Ks}` against one
//! delay law and the other's survival function. With only atoms and
//! exponentials these have closed forms; other continuous laws go through
//! adaptive Gauss–Kronrod quadrature, which also serves as an independent
//! check of the closed forms.

use serde::Serialize;
use thiserror::Error;

use crate::distribution::{Continuous, DelayDistribution};
use crate::engine::GameParams;
use crate::history::{History, HistoryError, Player, PlayerSet};
use crate::quad::{integrate, QuadError, QuadOptions};
use crate::strategy::{LastEvent, Memory, Strategy, StrategyError};

/// `Q` at or above `1 − DIVERGENCE_GAP` has no usable fixed point.
pub const DIVERGENCE_GAP: f64 = 1e-12;

/// Continuous mass left beyond the quadrature range of each component.
const QUAD_TAIL_MASS: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PayoffError {
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("continuation factor {q} is too close to 1; the expected payoff diverges")]
    Divergent { q: f64 },
    #[error("closed form is unavailable for general continuous laws")]
    ClosedFormUnavailable,
    #[error("expected discount is 0 but per-cycle payoff is {u_tilde}")]
    Inconsistent { u_tilde: f64 },
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    History(#[from] HistoryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
}

/// Sum of `coef·e^{−K·s}` terms, stored as `(coef, K)`.
type ExpSum = [(f64, f64)];

fn eval(g: &ExpSum, s: f64) -> f64 {
    g.iter().map(|&(coef, k)| coef * (-k * s).exp()).sum()
}

/// `∫_x^y e^{−κs} ds` for `κ > 0`, `y` possibly infinite.
fn exp_integral(kappa: f64, x: f64, y: f64) -> f64 {
    let head = (-kappa * x).exp() / kappa;
    if y == f64::INFINITY {
        head
    } else {
        head * -(-kappa * (y - x)).exp_m1()
    }
}

/// Running value with an absolute-error estimate.
#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    value: f64,
    error: f64,
}

impl Acc {
    fn add_exact(&mut self, x: f64) {
        self.value += x;
        self.error += 4.0 * f64::EPSILON * x.abs();
    }
}

/// `E[g(X); X < Y]` in closed form.
fn first_closed(x: &DelayDistribution, y: &DelayDistribution, g: &ExpSum) -> Acc {
    let mut acc = Acc::default();
    let exps: Vec<(f64, f64)> = y
        .continuous()
        .iter()
        .map(|c| match c {
            Continuous::Exponential { rate, weight } => (*rate, *weight),
            Continuous::Law { .. } => unreachable!("closed form called with a general law"),
        })
        .collect();
    let y_atoms = y.atoms();
    let strictly_above = |d: f64| -> f64 {
        y.never_mass()
            + y_atoms.iter().filter(|a| a.delay > d).map(|a| a.mass).sum::<f64>()
            + exps.iter().map(|(mu, w)| w * (-mu * d).exp()).sum::<f64>()
    };
    for a in x.atoms() {
        acc.add_exact(a.mass * eval(g, a.delay) * strictly_above(a.delay));
    }
    // atoms of Y cut the half line into intervals with constant atom mass above
    let mut cuts = vec![0.0];
    cuts.extend(y_atoms.iter().map(|a| a.delay));
    cuts.push(f64::INFINITY);
    let mut above = vec![0.0; y_atoms.len() + 1];
    let mut running = y.never_mass();
    above[y_atoms.len()] = running;
    for i in (0..y_atoms.len()).rev() {
        running += y_atoms[i].mass;
        above[i] = running;
    }
    for c in x.continuous() {
        let Continuous::Exponential { rate: mu, weight: w } = c else {
            unreachable!("closed form called with a general law");
        };
        for (i, pair) in cuts.windows(2).enumerate() {
            let (lo, hi) = (pair[0], pair[1]);
            for &(coef, k) in g {
                let scale = coef * w * mu;
                acc.add_exact(scale * above[i] * exp_integral(k + mu, lo, hi));
                for &(nu, wy) in &exps {
                    acc.add_exact(scale * wy * exp_integral(k + mu + nu, lo, hi));
                }
            }
        }
    }
    acc
}

/// `E[g(X); X < Y]` with the continuous part integrated numerically.
fn first_quad(x: &DelayDistribution, y: &DelayDistribution, g: &ExpSum) -> Result<Acc, QuadError> {
    let mut acc = Acc::default();
    for a in x.atoms() {
        acc.add_exact(a.mass * eval(g, a.delay) * y.survival(a.delay));
    }
    let g_max: f64 = g.iter().map(|(coef, _)| coef.abs()).sum();
    let opts = QuadOptions {
        abs_tol: 1e-13,
        max_intervals: 4000,
    };
    for c in x.continuous() {
        let w = c.weight();
        if w <= QUAD_TAIL_MASS {
            acc.error += w * g_max;
            continue;
        }
        let end = c.quantile(1.0 - QUAD_TAIL_MASS / w);
        acc.error += w * (1.0 - c.cdf(end)) * g_max;
        let mut points = vec![0.0, end];
        points.extend(y.atoms().iter().map(|a| a.delay));
        if let Continuous::Law { law, .. } = c {
            points.extend(law.breakpoints());
        }
        for other in y.continuous() {
            if let Continuous::Law { law, .. } = other {
                points.extend(law.breakpoints());
            }
        }
        points.retain(|p| (0.0..=end).contains(p));
        points.sort_by(f64::total_cmp);
        points.dedup();
        for pair in points.windows(2) {
            let piece = integrate(
                |s| w * c.density(s) * eval(g, s) * y.survival(s),
                pair[0],
                pair[1],
                opts,
            )?;
            acc.value += piece.value;
            acc.error += piece.abs_error;
        }
    }
    Ok(acc)
}

/// `Σ m_x(d)·m_y(d)·g(d)` over common atoms.
fn ties(x: &DelayDistribution, y: &DelayDistribution, g: &ExpSum) -> Acc {
    let mut acc = Acc::default();
    for a in x.atoms() {
        let m = y.atom_mass_at(a.delay);
        if m > 0.0 {
            acc.add_exact(a.mass * m * eval(g, a.delay));
        }
    }
    acc
}

/// Per-cycle quantities from one player's point of view, with the
/// continuation factor split by who inspects first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cycle {
    pub u_tilde: f64,
    pub p_tilde: f64,
    /// `E[e^{−(r+λ)S}; player k inspects strictly first]`, indexed by player.
    pub q_first: [f64; 2],
    /// `E[e^{−(r+λ)S}; tie]`.
    pub q_tie: f64,
    pub est_abs_error: f64,
    pub method: Method,
}

impl Cycle {
    pub fn q_factor(&self) -> f64 {
        self.q_first[0] + self.q_first[1] + self.q_tie
    }
}

/// Evaluates the cycle for `me`, where `f1`, `f2` are the players' current
/// delay distributions. `method = None` picks the closed form when possible.
pub fn cycle(
    me: Player,
    f1: &DelayDistribution,
    f2: &DelayDistribution,
    params: &GameParams,
    method: Option<Method>,
) -> Result<Cycle, PayoffError> {
    let general = f1.has_custom_laws() || f2.has_custom_laws();
    let method = match method {
        Some(Method::ClosedForm) if general => return Err(PayoffError::ClosedFormUnavailable),
        Some(m) => m,
        None if general => Method::Quadrature,
        None => Method::ClosedForm,
    };
    let (f_me, f_o) = match me {
        Player::One => (f1, f2),
        Player::Two => (f2, f1),
    };
    let r = params.r;
    let rl = params.r + params.lambda;
    let c = params.cost_of(me);
    let (vf, vo) = (params.v_finder, params.v_other);
    let a: [(f64, f64); 2] = [(vf - c, r), (-vf, rl)];
    let b: [(f64, f64); 2] = [(vo, r), (-vo, rl)];
    let ab: [(f64, f64); 4] = [(0.5 * (vf - c), r), (-0.5 * vf, rl), (0.5 * vo, r), (-0.5 * vo, rl)];
    let p: [(f64, f64); 1] = [(1.0, r)];
    let q: [(f64, f64); 1] = [(1.0, rl)];

    let first = |x: &DelayDistribution, y: &DelayDistribution, g: &ExpSum| -> Result<Acc, PayoffError> {
        Ok(match method {
            Method::ClosedForm => first_closed(x, y, g),
            Method::Quadrature => first_quad(x, y, g)?,
        })
    };
    let parts = [
        first(f_me, f_o, &a)?,
        first(f_o, f_me, &b)?,
        ties(f_me, f_o, &ab),
        first(f_me, f_o, &p)?,
        first(f_o, f_me, &p)?,
        ties(f_me, f_o, &p),
        first(f_me, f_o, &q)?,
        first(f_o, f_me, &q)?,
        ties(f_me, f_o, &q),
    ];
    let q_me = parts[6].value;
    let q_o = parts[7].value;
    let q_first = match me {
        Player::One => [q_me, q_o],
        Player::Two => [q_o, q_me],
    };
    Ok(Cycle {
        u_tilde: parts[0].value + parts[1].value + parts[2].value,
        p_tilde: parts[3].value + parts[4].value + parts[5].value,
        q_first,
        q_tie: parts[8].value,
        est_abs_error: parts.iter().map(|p| p.error).fold(0.0, f64::max),
        method,
    })
}

/// Per-cycle expected payoff `Ũ` of player 1.
pub fn tilde_u(f1: &DelayDistribution, f2: &DelayDistribution, params: &GameParams) -> Result<f64, PayoffError> {
    Ok(cycle(Player::One, f1, f2, params, None)?.u_tilde)
}

/// Expected discount factor `P̃` to the next inspection.
pub fn tilde_p(f1: &DelayDistribution, f2: &DelayDistribution, params: &GameParams) -> Result<f64, PayoffError> {
    Ok(cycle(Player::One, f1, f2, params, None)?.p_tilde)
}

/// Continuation factor `Q`.
pub fn continuation_factor(
    f1: &DelayDistribution,
    f2: &DelayDistribution,
    params: &GameParams,
) -> Result<f64, PayoffError> {
    Ok(cycle(Player::One, f1, f2, params, None)?.q_factor())
}

fn ratio(u_tilde: f64, p_tilde: f64) -> Result<f64, PayoffError> {
    if p_tilde > 0.0 {
        Ok(u_tilde / p_tilde)
    } else if u_tilde == 0.0 {
        Ok(0.0)
    } else {
        Err(PayoffError::Inconsistent { u_tilde })
    }
}

/// `Λ = Ũ/P̃` for player 1, with `0` when nobody ever inspects.
pub fn lambda_ratio(
    f1: &DelayDistribution,
    f2: &DelayDistribution,
    params: &GameParams,
) -> Result<f64, PayoffError> {
    lambda_ratio_for(Player::One, f1, f2, params)
}

pub fn lambda_ratio_for(
    me: Player,
    f1: &DelayDistribution,
    f2: &DelayDistribution,
    params: &GameParams,
) -> Result<f64, PayoffError> {
    let cyc = cycle(me, f1, f2, params, None)?;
    ratio(cyc.u_tilde, cyc.p_tilde)
}

fn fixed_point(cyc: &Cycle) -> Result<f64, PayoffError> {
    let q = cyc.q_factor();
    if q >= 1.0 - DIVERGENCE_GAP {
        return Err(PayoffError::Divergent { q });
    }
    Ok(cyc.u_tilde / (1.0 - q))
}

/// Expected payoff `U = Ũ/(1 − Q)` of player 1 when both play stationary laws.
pub fn markov_value(
    f1: &DelayDistribution,
    f2: &DelayDistribution,
    params: &GameParams,
) -> Result<f64, PayoffError> {
    markov_value_for(Player::One, f1, f2, params)
}

pub fn markov_value_for(
    me: Player,
    f1: &DelayDistribution,
    f2: &DelayDistribution,
    params: &GameParams,
) -> Result<f64, PayoffError> {
    fixed_point(&cycle(me, f1, f2, params, None)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PayoffReport {
    pub u_tilde: f64,
    pub p_tilde: f64,
    pub q_factor: f64,
    pub lambda_ratio: f64,
    /// `None` when the fixed point diverges.
    pub fixed_point_value: Option<f64>,
    pub method: Method,
    pub est_abs_error: f64,
}

pub fn payoff_report(
    me: Player,
    f1: &DelayDistribution,
    f2: &DelayDistribution,
    params: &GameParams,
    method: Option<Method>,
) -> Result<PayoffReport, PayoffError> {
    let cyc = cycle(me, f1, f2, params, method)?;
    let fixed_point_value = match fixed_point(&cyc) {
        Ok(v) => Some(v),
        Err(PayoffError::Divergent { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(PayoffReport {
        u_tilde: cyc.u_tilde,
        p_tilde: cyc.p_tilde,
        q_factor: cyc.q_factor(),
        lambda_ratio: ratio(cyc.u_tilde, cyc.p_tilde)?,
        fixed_point_value,
        method: cyc.method,
        est_abs_error: cyc.est_abs_error,
    })
}

/// Result of unrolling the payoff recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Unrolled {
    /// Expected payoff of the first `depth + 1` cycles.
    pub value: f64,
    /// Bound on the payoff of everything after the unrolled cycles.
    pub tail_bound: f64,
    pub depth: u32,
    /// Some branches were cut before `depth` (continuous branches of
    /// history-dependent strategies, or the node cap); they count toward
    /// `tail_bound`.
    pub partial: bool,
    pub nodes: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct UnrollOptions {
    pub player: Player,
    /// Maximum number of tree nodes for strategies that remember more than
    /// the last event.
    pub node_cap: u64,
}

impl Default for UnrollOptions {
    fn default() -> Self {
        UnrollOptions {
            player: Player::One,
            node_cap: 200_000,
        }
    }
}

/// Unrolls the payoff recursion for player 1 to `depth` cycles after `h`,
/// with continuation value 0 beyond.
pub fn evaluate_recursive(
    s1: &Strategy,
    s2: &Strategy,
    h: &History,
    params: &GameParams,
    depth: u32,
) -> Result<Unrolled, PayoffError> {
    evaluate_recursive_with(s1, s2, h, params, depth, UnrollOptions::default())
}

pub fn evaluate_recursive_with(
    s1: &Strategy,
    s2: &Strategy,
    h: &History,
    params: &GameParams,
    depth: u32,
    opts: UnrollOptions,
) -> Result<Unrolled, PayoffError> {
    s1.validate()?;
    s2.validate()?;
    let violations = h.validate();
    if !violations.is_empty() {
        return Err(StrategyError::InvalidHistory(violations).into());
    }
    if s1.memory().max(s2.memory()) <= Memory::LastEvent {
        unroll_by_last_event(s1, s2, h, params, depth, opts.player)
    } else {
        let mut tree = Tree {
            s: [s1, s2],
            params,
            me: opts.player,
            nodes: 0,
            cap: opts.node_cap,
            partial: false,
        };
        let (value, frontier) = tree.visit(h, depth)?;
        let bound = crude_payoff_bound(s1, s2, params, opts.player);
        let tail_bound = if frontier == 0.0 { 0.0 } else { frontier * bound };
        Ok(Unrolled {
            value,
            tail_bound,
            depth,
            partial: tree.partial,
            nodes: tree.nodes,
        })
    }
}

/// Child keys reachable after one inspection, in a fixed order.
const CHILD_KEYS: [LastEvent; 4] = [
    LastEvent::Inspection { attempted: 1, actual: Player::One },
    LastEvent::Inspection { attempted: 2, actual: Player::Two },
    LastEvent::Inspection { attempted: 3, actual: Player::One },
    LastEvent::Inspection { attempted: 3, actual: Player::Two },
];

fn representative(key: LastEvent) -> History {
    match key {
        LastEvent::Start => History::new(),
        LastEvent::Inspection { attempted, actual } => {
            let attempted = if attempted == 3 {
                PlayerSet::BOTH
            } else {
                PlayerSet::only(actual)
            };
            History::new()
                .append_inspection(1.0, attempted, actual.into())
                .expect("single record is valid")
        }
    }
}

/// Exact dynamic programme over the last-event states (the initial history
/// plus four child states).
fn unroll_by_last_event(
    s1: &Strategy,
    s2: &Strategy,
    h: &History,
    params: &GameParams,
    depth: u32,
    me: Player,
) -> Result<Unrolled, PayoffError> {
    const N: usize = 5;
    let mut u = [0.0; N];
    let mut w = [[0.0; N]; N];
    for i in 0..N {
        let hist = if i == 0 { h.clone() } else { representative(CHILD_KEYS[i - 1]) };
        let f1 = s1.respond(&hist, Player::One)?;
        let f2 = s2.respond(&hist, Player::Two)?;
        let cyc = cycle(me, &f1, &f2, params, None)?;
        u[i] = cyc.u_tilde;
        w[i][1] = cyc.q_first[0];
        w[i][2] = cyc.q_first[1];
        w[i][3] = 0.5 * cyc.q_tie;
        w[i][4] = 0.5 * cyc.q_tie;
        let q = cyc.q_factor();
        if q >= 1.0 - DIVERGENCE_GAP {
            return Err(PayoffError::Divergent { q });
        }
    }
    // (I − W)·B = |u| bounds every partial sum of the recursion, not only its limit
    let bound = solve(w, u.map(f64::abs));

    let mut value = [0.0; N];
    for _ in 0..=depth {
        let mut next = [0.0; N];
        for i in 0..N {
            next[i] = u[i] + (0..N).map(|j| w[i][j] * value[j]).sum::<f64>();
        }
        value = next;
    }
    let mut reach = [1.0, 0.0, 0.0, 0.0, 0.0];
    for _ in 0..=depth {
        let mut next = [0.0; N];
        for (i, r) in reach.iter().enumerate() {
            for j in 0..N {
                next[j] += r * w[i][j];
            }
        }
        reach = next;
    }
    let tail: f64 = (0..N).map(|j| reach[j] * bound[j]).sum();
    // the bound is tight, so leave room for rounding in both computations
    let slack = 64.0 * f64::EPSILON * (value[0].abs() + bound.iter().fold(0.0_f64, |m, x| m.max(*x)));
    Ok(Unrolled {
        value: value[0],
        tail_bound: if tail == 0.0 { 0.0 } else { tail + slack },
        depth,
        partial: false,
        nodes: N as u64,
    })
}

/// Gaussian elimination with partial pivoting for `(I − W)·x = u`.
#[allow(clippy::needless_range_loop)]
fn solve<const N: usize>(w: [[f64; N]; N], u: [f64; N]) -> [f64; N] {
    let mut a = [[0.0; N]; N];
    let mut b = u;
    for i in 0..N {
        for j in 0..N {
            a[i][j] = if i == j { 1.0 } else { 0.0 } - w[i][j];
        }
    }
    for col in 0..N {
        let pivot = (col..N)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("nonempty range");
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..N {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = [0.0; N];
    for i in (0..N).rev() {
        let s: f64 = (i + 1..N).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Upper bound of `E[e^{−κS}]` over every history.
fn discount_sup(s: &Strategy, kappa: f64) -> f64 {
    let of_dist = |d: &DelayDistribution| {
        let atoms: f64 = d.atoms().iter().map(|a| a.mass * (-kappa * a.delay).exp()).sum();
        let cont: f64 = d
            .continuous()
            .iter()
            .map(|c| match c {
                Continuous::Exponential { rate, weight } => weight * rate / (rate + kappa),
                Continuous::Law { weight, .. } => *weight,
            })
            .sum();
        atoms + cont
    };
    let det = |tau: f64| (-kappa * tau).exp();
    match s {
        Strategy::Never => 0.0,
        Strategy::Deterministic { tau } => det(*tau),
        Strategy::Exponential { mu } => mu / (mu + kappa),
        Strategy::Stationary { distribution } => of_dist(distribution),
        Strategy::Mixture { components } => components
            .iter()
            .map(|c| c.weight * discount_sup(&c.strategy, kappa))
            .sum(),
        Strategy::Zeno(_) => 1.0,
        Strategy::Reactive(rule) => {
            use crate::strategy::ReactiveRule::*;
            match rule {
                Copy { of } => discount_sup(of, kappa),
                ByLastInspector {
                    initial,
                    after_self,
                    after_other,
                    exponential,
                } => {
                    let least = initial.min(*after_self).min(*after_other);
                    if *exponential {
                        1.0 / (1.0 + kappa * least)
                    } else {
                        det(least)
                    }
                }
                GapScaled { min, .. } => det(*min),
                TieAware {
                    after_tie,
                    otherwise,
                } => det(after_tie.min(*otherwise)),
            }
        }
    }
}

/// `|Ũ| ≤ c + max|v|` every cycle and `Q ≤ 1 − (1 − a)(1 − b)` for
/// independent delays with discount bounds `a`, `b`.
fn crude_payoff_bound(s1: &Strategy, s2: &Strategy, params: &GameParams, me: Player) -> f64 {
    let kappa = params.r + params.lambda;
    let a = discount_sup(s1, kappa);
    let b = discount_sup(s2, kappa);
    let q_sup = 1.0 - (1.0 - a) * (1.0 - b);
    if q_sup >= 1.0 - DIVERGENCE_GAP {
        return f64::INFINITY;
    }
    (params.cost_of(me) + params.v_finder.abs().max(params.v_other.abs())) / (1.0 - q_sup)
}

/// Explicit tree over concrete histories, following atom branches only.
struct Tree<'a> {
    s: [&'a Strategy; 2],
    params: &'a GameParams,
    me: Player,
    nodes: u64,
    cap: u64,
    partial: bool,
}

impl Tree<'_> {
    /// Returns (value, discounted weight reaching the frontier).
    fn visit(&mut self, h: &History, depth: u32) -> Result<(f64, f64), PayoffError> {
        self.nodes += 1;
        let f = [
            self.s[0].respond(h, Player::One)?,
            self.s[1].respond(h, Player::Two)?,
        ];
        let cyc = cycle(self.me, &f[0], &f[1], self.params, None)?;
        let q = cyc.q_factor();
        if depth == 0 {
            return Ok((cyc.u_tilde, q));
        }
        let rl = self.params.r + self.params.lambda;
        let now = h.final_time();
        let mut children: Vec<(f64, History)> = Vec::new();
        for p in Player::BOTH {
            let (mine, theirs) = (&f[p.index()], &f[p.other().index()]);
            for a in mine.atoms() {
                let at = now + a.delay;
                let cont = (-rl * a.delay).exp();
                let tie_mass = theirs.atom_mass_at(a.delay);
                let alone = a.mass * theirs.survival(a.delay) * cont;
                if alone > 0.0 {
                    children.push((alone, h.append_inspection(at, p.into(), p.into())?));
                }
                if tie_mass > 0.0 {
                    let both = 0.5 * a.mass * tie_mass * cont;
                    children.push((both, h.append_inspection(at, PlayerSet::BOTH, p.into())?));
                }
            }
        }
        let followed: f64 = children.iter().map(|(w, _)| w).sum();
        let mut frontier = (q - followed).max(0.0);
        if frontier > 0.0 {
            self.partial = true;
        }
        let mut value = cyc.u_tilde;
        for (weight, child) in children {
            if self.nodes >= self.cap {
                self.partial = true;
                frontier += weight;
                continue;
            }
            let (v, fr) = self.visit(&child, depth - 1)?;
            value += weight * v;
            frontier += weight * fr;
        }
        Ok((value, frontier))
    }
}
