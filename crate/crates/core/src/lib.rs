//! Two-player opportunity-hunting games in continuous time with
//! transfinite inspection histories.
//!
//! The crate is organised bottom-up:
//!
//! - [`ordinal`]: Cantor normal form ordinals below ω^ω that index histories.
//! - [`history`]: histories, closed-form cascades, plays and their text form.
//! - [`distribution`] and [`strategy`]: delay laws and strategies mapping
//!   histories to them.
//! - [`engine`]: seeded sampling of plays and realized payoffs.
//! - [`payoff`]: per-cycle quantities, stationary values and unrolled recursion.
//! - [`equilibrium`]: best responses, equilibrium checks and extraction.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod distribution;
pub mod engine;
pub mod equilibrium;
pub mod history;
pub mod ordinal;
pub mod payoff;
pub mod quad;
pub mod strategy;

pub use distribution::{Atom, Continuous, DelayDistribution, DelayLaw, DistributionError, LawSpec};
pub use engine::{
    derive_seed, realized_payoff, sample_play, sample_play_with, simulate_batch, simulate_plays,
    BatchStats, DrawKind, DrawSource, EngineError, GameParams, PlayResult, ScriptedDraws,
    SeededDraws, SimConfig, ZenoDiagnosis, zeno_cost_diagnosis,
};
pub use equilibrium::{
    best_markov_response, best_markov_response_for, extract_markov_eps_best_response,
    grid_symmetric_candidate, probe_nonmarkov_deviations, reactive_battery, verify_mpe,
    BestResponse, DeviationFamily, EquilibriumError, Extraction, ProbeReport, Verdict,
    VerificationReport,
};
pub use history::{
    zeno_example_history, Cascade, CascadeFormula, History, HistoryError, InspectionRecord,
    Outcome, Play, Player, PlayerSet, Segment, Violation,
};
pub use ordinal::{Ordinal, OrdinalError};
pub use payoff::{
    continuation_factor, cycle, evaluate_recursive, lambda_ratio, markov_value, markov_value_for,
    payoff_report, tilde_p, tilde_u, Cycle, Method, PayoffError, PayoffReport, Unrolled,
};
pub use strategy::{Memory, ReactiveRule, Strategy, StrategyError, ZenoSchedule};
