//! Ordinal-indexed inspection histories and plays.
//!
//! A [`History`] stores its inspection times as a list of segments. Explicit
//! segments hold materialized [`InspectionRecord`]s; cascade segments hold a
//! closed-form time schedule `n ↦ u_n` that may run through infinitely many
//! successor indices and end at a limit ordinal whose time is the schedule's
//! supremum. This is how a history such as "inspect at 1/2, 2/3, 3/4, … and
//! then at 3/2, 5/3, …" is kept finite in memory.
//!
//! Index bookkeeping: the empty history has `α* = 0` and `t₀ = 0`. Every
//! inspection sits at the successor of the previous final index, and limit
//! indices are reached only by closing a cascade.

use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ordinal::Ordinal;

/// Tolerance used when matching a stated limit time against a cascade supremum.
pub const LIMIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::One, Player::Two];

    pub fn other(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    /// 0 for player 1, 1 for player 2.
    pub fn index(self) -> usize {
        match self {
            Player::One => 0,
            Player::Two => 1,
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Player> {
        match n {
            1 => Some(Player::One),
            2 => Some(Player::Two),
            _ => None,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// A subset of `{1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PlayerSet(u8);

impl PlayerSet {
    pub const EMPTY: PlayerSet = PlayerSet(0);
    pub const BOTH: PlayerSet = PlayerSet(0b11);

    pub fn only(p: Player) -> Self {
        PlayerSet(1 << p.index())
    }

    pub fn contains(self, p: Player) -> bool {
        self.0 & (1 << p.index()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, other: PlayerSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// The single member, if the set is a singleton.
    pub fn single(self) -> Option<Player> {
        match self.0 {
            0b01 => Some(Player::One),
            0b10 => Some(Player::Two),
            _ => None,
        }
    }

    pub fn iter(self) -> impl Iterator<Item = Player> {
        Player::BOTH.into_iter().filter(move |p| self.contains(*p))
    }

    fn parse(s: &str) -> Option<PlayerSet> {
        if s == "-" {
            return Some(PlayerSet::EMPTY);
        }
        let mut set = PlayerSet::EMPTY;
        for part in s.split(',') {
            let p = Player::from_number(part.trim().parse().ok()?)?;
            if set.contains(p) {
                return None;
            }
            set.0 |= 1 << p.index();
        }
        Some(set)
    }
}

impl From<Player> for PlayerSet {
    fn from(p: Player) -> Self {
        PlayerSet::only(p)
    }
}

impl fmt::Display for PlayerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("-");
        }
        let parts: Vec<String> = self.iter().map(|p| p.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// One inspection: the players who attempted it and the one who actually inspected.
#[derive(Debug, Clone, PartialEq)]
pub struct InspectionRecord {
    pub index: Ordinal,
    pub time: f64,
    pub attempted: PlayerSet,
    pub actual: PlayerSet,
}

impl InspectionRecord {
    pub fn actual_player(&self) -> Option<Player> {
        self.actual.single()
    }

    pub fn was_tie(&self) -> bool {
        self.attempted.len() == 2
    }
}

/// Closed-form time schedules for cascades.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "formula", rename_all = "snake_case")]
pub enum CascadeFormula {
    /// `u_n = offset + n/(n+1)`; `u_0 = offset`, supremum `offset + 1`.
    Harmonic { offset: f64 },
}

impl CascadeFormula {
    pub fn id(&self) -> &'static str {
        match self {
            CascadeFormula::Harmonic { .. } => "harmonic",
        }
    }

    pub fn time(&self, step: u64) -> f64 {
        match *self {
            CascadeFormula::Harmonic { offset } => {
                let n = step as f64;
                offset + n / (n + 1.0)
            }
        }
    }

    pub fn supremum(&self) -> f64 {
        match *self {
            CascadeFormula::Harmonic { offset } => offset + 1.0,
        }
    }

    /// Smallest step `n` with `time(n) >= t`. `t` must be below the supremum.
    pub fn first_step_at_or_after(&self, t: f64) -> u64 {
        match *self {
            CascadeFormula::Harmonic { offset } => {
                let f = (t - offset).max(0.0);
                let mut n = if f < 1.0 {
                    (f / (1.0 - f)).ceil().min(u64::MAX as f64 / 4.0) as u64
                } else {
                    u64::MAX / 4
                };
                while n > 0 && self.time(n - 1) >= t {
                    n -= 1;
                }
                while self.time(n) < t {
                    n += 1;
                }
                n
            }
        }
    }

    fn is_well_formed(&self) -> bool {
        match *self {
            CascadeFormula::Harmonic { offset } => offset.is_finite() && offset >= 0.0,
        }
    }
}

/// A run of inspections by one schedule, starting at step `first_step`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cascade {
    pub formula: CascadeFormula,
    /// Index of the record at `first_step`.
    pub start: Ordinal,
    pub first_step: u64,
    /// `None` for a run through infinitely many steps.
    pub last_step: Option<u64>,
    pub attempted: PlayerSet,
    pub actual: PlayerSet,
    /// Time assigned to the limit index once the run has been closed.
    pub limit_time: Option<f64>,
}

impl Cascade {
    pub fn index_of_step(&self, step: u64) -> Ordinal {
        self.start.plus_finite(step - self.first_step)
    }

    /// The limit index reached by an infinite run.
    pub fn limit_index(&self) -> Ordinal {
        self.start.next_limit()
    }

    pub fn is_infinite(&self) -> bool {
        self.last_step.is_none()
    }

    pub fn is_open(&self) -> bool {
        self.is_infinite() && self.limit_time.is_none()
    }

    /// The step stored at `index`, if `index` is one of this run's records.
    fn step_at(&self, index: &Ordinal) -> Option<u64> {
        let (base, start_n) = self.start.split_finite();
        let (ibase, n) = index.split_finite();
        if ibase != base || n < start_n {
            return None;
        }
        let step = self.first_step + (n - start_n);
        match self.last_step {
            Some(last) if step > last => None,
            _ => Some(step),
        }
    }

    /// Records of a finite run, materialized.
    pub fn records(&self) -> Option<impl Iterator<Item = InspectionRecord> + '_> {
        let last = self.last_step?;
        Some((self.first_step..=last).map(move |n| InspectionRecord {
            index: self.index_of_step(n),
            time: self.formula.time(n),
            attempted: self.attempted,
            actual: self.actual,
        }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    Explicit(Vec<InspectionRecord>),
    Cascade(Cascade),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HistoryError {
    #[error("inspection time {time} is not after the current final time {current}")]
    NonIncreasingTime { time: f64, current: f64 },
    #[error("inspection time {0} is not a finite non-negative number")]
    InvalidTime(f64),
    #[error("attempted set is empty")]
    EmptyAttempted,
    #[error("actual inspector set {actual} is not a singleton subset of {attempted}")]
    BadActual { attempted: PlayerSet, actual: PlayerSet },
    #[error("the history ends in an open cascade; close it before extending")]
    OpenCascade,
    #[error("the history does not end in an open cascade")]
    NotOpenCascade,
    #[error("limit time {limit_time} differs from the cascade supremum {supremum}")]
    SupremumMismatch { limit_time: f64, supremum: f64 },
    #[error("invalid cascade: {0}")]
    InvalidCascade(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// A broken history invariant, located at an ordinal index.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// A record sits at a limit index; inspections happen only at successors.
    RecordAtLimit { index: Ordinal },
    /// A record index does not follow the previous final index.
    IndexGap { index: Ordinal, expected: Ordinal },
    InvalidTime { index: Ordinal, time: f64 },
    NonIncreasingTime { index: Ordinal, time: f64, previous: f64 },
    EmptyAttempted { index: Ordinal },
    BadActual { index: Ordinal },
    /// The time at a limit index is not the supremum of the earlier times.
    LimitContinuity { index: Ordinal, stated: f64, supremum: f64 },
    UnclosedCascade { index: Ordinal },
    MalformedCascade { index: Ordinal, reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RecordAtLimit { index } => {
                write!(f, "record at limit index {index}")
            }
            Violation::IndexGap { index, expected } => {
                write!(f, "record index {index} where {expected} was expected")
            }
            Violation::InvalidTime { index, time } => write!(f, "invalid time {time} at {index}"),
            Violation::NonIncreasingTime {
                index,
                time,
                previous,
            } => write!(f, "time {time} at {index} does not exceed {previous}"),
            Violation::EmptyAttempted { index } => write!(f, "empty attempted set at {index}"),
            Violation::BadActual { index } => {
                write!(f, "actual set at {index} is not a singleton subset of attempted")
            }
            Violation::LimitContinuity {
                index,
                stated,
                supremum,
            } => write!(
                f,
                "limit continuity broken at {index}: stated {stated}, supremum {supremum}"
            ),
            Violation::UnclosedCascade { index } => {
                write!(f, "cascade reaching {index} was never closed")
            }
            Violation::MalformedCascade { index, reason } => {
                write!(f, "malformed cascade at {index}: {reason}")
            }
        }
    }
}

/// An inspection history `⟨α*, {t_α}_{α ≤ α*}, ι⟩`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    segments: Vec<Segment>,
}

impl History {
    /// The empty history: `α* = 0`, `t₀ = 0`.
    pub fn new() -> Self {
        Self::default()
    }

    /// Wraps raw segments without checking anything; see [`History::validate`].
    pub fn from_segments_unchecked(segments: Vec<Segment>) -> Self {
        History { segments }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// True when the last segment is an infinite cascade awaiting its limit.
    pub fn is_open(&self) -> bool {
        matches!(self.segments.last(), Some(Segment::Cascade(c)) if c.is_open())
    }

    /// Final index and its time. For an open cascade this is the pending limit
    /// index and the schedule supremum.
    fn tail(&self) -> (Ordinal, f64) {
        for seg in self.segments.iter().rev() {
            match seg {
                Segment::Explicit(records) => {
                    if let Some(r) = records.last() {
                        return (r.index.clone(), r.time);
                    }
                }
                Segment::Cascade(c) => {
                    return match c.last_step {
                        Some(last) => (c.index_of_step(last), c.formula.time(last)),
                        None => (
                            c.limit_index(),
                            c.limit_time.unwrap_or_else(|| c.formula.supremum()),
                        ),
                    };
                }
            }
        }
        (Ordinal::zero(), 0.0)
    }

    pub fn alpha_star(&self) -> Ordinal {
        self.tail().0
    }

    /// `t_{α*}`.
    pub fn final_time(&self) -> f64 {
        self.tail().1
    }

    /// Number of materialized explicit records plus finite cascade steps.
    /// Infinite cascades count as `u64::MAX`.
    pub fn inspection_count(&self) -> u64 {
        let mut n: u64 = 0;
        for seg in &self.segments {
            let k = match seg {
                Segment::Explicit(r) => r.len() as u64,
                Segment::Cascade(c) => match c.last_step {
                    Some(last) => last - c.first_step + 1,
                    None => return u64::MAX,
                },
            };
            n = n.saturating_add(k);
        }
        n
    }

    /// The record at `α*`, when `α*` is a successor.
    pub fn last_record(&self) -> Option<InspectionRecord> {
        match self.segments.last()? {
            Segment::Explicit(records) => records.last().cloned(),
            Segment::Cascade(c) => {
                let last = c.last_step?;
                Some(InspectionRecord {
                    index: c.index_of_step(last),
                    time: c.formula.time(last),
                    attempted: c.attempted,
                    actual: c.actual,
                })
            }
        }
    }

    /// Time of the index just before `α*`, when `α*` is a successor.
    pub fn previous_time(&self) -> Option<f64> {
        let prev = self.alpha_star().predecessor()?;
        self.time_at(&prev)
    }

    /// `t_α` for any `α ≤ α*`, or `None` outside the history.
    pub fn time_at(&self, index: &Ordinal) -> Option<f64> {
        if index.is_zero() {
            return Some(0.0);
        }
        for seg in &self.segments {
            match seg {
                Segment::Explicit(records) => {
                    if let Ok(i) = records.binary_search_by(|r| r.index.cmp(index)) {
                        return Some(records[i].time);
                    }
                }
                Segment::Cascade(c) => {
                    if let Some(step) = c.step_at(index) {
                        return Some(c.formula.time(step));
                    }
                    if c.is_infinite() && &c.limit_index() == index {
                        return c.limit_time;
                    }
                }
            }
        }
        None
    }

    /// All limit indices `≤ α*` (0 and every closed cascade limit).
    pub fn limit_indices(&self) -> Vec<Ordinal> {
        let mut out = vec![Ordinal::zero()];
        for seg in &self.segments {
            if let Segment::Cascade(c) = seg {
                if c.is_infinite() && c.limit_time.is_some() {
                    out.push(c.limit_index());
                }
            }
        }
        out
    }

    /// Iterates over materialized records (explicit and finite cascade steps).
    pub fn records(&self) -> impl Iterator<Item = InspectionRecord> + '_ {
        self.segments.iter().flat_map(|seg| -> Box<dyn Iterator<Item = InspectionRecord> + '_> {
            match seg {
                Segment::Explicit(records) => Box::new(records.iter().cloned()),
                Segment::Cascade(c) => match c.records() {
                    Some(it) => Box::new(it),
                    None => Box::new(std::iter::empty()),
                },
            }
        })
    }

    /// Appends one inspection at absolute `time`, returning the extended history.
    pub fn append_inspection(
        &self,
        time: f64,
        attempted: PlayerSet,
        actual: PlayerSet,
    ) -> Result<History, HistoryError> {
        let mut next = self.clone();
        next.push_inspection(time, attempted, actual)?;
        Ok(next)
    }

    /// In-place form of [`History::append_inspection`].
    pub fn push_inspection(
        &mut self,
        time: f64,
        attempted: PlayerSet,
        actual: PlayerSet,
    ) -> Result<(), HistoryError> {
        if self.is_open() {
            return Err(HistoryError::OpenCascade);
        }
        if !time.is_finite() || time < 0.0 {
            return Err(HistoryError::InvalidTime(time));
        }
        let (alpha, current) = self.tail();
        if time <= current {
            return Err(HistoryError::NonIncreasingTime { time, current });
        }
        if attempted.is_empty() {
            return Err(HistoryError::EmptyAttempted);
        }
        if actual.single().is_none() || !actual.is_subset(attempted) {
            return Err(HistoryError::BadActual { attempted, actual });
        }
        let record = InspectionRecord {
            index: alpha.successor(),
            time,
            attempted,
            actual,
        };
        match self.segments.last_mut() {
            Some(Segment::Explicit(records)) => records.push(record),
            _ => self.segments.push(Segment::Explicit(vec![record])),
        }
        Ok(())
    }

    /// Appends a run of schedule steps `first_step ..= last_step` (or an open
    /// infinite run when `last_step` is `None`) by a single inspector.
    pub fn push_cascade(
        &mut self,
        formula: CascadeFormula,
        first_step: u64,
        last_step: Option<u64>,
        inspector: Player,
    ) -> Result<(), HistoryError> {
        if self.is_open() {
            return Err(HistoryError::OpenCascade);
        }
        if !formula.is_well_formed() {
            return Err(HistoryError::InvalidCascade(format!("{formula:?}")));
        }
        if first_step == 0 || last_step.is_some_and(|l| l < first_step) {
            return Err(HistoryError::InvalidCascade(format!(
                "step range {first_step}..{last_step:?}"
            )));
        }
        let (alpha, current) = self.tail();
        let time = formula.time(first_step);
        if time <= current {
            return Err(HistoryError::NonIncreasingTime { time, current });
        }
        self.segments.push(Segment::Cascade(Cascade {
            formula,
            start: alpha.successor(),
            first_step,
            last_step,
            attempted: inspector.into(),
            actual: inspector.into(),
            limit_time: None,
        }));
        Ok(())
    }

    /// Places the limit index above an open cascade at `limit_time`, which
    /// must equal the schedule supremum within [`LIMIT_TOLERANCE`].
    pub fn close_limit(&self, limit_time: f64) -> Result<History, HistoryError> {
        let mut next = self.clone();
        next.close_limit_in_place(limit_time)?;
        Ok(next)
    }

    pub fn close_limit_in_place(&mut self, limit_time: f64) -> Result<(), HistoryError> {
        let Some(Segment::Cascade(c)) = self.segments.last_mut() else {
            return Err(HistoryError::NotOpenCascade);
        };
        if !c.is_open() {
            return Err(HistoryError::NotOpenCascade);
        }
        let supremum = c.formula.supremum();
        if !limit_time.is_finite() || (limit_time - supremum).abs() > LIMIT_TOLERANCE {
            return Err(HistoryError::SupremumMismatch {
                limit_time,
                supremum,
            });
        }
        c.limit_time = Some(limit_time);
        Ok(())
    }

    /// Checks every history invariant and reports each failure.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut alpha = Ordinal::zero();
        let mut time = 0.0_f64;
        for (si, seg) in self.segments.iter().enumerate() {
            match seg {
                Segment::Explicit(records) => {
                    for r in records {
                        check_record(r, &alpha, time, &mut out);
                        alpha = r.index.clone();
                        time = r.time;
                    }
                }
                Segment::Cascade(c) => {
                    let expected = alpha.successor();
                    if c.start != expected {
                        out.push(Violation::IndexGap {
                            index: c.start.clone(),
                            expected,
                        });
                    }
                    if !c.formula.is_well_formed() {
                        out.push(Violation::MalformedCascade {
                            index: c.start.clone(),
                            reason: format!("bad formula {:?}", c.formula),
                        });
                    }
                    if c.first_step == 0 || c.last_step.is_some_and(|l| l < c.first_step) {
                        out.push(Violation::MalformedCascade {
                            index: c.start.clone(),
                            reason: "empty or zero-based step range".into(),
                        });
                    }
                    if c.attempted.is_empty() {
                        out.push(Violation::EmptyAttempted {
                            index: c.start.clone(),
                        });
                    }
                    if c.actual.single().is_none() || !c.actual.is_subset(c.attempted) {
                        out.push(Violation::BadActual {
                            index: c.start.clone(),
                        });
                    }
                    let first = c.formula.time(c.first_step);
                    if first <= time {
                        out.push(Violation::NonIncreasingTime {
                            index: c.start.clone(),
                            time: first,
                            previous: time,
                        });
                    }
                    match (c.last_step, c.limit_time) {
                        (Some(last), None) => {
                            alpha = c.index_of_step(last);
                            time = c.formula.time(last);
                        }
                        (Some(_), Some(_)) => out.push(Violation::MalformedCascade {
                            index: c.start.clone(),
                            reason: "finite run carries a limit time".into(),
                        }),
                        (None, None) => {
                            out.push(Violation::UnclosedCascade {
                                index: c.limit_index(),
                            });
                            if si + 1 != self.segments.len() {
                                // nothing after an open run can be indexed
                                break;
                            }
                        }
                        (None, Some(stated)) => {
                            let supremum = c.formula.supremum();
                            if !stated.is_finite() || (stated - supremum).abs() > LIMIT_TOLERANCE {
                                out.push(Violation::LimitContinuity {
                                    index: c.limit_index(),
                                    stated,
                                    supremum,
                                });
                            }
                            alpha = c.limit_index();
                            time = stated;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Line-oriented text form; see the crate README for the layout.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Explicit(records) => {
                    for r in records {
                        let _ = writeln!(
                            out,
                            "{}\t{}\t{}\t{}",
                            r.index, r.time, r.attempted, r.actual
                        );
                    }
                }
                Segment::Cascade(c) => {
                    let CascadeFormula::Harmonic { offset } = c.formula;
                    let last = c.last_step.map_or("inf".to_string(), |l| l.to_string());
                    let (limit_index, limit_time) = match (c.last_step, c.limit_time) {
                        (None, Some(t)) => (c.limit_index().to_string(), t.to_string()),
                        (None, None) => (c.limit_index().to_string(), "-".to_string()),
                        (Some(_), Some(t)) => ("-".to_string(), t.to_string()),
                        (Some(_), None) => ("-".to_string(), "-".to_string()),
                    };
                    let _ = writeln!(
                        out,
                        "CASCADE\t{}\toffset={};start={};first={};last={};attempted={};actual={}\t{}\t{}",
                        c.formula.id(),
                        offset,
                        c.start,
                        c.first_step,
                        last,
                        c.attempted,
                        c.actual,
                        limit_index,
                        limit_time
                    );
                }
            }
        }
        out
    }

    /// Parses the text form. Blank lines and lines starting with `#` are
    /// skipped; the result is not validated.
    pub fn from_text(text: &str) -> Result<History, HistoryError> {
        let mut segments: Vec<Segment> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            match parse_history_line(line).map_err(|reason| HistoryError::Parse {
                line: i + 1,
                reason,
            })? {
                Some(Segment::Explicit(mut records)) => match segments.last_mut() {
                    Some(Segment::Explicit(prev)) => prev.append(&mut records),
                    _ => segments.push(Segment::Explicit(records)),
                },
                Some(seg) => segments.push(seg),
                None => {
                    return Err(HistoryError::Parse {
                        line: i + 1,
                        reason: "unexpected OUTCOME line in a history".into(),
                    })
                }
            }
        }
        Ok(History { segments })
    }
}

fn check_record(r: &InspectionRecord, alpha: &Ordinal, time: f64, out: &mut Vec<Violation>) {
    if r.index.is_limit() {
        out.push(Violation::RecordAtLimit {
            index: r.index.clone(),
        });
    } else if r.index != alpha.successor() {
        out.push(Violation::IndexGap {
            index: r.index.clone(),
            expected: alpha.successor(),
        });
    }
    if !r.time.is_finite() || r.time < 0.0 {
        out.push(Violation::InvalidTime {
            index: r.index.clone(),
            time: r.time,
        });
    } else if r.time <= time {
        out.push(Violation::NonIncreasingTime {
            index: r.index.clone(),
            time: r.time,
            previous: time,
        });
    }
    if r.attempted.is_empty() {
        out.push(Violation::EmptyAttempted {
            index: r.index.clone(),
        });
    }
    if r.actual.single().is_none() || !r.actual.is_subset(r.attempted) {
        out.push(Violation::BadActual {
            index: r.index.clone(),
        });
    }
}

/// `Ok(None)` marks an OUTCOME line.
fn parse_history_line(line: &str) -> Result<Option<Segment>, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    match fields.first().copied() {
        Some("OUTCOME") => Ok(None),
        Some("CASCADE") => parse_cascade(&fields).map(|c| Some(Segment::Cascade(c))),
        _ => {
            let [index, time, attempted, actual] = fields[..] else {
                return Err(format!("expected 4 tab-separated fields, got {}", fields.len()));
            };
            let record = InspectionRecord {
                index: index.parse().map_err(|e| format!("{e}"))?,
                time: parse_time(time)?,
                attempted: PlayerSet::parse(attempted)
                    .ok_or_else(|| format!("bad player set {attempted:?}"))?,
                actual: PlayerSet::parse(actual).ok_or_else(|| format!("bad player set {actual:?}"))?,
            };
            Ok(Some(Segment::Explicit(vec![record])))
        }
    }
}

fn parse_time(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("bad time {s:?}"))
}

fn parse_cascade(fields: &[&str]) -> Result<Cascade, String> {
    let [_, formula_id, params, limit_index, limit_time] = fields[..] else {
        return Err(format!("CASCADE expects 5 fields, got {}", fields.len()));
    };
    if formula_id != "harmonic" {
        return Err(format!("unknown cascade formula {formula_id:?}"));
    }
    let mut offset = None;
    let mut start = None;
    let mut first = None;
    let mut last = None;
    let mut attempted = None;
    let mut actual = None;
    for kv in params.split(';') {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| format!("bad cascade parameter {kv:?}"))?;
        match k {
            "offset" => offset = Some(parse_time(v)?),
            "start" => start = Some(v.parse::<Ordinal>().map_err(|e| e.to_string())?),
            "first" => first = Some(v.parse::<u64>().map_err(|e| e.to_string())?),
            "last" => {
                last = Some(match v {
                    "inf" => None,
                    v => Some(v.parse::<u64>().map_err(|e| e.to_string())?),
                })
            }
            "attempted" => attempted = PlayerSet::parse(v),
            "actual" => actual = PlayerSet::parse(v),
            other => return Err(format!("unknown cascade parameter {other:?}")),
        }
    }
    let missing = |name: &str| format!("cascade parameter {name} missing or malformed");
    let cascade = Cascade {
        formula: CascadeFormula::Harmonic {
            offset: offset.ok_or_else(|| missing("offset"))?,
        },
        start: start.ok_or_else(|| missing("start"))?,
        first_step: first.ok_or_else(|| missing("first"))?,
        last_step: last.ok_or_else(|| missing("last"))?,
        attempted: attempted.ok_or_else(|| missing("attempted"))?,
        actual: actual.ok_or_else(|| missing("actual"))?,
        limit_time: match limit_time {
            "-" => None,
            t => Some(parse_time(t)?),
        },
    };
    if limit_index != "-" {
        let stated: Ordinal = limit_index.parse().map_err(|e: crate::ordinal::OrdinalError| e.to_string())?;
        if stated != cascade.limit_index() || cascade.last_step.is_some() {
            return Err(format!(
                "cascade limit index {stated} does not match its start {}",
                cascade.start
            ));
        }
    }
    Ok(cascade)
}

/// The two-cascade history `1/2, 2/3, 3/4, … (limit 1), 3/2, 5/3, … (limit 2)`
/// by player 1, with `α* = ω·2`.
pub fn zeno_example_history() -> History {
    let mut h = History::new();
    for (offset, limit) in [(0.0, 1.0), (1.0, 2.0)] {
        h.push_cascade(CascadeFormula::Harmonic { offset }, 1, None, Player::One)
            .expect("fixture cascade");
        h.close_limit_in_place(limit).expect("fixture limit");
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Discovered { by: Player, at: f64 },
    Undiscovered,
}

/// A complete or truncated course of play.
#[derive(Debug, Clone, PartialEq)]
pub struct Play {
    pub history: History,
    pub outcome: Outcome,
    /// Set when the sampler stopped at its horizon or event budget.
    pub truncated: bool,
}

impl Play {
    /// History violations plus any mismatch between the outcome and the final record.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = self.history.validate();
        if let Outcome::Discovered { by, at } = self.outcome {
            let index = self.history.alpha_star();
            match self.history.last_record() {
                Some(r) if r.actual == PlayerSet::only(by) && r.time == at => {}
                _ => out.push(Violation::BadActual { index }),
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = self.history.to_text();
        match self.outcome {
            Outcome::Discovered { by, at } => {
                let _ = writeln!(out, "OUTCOME\tdiscovered\t{by}\t{at}\t{}", self.truncated);
            }
            Outcome::Undiscovered => {
                let _ = writeln!(out, "OUTCOME\tundiscovered\t-\t-\t{}", self.truncated);
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Play, HistoryError> {
        let mut body = String::new();
        let mut outcome_line = None;
        for (i, line) in text.lines().enumerate() {
            if line.starts_with("OUTCOME\t") {
                if outcome_line.is_some() {
                    return Err(HistoryError::Parse {
                        line: i + 1,
                        reason: "duplicate OUTCOME line".into(),
                    });
                }
                outcome_line = Some((i + 1, line));
            } else if outcome_line.is_some() && !line.trim().is_empty() {
                return Err(HistoryError::Parse {
                    line: i + 1,
                    reason: "content after OUTCOME line".into(),
                });
            } else {
                body.push_str(line);
                body.push('\n');
            }
        }
        let (line, outcome) = outcome_line.ok_or(HistoryError::Parse {
            line: text.lines().count(),
            reason: "missing OUTCOME line".into(),
        })?;
        let perr = |reason: String| HistoryError::Parse { line, reason };
        let fields: Vec<&str> = outcome.split('\t').collect();
        let [_, kind, by, at, truncated] = fields[..] else {
            return Err(perr("OUTCOME expects 5 fields".into()));
        };
        let truncated = truncated
            .parse::<bool>()
            .map_err(|_| perr(format!("bad truncated flag {truncated:?}")))?;
        let outcome = match kind {
            "discovered" => Outcome::Discovered {
                by: by
                    .parse::<u8>()
                    .ok()
                    .and_then(Player::from_number)
                    .ok_or_else(|| perr(format!("bad player {by:?}")))?,
                at: parse_time(at).map_err(perr)?,
            },
            "undiscovered" => Outcome::Undiscovered,
            other => return Err(perr(format!("unknown outcome {other:?}"))),
        };
        Ok(Play {
            history: History::from_text(&body)?,
            outcome,
            truncated,
        })
    }
}
