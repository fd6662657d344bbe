use opphunt_core::{
    zeno_example_history, CascadeFormula, History, InspectionRecord, Ordinal, Outcome, Play, Player,
    PlayerSet, Segment, Violation,
};
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Step {
    Inspect { gap: f64, who: u8 },
    /// A schedule cascade in the next unit block, finite or closed at its limit.
    Cascade { first: u64, len: Option<u64>, who: u8 },
}

fn step() -> impl Strategy<Value = Step> {
    prop_oneof![
        4 => (1e-6f64..3.0, 0u8..4).prop_map(|(gap, who)| Step::Inspect { gap, who }),
        1 => (1u64..5, prop::option::of(0u64..6), 0u8..2)
            .prop_map(|(first, len, who)| Step::Cascade { first, len, who }),
    ]
}

fn build(steps: &[Step]) -> History {
    let mut h = History::new();
    for s in steps {
        match *s {
            Step::Inspect { gap, who } => {
                let (attempted, actual) = match who {
                    0 => (PlayerSet::only(Player::One), Player::One),
                    1 => (PlayerSet::only(Player::Two), Player::Two),
                    2 => (PlayerSet::BOTH, Player::One),
                    _ => (PlayerSet::BOTH, Player::Two),
                };
                let t = h.final_time() + gap;
                h.push_inspection(t, attempted, actual.into()).unwrap();
            }
            Step::Cascade { first, len, who } => {
                let offset = h.final_time().floor() + 1.0;
                let formula = CascadeFormula::Harmonic { offset };
                let who = if who == 0 { Player::One } else { Player::Two };
                h.push_cascade(formula, first, len.map(|l| first + l), who).unwrap();
                if len.is_none() {
                    h.close_limit_in_place(formula.supremum()).unwrap();
                }
            }
        }
    }
    h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn built_histories_are_valid_and_round_trip(steps in prop::collection::vec(step(), 0..25)) {
        let h = build(&steps);
        prop_assert!(h.validate().is_empty(), "{:?}", h.validate());
        let text = h.to_text();
        let back = History::from_text(&text).unwrap();
        prop_assert_eq!(&back, &h);
        prop_assert_eq!(back.to_text(), text);
    }

    #[test]
    fn plays_round_trip(steps in prop::collection::vec(step(), 0..10), truncated in any::<bool>()) {
        let h = build(&steps);
        let play = Play { history: h, outcome: Outcome::Undiscovered, truncated };
        let back = Play::from_text(&play.to_text()).unwrap();
        prop_assert_eq!(back, play);
    }

    #[test]
    fn limit_indices_are_limits_with_supremum_times(steps in prop::collection::vec(step(), 0..25)) {
        let h = build(&steps);
        let limits = h.limit_indices();
        prop_assert_eq!(&limits[0], &Ordinal::zero());
        for w in limits.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        for l in &limits {
            prop_assert!(l.is_limit());
            prop_assert!(h.time_at(l).is_some());
        }
    }

    #[test]
    fn shifting_a_time_backwards_is_caught(steps in prop::collection::vec(step(), 2..12)) {
        let h = build(&steps);
        let mut segments = h.segments().to_vec();
        let mut changed = false;
        for seg in segments.iter_mut().rev() {
            if let Segment::Explicit(records) = seg {
                if let Some(r) = records.last_mut() {
                    r.time = -1.0;
                    changed = true;
                    break;
                }
            }
        }
        if changed {
            let broken = History::from_segments_unchecked(segments);
            prop_assert!(!broken.validate().is_empty());
        }
    }
}

#[test]
fn example_times_and_limits() {
    let h = zeno_example_history();
    assert!(h.is_valid());
    let idx = |s: &str| s.parse::<Ordinal>().unwrap();
    assert_eq!(h.time_at(&idx("3")), Some(0.75));
    assert_eq!(h.time_at(&idx("w")), Some(1.0));
    assert_eq!(h.time_at(&idx("w + 1")), Some(1.5));
    assert_eq!(h.time_at(&idx("w*2")), Some(2.0));
    assert_eq!(h.limit_indices(), vec![idx("0"), idx("w"), idx("w*2")]);
    assert_eq!(h.alpha_star(), idx("w*2"));
}

#[test]
fn record_at_limit_is_flagged() {
    let bad = History::from_segments_unchecked(vec![Segment::Explicit(vec![InspectionRecord {
        index: Ordinal::omega(),
        time: 1.0,
        attempted: Player::One.into(),
        actual: Player::One.into(),
    }])]);
    assert!(matches!(bad.validate()[0], Violation::RecordAtLimit { .. }));
}

#[test]
fn wrong_limit_time_is_flagged() {
    let h = zeno_example_history();
    let mut segments = h.segments().to_vec();
    if let Segment::Cascade(c) = &mut segments[0] {
        c.limit_time = Some(1.5);
    }
    let bad = History::from_segments_unchecked(segments);
    assert!(bad
        .validate()
        .iter()
        .any(|v| matches!(v, Violation::LimitContinuity { .. })));
    let mut h = History::new();
    h.push_cascade(CascadeFormula::Harmonic { offset: 0.0 }, 1, None, Player::One).unwrap();
    assert!(h.close_limit(1.0 + 1e-6).is_err());
    assert!(h.push_inspection(2.0, Player::One.into(), Player::One.into()).is_err());
}

#[test]
fn tie_records_need_a_single_actual() {
    let h = History::new();
    assert!(h.append_inspection(1.0, PlayerSet::BOTH, PlayerSet::BOTH).is_err());
    assert!(h.append_inspection(1.0, PlayerSet::only(Player::One), Player::Two.into()).is_err());
    assert!(h.append_inspection(1.0, PlayerSet::EMPTY, Player::Two.into()).is_err());
    assert!(h.append_inspection(1.0, PlayerSet::BOTH, Player::Two.into()).is_ok());
}
