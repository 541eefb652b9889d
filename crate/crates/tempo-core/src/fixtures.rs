//! Small reference processes reused by the test suites and the `selftest`
//! command.

use std::collections::BTreeSet;

use num_traits::One;

use crate::cdf::parse_cdf;
use crate::ratio::{rat_frac, Rat};
use crate::smp::{Smp, SmpKind};

fn labels(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Single-input chain `p0 -> p1 -> p2` with a self-loop on the last state;
/// residence CDFs given as literals. The first state is labelled `start`,
/// the last `done`.
pub fn chain3(prefix: &str, cdfs: &[&str; 3]) -> Smp {
    let mut m = Smp::new(SmpKind::Reactive, vec!["a".into()], vec!["a".into()]);
    let mut ids = Vec::new();
    for (i, lit) in cdfs.iter().enumerate() {
        let lab = match i {
            0 => labels(&["start"]),
            2 => labels(&["done"]),
            _ => BTreeSet::new(),
        };
        ids.push(m.add_state(format!("{prefix}{i}"), parse_cdf(lit).unwrap(), lab));
    }
    m.add_transition(ids[0], 0, Rat::one(), ids[1], 0).unwrap();
    m.add_transition(ids[1], 0, Rat::one(), ids[2], 0).unwrap();
    m.add_transition(ids[2], 0, Rat::one(), ids[2], 0).unwrap();
    m
}

/// One state with `a` and `b` self-loops; the faster-than side of the
/// incomparability example.
pub fn two_input_selfloop(cdf: &str) -> Smp {
    let mut m = Smp::new(
        SmpKind::Reactive,
        vec!["a".into(), "b".into()],
        vec!["a".into(), "b".into()],
    );
    let s = m.add_state("s", parse_cdf(cdf).unwrap(), BTreeSet::new());
    m.add_transition(s, 0, Rat::one(), s, 0).unwrap();
    m.add_transition(s, 1, Rat::one(), s, 1).unwrap();
    m
}

/// Branching copy of the self-loop process: `s0` moves to `s1` on `a` and to
/// `s2` on `b`, both of which then loop. Bisimilar to the one-state process
/// but not equally fast.
pub fn branching_selfloop(cdf: &str) -> Smp {
    let mut m = Smp::new(
        SmpKind::Reactive,
        vec!["a".into(), "b".into()],
        vec!["a".into(), "b".into()],
    );
    let c = parse_cdf::<f64>(cdf).unwrap();
    let s0 = m.add_state("s0", c.clone(), BTreeSet::new());
    let s1 = m.add_state("s1", c.clone(), BTreeSet::new());
    let s2 = m.add_state("s2", c, BTreeSet::new());
    m.add_transition(s0, 0, Rat::one(), s1, 0).unwrap();
    m.add_transition(s0, 1, Rat::one(), s2, 1).unwrap();
    for s in [s1, s2] {
        m.add_transition(s, 0, Rat::one(), s, 0).unwrap();
        m.add_transition(s, 1, Rat::one(), s, 1).unwrap();
    }
    m
}

/// Two self-loop states with exponential residences of the given rates and
/// equal labels; the running simulation-distance example uses rates 4 and 2.
pub fn exp_selfloop_pair(rate1: f64, rate2: f64) -> Smp {
    let mut m = Smp::new(SmpKind::Reactive, vec!["a".into()], vec!["a".into()]);
    let s1 = m.add_state("s1", parse_cdf(&format!("exp({rate1})")).unwrap(), BTreeSet::new());
    let s2 = m.add_state("s2", parse_cdf(&format!("exp({rate2})")).unwrap(), BTreeSet::new());
    m.add_transition(s1, 0, Rat::one(), s1, 0).unwrap();
    m.add_transition(s2, 0, Rat::one(), s2, 0).unwrap();
    m
}

/// Self-loop states with arbitrary residence literals, one state per entry.
pub fn selfloop_states(cdfs: &[&str]) -> Smp {
    let mut m = Smp::new(SmpKind::Reactive, vec!["a".into()], vec!["a".into()]);
    for (i, lit) in cdfs.iter().enumerate() {
        let s = m.add_state(format!("s{i}"), parse_cdf(lit).unwrap(), BTreeSet::new());
        m.add_transition(s, 0, Rat::one(), s, 0).unwrap();
    }
    m
}

/// The half/half memoryless adversary of the incomparability example.
pub fn half_half_scheduler(smp: &Smp) -> crate::smp::Scheduler {
    crate::smp::Scheduler::Memoryless {
        choice: (0..smp.state_count())
            .map(|s| {
                if s == 0 {
                    vec![(rat_frac(1, 2), 0), (rat_frac(1, 2), 1)]
                } else {
                    // committed states keep replaying their branch
                    vec![(Rat::one(), if s == 1 { 0 } else { 1 })]
                }
            })
            .collect(),
    }
}
