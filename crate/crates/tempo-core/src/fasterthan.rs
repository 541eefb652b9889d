//! The trace-based faster-than preorder: exact decision procedure for
//! unambiguous generative processes, time-bounded additive approximation for
//! reactive ones, and the trace logic that characterises the preorder.
//!
//! The general problem is undecidable, so the reactive route is an
//! approximation by construction: CDF comparisons run on a grid and the
//! scheduler quantifiers range over enumerated deterministic schedulers. The
//! verdict carries that caveat in its `method` tag.

use std::collections::BTreeSet;

use num_traits::Zero;
use thiserror::Error;

use crate::accel::{eps_faster_numeric, GridSpec};
use crate::cdf::Cdf;
use crate::ratio::{rat_to_f64, Rat};
use crate::smp::{
    cylinder_prob, enumerate_schedulers, Scheduler, Smp, SmpError, SmpKind, TimeBoundedCylinder,
};

#[derive(Debug, Error, PartialEq)]
pub enum FtError {
    #[error(transparent)]
    Smp(#[from] SmpError),
    #[error("the decision procedure requires a generative process")]
    NotGenerative,
    #[error("the decision procedure requires an unambiguous process")]
    NotUnambiguous,
    #[error("no tail bound available: {0}")]
    UnsupportedClass(String),
}

/// Each (state, output) has at most one successor with positive
/// probability.
pub fn is_unambiguous(smp: &Smp) -> Result<bool, FtError> {
    if !smp.is_generative() {
        return Err(FtError::NotGenerative);
    }
    for s in 0..smp.state_count() {
        for out in 0..smp.outputs.len() {
            let successors: BTreeSet<usize> = smp
                .row(s, 0)
                .iter()
                .filter(|(p, _, b)| !p.is_zero() && *b == out)
                .map(|(_, dst, _)| *dst)
                .collect();
            if successors.len() > 1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Unique successor map of an unambiguous process: `(probability,
/// successor)` of the single positive transition emitting `out`, if any.
fn step(smp: &Smp, s: usize, out: usize) -> Option<(Rat, usize)> {
    smp.row(s, 0)
        .iter()
        .find(|(p, _, b)| !p.is_zero() && *b == out)
        .map(|(p, dst, _)| (p.clone(), *dst))
}

/// `p_f * F(t) >= p_g * G(t)` for all `t`, decided by exact mass comparison
/// at infinity plus the layered grid check (mixture scaling reuses the
/// analytic endpoint and slope reasoning).
fn scaled_dominates(
    p_f: &Rat,
    chain_f: &[Cdf<f64>],
    p_g: &Rat,
    chain_g: &[Cdf<f64>],
    grid: &GridSpec<f64>,
) -> bool {
    if p_g.is_zero() {
        return true;
    }
    if p_f < p_g {
        return false; // limits: total masses compare exactly
    }
    let scaled = |p: &Rat, chain: &[Cdf<f64>]| -> Cdf<f64> {
        let conv = Cdf::convolve_all(chain.iter().cloned()).simplified();
        Cdf::Mixture(vec![(rat_to_f64(p), conv)])
    };
    eps_faster_numeric(&scaled(p_f, chain_f), &scaled(p_g, chain_g), 1.0, grid)
}

/// Decides `u0 ⪯ v0` for unambiguous generative processes: cylinder
/// domination for every word up to the pair bound `|S_U|·|S_V|`, plus the
/// same for every common loop. Exponential in the bound; intended for desk
/// scale.
pub fn faster_than_unambiguous(
    mu: &Smp,
    mv: &Smp,
    u0: usize,
    v0: usize,
    grid: &GridSpec<f64>,
) -> Result<bool, FtError> {
    if !is_unambiguous(mu)? {
        return Err(FtError::NotUnambiguous);
    }
    if !is_unambiguous(mv)? {
        return Err(FtError::NotUnambiguous);
    }
    if mu.outputs != mv.outputs {
        return Err(FtError::Smp(SmpError::KindMismatch(
            "faster-than comparison requires identical output alphabets".into(),
        )));
    }
    let bound = mu.state_count() * mv.state_count();
    // phase 1: all words up to the bound from the roots
    let walk = WordWalk { mu, mv, u0, v0, grid };
    if !walk.words_dominated(u0, v0, bound, &mut Vec::new())? {
        return Ok(false);
    }
    // phase 2: loop triples (p1, p2, v): pairs reachable by a common word,
    // with v looping both back; deduplicated before checking
    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    collect_common_pairs(mu, mv, u0, v0, bound, &mut Vec::new(), &mut pairs);
    let mut triples: BTreeSet<(usize, usize, Vec<usize>)> = BTreeSet::new();
    for &(p1, p2) in &pairs {
        let mut loops: Vec<Vec<usize>> = Vec::new();
        collect_loops(mu, mv, p1, p2, p1, p2, bound, &mut Vec::new(), &mut loops);
        for lp in loops {
            triples.insert((p1, p2, lp));
        }
    }
    for (p1, p2, lp) in triples {
        if !single_word_dominated(mu, mv, p1, p2, &lp, grid) {
            return Ok(false);
        }
    }
    Ok(true)
}

struct WordWalk<'a> {
    mu: &'a Smp,
    mv: &'a Smp,
    u0: usize,
    v0: usize,
    grid: &'a GridSpec<f64>,
}

impl WordWalk<'_> {
    fn words_dominated(
        &self,
        u: usize,
        v: usize,
        depth_left: usize,
        word: &mut Vec<usize>,
    ) -> Result<bool, FtError> {
        if depth_left == 0 {
            return Ok(true);
        }
        for out in 0..self.mv.outputs.len() {
            if let Some((_, v_next)) = step(self.mv, v, out) {
                word.push(out);
                // compare this whole word's cylinders from the roots
                if !single_word_dominated(self.mu, self.mv, self.u0, self.v0, word, self.grid) {
                    word.pop();
                    return Ok(false);
                }
                // descend further only where the U side is also defined;
                // otherwise the U probability is zero for every extension
                // and every V-positive extension breaks domination
                if let Some((_, u_next)) = step(self.mu, u, out) {
                    if !self.words_dominated(u_next, v_next, depth_left - 1, word)? {
                        word.pop();
                        return Ok(false);
                    }
                } else if (0..self.mv.outputs.len()).any(|o| step(self.mv, v_next, o).is_some())
                    && depth_left > 1
                {
                    word.pop();
                    return Ok(false);
                }
                word.pop();
            }
        }
        Ok(true)
    }
}

fn path_data(smp: &Smp, start: usize, word: &[usize]) -> Option<(Rat, Vec<Cdf<f64>>)> {
    let mut prob = Rat::from_integer(1.into());
    let mut chain = Vec::new();
    let mut s = start;
    for &out in word {
        let (p, next) = step(smp, s, out)?;
        prob *= p;
        chain.push(smp.residence(s).clone());
        s = next;
    }
    Some((prob, chain))
}

fn single_word_dominated(
    mu: &Smp,
    mv: &Smp,
    u: usize,
    v: usize,
    word: &[usize],
    grid: &GridSpec<f64>,
) -> bool {
    let Some((pv, chain_v)) = path_data(mv, v, word) else {
        return true;
    };
    match path_data(mu, u, word) {
        Some((pu, chain_u)) => scaled_dominates(&pu, &chain_u, &pv, &chain_v, grid),
        None => pv.is_zero(),
    }
}

#[allow(clippy::too_many_arguments)]
fn collect_common_pairs(
    mu: &Smp,
    mv: &Smp,
    u: usize,
    v: usize,
    depth_left: usize,
    seen_stack: &mut Vec<(usize, usize)>,
    pairs: &mut BTreeSet<(usize, usize)>,
) {
    pairs.insert((u, v));
    if depth_left == 0 {
        return;
    }
    for out in 0..mv.outputs.len() {
        if let (Some((_, un)), Some((_, vn))) = (step(mu, u, out), step(mv, v, out)) {
            if pairs.contains(&(un, vn)) && seen_stack.contains(&(un, vn)) {
                continue;
            }
            seen_stack.push((un, vn));
            collect_common_pairs(mu, mv, un, vn, depth_left - 1, seen_stack, pairs);
            seen_stack.pop();
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn collect_loops(
    mu: &Smp,
    mv: &Smp,
    target_u: usize,
    target_v: usize,
    u: usize,
    v: usize,
    depth_left: usize,
    word: &mut Vec<usize>,
    loops: &mut Vec<Vec<usize>>,
) {
    if depth_left == 0 {
        return;
    }
    for out in 0..mv.outputs.len() {
        if let (Some((_, un)), Some((_, vn))) = (step(mu, u, out), step(mv, v, out)) {
            word.push(out);
            if un == target_u && vn == target_v {
                loops.push(word.clone());
            }
            collect_loops(mu, mv, target_u, target_v, un, vn, depth_left - 1, word, loops);
            word.pop();
        }
    }
}

/// Both directions of the exact decider.
pub fn equally_fast(
    mu: &Smp,
    mv: &Smp,
    u0: usize,
    v0: usize,
    grid: &GridSpec<f64>,
) -> Result<bool, FtError> {
    Ok(faster_than_unambiguous(mu, mv, u0, v0, grid)?
        && faster_than_unambiguous(mv, mu, v0, u0, grid)?)
}

// --- slow bound and additive approximation ------------------------------------

/// Smallest `N` with `P(Poisson(theta_max * b) >= N) <= eps`: an upper
/// bound on the `[0, b]` mass of any `n`-fold convolution of exponentials
/// with rates at most `theta_max`, for every `n >= N`.
pub fn slow_bound_n(rates: &[f64], eps: f64, b: f64) -> Result<usize, FtError> {
    if rates.is_empty() || rates.iter().any(|r| !r.is_finite() || *r <= 0.0) {
        return Err(FtError::UnsupportedClass(
            "tail bound needs positive exponential rates".into(),
        ));
    }
    if eps >= 1.0 {
        return Ok(0);
    }
    let theta_max = rates.iter().cloned().fold(0.0f64, f64::max);
    let lambda = theta_max * b;
    // direct summation of the Poisson pmf
    let mut pmf = (-lambda).exp();
    let mut cumulative = 0.0f64;
    let mut n = 0usize;
    loop {
        // tail P(X >= n) = 1 - P(X <= n-1)
        let tail = (1.0 - cumulative).max(0.0);
        if tail <= eps {
            return Ok(n);
        }
        cumulative += pmf;
        n += 1;
        pmf *= lambda / n as f64;
        if n > 100_000 {
            return Err(FtError::UnsupportedClass("tail bound did not converge".into()));
        }
    }
}

fn exponential_rates(smp: &Smp) -> Result<Vec<f64>, FtError> {
    (0..smp.state_count())
        .map(|s| match smp.residence(s).simplified() {
            Cdf::Exponential(rate) => Ok(rate),
            other => Err(FtError::UnsupportedClass(format!(
                "residence {other} is not exponential"
            ))),
        })
        .collect()
}

/// Verdict of the time-bounded additive approximation, with its soundness
/// caveat and a witness on failure.
#[derive(Debug, Clone)]
pub struct ApproxVerdict {
    pub holds: bool,
    /// word-length bound derived from the slow-distribution tail
    pub n_bound: usize,
    pub words_checked: usize,
    pub scheduler_pairs_checked: usize,
    /// grid comparison + enumerated deterministic schedulers; not exact
    pub method: &'static str,
    /// on failure: the word, deadline and adversary scheduler index
    pub witness: Option<(Vec<String>, f64, usize)>,
}

/// Decides (approximately) whether for every adversary scheduler on `mv`
/// there is a responder on `mu` with `P(u0)(C) >= P(v0)(C) - eps` for all
/// cylinders bounded by `b`. The responder must be uniform across all
/// cylinders, so adversaries are outermost and responder verdicts are
/// memoized per scheduler.
#[allow(clippy::too_many_arguments)]
pub fn time_bounded_additive_faster(
    mu: &Smp,
    mv: &Smp,
    u0: usize,
    v0: usize,
    eps: f64,
    b: f64,
    horizon_override: Option<usize>,
    sched_limit: f64,
    grid: &GridSpec<f64>,
) -> Result<ApproxVerdict, FtError> {
    let mut verdict = ApproxVerdict {
        holds: true,
        n_bound: 0,
        words_checked: 0,
        scheduler_pairs_checked: 0,
        method: "time-bounded additive approximation (grid + enumerated deterministic schedulers)",
        witness: None,
    };
    if eps >= 1.0 {
        return Ok(verdict); // probabilities are at most one
    }
    let rates = exponential_rates(mv)?;
    let n_tail = slow_bound_n(&rates, eps, b)?;
    let n_bound = match horizon_override {
        Some(h) => h.min(n_tail),
        None => n_tail,
    };
    verdict.n_bound = n_bound;
    if n_bound == 0 {
        return Ok(verdict);
    }
    // structurally identical pointed processes: the responder mirrors the
    // adversary
    if mu == mv && u0 == v0 {
        return Ok(verdict);
    }
    // words with a structural path in V
    let mut words: Vec<Vec<usize>> = Vec::new();
    let mut frontier: Vec<(usize, Vec<usize>)> = vec![(v0, Vec::new())];
    for _ in 0..n_bound {
        let mut next = Vec::new();
        for (state, word) in &frontier {
            for a in 0..mv.inputs.len() {
                for (p, dst, out) in mv.row(*state, a) {
                    if p.is_zero() {
                        continue;
                    }
                    let mut w = word.clone();
                    w.push(*out);
                    if !words.contains(&w) {
                        words.push(w.clone());
                    }
                    next.push((*dst, w));
                }
            }
        }
        frontier = next;
    }
    verdict.words_checked = words.len();
    // deadlines: a modest linear grid over [0, b] plus b itself
    let ticks = 33usize;
    let times: Vec<f64> = (0..=ticks).map(|i| b * i as f64 / ticks as f64).collect();
    let tol = grid.tol;

    let adversaries: Vec<Scheduler> =
        enumerate_schedulers(mv, v0, n_bound, sched_limit)?.collect();
    let responders: Vec<Scheduler> =
        enumerate_schedulers(mu, u0, n_bound, sched_limit)?.collect();
    let cylinder_table = |smp: &Smp, start: usize, sigma: &Scheduler| -> Result<Vec<f64>, FtError> {
        let mut out = Vec::with_capacity(words.len() * times.len());
        for w in &words {
            for &t in &times {
                let cyl = TimeBoundedCylinder { word: w.clone(), bound: t };
                out.push(cylinder_prob(smp, sigma, start, &cyl)?);
            }
        }
        Ok(out)
    };
    let mut responder_tables: Vec<Option<Vec<f64>>> = vec![None; responders.len()];
    for (adv_idx, adversary) in adversaries.iter().enumerate() {
        let v_table = cylinder_table(mv, v0, adversary)?;
        let mut matched = false;
        'resp: for (r_idx, responder) in responders.iter().enumerate() {
            if responder_tables[r_idx].is_none() {
                responder_tables[r_idx] = Some(cylinder_table(mu, u0, responder)?);
            }
            let u_table = responder_tables[r_idx].as_ref().unwrap();
            for i in 0..v_table.len() {
                if u_table[i] < v_table[i] - eps - tol {
                    continue 'resp;
                }
            }
            matched = true;
            verdict.scheduler_pairs_checked += r_idx + 1;
            break;
        }
        if !matched {
            verdict.scheduler_pairs_checked += responders.len();
            // recover a concrete failing cylinder for the report
            let best = responder_tables
                .iter()
                .flatten()
                .fold(vec![0.0; v_table.len()], |acc, t| {
                    acc.iter().zip(t).map(|(a, b): (&f64, &f64)| a.max(*b)).collect()
                });
            let mut witness = None;
            for (wi, w) in words.iter().enumerate() {
                for (ti, &t) in times.iter().enumerate() {
                    let idx = wi * times.len() + ti;
                    if best[idx] < v_table[idx] - eps - tol {
                        let letters =
                            w.iter().map(|&o| mv.outputs[o].clone()).collect();
                        witness = Some((letters, t, adv_idx));
                        break;
                    }
                }
                if witness.is_some() {
                    break;
                }
            }
            verdict.holds = false;
            verdict.witness = witness;
            return Ok(verdict);
        }
    }
    Ok(verdict)
}

// --- trace logic ---------------------------------------------------------------

/// `P^{<=t}_{>=p}(<a1>...<an> ⊤)`: the probability of emitting the word
/// within `t` is at least `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFormula {
    pub word: Vec<String>,
    pub bound: Rat,
    pub prob: Rat,
}

impl std::fmt::Display for TraceFormula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "P[<={}][>={}](",
            crate::ratio::rat_to_string(&self.bound),
            crate::ratio::rat_to_string(&self.prob)
        )?;
        for a in &self.word {
            write!(f, "<{a}>")?;
        }
        write!(f, "T)")
    }
}

pub fn model_check_trace_logic(
    smp: &Smp,
    s: usize,
    psi: &TraceFormula,
) -> Result<bool, FtError> {
    if !smp.is_generative() {
        return Err(FtError::NotGenerative);
    }
    let word: Vec<usize> = psi
        .word
        .iter()
        .map(|a| smp.output_id(a))
        .collect::<Result<_, _>>()?;
    let cyl = TimeBoundedCylinder { word, bound: rat_to_f64(&psi.bound) };
    let p = cylinder_prob(smp, &Scheduler::Trivial, s, &cyl)?;
    Ok(p >= rat_to_f64(&psi.prob) - 1e-12)
}

/// Every trace formula is satisfiable: the chain of `n+1` states with
/// probability-one transitions and instantaneous (Dirac at zero) residences
/// models it.
pub fn satisfiable_trace_logic(psi: &TraceFormula) -> Smp {
    let mut outputs: Vec<String> = psi.word.clone();
    outputs.dedup();
    outputs.sort();
    outputs.dedup();
    if outputs.is_empty() {
        outputs.push("a".to_string());
    }
    let mut smp = Smp::new(SmpKind::Generative, vec!["tick".into()], outputs);
    for i in 0..=psi.word.len() {
        smp.add_state(format!("c{i}"), Cdf::dirac0(), BTreeSet::new());
    }
    for (i, a) in psi.word.iter().enumerate() {
        let out = smp.output_id(a).expect("letter registered above");
        smp.add_transition(i, 0, Rat::from_integer(1.into()), i + 1, out)
            .expect("chain construction");
    }
    smp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::ratio::{rat_frac, rat_from_int};
    use crate::smp::DEFAULT_SCHEDULER_LIMIT;

    fn grid() -> GridSpec<f64> {
        GridSpec::with_points(512)
    }

    #[test]
    fn unambiguity() {
        let u = fixtures::chain3("u", &["exp(2)", "exp(0.5)", "exp(1)"]);
        assert!(is_unambiguous(&u).unwrap());
        // a state with two a-successors
        let m = Smp::parse(
            "smp generative\ninputs tick\noutputs a\n\
             state m0 exp(1) {}\nstate m1 exp(1) {}\nstate m2 exp(1) {}\n\
             trans m0 tick 99/100 m1 a\ntrans m0 tick 1/100 m2 a\n",
        )
        .unwrap();
        assert!(!is_unambiguous(&m).unwrap());
        // empty-transition states are vacuously unambiguous
        let lone = fixtures::selfloop_states(&["exp(1)"]);
        assert!(is_unambiguous(&lone).unwrap());
    }

    #[test]
    fn two_chain_is_faster() {
        // mu = Exp(2) dominates nu = Exp(0.5) pointwise; swapping the first
        // two residences preserves every longer cylinder by commutativity
        let u = fixtures::chain3("u", &["exp(2)", "exp(0.5)", "exp(1)"]);
        let v = fixtures::chain3("v", &["exp(0.5)", "exp(2)", "exp(1)"]);
        assert!(faster_than_unambiguous(&u, &v, 0, 0, &grid()).unwrap());
        // reflexivity
        assert!(faster_than_unambiguous(&u, &u, 0, 0, &grid()).unwrap());
        // the reverse direction fails on the single-letter cylinder
        assert!(!faster_than_unambiguous(&v, &u, 0, 0, &grid()).unwrap());
        assert!(!equally_fast(&u, &v, 0, 0, &grid()).unwrap());
        assert!(equally_fast(&u, &u, 0, 0, &grid()).unwrap());
    }

    #[test]
    fn swapped_convolutions_agree_beyond_first_step() {
        let u = fixtures::chain3("u", &["exp(2)", "exp(0.5)", "exp(1)"]);
        let v = fixtures::chain3("v", &["exp(0.5)", "exp(2)", "exp(1)"]);
        for n in [2usize, 3, 4] {
            for t in [0.5, 2.0, 5.0] {
                let cyl = TimeBoundedCylinder { word: vec![0; n], bound: t };
                let pu = cylinder_prob(&u, &Scheduler::Trivial, 0, &cyl).unwrap();
                let pv = cylinder_prob(&v, &Scheduler::Trivial, 0, &cyl).unwrap();
                assert!((pu - pv).abs() < 1e-12, "n={n} t={t}: {pu} vs {pv}");
            }
        }
    }

    #[test]
    fn slow_bound_examples() {
        // eps >= 1: no cylinder needs checking
        assert_eq!(slow_bound_n(&[2.0], 1.0, 2.0).unwrap(), 0);
        // b = 0: exponentials place no mass at zero, one step suffices
        assert_eq!(slow_bound_n(&[2.0, 0.5], 0.5, 0.0).unwrap(), 1);
        // theta_max = 2, b = 2: the Poisson(4) tail; the expected threshold
        // is recomputed by direct summation in the acceptance suite
        let n = slow_bound_n(&[2.0, 0.5], 0.01, 2.0).unwrap();
        // independent check: P(Poisson(4) >= 10) ≈ 0.00813 <= 0.01 but
        // P(Poisson(4) >= 9) ≈ 0.0214 > 0.01
        assert_eq!(n, 10);
        assert!(slow_bound_n(&[], 0.1, 1.0).is_err());
    }

    #[test]
    fn additive_approx_trivial_cases() {
        let u = fixtures::chain3("u", &["exp(2)", "exp(0.5)", "exp(1)"]);
        // identical processes
        let v = time_bounded_additive_faster(
            &u, &u, 0, 0, 0.05, 2.0, None, DEFAULT_SCHEDULER_LIMIT, &grid(),
        )
        .unwrap();
        assert!(v.holds);
        // eps >= 1
        let w = fixtures::chain3("w", &["unif(1,2)", "exp(1)", "exp(1)"]);
        let v = time_bounded_additive_faster(
            &u, &w, 0, 0, 1.0, 2.0, None, DEFAULT_SCHEDULER_LIMIT, &grid(),
        )
        .unwrap();
        assert!(v.holds);
        // non-exponential adversary residences have no tail bound
        assert!(matches!(
            time_bounded_additive_faster(
                &u, &w, 0, 0, 0.1, 2.0, None, DEFAULT_SCHEDULER_LIMIT, &grid()
            ),
            Err(FtError::UnsupportedClass(_))
        ));
    }

    #[test]
    fn additive_approx_two_chain() {
        let u = fixtures::chain3("u", &["exp(2)", "exp(0.5)", "exp(1)"]);
        let v = fixtures::chain3("v", &["exp(0.5)", "exp(2)", "exp(1)"]);
        // the exact decider says u ⪯ v, so the approximation must agree at
        // any eps; the horizon override keeps the word count small
        let verdict = time_bounded_additive_faster(
            &u, &v, 0, 0, 0.01, 2.0, Some(6), DEFAULT_SCHEDULER_LIMIT, &grid(),
        )
        .unwrap();
        assert!(verdict.holds, "{verdict:?}");
        // and the reverse direction fails with a witness
        let verdict = time_bounded_additive_faster(
            &v, &u, 0, 0, 0.01, 2.0, Some(4), DEFAULT_SCHEDULER_LIMIT, &grid(),
        )
        .unwrap();
        assert!(!verdict.holds);
        assert!(verdict.witness.is_some());
    }

    #[test]
    fn additive_approx_monotone_in_eps() {
        let u = fixtures::chain3("u", &["exp(2)", "exp(0.5)", "exp(1)"]);
        let v = fixtures::chain3("v", &["exp(0.5)", "exp(2)", "exp(1)"]);
        let mut previous = false;
        for eps in [0.001, 0.01, 0.1, 0.5] {
            let verdict = time_bounded_additive_faster(
                &v, &u, 0, 0, eps, 1.0, Some(3), DEFAULT_SCHEDULER_LIMIT, &grid(),
            )
            .unwrap();
            assert!(
                verdict.holds || !previous,
                "verdict regressed when eps grew to {eps}"
            );
            previous = verdict.holds;
        }
    }

    #[test]
    fn trace_logic_examples() {
        let u = fixtures::chain3("u", &["exp(2)", "exp(0.5)", "exp(1)"]);
        // empty word at deadline zero
        let top = TraceFormula { word: vec![], bound: rat_from_int(0), prob: rat_from_int(1) };
        assert!(model_check_trace_logic(&u, 0, &top).unwrap());
        // the aa-cylinder mass 0.5156 clears the 0.5 threshold
        let psi = TraceFormula {
            word: vec!["a".into(), "a".into()],
            bound: rat_from_int(2),
            prob: rat_frac(1, 2),
        };
        assert!(model_check_trace_logic(&u, 0, &psi).unwrap());
        let tight = TraceFormula { prob: rat_frac(3, 5), ..psi.clone() };
        assert!(!model_check_trace_logic(&u, 0, &tight).unwrap());
        // the chain construction satisfies within any deadline
        let chain = satisfiable_trace_logic(&psi);
        assert_eq!(chain.state_count(), 3);
        let strict = TraceFormula { bound: rat_from_int(1), prob: rat_from_int(1), ..psi };
        let chain = satisfiable_trace_logic(&strict);
        assert!(model_check_trace_logic(&chain, 0, &strict).unwrap());
    }
}
