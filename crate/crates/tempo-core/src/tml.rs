//! Timed Markovian logic: `l_p t` / `m_p t` bound the residence-time CDF at
//! `t`, `Lp`/`Mp` bound transition probabilities, and the ε-perturbation
//! rescales every time constant. The characterisation harness checks the
//! logical characterisation of ε-simulation on budgeted formula families.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::accel::GridSpec;
use crate::ratio::{parse_rat, rat_to_f64, rat_to_string, Rat};
use crate::simdist::{eps_simulates, SimError};
use crate::smp::{Scheduler, Smp, SmpError};
use crate::wlwb::Wlwb;

#[derive(Debug, Error, PartialEq)]
pub enum TmlError {
    #[error("syntax error at offset {0}: {1}")]
    Parse(usize, String),
    #[error(transparent)]
    Smp(#[from] SmpError),
    #[error("reachability target must be a boolean combination of atoms")]
    NotAtomic,
    #[error("horizon too short: interval width {width} exceeds requested precision {precision}")]
    HorizonTooShort { width: f64, precision: f64 },
}

/// TML formula. `p` is a rational probability in `[0,1]`, `t` a nonnegative
/// rational time constant, and the probability modalities carry an input
/// label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Tml {
    Atom(String),
    NegAtom(String),
    /// `l_p t`: residence CDF at `t` is at least `p`
    EllBound(Rat, Rat),
    /// `m_p t`: residence CDF at `t` is at most `p`
    EmBound(Rat, Rat),
    /// `Lp_p^a φ`: probability of an `a`-transition into φ-states >= p
    LProb(Rat, String, Box<Tml>),
    /// `Mp_p^a φ`: that probability <= p
    MProb(Rat, String, Box<Tml>),
    And(Box<Tml>, Box<Tml>),
    Or(Box<Tml>, Box<Tml>),
}

/// Syntactic fragments: `Geq` excludes `m_p t` and `Mp`, `Leq` excludes
/// `l_p t` and `Lp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fragment {
    Full,
    Geq,
    Leq,
}

impl Tml {
    pub fn and(a: Tml, b: Tml) -> Tml {
        Tml::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Tml, b: Tml) -> Tml {
        Tml::Or(Box::new(a), Box::new(b))
    }

    pub fn fragment(&self) -> Fragment {
        let (mut has_geq, mut has_leq) = (false, false);
        self.scan(&mut has_geq, &mut has_leq);
        match (has_geq, has_leq) {
            (_, false) => Fragment::Geq,
            (false, true) => Fragment::Leq,
            (true, true) => Fragment::Full,
        }
    }

    fn scan(&self, has_geq: &mut bool, has_leq: &mut bool) {
        match self {
            Tml::Atom(_) | Tml::NegAtom(_) => {}
            Tml::EllBound(..) => *has_geq = true,
            Tml::EmBound(..) => *has_leq = true,
            Tml::LProb(_, _, inner) => {
                *has_geq = true;
                inner.scan(has_geq, has_leq);
            }
            Tml::MProb(_, _, inner) => {
                *has_leq = true;
                inner.scan(has_geq, has_leq);
            }
            Tml::And(a, b) | Tml::Or(a, b) => {
                a.scan(has_geq, has_leq);
                b.scan(has_geq, has_leq);
            }
        }
    }

    /// ε-perturbation: every time constant `t` becomes `ε·t`; structure is
    /// preserved, so perturbation composes multiplicatively.
    pub fn perturb(&self, eps: &Rat) -> Tml {
        match self {
            Tml::Atom(_) | Tml::NegAtom(_) => self.clone(),
            Tml::EllBound(p, t) => Tml::EllBound(p.clone(), eps.clone() * t.clone()),
            Tml::EmBound(p, t) => Tml::EmBound(p.clone(), eps.clone() * t.clone()),
            Tml::LProb(p, a, inner) => {
                Tml::LProb(p.clone(), a.clone(), Box::new(inner.perturb(eps)))
            }
            Tml::MProb(p, a, inner) => {
                Tml::MProb(p.clone(), a.clone(), Box::new(inner.perturb(eps)))
            }
            Tml::And(a, b) => Tml::and(a.perturb(eps), b.perturb(eps)),
            Tml::Or(a, b) => Tml::or(a.perturb(eps), b.perturb(eps)),
        }
    }
}

impl std::fmt::Display for Tml {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tml::Atom(a) => write!(f, "{a}"),
            Tml::NegAtom(a) => write!(f, "!{a}"),
            Tml::EllBound(p, t) => write!(f, "l {} {}", rat_to_string(p), rat_to_string(t)),
            Tml::EmBound(p, t) => write!(f, "m {} {}", rat_to_string(p), rat_to_string(t)),
            Tml::LProb(p, a, inner) => write!(f, "Lp {} {a} {inner}", rat_to_string(p)),
            Tml::MProb(p, a, inner) => write!(f, "Mp {} {a} {inner}", rat_to_string(p)),
            Tml::And(a, b) => write!(f, "({a} & {b})"),
            Tml::Or(a, b) => write!(f, "({a} | {b})"),
        }
    }
}

// --- parser -------------------------------------------------------------------

struct TmlParser<'a> {
    text: &'a str,
    toks: Vec<(usize, String)>,
    pos: usize,
}

fn tml_lex(text: &str) -> Vec<(usize, String)> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if b"!&|()".contains(&c) {
            out.push((i, (c as char).to_string()));
            i += 1;
            continue;
        }
        let start = i;
        while i < bytes.len()
            && !bytes[i].is_ascii_whitespace()
            && !b"!&|()".contains(&bytes[i])
        {
            i += 1;
        }
        out.push((start, text[start..i].to_string()));
    }
    out
}

impl<'a> TmlParser<'a> {
    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(|(_, t)| t.as_str())
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.text.len(), |(o, _)| *o)
    }

    fn bump(&mut self) -> Option<String> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn err(&self, msg: &str) -> TmlError {
        TmlError::Parse(self.offset(), msg.to_string())
    }

    fn rational(&mut self, what: &str) -> Result<Rat, TmlError> {
        let at = self.offset();
        let tok = self.bump().ok_or_else(|| self.err(&format!("expected {what}")))?;
        parse_rat(&tok).map_err(|e| TmlError::Parse(at, e))
    }

    fn prob(&mut self) -> Result<Rat, TmlError> {
        let at = self.offset();
        let p = self.rational("a probability")?;
        if p.is_negative() || p > Rat::one() {
            return Err(TmlError::Parse(at, "probability must lie in [0,1]".into()));
        }
        Ok(p)
    }

    fn time(&mut self) -> Result<Rat, TmlError> {
        let at = self.offset();
        let t = self.rational("a time constant")?;
        if t.is_negative() {
            return Err(TmlError::Parse(at, "time constant must be nonnegative".into()));
        }
        Ok(t)
    }

    fn or_expr(&mut self) -> Result<Tml, TmlError> {
        let mut lhs = self.and_expr()?;
        while self.peek() == Some("|") {
            self.bump();
            lhs = Tml::or(lhs, self.and_expr()?);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Tml, TmlError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some("&") {
            self.bump();
            lhs = Tml::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Tml, TmlError> {
        match self.peek() {
            Some("!") => {
                self.bump();
                let at = self.offset();
                match self.bump() {
                    Some(tok) if is_ident(&tok) => Ok(Tml::NegAtom(tok)),
                    _ => Err(TmlError::Parse(at, "negation applies to atoms only".into())),
                }
            }
            Some("l") => {
                self.bump();
                Ok(Tml::EllBound(self.prob()?, self.time()?))
            }
            Some("m") => {
                self.bump();
                Ok(Tml::EmBound(self.prob()?, self.time()?))
            }
            Some("Lp") | Some("Mp") => {
                let is_l = self.bump().unwrap() == "Lp";
                let p = self.prob()?;
                let at = self.offset();
                let a = match self.bump() {
                    Some(tok) if is_ident(&tok) => tok,
                    _ => return Err(TmlError::Parse(at, "expected an input label".into())),
                };
                let inner = self.unary()?;
                Ok(if is_l {
                    Tml::LProb(p, a, Box::new(inner))
                } else {
                    Tml::MProb(p, a, Box::new(inner))
                })
            }
            Some("(") => {
                self.bump();
                let inner = self.or_expr()?;
                if self.bump().as_deref() != Some(")") {
                    return Err(self.err("expected `)`"));
                }
                Ok(inner)
            }
            Some(tok) if is_ident(tok) => {
                let t = self.bump().unwrap();
                Ok(Tml::Atom(t))
            }
            _ => Err(self.err("expected a formula")),
        }
    }
}

fn is_ident(tok: &str) -> bool {
    !tok.is_empty()
        && tok.chars().next().unwrap().is_ascii_alphabetic()
        && tok.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(tok, "l" | "m" | "Lp" | "Mp")
}

pub fn parse_tml(text: &str) -> Result<Tml, TmlError> {
    let mut p = TmlParser { text, toks: tml_lex(text), pos: 0 };
    let phi = p.or_expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(phi)
}

// --- model checking -------------------------------------------------------------

/// Recursive bottom-up evaluation; transition-probability comparisons are
/// exact on rationals, residence comparisons go through the CDF evaluator.
pub fn model_check_tml(smp: &Smp, state: usize, phi: &Tml) -> Result<bool, TmlError> {
    Ok(tml_sat_set(smp, phi)?[state])
}

pub fn tml_sat_set(smp: &Smp, phi: &Tml) -> Result<Vec<bool>, TmlError> {
    let n = smp.state_count();
    Ok(match phi {
        Tml::Atom(a) => (0..n).map(|s| smp.labels_of(s).contains(a)).collect(),
        Tml::NegAtom(a) => (0..n).map(|s| !smp.labels_of(s).contains(a)).collect(),
        Tml::EllBound(p, t) => {
            let (p, t) = (rat_to_f64(p), rat_to_f64(t));
            (0..n).map(|s| smp.residence(s).eval(t) >= p).collect()
        }
        Tml::EmBound(p, t) => {
            let (p, t) = (rat_to_f64(p), rat_to_f64(t));
            (0..n).map(|s| smp.residence(s).eval(t) <= p).collect()
        }
        Tml::LProb(p, a, inner) => {
            let input = smp.input_id(a)?;
            let sat = tml_sat_set(smp, inner)?;
            (0..n)
                .map(|s| row_mass_into(smp, s, input, &sat) >= *p)
                .collect()
        }
        Tml::MProb(p, a, inner) => {
            let input = smp.input_id(a)?;
            let sat = tml_sat_set(smp, inner)?;
            (0..n)
                .map(|s| row_mass_into(smp, s, input, &sat) <= *p)
                .collect()
        }
        Tml::And(a, b) => {
            let sa = tml_sat_set(smp, a)?;
            let sb = tml_sat_set(smp, b)?;
            sa.into_iter().zip(sb).map(|(x, y)| x && y).collect()
        }
        Tml::Or(a, b) => {
            let sa = tml_sat_set(smp, a)?;
            let sb = tml_sat_set(smp, b)?;
            sa.into_iter().zip(sb).map(|(x, y)| x || y).collect()
        }
    })
}

fn row_mass_into(smp: &Smp, s: usize, input: usize, target: &[bool]) -> Rat {
    smp.row(s, input)
        .iter()
        .filter(|(_, dst, _)| target[*dst])
        .map(|(p, _, _)| p.clone())
        .sum()
}

// --- characterisation harness -----------------------------------------------------

#[derive(Debug, Clone)]
pub struct HarnessBudget {
    pub max_depth: usize,
    pub max_formulas: usize,
}

impl Default for HarnessBudget {
    fn default() -> Self {
        HarnessBudget { max_depth: 2, max_formulas: 4000 }
    }
}

#[derive(Debug, Clone)]
pub struct HarnessReport {
    pub eps_simulates: bool,
    pub formulas_checked: usize,
    /// TML-geq formulas satisfied by s1 whose perturbation fails at s2
    pub geq_witnesses: Vec<String>,
    /// TML-leq formulas whose perturbation holds at s2 but fail at s1
    pub leq_witnesses: Vec<String>,
}

impl HarnessReport {
    /// A counterexample to the characterisation theorem: a witness formula
    /// found although ε-simulation holds. The theorem is exact, so any entry
    /// here indicates a bug.
    pub fn theorem_counterexamples(&self) -> Vec<String> {
        if self.eps_simulates {
            self.geq_witnesses
                .iter()
                .chain(self.leq_witnesses.iter())
                .cloned()
                .collect()
        } else {
            Vec::new()
        }
    }
}

fn rational_approx(v: f64) -> Rat {
    let denom: i64 = 1 << 20;
    let num = (v.clamp(0.0, 1.0) * denom as f64).round() as i64;
    Rat::new(BigInt::from(num), BigInt::from(denom))
}

/// Constant pools: time constants from the model's own CDF structure,
/// probability constants from transition rows plus CDF values at the pooled
/// times and their midpoints (counterexamples live at curve crossings).
fn constant_pools(smp: &Smp, states: &[usize], eps: f64) -> (Vec<Rat>, Vec<Rat>) {
    let mut times_f: Vec<f64> = Vec::new();
    for &s in states {
        times_f.extend(smp.residence(s).critical_times());
    }
    times_f.retain(|t| t.is_finite() && *t > 0.0);
    times_f.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times_f.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    times_f.truncate(8);
    let times: Vec<Rat> = times_f
        .iter()
        .map(|t| {
            let denom: i64 = 1 << 16;
            Rat::new(
                BigInt::from((t * denom as f64).round() as i64),
                BigInt::from(denom),
            )
        })
        .collect();

    let mut probs: Vec<Rat> = vec![Rat::zero(), Rat::one()];
    for &s in states {
        for a in 0..smp.inputs.len() {
            for (p, _, _) in smp.row(s, a) {
                probs.push(p.clone());
            }
        }
        for t in &times {
            let tf = rat_to_f64(t);
            probs.push(rational_approx(smp.residence(s).eval(tf)));
            probs.push(rational_approx(smp.residence(s).eval(eps * tf)));
        }
    }
    probs.sort();
    probs.dedup();
    // midpoints of adjacent values catch strict crossings
    let mids: Vec<Rat> = probs
        .windows(2)
        .map(|w| (w[0].clone() + w[1].clone()) / Rat::from_integer(BigInt::from(2)))
        .collect();
    probs.extend(mids);
    probs.sort();
    probs.dedup();
    probs.truncate(40);
    (times, probs)
}

fn enumerate_fragment(
    smp: &Smp,
    geq: bool,
    times: &[Rat],
    probs: &[Rat],
    budget: &HarnessBudget,
) -> Vec<Tml> {
    let mut atoms: BTreeSet<String> = BTreeSet::new();
    for s in 0..smp.state_count() {
        atoms.extend(smp.labels_of(s).iter().cloned());
    }
    let mut level: Vec<Tml> = Vec::new();
    for a in &atoms {
        level.push(Tml::Atom(a.clone()));
        level.push(Tml::NegAtom(a.clone()));
    }
    for p in probs {
        for t in times {
            level.push(if geq {
                Tml::EllBound(p.clone(), t.clone())
            } else {
                Tml::EmBound(p.clone(), t.clone())
            });
        }
    }
    let mut all = level.clone();
    for _ in 1..budget.max_depth {
        let mut next: Vec<Tml> = Vec::new();
        for phi in &level {
            for a in &smp.inputs {
                for p in probs {
                    next.push(if geq {
                        Tml::LProb(p.clone(), a.clone(), Box::new(phi.clone()))
                    } else {
                        Tml::MProb(p.clone(), a.clone(), Box::new(phi.clone()))
                    });
                }
            }
        }
        // a few boolean combinations of the base level
        for (i, a) in level.iter().enumerate().take(12) {
            for b in level.iter().skip(i + 1).take(12) {
                next.push(Tml::and(a.clone(), b.clone()));
                next.push(Tml::or(a.clone(), b.clone()));
            }
        }
        all.extend(next.iter().cloned());
        level = next;
        if all.len() > budget.max_formulas {
            all.truncate(budget.max_formulas);
            break;
        }
    }
    all
}

/// Checks both directions of the logical characterisation of ε-simulation
/// against the relational decision procedure.
///
/// The full `TML-geq` fragment transfers along ε-simulation. On the `leq`
/// side only the probability-modality-free part does: satisfaction sets of
/// `m_p t` formulas are downward closed along simulation, so wrapping them
/// in `Mp` breaks the coupling argument, and small two-successor models
/// witness the failure (see the `nested_m_bounds_do_not_transfer` test).
/// The harness therefore enumerates `leq` formulas without `Mp` nesting.
pub fn characterisation_harness(
    smp: &Smp,
    s1: usize,
    s2: usize,
    eps: &Rat,
    budget: &HarnessBudget,
    grid: &GridSpec<f64>,
) -> Result<HarnessReport, SimError> {
    let eps_f = rat_to_f64(eps);
    let sim = eps_simulates(smp, s1, s2, eps_f, grid)?;
    let (times, probs) = constant_pools(smp, &[s1, s2], eps_f);
    let mut checked = 0usize;
    let mut geq_witnesses = Vec::new();
    for phi in enumerate_fragment(smp, true, &times, &probs, budget) {
        checked += 1;
        let holds_s1 = tml_sat_set(smp, &phi).map_err(harness_smp_err)?[s1];
        if holds_s1 {
            let pert = phi.perturb(eps);
            let holds_s2 = tml_sat_set(smp, &pert).map_err(harness_smp_err)?[s2];
            if !holds_s2 {
                geq_witnesses.push(phi.to_string());
            }
        }
    }
    let mut leq_witnesses = Vec::new();
    let flat_budget = HarnessBudget { max_depth: 1, max_formulas: budget.max_formulas };
    for phi in enumerate_fragment(smp, false, &times, &probs, &flat_budget) {
        checked += 1;
        let pert = phi.perturb(eps);
        let holds_s2 = tml_sat_set(smp, &pert).map_err(harness_smp_err)?[s2];
        if holds_s2 {
            let holds_s1 = tml_sat_set(smp, &phi).map_err(harness_smp_err)?[s1];
            if !holds_s1 {
                leq_witnesses.push(phi.to_string());
            }
        }
    }
    Ok(HarnessReport {
        eps_simulates: sim,
        formulas_checked: checked,
        geq_witnesses,
        leq_witnesses,
    })
}

fn harness_smp_err(e: TmlError) -> SimError {
    match e {
        TmlError::Smp(inner) => SimError::Smp(inner),
        other => SimError::Smp(SmpError::KindMismatch(other.to_string())),
    }
}

// --- bounded reachability ------------------------------------------------------

/// Evaluates a modal-free WLWB formula as a boolean combination of atoms.
pub fn eval_atom_combination(beta: &Wlwb, labels: &BTreeSet<String>) -> Result<bool, TmlError> {
    match beta {
        Wlwb::Atom(a) => Ok(labels.contains(a)),
        Wlwb::Not(inner) => Ok(!eval_atom_combination(inner, labels)?),
        Wlwb::And(a, b) => {
            Ok(eval_atom_combination(a, labels)? && eval_atom_combination(b, labels)?)
        }
        Wlwb::L(..) | Wlwb::M(..) => Err(TmlError::NotAtomic),
    }
}

/// Lower and upper bounds on the probability of reaching a `beta`-state
/// within time `t`, from exact first-hit path enumeration up to `horizon`
/// steps; the upper bound adds the untruncated branch mass.
pub fn reachability_prob(
    smp: &Smp,
    sigma: &Scheduler,
    s: usize,
    beta: &Wlwb,
    t: f64,
    horizon: usize,
    precision: Option<f64>,
) -> Result<(f64, f64), TmlError> {
    let hit: Vec<bool> = (0..smp.state_count())
        .map(|q| eval_atom_combination(beta, smp.labels_of(q)))
        .collect::<Result<_, _>>()?;
    if hit[s] {
        return Ok((1.0, 1.0));
    }
    // truncated branches only contribute slack when the target is still
    // graph-reachable from where they stopped
    let mut can_reach = hit.clone();
    loop {
        let mut changed = false;
        for q in 0..smp.state_count() {
            if can_reach[q] {
                continue;
            }
            let reaches = (0..smp.inputs.len()).any(|a| {
                smp.row(q, a)
                    .iter()
                    .any(|(p, dst, _)| !p.is_zero() && can_reach[*dst])
            });
            if reaches {
                can_reach[q] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut lower = 0.0f64;
    let mut residual = 0.0f64;
    let mut history = vec![s];
    let mut chain: Vec<crate::cdf::Cdf<f64>> = Vec::new();
    reach_walk(
        smp,
        sigma,
        &hit,
        &can_reach,
        t,
        horizon,
        Rat::one(),
        &mut history,
        &mut chain,
        &mut lower,
        &mut residual,
    );
    let (lo, hi) = (lower.clamp(0.0, 1.0), (lower + residual).clamp(0.0, 1.0));
    if let Some(prec) = precision {
        if hi - lo > prec {
            return Err(TmlError::HorizonTooShort { width: hi - lo, precision: prec });
        }
    }
    Ok((lo, hi))
}

#[allow(clippy::too_many_arguments)]
fn reach_walk(
    smp: &Smp,
    sigma: &Scheduler,
    hit: &[bool],
    can_reach: &[bool],
    t: f64,
    horizon: usize,
    branch: Rat,
    history: &mut Vec<usize>,
    chain: &mut Vec<crate::cdf::Cdf<f64>>,
    lower: &mut f64,
    residual: &mut f64,
) {
    if chain.len() == horizon {
        if can_reach[*history.last().unwrap()] {
            *residual += rat_to_f64(&branch);
        }
        return;
    }
    let current = *history.last().unwrap();
    for (w_a, a) in sigma.decide(history) {
        if w_a.is_zero() {
            continue;
        }
        for (p, dst, _) in smp.row(current, a) {
            if p.is_zero() {
                continue;
            }
            let sub = branch.clone() * w_a.clone() * p.clone();
            chain.push(smp.residence(current).clone());
            if hit[*dst] {
                let conv = crate::cdf::Cdf::convolve_all(chain.iter().cloned());
                *lower += rat_to_f64(&sub) * conv.eval(t);
            } else {
                history.push(*dst);
                reach_walk(
                    smp, sigma, hit, can_reach, t, horizon, sub, history, chain, lower, residual,
                );
                history.pop();
            }
            chain.pop();
        }
    }
}
