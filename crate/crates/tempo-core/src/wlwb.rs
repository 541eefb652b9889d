//! The weighted logic with bounds: formulas `L_r φ` ("some transition into
//! φ-states, and every such transition has weight at least r") and `M_r φ`
//! (dually, at most r), with a tableau-based satisfiability procedure that
//! extracts a witness model on success.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::ratio::{parse_rat, rat_to_string, rat_zero, Interval, Rat};
use crate::wts::{model_check_wlwb, Wts};

/// WLWB formula. `Or`/`Implies` are sugar that desugars at construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Wlwb {
    Atom(String),
    Not(Box<Wlwb>),
    And(Box<Wlwb>, Box<Wlwb>),
    L(Rat, Box<Wlwb>),
    M(Rat, Box<Wlwb>),
}

impl Wlwb {
    pub fn atom<S: Into<String>>(p: S) -> Wlwb {
        Wlwb::Atom(p.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(phi: Wlwb) -> Wlwb {
        Wlwb::Not(Box::new(phi))
    }

    pub fn and(a: Wlwb, b: Wlwb) -> Wlwb {
        Wlwb::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Wlwb, b: Wlwb) -> Wlwb {
        Wlwb::not(Wlwb::and(Wlwb::not(a), Wlwb::not(b)))
    }

    pub fn implies(a: Wlwb, b: Wlwb) -> Wlwb {
        Wlwb::not(Wlwb::and(a, Wlwb::not(b)))
    }

    pub fn l(r: Rat, phi: Wlwb) -> Wlwb {
        Wlwb::L(r, Box::new(phi))
    }

    pub fn m(r: Rat, phi: Wlwb) -> Wlwb {
        Wlwb::M(r, Box::new(phi))
    }
}

impl fmt::Display for Wlwb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Wlwb::Atom(p) => write!(f, "{p}"),
            Wlwb::Not(inner) => write!(f, "!{inner}"),
            Wlwb::And(a, b) => write!(f, "({a} & {b})"),
            Wlwb::L(r, inner) => write!(f, "L {} {inner}", rat_to_string(r)),
            Wlwb::M(r, inner) => write!(f, "M {} {inner}", rat_to_string(r)),
        }
    }
}

// --- parser -----------------------------------------------------------------

#[derive(Debug, Error, PartialEq)]
#[error("syntax error at offset {offset}: {message}")]
pub struct WlwbParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Bang,
    Amp,
    Pipe,
    LPar,
    RPar,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, WlwbParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            b'!' => Some(Tok::Bang),
            b'&' => Some(Tok::Amp),
            b'|' => Some(Tok::Pipe),
            b'(' => Some(Tok::LPar),
            b')' => Some(Tok::RPar),
            _ => None,
        };
        if let Some(t) = tok {
            out.push((i, t));
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
            continue;
        }
        if c.is_ascii_digit() || c == b'-' {
            let start = i;
            while i < bytes.len()
                && (bytes[i].is_ascii_digit()
                    || bytes[i] == b'.'
                    || bytes[i] == b'/'
                    || bytes[i] == b'-')
            {
                i += 1;
            }
            out.push((start, Tok::Num(text[start..i].to_string())));
            continue;
        }
        return Err(WlwbParseError {
            offset: i,
            message: format!("unexpected character `{}`", c as char),
        });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn err(&self, message: &str) -> WlwbParseError {
        WlwbParseError { offset: self.offset(), message: message.to_string() }
    }

    // phi ::= and_expr ('|' and_expr)*
    fn or_expr(&mut self) -> Result<Wlwb, WlwbParseError> {
        let mut lhs = self.and_expr()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.bump();
            let rhs = self.and_expr()?;
            lhs = Wlwb::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Wlwb, WlwbParseError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.bump();
            let rhs = self.unary()?;
            lhs = Wlwb::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Wlwb, WlwbParseError> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.bump();
                Ok(Wlwb::not(self.unary()?))
            }
            Some(Tok::Ident(name)) if name == "L" || name == "M" => {
                let is_l = name == "L";
                self.bump();
                let at = self.offset();
                let num = match self.bump() {
                    Some(Tok::Num(n)) => n,
                    _ => {
                        return Err(WlwbParseError {
                            offset: at,
                            message: "modal operator needs a rational constant".into(),
                        })
                    }
                };
                let r = parse_rat(&num)
                    .map_err(|e| WlwbParseError { offset: at, message: e })?;
                if r < rat_zero() {
                    return Err(WlwbParseError {
                        offset: at,
                        message: "modal constant must be nonnegative".into(),
                    });
                }
                let inner = self.unary()?;
                Ok(if is_l { Wlwb::l(r, inner) } else { Wlwb::m(r, inner) })
            }
            Some(Tok::Ident(_)) => {
                if let Some(Tok::Ident(name)) = self.bump() {
                    Ok(Wlwb::atom(name))
                } else {
                    unreachable!()
                }
            }
            Some(Tok::LPar) => {
                self.bump();
                let inner = self.or_expr()?;
                if self.bump() != Some(Tok::RPar) {
                    return Err(self.err("expected `)`"));
                }
                Ok(inner)
            }
            _ => Err(self.err("expected a formula")),
        }
    }
}

/// Parses the WLWB grammar `phi ::= ident | "!" phi | phi "&" phi | phi "|"
/// phi | "L" r phi | "M" r phi | "(" phi ")"` with precedence `! > L/M > &
/// > |`.
pub fn parse_wlwb(text: &str) -> Result<Wlwb, WlwbParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let phi = p.or_expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(phi)
}

// --- tableau satisfiability ---------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum SatResult {
    Unsat,
    Sat { model: Wts, witness: usize },
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat { .. })
    }
}

/// Tableau decision procedure with model extraction. The extracted model is
/// re-checked by the model checker before being returned; a mismatch would
/// be a bug, not an input condition.
pub fn satisfiable_wlwb(phi: &Wlwb) -> SatResult {
    let mut ctx = Ctx { memo: HashMap::new() };
    match ctx.solve(std::slice::from_ref(phi)) {
        None => SatResult::Unsat,
        Some((model, witness)) => {
            assert!(
                model_check_wlwb(&model, witness, phi),
                "tableau extraction produced a model that fails self-verification for {phi}"
            );
            SatResult::Sat { model, witness }
        }
    }
}

struct Ctx {
    memo: HashMap<Vec<Wlwb>, Option<(Wts, usize)>>,
}

/// Assembles the parent state from extracted successor models and weights.
type StateBuilder<'a> = dyn Fn(Vec<(Wts, usize, Vec<Rat>)>) -> (Wts, usize) + 'a;

#[derive(Debug, Clone)]
struct Candidate {
    /// obligations the successor state must satisfy
    formulas: BTreeSet<Wlwb>,
    /// for every modal argument of the parent node, whether this candidate
    /// entails it (`true`) or its negation (`false`)
    decided: BTreeMap<Wlwb, bool>,
}

impl Ctx {
    fn solve(&mut self, gamma: &[Wlwb]) -> Option<(Wts, usize)> {
        let mut key: Vec<Wlwb> = gamma.to_vec();
        key.sort();
        key.dedup();
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let result = self.solve_uncached(key.clone());
        self.memo.insert(key, result.clone());
        result
    }

    fn entails(&mut self, premises: &BTreeSet<Wlwb>, phi: &Wlwb) -> bool {
        let mut gamma: Vec<Wlwb> = premises.iter().cloned().collect();
        gamma.push(Wlwb::not(phi.clone()));
        self.solve(&gamma).is_none()
    }

    fn solve_uncached(&mut self, mut gamma: Vec<Wlwb>) -> Option<(Wts, usize)> {
        // boolean decomposition: (∧) and (¬¬) rewrite in place, (¬∧) branches
        loop {
            let mut rewritten = false;
            let mut next = Vec::with_capacity(gamma.len());
            for phi in gamma.drain(..) {
                match phi {
                    Wlwb::And(a, b) => {
                        next.push(*a);
                        next.push(*b);
                        rewritten = true;
                    }
                    Wlwb::Not(inner) => match *inner {
                        Wlwb::Not(inner2) => {
                            next.push(*inner2);
                            rewritten = true;
                        }
                        other => next.push(Wlwb::not(other)),
                    },
                    other => next.push(other),
                }
            }
            next.sort();
            next.dedup();
            gamma = next;
            if !rewritten {
                break;
            }
        }
        if let Some(idx) = gamma
            .iter()
            .position(|phi| matches!(phi, Wlwb::Not(inner) if matches!(**inner, Wlwb::And(..))))
        {
            let (a, b) = match &gamma[idx] {
                Wlwb::Not(inner) => match &**inner {
                    Wlwb::And(a, b) => ((**a).clone(), (**b).clone()),
                    _ => unreachable!(),
                },
                _ => unreachable!(),
            };
            let rest: Vec<Wlwb> = gamma
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != idx)
                .map(|(_, f)| f.clone())
                .collect();
            for branch in [Wlwb::not(a), Wlwb::not(b)] {
                let mut sub = rest.clone();
                sub.push(branch);
                if let Some(found) = self.solve(&sub) {
                    return Some(found);
                }
            }
            return None;
        }
        self.modal_stage(&gamma)
    }

    /// The (mod) rule: `gamma` holds only literals and (possibly negated)
    /// modal formulas.
    fn modal_stage(&mut self, gamma: &[Wlwb]) -> Option<(Wts, usize)> {
        let mut pos_literals = BTreeSet::new();
        let mut neg_literals = BTreeSet::new();
        // (is_l, bound, argument)
        let mut pos_modals: Vec<(bool, Rat, Wlwb)> = Vec::new();
        let mut neg_modals: Vec<(bool, Rat, Wlwb)> = Vec::new();
        for phi in gamma {
            match phi {
                Wlwb::Atom(p) => {
                    pos_literals.insert(p.clone());
                }
                Wlwb::L(r, inner) => pos_modals.push((true, r.clone(), (**inner).clone())),
                Wlwb::M(r, inner) => pos_modals.push((false, r.clone(), (**inner).clone())),
                Wlwb::Not(inner) => match &**inner {
                    Wlwb::Atom(p) => {
                        neg_literals.insert(p.clone());
                    }
                    Wlwb::L(r, arg) => neg_modals.push((true, r.clone(), (**arg).clone())),
                    Wlwb::M(r, arg) => neg_modals.push((false, r.clone(), (**arg).clone())),
                    _ => unreachable!("boolean decomposition left {phi}"),
                },
                Wlwb::And(..) => unreachable!("boolean decomposition left {phi}"),
            }
        }
        if pos_literals.intersection(&neg_literals).next().is_some() {
            return None;
        }
        let make_state = |subs: Vec<(Wts, usize, Vec<Rat>)>| -> (Wts, usize) {
            let mut model = Wts::new();
            let root = model.add_state("w", pos_literals.clone());
            for (sub, wit, weights) in subs {
                let offset = model.absorb(&sub);
                for w in weights {
                    model
                        .add_transition(root, w, wit + offset)
                        .expect("extraction weights are nonnegative");
                }
            }
            (model, root)
        };
        if pos_modals.is_empty() {
            // every negated modal holds vacuously at a deadlock state
            return Some(make_state(Vec::new()));
        }

        // one candidate successor per positive modal formula
        let mut candidates: Vec<Candidate> = Vec::new();
        for (_, _, arg) in &pos_modals {
            let mut formulas = BTreeSet::new();
            formulas.insert(arg.clone());
            if self.solve(std::slice::from_ref(arg)).is_none() {
                continue; // unsatisfiable obligation: no such successor
            }
            candidates.push(Candidate { formulas, decided: BTreeMap::new() });
        }
        // merge subsumption-ordered candidates
        let mut merged: Vec<Candidate> = Vec::new();
        'outer: for cand in candidates {
            for kept in &mut merged {
                if self.entails(&kept.formulas, &conj(&cand.formulas)) {
                    continue 'outer; // kept already covers this obligation
                }
                if self.entails(&cand.formulas, &conj(&kept.formulas)) {
                    *kept = cand.clone();
                    continue 'outer;
                }
            }
            merged.push(cand);
        }
        // refine every candidate until it decides every modal argument
        let discriminators: BTreeSet<Wlwb> = pos_modals
            .iter()
            .chain(neg_modals.iter())
            .map(|(_, _, arg)| arg.clone())
            .collect();
        let mut refined: Vec<Candidate> = Vec::new();
        let mut work = merged;
        while let Some(mut cand) = work.pop() {
            let mut split_on: Option<Wlwb> = None;
            for delta in &discriminators {
                if cand.decided.contains_key(delta) {
                    continue;
                }
                if self.entails(&cand.formulas, delta) {
                    cand.decided.insert(delta.clone(), true);
                } else if self.entails(&cand.formulas, &Wlwb::not(delta.clone())) {
                    cand.decided.insert(delta.clone(), false);
                } else {
                    split_on = Some(delta.clone());
                    break;
                }
            }
            match split_on {
                None => refined.push(cand),
                Some(delta) => {
                    for polarity in [true, false] {
                        let mut sub = cand.clone();
                        let lit = if polarity { delta.clone() } else { Wlwb::not(delta.clone()) };
                        sub.formulas.insert(lit);
                        sub.decided.insert(delta.clone(), polarity);
                        let gamma: Vec<Wlwb> = sub.formulas.iter().cloned().collect();
                        if self.solve(&gamma).is_some() {
                            work.push(sub);
                        }
                    }
                }
            }
        }
        // deduplicate, then prefer candidates that discharge many positive
        // obligations at once: selections then merge successors the way the
        // worked (mod) examples do
        let mut seen = BTreeSet::new();
        refined.retain(|c| seen.insert(c.formulas.clone()));
        refined.sort_by_key(|c| {
            let covered = pos_modals
                .iter()
                .filter(|(_, _, arg)| c.decided.get(arg) == Some(&true))
                .count();
            (usize::MAX - covered, c.formulas.len(), c.formulas.clone())
        });

        // choose one entailing successor per positive modal, then one
        // witness per negated modal constraint
        let mut option_sets: Vec<Vec<usize>> = Vec::new();
        for (_, _, arg) in &pos_modals {
            let opts: Vec<usize> = refined
                .iter()
                .enumerate()
                .filter(|(_, c)| c.decided.get(arg) == Some(&true))
                .map(|(i, _)| i)
                .collect();
            if opts.is_empty() {
                return None;
            }
            option_sets.push(opts);
        }
        let mut selector = vec![0usize; option_sets.len()];
        loop {
            let selected: BTreeSet<usize> = selector
                .iter()
                .enumerate()
                .map(|(i, &k)| option_sets[i][k])
                .collect();
            if let Some(result) =
                self.try_selection(&selected, &refined, &pos_modals, &neg_modals, &make_state)
            {
                return Some(result);
            }
            // advance the mixed-radix selector
            let mut i = 0;
            loop {
                if i == selector.len() {
                    return None;
                }
                selector[i] += 1;
                if selector[i] < option_sets[i].len() {
                    break;
                }
                selector[i] = 0;
                i += 1;
            }
        }
    }

    fn try_selection(
        &mut self,
        selected: &BTreeSet<usize>,
        candidates: &[Candidate],
        pos_modals: &[(bool, Rat, Wlwb)],
        neg_modals: &[(bool, Rat, Wlwb)],
        make_state: &StateBuilder,
    ) -> Option<(Wts, usize)> {
        let ids: Vec<usize> = selected.iter().copied().collect();
        // base intervals with the universal positive constraints applied
        let mut lower: Vec<Interval> = Vec::new();
        let mut upper: Vec<Interval> = Vec::new();
        for &id in &ids {
            let cand = &candidates[id];
            let mut lo = Interval::nonneg();
            let mut hi = Interval::nonneg();
            for (is_l, r, arg) in pos_modals {
                if cand.decided.get(arg) == Some(&true) {
                    if *is_l {
                        lo = lo.intersect(&Interval::at_least(r.clone()));
                    } else {
                        hi = hi.intersect(&Interval::up_to(r.clone()));
                    }
                }
            }
            lower.push(lo);
            upper.push(hi);
        }
        // each negated modal needs a witness successor (or no successor
        // satisfying its argument at all); enumerate the designations
        let mut witness_options: Vec<Vec<Option<usize>>> = Vec::new();
        for (_, _, arg) in neg_modals {
            let entailers: Vec<usize> = (0..ids.len())
                .filter(|k| candidates[ids[*k]].decided.get(arg) == Some(&true))
                .collect();
            if entailers.is_empty() {
                witness_options.push(vec![None]);
            } else {
                witness_options.push(entailers.into_iter().map(Some).collect());
            }
        }
        let mut selector = vec![0usize; witness_options.len()];
        loop {
            let mut lo = lower.clone();
            let mut hi = upper.clone();
            for (j, (is_l, r, _)) in neg_modals.iter().enumerate() {
                if let Some(k) = witness_options[j][selector[j]] {
                    if *is_l {
                        lo[k] = lo[k].intersect(&Interval::below(r.clone()));
                    } else {
                        hi[k] = hi[k].intersect(&Interval::greater_than(r.clone()));
                    }
                }
            }
            if (0..ids.len()).all(|k| lo[k].realizable_against(&hi[k])) {
                if let Some(result) = self.extract(&ids, candidates, &lo, &hi, make_state) {
                    return Some(result);
                }
            }
            let mut i = 0;
            loop {
                if i == selector.len() {
                    return None;
                }
                selector[i] += 1;
                if selector[i] < witness_options[i].len() {
                    break;
                }
                selector[i] = 0;
                i += 1;
            }
        }
    }

    fn extract(
        &mut self,
        ids: &[usize],
        candidates: &[Candidate],
        lower: &[Interval],
        upper: &[Interval],
        make_state: &StateBuilder,
    ) -> Option<(Wts, usize)> {
        let mut subs = Vec::new();
        for (k, &id) in ids.iter().enumerate() {
            let gamma: Vec<Wlwb> = candidates[id].formulas.iter().cloned().collect();
            let (sub, wit) = self.solve(&gamma)?;
            // lower weight: least value compatible with both intervals
            let lo_box = match upper[k].hi.as_fin() {
                Some(h) => lower[k].intersect(&Interval::up_to(h.clone())),
                None => lower[k].clone(),
            };
            let ell = lo_box.pick_min().or_else(|| lower[k].pick_min())?;
            // upper weight: the largest realizable bound, or the least one
            // above `ell` when unbounded
            let above = Interval::at_least(ell.clone());
            let hi_box = upper[k].intersect(&above);
            let u = match hi_box.pick_max() {
                Some(v) => v,
                None => hi_box.pick_min()?.max(ell.clone()),
            };
            let mut weights = vec![ell.clone()];
            if u != ell {
                weights.push(u);
            }
            subs.push((sub, wit, weights));
        }
        Some(make_state(subs))
    }
}

fn conj(set: &BTreeSet<Wlwb>) -> Wlwb {
    let mut iter = set.iter().cloned();
    let first = iter.next().expect("nonempty obligation set");
    iter.fold(first, Wlwb::and)
}
