//! Weighted transition systems: states, nonnegative rational transition
//! weights, atomic-proposition labels. Hosts the WLWB model checker, the two
//! bisimulations and the axiom-soundness suite.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ratio::{parse_rat, rat_from_int, rat_to_string, Ext, Rat};
use crate::wlwb::Wlwb;

#[derive(Debug, Error, PartialEq)]
pub enum WtsError {
    #[error("line {0}: {1}")]
    Parse(usize, String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("negative weight `{0}`")]
    NegativeWeight(String),
}

/// A finite weighted transition system.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Wts {
    names: Vec<String>,
    index: HashMap<String, usize>,
    labels: Vec<BTreeSet<String>>,
    transitions: Vec<(usize, Rat, usize)>,
}

impl Wts {
    pub fn new() -> Self {
        Wts::default()
    }

    pub fn add_state<S: Into<String>>(&mut self, name: S, labels: BTreeSet<String>) -> usize {
        let name = name.into();
        let id = self.names.len();
        self.index.insert(name.clone(), id);
        self.names.push(name);
        self.labels.push(labels);
        id
    }

    pub fn add_transition(&mut self, src: usize, weight: Rat, dst: usize) -> Result<(), WtsError> {
        if weight < rat_from_int(0) {
            return Err(WtsError::NegativeWeight(rat_to_string(&weight)));
        }
        if !self.transitions.contains(&(src, weight.clone(), dst)) {
            self.transitions.push((src, weight, dst));
        }
        Ok(())
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn state_id(&self, name: &str) -> Result<usize, WtsError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| WtsError::UnknownState(name.to_string()))
    }

    pub fn state_name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn labels_of(&self, id: usize) -> &BTreeSet<String> {
        &self.labels[id]
    }

    pub fn transitions(&self) -> &[(usize, Rat, usize)] {
        &self.transitions
    }

    /// Disjoint union; returns the id offset applied to `other`'s states.
    pub fn absorb(&mut self, other: &Wts) -> usize {
        let offset = self.names.len();
        for (i, name) in other.names.iter().enumerate() {
            let fresh = format!("{name}#{}", offset + i);
            self.add_state(fresh, other.labels[i].clone());
        }
        for (s, w, t) in &other.transitions {
            self.transitions.push((s + offset, w.clone(), t + offset));
        }
        offset
    }

    /// `(θ⁻, θ⁺)` of the set of weights from `s` into `target`; when no
    /// transition reaches the set the pair is `(-inf, +inf)`, which makes
    /// both `L_r` and `M_r` false there.
    pub fn image_bounds(&self, s: usize, target: &[bool]) -> (Ext, Ext) {
        let mut lo: Option<Rat> = None;
        let mut hi: Option<Rat> = None;
        for (src, w, dst) in &self.transitions {
            if *src == s && target[*dst] {
                lo = Some(match lo {
                    None => w.clone(),
                    Some(cur) => cur.min(w.clone()),
                });
                hi = Some(match hi {
                    None => w.clone(),
                    Some(cur) => cur.max(w.clone()),
                });
            }
        }
        match (lo, hi) {
            (Some(l), Some(h)) => (Ext::Fin(l), Ext::Fin(h)),
            _ => (Ext::NegInf, Ext::PosInf),
        }
    }

    /// Line-based text format: `wts`, `state <id> {p1,p2}`, `trans <src>
    /// <weight> <dst>`, `#` comments.
    pub fn parse(text: &str) -> Result<Wts, WtsError> {
        let mut wts = Wts::new();
        let mut header_seen = false;
        let mut pending: Vec<(usize, String, Rat, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = lineno + 1;
            if !header_seen {
                if line != "wts" {
                    return Err(WtsError::Parse(lineno, "expected `wts` header".into()));
                }
                header_seen = true;
                continue;
            }
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("state") => {
                    let name = parts
                        .next()
                        .ok_or_else(|| WtsError::Parse(lineno, "state needs a name".into()))?;
                    let rest: String = parts.collect::<Vec<_>>().join(" ");
                    let labels = parse_label_set(&rest)
                        .map_err(|e| WtsError::Parse(lineno, e))?;
                    if wts.index.contains_key(name) {
                        return Err(WtsError::Parse(lineno, format!("duplicate state `{name}`")));
                    }
                    wts.add_state(name, labels);
                }
                Some("trans") => {
                    let src = parts
                        .next()
                        .ok_or_else(|| WtsError::Parse(lineno, "trans needs source".into()))?;
                    let w = parts
                        .next()
                        .ok_or_else(|| WtsError::Parse(lineno, "trans needs weight".into()))?;
                    let dst = parts
                        .next()
                        .ok_or_else(|| WtsError::Parse(lineno, "trans needs target".into()))?;
                    let weight =
                        parse_rat(w).map_err(|e| WtsError::Parse(lineno, e))?;
                    pending.push((lineno, src.to_string(), weight, dst.to_string()));
                }
                Some(other) => {
                    return Err(WtsError::Parse(lineno, format!("unknown directive `{other}`")))
                }
                None => unreachable!(),
            }
        }
        for (lineno, src, w, dst) in pending {
            let s = wts
                .state_id(&src)
                .map_err(|_| WtsError::Parse(lineno, format!("unknown state `{src}`")))?;
            let t = wts
                .state_id(&dst)
                .map_err(|_| WtsError::Parse(lineno, format!("unknown state `{dst}`")))?;
            wts.add_transition(s, w, t)?;
        }
        Ok(wts)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("wts\n");
        for (i, name) in self.names.iter().enumerate() {
            let labels: Vec<&str> = self.labels[i].iter().map(|s| s.as_str()).collect();
            let _ = writeln!(out, "state {} {{{}}}", name, labels.join(","));
        }
        for (s, w, t) in &self.transitions {
            let _ = writeln!(
                out,
                "trans {} {} {}",
                self.names[*s],
                rat_to_string(w),
                self.names[*t]
            );
        }
        out
    }
}

pub(crate) fn parse_label_set(text: &str) -> Result<BTreeSet<String>, String> {
    let text = text.trim();
    if !text.starts_with('{') || !text.ends_with('}') {
        return Err(format!("expected `{{labels}}`, got `{text}`"));
    }
    let inner = &text[1..text.len() - 1];
    let mut out = BTreeSet::new();
    for item in inner.split(',') {
        let item = item.trim();
        if !item.is_empty() {
            out.insert(item.to_string());
        }
    }
    Ok(out)
}

// --- model checking ---------------------------------------------------------

/// Subformula-labelling model checker; linear in `|φ|·(|S|+|→|)`.
pub fn model_check_wlwb(model: &Wts, state: usize, phi: &Wlwb) -> bool {
    sat_set(model, phi)[state]
}

/// The set of states satisfying `phi`, as a bitvector.
pub fn sat_set(model: &Wts, phi: &Wlwb) -> Vec<bool> {
    match phi {
        Wlwb::Atom(p) => (0..model.state_count())
            .map(|s| model.labels_of(s).contains(p))
            .collect(),
        Wlwb::Not(inner) => sat_set(model, inner).into_iter().map(|b| !b).collect(),
        Wlwb::And(a, b) => {
            let sa = sat_set(model, a);
            let sb = sat_set(model, b);
            sa.into_iter().zip(sb).map(|(x, y)| x && y).collect()
        }
        Wlwb::L(r, inner) => {
            let target = sat_set(model, inner);
            (0..model.state_count())
                .map(|s| {
                    let (lo, _) = model.image_bounds(s, &target);
                    lo >= Ext::Fin(r.clone())
                })
                .collect()
        }
        Wlwb::M(r, inner) => {
            let target = sat_set(model, inner);
            (0..model.state_count())
                .map(|s| {
                    let (_, hi) = model.image_bounds(s, &target);
                    hi <= Ext::Fin(r.clone())
                })
                .collect()
        }
    }
}

// --- bisimulations ----------------------------------------------------------

fn initial_partition(model: &Wts) -> Vec<usize> {
    let mut class_of_labels: BTreeMap<&BTreeSet<String>, usize> = BTreeMap::new();
    let mut partition = vec![0usize; model.state_count()];
    for (s, slot) in partition.iter_mut().enumerate() {
        let next = class_of_labels.len();
        *slot = *class_of_labels.entry(model.labels_of(s)).or_insert(next);
    }
    partition
}

fn refine<Sig: Ord>(partition: &mut Vec<usize>, signature: impl Fn(usize, &[usize]) -> Sig) -> bool {
    let mut changed = false;
    loop {
        let mut sig_class: BTreeMap<(usize, Sig), usize> = BTreeMap::new();
        let mut next = vec![0usize; partition.len()];
        for s in 0..partition.len() {
            let sig = (partition[s], signature(s, partition));
            let fresh = sig_class.len();
            next[s] = *sig_class.entry(sig).or_insert(fresh);
        }
        if next == *partition {
            return changed;
        }
        *partition = next;
        changed = true;
    }
}

/// Exact-weight bisimilarity: states must match every transition weight into
/// every class.
pub fn weighted_bisim(model: &Wts, s: usize, t: usize) -> bool {
    let mut partition = initial_partition(model);
    refine(&mut partition, |state, classes| {
        let mut sig: BTreeSet<(Rat, usize)> = BTreeSet::new();
        for (src, w, dst) in model.transitions() {
            if *src == state {
                sig.insert((w.clone(), classes[*dst]));
            }
        }
        sig
    });
    partition[s] == partition[t]
}

/// Generalized weighted bisimilarity: only the lower and upper bounds of the
/// image set into each class must agree.
pub fn gen_weighted_bisim(model: &Wts, s: usize, t: usize) -> bool {
    let mut partition = initial_partition(model);
    refine(&mut partition, |state, classes| {
        let class_count = classes.iter().max().map_or(0, |m| m + 1);
        let mut sig: Vec<(Ext, Ext)> = Vec::with_capacity(class_count);
        for class in 0..class_count {
            let members: Vec<bool> = (0..model.state_count())
                .map(|q| classes[q] == class)
                .collect();
            sig.push(model.image_bounds(state, &members));
        }
        sig
    });
    partition[s] == partition[t]
}

// --- axiom soundness suite ---------------------------------------------------

#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub models_checked: usize,
    pub instances_checked: usize,
    pub violations: Vec<String>,
}

impl AxiomReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn random_wts(rng: &mut ChaCha8Rng) -> Wts {
    let mut wts = Wts::new();
    let n = rng.gen_range(2..=5);
    let props = ["p", "q"];
    for i in 0..n {
        let mut labels = BTreeSet::new();
        for p in props {
            if rng.gen_bool(0.5) {
                labels.insert(p.to_string());
            }
        }
        wts.add_state(format!("s{i}"), labels);
    }
    let weights = [
        rat_from_int(0),
        rat_from_int(1),
        crate::ratio::rat_frac(1, 2),
        rat_from_int(2),
        rat_from_int(3),
        crate::ratio::rat_frac(5, 2),
    ];
    let m = rng.gen_range(0..=(2 * n));
    for _ in 0..m {
        let s = rng.gen_range(0..n);
        let t = rng.gen_range(0..n);
        let w = weights[rng.gen_range(0..weights.len())].clone();
        let _ = wts.add_transition(s, w, t);
    }
    wts
}

fn random_formula(rng: &mut ChaCha8Rng, depth: usize) -> Wlwb {
    let constants = [rat_from_int(0), rat_from_int(1), rat_from_int(2), crate::ratio::rat_frac(1, 2)];
    if depth == 0 || rng.gen_bool(0.4) {
        let p = if rng.gen_bool(0.5) { "p" } else { "q" };
        return Wlwb::atom(p);
    }
    match rng.gen_range(0..4) {
        0 => Wlwb::not(random_formula(rng, depth - 1)),
        1 => Wlwb::and(random_formula(rng, depth - 1), random_formula(rng, depth - 1)),
        2 => Wlwb::l(
            constants[rng.gen_range(0..constants.len())].clone(),
            random_formula(rng, depth - 1),
        ),
        _ => Wlwb::m(
            constants[rng.gen_range(0..constants.len())].clone(),
            random_formula(rng, depth - 1),
        ),
    }
}

fn valid(model: &Wts, phi: &Wlwb) -> bool {
    sat_set(model, phi).into_iter().all(|b| b)
}

/// Instantiates every axiom schema and inference rule on seeded random
/// systems and formulas; each instance must model-check valid. A violation
/// indicates an implementation bug, since the axiomatisation is sound.
pub fn axiom_soundness_suite(seed: u64, n_models: usize) -> AxiomReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    let mut instances = 0usize;
    for model_idx in 0..n_models {
        let model = random_wts(&mut rng);
        let phi = random_formula(&mut rng, 2);
        let psi = random_formula(&mut rng, 2);
        let r = [rat_from_int(0), rat_from_int(1), crate::ratio::rat_frac(3, 2)]
            [rng.gen_range(0..3)]
        .clone();
        let q = [rat_from_int(1), crate::ratio::rat_frac(1, 2)][rng.gen_range(0..2)].clone();

        let bot = Wlwb::and(Wlwb::atom("p"), Wlwb::not(Wlwb::atom("p")));
        let axioms: Vec<(&str, Wlwb)> = vec![
            ("A1", Wlwb::not(Wlwb::l(rat_from_int(0), bot))),
            (
                "A2",
                Wlwb::implies(
                    Wlwb::l(r.clone() + q.clone(), phi.clone()),
                    Wlwb::l(r.clone(), phi.clone()),
                ),
            ),
            (
                "A2'",
                Wlwb::implies(
                    Wlwb::m(r.clone(), phi.clone()),
                    Wlwb::m(r.clone() + q.clone(), phi.clone()),
                ),
            ),
            (
                "A3",
                Wlwb::implies(
                    Wlwb::and(
                        Wlwb::l(r.clone(), phi.clone()),
                        Wlwb::l(q.clone(), psi.clone()),
                    ),
                    Wlwb::l(r.clone().min(q.clone()), Wlwb::or(phi.clone(), psi.clone())),
                ),
            ),
            (
                "A3'",
                Wlwb::implies(
                    Wlwb::and(
                        Wlwb::m(r.clone(), phi.clone()),
                        Wlwb::m(q.clone(), psi.clone()),
                    ),
                    Wlwb::m(r.clone().max(q.clone()), Wlwb::or(phi.clone(), psi.clone())),
                ),
            ),
            (
                "A4",
                Wlwb::implies(
                    Wlwb::l(r.clone(), Wlwb::or(phi.clone(), psi.clone())),
                    Wlwb::or(
                        Wlwb::l(r.clone(), phi.clone()),
                        Wlwb::l(r.clone(), psi.clone()),
                    ),
                ),
            ),
            (
                "A5",
                Wlwb::implies(
                    Wlwb::not(Wlwb::l(rat_from_int(0), psi.clone())),
                    Wlwb::implies(
                        Wlwb::l(r.clone(), phi.clone()),
                        Wlwb::l(r.clone(), Wlwb::or(phi.clone(), psi.clone())),
                    ),
                ),
            ),
            (
                "A5'",
                Wlwb::implies(
                    Wlwb::not(Wlwb::l(rat_from_int(0), psi.clone())),
                    Wlwb::implies(
                        Wlwb::m(r.clone(), phi.clone()),
                        Wlwb::m(r.clone(), Wlwb::or(phi.clone(), psi.clone())),
                    ),
                ),
            ),
            (
                "A6",
                Wlwb::implies(
                    Wlwb::l(r.clone() + q.clone(), phi.clone()),
                    Wlwb::not(Wlwb::m(r.clone(), phi.clone())),
                ),
            ),
            (
                "A7",
                Wlwb::implies(
                    Wlwb::m(r.clone(), phi.clone()),
                    Wlwb::l(rat_from_int(0), phi.clone()),
                ),
            ),
        ];
        for (name, instance) in axioms {
            instances += 1;
            if !valid(&model, &instance) {
                violations.push(format!("model {model_idx}: axiom {name} violated: {instance}"));
            }
        }
        // rules fire only when the premise is valid on this model
        if valid(&model, &Wlwb::implies(phi.clone(), psi.clone())) {
            let r1 = Wlwb::implies(
                Wlwb::and(
                    Wlwb::l(r.clone(), psi.clone()),
                    Wlwb::l(rat_from_int(0), phi.clone()),
                ),
                Wlwb::l(r.clone(), phi.clone()),
            );
            let r1p = Wlwb::implies(
                Wlwb::and(
                    Wlwb::m(r.clone(), psi.clone()),
                    Wlwb::l(rat_from_int(0), phi.clone()),
                ),
                Wlwb::m(r.clone(), phi.clone()),
            );
            let r2 = Wlwb::implies(
                Wlwb::l(rat_from_int(0), phi.clone()),
                Wlwb::l(rat_from_int(0), psi.clone()),
            );
            for (name, instance) in [("R1", r1), ("R1'", r1p), ("R2", r2)] {
                instances += 1;
                if !valid(&model, &instance) {
                    violations
                        .push(format!("model {model_idx}: rule {name} violated: {instance}"));
                }
            }
        }
    }
    AxiomReport { models_checked: n_models, instances_checked: instances, violations }
}
