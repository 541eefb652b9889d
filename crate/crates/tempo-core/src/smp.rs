//! Semi-Markov processes: finitely-supported probabilistic transitions over
//! (input, state, output), a residence-time CDF per state, and labels.
//! Reactive (= semi-Markov decision process) and generative processes are
//! the special cases used by the preorders; rows may be sub-stochastic
//! (deadlock mass).

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use crate::cdf::{parse_cdf, Cdf, CdfError, CompositionKind};
use crate::ratio::{parse_rat, rat_to_f64, rat_to_string, Rat};
use crate::wts::parse_label_set;

#[derive(Debug, Error, PartialEq)]
pub enum SmpError {
    #[error("line {0}: {1}")]
    Parse(usize, String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown input `{0}`")]
    UnknownInput(String),
    #[error("unknown output `{0}`")]
    UnknownOutput(String),
    #[error("kind mismatch: {0}")]
    KindMismatch(String),
    #[error("transition row for state `{0}` under `{1}` sums above one")]
    RowSum(String, String),
    #[error("scheduler horizon {horizon} too short for word of length {needed}")]
    HorizonTooShort { horizon: usize, needed: usize },
    #[error("scheduler enumeration would produce {count} schedulers, over the limit {limit}")]
    ExplosionGuard { count: f64, limit: f64 },
    #[error(transparent)]
    Cdf(#[from] CdfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmpKind {
    General,
    Reactive,
    Generative,
}

impl SmpKind {
    fn name(&self) -> &'static str {
        match self {
            SmpKind::General => "general",
            SmpKind::Reactive => "reactive",
            SmpKind::Generative => "generative",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Smp {
    names: Vec<String>,
    index: HashMap<String, usize>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// trans[state][input] = finitely-supported subdistribution over
    /// (probability, successor, output)
    trans: Vec<Vec<Vec<(Rat, usize, usize)>>>,
    residence: Vec<Cdf<f64>>,
    labels: Vec<BTreeSet<String>>,
    kind: SmpKind,
}

impl Smp {
    pub fn new(kind: SmpKind, inputs: Vec<String>, outputs: Vec<String>) -> Smp {
        Smp {
            names: Vec::new(),
            index: HashMap::new(),
            inputs,
            outputs,
            trans: Vec::new(),
            residence: Vec::new(),
            labels: Vec::new(),
            kind,
        }
    }

    pub fn kind(&self) -> SmpKind {
        self.kind
    }

    pub fn add_state<S: Into<String>>(
        &mut self,
        name: S,
        residence: Cdf<f64>,
        labels: BTreeSet<String>,
    ) -> usize {
        let name = name.into();
        let id = self.names.len();
        self.index.insert(name.clone(), id);
        self.names.push(name);
        self.residence.push(residence);
        self.labels.push(labels);
        self.trans.push(vec![Vec::new(); self.inputs.len()]);
        id
    }

    pub fn add_transition(
        &mut self,
        src: usize,
        input: usize,
        prob: Rat,
        dst: usize,
        output: usize,
    ) -> Result<(), SmpError> {
        if prob < Rat::zero() {
            return Err(SmpError::Parse(0, "negative probability".into()));
        }
        if self.kind == SmpKind::Reactive && input != output {
            return Err(SmpError::KindMismatch(
                "reactive transitions must echo their input".into(),
            ));
        }
        self.trans[src][input].push((prob, dst, output));
        let total: Rat = self.trans[src][input]
            .iter()
            .map(|(p, _, _)| p.clone())
            .sum();
        if total > Rat::one() {
            return Err(SmpError::RowSum(
                self.names[src].clone(),
                self.inputs[input].clone(),
            ));
        }
        Ok(())
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn state_id(&self, name: &str) -> Result<usize, SmpError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| SmpError::UnknownState(name.to_string()))
    }

    pub fn state_name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn input_id(&self, name: &str) -> Result<usize, SmpError> {
        self.inputs
            .iter()
            .position(|i| i == name)
            .ok_or_else(|| SmpError::UnknownInput(name.to_string()))
    }

    pub fn output_id(&self, name: &str) -> Result<usize, SmpError> {
        self.outputs
            .iter()
            .position(|o| o == name)
            .ok_or_else(|| SmpError::UnknownOutput(name.to_string()))
    }

    pub fn residence(&self, s: usize) -> &Cdf<f64> {
        &self.residence[s]
    }

    pub fn set_residence(&mut self, s: usize, cdf: Cdf<f64>) {
        self.residence[s] = cdf;
    }

    pub fn labels_of(&self, s: usize) -> &BTreeSet<String> {
        &self.labels[s]
    }

    pub fn row(&self, s: usize, input: usize) -> &[(Rat, usize, usize)] {
        &self.trans[s][input]
    }

    /// Reactive view of a row: (probability, successor) pairs.
    pub fn reactive_row(&self, s: usize, input: usize) -> Vec<(Rat, usize)> {
        self.trans[s][input]
            .iter()
            .map(|(p, dst, _)| (p.clone(), *dst))
            .collect()
    }

    pub fn is_reactive(&self) -> bool {
        self.kind == SmpKind::Reactive
    }

    pub fn is_generative(&self) -> bool {
        self.kind == SmpKind::Generative || self.inputs.len() == 1
    }

    /// Disjoint union with `other` (same alphabets required); returns the id
    /// offset applied to `other`'s states.
    pub fn absorb(&mut self, other: &Smp) -> Result<usize, SmpError> {
        if self.inputs != other.inputs || self.outputs != other.outputs {
            return Err(SmpError::KindMismatch(
                "disjoint union requires identical alphabets".into(),
            ));
        }
        let offset = self.names.len();
        for s in 0..other.state_count() {
            let fresh = format!("{}#{}", other.names[s], offset + s);
            self.add_state(fresh, other.residence[s].clone(), other.labels[s].clone());
        }
        for s in 0..other.state_count() {
            for a in 0..other.inputs.len() {
                for (p, dst, b) in &other.trans[s][a] {
                    self.trans[s + offset][a].push((p.clone(), dst + offset, *b));
                }
            }
        }
        Ok(offset)
    }

    /// Copy of this process with every residence-time distribution
    /// accelerated by `eps`.
    pub fn accelerated_copy(&self, eps: f64) -> Smp {
        let mut out = self.clone();
        for cdf in &mut out.residence {
            *cdf = cdf.accelerate(eps);
        }
        for name in &mut out.names {
            *name = format!("{name}@{eps}");
        }
        out.index = out
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        out
    }

    /// CSP-style synchronous parallel composition with residence times
    /// combined by `star`.
    pub fn compose(m1: &Smp, m2: &Smp, star: CompositionKind) -> Result<Smp, SmpError> {
        if !m1.is_reactive() || !m2.is_reactive() {
            return Err(SmpError::KindMismatch(
                "parallel composition is defined for reactive processes".into(),
            ));
        }
        if m1.inputs != m2.inputs {
            return Err(SmpError::KindMismatch(
                "parallel composition requires identical input alphabets".into(),
            ));
        }
        let mut out = Smp::new(SmpKind::Reactive, m1.inputs.clone(), m1.outputs.clone());
        for s1 in 0..m1.state_count() {
            for s2 in 0..m2.state_count() {
                let name = format!("{}|{}", m1.names[s1], m2.names[s2]);
                let residence = Cdf::compose(star, &m1.residence[s1], &m2.residence[s2])?;
                let labels: BTreeSet<String> =
                    m1.labels[s1].union(&m2.labels[s2]).cloned().collect();
                out.add_state(name, residence, labels);
            }
        }
        let pair = |s1: usize, s2: usize| s1 * m2.state_count() + s2;
        for s1 in 0..m1.state_count() {
            for s2 in 0..m2.state_count() {
                for a in 0..m1.inputs.len() {
                    for (p1, t1, _) in &m1.trans[s1][a] {
                        for (p2, t2, _) in &m2.trans[s2][a] {
                            out.add_transition(
                                pair(s1, s2),
                                a,
                                p1.clone() * p2.clone(),
                                pair(*t1, *t2),
                                a,
                            )?;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// File format: `smp reactive|generative|general`, `inputs a,b`,
    /// `outputs a,b`, `state <id> <cdf> {labels}`, `trans <src> <input>
    /// <prob> <dst> [<output>]`.
    pub fn parse(text: &str) -> Result<Smp, SmpError> {
        let mut kind: Option<SmpKind> = None;
        let mut inputs: Option<Vec<String>> = None;
        let mut outputs: Option<Vec<String>> = None;
        let mut states: Vec<(usize, String, String, String)> = Vec::new();
        let mut transitions: Vec<(usize, Vec<String>)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = lineno + 1;
            let mut parts = line.split_whitespace();
            match parts.next().unwrap() {
                "smp" => {
                    kind = Some(match parts.next() {
                        Some("reactive") => SmpKind::Reactive,
                        Some("generative") => SmpKind::Generative,
                        Some("general") => SmpKind::General,
                        other => {
                            return Err(SmpError::Parse(
                                lineno,
                                format!("bad smp kind {other:?}"),
                            ))
                        }
                    });
                }
                "inputs" => {
                    let rest: String = parts.collect::<Vec<_>>().join(" ");
                    inputs = Some(split_csv(&rest));
                }
                "outputs" => {
                    let rest: String = parts.collect::<Vec<_>>().join(" ");
                    outputs = Some(split_csv(&rest));
                }
                "state" => {
                    let name = parts
                        .next()
                        .ok_or_else(|| SmpError::Parse(lineno, "state needs a name".into()))?;
                    let cdf = parts
                        .next()
                        .ok_or_else(|| SmpError::Parse(lineno, "state needs a cdf".into()))?;
                    let rest: String = parts.collect::<Vec<_>>().join(" ");
                    states.push((lineno, name.into(), cdf.into(), rest));
                }
                "trans" => {
                    let rest: Vec<String> = parts.map(|s| s.to_string()).collect();
                    transitions.push((lineno, rest));
                }
                other => {
                    return Err(SmpError::Parse(lineno, format!("unknown directive `{other}`")))
                }
            }
        }
        let kind = kind.ok_or_else(|| SmpError::Parse(0, "missing `smp` header".into()))?;
        let inputs = inputs.ok_or_else(|| SmpError::Parse(0, "missing `inputs`".into()))?;
        let outputs = match (kind, outputs) {
            (SmpKind::Reactive, None) => inputs.clone(),
            (_, Some(o)) => o,
            (_, None) => return Err(SmpError::Parse(0, "missing `outputs`".into())),
        };
        if kind == SmpKind::Reactive && inputs != outputs {
            return Err(SmpError::KindMismatch(
                "reactive processes need inputs = outputs".into(),
            ));
        }
        if kind == SmpKind::Generative && inputs.len() != 1 {
            return Err(SmpError::KindMismatch(
                "generative processes need a single input".into(),
            ));
        }
        let mut smp = Smp::new(kind, inputs, outputs);
        for (lineno, name, cdf_text, labels_text) in states {
            let cdf = parse_cdf::<f64>(&cdf_text)
                .map_err(|e| SmpError::Parse(lineno, e.to_string()))?;
            let labels = if labels_text.trim().is_empty() {
                BTreeSet::new()
            } else {
                parse_label_set(&labels_text).map_err(|e| SmpError::Parse(lineno, e))?
            };
            if smp.index.contains_key(&name) {
                return Err(SmpError::Parse(lineno, format!("duplicate state `{name}`")));
            }
            smp.add_state(name, cdf, labels);
        }
        for (lineno, fields) in transitions {
            if fields.len() < 4 {
                return Err(SmpError::Parse(
                    lineno,
                    "trans needs `<src> <input> <prob> <dst> [<output>]`".into(),
                ));
            }
            let src = smp
                .state_id(&fields[0])
                .map_err(|e| SmpError::Parse(lineno, e.to_string()))?;
            let input = smp
                .input_id(&fields[1])
                .map_err(|e| SmpError::Parse(lineno, e.to_string()))?;
            let prob =
                parse_rat(&fields[2]).map_err(|e| SmpError::Parse(lineno, e))?;
            let dst = smp
                .state_id(&fields[3])
                .map_err(|e| SmpError::Parse(lineno, e.to_string()))?;
            let output = match fields.get(4) {
                Some(o) => smp
                    .output_id(o)
                    .map_err(|e| SmpError::Parse(lineno, e.to_string()))?,
                None => {
                    if smp.kind == SmpKind::Reactive {
                        input
                    } else {
                        return Err(SmpError::Parse(
                            lineno,
                            "non-reactive transitions need an explicit output".into(),
                        ));
                    }
                }
            };
            smp.add_transition(src, input, prob, dst, output)
                .map_err(|e| match e {
                    SmpError::RowSum(..) | SmpError::KindMismatch(_) => e,
                    _ => SmpError::Parse(lineno, e.to_string()),
                })?;
        }
        Ok(smp)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "smp {}", self.kind.name());
        let _ = writeln!(out, "inputs {}", self.inputs.join(","));
        let _ = writeln!(out, "outputs {}", self.outputs.join(","));
        for s in 0..self.state_count() {
            let labels: Vec<&str> = self.labels[s].iter().map(|x| x.as_str()).collect();
            let _ = writeln!(
                out,
                "state {} {} {{{}}}",
                self.names[s],
                self.residence[s],
                labels.join(",")
            );
        }
        for s in 0..self.state_count() {
            for a in 0..self.inputs.len() {
                for (p, dst, b) in &self.trans[s][a] {
                    let _ = writeln!(
                        out,
                        "trans {} {} {} {} {}",
                        self.names[s],
                        self.inputs[a],
                        rat_to_string(p),
                        self.names[*dst],
                        self.outputs[*b]
                    );
                }
            }
        }
        out
    }
}

fn split_csv(text: &str) -> Vec<String> {
    text.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

// --- schedulers ---------------------------------------------------------------

/// Finite-horizon, time-abstract policy over input choices. Histories are
/// the state sequences visited so far, including the current state.
#[derive(Debug, Clone)]
pub enum Scheduler {
    /// the unique scheduler of single-input processes
    Trivial,
    /// depends only on the current state
    Memoryless { choice: Vec<Vec<(Rat, usize)>> },
    /// full history-dependent table
    Tabular { horizon: usize, choice: HashMap<Vec<usize>, usize> },
}

impl Scheduler {
    pub fn horizon(&self) -> usize {
        match self {
            Scheduler::Trivial | Scheduler::Memoryless { .. } => usize::MAX,
            Scheduler::Tabular { horizon, .. } => *horizon,
        }
    }

    pub fn is_memoryless(&self) -> bool {
        !matches!(self, Scheduler::Tabular { .. })
    }

    /// Distribution over inputs for the given history.
    pub fn decide(&self, history: &[usize]) -> Vec<(Rat, usize)> {
        match self {
            Scheduler::Trivial => vec![(Rat::one(), 0)],
            Scheduler::Memoryless { choice } => {
                let s = *history.last().expect("nonempty history");
                choice[s].clone()
            }
            Scheduler::Tabular { choice, .. } => match choice.get(history) {
                Some(a) => vec![(Rat::one(), *a)],
                None => vec![(Rat::one(), 0)],
            },
        }
    }

    pub fn memoryless_deterministic(smp: &Smp, pick: &[usize]) -> Scheduler {
        Scheduler::Memoryless {
            choice: (0..smp.state_count())
                .map(|s| vec![(Rat::one(), pick[s])])
                .collect(),
        }
    }
}

/// A time-bounded cylinder: an output word together with a deadline.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeBoundedCylinder {
    pub word: Vec<usize>,
    pub bound: f64,
}

/// Probability that, from `s` under `sigma`, the first `|word|` outputs
/// spell `word` with total elapsed time at most `bound`. Exact path
/// enumeration: the time to traverse a path is the convolution of the
/// residence times along it.
pub fn cylinder_prob(
    smp: &Smp,
    sigma: &Scheduler,
    s: usize,
    cyl: &TimeBoundedCylinder,
) -> Result<f64, SmpError> {
    if cyl.word.is_empty() {
        return Ok(1.0); // the full path space
    }
    if sigma.horizon() < cyl.word.len() {
        return Err(SmpError::HorizonTooShort {
            horizon: sigma.horizon(),
            needed: cyl.word.len(),
        });
    }
    let mut terms: Vec<f64> = Vec::new();
    let mut history = vec![s];
    let mut chain: Vec<Cdf<f64>> = Vec::new();
    walk_paths(smp, sigma, cyl, Rat::one(), &mut history, &mut chain, &mut terms);
    // compensated summation keeps the result order-independent
    let mut total = 0.0f64;
    let mut comp = 0.0f64;
    for v in terms {
        let y = v - comp;
        let t = total + y;
        comp = (t - total) - y;
        total = t;
    }
    Ok(total.clamp(0.0, 1.0))
}

fn walk_paths(
    smp: &Smp,
    sigma: &Scheduler,
    cyl: &TimeBoundedCylinder,
    branch_prob: Rat,
    history: &mut Vec<usize>,
    chain: &mut Vec<Cdf<f64>>,
    terms: &mut Vec<f64>,
) {
    let depth = chain.len();
    if depth == cyl.word.len() {
        let conv = Cdf::convolve_all(chain.iter().cloned());
        terms.push(rat_to_f64(&branch_prob) * conv.eval(cyl.bound));
        return;
    }
    let current = *history.last().unwrap();
    let want = cyl.word[depth];
    for (w_a, a) in sigma.decide(history) {
        if w_a.is_zero() {
            continue;
        }
        for (p, dst, b) in smp.row(current, a) {
            if *b != want || p.is_zero() {
                continue;
            }
            history.push(*dst);
            chain.push(smp.residence(current).clone());
            walk_paths(
                smp,
                sigma,
                cyl,
                branch_prob.clone() * w_a.clone() * p.clone(),
                history,
                chain,
                terms,
            );
            chain.pop();
            history.pop();
        }
    }
}

/// Monte-Carlo estimate of the same cylinder probability, used as an
/// independent oracle in the test suites.
pub fn cylinder_prob_monte_carlo<R: Rng>(
    smp: &Smp,
    sigma: &Scheduler,
    s: usize,
    cyl: &TimeBoundedCylinder,
    samples: usize,
    rng: &mut R,
) -> f64 {
    let mut hits = 0usize;
    'outer: for _ in 0..samples {
        let mut state = s;
        let mut history = vec![s];
        let mut elapsed = 0.0f64;
        for &want in &cyl.word {
            // draw an input
            let dist = sigma.decide(&history);
            let mut u = rng.gen::<f64>();
            let mut picked = None;
            for (w, a) in &dist {
                let w = rat_to_f64(w);
                if u < w {
                    picked = Some(*a);
                    break;
                }
                u -= w;
            }
            let Some(a) = picked else { continue 'outer };
            // draw a successor / output
            let mut u = rng.gen::<f64>();
            let mut step = None;
            for (p, dst, b) in smp.row(state, a) {
                let p = rat_to_f64(p);
                if u < p {
                    step = Some((*dst, *b));
                    break;
                }
                u -= p;
            }
            let Some((dst, b)) = step else { continue 'outer };
            let Some(dt) = smp.residence(state).sample(rng) else { continue 'outer };
            elapsed += dt;
            if b != want || elapsed > cyl.bound {
                continue 'outer;
            }
            state = dst;
            history.push(dst);
        }
        hits += 1;
    }
    hits as f64 / samples as f64
}

// --- deterministic scheduler enumeration ---------------------------------------

/// Histories from `start` of length `1..=horizon+1` along transitions with
/// positive probability under some input.
fn reachable_histories(smp: &Smp, start: usize, horizon: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut frontier = vec![vec![start]];
    for _ in 0..=horizon {
        let mut next = Vec::new();
        for h in &frontier {
            out.push(h.clone());
            let last = *h.last().unwrap();
            let succs: BTreeSet<usize> = (0..smp.inputs.len())
                .flat_map(|a| smp.row(last, a).iter())
                .filter(|(p, _, _)| !p.is_zero())
                .map(|(_, dst, _)| *dst)
                .collect();
            for dst in succs {
                let mut h2 = h.clone();
                h2.push(dst);
                next.push(h2);
            }
        }
        frontier = next;
    }
    out
}

/// All deterministic history-dependent schedulers up to the horizon, lazily.
pub struct SchedulerStream {
    histories: Vec<Vec<usize>>,
    n_inputs: usize,
    horizon: usize,
    selector: Vec<usize>,
    done: bool,
}

impl Iterator for SchedulerStream {
    type Item = Scheduler;

    fn next(&mut self) -> Option<Scheduler> {
        if self.done {
            return None;
        }
        let choice: HashMap<Vec<usize>, usize> = self
            .histories
            .iter()
            .cloned()
            .zip(self.selector.iter().copied())
            .collect();
        // advance
        let mut i = 0;
        loop {
            if i == self.selector.len() {
                self.done = true;
                break;
            }
            self.selector[i] += 1;
            if self.selector[i] < self.n_inputs {
                break;
            }
            self.selector[i] = 0;
            i += 1;
        }
        Some(Scheduler::Tabular { horizon: self.horizon, choice })
    }
}

/// Enumerates all deterministic schedulers on histories reachable from
/// `start` within the horizon; the count is `|In|^(#histories)`.
pub fn enumerate_schedulers(
    smp: &Smp,
    start: usize,
    horizon: usize,
    limit: f64,
) -> Result<SchedulerStream, SmpError> {
    if smp.inputs.len() == 1 {
        // generative case: exactly one scheduler
        return Ok(SchedulerStream {
            histories: Vec::new(),
            n_inputs: 1,
            horizon: usize::MAX,
            selector: Vec::new(),
            done: false,
        });
    }
    let histories = reachable_histories(smp, start, horizon);
    let count = (smp.inputs.len() as f64).powi(histories.len() as i32);
    if count > limit {
        return Err(SmpError::ExplosionGuard { count, limit });
    }
    Ok(SchedulerStream {
        n_inputs: smp.inputs.len(),
        horizon,
        selector: vec![0; histories.len()],
        histories,
        done: false,
    })
}

pub const DEFAULT_SCHEDULER_LIMIT: f64 = 1e6;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_chain_single_step_is_the_residence_cdf() {
        let u = fixtures::chain3("u", &["exp(2)", "exp(0.5)", "exp(1)"]);
        let f = u.residence(0);
        for t in [0.1, 1.0, 2.5] {
            let cyl = TimeBoundedCylinder { word: vec![0], bound: t };
            let p = cylinder_prob(&u, &Scheduler::Trivial, 0, &cyl).unwrap();
            assert!((p - f.eval(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_chain_aa_cylinder() {
        let u = fixtures::chain3("u", &["exp(2)", "exp(0.5)", "exp(1)"]);
        let cyl = TimeBoundedCylinder { word: vec![0, 0], bound: 2.0 };
        let p = cylinder_prob(&u, &Scheduler::Trivial, 0, &cyl).unwrap();
        assert!((p - 0.5156).abs() < 1e-3, "{p}");
    }

    #[test]
    fn missing_first_letter_gives_zero() {
        let mut u = fixtures::chain3("u", &["exp(2)", "exp(1)", "exp(1)"]);
        u.outputs.push("b".into());
        u.inputs.push("b".into());
        for row in &mut u.trans {
            row.push(Vec::new());
        }
        let cyl = TimeBoundedCylinder { word: vec![1], bound: 10.0 };
        let p = cylinder_prob(&u, &Scheduler::Trivial, 0, &cyl).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn empty_word_has_probability_one() {
        let u = fixtures::chain3("u", &["exp(2)", "exp(1)", "exp(1)"]);
        let cyl = TimeBoundedCylinder { word: vec![], bound: 0.0 };
        assert_eq!(cylinder_prob(&u, &Scheduler::Trivial, 0, &cyl).unwrap(), 1.0);
    }

    #[test]
    fn horizon_guard() {
        let u = fixtures::chain3("u", &["exp(2)", "exp(1)", "exp(1)"]);
        let sigma = Scheduler::Tabular { horizon: 1, choice: HashMap::new() };
        let cyl = TimeBoundedCylinder { word: vec![0, 0], bound: 1.0 };
        assert!(matches!(
            cylinder_prob(&u, &sigma, 0, &cyl),
            Err(SmpError::HorizonTooShort { .. })
        ));
    }

    #[test]
    fn composition_rates_and_labels() {
        let u = fixtures::chain3("u", &["exp(2)", "exp(0.5)", "exp(1)"]);
        let w = fixtures::chain3("w", &["exp(10)", "exp(0.1)", "exp(1)"]);
        let c = Smp::compose(&u, &w, CompositionKind::ProductRate).unwrap();
        assert_eq!(c.state_count(), 9);
        let first = c.state_id("u0|w0").unwrap();
        assert_eq!(c.residence(first), &Cdf::Exponential(20.0));
        let second = c.state_id("u1|w1").unwrap();
        assert_eq!(c.residence(second), &Cdf::Exponential(0.05));
        // labels union
        assert!(c.labels_of(first).contains("start"));
        // commutativity up to state renaming: same aa-cylinder probability
        let c2 = Smp::compose(&w, &u, CompositionKind::ProductRate).unwrap();
        let cyl = TimeBoundedCylinder { word: vec![0, 0], bound: 2.0 };
        let p1 = cylinder_prob(&c, &Scheduler::Trivial, first, &cyl).unwrap();
        let p2 = cylinder_prob(&c2, &Scheduler::Trivial, c2.state_id("w0|u0").unwrap(), &cyl)
            .unwrap();
        assert!((p1 - p2).abs() < 1e-12);
    }

    #[test]
    fn max_composition_with_dirac_zero_absorbs() {
        // the single-state Dirac(0) self-loop is not neutral for max
        // composition: the composed residences all collapse to Dirac(0)
        let u = fixtures::chain3("u", &["exp(2)", "exp(0.5)", "exp(1)"]);
        let mut unit = Smp::new(SmpKind::Reactive, vec!["a".into()], vec!["a".into()]);
        let z = unit.add_state("z", Cdf::dirac0(), BTreeSet::new());
        unit.add_transition(z, 0, Rat::one(), z, 0).unwrap();
        let c = Smp::compose(&u, &unit, CompositionKind::MaxCdf).unwrap();
        for s in 0..c.state_count() {
            assert_eq!(c.residence(s).simplified(), Cdf::Dirac(0.0));
        }
    }

    #[test]
    fn scheduler_counts() {
        // generative: exactly one scheduler
        let u = fixtures::chain3("u", &["exp(2)", "exp(1)", "exp(1)"]);
        let n = enumerate_schedulers(&u, 0, 3, DEFAULT_SCHEDULER_LIMIT)
            .unwrap()
            .count();
        assert_eq!(n, 1);
        // 2 inputs, 1 state, horizon 2: histories of length 0,1,2 beyond the
        // current state give 2^3 = 8 schedulers
        let m = fixtures::two_input_selfloop("exp(1)");
        let n = enumerate_schedulers(&m, 0, 2, DEFAULT_SCHEDULER_LIMIT)
            .unwrap()
            .count();
        assert_eq!(n, 8);
        // explosion guard: 3 inputs, 4 states, horizon 6
        let mut big = Smp::new(
            SmpKind::Reactive,
            vec!["a".into(), "b".into(), "c".into()],
            vec!["a".into(), "b".into(), "c".into()],
        );
        for i in 0..4 {
            big.add_state(format!("s{i}"), Cdf::Exponential(1.0), BTreeSet::new());
        }
        for s in 0..4 {
            for a in 0..3 {
                big.add_transition(s, a, Rat::one(), (s + a + 1) % 4, a).unwrap();
            }
        }
        assert!(matches!(
            enumerate_schedulers(&big, 0, 6, DEFAULT_SCHEDULER_LIMIT),
            Err(SmpError::ExplosionGuard { .. })
        ));
    }

    #[test]
    fn monte_carlo_agrees_on_random_model() {
        let mut m = Smp::new(
            SmpKind::Reactive,
            vec!["a".into(), "b".into()],
            vec!["a".into(), "b".into()],
        );
        for i in 0..4 {
            let cdf = match i {
                0 => Cdf::Exponential(2.0),
                1 => Cdf::uniform(0.0, 1.0).unwrap(),
                2 => Cdf::Exponential(0.5),
                _ => Cdf::convolve(Cdf::Exponential(1.0), Cdf::Exponential(3.0)),
            };
            m.add_state(format!("s{i}"), cdf, BTreeSet::new());
        }
        use crate::ratio::rat_frac;
        m.add_transition(0, 0, rat_frac(1, 2), 1, 0).unwrap();
        m.add_transition(0, 0, rat_frac(1, 2), 2, 0).unwrap();
        m.add_transition(0, 1, Rat::one(), 3, 1).unwrap();
        m.add_transition(1, 0, rat_frac(1, 3), 3, 0).unwrap();
        m.add_transition(1, 0, rat_frac(2, 3), 0, 0).unwrap();
        m.add_transition(2, 0, Rat::one(), 2, 0).unwrap();
        m.add_transition(3, 1, rat_frac(3, 4), 0, 1).unwrap();
        let sigma = Scheduler::Memoryless {
            choice: (0..4)
                .map(|_| vec![(rat_frac(1, 2), 0), (rat_frac(1, 2), 1)])
                .collect(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for (word, bound) in [(vec![0], 1.0), (vec![0, 0], 2.0), (vec![0, 1, 0], 3.0)] {
            let cyl = TimeBoundedCylinder { word, bound };
            let exact = cylinder_prob(&m, &sigma, 0, &cyl).unwrap();
            let n = 100_000;
            let est = cylinder_prob_monte_carlo(&m, &sigma, 0, &cyl, n, &mut rng);
            let se = (est * (1.0 - est) / n as f64).sqrt().max(1e-4);
            assert!(
                (exact - est).abs() <= 3.5 * se,
                "word {:?}: exact {exact} vs mc {est}",
                cyl.word
            );
        }
    }

    #[test]
    fn parse_round_trip() {
        let text = "\
smp reactive
inputs a,b
outputs a,b
state s0 exp(4) {ready}
state s1 unif(0,2) {}
trans s0 a 1/2 s1
trans s0 a 1/2 s0 a
trans s1 b 1 s0 b
";
        let m = Smp::parse(text).unwrap();
        let again = Smp::parse(&m.to_text()).unwrap();
        assert_eq!(m, again);
        // reactive may not relabel outputs
        assert!(Smp::parse(
            "smp reactive\ninputs a,b\noutputs a,b\nstate s exp(1) {}\ntrans s a 1 s b\n"
        )
        .is_err());
        // rows must stay subprobabilities
        assert!(Smp::parse(
            "smp reactive\ninputs a\noutputs a\nstate s exp(1) {}\ntrans s a 3/4 s\ntrans s a 1/2 s\n"
        )
        .is_err());
        // generative single input
        assert!(Smp::parse("smp generative\ninputs a,b\noutputs x\nstate s exp(1) {}\n").is_err());
    }
}
