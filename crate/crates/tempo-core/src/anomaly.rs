//! Parallel timing anomalies: a faster component can make the composite
//! system slower. This module reproduces the anomaly instances and decides
//! the strong-monotonicity sufficient condition that rules them out, at the
//! path-length bound that makes the universally-quantified conditions
//! finite.

use num_traits::Zero;
use thiserror::Error;

use crate::accel::{eps_faster, least_acceleration, GridSpec};
use crate::cdf::CompositionKind;
use crate::ratio::Rat;
use crate::smp::{
    cylinder_prob, enumerate_schedulers, Scheduler, Smp, SmpError, TimeBoundedCylinder,
};

#[derive(Debug, Error, PartialEq)]
pub enum AnomalyError {
    #[error(transparent)]
    Smp(#[from] SmpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolatedCondition {
    ResidenceU,
    ResidenceV,
    SchedulerU,
    SchedulerV,
    DeterministicKernel,
}

impl std::fmt::Display for ViolatedCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ViolatedCondition::ResidenceU => "residence-u",
            ViolatedCondition::ResidenceV => "residence-v",
            ViolatedCondition::SchedulerU => "scheduler-u",
            ViolatedCondition::SchedulerV => "scheduler-v",
            ViolatedCondition::DeterministicKernel => "deterministic-kernel",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone)]
pub struct MonotonicityVerdict {
    pub holds: bool,
    pub violated: Option<ViolatedCondition>,
    /// paths and step index of the violation, human readable
    pub witness: Option<String>,
    /// true when some CDF comparison was decided on the grid rather than by
    /// a closed form
    pub numeric: bool,
    pub path_bound: usize,
}

/// Every (state, input) has at most one positive successor.
pub fn deterministic_kernel(smp: &Smp) -> bool {
    (0..smp.state_count()).all(|s| {
        (0..smp.inputs.len()).all(|a| {
            smp.row(s, a).iter().filter(|(p, _, _)| !p.is_zero()).count() <= 1
        })
    })
}

/// The path-length bound `m` beyond which the strong-monotonicity
/// conditions start repeating:
/// `max{|U|·|W|, |V|·|W'|} + max{|U|,|V|,|W|,|W'|} + 1`.
pub fn path_bound_m(u: &Smp, v: &Smp, w: &Smp, w_prime: &Smp) -> usize {
    let (nu, nv, nw, nwp) = (
        u.state_count(),
        v.state_count(),
        w.state_count(),
        w_prime.state_count(),
    );
    (nu * nw).max(nv * nwp) + nu.max(nv).max(nw).max(nwp) + 1
}

/// State paths from `start` of every length `2..=m` (one transition at
/// least), following positive-probability steps under any input.
fn state_paths(smp: &Smp, start: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut frontier = vec![vec![start]];
    for _ in 1..m {
        let mut next = Vec::new();
        for path in &frontier {
            let last = *path.last().unwrap();
            for a in 0..smp.inputs.len() {
                for (p, dst, _) in smp.row(last, a) {
                    if p.is_zero() {
                        continue;
                    }
                    let mut ext = path.clone();
                    ext.push(*dst);
                    if !next.contains(&ext) {
                        next.push(ext);
                    }
                }
            }
        }
        out.extend(next.iter().cloned());
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    out.insert(0, vec![start]);
    out
}

/// Pointwise CDF domination `F >= G`, via the closed form where available.
/// Returns the verdict and whether the grid had to decide.
fn dominates(f: &crate::cdf::Cdf<f64>, g: &crate::cdf::Cdf<f64>, grid: &GridSpec<f64>) -> (bool, bool) {
    let numeric = least_acceleration(f, g).is_err();
    (eps_faster(f, g, 1.0, grid), numeric)
}

/// Decides strong monotonicity of `star` in `(U, W)` against `(V, W')`:
/// pointwise residence dominations along all equal-length path pairs up to
/// the bound, transition-probability comparisons universally quantified
/// over schedulers, and a deterministic Markov kernel for `W'`.
pub fn strong_monotonic(
    u: &Smp,
    v: &Smp,
    w: &Smp,
    w_prime: &Smp,
    star: CompositionKind,
    grid: &GridSpec<f64>,
) -> Result<MonotonicityVerdict, AnomalyError> {
    let m = path_bound_m(u, v, w, w_prime);
    let mut verdict = MonotonicityVerdict {
        holds: true,
        violated: None,
        witness: None,
        numeric: false,
        path_bound: m,
    };
    if !deterministic_kernel(w_prime) {
        verdict.holds = false;
        verdict.violated = Some(ViolatedCondition::DeterministicKernel);
        return Ok(verdict);
    }
    let uw = Smp::compose(u, w, star)?;
    let vwp = Smp::compose(v, w_prime, star)?;

    let paths_u = state_paths(u, 0, m);
    let paths_v = state_paths(v, 0, m);
    let paths_w = state_paths(w, 0, m);
    let paths_wp = state_paths(w_prime, 0, m);

    // the universally quantified scheduler conditions: with a single input
    // both scheduler factors are forced to one and the conditions compare
    // raw transition probabilities; with more inputs an adversary zeroes the
    // left side, so any live transition violates them
    let multi_input = u.inputs.len() > 1;

    // residence conditions first, scanning step indices outward so the
    // earliest violation is reported
    for i in 0..m {
        // condition on the U side: F_{rho(u_i * w_i)} >= F_{rho_U(u_i)}
        for pu in paths_u.iter().filter(|p| p.len() > i) {
            for pw in paths_w.iter().filter(|p| p.len() == pu.len()) {
                let composed = uw.residence(pu[i] * w.state_count() + pw[i]);
                let plain = u.residence(pu[i]);
                let (ok, numeric) = dominates(composed, plain, grid);
                verdict.numeric |= numeric;
                if !ok {
                    verdict.holds = false;
                    verdict.violated = Some(ViolatedCondition::ResidenceU);
                    verdict.witness = Some(format!(
                        "step {} of U-path {:?} with W-path {:?}",
                        i + 1,
                        pu,
                        pw
                    ));
                    return Ok(verdict);
                }
            }
        }
        // condition on the V side: F_{rho_V(v_i)} >= F_{rho(v_i * w'_i)}
        for pv in paths_v.iter().filter(|p| p.len() > i) {
            for pwp in paths_wp.iter().filter(|p| p.len() == pv.len()) {
                let composed = vwp.residence(pv[i] * w_prime.state_count() + pwp[i]);
                let plain = v.residence(pv[i]);
                let (ok, numeric) = dominates(plain, composed, grid);
                verdict.numeric |= numeric;
                if !ok {
                    verdict.holds = false;
                    verdict.violated = Some(ViolatedCondition::ResidenceV);
                    verdict.witness = Some(format!(
                        "step {} of V-path {:?} with W'-path {:?}",
                        i + 1,
                        pv,
                        pwp
                    ));
                    return Ok(verdict);
                }
            }
        }
    }

    // scheduler condition on the U side
    for pu in paths_u.iter().filter(|p| p.len() > 1) {
        for pw in paths_w.iter().filter(|p| p.len() == pu.len()) {
            for i in 0..pu.len() - 1 {
                for a in 0..u.inputs.len() {
                    let tau_u = row_prob(u, pu[i], a, pu[i + 1]);
                    if tau_u.is_zero() {
                        continue;
                    }
                    let violated = if multi_input {
                        true // an adversary scheduler zeroes the composite side
                    } else {
                        let tau_w = row_prob(w, pw[i], a, pw[i + 1]);
                        tau_u.clone() * tau_w < tau_u
                    };
                    if violated {
                        verdict.holds = false;
                        verdict.violated = Some(ViolatedCondition::SchedulerU);
                        verdict.witness = Some(format!(
                            "input {} at step {} of U-path {:?} with W-path {:?}",
                            u.inputs[a],
                            i + 1,
                            pu,
                            pw
                        ));
                        return Ok(verdict);
                    }
                }
            }
        }
    }
    // scheduler condition on the V side: tau_V >= tau_V * tau_W', which can
    // only fail under multiple inputs (adversary zeroes the plain side)
    if multi_input {
        'outer: for pv in paths_v.iter().filter(|p| p.len() > 1) {
            for pwp in paths_wp.iter().filter(|p| p.len() == pv.len()) {
                for i in 0..pv.len() - 1 {
                    for a in 0..v.inputs.len() {
                        let tau_v = row_prob(v, pv[i], a, pv[i + 1]);
                        let tau_wp = row_prob(w_prime, pwp[i], a, pwp[i + 1]);
                        if !(tau_v * tau_wp).is_zero() {
                            verdict.holds = false;
                            verdict.violated = Some(ViolatedCondition::SchedulerV);
                            verdict.witness = Some(format!(
                                "input {} at step {} of V-path {:?} with W'-path {:?}",
                                v.inputs[a],
                                i + 1,
                                pv,
                                pwp
                            ));
                            break 'outer;
                        }
                    }
                }
            }
        }
    }
    Ok(verdict)
}

fn row_prob(smp: &Smp, s: usize, a: usize, dst: usize) -> Rat {
    smp.row(s, a)
        .iter()
        .filter(|(_, d, _)| *d == dst)
        .map(|(p, _, _)| p.clone())
        .sum()
}

/// The weaker existential-scheduler monotonicity, checked as a bounded
/// search over enumerated deterministic schedulers. Incomplete by
/// construction: a `false` verdict at one horizon says nothing about larger
/// ones.
#[derive(Debug, Clone)]
pub struct BoundedMonotonicVerdict {
    pub holds: bool,
    pub horizon: usize,
    pub method: &'static str,
}

#[allow(clippy::too_many_arguments)]
pub fn monotonic_bounded(
    u: &Smp,
    v: &Smp,
    w: &Smp,
    w_prime: &Smp,
    star: CompositionKind,
    horizon: usize,
    sched_limit: f64,
    grid: &GridSpec<f64>,
) -> Result<BoundedMonotonicVerdict, AnomalyError> {
    let mut out = BoundedMonotonicVerdict {
        holds: true,
        horizon,
        method: "bounded deterministic-scheduler search (incomplete)",
    };
    if !deterministic_kernel(w_prime) {
        out.holds = false;
        return Ok(out);
    }
    // residence conditions are as in the strong variant, at the reduced
    // horizon
    let strong = strong_monotonic_residences_only(u, v, w, w_prime, star, horizon, grid)?;
    if !strong {
        out.holds = false;
        return Ok(out);
    }
    let uw = Smp::compose(u, w, star)?;
    let vwp = Smp::compose(v, w_prime, star)?;
    // forall sigma_U exists sigma_UW, stepwise over equal-length path pairs
    let advs: Vec<Scheduler> = enumerate_schedulers(u, 0, horizon, sched_limit)?.collect();
    let resps: Vec<Scheduler> = enumerate_schedulers(&uw, 0, horizon, sched_limit)?.collect();
    for sigma_u in &advs {
        let found = resps.iter().any(|sigma_uw| {
            stepwise_dominates(&uw, sigma_uw, u, sigma_u, w, horizon)
        });
        if !found {
            out.holds = false;
            return Ok(out);
        }
    }
    // forall sigma_VW' exists sigma_V
    let advs: Vec<Scheduler> = enumerate_schedulers(&vwp, 0, horizon, sched_limit)?.collect();
    let resps: Vec<Scheduler> = enumerate_schedulers(v, 0, horizon, sched_limit)?.collect();
    for sigma_vw in &advs {
        let found = resps.iter().any(|sigma_v| {
            stepwise_dominates_v(v, sigma_v, &vwp, sigma_vw, w_prime, horizon)
        });
        if !found {
            out.holds = false;
            return Ok(out);
        }
    }
    Ok(out)
}

fn strong_monotonic_residences_only(
    u: &Smp,
    v: &Smp,
    w: &Smp,
    w_prime: &Smp,
    star: CompositionKind,
    m: usize,
    grid: &GridSpec<f64>,
) -> Result<bool, AnomalyError> {
    let uw = Smp::compose(u, w, star)?;
    let vwp = Smp::compose(v, w_prime, star)?;
    for pu in state_paths(u, 0, m) {
        for pw in state_paths(w, 0, m).iter().filter(|p| p.len() == pu.len()) {
            for i in 0..pu.len() {
                let composed = uw.residence(pu[i] * w.state_count() + pw[i]);
                if !eps_faster(composed, u.residence(pu[i]), 1.0, grid) {
                    return Ok(false);
                }
            }
        }
    }
    for pv in state_paths(v, 0, m) {
        for pwp in state_paths(w_prime, 0, m).iter().filter(|p| p.len() == pv.len()) {
            for i in 0..pv.len() {
                let composed = vwp.residence(pv[i] * w_prime.state_count() + pwp[i]);
                if !eps_faster(v.residence(pv[i]), composed, 1.0, grid) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn stepwise_dominates(
    uw: &Smp,
    sigma_uw: &Scheduler,
    u: &Smp,
    sigma_u: &Scheduler,
    w: &Smp,
    horizon: usize,
) -> bool {
    for pu in state_paths(u, 0, horizon) {
        for pw in state_paths(w, 0, horizon).iter().filter(|p| p.len() == pu.len()) {
            for i in 0..pu.len() - 1 {
                for a in 0..u.inputs.len() {
                    let hist_u: Vec<usize> = pu[..=i].to_vec();
                    let hist_uw: Vec<usize> = pu[..=i]
                        .iter()
                        .zip(&pw[..=i])
                        .map(|(x, y)| x * w.state_count() + y)
                        .collect();
                    let lhs = sched_prob(sigma_uw, &hist_uw, a)
                        * row_prob(uw, hist_uw[i], a, pu[i + 1] * w.state_count() + pw[i + 1]);
                    let rhs =
                        sched_prob(sigma_u, &hist_u, a) * row_prob(u, pu[i], a, pu[i + 1]);
                    if lhs < rhs {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn stepwise_dominates_v(
    v: &Smp,
    sigma_v: &Scheduler,
    vwp: &Smp,
    sigma_vw: &Scheduler,
    w_prime: &Smp,
    horizon: usize,
) -> bool {
    for pv in state_paths(v, 0, horizon) {
        for pwp in state_paths(w_prime, 0, horizon).iter().filter(|p| p.len() == pv.len()) {
            for i in 0..pv.len() - 1 {
                for a in 0..v.inputs.len() {
                    let hist_v: Vec<usize> = pv[..=i].to_vec();
                    let hist_vw: Vec<usize> = pv[..=i]
                        .iter()
                        .zip(&pwp[..=i])
                        .map(|(x, y)| x * w_prime.state_count() + y)
                        .collect();
                    let lhs =
                        sched_prob(sigma_v, &hist_v, a) * row_prob(v, pv[i], a, pv[i + 1]);
                    let rhs = sched_prob(sigma_vw, &hist_vw, a)
                        * row_prob(
                            vwp,
                            hist_vw[i],
                            a,
                            pv[i + 1] * w_prime.state_count() + pwp[i + 1],
                        );
                    if lhs < rhs {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn sched_prob(sigma: &Scheduler, history: &[usize], input: usize) -> Rat {
    sigma
        .decide(history)
        .into_iter()
        .filter(|(_, a)| *a == input)
        .map(|(p, _)| p)
        .sum()
}

/// The four cylinder probabilities of the anomaly scenario and the verdict:
/// composing with the faster component made the composite slower on the
/// witness cylinder.
#[derive(Debug, Clone)]
pub struct AnomalyReport {
    pub p_uw: f64,
    pub p_vw: f64,
    pub p_u: f64,
    pub p_v: f64,
    pub anomaly: bool,
}

pub fn detect_anomaly(
    u: &Smp,
    v: &Smp,
    w: &Smp,
    star: CompositionKind,
    word: &[String],
    t: f64,
) -> Result<AnomalyReport, AnomalyError> {
    let uw = Smp::compose(u, w, star)?;
    let vw = Smp::compose(v, w, star)?;
    let prob = |m: &Smp, word_ids: Vec<usize>| -> Result<f64, AnomalyError> {
        let cyl = TimeBoundedCylinder { word: word_ids, bound: t };
        Ok(cylinder_prob(m, &Scheduler::Trivial, 0, &cyl)?)
    };
    let ids = |m: &Smp| -> Result<Vec<usize>, AnomalyError> {
        word.iter()
            .map(|a| m.output_id(a).map_err(AnomalyError::from))
            .collect()
    };
    let p_uw = prob(&uw, ids(&uw)?)?;
    let p_vw = prob(&vw, ids(&vw)?)?;
    let p_u = prob(u, ids(u)?)?;
    let p_v = prob(v, ids(v)?)?;
    Ok(AnomalyReport {
        p_uw,
        p_vw,
        p_u,
        p_v,
        anomaly: p_uw < p_vw - 1e-12,
    })
}
