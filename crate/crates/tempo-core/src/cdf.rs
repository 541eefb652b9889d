//! Symbolic cumulative distribution functions over the nonnegative reals.
//!
//! The variants cover the residence-time distributions used by the rest of
//! the library: Dirac, uniform and exponential as the base family, plus
//! convolutions, sub-stochastic mixtures and pointwise max/min combinations.
//! Evaluation is exact where a closed form exists (hypoexponential and
//! Erlang-style chains, Dirac shifts) and falls back to adaptive quadrature
//! elsewhere.

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::real::{r, Real};

/// Absolute error target for numerical integration inside `eval`.
const QUAD_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum CdfError {
    #[error("uniform requires 0 <= a < b, got a={0}, b={1}")]
    BadUniform(String, String),
    #[error("exponential rate must be positive, got {0}")]
    BadRate(String),
    #[error("dirac point must be nonnegative, got {0}")]
    BadDirac(String),
    #[error("mixture weight out of range: {0}")]
    BadWeight(String),
    #[error("mixture weights sum to {0} > 1")]
    WeightSum(String),
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("rate composition requires exponential arguments")]
    RateCompositionOnNonExponential,
}

/// Symbolic CDF. Construct through the checked constructors; the invariants
/// (`a < b`, positive rates, weights in `[0,1]` summing to at most one) are
/// enforced there.
#[derive(Debug, Clone, PartialEq)]
pub enum Cdf<F: Real> {
    Dirac(F),
    Uniform(F, F),
    Exponential(F),
    Convolution(Vec<Cdf<F>>),
    Mixture(Vec<(F, Cdf<F>)>),
    PointwiseMax(Box<Cdf<F>>, Box<Cdf<F>>),
    PointwiseMin(Box<Cdf<F>>, Box<Cdf<F>>),
}

/// How two residence-time distributions are combined under parallel
/// composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositionKind {
    MaxCdf,
    MinCdf,
    ProductRate,
    MinRate,
    MaxRate,
}

impl CompositionKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "max" | "max-cdf" => CompositionKind::MaxCdf,
            "min" | "min-cdf" => CompositionKind::MinCdf,
            "product" | "product-rate" => CompositionKind::ProductRate,
            "min-rate" => CompositionKind::MinRate,
            "max-rate" => CompositionKind::MaxRate,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            CompositionKind::MaxCdf => "max",
            CompositionKind::MinCdf => "min",
            CompositionKind::ProductRate => "product",
            CompositionKind::MinRate => "min-rate",
            CompositionKind::MaxRate => "max-rate",
        }
    }
}

impl<F: Real> Cdf<F> {
    pub fn dirac(x: F) -> Result<Self, CdfError> {
        if x < F::zero() || !x.is_finite() {
            return Err(CdfError::BadDirac(format!("{x}")));
        }
        Ok(Cdf::Dirac(x))
    }

    pub fn dirac0() -> Self {
        Cdf::Dirac(F::zero())
    }

    pub fn uniform(a: F, b: F) -> Result<Self, CdfError> {
        if !(a >= F::zero() && a < b && b.is_finite()) {
            return Err(CdfError::BadUniform(format!("{a}"), format!("{b}")));
        }
        Ok(Cdf::Uniform(a, b))
    }

    pub fn exponential(rate: F) -> Result<Self, CdfError> {
        if !(rate > F::zero() && rate.is_finite()) {
            return Err(CdfError::BadRate(format!("{rate}")));
        }
        Ok(Cdf::Exponential(rate))
    }

    pub fn mixture(parts: Vec<(F, Cdf<F>)>) -> Result<Self, CdfError> {
        if parts.is_empty() {
            return Err(CdfError::Empty("mixture"));
        }
        let mut total = F::zero();
        for (w, _) in &parts {
            if *w < F::zero() || *w > F::one() {
                return Err(CdfError::BadWeight(format!("{w}")));
            }
            total += *w;
        }
        if total > F::one() + r(1e-12) {
            return Err(CdfError::WeightSum(format!("{total}")));
        }
        Ok(Cdf::Mixture(parts))
    }

    pub fn pmax(l: Cdf<F>, rgt: Cdf<F>) -> Self {
        Cdf::PointwiseMax(Box::new(l), Box::new(rgt))
    }

    pub fn pmin(l: Cdf<F>, rgt: Cdf<F>) -> Self {
        Cdf::PointwiseMin(Box::new(l), Box::new(rgt))
    }

    /// Convolution with the usual simplifications: `Dirac(0)` is the
    /// identity and Dirac points add up.
    pub fn convolve(f: Cdf<F>, g: Cdf<F>) -> Cdf<F> {
        let mut parts = Vec::new();
        let mut shift = F::zero();
        for part in [f, g] {
            match part {
                Cdf::Dirac(x) => shift += x,
                Cdf::Convolution(ps) => {
                    for p in ps {
                        match p {
                            Cdf::Dirac(x) => shift += x,
                            other => parts.push(other),
                        }
                    }
                }
                other => parts.push(other),
            }
        }
        if shift > F::zero() {
            parts.push(Cdf::Dirac(shift));
        }
        match parts.len() {
            0 => Cdf::dirac0(),
            1 => parts.pop().unwrap(),
            _ => Cdf::Convolution(parts),
        }
    }

    pub fn convolve_all<I: IntoIterator<Item = Cdf<F>>>(parts: I) -> Cdf<F> {
        parts
            .into_iter()
            .fold(Cdf::dirac0(), |acc, p| Cdf::convolve(acc, p))
    }

    /// Residence-time composition. Rate compositions demand exponential
    /// arguments; the CDF compositions accept anything.
    pub fn compose(star: CompositionKind, f: &Cdf<F>, g: &Cdf<F>) -> Result<Cdf<F>, CdfError> {
        match star {
            CompositionKind::MaxCdf => Ok(Cdf::pmax(f.clone(), g.clone())),
            CompositionKind::MinCdf => Ok(Cdf::pmin(f.clone(), g.clone())),
            _ => match (f, g) {
                (Cdf::Exponential(a), Cdf::Exponential(b)) => {
                    let rate = match star {
                        CompositionKind::ProductRate => *a * *b,
                        CompositionKind::MinRate => a.min(*b),
                        CompositionKind::MaxRate => a.max(*b),
                        _ => unreachable!(),
                    };
                    Cdf::exponential(rate)
                }
                _ => Err(CdfError::RateCompositionOnNonExponential),
            },
        }
    }

    /// Structure-preserving normalisation: flattens convolutions, collapses
    /// pointwise max/min of exponentials (ordered by rate) and of nested
    /// uniforms, and removes `Dirac(0)` where it is neutral or absorbing.
    pub fn simplified(&self) -> Cdf<F> {
        match self {
            Cdf::Dirac(_) | Cdf::Uniform(..) | Cdf::Exponential(_) => self.clone(),
            Cdf::Convolution(_) => {
                let mut parts = Vec::new();
                let mut shift = F::zero();
                collect_conv(self, &mut parts, &mut shift);
                let parts: Vec<_> = parts.iter().map(|p| p.simplified()).collect();
                let mut out = Vec::new();
                let mut total_shift = shift;
                for p in parts {
                    match p {
                        Cdf::Dirac(x) => total_shift += x,
                        other => out.push(other),
                    }
                }
                if total_shift > F::zero() {
                    out.push(Cdf::Dirac(total_shift));
                }
                match out.len() {
                    0 => Cdf::dirac0(),
                    1 => out.pop().unwrap(),
                    _ => Cdf::Convolution(out),
                }
            }
            Cdf::Mixture(parts) => {
                let parts: Vec<_> = parts.iter().map(|(w, p)| (*w, p.simplified())).collect();
                if parts.len() == 1 && parts[0].0 == F::one() {
                    return parts.into_iter().next().unwrap().1;
                }
                Cdf::Mixture(parts)
            }
            Cdf::PointwiseMax(l, rgt) => {
                let l = l.simplified();
                let rt = rgt.simplified();
                match (&l, &rt) {
                    (Cdf::Dirac(x), _) if *x == F::zero() => Cdf::dirac0(),
                    (_, Cdf::Dirac(x)) if *x == F::zero() => Cdf::dirac0(),
                    (Cdf::Exponential(a), Cdf::Exponential(b)) => Cdf::Exponential(a.max(*b)),
                    (Cdf::Dirac(x), Cdf::Dirac(y)) => Cdf::Dirac(x.min(*y)),
                    (Cdf::Uniform(a1, b1), Cdf::Uniform(a2, b2)) => {
                        if a1 <= a2 && b1 <= b2 {
                            l.clone()
                        } else if a2 <= a1 && b2 <= b1 {
                            rt.clone()
                        } else {
                            Cdf::pmax(l, rt)
                        }
                    }
                    _ => Cdf::pmax(l, rt),
                }
            }
            Cdf::PointwiseMin(l, rgt) => {
                let l = l.simplified();
                let rt = rgt.simplified();
                match (&l, &rt) {
                    (Cdf::Dirac(x), _) if *x == F::zero() => rt.clone(),
                    (_, Cdf::Dirac(x)) if *x == F::zero() => l.clone(),
                    (Cdf::Exponential(a), Cdf::Exponential(b)) => Cdf::Exponential(a.min(*b)),
                    (Cdf::Dirac(x), Cdf::Dirac(y)) => Cdf::Dirac(x.max(*y)),
                    (Cdf::Uniform(a1, b1), Cdf::Uniform(a2, b2)) => {
                        if a1 <= a2 && b1 <= b2 {
                            rt.clone()
                        } else if a2 <= a1 && b2 <= b1 {
                            l.clone()
                        } else {
                            Cdf::pmin(l, rt)
                        }
                    }
                    _ => Cdf::pmin(l, rt),
                }
            }
        }
    }

    /// The CDF of the same process sped up by `eps`: `t` maps to
    /// `F(eps * t)`.
    pub fn accelerate(&self, eps: F) -> Cdf<F> {
        match self {
            Cdf::Dirac(x) => Cdf::Dirac(*x / eps),
            Cdf::Uniform(a, b) => Cdf::Uniform(*a / eps, *b / eps),
            Cdf::Exponential(rate) => Cdf::Exponential(*rate * eps),
            Cdf::Convolution(parts) => {
                Cdf::Convolution(parts.iter().map(|p| p.accelerate(eps)).collect())
            }
            Cdf::Mixture(parts) => {
                Cdf::Mixture(parts.iter().map(|(w, p)| (*w, p.accelerate(eps))).collect())
            }
            Cdf::PointwiseMax(l, rgt) => Cdf::pmax(l.accelerate(eps), rgt.accelerate(eps)),
            Cdf::PointwiseMin(l, rgt) => Cdf::pmin(l.accelerate(eps), rgt.accelerate(eps)),
        }
    }

    /// F(t). Negative arguments evaluate to 0 so that convolution integrands
    /// can call this freely.
    pub fn eval(&self, t: F) -> F {
        if t < F::zero() {
            return F::zero();
        }
        match self {
            Cdf::Dirac(x) => {
                if t >= *x {
                    F::one()
                } else {
                    F::zero()
                }
            }
            Cdf::Uniform(a, b) => {
                if t <= *a {
                    F::zero()
                } else if t >= *b {
                    F::one()
                } else {
                    (t - *a) / (*b - *a)
                }
            }
            Cdf::Exponential(rate) => F::one() - (-*rate * t).exp(),
            Cdf::Convolution(_) => {
                // fast path: chains of exponentials (plus Dirac shifts and
                // rate-collapsing max/min pairs) avoid any cloning
                let mut rates = Vec::new();
                let mut shift = F::zero();
                if collect_exp_chain(self, &mut rates, &mut shift) {
                    return hypoexp_eval(&rates, t - shift);
                }
                let mut parts = Vec::new();
                let mut shift = F::zero();
                collect_conv(self, &mut parts, &mut shift);
                conv_eval(&parts, t - shift)
            }
            Cdf::Mixture(parts) => parts.iter().map(|(w, p)| *w * p.eval(t)).sum(),
            Cdf::PointwiseMax(l, rgt) => l.eval(t).max(rgt.eval(t)),
            Cdf::PointwiseMin(l, rgt) => l.eval(t).min(rgt.eval(t)),
        }
    }

    /// Probability mass at `t = 0`, i.e. `F(0)`.
    pub fn mass_at_zero(&self) -> F {
        self.eval(F::zero())
    }

    /// `lim_{t -> inf} F(t)`; less than one only for sub-stochastic
    /// mixtures.
    pub fn limit(&self) -> F {
        match self {
            Cdf::Dirac(_) | Cdf::Uniform(..) | Cdf::Exponential(_) => F::one(),
            Cdf::Convolution(parts) => parts.iter().map(|p| p.limit()).fold(F::one(), |a, b| a * b),
            Cdf::Mixture(parts) => parts.iter().map(|(w, p)| *w * p.limit()).sum(),
            Cdf::PointwiseMax(l, rgt) => l.limit().max(rgt.limit()),
            Cdf::PointwiseMin(l, rgt) => l.limit().min(rgt.limit()),
        }
    }

    /// Infimum of the support: the largest `t` below which `F` is
    /// identically zero.
    pub fn inf_support(&self) -> F {
        match self {
            Cdf::Dirac(x) => *x,
            Cdf::Uniform(a, _) => *a,
            Cdf::Exponential(_) => F::zero(),
            Cdf::Convolution(parts) => parts.iter().map(|p| p.inf_support()).sum(),
            Cdf::Mixture(parts) => parts
                .iter()
                .filter(|(w, _)| *w > F::zero())
                .map(|(_, p)| p.inf_support())
                .fold(F::infinity(), |a, b| a.min(b)),
            Cdf::PointwiseMax(l, rgt) => l.inf_support().min(rgt.inf_support()),
            Cdf::PointwiseMin(l, rgt) => l.inf_support().max(rgt.inf_support()),
        }
    }

    /// The finite time at which `F` first equals its limit, when such a time
    /// exists. Exponential tails make this `None`.
    pub fn limit_attained_at(&self) -> Option<F> {
        match self {
            Cdf::Dirac(x) => Some(*x),
            Cdf::Uniform(_, b) => Some(*b),
            Cdf::Exponential(_) => None,
            Cdf::Convolution(parts) => {
                let mut total = F::zero();
                for p in parts {
                    total += p.limit_attained_at()?;
                }
                Some(total)
            }
            Cdf::Mixture(parts) => {
                let mut latest = F::zero();
                for (w, p) in parts {
                    if *w > F::zero() {
                        latest = latest.max(p.limit_attained_at()?);
                    }
                }
                Some(latest)
            }
            Cdf::PointwiseMax(l, rgt) => {
                let (ll, lr) = (l.limit(), rgt.limit());
                let eps = r::<F>(1e-12);
                if ll > lr + eps {
                    l.limit_attained_at()
                } else if lr > ll + eps {
                    rgt.limit_attained_at()
                } else {
                    match (l.limit_attained_at(), rgt.limit_attained_at()) {
                        (Some(a), Some(b)) => Some(a.min(b)),
                        (Some(a), None) => Some(a),
                        (None, Some(b)) => Some(b),
                        (None, None) => None,
                    }
                }
            }
            Cdf::PointwiseMin(l, rgt) => {
                let level = self.limit();
                let ta = side_reach_time(l, level)?;
                let tb = side_reach_time(rgt, level)?;
                Some(ta.max(tb))
            }
        }
    }

    /// Right derivative at zero; infinite when there is mass at zero. The
    /// first-order behaviour near the origin decides several ε-faster-than
    /// questions exactly.
    pub fn initial_slope(&self) -> F {
        match self {
            Cdf::Dirac(x) => {
                if *x == F::zero() {
                    F::infinity()
                } else {
                    F::zero()
                }
            }
            Cdf::Uniform(a, b) => {
                if *a == F::zero() {
                    F::one() / *b
                } else {
                    F::zero()
                }
            }
            Cdf::Exponential(rate) => *rate,
            Cdf::Convolution(_) => {
                let mut parts = Vec::new();
                let mut shift = F::zero();
                collect_conv(self, &mut parts, &mut shift);
                if shift > F::zero() {
                    return F::zero();
                }
                match parts.len() {
                    0 => F::infinity(),
                    1 => parts[0].initial_slope(),
                    // a genuine convolution has vanishing density at zero
                    // unless some factor carries an atom there
                    _ => {
                        let atom_free: Vec<_> =
                            parts.iter().filter(|p| p.mass_at_zero() == F::zero()).collect();
                        match atom_free.len() {
                            0 => F::infinity(),
                            1 => {
                                let scale: F = parts
                                    .iter()
                                    .filter(|p| p.mass_at_zero() > F::zero())
                                    .map(|p| p.mass_at_zero())
                                    .fold(F::one(), |a, b| a * b);
                                atom_free[0].initial_slope() * scale
                            }
                            _ => F::zero(),
                        }
                    }
                }
            }
            Cdf::Mixture(parts) => parts.iter().map(|(w, p)| *w * p.initial_slope()).sum(),
            Cdf::PointwiseMax(l, rgt) => l.initial_slope().max(rgt.initial_slope()),
            Cdf::PointwiseMin(l, rgt) => l.initial_slope().min(rgt.initial_slope()),
        }
    }

    /// Times where the CDF changes analytic regime: support edges, uniform
    /// endpoints, crossing points of max/min pairs. Used to seed comparison
    /// grids so that kinks are sampled exactly.
    pub fn critical_times(&self) -> Vec<F> {
        let mut out = Vec::new();
        self.push_critical(F::zero(), &mut out);
        out.retain(|t| t.is_finite() && *t >= F::zero());
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out.truncate(128);
        out
    }

    fn push_critical(&self, shift: F, out: &mut Vec<F>) {
        match self {
            Cdf::Dirac(x) => out.push(shift + *x),
            Cdf::Uniform(a, b) => {
                out.push(shift + *a);
                out.push(shift + *b);
                out.push(shift + (*a + *b) * r(0.5));
            }
            Cdf::Exponential(rate) => {
                for k in [0.5, 1.0, 2.0, 4.0] {
                    out.push(shift + r::<F>(k) / *rate);
                }
            }
            Cdf::Convolution(parts) => {
                // kinks of a convolution sit at sums of component kinks;
                // sampling each component's kinks offset by the others'
                // support minima covers the leading edges
                let inf_rest: F = parts.iter().map(|p| p.inf_support()).sum();
                for (i, p) in parts.iter().enumerate() {
                    let others: F = parts
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, q)| q.inf_support())
                        .sum();
                    p.push_critical(shift + others, out);
                }
                out.push(shift + inf_rest);
                if let Some(t) = self.limit_attained_at() {
                    out.push(shift + t);
                }
            }
            Cdf::Mixture(parts) => {
                for (_, p) in parts {
                    p.push_critical(shift, out);
                }
            }
            Cdf::PointwiseMax(l, rgt) | Cdf::PointwiseMin(l, rgt) => {
                l.push_critical(shift, out);
                rgt.push_critical(shift, out);
                for t in crossing_points(l, rgt) {
                    out.push(shift + t);
                }
            }
        }
    }

    /// True when `F(t) >= level` for some finite `t`.
    pub fn reaches_level(&self, level: F) -> bool {
        if level <= F::zero() {
            return true;
        }
        let lim = self.limit();
        let eps = r::<F>(1e-12);
        if level < lim - eps {
            true
        } else if level <= lim + eps {
            self.limit_attained_at().is_some()
        } else {
            false
        }
    }

    /// Smallest `t` with `F(t) >= level`; `None` when the level is never
    /// reached. Exact for the base family, bisection elsewhere.
    pub fn quantile(&self, level: F) -> Option<F> {
        if level <= F::zero() {
            return Some(F::zero());
        }
        if !self.reaches_level(level) {
            return None;
        }
        match self {
            Cdf::Dirac(x) => Some(*x),
            Cdf::Uniform(a, b) => Some(*a + (*b - *a) * level),
            Cdf::Exponential(rate) => {
                if level >= F::one() {
                    None
                } else {
                    Some(-(F::one() - level).ln() / *rate)
                }
            }
            _ => {
                // bracket then bisect on the monotone eval
                let mut hi = F::one();
                let mut guard = 0;
                while self.eval(hi) < level && guard < 2000 {
                    hi *= r(2.0);
                    guard += 1;
                }
                if self.eval(hi) < level {
                    return None;
                }
                let mut lo = F::zero();
                for _ in 0..80 {
                    let mid = (lo + hi) * r(0.5);
                    if self.eval(mid) >= level {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo <= hi * r(1e-13) {
                        break;
                    }
                }
                Some(hi)
            }
        }
    }

    /// Draws a residence time; `None` encodes "the transition never fires"
    /// (possible for sub-stochastic mixtures).
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Option<F> {
        match self {
            Cdf::Dirac(x) => Some(*x),
            Cdf::Uniform(a, b) => {
                let u: f64 = rng.gen();
                Some(*a + (*b - *a) * r(u))
            }
            Cdf::Exponential(rate) => {
                let u: f64 = rng.gen();
                Some(-r::<F>(1.0 - u).ln() / *rate)
            }
            Cdf::Convolution(parts) => {
                let mut total = F::zero();
                for p in parts {
                    total += p.sample(rng)?;
                }
                Some(total)
            }
            Cdf::Mixture(parts) => {
                let mut u: F = r(rng.gen::<f64>());
                for (w, p) in parts {
                    if u < *w {
                        return p.sample(rng);
                    }
                    u -= *w;
                }
                None
            }
            // comonotone inverse transform: quantile of the max is the min
            // of the per-side quantiles (and dually for min)
            Cdf::PointwiseMax(l, rgt) => {
                let u: F = r(rng.gen::<f64>());
                match (l.quantile(u), rgt.quantile(u)) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (Some(a), None) => Some(a),
                    (None, Some(b)) => Some(b),
                    (None, None) => None,
                }
            }
            Cdf::PointwiseMin(l, rgt) => {
                let u: F = r(rng.gen::<f64>());
                Some(l.quantile(u)?.max(rgt.quantile(u)?))
            }
        }
    }
}

/// Locates crossings of two CDFs by sign scanning over their joint critical
/// anchors followed by bisection.
fn crossing_points<F: Real>(l: &Cdf<F>, rgt: &Cdf<F>) -> Vec<F> {
    let mut anchors: Vec<F> = Vec::new();
    l.push_critical(F::zero(), &mut anchors);
    rgt.push_critical(F::zero(), &mut anchors);
    anchors.retain(|t| t.is_finite() && *t > F::zero());
    if anchors.is_empty() {
        return Vec::new();
    }
    let hi = anchors.iter().fold(F::zero(), |a, b| a.max(*b)) * r(1.5);
    let n = 96;
    let mut crossings = Vec::new();
    let diff = |t: F| l.eval(t) - rgt.eval(t);
    let mut prev_t = F::zero();
    let mut prev_d = diff(prev_t);
    for i in 1..=n {
        let t = hi * r(i as f64) / r(n as f64);
        let d = diff(t);
        if (prev_d < F::zero() && d > F::zero()) || (prev_d > F::zero() && d < F::zero()) {
            let (mut a, mut b) = (prev_t, t);
            let rising = d > F::zero();
            for _ in 0..80 {
                let mid = (a + b) * r(0.5);
                if (diff(mid) > F::zero()) == rising {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            crossings.push((a + b) * r(0.5));
        }
        prev_t = t;
        prev_d = d;
    }
    crossings
}

fn side_reach_time<F: Real>(side: &Cdf<F>, level: F) -> Option<F> {
    let eps = r::<F>(1e-12);
    let lim = side.limit();
    if level > lim + eps {
        None
    } else if level >= lim - eps {
        side.limit_attained_at()
    } else {
        side.quantile(level)
    }
}

/// Collects the exponential rates of a convolution whose factors are all
/// exponentials, Dirac shifts, or max/min pairs of exponentials; returns
/// false when anything else appears.
fn collect_exp_chain<F: Real>(cdf: &Cdf<F>, rates: &mut Vec<F>, shift: &mut F) -> bool {
    match cdf {
        Cdf::Exponential(rate) => {
            rates.push(*rate);
            true
        }
        Cdf::Dirac(x) => {
            *shift += *x;
            true
        }
        Cdf::Convolution(parts) => parts
            .iter()
            .all(|p| collect_exp_chain(p, rates, shift)),
        Cdf::PointwiseMax(l, rgt) => match (&**l, &**rgt) {
            (Cdf::Exponential(a), Cdf::Exponential(b)) => {
                rates.push(a.max(*b));
                true
            }
            _ => false,
        },
        Cdf::PointwiseMin(l, rgt) => match (&**l, &**rgt) {
            (Cdf::Exponential(a), Cdf::Exponential(b)) => {
                rates.push(a.min(*b));
                true
            }
            _ => false,
        },
        _ => false,
    }
}

/// Flattens nested convolutions, accumulating Dirac parts into `shift`.
fn collect_conv<F: Real>(cdf: &Cdf<F>, parts: &mut Vec<Cdf<F>>, shift: &mut F) {
    match cdf {
        Cdf::Convolution(ps) => {
            for p in ps {
                collect_conv(p, parts, shift);
            }
        }
        Cdf::Dirac(x) => *shift += *x,
        other => parts.push(other.simplified()),
    }
}

/// Evaluates the convolution of `parts` (none of which is a Dirac) at `t`.
fn conv_eval<F: Real>(parts: &[Cdf<F>], t: F) -> F {
    if t < F::zero() {
        return F::zero();
    }
    if parts.is_empty() {
        return F::one();
    }
    if parts.len() == 1 {
        return parts[0].eval(t);
    }
    // distribute mixtures by linearity of convolution
    if let Some(pos) = parts.iter().position(|p| matches!(p, Cdf::Mixture(_))) {
        if let Cdf::Mixture(mix) = &parts[pos] {
            let mut rest: Vec<Cdf<F>> = parts.to_vec();
            rest.remove(pos);
            let mut acc = F::zero();
            for (w, p) in mix {
                let mut sub_parts = Vec::new();
                let mut sub_shift = F::zero();
                collect_conv(p, &mut sub_parts, &mut sub_shift);
                sub_parts.extend(rest.iter().cloned());
                acc += *w * conv_eval(&sub_parts, t - sub_shift);
            }
            return acc;
        }
    }
    if parts.iter().all(|p| matches!(p, Cdf::Exponential(_))) {
        let rates: Vec<F> = parts
            .iter()
            .map(|p| match p {
                Cdf::Exponential(rate) => *rate,
                _ => unreachable!(),
            })
            .collect();
        return hypoexp_eval(&rates, t);
    }
    // integrate against a part with a density, preferring uniform (finite
    // support keeps the quadrature interval short)
    let density_pos = parts
        .iter()
        .position(|p| matches!(p, Cdf::Uniform(..)))
        .or_else(|| parts.iter().position(|p| matches!(p, Cdf::Exponential(_))));
    let mut rest: Vec<Cdf<F>> = parts.to_vec();
    match density_pos {
        Some(pos) => {
            let part = rest.remove(pos);
            let h = |x: F| conv_eval(&rest, t - x);
            match part {
                Cdf::Uniform(a, b) => {
                    if t <= a {
                        return F::zero();
                    }
                    let hi = b.min(t);
                    let w = F::one() / (b - a);
                    adaptive_simpson(&|x| w * h(x), a, hi, r(QUAD_TOL))
                }
                Cdf::Exponential(rate) => {
                    let f = |x: F| rate * (-rate * x).exp() * h(x);
                    adaptive_simpson(&f, F::zero(), t, r(QUAD_TOL))
                }
                _ => unreachable!(),
            }
        }
        None => {
            // Stieltjes fallback for integrators without a usable density
            // (pointwise max/min parts)
            let part = rest.remove(0);
            stieltjes(&part, &|x: F| conv_eval(&rest, t - x), t, r(QUAD_TOL))
        }
    }
}

/// CDF of a sum of independent exponentials. Distinct rates use the
/// hypoexponential partial-fraction form; repeated or near-equal rates use
/// uniformisation of the equivalent absorbing chain.
pub fn hypoexp_eval<F: Real>(rates: &[F], t: F) -> F {
    if t <= F::zero() {
        return F::zero();
    }
    if rates.is_empty() {
        return F::one();
    }
    if rates.len() == 1 {
        return F::one() - (-rates[0] * t).exp();
    }
    let max_rate = rates.iter().fold(F::zero(), |a, b| a.max(*b));
    let mut distinct = true;
    for i in 0..rates.len() {
        for j in (i + 1)..rates.len() {
            if (rates[i] - rates[j]).abs() <= r::<F>(1e-6) * max_rate {
                distinct = false;
            }
        }
    }
    if distinct {
        // 1 - sum_i (prod_{j != i} r_j / (r_j - r_i)) e^{-r_i t}
        let mut acc = F::zero();
        for i in 0..rates.len() {
            let mut coeff = F::one();
            for j in 0..rates.len() {
                if i != j {
                    coeff = coeff * rates[j] / (rates[j] - rates[i]);
                }
            }
            acc += coeff * (-rates[i] * t).exp();
        }
        (F::one() - acc).max(F::zero()).min(F::one())
    } else {
        uniformized_chain_eval(rates, t)
    }
}

/// Absorption probability by time `t` of the chain phase_1 -> ... ->
/// phase_n -> absorbed with exponential holding rates, via uniformisation.
fn uniformized_chain_eval<F: Real>(rates: &[F], t: F) -> F {
    let n = rates.len();
    let lambda = rates.iter().fold(F::zero(), |a, b| a.max(*b));
    // absorption is certain far beyond every phase's time scale; the bound
    // 1 - F(t) <= n * exp(-min_rate * t / n) is then below any tolerance
    let min_rate = rates.iter().fold(F::infinity(), |a, b| a.min(*b));
    if min_rate * t > r::<F>(2000.0) * F::from_usize(n.max(1)).unwrap() {
        return F::one();
    }
    let lt = lambda * t;
    let lt_f64 = lt.to_f64().unwrap_or(f64::MAX);
    // summation window around the Poisson mode
    let k_hi = (lt_f64 + 12.0 * lt_f64.sqrt() + 60.0).ceil() as usize;
    let mut phase = vec![F::zero(); n + 1];
    phase[0] = F::one();
    let mut absorbed_mass = F::zero();
    // run the pmf recurrence in place; for large lt start from zero pmf and
    // let the recurrence regenerate magnitude near the mode
    let mut pmf = (-lt).exp();
    let mut acc = F::zero();
    for k in 0..=k_hi {
        if k > 0 {
            pmf = pmf * lt / r(k as f64);
            // advance the uniformised chain one jump
            let mut next = vec![F::zero(); n + 1];
            for i in 0..n {
                let p_move = rates[i] / lambda;
                next[i + 1] += phase[i] * p_move;
                next[i] += phase[i] * (F::one() - p_move);
            }
            next[n] += phase[n];
            phase = next;
        }
        absorbed_mass = phase[n];
        acc += pmf * absorbed_mass;
    }
    // the truncated Poisson tail all sits at the current absorption level or
    // higher; close the gap with the tail mass times the current level
    let mut tail = F::one();
    let mut p = (-lt).exp();
    for k in 0..=k_hi {
        if k > 0 {
            p = p * lt / r(k as f64);
        }
        tail -= p;
    }
    (acc + tail.max(F::zero()) * absorbed_mass)
        .max(F::zero())
        .min(F::one())
}

/// Standard adaptive Simpson quadrature with absolute tolerance.
pub fn adaptive_simpson<F: Real>(f: &dyn Fn(F) -> F, a: F, b: F, tol: F) -> F {
    if b <= a {
        return F::zero();
    }
    let c = (a + b) * r(0.5);
    let (fa, fb, fc) = (f(a), f(b), f(c));
    let whole = (b - a) / r(6.0) * (fa + r::<F>(4.0) * fc + fb);
    simpson_rec(f, a, b, fa, fb, fc, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Real>(
    f: &dyn Fn(F) -> F,
    a: F,
    b: F,
    fa: F,
    fb: F,
    fc: F,
    whole: F,
    tol: F,
    depth: u32,
) -> F {
    let c = (a + b) * r(0.5);
    let d = (a + c) * r(0.5);
    let e = (c + b) * r(0.5);
    let (fd, fe) = (f(d), f(e));
    let left = (c - a) / r(6.0) * (fa + r::<F>(4.0) * fd + fc);
    let right = (b - c) / r(6.0) * (fc + r::<F>(4.0) * fe + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= r::<F>(15.0) * tol {
        left + right + delta / r(15.0)
    } else {
        let half = tol * r(0.5);
        simpson_rec(f, a, c, fa, fc, fd, left, half, depth - 1)
            + simpson_rec(f, c, b, fc, fb, fe, right, half, depth - 1)
    }
}

/// Midpoint Lebesgue-Stieltjes sum of `h(t - x) dG(x)` over `[0, t]`, with
/// doubling refinement. Used only when the integrator has no density
/// decomposition.
fn stieltjes<F: Real>(g: &Cdf<F>, h: &dyn Fn(F) -> F, t: F, tol: F) -> F {
    let jump_at_zero = g.eval(F::zero());
    let base = h(t) * jump_at_zero;
    if t == F::zero() {
        return base;
    }
    let mut m = 64usize;
    let mut prev = stieltjes_pass(g, h, t, m) + base;
    loop {
        m *= 2;
        let cur = stieltjes_pass(g, h, t, m) + base;
        if (cur - prev).abs() <= tol || m >= (1 << 20) {
            return cur;
        }
        prev = cur;
    }
}

fn stieltjes_pass<F: Real>(g: &Cdf<F>, h: &dyn Fn(F) -> F, t: F, m: usize) -> F {
    let mut acc = F::zero();
    let step = t / r(m as f64);
    let mut g_prev = g.eval(F::zero());
    for i in 0..m {
        let x_hi = step * r((i + 1) as f64);
        let g_hi = g.eval(x_hi);
        let mid = step * (r::<F>(i as f64) + r(0.5));
        acc += h(t - mid) * (g_hi - g_prev);
        g_prev = g_hi;
    }
    acc
}

// --- literal grammar -------------------------------------------------------

impl<F: Real> fmt::Display for Cdf<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cdf::Dirac(x) => write!(f, "dirac({x})"),
            Cdf::Uniform(a, b) => write!(f, "unif({a},{b})"),
            Cdf::Exponential(rate) => write!(f, "exp({rate})"),
            Cdf::Convolution(parts) => {
                write!(f, "conv(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
            Cdf::Mixture(parts) => {
                write!(f, "mix(")?;
                for (i, (w, p)) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{w}:{p}")?;
                }
                write!(f, ")")
            }
            Cdf::PointwiseMax(l, rgt) => write!(f, "max({l},{rgt})"),
            Cdf::PointwiseMin(l, rgt) => write!(f, "min({l},{rgt})"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("cdf syntax error at offset {offset}: {message}")]
pub struct CdfParseError {
    pub offset: usize,
    pub message: String,
}

/// Parses the CDF literal grammar: `dirac(x)`, `unif(a,b)`, `exp(rate)`,
/// `conv(F,G,...)`, `mix(w:F,...)`, `max(F,G)`, `min(F,G)`.
pub fn parse_cdf<F: Real>(text: &str) -> Result<Cdf<F>, CdfParseError> {
    let mut p = CdfParser { text: text.as_bytes(), pos: 0 };
    let cdf = p.parse_cdf()?;
    p.skip_ws();
    if p.pos != p.text.len() {
        return Err(p.err("trailing input"));
    }
    Ok(cdf)
}

struct CdfParser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> CdfParser<'a> {
    fn err(&self, message: &str) -> CdfParseError {
        CdfParseError { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), CdfParseError> {
        self.skip_ws();
        if self.pos < self.text.len() && self.text[self.pos] == c {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn peek(&mut self, c: u8) -> bool {
        self.skip_ws();
        self.pos < self.text.len() && self.text[self.pos] == c
    }

    fn ident(&mut self) -> Result<String, CdfParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected identifier"));
        }
        Ok(String::from_utf8_lossy(&self.text[start..self.pos]).into_owned())
    }

    fn number<F: Real>(&mut self) -> Result<F, CdfParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len()
            && (self.text[self.pos].is_ascii_digit()
                || self.text[self.pos] == b'.'
                || self.text[self.pos] == b'/'
                || self.text[self.pos] == b'-')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected number"));
        }
        let s = String::from_utf8_lossy(&self.text[start..self.pos]).into_owned();
        let rat = crate::ratio::parse_rat(&s).map_err(|e| CdfParseError {
            offset: start,
            message: e,
        })?;
        Ok(r(crate::ratio::rat_to_f64(&rat)))
    }

    fn parse_cdf<F: Real>(&mut self) -> Result<Cdf<F>, CdfParseError> {
        let at = self.pos;
        let name = self.ident()?;
        self.expect(b'(')?;
        let out = match name.as_str() {
            "dirac" => {
                let x = self.number()?;
                Cdf::dirac(x)
            }
            "unif" => {
                let a = self.number()?;
                self.expect(b',')?;
                let b = self.number()?;
                Cdf::uniform(a, b)
            }
            "exp" => {
                let rate = self.number()?;
                Cdf::exponential(rate)
            }
            "conv" => {
                let mut parts = vec![self.parse_cdf()?];
                while self.peek(b',') {
                    self.expect(b',')?;
                    parts.push(self.parse_cdf()?);
                }
                Ok(Cdf::convolve_all(parts))
            }
            "mix" => {
                let mut parts = Vec::new();
                loop {
                    let w = self.number()?;
                    self.expect(b':')?;
                    let p = self.parse_cdf()?;
                    parts.push((w, p));
                    if !self.peek(b',') {
                        break;
                    }
                    self.expect(b',')?;
                }
                Cdf::mixture(parts)
            }
            "max" => {
                let l = self.parse_cdf()?;
                self.expect(b',')?;
                let rgt = self.parse_cdf()?;
                Ok(Cdf::pmax(l, rgt))
            }
            "min" => {
                let l = self.parse_cdf()?;
                self.expect(b',')?;
                let rgt = self.parse_cdf()?;
                Ok(Cdf::pmin(l, rgt))
            }
            other => {
                return Err(CdfParseError {
                    offset: at,
                    message: format!("unknown distribution `{other}`"),
                })
            }
        };
        let out = out.map_err(|e| CdfParseError { offset: at, message: e.to_string() })?;
        self.expect(b')')?;
        Ok(out)
    }
}
