//! The ε-faster-than relation on CDFs and least acceleration factors.
//!
//! `F ⊑_ε G` holds when `F(ε·t) >= G(t)` for every `t >= 0`. For the base
//! family (Dirac, uniform, exponential) and for a pointwise maximum of two
//! base CDFs on either side, the least such ε has a closed form; everything
//! else is answered by a grid check plus analytic endpoint and tail
//! reasoning. Infinity ("no acceleration suffices") is always decided
//! analytically, never from the grid.

use thiserror::Error;

use crate::cdf::Cdf;
use crate::real::{r, Real};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("least acceleration has no closed form for this CDF shape")]
pub struct UnsupportedShape;

/// An acceleration factor, possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Acceleration<F: Real> {
    Finite(F),
    Infinite,
}

impl<F: Real> Acceleration<F> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Acceleration::Finite(_))
    }

    pub fn finite(&self) -> Option<F> {
        match self {
            Acceleration::Finite(v) => Some(*v),
            Acceleration::Infinite => None,
        }
    }

    /// Clamps to the `[1, ∞]` codomain used by simulation distances.
    pub fn clamped(&self) -> Acceleration<F> {
        match self {
            Acceleration::Finite(v) => Acceleration::Finite(v.max(F::one())),
            Acceleration::Infinite => Acceleration::Infinite,
        }
    }

    pub fn mul(&self, other: &Acceleration<F>) -> Acceleration<F> {
        match (self, other) {
            (Acceleration::Finite(a), Acceleration::Finite(b)) => Acceleration::Finite(*a * *b),
            _ => Acceleration::Infinite,
        }
    }

    pub fn max(&self, other: &Acceleration<F>) -> Acceleration<F> {
        match (self, other) {
            (Acceleration::Finite(a), Acceleration::Finite(b)) => {
                Acceleration::Finite(a.max(*b))
            }
            _ => Acceleration::Infinite,
        }
    }

    /// Total order with `Infinite` as top.
    pub fn le(&self, other: &Acceleration<F>) -> bool {
        match (self, other) {
            (Acceleration::Finite(a), Acceleration::Finite(b)) => a <= b,
            (_, Acceleration::Infinite) => true,
            (Acceleration::Infinite, Acceleration::Finite(_)) => false,
        }
    }
}

impl<F: Real> std::fmt::Display for Acceleration<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Acceleration::Finite(v) => write!(f, "{v}"),
            Acceleration::Infinite => write!(f, "inf"),
        }
    }
}

/// Sampling grid for the numeric ε-faster-than check: log-spaced points on
/// `(0, T]` where `T` is the `1 - 1e-6` quantile of the dominated (slower)
/// CDF; the tail beyond `T` and the endpoint at zero are handled
/// analytically.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec<F: Real> {
    pub points: usize,
    pub tol: F,
}

impl<F: Real> Default for GridSpec<F> {
    fn default() -> Self {
        GridSpec { points: 2048, tol: r(1e-9) }
    }
}

impl<F: Real> GridSpec<F> {
    pub fn with_points(points: usize) -> Self {
        GridSpec { points: points.max(16), tol: r(1e-9) }
    }
}

/// Decides `F ⊑_ε G`. Uses the closed form whenever both sides are in the
/// supported family, otherwise the analytic-plus-grid check.
pub fn eps_faster<F: Real>(f: &Cdf<F>, g: &Cdf<F>, eps: F, grid: &GridSpec<F>) -> bool {
    assert!(eps > F::zero(), "acceleration factor must be positive");
    if let Ok(least) = least_acceleration(f, g) {
        return match least {
            Acceleration::Infinite => false,
            Acceleration::Finite(c) => eps >= c * (F::one() - r(1e-12)),
        };
    }
    eps_faster_numeric(f, g, eps, grid)
}

/// The grid route alone; kept separate so it can serve as an independent
/// oracle for the closed forms.
pub fn eps_faster_numeric<F: Real>(f: &Cdf<F>, g: &Cdf<F>, eps: F, grid: &GridSpec<F>) -> bool {
    let tol = grid.tol;
    let (f0, g0) = (f.eval(F::zero()), g.eval(F::zero()));
    // left endpoint, exactly at zero
    if f0 < g0 - tol {
        return false;
    }
    // first-order behaviour at the origin: acceleration scales the slope
    if f0 <= g0 + tol {
        let (sf, sg) = (f.initial_slope(), g.initial_slope());
        if sf.is_finite() && sg.is_finite() && eps * sf < sg * (F::one() - r(1e-12)) {
            return false;
        }
    }
    // tails
    let (lf, lg) = (f.limit(), g.limit());
    if lf < lg - tol {
        return false;
    }
    if let Some(tg) = g.limit_attained_at() {
        if f.eval(eps * tg) < lg - tol {
            return false;
        }
    }
    // F is identically zero before inf_support(F)/eps; G must be too
    let inf_f = f.inf_support();
    if inf_f > F::zero() {
        let probe = inf_f / eps * (F::one() - r(1e-9));
        if probe > F::zero() && g.eval(probe) > tol {
            return false;
        }
    }
    // kinks of either side, mapped into G's time scale
    let mut extras: Vec<F> = g.critical_times();
    for c in f.critical_times() {
        extras.push(c / eps);
    }
    for t in extras {
        if t > F::zero() && f.eval(eps * t) < g.eval(t) - tol {
            return false;
        }
    }
    // log-spaced grid on (0, T]
    let level = lg * (F::one() - r(1e-6));
    let t_max = match g.quantile(level) {
        Some(t) if t > F::zero() => t,
        _ => F::one(),
    };
    let n = grid.points.max(16);
    let lo_log = (t_max * r::<F>(1e-9)).ln();
    let hi_log = t_max.ln();
    for i in 0..n {
        let frac = r::<F>(i as f64) / r((n - 1) as f64);
        let t = (lo_log + (hi_log - lo_log) * frac).exp();
        if f.eval(eps * t) < g.eval(t) - tol {
            return false;
        }
    }
    true
}

// --- closed forms -----------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
enum Base<F: Real> {
    Dirac(F),
    Unif(F, F),
    Exp(F),
}

fn base_of<F: Real>(c: &Cdf<F>) -> Option<Base<F>> {
    match c {
        Cdf::Dirac(x) => Some(Base::Dirac(*x)),
        Cdf::Uniform(a, b) => Some(Base::Unif(*a, *b)),
        Cdf::Exponential(rate) => Some(Base::Exp(*rate)),
        _ => None,
    }
}

fn max_pair_of<F: Real>(c: &Cdf<F>) -> Option<(Base<F>, Base<F>)> {
    match c {
        Cdf::PointwiseMax(l, rgt) => Some((base_of(l)?, base_of(rgt)?)),
        _ => None,
    }
}

/// Least ε > 0 with `F ⊑_ε G`, unclamped: values below one report that `F`
/// is already faster, zero means every positive ε works (`F = Dirac(0)`).
///
/// Supported shapes: the base family on both sides, and a pointwise maximum
/// of two base CDFs on either side (or both).
pub fn least_acceleration<F: Real>(
    f: &Cdf<F>,
    g: &Cdf<F>,
) -> Result<Acceleration<F>, UnsupportedShape> {
    let f = f.simplified();
    let g = g.simplified();
    // a maximum on the dominated side splits: F ⊑_ε max(G1,G2) iff both
    if let Some((g1, g2)) = max_pair_of(&g) {
        let c1 = least_accel_left(&f, g1)?;
        let c2 = least_accel_left(&f, g2)?;
        return Ok(c1.max(&c2));
    }
    let bg = base_of(&g).ok_or(UnsupportedShape)?;
    least_accel_left(&f, bg)
}

fn least_accel_left<F: Real>(
    f: &Cdf<F>,
    bg: Base<F>,
) -> Result<Acceleration<F>, UnsupportedShape> {
    if let Some(bf) = base_of(f) {
        return Ok(base_least(bf, bg));
    }
    if let Some((f1, f2)) = max_pair_of(f) {
        return max_left_least(f1, f2, bg).ok_or(UnsupportedShape);
    }
    Err(UnsupportedShape)
}

fn is_dirac0<F: Real>(b: &Base<F>) -> bool {
    matches!(b, Base::Dirac(x) if *x == F::zero())
}

/// The pairwise table from the Dirac/uniform/exponential comparison
/// propositions.
fn base_least<F: Real>(bf: Base<F>, bg: Base<F>) -> Acceleration<F> {
    use Acceleration::*;
    use Base::*;
    if is_dirac0(&bf) {
        return Finite(F::zero());
    }
    if is_dirac0(&bg) {
        return Infinite;
    }
    match (bf, bg) {
        (Dirac(x), Dirac(y)) => Finite(x / y),
        (Dirac(x), Unif(c, _)) => {
            if c > F::zero() {
                Finite(x / c)
            } else {
                Infinite
            }
        }
        (Dirac(_), Exp(_)) => Infinite,
        (Unif(_, b), Dirac(y)) => Finite(b / y),
        (Unif(a, b), Unif(c, d)) => {
            if c == F::zero() {
                if a == F::zero() {
                    Finite(b / d)
                } else {
                    Infinite
                }
            } else {
                Finite((a / c).max(b / d))
            }
        }
        (Unif(a, b), Exp(theta)) => {
            if a == F::zero() {
                Finite(theta * b)
            } else {
                Infinite
            }
        }
        (Exp(_), Dirac(_)) | (Exp(_), Unif(..)) => Infinite,
        (Exp(t1), Exp(t2)) => Finite(t2 / t1),
    }
}

/// Least acceleration when the accelerated side is a pointwise maximum of
/// two base CDFs. Dirac components other than `Dirac(0)` (which `simplified`
/// removes) are outside the computable family.
fn max_left_least<F: Real>(f1: Base<F>, f2: Base<F>, bg: Base<F>) -> Option<Acceleration<F>> {
    use Acceleration::*;
    use Base::*;
    match (f1, f2) {
        (Unif(a1, b1), Unif(a2, b2)) => Some(max_uu_least(a1, b1, a2, b2, bg)),
        (Exp(theta), Unif(a, b)) | (Unif(a, b), Exp(theta)) => {
            Some(max_eu_least(theta, a, b, bg))
        }
        // max of two exponentials or with Dirac(0) is removed by
        // simplification; anything else is unsupported
        _ => match bg {
            // still answer the trivially infinite targets
            Dirac(y) if y == F::zero() => Some(Infinite),
            _ => None,
        },
    }
}

/// `F = max(U(a1,b1), U(a2,b2))` with genuinely crossing components
/// (nested pairs are collapsed by `simplified`).
fn max_uu_least<F: Real>(a1: F, b1: F, a2: F, b2: F, bg: Base<F>) -> Acceleration<F> {
    use Acceleration::*;
    // normalise: component 1 starts earlier and ends later
    let (a1, b1, a2, b2) = if a1 <= a2 { (a1, b1, a2, b2) } else { (a2, b2, a1, b1) };
    match bg {
        Base::Dirac(y) => {
            if y == F::zero() {
                Infinite
            } else {
                Finite(b1.min(b2) / y)
            }
        }
        Base::Exp(theta) => {
            // only a component starting at zero can cover the exponential
            // near the origin, and then it must dominate it alone
            if a1 > F::zero() {
                Infinite
            } else {
                Finite(theta * b1)
            }
        }
        Base::Unif(c, d) => {
            if c == F::zero() && a1 > F::zero() {
                return Infinite;
            }
            // necessary bounds: F positive from c on, and F must reach one
            // by d (the earlier-finishing component governs)
            let start_bound = if c > F::zero() { a1 / c } else { F::zero() };
            let end_bound = b2.min(b1) / d;
            let eps_lb = start_bound.max(end_bound);
            if pl_max_dominates(a1, b1, a2, b2, c, d, eps_lb) {
                return Finite(eps_lb);
            }
            // otherwise the interior kink where the two components cross
            // binds against G
            let denom = a1 - b1 - a2 + b2;
            if denom == F::zero() {
                return Finite(eps_lb);
            }
            let k = (a1 * b2 - a2 * b1) / denom;
            let eps_cross = crossing_snap_eps(a1, b1, c, d, k);
            Finite(eps_lb.max(eps_cross))
        }
    }
}

/// ε making the value of `U(a,b)` at the crossing point `k` land exactly on
/// `U(c,d)`: solves `U(a,b)(k) = U(c,d)(k/ε)`.
fn crossing_snap_eps<F: Real>(a: F, b: F, c: F, d: F, k: F) -> F {
    (b - a) * k / (d * k - c * k - d * a + b * c)
}

/// Exact domination check for `max(U(a1,b1), U(a2,b2))(ε·t) >= U(c,d)(t)`:
/// all functions are piecewise linear, so comparing at every kink decides.
fn pl_max_dominates<F: Real>(a1: F, b1: F, a2: F, b2: F, c: F, d: F, eps: F) -> bool {
    if eps <= F::zero() {
        return false;
    }
    let f_at = |t: F| -> F {
        let x = eps * t;
        let u = |a: F, b: F| -> F {
            if x <= a {
                F::zero()
            } else if x >= b {
                F::one()
            } else {
                (x - a) / (b - a)
            }
        };
        u(a1, b1).max(u(a2, b2))
    };
    let g_at = |t: F| -> F {
        if t <= c {
            F::zero()
        } else if t >= d {
            F::one()
        } else {
            (t - c) / (d - c)
        }
    };
    let mut kinks = vec![c, d, a1 / eps, b1 / eps, a2 / eps, b2 / eps];
    let denom = a1 - b1 - a2 + b2;
    if denom != F::zero() {
        kinks.push((a1 * b2 - a2 * b1) / denom / eps);
    }
    let tol = r::<F>(1e-12);
    kinks
        .into_iter()
        .filter(|t| *t >= c && *t <= d)
        .all(|t| f_at(t) >= g_at(t) - tol)
}

/// `F = max(Exp(theta1), U(a,b))`.
fn max_eu_least<F: Real>(theta1: F, a: F, b: F, bg: Base<F>) -> Acceleration<F> {
    use Acceleration::*;
    // when the uniform starts at zero and its slope beats the exponential's
    // initial slope, the maximum collapses to the uniform
    let collapses = a == F::zero() && F::one() / b >= theta1;
    match bg {
        Base::Dirac(y) => {
            if y == F::zero() {
                Infinite
            } else {
                Finite(b / y)
            }
        }
        Base::Exp(theta2) => {
            if collapses {
                Finite(theta2 * b)
            } else {
                Finite(theta2 / theta1)
            }
        }
        Base::Unif(c, d) => {
            if collapses {
                return base_least(Base::Unif(a, b), Base::Unif(c, d));
            }
            // the exponential leads early, the uniform takes over at their
            // crossing point k in (a, b); the end of G and the kink at k are
            // the binding candidates
            let k = exp_unif_crossing(theta1, a, b);
            let eps_cross = crossing_snap_eps(a, b, c, d, k);
            Finite((b / d).max(eps_cross))
        }
    }
}

/// The positive crossing of `Exp(theta)` and `U(a,b)` (the Lambert-W point),
/// located by bracketed bisection.
fn exp_unif_crossing<F: Real>(theta: F, a: F, b: F) -> F {
    let h = |x: F| -> F {
        let u = if x <= a {
            F::zero()
        } else if x >= b {
            F::one()
        } else {
            (x - a) / (b - a)
        };
        u - (F::one() - (-theta * x).exp())
    };
    // h < 0 just after a (or after 0 when a = 0 and the uniform is
    // shallower), h > 0 at b
    let mut lo = if a > F::zero() { a } else { b * r(1e-12) };
    let mut hi = b;
    for _ in 0..200 {
        let mid = (lo + hi) * r(0.5);
        if h(mid) < F::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * r(0.5)
}

/// `c(F,G) = inf{ε >= 1 | F ⊑_ε G}`: the clamped constant consumed by the
/// simulation distance.
pub fn c_clamped<F: Real>(f: &Cdf<F>, g: &Cdf<F>) -> Result<Acceleration<F>, UnsupportedShape> {
    least_acceleration(f, g).map(|a| a.clamped())
}

/// Closed form when available, numeric oracle otherwise; always clamped.
pub fn c_clamped_or_numeric<F: Real>(
    f: &Cdf<F>,
    g: &Cdf<F>,
    grid: &GridSpec<F>,
) -> Acceleration<F> {
    match least_acceleration(f, g) {
        Ok(a) => a.clamped(),
        Err(UnsupportedShape) => least_acceleration_numeric(f, g, grid).clamped(),
    }
}

/// Bisection oracle for the least acceleration. Infinity is certified
/// analytically (limit comparison, attained-limit comparison, zero-mass and
/// support-gap arguments); the grid never decides non-existence.
pub fn least_acceleration_numeric<F: Real>(
    f: &Cdf<F>,
    g: &Cdf<F>,
    grid: &GridSpec<F>,
) -> Acceleration<F> {
    let f = f.simplified();
    let g = g.simplified();
    let tiny = r::<F>(1e-12);
    // (1) mass at zero is invariant under acceleration
    if f.eval(F::zero()) < g.eval(F::zero()) - tiny {
        return Acceleration::Infinite;
    }
    // (2) total mass
    let (lf, lg) = (f.limit(), g.limit());
    if lf < lg - tiny {
        return Acceleration::Infinite;
    }
    // (3) G has mass arbitrarily close to zero but F has a support gap
    if f.inf_support() > tiny && g.inf_support() <= tiny && g.eval(F::zero()) <= tiny {
        return Acceleration::Infinite;
    }
    // (4) G attains its limit at a finite time but F never reaches that level
    if g.limit_attained_at().is_some() && !f.reaches_level(lg - tiny) {
        return Acceleration::Infinite;
    }
    // (5) G grows first-order at the origin but F only second-order: no
    // acceleration factor can fix a vanishing slope
    if f.eval(F::zero()) <= tiny && g.eval(F::zero()) <= tiny {
        let (sf, sg) = (f.initial_slope(), g.initial_slope());
        if sf == F::zero() && sg > F::zero() {
            return Acceleration::Infinite;
        }
    }
    let mut hi = F::one();
    let mut guard = 0;
    while !eps_faster_numeric(&f, &g, hi, grid) {
        hi *= r(2.0);
        guard += 1;
        if guard > 64 {
            // analytically a finite ε exists; this is unreachable for the
            // shapes the library constructs
            return Acceleration::Infinite;
        }
    }
    let mut lo = F::zero();
    for _ in 0..120 {
        let mid = (lo + hi) * r(0.5);
        if mid <= F::zero() {
            break;
        }
        if eps_faster_numeric(&f, &g, mid, grid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= r::<F>(1e-12) * hi.max(F::one()) {
            break;
        }
    }
    Acceleration::Finite(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Cdf<f64>;
    const INF: Acceleration<f64> = Acceleration::Infinite;

    fn fin(v: f64) -> Acceleration<f64> {
        Acceleration::Finite(v)
    }

    fn exp(rate: f64) -> C {
        C::exponential(rate).unwrap()
    }

    fn unif(a: f64, b: f64) -> C {
        C::uniform(a, b).unwrap()
    }

    fn la(f: &C, g: &C) -> Acceleration<f64> {
        least_acceleration(f, g).unwrap()
    }

    #[test]
    fn base_family_constants() {
        assert_eq!(la(&exp(2.0), &exp(4.0)), fin(2.0));
        assert_eq!(la(&unif(0.0, 3.0), &exp(0.5)), fin(1.5));
        assert_eq!(la(&unif(1.0, 4.0), &unif(2.0, 3.0)), fin(4.0 / 3.0));
        assert_eq!(la(&exp(1.0), &unif(0.0, 1.0)), INF);
        assert_eq!(la(&unif(1.0, 2.0), &exp(1.0)), INF);
        assert_eq!(la(&unif(1.0, 2.0), &unif(0.0, 1.0)), INF);
        assert_eq!(la(&C::dirac0(), &exp(7.0)), fin(0.0));
        assert_eq!(la(&exp(1.0), &C::dirac0()), INF);
        assert_eq!(la(&C::dirac(2.0).unwrap(), &C::dirac(1.0).unwrap()), fin(2.0));
        assert_eq!(la(&C::dirac(1.0).unwrap(), &unif(2.0, 3.0)), fin(0.5));
        assert_eq!(la(&unif(1.0, 3.0), &C::dirac(2.0).unwrap()), fin(1.5));
    }

    #[test]
    fn clamping() {
        assert_eq!(c_clamped(&exp(4.0), &exp(2.0)).unwrap(), fin(1.0));
        assert_eq!(c_clamped(&exp(2.0), &exp(4.0)).unwrap(), fin(2.0));
        assert_eq!(c_clamped(&exp(1.0), &unif(0.0, 1.0)).unwrap(), INF);
    }

    #[test]
    fn eps_faster_examples() {
        let grid = GridSpec::default();
        assert!(eps_faster(&C::dirac0(), &exp(7.0), 1.0, &grid));
        assert!(eps_faster(&exp(2.0), &exp(4.0), 2.0, &grid));
        assert!(!eps_faster(&exp(2.0), &exp(4.0), 1.9, &grid));
        assert!(!eps_faster(&exp(3.0), &unif(1.0, 2.0), 100.0, &grid));
    }

    #[test]
    fn numeric_oracle_agrees_on_base_family() {
        let grid = GridSpec::default();
        let cases = vec![
            (exp(2.0), exp(4.0)),
            (unif(0.0, 3.0), exp(0.5)),
            (unif(1.0, 4.0), unif(2.0, 3.0)),
            (unif(0.0, 2.0), unif(0.0, 5.0)),
            (C::dirac(2.0).unwrap(), unif(1.0, 3.0)),
        ];
        for (f, g) in cases {
            let closed = la(&f, &g).finite().unwrap();
            let numeric = least_acceleration_numeric(&f, &g, &grid)
                .finite()
                .unwrap();
            assert!(
                (closed - numeric).abs() <= 1e-6 * closed.max(1.0),
                "{f} vs {g}: closed {closed}, numeric {numeric}"
            );
        }
        // infinite cases agree
        for (f, g) in [
            (exp(1.0), unif(0.0, 1.0)),
            (unif(1.0, 2.0), exp(3.0)),
            (exp(5.0), C::dirac0()),
            (unif(2.0, 3.0), unif(0.0, 1.0)),
        ] {
            assert_eq!(least_acceleration_numeric(&f, &g, &grid), INF, "{f} vs {g}");
        }
    }

    #[test]
    fn reflexivity_is_one() {
        let grid = GridSpec::with_points(512);
        for f in [exp(2.0), unif(1.0, 2.0), unif(0.0, 1.0)] {
            let v = least_acceleration_numeric(&f, &f, &grid).finite().unwrap();
            assert!((v - 1.0).abs() < 1e-6, "{f}: {v}");
        }
    }

    #[test]
    fn max_composed_closed_forms_match_oracle() {
        let grid = GridSpec::default();
        // the worked composition: max(Exp(1), U(0,2)) vs U(1,3) -> 2/3
        let f = C::pmax(exp(1.0), unif(0.0, 2.0));
        let g = unif(1.0, 3.0);
        let closed = la(&f, &g).finite().unwrap();
        assert!((closed - 2.0 / 3.0).abs() < 1e-9, "{closed}");
        let numeric = least_acceleration_numeric(&f, &g, &grid).finite().unwrap();
        assert!((closed - numeric).abs() < 1e-6);

        let cases: Vec<(C, C)> = vec![
            (C::pmax(unif(0.0, 2.0), unif(1.0, 1.5)), unif(1.0, 3.0)),
            (C::pmax(unif(0.0, 4.0), unif(1.0, 2.0)), unif(2.0, 5.0)),
            (C::pmax(unif(0.5, 4.0), unif(1.0, 2.0)), unif(2.0, 5.0)),
            (C::pmax(unif(0.0, 3.0), unif(0.5, 1.0)), exp(2.0)),
            (C::pmax(exp(0.5), unif(0.0, 5.0)), exp(2.0)),
            (C::pmax(exp(3.0), unif(0.0, 0.25)), exp(1.0)),
            (C::pmax(exp(1.0), unif(1.0, 2.0)), unif(2.0, 6.0)),
            (C::pmax(exp(2.0), unif(0.5, 3.0)), C::dirac(1.0).unwrap()),
            (exp(1.0), C::pmax(exp(2.0), unif(0.0, 1.0))),
            (unif(0.0, 1.0), C::pmax(exp(2.0), unif(0.5, 2.0))),
        ];
        for (f, g) in cases {
            let closed = la(&f, &g);
            let numeric = least_acceleration_numeric(&f, &g, &grid);
            match (closed, numeric) {
                (Acceleration::Finite(cv), Acceleration::Finite(nv)) => assert!(
                    (cv - nv).abs() <= 1e-6 * cv.max(1.0),
                    "{f} vs {g}: closed {cv}, numeric {nv}"
                ),
                (c, n) => assert_eq!(c, n, "{f} vs {g}"),
            }
        }
    }

    #[test]
    fn unsupported_shapes_report() {
        let f = C::convolve(exp(1.0), exp(2.0));
        assert_eq!(least_acceleration(&f, &exp(1.0)), Err(UnsupportedShape));
        // a two-phase chain cannot dominate a plain exponential near zero
        let grid = GridSpec::with_points(512);
        assert_eq!(least_acceleration_numeric(&f, &exp(1.0), &grid), INF);
        // but it can dominate another two-phase chain: Erlang rates scale
        // with the acceleration factor, so the answer is the rate ratio
        let slow = C::convolve(exp(1.0), exp(1.0));
        let fast = C::convolve(exp(2.0), exp(2.0));
        let v = least_acceleration_numeric(&fast, &slow, &grid).finite().unwrap();
        assert!((v - 0.5).abs() < 1e-6, "{v}");
    }
}
