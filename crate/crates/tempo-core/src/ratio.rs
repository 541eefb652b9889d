//! Exact rational arithmetic helpers shared by every parser and by the
//! tableau machinery.
//!
//! One text form is accepted everywhere a rational appears: `p/q`, an
//! integer, or a decimal such as `1.25` (parsed exactly as 125/100).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat_zero() -> Rat {
    Rat::zero()
}

pub fn rat_one() -> Rat {
    Rat::one()
}

pub fn rat_from_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Parses `p/q`, an integer, or a decimal literal into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty rational literal".into());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|_| format!("bad numerator `{num}`"))?;
        let d = BigInt::from_str(den.trim()).map_err(|_| format!("bad denominator `{den}`"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in `{s}`"));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let neg = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        if !int_digits.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
            || frac_part.is_empty()
        {
            return Err(format!("bad decimal literal `{s}`"));
        }
        let int_digits = if int_digits.is_empty() { "0" } else { int_digits };
        let numerator = BigInt::from_str(&format!("{int_digits}{frac_part}"))
            .map_err(|_| format!("bad decimal literal `{s}`"))?;
        let denominator = BigInt::from(10u32).pow(frac_part.len() as u32);
        let mut r = Rat::new(numerator, denominator);
        if neg {
            r = -r;
        }
        return Ok(r);
    }
    BigInt::from_str(s)
        .map(Rat::from_integer)
        .map_err(|_| format!("bad rational literal `{s}`"))
}

/// Renders a rational as an integer or `p/q`; round-trips through
/// [`parse_rat`].
pub fn rat_to_string(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A rational extended with the two infinities, used for image bounds and
/// tableau intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ext {
    NegInf,
    Fin(Rat),
    PosInf,
}

impl Ext {
    pub fn fin(r: Rat) -> Self {
        Ext::Fin(r)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Ext::Fin(_))
    }

    pub fn as_fin(&self) -> Option<&Rat> {
        match self {
            Ext::Fin(r) => Some(r),
            _ => None,
        }
    }
}

impl PartialOrd for Ext {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ext {
    fn cmp(&self, other: &Self) -> Ordering {
        use Ext::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Fin(a), Fin(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::NegInf => write!(f, "-inf"),
            Ext::PosInf => write!(f, "inf"),
            Ext::Fin(r) => write!(f, "{}", rat_to_string(r)),
        }
    }
}

/// A (possibly open, possibly unbounded) interval of rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Ext,
    pub lo_closed: bool,
    pub hi: Ext,
    pub hi_closed: bool,
}

impl Interval {
    /// `[0, +inf)`
    pub fn nonneg() -> Self {
        Interval {
            lo: Ext::Fin(rat_zero()),
            lo_closed: true,
            hi: Ext::PosInf,
            hi_closed: false,
        }
    }

    /// `[a, a]`
    pub fn point(a: Rat) -> Self {
        Interval {
            lo: Ext::Fin(a.clone()),
            lo_closed: true,
            hi: Ext::Fin(a),
            hi_closed: true,
        }
    }

    /// `[a, +inf)`
    pub fn at_least(a: Rat) -> Self {
        Interval {
            lo: Ext::Fin(a),
            lo_closed: true,
            hi: Ext::PosInf,
            hi_closed: false,
        }
    }

    /// `(a, +inf)`
    pub fn greater_than(a: Rat) -> Self {
        Interval {
            lo: Ext::Fin(a),
            lo_closed: false,
            hi: Ext::PosInf,
            hi_closed: false,
        }
    }

    /// `[0, a]`
    pub fn up_to(a: Rat) -> Self {
        Interval {
            lo: Ext::Fin(rat_zero()),
            lo_closed: true,
            hi: Ext::Fin(a),
            hi_closed: true,
        }
    }

    /// `[0, a)`
    pub fn below(a: Rat) -> Self {
        Interval {
            lo: Ext::Fin(rat_zero()),
            lo_closed: true,
            hi: Ext::Fin(a),
            hi_closed: false,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self.lo.cmp(&self.hi) {
            Ordering::Greater => true,
            Ordering::Equal => !(self.lo_closed && self.hi_closed) || !self.lo.is_finite(),
            Ordering::Less => false,
        }
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            Ordering::Greater => (self.lo.clone(), self.lo_closed),
            Ordering::Less => (other.lo.clone(), other.lo_closed),
            Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            Ordering::Less => (self.hi.clone(), self.hi_closed),
            Ordering::Greater => (other.hi.clone(), other.hi_closed),
            Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
        };
        Interval { lo, lo_closed, hi, hi_closed }
    }

    /// Smallest "nice" rational inside the interval: the left endpoint when
    /// closed, endpoint+1 when open at an integer, endpoint+1/2 otherwise
    /// (clamped to the interval midpoint when that would overshoot).
    pub fn pick_min(&self) -> Option<Rat> {
        if self.is_empty() {
            return None;
        }
        let lo = self.lo.as_fin()?.clone();
        if self.lo_closed {
            return Some(lo);
        }
        let bump = if lo.is_integer() { rat_one() } else { rat_frac(1, 2) };
        let candidate = &lo + bump;
        let inside = match &self.hi {
            Ext::PosInf => true,
            Ext::Fin(h) => {
                if self.hi_closed {
                    candidate <= *h
                } else {
                    candidate < *h
                }
            }
            Ext::NegInf => false,
        };
        if inside {
            Some(candidate)
        } else {
            // fall back to the midpoint, which always exists for a non-empty
            // open interval with finite endpoints
            let hi = self.hi.as_fin()?.clone();
            Some((lo + hi) / rat_from_int(2))
        }
    }

    /// Largest "nice" rational inside the interval when the interval is
    /// bounded above; `None` when unbounded.
    pub fn pick_max(&self) -> Option<Rat> {
        if self.is_empty() {
            return None;
        }
        let hi = self.hi.as_fin()?.clone();
        if self.hi_closed {
            return Some(hi);
        }
        let bump = if hi.is_integer() { rat_one() } else { rat_frac(1, 2) };
        let candidate = &hi - bump;
        let inside = match &self.lo {
            Ext::NegInf => candidate >= rat_zero(),
            Ext::Fin(l) => {
                if self.lo_closed {
                    candidate >= *l
                } else {
                    candidate > *l
                }
            }
            Ext::PosInf => false,
        };
        if inside && candidate >= rat_zero() {
            Some(candidate)
        } else {
            let lo = self.lo.as_fin()?.clone();
            Some((lo + hi) / rat_from_int(2))
        }
    }

    /// True when some `l` in `self` and `u` in `other` satisfy `l <= u`.
    pub fn realizable_against(&self, upper: &Interval) -> bool {
        if self.is_empty() || upper.is_empty() {
            return false;
        }
        // min of self vs max of upper
        match (&self.lo, &upper.hi) {
            (Ext::NegInf, _) | (_, Ext::PosInf) => true,
            (Ext::Fin(l), Ext::Fin(u)) => {
                if self.lo_closed && upper.hi_closed {
                    l <= u
                } else {
                    l < u
                }
            }
            (Ext::PosInf, _) | (_, Ext::NegInf) => false,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        write!(f, "{}{},{}{}", open, self.lo, self.hi, close)
    }
}
