//! Certified real arithmetic.
//!
//! Every fractional-part comparison made anywhere in the crate goes through
//! this module, so each one is either decided exactly (surds) or decided with
//! a margin that exceeds the accumulated error radius (balls). Undecidable
//! comparisons surface as [`Error::PrecisionInsufficient`] and are retried
//! by [`Precision::ladder`].

mod ball;
mod surd;

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

pub use ball::Ball;
pub use surd::Surd;

use crate::error::{Error, Result};

/// Working precision policy: start at `start` bits and double on
/// [`Error::PrecisionInsufficient`] until `cap` is reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Precision {
    pub start: u32,
    pub cap: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Precision {
            start: 128,
            cap: 4096,
        }
    }
}

impl Precision {
    pub fn new(start: u32, cap: u32) -> Self {
        Precision {
            start: start.max(8),
            cap: cap.max(start.max(8)),
        }
    }

    /// Raises the starting precision (never above the cap).
    pub fn at_least(self, bits: u32) -> Self {
        Precision {
            start: self.start.max(bits).min(self.cap),
            cap: self.cap,
        }
    }

    /// Runs `f` at increasing precision until it stops failing for lack of
    /// bits, or the cap is exhausted.
    pub fn ladder<T>(&self, mut f: impl FnMut(u32) -> Result<T>) -> Result<T> {
        let mut bits = self.start;
        loop {
            match f(bits) {
                Err(Error::PrecisionInsufficient { .. }) if bits < self.cap => {
                    bits = bits.saturating_mul(2).min(self.cap);
                }
                Err(Error::PrecisionInsufficient { .. }) => {
                    return Err(Error::PrecisionInsufficient { bits })
                }
                other => return other,
            }
        }
    }
}

/// A real number known either exactly (a quadratic surd, rationals included)
/// or as a ball with a certified absolute error radius.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertifiedReal {
    Surd(Surd),
    BigFloat(Ball),
}

impl From<Surd> for CertifiedReal {
    fn from(s: Surd) -> Self {
        CertifiedReal::Surd(s)
    }
}

impl From<Ball> for CertifiedReal {
    fn from(b: Ball) -> Self {
        CertifiedReal::BigFloat(b)
    }
}

impl CertifiedReal {
    pub fn from_int<T: Into<BigInt>>(n: T) -> Self {
        CertifiedReal::Surd(Surd::from_int(n))
    }

    pub fn from_ratio(x: &BigRational) -> Self {
        CertifiedReal::Surd(Surd::from_ratio(x))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, CertifiedReal::Surd(_))
    }

    pub fn as_surd(&self) -> Option<&Surd> {
        match self {
            CertifiedReal::Surd(s) => Some(s),
            CertifiedReal::BigFloat(_) => None,
        }
    }

    pub fn as_ratio(&self) -> Option<BigRational> {
        self.as_surd().and_then(Surd::as_ratio)
    }

    /// True only when the value is provably zero.
    pub fn is_zero(&self) -> bool {
        match self {
            CertifiedReal::Surd(s) => s.is_zero(),
            CertifiedReal::BigFloat(b) => {
                b.is_exact() && b.mid().sign() == num_bigint::Sign::NoSign
            }
        }
    }

    /// Precision carried by a ball, `None` for exact values.
    pub fn bits(&self) -> Option<u32> {
        match self {
            CertifiedReal::Surd(_) => None,
            CertifiedReal::BigFloat(b) => Some(b.prec()),
        }
    }

    pub fn to_ball(&self, prec: u32) -> Ball {
        match self {
            CertifiedReal::Surd(s) => s.to_ball(prec),
            CertifiedReal::BigFloat(b) => b.with_prec(prec.max(b.prec())),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            CertifiedReal::Surd(s) => s.to_f64(),
            CertifiedReal::BigFloat(b) => b.mid_f64(),
        }
    }

    /// Absolute error radius; zero for exact values.
    pub fn radius_f64(&self) -> f64 {
        match self {
            CertifiedReal::Surd(_) => 0.0,
            CertifiedReal::BigFloat(b) => b.radius_f64(),
        }
    }

    pub fn upper_f64(&self) -> f64 {
        match self {
            CertifiedReal::Surd(s) => s.to_ball(128).upper_f64(),
            CertifiedReal::BigFloat(b) => b.upper_f64(),
        }
    }

    pub fn lower_f64(&self) -> f64 {
        match self {
            CertifiedReal::Surd(s) => s.to_ball(128).lower_f64(),
            CertifiedReal::BigFloat(b) => b.lower_f64(),
        }
    }

    fn joint_prec(&self, other: &CertifiedReal, prec: u32) -> u32 {
        prec.max(self.bits().unwrap_or(0))
            .max(other.bits().unwrap_or(0))
    }

    pub fn neg(&self) -> CertifiedReal {
        match self {
            CertifiedReal::Surd(s) => CertifiedReal::Surd(-s),
            CertifiedReal::BigFloat(b) => CertifiedReal::BigFloat(b.neg()),
        }
    }

    /// Exact when both operands are compatible surds, a ball otherwise.
    pub fn add(&self, other: &CertifiedReal, prec: u32) -> CertifiedReal {
        if let (CertifiedReal::Surd(a), CertifiedReal::Surd(b)) = (self, other) {
            if let Some(s) = a.checked_add(b) {
                return s.into();
            }
        }
        let p = self.joint_prec(other, prec);
        self.to_ball(p).add(&other.to_ball(p)).into()
    }

    pub fn sub(&self, other: &CertifiedReal, prec: u32) -> CertifiedReal {
        self.add(&other.neg(), prec)
    }

    pub fn mul(&self, other: &CertifiedReal, prec: u32) -> CertifiedReal {
        if let (CertifiedReal::Surd(a), CertifiedReal::Surd(b)) = (self, other) {
            if let Some(s) = a.checked_mul(b) {
                return s.into();
            }
        }
        let p = self.joint_prec(other, prec);
        self.to_ball(p).mul(&other.to_ball(p)).into()
    }

    pub fn mul_ratio(&self, x: &BigRational) -> CertifiedReal {
        match self {
            CertifiedReal::Surd(s) => s.mul_ratio(x).into(),
            CertifiedReal::BigFloat(b) => b.mul_ratio(x).into(),
        }
    }

    pub fn mul_int(&self, k: &BigInt) -> CertifiedReal {
        match self {
            CertifiedReal::Surd(s) => s.mul_int(k).into(),
            CertifiedReal::BigFloat(b) => b.mul_int(k).into(),
        }
    }

    /// `1/x`. A provably zero value is an invalid argument; a ball touching
    /// zero needs more precision.
    pub fn recip(&self, prec: u32) -> Result<CertifiedReal> {
        match self {
            CertifiedReal::Surd(s) => s
                .recip()
                .map(CertifiedReal::Surd)
                .ok_or_else(|| Error::InvalidArgument("reciprocal of zero".into())),
            CertifiedReal::BigFloat(b) => b.with_prec(prec.max(b.prec())).recip().map(Into::into),
        }
    }

    /// Enclosure of `max(x, y)`; exact when the inputs are.
    pub fn max(&self, other: &CertifiedReal, prec: u32) -> CertifiedReal {
        if let (CertifiedReal::Surd(a), CertifiedReal::Surd(b)) = (self, other) {
            return if a.cmp_value(b) == Ordering::Less {
                other.clone()
            } else {
                self.clone()
            };
        }
        let p = self.joint_prec(other, prec);
        self.to_ball(p).max(&other.to_ball(p)).into()
    }

    pub fn min(&self, other: &CertifiedReal, prec: u32) -> CertifiedReal {
        if let (CertifiedReal::Surd(a), CertifiedReal::Surd(b)) = (self, other) {
            return if a.cmp_value(b) == Ordering::Greater {
                other.clone()
            } else {
                self.clone()
            };
        }
        let p = self.joint_prec(other, prec);
        self.to_ball(p).min(&other.to_ball(p)).into()
    }

    pub fn floor(&self) -> Result<BigInt> {
        match self {
            CertifiedReal::Surd(s) => Ok(s.floor()),
            CertifiedReal::BigFloat(b) => b.floor(),
        }
    }
}

impl fmt::Display for CertifiedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertifiedReal::Surd(s) => write!(f, "{s}"),
            CertifiedReal::BigFloat(b) => write!(f, "{} ± {:e}", b.to_decimal(20), b.radius_f64()),
        }
    }
}

/// `{x} = x − ⌊x⌋`. Exact for surds; for balls the floor must be decidable.
pub fn frac(x: &CertifiedReal) -> Result<CertifiedReal> {
    match x {
        CertifiedReal::Surd(s) => Ok(s.frac().into()),
        CertifiedReal::BigFloat(b) => b.frac().map(Into::into),
    }
}

/// `‖x‖`, the distance to the nearest integer.
///
/// For balls this returns the image enclosure of the 1-Lipschitz map, so it
/// never fails: a ball straddling an integer gives `[0, r]`.
pub fn dist_nearest(x: &CertifiedReal) -> Result<CertifiedReal> {
    match x {
        CertifiedReal::Surd(s) => Ok(s.dist_nearest().into()),
        CertifiedReal::BigFloat(b) => Ok(b.dist_nearest().into()),
    }
}

/// Certified ordering of `x` against `t`.
pub fn cmp_margin(x: &CertifiedReal, t: &CertifiedReal) -> Result<Ordering> {
    match (x, t) {
        (CertifiedReal::Surd(a), CertifiedReal::Surd(b)) => Ok(a.cmp_value(b)),
        _ => {
            let p = x.joint_prec(t, 0);
            x.to_ball(p).cmp_certified(&t.to_ball(p))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn frac_examples() {
        let x = CertifiedReal::from_ratio(&ratio(-1, 4));
        assert_eq!(frac(&x).unwrap(), CertifiedReal::from_ratio(&ratio(3, 4)));
        assert_eq!(
            frac(&CertifiedReal::from_int(3)).unwrap(),
            CertifiedReal::from_int(0)
        );
        let r2: CertifiedReal = Surd::sqrt(2).unwrap().into();
        let f = frac(&r2).unwrap();
        assert!((f.to_f64() - 0.4142135624).abs() < 1e-10);
        assert!(f.is_exact());
    }

    #[test]
    fn dist_nearest_examples() {
        let half = CertifiedReal::from_ratio(&ratio(1, 2));
        assert_eq!(dist_nearest(&half).unwrap(), half);
        assert!(dist_nearest(&CertifiedReal::from_int(7)).unwrap().is_zero());
        let x: CertifiedReal = Surd::sqrt(2).unwrap().mul_int(&2.into()).into();
        assert!((dist_nearest(&x).unwrap().to_f64() - 0.1715728753).abs() < 1e-10);
    }

    #[test]
    fn cmp_margin_examples() {
        let r2: CertifiedReal = Surd::sqrt(2).unwrap().into();
        let three_halves = CertifiedReal::from_ratio(&ratio(3, 2));
        assert_eq!(cmp_margin(&r2, &three_halves).unwrap(), Ordering::Less);
        let half = CertifiedReal::from_ratio(&ratio(1, 2));
        assert_eq!(cmp_margin(&half, &half).unwrap(), Ordering::Equal);
        let fuzzy: CertifiedReal = Ball::from_ratio_with_radius(
            &ratio(1, 2),
            &BigRational::new(1.into(), BigInt::from(10u32).pow(30)),
            256,
        )
        .into();
        assert!(cmp_margin(&fuzzy, &half).unwrap_err().is_precision());
    }

    #[test]
    fn ladder_doubles_until_cap() {
        let prec = Precision::new(64, 512);
        let mut seen = vec![];
        let out = prec.ladder(|bits| {
            seen.push(bits);
            if bits < 256 {
                Err(Error::PrecisionInsufficient { bits })
            } else {
                Ok(bits)
            }
        });
        assert_eq!(out.unwrap(), 256);
        assert_eq!(seen, vec![64, 128, 256]);
        let err = prec
            .ladder(|bits| -> Result<()> { Err(Error::PrecisionInsufficient { bits }) })
            .unwrap_err();
        assert_eq!(err, Error::PrecisionInsufficient { bits: 512 });
    }
}
