//! Fixed-point dyadic balls.
//!
//! A [`Ball`] with `prec` fractional bits stands for the closed interval
//! `[(mid − rad) / 2^prec, (mid + rad) / 2^prec]`. Additions and integer
//! multiples are exact on `mid` and add radii; every other operation rounds
//! outward. Because sums of balls at a fixed precision are plain integer
//! additions, the result does not depend on the order of summation.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ball {
    mid: BigInt,
    rad: BigInt,
    prec: u32,
}

/// `m / 2^prec` as an `f64` without intermediate overflow or underflow.
fn scaled_to_f64(m: &BigInt, prec: u32) -> f64 {
    let drop = m.bits().saturating_sub(64);
    let top = (m >> drop).to_f64().unwrap_or(f64::NAN);
    let exp = drop as i64 - prec as i64;
    if exp < -1000 {
        // Split the scaling so the intermediate stays representable.
        top * 2f64.powi(-1000) * 2f64.powi((exp + 1000) as i32)
    } else {
        top * 2f64.powi(exp as i32)
    }
}

fn ceil_shr(x: &BigInt, bits: u32) -> BigInt {
    let one = BigInt::one() << bits;
    let (q, r) = x.div_mod_floor(&one);
    if r.is_zero() {
        q
    } else {
        q + 1
    }
}

impl Ball {
    pub fn new(mid: BigInt, rad: BigInt, prec: u32) -> Self {
        debug_assert!(!rad.is_negative());
        Ball { mid, rad, prec }
    }

    pub fn from_int(n: &BigInt, prec: u32) -> Self {
        Ball::new(n << prec, BigInt::zero(), prec)
    }

    pub fn from_ratio(x: &BigRational, prec: u32) -> Self {
        let (m, rem) = (x.numer() << prec).div_mod_floor(x.denom());
        let rad = if rem.is_zero() { 0 } else { 1 };
        Ball::new(m, BigInt::from(rad), prec)
    }

    /// Ball around `x` that also absorbs an absolute error of `radius`.
    pub fn from_ratio_with_radius(x: &BigRational, radius: &BigRational, prec: u32) -> Self {
        let mut b = Ball::from_ratio(x, prec);
        let scaled = radius.abs() * BigRational::from_integer(BigInt::one() << prec);
        b.rad += scaled.ceil().to_integer();
        b
    }

    pub fn mid(&self) -> &BigInt {
        &self.mid
    }
    pub fn rad(&self) -> &BigInt {
        &self.rad
    }
    pub fn prec(&self) -> u32 {
        self.prec
    }
    pub fn lo(&self) -> BigInt {
        &self.mid - &self.rad
    }
    pub fn hi(&self) -> BigInt {
        &self.mid + &self.rad
    }
    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    fn unit(prec: u32) -> BigInt {
        BigInt::one() << prec
    }

    /// Re-expresses the ball with `prec` fractional bits.
    pub fn with_prec(&self, prec: u32) -> Ball {
        match prec.cmp(&self.prec) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let s = prec - self.prec;
                Ball::new(&self.mid << s, &self.rad << s, prec)
            }
            Ordering::Less => {
                let s = self.prec - prec;
                let (m, rem) = self.mid.div_mod_floor(&Self::unit(s));
                let extra = if rem.is_zero() { 0 } else { 1 };
                Ball::new(m, ceil_shr(&self.rad, s) + extra, prec)
            }
        }
    }

    fn aligned(&self, other: &Ball) -> (Ball, Ball) {
        let p = self.prec.max(other.prec);
        (self.with_prec(p), other.with_prec(p))
    }

    pub fn add(&self, other: &Ball) -> Ball {
        if self.prec == other.prec {
            return Ball::new(&self.mid + &other.mid, &self.rad + &other.rad, self.prec);
        }
        let (a, b) = self.aligned(other);
        a.add(&b)
    }

    pub fn sub(&self, other: &Ball) -> Ball {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Ball {
        Ball::new(-&self.mid, self.rad.clone(), self.prec)
    }

    pub fn add_int(&self, k: &BigInt) -> Ball {
        Ball::new(&self.mid + (k << self.prec), self.rad.clone(), self.prec)
    }

    pub fn mul_int(&self, k: &BigInt) -> Ball {
        Ball::new(&self.mid * k, &self.rad * k.abs(), self.prec)
    }

    pub fn mul(&self, other: &Ball) -> Ball {
        let (a, b) = self.aligned(other);
        let p = a.prec;
        let prod = &a.mid * &b.mid;
        let err = a.mid.abs() * &b.rad + b.mid.abs() * &a.rad + &a.rad * &b.rad;
        let (m, rem) = prod.div_mod_floor(&Self::unit(p));
        let extra = if rem.is_zero() { 0 } else { 1 };
        Ball::new(m, ceil_shr(&err, p) + extra, p)
    }

    pub fn mul_ratio(&self, x: &BigRational) -> Ball {
        let num = self.mul_int(x.numer());
        let den = x.denom();
        if den.is_one() {
            return num;
        }
        let (m, rem) = num.mid.div_mod_floor(den);
        let extra = if rem.is_zero() { 0 } else { 1 };
        let (rq, rr) = num.rad.div_mod_floor(den);
        let rad = rq + BigInt::from(if rr.is_zero() { 0 } else { 1 } + extra);
        Ball::new(m, rad, self.prec)
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo().is_positive() && !self.hi().is_negative()
    }

    /// Enclosure of `1/x`; fails when the ball touches zero.
    pub fn recip(&self) -> Result<Ball> {
        if self.contains_zero() {
            return Err(Error::PrecisionInsufficient { bits: self.prec });
        }
        if self.mid.is_negative() {
            return self.neg().recip().map(|b| b.neg());
        }
        let num = BigInt::one() << (2 * self.prec);
        let lo = num.div_floor(&self.hi());
        let (hi, rem) = num.div_mod_floor(&self.lo());
        let hi = if rem.is_zero() { hi } else { hi + 1 };
        let mid = (&lo + &hi) >> 1u32;
        let rad = &hi - &mid;
        Ok(Ball::new(mid, rad, self.prec))
    }

    pub fn floor(&self) -> Result<BigInt> {
        let unit = Self::unit(self.prec);
        let a = self.lo().div_floor(&unit);
        let b = self.hi().div_floor(&unit);
        if a == b {
            Ok(a)
        } else {
            Err(Error::PrecisionInsufficient { bits: self.prec })
        }
    }

    pub fn frac(&self) -> Result<Ball> {
        let k = self.floor()?;
        Ok(self.add_int(&-k))
    }

    /// Enclosure of `‖x‖`. The distance is 1-Lipschitz, so this never fails:
    /// a ball straddling an integer yields `[0, max distance]`.
    pub fn dist_nearest(&self) -> Ball {
        let unit = Self::unit(self.prec);
        let half = &unit >> 1u32;
        if &self.rad * 4 >= unit {
            return Ball::new(&half >> 1u32, &half >> 1u32, self.prec);
        }
        let g = |t: &BigInt| -> BigInt {
            // t ∈ [0, unit)
            if t <= &half {
                t.clone()
            } else {
                &unit - t
            }
        };
        let base = self.lo().div_floor(&unit);
        let flo = self.lo() - &base * &unit;
        let fhi = self.hi() - &base * &unit;
        let (mn, mx) = if fhi < unit {
            let (ga, gb) = (g(&flo), g(&fhi));
            let mn = ga.clone().min(gb.clone());
            let mx = if flo <= half && half <= fhi {
                half.clone()
            } else {
                ga.max(gb)
            };
            (mn, mx)
        } else {
            let ga = g(&flo);
            let gb = g(&(&fhi - &unit));
            (BigInt::zero(), ga.max(gb))
        };
        let mid = (&mn + &mx) >> 1u32;
        let rad = &mx - &mid;
        Ball::new(mid, rad, self.prec)
    }

    /// Certified ordering; `Equal` only for identical exact values.
    pub fn cmp_certified(&self, other: &Ball) -> Result<Ordering> {
        let (a, b) = self.aligned(other);
        if a.hi() < b.lo() {
            Ok(Ordering::Less)
        } else if a.lo() > b.hi() {
            Ok(Ordering::Greater)
        } else if a.is_exact() && b.is_exact() && a.mid == b.mid {
            Ok(Ordering::Equal)
        } else {
            Err(Error::PrecisionInsufficient { bits: a.prec })
        }
    }

    fn from_bounds(lo: BigInt, hi: BigInt, prec: u32) -> Ball {
        let mid = (&lo + &hi) >> 1u32;
        let rad = &hi - &mid;
        Ball::new(mid, rad, prec)
    }

    /// Enclosure of `max(x, y)` over the two balls.
    pub fn max(&self, other: &Ball) -> Ball {
        let (a, b) = self.aligned(other);
        Ball::from_bounds(a.lo().max(b.lo()), a.hi().max(b.hi()), a.prec)
    }

    pub fn min(&self, other: &Ball) -> Ball {
        let (a, b) = self.aligned(other);
        Ball::from_bounds(a.lo().min(b.lo()), a.hi().min(b.hi()), a.prec)
    }

    pub fn mid_f64(&self) -> f64 {
        scaled_to_f64(&self.mid, self.prec)
    }
    pub fn lower_f64(&self) -> f64 {
        scaled_to_f64(&self.lo(), self.prec)
    }
    pub fn upper_f64(&self) -> f64 {
        scaled_to_f64(&self.hi(), self.prec)
    }
    pub fn radius_f64(&self) -> f64 {
        scaled_to_f64(&self.rad, self.prec)
    }

    /// Midpoint rounded to `digits` decimal places.
    pub fn to_decimal(&self, digits: u32) -> String {
        let scale = BigInt::from(10u32).pow(digits);
        let unit = Self::unit(self.prec);
        let n = (&self.mid * &scale + (&unit >> 1u32)).div_floor(&unit);
        let neg = n.is_negative();
        let n = n.abs();
        let (int, frac) = n.div_rem(&scale);
        let mut s = String::new();
        if neg {
            s.push('-');
        }
        s.push_str(&int.to_string());
        if digits > 0 {
            s.push('.');
            let f = frac.to_string();
            for _ in f.len()..digits as usize {
                s.push('0');
            }
            s.push_str(&f);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn floor_detects_ambiguity() {
        let b = Ball::from_ratio_with_radius(&ratio(1, 1), &ratio(1, 1000), 64);
        assert!(b.floor().unwrap_err().is_precision());
        let b = Ball::from_ratio(&ratio(-5, 4), 16);
        assert_eq!(b.floor().unwrap(), BigInt::from(-2));
        assert_eq!(b.frac().unwrap().mid_f64(), 0.75);
    }

    #[test]
    fn dist_nearest_is_continuous_across_integers() {
        let b = Ball::from_ratio_with_radius(&ratio(3, 1), &ratio(1, 1 << 20), 64);
        let d = b.dist_nearest();
        assert!(d.lower_f64() <= 0.0);
        assert!(d.upper_f64() >= 1.0 / (1 << 20) as f64);
        let h = Ball::from_ratio(&ratio(1, 2), 32).dist_nearest();
        assert_eq!(h.mid_f64(), 0.5);
        assert!(h.is_exact());
    }

    #[test]
    fn recip_and_mul_enclose() {
        let x = Ball::from_ratio(&ratio(3, 7), 100);
        let y = x.recip().unwrap();
        assert!(y.lower_f64() <= 7.0 / 3.0 && y.upper_f64() >= 7.0 / 3.0);
        let z = x.mul(&y);
        assert!(z.lower_f64() <= 1.0 && z.upper_f64() >= 1.0);
        assert!(z.radius_f64() < 1e-25);
    }

    #[test]
    fn decimal_rendering() {
        let b = Ball::from_ratio(&ratio(-1, 8), 10);
        assert_eq!(b.to_decimal(3), "-0.125");
        assert_eq!(Ball::from_ratio(&ratio(5, 2), 10).to_decimal(0), "3");
        assert_eq!(Ball::from_ratio(&ratio(1, 100), 40).to_decimal(4), "0.0100");
    }

    #[test]
    fn precision_change_keeps_enclosure() {
        let x = Ball::from_ratio(&ratio(1, 3), 200);
        let y = x.with_prec(20);
        assert!(y.lower_f64() <= 1.0 / 3.0 && y.upper_f64() >= 1.0 / 3.0);
    }
}
