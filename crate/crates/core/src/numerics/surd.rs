//! Exact real quadratic surds `(p + q√d) / r`.
//!
//! Every comparison is decided by integer sign tests; no floating step is
//! ever involved. Values with different radicands can still be ordered
//! exactly (two squarings suffice), but they cannot be added into a single
//! surd.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ball::Ball;
use crate::error::{Error, Result};

/// `(p + q√d) / r` in canonical form: `r > 0`, `gcd(p, q, r) = 1`, and either
/// `q = 0 = d` (a rational) or `d` is the square-free part of the radicand.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surd {
    p: BigInt,
    q: BigInt,
    d: BigInt,
    r: BigInt,
}

/// Splits `d = s² · core`. Trial division runs up to `min(10⁶, ∛rem)`; the
/// cofactor left over is then either squarefree or a perfect square.
fn split_square(d: &BigInt) -> (BigInt, BigInt) {
    let Some(mut rem) = d.to_u128() else {
        let s = d.sqrt();
        return if &s * &s == *d {
            (s, BigInt::one())
        } else {
            (BigInt::one(), d.clone())
        };
    };
    let (mut s, mut core) = (1u128, 1u128);
    let mut p = 2u128;
    while p <= 1_000_000 && p.saturating_mul(p).saturating_mul(p) <= rem {
        if rem % p == 0 {
            let mut e = 0u32;
            while rem % p == 0 {
                rem /= p;
                e += 1;
            }
            s *= p.pow(e / 2);
            if e % 2 == 1 {
                core *= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let t = rem.sqrt();
    if t * t == rem {
        s *= t;
    } else {
        core *= rem;
    }
    (BigInt::from(s), BigInt::from(core))
}

/// Sign of `a + b√d` for `d ≥ 0` not a perfect square (or `b = 0`).
fn sign_of(a: &BigInt, b: &BigInt, d: &BigInt) -> Ordering {
    let sb = if d.is_zero() { Sign::NoSign } else { b.sign() };
    match (a.sign(), sb) {
        (Sign::NoSign, Sign::NoSign) => Ordering::Equal,
        (Sign::Plus, Sign::NoSign) | (Sign::NoSign, Sign::Plus) | (Sign::Plus, Sign::Plus) => {
            Ordering::Greater
        }
        (Sign::Minus, Sign::NoSign) | (Sign::NoSign, Sign::Minus) | (Sign::Minus, Sign::Minus) => {
            Ordering::Less
        }
        (Sign::Plus, Sign::Minus) => (a * a).cmp(&(b * b * d)),
        (Sign::Minus, Sign::Plus) => (b * b * d).cmp(&(a * a)),
    }
}

/// `⌊q√d⌋` for `d` squarefree (or `q = 0`).
fn floor_q_sqrt_d(q: &BigInt, d: &BigInt) -> BigInt {
    if q.is_zero() || d.is_zero() {
        return BigInt::zero();
    }
    let t = (q * q * d).sqrt();
    if q.is_positive() {
        t
    } else {
        -t - 1
    }
}

impl Surd {
    /// Builds and canonicalizes `(p + q√d) / r`.
    pub fn new(p: BigInt, q: BigInt, d: BigInt, r: BigInt) -> Result<Self> {
        if r.is_zero() {
            return Err(Error::MalformedEntry("zero denominator in surd".into()));
        }
        if d.is_negative() {
            return Err(Error::MalformedEntry(format!("negative radicand {d}")));
        }
        if q.is_zero() {
            return Ok(Self::canonical(p, q, BigInt::zero(), r));
        }
        let (s, core) = split_square(&d);
        if core.is_one() || d.is_zero() {
            return Err(Error::PerfectSquareRadicand(d.to_string()));
        }
        Ok(Self::canonical(p, q * s, core, r))
    }

    /// Canonicalizes parts whose radicand is already square-free.
    pub(crate) fn from_reduced(p: BigInt, q: BigInt, d: BigInt, r: BigInt) -> Self {
        Self::canonical(p, q, d, r)
    }

    fn canonical(mut p: BigInt, mut q: BigInt, mut d: BigInt, mut r: BigInt) -> Self {
        if q.is_zero() {
            d = BigInt::zero();
        }
        if r.is_negative() {
            p = -p;
            q = -q;
            r = -r;
        }
        let g = p.gcd(&q).gcd(&r);
        if !g.is_one() {
            p /= &g;
            q /= &g;
            r /= &g;
        }
        Surd { p, q, d, r }
    }

    pub fn from_int<T: Into<BigInt>>(n: T) -> Self {
        Surd {
            p: n.into(),
            q: BigInt::zero(),
            d: BigInt::zero(),
            r: BigInt::one(),
        }
    }

    pub fn from_ratio(x: &BigRational) -> Self {
        Self::canonical(
            x.numer().clone(),
            BigInt::zero(),
            BigInt::zero(),
            x.denom().clone(),
        )
    }

    /// `√d` for a non-square `d ≥ 2`.
    pub fn sqrt(d: u64) -> Result<Self> {
        Self::new(
            BigInt::zero(),
            BigInt::one(),
            BigInt::from(d),
            BigInt::one(),
        )
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }
    pub fn q(&self) -> &BigInt {
        &self.q
    }
    /// Square-free radicand; zero for rationals.
    pub fn d(&self) -> &BigInt {
        &self.d
    }
    pub fn r(&self) -> &BigInt {
        &self.r
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.q.is_zero() && self.r.is_one()
    }

    pub fn as_ratio(&self) -> Option<BigRational> {
        self.is_rational()
            .then(|| BigRational::new(self.p.clone(), self.r.clone()))
    }

    /// Two surds can be added when they share a radicand or one is rational.
    pub fn compatible(&self, other: &Surd) -> bool {
        self.is_rational() || other.is_rational() || self.d == other.d
    }

    fn joint_radicand(&self, other: &Surd) -> BigInt {
        if self.is_rational() {
            other.d.clone()
        } else {
            self.d.clone()
        }
    }

    pub fn checked_add(&self, other: &Surd) -> Option<Surd> {
        if !self.compatible(other) {
            return None;
        }
        let d = self.joint_radicand(other);
        Some(Self::canonical(
            &self.p * &other.r + &other.p * &self.r,
            &self.q * &other.r + &other.q * &self.r,
            d,
            &self.r * &other.r,
        ))
    }

    pub fn checked_sub(&self, other: &Surd) -> Option<Surd> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Surd) -> Option<Surd> {
        if !self.compatible(other) {
            return None;
        }
        let d = self.joint_radicand(other);
        Some(Self::canonical(
            &self.p * &other.p + &self.q * &other.q * &d,
            &self.p * &other.q + &other.p * &self.q,
            d,
            &self.r * &other.r,
        ))
    }

    pub fn add_int(&self, k: &BigInt) -> Surd {
        Self::canonical(
            &self.p + k * &self.r,
            self.q.clone(),
            self.d.clone(),
            self.r.clone(),
        )
    }

    pub fn mul_int(&self, k: &BigInt) -> Surd {
        Self::canonical(&self.p * k, &self.q * k, self.d.clone(), self.r.clone())
    }

    pub fn mul_ratio(&self, x: &BigRational) -> Surd {
        Self::canonical(
            &self.p * x.numer(),
            &self.q * x.numer(),
            self.d.clone(),
            &self.r * x.denom(),
        )
    }

    /// `r (p − q√d) / (p² − q² d)`; `None` for zero.
    pub fn recip(&self) -> Option<Surd> {
        if self.is_zero() {
            return None;
        }
        let norm = &self.p * &self.p - &self.q * &self.q * &self.d;
        Some(Self::canonical(
            &self.r * &self.p,
            -(&self.r * &self.q),
            self.d.clone(),
            norm,
        ))
    }

    pub fn signum(&self) -> Ordering {
        sign_of(&self.p, &self.q, &self.d)
    }

    pub fn abs(&self) -> Surd {
        if self.signum() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    /// `⌊x⌋`, using the integer square root of `q² d`.
    pub fn floor(&self) -> BigInt {
        (&self.p + floor_q_sqrt_d(&self.q, &self.d)).div_floor(&self.r)
    }

    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    /// `{x} = x − ⌊x⌋ ∈ [0, 1)`.
    pub fn frac(&self) -> Surd {
        self.add_int(&-self.floor())
    }

    /// `‖x‖ = min({x}, 1 − {x})`.
    pub fn dist_nearest(&self) -> Surd {
        let f = self.frac();
        let g = (-&f).add_int(&BigInt::one());
        // f ≤ 1/2  ⇔  2 p_f + 2 q_f √d ≤ r_f
        let twice = f.mul_int(&BigInt::from(2));
        let cmp_half = sign_of(&(twice.p.clone() - &twice.r), &twice.q, &twice.d);
        if cmp_half == Ordering::Greater {
            g
        } else {
            f
        }
    }

    /// Exact ordering of the two values, also across different radicands.
    pub fn cmp_value(&self, other: &Surd) -> Ordering {
        if self.compatible(other) {
            let d = self.joint_radicand(other);
            let a = &self.p * &other.r - &other.p * &self.r;
            let b = &self.q * &other.r - &other.q * &self.r;
            return sign_of(&a, &b, &d);
        }
        // r1 r2 (x − y) = u + v with u = a + b√d1 and v = c√d2.
        let a = &self.p * &other.r - &other.p * &self.r;
        let b = &self.q * &other.r;
        let c = -(&other.q * &self.r);
        let su = sign_of(&a, &b, &self.d);
        let sv = c.sign();
        let sv = match sv {
            Sign::Plus => Ordering::Greater,
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
        };
        if su == Ordering::Equal {
            return sv;
        }
        if sv == Ordering::Equal || su == sv {
            return su;
        }
        // Opposite signs: compare u² = (a² + b² d1) + 2ab√d1 against c² d2.
        let lhs = &a * &a + &b * &b * &self.d - &c * &c * &other.d;
        let cross = BigInt::from(2) * &a * &b;
        match sign_of(&lhs, &cross, &self.d) {
            Ordering::Greater => su,
            Ordering::Less => sv,
            Ordering::Equal => Ordering::Equal,
        }
    }

    /// Encloses the value in a ball with `prec` fractional bits and radius at
    /// most one unit.
    pub fn to_ball(&self, prec: u32) -> Ball {
        let scaled_p = &self.p << prec;
        if self.is_rational() {
            let (m, rem) = scaled_p.div_mod_floor(&self.r);
            let rad = if rem.is_zero() { 0 } else { 1 };
            return Ball::new(m, BigInt::from(rad), prec);
        }
        let t = floor_q_sqrt_d(&(&self.q << prec), &self.d);
        // value · r · 2^prec ∈ (n, n + 1)
        let n = scaled_p + t;
        let m = n.div_floor(&self.r);
        Ball::new(m + 1, BigInt::one(), prec)
    }

    pub fn to_f64(&self) -> f64 {
        self.to_ball(128).mid_f64()
    }
}

impl std::ops::Neg for &Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            p: -&self.p,
            q: -&self.q,
            d: self.d.clone(),
            r: self.r.clone(),
        }
    }
}

impl std::ops::Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        -&self
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            if self.r.is_one() {
                write!(f, "{}", self.p)
            } else {
                write!(f, "{}/{}", self.p, self.r)
            }
        } else {
            let sign = if self.q.is_negative() { '-' } else { '+' };
            write!(f, "({} {} {}√{})", self.p, sign, self.q.abs(), self.d)?;
            if !self.r.is_one() {
                write!(f, "/{}", self.r)?;
            }
            Ok(())
        }
    }
}
