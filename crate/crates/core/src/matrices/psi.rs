use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numerics::{cmp_margin, Ball, CertifiedReal, Surd};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PsiKind {
    /// `c · q^{−ν}`.
    PowerLaw { nu: BigRational, c: BigRational },
    /// `values[q − 1]`, zero past the end.
    Table(Vec<BigRational>),
    /// `max(ψ(q), q^{−η})`.
    TruncatedMax {
        inner: Box<ApproxFunction>,
        eta: BigRational,
    },
}

/// An approximation function `ψ: ℕ → [0, ∞)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxFunction {
    pub kind: PsiKind,
    /// Asserted by the caller; spot-checked by [`psi_eval`].
    pub monotone_nonincreasing: bool,
}

impl ApproxFunction {
    pub fn power(nu: BigRational, c: BigRational) -> Result<Self> {
        if !nu.is_positive() || !c.is_positive() {
            return Err(Error::InvalidArgument(
                "power law needs nu > 0 and c > 0".into(),
            ));
        }
        Ok(ApproxFunction {
            kind: PsiKind::PowerLaw { nu, c },
            monotone_nonincreasing: true,
        })
    }

    /// `q^{−ν}` with unit scale.
    pub fn power_nu(nu: BigRational) -> Result<Self> {
        Self::power(nu, BigRational::one())
    }

    pub fn table(values: Vec<BigRational>, monotone: bool) -> Result<Self> {
        if values.iter().any(Signed::is_negative) {
            return Err(Error::InvalidArgument("table values must be ≥ 0".into()));
        }
        Ok(ApproxFunction {
            kind: PsiKind::Table(values),
            monotone_nonincreasing: monotone,
        })
    }

    pub fn truncated(inner: ApproxFunction, eta: BigRational) -> Result<Self> {
        if !eta.is_positive() {
            return Err(Error::InvalidArgument("eta must be positive".into()));
        }
        let monotone = inner.monotone_nonincreasing;
        Ok(ApproxFunction {
            kind: PsiKind::TruncatedMax {
                inner: Box::new(inner),
                eta,
            },
            monotone_nonincreasing: monotone,
        })
    }

    pub fn with_monotone(mut self, flag: bool) -> Self {
        self.monotone_nonincreasing = flag;
        self
    }

    /// ψ(q) without the monotonicity spot check.
    pub fn value(&self, q: u64, prec: u32) -> Result<CertifiedReal> {
        if q == 0 {
            return Err(Error::InvalidArgument("psi is defined for q ≥ 1".into()));
        }
        Ok(match &self.kind {
            PsiKind::PowerLaw { nu, c } => {
                let base = pow_neg(q, nu, prec);
                base.mul_ratio(c)
            }
            PsiKind::Table(values) => {
                let v = usize::try_from(q - 1)
                    .ok()
                    .and_then(|i| values.get(i))
                    .cloned()
                    .unwrap_or_else(BigRational::zero);
                CertifiedReal::from_ratio(&v)
            }
            PsiKind::TruncatedMax { inner, eta } => {
                inner.value(q, prec)?.max(&pow_neg(q, eta, prec), prec)
            }
        })
    }

    /// Whether ψ vanishes identically from `q` on (only tables can).
    pub fn zero_from(&self) -> Option<u64> {
        match &self.kind {
            PsiKind::Table(values) => {
                let last = values.iter().rposition(|v| !v.is_zero());
                Some(last.map_or(1, |i| i as u64 + 2))
            }
            _ => None,
        }
    }
}

/// `q^{−a/b}`: exact when `b ≤ 2`, otherwise a ball at `prec` bits.
pub(crate) fn pow_neg(q: u64, exponent: &BigRational, prec: u32) -> CertifiedReal {
    let a = exponent.numer();
    let b = exponent.denom();
    let qb = BigInt::from(q);
    let a_abs = a.abs().to_u32().expect("exponent numerator fits in u32");
    let qa: BigInt = Pow::pow(&qb, a_abs);
    let negative = a.is_negative();
    let exact_rational = |num: BigInt, den: BigInt| {
        let x = BigRational::new(num, den);
        CertifiedReal::from_ratio(&if negative { x.recip() } else { x })
    };
    if b.is_one() {
        return exact_rational(BigInt::one(), qa);
    }
    if *b == BigInt::from(2u8) {
        // q^{−a/2} = √q · q^{−(a+1)/2} for odd a.
        let root = qb.sqrt();
        if &root * &root == qb {
            let ra: BigInt = Pow::pow(&root, a_abs);
            return exact_rational(BigInt::one(), ra);
        }
        // q^{a/2} = q^{(a−1)/2} √q in the other direction.
        let (num, den): (BigInt, BigInt) = if negative {
            (Pow::pow(&qb, (a_abs - 1) / 2), BigInt::one())
        } else {
            (BigInt::one(), Pow::pow(&qb, a_abs.div_ceil(2)))
        };
        let s = Surd::new(BigInt::zero(), num, qb, den).expect("non-square radicand");
        return CertifiedReal::Surd(s);
    }
    // floor((2^{b·prec} / q^a)^{1/b}) = floor(2^prec · q^{−a/b}).
    let bu = b.to_u32().expect("exponent denominator fits in u32");
    let mid = if negative {
        let n: BigInt = qa << (bu as usize * prec as usize);
        n.nth_root(bu)
    } else {
        let n: BigInt = (BigInt::one() << (bu as usize * prec as usize)) / qa;
        n.nth_root(bu)
    };
    CertifiedReal::BigFloat(Ball::new(mid, BigInt::one(), prec))
}

/// ψ(q), with the monotonicity flag spot-checked against ψ(q − 1).
///
/// A violation is reported only when it is certified; an undecidable
/// comparison is not treated as one.
pub fn psi_eval(psi: &ApproxFunction, q: u64, prec: u32) -> Result<CertifiedReal> {
    let v = psi.value(q, prec)?;
    if psi.monotone_nonincreasing && q > 1 && !matches!(psi.kind, PsiKind::PowerLaw { .. }) {
        let prev = psi.value(q - 1, prec)?;
        if let Ok(Ordering::Greater) = cmp_margin(&v, &prev) {
            return Err(Error::MonotonicityViolation { q });
        }
    }
    Ok(v)
}
