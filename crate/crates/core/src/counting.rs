//! Exact counts of integer points `ã` with `‖ã · Ã‖ < δ`, and their
//! discrepancy against the expected main terms.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrices::{FormValue, PreparedForms, SubspaceMatrix};
use crate::numerics::{cmp_margin, Ball, CertifiedReal, Precision};
use crate::parallel::{cube_size, map_blocks, Odometer, DEFAULT_BLOCK};

/// Which count: `𝒜(q, δ)` over `a ∈ {1..q}^d` with `ã = (q, a)`, or
/// `𝒩(Q, δ)` over `ã ∈ {1..Q}^{d+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    A,
    N,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::A => "A",
            Mode::N => "N",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// 64-bit fixed-point screen with an exact fallback near the threshold.
    Screened,
    /// Ball arithmetic on every point.
    Exact,
}

#[derive(Clone, Copy, Debug)]
pub struct CountOptions {
    pub precision: Precision,
    /// Largest number of membership tests a single call may perform.
    pub budget: u64,
    pub block: u64,
    pub strategy: Strategy,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            precision: Precision::default(),
            budget: 1_000_000_000,
            block: DEFAULT_BLOCK,
            strategy: Strategy::Screened,
        }
    }
}

/// Enumeration of the points `ã` for one mode and size parameter.
#[derive(Clone, Debug)]
pub(crate) struct PointRange {
    mode: Mode,
    size: u64,
    dims: usize,
    total: u64,
}

impl PointRange {
    pub(crate) fn new(s: &SubspaceMatrix, mode: Mode, size: u64, budget: u64) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidArgument("q and Q must be at least 1".into()));
        }
        let dims = match mode {
            Mode::A => s.d(),
            Mode::N => s.d() + 1,
        };
        let requested = cube_size(size, dims).unwrap_or(u128::MAX);
        if requested > budget as u128 {
            return Err(Error::BudgetExceeded { requested, budget });
        }
        Ok(PointRange {
            mode,
            size,
            dims,
            total: requested as u64,
        })
    }

    pub(crate) fn total(&self) -> u64 {
        self.total
    }

    /// Calls `f(ã)` for each flat index in `range`, in order.
    pub(crate) fn for_each(
        &self,
        range: std::ops::Range<u64>,
        mut f: impl FnMut(&[i64]) -> Result<()>,
    ) -> Result<()> {
        let mut odo = Odometer::starting_at(1, self.size as i64, self.dims, range.start);
        let mut buf = vec![self.size as i64; self.dims + usize::from(self.mode == Mode::A)];
        let offset = buf.len() - self.dims;
        for _ in range {
            buf[offset..].copy_from_slice(odo.get());
            f(&buf)?;
            odo.advance();
        }
        Ok(())
    }
}

/// Certified test of `‖ã · col_v(Ã)‖ < δ` for every column.
#[derive(Clone, Debug)]
pub(crate) struct Membership {
    prepared: PreparedForms,
    delta: CertifiedReal,
    cap: u32,
    screen: Option<Screen>,
}

/// Entries of `Ã` as wrapping 64-bit fractions, each within 2 units of the
/// true fractional part.
#[derive(Clone, Debug)]
struct Screen {
    cols: Vec<Vec<u64>>,
    delta_lo: u128,
    delta_hi: u128,
}

enum Verdict {
    In,
    Out,
    Unsure,
}

impl Screen {
    fn new(s: &SubspaceMatrix, delta: &CertifiedReal) -> Self {
        let prec = 192u32;
        let cols = (0..s.codim())
            .map(|v| {
                (0..=s.d())
                    .map(|i| {
                        let b = s.atilde().get(i, v).value().to_ball(prec);
                        let top = b.mid().div_floor(&(BigInt::one() << (prec - 64)));
                        top.mod_floor(&(BigInt::one() << 64u32))
                            .to_u64()
                            .expect("reduced mod 2^64")
                    })
                    .collect()
            })
            .collect();
        let b = delta.to_ball(prec);
        let unit = BigInt::one() << (prec - 64);
        let delta_lo = b.lo().div_floor(&unit).to_u128().unwrap_or(0);
        let delta_hi = b.hi().div_ceil(&unit).to_u128().unwrap_or(u128::MAX);
        Screen {
            cols,
            delta_lo,
            delta_hi,
        }
    }

    fn test(&self, c: &[i64]) -> Verdict {
        // Coefficients are positive and at most 2^62, so the error fits.
        let err: u128 = 2 + c
            .iter()
            .map(|&x| 2 * x.unsigned_abs() as u128)
            .sum::<u128>();
        let mut unsure = false;
        for col in &self.cols {
            let x = col.iter().zip(c).fold(0u64, |acc, (&a, &k)| {
                acc.wrapping_add(a.wrapping_mul(k as u64))
            });
            let x = x as u128;
            let dist = x.min((1u128 << 64) - x);
            if dist >= self.delta_hi + err {
                return Verdict::Out;
            }
            if dist + err >= self.delta_lo {
                unsure = true;
            }
        }
        if unsure {
            Verdict::Unsure
        } else {
            Verdict::In
        }
    }
}

fn strictly_below(dist: &Ball, delta: &CertifiedReal) -> Result<bool> {
    Ok(dist.cmp_certified(&delta.to_ball(dist.prec()))?.is_lt())
}

impl Membership {
    pub(crate) fn new(
        s: &SubspaceMatrix,
        delta: &CertifiedReal,
        precision: Precision,
        strategy: Strategy,
    ) -> Self {
        let precision = precision.at_least(s.bits_hint());
        Membership {
            prepared: PreparedForms::new(s.column_forms(), precision.start),
            delta: delta.clone(),
            cap: precision.cap,
            screen: (strategy == Strategy::Screened).then(|| Screen::new(s, delta)),
        }
    }

    fn exact_at(&self, prepared: &PreparedForms, c: &[i64]) -> Result<bool> {
        for v in prepared.values(c) {
            let inside = match v {
                FormValue::Rational(x) => {
                    let f = &x - x.floor();
                    let d = f.clone().min(BigRational::one() - f);
                    cmp_margin(&CertifiedReal::from_ratio(&d), &self.delta)?.is_lt()
                }
                FormValue::Irrational(b) => strictly_below(&b.dist_nearest(), &self.delta)?,
            };
            if !inside {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn exact(&self, c: &[i64]) -> Result<bool> {
        let base = self.prepared.prec();
        match self.exact_at(&self.prepared, c) {
            Err(e) if e.is_precision() && base < self.cap => {
                Precision::new((base * 2).min(self.cap), self.cap)
                    .ladder(|bits| self.exact_at(&self.prepared.at(bits), c))
            }
            other => other,
        }
    }

    pub(crate) fn contains(&self, c: &[i64]) -> Result<bool> {
        if let Some(screen) = &self.screen {
            match screen.test(c) {
                Verdict::In => return Ok(true),
                Verdict::Out => return Ok(false),
                Verdict::Unsure => {}
            }
        }
        self.exact(c)
    }
}

fn check_delta(delta: &BigRational, max: &BigRational) -> Result<()> {
    if delta.is_positive() && delta <= max {
        Ok(())
    } else {
        Err(Error::DeltaOutOfRange(format!(
            "delta = {delta} must lie in (0, {max}]"
        )))
    }
}

/// Number of enumerated points with `‖ã · Ã‖ < δ` (strictly; exact ties are
/// not counted).
pub fn count(
    s: &SubspaceMatrix,
    mode: Mode,
    size: u64,
    delta: &BigRational,
    opts: &CountOptions,
) -> Result<u64> {
    check_delta(delta, &BigRational::one())?;
    count_below(s, mode, size, &CertifiedReal::from_ratio(delta), opts)
}

/// [`count`] with a real threshold, which may be an irrational surd or a
/// ball. Any positive `δ` is accepted.
pub fn count_below(
    s: &SubspaceMatrix,
    mode: Mode,
    size: u64,
    delta: &CertifiedReal,
    opts: &CountOptions,
) -> Result<u64> {
    let points = PointRange::new(s, mode, size, opts.budget)?;
    if delta.is_zero() {
        return Ok(0);
    }
    if cmp_margin(delta, &CertifiedReal::from_int(0))?.is_lt() {
        return Err(Error::DeltaOutOfRange(format!(
            "delta = {delta} must be positive"
        )));
    }
    let member = Membership::new(s, delta, opts.precision, opts.strategy);
    let parts = map_blocks(0..points.total(), opts.block, |r| {
        let mut n = 0u64;
        points.for_each(r, |c| {
            n += u64::from(member.contains(c)?);
            Ok(())
        })?;
        Ok(n)
    })?;
    Ok(parts.iter().sum())
}

/// `𝒜(q, δ) = #{a ∈ {1..q}^d : ‖(q, a) · Ã‖ < δ}`.
pub fn count_a(
    s: &SubspaceMatrix,
    q: u64,
    delta: &BigRational,
    opts: &CountOptions,
) -> Result<u64> {
    count(s, Mode::A, q, delta, opts)
}

/// `𝒩(Q, δ) = #{ã ∈ {1..Q}^{d+1} : ‖ã · Ã‖ < δ}`.
pub fn count_n(
    s: &SubspaceMatrix,
    q_max: u64,
    delta: &BigRational,
    opts: &CountOptions,
) -> Result<u64> {
    count(s, Mode::N, q_max, delta, opts)
}

/// One count compared with its main term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountReport {
    pub mode: Mode,
    pub size: u64,
    pub delta: BigRational,
    pub exact: u64,
    /// `(2δ)^{n−d} q^d` or `(2δ)^{n−d} Q^{d+1}`.
    pub main_term: BigRational,
    pub discrepancy: BigRational,
    /// `discrepancy / (main_term / 2^{n−d})`.
    pub normalized: BigRational,
}

pub fn main_term(s: &SubspaceMatrix, mode: Mode, size: u64, delta: &BigRational) -> BigRational {
    let codim = s.codim() as u32;
    let power = match mode {
        Mode::A => s.d() as u32,
        Mode::N => s.d() as u32 + 1,
    };
    let two_delta = delta * BigRational::from_integer(BigInt::from(2));
    Pow::pow(two_delta, codim) * BigRational::from_integer(Pow::pow(BigInt::from(size), power))
}

pub fn count_report(
    s: &SubspaceMatrix,
    mode: Mode,
    size: u64,
    delta: &BigRational,
    opts: &CountOptions,
) -> Result<CountReport> {
    let exact = count(s, mode, size, delta, opts)?;
    let main = main_term(s, mode, size, delta);
    let discrepancy = (BigRational::from_integer(BigInt::from(exact)) - &main).abs();
    let scale = &main / BigRational::from_integer(BigInt::one() << s.codim());
    Ok(CountReport {
        mode,
        size,
        delta: delta.clone(),
        exact,
        normalized: &discrepancy / scale,
        main_term: main,
        discrepancy,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscrepancyReport {
    pub reports: Vec<CountReport>,
    /// Largest normalized discrepancy over the range; an empirical quantity,
    /// not a verified constant.
    pub max_normalized: BigRational,
}

pub fn discrepancy_report(
    s: &SubspaceMatrix,
    sizes: &[u64],
    delta: &BigRational,
    mode: Mode,
    opts: &CountOptions,
) -> Result<DiscrepancyReport> {
    if sizes.is_empty() {
        return Err(Error::InvalidArgument("empty size range".into()));
    }
    let reports = sizes
        .iter()
        .map(|&n| count_report(s, mode, n, delta, opts))
        .collect::<Result<Vec<_>>>()?;
    let max_normalized = reports
        .iter()
        .map(|r| r.normalized.clone())
        .max()
        .unwrap_or_else(BigRational::zero);
    Ok(DiscrepancyReport {
        reports,
        max_normalized,
    })
}

/// `x` rounded to `digits` decimal places.
pub fn ratio_decimal(x: &BigRational, digits: u32) -> String {
    Ball::from_ratio(x, 4 * digits + 64).to_decimal(digits)
}

impl DiscrepancyReport {
    /// CSV with columns `mode,size,delta,exact,main,discrepancy,normalized`.
    pub fn to_csv(&self, digits: u32) -> String {
        let mut s = String::from("mode,size,delta,exact,main,discrepancy,normalized\n");
        for r in &self.reports {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.mode.name(),
                r.size,
                ratio_decimal(&r.delta, digits),
                r.exact,
                ratio_decimal(&r.main_term, digits),
                ratio_decimal(&r.discrepancy, digits),
                ratio_decimal(&r.normalized, digits)
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Surd;

    fn line(alpha0: Surd, slope: Surd) -> SubspaceMatrix {
        SubspaceMatrix::from_surds(vec![alpha0], vec![vec![slope]]).unwrap()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn sqrt2_line() -> SubspaceMatrix {
        line(Surd::from_int(0), Surd::sqrt(2).unwrap())
    }

    fn both(s: &SubspaceMatrix, mode: Mode, size: u64, delta: &BigRational) -> u64 {
        let screened = count(s, mode, size, delta, &CountOptions::default()).unwrap();
        let exact = count(
            s,
            mode,
            size,
            delta,
            &CountOptions {
                strategy: Strategy::Exact,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(screened, exact);
        screened
    }

    #[test]
    fn sqrt2_counts() {
        let s = sqrt2_line();
        assert_eq!(both(&s, Mode::A, 10, &r(1, 5)), 4);
        assert_eq!(both(&s, Mode::A, 10, &r(1, 10)), 1);
        assert_eq!(both(&s, Mode::A, 7, &r(1, 2)), 7);
        assert_eq!(both(&s, Mode::N, 5, &r(3, 10)), 15);
        assert_eq!(both(&s, Mode::N, 3, &r(1, 2)), 9);
        assert_eq!(both(&s, Mode::N, 1, &r(9, 20)), 1);
    }

    #[test]
    fn rational_ties_are_excluded() {
        // a/4 is at distance exactly 1/4 for odd a.
        let s = line(Surd::from_int(0), Surd::from_ratio(&r(1, 4)));
        assert_eq!(both(&s, Mode::A, 4, &r(1, 4)), 1);
        assert_eq!(both(&s, Mode::A, 4, &r(3, 10)), 3);
    }

    #[test]
    fn budget_and_delta_guards() {
        let s = sqrt2_line();
        let opts = CountOptions {
            budget: 100,
            ..Default::default()
        };
        assert_eq!(
            count_a(&s, 101, &r(1, 5), &opts).unwrap_err(),
            Error::BudgetExceeded {
                requested: 101,
                budget: 100
            }
        );
        assert!(matches!(
            count_a(&s, 10, &r(0, 1), &CountOptions::default()).unwrap_err(),
            Error::DeltaOutOfRange(_)
        ));
    }

    #[test]
    fn reports() {
        let s = sqrt2_line();
        let opts = CountOptions::default();
        let rep = count_report(&s, Mode::A, 10, &r(1, 5), &opts).unwrap();
        assert_eq!((rep.exact, rep.main_term.clone()), (4, r(4, 1)));
        assert!(rep.discrepancy.is_zero());
        let rep = count_report(&s, Mode::A, 10, &r(1, 10), &opts).unwrap();
        assert_eq!(rep.main_term, r(2, 1));
        assert_eq!(rep.discrepancy, r(1, 1));
        assert_eq!(rep.normalized, r(1, 1));
        let rep = count_report(&s, Mode::N, 5, &r(3, 10), &opts).unwrap();
        assert_eq!((rep.exact, rep.main_term), (15, r(15, 1)));
        let d = discrepancy_report(&s, &[10, 20], &r(1, 10), Mode::A, &opts).unwrap();
        assert!(d.to_csv(4).starts_with("mode,size,delta,exact,main,discrepancy,normalized\nA,10,0.1000,1,2.0000,1.0000,1.0000\n"));
    }
}
