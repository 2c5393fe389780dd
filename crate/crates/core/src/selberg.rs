//! Trigonometric majorants and minorants of the arc `(−δ, δ)` mod 1, and
//! the counting brackets they give.
//!
//! The pair is assembled from Vaaler's approximation to the sawtooth and the
//! Fejér kernel, which gives degree-`J` polynomials `S⁺ ≥ χ` and `S⁻ ≤ χ`
//! with `b₀^± = 2δ ± 1/(J+1)`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, One, Signed, ToPrimitive, Zero};

use crate::counting::{count, CountOptions, Mode, PointRange};
use crate::error::{Error, Result};
use crate::fracsum::{recip_product_sum, SumOptions};
use crate::matrices::{FormValue, PreparedForms, SubspaceMatrix};
use crate::parallel::map_blocks;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Plus,
    Minus,
}

/// `Σ_{|j| ≤ J} b_j e(jy)` with real, even coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial<T> {
    delta: T,
    side: Side,
    /// `b_0, …, b_J`; `b_{−j} = b_j`.
    coeffs: Vec<T>,
    vacuous: bool,
}

impl<T: Float + FloatConst> TrigPolynomial<T> {
    /// A polynomial from its nonnegative-index coefficients.
    pub fn from_coeffs(delta: T, side: Side, coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "need at least b_0");
        TrigPolynomial {
            delta,
            side,
            coeffs,
            vacuous: false,
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Set on a minorant with `2δ ≤ 1/(J+1)`, whose mean is not positive.
    pub fn is_vacuous(&self) -> bool {
        self.vacuous
    }

    /// `b_j` for `−J ≤ j ≤ J`, zero outside.
    pub fn coeff(&self, j: i64) -> T {
        self.coeffs
            .get(j.unsigned_abs() as usize)
            .copied()
            .unwrap_or_else(T::zero)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// `|b_0| + 2 Σ_{j ≥ 1} |b_j|`, a bound on `|S(y)|`.
    pub fn l1_norm(&self) -> T {
        let two = T::one() + T::one();
        self.coeffs[1..]
            .iter()
            .fold(self.coeffs[0].abs(), |acc, b| acc + two * b.abs())
    }

    /// Worst absolute error of [`eval_poly`] in this float type.
    pub fn eval_error(&self) -> T {
        let k = T::from(self.degree() + 1).expect("degree fits");
        T::from(16).expect("small") * T::epsilon() * k * k * (T::one() + self.l1_norm())
    }
}

fn t<T: Float>(x: f64) -> T {
    T::from(x).expect("float conversion")
}

/// Selberg's majorant and minorant of the arc `(−δ, δ)`, of degree `J`.
pub fn selberg_pair<T: Float + FloatConst>(
    delta: T,
    degree: usize,
) -> Result<(TrigPolynomial<T>, TrigPolynomial<T>)> {
    let half = t::<T>(0.5);
    if !(delta > T::zero() && delta <= half) {
        return Err(Error::DeltaOutOfRange(format!(
            "delta = {} must lie in (0, 1/2]",
            delta.to_f64().unwrap_or(f64::NAN)
        )));
    }
    if degree == 0 {
        return Err(Error::InvalidArgument("degree J must be at least 1".into()));
    }
    let pi = T::PI();
    let two = t::<T>(2.0);
    let kk = T::from(degree + 1).expect("degree fits");
    let inv_k = T::one() / kk;
    // Vaaler's weight f(x) = πx(1 − x)cot(πx) + x on (0, 1).
    let weight = |x: T| pi * x * (T::one() - x) * (pi * x).cos() / (pi * x).sin() + x;
    let mut plus = Vec::with_capacity(degree + 1);
    let mut minus = Vec::with_capacity(degree + 1);
    plus.push(two * delta + inv_k);
    minus.push(two * delta - inv_k);
    for j in 1..=degree {
        let jf = T::from(j).expect("index fits");
        let x = jf / kk;
        let angle = two * pi * jf * delta;
        let main = weight(x) * angle.sin() / (pi * jf);
        let fejer = inv_k * (T::one() - x) * angle.cos();
        plus.push(main + fejer);
        minus.push(main - fejer);
    }
    let vacuous = two * delta <= inv_k;
    Ok((
        TrigPolynomial {
            delta,
            side: Side::Plus,
            coeffs: plus,
            vacuous: false,
        },
        TrigPolynomial {
            delta,
            side: Side::Minus,
            coeffs: minus,
            vacuous,
        },
    ))
}

/// `b_0 + 2 Σ_{j ≥ 1} b_j cos(2πjy)`, after reducing `y` mod 1.
pub fn eval_poly<T: Float + FloatConst>(p: &TrigPolynomial<T>, y: T) -> T {
    let y = y - y.floor();
    let two = t::<T>(2.0);
    let w = two * T::PI() * y;
    let mut acc = T::zero();
    for (j, b) in p.coeffs.iter().enumerate().skip(1).rev() {
        acc = acc + *b * (w * T::from(j).expect("index fits")).cos();
    }
    p.coeffs[0] + two * acc
}

/// Deviations of the coefficients from the required identities.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientCheck<T> {
    /// `|b_0 − (2δ ± 1/(J+1))|`.
    pub b0_error: T,
    /// `max_j (|b_j| − 1/(J+1) − min(2δ, 1/(π|j|)))`, nonpositive when the
    /// bound holds.
    pub worst_bound_excess: T,
    pub pass: bool,
}

pub fn check_coefficients<T: Float + FloatConst>(
    p: &TrigPolynomial<T>,
    tol: T,
) -> CoefficientCheck<T> {
    let two = t::<T>(2.0);
    let inv_k = T::one() / T::from(p.degree() + 1).expect("degree fits");
    let expect = match p.side {
        Side::Plus => two * p.delta + inv_k,
        Side::Minus => two * p.delta - inv_k,
    };
    let b0_error = (p.coeffs[0] - expect).abs();
    let worst = (1..=p.degree())
        .map(|j| {
            let jf = T::from(j).expect("index fits");
            let cap = inv_k + (two * p.delta).min(T::one() / (T::PI() * jf));
            p.coeffs[j].abs() - cap
        })
        .fold(T::neg_infinity(), T::max);
    CoefficientCheck {
        b0_error,
        worst_bound_excess: worst,
        pass: b0_error <= tol && worst <= tol,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SandwichCheck<T> {
    pub pass: bool,
    /// Largest amount by which `S⁻ ≤ χ ≤ S⁺` fails (zero if never).
    pub worst_violation: T,
    /// Mean of `S⁺` over the equispaced grid.
    pub grid_mean_plus: T,
}

/// Checks `S⁻(y) ≤ χ(y) ≤ S⁺(y)` on `grid_n` equispaced points of [0, 1)
/// and at `±δ ± 10⁻⁹`, with tolerance `10⁻⁹`.
pub fn verify_sandwich<T: Float + FloatConst>(
    pair: &(TrigPolynomial<T>, TrigPolynomial<T>),
    grid_n: usize,
) -> Result<SandwichCheck<T>> {
    if grid_n < 10 {
        return Err(Error::InvalidArgument(
            "grid must have at least 10 points".into(),
        ));
    }
    let (plus, minus) = pair;
    let delta = plus.delta;
    let tol = t::<T>(1e-9);
    let n = T::from(grid_n).expect("grid fits");
    let near = [delta - tol, delta + tol, -delta - tol, -delta + tol];
    let points = (0..grid_n)
        .map(|i| T::from(i).expect("index fits") / n)
        .chain(near);
    let mut worst = T::zero();
    let mut sum_plus = T::zero();
    for (i, y) in points.enumerate() {
        let r = y - y.floor();
        let dist = r.min(T::one() - r);
        let chi = if dist < delta { T::one() } else { T::zero() };
        let up = eval_poly(plus, y);
        let lo = eval_poly(minus, y);
        if i < grid_n {
            sum_plus = sum_plus + up;
        }
        worst = worst.max(chi - up).max(lo - chi);
    }
    Ok(SandwichCheck {
        pass: worst <= tol,
        worst_violation: worst.max(T::zero()),
        grid_mean_plus: sum_plus / n,
    })
}

/// Bracket of a count obtained by summing polynomial values over the
/// enumeration range.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichCount {
    pub lower: f64,
    pub upper: f64,
    /// `(2δ + 1/(J+1))^{n−d} (size^{d or d+1} + Σ_{0<|j|≤J} ∏_u ‖j · row_u‖⁻¹)`;
    /// infinite when some `j · row_u` is an integer.
    pub analytic_upper: f64,
    pub vacuous: bool,
}

/// `x mod 1` as a double.
fn unit_f64(v: &FormValue) -> f64 {
    match v {
        FormValue::Rational(x) => {
            let f = x - x.floor();
            f.to_f64().unwrap_or(0.0)
        }
        FormValue::Irrational(b) => {
            let unit = BigInt::one() << b.prec();
            let m = b.mid().mod_floor(&unit);
            crate::numerics::Ball::new(m, BigInt::zero(), b.prec()).mid_f64()
        }
    }
}

/// Lower and upper brackets for `count(S, mode, size, δ)` from the degree-`J`
/// pair, with the analytic upper bound alongside.
pub fn sandwich_count(
    s: &SubspaceMatrix,
    mode: Mode,
    size: u64,
    delta: &BigRational,
    degree: usize,
    opts: &CountOptions,
) -> Result<SandwichCount> {
    if !delta.is_positive() || *delta > BigRational::new(1.into(), 2.into()) {
        return Err(Error::DeltaOutOfRange(format!(
            "delta = {delta} must lie in (0, 1/2]"
        )));
    }
    let delta_f = delta.to_f64().expect("delta is small");
    let (plus, minus) = selberg_pair(delta_f, degree)?;
    let points = PointRange::new(s, mode, size, opts.budget)?;
    let prepared = PreparedForms::new(s.column_forms(), opts.precision.start.max(128));
    let codim = s.codim();
    let slack_plus = plus.eval_error();
    let slack_minus = minus.eval_error();
    let prod_rel = 4.0 * (codim as f64 + 1.0) * f64::EPSILON;
    let parts = map_blocks(0..points.total(), opts.block, |r| {
        let (mut lo_sum, mut hi_sum, mut abs_sum) = (0.0f64, 0.0f64, 0.0f64);
        let mut xs = vec![0.0; codim];
        points.for_each(r, |c| {
            for (x, v) in xs.iter_mut().zip(prepared.values(c)) {
                *x = unit_f64(&v);
            }
            let mut hi = 1.0;
            let mut lo = 1.0;
            let mut any_negative = false;
            for &x in &xs {
                hi *= eval_poly(&plus, x) + slack_plus;
                let m = eval_poly(&minus, x) - slack_minus;
                any_negative |= m < 0.0;
                lo *= m;
            }
            hi *= 1.0 + prod_rel;
            lo = if codim == 1 {
                lo - lo.abs() * prod_rel
            } else if any_negative {
                lo.min(0.0)
            } else {
                lo * (1.0 - prod_rel)
            };
            lo = lo.max(-1.0);
            lo_sum += lo;
            hi_sum += hi;
            abs_sum += lo.abs() + hi.abs();
            Ok(())
        })?;
        Ok((lo_sum, hi_sum, abs_sum))
    })?;
    let (mut lower, mut upper, mut abs) = (0.0, 0.0, 0.0);
    for (l, h, a) in parts {
        lower += l;
        upper += h;
        abs += a;
    }
    let rounding = 2.0 * (points.total() as f64 + 2.0) * f64::EPSILON * abs;
    let analytic_upper = analytic_upper(s, mode, size, delta_f, degree)?;
    Ok(SandwichCount {
        lower: lower - rounding,
        upper: upper + rounding,
        analytic_upper,
        vacuous: minus.is_vacuous(),
    })
}

fn analytic_upper(
    s: &SubspaceMatrix,
    mode: Mode,
    size: u64,
    delta: f64,
    degree: usize,
) -> Result<f64> {
    let (m, power) = match mode {
        Mode::A => (s.a(), s.d()),
        Mode::N => (s.atilde(), s.d() + 1),
    };
    let tail = match recip_product_sum(m, degree as u64, &SumOptions::default()) {
        Ok(b) => b.upper_f64(),
        Err(Error::ZeroDenominator { .. }) => return Ok(f64::INFINITY),
        Err(e) => return Err(e),
    };
    let coeff = (2.0 * delta + 1.0 / (degree as f64 + 1.0)).powi(s.codim() as i32);
    let main = (size as f64).powi(power as i32);
    Ok(coeff * (main + tail) * (1.0 + 8.0 * f64::EPSILON))
}

/// One row of a sandwich report.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichRow {
    pub size: u64,
    pub delta: BigRational,
    pub degree: usize,
    pub exact: u64,
    pub bracket: SandwichCount,
}

pub fn sandwich_row(
    s: &SubspaceMatrix,
    mode: Mode,
    size: u64,
    delta: &BigRational,
    degree: usize,
    opts: &CountOptions,
) -> Result<SandwichRow> {
    let bracket = sandwich_count(s, mode, size, delta, degree, opts)?;
    let exact = count(s, mode, size, delta, opts)?;
    Ok(SandwichRow {
        size,
        delta: delta.clone(),
        degree,
        exact,
        bracket,
    })
}

/// CSV with columns `q_or_Q,delta,J,lower,exact,upper,analytic_upper`.
pub fn sandwich_csv(rows: &[SandwichRow]) -> String {
    let mut s = String::from("q_or_Q,delta,J,lower,exact,upper,analytic_upper\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:.6},{},{:.6},{:.6}",
            r.size,
            crate::counting::ratio_decimal(&r.delta, 6),
            r.degree,
            r.bracket.lower,
            r.exact,
            r.bracket.upper,
            r.bracket.analytic_upper
        );
    }
    s
}

/// `|Σ_{a=1}^q e(ax)|` against `1/‖x‖`, with a rigorous floating error bound.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpSumCheck<T> {
    pub modulus: T,
    /// `1/‖x‖`, infinite for integer `x`.
    pub bound: T,
    /// Bound on `|modulus − true modulus|`.
    pub error: T,
    pub holds: bool,
}

/// Evaluates the geometric sum directly. Each `ax mod 1` is reduced in exact
/// integer arithmetic from the binary expansion of `x`.
pub fn exp_sum_check<T: Float + FloatConst>(x: T, q: u64) -> ExpSumCheck<T> {
    let (mant, exp, sign) = x.integer_decode();
    let qf = T::from(q).expect("q fits");
    if exp >= 0 || mant == 0 {
        return ExpSumCheck {
            modulus: qf,
            bound: T::infinity(),
            error: T::zero(),
            holds: true,
        };
    }
    let shift = (-exp) as usize;
    let unit = BigInt::one() << shift;
    let m = BigInt::from(mant) * i64::from(sign);
    let frac_of = |k: u64| -> T {
        let r = (&m * k).mod_floor(&unit);
        let bits = r.bits();
        // Scale into a double without overflow, then to T.
        let top = if bits > 64 {
            &r >> (bits - 64)
        } else {
            r.clone()
        };
        let e = bits.saturating_sub(64) as i32 - shift as i32;
        t::<T>(top.to_f64().unwrap_or(0.0) * 2f64.powi(e))
    };
    let two_pi = t::<T>(2.0) * T::PI();
    let (mut re, mut im) = (T::zero(), T::zero());
    for a in 1..=q {
        let w = two_pi * frac_of(a);
        re = re + w.cos();
        im = im + w.sin();
    }
    let modulus = re.hypot(im);
    let f = frac_of(1);
    let dist = f.min(T::one() - f);
    let bound = if dist.is_zero() {
        T::infinity()
    } else {
        T::one() / dist
    };
    let eps = T::epsilon();
    let error = t::<T>(2.0) * eps * qf * (t::<T>(16.0) + qf) + eps * modulus;
    let holds = modulus + error <= bound * (T::one() - t::<T>(4.0) * eps);
    ExpSumCheck {
        modulus,
        bound,
        error,
        holds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Surd;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn mean_coefficients() {
        let (p, m) = selberg_pair(0.1f64, 9).unwrap();
        assert!((p.coeff(0) - 0.3).abs() < 1e-15);
        assert!((m.coeff(0) - 0.1).abs() < 1e-15);
        let (p, _) = selberg_pair(0.25f64, 3).unwrap();
        assert!((p.coeff(0) - 0.75).abs() < 1e-15);
        assert!(p.coeff(1).abs() <= 0.25 + 1.0 / std::f64::consts::PI);
        assert_eq!(p.coeff(-2), p.coeff(2));
        assert_eq!(p.coeff(4), 0.0);
        assert!(matches!(
            selberg_pair(0.6f64, 3),
            Err(Error::DeltaOutOfRange(_))
        ));
        assert!(matches!(
            selberg_pair(0.0f64, 3),
            Err(Error::DeltaOutOfRange(_))
        ));
    }

    #[test]
    fn evaluation() {
        let c = TrigPolynomial::from_coeffs(0.1, Side::Plus, vec![0.7f64]);
        for y in [0.0, 0.3, -2.7] {
            assert_eq!(eval_poly(&c, y), 0.7);
        }
        let (p, _) = selberg_pair(0.1f64, 9).unwrap();
        assert!(eval_poly(&p, 0.0) >= 1.0);
        for y in [0.013, 0.37, 0.9] {
            assert!((eval_poly(&p, y) - eval_poly(&p, y + 1.0)).abs() < 1e-12);
        }
        let (p32, _) = selberg_pair(0.1f32, 9).unwrap();
        assert!((eval_poly(&p32, 0.2f32) as f64 - eval_poly(&p, 0.2)).abs() < 1e-5);
    }

    #[test]
    fn sandwich_holds() {
        for (delta, j, grid) in [(0.1, 9, 10_000), (0.5, 9, 1000), (0.01, 1, 1000)] {
            let pair = selberg_pair(delta, j).unwrap();
            let c = verify_sandwich(&pair, grid).unwrap();
            assert!(c.pass, "delta {delta} J {j}: {}", c.worst_violation);
            assert!((c.grid_mean_plus - pair.0.coeff(0)).abs() < 1e-6);
            assert!(check_coefficients(&pair.0, 1e-12).pass);
            assert!(check_coefficients(&pair.1, 1e-12).pass);
        }
        let (_, m) = selberg_pair(0.01f64, 9).unwrap();
        assert!(m.is_vacuous());
    }

    #[test]
    fn a_wrong_polynomial_fails() {
        let (p, m) = selberg_pair(0.1f64, 9).unwrap();
        let mut bad = p.coeffs().to_vec();
        bad[0] -= 0.2;
        let bad = TrigPolynomial::from_coeffs(0.1, Side::Plus, bad);
        assert!(!verify_sandwich(&(bad, m), 1000).unwrap().pass);
    }

    #[test]
    fn brackets_known_counts() {
        let s =
            SubspaceMatrix::from_surds(vec![Surd::from_int(0)], vec![vec![Surd::sqrt(2).unwrap()]])
                .unwrap();
        let opts = CountOptions::default();
        let b = sandwich_count(&s, Mode::A, 10, &r(1, 5), 50, &opts).unwrap();
        assert!(b.lower <= 4.0 && 4.0 <= b.upper, "{b:?}");
        assert!(b.upper <= b.analytic_upper);
        let b = sandwich_count(&s, Mode::A, 1, &r(9, 20), 100, &opts).unwrap();
        assert!(b.lower <= 1.0 && 1.0 <= b.upper);
        let b = sandwich_count(&s, Mode::N, 5, &r(3, 10), 40, &opts).unwrap();
        assert!(b.lower <= 15.0 && 15.0 <= b.upper);
        assert!(matches!(
            sandwich_count(&s, Mode::A, 10, &r(3, 5), 5, &opts),
            Err(Error::DeltaOutOfRange(_))
        ));
        let rows = vec![sandwich_row(&s, Mode::A, 10, &r(1, 5), 50, &opts).unwrap()];
        assert!(sandwich_csv(&rows)
            .starts_with("q_or_Q,delta,J,lower,exact,upper,analytic_upper\n10,0.200000,50,"));
    }

    #[test]
    fn refinement_narrows_the_bracket() {
        let s = SubspaceMatrix::from_surds(
            vec![Surd::sqrt(3).unwrap()],
            vec![vec![Surd::sqrt(2).unwrap()]],
        )
        .unwrap();
        let opts = CountOptions::default();
        let widths: Vec<f64> = [10, 20, 40, 80]
            .iter()
            .map(|&j| {
                let b = sandwich_count(&s, Mode::A, 500, &r(1, 10), j, &opts).unwrap();
                b.upper - b.lower
            })
            .collect();
        assert!(widths.windows(2).all(|w| w[1] <= w[0]), "{widths:?}");
    }

    #[test]
    fn exponential_sums() {
        let c = exp_sum_check(0.3f64, 10);
        assert!(c.holds);
        // Closed form |sin(πqx)/sin(πx)|.
        let x = 0.123456789f64;
        let q = 500;
        let c = exp_sum_check(x, q);
        let closed =
            ((std::f64::consts::PI * q as f64 * x).sin() / (std::f64::consts::PI * x).sin()).abs();
        assert!((c.modulus - closed).abs() <= c.error + 1e-9);
        assert!(c.holds);
        assert!(exp_sum_check(3.0f64, 7).bound.is_infinite());
        assert!(exp_sum_check(-0.25f32, 9).holds);
    }
}
