//! Record minima of `∏_u ‖j · row_u‖`, a heuristic estimate of the
//! multiplicative exponent, and certified badness constants for `√d`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::matrices::{product_dist_forms, LinearForm, RealMatrix};
use crate::numerics::{cmp_margin, CertifiedReal, Precision, Surd};
use crate::parallel::{centered_cube, map_blocks, sup_norm, Odometer, DEFAULT_BLOCK};

/// A vector `j` at which `∏_u ‖j · row_u‖` reaches a new minimum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BadnessRecord {
    pub j: Vec<i64>,
    pub value: CertifiedReal,
    pub norm_j: u64,
}

type ShellMinima = BTreeMap<u64, (CertifiedReal, Vec<i64>)>;

/// Keeps the smaller value; equal values go to the lexicographically
/// smaller vector.
fn better(a: &(CertifiedReal, Vec<i64>), b: &(CertifiedReal, Vec<i64>)) -> Result<bool> {
    Ok(match cmp_margin(&b.0, &a.0)? {
        Ordering::Less => true,
        Ordering::Equal => b.1 < a.1,
        Ordering::Greater => false,
    })
}

fn offer(map: &mut ShellMinima, norm: u64, cand: (CertifiedReal, Vec<i64>)) -> Result<()> {
    match map.get(&norm) {
        Some(cur) if !better(cur, &cand)? => {}
        _ => {
            map.insert(norm, cand);
        }
    }
    Ok(())
}

fn shell_minima(forms: &[LinearForm], dims: usize, j_max: u64, prec: u32) -> Result<ShellMinima> {
    let (size, center) = centered_cube(j_max, dims)?;
    let lo = -(j_max as i64);
    let parts = map_blocks(center + 1..size, DEFAULT_BLOCK, |r| {
        let mut odo = Odometer::starting_at(lo, j_max as i64, dims, r.start);
        let mut local = ShellMinima::new();
        for _ in r {
            let j = odo.get();
            let v = product_dist_forms(forms, j, prec)?;
            if v.is_zero() {
                return Err(Error::NotBad { j: j.to_vec() });
            }
            offer(&mut local, sup_norm(j), (v, j.to_vec()))?;
            odo.advance();
        }
        Ok(local)
    })?;
    let mut all = ShellMinima::new();
    for part in parts {
        for (norm, cand) in part {
            offer(&mut all, norm, cand)?;
        }
    }
    Ok(all)
}

/// Every record minimum of `∏_u ‖j · row_u(M)‖` over `0 < |j|∞ ≤ J`, in
/// increasing `|j|∞`. Among `±j` the vector whose first nonzero coordinate
/// is positive is reported.
pub fn phi_min_profile(
    m: &RealMatrix,
    j_max: u64,
    precision: Precision,
) -> Result<Vec<BadnessRecord>> {
    if j_max == 0 {
        return Err(Error::InvalidArgument("J must be at least 1".into()));
    }
    let forms = m.row_forms();
    precision.at_least(m.bits_hint()).ladder(|prec| {
        let shells = shell_minima(&forms, m.cols(), j_max, prec)?;
        let mut records: Vec<BadnessRecord> = Vec::new();
        for (norm, (value, j)) in shells {
            let is_record = match records.last() {
                None => true,
                Some(r) => cmp_margin(&value, &r.value)?.is_lt(),
            };
            if is_record {
                records.push(BadnessRecord {
                    j,
                    value,
                    norm_j: norm,
                });
            }
        }
        Ok(records)
    })
}

/// Result of [`estimate_omega`]. `omega_hat` is a heuristic slope, not a
/// certified bound.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaEstimate {
    pub omega_hat: f64,
    pub records_used: usize,
    pub max_residual: f64,
    pub records: Vec<BadnessRecord>,
}

/// Slope of `log(1/value)` against `log |j|∞` over the record minima.
pub fn estimate_omega(m: &RealMatrix, j_max: u64, precision: Precision) -> Result<OmegaEstimate> {
    if j_max < 10 {
        return Err(Error::InvalidArgument("J_max must be at least 10".into()));
    }
    let records = phi_min_profile(m, j_max, precision)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = records
        .iter()
        .map(|r| ((r.norm_j as f64).ln(), -r.value.to_f64().ln()))
        .unzip();
    let fit = least_squares(&xs, &ys, 2).map_err(|_| Error::InsufficientRecords {
        found: records.len(),
    })?;
    Ok(OmegaEstimate {
        omega_hat: fit.slope,
        records_used: records.len(),
        max_residual: fit.max_abs_residual(),
        records,
    })
}

/// CSV with columns `norm_j,j_1..j_m,value,log_ratio`, where `log_ratio` is
/// `log(1/value) / log |j|∞` (empty at `|j|∞ = 1`).
pub fn records_csv(records: &[BadnessRecord], digits: u32) -> String {
    let m = records.first().map_or(0, |r| r.j.len());
    let mut s = String::from("norm_j,");
    for i in 1..=m {
        let _ = write!(s, "j_{i},");
    }
    s.push_str("value,log_ratio\n");
    for r in records {
        let _ = write!(s, "{},", r.norm_j);
        for c in &r.j {
            let _ = write!(s, "{c},");
        }
        let v = r.value.to_ball(4 * digits + 64);
        let _ = write!(s, "{},", v.to_decimal(digits));
        if r.norm_j > 1 {
            let _ = write!(s, "{:.6}", -v.mid_f64().ln() / (r.norm_j as f64).ln());
        }
        s.push('\n');
    }
    s
}

/// A rational `c ≤ 1/(2√d + 1/2)`, so that `‖j√d‖ ≥ c/j` for every `j ≥ 1`.
///
/// With `p` the nearest integer to `j√d`, `|d j² − p²| ≥ 1` gives
/// `|j√d − p| ≥ 1/(j√d + p) ≥ 1/(j(2√d + 1/2))`.
pub fn surd_bad_constant(d: u64) -> Result<BigRational> {
    quadratic_bad_constant(&Surd::sqrt(d)?)
}

/// A rational `c` with `‖jx‖ ≥ c/j` for every `j ≥ 1`, for an irrational
/// quadratic surd `x`.
///
/// If `a x² + b x + e` is the primitive minimal polynomial with discriminant
/// `D`, then for the nearest integer `p` the nonzero integer
/// `a p² + b p j + e j²` equals `a (p − jx)(p − jx')`, and
/// `|p − jx'| ≤ j(√D/a + 1/2)`. Hence `c = 1/(√D + a/2)`, rounded down.
pub fn quadratic_bad_constant(x: &Surd) -> Result<BigRational> {
    if x.is_rational() {
        return Err(Error::InvalidArgument(format!("{x} is rational")));
    }
    // (r x − p)² = q² d, so r² x² − 2pr x + (p² − q² d) = 0.
    let (p, q, d, r) = (x.p(), x.q(), x.d(), x.r());
    let a = r * r;
    let b = -(p * r) * 2;
    let e = p * p - q * q * d;
    let g = a.gcd(&b).gcd(&e);
    let a = a / &g;
    let disc: BigInt = (q * q * d * r * r * 4) / (&g * &g);
    let scale = BigInt::from(1_000_000u32);
    // s > √D · 10⁶
    let s: BigInt = (disc * &scale * &scale).sqrt() + 1;
    Ok(BigRational::new(&scale * 2, s * 2 + a * scale))
}

/// All `j ≤ j_max` with `‖j√d‖ < c/j`, decided exactly.
pub fn surd_bad_violations(d: u64, c: &BigRational, j_max: u64) -> Result<Vec<u64>> {
    Ok(quadratic_bad_violations(&Surd::sqrt(d)?, c, j_max))
}

/// All `j ≤ j_max` with `‖jx‖ < c/j`, decided exactly.
pub fn quadratic_bad_violations(x: &Surd, c: &BigRational, j_max: u64) -> Vec<u64> {
    (1..=j_max)
        .filter(|&j| {
            let dist = x.mul_int(&BigInt::from(j)).dist_nearest();
            let bound = Surd::from_ratio(&(c / BigRational::from_integer(BigInt::from(j))));
            dist.cmp_value(&bound).is_lt()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(values: Vec<Surd>) -> RealMatrix {
        RealMatrix::column(values).unwrap()
    }

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn sqrt2_records() {
        let m = col(vec![Surd::sqrt(2).unwrap()]);
        let r = phi_min_profile(&m, 3, Precision::default()).unwrap();
        let got: Vec<(Vec<i64>, f64)> = r.iter().map(|r| (r.j.clone(), r.value.to_f64())).collect();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].0, vec![1]);
        assert!((got[0].1 - 0.4142136).abs() < 1e-7);
        assert_eq!(got[1].0, vec![2]);
        assert!((got[1].1 - 0.1715729).abs() < 1e-7);
        let r = phi_min_profile(&m, 1, Precision::default()).unwrap();
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn rational_is_not_bad() {
        let m = col(vec![Surd::from_ratio(&ratio(2, 5))]);
        assert_eq!(
            phi_min_profile(&m, 5, Precision::default()).unwrap_err(),
            Error::NotBad { j: vec![5] }
        );
        let m = col(vec![Surd::from_ratio(&ratio(3, 7))]);
        assert!(matches!(
            estimate_omega(&m, 100, Precision::default()).unwrap_err(),
            Error::NotBad { .. }
        ));
    }

    #[test]
    fn omega_of_quadratic_irrationals() {
        let m = col(vec![Surd::sqrt(2).unwrap()]);
        let e = estimate_omega(&m, 10_000, Precision::default()).unwrap();
        assert!((e.omega_hat - 1.0).abs() < 0.1, "{}", e.omega_hat);
        // Records of √2 sit at the Pell denominators.
        let norms: Vec<u64> = e.records.iter().map(|r| r.norm_j).collect();
        assert_eq!(&norms[..6], &[1, 2, 5, 12, 29, 70]);
        let golden = Surd::new(1.into(), 1.into(), 5.into(), 2.into()).unwrap();
        let e = estimate_omega(&col(vec![golden]), 10_000, Precision::default()).unwrap();
        assert!((e.omega_hat - 1.0).abs() < 0.1, "{}", e.omega_hat);
        let norms: Vec<u64> = e.records.iter().map(|r| r.norm_j).collect();
        assert_eq!(&norms[..5], &[1, 2, 3, 5, 8]);
    }

    #[test]
    fn sign_invariance() {
        let m = RealMatrix::from_surds(vec![
            vec![Surd::sqrt(2).unwrap()],
            vec![Surd::sqrt(3).unwrap()],
        ])
        .unwrap();
        let a = phi_min_profile(&m, 40, Precision::default()).unwrap();
        let b = phi_min_profile(&m.neg(), 40, Precision::default()).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.j, y.j);
            assert!((x.value.to_f64() - y.value.to_f64()).abs() < 1e-30);
        }
    }

    #[test]
    fn omega_needs_records() {
        let m = col(vec![Surd::sqrt(2).unwrap()]);
        assert!(estimate_omega(&m, 5, Precision::default()).is_err());
    }

    #[test]
    fn bad_constants() {
        let c2 = surd_bad_constant(2).unwrap();
        let f = |c: &BigRational| {
            use num_traits::ToPrimitive;
            c.to_f64().unwrap()
        };
        assert!((f(&c2) - 0.3004).abs() < 1e-4);
        let c3 = surd_bad_constant(3).unwrap();
        assert!((f(&c3) - 1.0 / (2.0 * 3f64.sqrt() + 0.5)).abs() < 1e-6);
        assert!(f(&c3) <= 1.0 / (2.0 * 3f64.sqrt() + 0.5));
        assert_eq!(
            surd_bad_constant(4).unwrap_err(),
            Error::PerfectSquareRadicand("4".into())
        );
        for d in [2u64, 3, 5, 7, 8, 13] {
            let c = surd_bad_constant(d).unwrap();
            assert!(surd_bad_violations(d, &c, 2000).unwrap().is_empty());
        }
        let golden = Surd::new(1.into(), 1.into(), 5.into(), 2.into()).unwrap();
        let cg = quadratic_bad_constant(&golden).unwrap();
        assert!((f(&cg) - 1.0 / (5f64.sqrt() + 0.5)).abs() < 1e-6);
        assert!(quadratic_bad_violations(&golden, &cg, 2000).is_empty());
        assert_eq!(
            quadratic_bad_constant(&Surd::sqrt(2).unwrap().mul_int(&3.into())).map(|c| f(&c) > 0.0),
            Ok(true)
        );
        assert!(quadratic_bad_constant(&Surd::from_int(3)).is_err());
        // A constant that is too large is caught.
        assert_eq!(surd_bad_violations(2, &ratio(1, 2), 3).unwrap(), vec![1, 2]);
    }

    #[test]
    fn csv_shape() {
        let m = col(vec![Surd::sqrt(2).unwrap()]);
        let r = phi_min_profile(&m, 3, Precision::default()).unwrap();
        let csv = records_csv(&r, 7);
        assert_eq!(
            csv,
            "norm_j,j_1,value,log_ratio\n1,1,0.4142136,\n2,2,0.1715729,2.543107\n"
        );
    }
}
