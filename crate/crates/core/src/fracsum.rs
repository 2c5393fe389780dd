//! Reciprocal products of fractional parts summed over a box of integer
//! vectors, the explicit bound they satisfy for φ-badly approximable
//! matrices, and the dyadic bucketing behind that bound.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Range;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};

use crate::error::{Error, Result};
use crate::fit::{least_squares, LineFit};
use crate::matrices::{product_dist_forms, PreparedForms, RealMatrix};
use crate::numerics::{cmp_margin, Ball, CertifiedReal, Precision};
use crate::parallel::{centered_cube, map_blocks, sup_norm, Odometer, DEFAULT_BLOCK};

/// Precision policy, error target and block size for the summations.
#[derive(Clone, Copy, Debug)]
pub struct SumOptions {
    pub precision: Precision,
    /// Largest acceptable radius of a returned sum.
    pub tolerance: f64,
    pub block: u64,
}

impl Default for SumOptions {
    fn default() -> Self {
        SumOptions {
            precision: Precision::default(),
            tolerance: 1e-9,
            block: DEFAULT_BLOCK,
        }
    }
}

fn radius_within(b: &Ball, tol: f64) -> bool {
    match BigRational::from_float(tol) {
        Some(t) => {
            let scaled = BigRational::from_integer(b.rad().clone())
                / BigRational::from_integer(BigInt::one() << b.prec());
            scaled <= t
        }
        None => true,
    }
}

/// Runs `term` at the prepared precision and, if that is not enough, at
/// doubled precisions up to the cap. The result is rounded back to the
/// prepared precision.
fn laddered<F>(prepared: &PreparedForms, cap: u32, term: F) -> Result<Ball>
where
    F: Fn(&PreparedForms) -> Result<Ball>,
{
    let base = prepared.prec();
    match term(prepared) {
        Err(e) if e.is_precision() && base < cap => {
            let finer = Precision::new((base * 2).min(cap), cap);
            finer
                .ladder(|bits| term(&prepared.at(bits)))
                .map(|b| b.with_prec(base))
        }
        other => other,
    }
}

fn product(balls: &[Ball], prec: u32) -> Ball {
    balls
        .iter()
        .fold(Ball::from_int(&BigInt::one(), prec), |acc, b| acc.mul(b))
}

/// `∏_u ‖j · row_u‖⁻¹` as a ball.
fn recip_term(prepared: &PreparedForms, j: &[i64], cap: u32) -> Result<Ball> {
    laddered(prepared, cap, |p| product(&p.dists(j)?, p.prec()).recip())
}

/// Sums `term` over the vectors with flat indices in `range`, block by block.
fn sum_over<F>(
    range: Range<u64>,
    j_max: u64,
    dims: usize,
    block: u64,
    prec: u32,
    skip: Option<u64>,
    term: F,
) -> Result<Ball>
where
    F: Fn(&[i64]) -> Result<Ball> + Sync + Send,
{
    let lo = -(j_max as i64);
    let hi = j_max as i64;
    let partials = map_blocks(range, block, |r| {
        let mut odo = Odometer::starting_at(lo, hi, dims, r.start);
        let mut acc = Ball::from_int(&BigInt::zero(), prec);
        for idx in r {
            if Some(idx) != skip {
                acc = acc.add(&term(odo.get())?);
            }
            odo.advance();
        }
        Ok(acc)
    })?;
    Ok(partials
        .iter()
        .fold(Ball::from_int(&BigInt::zero(), prec), |a, b| a.add(b)))
}

/// `Σ_{0 < |j|∞ ≤ J} ∏_u ‖j · row_u(M)‖⁻¹`.
///
/// Only the vectors whose first nonzero coordinate is positive are visited;
/// the other half contributes the same amount.
pub fn recip_product_sum(m: &RealMatrix, j_max: u64, opts: &SumOptions) -> Result<Ball> {
    if j_max == 0 {
        return Err(Error::InvalidArgument("J must be at least 1".into()));
    }
    let dims = m.cols();
    let (size, center) = centered_cube(j_max, dims)?;
    let precision = opts.precision.at_least(m.bits_hint());
    let forms = m.row_forms();
    precision.ladder(|prec| {
        let prepared = PreparedForms::new(forms.clone(), prec);
        let half = sum_over(center + 1..size, j_max, dims, opts.block, prec, None, |j| {
            recip_term(&prepared, j, precision.cap)
        })?;
        let total = half.mul_int(&BigInt::from(2));
        if radius_within(&total, opts.tolerance) {
            Ok(total)
        } else {
            Err(Error::PrecisionInsufficient { bits: prec })
        }
    })
}

/// `Σ_{0 < |j|∞ ≤ J} ∏_u (1/{y_u} + 1/{−y_u})` with `y_u = j · row_u`, which
/// expands to the sum over all sign patterns `b ∈ {±1}^l` of the products of
/// `1/{b_u y_u}` and dominates [`recip_product_sum`] term by term.
pub fn sign_flip_majorant(m: &RealMatrix, j_max: u64, opts: &SumOptions) -> Result<Ball> {
    if j_max == 0 {
        return Err(Error::InvalidArgument("J must be at least 1".into()));
    }
    let dims = m.cols();
    let (size, center) = centered_cube(j_max, dims)?;
    let precision = opts.precision.at_least(m.bits_hint());
    let forms = m.row_forms();
    precision.ladder(|prec| {
        let prepared = PreparedForms::new(forms.clone(), prec);
        let total = sum_over(0..size, j_max, dims, opts.block, prec, Some(center), |j| {
            laddered(&prepared, precision.cap, |p| {
                let one = Ball::from_int(&BigInt::one(), p.prec());
                let mut acc = one.clone();
                for f in p.fracs(j)? {
                    let g = one.sub(&f);
                    acc = acc.mul(&f.recip()?.add(&g.recip()?));
                }
                Ok(acc)
            })
        })?;
        if radius_within(&total, opts.tolerance) {
            Ok(total)
        } else {
            Err(Error::PrecisionInsufficient { bits: prec })
        }
    })
}

/// The shape of a badness function `φ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhiShape {
    /// `φ(j) = c`
    Constant,
    /// `φ(j) = c / j`
    Reciprocal,
    /// `φ(j) = c / j²`
    ReciprocalSquare,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiSpec {
    pub c: BigRational,
    pub shape: PhiShape,
}

impl PhiSpec {
    pub fn new(c: BigRational, shape: PhiShape) -> Self {
        PhiSpec { c, shape }
    }

    pub fn at(&self, j: u64) -> BigRational {
        let j = BigInt::from(j);
        match self.shape {
            PhiShape::Constant => self.c.clone(),
            PhiShape::Reciprocal => &self.c / BigRational::from_integer(j),
            PhiShape::ReciprocalSquare => &self.c / BigRational::from_integer(&j * &j),
        }
    }
}

/// `⌊log₂ y⌋` for a rational `y ≥ 1`.
fn floor_log2_ratio(y: &BigRational) -> u64 {
    let (n, d) = (y.numer(), y.denom());
    let mut k = n.bits().saturating_sub(d.bits());
    if (d << k) > *n {
        k -= 1;
    }
    k
}

fn check_phi(x: &BigRational, what: &str) -> Result<()> {
    if x.is_positive() && *x < BigRational::one() {
        Ok(())
    } else {
        Err(Error::PhiOutOfRange(format!("{what} = {x}")))
    }
}

/// `(4^l / φ(2J)) · C(l + ⌊log₂(1/φ(J))⌋, l)`, exactly.
pub fn packing_bound(phi: &PhiSpec, l: u32, j_max: u64) -> Result<BigRational> {
    if j_max == 0 || l == 0 {
        return Err(Error::InvalidArgument("need J ≥ 1 and l ≥ 1".into()));
    }
    let at_j = phi.at(j_max);
    let at_2j = phi.at(2 * j_max);
    check_phi(&at_j, "phi(J)")?;
    check_phi(&at_2j, "phi(2J)")?;
    let k = floor_log2_ratio(&at_j.recip());
    Ok(bound_from(l, k, &at_2j.recip()))
}

fn bound_from(l: u32, k: u64, recip_phi_2j: &BigRational) -> BigRational {
    let four: BigInt = Pow::pow(BigInt::from(4u8), l);
    let c = binomial(BigInt::from(l as u64 + k), BigInt::from(l));
    BigRational::from_integer(four * c) * recip_phi_2j
}

/// `⌊log₂(1/x)⌋` for `0 < x < 1`, decided with certified comparisons.
pub fn floor_log2_recip(x: &CertifiedReal) -> Result<u64> {
    if let Some(r) = x.as_ratio() {
        check_phi(&r, "phi")?;
        return Ok(floor_log2_ratio(&r.recip()));
    }
    let guess = (-x.to_f64().log2()).floor();
    if !guess.is_finite() || guess < 0.0 {
        return Err(Error::PhiOutOfRange(format!("phi = {x}")));
    }
    let pow2 =
        |k: u64| CertifiedReal::from_ratio(&BigRational::new(BigInt::one(), BigInt::one() << k));
    let mut k = guess as u64;
    // Want 2^{−(k+1)} < x ≤ 2^{−k}.
    loop {
        if cmp_margin(x, &pow2(k))?.is_gt() {
            if k == 0 {
                return Err(Error::PhiOutOfRange(format!("phi = {x}")));
            }
            k -= 1;
        } else if cmp_margin(x, &pow2(k + 1))?.is_le() {
            k += 1;
        } else {
            return Ok(k);
        }
    }
}

/// The bound with certified values of `φ(J)` and `φ(2J)`, for example the
/// empirical minima of a [`DyadicProfile`].
pub fn packing_bound_certified(
    phi_j: &CertifiedReal,
    phi_2j: &CertifiedReal,
    l: u32,
    prec: u32,
) -> Result<CertifiedReal> {
    if phi_2j.is_zero() || phi_j.is_zero() {
        return Err(Error::PhiOutOfRange("phi vanishes".into()));
    }
    let k = floor_log2_recip(phi_j)?;
    let recip = phi_2j.recip(prec)?;
    let scale = bound_from(l, k, &BigRational::one());
    Ok(recip.mul_ratio(&scale))
}

/// Statistics of one dyadic box `R(k) = ∏_u [2^{−k_u}, 2^{−k_u+1})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxStats {
    pub count: u64,
    /// `Σ ∏_u P_{j,u}⁻¹` over the points in the box.
    pub partial_sum: Ball,
    pub members: Option<Vec<Vec<i64>>>,
}

/// The points `P_j = ({j · row_u})_u`, `0 < |j|∞ ≤ J`, bucketed by dyadic box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicProfile {
    pub j_max: u64,
    pub l: usize,
    pub boxes: BTreeMap<Vec<u32>, BoxStats>,
    /// Vectors with some `P_{j,u} = 0`; only possible for rational rows.
    pub excluded: Vec<Vec<i64>>,
    pub phi_min_j: CertifiedReal,
    pub phi_min_2j: CertifiedReal,
}

/// Options for [`dyadic_profile`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ProfileOptions {
    pub sum: SumOptions,
    pub keep_members: bool,
}

/// Box index `k ≥ 1` with `2^{−k} ≤ x < 2^{−k+1}` for a ball inside (0, 1).
fn box_index(b: &Ball) -> Result<u32> {
    let (lo, hi) = (b.lo(), b.hi());
    if !lo.is_positive() || lo.bits() != hi.bits() {
        return Err(Error::PrecisionInsufficient { bits: b.prec() });
    }
    Ok(b.prec() + 1 - lo.bits() as u32)
}

struct ProfilePart {
    boxes: BTreeMap<Vec<u32>, BoxStats>,
    excluded: Vec<Vec<i64>>,
}

fn merge_box(into: &mut BTreeMap<Vec<u32>, BoxStats>, k: Vec<u32>, s: BoxStats) {
    match into.get_mut(&k) {
        None => {
            into.insert(k, s);
        }
        Some(t) => {
            t.count += s.count;
            t.partial_sum = t.partial_sum.add(&s.partial_sum);
            if let (Some(a), Some(b)) = (&mut t.members, s.members) {
                a.extend(b);
            }
        }
    }
}

/// Minima of `∏_u ‖j · row_u‖` over `0 < |j|∞ ≤ J` and `≤ 2J`.
pub fn phi_minima(
    m: &RealMatrix,
    j_max: u64,
    prec: u32,
    block: u64,
) -> Result<(CertifiedReal, CertifiedReal)> {
    let dims = m.cols();
    let outer = 2 * j_max;
    let (size, center) = centered_cube(outer, dims)?;
    let forms = m.row_forms();
    let lo = -(outer as i64);
    let parts = map_blocks(center + 1..size, block, |r| {
        let mut odo = Odometer::starting_at(lo, outer as i64, dims, r.start);
        let mut inner: Option<CertifiedReal> = None;
        let mut all: Option<CertifiedReal> = None;
        for _ in r {
            let j = odo.get();
            let v = product_dist_forms(&forms, j, prec)?;
            if sup_norm(j) <= j_max {
                inner = Some(match inner {
                    None => v.clone(),
                    Some(cur) => cur.min(&v, prec),
                });
            }
            all = Some(match all {
                None => v,
                Some(cur) => cur.min(&v, prec),
            });
            odo.advance();
        }
        Ok((inner, all))
    })?;
    let fold = |it: &mut dyn Iterator<Item = Option<CertifiedReal>>| {
        it.flatten()
            .reduce(|a, b| a.min(&b, prec))
            .expect("nonempty range")
    };
    let phi_j = fold(&mut parts.iter().map(|p| p.0.clone()));
    let phi_2j = fold(&mut parts.iter().map(|p| p.1.clone()));
    Ok((phi_j, phi_2j))
}

/// Buckets every `P_j` with `0 < |j|∞ ≤ J` into its dyadic box.
pub fn dyadic_profile(m: &RealMatrix, j_max: u64, opts: &ProfileOptions) -> Result<DyadicProfile> {
    if j_max == 0 {
        return Err(Error::InvalidArgument("J must be at least 1".into()));
    }
    let dims = m.cols();
    let l = m.rows();
    let (size, center) = centered_cube(j_max, dims)?;
    let precision = opts.sum.precision.at_least(m.bits_hint());
    let forms = m.row_forms();
    let block = opts.sum.block;
    let lo = -(j_max as i64);
    let (boxes, excluded, prec) = precision.ladder(|prec| {
        let prepared = PreparedForms::new(forms.clone(), prec);
        let parts = map_blocks(0..size, block, |r| {
            let mut odo = Odometer::starting_at(lo, j_max as i64, dims, r.start);
            let mut part = ProfilePart {
                boxes: BTreeMap::new(),
                excluded: Vec::new(),
            };
            for idx in r {
                if idx != center {
                    let j = odo.get();
                    let point = laddered_point(&prepared, j, precision.cap);
                    match point {
                        Err(Error::ZeroDenominator { .. }) => part.excluded.push(j.to_vec()),
                        Err(e) => return Err(e),
                        Ok((k, f)) => merge_box(
                            &mut part.boxes,
                            k,
                            BoxStats {
                                count: 1,
                                partial_sum: f,
                                members: opts.keep_members.then(|| vec![j.to_vec()]),
                            },
                        ),
                    }
                }
                odo.advance();
            }
            Ok(part)
        })?;
        let mut boxes = BTreeMap::new();
        let mut excluded = Vec::new();
        for p in parts {
            for (k, s) in p.boxes {
                merge_box(&mut boxes, k, s);
            }
            excluded.extend(p.excluded);
        }
        let worst = boxes
            .values()
            .fold(Ball::from_int(&BigInt::zero(), prec), |a, s: &BoxStats| {
                a.add(&s.partial_sum)
            });
        if radius_within(&worst, opts.sum.tolerance) {
            Ok((boxes, excluded, prec))
        } else {
            Err(Error::PrecisionInsufficient { bits: prec })
        }
    })?;
    let (phi_min_j, phi_min_2j) = phi_minima(m, j_max, prec, block)?;
    Ok(DyadicProfile {
        j_max,
        l,
        boxes,
        excluded,
        phi_min_j,
        phi_min_2j,
    })
}

/// Box index and `∏ P_u⁻¹` for one vector, raising precision as needed.
fn laddered_point(prepared: &PreparedForms, j: &[i64], cap: u32) -> Result<(Vec<u32>, Ball)> {
    let attempt = |p: &PreparedForms| -> Result<(Vec<u32>, Ball)> {
        let fracs = p.fracs(j)?;
        let k = fracs.iter().map(box_index).collect::<Result<Vec<_>>>()?;
        let f = product(&fracs, p.prec()).recip()?;
        Ok((k, f))
    };
    let base = prepared.prec();
    match attempt(prepared) {
        Err(e) if e.is_precision() && base < cap => Precision::new((base * 2).min(cap), cap)
            .ladder(|bits| attempt(&prepared.at(bits)))
            .map(|(k, f)| (k, f.with_prec(base))),
        other => other,
    }
}

impl DyadicProfile {
    pub fn total_count(&self) -> u64 {
        self.boxes.values().map(|b| b.count).sum()
    }

    /// Sum of all partial sums, i.e. `Σ_j ∏_u {j · row_u}⁻¹`.
    pub fn total_sum(&self) -> Option<Ball> {
        self.boxes
            .values()
            .map(|b| b.partial_sum.clone())
            .reduce(|a, b| a.add(&b))
    }

    /// Boxes violating `count(k) · φ_min(2J) ≤ 2^{l − Σ k_u}`.
    pub fn packing_violations(&self) -> Result<Vec<Vec<u32>>> {
        let mut out = Vec::new();
        for (k, s) in &self.boxes {
            let lhs = self.phi_min_2j.mul_int(&BigInt::from(s.count));
            if cmp_margin(&lhs, &pow2(self.l as i64 - sum_k(k)))?.is_gt() {
                out.push(k.clone());
            }
        }
        Ok(out)
    }

    /// Boxes violating `2^{l − Σ k_u} > φ_min(J)`, the strict form of
    /// `Σ k_u ≤ l + log₂(1/φ_min(J))` that the points themselves force.
    pub fn box_index_violations(&self) -> Result<Vec<Vec<u32>>> {
        let mut out = Vec::new();
        for k in self.boxes.keys() {
            if cmp_margin(&pow2(self.l as i64 - sum_k(k)), &self.phi_min_j)?.is_le() {
                out.push(k.clone());
            }
        }
        Ok(out)
    }

    /// CSV with columns `k_1..k_l,count,partial_sum`.
    pub fn to_csv(&self, digits: u32) -> String {
        let mut s = String::new();
        for u in 1..=self.l {
            let _ = write!(s, "k_{u},");
        }
        s.push_str("count,partial_sum\n");
        for (k, b) in &self.boxes {
            for ku in k {
                let _ = write!(s, "{ku},");
            }
            let _ = writeln!(s, "{},{}", b.count, b.partial_sum.to_decimal(digits));
        }
        s
    }
}

fn sum_k(k: &[u32]) -> i64 {
    k.iter().map(|&x| x as i64).sum()
}

fn pow2(e: i64) -> CertifiedReal {
    let p = BigInt::one() << e.unsigned_abs();
    CertifiedReal::from_ratio(&if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthPoint {
    pub j_max: u64,
    pub sum: Ball,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport {
    pub points: Vec<GrowthPoint>,
    /// Fit of `log sum` against `log J`; the slope estimates the exponent.
    pub fit: LineFit<f64>,
}

/// Least-squares fit of `log recip_product_sum(M, J)` against `log J`.
pub fn growth_fit(m: &RealMatrix, j_list: &[u64], opts: &SumOptions) -> Result<GrowthReport> {
    if j_list.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} values of J, need at least 3",
            j_list.len()
        )));
    }
    if j_list.windows(2).any(|w| w[0] >= w[1]) || j_list[0] == 0 {
        return Err(Error::InvalidArgument(
            "J values must be positive and increasing".into(),
        ));
    }
    let points = j_list
        .iter()
        .map(|&j| recip_product_sum(m, j, opts).map(|sum| GrowthPoint { j_max: j, sum }))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|p| (p.j_max as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.sum.mid_f64().ln()).collect();
    let fit = least_squares(&xs, &ys, 3)?;
    Ok(GrowthReport { points, fit })
}

impl GrowthReport {
    /// CSV with columns `J,sum,log_J,log_sum`.
    pub fn to_csv(&self, digits: u32) -> String {
        let mut s = String::from("J,sum,log_J,log_sum\n");
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{},{:.12},{:.12}",
                p.j_max,
                p.sum.to_decimal(digits),
                (p.j_max as f64).ln(),
                p.sum.mid_f64().ln()
            );
        }
        s
    }
}

/// `sum / (J ln J)`, the normalized size of a reciprocal sum.
pub fn normalized_growth(sum: &Ball, j_max: u64) -> f64 {
    let j = j_max as f64;
    sum.mid_f64() / (j * j.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Surd;

    fn col(values: &[Surd]) -> RealMatrix {
        RealMatrix::column(values.to_vec()).unwrap()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn sqrt(d: u64) -> Surd {
        Surd::sqrt(d).unwrap()
    }

    /// Independent double-precision sum.
    fn naive_sum(x: f64, j_max: i64) -> f64 {
        (1..=j_max)
            .map(|j| {
                let y = j as f64 * x;
                2.0 / (y - y.round()).abs()
            })
            .sum()
    }

    #[test]
    fn sqrt2_small_sums() {
        let m = col(&[sqrt(2)]);
        let s = recip_product_sum(&m, 1, &SumOptions::default()).unwrap();
        assert!((s.mid_f64() - 4.8284271).abs() < 1e-7);
        let s = recip_product_sum(&m, 3, &SumOptions::default()).unwrap();
        assert!((s.mid_f64() - 24.7279221).abs() < 1e-6);
        assert!(s.radius_f64() <= 1e-9);
        let s = recip_product_sum(&m, 200, &SumOptions::default()).unwrap();
        let naive = naive_sum(2f64.sqrt(), 200);
        assert!(
            (s.mid_f64() - naive).abs() < 1e-11 * naive,
            "{} vs {naive}",
            s.mid_f64()
        );
    }

    #[test]
    fn rational_rows_hit_zero_denominator() {
        let m = col(&[Surd::from_ratio(&r(1, 2))]);
        assert_eq!(
            recip_product_sum(&m, 2, &SumOptions::default()).unwrap_err(),
            Error::ZeroDenominator { j: vec![2] }
        );
    }

    #[test]
    fn mixed_rows_and_columns() {
        // One row (√2, √3): j·row = j₁√2 + j₂√3 is never an integer.
        let m = RealMatrix::from_surds(vec![vec![sqrt(2), sqrt(3)]]).unwrap();
        let s = recip_product_sum(&m, 4, &SumOptions::default()).unwrap();
        let mut naive = 0.0;
        for a in -4i64..=4 {
            for b in -4i64..=4 {
                if (a, b) != (0, 0) {
                    let y = a as f64 * 2f64.sqrt() + b as f64 * 3f64.sqrt();
                    naive += 1.0 / (y - y.round()).abs();
                }
            }
        }
        assert!((s.mid_f64() - naive).abs() < 1e-8 * naive);
    }

    #[test]
    fn packing_bound_examples() {
        let b = packing_bound(&PhiSpec::new(r(1, 4), PhiShape::Reciprocal), 1, 3).unwrap();
        assert_eq!(b, r(384, 1));
        let b = packing_bound(&PhiSpec::new(r(1, 1), PhiShape::ReciprocalSquare), 2, 2).unwrap();
        assert_eq!(b, r(1536, 1));
        let b = packing_bound(&PhiSpec::new(r(1, 2), PhiShape::Constant), 1, 1).unwrap();
        assert_eq!(b, r(16, 1));
        let e = packing_bound(&PhiSpec::new(r(2, 1), PhiShape::Reciprocal), 1, 1).unwrap_err();
        assert!(matches!(e, Error::PhiOutOfRange(_)));
    }

    #[test]
    fn floor_log2_certified() {
        let x = CertifiedReal::from_ratio(&r(1, 12));
        assert_eq!(floor_log2_recip(&x).unwrap(), 3);
        let x = CertifiedReal::from_ratio(&r(1, 8));
        assert_eq!(floor_log2_recip(&x).unwrap(), 3);
        // 3 − 2√2 ≈ 0.1716, 1/x ≈ 5.83
        let x: CertifiedReal = sqrt(2).mul_int(&2.into()).dist_nearest().into();
        assert_eq!(floor_log2_recip(&x).unwrap(), 2);
        let b = x.to_ball(128);
        assert_eq!(floor_log2_recip(&b.into()).unwrap(), 2);
    }

    #[test]
    fn sqrt2_profile() {
        let m = col(&[sqrt(2)]);
        let opts = ProfileOptions {
            keep_members: true,
            ..Default::default()
        };
        let p = dyadic_profile(&m, 3, &opts).unwrap();
        let counts: Vec<(u32, u64)> = p.boxes.iter().map(|(k, s)| (k[0], s.count)).collect();
        assert_eq!(counts, vec![(1, 3), (2, 1), (3, 2)]);
        assert_eq!(p.total_count(), 6);
        assert!(p.excluded.is_empty());
        assert!((p.phi_min_j.to_f64() - 0.1715729).abs() < 1e-7);
        assert!(p.packing_violations().unwrap().is_empty());
        assert!(p.box_index_violations().unwrap().is_empty());
        let csv = p.to_csv(6);
        assert!(csv.starts_with("k_1,count,partial_sum\n1,3,"));
    }

    #[test]
    fn profile_flags_rational_zeros() {
        let m = col(&[Surd::from_ratio(&r(1, 3))]);
        let p = dyadic_profile(&m, 3, &ProfileOptions::default()).unwrap();
        assert_eq!(p.excluded, vec![vec![-3], vec![3]]);
        assert_eq!(p.total_count(), 4);
        assert!(p.phi_min_j.is_zero());
    }

    #[test]
    fn majorant_dominates() {
        let m = col(&[sqrt(2), sqrt(3)]);
        let opts = SumOptions::default();
        let s = recip_product_sum(&m, 30, &opts).unwrap();
        let t = sign_flip_majorant(&m, 30, &opts).unwrap();
        assert!(s.upper_f64() <= t.lower_f64());
    }

    #[test]
    fn growth_needs_three_points() {
        let m = col(&[sqrt(2)]);
        let e = growth_fit(&m, &[10], &SumOptions::default()).unwrap_err();
        assert!(matches!(e, Error::InsufficientData(_)));
        let g = growth_fit(&m, &[10, 100, 1000], &SumOptions::default()).unwrap();
        assert!((g.fit.slope - 1.0).abs() < 0.3);
        assert!(g.to_csv(4).lines().count() == 4);
    }
}
