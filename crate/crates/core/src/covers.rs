//! Covers of the approximable points on a subspace by the hypercubes
//! `σ(p, q)`, and Hausdorff `s`-cost partial sums over them.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::counting::{count_below, CountOptions, Membership, Mode, PointRange};
use crate::error::{Error, Result};
use crate::matrices::{psi_eval, ApproxFunction, SubspaceMatrix};
use crate::numerics::{cmp_margin, CertifiedReal, Surd};
use crate::parallel::map_blocks;

/// `C = 1 + d · max |A_{u,v}|`, rounded up to four decimals, and at least
/// `1.0001`.
///
/// If `|x − a/q| < ψ(q)/q` then each coordinate of `(1, a/q) · Ã` lies within
/// `d · max|A| · ψ(q)/q` of `x̃ · Ã`, which gives `‖ã · Ã‖ < C ψ(q)`.
pub fn subspace_constant_c(s: &SubspaceMatrix) -> BigRational {
    let a = s.a();
    let mut max = Surd::from_int(0);
    for u in 0..a.rows() {
        for v in 0..a.cols() {
            let x = a.get(u, v).value().abs();
            if x.cmp_value(&max).is_gt() {
                max = x;
            }
        }
    }
    let scale = BigInt::from(10_000u32);
    let c = max
        .mul_int(&BigInt::from(s.d()))
        .add_int(&BigInt::one())
        .mul_int(&scale)
        .ceil();
    let c = BigRational::new(c, scale);
    c.max(BigRational::new(10_001.into(), 10_000.into()))
}

/// The hypercube `{x : |x − a/q| < ψ(q)/q}` attached to one admissible `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverBox {
    pub q: u64,
    pub a: Vec<i64>,
    /// `2ψ(q)/q`.
    pub side: CertifiedReal,
    pub center: Vec<BigRational>,
}

/// All boxes at one `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaBoxes {
    pub q: u64,
    /// `C ψ(q)`, the threshold used.
    pub delta: CertifiedReal,
    /// `C ψ(q) ≥ 1/2`, so every `a` passes off exact ties.
    pub saturated: bool,
    pub boxes: Vec<CoverBox>,
}

struct Level {
    psi: CertifiedReal,
    delta: CertifiedReal,
    saturated: bool,
}

fn level(psi: &ApproxFunction, c: &BigRational, q: u64, prec: u32) -> Result<Level> {
    let value = psi_eval(psi, q, prec)?;
    let delta = value.mul_ratio(c);
    let half = CertifiedReal::from_ratio(&BigRational::new(1.into(), 2.into()));
    let saturated = !delta.is_zero() && cmp_margin(&delta, &half).is_ok_and(|o| o.is_ge());
    Ok(Level {
        psi: value,
        delta,
        saturated,
    })
}

fn ball_precision(opts: &CountOptions) -> crate::numerics::Precision {
    opts.precision.at_least(256)
}

/// The `a ∈ {1..q}^d` with `‖(q, a) · Ã‖ < C ψ(q)`, in lexicographic order.
pub fn nonempty_sigma_boxes(
    s: &SubspaceMatrix,
    psi: &ApproxFunction,
    q: u64,
    opts: &CountOptions,
) -> Result<SigmaBoxes> {
    let c = subspace_constant_c(s);
    let points = PointRange::new(s, Mode::A, q, opts.budget)?;
    ball_precision(opts).ladder(|prec| {
        let lv = level(psi, &c, q, prec)?;
        let mut boxes = Vec::new();
        if !lv.delta.is_zero() {
            let member =
                Membership::new(s, &lv.delta, opts.precision.at_least(prec), opts.strategy);
            let parts = map_blocks(0..points.total(), opts.block, |r| {
                let mut found = Vec::new();
                points.for_each(r, |pt| {
                    if member.contains(pt)? {
                        found.push(pt[1..].to_vec());
                    }
                    Ok(())
                })?;
                Ok(found)
            })?;
            let side = lv
                .psi
                .mul_ratio(&BigRational::new(2.into(), BigInt::from(q)));
            let qr = BigInt::from(q);
            for a in parts.into_iter().flatten() {
                let center = a
                    .iter()
                    .map(|&x| BigRational::new(x.into(), qr.clone()))
                    .collect();
                boxes.push(CoverBox {
                    q,
                    a,
                    side: side.clone(),
                    center,
                });
            }
        }
        Ok(SigmaBoxes {
            q,
            delta: lv.delta,
            saturated: lv.saturated,
            boxes,
        })
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverStrategy {
    /// One term per `q`: `𝒜(q, Cψ(q)) (2ψ(q)/q)^s`.
    PerQ,
    /// One term per dyadic block: `𝒩(2^{k+1}, Cψ(2^k)) (2ψ(2^k)/2^k)^s`.
    Dyadic,
}

impl CoverStrategy {
    pub fn name(self) -> &'static str {
        match self {
            CoverStrategy::PerQ => "perq",
            CoverStrategy::Dyadic => "dyadic",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostTerm {
    /// `q` for the per-q route, `k` for the dyadic one.
    pub index: u64,
    pub delta_used: f64,
    pub boxes: u64,
    pub side: f64,
    pub term: f64,
    pub cumulative: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverCost {
    pub strategy: CoverStrategy,
    pub s: f64,
    pub c: BigRational,
    /// First `q` of the range from which every evaluated `Cψ(q)` is below
    /// `1/2`; `None` if the last term is still saturated.
    pub q0: Option<u64>,
    pub partial_sum: f64,
    pub terms: Vec<CostTerm>,
}

impl CoverCost {
    /// CSV with columns `q_or_k,delta_used,boxes,side,term,cumulative`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q_or_k,delta_used,boxes,side,term,cumulative\n");
        for t in &self.terms {
            let _ = writeln!(
                out,
                "{},{:.6e},{},{:.6e},{:.6e},{:.6e}",
                t.index, t.delta_used, t.boxes, t.side, t.term, t.cumulative
            );
        }
        out
    }
}

/// Partial sum of the Hausdorff `s`-cost of the cover over `range`, which
/// holds `q` values for [`CoverStrategy::PerQ`] and exponents `k` for
/// [`CoverStrategy::Dyadic`].
pub fn cover_cost(
    sub: &SubspaceMatrix,
    psi: &ApproxFunction,
    s: f64,
    range: std::ops::RangeInclusive<u64>,
    strategy: CoverStrategy,
    opts: &CountOptions,
) -> Result<CoverCost> {
    let d = sub.d() as f64;
    if s.is_nan() || s <= 0.0 {
        return Err(Error::InvalidArgument("s must be positive".into()));
    }
    if s > d {
        return Err(Error::InvalidArgument(format!(
            "s = {s} exceeds d = {}: the bound is trivially true when s > d",
            sub.d()
        )));
    }
    if strategy == CoverStrategy::Dyadic {
        if !psi.monotone_nonincreasing {
            return Err(Error::NonMonotonePsi);
        }
        if *range.end() >= 62 {
            return Err(Error::InvalidArgument(
                "dyadic exponent k must be below 62".into(),
            ));
        }
    }
    if range.start() > range.end() || (strategy == CoverStrategy::PerQ && *range.start() == 0) {
        return Err(Error::InvalidArgument("empty or invalid range".into()));
    }
    let c = subspace_constant_c(sub);
    let mut terms = Vec::new();
    let mut cumulative = 0.0;
    let mut q0 = None;
    for index in range {
        let (q, size, mode) = match strategy {
            CoverStrategy::PerQ => (index, index, Mode::A),
            CoverStrategy::Dyadic => (1u64 << index, 2u64 << index, Mode::N),
        };
        let lv = ball_precision(opts).ladder(|prec| level(psi, &c, q, prec))?;
        let boxes = if lv.delta.is_zero() {
            PointRange::new(sub, mode, size, opts.budget)?;
            0
        } else {
            ball_precision(opts).ladder(|prec| {
                let lv = level(psi, &c, q, prec)?;
                count_below(
                    sub,
                    mode,
                    size,
                    &lv.delta,
                    &CountOptions {
                        precision: opts.precision.at_least(prec),
                        ..*opts
                    },
                )
            })?
        };
        if lv.saturated {
            q0 = None;
        } else if q0.is_none() {
            q0 = Some(q);
        }
        let side = 2.0 * lv.psi.to_f64() / q as f64;
        let term = if boxes == 0 {
            0.0
        } else {
            boxes as f64 * side.powf(s)
        };
        cumulative += term;
        terms.push(CostTerm {
            index,
            delta_used: lv.delta.to_f64(),
            boxes,
            side,
            term,
            cumulative,
        });
    }
    Ok(CoverCost {
        strategy,
        s,
        c,
        q0,
        partial_sum: cumulative,
        terms,
    })
}

/// `d − (νn − 1)/(ν + 1)`, the dimension bound for `ψ(q) = q^{−ν}`.
pub fn dimension_bound(nu: &BigRational, n: usize, d: usize) -> Result<BigRational> {
    if d == 0 || d >= n {
        return Err(Error::DimensionMismatch(format!(
            "need 1 ≤ d < n, got n = {n}, d = {d}"
        )));
    }
    let n_r = BigRational::from_integer(BigInt::from(n));
    if nu * &n_r < BigRational::one() {
        return Err(Error::NuTooSmall(format!("nu = {nu} is below 1/n = 1/{n}")));
    }
    Ok(BigRational::from_integer(BigInt::from(d))
        - (nu * n_r - BigRational::one()) / (nu + BigRational::one()))
}

/// [`dimension_bound`] in floating point.
pub fn dimension_bound_f64(nu: f64, n: usize, d: usize) -> f64 {
    d as f64 - (nu * n as f64 - 1.0) / (nu + 1.0)
}
