//! Subspace data `(α₀, A, Ã)` and approximation functions.

mod config;
mod psi;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use config::{
    parse_decimal, parse_matrix, parse_psi, parse_subspace, serialize_matrix, serialize_psi,
    serialize_subspace,
};
pub use psi::{psi_eval, ApproxFunction, PsiKind};

use crate::error::{Error, Result};
use crate::numerics::{dist_nearest, Ball, CertifiedReal, Surd};

/// Where an entry came from; kept so configs serialize back unchanged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EntrySource {
    Surd,
    /// A decimal literal, taken as the exact value, with the working
    /// precision requested for it.
    Dec {
        text: String,
        bits: u32,
    },
}

/// One real entry of a matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    value: Surd,
    source: EntrySource,
}

impl Entry {
    pub fn dec(text: &str, bits: u32) -> Result<Self> {
        let value = Surd::from_ratio(&parse_decimal(text)?);
        Ok(Entry {
            value,
            source: EntrySource::Dec {
                text: text.trim().to_string(),
                bits,
            },
        })
    }

    pub fn value(&self) -> &Surd {
        &self.value
    }

    pub fn source(&self) -> &EntrySource {
        &self.source
    }

    pub fn bits_hint(&self) -> u32 {
        match &self.source {
            EntrySource::Surd => 0,
            EntrySource::Dec { bits, .. } => *bits,
        }
    }

    fn negated(&self) -> Entry {
        let source = match &self.source {
            EntrySource::Surd => EntrySource::Surd,
            EntrySource::Dec { text, bits } => EntrySource::Dec {
                text: match text.strip_prefix('-') {
                    Some(rest) => rest.to_string(),
                    None => format!("-{text}"),
                },
                bits: *bits,
            },
        };
        Entry {
            value: -&self.value,
            source,
        }
    }
}

impl From<Surd> for Entry {
    fn from(value: Surd) -> Self {
        Entry {
            value,
            source: EntrySource::Surd,
        }
    }
}

/// Dense row-major matrix of real entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Entry>,
}

impl RealMatrix {
    pub fn from_rows(rows: Vec<Vec<Entry>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if nrows == 0 || ncols == 0 {
            return Err(Error::DimensionMismatch("matrix must be nonempty".into()));
        }
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        Ok(RealMatrix {
            rows: nrows,
            cols: ncols,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_surds(rows: Vec<Vec<Surd>>) -> Result<Self> {
        Self::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(Entry::from).collect())
                .collect(),
        )
    }

    /// A single-column matrix `[x₁; x₂; …]`.
    pub fn column(values: Vec<Surd>) -> Result<Self> {
        Self::from_surds(values.into_iter().map(|v| vec![v]).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, u: usize, v: usize) -> &Entry {
        &self.entries[u * self.cols + v]
    }

    pub fn row(&self, u: usize) -> &[Entry] {
        &self.entries[u * self.cols..(u + 1) * self.cols]
    }

    pub fn col(&self, v: usize) -> Vec<&Entry> {
        (0..self.rows).map(|u| self.get(u, v)).collect()
    }

    pub fn row_values(&self, u: usize) -> Vec<Surd> {
        self.row(u).iter().map(|e| e.value.clone()).collect()
    }

    pub fn col_values(&self, v: usize) -> Vec<Surd> {
        self.col(v).into_iter().map(|e| e.value.clone()).collect()
    }

    pub fn is_rational_row(&self, u: usize) -> bool {
        self.row(u).iter().all(|e| e.value.is_rational())
    }

    /// Every entry negated.
    pub fn neg(&self) -> RealMatrix {
        RealMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(Entry::negated).collect(),
        }
    }

    /// Row `u` multiplied by `sign`.
    pub fn with_row_sign(&self, u: usize, negate: bool) -> RealMatrix {
        let mut out = self.clone();
        if negate {
            for v in 0..self.cols {
                out.entries[u * self.cols + v] = self.get(u, v).negated();
            }
        }
        out
    }

    pub fn bits_hint(&self) -> u32 {
        self.entries.iter().map(Entry::bits_hint).max().unwrap_or(0)
    }

    /// One linear form per row, for evaluating `j · row_u`.
    pub fn row_forms(&self) -> Vec<LinearForm> {
        (0..self.rows)
            .map(|u| LinearForm::new(&self.row_values(u)))
            .collect()
    }
}

/// Evaluates `Σ cᵢ xᵢ` for a fixed list of surds `xᵢ` and integer
/// coefficients `cᵢ`.
///
/// Entries are grouped by radicand. When at most one radicand survives in a
/// combination the result is an exact surd; otherwise it is a ball.
#[derive(Clone, Debug)]
pub struct LinearForm {
    denom: BigInt,
    rational: Vec<BigInt>,
    irrational: Vec<BigInt>,
    group: Vec<Option<usize>>,
    radicands: Vec<BigInt>,
}

/// `√d` as a ball with `prec` fractional bits.
pub(crate) fn sqrt_ball(d: &BigInt, prec: u32) -> Ball {
    let t = (d << (2 * prec)).sqrt();
    Ball::new(t, BigInt::one(), prec)
}

impl LinearForm {
    pub fn new(entries: &[Surd]) -> Self {
        let denom = entries.iter().fold(BigInt::one(), |acc, e| acc.lcm(e.r()));
        let mut radicands: Vec<BigInt> = Vec::new();
        let mut index: BTreeMap<BigInt, usize> = BTreeMap::new();
        let mut group = Vec::with_capacity(entries.len());
        let mut rational = Vec::with_capacity(entries.len());
        let mut irrational = Vec::with_capacity(entries.len());
        for e in entries {
            let scale = &denom / e.r();
            rational.push(e.p() * &scale);
            irrational.push(e.q() * &scale);
            if e.is_rational() {
                group.push(None);
            } else {
                let next = radicands.len();
                let g = *index.entry(e.d().clone()).or_insert(next);
                if g == next {
                    radicands.push(e.d().clone());
                }
                group.push(Some(g));
            }
        }
        LinearForm {
            denom,
            rational,
            irrational,
            group,
            radicands,
        }
    }

    pub fn len(&self) -> usize {
        self.rational.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rational.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.radicands.is_empty()
    }

    fn sums(&self, coeffs: &[i64]) -> (BigInt, Vec<BigInt>) {
        debug_assert_eq!(coeffs.len(), self.len());
        let mut num = BigInt::zero();
        let mut irr = vec![BigInt::zero(); self.radicands.len()];
        for (i, &c) in coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let c = BigInt::from(c);
            num += &self.rational[i] * &c;
            if let Some(g) = self.group[i] {
                irr[g] += &self.irrational[i] * &c;
            }
        }
        (num, irr)
    }

    /// The exact value when at most one radicand survives.
    pub fn eval_exact(&self, coeffs: &[i64]) -> Option<Surd> {
        let (num, irr) = self.sums(coeffs);
        let mut live = irr.iter().enumerate().filter(|(_, b)| !b.is_zero());
        match (live.next(), live.next()) {
            (None, _) => Some(Surd::from_reduced(
                num,
                BigInt::zero(),
                BigInt::zero(),
                self.denom.clone(),
            )),
            (Some((g, b)), None) => Some(Surd::from_reduced(
                num,
                b.clone(),
                self.radicands[g].clone(),
                self.denom.clone(),
            )),
            _ => None,
        }
    }

    /// `√d` for every radicand of the form, at `prec` bits.
    pub fn sqrt_table(&self, prec: u32) -> Vec<Ball> {
        self.radicands.iter().map(|d| sqrt_ball(d, prec)).collect()
    }

    /// Ball enclosure with `prec` fractional bits.
    pub fn eval_ball(&self, coeffs: &[i64], prec: u32) -> Ball {
        let (num, irr) = self.sums(coeffs);
        self.assemble(&num, &irr, &self.sqrt_table(prec), prec)
    }

    fn assemble(&self, num: &BigInt, irr: &[BigInt], sqrts: &[Ball], prec: u32) -> Ball {
        let mut mid = num << prec;
        let mut rad = BigInt::zero();
        for (b, s) in irr.iter().zip(sqrts) {
            if !b.is_zero() {
                mid += s.mid() * b;
                rad += s.rad() * b.abs();
            }
        }
        let acc = Ball::new(mid, rad, prec);
        if self.denom.is_one() {
            acc
        } else {
            acc.mul_ratio(&BigRational::new(BigInt::one(), self.denom.clone()))
        }
    }

    /// Ball enclosure using a table from [`LinearForm::sqrt_table`], or the
    /// exact rational value when no radicand survives.
    pub fn eval_with(&self, coeffs: &[i64], sqrts: &[Ball], prec: u32) -> FormValue {
        let (num, irr) = self.sums(coeffs);
        if irr.iter().all(Zero::is_zero) {
            FormValue::Rational(BigRational::new(num, self.denom.clone()))
        } else {
            FormValue::Irrational(self.assemble(&num, &irr, sqrts, prec))
        }
    }

    /// Exact when possible, otherwise a ball at `prec` bits.
    pub fn eval(&self, coeffs: &[i64], prec: u32) -> CertifiedReal {
        match self.eval_exact(coeffs) {
            Some(s) => CertifiedReal::Surd(s),
            None => CertifiedReal::BigFloat(self.eval_ball(coeffs, prec)),
        }
    }
}

/// Result of [`LinearForm::eval_with`].
#[derive(Clone, Debug)]
pub enum FormValue {
    Rational(BigRational),
    /// Provably irrational, so never an integer.
    Irrational(Ball),
}

/// Linear forms together with `√d` tables at one working precision.
#[derive(Clone, Debug)]
pub(crate) struct PreparedForms {
    forms: Vec<LinearForm>,
    tables: Vec<Vec<Ball>>,
    prec: u32,
}

impl PreparedForms {
    pub(crate) fn new(forms: Vec<LinearForm>, prec: u32) -> Self {
        let tables = forms.iter().map(|f| f.sqrt_table(prec)).collect();
        PreparedForms {
            forms,
            tables,
            prec,
        }
    }

    pub(crate) fn prec(&self) -> u32 {
        self.prec
    }

    /// The same forms at another precision.
    pub(crate) fn at(&self, prec: u32) -> PreparedForms {
        PreparedForms::new(self.forms.clone(), prec)
    }

    pub(crate) fn values(&self, j: &[i64]) -> Vec<FormValue> {
        self.forms
            .iter()
            .zip(&self.tables)
            .map(|(f, t)| f.eval_with(j, t, self.prec))
            .collect()
    }

    /// `‖j · row_u‖` for every row; an integer value is a `ZeroDenominator`.
    pub(crate) fn dists(&self, j: &[i64]) -> Result<Vec<Ball>> {
        self.values(j)
            .into_iter()
            .map(|v| match v {
                FormValue::Rational(x) => {
                    if x.is_integer() {
                        Err(Error::ZeroDenominator { j: j.to_vec() })
                    } else {
                        let f = &x - x.floor();
                        let one_minus = BigRational::one() - &f;
                        Ok(Ball::from_ratio(&f.min(one_minus), self.prec))
                    }
                }
                FormValue::Irrational(b) => Ok(b.dist_nearest()),
            })
            .collect()
    }

    /// `{j · row_u}` for every row; an integer value is a `ZeroDenominator`.
    pub(crate) fn fracs(&self, j: &[i64]) -> Result<Vec<Ball>> {
        self.values(j)
            .into_iter()
            .map(|v| match v {
                FormValue::Rational(x) => {
                    if x.is_integer() {
                        Err(Error::ZeroDenominator { j: j.to_vec() })
                    } else {
                        Ok(Ball::from_ratio(&(&x - x.floor()), self.prec))
                    }
                }
                FormValue::Irrational(b) => b.frac(),
            })
            .collect()
    }
}

/// The data of an affine subspace `{(x, (1, x) · Ã)}` with `Ã = (α₀; A)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspaceMatrix {
    n: usize,
    d: usize,
    alpha0: Vec<Entry>,
    a: RealMatrix,
    atilde: RealMatrix,
}

impl SubspaceMatrix {
    pub fn new(n: usize, d: usize, alpha0: Vec<Entry>, a: Vec<Vec<Entry>>) -> Result<Self> {
        if d == 0 || d >= n {
            return Err(Error::DimensionMismatch(format!(
                "need 1 ≤ d < n, got n = {n}, d = {d}"
            )));
        }
        let m = n - d;
        if alpha0.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "alpha0 has length {}, expected n − d = {m}",
                alpha0.len()
            )));
        }
        if a.len() != d || a.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch(format!("A must be {d} × {m}")));
        }
        let mut stacked = vec![alpha0.clone()];
        stacked.extend(a.iter().cloned());
        Ok(SubspaceMatrix {
            n,
            d,
            alpha0,
            a: RealMatrix::from_rows(a)?,
            atilde: RealMatrix::from_rows(stacked)?,
        })
    }

    /// Convenience constructor from exact surds.
    pub fn from_surds(alpha0: Vec<Surd>, a: Vec<Vec<Surd>>) -> Result<Self> {
        let d = a.len();
        let n = d + alpha0.len();
        Self::new(
            n,
            d,
            alpha0.into_iter().map(Entry::from).collect(),
            a.into_iter()
                .map(|r| r.into_iter().map(Entry::from).collect())
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn d(&self) -> usize {
        self.d
    }
    /// `n − d`, the number of columns of `A`.
    pub fn codim(&self) -> usize {
        self.n - self.d
    }
    pub fn alpha0(&self) -> &[Entry] {
        &self.alpha0
    }
    pub fn a(&self) -> &RealMatrix {
        &self.a
    }
    pub fn atilde(&self) -> &RealMatrix {
        &self.atilde
    }

    /// One form per column of `Ã`; evaluating at `ã = (q, a)` gives
    /// `ã · col_v(Ã)`.
    pub fn column_forms(&self) -> Vec<LinearForm> {
        (0..self.codim())
            .map(|v| LinearForm::new(&self.atilde.col_values(v)))
            .collect()
    }

    pub fn bits_hint(&self) -> u32 {
        self.atilde.bits_hint()
    }
}

/// `∏_u ‖j · row_u(M)‖`, evaluated with forms built once by the caller.
pub fn product_dist_forms(forms: &[LinearForm], j: &[i64], prec: u32) -> Result<CertifiedReal> {
    if j.iter().all(|&c| c == 0) {
        return Err(Error::ZeroVectorJ);
    }
    let mut acc = CertifiedReal::from_int(1);
    for form in forms {
        let factor = dist_nearest(&form.eval(j, prec))?;
        if factor.is_zero() {
            return Ok(CertifiedReal::from_int(0));
        }
        acc = acc.mul(&factor, prec);
    }
    Ok(acc)
}

/// `∏_u ‖j · row_u(M)‖`. Exact whenever every factor is a compatible surd;
/// zero exactly when some `j · row_u` is an integer.
pub fn product_dist(m: &RealMatrix, j: &[i64]) -> Result<CertifiedReal> {
    if j.len() != m.cols() {
        return Err(Error::DimensionMismatch(format!(
            "j has length {}, matrix has {} columns",
            j.len(),
            m.cols()
        )));
    }
    product_dist_forms(&m.row_forms(), j, 128.max(m.bits_hint()))
}
