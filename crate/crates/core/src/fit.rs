//! Ordinary least squares on a line, generic over the float type.

use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    /// `y_i − (slope · x_i + intercept)`, in input order.
    pub residuals: Vec<T>,
}

impl<T: Float> LineFit<T> {
    pub fn max_abs_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |m, r| m.max(r.abs()))
    }
}

/// Fits `y ≈ slope · x + intercept`. Needs `min_points` points and at least
/// two distinct abscissae.
pub fn least_squares<T: Float>(xs: &[T], ys: &[T], min_points: usize) -> Result<LineFit<T>> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch("x and y lengths differ".into()));
    }
    if xs.len() < min_points.max(2) {
        return Err(Error::InsufficientData(format!(
            "{} points, need at least {}",
            xs.len(),
            min_points.max(2)
        )));
    }
    let n = T::from(xs.len()).expect("length fits");
    let mx = xs.iter().fold(T::zero(), |a, &x| a + x) / n;
    let my = ys.iter().fold(T::zero(), |a, &y| a + y) / n;
    let (mut sxx, mut sxy) = (T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
    }
    if sxx == T::zero() {
        return Err(Error::InsufficientData("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| y - (slope * x + intercept))
        .collect();
    Ok(LineFit {
        slope,
        intercept,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let f = least_squares(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0], 3).unwrap();
        assert!((f.slope - 2.0f64).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!(f.max_abs_residual() < 1e-12);
        let g = least_squares(&[1.0f32, 2.0, 3.0], &[3.0, 5.0, 7.0], 3).unwrap();
        assert!((g.slope - 2.0).abs() < 1e-5);
    }

    #[test]
    fn too_few_points() {
        let e = least_squares(&[1.0], &[1.0], 3).unwrap_err();
        assert!(matches!(e, Error::InsufficientData(_)));
        let e = least_squares(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], 3).unwrap_err();
        assert!(matches!(e, Error::InsufficientData(_)));
    }
}
