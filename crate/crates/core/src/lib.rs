//! Certified computations around rational points near affine subspaces:
//! reciprocal fractional-part product sums, multiplicative badness profiles,
//! trigonometric majorant counting, and Hausdorff cover sums.

pub mod badness;
pub mod counting;
pub mod covers;
pub mod error;
pub mod fit;
pub mod fracsum;
pub mod matrices;
pub mod numerics;
mod parallel;
pub mod selberg;

pub use error::{Error, Result};
pub use numerics::{cmp_margin, dist_nearest, frac, Ball, CertifiedReal, Precision, Surd};

pub type TrigPolynomialF64 = selberg::TrigPolynomial<f64>;
pub type LineFitF64 = fit::LineFit<f64>;
