//! Floating-point abstraction for everything measured in weights or energies.
//!
//! All real-valued kernels are generic over [`Scalar`] so the same code runs
//! in `f32` and `f64`; counting stays in unsigned integers and never passes
//! through here.

use num_traits::{Float, FromPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar usable by the numeric kernels.
pub trait Scalar:
    Float + FromPrimitive + Sum<Self> + Debug + Display + Send + Sync + 'static
{
    /// Shorthand for lossy conversion out of `f64` constants.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts into every Scalar")
    }
    /// Lossy view as `f64`, for printing and mixed comparisons.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts into f64")
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + Sum<T> + Debug + Display + Send + Sync + 'static
{
}

/// `ln(Σ exp(x_i))` with the usual max shift; empty input gives `-inf`.
pub fn ln_sum_exp<T: Scalar, I: IntoIterator<Item = T>>(terms: I) -> T {
    let xs: Vec<T> = terms.into_iter().filter(|x| *x != T::neg_infinity()).collect();
    let Some(&m) = xs.iter().max_by(|a, b| a.partial_cmp(b).expect("no NaN")) else {
        return T::neg_infinity();
    };
    if m == T::infinity() {
        return m;
    }
    let s: T = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}
