//! Scalar abstractions shared by the dense linear algebra and the chain types.
//!
//! Everything numeric in this crate is written against one of two traits:
//! [`Scalar`] for exact field-like arithmetic (implemented by `f32`, `f64`
//! and [`num_rational::BigRational`]) and [`Real`] for floating-point work
//! that needs square roots, trigonometry and tolerances (`f32`, `f64`).

use num_traits::{Float, FromPrimitive, Num, Signed};
use std::fmt;

/// Field-like scalar: chain coefficients, dense elimination, network solves.
///
/// The blanket impl covers `f32`, `f64`, `BigRational` and the signed
/// integer types (integers are only used where no division occurs).
pub trait Scalar: Num + Signed + Clone + PartialOrd + fmt::Debug + fmt::Display + 'static {}

impl<T> Scalar for T where T: Num + Signed + Clone + PartialOrd + fmt::Debug + fmt::Display + 'static
{}

/// Floating-point scalar for geometry and iterative solvers.
pub trait Real: Scalar + Float + FromPrimitive + std::iter::Sum {}

impl<T> Real for T where T: Scalar + Float + FromPrimitive + std::iter::Sum {}

/// Shorthand for tolerance constants written as `f64` literals.
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("constant representable in any Real type")
}
