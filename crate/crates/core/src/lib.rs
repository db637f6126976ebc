//! Flux/mmf networks on oriented 2-complexes embedded in R^3.
//!
//! The crate models triangulated surfaces ([`complex::OrientedComplex2`]),
//! builds their region dual multigraph by sliding across edge fans
//! ([`tag`]), and solves linear flux/mmf networks on them two independent
//! ways ([`network`]), with spanning-tree identities ([`dual_network`]) and
//! an exact-rational verification oracle ([`oracle`]) cross-checking every
//! topological claim. File formats and exports live in [`io`].
//!
//! Numeric code is generic over the scalar: geometry and solvers take any
//! [`scalar::Real`] (`f32`/`f64`), the oracle works in [`Rational`]. The
//! aliases below fix the `f64` instantiations the CLI uses.

pub mod complex;
pub mod dual_network;
pub mod fixtures;
pub mod geometry;
pub mod io;
pub mod matrix;
pub mod network;
pub mod oracle;
pub mod scalar;
pub mod sign_matrix;
pub mod tag;
pub mod vec3;

/// Exact rational scalar used throughout the oracle.
pub type Rational = num_rational::BigRational;

/// Dense matrix of exact rationals.
pub type RationalMatrix = matrix::Matrix<Rational>;

/// Double-precision complex, the default instantiation.
pub type Complex64 = complex::OrientedComplex2<f64>;

/// Double-precision chain.
pub type Chain64 = complex::CellChain<f64>;

/// Double-precision point.
pub type Point64 = vec3::Vec3<f64>;

/// Double-precision device table.
pub type Device64 = network::DeviceSpec<f64>;

/// Double-precision network solution.
pub type Solution64 = network::NetworkSolution<f64>;
