//! Exact intersection numbers `⟨κ(b) Π τ_{d_i}⟩^Θ_g` of Norbury's Θ class
//! with ψ and κ classes, super Weil-Petersson volume polynomials, the
//! associated Virasoro/KdV structure, and the kernel calculus behind the
//! volume recursion.
//!
//! The numerical core is generic over [`Scalar`]; [`Rational`] is the type
//! every exact computation uses, and the aliases below fix it.

pub mod combinatorics;
pub mod correlator;
pub mod error;
pub mod kernel;
pub mod scalar;
pub mod tau;
pub mod volumes;

pub use combinatorics::{MultiIndex, ShiftMode};
pub use correlator::{CorrelatorKey, Strategy};
pub use error::{Error, Result};
pub use scalar::Scalar;

/// Arbitrary-precision rational, the value type of every correlator.
pub type Rational = num_rational::BigRational;

/// Correlator engine over exact rationals.
pub type Engine = correlator::Engine<Rational>;
/// Correlator engine over `f64`, for numerical comparisons only.
pub type FloatEngine = correlator::Engine<f64>;
pub type VolumePolynomial = volumes::VolumePolynomial<Rational>;
pub type TruncatedSeries = tau::TruncatedSeries<Rational>;
pub type DifferentialOperator = tau::DifferentialOperator<Rational>;
pub type HPolynomial = kernel::HPolynomial<Rational>;
pub type Coefficients = combinatorics::Coefficients<Rational>;
