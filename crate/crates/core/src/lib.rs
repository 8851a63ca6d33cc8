//! Fourier-mode laboratory for the one-dimensional cubic Schrödinger equation
//! with Dirac-comb initial data `sum_k alpha_k delta(x - k)`.
//!
//! The numerical core is generic over the scalar type (`f32` or `f64`); the
//! aliases at the crate root fix `f64`, which every tolerance in the test suite
//! assumes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod explicit;
pub mod field;
pub mod fixedpoint;
pub mod norms;
pub mod quadrature;
pub mod resonance;
pub mod scalar;
pub mod sequence;

pub use error::{Error, Result};
pub use scalar::Real;
pub use sequence::ComplexSequence;

/// Complex scalar used by the `f64` aliases.
pub type C64 = num_complex::Complex<f64>;
pub type Sequence = sequence::ComplexSequence<f64>;
pub type Table = resonance::ResonanceTable<f64>;
pub type Entry = resonance::ResonanceEntry<f64>;
pub type Trajectory = dynamics::Trajectory<f64>;
pub type SolverConfig = dynamics::SolverConfig<f64>;
