//! Szegő- and zeta-regularized determinants of zeroth-order operators.
//!
//! The core math is generic over [`Real`] (`f32`/`f64`); the aliases below fix
//! the double-precision instantiation used by the CLI and the test suites.

// Negated float comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anomaly;
pub mod circle;
pub mod detfit;
pub mod error;
pub mod linalg;
pub mod scalar;
pub mod spec;
pub mod symb2d;
pub mod zeta;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

pub use num_complex::Complex64;

pub type FourierSeries = circle::FourierSeries<f64>;
pub type MultiplierExpansion = circle::MultiplierExpansion<f64>;
pub type CircleOperator = circle::CircleOperator<f64>;
pub type ZollRegularizer = circle::ZollRegularizer<f64>;
pub type Matrix = linalg::CMatrix<f64>;
pub type AsymptoticFit = detfit::AsymptoticFit<f64>;
pub type TailModel = zeta::TailModel<f64>;
pub type DiagonalSequence = zeta::DiagonalSequence<f64>;
pub type FinitePartResult = zeta::FinitePartResult<f64>;
pub type ZetaParams = zeta::ZetaParams<f64>;
pub type ExperimentReport = anomaly::ExperimentReport<f64>;
pub type AnomalyParams = anomaly::AnomalyParams<f64>;
pub type Symbol2D = symb2d::Symbol2D<f64>;

pub use anomaly::LocalityFunctional;
pub use circle::ZeroMode;
pub use detfit::SzegoParams;
