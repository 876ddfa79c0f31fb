//! Exact algebra for Yang-Baxter integrable spin chains.
//!
//! Scalars are truncated multivariate jets over exact rationals, so every
//! spectral derivative and every first-order deformation coefficient is an
//! exact coefficient extraction. Operators are dense matrices on tensor powers
//! of the site space with leg 1 as the most significant index digit.

pub mod chain;
pub mod charges;
pub mod deform;
pub mod error;
pub mod hp;
pub mod jets;
pub mod magnon;
pub mod rational;
pub mod rmatrix;
pub mod sampling;
pub mod scalar;
pub mod tensor;

pub use error::{LaxError, Result};
pub use jets::{Jet, JetAlgebra, JetScalar};
pub use rational::{q, qi, Rat};
pub use rmatrix::Model;

pub use scalar::Scalar;
pub use tensor::TensorOperator;
