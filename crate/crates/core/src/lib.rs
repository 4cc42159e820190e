//! Exact computations behind an ultrametric stability bound for torus orbits
//! in representations of `SL_n(Q_p)`.

#![allow(clippy::needless_range_loop)]

pub mod constants;
pub mod error;
pub mod exec;
pub mod group;
pub mod harness;
pub mod linalg;
pub mod modular;
pub mod padic;
pub mod regular;
pub mod reynolds;
pub mod sampling;
pub mod selftest;
pub mod seminorm;
pub mod torus;
pub mod tree;
pub mod ultranorm;

pub use error::{Error, Result};
pub use padic::{PadicScalar, Prime, Rational, Valuation};
