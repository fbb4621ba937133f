//! Weak Euler approximation of SDEs driven by spherically-symmetric stable
//! processes, with Monte Carlo estimation, exact references and a harness
//! that measures the empirical weak order of convergence.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod euler;
pub mod grids;
pub mod models;
pub mod montecarlo;
pub mod oracle;
pub mod quadrature;
pub mod rates;
pub mod rng;
pub mod stable_rng;
pub mod stats;

pub use error::{Error, Result};
