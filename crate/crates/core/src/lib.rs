//! Numerical solution of the finite-interval integral equation with kernel
//! `w^nu K_nu(theta w)` by three independent routes, plus the associated
//! Painleve III transcendent and its connection data.

// `!(x > y)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod embedding;
pub mod error;
pub mod latta;
pub mod ode;
pub mod painleve;
pub mod params;
pub mod quadrature;
pub mod solver;
pub mod specfun;
pub mod spheroidal;

pub use error::{Error, Result};
pub use params::Params;
