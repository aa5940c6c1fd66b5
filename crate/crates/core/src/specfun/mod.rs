//! Special functions used throughout the crate.

pub mod bessel;
pub mod gamma;
pub mod kernel;
pub mod orthopoly;

pub use bessel::{bessel_i, bessel_k, bessel_k_scaled};
pub use gamma::{gamma_fn, ln_gamma};
pub use kernel::{kernel_eval, kernel_fourier, KernelSplit};
pub use orthopoly::{gegenbauer, gegenbauer_norm, laguerre};
