use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel parameters: order `nu` of the Bessel factor and scale `theta`.
///
/// The validity domain is `|nu| < 1/2`, `theta > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub nu: f64,
    pub theta: f64,
}

impl Params {
    pub fn new(nu: f64, theta: f64) -> Result<Self> {
        if !nu.is_finite() || nu.abs() >= 0.5 {
            return Err(Error::Domain(format!("|nu| must be < 1/2, got nu = {nu}")));
        }
        if !theta.is_finite() || theta <= 0.0 {
            return Err(Error::Domain(format!("theta must be > 0, got {theta}")));
        }
        Ok(Self { nu, theta })
    }

    /// Edge exponent `nu + 1/2` of the solutions at `t = +-1`.
    pub fn edge_exponent(&self) -> f64 {
        self.nu + 0.5
    }

    /// Order of the Gegenbauer family matched to the edge weight.
    pub fn gegenbauer_order(&self) -> f64 {
        -self.nu
    }

    /// Series and Painleve anchor machinery needs `nu != 0`.
    pub fn require_nonzero_nu(&self, what: &str) -> Result<()> {
        if self.nu.abs() < 1e-8 {
            return Err(Error::Unsupported(format!("{what} requires nu != 0")));
        }
        Ok(())
    }
}
