use serde::{Deserialize, Serialize};

use crate::error::{KappaError, Result};

/// Numeric tolerances shared by the spectral, quadrature and special-function code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericConfig {
    /// Eigenvalues of the scaled tridiagonal operator at or below
    /// `eig_zero_tol * spectral_radius` are treated as the constant mode.
    pub eig_zero_tol: f64,
    pub quad_rel_tol: f64,
    pub special_fn_tol: f64,
}

impl Default for NumericConfig {
    fn default() -> Self {
        Self {
            eig_zero_tol: 1e-10,
            quad_rel_tol: 1e-8,
            special_fn_tol: 1e-12,
        }
    }
}

impl NumericConfig {
    pub fn new(eig_zero_tol: f64, quad_rel_tol: f64, special_fn_tol: f64) -> Result<Self> {
        let cfg = Self {
            eig_zero_tol,
            quad_rel_tol,
            special_fn_tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eig_zero_tol", self.eig_zero_tol),
            ("quad_rel_tol", self.quad_rel_tol),
            ("special_fn_tol", self.special_fn_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(KappaError::InvalidArgument(format!(
                    "{name} must be a positive finite number, got {v}"
                )));
            }
        }
        Ok(())
    }
}
