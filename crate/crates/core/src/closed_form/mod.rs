//! Population quantities: κ(θ) in closed form for the bivariate normal and
//! GBED-I families, the exponential integral they need, and a quadrature
//! route through `κ = ∫∫ [F₁₂ − F₁F₂]²` used to cross-check both.

mod bvn;
mod gbed;
pub mod quadrature;
mod special;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::config::NumericConfig;
use crate::error::{KappaError, Result};

pub use bvn::{bvn_cdf_excess, bvn_moments, kappa_bvn, kappa_bvn_second_derivative};

/// The four population means `g(F₁)`, `g(F₂)`, `E[g_{F₁}(X)g_{F₂}(Y)]` and
/// `g(F₁₂)`; κ = ¼(μ₁₂ + μ₁μ₂ − 2μ₃).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationMoments {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu12: f64,
}

impl PopulationMoments {
    pub fn kappa(&self) -> f64 {
        0.25 * (self.mu12 + self.mu1 * self.mu2 - 2.0 * self.mu3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Normal,
    Uniform,
    /// Gumbel's type-I bivariate exponential.
    Exponential,
    Laplace,
    Logistic,
    Chisquare,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Normal,
        Family::Uniform,
        Family::Exponential,
        Family::Laplace,
        Family::Logistic,
        Family::Chisquare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::Uniform => "uniform",
            Family::Exponential => "exponential",
            Family::Laplace => "laplace",
            Family::Logistic => "logistic",
            Family::Chisquare => "chisquare",
        }
    }

    /// Column heading used in power tables.
    pub fn title(self) -> &'static str {
        match self {
            Family::Normal => "Bivariate Normal",
            Family::Uniform => "Bivariate Uniform",
            Family::Exponential => "Bivariate Exponential",
            Family::Laplace => "Bivariate Laplace",
            Family::Logistic => "Bivariate Logistic",
            Family::Chisquare => "Bivariate Chi-square",
        }
    }

    pub fn theta_range(self) -> (f64, f64) {
        match self {
            Family::Exponential => (0.0, 1.0),
            _ => (-1.0, 1.0),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = KappaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" | "bvn" | "gaussian" => Ok(Family::Normal),
            "uniform" => Ok(Family::Uniform),
            "exponential" | "gbed" | "gbed-i" => Ok(Family::Exponential),
            "laplace" => Ok(Family::Laplace),
            "logistic" => Ok(Family::Logistic),
            "chisquare" | "chi-square" | "chisq" => Ok(Family::Chisquare),
            other => Err(KappaError::InvalidArgument(format!("unknown family `{other}`"))),
        }
    }
}

/// A member of one of the six bivariate families. `sigma1`/`sigma2` only
/// affect the normal family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub theta: f64,
    #[serde(default = "one")]
    pub sigma1: f64,
    #[serde(default = "one")]
    pub sigma2: f64,
}

fn one() -> f64 {
    1.0
}

impl FamilySpec {
    pub fn new(family: Family, theta: f64) -> Result<Self> {
        let spec = Self {
            family,
            theta,
            sigma1: 1.0,
            sigma2: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn normal(theta: f64, sigma1: f64, sigma2: f64) -> Result<Self> {
        let spec = Self {
            family: Family::Normal,
            theta,
            sigma1,
            sigma2,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.family.theta_range();
        if !(lo..=hi).contains(&self.theta) {
            return Err(KappaError::ThetaOutOfRange {
                family: self.family.name().into(),
                theta: self.theta,
                lo,
                hi,
            });
        }
        if !(self.sigma1 > 0.0 && self.sigma2 > 0.0 && self.sigma1.is_finite() && self.sigma2.is_finite())
        {
            return Err(KappaError::Domain("sigma1 and sigma2 must be positive".into()));
        }
        Ok(())
    }

    /// Population κ where a closed form exists.
    pub fn kappa(&self) -> Result<f64> {
        self.validate()?;
        match self.family {
            Family::Normal => kappa_bvn(self.theta, self.sigma1, self.sigma2),
            Family::Exponential => kappa_gbed(self.theta),
            other => Err(KappaError::UnsupportedFamily(other.name().into())),
        }
    }
}

/// G(x) = ∫₁^∞ e^{−xt}/t dt, i.e. the exponential integral E₁(x), for x > 0.
pub fn exp_integral_g(x: f64) -> Result<f64> {
    special::exp_integral_g(x, NumericConfig::default().special_fn_tol)
}

/// `eˣ·G(x)`, finite for every x > 0.
pub fn scaled_exp_integral(x: f64) -> Result<f64> {
    special::scaled_exp_integral(x, NumericConfig::default().special_fn_tol)
}

pub fn kappa_gbed(theta: f64) -> Result<f64> {
    gbed::kappa_gbed(theta, NumericConfig::default().special_fn_tol)
}

pub fn kappa_gbed_derivative(theta: f64) -> Result<f64> {
    gbed::kappa_gbed_derivative(theta, NumericConfig::default().special_fn_tol)
}

/// κ from two-dimensional quadrature of the squared CDF excess.
///
/// Normal: standardized domain [−9, 9]², joint CDF excess from
/// [`bvn_cdf_excess`], then scaled by σ₁σ₂. Exponential: [0, 40]² with the
/// GBED-I survival function. Other families have no joint CDF wired in.
pub fn kappa_quadrature_oracle(spec: &FamilySpec, cfg: &NumericConfig) -> Result<f64> {
    spec.validate()?;
    let rel = cfg.quad_rel_tol;
    let abs = 1e-15;
    match spec.family {
        Family::Normal => {
            let theta = spec.theta;
            if theta == 0.0 {
                return Ok(0.0);
            }
            let std = Normal::standard();
            let excess = |x: f64, y: f64| -> f64 {
                if theta.abs() == 1.0 {
                    let (fx, fy) = (std.cdf(x), std.cdf(y));
                    let joint = if theta > 0.0 { fx.min(fy) } else { (fx + fy - 1.0).max(0.0) };
                    joint - fx * fy
                } else {
                    bvn_cdf_excess(x, y, theta, 1e-3 * rel)
                }
            };
            let v = quadrature::integrate_2d(
                |x, y| excess(x, y).powi(2),
                (-9.0, 9.0),
                (-9.0, 9.0),
                rel,
                abs,
            );
            Ok(spec.sigma1 * spec.sigma2 * v)
        }
        Family::Exponential => {
            let theta = spec.theta;
            let v = quadrature::integrate_2d(
                |x, y| {
                    let d = (-(x + y)).exp() * ((-theta * x * y).exp() - 1.0);
                    d * d
                },
                (0.0, 40.0),
                (0.0, 40.0),
                rel,
                abs,
            );
            Ok(v)
        }
        other => Err(KappaError::UnsupportedFamily(other.name().into())),
    }
}
