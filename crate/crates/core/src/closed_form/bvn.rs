//! Closed forms for the bivariate normal family and its joint CDF.

use std::f64::consts::PI;

use super::quadrature::integrate;
use super::PopulationMoments;
use crate::error::{KappaError, Result};

fn check(theta: f64, sigma1: f64, sigma2: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&theta) {
        return Err(KappaError::ThetaOutOfRange {
            family: "normal".into(),
            theta,
            lo: -1.0,
            hi: 1.0,
        });
    }
    if !(sigma1 > 0.0 && sigma2 > 0.0) || !sigma1.is_finite() || !sigma2.is_finite() {
        return Err(KappaError::Domain(format!(
            "standard deviations must be positive, got {sigma1} and {sigma2}"
        )));
    }
    Ok(())
}

fn unit_kappa(t: f64) -> f64 {
    (t * t.asin() + (1.0 - t * t).sqrt() + 1.0 - t * (0.5 * t).asin() - (4.0 - t * t).sqrt()) / PI
}

/// κ(θ) = (σ₁σ₂/π)[θ·asin θ + √(1−θ²) + 1 − θ·asin(θ/2) − √(4−θ²)].
pub fn kappa_bvn(theta: f64, sigma1: f64, sigma2: f64) -> Result<f64> {
    check(theta, sigma1, sigma2)?;
    Ok(sigma1 * sigma2 * unit_kappa(theta))
}

/// κ″(θ) = (σ₁σ₂/π)[1/√(1−θ²) − 1/√(4−θ²)].
pub fn kappa_bvn_second_derivative(theta: f64, sigma1: f64, sigma2: f64) -> Result<f64> {
    check(theta, sigma1, sigma2)?;
    if theta.abs() >= 1.0 {
        return Err(KappaError::Domain(format!("κ″ is unbounded at θ = {theta}")));
    }
    let t2 = theta * theta;
    Ok(sigma1 * sigma2 / PI * (1.0 / (1.0 - t2).sqrt() - 1.0 / (4.0 - t2).sqrt()))
}

pub fn bvn_moments(theta: f64, sigma1: f64, sigma2: f64) -> Result<PopulationMoments> {
    check(theta, sigma1, sigma2)?;
    let ss = sigma1 * sigma2;
    Ok(PopulationMoments {
        mu1: 2.0 * sigma1 / PI.sqrt(),
        mu2: 2.0 * sigma2 / PI.sqrt(),
        mu3: 2.0 * ss / PI * (theta * (0.5 * theta).asin() + (4.0 - theta * theta).sqrt()),
        mu12: 4.0 * ss / PI * (theta * theta.asin() + (1.0 - theta * theta).sqrt()),
    })
}

/// `Φ₂(x, y; ρ) − Φ(x)Φ(y)` for standardized margins, |ρ| < 1.
///
/// Uses `∂Φ₂/∂ρ = φ₂` and the substitution ρ = sin s, which leaves the smooth
/// integrand `exp(−(x² − 2xy·sin s + y²)/(2cos²s)) / 2π` on [0, asin ρ].
pub fn bvn_cdf_excess(x: f64, y: f64, rho: f64, tol: f64) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    let xx = x * x + y * y;
    let xy = 2.0 * x * y;
    integrate(
        |s| {
            let c = s.cos();
            (-(xx - xy * s.sin()) / (2.0 * c * c)).exp()
        },
        0.0,
        rho.asin(),
        tol,
        1e-300,
    ) / (2.0 * PI)
}
