//! κ(θ) for Gumbel's type-I bivariate exponential distribution, whose joint
//! survival function is `exp(−(x + y + θxy))` on the positive quadrant.

use super::special::scaled_exp_integral;
use crate::error::{KappaError, Result};

// Below this θ the closed form cancels catastrophically (all terms are O(1),
// κ is O(θ²)); the asymptotic expansion of eᵃE₁(a) is used instead.
const SERIES_BELOW: f64 = 0.02;
const SERIES_TERMS: i32 = 24;

fn check(theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(KappaError::ThetaOutOfRange {
            family: "exponential".into(),
            theta,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}

// Series coefficient: κ(θ) = Σ_{k≥2} (−1)ᵏ k! [¼·2⁻ᵏ − ½·4⁻ᵏ] θᵏ (asymptotic).
fn series_coeff(k: i32) -> f64 {
    let fact: f64 = (1..=k).map(f64::from).product();
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * fact * (0.25 * 0.5f64.powi(k) - 0.5 * 0.25f64.powi(k))
}

/// κ(θ) = (1/2θ)e^{2/θ}G(2/θ) + ¼ − (2/θ)e^{4/θ}G(4/θ), and κ(0) = 0.
pub fn kappa_gbed(theta: f64, tol: f64) -> Result<f64> {
    check(theta)?;
    if theta == 0.0 {
        return Ok(0.0);
    }
    if theta < SERIES_BELOW {
        return Ok((2..SERIES_TERMS).map(|k| series_coeff(k) * theta.powi(k)).sum());
    }
    let s2 = scaled_exp_integral(2.0 / theta, tol)?;
    let s4 = scaled_exp_integral(4.0 / theta, tol)?;
    Ok(s2 / (2.0 * theta) + 0.25 - 2.0 / theta * s4)
}

/// κ′(θ) = −3/(2θ²) + (8/θ³ + 2/θ²)e^{4/θ}G(4/θ) − (1/θ³ + 1/(2θ²))e^{2/θ}G(2/θ).
pub fn kappa_gbed_derivative(theta: f64, tol: f64) -> Result<f64> {
    check(theta)?;
    if theta == 0.0 {
        return Err(KappaError::Domain("κ′ of GBED-I is singular at θ = 0".into()));
    }
    if theta < SERIES_BELOW {
        return Ok((2..SERIES_TERMS)
            .map(|k| f64::from(k) * series_coeff(k) * theta.powi(k - 1))
            .sum());
    }
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let s2 = scaled_exp_integral(2.0 / theta, tol)?;
    let s4 = scaled_exp_integral(4.0 / theta, tol)?;
    Ok(-1.5 / t2 + (8.0 / t3 + 2.0 / t2) * s4 - (1.0 / t3 + 0.5 / t2) * s2)
}
