//! Dependent bivariate samples from the six families, indexed by θ.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::closed_form::{Family, FamilySpec};
use crate::error::{KappaError, Result};
use crate::rng::{substream, SeedSpec, Substream};
use crate::sample::PairedSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coordinate {
    X,
    Y,
}

/// Scale of the Laplace marginals. The sampler multiplies a unit-variance
/// Gaussian pair by √W with W ~ Exp(1), which gives Laplace margins of
/// variance one, i.e. scale 1/√2.
pub const LAPLACE_SCALE: f64 = FRAC_1_SQRT_2;

/// `n` i.i.d. pairs from `spec`.
pub fn sample_family(spec: &FamilySpec, n: usize, seed: SeedSpec) -> Result<PairedSample> {
    let (xs, ys) = sample_columns(spec, n, seed)?;
    PairedSample::new(xs, ys)
}

/// Like [`sample_family`] but returns bare columns, so `n = 1` is allowed.
pub fn sample_columns(spec: &FamilySpec, n: usize, seed: SeedSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    spec.validate()?;
    if n == 0 {
        return Err(KappaError::NOnPositive);
    }
    let mut rng = substream(seed);
    let theta = spec.theta;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let (x, y) = match spec.family {
            Family::Normal => {
                let (a, b) = correlated_normals(&mut rng, theta);
                (spec.sigma1 * a, spec.sigma2 * b)
            }
            Family::Uniform => correlated_uniforms(&mut rng, theta),
            Family::Exponential => gbed_pair(&mut rng, theta),
            Family::Laplace => {
                let w = rng.exp1().sqrt();
                let (a, b) = correlated_normals(&mut rng, theta);
                (w * a, w * b)
            }
            Family::Logistic => {
                let (u, v) = correlated_uniforms(&mut rng, theta);
                (logit(u), logit(v))
            }
            Family::Chisquare => {
                let (a, b) = correlated_normals(&mut rng, theta);
                (a * a, b * b)
            }
        };
        xs.push(x);
        ys.push(y);
    }
    Ok((xs, ys))
}

fn correlated_normals(rng: &mut Substream, theta: f64) -> (f64, f64) {
    let z1 = rng.normal();
    let z2 = rng.normal();
    (z1, theta * z1 + (1.0 - theta * theta).sqrt() * z2)
}

/// X = U; for |θ| < 1, Y = |W − X| or 1 − |1 − W − X| by a fair coin, with
/// W ~ Beta(α, 1), α = ½[√((49 + θ)/(1 + θ)) − 5].
fn correlated_uniforms(rng: &mut Substream, theta: f64) -> (f64, f64) {
    let u = rng.uniform();
    if theta == 1.0 {
        return (u, u);
    }
    if theta == -1.0 {
        return (u, 1.0 - u);
    }
    let v = rng.uniform();
    let alpha = 0.5 * (((49.0 + theta) / (1.0 + theta)).sqrt() - 5.0);
    let w = rng.uniform().powf(1.0 / alpha);
    let y = if v < 0.5 {
        (w - u).abs()
    } else {
        1.0 - (1.0 - w - u).abs()
    };
    (u, y)
}

/// GBED-I pair: X ~ Exp(1) and, given X, with a = 1 + θX, Y is drawn from
/// the exact conditional density `e^{−ay}[a(1 + θy) − θ]`, a mixture of
/// Exp(a) with weight (1 − θ + θX)/(1 + θX) and Gamma(2, a) otherwise.
fn gbed_pair(rng: &mut Substream, theta: f64) -> (f64, f64) {
    let x = rng.exp1();
    let a = 1.0 + theta * x;
    let weight = (1.0 - theta + theta * x) / a;
    let y = if rng.uniform() < weight {
        rng.exp1() / a
    } else {
        (rng.exp1() + rng.exp1()) / a
    };
    (x, y)
}

/// A widely circulated two-rate GBED-I recipe: with
/// `E/(E + G) = (1 − θ + θX)/(1 + θX)`, Y ~ Exp(1 + θX) when `E/(E + G) < U`
/// and Y ~ Exp(2 + θX) otherwise.
///
/// This does not reproduce the GBED-I law (at θ = 0 it gives Y ~ Exp(2));
/// it is kept so the discrepancy can be measured. Use [`sample_family`] for
/// simulation.
pub fn sample_exponential_two_rate(theta: f64, n: usize, seed: SeedSpec) -> Result<PairedSample> {
    FamilySpec::new(Family::Exponential, theta)?;
    if n == 0 {
        return Err(KappaError::NOnPositive);
    }
    let mut rng = substream(seed);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.exp1();
        let ratio = (1.0 - theta + theta * x) / (1.0 + theta * x);
        let rate = if ratio < rng.uniform() {
            1.0 + theta * x
        } else {
            2.0 + theta * x
        };
        xs.push(x);
        ys.push(rng.exp1() / rate);
    }
    PairedSample::new(xs, ys)
}

fn logit(u: f64) -> f64 {
    // the uniform construction can round to the closed endpoints
    let u = u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
    u.ln() - (-u).ln_1p()
}

fn check_unit(u: f64) -> Result<()> {
    if !(u > 0.0 && u < 1.0) {
        return Err(KappaError::Domain(format!("probability must lie in (0, 1), got {u}")));
    }
    Ok(())
}

/// Inverse CDF of one coordinate's marginal.
pub fn marginal_quantile(spec: &FamilySpec, coordinate: Coordinate, u: f64) -> Result<f64> {
    check_unit(u)?;
    let std = Normal::standard();
    Ok(match spec.family {
        Family::Normal => {
            let s = match coordinate {
                Coordinate::X => spec.sigma1,
                Coordinate::Y => spec.sigma2,
            };
            s * std.inverse_cdf(u)
        }
        Family::Uniform => u,
        Family::Exponential => -(-u).ln_1p(),
        Family::Laplace => {
            if u < 0.5 {
                LAPLACE_SCALE * (2.0 * u).ln()
            } else {
                -LAPLACE_SCALE * (2.0 - 2.0 * u).ln()
            }
        }
        Family::Logistic => u.ln() - (-u).ln_1p(),
        Family::Chisquare => std.inverse_cdf(0.5 + 0.5 * u).powi(2),
    })
}

/// CDF of one coordinate's marginal.
pub fn marginal_cdf(spec: &FamilySpec, coordinate: Coordinate, v: f64) -> f64 {
    let std = Normal::standard();
    match spec.family {
        Family::Normal => {
            let s = match coordinate {
                Coordinate::X => spec.sigma1,
                Coordinate::Y => spec.sigma2,
            };
            std.cdf(v / s)
        }
        Family::Uniform => v.clamp(0.0, 1.0),
        Family::Exponential => {
            if v <= 0.0 {
                0.0
            } else {
                -(-v).exp_m1()
            }
        }
        Family::Laplace => {
            if v < 0.0 {
                0.5 * (v / LAPLACE_SCALE).exp()
            } else {
                1.0 - 0.5 * (-v / LAPLACE_SCALE).exp()
            }
        }
        Family::Logistic => 1.0 / (1.0 + (-v).exp()),
        Family::Chisquare => {
            if v <= 0.0 {
                0.0
            } else {
                2.0 * std.cdf(v.sqrt()) - 1.0
            }
        }
    }
}
