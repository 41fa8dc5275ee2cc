//! The exponential integral G(x) = ∫₁^∞ e^{−xt}/t dt = E₁(x).

use crate::error::{KappaError, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_ITER: usize = 500;

/// `eˣ·E₁(x)` for x > 0 without forming eˣ when x is large.
pub fn scaled_exp_integral(x: f64, tol: f64) -> Result<f64> {
    check(x)?;
    if x <= 1.0 {
        return Ok(x.exp() * e1_series(x, tol));
    }
    // modified Lentz on the continued fraction
    // E₁(x) = e^{−x} · 1/(x+1− 1²/(x+3− 2²/(x+5− …)))
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() <= tol {
            return Ok(h);
        }
    }
    Ok(h)
}

/// G(x) = E₁(x) for x > 0.
pub fn exp_integral_g(x: f64, tol: f64) -> Result<f64> {
    check(x)?;
    if x <= 1.0 {
        Ok(e1_series(x, tol))
    } else {
        Ok(scaled_exp_integral(x, tol)? * (-x).exp())
    }
}

fn check(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(KappaError::Domain(format!(
            "exponential integral needs finite x > 0, got {x}"
        )));
    }
    Ok(())
}

// E₁(x) = −γ − ln x − Σ_{k≥1} (−x)ᵏ/(k·k!)
fn e1_series(x: f64, tol: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..MAX_ITER {
        term *= -x / k as f64;
        let piece = term / k as f64;
        sum += piece;
        if piece.abs() <= tol * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}
