//! κ*, κ̃ and κ̂, the ρ estimators, and the plug-in asymptotic variance δ̂₁.
//!
//! κ* is the four-U-statistic estimator `¼(U₁₂ + U₁U₂ − 2U₃)`. Bergsma's κ̃ and κ̂
//! are exact affine functions of the same bundle; those relations are the
//! production path, and the kernel-average definitions are kept as an
//! independent second route.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{KappaError, Result};
use crate::sample::PairedSample;
use crate::sum::CompensatedSum;
use crate::ustat::{abs_row_sums, compute_ustats, UStatBundle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    KappaStar,
    KappaTilde,
    KappaHat,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::KappaStar, Estimator::KappaTilde, Estimator::KappaHat];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::KappaStar => "kappa_star",
            Estimator::KappaTilde => "kappa_tilde",
            Estimator::KappaHat => "kappa_hat",
        }
    }

    /// Table label, e.g. `κ*`.
    pub fn symbol(self) -> &'static str {
        match self {
            Estimator::KappaStar => "κ*",
            Estimator::KappaTilde => "κ̃",
            Estimator::KappaHat => "κ̂",
        }
    }

    /// [`symbol`](Self::symbol) left-aligned in `width` terminal columns;
    /// combining accents take no column, which `{:<w}` does not know.
    pub fn padded_symbol(self, width: usize) -> String {
        let sym = self.symbol();
        let visible = sym.chars().filter(|c| !('\u{300}'..='\u{36f}').contains(c)).count();
        format!("{sym}{}", " ".repeat(width.saturating_sub(visible)))
    }

    pub fn from_bundle(self, b: &UStatBundle) -> f64 {
        match self {
            Estimator::KappaStar => kappa_star_from_bundle(b),
            Estimator::KappaTilde => kappa_tilde_from_bundle(b),
            Estimator::KappaHat => kappa_hat_from_bundle(b),
        }
    }

    pub fn evaluate(self, sample: &PairedSample) -> Result<f64> {
        Ok(self.from_bundle(&compute_ustats(sample)?))
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = KappaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "star" | "kappa_star" | "kappa*" => Ok(Estimator::KappaStar),
            "tilde" | "kappa_tilde" | "u" => Ok(Estimator::KappaTilde),
            "hat" | "kappa_hat" | "v" => Ok(Estimator::KappaHat),
            other => Err(KappaError::UnknownEstimator(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaEstimates {
    pub kappa_star: f64,
    pub kappa_tilde: f64,
    pub kappa_hat: f64,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta1_hat: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimates {
    pub rho_hat: f64,
    pub rho_tilde: f64,
}

pub fn kappa_star_from_bundle(b: &UStatBundle) -> f64 {
    0.25 * (b.u12 + b.u1 * b.u2 - 2.0 * b.u3)
}

/// κ̃ = κ* + ¼[−2n/(n−1)²·U₁₂ + 2/(n−1)²·U₃ + 2/(n−1)·U₁U₂].
pub fn kappa_tilde_from_bundle(b: &UStatBundle) -> f64 {
    let n = b.n as f64;
    let m = n - 1.0;
    kappa_star_from_bundle(b)
        + 0.25 * (-2.0 * n / (m * m) * b.u12 + 2.0 / (m * m) * b.u3 + 2.0 / m * b.u1 * b.u2)
}

/// κ̂ = κ* + ¼[(2−3n)/n²·U₁₂ − 2(2−3n)/n²·U₃ + (1−2n)/n²·U₁U₂].
pub fn kappa_hat_from_bundle(b: &UStatBundle) -> f64 {
    let n = b.n as f64;
    let n2 = n * n;
    let c = (2.0 - 3.0 * n) / n2;
    kappa_star_from_bundle(b) + 0.25 * (c * b.u12 - 2.0 * c * b.u3 + (1.0 - 2.0 * n) / n2 * b.u1 * b.u2)
}

/// κ̂ written in V-statistics: ¼[V₁₂ − 2V₃ + V₁V₂].
pub fn kappa_hat_from_vstats(b: &UStatBundle) -> f64 {
    0.25 * (b.v12 - 2.0 * b.v3 + b.v1 * b.v2)
}

pub fn kappa_star(sample: &PairedSample) -> Result<f64> {
    Ok(kappa_star_from_bundle(&compute_ustats(sample)?))
}

/// Production κ̃: the exact relation through κ*.
pub fn kappa_tilde(sample: &PairedSample) -> Result<f64> {
    Ok(kappa_tilde_from_bundle(&compute_ustats(sample)?))
}

/// κ̂ from the V-statistics, i.e. `n⁻² Σ_{i,j} ĥ₁(x_i,x_j) ĥ₂(y_i,y_j)`.
pub fn kappa_hat_direct(sample: &PairedSample) -> Result<f64> {
    if sample.len() < 3 {
        // the V-statistic form needs no triples, but U₃'s bookkeeping does
        return kappa_hat_by_definition(sample);
    }
    Ok(kappa_hat_from_vstats(&compute_ustats(sample)?))
}

/// Empirically centred kernel entries for one coordinate:
/// `|v_i − v_j| − s·A_i − s·A_j + s·B` where `A_i` are mean absolute
/// differences and `B` their mean.
struct CentredKernel {
    row_means: Vec<f64>,
    grand_mean: f64,
    scale: f64,
}

impl CentredKernel {
    fn new(v: &[f64], scale: f64) -> Self {
        let n = v.len() as f64;
        let row_means: Vec<f64> = abs_row_sums(v).into_iter().map(|a| a / n).collect();
        let grand_mean = crate::sum::sum(&row_means) / n;
        Self {
            row_means,
            grand_mean,
            scale,
        }
    }

    #[inline]
    fn h(&self, v: &[f64], i: usize, j: usize) -> f64 {
        -0.5 * ((v[i] - v[j]).abs() - self.scale * (self.row_means[i] + self.row_means[j])
            + self.scale * self.grand_mean)
    }
}

fn require(sample: &PairedSample, min: usize) -> Result<usize> {
    let n = sample.len();
    if n < min {
        return Err(KappaError::SampleTooSmall { n, min });
    }
    Ok(n)
}

/// κ̃ evaluated from its definition: `C(n,2)⁻¹ Σ_{i<j} h̃₁ h̃₂` with the
/// `n/(n−1)`-corrected centring.
pub fn kappa_tilde_direct(sample: &PairedSample) -> Result<f64> {
    let n = require(sample, 2)?;
    let s = n as f64 / (n as f64 - 1.0);
    let (xs, ys) = (sample.xs(), sample.ys());
    let kx = CentredKernel::new(xs, s);
    let ky = CentredKernel::new(ys, s);
    let mut acc = CompensatedSum::new();
    for i in 0..n {
        for j in (i + 1)..n {
            acc.add(kx.h(xs, i, j) * ky.h(ys, i, j));
        }
    }
    let pairs = n as f64 * (n as f64 - 1.0) / 2.0;
    Ok(acc.total() / pairs)
}

/// κ̂ evaluated from its definition: `n⁻² Σ_{i,j} ĥ₁ ĥ₂`.
pub fn kappa_hat_by_definition(sample: &PairedSample) -> Result<f64> {
    let n = require(sample, 2)?;
    let (xs, ys) = (sample.xs(), sample.ys());
    let kx = CentredKernel::new(xs, 1.0);
    let ky = CentredKernel::new(ys, 1.0);
    let mut acc = CompensatedSum::new();
    for i in 0..n {
        for j in 0..n {
            acc.add(kx.h(xs, i, j) * ky.h(ys, i, j));
        }
    }
    let nf = n as f64;
    Ok(acc.total() / (nf * nf))
}

pub fn rho_estimates(sample: &PairedSample) -> Result<RhoEstimates> {
    require(sample, 3)?;
    let xy = compute_ustats(sample)?;
    let xx = compute_ustats(&sample.x_with_itself())?;
    let yy = compute_ustats(&sample.y_with_itself())?;

    let ratio = |f: fn(&UStatBundle) -> f64| -> Result<f64> {
        let kxx = f(&xx);
        let kyy = f(&yy);
        if !(kxx > 0.0) {
            return Err(KappaError::DegenerateMarginal { which: "x" });
        }
        if !(kyy > 0.0) {
            return Err(KappaError::DegenerateMarginal { which: "y" });
        }
        Ok(f(&xy) / (kxx * kyy).sqrt())
    };

    let rho_hat = ratio(kappa_hat_from_vstats)?.clamp(0.0, 1.0);
    let rho_tilde = ratio(kappa_tilde_from_bundle)?.min(1.0);
    Ok(RhoEstimates { rho_hat, rho_tilde })
}

/// Plug-in estimate of δ₁ = ¼·Var(H₁(X, Y)), the asymptotic variance of
/// √n(κ − κ̂) under dependence.
///
/// Every expectation in H₁ is replaced by its average over the sample:
/// `H_i = ĝ₁₂(i) + μ̂₁ĝ₂(i) + μ̂₂ĝ₁(i) − cx(i) − cy(i) − ĝ₁(i)ĝ₂(i)` where
/// `cx(i) = n⁻¹ Σ_j |x_i − x_j| ĝ₂(j)` and `cy` is its mirror image. The
/// variance uses denominator n.
pub fn delta1_plugin(sample: &PairedSample) -> Result<f64> {
    let n = require(sample, 3)?;
    let nf = n as f64;
    let (xs, ys) = (sample.xs(), sample.ys());
    let g1: Vec<f64> = abs_row_sums(xs).into_iter().map(|a| a / nf).collect();
    let g2: Vec<f64> = abs_row_sums(ys).into_iter().map(|b| b / nf).collect();
    let mu1 = crate::sum::sum(&g1) / nf;
    let mu2 = crate::sum::sum(&g2) / nf;

    let h: Vec<f64> = (0..n)
        .map(|i| {
            let mut g12 = CompensatedSum::new();
            let mut cx = CompensatedSum::new();
            let mut cy = CompensatedSum::new();
            for j in 0..n {
                let dx = (xs[i] - xs[j]).abs();
                let dy = (ys[i] - ys[j]).abs();
                g12.add(dx * dy);
                cx.add(dx * g2[j]);
                cy.add(dy * g1[j]);
            }
            g12.total() / nf + mu1 * g2[i] + mu2 * g1[i]
                - cx.total() / nf
                - cy.total() / nf
                - g1[i] * g2[i]
        })
        .collect();

    let mean = crate::sum::sum(&h) / nf;
    let var = h
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .collect::<CompensatedSum>()
        .total()
        / nf;
    Ok((0.25 * var).max(0.0))
}

/// All three κ estimates from one bundle, optionally with δ̂₁.
pub fn estimate_all(sample: &PairedSample, with_variance: bool) -> Result<KappaEstimates> {
    let b = compute_ustats(sample)?;
    Ok(KappaEstimates {
        kappa_star: kappa_star_from_bundle(&b),
        kappa_tilde: kappa_tilde_from_bundle(&b),
        kappa_hat: kappa_hat_from_vstats(&b),
        n: b.n,
        delta1_hat: if with_variance {
            Some(delta1_plugin(sample)?)
        } else {
            None
        },
    })
}
