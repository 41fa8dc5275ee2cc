//! Eigenvalues of the centred distance kernel `h_F` on a discrete marginal and
//! the weighted chi-square law they induce for nκ̃, nκ* and nκ̂ under
//! independence.
//!
//! On support points `x₁ < … < x_t` with masses `p_m`, the non-zero
//! eigenvalues of `h_F` are the λ solving `D_p g = λ C g`, where `C` is the
//! path Laplacian with edge weights `c_m = 1/(x_m − x_{m−1})`. With
//! `M = D_p^{-1/2} C D_p^{-1/2}` (symmetric tridiagonal, positive
//! semi-definite with a single null vector `√p`) every positive eigenvalue μ
//! of `M` gives λ = 1/μ.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::NumericConfig;
use crate::error::{KappaError, Result};
use crate::rng::{substream, SeedSpec};
use crate::sum::CompensatedSum;

/// A finitely supported distribution on strictly increasing points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMarginal {
    points: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteMarginal {
    pub fn new(points: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if points.len() != probs.len() {
            return Err(KappaError::LengthMismatch {
                xs: points.len(),
                ys: probs.len(),
            });
        }
        if points.len() < 2 {
            return Err(KappaError::AllValuesEqual);
        }
        if let Some(index) = points.iter().position(|v| !v.is_finite()) {
            return Err(KappaError::NonFinite { index });
        }
        for (m, w) in points.windows(2).enumerate() {
            if w[1] == w[0] {
                return Err(KappaError::DegenerateGrid { index: m, next: m + 1 });
            }
            if w[1] < w[0] {
                return Err(KappaError::InvalidArgument(format!(
                    "support points must increase (index {m})"
                )));
            }
        }
        if probs.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(KappaError::InvalidArgument("probabilities must be positive".into()));
        }
        let total = crate::sum::sum(&probs);
        if (total - 1.0).abs() > 1e-12 {
            return Err(KappaError::InvalidArgument(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { points, probs })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Mean absolute difference `E|X − X′|`.
    pub fn mean_abs_difference(&self) -> f64 {
        // Σ_{m<m'} p_m p_m' (x_m' − x_m) = Σ_m (x_{m+1} − x_m)·F_m·(1 − F_m)
        let mut cdf = CompensatedSum::new();
        let mut acc = CompensatedSum::new();
        for m in 0..self.points.len() - 1 {
            cdf.add(self.probs[m]);
            let f = cdf.total().min(1.0);
            acc.add((self.points[m + 1] - self.points[m]) * f * (1.0 - f));
        }
        2.0 * acc.total()
    }

    /// The kernel `h_F(x_i, x_j)` of this distribution.
    pub fn kernel_matrix(&self) -> Vec<Vec<f64>> {
        let t = self.len();
        let x = &self.points;
        let g: Vec<f64> = (0..t)
            .map(|i| {
                (0..t)
                    .map(|k| self.probs[k] * (x[i] - x[k]).abs())
                    .collect::<CompensatedSum>()
                    .total()
            })
            .collect();
        let gbar = (0..t).map(|i| self.probs[i] * g[i]).collect::<CompensatedSum>().total();
        (0..t)
            .map(|i| {
                (0..t)
                    .map(|j| -0.5 * ((x[i] - x[j]).abs() - g[i] - g[j] + gbar))
                    .collect()
            })
            .collect()
    }
}

/// Eigenvalues λ of `h_F`, largest first, with the total `Σλ = E|X − X′|/2`
/// for comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSpectrum {
    pub lambdas: Vec<f64>,
    pub t: usize,
    pub trace_target: f64,
}

impl EigenSpectrum {
    pub fn sum(&self) -> f64 {
        crate::sum::sum(&self.lambdas)
    }

    pub fn truncated(&self, k: usize) -> &[f64] {
        &self.lambdas[..k.min(self.lambdas.len())]
    }

    /// Multiply every eigenvalue (and the trace) by `c`, the effect of
    /// rescaling the marginal by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            lambdas: self.lambdas.iter().map(|l| l * c).collect(),
            t: self.t,
            trace_target: self.trace_target * c,
        }
    }
}

/// The t-point quantile discretization `x_m = Q((m − ½)/t)`, `p_m = 1/t`.
pub fn discretize_marginal(quantile: impl Fn(f64) -> f64, t: usize) -> Result<DiscreteMarginal> {
    if t < 3 {
        return Err(KappaError::SampleTooSmall { n: t, min: 3 });
    }
    let points: Vec<f64> = (0..t).map(|m| quantile((m as f64 + 0.5) / t as f64)).collect();
    if let Some(index) = points.iter().position(|v| !v.is_finite()) {
        return Err(KappaError::NonFinite { index });
    }
    if let Some(index) = points.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(KappaError::NonMonotoneQuantile { index: index + 1 });
    }
    DiscreteMarginal::new(points, vec![1.0 / t as f64; t])
}

/// Distinct sorted values weighted by their multiplicity.
pub fn empirical_marginal(values: &[f64]) -> Result<DiscreteMarginal> {
    let n = values.len();
    if n < 3 {
        return Err(KappaError::SampleTooSmall { n, min: 3 });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(KappaError::NonFinite { index });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut points = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for v in sorted {
        if points.last() == Some(&v) {
            *counts.last_mut().unwrap() += 1;
        } else {
            points.push(v);
            counts.push(1);
        }
    }
    if points.len() == 1 {
        return Err(KappaError::AllValuesEqual);
    }
    let probs = counts.iter().map(|&c| c as f64 / n as f64).collect();
    DiscreteMarginal::new(points, probs)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with Wilkinson
/// shifts. `diag` is overwritten by the (unsorted) eigenvalues.
pub(crate) fn tridiagonal_eigenvalues(diag: &mut [f64], off: &[f64]) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&off[..n - 1]);
    let d = diag;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(KappaError::InvalidArgument(
                    "tridiagonal eigen-solver did not converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Keep the positive part of a spectrum: drop everything at or below
/// `tol · max`, sort descending and truncate.
fn positive_part(mut values: Vec<f64>, tol: f64, k_max: usize) -> Vec<f64> {
    let top = values.iter().cloned().fold(0.0, f64::max);
    values.retain(|&v| v > tol * top);
    values.sort_by(|a, b| b.total_cmp(a));
    values.truncate(k_max);
    values
}

/// λ's of `h_F` from the tridiagonal problem, largest first, at most `k_max`.
///
/// `M` always has exactly one null vector (`√p`), so its smallest computed
/// eigenvalue is discarded unconditionally; any other μ at or below
/// `eig_zero_tol · μ_max` is treated as numerical noise as well.
pub fn kernel_eigenvalues(
    marginal: &DiscreteMarginal,
    k_max: usize,
    cfg: &NumericConfig,
) -> Result<EigenSpectrum> {
    let t = marginal.len();
    if k_max == 0 {
        return Err(KappaError::InvalidArgument("k_max must be at least 1".into()));
    }
    let (x, p) = (marginal.points(), marginal.probs());
    // c[m] joins x[m] and x[m+1]
    let c: Vec<f64> = x.windows(2).map(|w| 1.0 / (w[1] - w[0])).collect();
    if let Some(index) = c.iter().position(|v| !v.is_finite()) {
        return Err(KappaError::DegenerateGrid { index, next: index + 1 });
    }
    let mut diag: Vec<f64> = (0..t)
        .map(|m| {
            let left = if m > 0 { c[m - 1] } else { 0.0 };
            let right = if m + 1 < t { c[m] } else { 0.0 };
            (left + right) / p[m]
        })
        .collect();
    let off: Vec<f64> = (0..t - 1).map(|m| -c[m] / (p[m] * p[m + 1]).sqrt()).collect();
    tridiagonal_eigenvalues(&mut diag, &off)?;

    diag.sort_by(f64::total_cmp);
    let mu_max = diag[t - 1];
    let lambdas: Vec<f64> = diag[1..]
        .iter()
        .filter(|&&mu| mu > cfg.eig_zero_tol * mu_max)
        .map(|&mu| 1.0 / mu)
        .collect();
    let lambdas = positive_part(lambdas, 0.0, k_max);
    if lambdas.is_empty() {
        return Err(KappaError::EmptySpectrum);
    }
    Ok(EigenSpectrum {
        lambdas,
        t,
        trace_target: 0.5 * marginal.mean_abs_difference(),
    })
}

/// Brute-force route: eigenvalues of the dense `[√(p_i p_j)·h_F(x_i, x_j)]`.
/// Cubic in t; meant for cross-checking on small grids.
pub fn dense_kernel_eigenvalues(
    marginal: &DiscreteMarginal,
    k_max: usize,
    cfg: &NumericConfig,
) -> Result<EigenSpectrum> {
    let t = marginal.len();
    let h = marginal.kernel_matrix();
    let sp: Vec<f64> = marginal.probs().iter().map(|p| p.sqrt()).collect();
    let a = nalgebra::DMatrix::from_fn(t, t, |i, j| sp[i] * sp[j] * h[i][j]);
    let eig = nalgebra::SymmetricEigen::new(a);
    let lambdas = positive_part(eig.eigenvalues.iter().cloned().collect(), cfg.eig_zero_tol, k_max);
    if lambdas.is_empty() {
        return Err(KappaError::EmptySpectrum);
    }
    Ok(EigenSpectrum {
        lambdas,
        t,
        trace_target: 0.5 * marginal.mean_abs_difference(),
    })
}

const NULL_STREAM_TAG: u64 = 0x6b61_7070_615f_6e75;

/// Monte Carlo sample of `Σ_{i,j≤k} λ_i η_j (Z²_ij − 1)` (centred) or
/// `Σ λ_i η_j Z²_ij` (uncentred), sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct NullLimitModel {
    pub lambdas: EigenSpectrum,
    pub etas: EigenSpectrum,
    pub k: usize,
    pub draws: Vec<f64>,
    pub centered: bool,
    /// Σ λ_i η_j over the retained pairs, the gap between the two laws.
    pub weight_sum: f64,
}

/// Serialized view of a [`NullLimitModel`]: draws replaced by a 1024-point
/// quantile grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NullLimitSummary {
    pub lambdas: EigenSpectrum,
    pub etas: EigenSpectrum,
    pub k: usize,
    pub centered: bool,
    pub replicates: usize,
    pub mean: f64,
    pub variance: f64,
    pub quantile_probs: Vec<f64>,
    pub quantiles: Vec<f64>,
}

impl NullLimitModel {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// The same draws re-expressed for the other centring: the two laws differ
    /// by the constant `Σλη`, so no new normals are needed.
    pub fn with_centering(&self, centered: bool) -> Self {
        if centered == self.centered {
            return self.clone();
        }
        let shift = if centered { -self.weight_sum } else { self.weight_sum };
        Self {
            draws: self.draws.iter().map(|d| d + shift).collect(),
            centered,
            ..self.clone()
        }
    }

    pub fn mean(&self) -> f64 {
        crate::sum::sum(&self.draws) / self.draws.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.draws.iter().map(|d| (d - m) * (d - m)).collect::<CompensatedSum>().total()
            / (self.draws.len() as f64 - 1.0)
    }

    /// Empirical quantile (lower order statistic).
    pub fn quantile(&self, prob: f64) -> f64 {
        let r = self.draws.len();
        let idx = ((prob * r as f64).floor() as usize).min(r - 1);
        self.draws[idx]
    }

    pub fn summary(&self) -> NullLimitSummary {
        const GRID: usize = 1024;
        let quantile_probs: Vec<f64> = (0..GRID).map(|i| (i as f64 + 0.5) / GRID as f64).collect();
        let quantiles = quantile_probs.iter().map(|&p| self.quantile(p)).collect();
        NullLimitSummary {
            lambdas: self.lambdas.clone(),
            etas: self.etas.clone(),
            k: self.k,
            centered: self.centered,
            replicates: self.draws.len(),
            mean: self.mean(),
            variance: self.variance(),
            quantile_probs,
            quantiles,
        }
    }
}

/// Draw `replicates` variates of the truncated weighted chi-square limit.
///
/// Draw `r` uses its own substream, so the result does not depend on how the
/// work is split across threads.
pub fn null_limit_model(
    lx: &EigenSpectrum,
    ly: &EigenSpectrum,
    k: usize,
    replicates: usize,
    seed: SeedSpec,
    centered: bool,
) -> Result<NullLimitModel> {
    if lx.lambdas.is_empty() || ly.lambdas.is_empty() || k == 0 {
        return Err(KappaError::EmptySpectrum);
    }
    if replicates == 0 {
        return Err(KappaError::InvalidArgument("need at least one replicate".into()));
    }
    let a = lx.truncated(k).to_vec();
    let b = ly.truncated(k).to_vec();
    let weight_sum = crate::sum::sum(&a) * crate::sum::sum(&b);
    let base = seed.derive_master(NULL_STREAM_TAG);
    let shift = if centered { weight_sum } else { 0.0 };

    let mut draws: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(SeedSpec::new(base, r));
            let mut total = 0.0;
            for &li in &a {
                let mut row = 0.0;
                for &ej in &b {
                    let z = rng.normal();
                    row += ej * z * z;
                }
                total += li * row;
            }
            total - shift
        })
        .collect();
    draws.sort_by(f64::total_cmp);
    Ok(NullLimitModel {
        lambdas: lx.clone(),
        etas: ly.clone(),
        k,
        draws,
        centered,
        weight_sum,
    })
}

/// Upper-tail Monte Carlo p-value `(1 + #{draws ≥ s}) / (R + 1)`.
pub fn null_pvalue(model: &NullLimitModel, statistic: f64) -> f64 {
    let below = model.draws.partition_point(|&d| d < statistic);
    let at_or_above = model.draws.len() - below;
    (1 + at_or_above) as f64 / (model.draws.len() + 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> NumericConfig {
        NumericConfig::default()
    }

    #[test]
    fn uniform_grid_points() {
        let m = discretize_marginal(|u| u, 4).unwrap();
        assert_eq!(m.points(), &[0.125, 0.375, 0.625, 0.875]);
        assert_eq!(m.probs(), &[0.25; 4]);
        assert!(matches!(
            discretize_marginal(|u| u, 2),
            Err(KappaError::SampleTooSmall { n: 2, min: 3 })
        ));
        assert!(matches!(
            discretize_marginal(|u| (u - 0.5).abs(), 6),
            Err(KappaError::NonMonotoneQuantile { .. })
        ));
    }

    #[test]
    fn empirical_examples() {
        let m = empirical_marginal(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(m.points(), &[1.0, 2.0, 3.0]);
        let m = empirical_marginal(&[1.0, 1.0, 2.0]).unwrap();
        assert_eq!(m.points(), &[1.0, 2.0]);
        assert!((m.probs()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(empirical_marginal(&[5.0; 3]), Err(KappaError::AllValuesEqual)));
    }

    #[test]
    fn mean_abs_difference_matches_double_sum() {
        let m = DiscreteMarginal::new(vec![-1.0, 0.5, 2.0, 7.0], vec![0.1, 0.4, 0.3, 0.2]).unwrap();
        let (x, p) = (m.points(), m.probs());
        let mut direct = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                direct += p[i] * p[j] * (x[i] - x[j]).abs();
            }
        }
        assert!((m.mean_abs_difference() - direct).abs() < 1e-14);
    }

    #[test]
    fn ql_matches_closed_form_path_spectrum() {
        // second-difference matrix: eigenvalues 2 − 2cos(kπ/(n+1))
        let n = 50;
        let mut d = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        tridiagonal_eigenvalues(&mut d, &off).unwrap();
        d.sort_by(f64::total_cmp);
        for (k, v) in d.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn uniform_spectrum_is_exact_for_grid() {
        // For the uniform grid μ_k = t²(2 − 2cos(kπ/t)), k = 1..t−1.
        let t = 40;
        let m = discretize_marginal(|u| u, t).unwrap();
        let s = kernel_eigenvalues(&m, t, &cfg()).unwrap();
        assert_eq!(s.lambdas.len(), t - 1);
        for (i, l) in s.lambdas.iter().enumerate() {
            let k = (i + 1) as f64;
            let mu = (t * t) as f64 * (2.0 - 2.0 * (k * PI / t as f64).cos());
            assert!((l * mu - 1.0).abs() < 1e-10, "k={k}");
        }
        assert!((s.sum() - s.trace_target).abs() < 1e-12);
        assert!((s.trace_target - (t * t - 1) as f64 / (6 * t * t) as f64).abs() < 1e-14);
    }

    #[test]
    fn two_point_marginal() {
        // h_F on {0,1} with masses (p, 1−p) has the single eigenvalue p(1−p)
        let m = DiscreteMarginal::new(vec![0.0, 1.0], vec![0.3, 0.7]).unwrap();
        let s = kernel_eigenvalues(&m, 5, &cfg()).unwrap();
        assert_eq!(s.lambdas.len(), 1);
        assert!((s.lambdas[0] - 0.21).abs() < 1e-14);
    }

    #[test]
    fn tridiagonal_agrees_with_dense_small() {
        let m = DiscreteMarginal::new(
            vec![-2.0, -0.3, 0.0, 1.1, 4.0, 4.5],
            vec![0.05, 0.2, 0.25, 0.2, 0.2, 0.1],
        )
        .unwrap();
        let a = kernel_eigenvalues(&m, 10, &cfg()).unwrap();
        let b = dense_kernel_eigenvalues(&m, 10, &cfg()).unwrap();
        assert_eq!(a.lambdas.len(), 5);
        assert_eq!(b.lambdas.len(), 5);
        for (x, y) in a.lambdas.iter().zip(&b.lambdas) {
            assert!((x - y).abs() <= 1e-10 * y, "{x} vs {y}");
        }
    }

    #[test]
    fn pvalue_edges() {
        let s = EigenSpectrum {
            lambdas: vec![1.0],
            t: 2,
            trace_target: 1.0,
        };
        let model = null_limit_model(&s, &s, 1, 999, SeedSpec::new(3, 0), false).unwrap();
        assert_eq!(null_pvalue(&model, -1.0), 1.0);
        assert_eq!(null_pvalue(&model, 1e9), 1.0 / 1000.0);
        let med = model.quantile(0.5);
        assert!((null_pvalue(&model, med) - 0.5).abs() < 0.01);
        assert!(model.draws.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn centering_shift_is_exact() {
        let s = EigenSpectrum {
            lambdas: vec![0.5, 0.25],
            t: 3,
            trace_target: 0.75,
        };
        let c = null_limit_model(&s, &s, 2, 500, SeedSpec::new(9, 0), true).unwrap();
        let u = null_limit_model(&s, &s, 2, 500, SeedSpec::new(9, 0), false).unwrap();
        let shifted = c.with_centering(false);
        for (a, b) in shifted.draws.iter().zip(&u.draws) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((c.weight_sum - 0.5625).abs() < 1e-15);
    }

    #[test]
    fn empty_spectrum_rejected() {
        let e = EigenSpectrum {
            lambdas: vec![],
            t: 0,
            trace_target: 0.0,
        };
        assert!(matches!(
            null_limit_model(&e, &e, 5, 10, SeedSpec::new(1, 0), true),
            Err(KappaError::EmptySpectrum)
        ));
    }
}
