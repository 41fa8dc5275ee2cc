//! Independence tests built on the κ estimators, Monte Carlo power studies,
//! finite-sample diagnostics for the dependent case, and timing.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::closed_form::{Family, FamilySpec};
use crate::config::NumericConfig;
use crate::error::{KappaError, Result};
use crate::estimators::{delta1_plugin, Estimator};
use crate::rng::{substream, SeedSpec};
use crate::sample::PairedSample;
use crate::samplers::sample_family;
use crate::spectral::{empirical_marginal, kernel_eigenvalues, null_limit_model, null_pvalue};
use crate::sum::CompensatedSum;
use crate::ustat::{abs_row_sums, compute_ustats, PairSums, UStatBundle};

/// Eigenvalues kept per marginal when building the limiting null law.
pub const DEFAULT_TRUNCATION: usize = 100;

const TEST_STREAM_TAG: u64 = 0x7465_7374;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    Permutation,
    AsymptoticNull,
}

impl TestMethod {
    pub fn name(self) -> &'static str {
        match self {
            TestMethod::Permutation => "permutation",
            TestMethod::AsymptoticNull => "asymptotic_null",
        }
    }
}

impl FromStr for TestMethod {
    type Err = KappaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "permutation" | "perm" => Ok(TestMethod::Permutation),
            "asymptotic" | "asymptotic_null" | "asymptotic-null" => Ok(TestMethod::AsymptoticNull),
            other => Err(KappaError::InvalidArgument(format!("unknown test method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic_name: Estimator,
    /// The estimate on the observed sample.
    pub statistic: f64,
    /// The value referred to the null: the estimate itself for the
    /// permutation test, n times the estimate for the asymptotic test.
    pub null_statistic: f64,
    pub method: TestMethod,
    pub p_value: f64,
    pub n: usize,
    #[serde(rename = "B_or_R")]
    pub b_or_r: usize,
    pub seed: SeedSpec,
}

/// Pairwise distances laid out so the statistics of any permutation of the
/// ys can be formed in one pass: `U₁`, `U₂` and the row sums are invariant,
/// only `S` and `Σ a_i b_π(i)` change.
struct PermutationEngine {
    n: usize,
    dx_upper: Vec<f64>,
    dy: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    sx: f64,
    sy: f64,
}

impl PermutationEngine {
    fn new(sample: &PairedSample) -> Self {
        let (xs, ys) = (sample.xs(), sample.ys());
        let n = xs.len();
        let mut dx_upper = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                dx_upper.push((xs[i] - xs[j]).abs());
            }
        }
        let mut dy = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dy[i * n + j] = (ys[i] - ys[j]).abs();
            }
        }
        let a = abs_row_sums(xs);
        let b = abs_row_sums(ys);
        let sx = 0.5 * crate::sum::sum(&a);
        let sy = 0.5 * crate::sum::sum(&b);
        Self {
            n,
            dx_upper,
            dy,
            a,
            b,
            sx,
            sy,
        }
    }

    fn bundle(&self, perm: &[usize]) -> UStatBundle {
        let n = self.n;
        let mut sxy = 0.0;
        let mut k = 0;
        for i in 0..n {
            let row = &self.dy[perm[i] * n..(perm[i] + 1) * n];
            let mut acc = 0.0;
            for &pj in &perm[i + 1..] {
                acc += self.dx_upper[k] * row[pj];
                k += 1;
            }
            sxy += acc;
        }
        let sab: f64 = (0..n).map(|i| self.a[i] * self.b[perm[i]]).sum();
        PairSums {
            sx: self.sx,
            sy: self.sy,
            sxy,
            sab,
        }
        .bundle(n)
    }
}

fn require_test(sample: &PairedSample, b_or_r: usize) -> Result<()> {
    let n = sample.len();
    if n < 3 {
        return Err(KappaError::SampleTooSmall { n, min: 3 });
    }
    if b_or_r < 99 {
        return Err(KappaError::InvalidArgument(format!(
            "need at least 99 permutations or null draws, got {b_or_r}"
        )));
    }
    Ok(())
}

/// Permutation p-values for all three estimators from one set of `b`
/// permutations of the ys.
pub fn permutation_test_all(sample: &PairedSample, b: usize, seed: SeedSpec) -> Result<[TestResult; 3]> {
    require_test(sample, b)?;
    let n = sample.len();
    let engine = PermutationEngine::new(sample);
    let mut perm: Vec<usize> = (0..n).collect();
    let observed = engine.bundle(&perm);
    let obs = Estimator::ALL.map(|e| e.from_bundle(&observed));
    // Statistics equal in exact arithmetic can differ in the last bits once
    // the summation order is permuted; treat those as ties.
    let slack = 1e-10 * (observed.u12 + observed.u1 * observed.u2).abs();

    let mut rng = substream(seed);
    let mut exceed = [0usize; 3];
    for _ in 0..b {
        rng.shuffle(&mut perm);
        let bundle = engine.bundle(&perm);
        for (k, e) in Estimator::ALL.iter().enumerate() {
            if e.from_bundle(&bundle) >= obs[k] - slack {
                exceed[k] += 1;
            }
        }
    }
    Ok([0, 1, 2].map(|k| TestResult {
        statistic_name: Estimator::ALL[k],
        statistic: obs[k],
        null_statistic: obs[k],
        method: TestMethod::Permutation,
        p_value: (1 + exceed[k]) as f64 / (b + 1) as f64,
        n,
        b_or_r: b,
        seed,
    }))
}

/// Asymptotic p-values for all three estimators: `nκ̃` and `nκ*` against the
/// centred weighted chi-square law, `nκ̂` against the uncentred one, with
/// spectra from the empirical marginals.
pub fn asymptotic_test_all(
    sample: &PairedSample,
    r: usize,
    seed: SeedSpec,
    truncation: usize,
) -> Result<[TestResult; 3]> {
    require_test(sample, r)?;
    let n = sample.len();
    let cfg = NumericConfig::default();
    let bundle = compute_ustats(sample)?;
    let k_max = truncation.max(1);
    let lx = kernel_eigenvalues(&empirical_marginal(sample.xs())?, k_max, &cfg)?;
    let ly = kernel_eigenvalues(&empirical_marginal(sample.ys())?, k_max, &cfg)?;
    let centred = null_limit_model(&lx, &ly, k_max, r, seed, true)?;
    let uncentred = centred.with_centering(false);
    Ok([0, 1, 2].map(|k| {
        let e = Estimator::ALL[k];
        let stat = e.from_bundle(&bundle);
        let scaled = n as f64 * stat;
        let model = if e == Estimator::KappaHat { &uncentred } else { &centred };
        TestResult {
            statistic_name: e,
            statistic: stat,
            null_statistic: scaled,
            method: TestMethod::AsymptoticNull,
            p_value: null_pvalue(model, scaled),
            n,
            b_or_r: r,
            seed,
        }
    }))
}

/// Test independence of the two coordinates with one estimator.
pub fn independence_test(
    sample: &PairedSample,
    estimator: Estimator,
    method: TestMethod,
    b_or_r: usize,
    seed: SeedSpec,
) -> Result<TestResult> {
    independence_test_with_truncation(sample, estimator, method, b_or_r, seed, DEFAULT_TRUNCATION)
}

pub fn independence_test_with_truncation(
    sample: &PairedSample,
    estimator: Estimator,
    method: TestMethod,
    b_or_r: usize,
    seed: SeedSpec,
    truncation: usize,
) -> Result<TestResult> {
    let all = match method {
        TestMethod::Permutation => permutation_test_all(sample, b_or_r, seed)?,
        TestMethod::AsymptoticNull => asymptotic_test_all(sample, b_or_r, seed, truncation)?,
    };
    let idx = Estimator::ALL.iter().position(|&e| e == estimator).unwrap();
    Ok(all[idx])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerCell {
    pub family: FamilySpec,
    pub estimator: Estimator,
    pub rejections: usize,
    pub power: f64,
    pub mc_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    pub n: usize,
    pub replicates: usize,
    pub alpha: f64,
    pub method: TestMethod,
    #[serde(rename = "B_or_R")]
    pub b_or_r: usize,
    pub seed: SeedSpec,
    pub cells: Vec<PowerCell>,
}

impl PowerReport {
    pub fn power(&self, family: Family, theta: f64, estimator: Estimator) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.family.family == family && c.family.theta == theta && c.estimator == estimator)
            .map(|c| c.power)
    }
}

/// Settings shared by every cell of a power study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSettings {
    pub n: usize,
    pub replicates: usize,
    pub alpha: f64,
    pub method: TestMethod,
    pub b_or_r: usize,
    pub truncation: usize,
}

impl PowerSettings {
    /// n = 100, 1000 replicates, α = 0.05, 199 permutations.
    pub fn standard() -> Self {
        Self {
            n: 100,
            replicates: 1000,
            alpha: 0.05,
            method: TestMethod::Permutation,
            b_or_r: 199,
            truncation: DEFAULT_TRUNCATION,
        }
    }
}

/// Rejection rates of all three tests over `replicates` samples per grid point.
///
/// Replicate `r` of every grid point draws its sample from substream `r` of
/// the master seed, so rows share random numbers across θ and the result is
/// independent of the worker count.
pub fn power_study(grid: &[FamilySpec], settings: &PowerSettings, seed: SeedSpec) -> Result<PowerReport> {
    if settings.replicates < 100 {
        return Err(KappaError::InvalidArgument(format!(
            "need at least 100 replicates, got {}",
            settings.replicates
        )));
    }
    if !(settings.alpha > 0.0 && settings.alpha < 1.0) {
        return Err(KappaError::InvalidArgument(format!("alpha must lie in (0, 1), got {}", settings.alpha)));
    }
    for spec in grid {
        spec.validate()?;
    }
    let mut cells = Vec::with_capacity(grid.len() * 3);
    for spec in grid {
        let counts = (0..settings.replicates as u64)
            .into_par_iter()
            .map(|r| -> Result<[usize; 3]> {
                let rs = seed.with_stream(r);
                let sample = sample_family(spec, settings.n, rs)?;
                let test_seed = SeedSpec::new(rs.derive_master(TEST_STREAM_TAG), 0);
                let results = match settings.method {
                    TestMethod::Permutation => permutation_test_all(&sample, settings.b_or_r, test_seed)?,
                    TestMethod::AsymptoticNull => {
                        asymptotic_test_all(&sample, settings.b_or_r, test_seed, settings.truncation)?
                    }
                };
                Ok(results.map(|t| usize::from(t.p_value <= settings.alpha)))
            })
            .try_reduce(|| [0; 3], |a, b| Ok([a[0] + b[0], a[1] + b[1], a[2] + b[2]]))?;
        for (k, e) in Estimator::ALL.iter().enumerate() {
            let p = counts[k] as f64 / settings.replicates as f64;
            cells.push(PowerCell {
                family: *spec,
                estimator: *e,
                rejections: counts[k],
                power: p,
                mc_stderr: (p * (1.0 - p) / settings.replicates as f64).sqrt(),
            });
        }
    }
    Ok(PowerReport {
        n: settings.n,
        replicates: settings.replicates,
        alpha: settings.alpha,
        method: settings.method,
        b_or_r: settings.b_or_r,
        seed,
        cells,
    })
}

/// Power table with one block per family, θ across, estimators down.
pub fn render_power_table(report: &PowerReport) -> String {
    let mut out = String::new();
    let mut families: Vec<Family> = Vec::new();
    for c in &report.cells {
        if !families.contains(&c.family.family) {
            families.push(c.family.family);
        }
    }
    for fam in families {
        let mut thetas: Vec<f64> = Vec::new();
        for c in report.cells.iter().filter(|c| c.family.family == fam) {
            if !thetas.contains(&c.family.theta) {
                thetas.push(c.family.theta);
            }
        }
        let _ = writeln!(out, "{}", fam.title());
        let _ = write!(out, "{:<10}", "Theta");
        for t in &thetas {
            let _ = write!(out, "{:>8}", format!("{t}"));
        }
        out.push('\n');
        for e in Estimator::ALL {
            let _ = write!(out, "{}", e.padded_symbol(10));
            for t in &thetas {
                let p = report
                    .cells
                    .iter()
                    .find(|c| c.family.family == fam && c.family.theta == *t && c.estimator == e)
                    .map(|c| c.power)
                    .unwrap_or(f64::NAN);
                let _ = write!(out, "{:>8.2}", p);
            }
            out.push('\n');
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "n = {}, replicates = {}, alpha = {}, method = {}, B_or_R = {}",
        report.n,
        report.replicates,
        report.alpha,
        report.method.name(),
        report.b_or_r
    );
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityRow {
    pub n: usize,
    pub estimator: Estimator,
    /// Mean of the estimate minus κ(θ).
    pub bias: f64,
    /// √n times the root-mean-square error.
    pub scaled_rmse: f64,
    /// Mean and variance of √n(κ_est − κ)/√δ̂₁.
    pub std_mean: f64,
    pub std_variance: f64,
    pub ks_distance: f64,
    pub anderson_darling: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub family: FamilySpec,
    pub kappa: f64,
    pub replicates: usize,
    pub rows: Vec<NormalityRow>,
}

impl NormalityReport {
    pub fn row(&self, n: usize, estimator: Estimator) -> Option<&NormalityRow> {
        self.rows.iter().find(|r| r.n == n && r.estimator == estimator)
    }
}

/// Sampling behaviour of the three estimators around the true κ(θ) under
/// dependence: bias, √n-scaled RMSE and closeness of the studentised values
/// `√n(κ_est − κ)/√δ̂₁` to N(0, 1).
pub fn normality_diagnostic(
    family: &FamilySpec,
    n_grid: &[usize],
    replicates: usize,
    seed: SeedSpec,
) -> Result<NormalityReport> {
    let kappa = family.kappa()?;
    if replicates < 2 {
        return Err(KappaError::InvalidArgument("need at least 2 replicates".into()));
    }
    let mut rows = Vec::new();
    for &n in n_grid {
        if n < 3 {
            return Err(KappaError::SampleTooSmall { n, min: 3 });
        }
        let master = seed.derive_master(n as u64);
        let draws: Vec<([f64; 3], f64)> = (0..replicates as u64)
            .into_par_iter()
            .map(|r| -> Result<([f64; 3], f64)> {
                let sample = sample_family(family, n, SeedSpec::new(master, r))?;
                let b = compute_ustats(&sample)?;
                Ok((Estimator::ALL.map(|e| e.from_bundle(&b)), delta1_plugin(&sample)?))
            })
            .collect::<Result<_>>()?;
        let root_n = (n as f64).sqrt();
        for (k, e) in Estimator::ALL.iter().enumerate() {
            let errors: Vec<f64> = draws.iter().map(|(v, _)| v[k] - kappa).collect();
            let z: Vec<f64> = draws
                .iter()
                .filter(|(_, d)| *d > 0.0)
                .map(|(v, d)| root_n * (v[k] - kappa) / d.sqrt())
                .collect();
            let (zm, zv) = mean_variance(&z);
            rows.push(NormalityRow {
                n,
                estimator: *e,
                bias: mean_variance(&errors).0,
                scaled_rmse: root_n
                    * (errors.iter().map(|e| e * e).collect::<CompensatedSum>().total() / errors.len() as f64)
                        .sqrt(),
                std_mean: zm,
                std_variance: zv,
                ks_distance: ks_normal(&z),
                anderson_darling: anderson_darling_normal(&z),
            });
        }
    }
    Ok(NormalityReport {
        family: *family,
        kappa,
        replicates,
        rows,
    })
}

/// Sample mean and unbiased variance.
pub fn mean_variance(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = crate::sum::sum(v) / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).collect::<CompensatedSum>().total() / (n - 1.0);
    (m, var)
}

/// One-sample Kolmogorov–Smirnov distance to a continuous CDF.
pub fn ks_one_sample(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

fn ks_normal(values: &[f64]) -> f64 {
    let std = Normal::standard();
    ks_one_sample(values, |x| std.cdf(x))
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Anderson–Darling A² against the standard normal.
pub fn anderson_darling_normal(values: &[f64]) -> f64 {
    let std = Normal::standard();
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let eps = 1e-300;
    let s: f64 = (0..n)
        .map(|i| {
            let lo = std.cdf(v[i]).max(eps).ln();
            let hi = (1.0 - std.cdf(v[n - 1 - i])).max(eps).ln();
            (2 * i + 1) as f64 * (lo + hi)
        })
        .sum();
    -(n as f64) - s / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub estimator: Estimator,
    pub n: usize,
    pub evals: usize,
    pub repetitions: usize,
    pub mean_seconds: f64,
    pub sd_seconds: f64,
}

pub const TIMING_REPETITIONS: usize = 10;

/// Wall-clock time to evaluate each estimator on `evals` fresh samples of
/// size `n`, repeated ten times on the calling thread. Sample generation is
/// not timed.
pub fn timing_benchmark(
    estimators: &[Estimator],
    n: usize,
    evals: usize,
    family: &FamilySpec,
    seed: SeedSpec,
) -> Result<Vec<TimingReport>> {
    if evals < 10 {
        return Err(KappaError::InvalidArgument(format!("need at least 10 evaluations, got {evals}")));
    }
    if n < 3 {
        return Err(KappaError::SampleTooSmall { n, min: 3 });
    }
    let samples: Vec<PairedSample> = (0..evals as u64)
        .map(|r| sample_family(family, n, seed.with_stream(r)))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(estimators.len());
    for &e in estimators {
        let mut times = Vec::with_capacity(TIMING_REPETITIONS);
        let mut sink = 0.0;
        for _ in 0..TIMING_REPETITIONS {
            let start = Instant::now();
            for s in &samples {
                sink += e.evaluate(s)?;
            }
            times.push(start.elapsed().as_secs_f64());
        }
        std::hint::black_box(sink);
        let (mean, var) = mean_variance(&times);
        out.push(TimingReport {
            estimator: e,
            n,
            evals,
            repetitions: TIMING_REPETITIONS,
            mean_seconds: mean,
            sd_seconds: var.max(0.0).sqrt(),
        });
    }
    Ok(out)
}

pub fn render_timing_table(reports: &[TimingReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10}{:>8}{:>8}{:>14}{:>14}",
        "Measure", "n", "evals", "mean (s)", "sd (s)"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{}{:>8}{:>8}{:>14.6}{:>14.6}",
            r.estimator.padded_symbol(10),
            r.n,
            r.evals,
            r.mean_seconds,
            r.sd_seconds
        );
    }
    let _ = writeln!(out, "over {} repetitions", TIMING_REPETITIONS);
    out
}
