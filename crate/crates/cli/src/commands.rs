use std::path::Path;

use kappa_core::{
    discretize_marginal, empirical_marginal, estimate_all, kappa_quadrature_oracle, kernel_eigenvalues,
    load_sample, marginal_quantile, permutation_test_all, asymptotic_test_all, power_study,
    render_power_table, render_timing_table, rho_estimates, sample_family, timing_benchmark, write_sample,
    Coordinate, Estimator, Family, FamilySpec, NumericConfig, PairedSample, PowerSettings, SeedSpec,
    TestMethod, TestResult,
};
use serde::Serialize;

use crate::args::*;
use crate::error::{CliError, UsageContext};
use crate::report::{csv_text, key_value_table, Report};

pub fn dispatch(cli: &Cli) -> Result<String, CliError> {
    let seed = SeedSpec::new(cli.seed, 0);
    let report = match &cli.command {
        Command::Estimate(a) => estimate(a)?,
        Command::Test(a) => test(a, seed)?,
        Command::Eigen(a) => eigen(a)?,
        Command::Sample(a) => return sample(a, seed, cli.output),
        Command::KappaTheta(a) => kappa_theta(a)?,
        Command::Power(a) => power(a, seed)?,
        Command::Bench(a) => bench(a, seed)?,
    };
    Ok(report.render(cli.output))
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn load(path: &Path) -> Result<PairedSample, CliError> {
    Ok(load_sample(path)?)
}

fn family_spec(family: Family, theta: f64, sigma1: f64, sigma2: f64) -> Result<FamilySpec, CliError> {
    let spec = FamilySpec {
        family,
        theta,
        sigma1,
        sigma2,
    };
    spec.validate().into_usage()?;
    Ok(spec)
}

fn require(ok: bool, message: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::usage("INVALID_ARGUMENT", message()))
    }
}

#[derive(Serialize)]
struct EstimateOutput {
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_tilde: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta1_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_tilde: Option<f64>,
}

fn estimate(a: &EstimateArgs) -> Result<Report, CliError> {
    let sample = load(&a.input)?;
    let est = estimate_all(&sample, a.variance)?;
    let rho = if a.rho { Some(rho_estimates(&sample)?) } else { None };
    let chosen = a.estimator.selected();
    let pick = |e: Estimator, v: f64| chosen.contains(&e).then_some(v);
    let out = EstimateOutput {
        n: est.n,
        kappa_star: pick(Estimator::KappaStar, est.kappa_star),
        kappa_tilde: pick(Estimator::KappaTilde, est.kappa_tilde),
        kappa_hat: pick(Estimator::KappaHat, est.kappa_hat),
        delta1_hat: est.delta1_hat,
        rho_hat: rho.map(|r| r.rho_hat),
        rho_tilde: rho.map(|r| r.rho_tilde),
    };

    let fields: Vec<(&str, Option<f64>)> = vec![
        ("kappa_star", out.kappa_star),
        ("kappa_tilde", out.kappa_tilde),
        ("kappa_hat", out.kappa_hat),
        ("delta1_hat", out.delta1_hat),
        ("rho_hat", out.rho_hat),
        ("rho_tilde", out.rho_tilde),
    ];
    let present: Vec<(&str, f64)> = fields.into_iter().filter_map(|(k, v)| v.map(|v| (k, v))).collect();
    let mut rows = vec![("n".to_string(), out.n.to_string())];
    rows.extend(present.iter().map(|(k, v)| (k.to_string(), num(*v))));
    let mut header = vec!["n"];
    header.extend(present.iter().map(|(k, _)| *k));
    let mut line = vec![out.n.to_string()];
    line.extend(present.iter().map(|(_, v)| num(*v)));
    Ok(Report::new(&out, key_value_table(&rows), csv_text(&header, &[line])))
}

fn test(a: &TestArgs, seed: SeedSpec) -> Result<Report, CliError> {
    require(a.b >= 99, || format!("--b must be at least 99, got {}", a.b))?;
    require(a.truncation >= 1, || "--truncation must be at least 1".into())?;
    let sample = load(&a.input)?;
    let all = match TestMethod::from(a.method) {
        TestMethod::Permutation => permutation_test_all(&sample, a.b, seed)?,
        TestMethod::AsymptoticNull => asymptotic_test_all(&sample, a.b, seed, a.truncation)?,
    };
    let chosen = a.estimator.selected();
    let results: Vec<TestResult> = all.into_iter().filter(|r| chosen.contains(&r.statistic_name)).collect();

    let header = ["statistic", "value", "null_statistic", "method", "p_value", "n", "B_or_R"];
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            vec![
                r.statistic_name.name().to_string(),
                num(r.statistic),
                num(r.null_statistic),
                r.method.name().to_string(),
                num(r.p_value),
                r.n.to_string(),
                r.b_or_r.to_string(),
            ]
        })
        .collect();
    let mut table = format!("{:<12}{:>24}{:>12}  {}\n", "Statistic", "value", "p-value", "method");
    for r in &results {
        table.push_str(&format!(
            "{}{:>24}{:>12.4}  {} (B/R = {})\n",
            r.statistic_name.padded_symbol(12),
            num(r.statistic),
            r.p_value,
            r.method.name(),
            r.b_or_r
        ));
    }
    let csv = csv_text(&header, &rows);
    Ok(if results.len() == 1 {
        Report::new(&results[0], table, csv)
    } else {
        Report::new(&results, table, csv)
    })
}

#[derive(Serialize)]
struct EigenOutput {
    marginal: String,
    t: usize,
    k: usize,
    lambdas: Vec<f64>,
    sum: f64,
    trace_target: f64,
}

fn eigen(a: &EigenArgs) -> Result<Report, CliError> {
    require(a.k >= 1, || "--k must be at least 1".into())?;
    let cfg = NumericConfig::default();
    let (name, marginal) = match a.marginal.family() {
        Some(family) => {
            require(a.t >= 2, || format!("--t must be at least 2, got {}", a.t))?;
            require(a.input.is_none(), || "--input only applies to --marginal empirical".into())?;
            let spec = FamilySpec::new(family, 0.0).into_usage()?;
            let q = |u: f64| marginal_quantile(&spec, Coordinate::X, u).expect("grid lies inside (0, 1)");
            (family.name().to_string(), discretize_marginal(q, a.t)?)
        }
        None => {
            let path = a
                .input
                .as_ref()
                .ok_or_else(|| CliError::usage("INVALID_ARGUMENT", "--marginal empirical needs --input FILE"))?;
            let sample = load(path)?;
            let values = match a.column {
                ColumnChoice::X => sample.xs(),
                ColumnChoice::Y => sample.ys(),
            };
            ("empirical".to_string(), empirical_marginal(values)?)
        }
    };
    let spectrum = kernel_eigenvalues(&marginal, a.k, &cfg)?;
    let out = EigenOutput {
        marginal: name,
        t: spectrum.t,
        k: spectrum.lambdas.len(),
        sum: spectrum.sum(),
        trace_target: spectrum.trace_target,
        lambdas: spectrum.lambdas,
    };

    let mut table = format!("{:>6}  {}\n", "k", "lambda");
    for (i, l) in out.lambdas.iter().enumerate() {
        table.push_str(&format!("{:>6}  {}\n", i + 1, num(*l)));
    }
    table.push_str(&format!(
        "sum of {} eigenvalues {}; trace target {}\n",
        out.k,
        num(out.sum),
        num(out.trace_target)
    ));
    let rows: Vec<Vec<String>> = out
        .lambdas
        .iter()
        .enumerate()
        .map(|(i, l)| vec![(i + 1).to_string(), num(*l)])
        .collect();
    let csv = csv_text(&["k", "lambda"], &rows);
    Ok(Report::new(&out, table, csv))
}

#[derive(Serialize)]
struct SampleWritten<'a> {
    path: &'a Path,
    family: Family,
    theta: f64,
    n: usize,
}

/// The sample itself is always CSV; `--output` only shapes the summary
/// printed when writing to a file.
fn sample(a: &SampleArgs, seed: SeedSpec, format: OutputFormat) -> Result<String, CliError> {
    require(a.n >= 2, || format!("--n must be at least 2, got {}", a.n))?;
    let spec = family_spec(a.family, a.theta, a.sigma1, a.sigma2)?;
    let s = sample_family(&spec, a.n, seed)?;
    let Some(path) = &a.out else {
        return Ok(s.to_csv_string());
    };
    write_sample(&s, path)?;
    let info = SampleWritten {
        path,
        family: a.family,
        theta: a.theta,
        n: a.n,
    };
    let table = format!("wrote {} pairs from {} (theta = {}) to {}\n", a.n, a.family.title(), a.theta, path.display());
    let csv = csv_text(
        &["path", "family", "theta", "n"],
        &[vec![path.display().to_string(), a.family.name().into(), num(a.theta), a.n.to_string()]],
    );
    Ok(Report::new(&info, table, csv).render(format))
}

#[derive(Serialize)]
struct KappaThetaOutput {
    family: Family,
    theta: f64,
    sigma1: f64,
    sigma2: f64,
    kappa: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_relative_difference: Option<f64>,
}

fn kappa_theta(a: &KappaThetaArgs) -> Result<Report, CliError> {
    if !matches!(a.family, Family::Normal | Family::Exponential) {
        return Err(CliError::usage(
            "UNSUPPORTED_FAMILY",
            format!("closed-form kappa is available for normal and exponential, not {}", a.family.name()),
        ));
    }
    let spec = family_spec(a.family, a.theta, a.sigma1, a.sigma2)?;
    let kappa = spec.kappa()?;
    let oracle = if a.oracle {
        Some(kappa_quadrature_oracle(&spec, &NumericConfig::default())?)
    } else {
        None
    };
    let out = KappaThetaOutput {
        family: a.family,
        theta: a.theta,
        sigma1: spec.sigma1,
        sigma2: spec.sigma2,
        kappa,
        oracle,
        oracle_relative_difference: oracle.map(|q| {
            let scale = q.abs().max(kappa.abs());
            if scale == 0.0 {
                0.0
            } else {
                (q - kappa).abs() / scale
            }
        }),
    };
    let mut rows = vec![("kappa".to_string(), num(out.kappa))];
    let mut header = vec!["family", "theta", "sigma1", "sigma2", "kappa"];
    let mut line = vec![a.family.name().to_string(), num(a.theta), num(out.sigma1), num(out.sigma2), num(kappa)];
    if let (Some(q), Some(d)) = (out.oracle, out.oracle_relative_difference) {
        rows.push(("oracle".into(), num(q)));
        rows.push(("relative_difference".into(), num(d)));
        header.extend(["oracle", "oracle_relative_difference"]);
        line.extend([num(q), num(d)]);
    }
    // a bare closed-form query prints just the number
    let table = if oracle.is_none() { format!("{}\n", num(kappa)) } else { key_value_table(&rows) };
    Ok(Report::new(&out, table, csv_text(&header, &[line])))
}

fn power(a: &PowerArgs, seed: SeedSpec) -> Result<Report, CliError> {
    require(a.n >= 3, || format!("--n must be at least 3, got {}", a.n))?;
    require(a.replicates >= 100, || format!("--replicates must be at least 100, got {}", a.replicates))?;
    require(a.alpha > 0.0 && a.alpha < 1.0, || format!("--alpha must lie in (0, 1), got {}", a.alpha))?;
    require(a.b >= 99, || format!("--b must be at least 99, got {}", a.b))?;
    require(a.truncation >= 1, || "--truncation must be at least 1".into())?;
    let mut grid = Vec::with_capacity(a.families.len() * a.thetas.len());
    for &family in &a.families {
        for &theta in &a.thetas {
            grid.push(FamilySpec::new(family, theta).into_usage()?);
        }
    }
    let settings = PowerSettings {
        n: a.n,
        replicates: a.replicates,
        alpha: a.alpha,
        method: a.method.into(),
        b_or_r: a.b,
        truncation: a.truncation,
    };
    let report = power_study(&grid, &settings, seed)?;
    let rows: Vec<Vec<String>> = report
        .cells
        .iter()
        .map(|c| {
            vec![
                c.family.family.name().to_string(),
                num(c.family.theta),
                c.estimator.name().to_string(),
                c.rejections.to_string(),
                num(c.power),
                num(c.mc_stderr),
            ]
        })
        .collect();
    let csv = csv_text(&["family", "theta", "estimator", "rejections", "power", "mc_stderr"], &rows);
    Ok(Report::new(&report, render_power_table(&report), csv))
}

fn bench(a: &BenchArgs, seed: SeedSpec) -> Result<Report, CliError> {
    require(a.n >= 3, || format!("--n must be at least 3, got {}", a.n))?;
    require(a.evals >= 10, || format!("--evals must be at least 10, got {}", a.evals))?;
    require(!a.estimators.is_empty(), || "--estimators is empty".into())?;
    let spec = FamilySpec::new(a.family, a.theta).into_usage()?;
    let reports = timing_benchmark(&a.estimators, a.n, a.evals, &spec, seed)?;
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.estimator.name().to_string(),
                r.n.to_string(),
                r.evals.to_string(),
                r.repetitions.to_string(),
                num(r.mean_seconds),
                num(r.sd_seconds),
            ]
        })
        .collect();
    let csv = csv_text(&["estimator", "n", "evals", "repetitions", "mean_seconds", "sd_seconds"], &rows);
    Ok(Report::new(&reports, render_timing_table(&reports), csv))
}
