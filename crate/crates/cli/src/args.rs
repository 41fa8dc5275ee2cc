use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kappa_core::{Estimator, Family, TestMethod};

#[derive(Debug, Parser)]
#[command(name = "kappa", version, about = "Bergsma's covariance: estimation, independence tests and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,

    /// Master seed; every random draw derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for Monte Carlo loops (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Table,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate κ from a two-column CSV sample.
    Estimate(EstimateArgs),
    /// Test independence of the two columns.
    Test(TestArgs),
    /// Kernel eigenvalues of a marginal distribution.
    Eigen(EigenArgs),
    /// Draw a sample from one of the bivariate families.
    Sample(SampleArgs),
    /// Population κ(θ) in closed form.
    KappaTheta(KappaThetaArgs),
    /// Monte Carlo power of the three κ tests.
    Power(PowerArgs),
    /// Time estimator evaluations.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorChoice {
    All,
    Star,
    Tilde,
    Hat,
}

impl EstimatorChoice {
    pub fn selected(self) -> Vec<Estimator> {
        match self {
            EstimatorChoice::All => Estimator::ALL.to_vec(),
            EstimatorChoice::Star => vec![Estimator::KappaStar],
            EstimatorChoice::Tilde => vec![Estimator::KappaTilde],
            EstimatorChoice::Hat => vec![Estimator::KappaHat],
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = EstimatorChoice::All)]
    pub estimator: EstimatorChoice,
    /// Also report the normalised coefficients ρ̂ and ρ̃.
    #[arg(long)]
    pub rho: bool,
    /// Also report the plug-in asymptotic variance δ̂₁.
    #[arg(long)]
    pub variance: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    Permutation,
    Asymptotic,
}

impl From<MethodChoice> for TestMethod {
    fn from(m: MethodChoice) -> Self {
        match m {
            MethodChoice::Permutation => TestMethod::Permutation,
            MethodChoice::Asymptotic => TestMethod::AsymptoticNull,
        }
    }
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = EstimatorChoice::Star)]
    pub estimator: EstimatorChoice,
    #[arg(long, value_enum, default_value_t = MethodChoice::Permutation)]
    pub method: MethodChoice,
    /// Permutations, or Monte Carlo draws from the limit law.
    #[arg(long, default_value_t = 999)]
    pub b: usize,
    /// Eigenvalues kept per marginal for the asymptotic method.
    #[arg(long, default_value_t = 100)]
    pub truncation: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MarginalChoice {
    Uniform,
    Normal,
    Exponential,
    Laplace,
    Logistic,
    Chisquare,
    Empirical,
}

impl MarginalChoice {
    pub fn family(self) -> Option<Family> {
        Some(match self {
            MarginalChoice::Uniform => Family::Uniform,
            MarginalChoice::Normal => Family::Normal,
            MarginalChoice::Exponential => Family::Exponential,
            MarginalChoice::Laplace => Family::Laplace,
            MarginalChoice::Logistic => Family::Logistic,
            MarginalChoice::Chisquare => Family::Chisquare,
            MarginalChoice::Empirical => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ColumnChoice {
    X,
    Y,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[arg(long, value_enum)]
    pub marginal: MarginalChoice,
    /// Sample file for `--marginal empirical`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Column of the sample file to use.
    #[arg(long, value_enum, default_value_t = ColumnChoice::X)]
    pub column: ColumnChoice,
    /// Grid size of the discretised marginal.
    #[arg(long, default_value_t = 1000)]
    pub t: usize,
    /// Number of eigenvalues to report.
    #[arg(long, default_value_t = 100)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long)]
    pub n: usize,
    /// Destination file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
}

#[derive(Debug, Args)]
pub struct KappaThetaArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Cross-check against two-dimensional quadrature.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_family)]
    pub families: Vec<Family>,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub thetas: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = MethodChoice::Permutation)]
    pub method: MethodChoice,
    /// Permutations (or limit-law draws) per replicate.
    #[arg(long, default_value_t = 199)]
    pub b: usize,
    #[arg(long, default_value_t = 100)]
    pub truncation: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "star,tilde,hat", value_parser = parse_estimator)]
    pub estimators: Vec<Estimator>,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub evals: usize,
    #[arg(long, value_parser = parse_family, default_value = "normal")]
    pub family: Family,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: kappa_core::KappaError| e.to_string())
}

fn parse_estimator(s: &str) -> Result<Estimator, String> {
    s.parse().map_err(|e: kappa_core::KappaError| e.to_string())
}
