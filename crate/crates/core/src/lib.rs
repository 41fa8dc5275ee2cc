//! Bergsma's covariance κ: estimators, closed forms, null-limit spectra,
//! bivariate samplers and independence tests.

pub mod closed_form;
pub mod config;
pub mod error;
pub mod estimators;
pub mod inference;
pub mod rng;
pub mod sample;
pub mod samplers;
pub mod spectral;
pub mod sum;
pub mod ustat;

pub use closed_form::{
    bvn_moments, exp_integral_g, kappa_bvn, kappa_bvn_second_derivative, kappa_gbed,
    kappa_gbed_derivative, kappa_quadrature_oracle, Family, FamilySpec, PopulationMoments,
};
pub use config::NumericConfig;
pub use error::{KappaError, Result};
pub use estimators::{
    delta1_plugin, estimate_all, kappa_hat_by_definition, kappa_hat_direct, kappa_star,
    kappa_tilde, kappa_tilde_direct, rho_estimates, Estimator, KappaEstimates, RhoEstimates,
};
pub use inference::{
    asymptotic_test_all, independence_test, normality_diagnostic, permutation_test_all,
    power_study, render_power_table, render_timing_table, timing_benchmark, NormalityReport,
    NormalityRow, PowerCell, PowerReport, PowerSettings, TestMethod, TestResult, TimingReport,
};
pub use rng::{substream, SeedSpec, Substream};
pub use sample::{load_sample, write_sample, PairedSample};
pub use samplers::{
    marginal_cdf, marginal_quantile, sample_exponential_two_rate, sample_family, Coordinate,
};
pub use spectral::{
    dense_kernel_eigenvalues, discretize_marginal, empirical_marginal, kernel_eigenvalues,
    null_limit_model, null_pvalue, DiscreteMarginal, EigenSpectrum, NullLimitModel,
    NullLimitSummary,
};
pub use ustat::{compute_ustats, compute_ustats_bruteforce, UStatBundle};
