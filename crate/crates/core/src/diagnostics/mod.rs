//! Measurements on fields and trajectories: conserved drift, microscopic
//! conservation residuals, local smoothing, equicontinuity and tightness,
//! convergence of the difference flows, and norm inflation.
//!
//! Every report can be flattened into a [`LongTable`] (parameter columns,
//! `quantity`, `value`) and serialized as JSON.

pub mod convergence;
pub mod drift;
pub mod inflation;
pub mod micro;
pub mod report;
pub mod smoothing;

pub use convergence::{kappa_convergence_study, kappa_convergence_study_with, ConvergenceOptions, ConvergenceRow, ConvergenceTable};
pub use drift::{drift_report, DriftReport};
pub use inflation::{
    inflation_data, band_ratio, log_lambda_fit, mean_rate, mean_rate_fourier, norm_inflation_experiment, scaled_norms_sq,
    InflationConfig, InflationReport, LogFit, MeanProduction, MultiBump, NormSeries, Parity, ScaledNormQuadrature,
};
pub use micro::{micro_refinement, micro_residual, micro_residual_with, IntegratedCheck, ResidualReport};
pub use report::{relative_difference, write_json, LongTable};
pub use smoothing::{
    equicontinuity_family, equicontinuity_sweep, equicontinuity_tail, local_smoothing_norm, local_smoothing_norm_with,
    tightness_metric, tightness_profile, tightness_sweep, SmoothingReport, DEFAULT_SMOOTHING_LATTICE,
};
