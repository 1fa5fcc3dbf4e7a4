//! Sparsity-likelihood scanning for sparse mean changes in panels of
//! time series with temporally dependent noise.

pub mod covariance;
pub mod detector;
pub mod error;
pub mod evaluation;
pub mod ingest;
pub mod normal;
pub mod scoring;
pub mod simulation;
pub mod windows;

pub use covariance::{b_of_h, required_h_over_b, rho_z, CovarianceKernel, CustomKernel, SignalRegime, TheoryParams};
pub use detector::{
    detect_changes, estimate_change, first_pass_max, first_pass_max_sequential, scan_scale,
    scan_scale_sequential, ChangePointReport, Detection, DetectionConfig, Diagnostics,
    ScanOutcome, SeriesMatrix,
};
pub use error::{Error, Result};
pub use evaluation::{
    adjusted_rand_index, count_histogram, hit_rate, rand_index, CountSummary, Segmentation,
};
pub use ingest::{
    estimate_ar1, log_difference, max_abs_cross_correlation, read_csv, sample_skewness,
    skewness_filter, standardize, Ar1Fit, CsvLayout, Dataset, DropReason, MissingPolicy,
    PoolDiagnostics, Stage,
};
pub use normal::log_p_value;
pub use scoring::{default_lambda2, window_penalty, SparsityWeights};
pub use simulation::{
    calibrate_threshold, empirical_quantile, gen_ar1, multi_change_means, null_scan_maxima,
    run_accuracy_study, single_change_means, substream_seed, Ar1Params, CalibrationSpec,
    StudyCell, StudyRow, StudySettings,
};
pub use windows::{ScaleEntry, WindowSchedule};
