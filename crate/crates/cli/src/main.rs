//! `slscan` command line: detect | simulate | calibrate | evaluate.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or model error.

mod config;
mod report;

use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use slscan::{
    adjusted_rand_index, calibrate_threshold, default_lambda2, detect_changes, estimate_ar1,
    first_pass_max, gen_ar1, max_abs_cross_correlation, multi_change_means, rand_index, read_csv,
    run_accuracy_study, single_change_means, skewness_filter, standardize, Ar1Params,
    CalibrationSpec, CovarianceKernel, CsvLayout, DetectionConfig, Error, MissingPolicy, Result,
    Segmentation, SeriesMatrix, SparsityWeights, StudyCell, StudySettings, WindowSchedule,
};

use config::ScenarioConfig;
use report::{
    read_detected_positions, report_to_json, write_dataset_csv, write_report_csv,
};

#[derive(Parser)]
#[command(name = "slscan", version, about = "Sparse change-point scanner for panels of time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan a CSV panel for sparse mean changes
    Detect(Box<DetectArgs>),
    /// Generate synthetic panels or localization-accuracy tables
    Simulate(SimulateArgs),
    /// Calibrate a detection threshold on simulated null data
    Calibrate(CalibrateArgs),
    /// Compare detected change points against known ones
    Evaluate(EvaluateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Layout {
    /// Each file row is one time point, each column one sequence
    RowsTime,
    /// Each file row is one sequence
    RowsSeries,
}

impl From<Layout> for CsvLayout {
    fn from(layout: Layout) -> CsvLayout {
        match layout {
            Layout::RowsTime => CsvLayout::RowsAreTime,
            Layout::RowsSeries => CsvLayout::RowsAreSeries,
        }
    }
}

#[derive(Args)]
#[command(group(ArgGroup::new("threshold").required(true).args(["c", "target_count"])))]
struct DetectArgs {
    /// Input CSV panel
    #[arg(long)]
    input: PathBuf,
    /// Orientation of the input file
    #[arg(long, value_enum, default_value_t = Layout::RowsTime)]
    layout: Layout,
    /// First row of the input is a header
    #[arg(long)]
    header: bool,
    /// Drop file rows containing empty cells instead of rejecting the file
    #[arg(long)]
    drop_missing: bool,
    /// Replace each sequence by its log returns before scanning
    #[arg(long)]
    log_diff: bool,
    /// Drop sequences whose |sample skewness| exceeds this cutoff
    #[arg(long, num_args = 0..=1, default_missing_value = "1.0")]
    skew_threshold: Option<f64>,
    /// Fit AR(1) per sequence, standardize by the innovation scale, pool phi
    #[arg(long)]
    estimate_ar1: bool,
    /// AR(1) coefficient of the noise kernel (1 selects a random walk);
    /// without this or --estimate-ar1 the noise is treated as independent
    #[arg(long, conflicts_with = "estimate_ar1", allow_hyphen_values = true)]
    phi: Option<f64>,
    /// Innovation standard deviation of the noise kernel
    #[arg(long, default_value_t = 1.0)]
    sigma_eps: f64,
    /// Detection threshold
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Search for the threshold that returns this many change points
    #[arg(long)]
    target_count: Option<usize>,
    /// Weight multiplier of the heavy-tail score component
    #[arg(long, default_value_t = 1.0)]
    lambda1: f64,
    /// Weight multiplier of the moderate-tail score component
    /// [default: sqrt(ln T / ln ln T)]
    #[arg(long)]
    lambda2: Option<f64>,
    /// Geometric growth factor of the window schedule
    #[arg(long, default_value_t = 1.1)]
    growth: f64,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the detections as a (t, scale, score) CSV
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("product").required(true).multiple(true).args(["out", "study"])))]
struct SimulateArgs {
    /// Scenario config file (key = value lines)
    #[arg(long)]
    config: PathBuf,
    /// Write the generated panel here (rows are time points, named header)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run the localization-accuracy study and write its table here
    #[arg(long)]
    study: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Number of sequences
    #[arg(long)]
    n: usize,
    /// Number of observations per sequence
    #[arg(long)]
    t: usize,
    /// AR(1) coefficient of the null model (1 selects a random walk)
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi: f64,
    /// Innovation standard deviation of the null model
    #[arg(long, default_value_t = 1.0)]
    sigma_eps: f64,
    /// AR(1) drift of the null model
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    drift: f64,
    /// Probability of any detection on null data
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Null replicates
    #[arg(long, default_value_t = 500)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    lambda1: f64,
    /// [default: sqrt(ln T / ln ln T)]
    #[arg(long)]
    lambda2: Option<f64>,
    #[arg(long, default_value_t = 1.1)]
    growth: f64,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Detections CSV as written by `detect --csv` (needs a `t` column)
    #[arg(long)]
    detected: PathBuf,
    /// True change points, comma separated
    #[arg(long, value_delimiter = ',')]
    truth: Vec<usize>,
    /// Total number of observations
    #[arg(long)]
    t: usize,
    /// Also report whether the detection nearest the first true change
    /// lies within this distance
    #[arg(long)]
    k: Option<usize>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            err.print().ok();
            std::process::exit(code);
        }
    };
    if let Ok(raw) = std::env::var("SLSCAN_THREADS") {
        match raw.trim().parse::<usize>() {
            Ok(threads) => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global()
                    .ok();
            }
            Err(_) => {
                eprintln!("error: SLSCAN_THREADS must be a thread count, got {raw:?}");
                std::process::exit(1);
            }
        }
    }
    let outcome = match cli.command {
        Command::Detect(args) => run_detect(*args),
        Command::Simulate(args) => run_simulate(args),
        Command::Calibrate(args) => run_calibrate(args),
        Command::Evaluate(args) => run_evaluate(args),
    };
    if let Err(err) = outcome {
        eprintln!("error: {err}");
        std::process::exit(2);
    }
}

/// Noise params for a CLI-specified kernel; stationary noise other than
/// white noise is generated with a burn-in so paths match the stationary
/// covariance the detector normalizes by.
fn noise_params(drift: f64, phi: f64, sigma_eps: f64) -> Result<Ar1Params> {
    let mut params = Ar1Params::new(drift, phi, sigma_eps)?;
    params.burn_in = phi != 0.0 && phi.abs() < 1.0;
    Ok(params)
}

fn kernel_json(kernel: &CovarianceKernel) -> Value {
    match kernel {
        CovarianceKernel::Independence => json!({ "type": "independence" }),
        CovarianceKernel::StationaryAr1 { phi, sigma_eps } => {
            json!({ "type": "stationary_ar1", "phi": phi, "sigma_eps": sigma_eps })
        }
        CovarianceKernel::RandomWalk { sigma_eps } => {
            json!({ "type": "random_walk", "sigma_eps": sigma_eps })
        }
        CovarianceKernel::Custom(_) => json!({ "type": "custom" }),
    }
}

fn run_detect(args: DetectArgs) -> Result<()> {
    let missing = if args.drop_missing {
        MissingPolicy::DropRows
    } else {
        MissingPolicy::Reject
    };
    let mut data = read_csv(&args.input, args.layout.into(), args.header, missing)?;
    let mut extra = Map::new();
    if args.log_diff {
        data = data.log_differenced()?;
    }
    if let Some(cutoff) = args.skew_threshold {
        let (kept, dropped) = skewness_filter(&data, cutoff)?;
        data = kept;
        let dropped: Vec<Value> = dropped
            .iter()
            .map(|(name, reason)| json!({ "name": name, "reason": reason.to_string() }))
            .collect();
        extra.insert("dropped_sequences".into(), Value::Array(dropped));
    }
    let kernel = if args.estimate_ar1 {
        let fits = data
            .values
            .iter()
            .map(|row| estimate_ar1(row))
            .collect::<Result<Vec<_>>>()?;
        let (scaled, pooled, diag) = standardize(&data, &fits)?;
        data = scaled;
        if diag.heterogeneous {
            eprintln!(
                "warning: per-sequence AR(1) slopes spread over an interquartile range of {:.3}; one pooled kernel is a rough fit",
                diag.phi_iqr
            );
        }
        extra.insert("pooled_phi".into(), json!(pooled.phi));
        extra.insert("pooled_drift".into(), json!(pooled.drift));
        extra.insert("phi_iqr".into(), json!(diag.phi_iqr));
        pooled.kernel()?
    } else if let Some(phi) = args.phi {
        noise_params(0.0, phi, args.sigma_eps)?.kernel()?
    } else {
        CovarianceKernel::Independence
    };
    if let Some(rho) = max_abs_cross_correlation(&data) {
        extra.insert("max_abs_cross_correlation".into(), json!(rho));
    }
    let stages: Vec<String> = data.provenance.iter().map(|s| s.to_string()).collect();
    extra.insert("provenance".into(), json!(stages));
    let matrix = data.to_series_matrix()?;
    let t_len = matrix.n_observations();
    let lambda2 = match args.lambda2 {
        Some(l) => l,
        None => default_lambda2(t_len)?,
    };
    let mut cfg = DetectionConfig {
        threshold: args.c.unwrap_or(f64::INFINITY),
        weights: SparsityWeights::new(args.lambda1, lambda2, matrix.n_sequences())?,
        kernel,
        schedule: WindowSchedule::geometric(t_len, args.growth)?,
        start_scale: 1,
    };
    if let Some(target) = args.target_count {
        let (c, achieved) = threshold_for_count(&matrix, &mut cfg, target)?;
        cfg.threshold = c;
        extra.insert("target_count".into(), json!(target));
        extra.insert("achieved_count".into(), json!(achieved));
        if achieved != target {
            eprintln!(
                "warning: no threshold returns exactly {target} change points; nearest achievable is {achieved}"
            );
        }
    }
    let report = detect_changes(&matrix, &cfg)?;
    let config_echo = json!({
        "input": args.input.display().to_string(),
        "threshold": cfg.threshold,
        "lambda1": args.lambda1,
        "lambda2": lambda2,
        "n_sequences": matrix.n_sequences(),
        "t_len": t_len,
        "growth": args.growth,
        "start_scale": 1,
        "kernel": kernel_json(&cfg.kernel),
    });
    let value = report_to_json(&report, config_echo, extra);
    let mut text = serde_json::to_string_pretty(&value).expect("report serialization");
    text.push('\n');
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    if let Some(path) = &args.csv {
        write_report_csv(path, &report)?;
    }
    Ok(())
}

/// Smallest-count-error threshold search. The detection count is
/// nonincreasing in the threshold, so bisect the boundary where it drops to
/// `target`; when the count jumps past `target` no threshold is exact and
/// the nearest achievable count wins.
fn threshold_for_count(
    data: &SeriesMatrix,
    cfg: &mut DetectionConfig,
    target: usize,
) -> Result<(f64, usize)> {
    let count_at = |cfg: &mut DetectionConfig, c: f64| -> Result<usize> {
        cfg.threshold = c;
        Ok(detect_changes(data, cfg)?.detections.len())
    };
    let max_score = first_pass_max(data, cfg)?;
    if max_score == f64::NEG_INFINITY {
        return Ok((0.0, 0));
    }
    let hi0 = max_score + 1.0;
    if target == 0 {
        return Ok((hi0, 0));
    }
    let mut lo = max_score;
    let mut step = 1.0;
    while count_at(cfg, lo)? < target {
        lo -= step;
        step *= 2.0;
        if step > 1e9 {
            break;
        }
    }
    let mut lo_count = count_at(cfg, lo)?;
    if lo_count < target {
        return Ok((lo, lo_count));
    }
    let mut hi = hi0;
    let mut hi_count = 0usize;
    while hi - lo > 1e-9 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        let mid_count = count_at(cfg, mid)?;
        if mid_count >= target {
            lo = mid;
            lo_count = mid_count;
        } else {
            hi = mid;
            hi_count = mid_count;
        }
    }
    if lo_count == target {
        Ok((lo, lo_count))
    } else if target - hi_count <= lo_count - target {
        Ok((hi, hi_count))
    } else {
        Ok((lo, lo_count))
    }
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let cfg = ScenarioConfig::from_path(&args.config)?;
    let n = cfg.require_n()?;
    let t = cfg.require_t()?;
    let phi = cfg.phi.unwrap_or(0.0);
    let params = noise_params(cfg.drift.unwrap_or(0.0), phi, cfg.sigma_eps.unwrap_or(1.0))?;
    let seed = cfg.seed.unwrap_or(0);
    let means: Option<Vec<Vec<f64>>> = if let Some(r) = cfg.r {
        if cfg.tau.is_empty() {
            return Err(Error::param("tau", "multi-change scenario needs a tau list"));
        }
        Some(multi_change_means(n, t, &cfg.tau, r, cfg.overlap.unwrap_or(40))?)
    } else if let Some(v) = cfg.v {
        let tau1 = match cfg.tau.as_slice() {
            [] => t * 2 / 5,
            [one] => *one,
            _ => return Err(Error::param("tau", "single-change scenario takes one tau")),
        };
        Some(single_change_means(n, t, v, tau1)?)
    } else {
        None
    };
    if let Some(path) = &args.out {
        let data = gen_ar1(&params, n, t, seed, means.as_deref())?;
        let names: Vec<String> = (1..=n).map(|i| format!("s{i}")).collect();
        write_dataset_csv(path, &names, &data)?;
    }
    if let Some(path) = &args.study {
        let v = cfg
            .v
            .ok_or_else(|| Error::param("v", "study mode needs the single-change sparsity v"))?;
        let reps = cfg.reps.unwrap_or(200);
        let settings = StudySettings {
            ar1: params,
            alpha: cfg.alpha.unwrap_or(0.05),
            calibration_reps: reps,
            reps,
            ks: vec![3, 10],
            seed,
        };
        let rows = run_accuracy_study(&[StudyCell { t_len: t, n, v }], &settings)?;
        let mut writer = csv::Writer::from_path(path)?;
        let mut header = vec!["t".to_string(), "n".into(), "v".into(), "threshold".into(), "tau1".into()];
        header.extend(settings.ks.iter().map(|k| format!("hit_{k}")));
        writer.write_record(&header)?;
        for row in &rows {
            let mut record = vec![
                row.cell.t_len.to_string(),
                row.cell.n.to_string(),
                row.cell.v.to_string(),
                row.threshold.to_string(),
                row.tau1.to_string(),
            ];
            record.extend(row.hit_rates.iter().map(|(_, rate)| rate.to_string()));
            writer.write_record(&record)?;
        }
        writer.flush()?;
    }
    Ok(())
}

fn run_calibrate(args: CalibrateArgs) -> Result<()> {
    let lambda2 = match args.lambda2 {
        Some(l) => l,
        None => default_lambda2(args.t)?,
    };
    let spec = CalibrationSpec {
        n: args.n,
        t_len: args.t,
        ar1: noise_params(args.drift, args.phi, args.sigma_eps)?,
        lambda1: args.lambda1,
        lambda2,
        growth: args.growth,
        alpha: args.alpha,
        reps: args.reps,
        seed: args.seed,
    };
    let c = calibrate_threshold(&spec)?;
    println!("{c}");
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> Result<()> {
    let detected = read_detected_positions(&args.detected)?;
    let detected_seg = Segmentation::from_change_points(&detected, args.t)?;
    let truth_seg = Segmentation::from_change_points(&args.truth, args.t)?;
    let ari = adjusted_rand_index(detected_seg.labels(), truth_seg.labels())?;
    let ri = rand_index(detected_seg.labels(), truth_seg.labels())?;
    let mut out = Map::new();
    out.insert("t_len".into(), json!(args.t));
    out.insert("detected".into(), json!(detected));
    out.insert("truth".into(), json!(args.truth));
    out.insert("detected_count".into(), json!(detected.len()));
    out.insert("true_count".into(), json!(args.truth.len()));
    out.insert("adjusted_rand_index".into(), json!(ari));
    out.insert("rand_index".into(), json!(ri));
    if let (Some(k), Some(&first_truth)) = (args.k, args.truth.first()) {
        let nearest = detected
            .iter()
            .min_by_key(|&&p| (p.abs_diff(first_truth), p))
            .copied();
        out.insert("nearest_to_first_change".into(), json!(nearest));
        out.insert(
            "within_k_of_first_change".into(),
            json!(nearest.is_some_and(|p| p.abs_diff(first_truth) <= k)),
        );
    }
    println!("{}", serde_json::to_string_pretty(&Value::Object(out)).expect("metrics"));
    Ok(())
}
