//! Loading real panels from CSV and preparing them for scanning: log
//! returns, a skewness screen, per-sequence AR(1) fits, and innovation-scale
//! standardization toward a shared noise kernel.

use std::fmt;
use std::path::Path;

use crate::detector::SeriesMatrix;
use crate::error::{Error, Result};
use crate::simulation::{empirical_quantile, Ar1Params};

/// Preprocessing stages a dataset has passed through, oldest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Raw,
    LogDiff,
    Standardized,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Raw => "raw",
            Stage::LogDiff => "log-diff",
            Stage::Standardized => "standardized",
        })
    }
}

/// Named N x T panel with its transform log.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub provenance: Vec<Stage>,
}

impl Dataset {
    pub fn new(names: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_stages(names, values, vec![Stage::Raw])
    }

    fn with_stages(names: Vec<String>, values: Vec<Vec<f64>>, provenance: Vec<Stage>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("dataset rows"));
        }
        if names.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: values.len(),
                got: names.len(),
            });
        }
        let t_len = values[0].len();
        if t_len < 2 {
            return Err(Error::param("t_len", format!("need at least 2 observations, got {t_len}")));
        }
        for row in &values {
            if row.len() != t_len {
                return Err(Error::LengthMismatch {
                    expected: t_len,
                    got: row.len(),
                });
            }
            if let Some(bad) = row.iter().find(|x| !x.is_finite()) {
                return Err(Error::param("values", format!("non-finite observation {bad}")));
            }
        }
        Ok(Dataset {
            names,
            values,
            provenance,
        })
    }

    pub fn n_sequences(&self) -> usize {
        self.values.len()
    }

    pub fn n_observations(&self) -> usize {
        self.values[0].len()
    }

    /// Replace each sequence by its log returns; T shrinks by one.
    pub fn log_differenced(&self) -> Result<Dataset> {
        let values = self
            .values
            .iter()
            .map(|row| log_difference(row))
            .collect::<Result<Vec<_>>>()?;
        let mut provenance = self.provenance.clone();
        provenance.push(Stage::LogDiff);
        Dataset::with_stages(self.names.clone(), values, provenance)
    }

    pub fn to_series_matrix(&self) -> Result<SeriesMatrix> {
        SeriesMatrix::from_rows(&self.values)
    }
}

/// Orientation of a CSV file relative to the panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvLayout {
    /// Each file row is one time point, each column one sequence.
    RowsAreTime,
    /// Each file row is one sequence.
    RowsAreSeries,
}

/// What to do with file rows that contain empty cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingPolicy {
    Reject,
    DropRows,
}

/// Read a numeric CSV into a panel. A header row, when declared, is consumed
/// in either orientation but yields sequence names only when rows are time
/// points (then columns are sequences); otherwise names are generated as
/// s1, s2, ... Blank lines are skipped. Cells must parse to finite numbers;
/// empty cells follow `missing`.
pub fn read_csv(
    path: impl AsRef<Path>,
    layout: CsvLayout,
    header: bool,
    missing: MissingPolicy,
) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut header_names: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if header && header_names.is_none() {
            header_names = Some(record.iter().map(str::to_owned).collect());
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::CsvData {
                line,
                reason: format!("expected {expected} fields, got {}", record.len()),
            });
        }
        let mut row = Vec::with_capacity(expected);
        let mut gap = false;
        for cell in record.iter() {
            if cell.is_empty() {
                gap = true;
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| Error::CsvData {
                line,
                reason: format!("non-numeric cell {cell:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::CsvData {
                    line,
                    reason: format!("non-finite cell {cell:?}"),
                });
            }
            row.push(value);
        }
        if gap {
            match missing {
                MissingPolicy::Reject => {
                    return Err(Error::CsvData {
                        line,
                        reason: "missing value".into(),
                    })
                }
                MissingPolicy::DropRows => continue,
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("csv data rows"));
    }
    let width = rows[0].len();
    if let Some(names) = &header_names {
        if layout == CsvLayout::RowsAreTime && names.len() != width {
            return Err(Error::CsvData {
                line: 1,
                reason: format!("header has {} fields but rows have {width}", names.len()),
            });
        }
    }
    let values: Vec<Vec<f64>> = match layout {
        CsvLayout::RowsAreSeries => rows,
        CsvLayout::RowsAreTime => (0..width)
            .map(|s| rows.iter().map(|row| row[s]).collect())
            .collect(),
    };
    let names = match (&header_names, layout) {
        (Some(names), CsvLayout::RowsAreTime) => names.clone(),
        _ => (1..=values.len()).map(|i| format!("s{i}")).collect(),
    };
    Dataset::new(names, values)
}

/// Log returns y_t = ln x_{t+1} - ln x_t, computed through the ratio so a
/// common positive scale on the input cancels before the logarithm.
pub fn log_difference(xs: &[f64]) -> Result<Vec<f64>> {
    if let Some((index, &value)) = xs.iter().enumerate().find(|(_, x)| **x <= 0.0) {
        return Err(Error::NonPositiveLevel { index, value });
    }
    Ok(xs.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
}

/// Biased sample skewness g1 = m3 / m2^(3/2); None when the variance is zero.
pub fn sample_skewness(xs: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    for &x in xs {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    if m2 == 0.0 {
        None
    } else {
        Some(m3 / m2.powf(1.5))
    }
}

/// Why a sequence was removed by the skewness screen.
#[derive(Debug, Clone, PartialEq)]
pub enum DropReason {
    ZeroVariance,
    Skewness(f64),
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DropReason::ZeroVariance => f.write_str("zero variance"),
            DropReason::Skewness(g1) => write!(f, "skewness {g1:.3}"),
        }
    }
}

/// Drop sequences whose |g1| exceeds `threshold`, and zero-variance
/// sequences whose skewness is undefined. Returns the surviving panel and
/// the removals with reasons.
pub fn skewness_filter(
    data: &Dataset,
    threshold: f64,
) -> Result<(Dataset, Vec<(String, DropReason)>)> {
    if !(threshold > 0.0) {
        return Err(Error::param("threshold", format!("need threshold > 0, got {threshold}")));
    }
    let mut names = Vec::new();
    let mut values = Vec::new();
    let mut dropped = Vec::new();
    for (name, row) in data.names.iter().zip(&data.values) {
        match sample_skewness(row) {
            None => dropped.push((name.clone(), DropReason::ZeroVariance)),
            Some(g1) if g1.abs() > threshold => {
                dropped.push((name.clone(), DropReason::Skewness(g1)))
            }
            Some(_) => {
                names.push(name.clone());
                values.push(row.clone());
            }
        }
    }
    if values.is_empty() {
        return Err(Error::EmptyInput("sequences surviving the skewness screen"));
    }
    let filtered = Dataset::with_stages(names, values, data.provenance.clone())?;
    Ok((filtered, dropped))
}

/// Least-squares AR(1) fit of one sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Fit {
    pub c_hat: f64,
    pub phi_hat: f64,
    pub sigma_eps_hat: f64,
}

/// Regress X_t on (1, X_{t-1}) over all consecutive pairs. The residual
/// scale uses pairs - 2 degrees of freedom; with exactly two pairs the line
/// interpolates and the scale is the raw (zero) residual norm.
pub fn estimate_ar1(xs: &[f64]) -> Result<Ar1Fit> {
    if xs.len() < 3 {
        return Err(Error::param(
            "series",
            format!("need at least 3 observations, got {}", xs.len()),
        ));
    }
    let pairs = xs.len() - 1;
    let m = pairs as f64;
    let mut sx = 0.0;
    let mut sy = 0.0;
    for i in 0..pairs {
        sx += xs[i];
        sy += xs[i + 1];
    }
    let xbar = sx / m;
    let ybar = sy / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..pairs {
        let dx = xs[i] - xbar;
        sxx += dx * dx;
        sxy += dx * (xs[i + 1] - ybar);
    }
    if sxx == 0.0 {
        return Err(Error::SingularDesign("lagged predictor is constant"));
    }
    let phi_hat = sxy / sxx;
    let c_hat = ybar - phi_hat * xbar;
    let mut rss = 0.0;
    for i in 0..pairs {
        let r = xs[i + 1] - c_hat - phi_hat * xs[i];
        rss += r * r;
    }
    let dof = pairs.saturating_sub(2).max(1);
    Ok(Ar1Fit {
        c_hat,
        phi_hat,
        sigma_eps_hat: (rss / dof as f64).sqrt(),
    })
}

/// Spread diagnostics of the pooled AR(1) slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolDiagnostics {
    pub phi_iqr: f64,
    /// Interquartile range of the per-sequence slopes exceeds 0.2; a single
    /// shared kernel is then a rough description of this panel.
    pub heterogeneous: bool,
}

/// Rescale every sequence by its fitted innovation scale so all innovations
/// have unit variance, and pool the per-sequence fits into one parameter set
/// by averaging. The pooled slope is reported as estimated; it is validated
/// only when a kernel is built from it.
pub fn standardize(
    data: &Dataset,
    fits: &[Ar1Fit],
) -> Result<(Dataset, Ar1Params, PoolDiagnostics)> {
    if fits.len() != data.n_sequences() {
        return Err(Error::LengthMismatch {
            expected: data.n_sequences(),
            got: fits.len(),
        });
    }
    if let Some((seq, _)) = fits.iter().enumerate().find(|(_, f)| !(f.sigma_eps_hat > 0.0)) {
        return Err(Error::param(
            "sigma_eps_hat",
            format!("sequence {} has no positive residual scale", seq + 1),
        ));
    }
    let values = data
        .values
        .iter()
        .zip(fits)
        .map(|(row, fit)| row.iter().map(|x| x / fit.sigma_eps_hat).collect())
        .collect();
    let mut provenance = data.provenance.clone();
    provenance.push(Stage::Standardized);
    let scaled = Dataset::with_stages(data.names.clone(), values, provenance)?;
    let m = fits.len() as f64;
    let pooled = Ar1Params {
        drift: fits.iter().map(|f| f.c_hat / f.sigma_eps_hat).sum::<f64>() / m,
        phi: fits.iter().map(|f| f.phi_hat).sum::<f64>() / m,
        sigma_eps: 1.0,
        burn_in: false,
    };
    let mut phis: Vec<f64> = fits.iter().map(|f| f.phi_hat).collect();
    phis.sort_by(|a, b| a.total_cmp(b));
    let phi_iqr = empirical_quantile(&phis, 0.75)? - empirical_quantile(&phis, 0.25)?;
    let diagnostics = PoolDiagnostics {
        phi_iqr,
        heterogeneous: phi_iqr > 0.2,
    };
    Ok((scaled, pooled, diagnostics))
}

/// Largest absolute pairwise Pearson correlation between sequences; None
/// when there are fewer than two sequences. Zero-variance sequences are
/// skipped. Reported as a diagnostic, never enforced.
pub fn max_abs_cross_correlation(data: &Dataset) -> Option<f64> {
    let n = data.n_sequences();
    if n < 2 {
        return None;
    }
    let t_len = data.n_observations() as f64;
    let centered: Vec<Vec<f64>> = data
        .values
        .iter()
        .map(|row| {
            let mean = row.iter().sum::<f64>() / t_len;
            row.iter().map(|x| x - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|row| row.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut max_abs: f64 = 0.0;
    for a in 0..n {
        if norms[a] == 0.0 {
            continue;
        }
        for b in (a + 1)..n {
            if norms[b] == 0.0 {
                continue;
            }
            let dot: f64 = centered[a].iter().zip(&centered[b]).map(|(x, y)| x * y).sum();
            max_abs = max_abs.max((dot / (norms[a] * norms[b])).abs());
        }
    }
    Some(max_abs)
}
