//! Temporal covariance kernels and the window-contrast variance they induce.
//!
//! Every score in this crate normalizes a difference of two adjacent window
//! means by its exact standard deviation under a known covariance kernel.
//! For the built-in kernels that variance has a closed form evaluated in
//! O(1) per window geometry; arbitrary kernels fall back to the dense
//! quadratic form.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Known temporal covariance of a single sequence, cov(X_i, X_j) for 1-based
/// observation indices.
#[derive(Debug, Clone)]
pub enum CovarianceKernel {
    /// cov(i, j) = 1 if i = j, else 0.
    Independence,
    /// Stationary AR(1): cov(i, j) = sigma_eps^2 * phi^|i-j| / (1 - phi^2).
    StationaryAr1 { phi: f64, sigma_eps: f64 },
    /// Random walk started at X_0 = 0: cov(i, j) = sigma_eps^2 * min(i, j).
    RandomWalk { sigma_eps: f64 },
    /// Arbitrary symmetric table, covering indices 1..=len.
    Custom(CustomKernel),
}

/// Dense user-supplied covariance table. Symmetry is checked at construction;
/// positive-semidefiniteness is not (a defective table surfaces later as a
/// nonpositive window variance).
#[derive(Debug, Clone)]
pub struct CustomKernel {
    len: usize,
    table: Arc<[f64]>,
}

impl CustomKernel {
    pub fn new(len: usize, table: Vec<f64>) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptyInput("custom covariance table"));
        }
        if table.len() != len * len {
            return Err(Error::LengthMismatch {
                expected: len * len,
                got: table.len(),
            });
        }
        if table.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("table", "covariance entries must be finite"));
        }
        for i in 0..len {
            for j in (i + 1)..len {
                let a = table[i * len + j];
                let b = table[j * len + i];
                if (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::param(
                        "table",
                        format!("asymmetric at ({}, {}): {} vs {}", i + 1, j + 1, a, b),
                    ));
                }
            }
        }
        Ok(CustomKernel {
            len,
            table: table.into(),
        })
    }

    /// Load from a CSV of `i,j,value` triples (1-based indices). Missing
    /// entries default to 0; each (i, j) also fills (j, i).
    pub fn from_triples_csv(path: &Path, len: usize) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut table = vec![0.0; len * len];
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != 3 {
                return Err(Error::CsvData {
                    line,
                    reason: format!("expected 3 fields (i,j,value), got {}", record.len()),
                });
            }
            let parse_idx = |field: &str, what| {
                field.parse::<usize>().map_err(|_| Error::CsvData {
                    line,
                    reason: format!("non-integer {what} index {field:?}"),
                })
            };
            let i = parse_idx(&record[0], "row")?;
            let j = parse_idx(&record[1], "column")?;
            let value: f64 = record[2].parse().map_err(|_| Error::CsvData {
                line,
                reason: format!("non-numeric value {:?}", &record[2]),
            })?;
            if i == 0 || j == 0 || i > len || j > len {
                return Err(Error::CsvData {
                    line,
                    reason: format!("index ({i}, {j}) outside 1..={len}"),
                });
            }
            table[(i - 1) * len + (j - 1)] = value;
            table[(j - 1) * len + (i - 1)] = value;
        }
        CustomKernel::new(len, table)
    }

    /// Load a dense square CSV matrix; dimension is inferred from the row count.
    pub fn from_dense_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let mut row = Vec::with_capacity(record.len());
            for field in record.iter() {
                row.push(field.parse::<f64>().map_err(|_| Error::CsvData {
                    line,
                    reason: format!("non-numeric cell {field:?}"),
                })?);
            }
            rows.push(row);
        }
        let len = rows.len();
        if len == 0 {
            return Err(Error::EmptyInput("dense covariance csv"));
        }
        let mut table = Vec::with_capacity(len * len);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != len {
                return Err(Error::CsvData {
                    line: r as u64 + 1,
                    reason: format!("row has {} cells, expected {} (square matrix)", row.len(), len),
                });
            }
            table.extend_from_slice(row);
        }
        CustomKernel::new(len, table)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn value(&self, i: usize, j: usize) -> f64 {
        self.table[(i - 1) * self.len + (j - 1)]
    }
}

impl CovarianceKernel {
    pub fn stationary_ar1(phi: f64, sigma_eps: f64) -> Result<Self> {
        if !(phi.is_finite() && phi.abs() < 1.0) {
            return Err(Error::param("phi", format!("need |phi| < 1, got {phi}")));
        }
        check_sigma(sigma_eps)?;
        Ok(CovarianceKernel::StationaryAr1 { phi, sigma_eps })
    }

    pub fn random_walk(sigma_eps: f64) -> Result<Self> {
        check_sigma(sigma_eps)?;
        Ok(CovarianceKernel::RandomWalk { sigma_eps })
    }

    /// True when cov(i+m, j+m) induces the same window variance as cov(i, j),
    /// so the variance depends on the window arm lengths only. Holds for all
    /// built-ins (for the random walk because contrast weights sum to zero).
    pub fn shift_invariant(&self) -> bool {
        !matches!(self, CovarianceKernel::Custom(_))
    }

    /// Largest index the kernel is defined for, if bounded.
    pub fn max_index(&self) -> Option<usize> {
        match self {
            CovarianceKernel::Custom(k) => Some(k.len),
            _ => None,
        }
    }

    /// cov(X_i, X_j) for 1-based indices.
    pub fn value(&self, i: usize, j: usize) -> Result<f64> {
        if i == 0 || j == 0 {
            return Err(Error::IndexOutOfRange {
                what: "kernel index",
                got: 0,
                limit: 1,
            });
        }
        if let Some(limit) = self.max_index() {
            if i > limit || j > limit {
                return Err(Error::IndexOutOfRange {
                    what: "kernel index",
                    got: i.max(j),
                    limit,
                });
            }
        }
        Ok(match self {
            CovarianceKernel::Independence => {
                if i == j {
                    1.0
                } else {
                    0.0
                }
            }
            CovarianceKernel::StationaryAr1 { phi, sigma_eps } => {
                let gamma0 = sigma_eps * sigma_eps / (1.0 - phi * phi);
                gamma0 * phi.powi(i.abs_diff(j) as i32)
            }
            CovarianceKernel::RandomWalk { sigma_eps } => {
                sigma_eps * sigma_eps * i.min(j) as f64
            }
            CovarianceKernel::Custom(k) => k.value(i, j),
        })
    }

    /// Variance of mean(X over (t, u]) - mean(X over (s, t]), the quadratic
    /// form w' Sigma w with weights -1/(t-s) on the left window and 1/(u-t)
    /// on the right.
    pub fn mean_diff_variance(&self, s: usize, t: usize, u: usize) -> Result<f64> {
        validate_window(s, t, u)?;
        if let Some(limit) = self.max_index() {
            if u > limit {
                return Err(Error::WindowTooLarge { s, t, u, len: limit });
            }
        }
        let left = (t - s) as f64;
        let right = (u - t) as f64;
        let variance = match self {
            CovarianceKernel::Independence => 1.0 / left + 1.0 / right,
            CovarianceKernel::StationaryAr1 { phi, sigma_eps } => {
                stationary_contrast_variance(*phi, *sigma_eps, left, right)
            }
            CovarianceKernel::RandomWalk { sigma_eps } => {
                random_walk_contrast_variance(*sigma_eps, left, right)
            }
            CovarianceKernel::Custom(k) => {
                let mut acc = 0.0;
                for i in (s + 1)..=u {
                    let wi = if i <= t { -1.0 / left } else { 1.0 / right };
                    for j in (s + 1)..=u {
                        let wj = if j <= t { -1.0 / left } else { 1.0 / right };
                        acc += wi * wj * k.value(i, j);
                    }
                }
                acc
            }
        };
        if variance <= 0.0 || !variance.is_finite() {
            return Err(Error::NonPositiveVariance {
                s,
                t,
                u,
                value: variance,
            });
        }
        Ok(variance)
    }

    /// Brute-force reference for `mean_diff_variance`: materializes the dense
    /// (u-s) x (u-s) covariance block and evaluates w' Sigma w directly.
    /// Test oracle only; quadratic cost.
    pub fn mean_diff_variance_oracle(&self, s: usize, t: usize, u: usize) -> Result<f64> {
        validate_window(s, t, u)?;
        if u - s > 5000 {
            return Err(Error::param("u - s", "oracle limited to windows of 5000"));
        }
        let left = (t - s) as f64;
        let right = (u - t) as f64;
        let mut acc = 0.0;
        for i in (s + 1)..=u {
            let wi = if i <= t { -1.0 / left } else { 1.0 / right };
            for j in (s + 1)..=u {
                let wj = if j <= t { -1.0 / left } else { 1.0 / right };
                acc += wi * wj * self.value(i, j)?;
            }
        }
        Ok(acc)
    }
}

fn check_sigma(sigma_eps: f64) -> Result<()> {
    if !(sigma_eps.is_finite() && sigma_eps > 0.0) {
        return Err(Error::param(
            "sigma_eps",
            format!("need a positive innovation scale, got {sigma_eps}"),
        ));
    }
    Ok(())
}

pub(crate) fn validate_window(s: usize, t: usize, u: usize) -> Result<()> {
    if s >= t || t >= u {
        return Err(Error::DegenerateWindow { s, t, u });
    }
    Ok(())
}

/// Closed form for the stationary AR(1) contrast variance. Uses the partial
/// geometric sums sum phi^k and sum k phi^k, so cost is O(1) in the arm
/// lengths.
fn stationary_contrast_variance(phi: f64, sigma_eps: f64, left: f64, right: f64) -> f64 {
    let gamma0 = sigma_eps * sigma_eps / (1.0 - phi * phi);
    // sum_{k=1}^{m-1} phi^k and sum_{k=1}^{m-1} k phi^k; both 0 for m <= 1.
    let geom = |m: f64| {
        if m <= 1.0 {
            0.0
        } else {
            phi * (1.0 - phi.powf(m - 1.0)) / (1.0 - phi)
        }
    };
    let kgeom = |m: f64| {
        if m <= 1.0 {
            0.0
        } else {
            phi * (1.0 - m * phi.powf(m - 1.0) + (m - 1.0) * phi.powf(m)) / ((1.0 - phi) * (1.0 - phi))
        }
    };
    // sum over an m-long block of gamma(|i-j|)
    let block = |m: f64| gamma0 * (m + 2.0 * (m * geom(m) - kgeom(m)));
    // sum over the left x right cross block of gamma(j - i)
    let cross = gamma0 * phi * (1.0 - phi.powf(left)) * (1.0 - phi.powf(right))
        / ((1.0 - phi) * (1.0 - phi));
    block(left) / (left * left) + block(right) / (right * right) - 2.0 * cross / (left * right)
}

/// Closed form for the random-walk contrast variance; depends on arm lengths
/// only because the contrast weights sum to zero.
fn random_walk_contrast_variance(sigma_eps: f64, left: f64, right: f64) -> f64 {
    sigma_eps
        * sigma_eps
        * ((left - 1.0) * (2.0 * left - 1.0) / (6.0 * left)
            + (right + 1.0) * (2.0 * right + 1.0) / (6.0 * right))
}

/// Effective variance constant at window arm h: h^2 times the contrast
/// variance of two flanking length-h windows. Equals 2h for independence.
pub fn b_of_h(kernel: &CovarianceKernel, h: usize) -> Result<f64> {
    if h == 0 {
        return Err(Error::param("h", "window arm must be positive"));
    }
    Ok((h * h) as f64 * kernel.mean_diff_variance(0, h, 2 * h)?)
}

/// Per-scan variance lookup, populated eagerly so parallel scanning reads an
/// immutable map. Shift-invariant kernels key by arm lengths; custom kernels
/// recompute per global window.
#[derive(Debug)]
pub(crate) struct VarianceTable {
    by_geometry: HashMap<(usize, usize), f64>,
}

impl VarianceTable {
    pub(crate) fn for_windows<'a, I>(kernel: &CovarianceKernel, windows: I) -> Result<Self>
    where
        I: Iterator<Item = &'a (usize, usize, usize)>,
    {
        debug_assert!(kernel.shift_invariant());
        let mut by_geometry = HashMap::new();
        for &(s, t, u) in windows {
            if let Entry::Vacant(slot) = by_geometry.entry((t - s, u - t)) {
                slot.insert(kernel.mean_diff_variance(s, t, u)?);
            }
        }
        Ok(VarianceTable { by_geometry })
    }

    pub(crate) fn get(&self, left: usize, right: usize) -> f64 {
        self.by_geometry[&(left, right)]
    }
}

/// Signal regime selecting which detectability bound applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalRegime {
    /// A fixed count V of affected sequences with per-sequence shift delta.
    CountBased,
    /// Affected count scales as N^(1-beta) with log T ~ N^zeta coupling.
    ExponentBased,
}

/// Parameters of the detectability boundary.
#[derive(Debug, Clone, Copy)]
pub struct TheoryParams {
    /// Sparsity exponent, (1-zeta)/2 < beta <= 1-zeta.
    pub beta: f64,
    /// Coupling exponent in log T ~ N^zeta, 0 < zeta < 1.
    pub zeta: f64,
    /// Per-sequence mean shift.
    pub delta: f64,
    /// Affected sequence count in the count-based regime.
    pub v: usize,
    /// Slack factor, >= 0.
    pub epsilon: f64,
}

impl TheoryParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.zeta > 0.0 && self.zeta < 1.0) {
            return Err(Error::param("zeta", format!("need 0 < zeta < 1, got {}", self.zeta)));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::param("delta", format!("need delta > 0, got {}", self.delta)));
        }
        if self.v == 0 {
            return Err(Error::param("v", "affected count must be positive"));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::param("epsilon", format!("need epsilon >= 0, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Minimal signal constant on the detectable boundary in the exponent-based
/// regime. Piecewise in beta with a continuous junction at 3(1-zeta)/4.
pub fn rho_z(beta: f64, zeta: f64) -> Result<f64> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::param("zeta", format!("need 0 < zeta < 1, got {zeta}")));
    }
    let lo = (1.0 - zeta) / 2.0;
    let hi = 1.0 - zeta;
    if !(beta > lo && beta <= hi) {
        return Err(Error::param(
            "beta",
            format!("need (1-zeta)/2 < beta <= 1-zeta, got beta={beta} zeta={zeta}"),
        ));
    }
    let junction = 3.0 * (1.0 - zeta) / 4.0;
    if beta <= junction {
        Ok(beta - lo)
    } else {
        let root = (1.0 - zeta).sqrt() - (1.0 - zeta - beta).sqrt();
        Ok(root * root)
    }
}

/// Critical window-to-variance ratio h/B(h) required for detection.
pub fn required_h_over_b(
    regime: SignalRegime,
    params: &TheoryParams,
    t_len: f64,
    n_seq: f64,
) -> Result<f64> {
    params.validate()?;
    if !(t_len > 1.0) || !(n_seq > 1.0) {
        return Err(Error::param("t_len/n_seq", "need T > 1 and N > 1"));
    }
    let d2 = params.delta * params.delta;
    Ok(match regime {
        SignalRegime::CountBased => {
            4.0 * (1.0 + params.epsilon) * t_len.ln() / (params.v as f64 * d2)
        }
        SignalRegime::ExponentBased => {
            4.0 * (1.0 + params.epsilon) * rho_z(params.beta, params.zeta)? * n_seq.ln() / d2
        }
    })
}
