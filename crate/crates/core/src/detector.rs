//! Multiscale scan, refinement, and recursive segmentation.
//!
//! The detector walks the window schedule from coarse grids of small arms to
//! sparse grids of large arms. At each scale it scores every window triple:
//! each sequence's normalized mean contrast becomes a tail probability, the
//! panel's score terms are summed, and a geometry penalty is subtracted. The
//! first scale whose maximum clears the threshold localizes a change, which
//! is refined by sweeping the split point across the firing window; the
//! segment is then split and both halves are scanned again.

use crate::covariance::{validate_window, CovarianceKernel, VarianceTable};
use crate::error::{Error, Result};
use crate::normal::log_p_value;
use crate::scoring::{window_penalty, SparsityWeights};
use crate::windows::WindowSchedule;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Panel of N sequences observed at T common time points, with per-sequence
/// prefix sums so any window mean costs O(1).
#[derive(Debug, Clone)]
pub struct SeriesMatrix {
    n: usize,
    t_len: usize,
    values: Vec<f64>,
    prefix: Vec<f64>,
}

impl SeriesMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyInput("series matrix"));
        }
        let t_len = rows[0].len();
        if t_len == 0 {
            return Err(Error::EmptyInput("series matrix row"));
        }
        let mut values = Vec::with_capacity(n * t_len);
        let mut prefix = Vec::with_capacity(n * (t_len + 1));
        for row in rows {
            if row.len() != t_len {
                return Err(Error::LengthMismatch {
                    expected: t_len,
                    got: row.len(),
                });
            }
            let mut acc = 0.0;
            prefix.push(0.0);
            for &x in row {
                if !x.is_finite() {
                    return Err(Error::param("data", format!("non-finite observation {x}")));
                }
                values.push(x);
                acc += x;
                prefix.push(acc);
            }
        }
        Ok(SeriesMatrix {
            n,
            t_len,
            values,
            prefix,
        })
    }

    pub fn n_sequences(&self) -> usize {
        self.n
    }

    pub fn n_observations(&self) -> usize {
        self.t_len
    }

    /// One sequence's observations in time order.
    pub fn row(&self, seq: usize) -> &[f64] {
        &self.values[seq * self.t_len..(seq + 1) * self.t_len]
    }

    /// Sum of observations (a, b] of one sequence, 1-based inclusive right
    /// endpoint.
    #[inline]
    fn span_sum(&self, seq: usize, a: usize, b: usize) -> f64 {
        let base = seq * (self.t_len + 1);
        self.prefix[base + b] - self.prefix[base + a]
    }

    /// mean over (t, u] minus mean over (s, t], global 1-based coordinates.
    #[inline]
    pub fn mean_contrast(&self, seq: usize, s: usize, t: usize, u: usize) -> f64 {
        let left = (t - s) as f64;
        let right = (u - t) as f64;
        self.span_sum(seq, t, u) / right - self.span_sum(seq, s, t) / left
    }
}

/// Everything a scan needs besides the data.
#[derive(Debug, Clone)]
pub struct DetectionConfig {
    /// Firing threshold for the penalized panel score.
    pub threshold: f64,
    pub weights: SparsityWeights,
    pub kernel: CovarianceKernel,
    pub schedule: WindowSchedule,
    /// Scale the root segment starts scanning at (children inherit the scale
    /// their parent fired at).
    pub start_scale: usize,
}

impl DetectionConfig {
    fn validate(&self, data: &SeriesMatrix) -> Result<()> {
        if self.threshold.is_nan() {
            return Err(Error::param("threshold", "must not be NaN"));
        }
        if self.start_scale == 0 {
            return Err(Error::param("start_scale", "scales are 1-based"));
        }
        if self.weights.panel_size() != data.n_sequences() {
            return Err(Error::LengthMismatch {
                expected: self.weights.panel_size(),
                got: data.n_sequences(),
            });
        }
        if let Some(limit) = self.kernel.max_index() {
            if limit < data.n_observations() {
                return Err(Error::IndexOutOfRange {
                    what: "custom kernel extent",
                    got: data.n_observations(),
                    limit,
                });
            }
        }
        Ok(())
    }
}

/// One localized change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    /// Last index of the segment before the change, global 1-based; the mean
    /// shifts between observations `position` and `position + 1`.
    pub position: usize,
    /// Scale the scan fired at.
    pub scale: usize,
    /// Penalized panel score at the refined split.
    pub score: f64,
}

/// Exact operation counts; identical across runs and thread counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Diagnostics {
    /// Window triples scored, scan and refinement passes combined.
    pub triples_evaluated: u64,
    /// Score terms clamped by the floor guard.
    pub guard_floors: u64,
}

impl Diagnostics {
    fn absorb(&mut self, triples: u64, floors: u64) {
        self.triples_evaluated += triples;
        self.guard_floors += floors;
    }
}

/// Output of the full recursive detection.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangePointReport {
    /// Sorted by position, pairwise distinct.
    pub detections: Vec<Detection>,
    pub diagnostics: Diagnostics,
}

/// Maximum of one scale's scan over a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOutcome {
    /// Best penalized score; negative infinity when the scale admits no
    /// window in the segment.
    pub score: f64,
    /// 1-based grid offset k of the best window; 0 when empty.
    pub offset: usize,
    pub floors: u64,
    pub triples: u64,
}

/// Window triples of one scale with their variances and penalties resolved,
/// immutable during the scoring sweep.
struct PreparedScale {
    triples: Vec<(usize, usize, usize)>,
    variances: Vec<f64>,
    penalties: Vec<f64>,
    offset: usize,
}

fn prepare_scale(
    data: &SeriesMatrix,
    cfg: &DetectionConfig,
    scale: usize,
    start: usize,
    end: usize,
) -> Result<PreparedScale> {
    let seg_len = end - start + 1;
    let offset = start - 1;
    let triples = cfg.schedule.triples(scale, seg_len);
    let t_total = data.n_observations();
    let variances = if cfg.kernel.shift_invariant() {
        let table = VarianceTable::for_windows(&cfg.kernel, triples.iter())?;
        triples.iter().map(|&(s, t, u)| table.get(t - s, u - t)).collect()
    } else {
        triples
            .iter()
            .map(|&(s, t, u)| cfg.kernel.mean_diff_variance(s + offset, t + offset, u + offset))
            .collect::<Result<Vec<f64>>>()?
    };
    let penalties = triples
        .iter()
        .map(|&(s, t, u)| window_penalty(t_total, s, t, u))
        .collect();
    Ok(PreparedScale {
        triples,
        variances,
        penalties,
        offset,
    })
}

/// Penalized panel score of one prepared triple; returns the floor count
/// alongside. Sequences are summed in index order so the result is exact
/// and identical however triples are distributed over threads.
fn score_triple(
    data: &SeriesMatrix,
    weights: &SparsityWeights,
    prep: &PreparedScale,
    idx: usize,
) -> (f64, u64) {
    let (s, t, u) = prep.triples[idx];
    let (gs, gt, gu) = (s + prep.offset, t + prep.offset, u + prep.offset);
    let inv_sd = 1.0 / prep.variances[idx].sqrt();
    let mut sum = 0.0;
    let mut floors = 0u64;
    for seq in 0..data.n_sequences() {
        let z = data.mean_contrast(seq, gs, gt, gu) * inv_sd;
        let term = weights.term_from_log_p(log_p_value(z));
        sum += term.value;
        floors += term.floored as u64;
    }
    let score = sum - prep.penalties[idx];
    debug_assert!(!score.is_nan());
    (score, floors)
}

#[derive(Clone, Copy)]
struct BestTriple {
    score: f64,
    idx: usize,
    floors: u64,
}

impl BestTriple {
    const EMPTY: BestTriple = BestTriple {
        score: f64::NEG_INFINITY,
        idx: usize::MAX,
        floors: 0,
    };

    /// Lexicographic max on (score desc, idx asc) with floor counts summed;
    /// associative and commutative, so any reduction tree gives the same
    /// result as a left fold.
    fn join(self, other: BestTriple) -> BestTriple {
        let floors = self.floors + other.floors;
        let winner = if other.score > self.score
            || (other.score == self.score && other.idx < self.idx)
        {
            other
        } else {
            self
        };
        BestTriple { floors, ..winner }
    }
}

fn outcome_from(best: BestTriple, triples: u64) -> ScanOutcome {
    ScanOutcome {
        score: best.score,
        offset: if best.idx == usize::MAX { 0 } else { best.idx + 1 },
        floors: best.floors,
        triples,
    }
}

fn scan_prepared_sequential(
    data: &SeriesMatrix,
    weights: &SparsityWeights,
    prep: &PreparedScale,
) -> ScanOutcome {
    let best = (0..prep.triples.len()).fold(BestTriple::EMPTY, |acc, idx| {
        let (score, floors) = score_triple(data, weights, prep, idx);
        acc.join(BestTriple { score, idx, floors })
    });
    outcome_from(best, prep.triples.len() as u64)
}

#[cfg(feature = "parallel")]
fn scan_prepared(data: &SeriesMatrix, weights: &SparsityWeights, prep: &PreparedScale) -> ScanOutcome {
    let best = (0..prep.triples.len())
        .into_par_iter()
        .map(|idx| {
            let (score, floors) = score_triple(data, weights, prep, idx);
            BestTriple { score, idx, floors }
        })
        .reduce(|| BestTriple::EMPTY, BestTriple::join);
    outcome_from(best, prep.triples.len() as u64)
}

#[cfg(not(feature = "parallel"))]
fn scan_prepared(data: &SeriesMatrix, weights: &SparsityWeights, prep: &PreparedScale) -> ScanOutcome {
    scan_prepared_sequential(data, weights, prep)
}

fn validate_segment(data: &SeriesMatrix, start: usize, end: usize) -> Result<()> {
    if start == 0 {
        return Err(Error::IndexOutOfRange {
            what: "segment start",
            got: 0,
            limit: 1,
        });
    }
    if end > data.n_observations() || start > end {
        return Err(Error::IndexOutOfRange {
            what: "segment end",
            got: end,
            limit: data.n_observations(),
        });
    }
    Ok(())
}

/// Maximum penalized score of one scale over the segment [start, end],
/// triples evaluated in parallel when the `parallel` feature is on.
pub fn scan_scale(
    data: &SeriesMatrix,
    cfg: &DetectionConfig,
    scale: usize,
    start: usize,
    end: usize,
) -> Result<ScanOutcome> {
    cfg.validate(data)?;
    validate_segment(data, start, end)?;
    let prep = prepare_scale(data, cfg, scale, start, end)?;
    Ok(scan_prepared(data, &cfg.weights, &prep))
}

/// Single-threaded twin of `scan_scale`; results are bitwise identical.
pub fn scan_scale_sequential(
    data: &SeriesMatrix,
    cfg: &DetectionConfig,
    scale: usize,
    start: usize,
    end: usize,
) -> Result<ScanOutcome> {
    cfg.validate(data)?;
    validate_segment(data, start, end)?;
    let prep = prepare_scale(data, cfg, scale, start, end)?;
    Ok(scan_prepared_sequential(data, &cfg.weights, &prep))
}

/// Sweep the split point across the firing window (s, u), rescoring the
/// panel at every interior t; smallest t wins ties. Returns local split,
/// score, floors. O(arm) closed-form variance evaluations, so sequential.
fn refine_split(
    data: &SeriesMatrix,
    cfg: &DetectionConfig,
    offset: usize,
    s: usize,
    u: usize,
) -> Result<(usize, f64, u64)> {
    let t_total = data.n_observations();
    let mut best_t = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    let mut floors_total = 0u64;
    for t in (s + 1)..u {
        validate_window(s, t, u)?;
        let variance = if cfg.kernel.shift_invariant() {
            cfg.kernel.mean_diff_variance(s, t, u)?
        } else {
            cfg.kernel.mean_diff_variance(s + offset, t + offset, u + offset)?
        };
        let inv_sd = 1.0 / variance.sqrt();
        let penalty = window_penalty(t_total, s, t, u);
        let mut sum = 0.0;
        for seq in 0..data.n_sequences() {
            let z = data.mean_contrast(seq, s + offset, t + offset, u + offset) * inv_sd;
            let term = cfg.weights.term_from_log_p(log_p_value(z));
            sum += term.value;
            floors_total += term.floored as u64;
        }
        let score = sum - penalty;
        if score > best_score {
            best_score = score;
            best_t = t;
        }
    }
    debug_assert!(s < best_t && best_t < u);
    Ok((best_t, best_score, floors_total))
}

/// Scan a segment for its most prominent single change.
///
/// Scales run from `start_scale` to the deepest scale fitting the segment;
/// the first whose maximum reaches the threshold is refined and returned.
/// Segments too short for any scale yield `None`.
pub fn estimate_change(
    data: &SeriesMatrix,
    cfg: &DetectionConfig,
    start_scale: usize,
    start: usize,
    end: usize,
) -> Result<(Option<Detection>, Diagnostics)> {
    cfg.validate(data)?;
    validate_segment(data, start, end)?;
    if start_scale == 0 {
        return Err(Error::param("start_scale", "scales are 1-based"));
    }
    let mut diag = Diagnostics::default();
    let seg_len = end - start + 1;
    let deepest = cfg.schedule.deepest_scale(seg_len);
    for scale in start_scale..=deepest {
        let prep = prepare_scale(data, cfg, scale, start, end)?;
        let outcome = scan_prepared(data, &cfg.weights, &prep);
        diag.absorb(outcome.triples, outcome.floors);
        if outcome.score >= cfg.threshold {
            let (s, _, u) = prep.triples[outcome.offset - 1];
            let (split, score, floors) = refine_split(data, cfg, prep.offset, s, u)?;
            diag.absorb((u - s - 1) as u64, floors);
            let detection = Detection {
                position: split + start - 1,
                scale,
                score,
            };
            debug_assert!(start <= detection.position && detection.position < end);
            return Ok((Some(detection), diag));
        }
    }
    Ok((None, diag))
}

/// Recursive detection over the whole panel: locate a change, split the
/// segment at it, scan both halves (starting at the scale the parent fired
/// at) until nothing fires.
pub fn detect_changes(data: &SeriesMatrix, cfg: &DetectionConfig) -> Result<ChangePointReport> {
    cfg.validate(data)?;
    let t_len = data.n_observations();
    let mut detections = Vec::new();
    let mut diagnostics = Diagnostics::default();
    let mut stack = vec![(1usize, t_len, cfg.start_scale)];
    while let Some((start, end, scale0)) = stack.pop() {
        if start >= end {
            continue;
        }
        let (found, diag) = estimate_change(data, cfg, scale0, start, end)?;
        diagnostics.absorb(diag.triples_evaluated, diag.guard_floors);
        if let Some(det) = found {
            stack.push((start, det.position, det.scale));
            stack.push((det.position + 1, end, det.scale));
            detections.push(det);
        }
    }
    detections.sort_by_key(|d| d.position);
    debug_assert!(detections.windows(2).all(|w| w[0].position < w[1].position));
    Ok(ChangePointReport {
        detections,
        diagnostics,
    })
}

/// Maximum penalized score over every scale's scan of the full panel with no
/// threshold or recursion: the statistic whose null distribution calibration
/// samples.
pub fn first_pass_max(data: &SeriesMatrix, cfg: &DetectionConfig) -> Result<f64> {
    first_pass_with(data, cfg, scan_prepared)
}

/// Single-threaded twin of `first_pass_max`; bitwise identical.
pub fn first_pass_max_sequential(data: &SeriesMatrix, cfg: &DetectionConfig) -> Result<f64> {
    first_pass_with(data, cfg, scan_prepared_sequential)
}

fn first_pass_with(
    data: &SeriesMatrix,
    cfg: &DetectionConfig,
    scan: fn(&SeriesMatrix, &SparsityWeights, &PreparedScale) -> ScanOutcome,
) -> Result<f64> {
    cfg.validate(data)?;
    let t_len = data.n_observations();
    if t_len < 2 {
        return Err(Error::param("data", "need at least 2 observations"));
    }
    let mut best = f64::NEG_INFINITY;
    for scale in cfg.start_scale..=cfg.schedule.deepest_scale(t_len) {
        let prep = prepare_scale(data, cfg, scale, 1, t_len)?;
        best = best.max(scan(data, &cfg.weights, &prep).score);
    }
    Ok(best)
}
