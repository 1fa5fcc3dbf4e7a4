//! Detection-quality metrics: segmentation agreement, localization hit
//! rates, and detection-count summaries.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A partition of 1..=T into contiguous segments, one label per time point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    labels: Vec<usize>,
}

impl Segmentation {
    /// Labels induced by a sorted set of change positions: the label of time
    /// point t (1-based) is the number of changes strictly before t, so each
    /// change starts a new segment at the following observation.
    pub fn from_change_points(change_points: &[usize], t_len: usize) -> Result<Self> {
        if t_len == 0 {
            return Err(Error::EmptyInput("segmentation length"));
        }
        for pair in change_points.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::param(
                    "change_points",
                    format!("not strictly increasing at {} >= {}", pair[0], pair[1]),
                ));
            }
        }
        if let (Some(&first), Some(&last)) = (change_points.first(), change_points.last()) {
            if first == 0 || last >= t_len {
                return Err(Error::IndexOutOfRange {
                    what: "change position",
                    got: if first == 0 { 0 } else { last },
                    limit: t_len - 1,
                });
            }
        }
        let mut labels = Vec::with_capacity(t_len);
        let mut segment = 0usize;
        let mut next = change_points.iter().peekable();
        for t in 1..=t_len {
            while next.peek().is_some_and(|&&cp| cp < t) {
                segment += 1;
                next.next();
            }
            labels.push(segment);
        }
        Ok(Segmentation { labels })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn pairs(x: u64) -> u64 {
    x * (x.saturating_sub(1)) / 2
}

/// Integer pair counts shared by the adjusted and raw Rand indices.
/// `together_both` counts element pairs co-clustered in both labelings;
/// the row/column terms count pairs co-clustered in each labeling alone.
struct PairCounts {
    together_both: u64,
    together_a: u64,
    together_b: u64,
    total: u64,
}

fn pair_counts(a: &[usize], b: &[usize]) -> Result<PairCounts> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::param("labels", "need at least 2 elements"));
    }
    let mut cells: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *cells.entry((x, y)).or_insert(0) += 1;
        *rows.entry(x).or_insert(0) += 1;
        *cols.entry(y).or_insert(0) += 1;
    }
    Ok(PairCounts {
        together_both: cells.values().map(|&c| pairs(c)).sum(),
        together_a: rows.values().map(|&c| pairs(c)).sum(),
        together_b: cols.values().map(|&c| pairs(c)).sum(),
        total: pairs(a.len() as u64),
    })
}

fn adjusted_from_counts(c: &PairCounts) -> f64 {
    let index = c.together_both as f64;
    let expected = c.together_a as f64 * c.together_b as f64 / c.total as f64;
    let max_index = 0.5 * (c.together_a + c.together_b) as f64;
    if max_index == expected {
        // both labelings are the same trivial partition; agreement is perfect
        1.0
    } else {
        (index - expected) / (max_index - expected)
    }
}

/// Hubert-Arabie adjusted Rand index between two labelings of the same
/// elements: observed co-clustering agreement, centered by its expectation
/// under random permutations and scaled to 1 at identity. Invariant to
/// label values; 1 iff the partitions coincide.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    Ok(adjusted_from_counts(&pair_counts(a, b)?))
}

/// Unadjusted Rand index (agreeing pairs / all pairs); debugging aid.
pub fn rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    let c = pair_counts(a, b)?;
    // apart-in-both = total - together_a - together_b + together_both, kept
    // additions-first so the intermediate never goes negative
    let agree = c.total + 2 * c.together_both - c.together_a - c.together_b;
    Ok(agree as f64 / c.total as f64)
}

/// Fraction of replicates whose estimate lands within `k` of the truth; a
/// missing estimate is a miss.
pub fn hit_rate(estimates: &[Option<usize>], truth: usize, k: usize) -> f64 {
    if estimates.is_empty() {
        return 0.0;
    }
    let hits = estimates
        .iter()
        .filter(|e| e.is_some_and(|v| v.abs_diff(truth) <= k))
        .count();
    hits as f64 / estimates.len() as f64
}

/// Histogram of detection counts over replicates (clamped into <=2, 3, 4, 5,
/// >=6) together with the mean segmentation agreement.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSummary {
    /// Replicates with <=2, exactly 3, 4, 5, and >=6 detections.
    pub bins: [usize; 5],
    pub mean_ari: f64,
}

pub fn count_histogram(counts: &[usize], aris: &[f64]) -> Result<CountSummary> {
    if counts.is_empty() {
        return Err(Error::EmptyInput("replicate counts"));
    }
    if counts.len() != aris.len() {
        return Err(Error::LengthMismatch {
            expected: counts.len(),
            got: aris.len(),
        });
    }
    let mut bins = [0usize; 5];
    for &j in counts {
        bins[j.clamp(2, 6) - 2] += 1;
    }
    Ok(CountSummary {
        bins,
        mean_ari: aris.iter().sum::<f64>() / aris.len() as f64,
    })
}
