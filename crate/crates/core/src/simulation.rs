//! Synthetic panels, Monte Carlo threshold calibration, and the
//! localization-accuracy study.
//!
//! Every operation is a pure function of its spec and a 64-bit seed.
//! Replicates and sequences draw from independent substreams derived with
//! `substream_seed`, so results are reproducible bit-for-bit and independent
//! of evaluation order.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::covariance::CovarianceKernel;
use crate::detector::{detect_changes, first_pass_max, DetectionConfig, SeriesMatrix};
use crate::error::{Error, Result};
use crate::evaluation::hit_rate;
use crate::scoring::{default_lambda2, SparsityWeights};
use crate::windows::WindowSchedule;

/// Derive an independent substream seed: SplitMix64 finalizer of the base
/// xored with the index spread by the golden-ratio constant. Replicate r of
/// a run seeded s generates from substream_seed(s, r); sequence n inside a
/// dataset seeded g from substream_seed(g, n).
pub fn substream_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// First-order autoregression X_t = drift + phi X_{t-1} + sigma_eps eps_t
/// started at X_0 = 0. phi = 1 is the random-walk case; |phi| < 1 the
/// stationary case.
#[derive(Debug, Clone, Copy)]
pub struct Ar1Params {
    pub drift: f64,
    pub phi: f64,
    pub sigma_eps: f64,
    /// Warm the recurrence for ceil(10 / (1 - |phi|)) unrecorded steps so
    /// the recorded path starts approximately stationary. Only meaningful
    /// for |phi| < 1.
    pub burn_in: bool,
}

impl Ar1Params {
    pub fn new(drift: f64, phi: f64, sigma_eps: f64) -> Result<Self> {
        let params = Ar1Params {
            drift,
            phi,
            sigma_eps,
            burn_in: false,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.drift.is_finite() {
            return Err(Error::param("drift", format!("{}", self.drift)));
        }
        if !(self.sigma_eps.is_finite() && self.sigma_eps > 0.0) {
            return Err(Error::param(
                "sigma_eps",
                format!("need a positive innovation scale, got {}", self.sigma_eps),
            ));
        }
        if !(self.phi.abs() < 1.0 || self.phi == 1.0) {
            return Err(Error::param(
                "phi",
                format!("need |phi| < 1 or phi = 1 exactly, got {}", self.phi),
            ));
        }
        if self.burn_in && self.phi == 1.0 {
            return Err(Error::param("burn_in", "a random walk has no stationary start"));
        }
        Ok(())
    }

    /// Covariance kernel of the noise this process generates.
    pub fn kernel(&self) -> Result<CovarianceKernel> {
        self.validate()?;
        if self.phi == 1.0 {
            CovarianceKernel::random_walk(self.sigma_eps)
        } else {
            CovarianceKernel::stationary_ar1(self.phi, self.sigma_eps)
        }
    }
}

/// Generate N sequences of T observations: the AR(1) noise path plus an
/// optional deterministic mean (observation-level shift, so the means do not
/// feed back through the recurrence). Identical inputs reproduce identical
/// output bit-for-bit.
pub fn gen_ar1(
    params: &Ar1Params,
    n: usize,
    t_len: usize,
    seed: u64,
    means: Option<&[Vec<f64>]>,
) -> Result<SeriesMatrix> {
    params.validate()?;
    if n == 0 || t_len == 0 {
        return Err(Error::EmptyInput("series dimensions"));
    }
    if let Some(m) = means {
        if m.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: m.len(),
            });
        }
        if let Some(bad) = m.iter().find(|row| row.len() != t_len) {
            return Err(Error::LengthMismatch {
                expected: t_len,
                got: bad.len(),
            });
        }
    }
    let burn_steps = if params.burn_in {
        (10.0 / (1.0 - params.phi.abs())).ceil() as usize
    } else {
        0
    };
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|seq| {
            let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(seed, seq as u64));
            let mut w = 0.0;
            for _ in 0..burn_steps {
                let e: f64 = StandardNormal.sample(&mut rng);
                w = params.drift + params.phi * w + params.sigma_eps * e;
            }
            (0..t_len)
                .map(|t| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    w = params.drift + params.phi * w + params.sigma_eps * e;
                    w + means.map_or(0.0, |m| m[seq][t])
                })
                .collect()
        })
        .collect();
    SeriesMatrix::from_rows(&rows)
}

fn harmonic(v: usize) -> f64 {
    (1..=v).map(|m| 1.0 / m as f64).sum()
}

/// Mean matrix with one change after tau1: sequence n <= v shifts by
/// 1.2 / sqrt(n H_v) for t > tau1, everything else stays 0. The squared
/// shifts sum to 1.44 for every v, so total signal energy is constant while
/// sparsity varies.
pub fn single_change_means(
    n: usize,
    t_len: usize,
    v: usize,
    tau1: usize,
) -> Result<Vec<Vec<f64>>> {
    if v == 0 || v > n {
        return Err(Error::param("v", format!("need 1 <= v <= {n}, got {v}")));
    }
    if tau1 == 0 || tau1 >= t_len {
        return Err(Error::param(
            "tau1",
            format!("need 1 <= tau1 < {t_len}, got {tau1}"),
        ));
    }
    let h_v = harmonic(v);
    let mut means = vec![vec![0.0; t_len]; n];
    for (seq, row) in means.iter_mut().enumerate().take(v) {
        let shift = 1.2 / ((seq + 1) as f64 * h_v).sqrt();
        for x in row.iter_mut().skip(tau1) {
            *x = shift;
        }
    }
    Ok(means)
}

/// Mean matrix with one change per entry of `change_points`: the j-th change
/// raises sequences overlap*(j-1)+1 ..= overlap*(j-1)+40 by r / sqrt(n' H_40)
/// (n' the position inside the block) for all t past it, cumulatively.
/// overlap = 40 gives disjoint blocks, 0 reuses one block.
pub fn multi_change_means(
    n: usize,
    t_len: usize,
    change_points: &[usize],
    r: f64,
    overlap: usize,
) -> Result<Vec<Vec<f64>>> {
    const BLOCK: usize = 40;
    if change_points.is_empty() {
        return Err(Error::EmptyInput("change points"));
    }
    for pair in change_points.windows(2) {
        if pair[0] >= pair[1] {
            return Err(Error::param("change_points", "must be strictly increasing"));
        }
    }
    if change_points[0] == 0 || *change_points.last().unwrap() >= t_len {
        return Err(Error::param(
            "change_points",
            format!("must lie strictly inside (0, {t_len})"),
        ));
    }
    if !r.is_finite() {
        return Err(Error::param("r", format!("{r}")));
    }
    let last_start = overlap * (change_points.len() - 1);
    if last_start + BLOCK > n {
        return Err(Error::param(
            "overlap",
            format!("block {}..{} exceeds {n} sequences", last_start + 1, last_start + BLOCK),
        ));
    }
    let h_block = harmonic(BLOCK);
    let mut means = vec![vec![0.0; t_len]; n];
    for (j, &cp) in change_points.iter().enumerate() {
        let start = overlap * j;
        for inner in 0..BLOCK {
            let step = r / (((inner + 1) as f64) * h_block).sqrt();
            for x in means[start + inner].iter_mut().skip(cp) {
                *x += step;
            }
        }
    }
    Ok(means)
}

/// Inputs of a null-threshold calibration.
#[derive(Debug, Clone)]
pub struct CalibrationSpec {
    pub n: usize,
    pub t_len: usize,
    pub ar1: Ar1Params,
    pub lambda1: f64,
    pub lambda2: f64,
    pub growth: f64,
    pub alpha: f64,
    pub reps: usize,
    pub seed: u64,
}

impl CalibrationSpec {
    /// Spec with the default weights (lambda1 = 1, lambda2 from the data
    /// length) and 500 replicates.
    pub fn new(n: usize, t_len: usize, ar1: Ar1Params, alpha: f64, seed: u64) -> Result<Self> {
        Ok(CalibrationSpec {
            n,
            t_len,
            ar1,
            lambda1: 1.0,
            lambda2: default_lambda2(t_len)?,
            growth: 1.1,
            alpha,
            reps: 500,
            seed,
        })
    }

    fn validate(&self) -> Result<()> {
        self.ar1.validate()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param("alpha", format!("need 0 < alpha < 1, got {}", self.alpha)));
        }
        if self.reps < 20 {
            return Err(Error::param(
                "reps",
                format!("need at least 20 replicates, got {}", self.reps),
            ));
        }
        Ok(())
    }

    fn config(&self) -> Result<DetectionConfig> {
        Ok(DetectionConfig {
            threshold: f64::INFINITY,
            weights: SparsityWeights::new(self.lambda1, self.lambda2, self.n)?,
            kernel: self.ar1.kernel()?,
            schedule: WindowSchedule::geometric(self.t_len, self.growth)?,
            start_scale: 1,
        })
    }
}

/// Per-replicate maxima of the full first-pass scan on pure noise, in
/// replicate order. The threshold is a quantile of these; the exceedance
/// rate at any threshold is their empirical tail.
pub fn null_scan_maxima(spec: &CalibrationSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let cfg = spec.config()?;
    let one_rep = |rep: usize| -> Result<f64> {
        let data = gen_ar1(
            &spec.ar1,
            spec.n,
            spec.t_len,
            substream_seed(spec.seed, rep as u64),
            None,
        )?;
        first_pass_max(&data, &cfg)
    };
    #[cfg(feature = "parallel")]
    {
        (0..spec.reps).into_par_iter().map(one_rep).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..spec.reps).map(one_rep).collect()
    }
}

/// Empirical quantile with midpoint interpolation: with m sorted values and
/// h = (m-1) q, returns x[h] when h is integral and the mean of its two
/// neighbors otherwise.
pub fn empirical_quantile(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptyInput("quantile sample"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::param("q", format!("need 0 <= q <= 1, got {q}")));
    }
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    if h == lo as f64 {
        Ok(sorted[lo])
    } else {
        Ok(0.5 * (sorted[lo] + sorted[lo + 1]))
    }
}

/// Threshold at which the probability of any null detection is alpha: the
/// empirical (1 - alpha) quantile of the per-replicate null scan maxima.
pub fn calibrate_threshold(spec: &CalibrationSpec) -> Result<f64> {
    let mut maxima = null_scan_maxima(spec)?;
    maxima.sort_by(|a, b| a.total_cmp(b));
    empirical_quantile(&maxima, 1.0 - spec.alpha)
}

/// One cell of the localization study grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StudyCell {
    pub t_len: usize,
    pub n: usize,
    pub v: usize,
}

/// Shared settings of a localization study.
#[derive(Debug, Clone)]
pub struct StudySettings {
    pub ar1: Ar1Params,
    pub alpha: f64,
    pub calibration_reps: usize,
    pub reps: usize,
    pub ks: Vec<usize>,
    pub seed: u64,
}

/// Results for one cell: the calibrated threshold and the fraction of
/// replicates locating the change within each tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub cell: StudyCell,
    pub threshold: f64,
    pub tau1: usize,
    /// (tolerance k, hit rate) pairs in the order requested.
    pub hit_rates: Vec<(usize, f64)>,
}

/// Localization accuracy over a grid of (T, N, V) cells: per cell, calibrate
/// on nulls of the same shape (cached across cells sharing T and N), plant a
/// single change at tau1 = 0.4 T, and score the detection nearest tau1
/// against each tolerance; replicates with no detection count as misses.
pub fn run_accuracy_study(cells: &[StudyCell], settings: &StudySettings) -> Result<Vec<StudyRow>> {
    settings.ar1.validate()?;
    let mut thresholds: HashMap<(usize, usize), f64> = HashMap::new();
    let mut rows = Vec::with_capacity(cells.len());
    for (cell_idx, &cell) in cells.iter().enumerate() {
        let StudyCell { t_len, n, v } = cell;
        let tau1 = t_len * 2 / 5;
        if tau1 == 0 {
            return Err(Error::param("t_len", format!("{t_len} leaves no room for tau1")));
        }
        let threshold = match thresholds.get(&(t_len, n)) {
            Some(&c) => c,
            None => {
                let cal = CalibrationSpec {
                    reps: settings.calibration_reps,
                    alpha: settings.alpha,
                    seed: substream_seed(
                        substream_seed(settings.seed, 0),
                        ((t_len as u64) << 32) ^ n as u64,
                    ),
                    ..CalibrationSpec::new(n, t_len, settings.ar1, settings.alpha, 0)?
                };
                let c = calibrate_threshold(&cal)?;
                thresholds.insert((t_len, n), c);
                c
            }
        };
        let cfg = DetectionConfig {
            threshold,
            weights: SparsityWeights::new(1.0, default_lambda2(t_len)?, n)?,
            kernel: settings.ar1.kernel()?,
            schedule: WindowSchedule::geometric(t_len, 1.1)?,
            start_scale: 1,
        };
        let means = single_change_means(n, t_len, v, tau1)?;
        let cell_seed = substream_seed(settings.seed, 1 + cell_idx as u64);
        let one_rep = |rep: usize| -> Result<Option<usize>> {
            let data = gen_ar1(
                &settings.ar1,
                n,
                t_len,
                substream_seed(cell_seed, rep as u64),
                Some(&means),
            )?;
            let report = detect_changes(&data, &cfg)?;
            Ok(report
                .detections
                .iter()
                .min_by_key(|d| (d.position.abs_diff(tau1), d.position))
                .map(|d| d.position))
        };
        #[cfg(feature = "parallel")]
        let estimates: Vec<Option<usize>> = (0..settings.reps)
            .into_par_iter()
            .map(one_rep)
            .collect::<Result<_>>()?;
        #[cfg(not(feature = "parallel"))]
        let estimates: Vec<Option<usize>> =
            (0..settings.reps).map(one_rep).collect::<Result<_>>()?;
        let hit_rates = settings
            .ks
            .iter()
            .map(|&k| (k, hit_rate(&estimates, tau1, k)))
            .collect();
        rows.push(StudyRow {
            cell,
            threshold,
            tau1,
            hit_rates,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn iid() -> Ar1Params {
        Ar1Params::new(0.0, 0.0, 1.0).unwrap()
    }

    fn rows_of(data: &SeriesMatrix) -> Vec<Vec<f64>> {
        (0..data.n_sequences()).map(|s| data.row(s).to_vec()).collect()
    }

    #[test]
    fn identical_seeds_reproduce_identical_panels() {
        let params = Ar1Params::new(0.1, 0.6, 1.3).unwrap();
        let a = gen_ar1(&params, 7, 40, 99, None).unwrap();
        let b = gen_ar1(&params, 7, 40, 99, None).unwrap();
        assert_eq!(rows_of(&a), rows_of(&b));
        let c = gen_ar1(&params, 7, 40, 100, None).unwrap();
        assert_ne!(rows_of(&a), rows_of(&c));
    }

    #[test]
    fn degenerate_recurrence_gives_iid_moments() {
        let data = gen_ar1(&iid(), 100, 10_000, 5, None).unwrap();
        let m = 1_000_000.0;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for seq in 0..100 {
            for &x in data.row(seq) {
                sum += x;
                sum_sq += x * x;
            }
        }
        let mean = sum / m;
        let var = sum_sq / m - mean * mean;
        assert!(mean.abs() < 3.0 / m.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 3.0 * (2.0 / m).sqrt(), "var {var}");
    }

    #[test]
    fn random_walk_variance_grows_linearly() {
        let params = Ar1Params::new(0.0, 1.0, 1.0).unwrap();
        let data = gen_ar1(&params, 10_000, 100, 21, None).unwrap();
        let var = (0..10_000)
            .map(|seq| {
                let x = data.row(seq)[99];
                x * x
            })
            .sum::<f64>()
            / 10_000.0;
        assert!((var - 100.0).abs() < 5.0, "var at t=100 was {var}");
    }

    #[test]
    fn means_shift_the_noise_path() {
        let params = Ar1Params::new(0.0, 0.5, 1.0).unwrap();
        let means = single_change_means(4, 30, 2, 10).unwrap();
        let plain = gen_ar1(&params, 4, 30, 3, None).unwrap();
        let shifted = gen_ar1(&params, 4, 30, 3, Some(&means)).unwrap();
        for (seq, mean_row) in means.iter().enumerate() {
            for (t, &m) in mean_row.iter().enumerate() {
                assert_relative_eq!(shifted.row(seq)[t] - plain.row(seq)[t], m, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn burn_in_starts_near_stationarity() {
        let mut params = Ar1Params::new(0.0, 0.9, 1.0).unwrap();
        let gamma0 = 1.0 / (1.0 - 0.81);
        let cold = gen_ar1(&params, 20_000, 1, 8, None).unwrap();
        let cold_var = (0..20_000).map(|s| cold.row(s)[0].powi(2)).sum::<f64>() / 20_000.0;
        assert!((cold_var - 1.0).abs() < 0.05, "cold-start var {cold_var}");
        params.burn_in = true;
        let warm = gen_ar1(&params, 20_000, 1, 8, None).unwrap();
        let warm_var = (0..20_000).map(|s| warm.row(s)[0].powi(2)).sum::<f64>() / 20_000.0;
        assert!(
            (warm_var - gamma0).abs() < 0.1 * gamma0,
            "burned-in var {warm_var} vs {gamma0}"
        );
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(Ar1Params::new(0.0, 1.4, 1.0).is_err());
        assert!(Ar1Params::new(0.0, -1.0, 1.0).is_err());
        assert!(Ar1Params::new(0.0, 0.3, 0.0).is_err());
        let mut walk = Ar1Params::new(0.0, 1.0, 1.0).unwrap();
        walk.burn_in = true;
        assert!(walk.validate().is_err());
    }

    #[test]
    fn single_change_reference_magnitudes() {
        let means = single_change_means(10, 20, 3, 8).unwrap();
        // observation 8 (index 7) is the last one before the change
        assert_eq!(means[0][7], 0.0);
        assert_relative_eq!(means[0][8], 0.8862587350511957, max_relative = 1e-14);
        assert_relative_eq!(means[1][8], 0.6266795614405122, max_relative = 1e-14);
        assert_relative_eq!(means[2][8], 0.5116817192534651, max_relative = 1e-14);
        assert_eq!(means[3][8], 0.0);
        assert!(means[0][8] > means[1][8] && means[1][8] > means[2][8]);
    }

    #[test]
    fn single_change_energy_is_constant_across_sparsity() {
        for v in [1usize, 3, 7, 10] {
            let means = single_change_means(10, 6, v, 2).unwrap();
            let energy: f64 = (0..10).map(|seq| means[seq][5] * means[seq][5]).sum();
            assert_relative_eq!(energy, 1.44, max_relative = 1e-12);
        }
    }

    #[test]
    fn multi_change_block_structure() {
        let taus = [500usize, 1000, 1500];
        let h40 = harmonic(40);
        assert_relative_eq!(1.0 / h40.sqrt(), 0.48345053757930766, max_relative = 1e-14);
        // disjoint blocks
        let disjoint = multi_change_means(200, 2000, &taus, 1.0, 40).unwrap();
        for (j, &cp) in taus.iter().enumerate() {
            for (seq, series) in disjoint.iter().enumerate() {
                let increment = series[cp] - series[cp - 1];
                let in_block = (40 * j..40 * j + 40).contains(&seq);
                assert_eq!(increment > 0.0, in_block, "change {j}, sequence {seq}");
            }
        }
        assert_relative_eq!(
            disjoint[0][500] - disjoint[0][499],
            1.0 / h40.sqrt(),
            max_relative = 1e-14
        );
        assert_eq!(disjoint[0][1000] - disjoint[0][999], 0.0);
        // same block accumulates
        let stacked = multi_change_means(200, 2000, &taus, 1.0, 0).unwrap();
        assert_relative_eq!(
            stacked[0][1999],
            3.0 / h40.sqrt(),
            max_relative = 1e-14
        );
        // partial overlap: sequences 21..40 see changes 1 and 2
        let partial = multi_change_means(200, 2000, &taus, 1.0, 20).unwrap();
        assert!(partial[30][999] > 0.0 && partial[30][1000] > partial[30][999]);
        assert_eq!(partial[30][1500] - partial[30][1499], 0.0);
        assert!(multi_change_means(70, 2000, &taus, 1.0, 20).is_err());
    }

    #[test]
    fn quantile_interpolation_examples() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(empirical_quantile(&xs, 0.5).unwrap(), 3.0);
        assert_eq!(empirical_quantile(&xs, 1.0).unwrap(), 5.0);
        assert_eq!(empirical_quantile(&xs, 0.0).unwrap(), 1.0);
        // h = 4 * 0.9 = 3.6 -> midpoint of x[3], x[4]
        assert_eq!(empirical_quantile(&xs, 0.9).unwrap(), 4.5);
        assert!(empirical_quantile(&[], 0.5).is_err());
    }

    fn small_cal(seed: u64, alpha: f64, sigma: f64) -> CalibrationSpec {
        CalibrationSpec {
            n: 10,
            t_len: 60,
            ar1: Ar1Params::new(0.0, 0.0, sigma).unwrap(),
            lambda1: 1.0,
            lambda2: default_lambda2(60).unwrap(),
            growth: 1.1,
            alpha,
            reps: 40,
            seed,
        }
    }

    #[test]
    fn calibration_is_deterministic_and_monotone_in_alpha() {
        let spec = small_cal(31, 0.10, 1.0);
        let c1 = calibrate_threshold(&spec).unwrap();
        let c2 = calibrate_threshold(&spec).unwrap();
        assert_eq!(c1.to_bits(), c2.to_bits());
        let strict = calibrate_threshold(&small_cal(31, 0.01, 1.0)).unwrap();
        assert!(strict >= c1, "c(0.01) = {strict} < c(0.10) = {c1}");
    }

    #[test]
    fn calibration_is_invariant_to_innovation_scale() {
        let c1 = calibrate_threshold(&small_cal(77, 0.10, 1.0)).unwrap();
        let c3 = calibrate_threshold(&small_cal(77, 0.10, 3.0)).unwrap();
        assert!((c1 - c3).abs() < 1e-9, "{c1} vs {c3}");
    }

    #[test]
    fn accuracy_study_smoke() {
        let cells = [StudyCell { t_len: 60, n: 10, v: 3 }];
        let settings = StudySettings {
            ar1: iid(),
            alpha: 0.2,
            calibration_reps: 25,
            reps: 20,
            ks: vec![3, 10],
            seed: 13,
        };
        let rows = run_accuracy_study(&cells, &settings).unwrap();
        assert_eq!(rows.len(), 1);
        let row = &rows[0];
        assert_eq!(row.tau1, 24);
        assert!(row.threshold.is_finite());
        let rate3 = row.hit_rates[0].1;
        let rate10 = row.hit_rates[1].1;
        assert!((0.0..=1.0).contains(&rate3));
        assert!(rate10 >= rate3, "k=10 rate {rate10} below k=3 rate {rate3}");
        let again = run_accuracy_study(&cells, &settings).unwrap();
        assert_eq!(rows, again);
    }
}
