//! Geometric window schedules and the triple sets scanned at each scale.
//!
//! A schedule is a list of (arm, spacing) pairs: at scale i the detector
//! slides a two-armed window of arm length h on a grid of spacing d. Arms
//! grow geometrically so the schedule stays logarithmic in T while the grids
//! stay fine enough to localize.

use crate::error::{Error, Result};

/// One scale of the schedule: windows of arm length `arm` placed every
/// `spacing` observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleEntry {
    pub arm: usize,
    pub spacing: usize,
}

/// Immutable schedule shared by every segment of a scan; segments differ
/// only in which scales admit windows.
#[derive(Debug, Clone)]
pub struct WindowSchedule {
    scales: Vec<ScaleEntry>,
}

/// Exact ceil(num * h / den) in integers; growth factors are decimal and
/// float rounding must not perturb the schedule (e.g. 1.1 * 10 lands on
/// 11.000000000000002, whose f64 ceil is 12).
fn ceil_mul(h: u128, num: u128, den: u128) -> u128 {
    (num * h).div_ceil(den)
}

/// Represent a growth factor as num/den with den = 10^6, exact for factors
/// given to at most six decimal places.
fn growth_as_rational(growth: f64) -> Result<(u128, u128)> {
    const DEN: u128 = 1_000_000;
    if !growth.is_finite() || growth <= 1.0 || growth > 1_000.0 {
        return Err(Error::param("growth", format!("need 1 < growth <= 1000, got {growth}")));
    }
    let num = (growth * DEN as f64).round() as u128;
    if num <= DEN {
        return Err(Error::param("growth", format!("{growth} rounds to <= 1")));
    }
    Ok((num, DEN))
}

impl WindowSchedule {
    /// Schedule with arms 1, 2, 3, ... growing by `growth` (arm_{i+1} =
    /// ceil(growth * arm_i)) and spacings floor(arm_i / i), generated while
    /// arm + spacing still fits in `t_len` observations.
    pub fn geometric(t_len: usize, growth: f64) -> Result<Self> {
        if t_len < 2 {
            return Err(Error::param("t_len", format!("need at least 2 observations, got {t_len}")));
        }
        let (num, den) = growth_as_rational(growth)?;
        let mut scales = Vec::new();
        let mut arm: u128 = 1;
        loop {
            let i = scales.len() as u128 + 1;
            let spacing = arm / i;
            // arm >= i under any growth > 1, so the spacing never hits 0
            debug_assert!(spacing >= 1);
            if arm + spacing > t_len as u128 {
                break;
            }
            scales.push(ScaleEntry {
                arm: arm as usize,
                spacing: spacing as usize,
            });
            arm = ceil_mul(arm, num, den);
        }
        if scales.is_empty() {
            return Err(Error::param("t_len", format!("no scale fits in {t_len} observations")));
        }
        Ok(WindowSchedule { scales })
    }

    /// Alternate schedule with arms ceil(exp(i / ln i)) for i >= 2 (arm 1 at
    /// i = 1), bumped minimally where the raw sequence dips so arms stay
    /// strictly increasing. Used for rate experiments, not the default scan.
    pub fn theoretical(i_max: usize) -> Result<Self> {
        if !(2..=230).contains(&i_max) {
            // exp(i / ln i) leaves u64 shortly past 230
            return Err(Error::param("i_max", format!("need 2 <= i_max <= 230, got {i_max}")));
        }
        let mut scales = vec![ScaleEntry { arm: 1, spacing: 1 }];
        for i in 2..=i_max {
            let i_f = i as f64;
            let raw = (i_f / i_f.ln()).exp().ceil() as usize;
            let arm = raw.max(scales[i - 2].arm + 1);
            let spacing = (arm / i).max(1);
            scales.push(ScaleEntry { arm, spacing });
        }
        Ok(WindowSchedule { scales })
    }

    /// Number of scales (the schedule's i_T).
    pub fn scale_count(&self) -> usize {
        self.scales.len()
    }

    /// Entry at 1-based scale index.
    pub fn entry(&self, scale: usize) -> ScaleEntry {
        self.scales[scale - 1]
    }

    pub fn entries(&self) -> &[ScaleEntry] {
        &self.scales
    }

    /// Deepest scale whose windows fit a segment of `seg_len` observations:
    /// max{i : arm_i + spacing_i <= seg_len}, or 0 if even scale 1 does not
    /// fit. Scales are generated only while they fit the full length, so a
    /// linear probe from the back is wasted on short segments; arms increase,
    /// making the predicate monotone, hence binary search.
    pub fn deepest_scale(&self, seg_len: usize) -> usize {
        self.scales
            .partition_point(|e| e.arm + e.spacing <= seg_len)
    }

    /// Scan triples (s, t, u) at a scale for a segment of `seg_len`
    /// observations, in local coordinates 0..=seg_len: centers t = k * spacing
    /// for k = 1..=floor((seg_len - 1) / spacing), arms clipped to the
    /// segment.
    pub fn triples(&self, scale: usize, seg_len: usize) -> Vec<(usize, usize, usize)> {
        let ScaleEntry { arm, spacing } = self.entry(scale);
        let k_max = if seg_len == 0 { 0 } else { (seg_len - 1) / spacing };
        let mut out = Vec::with_capacity(k_max);
        for k in 1..=k_max {
            let t = k * spacing;
            let s = t.saturating_sub(arm);
            let u = (t + arm).min(seg_len);
            // t <= seg_len - 1 by construction, so both arms are nonempty
            debug_assert!(s < t && t < u && u <= seg_len);
            out.push((s, t, u));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn geometric_scale_counts_for_reference_lengths() {
        let schedule = WindowSchedule::geometric(2000, 1.1).unwrap();
        assert_eq!(schedule.scale_count(), 61);
        assert_eq!(schedule.entry(61), ScaleEntry { arm: 1881, spacing: 30 });
        assert_eq!(WindowSchedule::geometric(3849, 1.1).unwrap().scale_count(), 68);
        assert_eq!(WindowSchedule::geometric(10, 1.1).unwrap().scale_count(), 9);
        assert_eq!(WindowSchedule::geometric(2, 1.1).unwrap().scale_count(), 1);
    }

    #[test]
    fn rounding_does_not_skip_integer_products() {
        // 1.1 * 10 must advance the arm to 11, not 12
        let schedule = WindowSchedule::geometric(2000, 1.1).unwrap();
        let arms: Vec<usize> = schedule.entries().iter().map(|e| e.arm).collect();
        assert_eq!(&arms[..12], &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 13]);
    }

    #[test]
    fn arms_increase_and_spacings_stay_positive() {
        for t_len in [2usize, 10, 100, 2000, 3849, 100_000] {
            let schedule = WindowSchedule::geometric(t_len, 1.1).unwrap();
            let mut prev = 0;
            for (idx, e) in schedule.entries().iter().enumerate() {
                assert!(e.arm > prev);
                assert!(e.spacing >= 1);
                assert_eq!(e.spacing, e.arm / (idx + 1));
                assert!(e.spacing <= e.arm);
                prev = e.arm;
            }
        }
    }

    #[test]
    fn deepest_scale_matches_linear_scan() {
        let schedule = WindowSchedule::geometric(2000, 1.1).unwrap();
        for g in [0usize, 1, 2, 3, 10, 47, 500, 1999, 2000] {
            let linear = schedule
                .entries()
                .iter()
                .filter(|e| e.arm + e.spacing <= g)
                .count();
            assert_eq!(schedule.deepest_scale(g), linear, "g = {g}");
        }
        assert_eq!(schedule.deepest_scale(2000), 61);
        assert_eq!(schedule.deepest_scale(10), 9);
        assert_eq!(schedule.deepest_scale(2), 1);
        assert_eq!(schedule.deepest_scale(1), 0);
    }

    #[test]
    fn triple_enumeration_matches_hand_example() {
        // arm 4, spacing 2 sits at scale 4 (arms 1,2,3,4; spacing 4/4=1)...
        // build a 1-scale schedule directly instead
        let schedule = WindowSchedule {
            scales: vec![ScaleEntry { arm: 4, spacing: 2 }],
        };
        assert_eq!(
            schedule.triples(1, 10),
            vec![(0, 2, 6), (0, 4, 8), (2, 6, 10), (4, 8, 10)]
        );
        let smallest = WindowSchedule::geometric(2, 1.1).unwrap();
        assert_eq!(smallest.triples(1, 2), vec![(0, 1, 2)]);
        // segment shorter than the spacing admits nothing
        assert_eq!(schedule.triples(1, 2), Vec::<(usize, usize, usize)>::new());
    }

    #[test]
    fn theoretical_schedule_reference_values() {
        let schedule = WindowSchedule::theoretical(101).unwrap();
        assert_eq!(schedule.entry(1).arm, 1);
        assert_eq!(schedule.entry(2).arm, 18);
        assert_eq!(schedule.entry(100).arm, 2_695_161_850);
        let ratio = schedule.entry(101).arm as f64 / schedule.entry(100).arm as f64;
        assert!((ratio - 1.185140702).abs() < 1e-6);
        let mut prev = 0;
        for e in schedule.entries() {
            assert!(e.arm > prev);
            assert!(e.spacing >= 1);
            prev = e.arm;
        }
    }

    #[test]
    fn theoretical_ratios_trend_toward_one() {
        let schedule = WindowSchedule::theoretical(230).unwrap();
        let ratio = |i: usize| schedule.entry(i + 1).arm as f64 / schedule.entry(i).arm as f64;
        assert!(ratio(50) < ratio(20));
        assert!(ratio(100) < ratio(50));
        assert!(ratio(229) < ratio(100));
        assert!(ratio(229) > 1.0);
    }

    proptest! {
        #[test]
        fn triples_satisfy_window_invariants(t_len in 2usize..600, g in 0usize..600, seed_scale in 1usize..80) {
            let schedule = WindowSchedule::geometric(t_len, 1.1).unwrap();
            let scale = (seed_scale - 1) % schedule.scale_count() + 1;
            let ScaleEntry { arm, spacing } = schedule.entry(scale);
            let triples = schedule.triples(scale, g);
            let expected = if g == 0 { 0 } else { (g - 1) / spacing };
            prop_assert_eq!(triples.len(), expected);
            for &(s, t, u) in &triples {
                prop_assert!(s < t && t < u && u <= g);
                prop_assert!(t - s <= arm);
                prop_assert!(u - t <= arm);
                // interior windows are symmetric at full arm length
                if t >= arm && t + arm <= g {
                    prop_assert_eq!(t - s, arm);
                    prop_assert_eq!(u - t, arm);
                }
            }
            // centers are distinct and increasing
            for pair in triples.windows(2) {
                prop_assert!(pair[0].1 < pair[1].1);
            }
        }

        #[test]
        fn deepest_scale_monotone_in_segment_length(t_len in 2usize..3000) {
            let schedule = WindowSchedule::geometric(t_len, 1.1).unwrap();
            let mut prev = 0;
            for g in 0..=t_len {
                let i_g = schedule.deepest_scale(g);
                prop_assert!(i_g >= prev);
                prev = i_g;
            }
            prop_assert_eq!(schedule.deepest_scale(t_len), schedule.scale_count());
        }
    }
}
