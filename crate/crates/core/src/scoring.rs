//! Per-sequence score terms aggregated across a panel.
//!
//! Each sequence contributes ln(1 + w1 * g1(p) + w2 * g2(p)) where p is the
//! two-sided tail probability of its normalized window contrast and g1, g2
//! are zero-mean transforms on (0, 1). The weights shrink with the panel
//! size N so that exp(term) has unit mean under the null; summing terms over
//! sequences and penalizing for the window geometry gives the statistic the
//! detector thresholds.

use crate::error::{Error, Result};
use crate::normal::log_p_value;

/// Terms whose inner argument is driven non-positive by extreme negative
/// component values are clamped here instead of producing NaN.
pub const TERM_FLOOR: f64 = -23.025850929940457; // ln(1e-10)

/// Below this ln p the direct evaluation of exp overflows; switch to
/// log-sum-exp over the component logs.
const DIRECT_LOG_P_MIN: f64 = -600.0;

/// ln of the singular part of the heavy-tail component:
/// `heavy_tail_component(p) = exp(log_heavy_tail_part(ln p)) - 1/2`.
/// Kept in log form because the part itself overflows for p below ~1e-308.
pub fn log_heavy_tail_part(log_p: f64) -> f64 {
    -log_p - 2.0 * (2.0 - log_p).ln()
}

/// Zero-mean transform 1 / (p (2 - ln p)^2) - 1/2 on (0, 1); integrates to 0
/// and weights extremely small p heavily.
pub fn heavy_tail_component(p: f64) -> f64 {
    log_heavy_tail_part(p.ln()).exp() - 0.5
}

/// Zero-mean transform 1/sqrt(p) - 2 on (0, 1); integrates to 0 and targets
/// moderately small p.
pub fn moderate_tail_component(p: f64) -> f64 {
    (-p.ln() / 2.0).exp() - 2.0
}

/// One evaluated score term.
#[derive(Debug, Clone, Copy)]
pub struct ScoreTerm {
    pub value: f64,
    /// True when the floor guard replaced a non-positive inner argument.
    pub floored: bool,
}

/// Panel-size-dependent weights of the two tail components.
#[derive(Debug, Clone, Copy)]
pub struct SparsityWeights {
    lambda1: f64,
    lambda2: f64,
    n: usize,
    w1: f64,
    w2: f64,
    log_w1: f64,
    log_w2: f64,
    /// 1 - w1/2 - 2 w2, the constant left over once both components'
    /// singular parts are split off.
    base: f64,
}

impl SparsityWeights {
    /// Weights w1 = lambda1 ln N / N and w2 = lambda2 / sqrt(N ln N) for a
    /// panel of N >= 2 sequences.
    pub fn new(lambda1: f64, lambda2: f64, n: usize) -> Result<Self> {
        if !(lambda1.is_finite() && lambda1 > 0.0) {
            return Err(Error::param("lambda1", format!("need > 0, got {lambda1}")));
        }
        if !(lambda2.is_finite() && lambda2 > 0.0) {
            return Err(Error::param("lambda2", format!("need > 0, got {lambda2}")));
        }
        if n < 2 {
            return Err(Error::param("n", format!("panel needs >= 2 sequences, got {n}")));
        }
        let n_f = n as f64;
        let ln_n = n_f.ln();
        let w1 = lambda1 * ln_n / n_f;
        let w2 = lambda2 / (n_f * ln_n).sqrt();
        Ok(SparsityWeights {
            lambda1,
            lambda2,
            n,
            w1,
            w2,
            log_w1: w1.ln(),
            log_w2: w2.ln(),
            base: 1.0 - w1 / 2.0 - 2.0 * w2,
        })
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn panel_size(&self) -> usize {
        self.n
    }

    /// Score term for one sequence given ln p of its contrast.
    ///
    /// For moderate p evaluates ln(1 + w1 g1 + w2 g2) directly; once the
    /// component values would overflow it regroups the same expression as a
    /// log-sum-exp over the singular parts plus the leftover constant. Both
    /// branches agree to ~1e-15 where they overlap.
    pub fn term_from_log_p(&self, log_p: f64) -> ScoreTerm {
        debug_assert!(log_p <= 0.0, "ln p must be <= 0, got {log_p}");
        if log_p > DIRECT_LOG_P_MIN {
            let g1 = log_heavy_tail_part(log_p).exp() - 0.5;
            let g2 = (-log_p / 2.0).exp() - 2.0;
            let inner = self.w1 * g1 + self.w2 * g2;
            if inner <= -1.0 {
                ScoreTerm {
                    value: TERM_FLOOR,
                    floored: true,
                }
            } else {
                ScoreTerm {
                    value: inner.ln_1p(),
                    floored: false,
                }
            }
        } else {
            let lu = self.log_w1 + log_heavy_tail_part(log_p);
            let lv = self.log_w2 - log_p / 2.0;
            let m = lu.max(lv);
            let inner = (lu - m).exp() + (lv - m).exp() + self.base * (-m).exp();
            if inner <= 0.0 {
                ScoreTerm {
                    value: TERM_FLOOR,
                    floored: true,
                }
            } else {
                ScoreTerm {
                    value: m + inner.ln(),
                    floored: false,
                }
            }
        }
    }

    /// Score term for one sequence given its normalized contrast z.
    pub fn term_from_z(&self, z: f64) -> ScoreTerm {
        self.term_from_log_p(log_p_value(z))
    }
}

/// Default second weight sqrt(ln T / ln ln T) for a scan over T observations.
pub fn default_lambda2(t_len: usize) -> Result<f64> {
    if t_len < 16 {
        return Err(Error::param(
            "t_len",
            format!("default weight needs at least 16 observations, got {t_len}"),
        ));
    }
    let ln_t = (t_len as f64).ln();
    Ok((ln_t / ln_t.ln()).sqrt())
}

/// Multiple-window penalty ln((T/4) (1/(t-s) + 1/(u-t))) subtracted from the
/// panel score of window (s, t, u] in a scan over T observations.
pub fn window_penalty(t_len: usize, s: usize, t: usize, u: usize) -> f64 {
    debug_assert!(s < t && t < u && u <= t_len);
    let left = (t - s) as f64;
    let right = (u - t) as f64;
    (t_len as f64 / 4.0 * (1.0 / left + 1.0 / right)).ln()
}
