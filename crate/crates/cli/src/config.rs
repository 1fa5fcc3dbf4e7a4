//! Plain-text scenario configs: one `key = value` per line, `#` comments.

use std::path::Path;

use slscan::{Error, Result};

/// Parsed scenario description. `v` selects the single-change design, `r`
/// (with `k`) the multi-change design; with neither the means are zero.
#[derive(Debug, Clone, Default)]
pub struct ScenarioConfig {
    pub n: Option<usize>,
    pub t: Option<usize>,
    pub v: Option<usize>,
    pub tau: Vec<usize>,
    pub phi: Option<f64>,
    pub sigma_eps: Option<f64>,
    /// AR(1) drift, the config key `c`.
    pub drift: Option<f64>,
    pub r: Option<f64>,
    /// Block overlap offset, the config key `k`.
    pub overlap: Option<usize>,
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub alpha: Option<f64>,
}

fn bad_line(line: usize, reason: impl Into<String>) -> Error {
    Error::CsvData {
        line: line as u64,
        reason: reason.into(),
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| bad_line(line, format!("bad value {raw:?} for key {key:?}")))
}

impl ScenarioConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str(&text)
    }

    pub fn from_str(text: &str) -> Result<Self> {
        let mut cfg = ScenarioConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(bad_line(line, format!("expected key = value, got {content:?}")));
            };
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            if seen.contains(&key) {
                return Err(bad_line(line, format!("duplicate key {key:?}")));
            }
            match key.as_str() {
                "n" => cfg.n = Some(parse_num(line, &key, value)?),
                "t" => cfg.t = Some(parse_num(line, &key, value)?),
                "v" => cfg.v = Some(parse_num(line, &key, value)?),
                "tau" => {
                    cfg.tau = value
                        .split(',')
                        .map(|part| parse_num(line, &key, part.trim()))
                        .collect::<Result<Vec<usize>>>()?;
                }
                "phi" => cfg.phi = Some(parse_num(line, &key, value)?),
                "sigma_eps" => cfg.sigma_eps = Some(parse_num(line, &key, value)?),
                "c" => cfg.drift = Some(parse_num(line, &key, value)?),
                "r" => cfg.r = Some(parse_num(line, &key, value)?),
                "k" => cfg.overlap = Some(parse_num(line, &key, value)?),
                "seed" => cfg.seed = Some(parse_num(line, &key, value)?),
                "reps" => cfg.reps = Some(parse_num(line, &key, value)?),
                "alpha" => cfg.alpha = Some(parse_num(line, &key, value)?),
                _ => return Err(bad_line(line, format!("unknown key {key:?}"))),
            }
            seen.push(key);
        }
        Ok(cfg)
    }

    pub fn require_n(&self) -> Result<usize> {
        self.n.ok_or_else(|| Error::param("n", "missing from config"))
    }

    pub fn require_t(&self) -> Result<usize> {
        self.t.ok_or_else(|| Error::param("t", "missing from config"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_lists() {
        let cfg = ScenarioConfig::from_str(
            "# scenario\nn = 200\nt=2000\ntau = 500, 1000,1500\nphi = 1\nc = 0.5\nseed = 11\n\nalpha = 0.05 # five percent\n",
        )
        .unwrap();
        assert_eq!(cfg.n, Some(200));
        assert_eq!(cfg.t, Some(2000));
        assert_eq!(cfg.tau, vec![500, 1000, 1500]);
        assert_eq!(cfg.phi, Some(1.0));
        assert_eq!(cfg.drift, Some(0.5));
        assert_eq!(cfg.seed, Some(11));
        assert_eq!(cfg.alpha, Some(0.05));
        assert_eq!(cfg.v, None);
        assert_eq!(cfg.r, None);
    }

    #[test]
    fn rejects_malformed_lines() {
        for (text, fragment) in [
            ("n 200", "key = value"),
            ("n = abc", "bad value"),
            ("n = 5\nn = 6", "duplicate"),
            ("volume = 3", "unknown key"),
            ("tau = 10,x", "bad value"),
        ] {
            let err = ScenarioConfig::from_str(text).unwrap_err().to_string();
            assert!(err.contains(fragment), "{text:?} -> {err}");
        }
    }
}
