//! Flat key-value sweep configuration: `key: value` lines, `#`
//! comments, whitespace-separated lists. Grid keys (lbar or lambda, q,
//! alpha, n) hold lists; everything else is scalar.

use nfr_core::ingest::{DEFAULT_COST_CACHED, DEFAULT_COST_UNCACHED};
use nfr_core::solver::EvalMethod;
use nfr_core::{Error, Result};
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Instance file; exclusive with `synthetic-k`.
    pub instance: Option<PathBuf>,
    pub synthetic_k: Option<usize>,
    pub synthetic_seed: u64,
    pub cache_ratio: Option<f64>,
    pub cost_uncached: f64,
    pub cost_cached: f64,
    /// Mean-length grid; exclusive with `lambda`.
    pub lbar: Vec<f64>,
    pub lambda: Vec<f64>,
    pub q: Vec<f64>,
    pub alpha: Vec<f64>,
    pub n: Vec<usize>,
    pub sessions: usize,
    pub seed: u64,
    pub eval_method: EvalMethod,
    pub max_iterations: Option<usize>,
}

fn parse_one<T: FromStr>(value: &str, line: usize) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("could not parse {value:?}"),
    })
}

fn parse_list<T: FromStr>(value: &str, line: usize) -> Result<Vec<T>> {
    value
        .split_whitespace()
        .map(|tok| parse_one(tok, line))
        .collect()
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<SweepConfig> {
        let mut cfg = SweepConfig {
            instance: None,
            synthetic_k: None,
            synthetic_seed: 0,
            cache_ratio: None,
            cost_uncached: DEFAULT_COST_UNCACHED,
            cost_cached: DEFAULT_COST_CACHED,
            lbar: Vec::new(),
            lambda: Vec::new(),
            q: Vec::new(),
            alpha: Vec::new(),
            n: Vec::new(),
            sessions: 1000,
            seed: 0,
            eval_method: EvalMethod::Auto,
            max_iterations: None,
        };
        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once(':').ok_or_else(|| Error::Parse {
                line,
                message: "expected `key: value`".into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "instance" => cfg.instance = Some(PathBuf::from(value)),
                "synthetic-k" => cfg.synthetic_k = Some(parse_one(value, line)?),
                "synthetic-seed" => cfg.synthetic_seed = parse_one(value, line)?,
                "cache-ratio" => cfg.cache_ratio = Some(parse_one(value, line)?),
                "cost-uncached" => cfg.cost_uncached = parse_one(value, line)?,
                "cost-cached" => cfg.cost_cached = parse_one(value, line)?,
                "lbar" => cfg.lbar = parse_list(value, line)?,
                "lambda" => cfg.lambda = parse_list(value, line)?,
                "q" => cfg.q = parse_list(value, line)?,
                "alpha" => cfg.alpha = parse_list(value, line)?,
                "n" => cfg.n = parse_list(value, line)?,
                "sessions" => cfg.sessions = parse_one(value, line)?,
                "seed" => cfg.seed = parse_one(value, line)?,
                "eval-method" => {
                    cfg.eval_method = match value {
                        "auto" => EvalMethod::Auto,
                        "direct" => EvalMethod::Direct,
                        "iterative" => EvalMethod::Iterative,
                        other => {
                            return Err(Error::Parse {
                                line,
                                message: format!("unknown eval method {other:?}"),
                            })
                        }
                    }
                }
                "max-iterations" => cfg.max_iterations = Some(parse_one(value, line)?),
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown key {other:?}"),
                    })
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    // Structural errors have no single line to blame; line 0 marks the
    // file as a whole, matching the instance reader's convention.
    fn validate(&self) -> Result<()> {
        let whole = |message: String| Error::Parse { line: 0, message };
        if self.instance.is_some() == self.synthetic_k.is_some() {
            return Err(whole(
                "exactly one of `instance` / `synthetic-k` is required".into(),
            ));
        }
        if self.lbar.is_empty() == self.lambda.is_empty() {
            return Err(whole("exactly one of `lbar` / `lambda` must be set".into()));
        }
        for (key, list) in [("q", &self.q), ("alpha", &self.alpha)] {
            if list.is_empty() {
                return Err(whole(format!("`{key}` needs at least one value")));
            }
        }
        if self.n.is_empty() {
            return Err(whole("`n` needs at least one value".into()));
        }
        if self.sessions == 0 {
            return Err(whole("`sessions` must be positive".into()));
        }
        Ok(())
    }

    /// The continuation-probability grid, with lbar entries mapped
    /// through lambda = 1 - 1/lbar.
    pub fn lambdas(&self) -> Vec<f64> {
        if self.lbar.is_empty() {
            self.lambda.clone()
        } else {
            self.lbar.iter().map(|&l| 1.0 - 1.0 / l).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grids_and_scalars() {
        let cfg = SweepConfig::parse(
            "# demo\nsynthetic-k: 120\nlbar: 1 2 5\nq: 0.2 0.8\nalpha: 0.75\n\
             n: 1 2\nsessions: 50\nseed: 9\n",
        )
        .unwrap();
        assert_eq!(cfg.synthetic_k, Some(120));
        assert_eq!(cfg.lbar, vec![1.0, 2.0, 5.0]);
        assert_eq!(cfg.lambdas()[0], 0.0);
        assert_eq!(cfg.q.len(), 2);
        assert_eq!(cfg.n, vec![1, 2]);
        assert_eq!(cfg.sessions, 50);
    }

    #[test]
    fn rejects_unknown_keys_with_line_numbers() {
        let err = SweepConfig::parse("synthetic-k: 120\nlbar: 2\nq: 0.5\nalpha: 0.7\nn: 1\nbogus: 3\n")
            .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 6),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_ambiguous_session_length() {
        let err = SweepConfig::parse(
            "synthetic-k: 120\nlbar: 2\nlambda: 0.5\nq: 0.5\nalpha: 0.7\nn: 1\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 0, .. }));
    }
}
