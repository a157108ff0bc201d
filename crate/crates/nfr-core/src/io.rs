//! Line-oriented text formats for instances, policies and value
//! vectors. Every file opens with `format:` and `version:` lines, so
//! readers can reject the wrong kind early with a line number attached.
//! Floats are written with the shortest representation that parses
//! back to the same bits, so write-read round-trips are exact.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::matrix::DenseMatrix;
use crate::policy::Policy;
use crate::solver::ValueVector;

pub const FORMAT_VERSION: u32 = 1;

const INSTANCE_TAG: &str = "nfr-instance";
const POLICY_TAG: &str = "nfr-policy";
const VALUES_TAG: &str = "nfr-values";

// ------------------------------------------------------------------ write

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Sparse triplet lines for nonzero off-diagonal entries, row-major.
fn triplet_lines(out: &mut String, key: &str, m: &DenseMatrix) {
    for i in 0..m.rows() {
        for (j, &x) in m.row(i).iter().enumerate() {
            if x != 0.0 {
                out.push_str(&format!("{key}: {i} {j} {x}\n"));
            }
        }
    }
}

pub fn write_instance(instance: &Instance) -> String {
    let mut out = format!(
        "format: {INSTANCE_TAG}\nversion: {FORMAT_VERSION}\nk: {}\n",
        instance.k()
    );
    out.push_str(&format!("c: {}\n", join(instance.costs())));
    out.push_str(&format!("p0: {}\n", join(instance.p0())));
    let cached = instance
        .cached_ids()
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    out.push_str(&format!("cached: {cached}\n"));
    triplet_lines(&mut out, "u", instance.u_matrix());
    out
}

pub fn write_policy(policy: &Policy) -> String {
    let mut out = format!(
        "format: {POLICY_TAG}\nversion: {FORMAT_VERSION}\nk: {}\nn: {}\n",
        policy.k(),
        policy.n()
    );
    triplet_lines(&mut out, "r", policy.matrix());
    out
}

pub fn write_values(values: &ValueVector) -> String {
    format!(
        "format: {VALUES_TAG}\nversion: {FORMAT_VERSION}\nk: {}\nv: {}\n",
        values.len(),
        join(values.as_slice())
    )
}

// ------------------------------------------------------------------- read

/// Key-value lines with positions; skips blanks and '#' comments.
struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
        }
    }

    /// Next (line number, key, value) or None at end of file.
    fn next_kv(&mut self) -> Result<Option<(usize, &'a str, &'a str)>> {
        for (idx, raw) in self.inner.by_ref() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let no = idx + 1;
            let (key, value) = line.split_once(':').ok_or_else(|| Error::Parse {
                line: no,
                message: format!("expected `key: value`, got {line:?}"),
            })?;
            return Ok(Some((no, key.trim(), value.trim())));
        }
        Ok(None)
    }
}

fn parse_f64(line: usize, s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("{s:?} is not a number"),
    })
}

fn parse_usize(line: usize, s: &str) -> Result<usize> {
    s.parse::<usize>().map_err(|_| Error::Parse {
        line,
        message: format!("{s:?} is not a nonnegative integer"),
    })
}

fn parse_dense(line: usize, s: &str, k: usize, what: &str) -> Result<Vec<f64>> {
    let values = s
        .split_whitespace()
        .map(|t| parse_f64(line, t))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != k {
        return Err(Error::Parse {
            line,
            message: format!("{what} has {} entries, expected {k}", values.len()),
        });
    }
    Ok(values)
}

/// (i, j, value) with bounds and duplicate checks against `seen`.
fn parse_triplet(
    line: usize,
    s: &str,
    k: usize,
    seen: &mut [bool],
) -> Result<(usize, usize, f64)> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(Error::Parse {
            line,
            message: format!("expected `i j value`, got {s:?}"),
        });
    }
    let i = parse_usize(line, parts[0])?;
    let j = parse_usize(line, parts[1])?;
    let x = parse_f64(line, parts[2])?;
    if i >= k || j >= k {
        return Err(Error::Parse {
            line,
            message: format!("entry ({i}, {j}) out of range for k={k}"),
        });
    }
    if std::mem::replace(&mut seen[i * k + j], true) {
        return Err(Error::Parse {
            line,
            message: format!("duplicate entry ({i}, {j})"),
        });
    }
    Ok((i, j, x))
}

/// Checks the two header lines and returns the rest of the stream.
fn expect_header<'a>(lines: &mut Lines<'a>, tag: &str) -> Result<()> {
    let (no, key, value) = lines.next_kv()?.ok_or_else(|| Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    if key != "format" || value != tag {
        return Err(Error::Parse {
            line: no,
            message: format!("expected `format: {tag}`, found `{key}: {value}`"),
        });
    }
    let (no, key, value) = lines.next_kv()?.ok_or_else(|| Error::Parse {
        line: no,
        message: "missing version line".into(),
    })?;
    if key != "version" {
        return Err(Error::Parse {
            line: no,
            message: format!("expected `version:`, found `{key}:`"),
        });
    }
    let v = parse_usize(no, value)?;
    if v != FORMAT_VERSION as usize {
        return Err(Error::Parse {
            line: no,
            message: format!("unsupported version {v}, this build reads {FORMAT_VERSION}"),
        });
    }
    Ok(())
}

fn expect_k(lines: &mut Lines<'_>) -> Result<usize> {
    let (no, key, value) = lines.next_kv()?.ok_or_else(|| Error::Parse {
        line: 0,
        message: "missing `k:` line".into(),
    })?;
    if key != "k" {
        return Err(Error::Parse {
            line: no,
            message: format!("expected `k:`, found `{key}:`"),
        });
    }
    parse_usize(no, value)
}

pub fn read_instance(text: &str) -> Result<Instance> {
    let mut lines = Lines::new(text);
    expect_header(&mut lines, INSTANCE_TAG)?;
    let k = expect_k(&mut lines)?;
    if k < 2 {
        return Err(Error::Parse {
            line: 3,
            message: format!("catalog needs at least 2 items, got {k}"),
        });
    }
    let mut costs: Option<Vec<f64>> = None;
    let mut p0: Option<Vec<f64>> = None;
    let mut cached: Option<Vec<usize>> = None;
    let mut u = DenseMatrix::zeros(k, k);
    let mut seen = vec![false; k * k];
    while let Some((no, key, value)) = lines.next_kv()? {
        match key {
            "c" => costs = Some(parse_dense(no, value, k, "cost vector")?),
            "p0" => p0 = Some(parse_dense(no, value, k, "popularity vector")?),
            "cached" => {
                cached = Some(
                    value
                        .split_whitespace()
                        .map(|t| parse_usize(no, t))
                        .collect::<Result<_>>()?,
                )
            }
            "u" => {
                let (i, j, x) = parse_triplet(no, value, k, &mut seen)?;
                u.set(i, j, x);
            }
            other => {
                return Err(Error::Parse {
                    line: no,
                    message: format!("unknown key `{other}:` in instance file"),
                })
            }
        }
    }
    let missing = |what: &str| Error::Parse {
        line: 0,
        message: format!("instance file has no `{what}:` line"),
    };
    Instance::new(
        u,
        costs.ok_or_else(|| missing("c"))?,
        p0.ok_or_else(|| missing("p0"))?,
        cached.unwrap_or_default(),
    )
}

pub fn read_policy(text: &str) -> Result<Policy> {
    let mut lines = Lines::new(text);
    expect_header(&mut lines, POLICY_TAG)?;
    let k = expect_k(&mut lines)?;
    let (no, key, value) = lines.next_kv()?.ok_or_else(|| Error::Parse {
        line: 0,
        message: "missing `n:` line".into(),
    })?;
    if key != "n" {
        return Err(Error::Parse {
            line: no,
            message: format!("expected `n:`, found `{key}:`"),
        });
    }
    let n = parse_usize(no, value)?;
    if n == 0 || n >= k {
        return Err(Error::Parse {
            line: no,
            message: format!("batch size must satisfy 1 <= N <= K-1, got N={n} K={k}"),
        });
    }
    let mut r = DenseMatrix::zeros(k, k);
    let mut seen = vec![false; k * k];
    while let Some((no, key, value)) = lines.next_kv()? {
        if key != "r" {
            return Err(Error::Parse {
                line: no,
                message: format!("unknown key `{key}:` in policy file"),
            });
        }
        let (i, j, x) = parse_triplet(no, value, k, &mut seen)?;
        if i == j {
            return Err(Error::Parse {
                line: no,
                message: format!("self-recommendation at ({i}, {j})"),
            });
        }
        if !(0.0..=1.0 + 1e-9).contains(&x) {
            return Err(Error::Parse {
                line: no,
                message: format!("frequency {x} at ({i}, {j}) outside [0, 1]"),
            });
        }
        r.set(i, j, x);
    }
    Ok(Policy::from_matrix(r, n))
}

pub fn read_values(text: &str) -> Result<ValueVector> {
    let mut lines = Lines::new(text);
    expect_header(&mut lines, VALUES_TAG)?;
    let k = expect_k(&mut lines)?;
    let (no, key, value) = lines.next_kv()?.ok_or_else(|| Error::Parse {
        line: 0,
        message: "missing `v:` line".into(),
    })?;
    if key != "v" {
        return Err(Error::Parse {
            line: no,
            message: format!("expected `v:`, found `{key}:`"),
        });
    }
    Ok(ValueVector::new(parse_dense(no, value, k, "value vector")?))
}

// ------------------------------------------------------------------ files

pub fn save_instance(path: &Path, instance: &Instance) -> Result<()> {
    Ok(fs::write(path, write_instance(instance))?)
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    read_instance(&fs::read_to_string(path)?)
}

pub fn save_policy(path: &Path, policy: &Policy) -> Result<()> {
    Ok(fs::write(path, write_policy(policy))?)
}

pub fn load_policy(path: &Path) -> Result<Policy> {
    read_policy(&fs::read_to_string(path)?)
}

pub fn save_values(path: &Path, values: &ValueVector) -> Result<()> {
    Ok(fs::write(path, write_values(values))?)
}

pub fn load_values(path: &Path) -> Result<ValueVector> {
    read_values(&fs::read_to_string(path)?)
}
