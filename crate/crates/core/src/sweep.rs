//! Parameter grids over `(p, N, theta)` and their CSV rendering.

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{MecsError, Result};
use crate::measures::{n_tangle_closed, pair_concurrence_closed};
use crate::states::MecsSpec;

pub const CSV_HEADER: &str = "p,theta,n,concurrence,n_tangle";

/// Default upper end of the `p` axis.
pub const DEFAULT_P_MAX: f64 = 0.999;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub ps: Vec<f64>,
    pub ns: Vec<usize>,
    pub thetas: Vec<f64>,
}

/// `steps` evenly spaced points on `[0, p_max]`, both ends included.
pub fn p_axis(steps: usize, p_max: f64) -> Result<Vec<f64>> {
    if !(p_max > 0.0 && p_max <= 1.0) {
        return Err(MecsError::OverlapOutOfRange(p_max));
    }
    if steps < 2 {
        return Err(MecsError::Unsupported(format!(
            "need at least 2 p steps, got {steps}"
        )));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                p_max
            } else {
                p_max * i as f64 / last
            }
        })
        .collect())
}

/// `theta_j = 2 pi j / steps`, `j = 0..steps`; `pi` itself is hit exactly
/// when `steps` is even.
pub fn theta_axis(steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(MecsError::Unsupported("need at least 1 theta step".into()));
    }
    Ok((0..steps)
        .map(|j| PI * ((2 * j) as f64 / steps as f64))
        .collect())
}

impl SweepGrid {
    pub fn new(ps: Vec<f64>, ns: Vec<usize>, thetas: Vec<f64>) -> Result<Self> {
        if ps.is_empty() || ns.is_empty() || thetas.is_empty() {
            return Err(MecsError::Unsupported("empty sweep axis".into()));
        }
        for &p in &ps {
            if !p.is_finite() {
                return Err(MecsError::NonFinite("p"));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(MecsError::OverlapOutOfRange(p));
            }
        }
        if thetas.iter().any(|t| !t.is_finite()) {
            return Err(MecsError::NonFinite("theta"));
        }
        if let Some(&n) = ns.iter().find(|&&n| n < 2) {
            return Err(MecsError::TooFewParties { got: n, min: 2 });
        }
        Ok(Self { ps, ns, thetas })
    }

    /// Concurrence surface over `(theta, p)` at one `N`.
    pub fn surface(n: usize, p_steps: usize, theta_steps: usize, p_max: f64) -> Result<Self> {
        Self::new(p_axis(p_steps, p_max)?, vec![n], theta_axis(theta_steps)?)
    }

    /// Curves over `p` for every `(N, theta)` combination.
    pub fn families(ns: Vec<usize>, thetas: Vec<f64>, p_steps: usize, p_max: f64) -> Result<Self> {
        Self::new(p_axis(p_steps, p_max)?, ns, thetas)
    }

    pub fn len(&self) -> usize {
        self.ps.len() * self.ns.len() * self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub theta: f64,
    pub n: usize,
    pub concurrence: f64,
    /// `None` for odd `N > 3`.
    pub n_tangle: Option<f64>,
}

pub fn evaluate_point(p: f64, theta: f64, n: usize) -> Result<SweepRow> {
    let spec = MecsSpec::from_overlap(p, theta, n)?;
    let n_tangle = if n.is_multiple_of(2) || n == 3 {
        Some(n_tangle_closed(&spec)?)
    } else {
        None
    };
    Ok(SweepRow {
        p,
        theta,
        n,
        concurrence: pair_concurrence_closed(&spec)?,
        n_tangle,
    })
}

/// Rows ordered `p` outer, `N` middle, `theta` inner.
pub fn evaluate(grid: &SweepGrid) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(grid.len());
    for &p in &grid.ps {
        for &n in &grid.ns {
            for &theta in &grid.thetas {
                rows.push(evaluate_point(p, theta, n)?);
            }
        }
    }
    Ok(rows)
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_float(r.p),
            fmt_float(r.theta),
            r.n,
            fmt_float(r.concurrence),
            r.n_tangle.map(fmt_float).unwrap_or_default()
        )?;
    }
    out.flush()
}

/// Parses output of [`write_csv`].
pub fn read_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(MecsError::Unsupported("missing sweep CSV header".into()));
    }
    let bad = |line: &str| MecsError::Unsupported(format!("malformed sweep row: {line}"));
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad(line));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line));
            Ok(SweepRow {
                p: num(f[0])?,
                theta: num(f[1])?,
                n: f[2].parse().map_err(|_| bad(line))?,
                concurrence: num(f[3])?,
                n_tangle: if f[4].is_empty() {
                    None
                } else {
                    Some(num(f[4])?)
                },
            })
        })
        .collect()
}
