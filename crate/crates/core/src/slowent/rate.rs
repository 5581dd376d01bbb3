use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

/// A positive sequence `a_n`, evaluated in floating point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sequence {
    /// `n^p`
    Power { p: f64 },
    /// `log2(n + 1)`
    Log2,
    /// Explicit values for `n = 1, 2, ...`.
    Table { values: Vec<f64> },
}

impl Sequence {
    pub fn sqrt() -> Self {
        Sequence::Power { p: 0.5 }
    }

    pub fn linear() -> Self {
        Sequence::Power { p: 1.0 }
    }

    pub fn value(&self, n: usize) -> Result<f64> {
        contract!(n >= 1, "sequences are indexed from n = 1");
        Ok(match self {
            Sequence::Power { p } => (n as f64).powf(*p),
            Sequence::Log2 => ((n + 1) as f64).log2(),
            Sequence::Table { values } => {
                *values.get(n - 1).ok_or_else(|| Error::Domain(format!("table has no entry for n = {n}")))?
            }
        })
    }
}

/// One tabulated rate value `a_n(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    pub t: f64,
    pub value: f64,
}

/// A family of rates `a_n(t)`, nondecreasing in `t` and unbounded in `n` for
/// `t > 0`. Values are handled as `log2 a_n(t)` so exponential families
/// never overflow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateFamily {
    /// `n^t`
    Polynomial,
    /// `2^(t a_n)` for a base sequence `a_n`.
    ExpOfSublinear { base: Sequence },
    /// Explicit `(n, t)` grid; evaluation off the grid is a domain error.
    Tabulated { points: Vec<RatePoint> },
}

impl RateFamily {
    pub fn log2_value(&self, n: usize, t: f64) -> Result<f64> {
        contract!(n >= 1, "rates are indexed from n = 1");
        match self {
            RateFamily::Polynomial => Ok(t * (n as f64).log2()),
            RateFamily::ExpOfSublinear { base } => Ok(t * base.value(n)?),
            RateFamily::Tabulated { points } => {
                let p = points
                    .iter()
                    .find(|p| p.n == n && p.t == t)
                    .ok_or_else(|| Error::Domain(format!("no tabulated rate at n = {n}, t = {t}")))?;
                contract!(p.value > 0.0, "tabulated rate must be positive");
                Ok(p.value.log2())
            }
        }
    }

    /// Pairs `(n, s, t)` with `s < t` where `a_n(s) > a_n(t)`.
    pub fn monotonicity_violations(&self, ns: &[usize], ts: &[f64]) -> Result<Vec<(usize, f64, f64)>> {
        let mut bad = Vec::new();
        for &n in ns {
            for &s in ts {
                for &t in ts {
                    if s < t && self.log2_value(n, s)? > self.log2_value(n, t)? + 1e-12 {
                        bad.push((n, s, t));
                    }
                }
            }
        }
        Ok(bad)
    }
}

/// Outcome of a numeric limit probe over `n = 1..=N`. A probe is evidence on
/// a finite range only.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Probe {
    pub label: String,
    /// `log2` of the probed ratio at `n = 1..=N`.
    pub log2_ratios: Vec<f64>,
    pub passed: bool,
    pub detail: String,
}

/// Nonincreasing over the final half of the range and strictly lower at the end than at the midpoint.
fn eventually_decreasing(xs: &[f64]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mid = xs.len() / 2;
    let tail = &xs[mid..];
    tail.windows(2).all(|w| w[1] <= w[0] + 1e-12) && xs[xs.len() - 1] < xs[mid] - 1e-12
}

/// Probes `a_n(t) / beta^n -> 0` on `n = 1..=N`.
pub fn subexponential_probe(rate: &RateFamily, beta: f64, t: f64, big_n: usize) -> Result<Probe> {
    contract!(beta > 1.0, "beta must exceed 1");
    contract!(big_n >= 2, "probe range needs N >= 2");
    let lb = beta.log2();
    let log2_ratios = (1..=big_n).map(|n| Ok(rate.log2_value(n, t)? - n as f64 * lb)).collect::<Result<Vec<_>>>()?;
    let passed = eventually_decreasing(&log2_ratios);
    let detail = format!(
        "log2 ratio {:.4} at n={} vs {:.4} at n={}",
        log2_ratios[big_n - 1],
        big_n,
        log2_ratios[big_n / 2],
        big_n / 2 + 1
    );
    Ok(Probe { label: format!("a_n(t)/beta^n, beta={beta}, t={t} (numeric probe)"), log2_ratios, passed, detail })
}

/// Probes `a_n / n -> 0` together with `a_n -> infinity` on `n = 1..=N`.
pub fn sublinear_probe(seq: &Sequence, big_n: usize) -> Result<Probe> {
    contract!(big_n >= 2, "probe range needs N >= 2");
    let values = (1..=big_n).map(|n| seq.value(n)).collect::<Result<Vec<_>>>()?;
    contract!(values.iter().all(|&v| v > 0.0), "sequence must be positive");
    let log2_ratios: Vec<f64> = values.iter().enumerate().map(|(i, v)| v.log2() - ((i + 1) as f64).log2()).collect();
    let mid = big_n / 2;
    let growing = values[mid..].windows(2).all(|w| w[1] >= w[0]) && values[big_n - 1] > values[mid];
    let shrinking = eventually_decreasing(&log2_ratios);
    let detail = format!("a_n/n decreasing: {shrinking}; a_n increasing: {growing}");
    Ok(Probe { label: "a_n/n and a_n (numeric probe)".into(), log2_ratios, passed: growing && shrinking, detail })
}
