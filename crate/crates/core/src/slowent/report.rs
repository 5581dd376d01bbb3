use std::fmt;

use serde::{Deserialize, Serialize};

use super::rate::RateFamily;
use crate::covers::CurveRow as CoverRow;
use crate::error::Result;

/// Direction of `value / rate` over the largest computed `n`. This is an
/// empirical trend on a finite range, not a limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Rising,
    Flat,
    Falling,
}

impl Trend {
    pub fn as_str(self) -> &'static str {
        match self {
            Trend::Rising => "rising",
            Trend::Flat => "flat",
            Trend::Falling => "falling",
        }
    }
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Slopes within this band around zero count as flat.
pub const TREND_DEAD_BAND: f64 = 0.01;

/// Least-squares slope of `log2(ratio)` against `log2(n)` over the upper
/// half of the points (by `n`). Points with a zero ratio are skipped;
/// fewer than two usable points give `Flat`.
pub fn classify_trend(points: &[(usize, f64)]) -> Trend {
    let mut pts: Vec<(usize, f64)> = points.to_vec();
    pts.sort_by_key(|p| p.0);
    let upper = &pts[pts.len() / 2..];
    let xy: Vec<(f64, f64)> =
        upper.iter().filter(|p| p.1 > 0.0 && p.1.is_finite()).map(|&(n, r)| ((n as f64).log2(), r.log2())).collect();
    if xy.len() < 2 {
        return Trend::Flat;
    }
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Trend::Flat;
    }
    let slope = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    if slope > TREND_DEAD_BAND {
        Trend::Rising
    } else if slope < -TREND_DEAD_BAND {
        Trend::Falling
    } else {
        Trend::Flat
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub n: usize,
    pub t: f64,
    /// Covering number or entropy.
    pub value: f64,
    pub log2_rate: f64,
    /// `value / 2^log2_rate`.
    pub ratio: f64,
}

impl ReportRow {
    pub fn new(n: usize, t: f64, value: f64, log2_rate: f64) -> Self {
        ReportRow { n, t, value, log2_rate, ratio: ratio(value, log2_rate) }
    }

    /// `2^log2_rate`, infinite past the `f64` range.
    pub fn rate(&self) -> f64 {
        self.log2_rate.exp2()
    }
}

fn ratio(value: f64, log2_rate: f64) -> f64 {
    if value == 0.0 {
        0.0
    } else {
        (value.log2() - log2_rate).exp2()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveReport {
    pub rows: Vec<ReportRow>,
    /// One trend per distinct `t`, in first-appearance order.
    pub trends: Vec<(f64, Trend)>,
}

impl CurveReport {
    pub fn from_rows(rows: Vec<ReportRow>) -> Self {
        let mut ts: Vec<f64> = Vec::new();
        for r in &rows {
            if !ts.contains(&r.t) {
                ts.push(r.t);
            }
        }
        let trends = ts
            .into_iter()
            .map(|t| {
                let pts: Vec<(usize, f64)> = rows.iter().filter(|r| r.t == t).map(|r| (r.n, r.ratio)).collect();
                (t, classify_trend(&pts))
            })
            .collect();
        CurveReport { rows, trends }
    }

    pub fn trend(&self, t: f64) -> Option<Trend> {
        self.trends.iter().find(|p| p.0 == t).map(|p| p.1)
    }
}

/// Covering numbers divided by `a_n(t)` for every `t` in `t_grid`. Flagged
/// cover rows (no count) are skipped.
pub fn slow_entropy_curves(cover: &[CoverRow], rate: &RateFamily, t_grid: &[f64]) -> Result<CurveReport> {
    let mut rows = Vec::new();
    for &t in t_grid {
        for c in cover {
            if let Some(s) = c.count {
                rows.push(ReportRow::new(c.n, t, s as f64, rate.log2_value(c.n, t)?));
            }
        }
    }
    Ok(CurveReport::from_rows(rows))
}
