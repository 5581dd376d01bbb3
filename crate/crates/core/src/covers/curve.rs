use std::time::Instant;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{exact_cover_restricted, greedy_cover, CoverMethod, CoverOptions};
use crate::error::{Error, Result};
use crate::scalar::Weight;
use crate::tower::Tower;

/// Which names a stage contributes: windows inside columns only, or the
/// periodic completion in which every point has a name.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NameMode {
    #[default]
    Truncated,
    Cyclic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveRow {
    pub n: usize,
    pub epsilon: BigRational,
    pub delta: BigRational,
    /// `None` when the row is flagged.
    pub count: Option<usize>,
    pub method: Option<CoverMethod>,
    pub neglected: f64,
    /// Why no count was reported, empty otherwise.
    pub flag: String,
    pub runtime_ms: u128,
}

/// Covering numbers of each `(n, stage)` pair. The restricted exact search
/// is used when it fits its caps, greedy otherwise. Rows whose neglected
/// mass exceeds `delta / 2` are flagged rather than computed.
pub fn covering_curve<W: Weight>(
    points: &[(usize, &Tower<W>)],
    eps: &BigRational,
    delta: &BigRational,
    mode: NameMode,
    opts: &CoverOptions,
) -> Result<Vec<CurveRow>> {
    let half_delta = delta / BigRational::from_count(2);
    let mut rows = Vec::with_capacity(points.len());
    for &(n, tower) in points {
        let start = Instant::now();
        let names = match mode {
            NameMode::Truncated => tower.name_distribution(n)?,
            NameMode::Cyclic => tower.cyclic_name_distribution(n)?,
        };
        let neglected =
            names.neglected().to_rational().unwrap_or_else(|| half_delta.clone() + BigRational::from_count(1));
        let mut row = CurveRow {
            n,
            epsilon: eps.clone(),
            delta: delta.clone(),
            count: None,
            method: None,
            neglected: Weight::to_f64(&neglected),
            flag: String::new(),
            runtime_ms: 0,
        };
        if neglected > half_delta {
            row.flag = "neglected mass exceeds delta/2".into();
        } else {
            let res = match exact_cover_restricted(&names, eps, delta, opts) {
                Err(Error::Resource(msg)) => {
                    log::info!("n={n}: {msg}; falling back to greedy");
                    greedy_cover(&names, eps, delta)?
                }
                other => other?,
            };
            row.count = Some(res.count);
            row.method = Some(res.method);
        }
        row.runtime_ms = start.elapsed().as_millis();
        rows.push(row);
    }
    Ok(rows)
}
