use serde::Serialize;

use super::rate::Sequence;
use super::report::{CurveReport, ReportRow};
use crate::covers::NameMode;
use crate::error::{contract, Result};
use crate::names::WeightedNames;
use crate::scalar::Weight;
use crate::tower::Tower;

/// Neglected mass above this fraction is logged when computing entropy.
const NEGLECTED_WARNING: f64 = 0.01;

/// Defined masses renormalized to sum to one.
fn normalized<W: Weight>(names: &WeightedNames<W>) -> Result<Vec<f64>> {
    contract!(!names.is_empty(), "entropy of an empty name distribution");
    let neglected = names.neglected().to_f64();
    if neglected > NEGLECTED_WARNING {
        log::warn!("entropy excludes neglected mass {neglected:.4}");
    }
    let masses: Vec<f64> = names.entries().iter().map(|(_, m)| m.to_f64()).collect();
    let total: f64 = masses.iter().sum();
    Ok(masses.into_iter().map(|m| m / total).collect())
}

fn shannon(ps: &[f64]) -> f64 {
    ps.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum::<f64>().max(0.0)
}

/// Shannon entropy in bits of the defined names, renormalized.
pub fn blume_entropy<W: Weight>(names: &WeightedNames<W>) -> Result<f64> {
    Ok(shannon(&normalized(names)?))
}

/// Rows `(n, H(P_n), H(P_n) / a_n)` with `t = 1` and `log2_rate = log2 a_n`.
pub fn blume_curve<W: Weight>(points: &[(usize, &Tower<W>)], a: &Sequence, mode: NameMode) -> Result<CurveReport> {
    let mut rows = Vec::with_capacity(points.len());
    for &(n, tower) in points {
        let names = match mode {
            NameMode::Truncated => tower.name_distribution(n)?,
            NameMode::Cyclic => tower.cyclic_name_distribution(n)?,
        };
        let h = blume_entropy(&names)?;
        rows.push(ReportRow::new(n, 1.0, h, a.value(n)?.log2()));
    }
    Ok(CurveReport::from_rows(rows))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs` for `lhs <= rhs` checks.
    pub slack: f64,
    pub holds: bool,
}

impl InequalityCheck {
    fn le(name: &'static str, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        InequalityCheck { name, lhs, rhs, slack, holds: slack >= -1e-9 * rhs.abs().max(1.0) }
    }
}

/// Split of the `n`-names at mass `2^(-t a_n)` and the entropy inequalities
/// built on it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassSplitReport {
    pub t_a: f64,
    pub entropy: f64,
    /// Total mass of names lighter than `2^(-t a_n)`.
    pub light_mass: f64,
    /// Number of names of mass at least `2^(-t a_n)`.
    pub heavy_count: usize,
    /// Names heavier than `1/e`, where `-p log p` decreases and the
    /// per-name lower bound for heavy names can fail.
    pub atoms_above_inv_e: usize,
    /// `H >= t a mu(light) + |heavy| t a 2^(-t a)`, `mu(light) <= H/(t a)`,
    /// `|heavy| 2^(-t a) <= H/(t a)`.
    pub checks: Vec<InequalityCheck>,
}

/// Evaluates the mass split at `t * a_n` for a name distribution
/// (renormalized over defined names).
pub fn mass_split_check<W: Weight>(names: &WeightedNames<W>, a_n: f64, t: f64) -> Result<MassSplitReport> {
    contract!(a_n > 0.0 && t > 0.0, "need a_n > 0 and t > 0");
    let ps = normalized(names)?;
    let ta = t * a_n;
    let cut = (-ta).exp2();
    let entropy = shannon(&ps);
    let light_mass: f64 = ps.iter().filter(|&&p| p < cut).sum::<f64>() + 0.0;
    let heavy_count = ps.iter().filter(|&&p| p >= cut).count();
    let atoms_above_inv_e = ps.iter().filter(|&&p| p > (-1f64).exp()).count();
    let lower = ta * light_mass + heavy_count as f64 * ta * cut;
    let checks = vec![
        InequalityCheck::le("entropy lower bound", lower, entropy),
        InequalityCheck::le("light mass bound", light_mass, entropy / ta),
        InequalityCheck::le("heavy count bound", heavy_count as f64 * cut, entropy / ta),
    ];
    Ok(MassSplitReport { t_a: ta, entropy, light_mass, heavy_count, atoms_above_inv_e, checks })
}
