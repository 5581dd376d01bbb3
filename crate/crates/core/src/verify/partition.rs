use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::Verdict;
use crate::error::{contract, Error, Result};
use crate::scalar::Weight;
use crate::tower::{LevelSet, Tower};

/// Comparison of `P`-names and `Q`-names read upward from column bases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    /// `D(P, Q) = sum_i mu(p_i symmetric-difference q_i)`.
    #[serde(with = "crate::scalar::rational_text")]
    pub distance: BigRational,
    #[serde(with = "crate::scalar::rational_text")]
    pub eta: BigRational,
    /// Base/length pairs whose local hypothesis held and were checked.
    pub checks: usize,
    /// Base/length pairs skipped because their local hypothesis failed.
    pub skipped: usize,
    pub failures: Vec<String>,
    pub verdict: Verdict,
}

/// Class index of every level, column by column.
fn labels<W: Weight>(tower: &Tower<W>, classes: &[LevelSet], what: &str) -> Result<Vec<Vec<usize>>> {
    let mut out: Vec<Vec<Option<usize>>> = tower.columns().iter().map(|c| vec![None; c.height()]).collect();
    for (i, set) in classes.iter().enumerate() {
        for (c, l) in set.iter() {
            let slot = out
                .get_mut(c)
                .and_then(|col| col.get_mut(l))
                .ok_or_else(|| Error::Contract(format!("{what} class {i} names level ({c}, {l}) outside the tower")))?;
            contract!(slot.is_none(), "{what} classes overlap at level ({c}, {l})");
            *slot = Some(i);
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(c, col)| {
            col.into_iter()
                .enumerate()
                .map(|(l, s)| s.ok_or_else(|| Error::Contract(format!("{what} does not cover level ({c}, {l})"))))
                .collect()
        })
        .collect()
}

/// Compares the names of two partitions of the tower's levels.
///
/// For every column base `b` and length `n`, and for the union of the bases
/// of all columns of height at least `n`, the stack `b, Tb, ..., T^{n-1}b` is
/// disjoint. Whenever the partitions differ on less than `eta^2` of that
/// stack, more than `1 - eta` of `b` must have `P`- and `Q`-names of length
/// `n` within normalized distance `eta`. If the global distance `D(P, Q)` is
/// not below `eta^2 mu(X)` the report says the hypothesis is not met.
pub fn verify_partition_names<W: Weight>(
    tower: &Tower<W>,
    p: &[LevelSet],
    q: &[LevelSet],
    eta: &BigRational,
) -> Result<PartitionReport> {
    contract!(p.len() == q.len(), "partitions have {} and {} classes", p.len(), q.len());
    contract!(*eta > BigRational::zero() && *eta < BigRational::one(), "eta must lie in (0, 1)");
    let lp = labels(tower, p, "P")?;
    let lq = labels(tower, q, "Q")?;
    let widths = tower
        .columns()
        .iter()
        .map(|c| c.width.to_rational().ok_or_else(|| Error::Domain("non-finite column width".into())))
        .collect::<Result<Vec<_>>>()?;
    let two = BigRational::from_integer(2.into());
    let eta_sq = eta * eta;
    let count = |n: usize| BigRational::from_integer(n.into());

    // mism[c][n] = number of mismatched levels among the bottom n of column c.
    let mism: Vec<Vec<usize>> = lp
        .iter()
        .zip(&lq)
        .map(|(a, b)| {
            let mut acc = vec![0];
            for (x, y) in a.iter().zip(b) {
                acc.push(acc.last().unwrap() + usize::from(x != y));
            }
            acc
        })
        .collect();

    let mut distance = BigRational::zero();
    let mut space = BigRational::zero();
    for (c, w) in widths.iter().enumerate() {
        distance += &two * w * count(*mism[c].last().unwrap());
        space += w * count(lp[c].len());
    }

    let mut report = PartitionReport {
        distance: distance.clone(),
        eta: eta.clone(),
        checks: 0,
        skipped: 0,
        failures: Vec::new(),
        verdict: Verdict::HypothesisNotMet,
    };
    if distance >= &eta_sq * &space {
        return Ok(report);
    }

    let close = |c: usize, n: usize| count(mism[c][n]) < eta * count(n);
    let max_h = lp.iter().map(Vec::len).max().unwrap_or(0);
    for n in 1..=max_h {
        let bases: Vec<usize> = (0..lp.len()).filter(|&c| lp[c].len() >= n).collect();
        let mut groups: Vec<(String, Vec<usize>)> = bases.iter().map(|&c| (format!("column {c}"), vec![c])).collect();
        if bases.len() > 1 {
            groups.push(("all bases".into(), bases));
        }
        for (label, cols) in groups {
            let base: BigRational = cols.iter().map(|&c| &widths[c]).sum();
            let local: BigRational = cols.iter().map(|&c| &two * &widths[c] * count(mism[c][n])).sum();
            if local >= &eta_sq * &base * count(n) {
                report.skipped += 1;
                continue;
            }
            report.checks += 1;
            let near: BigRational = cols.iter().filter(|&&c| close(c, n)).map(|&c| &widths[c]).sum();
            if near <= (BigRational::one() - eta) * &base {
                report.failures.push(format!("{label}, n = {n}: close mass {near} of base {base}"));
            }
        }
    }
    report.verdict = if report.failures.is_empty() { Verdict::Holds } else { Verdict::Violated };
    Ok(report)
}
