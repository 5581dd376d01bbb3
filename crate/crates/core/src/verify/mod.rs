//! Exhaustive checks of the covering bounds, the partition-name comparison
//! and the rigidity overlap on small instances.
//!
//! Every report carries the data needed to replay it: the instance, the seed
//! and, for perturbed instances, the exact bit flips applied.

mod blocks;
mod partition;
mod rigidity;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use blocks::{
    block_grid, run_block_grid, verify_block_bound, verify_perturbed_bound, BlockGrid, BlockInstance, Perturbation,
    GRID_NODE_BUDGET,
};
pub use partition::{verify_partition_names, PartitionReport};
pub use rigidity::{verify_rigidity, RigidityReport};

/// Seed used when a caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x5eed_c0de;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// The certified lower bound on the cover size meets the bound.
    Holds,
    /// A cover smaller than the bound exists.
    Violated,
    /// The lower and upper estimates straddle the bound.
    Inconclusive,
    /// The bound asks for no balls at all.
    Vacuous,
    /// The bound's parameter hypothesis fails; nothing is claimed.
    Inapplicable,
    /// The instance does not satisfy the hypothesis being tested.
    HypothesisNotMet,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Vacuous => "vacuous",
            Verdict::Inapplicable => "inapplicable",
            Verdict::HypothesisNotMet => "hypothesis-not-met",
        }
    }

    /// True for every verdict except a violation or an undecided bracket.
    pub fn is_pass(self) -> bool {
        !matches!(self, Verdict::Violated | Verdict::Inconclusive)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Minimum cover size, either exact or bracketed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observed {
    Exact(usize),
    Bracket { lower: usize, upper: usize },
}

impl Observed {
    pub fn lower(self) -> usize {
        match self {
            Observed::Exact(s) => s,
            Observed::Bracket { lower, .. } => lower,
        }
    }

    pub fn upper(self) -> usize {
        match self {
            Observed::Exact(s) => s,
            Observed::Bracket { upper, .. } => upper,
        }
    }
}

impl fmt::Display for Observed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observed::Exact(s) => write!(f, "{s}"),
            Observed::Bracket { lower, upper } => write!(f, "{lower}..{upper}"),
        }
    }
}

/// Outcome of one covering-bound check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub instance: String,
    /// `None` when the bound is vacuous or inapplicable.
    pub bound_log2: Option<f64>,
    /// Smallest integer cover size allowed by the bound.
    pub required: usize,
    pub observed: Observed,
    /// How `observed` was obtained.
    pub method: String,
    pub verdict: Verdict,
    pub perturbation: Option<Perturbation>,
}

impl BoundReport {
    /// `log2(observed lower) - bound_log2`; `None` without a finite bound.
    pub fn margin(&self) -> Option<f64> {
        let b = self.bound_log2.filter(|b| b.is_finite())?;
        Some((self.observed.lower() as f64).log2() - b)
    }
}

pub const SUMMARY_HEADER: &str = "instance,bound_log2,observed_S,margin,verdict";

/// One CSV row per report, in the given order.
pub fn summary_csv(reports: &[BoundReport]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    let num = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "NA".into());
    for r in reports {
        out.push_str(&format!(
            "\"{}\",{},{},{},{}\n",
            r.instance,
            num(r.bound_log2),
            r.observed,
            num(r.margin()),
            r.verdict
        ));
    }
    out
}
