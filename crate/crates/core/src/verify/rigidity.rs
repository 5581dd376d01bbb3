use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Verdict;
use crate::error::{contract, Error, Result};
use crate::scalar::Weight;
use crate::tower::{lift_through_rigidity, LevelSet, Tower};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub r: usize,
    pub samples: usize,
    pub seed: u64,
    /// Smallest observed `mu(A ∩ T^{-h} A) / mu(A)` after the stage.
    #[serde(with = "crate::scalar::rational_text")]
    pub min_ratio: BigRational,
    pub violations: Vec<String>,
    pub verdict: Verdict,
}

/// Draws `samples` random level sets `A` of the pre-stage tower, applies
/// `stage_rigidity(r)` and checks `mu(T^h A ∩ A) >= (r-1)/r mu(A)` exactly,
/// where `h` is the pre-stage height.
pub fn verify_rigidity<W: Weight>(tower: &Tower<W>, r: usize, samples: usize, seed: u64) -> Result<RigidityReport> {
    contract!(samples >= 1, "need at least one sample");
    let h = tower.uniform_height("rigidity check")?;
    let mut after = tower.clone();
    after.stage_rigidity(r)?;
    let exact = |w: W| w.to_rational().ok_or_else(|| Error::Domain("non-finite measure".into()));
    let need = BigRational::new((r as i64 - 1).into(), (r as i64).into());
    let levels: Vec<(usize, usize)> = (0..tower.columns().len()).flat_map(|c| (0..h).map(move |l| (c, l))).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_ratio: Option<BigRational> = None;
    let mut violations = Vec::new();
    for i in 0..samples {
        let mut chosen: Vec<(usize, usize)> = levels.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        if chosen.is_empty() {
            chosen.push(levels[rng.gen_range(0..levels.len())]);
        }
        let a = LevelSet::from_entries(tower, chosen)?;
        let mu = exact(a.measure(tower))?;
        let (overlap, _) = after.measure_overlap(&lift_through_rigidity(&a, h, r), h)?;
        let ratio = exact(overlap)? / &mu;
        if ratio < need {
            violations.push(format!("sample {i}: ratio {ratio} below {need}"));
        }
        if min_ratio.as_ref().is_none_or(|m| ratio < *m) {
            min_ratio = Some(ratio);
        }
    }
    Ok(RigidityReport {
        r,
        samples,
        seed,
        min_ratio: min_ratio.unwrap_or_else(BigRational::zero),
        verdict: if violations.is_empty() { Verdict::Holds } else { Verdict::Violated },
        violations,
    })
}
