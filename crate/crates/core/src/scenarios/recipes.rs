//! Schedules for the constructions: block repetition, two-word independent
//! stacking, the rigid weak-mixing family and the two-family swap.

use num_rational::BigRational;

use super::family::{family_table, FamilyInputs, FamilyTable};
use super::schedule::{InitialTower, StageDescriptor as S, StageSchedule};
use crate::error::{contract, Error, Result};
use crate::scalar::Weight;
use crate::slowent::RateFamily;
use crate::tower::{FAMILY_LEFT, FAMILY_RIGHT};

pub const REPEATED_BLOCK: &str = "repeated-block";
pub const TWO_WORD_ICS: &str = "two-word-ics";
pub const RIGID_FAMILY: &str = "rigid-family";
pub const SWAP_FAMILIES: &str = "swap-families";

/// One column carrying `word` (height `h`) cut into `k1 k2` pieces and
/// stacked. Names of length `n = k1 h` read off the result take at most `h`
/// distinct values, the count recorded as the claimed bound.
pub fn repeated_block(word: &str, k1: usize, k2: usize) -> Result<StageSchedule> {
    contract!(k1 >= 1 && k2 >= 1, "k1 and k2 must be positive");
    let h = word.chars().count();
    contract!(h >= 1, "empty word");
    let mut sched = StageSchedule::new(
        REPEATED_BLOCK,
        InitialTower::SingleColumn { word: word.to_string() },
        vec![S::CutStack { k: k1 * k2 }],
    );
    sched.note("h", h);
    sched.note("k1", k1);
    sched.note("k2", k2);
    sched.note("n", k1 * h);
    sched.note("claim", format!("S <= {h}"));
    sched.note("final_height", k1 * k2 * h);
    Ok(sched)
}

/// Extra repetition factor (a power of two) that brings the top `n - 1`
/// levels of a repeated-block tower under `max_neglected` of its measure.
/// Further cut-and-stack stages leave the set of `n`-names unchanged.
pub fn continuation_factor(height: usize, n: usize, max_neglected: &BigRational) -> usize {
    let mut c = 1usize;
    while BigRational::from_ratio((n - 1) as u64, (height * c) as u64) > *max_neglected {
        c *= 2;
    }
    c
}

/// Appends a `cut_stack(c)` continuation to a repeated-block schedule when `c > 1`.
pub fn with_continuation(mut sched: StageSchedule, c: usize) -> StageSchedule {
    if c > 1 {
        sched.stages.push(S::CutStack { k: c });
        sched.note("continuation", c);
    }
    sched
}

/// Design of a two-word independent-stacking run.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoWordDesign {
    /// `log2 beta = 1 / (8 k (h + 1))`.
    pub log2_beta: f64,
    pub r: usize,
    /// `n = 2^r k (h + 1)`.
    pub n: usize,
    /// `log2 beta^n` and `log2(2 a_n(t))`.
    pub lhs_log2: f64,
    pub rhs_log2: f64,
    pub s: usize,
    pub eta: f64,
}

/// Smallest `r <= r_cap` with `beta^n > 2 a_n(t)` at `n = 2^r k (h+1)`.
pub fn design_two_word(h: usize, k: usize, rate: &RateFamily, t: f64, eta: f64, r_cap: usize) -> Result<TwoWordDesign> {
    contract!(k >= 4 && k % 2 == 0, "k must be even and at least 4");
    contract!(h >= 1, "h must be positive");
    contract!(eta > 0.0 && eta < 1.0, "eta must lie in (0, 1)");
    let block = k * (h + 1);
    let log2_beta = 1.0 / (8.0 * block as f64);
    for r in 0..=r_cap.min(40) {
        let n = block << r;
        let lhs = n as f64 * log2_beta;
        let rhs = 1.0 + rate.log2_value(n, t)?;
        if lhs > rhs {
            // 2^(r-s) < eta^2
            let need = r as f64 - 2.0 * eta.log2();
            let s = (need.floor() as usize + 1).max(r + 1);
            return Ok(TwoWordDesign { log2_beta, r, n, lhs_log2: lhs, rhs_log2: rhs, s, eta });
        }
    }
    Err(Error::ParameterSearch(format!("no r <= {r_cap} gives beta^n > 2 a_n(t) for h={h}, k={k}, t={t}")))
}

/// Two-word stage on a single column followed by `s` rounds of independent
/// cutting and stacking, with `r` and `s` chosen by [`design_two_word`].
/// Fails when the required `s` exceeds `s_cap`.
pub fn two_word_ics(
    word: &str,
    k: usize,
    rate: &RateFamily,
    t: f64,
    eta: f64,
    s_cap: usize,
) -> Result<(StageSchedule, TwoWordDesign)> {
    let h = word.chars().count();
    let d = design_two_word(h, k, rate, t, eta, 40)?;
    if d.s > s_cap {
        return Err(Error::ParameterSearch(format!(
            "h={h}, k={k}, t={t}: beta^n > 2 a_n(t) first holds at r={} (n={}, log2 beta^n={:.3} > {:.3}), \
             which needs s >= {} > cap {s_cap} rounds (2^(2^{}) columns)",
            d.r, d.n, d.lhs_log2, d.rhs_log2, d.s, d.s
        )));
    }
    let mut sched = StageSchedule::new(
        TWO_WORD_ICS,
        InitialTower::SingleColumn { word: word.to_string() },
        vec![S::TwoWord { k }, S::Ics { s: d.s, merge: false }],
    );
    sched.note("log2_beta", d.log2_beta);
    sched.note("r", d.r);
    sched.note("n", d.n);
    sched.note("s", d.s);
    sched.note("eta", d.eta);
    Ok((sched, d))
}

/// The rigid weak-mixing family: from two intervals, `ics(s_0)`, then for
/// each later stage `weak_mixing`, `rigidity(r_k)`, `ics(s_k)`.
pub fn rigid_family_schedule(s: &[usize], r: &[usize]) -> Result<StageSchedule> {
    contract!(!s.is_empty(), "need at least s_0");
    contract!(r.len() >= s.len(), "need r_k for every block");
    let mut stages = vec![S::Ics { s: s[0], merge: false }];
    for k in 1..s.len() {
        stages.push(S::WeakMixing);
        stages.push(S::Rigidity { r: r[k] });
        stages.push(S::Ics { s: s[k], merge: false });
    }
    let mut sched = StageSchedule::new(RIGID_FAMILY, InitialTower::TwoIntervals, stages);
    sched.note("s", format!("{s:?}"));
    sched.note("r", format!("{:?}", &r[..s.len()]));
    Ok(sched)
}

/// Parameter table for `stages` blocks plus the matching schedule.
pub fn rigid_family(inputs: &FamilyInputs, rate: &RateFamily, stages: usize) -> Result<(StageSchedule, FamilyTable)> {
    let table = family_table(inputs, rate, stages)?;
    let s: Vec<usize> = table.rows.iter().map(|row| row.s_k).collect();
    let mut sched = rigid_family_schedule(&s, &inputs.r)?;
    sched.note("epsilon", inputs.epsilon.to_text());
    Ok((sched, table))
}

/// From two intervals, stage `n = 1..=N`: swap(n); on the right family the
/// two-word stage with `k_n`, `s_n` rounds of independent stacking, and a
/// final stack; on the left family `cut_stack(k_n)`, `k_n` spacers and
/// `2^{s_n} + s_n` halvings so both families reach
/// `2^{2^{s_n}} 2^{s_n} k_n (h_n + 1)`.
pub fn swap_families(k: &[usize], s: &[usize]) -> Result<StageSchedule> {
    contract!(k.len() == s.len() && !k.is_empty(), "k_n and s_n must have the same positive length");
    contract!(k.iter().all(|&x| x >= 1), "k_n must be positive");
    let mut stages = Vec::new();
    for (i, (&kn, &sn)) in k.iter().zip(s).enumerate() {
        contract!(sn < 6, "s_n = {sn} would need 2^(2^{sn}) columns per word");
        stages.push(S::Swap { n: i + 1 });
        stages.push(S::FamilyIndependent { family: FAMILY_RIGHT, k: kn, s: sn });
        stages.push(S::FamilyHalving { family: FAMILY_LEFT, k: kn, doublings: (1 << sn) + sn });
    }
    let mut sched = StageSchedule::new(SWAP_FAMILIES, InitialTower::TwoIntervals, stages);
    sched.note("k", format!("{k:?}"));
    sched.note("s", format!("{s:?}"));
    Ok(sched)
}
