//! Parameters of the rigid weak-mixing family and the solver for `s_k`.

use num_rational::BigRational;
use serde::Serialize;

use crate::codewords::binary_entropy;
use crate::error::{contract, Error, Result};
use crate::scalar::Weight;
use crate::slowent::RateFamily;

/// Inputs: `epsilon` in (0, 1/100], `r_k >= 2` for `k = 0..=K`, `t_k` for
/// `k = 0..K`, and the search range for each `s_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyInputs {
    pub epsilon: BigRational,
    pub r: Vec<usize>,
    pub t: Vec<f64>,
    pub min_s: usize,
    pub s_cap: usize,
}

impl FamilyInputs {
    /// `r_k = r(k)` and `t_k = t(k)` for `k = 0..=stages`.
    pub fn from_fns(epsilon: BigRational, stages: usize, r: impl Fn(usize) -> usize, t: impl Fn(usize) -> f64) -> Self {
        FamilyInputs {
            epsilon,
            r: (0..=stages).map(&r).collect(),
            t: (0..=stages).map(&t).collect(),
            min_s: 1,
            s_cap: 60,
        }
    }
}

/// One row of the derived parameter table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyRow {
    pub k: usize,
    pub r_k: usize,
    pub t_k: f64,
    pub s_k: usize,
    /// `None` once the height overflows `u128`.
    pub h_k: Option<u128>,
    pub sigma_k: usize,
    pub alpha_k: f64,
    pub beta_k: f64,
    /// Whether `H(2 eps + 2^-sigma_k) < H(3 eps)`, the large-`k` condition.
    pub entropy_gap: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyTable {
    pub epsilon: f64,
    pub rows: Vec<FamilyRow>,
}

/// `2^sigma (1 - H(3 eps)) / (32 r_{k+1} r_k h_k)`.
pub fn family_alpha(sigma: usize, epsilon: f64, r_next: usize, r_k: usize, h_k: f64) -> Result<f64> {
    let gap = 1.0 - binary_entropy(3.0 * epsilon)?;
    Ok((sigma as f64).exp2() * gap / (32.0 * r_next as f64 * r_k as f64 * h_k))
}

/// `log2(beta^n) - log2(k a_n(t)) = n alpha - log2 k - log2 a_n(t)`.
fn margin(alpha: f64, k: usize, t: f64, n: f64, rate: &RateFamily) -> Result<f64> {
    if k == 0 {
        return Ok(f64::INFINITY);
    }
    let log2_rate = rate.log2_value(n as usize, t)?;
    Ok(n * alpha - (k as f64).log2() - log2_rate)
}

/// Larger `n` sampled when checking that an `s` keeps working past `2^s`.
const SAMPLE_OCTAVES: usize = 24;
const SAMPLES_PER_OCTAVE: usize = 8;

/// Minimal `s` in `[min_s, cap]` such that `beta^n > k a_n(t)` at
/// `n = 2^s` and at a geometric sample of larger `n`, in log space. For
/// `k = 0` the right side is zero and `min_s` is returned.
pub fn solve_sk(alpha: f64, k: usize, t: f64, rate: &RateFamily, min_s: usize, cap: usize) -> Result<usize> {
    contract!(alpha > 0.0, "alpha must be positive");
    if k == 0 {
        return Ok(min_s);
    }
    let cap = cap.min(62);
    'search: for s in min_s..=cap {
        let base = (s as f64).exp2();
        if margin(alpha, k, t, base, rate)? <= 0.0 {
            continue;
        }
        for i in 1..=SAMPLE_OCTAVES * SAMPLES_PER_OCTAVE {
            let n = (base * (i as f64 / SAMPLES_PER_OCTAVE as f64).exp2()).floor();
            if n >= 2f64.powi(62) {
                break;
            }
            if margin(alpha, k, t, n, rate)? <= 0.0 {
                continue 'search;
            }
        }
        return Ok(s);
    }
    Err(Error::ParameterSearch(format!(
        "no s <= {cap} gives n alpha > log2(k a_n(t)) for n >= 2^s (k={k}, t={t}, alpha={alpha:e})"
    )))
}

/// Builds the parameter table for stages `k = 0..stages`, choosing each
/// `s_k` with [`solve_sk`].
pub fn family_table(inputs: &FamilyInputs, rate: &RateFamily, stages: usize) -> Result<FamilyTable> {
    let eps = Weight::to_f64(&inputs.epsilon);
    contract!(eps > 0.0 && inputs.epsilon <= BigRational::from_ratio(1, 100), "epsilon must lie in (0, 1/100]");
    contract!(inputs.r.len() > stages, "need r_k for k = 0..={stages}");
    contract!(inputs.t.len() >= stages, "need t_k for k = 0..{stages}");
    contract!(inputs.r.iter().all(|&r| r >= 2), "every r_k must be at least 2");
    let h3 = binary_entropy(3.0 * eps)?;
    let mut rows = Vec::with_capacity(stages);
    let mut h: Option<u128> = Some(1);
    let mut sigma = 0usize;
    for k in 0..stages {
        let (r_k, r_next, t_k) = (inputs.r[k], inputs.r[k + 1], inputs.t[k]);
        let h_f = h.map_or(f64::INFINITY, |x| x as f64);
        let alpha = family_alpha(sigma, eps, r_next, r_k, h_f)?;
        let s = solve_sk(alpha, k, t_k, rate, inputs.min_s, inputs.s_cap)?;
        let gap_arg = 2.0 * eps + (-(sigma as f64)).exp2();
        let entropy_gap = gap_arg < 0.5 && binary_entropy(gap_arg)? < h3;
        rows.push(FamilyRow {
            k,
            r_k,
            t_k,
            s_k: s,
            h_k: h,
            sigma_k: sigma,
            alpha_k: alpha,
            beta_k: alpha.exp2(),
            entropy_gap,
        });
        h = if k == 0 { 1u128.checked_shl(s as u32).filter(|_| s < 128) } else { next_height(h, s, r_k) };
        sigma += s;
    }
    Ok(FamilyTable { epsilon: eps, rows })
}

/// `h_{k+1} = 2^s r (2 h + 1)`, `None` on overflow.
pub fn next_height(h: Option<u128>, s: usize, r: usize) -> Option<u128> {
    let base = h?.checked_mul(2)?.checked_add(1)?.checked_mul(r as u128)?;
    if s >= 128 || base.leading_zeros() < s as u32 {
        return None;
    }
    Some(base << s)
}
