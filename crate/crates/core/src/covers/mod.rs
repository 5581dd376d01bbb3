//! Minimum number of open Hamming balls covering a given fraction of a
//! name distribution.
//!
//! Three solvers share one instance representation: [`greedy_cover`] and
//! [`exact_cover_restricted`] use the observed names as centers,
//! [`exact_cover_oracle`] tries every word of the right length. Neglected
//! mass is never covered.

mod curve;
mod search;

use std::collections::HashMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codewords::{ball_threshold, Codeword};
use crate::error::{contract, Error, Result};
use crate::names::WeightedNames;
use crate::scalar::Weight;
use search::{scale_to_integers, BitSet, Mass, Problem};

pub use curve::{covering_curve, CurveRow, NameMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverMethod {
    ExactRestricted,
    Greedy,
    OracleExhaustive,
}

impl CoverMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CoverMethod::ExactRestricted => "exact-restricted",
            CoverMethod::Greedy => "greedy",
            CoverMethod::OracleExhaustive => "oracle-exhaustive",
        }
    }
}

impl fmt::Display for CoverMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverResult<W> {
    pub centers: Vec<Codeword>,
    pub covered_mass: W,
    pub count: usize,
    pub method: CoverMethod,
    pub radius: BigRational,
    /// `1 - delta`, the mass the centers had to reach.
    pub target: W,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverOptions {
    /// Most distinct names the restricted exact search accepts.
    pub candidate_cap: usize,
    /// Most centers (`r^n`) the exhaustive oracle enumerates.
    pub oracle_cap: usize,
    /// Branch-and-bound nodes before giving up with a resource error.
    pub node_budget: u64,
}

impl Default for CoverOptions {
    fn default() -> Self {
        CoverOptions { candidate_cap: 4096, oracle_cap: 1 << 20, node_budget: 2_000_000 }
    }
}

/// Mass of the names strictly within `radius` of `center`.
pub fn ball_mass<W: Weight>(names: &WeightedNames<W>, center: &Codeword, radius: &BigRational) -> Result<W> {
    let Some(k) = ball_threshold(radius, center.len()) else {
        return Ok(W::zero());
    };
    let mut mass = W::zero();
    for (w, m) in names.entries() {
        if w.mismatches(center)? <= k {
            mass = mass + m.clone();
        }
    }
    Ok(mass)
}

/// Mass covered by the union of the balls around `centers`.
pub fn union_mass<W: Weight>(names: &WeightedNames<W>, centers: &[Codeword], radius: &BigRational) -> Result<W> {
    let n = names.word_len();
    let Some(k) = ball_threshold(radius, n) else {
        return Ok(W::zero());
    };
    let mut mass = W::zero();
    for (w, m) in names.entries() {
        for c in centers {
            if w.mismatches(c)? <= k {
                mass = mass + m.clone();
                break;
            }
        }
    }
    Ok(mass)
}

/// Exact masses, their total and the target `(1 - delta) * total`.
struct Prepared {
    masses: Vec<BigRational>,
    target: BigRational,
    threshold: Option<usize>,
}

fn prepare<W: Weight>(names: &WeightedNames<W>, eps: &BigRational, delta: &BigRational) -> Result<Prepared> {
    contract!(!delta.is_negative() && *delta < BigRational::one(), "delta must lie in [0, 1)");
    let exact = |w: &W| w.to_rational().ok_or_else(|| Error::Domain(format!("non-finite mass {w:?}")));
    let masses = names.entries().iter().map(|(_, m)| exact(m)).collect::<Result<Vec<_>>>()?;
    let neglected = exact(names.neglected())?;
    let total = masses.iter().fold(neglected.clone(), |a, m| a + m);
    if neglected > delta * &total {
        return Err(Error::Infeasible(format!(
            "neglected mass {} exceeds delta = {}",
            Weight::to_f64(&neglected),
            Weight::to_f64(delta)
        )));
    }
    let target = (BigRational::one() - delta) * total;
    Ok(Prepared { masses, target, threshold: ball_threshold(eps, names.word_len()) })
}

/// Runs greedy, then optionally the exact search, on integer-scaled masses
/// when they fit in `u128` and on rationals otherwise.
fn solve(prep: &Prepared, balls: &[BitSet], exact_budget: Option<u64>) -> Result<Vec<usize>> {
    fn run<M: Mass>(masses: &[M], target: M, balls: &[BitSet], budget: Option<u64>) -> Result<Vec<usize>> {
        let p = Problem { masses, balls, target };
        let greedy = p.greedy().ok_or_else(|| Error::Infeasible("no set of balls reaches the target mass".into()))?;
        match budget {
            Some(b) => p.exact(greedy, b),
            None => Ok(greedy),
        }
    }
    match scale_to_integers(&prep.masses) {
        Some((ints, den)) => {
            let t = (&prep.target * BigRational::from_integer(den)).ceil().to_integer();
            let t = t.to_u128().expect("target bounded by total");
            run(&ints, t, balls, exact_budget)
        }
        None => run(&prep.masses, prep.target.clone(), balls, exact_budget),
    }
}

fn observed_balls<W: Weight>(names: &WeightedNames<W>, threshold: Option<usize>) -> Vec<BitSet> {
    let entries = names.entries();
    entries
        .par_iter()
        .map(|(c, _)| {
            let mut b = BitSet::new(entries.len());
            if let Some(k) = threshold {
                for (j, (w, _)) in entries.iter().enumerate() {
                    if c.mismatches_unchecked(w) <= k {
                        b.insert(j);
                    }
                }
            }
            b
        })
        .collect()
}

fn finish<W: Weight>(
    names: &WeightedNames<W>,
    centers: Vec<Codeword>,
    eps: &BigRational,
    delta: &BigRational,
    method: CoverMethod,
) -> Result<CoverResult<W>> {
    let covered_mass = union_mass(names, &centers, eps)?;
    let total = names.total();
    let target = total.clone() - W::from_rational(delta) * total;
    Ok(CoverResult { count: centers.len(), centers, covered_mass, method, radius: eps.clone(), target })
}

/// Greedy cover with observed names as centers; ties go to the
/// lexicographically smallest name.
pub fn greedy_cover<W: Weight>(
    names: &WeightedNames<W>,
    eps: &BigRational,
    delta: &BigRational,
) -> Result<CoverResult<W>> {
    let prep = prepare(names, eps, delta)?;
    let balls = observed_balls(names, prep.threshold);
    let chosen = solve(&prep, &balls, None)?;
    let centers = chosen.into_iter().map(|i| names.entries()[i].0.clone()).collect();
    finish(names, centers, eps, delta, CoverMethod::Greedy)
}

/// Minimum number of balls centered at observed names, by branch and bound
/// seeded with the greedy cover. Centers are returned sorted.
pub fn exact_cover_restricted<W: Weight>(
    names: &WeightedNames<W>,
    eps: &BigRational,
    delta: &BigRational,
    opts: &CoverOptions,
) -> Result<CoverResult<W>> {
    if names.len() > opts.candidate_cap {
        return Err(Error::Resource(format!(
            "{} distinct names exceed the exact-search cap {}; use the greedy cover",
            names.len(),
            opts.candidate_cap
        )));
    }
    let prep = prepare(names, eps, delta)?;
    let balls = observed_balls(names, prep.threshold);
    let (balls, reps) = dedupe(balls, (0..names.len()).collect());
    let chosen = solve(&prep, &balls, Some(opts.node_budget))?;
    let mut centers: Vec<Codeword> = chosen.into_iter().map(|i| names.entries()[reps[i]].0.clone()).collect();
    centers.sort();
    finish(names, centers, eps, delta, CoverMethod::ExactRestricted)
}

/// Keeps the first of each group of identical balls and drops balls that
/// are strict subsets of another ball.
fn dedupe(balls: Vec<BitSet>, reps: Vec<usize>) -> (Vec<BitSet>, Vec<usize>) {
    let mut seen: HashMap<BitSet, usize> = HashMap::new();
    let mut uniq: Vec<(BitSet, usize)> = Vec::new();
    for (b, r) in balls.into_iter().zip(reps) {
        if b.0.iter().all(|&w| w == 0) {
            continue;
        }
        if !seen.contains_key(&b) {
            seen.insert(b.clone(), uniq.len());
            uniq.push((b, r));
        }
    }
    if uniq.len() <= 8192 {
        let keep: Vec<bool> = uniq
            .par_iter()
            .enumerate()
            .map(|(i, (b, _))| !uniq.iter().enumerate().any(|(j, (o, _))| i != j && b.is_subset(o)))
            .collect();
        uniq = uniq.into_iter().zip(keep).filter(|(_, k)| *k).map(|(u, _)| u).collect();
    }
    uniq.into_iter().unzip()
}

/// All words of length `n` over `r` symbols in lexicographic order, as rank -> symbols.
fn unrank(mut rank: usize, n: usize, r: usize, out: &mut [u8]) {
    for slot in out[..n].iter_mut().rev() {
        *slot = (rank % r) as u8;
        rank /= r;
    }
}

/// True minimum over arbitrary centers: every word of length `n` is tried.
/// Meant as a test oracle for small `r^n`.
pub fn exact_cover_oracle<W: Weight>(
    names: &WeightedNames<W>,
    eps: &BigRational,
    delta: &BigRational,
    opts: &CoverOptions,
) -> Result<CoverResult<W>> {
    let n = names.word_len();
    let r = names.alphabet().max(2);
    let space = (r as u128)
        .checked_pow(n as u32)
        .filter(|&s| s <= opts.oracle_cap as u128)
        .ok_or_else(|| Error::Resource(format!("{r}^{n} centers exceed the oracle cap {}", opts.oracle_cap)))?
        as usize;
    let prep = prepare(names, eps, delta)?;
    let entries = names.entries();
    let balls: Vec<BitSet> = match prep.threshold {
        None => Vec::new(),
        Some(k) if r == 2 && n <= 32 => {
            let pack = |w: &Codeword| (0..n).fold(0u32, |acc, i| (acc << 1) | w.symbol(i) as u32);
            let packed: Vec<u32> = entries.iter().map(|(w, _)| pack(w)).collect();
            (0..space)
                .into_par_iter()
                .map(|c| {
                    let mut b = BitSet::new(entries.len());
                    for (j, &e) in packed.iter().enumerate() {
                        if ((c as u32) ^ e).count_ones() as usize <= k {
                            b.insert(j);
                        }
                    }
                    b
                })
                .collect()
        }
        Some(k) => {
            let syms: Vec<Vec<u8>> = entries.iter().map(|(w, _)| w.symbols()).collect();
            (0..space)
                .into_par_iter()
                .map_init(
                    || vec![0u8; n],
                    |buf, c| {
                        unrank(c, n, r, buf);
                        let mut b = BitSet::new(entries.len());
                        for (j, e) in syms.iter().enumerate() {
                            if e.iter().zip(buf.iter()).filter(|(a, b)| a != b).count() <= k {
                                b.insert(j);
                            }
                        }
                        b
                    },
                )
                .collect()
        }
    };
    let (balls, reps) = dedupe(balls, (0..space).collect());
    let chosen = solve(&prep, &balls, Some(opts.node_budget))?;
    let mut buf = vec![0u8; n];
    let mut centers: Vec<Codeword> = chosen
        .into_iter()
        .map(|i| {
            unrank(reps[i], n, r, &mut buf);
            Codeword::from_symbols_unchecked(&buf, names.alphabet())
        })
        .collect();
    centers.sort();
    finish(names, centers, eps, delta, CoverMethod::OracleExhaustive)
}

/// Lower bound on any cover: the target mass divided by an upper bound on
/// the mass of a single ball, rounded up.
pub fn volume_lower_bound(target: &BigRational, max_ball: &BigRational) -> Option<usize> {
    if !max_ball.is_positive() {
        return None;
    }
    if target.is_zero() {
        return Some(0);
    }
    (target / max_ball).ceil().to_integer().to_usize()
}
