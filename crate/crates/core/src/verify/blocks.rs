use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BoundReport, Observed, Verdict};
use crate::codewords::{ball_threshold, block_cover_bound_log2, perturbed_cover_bound_log2, BoundParams, Codeword};
use crate::covers::{exact_cover_oracle, exact_cover_restricted, greedy_cover, volume_lower_bound, CoverOptions};
use crate::error::{contract, Error, Result};
use crate::names::WeightedNames;
use crate::scalar::Weight;

/// Longest generator word and most blocks the exhaustive checks accept.
pub const MAX_WORD_LEN: usize = 4;
pub const MAX_BLOCKS: usize = 8;

/// Branch-and-bound budget suited to grid runs: an instance whose exact
/// search runs out falls back to a bracket, which the bound rarely needs
/// to be tight.
pub const GRID_NODE_BUDGET: u64 = 100_000;

/// Regenerations allowed when a random perturbation misses its hypothesis.
const PERTURBATION_ATTEMPTS: u32 = 8;

/// Slack when rounding `2^bound` up to an integer cover size.
const REQUIRED_SLACK: f64 = 1e-9;

/// Two binary generator words, the block count and the cover parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockInstance {
    pub w1: Codeword,
    pub w2: Codeword,
    pub m: usize,
    pub epsilon: BigRational,
    pub theta: BigRational,
    pub eta: BigRational,
}

impl BlockInstance {
    pub fn new(w1: Codeword, w2: Codeword, m: usize, epsilon: BigRational, theta: BigRational) -> Result<Self> {
        contract!(w1.alphabet() == 2 && w2.alphabet() == 2, "generator words must be binary");
        contract!(w1.len() == w2.len(), "generator words differ in length");
        contract!(w1 != w2, "generator words must differ");
        contract!(m >= 1, "m must be positive");
        contract!(!epsilon.is_negative(), "epsilon must be nonnegative");
        contract!(!theta.is_negative() && theta <= BigRational::one(), "theta must lie in [0, 1]");
        if w1.len() > MAX_WORD_LEN || m > MAX_BLOCKS {
            return Err(Error::Resource(format!(
                "word length {} with m = {m} is too large to enumerate; reduce to length <= {MAX_WORD_LEN} and m <= {MAX_BLOCKS}",
                w1.len()
            )));
        }
        Ok(BlockInstance { w1, w2, m, epsilon, theta, eta: BigRational::zero() })
    }

    pub fn with_eta(mut self, eta: BigRational) -> Result<Self> {
        contract!(!eta.is_negative() && eta < BigRational::one(), "eta must lie in [0, 1)");
        self.eta = eta;
        Ok(self)
    }

    pub fn word_len(&self) -> usize {
        self.w1.len()
    }

    /// Length of a concatenation, `m * l`.
    pub fn name_len(&self) -> usize {
        self.m * self.word_len()
    }

    pub fn mismatches(&self) -> usize {
        self.w1.mismatches(&self.w2).expect("same shape")
    }

    /// Normalized distance between the generators.
    pub fn distance(&self) -> BigRational {
        BigRational::from_ratio(self.mismatches() as u64, self.word_len() as u64)
    }

    pub fn params(&self) -> BoundParams {
        BoundParams::new(self.m, self.distance(), self.epsilon.clone(), self.theta.clone()).with_eta(self.eta.clone())
    }

    pub fn key(&self) -> String {
        let mut k = format!("w1={} w2={} m={} eps={} theta={}", self.w1, self.w2, self.m, self.epsilon, self.theta);
        if !self.eta.is_zero() {
            k.push_str(&format!(" eta={}", self.eta));
        }
        k
    }

    /// All `2^m` concatenations; bit `m-1-j` of the index picks block `j`.
    pub fn concatenations(&self) -> Vec<Codeword> {
        let (a, b) = (self.w1.symbols(), self.w2.symbols());
        (0..1usize << self.m)
            .map(|idx| {
                let mut syms = Vec::with_capacity(self.name_len());
                for j in 0..self.m {
                    syms.extend_from_slice(if idx >> (self.m - 1 - j) & 1 == 1 { &b } else { &a });
                }
                Codeword::from_symbols_unchecked(&syms, 2)
            })
            .collect()
    }

    /// Radius used for the cover. A zero radius is read as the closed ball
    /// of radius zero, so every word is its own ball.
    fn radius(&self) -> BigRational {
        if self.epsilon.is_zero() {
            BigRational::from_ratio(1, 2 * self.name_len() as u64)
        } else {
            self.epsilon.clone()
        }
    }

    /// Same cover problem up to an isometry of the cube: flip the bits where
    /// `w1` is one and move the differing positions to the end.
    fn canonical(&self) -> BlockInstance {
        let (l, d) = (self.word_len(), self.mismatches());
        let w2: Vec<u8> = (0..l).map(|i| u8::from(i >= l - d)).collect();
        BlockInstance {
            w1: Codeword::from_symbols_unchecked(&vec![0; l], 2),
            w2: Codeword::from_symbols_unchecked(&w2, 2),
            ..self.clone()
        }
    }
}

/// Bit flips applied to each concatenation, indexed like
/// [`BlockInstance::concatenations`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Perturbation {
    pub seed: u64,
    pub attempt: u32,
    pub flips: Vec<Vec<usize>>,
}

impl Perturbation {
    pub fn identity(m: usize) -> Self {
        Perturbation { seed: 0, attempt: 0, flips: vec![Vec::new(); 1 << m] }
    }

    /// More than a `1 - eta` fraction of the words get exactly the largest
    /// flip count that keeps them within `eta`; the rest get an arbitrary
    /// number of flips.
    pub fn random(inst: &BlockInstance, seed: u64, attempt: u32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (u64::from(attempt) << 32));
        let n = inst.name_len();
        let count = 1usize << inst.m;
        let budget = ball_threshold(&inst.eta, n).unwrap_or(0);
        let close = (&(BigRational::one() - &inst.eta) * BigRational::from_integer(BigInt::from(count)))
            .floor()
            .to_integer()
            .to_usize()
            .unwrap_or(0)
            + 1;
        let close = close.min(count);
        let mut is_close = vec![false; count];
        for i in sample(&mut rng, count, close).into_iter() {
            is_close[i] = true;
        }
        let flips = is_close
            .iter()
            .map(|&c| {
                let k = if c { budget } else { rng.gen_range(0..=n) };
                let mut f = sample(&mut rng, n, k).into_vec();
                f.sort_unstable();
                f
            })
            .collect();
        Perturbation { seed, attempt, flips }
    }

    pub fn apply(&self, words: &[Codeword]) -> Result<Vec<Codeword>> {
        contract!(
            self.flips.len() == words.len(),
            "perturbation covers {} words, not {}",
            self.flips.len(),
            words.len()
        );
        words
            .iter()
            .zip(&self.flips)
            .map(|(w, f)| {
                let mut s = w.symbols();
                for &i in f {
                    contract!(i < s.len(), "flip position {i} beyond word length {}", s.len());
                    s[i] ^= 1;
                }
                Ok(Codeword::from_symbols_unchecked(&s, 2))
            })
            .collect()
    }

    /// Fraction of words whose perturbation stays strictly within `eta`.
    pub fn close_fraction(&self, inst: &BlockInstance) -> BigRational {
        let n = inst.name_len();
        let close = match ball_threshold(&inst.eta, n) {
            Some(k) => self.flips.iter().filter(|f| f.len() <= k).count(),
            None => 0,
        };
        BigRational::from_ratio(close as u64, self.flips.len() as u64)
    }

    fn is_identity(&self) -> bool {
        self.flips.iter().all(Vec::is_empty)
    }

    /// `mu(d(psi, phi) < eta) > 1 - eta`. With `eta = 0` only the identity
    /// qualifies, as the limiting case.
    fn meets_hypothesis(&self, inst: &BlockInstance) -> bool {
        if inst.eta.is_zero() {
            return self.is_identity();
        }
        self.close_fraction(inst) > BigRational::one() - &inst.eta
    }
}

fn required_count(bound_log2: f64) -> usize {
    (bound_log2.exp2() - REQUIRED_SLACK).ceil().max(0.0) as usize
}

fn judge(bound: Result<f64>, observed: Observed) -> Result<(Option<f64>, usize, Verdict)> {
    match bound {
        Ok(b) if b == f64::NEG_INFINITY => Ok((None, 0, Verdict::Vacuous)),
        Ok(b) => {
            let required = required_count(b);
            let verdict = if observed.lower() >= required {
                Verdict::Holds
            } else if observed.upper() < required {
                Verdict::Violated
            } else {
                Verdict::Inconclusive
            };
            Ok((Some(b), required, verdict))
        }
        Err(Error::VacuousBound(_)) => Ok((None, 0, Verdict::Vacuous)),
        Err(Error::BoundInapplicable(_)) => Ok((None, 0, Verdict::Inapplicable)),
        Err(e) => Err(e),
    }
}

/// Minimum number of balls covering `1 - delta` of the names: exhaustive
/// over all centers when the cube is small, otherwise bracketed between the
/// restricted search at twice the radius (plus a volume bound) and the
/// restricted search at the radius.
fn min_cover(
    names: &WeightedNames<BigRational>,
    radius: &BigRational,
    delta: &BigRational,
    opts: &CoverOptions,
    max_ball: impl Fn(usize) -> BigRational,
) -> Result<(Observed, &'static str)> {
    if *delta >= BigRational::one() {
        return Ok((Observed::Exact(0), "trivial"));
    }
    let n = names.word_len();
    if n < 64 && (1u128 << n) <= opts.oracle_cap as u128 {
        match exact_cover_oracle(names, radius, delta, opts) {
            Ok(r) => return Ok((Observed::Exact(r.count), "oracle-exhaustive")),
            Err(Error::Resource(msg)) => log::debug!("oracle gave up ({msg}); bracketing instead"),
            Err(e) => return Err(e),
        }
    }
    let upper = match exact_cover_restricted(names, radius, delta, opts) {
        Ok(r) => r.count,
        Err(Error::Resource(_)) => greedy_cover(names, radius, delta)?.count,
        Err(e) => return Err(e),
    };
    let doubled = radius * BigRational::from_integer(BigInt::from(2));
    let mut lower = match exact_cover_restricted(names, &doubled, delta, opts) {
        Ok(r) => r.count,
        Err(Error::Resource(_)) => 0,
        Err(e) => return Err(e),
    };
    if let Some(k) = ball_threshold(radius, n) {
        let target = (BigRational::one() - delta) * Weight::sum(names.entries().iter().map(|(_, m)| m));
        if let Some(v) = volume_lower_bound(&target, &max_ball(k)) {
            lower = lower.max(v);
        }
    }
    debug_assert!(lower <= upper, "bracket {lower}..{upper} is inverted");
    Ok((Observed::Bracket { lower, upper }, "restricted-sandwich"))
}

/// Largest mass of concatenations within `k` mismatches of a single center.
///
/// A center acts block by block, so only the pair of distances from each
/// center block to the two generators matters. Every multiset of such pairs
/// is tried and the number of concatenations within `k` counted by a
/// convolution over blocks.
pub(super) fn block_max_ball(inst: &BlockInstance, k: usize) -> BigRational {
    let l = inst.word_len();
    let (a, b) = (inst.w1.symbols(), inst.w2.symbols());
    let mut pairs: Vec<(usize, usize)> = (0..1usize << l)
        .map(|c| {
            let bit = |i: usize| (c >> i & 1) as u8;
            let da = (0..l).filter(|&i| bit(i) != a[i]).count();
            let db = (0..l).filter(|&i| bit(i) != b[i]).count();
            (da, db)
        })
        .collect();
    pairs.sort_unstable();
    pairs.dedup();

    fn go(pairs: &[(usize, usize)], from: usize, left: usize, k: usize, dp: &[u64], best: &mut u64) {
        if left == 0 {
            *best = (*best).max(dp.iter().sum());
            return;
        }
        for (i, &(da, db)) in pairs.iter().enumerate().skip(from) {
            let mut next = vec![0u64; k + 1];
            for (s, &c) in dp.iter().enumerate() {
                if s + da <= k {
                    next[s + da] += c;
                }
                if s + db <= k {
                    next[s + db] += c;
                }
            }
            go(pairs, i, left - 1, k, &next, best);
        }
    }

    let mut dp = vec![0u64; k + 1];
    dp[0] = 1;
    let mut best = 0;
    go(&pairs, 0, inst.m, k, &dp, &mut best);
    BigRational::from_ratio(best, 1u64 << inst.m)
}

/// Largest mass a ball of `k` mismatches can hold: the heaviest names that
/// fit in its volume.
fn volume_max_ball(names: &WeightedNames<BigRational>, k: usize) -> BigRational {
    let n = names.word_len();
    let mut volume: u128 = 0;
    let mut binom: u128 = 1;
    for i in 0..=k.min(n) {
        volume = volume.saturating_add(binom);
        binom = binom * (n - i) as u128 / (i + 1) as u128;
    }
    let mut masses: Vec<&BigRational> = names.entries().iter().map(|(_, m)| m).collect();
    masses.sort_by(|x, y| y.cmp(x));
    let take = volume.min(masses.len() as u128) as usize;
    masses[..take].iter().fold(BigRational::zero(), |acc, m| acc + *m)
}

fn uniform_names(words: &[Codeword]) -> Result<WeightedNames<BigRational>> {
    WeightedNames::uniform(words)
}

/// Checks the block-code bound on one instance: the minimum number of
/// `eps`-balls covering `1 - theta` of the `2^m` concatenations is at least
/// `2^bound`.
pub fn verify_block_bound(inst: &BlockInstance, opts: &CoverOptions) -> Result<BoundReport> {
    let names = uniform_names(&inst.concatenations())?;
    let (observed, method) = min_cover(&names, &inst.radius(), &inst.theta, opts, |k| block_max_ball(inst, k))?;
    let params = BoundParams::new(inst.m, inst.distance(), inst.epsilon.clone(), inst.theta.clone());
    let (bound_log2, required, verdict) = judge(block_cover_bound_log2(&params), observed)?;
    Ok(BoundReport {
        instance: inst.key(),
        bound_log2,
        required,
        observed,
        method: method.into(),
        verdict,
        perturbation: None,
    })
}

/// Checks the perturbed bound. Without an explicit perturbation a random one
/// is drawn from `seed`, regenerating a bounded number of times until it
/// meets the closeness hypothesis.
pub fn verify_perturbed_bound(
    inst: &BlockInstance,
    perturbation: Option<&Perturbation>,
    seed: u64,
    opts: &CoverOptions,
) -> Result<BoundReport> {
    let words = inst.concatenations();
    let chosen = match perturbation {
        Some(p) => Some(p.clone()).filter(|p| p.meets_hypothesis(inst)),
        None if inst.eta.is_zero() => Some(Perturbation::identity(inst.m)),
        None => {
            (0..PERTURBATION_ATTEMPTS).map(|a| Perturbation::random(inst, seed, a)).find(|p| p.meets_hypothesis(inst))
        }
    };
    let Some(p) = chosen else {
        return Ok(BoundReport {
            instance: inst.key(),
            bound_log2: None,
            required: 0,
            observed: Observed::Exact(0),
            method: "none".into(),
            verdict: Verdict::HypothesisNotMet,
            perturbation: perturbation.cloned(),
        });
    };
    let names = uniform_names(&p.apply(&words)?)?;
    let bound = perturbed_cover_bound_log2(&inst.params());
    let (observed, method) = if matches!(bound, Err(Error::VacuousBound(_))) && inst.theta.is_one() {
        (Observed::Exact(0), "trivial")
    } else {
        min_cover(&names, &inst.radius(), &inst.theta, opts, |k| volume_max_ball(&names, k))?
    };
    let (bound_log2, required, verdict) = judge(bound, observed)?;
    Ok(BoundReport {
        instance: inst.key(),
        bound_log2,
        required,
        observed,
        method: method.into(),
        verdict,
        perturbation: Some(p),
    })
}

/// Small-instance grid for the block-code bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockGrid {
    pub max_word_len: usize,
    pub max_blocks: usize,
    #[serde(with = "crate::scalar::rational_text::vec")]
    pub epsilons: Vec<BigRational>,
    #[serde(with = "crate::scalar::rational_text::vec")]
    pub thetas: Vec<BigRational>,
}

impl Default for BlockGrid {
    fn default() -> Self {
        BlockGrid {
            max_word_len: MAX_WORD_LEN,
            max_blocks: MAX_BLOCKS,
            epsilons: vec![
                BigRational::from_ratio(1, 20),
                BigRational::from_ratio(1, 10),
                BigRational::from_ratio(1, 5),
            ],
            thetas: vec![BigRational::zero(), BigRational::from_ratio(1, 10)],
        }
    }
}

/// Every unordered pair of distinct binary words of each length, every
/// block count and every parameter pair meeting `eps/d + 1/m < 1/2`.
pub fn block_grid(grid: &BlockGrid) -> Result<Vec<BlockInstance>> {
    let mut out = Vec::new();
    for l in 1..=grid.max_word_len {
        let word = |v: usize| {
            Codeword::from_symbols_unchecked(&(0..l).map(|i| (v >> (l - 1 - i) & 1) as u8).collect::<Vec<_>>(), 2)
        };
        for a in 0..1usize << l {
            for b in a + 1..1usize << l {
                for m in 1..=grid.max_blocks {
                    for eps in &grid.epsilons {
                        for theta in &grid.thetas {
                            let inst = BlockInstance::new(word(a), word(b), m, eps.clone(), theta.clone())?;
                            if inst.params().block_bound_applicable() {
                                out.push(inst);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Runs [`verify_block_bound`] over the instances. Instances equivalent
/// under a cube isometry share one computation; reports come back in
/// input order.
pub fn run_block_grid(instances: &[BlockInstance], opts: &CoverOptions) -> Result<Vec<BoundReport>> {
    let mut classes: BTreeMap<String, BlockInstance> = BTreeMap::new();
    let keys: Vec<String> = instances
        .iter()
        .map(|i| {
            let c = i.canonical();
            let k = c.key();
            classes.entry(k.clone()).or_insert(c);
            k
        })
        .collect();
    let solved: BTreeMap<String, BoundReport> =
        classes.into_par_iter().map(|(k, c)| verify_block_bound(&c, opts).map(|r| (k, r))).collect::<Result<_>>()?;
    Ok(instances.iter().zip(keys).map(|(inst, k)| BoundReport { instance: inst.key(), ..solved[&k].clone() }).collect())
}
