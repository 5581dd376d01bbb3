//! Partial set cover over bitset balls: greedy and exact branch-and-bound.

use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Additive mass used inside the search. Exact instances run on `u128`
/// after scaling to a common denominator and fall back to `BigRational`.
pub(crate) trait Mass: Clone + PartialOrd + Zero + Add<Output = Self> + Sub<Output = Self> {}

impl Mass for u128 {}
impl Mass for BigRational {}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct BitSet(pub Vec<u64>);

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet(vec![0; len.div_ceil(64)])
    }

    pub fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &BitSet) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }

    pub fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    #[cfg(test)]
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    /// Ones of `self` that are not in `mask`.
    pub fn ones_outside<'a>(&'a self, mask: &'a BitSet) -> impl Iterator<Item = usize> + 'a {
        self.0.iter().zip(&mask.0).enumerate().flat_map(|(wi, (&w, &m))| {
            let mut w = w & !m;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }
}

/// Scales exact masses to integers over their common denominator when the
/// total fits in a `u128`. Returns the integers and the denominator.
pub(crate) fn scale_to_integers(masses: &[BigRational]) -> Option<(Vec<u128>, BigInt)> {
    let mut den = BigInt::from(1u8);
    for m in masses {
        den = den.lcm(m.denom());
    }
    let mut total = 0u128;
    let mut out = Vec::with_capacity(masses.len());
    for m in masses {
        let v = (m.numer() * (&den / m.denom())).to_u128()?;
        total = total.checked_add(v)?;
        out.push(v);
    }
    Some((out, den))
}

/// A partial cover instance: `masses[e]` for each entry, `balls[c]` the
/// entries covered by candidate `c`, and the mass to reach.
pub(crate) struct Problem<'a, M> {
    pub masses: &'a [M],
    pub balls: &'a [BitSet],
    pub target: M,
}

fn gain<M: Mass>(masses: &[M], ball: &BitSet, covered: &BitSet) -> M {
    ball.ones_outside(covered).fold(M::zero(), |acc, e| acc + masses[e].clone())
}

impl<M: Mass> Problem<'_, M> {
    fn entries(&self) -> usize {
        self.masses.len()
    }

    /// Greedy: repeatedly takes the candidate with the largest uncovered
    /// mass, preferring the lowest index among ties. `None` if the target is
    /// unreachable even with every candidate.
    pub fn greedy(&self) -> Option<Vec<usize>> {
        let mut covered = BitSet::new(self.entries());
        let mut mass = M::zero();
        let mut chosen = Vec::new();
        while mass < self.target {
            let mut best: Option<(usize, M)> = None;
            for (c, ball) in self.balls.iter().enumerate() {
                let g = gain(self.masses, ball, &covered);
                if g > M::zero() && best.as_ref().is_none_or(|(_, b)| g > *b) {
                    best = Some((c, g));
                }
            }
            let (c, g) = best?;
            covered.union_with(&self.balls[c]);
            mass = mass + g;
            chosen.push(c);
        }
        Some(chosen)
    }

    /// Smallest `c` such that the `c` largest single-ball masses reach the target.
    pub fn top_gain_lower_bound(&self) -> usize {
        let covered = BitSet::new(self.entries());
        let mut gains: Vec<M> = self.balls.iter().map(|b| gain(self.masses, b, &covered)).collect();
        gains.sort_by(|a, b| b.partial_cmp(a).expect("comparable masses"));
        let mut acc = M::zero();
        for (i, g) in gains.into_iter().enumerate() {
            if acc >= self.target {
                return i;
            }
            acc = acc + g;
        }
        if acc >= self.target {
            self.balls.len()
        } else {
            usize::MAX
        }
    }

    /// Minimum-cardinality cover, searched with iterative deepening from the
    /// top-gain lower bound up to `upper - 1`, where `upper` is the size of a
    /// known cover `incumbent`. Returns the incumbent if nothing smaller exists.
    pub fn exact(&self, incumbent: Vec<usize>, node_budget: u64) -> Result<Vec<usize>> {
        let lower = self.top_gain_lower_bound();
        let mut nodes = 0u64;
        let mut best = incumbent;
        let mut depth = lower.max(if self.target > M::zero() { 1 } else { 0 });
        while depth < best.len() {
            let mut state = Dfs {
                p: self,
                covered: BitSet::new(self.entries()),
                abandoned: BitSet::new(self.entries()),
                chosen: Vec::new(),
                nodes: &mut nodes,
                budget: node_budget,
            };
            if let Some(found) = state.run(M::zero(), depth)? {
                best = found;
                break;
            }
            depth += 1;
        }
        Ok(best)
    }
}

struct Dfs<'p, 'a, M> {
    p: &'p Problem<'a, M>,
    covered: BitSet,
    abandoned: BitSet,
    chosen: Vec<usize>,
    nodes: &'p mut u64,
    budget: u64,
}

impl<M: Mass> Dfs<'_, '_, M> {
    /// Searches for a cover using at most `left` more balls.
    fn run(&mut self, mass: M, left: usize) -> Result<Option<Vec<usize>>> {
        if mass >= self.p.target {
            return Ok(Some(self.chosen.clone()));
        }
        if left == 0 {
            return Ok(None);
        }
        *self.nodes += 1;
        if *self.nodes > self.budget {
            return Err(Error::Resource(format!("exact cover search exceeded {} nodes", self.budget)));
        }
        let mut blocked = self.covered.clone();
        blocked.union_with(&self.abandoned);
        // Balls touching an abandoned entry were explored by an earlier sibling branch.
        // Optimistic bound: the `left` largest gains, as if disjoint.
        let mut gains: Vec<M> = self
            .p
            .balls
            .iter()
            .filter(|b| !b.intersects(&self.abandoned))
            .map(|b| gain(self.p.masses, b, &blocked))
            .filter(|g| *g > M::zero())
            .collect();
        gains.sort_by(|a, b| b.partial_cmp(a).expect("comparable masses"));
        let reach = gains.into_iter().take(left).fold(mass.clone(), |acc, g| acc + g);
        if reach < self.p.target {
            return Ok(None);
        }
        // Branch on the heaviest still-open entry: some chosen ball covers it, or it stays uncovered.
        let open = (0..self.p.entries()).filter(|&e| !blocked.contains(e));
        let Some(pivot) = open.fold(None::<usize>, |best, e| match best {
            Some(b) if self.p.masses[b] >= self.p.masses[e] => Some(b),
            _ => Some(e),
        }) else {
            return Ok(None);
        };
        for c in 0..self.p.balls.len() {
            if !self.p.balls[c].contains(pivot) || self.p.balls[c].intersects(&self.abandoned) {
                continue;
            }
            let g = gain(self.p.masses, &self.p.balls[c], &self.covered);
            let saved = self.covered.clone();
            self.covered.union_with(&self.p.balls[c]);
            self.chosen.push(c);
            let found = self.run(mass.clone() + g, left - 1)?;
            self.chosen.pop();
            self.covered = saved;
            if found.is_some() {
                return Ok(found);
            }
        }
        self.abandoned.insert(pivot);
        let found = self.run(mass, left)?;
        self.abandoned.0[pivot / 64] &= !(1 << (pivot % 64));
        Ok(found)
    }
}
