//! Measure-weighted `n`-names of a tower stage.

use std::collections::HashMap;

use crate::codewords::Codeword;
use crate::error::{contract, Result};
use crate::scalar::Weight;
use crate::tower::Tower;

/// Distinct codewords with positive masses, plus the mass whose name is not
/// determined. Masses and neglected mass sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedNames<W> {
    entries: Vec<(Codeword, W)>,
    neglected: W,
}

impl<W: Weight> WeightedNames<W> {
    /// Merges equal codewords and sorts entries by codeword.
    pub fn new(entries: impl IntoIterator<Item = (Codeword, W)>, neglected: W) -> Result<Self> {
        let mut merged: HashMap<Codeword, W> = HashMap::new();
        let mut shape: Option<(usize, usize)> = None;
        for (w, m) in entries {
            let s = (w.len(), w.alphabet());
            contract!(shape.is_none_or(|x| x == s), "names of different lengths or alphabets");
            shape = Some(s);
            contract!(m.is_positive_weight(), "name {w} has nonpositive mass");
            let slot = merged.entry(w).or_insert_with(W::zero);
            *slot = slot.clone() + m;
        }
        contract!(neglected >= W::zero(), "negative neglected mass");
        let mut entries: Vec<(Codeword, W)> = merged.into_iter().collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let names = WeightedNames { entries, neglected };
        let total = names.total().to_f64();
        contract!((total - 1.0).abs() <= 1e-9, "masses sum to {total}, not 1");
        Ok(names)
    }

    /// Equal mass on each listed word (repeats add up).
    pub fn uniform(words: &[Codeword]) -> Result<Self> {
        contract!(!words.is_empty(), "no words");
        let m = W::from_ratio(1, words.len() as u64);
        Self::new(words.iter().map(|w| (w.clone(), m.clone())), W::zero())
    }

    pub fn entries(&self) -> &[(Codeword, W)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn neglected(&self) -> &W {
        &self.neglected
    }

    pub fn defined_mass(&self) -> W {
        W::sum(self.entries.iter().map(|(_, m)| m))
    }

    pub fn total(&self) -> W {
        self.defined_mass() + self.neglected.clone()
    }

    /// Length of the names, 0 when there are none.
    pub fn word_len(&self) -> usize {
        self.entries.first().map_or(0, |(w, _)| w.len())
    }

    pub fn alphabet(&self) -> usize {
        self.entries.first().map_or(0, |(w, _)| w.alphabet())
    }

    pub fn mass_of(&self, word: &Codeword) -> Option<&W> {
        self.entries.binary_search_by(|(w, _)| w.cmp(word)).ok().map(|i| &self.entries[i].1)
    }

    pub fn map_weights<V: Weight>(&self, f: impl Fn(&W) -> V) -> WeightedNames<V> {
        WeightedNames {
            entries: self.entries.iter().map(|(w, m)| (w.clone(), f(m))).collect(),
            neglected: f(&self.neglected),
        }
    }
}

impl<W: Weight> Tower<W> {
    /// The `n`-names of the stage: each window `W[j..j+n)` with
    /// `0 <= j <= h - n` of a column of width `w` gets mass `w`. Points in the
    /// top `n - 1` levels of each column are neglected. Masses are divided by
    /// the tower measure.
    pub fn name_distribution(&self, n: usize) -> Result<WeightedNames<W>> {
        contract!(n >= 1, "name length must be at least 1");
        contract!(n <= self.min_height(), "name length {n} exceeds column height {}", self.min_height());
        let total = self.measure();
        let mut acc: HashMap<&[u8], W> = HashMap::new();
        let mut neglected = W::zero();
        for c in self.columns() {
            for window in c.levels.windows(n) {
                let slot = acc.entry(window).or_insert_with(W::zero);
                *slot = slot.clone() + c.width.clone();
            }
            neglected = neglected + c.width.clone() * W::from_count(n - 1);
        }
        self.finish_names(acc, neglected / total.clone(), &total)
    }

    /// Names of the periodic completion of the stage, in which the top of each
    /// column returns to its own bottom. Every point gets a name, so nothing
    /// is neglected; any `n >= 1` is allowed.
    pub fn cyclic_name_distribution(&self, n: usize) -> Result<WeightedNames<W>> {
        contract!(n >= 1, "name length must be at least 1");
        let total = self.measure();
        let mut owned: HashMap<Vec<u8>, W> = HashMap::new();
        for c in self.columns() {
            let h = c.height();
            let cycle: Vec<u8> = c.levels.iter().copied().cycle().take(h + n - 1).collect();
            for window in cycle.windows(n).take(h) {
                let slot = owned.entry(window.to_vec()).or_insert_with(W::zero);
                *slot = slot.clone() + c.width.clone();
            }
        }
        let acc = owned.iter().map(|(k, v)| (k.as_slice(), v.clone())).collect();
        self.finish_names(acc, W::zero(), &total)
    }

    fn finish_names(&self, acc: HashMap<&[u8], W>, neglected: W, total: &W) -> Result<WeightedNames<W>> {
        let alphabet = self.alphabet_size();
        let mut entries: Vec<(Codeword, W)> =
            acc.into_iter().map(|(k, m)| (Codeword::from_symbols_unchecked(k, alphabet), m / total.clone())).collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(WeightedNames { entries, neglected })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::{Column, Limits};
    use num_rational::BigRational;
    use num_traits::One;

    type T = Tower<BigRational>;

    fn r(n: u64, d: u64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn cw(s: &str) -> Codeword {
        Codeword::parse(s, 2).unwrap()
    }

    #[test]
    fn single_column_windows() {
        let t = T::single_column(2, &[0, 1, 0]).unwrap();
        let names = t.name_distribution(2).unwrap();
        assert_eq!(names.len(), 2);
        assert_eq!(names.mass_of(&cw("01")), Some(&r(1, 3)));
        assert_eq!(names.mass_of(&cw("10")), Some(&r(1, 3)));
        assert_eq!(names.neglected(), &r(1, 3));
        assert!(names.total().is_one());

        let full = t.name_distribution(3).unwrap();
        assert_eq!(full.len(), 1);
        assert_eq!(full.neglected(), &r(2, 3));
        assert!(t.name_distribution(4).is_err());
    }

    #[test]
    fn after_one_ics_round() {
        let mut t = T::two_intervals();
        t.stage_ics(1, false, &Limits::default()).unwrap();
        let names = t.name_distribution(2).unwrap();
        assert_eq!(names.len(), 4);
        assert!(names.entries().iter().all(|(_, m)| *m == r(1, 8)));
        assert_eq!(names.neglected(), &r(1, 2));
    }

    #[test]
    fn cyclic_names_cover_everything() {
        let t = T::new(2, vec![Column::new(vec![0, 0, 1], r(1, 6)), Column::new(vec![1], r(1, 2))]).unwrap();
        let names = t.cyclic_name_distribution(4).unwrap();
        assert!(names.neglected() == &r(0, 1));
        assert!(names.total().is_one());
        assert_eq!(names.mass_of(&cw("1111")), Some(&r(1, 2)));
        assert_eq!(names.mass_of(&cw("0010")), Some(&r(1, 6)));
    }

    #[test]
    fn constructor_merges_and_validates() {
        let n =
            WeightedNames::new(vec![(cw("01"), r(1, 4)), (cw("01"), r(1, 4)), (cw("11"), r(1, 2))], r(0, 1)).unwrap();
        assert_eq!(n.len(), 2);
        assert_eq!(n.mass_of(&cw("01")), Some(&r(1, 2)));
        assert!(WeightedNames::new(vec![(cw("01"), r(1, 4))], r(0, 1)).is_err());
        assert!(WeightedNames::new(vec![(cw("01"), r(1, 2)), (cw("1"), r(1, 2))], r(0, 1)).is_err());
        let u: WeightedNames<f64> = WeightedNames::uniform(&[cw("0"), cw("1"), cw("1")]).unwrap();
        assert!((u.mass_of(&cw("1")).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }
}
