use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Column, Tower, FAMILY_LEFT, FAMILY_RIGHT};
use crate::error::{contract, Error, Result};
use crate::scalar::Weight;

/// Materialization caps for stages whose output grows super-exponentially.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    pub max_columns: usize,
    pub max_levels: usize,
    /// Cap on the cut-in-half-and-stack doublings of one family block.
    pub max_doublings: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_columns: 1 << 12, max_levels: 1 << 26, max_doublings: 16 }
    }
}

impl Limits {
    fn check(&self, columns: usize, levels: usize, stage: &str) -> Result<()> {
        if columns > self.max_columns {
            return Err(Error::Resource(format!("{stage}: {columns} columns exceed cap {}", self.max_columns)));
        }
        if levels > self.max_levels {
            return Err(Error::Resource(format!("{stage}: {levels} levels exceed cap {}", self.max_levels)));
        }
        Ok(())
    }
}

/// Words `W^k s^k` and `(W s)^k`, the two nearly independent blocks built from `W`.
fn two_word_blocks(word: &[u8], k: usize, spacer: u8) -> (Vec<u8>, Vec<u8>) {
    let mut first = Vec::with_capacity(k * (word.len() + 1));
    for _ in 0..k {
        first.extend_from_slice(word);
    }
    first.extend(std::iter::repeat_n(spacer, k));
    let mut second = Vec::with_capacity(first.len());
    for _ in 0..k {
        second.extend_from_slice(word);
        second.push(spacer);
    }
    (first, second)
}

/// One round of independent cutting and stacking of a family of
/// equal-height columns. Both copies of the family get half the width; the
/// piece of column `i` from the lower copy is stacked under the piece of
/// column `j` from the upper copy in proportion to their widths, so the
/// result has `l^2` columns of doubled height and the same measure.
fn ics_round<W: Weight>(cols: &[Column<W>]) -> Vec<Column<W>> {
    let total = W::sum(cols.iter().map(|c| &c.width));
    let denom = W::from_count(2) * total;
    let mut out = Vec::with_capacity(cols.len() * cols.len());
    for lower in cols {
        for upper in cols {
            let mut levels = Vec::with_capacity(lower.height() + upper.height());
            levels.extend_from_slice(&lower.levels);
            levels.extend_from_slice(&upper.levels);
            let width = lower.width.clone() * upper.width.clone() / denom.clone();
            out.push(Column { levels, width, family: lower.family });
        }
    }
    out
}

/// Merges columns with identical words (and family), summing widths; keeps first-occurrence order.
fn merge_identical<W: Weight>(cols: Vec<Column<W>>) -> Vec<Column<W>> {
    let mut index: HashMap<(u32, Vec<u8>), usize> = HashMap::new();
    let mut out: Vec<Column<W>> = Vec::new();
    for c in cols {
        match index.get(&(c.family, c.levels.clone())) {
            Some(&i) => out[i].width = out[i].width.clone() + c.width,
            None => {
                index.insert((c.family, c.levels.clone()), out.len());
                out.push(c);
            }
        }
    }
    out
}

impl<W: Weight> Tower<W> {
    /// Splits column `col` into two halves: the first becomes `W^k s^k`,
    /// the second `(W s)^k`, each of width `width / (2k)` and height `k(h+1)`.
    pub fn stage_two_word_on(&mut self, col: usize, k: usize) -> Result<()> {
        contract!(k >= 1, "two-word stage needs k >= 1");
        let c = self.column(col)?.clone();
        let (a, b) = two_word_blocks(&c.levels, k, self.spacer);
        let width = c.width / W::from_count(2 * k);
        let new = [
            Column { levels: a, width: width.clone(), family: c.family },
            Column { levels: b, width, family: c.family },
        ];
        self.columns.splice(col..=col, new);
        self.log(format!("two_word(col={col}, k={k})"), "");
        Ok(())
    }

    /// Applies the two-word stage to every column.
    pub fn stage_two_word(&mut self, k: usize) -> Result<()> {
        contract!(k >= 1, "two-word stage needs k >= 1");
        let spacer = self.spacer;
        let cols = std::mem::take(&mut self.columns);
        for c in cols {
            let (a, b) = two_word_blocks(&c.levels, k, spacer);
            let width = c.width / W::from_count(2 * k);
            self.columns.push(Column { levels: a, width: width.clone(), family: c.family });
            self.columns.push(Column { levels: b, width, family: c.family });
        }
        self.log(format!("two_word(k={k})"), "");
        Ok(())
    }

    /// `rounds` rounds of independent cutting and stacking over all columns.
    /// With `merge`, columns carrying identical words are merged after each
    /// round (measure unchanged, column count possibly reduced).
    pub fn stage_ics(&mut self, rounds: usize, merge: bool, limits: &Limits) -> Result<()> {
        let h = self.uniform_height("ics")?;
        let mut cols = self.columns.clone();
        let mut merged = 0usize;
        for round in 0..rounds {
            let count = cols.len() * cols.len();
            limits.check(count, count.saturating_mul(h << (round + 1)), "ics")?;
            cols = ics_round(&cols);
            if merge {
                let before = cols.len();
                cols = merge_identical(cols);
                merged += before - cols.len();
            }
        }
        self.columns = cols;
        let note = if merged > 0 { format!("merged {merged} identical columns") } else { String::new() };
        self.log(format!("ics(s={rounds})"), note);
        Ok(())
    }

    /// Cuts every column in half, puts one spacer on the right half and
    /// stacks it on the left: `W -> W W s`, height `2h + 1`.
    pub fn stage_weak_mixing(&mut self) -> Result<()> {
        self.uniform_height("weak_mixing")?;
        let spacer = self.spacer;
        let two = W::from_count(2);
        for c in &mut self.columns {
            let h = c.levels.len();
            c.levels.extend_from_within(0..h);
            c.levels.push(spacer);
            c.width = c.width.clone() / two.clone();
        }
        self.log("weak_mixing", "");
        Ok(())
    }

    /// Cuts every column into `r` equal pieces and stacks them: `W -> W^r`.
    pub fn stage_rigidity(&mut self, r: usize) -> Result<()> {
        contract!(r >= 2, "rigidity stage needs r >= 2, got {r}");
        self.uniform_height("rigidity")?;
        let rr = W::from_count(r);
        for c in &mut self.columns {
            c.levels = c.levels.repeat(r);
            c.width = c.width.clone() / rr.clone();
        }
        self.log(format!("rigidity(r={r})"), "");
        Ok(())
    }

    /// Cuts every column into `k` equal pieces and stacks them left to right.
    pub fn stage_cut_stack(&mut self, k: usize) -> Result<()> {
        contract!(k >= 1, "cut-and-stack needs k >= 1");
        let kk = W::from_count(k);
        for c in &mut self.columns {
            c.levels = c.levels.repeat(k);
            c.width = c.width.clone() / kk.clone();
        }
        self.log(format!("cut_stack(k={k})"), "");
        Ok(())
    }

    fn ensure_families(&mut self) -> Result<()> {
        if self.columns.iter().all(|c| c.family == 0) {
            contract!(self.columns.len() == 2, "swap needs exactly two columns, found {}", self.columns.len());
            self.columns[0].family = FAMILY_LEFT;
            self.columns[1].family = FAMILY_RIGHT;
        }
        contract!(
            self.columns.iter().all(|c| c.family == FAMILY_LEFT || c.family == FAMILY_RIGHT),
            "swap needs every column tagged left or right"
        );
        Ok(())
    }

    /// Cuts the left family into `2(n+2)` pieces and the right family into 2,
    /// then exchanges the last left piece with the second right piece.
    ///
    /// Pieces that stay in their family carry the same word, so they are kept
    /// as one column of the combined width. Afterwards the left family holds
    /// `(2n+3)/(2n+4)` of its old width plus half the old right width.
    pub fn stage_swap(&mut self, n: usize) -> Result<()> {
        self.ensure_families()?;
        self.uniform_height("swap")?;
        let pieces = W::from_count(2 * (n + 2));
        let two = W::from_count(2);
        let mut left = Vec::new();
        let mut right = Vec::new();
        for c in std::mem::take(&mut self.columns) {
            if c.family == FAMILY_LEFT {
                let piece = c.width.clone() / pieces.clone();
                let keep = c.width.clone() - piece.clone();
                left.push(Column { levels: c.levels.clone(), width: keep, family: FAMILY_LEFT });
                right.push(Column { levels: c.levels, width: piece, family: FAMILY_RIGHT });
            } else {
                let half = c.width / two.clone();
                right.push(Column { levels: c.levels.clone(), width: half.clone(), family: FAMILY_RIGHT });
                left.push(Column { levels: c.levels, width: half, family: FAMILY_LEFT });
            }
        }
        left.extend(right);
        self.columns = merge_identical(left);
        self.log(format!("swap(n={n})"), "");
        Ok(())
    }

    /// Family width as a fraction of the total width.
    pub fn family_width(&self, family: u32) -> W {
        W::sum(self.columns.iter().filter(|c| c.family == family).map(|c| &c.width))
    }

    /// For every column of `family`: the two-word stage with `k`, `s` rounds
    /// of independent cutting and stacking of the resulting pair, then all
    /// `2^(2^s)` columns stacked into one of height `2^(2^s) 2^s k (h+1)`.
    pub fn stage_family_independent(&mut self, family: u32, k: usize, s: usize, limits: &Limits) -> Result<()> {
        contract!(k >= 1, "family stage needs k >= 1");
        let spacer = self.spacer;
        let mut out = Vec::with_capacity(self.columns.len());
        for c in std::mem::take(&mut self.columns) {
            if c.family != family {
                out.push(c);
                continue;
            }
            let (a, b) = two_word_blocks(&c.levels, k, spacer);
            let width = c.width / W::from_count(2 * k);
            let mut cols =
                vec![Column { levels: a, width: width.clone(), family }, Column { levels: b, width, family }];
            for _ in 0..s {
                let count = cols.len() * cols.len();
                if let Err(e) = limits.check(count, count.saturating_mul(2 * cols[0].height()), "family_independent") {
                    self.columns = out;
                    return Err(e);
                }
                cols = ics_round(&cols);
            }
            // ICS of two equal-width columns keeps widths equal, so the stack is well defined.
            let width = cols[0].width.clone();
            debug_assert!(cols.iter().all(|c| c.width == width));
            let levels: Vec<u8> = cols.iter().flat_map(|c| c.levels.iter().copied()).collect();
            out.push(Column { levels, width, family });
        }
        self.columns = merge_identical(out);
        let levels = self.total_levels();
        limits.check(self.columns.len(), levels, "family_independent")?;
        self.log(format!("family_independent(family={family}, k={k}, s={s})"), "");
        Ok(())
    }

    /// For every column of `family`: cut into `k`, stack, add `k` spacers,
    /// then cut in half and stack right on left `doublings` times, which
    /// multiplies the height by `2^doublings`. Returns `true` when
    /// `doublings` exceeded `limits.max_doublings` and was truncated.
    pub fn stage_family_halving(&mut self, family: u32, k: usize, doublings: usize, limits: &Limits) -> Result<bool> {
        contract!(k >= 1, "family stage needs k >= 1");
        let truncated = doublings > limits.max_doublings;
        let done = doublings.min(limits.max_doublings);
        let spacer = self.spacer;
        let factor = 1usize.checked_shl(done as u32).filter(|_| done < usize::BITS as usize);
        let projected: usize = self
            .columns
            .iter()
            .map(|c| if c.family == family { (c.height() + 1) * k } else { c.height() })
            .fold(0usize, |acc, h| acc.saturating_add(h.saturating_mul(factor.unwrap_or(usize::MAX))));
        limits.check(self.columns.len(), projected, "family_halving")?;
        let two = W::from_count(2);
        for c in self.columns.iter_mut().filter(|c| c.family == family) {
            let mut levels = c.levels.repeat(k);
            levels.extend(std::iter::repeat_n(spacer, k));
            let mut width = c.width.clone() / W::from_count(k);
            for _ in 0..done {
                levels.extend_from_within(..);
                width = width / two.clone();
            }
            c.levels = levels;
            c.width = width;
        }
        let note = if truncated { format!("TRUNCATED: {doublings} doublings capped at {done}") } else { String::new() };
        self.log(format!("family_halving(family={family}, k={k}, doublings={doublings})"), note);
        Ok(truncated)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type T = Tower<BigRational>;

    fn r(n: u64, d: u64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn two_word_heights_and_words() {
        let mut t = T::single_column(2, &[0, 0]).unwrap();
        t.stage_two_word(3).unwrap();
        assert_eq!(t.columns().len(), 2);
        assert!(t.columns().iter().all(|c| c.height() == 9));

        let mut t = T::single_column(2, &[0]).unwrap();
        t.stage_two_word(1).unwrap();
        assert!(t.columns().iter().all(|c| c.height() == 2));

        // word ab = 02 over a ternary alphabet with spacer 1
        let mut t = T::with_spacer(3, 1, vec![Column::new(vec![0, 2], r(1, 2))]).unwrap();
        let before = t.measure();
        t.stage_two_word(2).unwrap();
        assert_eq!(t.columns()[0].levels, vec![0, 2, 0, 2, 1, 1]);
        assert_eq!(t.columns()[1].levels, vec![0, 2, 1, 0, 2, 1]);
        // two spacers of width 1/8 on each half
        assert_eq!(t.measure(), before + r(4, 8));
    }

    #[test]
    fn ics_counting_law() {
        let mut t = T::new(2, vec![Column::new(vec![0, 0, 1], r(1, 6)), Column::new(vec![1, 0, 1], r(1, 6))]).unwrap();
        let m = t.measure();
        t.stage_ics(3, false, &Limits::default()).unwrap();
        assert_eq!(t.columns().len(), 256);
        assert!(t.columns().iter().all(|c| c.height() == 24));
        assert_eq!(t.measure(), m);
        let w = t.columns()[0].width.clone();
        assert!(t.columns().iter().all(|c| c.width == w));
    }

    #[test]
    fn ics_one_round_forms_all_ordered_pairs() {
        let mut t = T::new(2, vec![Column::new(vec![0], r(1, 2)), Column::new(vec![1], r(1, 2))]).unwrap();
        t.stage_ics(1, false, &Limits::default()).unwrap();
        let words: Vec<Vec<u8>> = t.columns().iter().map(|c| c.levels.clone()).collect();
        assert_eq!(words, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert!(t.columns().iter().all(|c| c.width == r(1, 8)));
    }

    #[test]
    fn ics_merges_identical_words_and_respects_caps() {
        let mut t = T::new(2, vec![Column::new(vec![0], r(1, 2)), Column::new(vec![0], r(1, 2))]).unwrap();
        t.stage_ics(2, true, &Limits::default()).unwrap();
        assert_eq!(t.columns().len(), 1);
        assert_eq!(t.measure(), r(1, 1));
        assert!(t.stage_log().last().unwrap().note.contains("merged"));

        let mut t = T::two_intervals();
        let tight = Limits { max_columns: 16, ..Limits::default() };
        assert!(matches!(t.stage_ics(3, false, &tight), Err(Error::Resource(_))));

        let mut t = T::new(2, vec![Column::new(vec![0], r(1, 2)), Column::new(vec![1, 1], r(1, 4))]).unwrap();
        assert!(t.stage_ics(1, false, &Limits::default()).is_err());
    }

    #[test]
    fn weak_mixing_stage() {
        let mut t = T::with_spacer(3, 2, vec![Column::new(vec![0, 1], r(1, 2))]).unwrap();
        let m = t.measure();
        t.stage_weak_mixing().unwrap();
        assert_eq!(t.columns()[0].levels, vec![0, 1, 0, 1, 2]);
        assert_eq!(t.measure(), m + r(1, 4));

        let mut t = T::new(2, vec![Column::new(vec![0; 5], r(1, 10)), Column::new(vec![1; 5], r(1, 10))]).unwrap();
        t.stage_weak_mixing().unwrap();
        assert_eq!(t.columns().len(), 2);
        assert!(t.columns().iter().all(|c| c.height() == 11));
    }

    #[test]
    fn rigidity_stage() {
        let mut t = T::new(2, vec![Column::new(vec![0, 1, 1, 0], r(1, 4))]).unwrap();
        let m = t.measure();
        t.stage_rigidity(3).unwrap();
        assert_eq!(t.columns()[0].height(), 12);
        assert_eq!(t.measure(), m);
        assert!(t.stage_rigidity(1).is_err());
    }

    #[test]
    fn swap_bookkeeping() {
        // first swap of the construction: equal halves, n = 1
        let mut t = T::new(2, vec![Column::new(vec![0, 1], r(1, 4)), Column::new(vec![1, 1], r(1, 4))]).unwrap();
        let m = t.measure();
        t.stage_swap(1).unwrap();
        assert_eq!(t.measure(), m);
        let total = r(1, 2);
        assert_eq!(t.family_width(FAMILY_LEFT) / total.clone(), r(2, 3));
        assert_eq!(t.family_width(FAMILY_RIGHT) / total, r(1, 3));

        // n = 0 cuts the left column into four
        let mut t = T::new(2, vec![Column::new(vec![0], r(1, 2)), Column::new(vec![1], r(1, 2))]).unwrap();
        t.stage_swap(0).unwrap();
        let left_piece = t.columns().iter().find(|c| c.family == FAMILY_RIGHT && c.levels == vec![0]).unwrap();
        assert_eq!(left_piece.width, r(1, 8));

        let mut t = T::new(2, vec![Column::new(vec![0], r(1, 2)), Column::new(vec![1, 1], r(1, 4))]).unwrap();
        assert!(t.stage_swap(1).is_err());
    }

    #[test]
    fn swap_family_width_matches_stage_fractions() {
        // after stage n the families hold (n+1)/(n+2) and 1/(n+2) of the width
        let mut t = T::new(2, vec![Column::new(vec![0], r(1, 2)), Column::new(vec![1], r(1, 2))]).unwrap();
        for n in 1..6u64 {
            t.stage_swap(n as usize).unwrap();
            let total = t.family_width(FAMILY_LEFT) + t.family_width(FAMILY_RIGHT);
            assert_eq!(t.family_width(FAMILY_RIGHT) / total, r(1, n + 2));
        }
    }

    #[test]
    fn family_blocks_equalize_heights() {
        let mut t = T::new(2, vec![Column::new(vec![0], r(1, 2)), Column::new(vec![1], r(1, 2))]).unwrap();
        t.stage_swap(1).unwrap();
        let m = t.measure();
        let limits = Limits::default();
        t.stage_family_independent(FAMILY_RIGHT, 1, 1, &limits).unwrap();
        let truncated = t.stage_family_halving(FAMILY_LEFT, 1, 2 + 1, &limits).unwrap();
        assert!(!truncated);
        assert!(t.columns().iter().all(|c| c.height() == 16), "{t}");
        // both families add spacers worth their own width
        assert_eq!(t.measure(), m + r(1, 1));
        let capped = Limits { max_doublings: 2, ..Limits::default() };
        assert!(t.stage_family_halving(FAMILY_LEFT, 1, 5, &capped).unwrap());
    }
}
