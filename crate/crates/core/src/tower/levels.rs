use std::collections::BTreeSet;

use super::Tower;
use crate::error::{contract, Result};
use crate::scalar::Weight;

/// A union of tower levels, addressed as `(column, level)` with level 0 at the bottom.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LevelSet {
    entries: BTreeSet<(usize, usize)>,
}

impl LevelSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set after checking every entry against `tower`.
    pub fn from_entries<W: Weight>(
        tower: &Tower<W>,
        entries: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut set = LevelSet::new();
        for (c, l) in entries {
            let col = tower.column(c)?;
            contract!(l < col.height(), "level {l} out of range for column {c} of height {}", col.height());
            set.entries.insert((c, l));
        }
        Ok(set)
    }

    /// Every level of column `col`.
    pub fn whole_column<W: Weight>(tower: &Tower<W>, col: usize) -> Result<Self> {
        let h = tower.column(col)?.height();
        Self::from_entries(tower, (0..h).map(|l| (col, l)))
    }

    /// Every level, in every column, whose symbol is `symbol`.
    pub fn with_symbol<W: Weight>(tower: &Tower<W>, symbol: u8) -> Self {
        let mut set = LevelSet::new();
        for (c, col) in tower.columns().iter().enumerate() {
            for (l, &s) in col.levels.iter().enumerate() {
                if s == symbol {
                    set.entries.insert((c, l));
                }
            }
        }
        set
    }

    pub fn contains(&self, col: usize, level: usize) -> bool {
        self.entries.contains(&(col, level))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.iter().copied()
    }

    /// Measure of the set in `tower` (sum of the widths of its levels).
    pub fn measure<W: Weight>(&self, tower: &Tower<W>) -> W {
        W::sum(self.entries.iter().map(|&(c, _)| &tower.columns()[c].width))
    }
}

impl<W: Weight> Tower<W> {
    /// Measure of `A ∩ T^{-shift} A` and of the part of `A` in the top
    /// `shift` levels, where `T^shift` is not yet defined.
    ///
    /// Within a column `T^shift` sends level `i` to `i + shift`.
    pub fn measure_overlap(&self, set: &LevelSet, shift: usize) -> Result<(W, W)> {
        contract!(shift >= 1, "overlap shift must be at least 1");
        let mut overlap = W::zero();
        let mut undefined = W::zero();
        for (c, l) in set.iter() {
            let col = self.column(c)?;
            contract!(l < col.height(), "level ({c}, {l}) out of range");
            if l + shift >= col.height() {
                undefined = undefined + col.width.clone();
            } else if set.contains(c, l + shift) {
                overlap = overlap + col.width.clone();
            }
        }
        Ok((overlap, undefined))
    }
}

/// Maps a level set of a tower of height `h` to the same subset after the
/// rigidity stage with `r` copies: level `i` of a column becomes levels
/// `i, i + h, ..., i + (r-1)h` of the stacked column. Column indices are
/// unchanged since the rigidity stage acts column by column.
pub fn lift_through_rigidity(set: &LevelSet, h: usize, r: usize) -> LevelSet {
    let mut out = LevelSet::new();
    for (c, l) in set.iter() {
        for j in 0..r {
            out.entries.insert((c, l + j * h));
        }
    }
    out
}
