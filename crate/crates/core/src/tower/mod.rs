//! Exact symbolic cutting-and-stacking.
//!
//! A [`Tower`] is a finite stage of a construction: a list of columns, each
//! a word of partition symbols (index 0 is the bottom level) with a width.
//! The transformation maps each level to the one above it; the top level
//! of every column has no image yet.

mod levels;
mod snapshot;
mod stages;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::scalar::Weight;

pub use levels::{lift_through_rigidity, LevelSet};
pub use snapshot::{SNAPSHOT_FORMAT, SNAPSHOT_VERSION};
pub use stages::Limits;

/// Family tag of columns descending from the wide column of a swap stage.
pub const FAMILY_LEFT: u32 = 1;
/// Family tag of columns descending from the narrow column of a swap stage.
pub const FAMILY_RIGHT: u32 = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct Column<W> {
    pub levels: Vec<u8>,
    pub width: W,
    /// Column family used by stages that treat groups of columns differently; 0 when untagged.
    pub family: u32,
}

impl<W: Weight> Column<W> {
    pub fn new(levels: Vec<u8>, width: W) -> Self {
        Column { levels, width, family: 0 }
    }

    pub fn height(&self) -> usize {
        self.levels.len()
    }

    pub fn measure(&self) -> W {
        self.width.clone() * W::from_count(self.height())
    }
}

/// One entry of a tower's stage log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub columns: usize,
    pub min_height: usize,
    pub max_height: usize,
    /// Total measure after the stage, in the tower's lossless text form.
    pub measure: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tower<W> {
    columns: Vec<Column<W>>,
    alphabet: usize,
    spacer: u8,
    stage_log: Vec<StageRecord>,
}

impl<W: Weight> Tower<W> {
    /// A tower with the given columns. Spacers default to symbol 1, the
    /// second symbol of the alphabet.
    pub fn new(alphabet: usize, columns: Vec<Column<W>>) -> Result<Self> {
        Self::with_spacer(alphabet, 1, columns)
    }

    pub fn with_spacer(alphabet: usize, spacer: u8, columns: Vec<Column<W>>) -> Result<Self> {
        contract!((2..=256).contains(&alphabet), "alphabet size {alphabet} outside [2, 256]");
        contract!((spacer as usize) < alphabet, "spacer symbol {spacer} not in alphabet");
        for (i, c) in columns.iter().enumerate() {
            contract!(c.height() >= 1, "column {i} has no levels");
            contract!(c.width.is_positive_weight(), "column {i} has nonpositive width");
            if let Some(s) = c.levels.iter().find(|&&s| s as usize >= alphabet) {
                return Err(Error::Contract(format!("column {i} has symbol {s} outside alphabet")));
            }
        }
        Ok(Tower { columns, alphabet, spacer, stage_log: Vec::new() })
    }

    /// One column of the given word, width 1 / height (so the tower has measure 1).
    pub fn single_column(alphabet: usize, word: &[u8]) -> Result<Self> {
        contract!(!word.is_empty(), "empty initial word");
        let w = W::from_ratio(1, word.len() as u64);
        Self::new(alphabet, vec![Column::new(word.to_vec(), w)])
    }

    /// Two height-one columns labeled 0 and 1, each of width 1/2: the
    /// starting point of the infinite-rank constructions.
    pub fn two_intervals() -> Self {
        let half = W::from_ratio(1, 2);
        Tower::new(2, vec![Column::new(vec![0], half.clone()), Column::new(vec![1], half)]).expect("valid")
    }

    pub fn columns(&self) -> &[Column<W>] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> Result<&Column<W>> {
        self.columns.get(i).ok_or_else(|| Error::Contract(format!("no column {i}")))
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn spacer_symbol(&self) -> u8 {
        self.spacer
    }

    pub fn stage_log(&self) -> &[StageRecord] {
        &self.stage_log
    }

    pub fn measure(&self) -> W {
        self.columns.iter().fold(W::zero(), |acc, c| acc + c.measure())
    }

    pub fn min_height(&self) -> usize {
        self.columns.iter().map(Column::height).min().unwrap_or(0)
    }

    pub fn max_height(&self) -> usize {
        self.columns.iter().map(Column::height).max().unwrap_or(0)
    }

    pub fn total_levels(&self) -> usize {
        self.columns.iter().map(Column::height).sum()
    }

    /// Common height of all columns, or a contract error naming the stage.
    pub fn uniform_height(&self, stage: &str) -> Result<usize> {
        let h = self.min_height();
        contract!(!self.columns.is_empty(), "{stage}: tower has no columns");
        contract!(self.max_height() == h, "{stage}: columns have unequal heights {h}..{}", self.max_height());
        Ok(h)
    }

    pub(crate) fn log(&mut self, stage: impl Into<String>, note: impl Into<String>) {
        let rec = StageRecord {
            stage: stage.into(),
            columns: self.columns.len(),
            min_height: self.min_height(),
            max_height: self.max_height(),
            measure: self.measure().to_text(),
            note: note.into(),
        };
        self.stage_log.push(rec);
    }

    /// Replaces column `col` by `k` copies of width `width / k`.
    pub fn cut(&mut self, col: usize, k: usize) -> Result<()> {
        contract!(k >= 1, "cut into zero pieces");
        let c = self.column(col)?.clone();
        let piece = Column { width: c.width.clone() / W::from_count(k), ..c };
        self.columns.splice(col..=col, std::iter::repeat_n(piece, k));
        self.log(format!("cut(col={col}, k={k})"), "");
        Ok(())
    }

    /// Stacks the named columns in the given order (first is the bottom).
    /// The result takes the place of the lowest-indexed named column.
    pub fn stack(&mut self, order: &[usize]) -> Result<()> {
        contract!(!order.is_empty(), "stack of no columns");
        let mut seen = order.to_vec();
        seen.sort_unstable();
        seen.dedup();
        contract!(seen.len() == order.len(), "stack order repeats a column");
        for &i in order {
            self.column(i)?;
        }
        let width = self.columns[order[0]].width.clone();
        contract!(order.iter().all(|&i| self.columns[i].width == width), "stacked columns must have equal widths");
        let mut levels = Vec::new();
        for &i in order {
            levels.extend_from_slice(&self.columns[i].levels);
        }
        let family = self.columns[order[0]].family;
        let target = seen[0];
        for &i in seen.iter().rev() {
            self.columns.remove(i);
        }
        self.columns.insert(target, Column { levels, width, family });
        self.log(format!("stack({order:?})"), "");
        Ok(())
    }

    /// Places `count` spacer levels on top of column `col`.
    pub fn add_spacers(&mut self, col: usize, count: usize) -> Result<()> {
        self.column(col)?;
        let s = self.spacer;
        self.columns[col].levels.extend(std::iter::repeat_n(s, count));
        self.log(format!("add_spacers(col={col}, count={count})"), "");
        Ok(())
    }
}

impl<W: Weight> fmt::Display for Tower<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "tower: {} columns, heights {}..{}, measure {}",
            self.columns.len(),
            self.min_height(),
            self.max_height(),
            self.measure().to_text()
        )?;
        for rec in &self.stage_log {
            writeln!(
                f,
                "  {:<40} cols={:<6} h={}..{} measure={}",
                rec.stage, rec.columns, rec.min_height, rec.max_height, rec.measure
            )?;
        }
        Ok(())
    }
}
