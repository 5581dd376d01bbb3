use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::scalar::Weight;
use crate::tower::{Column, Limits, Tower};

/// One stage of a construction, in the form stored in config files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case", deny_unknown_fields)]
pub enum StageDescriptor {
    TwoWord {
        k: usize,
    },
    Ics {
        s: usize,
        #[serde(default)]
        merge: bool,
    },
    WeakMixing,
    Rigidity {
        r: usize,
    },
    CutStack {
        k: usize,
    },
    /// Spacers on top of every column.
    AddSpacers {
        count: usize,
    },
    Swap {
        n: usize,
    },
    FamilyIndependent {
        family: u32,
        k: usize,
        s: usize,
    },
    FamilyHalving {
        family: u32,
        k: usize,
        doublings: usize,
    },
}

impl StageDescriptor {
    pub fn apply<W: Weight>(&self, t: &mut Tower<W>, limits: &Limits) -> Result<()> {
        match *self {
            StageDescriptor::TwoWord { k } => t.stage_two_word(k),
            StageDescriptor::Ics { s, merge } => t.stage_ics(s, merge, limits),
            StageDescriptor::WeakMixing => t.stage_weak_mixing(),
            StageDescriptor::Rigidity { r } => t.stage_rigidity(r),
            StageDescriptor::CutStack { k } => t.stage_cut_stack(k),
            StageDescriptor::AddSpacers { count } => {
                for c in 0..t.columns().len() {
                    t.add_spacers(c, count)?;
                }
                Ok(())
            }
            StageDescriptor::Swap { n } => t.stage_swap(n),
            StageDescriptor::FamilyIndependent { family, k, s } => t.stage_family_independent(family, k, s, limits),
            StageDescriptor::FamilyHalving { family, k, doublings } => {
                t.stage_family_halving(family, k, doublings, limits).map(|_| ())
            }
        }
    }

    /// Height after the stage for a tower of uniform height `h`, when the
    /// stage acts on all columns alike.
    pub fn height_after(&self, h: usize) -> Option<usize> {
        match *self {
            StageDescriptor::TwoWord { k } => k.checked_mul(h + 1),
            StageDescriptor::Ics { s, .. } => h.checked_shl(s as u32).filter(|_| s < 64),
            StageDescriptor::WeakMixing => Some(2 * h + 1),
            StageDescriptor::Rigidity { r } => r.checked_mul(h),
            StageDescriptor::CutStack { k } => k.checked_mul(h),
            StageDescriptor::AddSpacers { count } => Some(h + count),
            StageDescriptor::Swap { .. } => Some(h),
            StageDescriptor::FamilyIndependent { .. } | StageDescriptor::FamilyHalving { .. } => None,
        }
    }
}

/// Starting tower of a schedule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialTower {
    /// One column carrying `word` (digits), of measure one.
    SingleColumn { word: String },
    /// Two height-one columns labeled 0 and 1, width 1/2 each.
    TwoIntervals,
    /// Explicit columns with exact `"num/den"` widths.
    Columns { columns: Vec<InitialColumn> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialColumn {
    pub levels: String,
    pub width: String,
}

fn digits(word: &str) -> Result<Vec<u8>> {
    word.chars()
        .map(|c| {
            c.to_digit(36).map(|d| d as u8).ok_or_else(|| Error::Contract(format!("bad symbol {c:?} in {word:?}")))
        })
        .collect()
}

/// A construction as an initial tower plus an ordered list of stages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSchedule {
    /// Which construction produced the schedule.
    pub construction: String,
    #[serde(default = "default_alphabet")]
    pub alphabet: usize,
    #[serde(default = "default_spacer")]
    pub spacer: u8,
    pub initial: InitialTower,
    pub stages: Vec<StageDescriptor>,
    #[serde(default)]
    pub limits: Limits,
    /// Derived quantities and claims recorded alongside the schedule.
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

fn default_alphabet() -> usize {
    2
}

fn default_spacer() -> u8 {
    1
}

impl StageSchedule {
    pub fn new(construction: impl Into<String>, initial: InitialTower, stages: Vec<StageDescriptor>) -> Self {
        StageSchedule {
            construction: construction.into(),
            alphabet: 2,
            spacer: 1,
            initial,
            stages,
            limits: Limits::default(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.metadata.insert(key.to_string(), value.to_string());
    }

    pub fn initial_tower<W: Weight>(&self) -> Result<Tower<W>> {
        let columns = match &self.initial {
            InitialTower::SingleColumn { word } => {
                let levels = digits(word)?;
                contract!(!levels.is_empty(), "empty initial word");
                vec![Column::new(levels.clone(), W::from_ratio(1, levels.len() as u64))]
            }
            InitialTower::TwoIntervals => {
                vec![Column::new(vec![0], W::from_ratio(1, 2)), Column::new(vec![1], W::from_ratio(1, 2))]
            }
            InitialTower::Columns { columns } => columns
                .iter()
                .map(|c| {
                    let width =
                        W::parse_text(&c.width).ok_or_else(|| Error::Contract(format!("bad width {:?}", c.width)))?;
                    Ok(Column::new(digits(&c.levels)?, width))
                })
                .collect::<Result<_>>()?,
        };
        Tower::with_spacer(self.alphabet, self.spacer, columns)
    }

    /// Runs every stage, checking the height law of each stage that has one.
    pub fn execute<W: Weight>(&self) -> Result<Tower<W>> {
        self.execute_each(|_, _, _| Ok(()))
    }

    /// Like [`execute`](Self::execute), calling `visit` with the stage index
    /// (0 for the initial tower, `i + 1` after stage `i`) and the tower.
    pub fn execute_each<W: Weight>(
        &self,
        mut visit: impl FnMut(usize, Option<&StageDescriptor>, &Tower<W>) -> Result<()>,
    ) -> Result<Tower<W>> {
        let mut t = self.initial_tower::<W>()?;
        visit(0, None, &t)?;
        for (i, stage) in self.stages.iter().enumerate() {
            let before = (t.min_height() == t.max_height()).then(|| t.min_height());
            stage.apply(&mut t, &self.limits)?;
            if let Some(expect) = before.and_then(|h| stage.height_after(h)) {
                contract!(
                    t.min_height() == expect && t.max_height() == expect,
                    "stage {i} ({stage:?}) broke its height law: expected {expect}, got {}..{}",
                    t.min_height(),
                    t.max_height()
                );
            }
            visit(i + 1, Some(stage), &t)?;
        }
        Ok(t)
    }
}
