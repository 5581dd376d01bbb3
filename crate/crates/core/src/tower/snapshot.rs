//! Versioned JSON snapshots of a tower.
//!
//! Level words are written as digit strings (base 36) when the alphabet has
//! at most 36 symbols and as dot-separated decimals otherwise; widths are
//! written as exact `"num/den"` text.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Column, StageRecord, Tower};
use crate::error::{Error, Result};
use crate::scalar::Weight;

pub const SNAPSHOT_FORMAT: &str = "cutstack-tower";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    format: String,
    version: u32,
    alphabet_size: usize,
    spacer_symbol: u8,
    columns: Vec<ColumnDoc>,
    #[serde(default)]
    stage_log: Vec<StageRecord>,
    /// Free-form run information (config hash, seed); ignored on load.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    provenance: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ColumnDoc {
    levels: String,
    width: String,
    #[serde(default, skip_serializing_if = "is_zero")]
    family: u32,
}

fn is_zero(x: &u32) -> bool {
    *x == 0
}

fn encode_levels(levels: &[u8], alphabet: usize) -> String {
    if alphabet <= 36 {
        levels.iter().map(|&s| char::from_digit(s as u32, 36).expect("symbol < 36")).collect()
    } else {
        levels.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(".")
    }
}

fn decode_levels(text: &str, alphabet: usize) -> Option<Vec<u8>> {
    if alphabet <= 36 {
        text.chars().map(|c| c.to_digit(36).map(|d| d as u8)).collect()
    } else {
        text.split('.').map(|p| p.parse().ok()).collect()
    }
}

fn load_error(position: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Load { position: position.into(), message: message.into() }
}

impl<W: Weight> Tower<W> {
    /// Serializes the tower to pretty-printed JSON.
    pub fn to_snapshot(&self) -> String {
        self.to_snapshot_with(&BTreeMap::new())
    }

    /// Like [`to_snapshot`](Self::to_snapshot) with a `provenance` object
    /// recording how the tower was produced.
    pub fn to_snapshot_with(&self, provenance: &BTreeMap<String, String>) -> String {
        let doc = Doc {
            format: SNAPSHOT_FORMAT.to_string(),
            version: SNAPSHOT_VERSION,
            alphabet_size: self.alphabet,
            spacer_symbol: self.spacer,
            columns: self
                .columns
                .iter()
                .map(|c| ColumnDoc {
                    levels: encode_levels(&c.levels, self.alphabet),
                    width: c.width.to_text(),
                    family: c.family,
                })
                .collect(),
            stage_log: self.stage_log.clone(),
            provenance: provenance.clone(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("snapshot serializes");
        s.push('\n');
        s
    }

    /// Parses a snapshot. Syntax errors report `line:column`; semantic errors
    /// report the offending column as `columns[i]`.
    pub fn from_snapshot(text: &str) -> Result<Self> {
        let doc: Doc = serde_json::from_str(text)
            .map_err(|e| load_error(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        if doc.format != SNAPSHOT_FORMAT {
            return Err(load_error("format", format!("expected format {SNAPSHOT_FORMAT:?}, found {:?}", doc.format)));
        }
        if doc.version != SNAPSHOT_VERSION {
            return Err(load_error(
                "version",
                format!("unsupported version {} (this build reads {SNAPSHOT_VERSION})", doc.version),
            ));
        }
        let mut columns = Vec::with_capacity(doc.columns.len());
        for (i, c) in doc.columns.iter().enumerate() {
            let levels = decode_levels(&c.levels, doc.alphabet_size).ok_or_else(|| {
                load_error(format!("columns[{i}].levels"), format!("bad level string {:?}", c.levels))
            })?;
            let width = W::parse_text(&c.width)
                .ok_or_else(|| load_error(format!("columns[{i}].width"), format!("bad width {:?}", c.width)))?;
            columns.push(Column { levels, width, family: c.family });
        }
        let mut t = Tower::with_spacer(doc.alphabet_size, doc.spacer_symbol, columns)
            .map_err(|e| load_error("columns", e.to_string()))?;
        t.stage_log = doc.stage_log;
        Ok(t)
    }
}
