use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use cutstack::covers::{CoverOptions, NameMode};
use cutstack::scalar::rational_text;
use cutstack::scenarios::{
    repeated_block, rigid_family, swap_families, two_word_ics, with_continuation, FamilyInputs, FamilyTable,
    StageSchedule,
};
use cutstack::slowent::{RateFamily, Sequence};
use cutstack::verify::{BlockGrid, DEFAULT_SEED, GRID_NODE_BUDGET};
use cutstack::{Limits, Rational};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A configuration problem; mapped to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub n: Vec<usize>,
    #[serde(with = "rational_text::vec")]
    pub epsilon: Vec<Rational>,
    #[serde(with = "rational_text::vec")]
    pub delta: Vec<Rational>,
    pub t: Vec<f64>,
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            n: vec![1, 2, 4, 8, 16],
            epsilon: vec![Rational::new(1.into(), 10.into())],
            delta: vec![Rational::new(1.into(), 10.into())],
            t: vec![1.0, 2.0],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Caps {
    pub cover: CoverOptions,
    pub tower: Limits,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    pub grid: BlockGrid,
    /// Branch-and-bound budget for the grid's exact searches.
    pub node_budget: u64,
    /// Perturbation radii; each adds a perturbed-bound pass over the grid.
    #[serde(with = "rational_text::vec")]
    pub etas: Vec<Rational>,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings { grid: BlockGrid::default(), node_budget: GRID_NODE_BUDGET, etas: Vec::new() }
    }
}

/// A named construction with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSpec {
    RepeatedBlock {
        word: String,
        k1: usize,
        k2: usize,
        #[serde(default)]
        continuation: Option<usize>,
    },
    TwoWordIcs {
        word: String,
        k: usize,
        t: f64,
        eta: f64,
        s_cap: usize,
    },
    RigidFamily {
        #[serde(with = "rational_text")]
        epsilon: Rational,
        stages: usize,
        r: Vec<usize>,
        t: Vec<f64>,
        #[serde(default = "one")]
        min_s: usize,
        #[serde(default = "sixty")]
        s_cap: usize,
    },
    SwapFamilies {
        k: Vec<usize>,
        s: Vec<usize>,
    },
}

fn one() -> usize {
    1
}

fn sixty() -> usize {
    60
}

fn default_rate() -> RateFamily {
    RateFamily::Polynomial
}

fn default_sequence() -> Sequence {
    Sequence::sqrt()
}

/// Everything a run reads: where the tower comes from, the measurement
/// grids, the rate family, the seed and the resource caps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Schedule file, relative to the config file.
    pub schedule: Option<PathBuf>,
    pub scenario: Option<ScenarioSpec>,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
    pub grids: Grids,
    #[serde(default = "default_rate")]
    pub rate: RateFamily,
    /// `a_n` for the entropy curve and the mass-split check.
    #[serde(default = "default_sequence")]
    pub blume_sequence: Sequence,
    pub names: NameMode,
    pub caps: Caps,
    pub verify: VerifySettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schedule: None,
            scenario: None,
            output_dir: None,
            seed: DEFAULT_SEED,
            grids: Grids::default(),
            rate: default_rate(),
            blume_sequence: default_sequence(),
            names: NameMode::default(),
            caps: Caps::default(),
            verify: VerifySettings::default(),
        }
    }
}

/// A parsed config plus the text it came from, for hashing.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: RunConfig,
    /// Directory relative paths in the config resolve against.
    pub base: PathBuf,
    pub texts: Vec<String>,
}

fn toml_error(path: &Path, text: &str, e: toml::de::Error) -> anyhow::Error {
    let at = e
        .span()
        .map(|s| {
            let before = &text[..s.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            format!("line {line} column {col}")
        })
        .unwrap_or_else(|| "unknown position".into());
    config_err(format!("{} at {at}: {}", path.display(), e.message()))
}

pub fn parse_toml<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<(T, String)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value = toml::from_str(&text).map_err(|e| toml_error(path, &text, e))?;
    Ok((value, text))
}

impl Loaded {
    pub fn from_path(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            None => Ok(Loaded { config: RunConfig::default(), base: PathBuf::from("."), texts: Vec::new() }),
            Some(p) => {
                let (config, text): (RunConfig, String) = parse_toml(p)?;
                let base = p.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
                let loaded = Loaded { config, base, texts: vec![text] };
                loaded.validate()?;
                Ok(loaded)
            }
        }
    }

    fn validate(&self) -> anyhow::Result<()> {
        let g = &self.config.grids;
        if g.n.is_empty() || g.epsilon.is_empty() || g.delta.is_empty() || g.t.is_empty() {
            bail!(config_err("grids.n, grids.epsilon, grids.delta and grids.t must be nonempty"));
        }
        if g.n.contains(&0) {
            bail!(config_err("grids.n entries must be positive"));
        }
        let unit = |x: &Rational| *x > Rational::zero() && *x < Rational::one();
        if !g.epsilon.iter().all(unit) || !g.delta.iter().all(unit) {
            bail!(config_err("grids.epsilon and grids.delta must lie in (0, 1)"));
        }
        Ok(())
    }

    /// The schedule to run: an explicit file (command line first, then the
    /// config), else the configured scenario.
    pub fn schedule(&mut self, cli: Option<&Path>) -> anyhow::Result<StageSchedule> {
        let path = match (cli, &self.config.schedule) {
            (Some(p), _) => Some(p.to_path_buf()),
            (None, Some(p)) => Some(self.base.join(p)),
            (None, None) => None,
        };
        let mut sched = match path {
            Some(p) => {
                let (s, text): (StageSchedule, String) = parse_toml(&p)?;
                self.texts.push(text);
                s
            }
            None => match &self.config.scenario {
                Some(spec) => self.scenario_schedule(spec)?,
                None => {
                    bail!(config_err("no schedule: pass --schedule or set `schedule` or `[scenario]` in the config"))
                }
            },
        };
        sched.limits = self.config.caps.tower.clone();
        Ok(sched)
    }

    pub fn scenario_schedule(&self, spec: &ScenarioSpec) -> anyhow::Result<StageSchedule> {
        let sched = match spec {
            ScenarioSpec::RepeatedBlock { word, k1, k2, continuation } => {
                with_continuation(repeated_block(word, *k1, *k2)?, continuation.unwrap_or(1))
            }
            ScenarioSpec::TwoWordIcs { word, k, t, eta, s_cap } => {
                two_word_ics(word, *k, &self.config.rate, *t, *eta, *s_cap)?.0
            }
            ScenarioSpec::RigidFamily { .. } => self.family()?.0,
            ScenarioSpec::SwapFamilies { k, s } => swap_families(k, s)?,
        };
        Ok(sched)
    }

    pub fn family(&self) -> anyhow::Result<(StageSchedule, FamilyTable)> {
        match &self.config.scenario {
            Some(ScenarioSpec::RigidFamily { epsilon, stages, r, t, min_s, s_cap }) => {
                if r.len() <= *stages || t.len() <= *stages {
                    bail!(config_err(format!("rigid_family needs {} entries in r and t", stages + 1)));
                }
                let inputs =
                    FamilyInputs { epsilon: epsilon.clone(), r: r.clone(), t: t.clone(), min_s: *min_s, s_cap: *s_cap };
                let (s, table) = rigid_family(&inputs, &self.config.rate, *stages)?;
                Ok((s, table))
            }
            _ => bail!(config_err("scenario is not a rigid family")),
        }
    }

    /// SHA-256 over every input text read so far, hex encoded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.texts {
            h.update((t.len() as u64).to_le_bytes());
            h.update(t.as_bytes());
        }
        hex::encode(h.finalize())
    }
}
