//! Line-oriented `key: value` manifest handed to an external training stack.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};
use crate::model::SequenceId;

use super::splits::{published_splits, SplitConfig, SplitSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub lr_decay: f64,
    pub batch_size: u32,
}

impl Default for Hyperparameters {
    /// KPConv settings used for all three configurations.
    fn default() -> Self {
        Hyperparameters {
            learning_rate: 0.01,
            momentum: 0.98,
            weight_decay: 0.001,
            lr_decay: 0.98477,
            batch_size: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub hyperparameters: Hyperparameters,
    pub split: SplitSpec,
}

const KEYS: [&str; 9] = [
    "split",
    "learning_rate",
    "momentum",
    "weight_decay",
    "lr_decay",
    "batch_size",
    "train",
    "val",
    "test",
];

fn render_list(set: &BTreeSet<SequenceId>) -> String {
    let items: Vec<String> = set.iter().map(|s| s.render()).collect();
    format!("[{}]", items.join(", "))
}

impl TrainingConfig {
    pub fn for_split(config: SplitConfig) -> Self {
        TrainingConfig {
            hyperparameters: Hyperparameters::default(),
            split: published_splits(config),
        }
    }

    pub fn render(&self) -> String {
        let h = &self.hyperparameters;
        let s = &self.split;
        format!(
            "split: {}\nlearning_rate: {}\nmomentum: {}\nweight_decay: {}\nlr_decay: {}\nbatch_size: {}\ntrain: {}\nval: {}\ntest: {}\n",
            s.config,
            h.learning_rate,
            h.momentum,
            h.weight_decay,
            h.lr_decay,
            h.batch_size,
            render_list(&s.train),
            render_list(&s.val),
            render_list(&s.test),
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let bad = |message: String| Error::MalformedConfig { line, message };
            let (k, v) = t
                .split_once(':')
                .ok_or_else(|| bad("expected `key: value`".into()))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(bad(format!("unknown key {k:?}")));
            }
            if values.insert(k, (line, v.trim())).is_some() {
                return Err(bad(format!("duplicate key {k:?}")));
            }
        }

        let get = |k: &str| {
            values
                .get(k)
                .copied()
                .ok_or_else(|| Error::MalformedConfig {
                    line: 0,
                    message: format!("missing key {k:?}"),
                })
        };
        let float = |k: &str| -> Result<f64> {
            let (line, v) = get(k)?;
            v.parse().map_err(|_| Error::MalformedConfig {
                line,
                message: format!("{k}: not a number: {v:?}"),
            })
        };
        let list = |k: &str| -> Result<BTreeSet<SequenceId>> {
            let (line, v) = get(k)?;
            let inner = v
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| Error::MalformedConfig {
                    line,
                    message: format!("{k}: expected a bracketed list"),
                })?;
            inner
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(SequenceId::parse)
                .collect()
        };

        let (line, cfg) = get("split")?;
        let config: SplitConfig = cfg
            .parse()
            .map_err(|message| Error::MalformedConfig { line, message })?;
        let (line, bs) = get("batch_size")?;
        let batch_size = bs.parse().map_err(|_| Error::MalformedConfig {
            line,
            message: format!("batch_size: not an integer: {bs:?}"),
        })?;

        Ok(TrainingConfig {
            hyperparameters: Hyperparameters {
                learning_rate: float("learning_rate")?,
                momentum: float("momentum")?,
                weight_decay: float("weight_decay")?,
                lr_decay: float("lr_decay")?,
                batch_size,
            },
            split: SplitSpec::new(config, list("train")?, list("val")?, list("test")?)?,
        })
    }
}

pub fn emit_training_config(config: SplitConfig, out: &Path) -> Result<()> {
    fs::write(out, TrainingConfig::for_split(config).render()).at(out)
}

pub fn read_training_config(path: &Path) -> Result<TrainingConfig> {
    TrainingConfig::parse(&fs::read_to_string(path).at(path)?)
}
