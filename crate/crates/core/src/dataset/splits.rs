//! The three train/val/test configurations over sequence ids.
//!
//! Partitions are built from explicit id ranges. The counts published next to
//! those ranges do not all agree with them; the ranges win, and each
//! disagreement is reported as a [`SplitDiscrepancy`] and logged.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};
use crate::model::SequenceId;

pub const SPLITS_DIR: &str = "splits";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitConfig {
    Combined,
    EnfieldOnly,
    MemphisOnly,
}

impl SplitConfig {
    pub const ALL: [SplitConfig; 3] = [
        SplitConfig::Combined,
        SplitConfig::EnfieldOnly,
        SplitConfig::MemphisOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SplitConfig::Combined => "combined",
            SplitConfig::EnfieldOnly => "enfield-only",
            SplitConfig::MemphisOnly => "memphis-only",
        }
    }

    /// Inclusive id ranges for (train, val, test).
    fn ranges(self) -> [&'static [(u16, u16)]; 3] {
        match self {
            SplitConfig::Combined => [
                &[(0, 58), (118, 133)],
                &[(59, 59)],
                &[(60, 117), (134, 149)],
            ],
            SplitConfig::EnfieldOnly => [&[(0, 58)], &[(59, 59)], &[(60, 118)]],
            SplitConfig::MemphisOnly => [&[(119, 133)], &[(134, 134)], &[(135, 149)]],
        }
    }

    /// Sequence counts as published alongside the ranges, for (train, val, test).
    pub fn stated_counts(self) -> [usize; 3] {
        match self {
            SplitConfig::Combined => [87, 1, 76],
            SplitConfig::EnfieldOnly => [59, 1, 60],
            SplitConfig::MemphisOnly => [15, 1, 15],
        }
    }
}

impl fmt::Display for SplitConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SplitConfig {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        SplitConfig::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown split config {s:?} (expected combined, enfield-only or memphis-only)"
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Val,
    Test,
}

impl Partition {
    pub const ALL: [Partition; 3] = [Partition::Train, Partition::Val, Partition::Test];

    pub fn name(self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Val => "val",
            Partition::Test => "test",
        }
    }
}

impl FromStr for Partition {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Partition::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown partition {s:?} (expected train, val or test)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub config: SplitConfig,
    pub train: BTreeSet<SequenceId>,
    pub val: BTreeSet<SequenceId>,
    pub test: BTreeSet<SequenceId>,
}

impl SplitSpec {
    /// Rejects specs whose partitions share a sequence.
    pub fn new(
        config: SplitConfig,
        train: BTreeSet<SequenceId>,
        val: BTreeSet<SequenceId>,
        test: BTreeSet<SequenceId>,
    ) -> Result<Self> {
        let spec = SplitSpec {
            config,
            train,
            val,
            test,
        };
        for (a, b) in [
            (&spec.train, &spec.val),
            (&spec.train, &spec.test),
            (&spec.val, &spec.test),
        ] {
            if let Some(s) = a.intersection(b).next() {
                return Err(Error::OverlappingSplit(s.render()));
            }
        }
        Ok(spec)
    }

    pub fn part(&self, p: Partition) -> &BTreeSet<SequenceId> {
        match p {
            Partition::Train => &self.train,
            Partition::Val => &self.val,
            Partition::Test => &self.test,
        }
    }

    pub fn counts(&self) -> [usize; 3] {
        [self.train.len(), self.val.len(), self.test.len()]
    }

    pub fn all(&self) -> BTreeSet<SequenceId> {
        self.train
            .iter()
            .chain(&self.val)
            .chain(&self.test)
            .copied()
            .collect()
    }
}

/// A published partition size that differs from the size of its id ranges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitDiscrepancy {
    pub config: SplitConfig,
    pub partition: Partition,
    pub stated: usize,
    pub computed: usize,
}

impl fmt::Display for SplitDiscrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: ranges give {} sequences, published count is {}",
            self.config,
            self.partition.name(),
            self.computed,
            self.stated
        )
    }
}

fn expand(ranges: &[(u16, u16)]) -> BTreeSet<SequenceId> {
    ranges
        .iter()
        .flat_map(|&(a, b)| a..=b)
        .map(|i| SequenceId::new(i).expect("range ids are below 1000"))
        .collect()
}

/// The split for `config`, expanded from its id ranges.
pub fn published_splits(config: SplitConfig) -> SplitSpec {
    let [train, val, test] = config.ranges();
    let spec = SplitSpec::new(config, expand(train), expand(val), expand(test))
        .expect("built-in ranges are disjoint");
    for d in split_discrepancies(&spec) {
        log::warn!("{d}");
    }
    spec
}

pub fn split_discrepancies(spec: &SplitSpec) -> Vec<SplitDiscrepancy> {
    Partition::ALL
        .into_iter()
        .zip(spec.config.stated_counts())
        .zip(spec.counts())
        .filter(|((_, stated), computed)| stated != computed)
        .map(|((partition, stated), computed)| SplitDiscrepancy {
            config: spec.config,
            partition,
            stated,
            computed,
        })
        .collect()
}

/// Parses `00-58,118-133,140` style lists.
pub fn parse_sequence_list(s: &str) -> Result<BTreeSet<SequenceId>> {
    let mut out = BTreeSet::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match item.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (SequenceId::parse(a)?, SequenceId::parse(b)?);
                if a > b {
                    return Err(Error::InvalidSequenceId(item.to_string()));
                }
                out.extend((a.index()..=b.index()).map(|i| SequenceId::new(i).unwrap()));
            }
            None => {
                out.insert(SequenceId::parse(item)?);
            }
        }
    }
    Ok(out)
}

pub fn split_dir(root: &Path, config: SplitConfig) -> PathBuf {
    root.join(SPLITS_DIR).join(config.name())
}

/// Writes `<root>/splits/<config>/{train,val,test}.txt`, one id per line.
pub fn write_split_files(root: &Path, spec: &SplitSpec) -> Result<()> {
    let dir = split_dir(root, spec.config);
    fs::create_dir_all(&dir).at(&dir)?;
    for p in Partition::ALL {
        let path = dir.join(format!("{}.txt", p.name()));
        let body: String = spec.part(p).iter().map(|s| format!("{s}\n")).collect();
        fs::write(&path, body).at(&path)?;
    }
    Ok(())
}

pub fn read_split_files(root: &Path, config: SplitConfig) -> Result<SplitSpec> {
    let dir = split_dir(root, config);
    let mut parts = Vec::with_capacity(3);
    for p in Partition::ALL {
        let path = dir.join(format!("{}.txt", p.name()));
        let text = fs::read_to_string(&path).at(&path)?;
        let mut set = BTreeSet::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            set.insert(SequenceId::parse(line)?);
        }
        parts.push(set);
    }
    let test = parts.pop().unwrap();
    let val = parts.pop().unwrap();
    let train = parts.pop().unwrap();
    SplitSpec::new(config, train, val, test)
}
