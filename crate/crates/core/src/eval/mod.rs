//! Confusion-matrix based segmentation metrics.
//!
//! Per-class accuracy is recall, `TP / (TP + FN)`. A class whose denominator
//! is zero has an undefined metric and is left out of every mean.

mod run;

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

pub use run::{evaluate_run, write_eval_reports, EvalReport, PER_CLASS_FILE, SUMMARY_FILE};

use crate::error::{Error, Result};
use crate::io::unpack_label;
use crate::model::{ClassId, LabelSchema, NUM_CLASSES};
use crate::par;

pub const ACCURACY_DEFINITION: &str = "recall";

const CHUNK: usize = 1 << 16;

/// `counts[g][p]`: points of ground-truth class `g` predicted as `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl Default for ConfusionMatrix {
    fn default() -> Self {
        ConfusionMatrix {
            counts: [[0; NUM_CLASSES]; NUM_CLASSES],
        }
    }
}

impl AddAssign<&ConfusionMatrix> for ConfusionMatrix {
    fn add_assign(&mut self, rhs: &ConfusionMatrix) {
        for (row, other) in self.counts.iter_mut().zip(&rhs.counts) {
            for (c, o) in row.iter_mut().zip(other) {
                *c += o;
            }
        }
    }
}

impl Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(mut self, rhs: ConfusionMatrix) -> ConfusionMatrix {
        self += &rhs;
        self
    }
}

fn check(value: u32, index: usize) -> Result<usize> {
    if (value as usize) < NUM_CLASSES {
        Ok(value as usize)
    } else {
        Err(Error::ClassOutOfRange { value, index })
    }
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sum(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    pub fn col_sum(&self, c: usize) -> u64 {
        self.counts.iter().map(|r| r[c]).sum()
    }

    /// Tallies `(gt[i], pred[i])` for every `i`.
    pub fn accumulate(&mut self, gt: &[ClassId], pred: &[ClassId]) -> Result<()> {
        self.accumulate_by(gt, pred, |c| c.get() as u32)
    }

    /// Like [`accumulate`](Self::accumulate) over raw label words; instance bits are ignored.
    pub fn accumulate_words(&mut self, gt: &[u32], pred: &[u32]) -> Result<()> {
        self.accumulate_by(gt, pred, |w| unpack_label(*w).0 as u32)
    }

    fn accumulate_by<T: Sync>(
        &mut self,
        gt: &[T],
        pred: &[T],
        sem: impl Fn(&T) -> u32 + Sync + Send,
    ) -> Result<()> {
        if gt.len() != pred.len() {
            return Err(Error::LengthMismatch {
                what: "ground truth vs prediction",
                left: gt.len(),
                right: pred.len(),
            });
        }
        let chunks = gt.len().div_ceil(CHUNK);
        let partials = par::map_range(chunks, |c| -> Result<ConfusionMatrix> {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(gt.len());
            let mut m = ConfusionMatrix::default();
            for i in start..end {
                let g = check(sem(&gt[i]), i)?;
                let p = check(sem(&pred[i]), i)?;
                m.counts[g][p] += 1;
            }
            Ok(m)
        });
        for p in partials {
            *self += &p?;
        }
        Ok(())
    }
}

/// Functional form of [`ConfusionMatrix::accumulate`].
pub fn accumulate(
    gt: &[ClassId],
    pred: &[ClassId],
    mut matrix: ConfusionMatrix,
) -> Result<ConfusionMatrix> {
    matrix.accumulate(gt, pred)?;
    Ok(matrix)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub label: ClassId,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub iou: Option<f64>,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub classes: Vec<ClassScore>,
}

impl ClassMetrics {
    pub fn get(&self, c: ClassId) -> Option<&ClassScore> {
        self.classes.iter().find(|s| s.label == c)
    }

    /// `label,class_name,tp,fp,fn,iou,accuracy`, `NA` for undefined values.
    pub fn to_csv(&self, schema: &LabelSchema) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["label", "class_name", "tp", "fp", "fn", "iou", "accuracy"])
            .expect("writing to memory");
        for s in &self.classes {
            w.write_record([
                s.label.to_string(),
                schema.name(s.label).unwrap_or("").to_string(),
                s.tp.to_string(),
                s.fp.to_string(),
                s.fn_.to_string(),
                fmt(s.iou),
                fmt(s.accuracy),
            ])
            .expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
    }
}

pub fn class_metrics(matrix: &ConfusionMatrix) -> ClassMetrics {
    let classes = ClassId::all()
        .map(|label| {
            let c = label.index();
            let tp = matrix.counts[c][c];
            let fn_ = matrix.row_sum(c) - tp;
            let fp = matrix.col_sum(c) - tp;
            let union = tp + fp + fn_;
            ClassScore {
                label,
                tp,
                fp,
                fn_,
                iou: (union > 0).then(|| tp as f64 / union as f64),
                accuracy: (tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64),
            }
        })
        .collect();
    ClassMetrics { classes }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryMetrics {
    pub mean_accuracy: Option<f64>,
    pub miou_all: Option<f64>,
    pub miou_excl_unassigned: Option<f64>,
}

impl SummaryMetrics {
    pub fn mean_accuracy(&self) -> Result<f64> {
        self.mean_accuracy.ok_or(Error::NoDefinedClasses)
    }

    pub fn miou_all(&self) -> Result<f64> {
        self.miou_all.ok_or(Error::NoDefinedClasses)
    }

    pub fn miou_excl_unassigned(&self) -> Result<f64> {
        self.miou_excl_unassigned.ok_or(Error::NoDefinedClasses)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Means over defined classes. Fails only when no class is defined at all;
/// individual means that have no defined class are `None`.
pub fn summary_metrics(cm: &ClassMetrics) -> Result<SummaryMetrics> {
    let s = SummaryMetrics {
        mean_accuracy: mean(cm.classes.iter().filter_map(|c| c.accuracy)),
        miou_all: mean(cm.classes.iter().filter_map(|c| c.iou)),
        miou_excl_unassigned: mean(
            cm.classes
                .iter()
                .filter(|c| c.label != ClassId::UNASSIGNED)
                .filter_map(|c| c.iou),
        ),
    };
    if s.mean_accuracy.is_none() && s.miou_all.is_none() {
        return Err(Error::NoDefinedClasses);
    }
    Ok(s)
}
