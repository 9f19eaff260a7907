use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{list_frames, sequence_dir};
use crate::error::{Error, IoContext, Result};
use crate::io::{read_label_words, scan_point_count, LABELS_DIR, LABEL_EXT};
use crate::model::{LabelSchema, SequenceId};
use crate::par;

use super::{
    class_metrics, summary_metrics, ClassMetrics, ConfusionMatrix, SummaryMetrics,
    ACCURACY_DEFINITION,
};

pub const PER_CLASS_FILE: &str = "per_class.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub sequences: Vec<SequenceId>,
    pub matrix: ConfusionMatrix,
    pub classes: ClassMetrics,
    pub summary: SummaryMetrics,
}

impl EvalReport {
    pub fn total_points(&self) -> u64 {
        self.matrix.total()
    }

    pub fn summary_json(&self, stamp: Option<u64>) -> serde_json::Value {
        let mut v = serde_json::json!({
            "mean_accuracy": self.summary.mean_accuracy,
            "miou_all": self.summary.miou_all,
            "miou_excl_unassigned": self.summary.miou_excl_unassigned,
            "total_points": self.total_points(),
            "sequences": self.sequences,
            "accuracy_definition": ACCURACY_DEFINITION,
        });
        if let Some(t) = stamp {
            v["generated_at_unix"] = t.into();
        }
        v
    }
}

fn sequence_matrix(gt_root: &Path, pred_root: &Path, seq: SequenceId) -> Result<ConfusionMatrix> {
    let mut m = ConfusionMatrix::new();
    let pred_dir = sequence_dir(pred_root, seq).join(LABELS_DIR);
    for f in list_frames(gt_root, seq)? {
        let pred_path = pred_dir.join(format!("{}.{LABEL_EXT}", f.stem));
        if !pred_path.is_file() {
            return Err(Error::MissingPrediction(pred_path));
        }
        let gt = read_label_words(&f.label)?;
        let points = scan_point_count(&f.scan)?;
        if points != gt.len() {
            return Err(Error::SizeMismatch {
                scan_points: points,
                labels: gt.len(),
            });
        }
        let pred = read_label_words(&pred_path)?;
        if pred.len() != gt.len() {
            return Err(Error::SizeMismatch {
                scan_points: gt.len(),
                labels: pred.len(),
            });
        }
        m.accumulate_words(&gt, &pred)?;
    }
    Ok(m)
}

/// Scores every ground-truth frame of `seqs` against the same-named
/// prediction under `pred_root`. Only semantic bits are compared.
pub fn evaluate_run(
    gt_root: &Path,
    pred_root: &Path,
    seqs: impl IntoIterator<Item = SequenceId>,
) -> Result<EvalReport> {
    let sequences: Vec<SequenceId> = seqs
        .into_iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let partials = par::map(&sequences, |&s| sequence_matrix(gt_root, pred_root, s));
    let mut matrix = ConfusionMatrix::new();
    for p in partials {
        matrix += &p?;
    }
    let classes = class_metrics(&matrix);
    let summary = summary_metrics(&classes)?;
    Ok(EvalReport {
        sequences,
        matrix,
        classes,
        summary,
    })
}

/// Writes `per_class.csv` and `summary.json` into `out_dir`.
pub fn write_eval_reports(
    report: &EvalReport,
    schema: &LabelSchema,
    out_dir: &Path,
    stamp: Option<u64>,
) -> Result<()> {
    fs::create_dir_all(out_dir).at(out_dir)?;
    let csv = out_dir.join(PER_CLASS_FILE);
    fs::write(&csv, report.classes.to_csv(schema)).at(&csv)?;
    let json = out_dir.join(SUMMARY_FILE);
    let body =
        serde_json::to_string_pretty(&report.summary_json(stamp)).expect("summary serializes");
    fs::write(&json, body + "\n").at(&json)
}
