use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_label_words, scan_point_count, unpack_label, LabelPolicy};
use crate::model::{ClassId, LabelSchema, SequenceId, NUM_CLASSES};
use crate::par;

use super::layout::list_frames;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub label: ClassId,
    pub class_name: String,
    pub count: u64,
    /// Share of all counted points, in percent. Zero when nothing was counted.
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionTable {
    pub rows: Vec<DistributionRow>,
    pub total: u64,
    /// Points whose semantic id lies outside the schema (permissive reads only).
    pub out_of_schema: u64,
    pub zero_total: bool,
}

impl DistributionTable {
    pub fn from_counts(
        counts: &[u64; NUM_CLASSES],
        schema: &LabelSchema,
        out_of_schema: u64,
    ) -> Self {
        let total: u64 = counts.iter().sum();
        let rows = schema
            .classes()
            .iter()
            .map(|(id, name)| {
                let count = counts[id.index()];
                DistributionRow {
                    label: *id,
                    class_name: name.clone(),
                    count,
                    percent: if total == 0 {
                        0.0
                    } else {
                        100.0 * count as f64 / total as f64
                    },
                }
            })
            .collect();
        DistributionTable {
            rows,
            total,
            out_of_schema,
            zero_total: total == 0,
        }
    }

    pub fn counts(&self) -> [u64; NUM_CLASSES] {
        let mut c = [0; NUM_CLASSES];
        for r in &self.rows {
            c[r.label.index()] = r.count;
        }
        c
    }

    /// `label,class_name,count,percent` with percentages at four decimals.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["label", "class_name", "count", "percent"])
            .expect("writing to memory");
        for r in &self.rows {
            w.write_record([
                r.label.to_string(),
                r.class_name.clone(),
                r.count.to_string(),
                format!("{:.4}", r.percent),
            ])
            .expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
    }
}

/// Semantic label tally over every frame of `seqs`, rejecting ids outside the schema.
pub fn compute_distribution(
    root: &Path,
    seqs: impl IntoIterator<Item = SequenceId>,
    schema: &LabelSchema,
) -> Result<DistributionTable> {
    compute_distribution_with(root, seqs, schema, LabelPolicy::Strict)
}

pub fn compute_distribution_with(
    root: &Path,
    seqs: impl IntoIterator<Item = SequenceId>,
    schema: &LabelSchema,
    policy: LabelPolicy,
) -> Result<DistributionTable> {
    let seqs: Vec<SequenceId> = seqs
        .into_iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let partials = par::map(&seqs, |&seq| count_sequence(root, seq, policy));

    let mut counts = [0u64; NUM_CLASSES];
    let mut unknown = 0u64;
    for p in partials {
        let (c, u) = p?;
        for (acc, v) in counts.iter_mut().zip(c) {
            *acc += v;
        }
        unknown += u;
    }
    Ok(DistributionTable::from_counts(&counts, schema, unknown))
}

fn count_sequence(
    root: &Path,
    seq: SequenceId,
    policy: LabelPolicy,
) -> Result<([u64; NUM_CLASSES], u64)> {
    let mut counts = [0u64; NUM_CLASSES];
    let mut unknown = 0;
    for frame in list_frames(root, seq)? {
        let words = read_label_words(&frame.label)?;
        let points = scan_point_count(&frame.scan)?;
        if points != words.len() {
            return Err(Error::SizeMismatch {
                scan_points: points,
                labels: words.len(),
            });
        }
        for (index, w) in words.into_iter().enumerate() {
            let (sem, _) = unpack_label(w);
            match counts.get_mut(sem as usize) {
                Some(c) => *c += 1,
                None if policy == LabelPolicy::Permissive => unknown += 1,
                None => {
                    return Err(Error::UnknownClassId {
                        value: sem as u32,
                        index,
                    })
                }
            }
        }
    }
    Ok((counts, unknown))
}
