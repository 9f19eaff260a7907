//! Per-source label tables that rewrite raw source labels into unified class ids.
//!
//! Mapping CSV files have the header `source_dataset,source_key,target_id`,
//! may contain `#` comment lines, and hold the rules of exactly one source.
//! Keys are trimmed and lowercased before matching; keys without a rule map
//! to class 0 and are counted.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, IoContext, Result};
use crate::model::{ClassId, LabelSchema, NUM_CLASSES};
use crate::par;

pub const REMAP_HEADER: [&str; 3] = ["source_dataset", "source_key", "target_id"];

const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemapTable {
    source_name: String,
    rules: BTreeMap<String, ClassId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemapOutput {
    pub labels: Vec<ClassId>,
    pub unmapped_count: usize,
}

pub fn fold_key(key: &str) -> Cow<'_, str> {
    let t = key.trim();
    if t.chars().any(char::is_uppercase) {
        Cow::Owned(t.to_lowercase())
    } else {
        Cow::Borrowed(t)
    }
}

impl RemapTable {
    /// Builds a table from `(key, target)` pairs; keys are folded, and a
    /// folded key that appears with two different targets is rejected.
    pub fn new(
        source_name: impl Into<String>,
        rules: impl IntoIterator<Item = (String, ClassId)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<String, (usize, ClassId)> = BTreeMap::new();
        for (i, (key, target)) in rules.into_iter().enumerate() {
            if !target.is_known() {
                return Err(Error::InvalidTargetId {
                    line: i + 1,
                    value: target.to_string(),
                });
            }
            insert_rule(&mut map, fold_key(&key).into_owned(), target, i + 1)?;
        }
        Ok(RemapTable {
            source_name: source_name.into(),
            rules: map.into_iter().map(|(k, (_, t))| (k, t)).collect(),
        })
    }

    /// Maps the decimal form of every class id onto itself.
    pub fn identity() -> Self {
        RemapTable {
            source_name: "identity".into(),
            rules: ClassId::all().map(|c| (c.to_string(), c)).collect(),
        }
    }

    pub fn source_name(&self) -> &str {
        &self.source_name
    }

    pub fn rules(&self) -> &BTreeMap<String, ClassId> {
        &self.rules
    }

    pub fn default_target(&self) -> ClassId {
        ClassId::UNASSIGNED
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// The rule for `key`, if any.
    pub fn get(&self, key: &str) -> Option<ClassId> {
        self.rules.get(fold_key(key).as_ref()).copied()
    }

    /// Attaches these rules to `schema` under this table's source name.
    pub fn register(&self, schema: &mut LabelSchema) -> Result<()> {
        schema.insert_rules(self.source_name.clone(), self.rules.clone())
    }
}

fn insert_rule(
    map: &mut BTreeMap<String, (usize, ClassId)>,
    key: String,
    target: ClassId,
    line: usize,
) -> Result<()> {
    match map.get(&key) {
        Some(&(first_line, first)) if first != target => Err(Error::ConflictingRule {
            key,
            first_line,
            first_target: first.get(),
            second_line: line,
            second_target: target.get(),
        }),
        Some(_) => Ok(()),
        None => {
            map.insert(key, (line, target));
            Ok(())
        }
    }
}

pub fn load_remap_csv(path: &Path, schema: &LabelSchema) -> Result<RemapTable> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .at(path)?;
    parse_remap_csv(&text, schema)
}

pub fn parse_remap_csv(text: &str, schema: &LabelSchema) -> Result<RemapTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let csv_err = |e: csv::Error| Error::MalformedCsv {
        line: e.position().map(|p| p.line() as usize).unwrap_or(0),
        message: e.to_string(),
    };

    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().ne(REMAP_HEADER) {
        return Err(Error::MalformedCsv {
            line: 1,
            message: format!("expected header `{}`", REMAP_HEADER.join(",")),
        });
    }

    let mut source: Option<String> = None;
    let mut map = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let (ds, key, target) = (&rec[0], &rec[1], &rec[2]);

        match &source {
            None => source = Some(ds.to_string()),
            Some(s) if s == ds => {}
            Some(s) => {
                return Err(Error::MalformedCsv {
                    line,
                    message: format!(
                        "source_dataset {ds:?} differs from {s:?}; one source per file"
                    ),
                })
            }
        }
        if key.is_empty() {
            return Err(Error::MalformedCsv {
                line,
                message: "empty source_key".into(),
            });
        }

        let bad_target = || Error::InvalidTargetId {
            line,
            value: target.to_string(),
        };
        let id = target.parse::<u16>().map_err(|_| bad_target())?;
        let id = ClassId::new(id).map_err(|_| bad_target())?;
        if !schema.contains(id) {
            return Err(bad_target());
        }
        insert_rule(&mut map, fold_key(key).into_owned(), id, line)?;
    }

    Ok(RemapTable {
        source_name: source.unwrap_or_default(),
        rules: map.into_iter().map(|(k, (_, t))| (k, t)).collect(),
    })
}

/// Rewrites raw labels positionally; unknown keys become class 0.
pub fn apply_remap<S: AsRef<str> + Sync>(raw_labels: &[S], table: &RemapTable) -> RemapOutput {
    let parts = par::map_chunks(raw_labels, CHUNK, |chunk| {
        let mut misses = 0;
        let labels: Vec<ClassId> = chunk
            .iter()
            .map(|k| match table.get(k.as_ref()) {
                Some(id) => id,
                None => {
                    misses += 1;
                    table.default_target()
                }
            })
            .collect();
        (labels, misses)
    });

    let mut labels = Vec::with_capacity(raw_labels.len());
    let mut unmapped_count = 0;
    for (l, m) in parts {
        labels.extend(l);
        unmapped_count += m;
    }
    debug_assert!(labels.iter().all(|l| l.index() < NUM_CLASSES));
    RemapOutput {
        labels,
        unmapped_count,
    }
}
