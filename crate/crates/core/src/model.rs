//! Shared domain types and the unified 20-class label table.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of classes in the unified schema.
pub const NUM_CLASSES: usize = 20;

/// Canonical class names, indexed by class id.
pub const CLASS_NAMES: [&str; NUM_CLASSES] = [
    "unassigned",
    "stairway",
    "door",
    "non exit door",
    "fire door",
    "window",
    "roof access",
    "exit sign",
    "emergency lighting",
    "smoke detector",
    "extinguisher",
    "fire alarm",
    "person",
    "AED",
    "sprinkler",
    "standpipe",
    "utility shutoffs - electric",
    "elevator",
    "hydrant",
    "gas shutoff",
];

/// One lidar return. Coordinates are meters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f32,
    pub y: f32,
    pub z: f32,
    pub remission: f32,
}

impl Point3 {
    pub fn new(x: f32, y: f32, z: f32) -> Self {
        Point3 {
            x,
            y,
            z,
            remission: 0.0,
        }
    }

    pub fn with_remission(mut self, remission: f32) -> Self {
        self.remission = remission;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn xyz_f64(&self) -> [f64; 3] {
        [self.x as f64, self.y as f64, self.z as f64]
    }

    /// Bitwise equality, so that NaN payloads and signed zeros compare exactly.
    pub fn bits_eq(&self, other: &Point3) -> bool {
        self.x.to_bits() == other.x.to_bits()
            && self.y.to_bits() == other.y.to_bits()
            && self.z.to_bits() == other.z.to_bits()
            && self.remission.to_bits() == other.remission.to_bits()
    }
}

/// Semantic class identifier.
///
/// Values produced by [`ClassId::new`] are always inside the unified schema.
/// [`ClassId::from_raw`] exists for the permissive reader, which keeps
/// out-of-schema values verbatim; [`ClassId::is_known`] tells them apart.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct ClassId(u16);

impl ClassId {
    pub const UNASSIGNED: ClassId = ClassId(0);

    pub fn new(id: u16) -> Result<Self> {
        if (id as usize) < NUM_CLASSES {
            Ok(ClassId(id))
        } else {
            Err(Error::InvalidClassId(id as u32))
        }
    }

    pub const fn from_raw(id: u16) -> Self {
        ClassId(id)
    }

    pub const fn get(self) -> u16 {
        self.0
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }

    pub const fn is_known(self) -> bool {
        (self.0 as usize) < NUM_CLASSES
    }

    pub fn name(self) -> Option<&'static str> {
        CLASS_NAMES.get(self.index()).copied()
    }

    pub fn all() -> impl Iterator<Item = ClassId> {
        (0..NUM_CLASSES as u16).map(ClassId)
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Sequence folder identifier (`00`..`99`, then `100`..`999`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct SequenceId(u16);

impl SequenceId {
    pub const MAX: u16 = 999;

    pub fn new(index: u16) -> Result<Self> {
        if index <= Self::MAX {
            Ok(SequenceId(index))
        } else {
            Err(Error::InvalidSequenceId(index.to_string()))
        }
    }

    pub const fn index(self) -> u16 {
        self.0
    }

    pub fn render(self) -> String {
        self.to_string()
    }

    /// Accepts one to three decimal digits, so both `7` and `07` name sequence 7.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.is_empty() || t.len() > 3 || !t.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::InvalidSequenceId(s.to_string()));
        }
        let index: u16 = t
            .parse()
            .map_err(|_| Error::InvalidSequenceId(s.to_string()))?;
        SequenceId::new(index)
    }
}

impl fmt::Display for SequenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 <= 99 {
            write!(f, "{:02}", self.0)
        } else {
            write!(f, "{:03}", self.0)
        }
    }
}

impl FromStr for SequenceId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SequenceId::parse(s)
    }
}

impl From<SequenceId> for String {
    fn from(s: SequenceId) -> String {
        s.render()
    }
}

impl TryFrom<String> for SequenceId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        SequenceId::parse(&s)
    }
}

/// Points with one semantic label and one instance id each, in matching order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledCloud {
    points: Vec<Point3>,
    labels: Vec<ClassId>,
    instance_ids: Vec<u16>,
}

impl LabeledCloud {
    pub fn new(points: Vec<Point3>, labels: Vec<ClassId>, instance_ids: Vec<u16>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::LengthMismatch {
                what: "points vs labels",
                left: points.len(),
                right: labels.len(),
            });
        }
        if points.len() != instance_ids.len() {
            return Err(Error::LengthMismatch {
                what: "points vs instance ids",
                left: points.len(),
                right: instance_ids.len(),
            });
        }
        Ok(LabeledCloud {
            points,
            labels,
            instance_ids,
        })
    }

    /// Builds a cloud whose instance ids are all zero.
    pub fn from_labels(points: Vec<Point3>, labels: Vec<ClassId>) -> Result<Self> {
        let n = points.len();
        LabeledCloud::new(points, labels, vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn labels(&self) -> &[ClassId] {
        &self.labels
    }

    pub fn instance_ids(&self) -> &[u16] {
        &self.instance_ids
    }

    /// Replaces the semantic labels, keeping points and instances.
    pub fn with_labels(self, labels: Vec<ClassId>) -> Result<Self> {
        LabeledCloud::new(self.points, labels, self.instance_ids)
    }

    /// Appends `other` after `self`, preserving both orders.
    pub fn extend(&mut self, other: LabeledCloud) {
        self.points.extend(other.points);
        self.labels.extend(other.labels);
        self.instance_ids.extend(other.instance_ids);
    }

    pub fn into_parts(self) -> (Vec<Point3>, Vec<ClassId>, Vec<u16>) {
        (self.points, self.labels, self.instance_ids)
    }

    /// Field-for-field comparison with floats compared by bit pattern.
    pub fn bits_eq(&self, other: &LabeledCloud) -> bool {
        self.len() == other.len()
            && self.labels == other.labels
            && self.instance_ids == other.instance_ids
            && self
                .points
                .iter()
                .zip(&other.points)
                .all(|(a, b)| a.bits_eq(b))
    }
}

/// The unified class table plus any per-source remap rules attached to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSchema {
    classes: Vec<(ClassId, String)>,
    remap_rules: BTreeMap<String, BTreeMap<String, ClassId>>,
}

impl LabelSchema {
    pub fn classes(&self) -> &[(ClassId, String)] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn contains(&self, id: ClassId) -> bool {
        self.classes.iter().any(|(c, _)| *c == id)
    }

    pub fn name(&self, id: ClassId) -> Option<&str> {
        self.classes
            .iter()
            .find(|(c, _)| *c == id)
            .map(|(_, n)| n.as_str())
    }

    pub fn id_of(&self, name: &str) -> Option<ClassId> {
        self.classes
            .iter()
            .find(|(_, n)| n.eq_ignore_ascii_case(name))
            .map(|(c, _)| *c)
    }

    pub fn remap_rules(&self) -> &BTreeMap<String, BTreeMap<String, ClassId>> {
        &self.remap_rules
    }

    /// Registers the rules of one source dataset, replacing any previous set.
    pub fn insert_rules(
        &mut self,
        source: impl Into<String>,
        rules: BTreeMap<String, ClassId>,
    ) -> Result<()> {
        if let Some(bad) = rules.values().find(|id| !self.contains(**id)) {
            return Err(Error::InvalidClassId(bad.get() as u32));
        }
        self.remap_rules.insert(source.into(), rules);
        Ok(())
    }
}

/// The 20-class table with ids 0..19 in canonical order and no remap rules.
pub fn unified_schema() -> LabelSchema {
    LabelSchema {
        classes: ClassId::all()
            .zip(CLASS_NAMES)
            .map(|(id, name)| (id, name.to_string()))
            .collect(),
        remap_rules: BTreeMap::new(),
    }
}
