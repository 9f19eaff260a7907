use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};
use crate::io::{
    frame_stem, scan_point_count, write_skitti_scan, LABELS_DIR, LABEL_EXT, SCAN_EXT, VELODYNE_DIR,
};
use crate::model::{LabeledCloud, SequenceId};

pub const SEQUENCES_DIR: &str = "sequences";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sequence_dir(root: &Path, seq: SequenceId) -> PathBuf {
    root.join(SEQUENCES_DIR).join(seq.render())
}

pub fn scan_path(root: &Path, seq: SequenceId, frame: u32) -> PathBuf {
    sequence_dir(root, seq)
        .join(VELODYNE_DIR)
        .join(format!("{}.{SCAN_EXT}", frame_stem(frame)))
}

pub fn label_path(root: &Path, seq: SequenceId, frame: u32) -> PathBuf {
    sequence_dir(root, seq)
        .join(LABELS_DIR)
        .join(format!("{}.{LABEL_EXT}", frame_stem(frame)))
}

/// One frame's file pair inside a sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub stem: String,
    pub scan: PathBuf,
    pub label: PathBuf,
}

/// Frames of a sequence, sorted by stem. Every scan needs a matching label file.
pub fn list_frames(root: &Path, seq: SequenceId) -> Result<Vec<Frame>> {
    let dir = sequence_dir(root, seq);
    if !dir.is_dir() {
        return Err(Error::MissingSequence(seq.render()));
    }
    let velodyne = dir.join(VELODYNE_DIR);
    let labels = dir.join(LABELS_DIR);
    let mut frames = Vec::new();
    for entry in fs::read_dir(&velodyne).at(&velodyne)? {
        let path = entry.at(&velodyne)?.path();
        if path.extension().and_then(|e| e.to_str()) != Some(SCAN_EXT) {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        let label = labels.join(format!("{stem}.{LABEL_EXT}"));
        if !label.is_file() {
            return Err(Error::io(
                &label,
                std::io::Error::new(std::io::ErrorKind::NotFound, "label file missing for scan"),
            ));
        }
        frames.push(Frame {
            stem: stem.to_string(),
            scan: path,
            label,
        });
    }
    frames.sort_by(|a, b| a.stem.cmp(&b.stem));
    Ok(frames)
}

/// Sequence ids found under `<root>/sequences`, ascending.
pub fn list_sequences(root: &Path) -> Result<Vec<SequenceId>> {
    let dir = root.join(SEQUENCES_DIR);
    let mut out = Vec::new();
    for entry in fs::read_dir(&dir).at(&dir)? {
        let entry = entry.at(&dir)?;
        if !entry.file_type().at(&dir)?.is_dir() {
            continue;
        }
        if let Some(seq) = entry
            .file_name()
            .to_str()
            .and_then(|n| SequenceId::parse(n).ok())
        {
            if entry.file_name().to_str() == Some(seq.render().as_str()) {
                out.push(seq);
            }
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub sequence: SequenceId,
    pub source_dataset: String,
    pub frame_count: usize,
    pub point_count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    #[serde(skip)]
    pub root: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DatasetManifest {
            root: root.into(),
            entries: Vec::new(),
        }
    }

    /// Inserts or replaces the entry for `entry.sequence`, keeping entries sorted.
    pub fn upsert(&mut self, entry: ManifestEntry) {
        match self
            .entries
            .binary_search_by(|e| e.sequence.cmp(&entry.sequence))
        {
            Ok(i) => self.entries[i] = entry,
            Err(i) => self.entries.insert(i, entry),
        }
    }

    pub fn total_points(&self) -> usize {
        self.entries.iter().map(|e| e.point_count).sum()
    }

    /// Loads `<root>/manifest.json`, or an empty manifest if there is none.
    pub fn load(root: &Path) -> Result<Self> {
        let path = root.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(DatasetManifest::new(root));
        }
        let text = fs::read_to_string(&path).at(&path)?;
        let mut m: DatasetManifest =
            serde_json::from_str(&text).map_err(|e| Error::MalformedRecord {
                line: e.line(),
                message: format!("{}: {e}", path.display()),
            })?;
        m.root = root.to_path_buf();
        Ok(m)
    }

    /// Writes `<root>/manifest.json`. The root itself is not serialized so the
    /// file stays identical wherever the dataset lives.
    pub fn save(&self) -> Result<()> {
        let path = self.root.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&path, text + "\n").at(&path)
    }

    /// Rebuilds frame and point counts from the files on disk. Source names
    /// come from `known` where available.
    pub fn scan(root: &Path, known: Option<&DatasetManifest>) -> Result<Self> {
        let mut m = DatasetManifest::new(root);
        for seq in list_sequences(root)? {
            let frames = list_frames(root, seq)?;
            let mut points = 0;
            for f in &frames {
                points += scan_point_count(&f.scan)?;
            }
            let source_dataset = known
                .and_then(|k| k.entries.iter().find(|e| e.sequence == seq))
                .map(|e| e.source_dataset.clone())
                .unwrap_or_default();
            m.entries.push(ManifestEntry {
                sequence: seq,
                source_dataset,
                frame_count: frames.len(),
                point_count: points,
            });
        }
        Ok(m)
    }
}

/// Writes `cloud` as frame 0 of a new sequence under `root`.
pub fn build_sequence(
    cloud: &LabeledCloud,
    root: &Path,
    seq: SequenceId,
    source_dataset: &str,
) -> Result<ManifestEntry> {
    let dir = sequence_dir(root, seq);
    let velodyne = dir.join(VELODYNE_DIR);
    let labels = dir.join(LABELS_DIR);
    let populated =
        |d: &Path| -> Result<bool> { Ok(d.is_dir() && fs::read_dir(d).at(d)?.next().is_some()) };
    if populated(&velodyne)? || populated(&labels)? {
        return Err(Error::DuplicateSequence(seq.render()));
    }
    fs::create_dir_all(&velodyne).at(&velodyne)?;
    fs::create_dir_all(&labels).at(&labels)?;
    write_skitti_scan(cloud, &scan_path(root, seq, 0), &label_path(root, seq, 0))?;
    Ok(ManifestEntry {
        sequence: seq,
        source_dataset: source_dataset.to_string(),
        frame_count: 1,
        point_count: cloud.len(),
    })
}
