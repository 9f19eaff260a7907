//! SemanticKITTI scan (`.bin`) and label (`.label`) files.
//!
//! A scan is N records of four little-endian `f32`s (x, y, z, remission).
//! A label file is N little-endian `u32` words: semantic id in the low 16 bits,
//! instance id in the high 16 bits.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, IoContext, Result};
use crate::model::{ClassId, LabeledCloud, Point3};

pub const SCAN_RECORD_BYTES: usize = 16;
pub const LABEL_RECORD_BYTES: usize = 4;

pub const VELODYNE_DIR: &str = "velodyne";
pub const LABELS_DIR: &str = "labels";
pub const SCAN_EXT: &str = "bin";
pub const LABEL_EXT: &str = "label";

#[inline]
pub fn pack_label(semantic: u16, instance: u16) -> u32 {
    (instance as u32) << 16 | semantic as u32
}

#[inline]
pub fn unpack_label(word: u32) -> (u16, u16) {
    ((word & 0xFFFF) as u16, (word >> 16) as u16)
}

/// Six-digit zero-padded frame stem, e.g. `000000`.
pub fn frame_stem(frame: u32) -> String {
    format!("{frame:06}")
}

/// How the reader treats semantic ids outside the unified schema.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum LabelPolicy {
    #[default]
    Strict,
    /// Keep unknown ids verbatim and count them.
    Permissive,
}

#[derive(Debug, Clone)]
pub struct ScanRead {
    pub cloud: LabeledCloud,
    /// Points whose semantic id lies outside the schema (permissive mode only).
    pub unknown_class_ids: usize,
}

pub fn write_skitti_scan(cloud: &LabeledCloud, scan_path: &Path, label_path: &Path) -> Result<()> {
    let mut scan = BufWriter::new(File::create(scan_path).at(scan_path)?);
    for p in cloud.points() {
        let mut rec = [0u8; SCAN_RECORD_BYTES];
        rec[0..4].copy_from_slice(&p.x.to_le_bytes());
        rec[4..8].copy_from_slice(&p.y.to_le_bytes());
        rec[8..12].copy_from_slice(&p.z.to_le_bytes());
        rec[12..16].copy_from_slice(&p.remission.to_le_bytes());
        scan.write_all(&rec).at(scan_path)?;
    }
    scan.flush().at(scan_path)?;

    write_label_words(
        label_path,
        cloud
            .labels()
            .iter()
            .zip(cloud.instance_ids())
            .map(|(l, i)| pack_label(l.get(), *i)),
    )
}

pub fn write_label_words(path: &Path, words: impl IntoIterator<Item = u32>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).at(path)?);
    for w in words {
        out.write_all(&w.to_le_bytes()).at(path)?;
    }
    out.flush().at(path)
}

fn read_records(path: &Path, record: usize) -> Result<Vec<u8>> {
    let bytes = fs::read(path).at(path)?;
    if bytes.len() % record != 0 {
        return Err(Error::TruncatedFile {
            path: path.to_path_buf(),
            len: bytes.len() as u64,
            record,
        });
    }
    Ok(bytes)
}

pub fn read_scan_points(path: &Path) -> Result<Vec<Point3>> {
    let bytes = read_records(path, SCAN_RECORD_BYTES)?;
    Ok(bytes
        .chunks_exact(SCAN_RECORD_BYTES)
        .map(|r| {
            let f = |o: usize| f32::from_le_bytes([r[o], r[o + 1], r[o + 2], r[o + 3]]);
            Point3 {
                x: f(0),
                y: f(4),
                z: f(8),
                remission: f(12),
            }
        })
        .collect())
}

pub fn read_label_words(path: &Path) -> Result<Vec<u32>> {
    let bytes = read_records(path, LABEL_RECORD_BYTES)?;
    Ok(bytes
        .chunks_exact(LABEL_RECORD_BYTES)
        .map(|w| u32::from_le_bytes([w[0], w[1], w[2], w[3]]))
        .collect())
}

/// Point count implied by a scan file's size, without reading it.
pub fn scan_point_count(path: &Path) -> Result<usize> {
    let len = fs::metadata(path).at(path)?.len();
    if len % SCAN_RECORD_BYTES as u64 != 0 {
        return Err(Error::TruncatedFile {
            path: path.to_path_buf(),
            len,
            record: SCAN_RECORD_BYTES,
        });
    }
    Ok((len / SCAN_RECORD_BYTES as u64) as usize)
}

/// Reads a scan/label pair, rejecting semantic ids outside the schema.
pub fn read_skitti_scan(scan_path: &Path, label_path: &Path) -> Result<LabeledCloud> {
    read_skitti_scan_with(scan_path, label_path, LabelPolicy::Strict).map(|r| r.cloud)
}

pub fn read_skitti_scan_with(
    scan_path: &Path,
    label_path: &Path,
    policy: LabelPolicy,
) -> Result<ScanRead> {
    let points = read_scan_points(scan_path)?;
    let words = read_label_words(label_path)?;
    if points.len() != words.len() {
        return Err(Error::SizeMismatch {
            scan_points: points.len(),
            labels: words.len(),
        });
    }

    let mut labels = Vec::with_capacity(words.len());
    let mut instances = Vec::with_capacity(words.len());
    let mut unknown = 0;
    for (index, w) in words.into_iter().enumerate() {
        let (sem, inst) = unpack_label(w);
        let id = ClassId::from_raw(sem);
        if !id.is_known() {
            match policy {
                LabelPolicy::Strict => {
                    return Err(Error::UnknownClassId {
                        value: sem as u32,
                        index,
                    })
                }
                LabelPolicy::Permissive => unknown += 1,
            }
        }
        labels.push(id);
        instances.push(inst);
    }
    if unknown > 0 {
        log::warn!(
            "{}: {unknown} labels outside the unified schema kept verbatim",
            label_path.display()
        );
    }

    Ok(ScanRead {
        cloud: LabeledCloud::new(points, labels, instances)?,
        unknown_class_ids: unknown,
    })
}
