//! Reading source scans and reading/writing SemanticKITTI files.

mod skitti;
mod source;

pub use skitti::{
    frame_stem, pack_label, read_label_words, read_scan_points, read_skitti_scan,
    read_skitti_scan_with, scan_point_count, unpack_label, write_label_words, write_skitti_scan,
    LabelPolicy, ScanRead, LABELS_DIR, LABEL_EXT, LABEL_RECORD_BYTES, SCAN_EXT, SCAN_RECORD_BYTES,
    VELODYNE_DIR,
};
pub use source::{parse_source, parse_source_str, ParsedSource, QcReport, SourceFormat};
