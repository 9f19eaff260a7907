//! SemanticKITTI folder layout, split configurations, label distributions and
//! the training-config manifest.

mod distribution;
mod layout;
mod splits;
mod train_config;

pub use distribution::{
    compute_distribution, compute_distribution_with, DistributionRow, DistributionTable,
};
pub use layout::{
    build_sequence, label_path, list_frames, list_sequences, scan_path, sequence_dir,
    DatasetManifest, Frame, ManifestEntry, MANIFEST_FILE, SEQUENCES_DIR,
};
pub use splits::{
    parse_sequence_list, published_splits, read_split_files, split_dir, split_discrepancies,
    write_split_files, Partition, SplitConfig, SplitDiscrepancy, SplitSpec, SPLITS_DIR,
};
pub use train_config::{
    emit_training_config, read_training_config, Hyperparameters, TrainingConfig,
};
