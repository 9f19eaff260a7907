#![allow(dead_code)]

use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pccforge_core::synth::{synthetic_room, to_xyzl_text, ENFIELD_PROFILE, MEMPHIS_PROFILE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pccforge"));
    c.env("PCCFORGE_LOG", "error");
    c
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "pccforge {args:?} failed with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

pub fn validate(schema_file: &str, doc: &serde_json::Value) {
    let text = fs::read_to_string(schema_dir().join(schema_file)).unwrap();
    let schema: serde_json::Value = serde_json::from_str(&text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema_file}: {errors:?}\n{doc}");
}

pub fn json_stdout(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Source vocabulary used by the synthetic corpora, one key per unified id.
pub fn vocab_key(id: u16) -> String {
    format!("src_class_{id:02}")
}

/// Writes `mapping.csv` for [`vocab_key`] plus `n` synthetic xyzl scans
/// under `dir`; returns the scan paths.
pub fn synthetic_sources(dir: &Path, n: usize, seed: u64, sizes: Range<usize>) -> Vec<PathBuf> {
    let mut csv = String::from("source_dataset,source_key,target_id\n");
    for id in 0..20u16 {
        csv.push_str(&format!("synthetic,{},{id}\n", vocab_key(id)));
    }
    fs::write(dir.join("mapping.csv"), csv).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let points = rng.random_range(sizes.clone());
            let profile = if i % 2 == 0 {
                &ENFIELD_PROFILE
            } else {
                &MEMPHIS_PROFILE
            };
            let cloud = synthetic_room(&mut rng, points, profile);
            let keys: Vec<String> = cloud.labels().iter().map(|l| vocab_key(l.get())).collect();
            let path = dir.join(format!("scan_{i:02}.txt"));
            fs::write(&path, to_xyzl_text(&cloud, &keys)).unwrap();
            path
        })
        .collect()
}
