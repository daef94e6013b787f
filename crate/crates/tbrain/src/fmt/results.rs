//! Result tables, run manifests and training logs.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::training::TrainLog;

use super::{fmt_f64, write_text};

/// One evaluation row: task name, cutoff, recall.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub task: String,
    pub k: usize,
    pub recall: f64,
}

pub fn results_to_string(rows: &[ResultRow]) -> String {
    let mut out = String::from("task\tk\trecall\n");
    for row in rows {
        out.push_str(&format!("{}\t{}\t{}\n", row.task, row.k, fmt_f64(row.recall)));
    }
    out
}

pub fn save_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    write_text(path, &results_to_string(rows))
}

/// Machine-readable record of an evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// SHA-256 of the run configuration document.
    pub config_hash: String,
    pub seed: u64,
    /// SHA-256 of the model file evaluated.
    pub model_digest: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn save_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    write_text(path, &text)
}

pub fn train_log_to_string(log: &TrainLog) -> String {
    let mut out = String::from("epoch\tmode\tmean_cost\theldout_cost\n");
    for row in &log.rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            row.epoch,
            row.mode.as_str(),
            fmt_f64(row.mean_cost),
            fmt_f64(row.heldout_cost)
        ));
    }
    out
}

pub fn save_train_log(path: &Path, log: &TrainLog) -> Result<()> {
    write_text(path, &train_log_to_string(log))
}
