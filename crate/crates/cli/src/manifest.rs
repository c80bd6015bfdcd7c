use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use inof::engine::ExperimentConfig;
use serde::{Deserialize, Serialize};

use crate::common::read_json;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const PAGERANK_FILE: &str = "pagerank.csv";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphInfo {
    pub path: PathBuf,
    pub sha256: String,
    pub n_nodes: usize,
    pub n_edges: usize,
}

/// Output file names of one slot, relative to the run directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlotFiles {
    pub slot_index: u64,
    pub summary: String,
    pub nodes: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realizations: Option<String>,
}

impl SlotFiles {
    pub fn new(slot: u64, dump_realizations: bool) -> Self {
        SlotFiles {
            slot_index: slot,
            summary: format!("slot_{slot:03}_summary.json"),
            nodes: format!("slot_{slot:03}_nodes.csv"),
            realizations: dump_realizations.then(|| format!("slot_{slot:03}_realizations.csv")),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Timings {
    pub started_unix: u64,
    pub pagerank_seconds: f64,
    pub slot_seconds: Vec<f64>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub graph: GraphInfo,
    pub config: ExperimentConfig,
    /// Requested titles/ids exactly as given, before resolution.
    pub red_requested: Vec<String>,
    pub blue_requested: Vec<String>,
    pub master_seed: u64,
    pub fr_bin_width: f64,
    pub mu_bin_width: f64,
    pub pagerank: String,
    pub slots: Vec<SlotFiles>,
    pub timings: Timings,
}

impl RunManifest {
    pub fn load(results: &Path) -> Result<Self> {
        let path = results.join(MANIFEST_FILE);
        if !path.exists() {
            bail!("{} is not a results directory (no {MANIFEST_FILE})", results.display());
        }
        read_json(&path)
    }
}
