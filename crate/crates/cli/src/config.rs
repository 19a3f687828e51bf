//! Effective-parameter record written next to every run's artifacts.
//! Replaying a persisted config through `pipeline --config` reproduces the
//! artifacts byte for byte.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub layout: String,
    pub keep_headers: bool,
    pub split_ratio: f64,
    pub stoplist: Option<PathBuf>,
    pub vocab_size: usize,
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub fast_commit: bool,
    pub max_epochs: usize,
    pub pv_dim: usize,
    pub window: usize,
    pub pv_mode: String,
    pub pv_epochs: usize,
    pub learning_rate: f64,
    pub min_count: u64,
    pub infer_epochs: usize,
    pub knn_k: usize,
    pub rho_grid: String,
    pub seed: u64,
    pub deterministic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            layout: "flat".into(),
            keep_headers: false,
            split_ratio: 0.6,
            stoplist: None,
            vocab_size: 1000,
            alpha: 0.2,
            beta: 0.4,
            rho: 0.8,
            fast_commit: true,
            max_epochs: 50,
            pv_dim: 50,
            window: 4,
            pv_mode: "dm".into(),
            pv_epochs: 20,
            learning_rate: 0.025,
            min_count: 2,
            infer_epochs: 20,
            knn_k: 5,
            rho_grid: "0.1:0.9:0.1".into(),
            seed: 1,
            deterministic: true,
        }
    }
}

impl RunConfig {
    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Parses an inclusive `start:stop:step` grid; `stop` counts as reached
/// within 1e-9.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid must be start:stop:step, got {spec:?}"));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|e| format!("bad grid number {p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 || stop < start {
        return Err(format!("grid bounds must satisfy start <= stop, step > 0, got {spec:?}"));
    }
    let mut values = Vec::new();
    let mut i = 0usize;
    loop {
        let v = start + i as f64 * step;
        if v > stop + 1e-9 {
            break;
        }
        values.push(v.min(1.0));
        i += 1;
    }
    Ok(values)
}
