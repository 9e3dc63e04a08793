use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use sada_core::{Error, Result, TrainConfig};
use serde::{Deserialize, Serialize};

pub const MANIFEST: &str = "manifest.json";
pub const COMPLETION: &str = "completed.json";
pub const CONFIG: &str = "config.txt";

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Written once, before the first training step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub recipe: String,
    pub aug_pool: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub code_version: String,
    pub started_unix: u64,
    /// Always `None` in the manifest itself; the end time is recorded in
    /// `completed.json`.
    pub ended_unix: Option<u64>,
    pub artifacts: BTreeMap<String, String>,
    pub resumed_from: Option<String>,
}

/// Written when a run reaches its last step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub ended_unix: u64,
    pub steps: u64,
    pub episodes: u64,
    pub updates: u64,
}

impl RunManifest {
    pub fn new(cfg: &TrainConfig, resumed_from: Option<String>) -> Self {
        let config = TrainConfig::KEYS
            .iter()
            .map(|k| (k.to_string(), cfg.get(k).unwrap_or_default()))
            .collect();
        let artifacts = [
            ("config", CONFIG),
            ("train_metrics", "train.csv"),
            ("eval_metrics", "eval.csv"),
            ("checkpoints", "checkpoints"),
            ("reports", "reports"),
            ("completion", COMPLETION),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        Self {
            recipe: cfg.recipe.to_string(),
            aug_pool: cfg.augs.name().to_string(),
            seed: cfg.seed,
            config,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: unix_now(),
            ended_unix: None,
            artifacts,
            resumed_from,
        }
    }

    /// Writes the manifest; refuses to overwrite an existing one.
    pub fn write_new(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST);
        if path.exists() {
            return Err(Error::validation(
                "out",
                format!("{} already holds a run manifest; pick a new directory or pass --resume", dir.display()),
            ));
        }
        std::fs::create_dir_all(dir)?;
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::validation(path.display().to_string(), format!("cannot read manifest: {e}")))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::validation(path.display().to_string(), format!("corrupt manifest: {e}")))
    }
}
