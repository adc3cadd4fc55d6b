use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct FileHash {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileHash {
    pub fn of(path: &Path) -> Option<Self> {
        let bytes = fs::read(path).ok()?;
        Some(Self {
            path: path.to_path_buf(),
            sha256: format!("{:x}", Sha256::digest(&bytes)),
        })
    }
}

/// Record of one invocation, written next to the artifacts whether the run
/// succeeded or not.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config: Option<serde_json::Value>,
    pub threads: Option<usize>,
    pub inputs: Vec<FileHash>,
    pub artifacts: Vec<FileHash>,
    pub exit_code: i32,
    pub status: String,
    pub error: Option<String>,
    pub phases_ms: BTreeMap<String, f64>,
    pub svg_skipped: Option<bool>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            argv: std::env::args().collect(),
            config: None,
            threads: None,
            inputs: Vec::new(),
            artifacts: Vec::new(),
            exit_code: 1,
            status: "error".into(),
            error: None,
            phases_ms: BTreeMap::new(),
            svg_skipped: None,
            warnings: Vec::new(),
            started: Some(Instant::now()),
        }
    }

    /// Runs `f` and records its wall time under `phase`.
    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.phases_ms
            .insert(phase.into(), t.elapsed().as_secs_f64() * 1e3);
        out
    }

    pub fn input(&mut self, path: &Path) {
        if let Some(h) = FileHash::of(path) {
            self.inputs.push(h);
        }
    }

    pub fn artifact(&mut self, path: &Path) {
        if let Some(h) = FileHash::of(path) {
            self.artifacts.push(h);
        }
    }

    pub fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        eprintln!("warning: {msg}");
        self.warnings.push(msg);
    }

    pub fn write(&mut self, out_dir: &Path) -> std::io::Result<()> {
        if let Some(t) = self.started {
            self.phases_ms
                .insert("total".into(), t.elapsed().as_secs_f64() * 1e3);
        }
        fs::create_dir_all(out_dir)?;
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        fs::write(out_dir.join("manifest.json"), text + "\n")
    }
}
