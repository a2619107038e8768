//! Atomic file output and the per-run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

/// Write atomically: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Metadata emitted alongside every command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    /// Verbatim contents of the configuration file.
    pub config_verbatim: String,
    pub outputs: Vec<String>,
    pub duration_ms: f64,
    pub library_version: String,
}

pub struct ManifestBuilder {
    command: String,
    argv: Vec<String>,
    config_verbatim: String,
    outputs: Vec<PathBuf>,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str, config_verbatim: String) -> Self {
        Self {
            command: command.to_string(),
            argv: std::env::args().collect(),
            config_verbatim,
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn emit(&mut self, path: &Path, contents: &str) -> anyhow::Result<()> {
        write_atomic(path, contents)?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    pub fn finish(self, out_dir: &Path) -> anyhow::Result<()> {
        let manifest = RunManifest {
            command: self.command.clone(),
            argv: self.argv,
            config_verbatim: self.config_verbatim,
            outputs: self
                .outputs
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
            duration_ms: self.started.elapsed().as_secs_f64() * 1e3,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
        };
        let path = out_dir.join(format!("manifest_{}.json", self.command));
        write_atomic(&path, &serde_json::to_string_pretty(&manifest)?)
    }
}

/// Worker-count cap from SQUIDMODES_THREADS (at least 1).
pub fn thread_cap() -> usize {
    std::env::var("SQUIDMODES_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(usize::from)
                .unwrap_or(1)
        })
}

/// Run one closure per item on up to `cap` scoped worker threads, preserving
/// input order in the result.
pub fn parallel_map<T, R, F>(items: Vec<T>, cap: usize, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync,
{
    let cap = cap.max(1);
    let n = items.len();
    let mut slots: Vec<Option<R>> = (0..n).map(|_| None).collect();
    let work: Vec<(usize, T)> = items.into_iter().enumerate().collect();
    let queue = std::sync::Mutex::new(work);
    let results = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..cap.min(n.max(1)) {
            scope.spawn(|| loop {
                let item = queue.lock().unwrap().pop();
                match item {
                    Some((idx, t)) => {
                        let r = f(t);
                        results.lock().unwrap()[idx] = Some(r);
                    }
                    None => break,
                }
            });
        }
    });
    slots.into_iter().map(|s| s.unwrap()).collect()
}
