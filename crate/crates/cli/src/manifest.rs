use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Provenance record written next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    /// Wall-clock time per phase, in execution order.
    pub timings: Vec<Timing>,
    #[serde(skip)]
    clock: Option<(String, Instant)>,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub phase: String,
    pub seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(command: &str, config_bytes: &[u8], seed: Option<u64>) -> Self {
        Self {
            tool: env!("CARGO_BIN_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_hash: sha256_hex(config_bytes),
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings: Vec::new(),
            clock: None,
        }
    }

    /// Starts timing `phase`, closing the previous one.
    pub fn phase(&mut self, phase: &str) {
        self.finish_phase();
        self.clock = Some((phase.to_string(), Instant::now()));
    }

    fn finish_phase(&mut self) {
        if let Some((name, start)) = self.clock.take() {
            self.timings.push(Timing {
                phase: name,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
    }

    pub fn input(&mut self, path: impl Into<PathBuf>) {
        self.inputs.push(path.into());
    }

    pub fn output(&mut self, path: impl Into<PathBuf>) {
        self.outputs.push(path.into());
    }

    pub fn render(&mut self) -> String {
        self.finish_phase();
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn write(&mut self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.json");
        let text = self.render();
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    /// Writes into `dir` when given, otherwise prints to stderr unless quiet.
    pub fn emit(&mut self, dir: Option<&Path>, quiet: bool) -> Result<()> {
        match dir {
            Some(d) => self.write(d),
            None => {
                let text = self.render();
                if !quiet {
                    eprintln!("{text}");
                }
                Ok(())
            }
        }
    }
}
