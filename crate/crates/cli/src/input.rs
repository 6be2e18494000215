use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Read;
use std::path::Path;

use anyhow::{Context, Result};
use palette_core::format::{parse_graph, parse_palette};
use palette_core::{Palette, ThreeGraph};
use serde::de::DeserializeOwned;
use sha2::{Digest, Sha256};

/// Everything a run depends on, for hashing.
#[derive(Debug, Default)]
pub struct Inputs {
    files: Vec<(String, Vec<u8>)>,
    params: BTreeMap<String, String>,
}

impl Inputs {
    /// Reads `path`, or standard input for `-`.
    pub fn read(&mut self, role: &str, path: &Path) -> Result<String> {
        let bytes = if path == Path::new("-") {
            let mut buf = Vec::new();
            std::io::stdin().read_to_end(&mut buf).context("reading standard input")?;
            buf
        } else {
            std::fs::read(path).with_context(|| format!("reading {}", path.display()))?
        };
        let text = String::from_utf8(bytes.clone()).with_context(|| format!("{} is not UTF-8", path.display()))?;
        self.files.push((role.to_owned(), bytes));
        Ok(text)
    }

    pub fn palette(&mut self, role: &str, path: &Path) -> Result<Palette> {
        let text = self.read(role, path)?;
        parse_palette(&text).with_context(|| format!("{}", path.display()))
    }

    pub fn graph(&mut self, role: &str, path: &Path) -> Result<ThreeGraph> {
        let text = self.read(role, path)?;
        parse_graph(&text).with_context(|| format!("{}", path.display()))
    }

    pub fn json<T: DeserializeOwned>(&mut self, role: &str, path: &Path) -> Result<T> {
        let text = self.read(role, path)?;
        serde_json::from_str(&text).with_context(|| format!("{}", path.display()))
    }

    pub fn param(&mut self, key: &str, value: impl Display) {
        self.params.insert(key.to_owned(), value.to_string());
    }

    /// SHA-256 over the command, parameters and file contents.
    pub fn digest(&self, command: &str) -> String {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update([0]);
        for (k, v) in &self.params {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        for (role, bytes) in &self.files {
            h.update(format!("{role}:{}\n", bytes.len()).as_bytes());
            h.update(bytes);
        }
        hex::encode(h.finalize())
    }
}
