//! Run directories and their manifests.
//!
//! Every subcommand writes into one directory and finishes by writing
//! `manifest-<command>.txt`: the command, crate and schema versions, seed, a hash of the
//! canonical config, the config itself and sha256 digests of every input and
//! output file. Nothing time- or host-dependent goes in, so identical configs
//! give identical manifests.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use emergence_core::config::Config;
use emergence_core::SCHEMA_VERSION;

/// Several subcommands may share a run directory, so each gets its own
/// manifest.
pub fn manifest_name(command: &str) -> String {
    format!("manifest-{command}.txt")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct RunDir {
    root: PathBuf,
    inputs: Vec<(String, String)>,
    outputs: Vec<(String, String)>,
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)
            .with_context(|| format!("creating run directory {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    /// A path inside the run directory.
    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Reads an input file and records its digest. Relative names resolve
    /// against the run directory.
    pub fn read_input(&mut self, name: &str) -> Result<Vec<u8>> {
        let path = self.path(name);
        let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push((name.to_string(), sha256_hex(&bytes)));
        Ok(bytes)
    }

    /// Like `read_input` for a path given on the command line, which resolves
    /// against the working directory.
    pub fn read_external(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs
            .push((path.display().to_string(), sha256_hex(&bytes)));
        Ok(bytes)
    }

    /// Writes an output produced by `fill` and records its digest.
    pub fn write_output(
        &mut self,
        name: &str,
        fill: impl FnOnce(&mut dyn Write) -> Result<()>,
    ) -> Result<()> {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        let path = self.path(name);
        let mut w = BufWriter::new(
            File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        );
        w.write_all(&buf)?;
        w.flush()?;
        self.outputs.push((name.to_string(), sha256_hex(&buf)));
        Ok(())
    }

    /// Writes the manifest and returns its path.
    pub fn finish(self, command: &str, config: &Config, seed: u64) -> Result<PathBuf> {
        let canonical = config.to_string();
        let mut m = String::new();
        m.push_str(&format!("# schema=manifest version={SCHEMA_VERSION}\n"));
        m.push_str(&format!("command = {command}\n"));
        m.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
        m.push_str(&format!("seed = {seed}\n"));
        m.push_str(&format!(
            "config_sha256 = {}\n",
            sha256_hex(canonical.as_bytes())
        ));
        m.push_str("[config]\n");
        m.push_str(&canonical);
        for (section, files) in [("inputs", &self.inputs), ("outputs", &self.outputs)] {
            m.push_str(&format!("[{section}]\n"));
            for (name, digest) in files {
                m.push_str(&format!("{digest}  {name}\n"));
            }
        }
        let path = self.path(&manifest_name(command));
        fs::write(&path, m).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
