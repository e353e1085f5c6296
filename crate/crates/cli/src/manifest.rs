//! Run manifests: what a stage read, how it was configured and what it
//! produced. Manifests carry no timestamps, so identical runs write
//! identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct FileRef {
    pub path: String,
    pub bytes: u64,
}

impl FileRef {
    pub fn of(path: &Path) -> FileRef {
        FileRef {
            path: path.display().to_string(),
            bytes: fs::metadata(path).map_or(0, |m| m.len()),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub stage: String,
    pub inputs: BTreeMap<String, FileRef>,
    pub config: serde_json::Value,
    pub counts: BTreeMap<String, u64>,
    pub output: FileRef,
}

impl Manifest {
    pub fn new(stage: &str, config: &impl Serialize) -> Manifest {
        Manifest {
            stage: stage.to_string(),
            inputs: BTreeMap::new(),
            config: serde_json::to_value(config).expect("config serializes"),
            counts: BTreeMap::new(),
            output: FileRef {
                path: String::new(),
                bytes: 0,
            },
        }
    }

    pub fn input(mut self, name: &str, path: &Path) -> Manifest {
        self.inputs.insert(name.to_string(), FileRef::of(path));
        self
    }

    pub fn count(mut self, name: &str, n: usize) -> Manifest {
        self.counts.insert(name.to_string(), n as u64);
        self
    }

    /// Records `output` and writes the manifest next to it.
    pub fn write(mut self, output: &Path) -> anyhow::Result<PathBuf> {
        self.output = FileRef::of(output);
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        let mut text = serde_json::to_string_pretty(&self)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
