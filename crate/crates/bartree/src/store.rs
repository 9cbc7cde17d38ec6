//! Persistent registry of harvest targets.
//!
//! One JSON file holds every registered target: its configuration, the
//! current fingerprint, per-attribute anchor paths and a short history of
//! replaced fingerprints. Writes go through a temp file and rename, so a
//! crash mid-save leaves the old registry intact. The store is treated as
//! single-writer; records handed out are snapshots.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bar::{BarParams, Fingerprint};
use crate::detect::CompareMode;
use crate::doctree::AnchorStep;
use crate::lexer::TagClassConfig;
use crate::roi;

pub const STORE_VERSION: u32 = 1;
/// How many replaced fingerprints a record keeps for audit.
pub const HISTORY_LIMIT: usize = 5;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("cannot access store {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt store {path}: {detail}")]
    Corrupt { path: String, detail: String },
}

/// One labeled attribute inside the region, as supplied at registration:
/// the label names the extracted field, the text is the attribute's
/// rendered content on the training page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub label: String,
    pub text: String,
}

/// Everything needed to (re)register and recheck one target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetConfig {
    pub target_id: String,
    pub url: String,
    /// Where the region text was read from, kept for provenance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roi_file: Option<PathBuf>,
    /// The region's rendered text. May be empty in a config file when
    /// `roi_file` is set; [`TargetConfig::load_roi_text`] resolves it.
    #[serde(default)]
    pub roi_text: String,
    #[serde(default)]
    pub attributes: Vec<AttributeSpec>,
    /// Which occurrence of the region text to lock onto when the page
    /// repeats it (0-based).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occurrence: Option<usize>,
    #[serde(default = "default_mode")]
    pub mode: CompareMode,
    /// Bar parameters; `None` means derive defaults from the page depth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<BarParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag_class_overrides: Option<TagClassConfig>,
}

fn default_mode() -> CompareMode {
    CompareMode::FullWithDelta
}

impl TargetConfig {
    pub fn new(target_id: &str, url: &str, roi_text: &str) -> Self {
        TargetConfig {
            target_id: target_id.to_string(),
            url: url.to_string(),
            roi_file: None,
            roi_text: roi_text.to_string(),
            attributes: Vec::new(),
            occurrence: None,
            mode: default_mode(),
            params: None,
            tag_class_overrides: None,
        }
    }

    /// Fills `roi_text` from `roi_file` if the text is still empty.
    /// Returns true when the file was read.
    pub fn load_roi_text(&mut self) -> std::io::Result<bool> {
        if !self.roi_text.is_empty() {
            return Ok(false);
        }
        match &self.roi_file {
            Some(path) => {
                self.roi_text = fs::read_to_string(path)?;
                Ok(true)
            }
            None => Ok(false),
        }
    }
}

/// A registered target: config, current fingerprint, extraction anchors,
/// bounded audit trail of replaced fingerprints (oldest first).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetRecord {
    pub config: TargetConfig,
    pub fingerprint: Fingerprint,
    #[serde(default)]
    pub attribute_anchors: BTreeMap<String, Vec<AnchorStep>>,
    #[serde(default)]
    pub history: Vec<Fingerprint>,
}

impl TargetRecord {
    /// Retires the given fingerprint into history, keeping at most
    /// [`HISTORY_LIMIT`] entries (the oldest fall off).
    pub fn push_history(&mut self, old: Fingerprint) {
        self.history.push(old);
        if self.history.len() > HISTORY_LIMIT {
            let excess = self.history.len() - HISTORY_LIMIT;
            self.history.drain(0..excess);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registry {
    pub version: u32,
    pub targets: BTreeMap<String, TargetRecord>,
}

impl Default for Registry {
    fn default() -> Self {
        Registry { version: STORE_VERSION, targets: BTreeMap::new() }
    }
}

pub fn store_load(path: &Path) -> Result<Registry, StoreError> {
    let shown = path.display().to_string();
    let raw = fs::read_to_string(path)
        .map_err(|source| StoreError::Io { path: shown.clone(), source })?;
    if raw.trim().is_empty() {
        return Err(StoreError::Corrupt { path: shown, detail: "file is empty".into() });
    }
    let registry: Registry = serde_json::from_str(&raw)
        .map_err(|e| StoreError::Corrupt { path: shown.clone(), detail: e.to_string() })?;
    if registry.version != STORE_VERSION {
        return Err(StoreError::Corrupt {
            path: shown,
            detail: format!(
                "unsupported schema version {}, expected {}",
                registry.version, STORE_VERSION
            ),
        });
    }
    for (id, record) in &registry.targets {
        if &record.config.target_id != id {
            return Err(StoreError::Corrupt {
                path: shown,
                detail: format!(
                    "target {id:?} holds config for {:?}",
                    record.config.target_id
                ),
            });
        }
        if roi::digest(&record.config.roi_text) != record.fingerprint.roi_digest {
            return Err(StoreError::Corrupt {
                path: shown,
                detail: format!("target {id:?}: fingerprint digest does not match its region text"),
            });
        }
    }
    Ok(registry)
}

/// Serializes the registry and replaces `path` atomically (write to a
/// sibling temp file, then rename).
pub fn store_save(registry: &Registry, path: &Path) -> Result<(), StoreError> {
    let shown = path.display().to_string();
    let json =
        serde_json::to_string_pretty(registry).expect("registry serialization cannot fail");
    let mut tmp_name = path.as_os_str().to_owned();
    tmp_name.push(".tmp");
    let tmp = PathBuf::from(tmp_name);
    fs::write(&tmp, json.as_bytes())
        .map_err(|source| StoreError::Io { path: tmp.display().to_string(), source })?;
    fs::rename(&tmp, path).map_err(|source| StoreError::Io { path: shown, source })
}
