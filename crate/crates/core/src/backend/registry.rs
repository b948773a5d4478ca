//! Append-only adapter registry, optionally persisted as a JSON object
//! mapping id → entry.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{AdapterConfig, AdapterKind, AdapterRef, AdapterStatus};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub kind: AdapterKind,
    pub config: AdapterConfig,
    pub status: AdapterStatus,
    /// Unix seconds.
    pub created_at: u64,
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub options: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Default)]
pub struct Registry {
    path: Option<PathBuf>,
    entries: BTreeMap<String, RegistryEntry>,
}

impl Registry {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or starts) the registry stored at `path`.
    pub fn open(path: &Path) -> Result<Self> {
        let entries = match std::fs::read(path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(Error::io(path, e)),
        };
        Ok(Self {
            path: Some(path.to_owned()),
            entries,
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, id: &str) -> Option<&RegistryEntry> {
        self.entries.get(id)
    }

    pub fn adapter_ref(&self, id: &str) -> Option<AdapterRef> {
        self.get(id).map(|e| AdapterRef {
            id: id.to_owned(),
            kind: e.kind,
            config: e.config,
            status: e.status,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &RegistryEntry)> {
        self.entries.iter()
    }

    /// Records `entry` unless `id` is already known; existing entries win so
    /// ready adapters never change. Returns the stored entry.
    pub fn insert(&mut self, id: &str, entry: RegistryEntry) -> Result<&RegistryEntry> {
        if !self.entries.contains_key(id) {
            self.entries.insert(id.to_owned(), entry);
            self.save()?;
        }
        Ok(&self.entries[id])
    }

    /// Moves a pending adapter to ready or failed; other transitions are
    /// refused.
    pub fn resolve(&mut self, id: &str, status: AdapterStatus) -> Result<()> {
        let entry = self
            .entries
            .get_mut(id)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown adapter {id}")))?;
        if entry.status != AdapterStatus::Pending || status == AdapterStatus::Pending {
            return Err(Error::InvalidParameter(format!(
                "adapter {id} cannot go from {} to {status}",
                entry.status
            )));
        }
        entry.status = status;
        self.save()
    }

    fn save(&self) -> Result<()> {
        if let Some(path) = &self.path {
            let mut json = serde_json::to_vec_pretty(&self.entries)?;
            json.push(b'\n');
            write_atomic(path, &json)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(status: AdapterStatus) -> RegistryEntry {
        RegistryEntry {
            kind: AdapterKind::Avat,
            config: AdapterConfig::default(),
            status,
            created_at: 1,
            options: Default::default(),
        }
    }

    #[test]
    fn persists_and_keeps_first_entry() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("registry.json");
        let mut r = Registry::open(&path).unwrap();
        r.insert("a", entry(AdapterStatus::Ready)).unwrap();
        let again = r.insert("a", entry(AdapterStatus::Failed)).unwrap();
        assert_eq!(again.status, AdapterStatus::Ready);

        let reopened = Registry::open(&path).unwrap();
        assert_eq!(reopened.len(), 1);
        assert_eq!(
            reopened.adapter_ref("a").unwrap().status,
            AdapterStatus::Ready
        );
        let raw: serde_json::Value =
            serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
        assert_eq!(raw["a"]["config"]["rank"], 16);
        assert_eq!(raw["a"]["kind"], "avat");
    }

    #[test]
    fn status_moves_once() {
        let mut r = Registry::in_memory();
        r.insert("p", entry(AdapterStatus::Pending)).unwrap();
        r.resolve("p", AdapterStatus::Ready).unwrap();
        assert!(r.resolve("p", AdapterStatus::Failed).is_err());
    }
}
