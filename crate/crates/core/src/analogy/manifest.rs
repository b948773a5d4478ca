use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::grid::MIN_PANEL_SIZE;
use super::pairs::PairMode;
use crate::error::{Error, Result};
use crate::representations::BackboneParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineParams {
    pub panel_size: u32,
    pub pairing: PairMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    pub backbone: BackboneParams,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            panel_size: 512,
            pairing: PairMode::Disjoint,
            cap: None,
            backbone: BackboneParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exemplar {
    pub id: String,
    pub image: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proxy: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backbone: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdapterIds {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avat_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svat_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asvat_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StyleManifest {
    pub name: String,
    pub styvec: String,
    #[serde(default)]
    pub params: PipelineParams,
    pub exemplars: Vec<Exemplar>,
    #[serde(default)]
    pub adapters: AdapterIds,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && !s.starts_with('.')
}

impl StyleManifest {
    pub fn from_json(text: &str) -> Result<Self> {
        let m: StyleManifest =
            serde_json::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    /// Loads and validates a manifest; relative exemplar paths are resolved
    /// against the manifest's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m = Self::from_json(&text).map_err(|e| match e {
            Error::Manifest(msg) => Error::Manifest(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for ex in &mut m.exemplars {
            for p in [Some(&mut ex.image), ex.proxy.as_mut(), ex.backbone.as_mut()]
                .into_iter()
                .flatten()
            {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !valid_name(&self.name) {
            return Err(Error::Manifest(format!(
                "style name {:?} must be non-empty [A-Za-z0-9._-]",
                self.name
            )));
        }
        if self.styvec.is_empty() || self.styvec.contains(['\n', '\r']) {
            return Err(Error::Manifest(
                "styvec must be a non-empty single-line token".into(),
            ));
        }
        if self.exemplars.len() < 2 {
            return Err(Error::Manifest(format!(
                "a style needs at least 2 exemplars, got {}",
                self.exemplars.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for ex in &self.exemplars {
            if !valid_name(&ex.id) {
                return Err(Error::Manifest(format!("bad exemplar id {:?}", ex.id)));
            }
            if !seen.insert(ex.id.as_str()) {
                return Err(Error::Manifest(format!(
                    "duplicate exemplar id {:?}",
                    ex.id
                )));
            }
        }
        if self.params.panel_size < MIN_PANEL_SIZE {
            return Err(Error::Manifest(format!(
                "panel_size {} is below {MIN_PANEL_SIZE}",
                self.params.panel_size
            )));
        }
        Ok(())
    }

    pub fn ids(&self) -> Vec<String> {
        self.exemplars.iter().map(|e| e.id.clone()).collect()
    }

    pub fn exemplar(&self, id: &str) -> Option<&Exemplar> {
        self.exemplars.iter().find(|e| e.id == id)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}
