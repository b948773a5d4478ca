//! Flag/config-file/environment merging. Precedence: command-line flag,
//! then the JSON config file, then `AIS_BACKEND_URL`, then defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::exit::{Exit, EXIT_INVALID, EXIT_SCHEMA};

pub const BACKEND_URL_ENV: &str = "AIS_BACKEND_URL";

/// Options shared by several commands. The config file uses the same names
/// with underscores.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, clap::Args)]
#[serde(default, deny_unknown_fields)]
pub struct Common {
    /// Style manifest (JSON).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Backend base URL, or `mock://` for the in-process mock.
    #[arg(long, global = true)]
    pub backend_url: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub panel_size: Option<u32>,
    /// Erosion disk radius in pixels (default scales 25 px at 1024).
    #[arg(long, global = true)]
    pub erosion_radius: Option<u32>,
    /// Number of rearmost vector layers in the backbone.
    #[arg(long, global = true)]
    pub layers: Option<u32>,
    /// Pairing mode: disjoint or all_pairs.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// none, vec-only, color, skeleton-only, asvat, layout-1x2.
    #[arg(long, global = true)]
    pub ablation: Option<String>,
    /// Directory for the mock backend's adapter registry.
    #[arg(long, global = true)]
    pub state_dir: Option<PathBuf>,
    /// Upper bound on worker threads / in-flight backend requests.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

impl Common {
    /// `self` wins field by field.
    pub fn or(self, other: Common) -> Common {
        Common {
            manifest: self.manifest.or(other.manifest),
            backend_url: self.backend_url.or(other.backend_url),
            seed: self.seed.or(other.seed),
            panel_size: self.panel_size.or(other.panel_size),
            erosion_radius: self.erosion_radius.or(other.erosion_radius),
            layers: self.layers.or(other.layers),
            mode: self.mode.or(other.mode),
            ablation: self.ablation.or(other.ablation),
            state_dir: self.state_dir.or(other.state_dir),
            threads: self.threads.or(other.threads),
        }
    }

    pub fn load_config(path: &Path) -> Result<Common, Exit> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Exit::new(EXIT_INVALID, format!("{}: {e}", path.display())))?;
        let mut cfg: Common = serde_json::from_str(&text)
            .map_err(|e| Exit::new(EXIT_SCHEMA, format!("config {}: {e}", path.display())))?;
        // relative paths in a config file are relative to the file
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [cfg.manifest.as_mut(), cfg.state_dir.as_mut()]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn resolve(flags: Common, config: Option<&Path>) -> Result<Common, Exit> {
        let file = match config {
            Some(p) => Common::load_config(p)?,
            None => Common::default(),
        };
        let env = Common {
            backend_url: std::env::var(BACKEND_URL_ENV)
                .ok()
                .filter(|s| !s.is_empty()),
            ..Default::default()
        };
        Ok(flags.or(file).or(env))
    }

    pub fn state_dir(&self) -> PathBuf {
        self.state_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(".ais"))
    }
}
