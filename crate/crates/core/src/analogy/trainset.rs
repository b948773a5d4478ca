use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::grid::{compose_grid, compose_row, AnalogyGrid, GridPanels};
use super::manifest::StyleManifest;
use super::pairs::{build_pairs, PairMode};
use super::prompt::render_prompt;
use crate::error::{Error, Result};
use crate::fsutil::write_if_changed;
use crate::imaging::io::encode_png;
use crate::imaging::RasterImage;
use crate::par::{self, Parallelism};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    /// Backbone → Proxy rows.
    Avat,
    /// Proxy → Output rows.
    Svat,
    /// Backbone → Output rows (single-stage ablation).
    Asvat,
    /// One Proxy → Output row on a half-height canvas.
    #[serde(rename = "layout_1x2")]
    Layout1x2,
}

impl SampleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SampleKind::Avat => "avat",
            SampleKind::Svat => "svat",
            SampleKind::Asvat => "asvat",
            SampleKind::Layout1x2 => "layout_1x2",
        }
    }

    fn needs_backbone(self) -> bool {
        matches!(self, SampleKind::Avat | SampleKind::Asvat)
    }

    fn needs_proxy(self) -> bool {
        matches!(
            self,
            SampleKind::Avat | SampleKind::Svat | SampleKind::Layout1x2
        )
    }
}

impl fmt::Display for SampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SampleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "avat" => Ok(SampleKind::Avat),
            "svat" => Ok(SampleKind::Svat),
            "asvat" => Ok(SampleKind::Asvat),
            "layout_1x2" | "layout-1x2" => Ok(SampleKind::Layout1x2),
            other => Err(Error::InvalidParameter(format!(
                "unknown sample kind {other}"
            ))),
        }
    }
}

/// Per-exemplar representations. `output` is the exemplar artwork itself.
#[derive(Debug, Clone, Default)]
pub struct ExemplarReps {
    pub backbone: Option<RasterImage>,
    pub proxy: Option<RasterImage>,
    pub output: Option<RasterImage>,
}

impl ExemplarReps {
    /// `(A, A′)` for one exemplar under `kind`.
    fn row(&self, kind: SampleKind) -> (&RasterImage, &RasterImage) {
        fn get(r: &Option<RasterImage>) -> &RasterImage {
            r.as_ref().expect("checked before composing")
        }
        match kind {
            SampleKind::Avat => (get(&self.backbone), get(&self.proxy)),
            SampleKind::Svat | SampleKind::Layout1x2 => (get(&self.proxy), get(&self.output)),
            SampleKind::Asvat => (get(&self.backbone), get(&self.output)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainingSample {
    pub grid: AnalogyGrid,
    pub prompt: String,
    pub pair: (String, String),
    pub kind: SampleKind,
}

impl TrainingSample {
    /// `{style}_{kind}_{r1}_{r2}`, shared by the PNG and its prompt.
    pub fn file_stem(&self, style: &str) -> String {
        format!("{style}_{}_{}_{}", self.kind, self.pair.0, self.pair.1)
    }
}

fn check_reps(
    kind: SampleKind,
    ids: &[&String],
    reps: &BTreeMap<String, ExemplarReps>,
) -> Result<()> {
    let missing = |what: &'static str, pick: fn(&ExemplarReps) -> bool| -> Result<()> {
        let ids: Vec<String> = ids
            .iter()
            .filter(|id| !reps.get(id.as_str()).is_some_and(pick))
            .map(|id| id.to_string())
            .collect();
        if ids.is_empty() {
            Ok(())
        } else {
            Err(Error::MissingRepresentation {
                kind: kind.to_string(),
                what,
                ids,
            })
        }
    };
    if kind.needs_backbone() {
        missing("backbones", |r| r.backbone.is_some())?;
    }
    if kind.needs_proxy() {
        missing("proxies", |r| r.proxy.is_some())?;
    }
    missing("exemplar images", |r| r.output.is_some())
}

/// One training sample per exemplar pair.
pub fn build_trainset(
    manifest: &StyleManifest,
    reps: &BTreeMap<String, ExemplarReps>,
    kind: SampleKind,
    mode: PairMode,
    cap: Option<usize>,
    par: Parallelism,
) -> Result<Vec<TrainingSample>> {
    let pairs = build_pairs(&manifest.ids(), mode, cap)?;
    let mut used: Vec<&String> = pairs.iter().flat_map(|(a, b)| [a, b]).collect();
    used.sort();
    used.dedup();
    check_reps(kind, &used, reps)?;
    let prompt = render_prompt(&manifest.styvec)?;
    let panel = manifest.params.panel_size;

    par::map(par, &pairs, |(r1, r2)| {
        let (a, a_prime) = reps[r1].row(kind);
        let grid = match kind {
            SampleKind::Layout1x2 => compose_row(a, Some(a_prime), panel)?,
            _ => {
                let (b, b_prime) = reps[r2].row(kind);
                compose_grid(
                    &GridPanels::complete(a.clone(), a_prime.clone(), b.clone(), b_prime.clone()),
                    panel,
                )?
            }
        };
        Ok(TrainingSample {
            grid,
            prompt: prompt.clone(),
            pair: (r1.clone(), r2.clone()),
            kind,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WriteReport {
    pub written: usize,
    pub unchanged: usize,
}

/// Writes `{stem}.png` and `{stem}.txt` per sample. Files whose bytes are
/// already on disk are left untouched.
pub fn write_trainset(
    samples: &[TrainingSample],
    style: &str,
    dir: &Path,
    par: Parallelism,
) -> Result<WriteReport> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let results = par::map(par, samples, |s| -> Result<(usize, usize)> {
        let stem = s.file_stem(style);
        let png = encode_png(s.grid.canvas())?;
        let a = write_if_changed(&dir.join(format!("{stem}.png")), &png)?;
        let b = write_if_changed(&dir.join(format!("{stem}.txt")), s.prompt.as_bytes())?;
        let w = a as usize + b as usize;
        Ok((w, 2 - w))
    });
    let mut report = WriteReport::default();
    for r in results {
        let (w, u) = r?;
        report.written += w;
        report.unchanged += u;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analogy::grid::{extract_panel, Quadrant};
    use crate::analogy::manifest::Exemplar;
    use crate::imaging::PixelFormat;

    fn manifest(n: usize) -> StyleManifest {
        StyleManifest {
            name: "ink".into(),
            styvec: "inkwash".into(),
            params: Default::default(),
            exemplars: (0..n)
                .map(|i| Exemplar {
                    id: format!("e{i}"),
                    image: format!("e{i}.png").into(),
                    proxy: None,
                    backbone: None,
                })
                .collect(),
            adapters: Default::default(),
        }
    }

    fn solid(v: u8) -> RasterImage {
        RasterImage::filled(64, 64, PixelFormat::Gray8, [v; 3])
    }

    fn reps(n: usize, with_proxy: bool) -> BTreeMap<String, ExemplarReps> {
        (0..n)
            .map(|i| {
                let v = i as u8 * 3;
                (
                    format!("e{i}"),
                    ExemplarReps {
                        backbone: Some(solid(v)),
                        proxy: with_proxy.then(|| solid(v + 1)),
                        output: Some(solid(v + 2)),
                    },
                )
            })
            .collect()
    }

    #[test]
    fn avat_quadrants() {
        let mut m = manifest(9);
        m.params.panel_size = 64;
        let r = reps(9, true);
        let s = build_trainset(
            &m,
            &r,
            SampleKind::Avat,
            PairMode::Disjoint,
            None,
            Parallelism::default(),
        )
        .unwrap();
        assert_eq!(s.len(), 4);
        for sample in &s {
            let (r1, r2) = &sample.pair;
            let want = [&r[r1].backbone, &r[r1].proxy, &r[r2].backbone, &r[r2].proxy];
            for (q, w) in Quadrant::ALL.iter().zip(want) {
                assert_eq!(
                    &extract_panel(&sample.grid, *q).unwrap(),
                    w.as_ref().unwrap()
                );
            }
        }
        assert_eq!(s[0].file_stem("ink"), "ink_avat_e0_e1");
    }

    #[test]
    fn svat_without_proxies_lists_ids() {
        let m = manifest(4);
        let err = build_trainset(
            &m,
            &reps(4, false),
            SampleKind::Svat,
            PairMode::Disjoint,
            None,
            Parallelism::Sequential,
        )
        .unwrap_err();
        match err {
            Error::MissingRepresentation { ids, .. } => assert_eq!(ids, ["e0", "e1", "e2", "e3"]),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn row_layout_canvas() {
        let m = manifest(2);
        let s = build_trainset(
            &m,
            &reps(2, true),
            SampleKind::Layout1x2,
            PairMode::Disjoint,
            None,
            Parallelism::Sequential,
        )
        .unwrap();
        assert_eq!(s[0].grid.canvas().dimensions(), (1024, 512));
        assert_eq!(s[0].file_stem("ink"), "ink_layout_1x2_e0_e1");
    }

    #[test]
    fn rewrite_is_skipped() {
        let mut m = manifest(4);
        m.params.panel_size = 64;
        let s = build_trainset(
            &m,
            &reps(4, true),
            SampleKind::Asvat,
            PairMode::Disjoint,
            None,
            Parallelism::default(),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let first = write_trainset(&s, "ink", dir.path(), Parallelism::default()).unwrap();
        assert_eq!(
            first,
            WriteReport {
                written: 4,
                unchanged: 0
            }
        );
        let second = write_trainset(&s, "ink", dir.path(), Parallelism::default()).unwrap();
        assert_eq!(
            second,
            WriteReport {
                written: 0,
                unchanged: 4
            }
        );
        let txt = std::fs::read_to_string(dir.path().join("ink_asvat_e0_e1.txt")).unwrap();
        assert_eq!(txt, render_prompt("inkwash").unwrap());
    }
}
