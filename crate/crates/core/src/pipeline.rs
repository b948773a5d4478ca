//! Two-stage inference: `Backbone_ref → Proxy_ref :: Backbone_t → ?`
//! through the A-VAT, then `Proxy_ref → Output_ref :: Proxy_t → ?` through
//! the S-VAT.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analogy::{
    compose_grid, compose_row, extract_panel, inference_mask, render_prompt, AnalogyGrid,
    ExemplarReps, GridPanels, Layout, Quadrant, StyleManifest,
};
use crate::backend::{AdapterKind, BackendClient, InpaintJob};
use crate::error::{Error, Result};
use crate::imaging::io::read_png;
use crate::imaging::resample::square_target;
use crate::imaging::{PixelFormat, RasterImage};
use crate::par::{self, Parallelism};
use crate::representations::{
    ablation_proxy, build_backbone_with, BackboneParams, HiddenBackbone, ProxyMode, Role,
};

/// Pipeline variants used to reproduce the ablation studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    /// No abstraction: the raw target is its own proxy (stage 1 skipped).
    None,
    /// Vectorised target as proxy (stage 1 skipped).
    VecOnly,
    /// Proxies keep their colours.
    Color,
    /// Backbones without eroded residuals.
    SkeletonOnly,
    /// Single Backbone → Output stage.
    Asvat,
    /// Stage 2 as an unreferenced `Proxy_t | ?` row.
    #[serde(rename = "layout-1x2")]
    Layout1x2,
}

impl Ablation {
    pub const ALL: [Ablation; 6] = [
        Ablation::None,
        Ablation::VecOnly,
        Ablation::Color,
        Ablation::SkeletonOnly,
        Ablation::Asvat,
        Ablation::Layout1x2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Ablation::None => "none",
            Ablation::VecOnly => "vec-only",
            Ablation::Color => "color",
            Ablation::SkeletonOnly => "skeleton-only",
            Ablation::Asvat => "asvat",
            Ablation::Layout1x2 => "layout-1x2",
        }
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ablation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ablation::ALL
            .into_iter()
            .find(|a| a.as_str() == s || a.as_str().replace('-', "_") == s)
            .ok_or_else(|| {
                let names: Vec<_> = Ablation::ALL.iter().map(|a| a.as_str()).collect();
                Error::InvalidParameter(format!(
                    "unknown ablation {s:?} (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

/// How exemplar and target representations are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RepSettings {
    pub proxy_mode: ProxyMode,
    pub skeleton_only: bool,
}

impl RepSettings {
    pub fn for_ablation(ablation: Option<Ablation>) -> Self {
        match ablation {
            Some(Ablation::None) => RepSettings {
                proxy_mode: ProxyMode::None,
                ..Default::default()
            },
            Some(Ablation::Color) => RepSettings {
                proxy_mode: ProxyMode::Color,
                ..Default::default()
            },
            Some(Ablation::SkeletonOnly) => RepSettings {
                skeleton_only: true,
                ..Default::default()
            },
            _ => RepSettings::default(),
        }
    }

    fn is_default(&self) -> bool {
        *self == RepSettings::default()
    }

    pub fn backbone_params(&self, base: &BackboneParams) -> BackboneParams {
        BackboneParams {
            skeleton_only: base.skeleton_only || self.skeleton_only,
            ..base.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RepNeeds {
    pub backbone: bool,
    pub proxy: bool,
}

/// Exemplars and targets enter the pipeline padded to a square.
pub fn prepare_image(img: &RasterImage) -> RasterImage {
    square_target(&img.convert(match img.format() {
        PixelFormat::Binary => PixelFormat::Gray8,
        f => f,
    }))
}

fn load_gray(path: &std::path::Path) -> Result<RasterImage> {
    Ok(prepare_image(&read_png(path)?).convert(PixelFormat::Gray8))
}

/// Loads exemplar images and builds (or loads precomputed) backbones and
/// proxies. Precomputed files are only used with default settings.
pub fn load_reps(
    manifest: &StyleManifest,
    ids: &[String],
    needs: RepNeeds,
    settings: RepSettings,
    par: Parallelism,
) -> Result<BTreeMap<String, ExemplarReps>> {
    let params = settings.backbone_params(&manifest.params.backbone);
    let reps = par::map(par, ids, |id| -> Result<(String, ExemplarReps)> {
        let ex = manifest
            .exemplar(id)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown exemplar {id}")))?;
        let image = prepare_image(&read_png(&ex.image)?);
        let wrap = |e: Error| e.in_stage(format!("exemplar {id}"));
        let backbone = match (&ex.backbone, needs.backbone) {
            (_, false) => None,
            (Some(p), true) if settings.is_default() => Some(load_gray(p)?),
            _ => Some(
                build_backbone_with(&image, &params, Role::Reference, Parallelism::Sequential)
                    .map_err(wrap)?
                    .to_gray8(),
            ),
        };
        let proxy = match (&ex.proxy, needs.proxy) {
            (_, false) => None,
            (Some(p), true) if settings.is_default() => Some(load_gray(p)?),
            _ => Some(
                ablation_proxy(
                    &image,
                    settings.proxy_mode,
                    &manifest.params.backbone.vectorize,
                )
                .map_err(wrap)?,
            ),
        };
        Ok((
            id.clone(),
            ExemplarReps {
                backbone,
                proxy,
                output: Some(image),
            },
        ))
    });
    reps.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InferOptions {
    pub avat_id: Option<String>,
    pub svat_id: Option<String>,
    pub asvat_id: Option<String>,
    pub seed: u64,
    pub ablation: Option<Ablation>,
    /// Exemplar anchoring the top row; the manifest's first by default.
    pub ref_exemplar: Option<String>,
    /// Overrides the manifest's panel size.
    pub panel_size: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stage {
    /// File-name friendly identifier.
    pub key: &'static str,
    pub label: &'static str,
    pub kind: AdapterKind,
}

pub const STAGE_ABSTRACTION: Stage = Stage {
    key: "stage1_avat",
    label: "stage 1 (A-VAT)",
    kind: AdapterKind::Avat,
};
pub const STAGE_STYLIZATION: Stage = Stage {
    key: "stage2_svat",
    label: "stage 2 (S-VAT)",
    kind: AdapterKind::Svat,
};
pub const STAGE_SINGLE: Stage = Stage {
    key: "asvat",
    label: "single stage (AS-VAT)",
    kind: AdapterKind::Asvat,
};

/// One inpainting round trip.
#[derive(Debug, Clone)]
pub struct StageRecord {
    pub stage: Stage,
    pub adapter_id: String,
    pub seed: u64,
    pub grid: RasterImage,
    pub completed: RasterImage,
    pub elapsed: std::time::Duration,
}

#[derive(Debug, Clone)]
pub struct InferOutput {
    pub reference: String,
    /// Square, padded target.
    pub target: RasterImage,
    pub backbone: Option<HiddenBackbone>,
    pub proxy: RasterImage,
    pub output: RasterImage,
    pub stages: Vec<StageRecord>,
}

/// Inpaints the masked panel of `grid` and returns it with the record.
pub fn run_stage(
    client: &BackendClient,
    stage: Stage,
    grid: &AnalogyGrid,
    adapter_id: &str,
    prompt: &str,
    seed: u64,
) -> Result<(RasterImage, StageRecord)> {
    let started = std::time::Instant::now();
    let run = || -> Result<(RasterImage, StageRecord)> {
        let job = InpaintJob {
            grid: grid.canvas().clone(),
            mask: inference_mask(grid)?,
            prompt: prompt.to_owned(),
            adapter_id: adapter_id.to_owned(),
            seed,
            samples: 1,
        };
        let completed = client
            .inpaint(&job)?
            .into_iter()
            .next()
            .expect("client guarantees one image");
        let done = grid.with_canvas(completed)?;
        let which = match grid.layout() {
            Layout::TwoByTwo => Quadrant::BottomRight,
            Layout::OneByTwo => Quadrant::TopRight,
        };
        let panel = extract_panel(&done, which)?;
        Ok((
            panel,
            StageRecord {
                stage,
                adapter_id: adapter_id.to_owned(),
                seed,
                grid: grid.canvas().clone(),
                completed: done.into_canvas(),
                elapsed: started.elapsed(),
            },
        ))
    };
    run().map_err(|e| e.in_stage(stage.label))
}

fn need<'a>(id: &'a Option<String>, flag: &str, why: &str) -> Result<&'a str> {
    id.as_deref()
        .ok_or_else(|| Error::InvalidParameter(format!("{why} needs --{flag}")))
}

pub fn reference_id(manifest: &StyleManifest, requested: Option<&str>) -> Result<String> {
    match requested {
        Some(id) if manifest.exemplar(id).is_some() => Ok(id.to_owned()),
        Some(id) => Err(Error::InvalidParameter(format!(
            "reference exemplar {id} is not in style {}",
            manifest.name
        ))),
        None => Ok(manifest.exemplars[0].id.clone()),
    }
}

/// Full inference for one target. Adapter kinds are checked before any
/// inpainting request is sent.
pub fn infer(
    client: &BackendClient,
    manifest: &StyleManifest,
    target: &RasterImage,
    opts: &InferOptions,
    par: Parallelism,
) -> Result<InferOutput> {
    let ablation = opts.ablation;
    let settings = RepSettings::for_ablation(ablation);
    let reference = reference_id(manifest, opts.ref_exemplar.as_deref())?;
    let panel = opts.panel_size.unwrap_or(manifest.params.panel_size);
    let prompt = render_prompt(&manifest.styvec)?;
    let target = prepare_image(target);
    let skip_stage1 = matches!(ablation, Some(Ablation::None | Ablation::VecOnly));

    let avat = match ablation {
        Some(Ablation::Asvat) => None,
        _ if skip_stage1 => None,
        _ => Some(need(&opts.avat_id, "avat", "stage 1")?),
    };
    let svat = match ablation {
        Some(Ablation::Asvat) => None,
        _ => Some(need(&opts.svat_id, "svat", "stage 2")?),
    };
    let asvat = match ablation {
        Some(Ablation::Asvat) => Some(need(&opts.asvat_id, "asvat", "the asvat ablation")?),
        _ => None,
    };
    for (id, kind) in [
        (avat, AdapterKind::Avat),
        (svat, AdapterKind::Svat),
        (asvat, AdapterKind::Asvat),
    ] {
        if let Some(id) = id {
            client.require_kind(id, kind)?;
        }
    }

    let needs = RepNeeds {
        backbone: !skip_stage1,
        proxy: ablation != Some(Ablation::Asvat),
    };
    let reps = load_reps(
        manifest,
        std::slice::from_ref(&reference),
        needs,
        settings,
        par,
    )?;
    let r = &reps[&reference];
    let get = |img: &Option<RasterImage>| img.clone().expect("loaded per needs");

    let backbone = if skip_stage1 {
        None
    } else {
        let params = settings.backbone_params(&manifest.params.backbone);
        Some(
            build_backbone_with(&target, &params, Role::Target, par)
                .map_err(|e| e.in_stage("target backbone"))?,
        )
    };

    let mut stages = Vec::new();
    if let Some(asvat) = asvat {
        let b_t = backbone.as_ref().expect("built above").to_gray8();
        let grid = compose_grid(
            &GridPanels::new(get(&r.backbone), get(&r.output), b_t),
            panel,
        )?;
        let (output, rec) = run_stage(client, STAGE_SINGLE, &grid, asvat, &prompt, opts.seed)?;
        stages.push(rec);
        return Ok(InferOutput {
            reference,
            target,
            proxy: output.clone(),
            backbone,
            output,
            stages,
        });
    }

    let proxy = match (ablation, avat) {
        (Some(Ablation::None), _) => target.clone(),
        (Some(Ablation::VecOnly), _) => ablation_proxy(
            &target,
            ProxyMode::VectorSimplificationOnly,
            &manifest.params.backbone.vectorize,
        )
        .map_err(|e| e.in_stage("target proxy"))?,
        (_, Some(avat)) => {
            let b_t = backbone.as_ref().expect("built above").to_gray8();
            let grid = compose_grid(
                &GridPanels::new(get(&r.backbone), get(&r.proxy), b_t),
                panel,
            )?;
            let (p, rec) = run_stage(client, STAGE_ABSTRACTION, &grid, avat, &prompt, opts.seed)?;
            stages.push(rec);
            p
        }
        (_, None) => unreachable!("avat required when stage 1 runs"),
    };

    let svat = svat.expect("checked above");
    let grid = match ablation {
        Some(Ablation::Layout1x2) => compose_row(&proxy, None, panel)?,
        _ => compose_grid(
            &GridPanels::new(get(&r.proxy), get(&r.output), proxy.clone()),
            panel,
        )?,
    };
    let (output, rec) = run_stage(client, STAGE_STYLIZATION, &grid, svat, &prompt, opts.seed)?;
    stages.push(rec);
    Ok(InferOutput {
        reference,
        target,
        backbone,
        proxy,
        output,
        stages,
    })
}
