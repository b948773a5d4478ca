use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use ais_core::analogy::{
    build_trainset, write_trainset, PairMode, SampleKind, StyleManifest, TrainingSample,
};
use ais_core::backend::protocol::AdapterResponse;
use ais_core::backend::{
    fixtures, AdapterKind, Backend, BackendClient, MockBackend, MockTransform, TrainJob,
    TrainSample,
};
use ais_core::eval::eval_structural;
use ais_core::fsutil::write_if_changed;
use ais_core::imaging::io::{encode_png, read_png};
use ais_core::imaging::{BinaryImage, RasterImage};
use ais_core::pipeline::{self, Ablation, InferOptions, InferOutput, RepNeeds, RepSettings};
use ais_core::representations::{
    ablation_proxy, backbone_parts, BackboneParams, Provenance, ProxyMode,
};
use ais_core::{Error, Parallelism};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::exit::{Exit, EXIT_INVALID};
use crate::settings::Common;

#[derive(Debug, Parser)]
#[command(
    name = "ais",
    version,
    about = "Backbone/proxy building, analogy datasets and two-stage inference"
)]
pub struct Cli {
    /// JSON config file; keys mirror the long flags (snake_case).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run every kernel single-threaded.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hidden backbone of an image (PNG plus provenance sidecar).
    Backbone(BackboneArgs),
    /// Reference abstraction proxy of an exemplar.
    Proxy(ProxyArgs),
    /// Training grids and prompts for one adapter kind.
    Trainset(TrainsetArgs),
    /// Build a training set and submit it to the backend.
    Train(TrainArgs),
    /// Two-stage inference for one target.
    Infer(InferArgs),
    /// Every A-VAT × S-VAT combination for one target.
    Mix(MixArgs),
    /// Structural metrics for pairs of binary masks.
    Eval(EvalArgs),
    /// Serve the mock backend over HTTP.
    ServeMock(ServeArgs),
    /// Write protocol request/response fixtures.
    Fixtures(FixturesArgs),
}

#[derive(Debug, Args)]
pub struct BackboneArgs {
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Outline width in pixels (default scales 2 px at 1024).
    #[arg(long)]
    pub stroke_width: Option<u32>,
    #[arg(long)]
    pub skeleton_only: bool,
    /// Also write render/skeleton/residual masks here.
    #[arg(long)]
    pub parts_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProxyArgs {
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainsetArgs {
    /// avat, svat, asvat or layout_1x2.
    #[arg(long, default_value = "avat")]
    pub kind: String,
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long)]
    pub cap: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, default_value = "avat")]
    pub kind: String,
    #[arg(long, default_value_t = 16)]
    pub rank: u32,
    #[arg(long, default_value_t = 1000)]
    pub steps: u32,
    #[arg(long)]
    pub cap: Option<usize>,
    /// Mock only: identity, invert, threshold:T or erode:K.
    #[arg(long)]
    pub mock_transform: Option<String>,
    /// Also write the submitted samples here.
    #[arg(long)]
    pub trainset_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    pub target: PathBuf,
    /// Output directory.
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long)]
    pub avat: Option<String>,
    #[arg(long)]
    pub svat: Option<String>,
    #[arg(long)]
    pub asvat: Option<String>,
    /// Exemplar for the grids' top row (default: first in the manifest).
    #[arg(long)]
    pub ref_exemplar: Option<String>,
}

#[derive(Debug, Args)]
pub struct MixArgs {
    pub target: PathBuf,
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long, num_args = 1.., required = true)]
    pub avat: Vec<String>,
    #[arg(long, num_args = 1.., required = true)]
    pub svat: Vec<String>,
    #[arg(long)]
    pub ref_exemplar: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Mask PNGs taken two at a time: A1 B1 A2 B2 ...
    #[arg(required = true)]
    pub masks: Vec<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8077")]
    pub addr: SocketAddr,
    /// Transform for adapters trained without one.
    #[arg(long, default_value = "identity")]
    pub transform: String,
    /// Registry file (default: <state-dir>/mock-registry.json).
    #[arg(long)]
    pub registry: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixturesArgs {
    #[arg(short, long)]
    pub out: PathBuf,
}

/// Resolved invocation context.
pub struct Ctx {
    pub common: Common,
    pub par: Parallelism,
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, Exit> {
    s.parse::<T>().map_err(Exit::from)
}

impl Ctx {
    fn ablation(&self) -> Result<Option<Ablation>, Exit> {
        self.common.ablation.as_deref().map(parse).transpose()
    }

    fn pair_mode(&self, manifest: Option<&StyleManifest>) -> Result<PairMode, Exit> {
        match &self.common.mode {
            Some(m) => parse(m),
            None => Ok(manifest.map(|m| m.params.pairing).unwrap_or_default()),
        }
    }

    fn manifest(&self) -> Result<StyleManifest, Exit> {
        let path = self
            .common
            .manifest
            .as_ref()
            .ok_or_else(|| Exit::invalid("--manifest is required"))?;
        let mut m = StyleManifest::load(path)?;
        self.apply_backbone_flags(&mut m.params.backbone);
        if let Some(p) = self.common.panel_size {
            m.params.panel_size = p;
        }
        Ok(m)
    }

    fn apply_backbone_flags(&self, p: &mut BackboneParams) {
        if let Some(r) = self.common.erosion_radius {
            p.erosion_radius = Some(r);
        }
        if let Some(l) = self.common.layers {
            p.layer_count = l;
        }
    }

    fn backbone_params(&self) -> Result<BackboneParams, Exit> {
        let mut p = match &self.common.manifest {
            Some(_) => self.manifest()?.params.backbone,
            None => BackboneParams::default(),
        };
        self.apply_backbone_flags(&mut p);
        Ok(p)
    }

    fn backend(&self) -> Result<Arc<dyn Backend>, Exit> {
        let url = self.common.backend_url.as_deref().ok_or_else(|| {
            Exit::invalid(format!(
                "no backend: pass --backend-url or set {}",
                crate::settings::BACKEND_URL_ENV
            ))
        })?;
        if url.starts_with("mock:") {
            let registry = self.common.state_dir().join("mock-registry.json");
            return Ok(Arc::new(MockBackend::with_registry(
                MockTransform::Identity,
                &registry,
            )?));
        }
        #[cfg(feature = "http")]
        {
            Ok(Arc::new(ais_core::backend::HttpBackend::new(url)?))
        }
        #[cfg(not(feature = "http"))]
        {
            Err(Exit::invalid(format!(
                "built without HTTP support, cannot reach {url}"
            )))
        }
    }

    fn client(&self) -> Result<BackendClient, Exit> {
        let client = BackendClient::new(self.backend()?)
            .with_max_in_flight(self.common.threads.unwrap_or(4));
        client.check_health()?;
        Ok(client)
    }
}

fn read_image(path: &Path) -> Result<RasterImage, Exit> {
    read_png(path).map_err(|e| Exit::invalid(e.to_string()))
}

fn write_json(path: &Path, value: &Value) -> Result<bool, Exit> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("json values serialize");
    bytes.push(b'\n');
    Ok(write_if_changed(path, &bytes)?)
}

/// PNG plus `<file>.json` provenance; skipped when unchanged.
fn write_artifact(path: &Path, img: &RasterImage, prov: &Provenance) -> Result<(), Exit> {
    write_if_changed(path, &encode_png(img)?)?;
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".json");
    write_json(
        Path::new(&sidecar),
        &serde_json::to_value(prov).expect("serializes"),
    )?;
    Ok(())
}

fn cmd_backbone(ctx: &Ctx, a: &BackboneArgs) -> Result<(), Exit> {
    let img = pipeline::prepare_image(&read_image(&a.input)?);
    let mut params = ctx.backbone_params()?;
    if let Some(w) = a.stroke_width {
        params.stroke_width = Some(w);
    }
    params.skeleton_only |= a.skeleton_only || ctx.ablation()? == Some(Ablation::SkeletonOnly);
    let parts = backbone_parts(&img, &params, ctx.par)?;
    let (w, h) = img.dimensions();
    let prov = Provenance::new("backbone", &img, &params.resolved(w, h))
        .with_input_path(a.input.display().to_string());
    write_artifact(&a.output, &parts.backbone.to_gray8(), &prov)?;
    if let Some(dir) = &a.parts_dir {
        for (name, mask) in [
            ("render", &parts.render),
            ("skeleton", &parts.skeleton),
            ("residuals", &parts.residuals),
        ] {
            write_if_changed(
                &dir.join(format!("{name}.png")),
                &encode_png(&mask.to_gray8())?,
            )?;
        }
        write_if_changed(
            &dir.join("layers.svg"),
            ais_core::vectorizer::svg::to_svg(&parts.layers).as_bytes(),
        )?;
    }
    println!(
        "{}",
        json!({
            "output": a.output,
            "foreground": parts.backbone.count(),
            "layers": parts.layers.layers.len(),
        })
    );
    Ok(())
}

fn cmd_proxy(ctx: &Ctx, a: &ProxyArgs) -> Result<(), Exit> {
    let img = pipeline::prepare_image(&read_image(&a.input)?);
    let params = ctx.backbone_params()?.vectorize;
    let mode = match ctx.ablation()? {
        Some(Ablation::Color) => ProxyMode::Color,
        Some(Ablation::None) => ProxyMode::None,
        _ => ProxyMode::VectorSimplificationOnly,
    };
    let proxy = ablation_proxy(&img, mode, &params)?;
    let (w, h) = img.dimensions();
    let mut resolved = params.clone();
    resolved.min_area = Some(params.min_area_for(w, h));
    let prov = Provenance::new(
        "proxy",
        &img,
        &json!({ "mode": mode, "vectorize": resolved }),
    )
    .with_input_path(a.input.display().to_string());
    write_artifact(&a.output, &proxy, &prov)?;
    println!("{}", json!({ "output": a.output }));
    Ok(())
}

fn trainset(
    ctx: &Ctx,
    kind: &str,
    cap: Option<usize>,
) -> Result<(StyleManifest, Vec<TrainingSample>), Exit> {
    let manifest = ctx.manifest()?;
    let kind: SampleKind = parse(kind)?;
    let mode = ctx.pair_mode(Some(&manifest))?;
    let cap = cap.or(manifest.params.cap);
    let needs = RepNeeds {
        backbone: matches!(kind, SampleKind::Avat | SampleKind::Asvat),
        proxy: !matches!(kind, SampleKind::Asvat),
    };
    let settings = RepSettings::for_ablation(ctx.ablation()?);
    let pairs = ais_core::analogy::build_pairs(&manifest.ids(), mode, cap)?;
    let mut used: Vec<String> = pairs.into_iter().flat_map(|(a, b)| [a, b]).collect();
    used.sort();
    used.dedup();
    let reps = pipeline::load_reps(&manifest, &used, needs, settings, ctx.par)?;
    let samples = build_trainset(&manifest, &reps, kind, mode, cap, ctx.par)?;
    Ok((manifest, samples))
}

fn cmd_trainset(ctx: &Ctx, a: &TrainsetArgs) -> Result<(), Exit> {
    let (manifest, samples) = trainset(ctx, &a.kind, a.cap)?;
    let report = write_trainset(&samples, &manifest.name, &a.out, ctx.par)?;
    let index: Vec<Value> = samples
        .iter()
        .map(|s| {
            let stem = s.file_stem(&manifest.name);
            json!({
                "image": format!("{stem}.png"),
                "prompt": format!("{stem}.txt"),
                "r1": s.pair.0,
                "r2": s.pair.1,
                "kind": s.kind,
            })
        })
        .collect();
    write_json(
        &a.out.join(format!("{}_{}.json", manifest.name, a.kind)),
        &json!({
            "style": manifest.name,
            "kind": a.kind,
            "params": manifest.params,
            "pipeline_version": ais_core::representations::PIPELINE_VERSION,
            "samples": index,
        }),
    )?;
    println!(
        "{}",
        json!({ "samples": samples.len(), "written": report.written, "unchanged": report.unchanged })
    );
    Ok(())
}

fn adapter_kind(kind: SampleKind) -> AdapterKind {
    match kind {
        SampleKind::Avat => AdapterKind::Avat,
        SampleKind::Svat | SampleKind::Layout1x2 => AdapterKind::Svat,
        SampleKind::Asvat => AdapterKind::Asvat,
    }
}

fn cmd_train(ctx: &Ctx, a: &TrainArgs) -> Result<(), Exit> {
    let (manifest, samples) = trainset(ctx, &a.kind, a.cap)?;
    if let Some(dir) = &a.trainset_dir {
        write_trainset(&samples, &manifest.name, dir, ctx.par)?;
    }
    let kind: SampleKind = parse(&a.kind)?;
    let mut job = TrainJob::new(
        adapter_kind(kind),
        samples
            .iter()
            .map(|s| TrainSample {
                image: s.grid.canvas().clone(),
                prompt: s.prompt.clone(),
            })
            .collect(),
    );
    job.config.rank = a.rank;
    job.config.steps = a.steps;
    if let Some(t) = &a.mock_transform {
        t.parse::<MockTransform>()?;
        job.options.insert("transform".into(), t.clone().into());
    }
    let client = ctx.client()?;
    let adapter = client.train(&job)?;
    println!(
        "{}",
        serde_json::to_string(&AdapterResponse::from(&adapter)).expect("serializes")
    );
    Ok(())
}

fn infer_options(
    ctx: &Ctx,
    manifest: &StyleManifest,
    avat: Option<&str>,
    svat: Option<&str>,
    asvat: Option<&str>,
    ref_exemplar: Option<&str>,
) -> Result<InferOptions, Exit> {
    let pick = |flag: Option<&str>, stored: &Option<String>| {
        flag.map(str::to_owned).or_else(|| stored.clone())
    };
    Ok(InferOptions {
        avat_id: pick(avat, &manifest.adapters.avat_id),
        svat_id: pick(svat, &manifest.adapters.svat_id),
        asvat_id: pick(asvat, &manifest.adapters.asvat_id),
        seed: ctx.common.seed.unwrap_or(0),
        ablation: ctx.ablation()?,
        ref_exemplar: ref_exemplar.map(str::to_owned),
        panel_size: ctx.common.panel_size,
    })
}

fn stage_provenance(stage: &str, input: &RasterImage, adapter_id: &str, seed: u64) -> Provenance {
    Provenance::new(
        stage,
        input,
        &json!({ "adapter_id": adapter_id, "seed": seed }),
    )
}

/// Writes every artifact of one inference run and returns the run record.
fn write_run(
    ctx: &Ctx,
    out: &Path,
    target_path: &Path,
    opts: &InferOptions,
    run: &InferOutput,
    started: Instant,
) -> Result<Value, Exit> {
    let target_prov = Provenance::new("target", &run.target, &json!({}))
        .with_input_path(target_path.display().to_string());
    write_artifact(&out.join("target.png"), &run.target, &target_prov)?;
    let mut outputs = serde_json::Map::new();
    if let Some(b) = &run.backbone {
        let path = out.join("backbone.png");
        write_artifact(&path, &b.to_gray8(), &b.source)?;
        outputs.insert("backbone".into(), json!(path));
    }
    let mut stages = Vec::new();
    for rec in &run.stages {
        let grid = out.join(format!("{}_grid.png", rec.stage.key));
        let done = out.join(format!("{}_completed.png", rec.stage.key));
        write_if_changed(&grid, &encode_png(&rec.grid)?)?;
        write_artifact(
            &done,
            &rec.completed,
            &stage_provenance(rec.stage.key, &rec.grid, &rec.adapter_id, rec.seed),
        )?;
        stages.push(json!({
            "stage": rec.stage.key,
            "adapter_id": rec.adapter_id,
            "kind": rec.stage.kind,
            "seed": rec.seed,
            "grid": grid,
            "completed": done,
            "elapsed_ms": rec.elapsed.as_millis() as u64,
        }));
    }
    let last = run.stages.last().expect("at least one stage");
    let proxy_path = out.join("proxy.png");
    let proxy_prov = match run.stages.iter().find(|r| r.stage.key == "stage1_avat") {
        Some(s1) => stage_provenance("proxy", &s1.grid, &s1.adapter_id, s1.seed),
        None => Provenance::new("proxy", &run.target, &json!({ "ablation": opts.ablation })),
    };
    write_artifact(&proxy_path, &run.proxy, &proxy_prov)?;
    outputs.insert("proxy".into(), json!(proxy_path));
    let output_path = out.join("output.png");
    write_artifact(
        &output_path,
        &run.output,
        &stage_provenance("output", &last.grid, &last.adapter_id, last.seed),
    )?;
    outputs.insert("output".into(), json!(output_path));

    let record = json!({
        "manifest": ctx.common.manifest,
        "target": target_path,
        "reference_exemplar": run.reference,
        "ablation": opts.ablation,
        "seed": opts.seed,
        "panel_size": opts.panel_size,
        "outputs": outputs,
        "stages": stages,
        "elapsed_ms": started.elapsed().as_millis() as u64,
        "pipeline_version": ais_core::representations::PIPELINE_VERSION,
    });
    // timings differ run to run; the record is informational
    ais_core::fsutil::write_atomic(
        &out.join("run.json"),
        serde_json::to_string_pretty(&record)
            .expect("serializes")
            .as_bytes(),
    )?;
    Ok(record)
}

fn cmd_infer(ctx: &Ctx, a: &InferArgs) -> Result<(), Exit> {
    let started = Instant::now();
    let manifest = ctx.manifest()?;
    let target = read_image(&a.target)?;
    let opts = infer_options(
        ctx,
        &manifest,
        a.avat.as_deref(),
        a.svat.as_deref(),
        a.asvat.as_deref(),
        a.ref_exemplar.as_deref(),
    )?;
    let client = ctx.client()?;
    let run = pipeline::infer(&client, &manifest, &target, &opts, ctx.par)?;
    let record = write_run(ctx, &a.out, &a.target, &opts, &run, started)?;
    println!("{}", record["outputs"]);
    Ok(())
}

fn slug(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn cmd_mix(ctx: &Ctx, a: &MixArgs) -> Result<(), Exit> {
    let manifest = ctx.manifest()?;
    let target = read_image(&a.target)?;
    let client = ctx.client()?;
    for id in &a.avat {
        client.require_kind(id, AdapterKind::Avat)?;
    }
    for id in &a.svat {
        client.require_kind(id, AdapterKind::Svat)?;
    }
    let mut results = Vec::new();
    let mut proxies: BTreeMap<&str, PathBuf> = BTreeMap::new();
    for avat in &a.avat {
        for svat in &a.svat {
            let mut opts = infer_options(
                ctx,
                &manifest,
                Some(avat),
                Some(svat),
                None,
                a.ref_exemplar.as_deref(),
            )?;
            if matches!(opts.ablation, Some(Ablation::Asvat)) {
                return Err(Exit::invalid(
                    "mix combines A-VATs with S-VATs; the asvat ablation does not apply",
                ));
            }
            opts.asvat_id = None;
            let run = pipeline::infer(&client, &manifest, &target, &opts, ctx.par)?;
            let path = a.out.join(format!("{}__{}.png", slug(avat), slug(svat)));
            let last = run.stages.last().expect("stage 2 ran");
            write_artifact(
                &path,
                &run.output,
                &stage_provenance("output", &last.grid, &last.adapter_id, last.seed),
            )?;
            if let std::collections::btree_map::Entry::Vacant(e) = proxies.entry(avat) {
                let p = a.out.join(format!("{}__proxy.png", slug(avat)));
                write_if_changed(&p, &encode_png(&run.proxy)?)?;
                e.insert(p);
            }
            results.push(json!({ "avat": avat, "svat": svat, "output": path }));
        }
    }
    write_json(
        &a.out.join("mix.json"),
        &json!({ "target": a.target, "outputs": results }),
    )?;
    println!("{}", json!({ "outputs": results.len() }));
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> Result<(), Exit> {
    if !a.masks.len().is_multiple_of(2) {
        return Err(Exit::invalid("eval takes mask paths in pairs"));
    }
    let mut pairs = Vec::new();
    for pair in a.masks.chunks_exact(2) {
        let load = |p: &PathBuf| -> Result<BinaryImage, Exit> {
            Ok(BinaryImage::from_raster(&read_image(p)?))
        };
        let m = eval_structural(&load(&pair[0])?, &load(&pair[1])?)?;
        pairs.push(json!({
            "a": pair[0],
            "b": pair[1],
            "backbone_iou": m.backbone_iou,
            "component_delta": m.component_delta,
            "fg_ratio_delta": m.fg_ratio_delta,
        }));
    }
    let report = json!({ "pairs": pairs });
    match &a.output {
        Some(p) => {
            write_json(p, &report)?;
        }
        None => println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("serializes")
        ),
    }
    Ok(())
}

fn cmd_serve(ctx: &Ctx, a: &ServeArgs) -> Result<(), Exit> {
    let transform: MockTransform = a.transform.parse()?;
    let registry = a
        .registry
        .clone()
        .unwrap_or_else(|| ctx.common.state_dir().join("mock-registry.json"));
    let backend = Arc::new(MockBackend::with_registry(transform, &registry)?);
    crate::server::run(a.addr, backend, |addr| {
        eprintln!("mock backend listening on http://{addr}");
    })
    .map_err(|e| Exit::new(EXIT_INVALID, format!("serve: {e}")))
}

fn cmd_fixtures(a: &FixturesArgs) -> Result<(), Exit> {
    let files = fixtures::generate()?;
    for (name, value) in &files {
        write_json(&a.out.join(name), value)?;
    }
    println!("{}", json!({ "fixtures": files.len(), "dir": a.out }));
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), Exit> {
    let common = Common::resolve(cli.common, cli.config.as_deref())?;
    let par = if cli.sequential {
        Parallelism::Sequential
    } else {
        Parallelism::default()
    };
    let ctx = Ctx { common, par };
    let go = || match &cli.command {
        Command::Backbone(a) => cmd_backbone(&ctx, a),
        Command::Proxy(a) => cmd_proxy(&ctx, a),
        Command::Trainset(a) => cmd_trainset(&ctx, a),
        Command::Train(a) => cmd_train(&ctx, a),
        Command::Infer(a) => cmd_infer(&ctx, a),
        Command::Mix(a) => cmd_mix(&ctx, a),
        Command::Eval(a) => cmd_eval(a),
        Command::ServeMock(a) => cmd_serve(&ctx, a),
        Command::Fixtures(a) => cmd_fixtures(a),
    };
    match ctx.common.threads {
        Some(n) if par.is_parallel() => ais_core::par::with_bound(n, go),
        _ => go(),
    }
}
