//! Test-side oracles shared by the integration suites (and pulled into the
//! CLI acceptance target by path). Written straight from the definitions;
//! nothing here calls into the kernels it checks.
#![allow(dead_code)]

use std::time::{Duration, Instant};

use ais_core::imaging::{erode_with, skeletonize_with, BinaryImage, StructuringDisk};
use ais_core::Parallelism;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn at(bits: &[bool], w: usize, h: usize, x: i64, y: i64) -> u8 {
    if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
        0
    } else {
        bits[y as usize * w + x as usize] as u8
    }
}

/// Zhang–Suen thinning exactly as usually stated: P2..P9 clockwise from
/// north, two subiterations with simultaneous deletion, repeat to fixpoint.
pub fn zhang_suen(w: usize, h: usize, bits: &[bool]) -> Vec<bool> {
    let mut img = bits.to_vec();
    loop {
        let mut changed = false;
        for step in 0..2 {
            let mut doomed = Vec::new();
            for y in 0..h as i64 {
                for x in 0..w as i64 {
                    if at(&img, w, h, x, y) == 0 {
                        continue;
                    }
                    let p2 = at(&img, w, h, x, y - 1);
                    let p3 = at(&img, w, h, x + 1, y - 1);
                    let p4 = at(&img, w, h, x + 1, y);
                    let p5 = at(&img, w, h, x + 1, y + 1);
                    let p6 = at(&img, w, h, x, y + 1);
                    let p7 = at(&img, w, h, x - 1, y + 1);
                    let p8 = at(&img, w, h, x - 1, y);
                    let p9 = at(&img, w, h, x - 1, y - 1);
                    let ring = [p2, p3, p4, p5, p6, p7, p8, p9, p2];
                    let b: u8 = ring[..8].iter().sum();
                    let a = ring.windows(2).filter(|p| p[0] == 0 && p[1] == 1).count();
                    let dir = if step == 0 {
                        p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0
                    } else {
                        p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0
                    };
                    if (2..=6).contains(&b) && a == 1 && dir {
                        doomed.push(y as usize * w + x as usize);
                    }
                }
            }
            changed |= !doomed.is_empty();
            for i in doomed {
                img[i] = false;
            }
        }
        if !changed {
            return img;
        }
    }
}

/// p survives iff every q with |q-p|² ≤ r² is foreground; off-canvas is background.
pub fn erode(w: usize, h: usize, bits: &[bool], r: u32) -> Vec<bool> {
    let r = r as i64;
    let mut out = vec![false; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let mut keep = true;
            'scan: for dy in -r..=r {
                for dx in -r..=r {
                    if dx * dx + dy * dy <= r * r && at(bits, w, h, x + dx, y + dy) == 0 {
                        keep = false;
                        break 'scan;
                    }
                }
            }
            out[y as usize * w + x as usize] = keep;
        }
    }
    out
}

pub fn oracle_skeleton(img: &BinaryImage) -> BinaryImage {
    let (w, h) = img.dimensions();
    BinaryImage::from_bits(w, h, zhang_suen(w as usize, h as usize, img.bits())).unwrap()
}

pub fn oracle_erode(img: &BinaryImage, r: u32) -> BinaryImage {
    let (w, h) = img.dimensions();
    BinaryImage::from_bits(w, h, erode(w as usize, h as usize, img.bits(), r)).unwrap()
}

/// Scanline 0/1 dump used in mismatch messages.
pub fn dump(img: &BinaryImage) -> String {
    let mut s = String::new();
    for y in 0..img.height() {
        for x in 0..img.width() {
            s.push(if img.get(x, y) { '#' } else { '.' });
        }
        s.push('\n');
    }
    s
}

pub fn random_image(rng: &mut StdRng, w: u32, h: u32, density: f64) -> BinaryImage {
    let bits = (0..w * h).map(|_| rng.random_bool(density)).collect();
    BinaryImage::from_bits(w, h, bits).unwrap()
}

/// Exactly `k` distinct foreground pixels.
pub fn random_sparse(rng: &mut StdRng, w: u32, h: u32, k: usize) -> BinaryImage {
    let n = (w * h) as usize;
    let picked = rand::seq::index::sample(rng, n, k.min(n));
    let mut bits = vec![false; n];
    for i in picked {
        bits[i] = true;
    }
    BinaryImage::from_bits(w, h, bits).unwrap()
}

/// Union of random disks, the usual "blob" shape for thinning invariants.
pub fn random_blobs(rng: &mut StdRng, side: u32, count: usize) -> BinaryImage {
    let disks: Vec<(i64, i64, i64)> = (0..count)
        .map(|_| {
            let r = rng.random_range(2..=side as i64 / 4);
            (
                rng.random_range(0..side as i64),
                rng.random_range(0..side as i64),
                r,
            )
        })
        .collect();
    BinaryImage::from_fn(side, side, |x, y| {
        disks
            .iter()
            .any(|&(cx, cy, r)| (x as i64 - cx).pow(2) + (y as i64 - cy).pow(2) <= r * r)
    })
}

#[derive(Debug, Default)]
pub struct MorphologySweep {
    pub images: usize,
    pub mismatches: usize,
    pub first_mismatch: Option<String>,
    pub elapsed: Duration,
}

impl MorphologySweep {
    fn check(&mut self, img: &BinaryImage, radii: &[u32], par: Parallelism) {
        self.images += 1;
        let got = skeletonize_with(img, par);
        let want = oracle_skeleton(img);
        if got != want {
            self.record(format!(
                "skeletonize mismatch on\n{}got\n{}want\n{}",
                dump(img),
                dump(&got),
                dump(&want)
            ));
        }
        for &r in radii {
            let got = erode_with(img, StructuringDisk::new(r), par);
            let want = oracle_erode(img, r);
            if got != want {
                self.record(format!("erode r={r} mismatch on\n{}", dump(img)));
            }
        }
    }

    fn record(&mut self, msg: String) {
        self.mismatches += 1;
        self.first_mismatch.get_or_insert(msg);
    }

    fn merge(&mut self, other: MorphologySweep) {
        self.images += other.images;
        self.mismatches += other.mismatches;
        if self.first_mismatch.is_none() {
            self.first_mismatch = other.first_mismatch;
        }
    }
}

/// Largest canvas area enumerated exhaustively (every one of 2^area images).
pub const EXHAUSTIVE_AREA: u32 = 20;
pub const SMALL_SIDE: u32 = 12;
pub const SPARSE_MAX: usize = 20;
pub const SPARSE_SAMPLES: usize = 20_000;
pub const LARGE_SIDE: u32 = 32;
pub const LARGE_SAMPLES: usize = 1_000;

fn exhaustive_shapes() -> Vec<(u32, u32)> {
    let mut v = Vec::new();
    for h in 1..=SMALL_SIDE {
        for w in 1..=SMALL_SIDE {
            if w * h <= EXHAUSTIVE_AREA {
                v.push((w, h));
            }
        }
    }
    v
}

/// The full oracle sweep:
/// - every image on every canvas up to 12×12 with area ≤ 20;
/// - every 12×12 image with ≤ 2 foreground pixels;
/// - random 12×12 images with 3..=20 foreground pixels;
/// - 1000 random 32×32 images of varying density (both execution paths).
///
/// Work is split over scoped threads by chunk; each chunk is independent.
pub fn morphology_sweep(seed: u64) -> MorphologySweep {
    let start = Instant::now();
    let small_radii = [0, 1, 2];
    let large_radii = [0, 1, 2, 3, 5, 8];
    let threads = std::thread::available_parallelism().map_or(4, |n| n.get());

    // (w, h, first code, last code) chunks of the exhaustive enumeration.
    let mut jobs: Vec<(u32, u32, u64, u64)> = Vec::new();
    for (w, h) in exhaustive_shapes() {
        let total = 1u64 << (w * h);
        let step = (total / (threads as u64 * 4)).max(1 << 12);
        let mut lo = 0;
        while lo < total {
            jobs.push((w, h, lo, (lo + step).min(total)));
            lo += step;
        }
    }

    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut report = std::thread::scope(|s| {
        let workers: Vec<_> = (0..threads)
            .map(|_| {
                s.spawn(|| {
                    let mut part = MorphologySweep::default();
                    loop {
                        let j = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        let Some(&(w, h, lo, hi)) = jobs.get(j) else {
                            break;
                        };
                        for code in lo..hi {
                            let img =
                                BinaryImage::from_fn(w, h, |x, y| code >> (y * w + x) & 1 == 1);
                            part.check(&img, &small_radii, Parallelism::Sequential);
                        }
                    }
                    part
                })
            })
            .collect();
        let mut all = MorphologySweep::default();
        for w in workers {
            all.merge(w.join().unwrap());
        }
        all
    });

    let n = (SMALL_SIDE * SMALL_SIDE) as usize;
    let mut sparse = MorphologySweep::default();
    for i in 0..n {
        for j in i..n {
            let mut bits = vec![false; n];
            bits[i] = true;
            bits[j] = true;
            sparse.check(
                &BinaryImage::from_bits(SMALL_SIDE, SMALL_SIDE, bits).unwrap(),
                &small_radii,
                Parallelism::Sequential,
            );
        }
    }
    sparse.check(
        &BinaryImage::new(SMALL_SIDE, SMALL_SIDE),
        &small_radii,
        Parallelism::Sequential,
    );
    report.merge(sparse);

    let mut rng = rng(seed);
    let mut random = MorphologySweep::default();
    for i in 0..SPARSE_SAMPLES {
        let k = 3 + i % (SPARSE_MAX - 2);
        let img = random_sparse(&mut rng, SMALL_SIDE, SMALL_SIDE, k);
        random.check(&img, &small_radii, Parallelism::Sequential);
    }
    for i in 0..LARGE_SAMPLES {
        let density = 0.15 + 0.8 * (i as f64 / LARGE_SAMPLES as f64);
        let img = random_image(&mut rng, LARGE_SIDE, LARGE_SIDE, density);
        let par = if i % 2 == 0 {
            Parallelism::Sequential
        } else {
            Parallelism::Rayon
        };
        random.check(&img, &large_radii, par);
    }
    report.merge(random);
    report.elapsed = start.elapsed();
    report
}

// ---- backbone corpus ----

use ais_core::imaging::erode as erode_kernel;
use ais_core::representations::{backbone_parts, raster_hash, BackboneParams, BackboneParts};
use ais_core::synthetic;
use std::collections::BTreeMap;
use std::path::PathBuf;

pub const GOLDEN_SIDE: u32 = 1024;

pub fn golden_path() -> PathBuf {
    PathBuf::from(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../core/tests/golden/backbones.json"
    ))
}

/// Rearmost four layers, disk radius 25, 2 px stroke.
pub fn reference_params() -> BackboneParams {
    BackboneParams {
        layer_count: 4,
        erosion_radius: Some(25),
        stroke_width: Some(2),
        ..BackboneParams::default()
    }
}

/// Recomputes the decomposition from the render with the public kernels.
pub fn decomposition_holds(parts: &BackboneParts, radius: u32) -> bool {
    let skel = ais_core::imaging::skeletonize(&parts.render);
    let eroded = erode_kernel(&parts.render, StructuringDisk::new(radius));
    parts.skeleton == skel
        && parts.residuals == eroded
        && parts.backbone == skel.union(&eroded).unwrap()
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GoldenEntry {
    pub sha256: String,
    pub foreground: usize,
}

/// Builds every corpus scene on both execution paths, checks determinism,
/// the decomposition invariant and the checked-in hashes. With
/// `AIS_BLESS=1` the hash file is rewritten instead of compared.
pub fn check_backbone_goldens() -> Result<usize, String> {
    let params = reference_params();
    let mut got = BTreeMap::new();
    for name in synthetic::scene_names() {
        let img = synthetic::scene(name, GOLDEN_SIDE).unwrap();
        let a = backbone_parts(&img, &params, Parallelism::Sequential)
            .map_err(|e| format!("{name}: {e}"))?;
        let b = backbone_parts(&img, &params, Parallelism::Rayon)
            .map_err(|e| format!("{name}: {e}"))?;
        if a != b {
            return Err(format!("{name}: sequential and rayon builds differ"));
        }
        if !decomposition_holds(&a, 25) {
            return Err(format!("{name}: backbone != skeleton ∪ erosion"));
        }
        got.insert(
            name.to_string(),
            GoldenEntry {
                sha256: raster_hash(&a.backbone.to_gray8()),
                foreground: a.backbone.count(),
            },
        );
    }
    let path = golden_path();
    if std::env::var_os("AIS_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, serde_json::to_string_pretty(&got).unwrap() + "\n").unwrap();
        return Ok(got.len());
    }
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let want: BTreeMap<String, GoldenEntry> =
        serde_json::from_str(&text).map_err(|e| e.to_string())?;
    if want != got {
        let diff: Vec<&String> = got.keys().filter(|k| want.get(*k) != got.get(*k)).collect();
        return Err(format!("golden mismatch for {diff:?}"));
    }
    Ok(got.len())
}

/// Bar widths (px at 1024²) on either side of the radius-25 regime.
pub const THIN_WIDTHS: [u32; 6] = [6, 12, 20, 30, 40, 48];
pub const THICK_WIDTHS: [u32; 4] = [56, 64, 90, 140];

/// Thin shapes: residual empty, backbone area == skeleton area. Thick
/// shapes: backbone area > skeleton area.
pub fn check_skeleton_regime() -> Result<String, String> {
    let params = reference_params();
    let mut report = Vec::new();
    for (widths, thin) in [(&THIN_WIDTHS[..], true), (&THICK_WIDTHS[..], false)] {
        for &w in widths {
            let img = synthetic::thin_bars(GOLDEN_SIDE, w);
            let parts =
                backbone_parts(&img, &params, Parallelism::default()).map_err(|e| e.to_string())?;
            let (bb, sk) = (parts.backbone.count(), parts.skeleton.count());
            let ok = if thin {
                bb == sk && parts.residuals.is_empty()
            } else {
                bb > sk
            };
            if !ok {
                return Err(format!("width {w}: backbone {bb} skeleton {sk}"));
            }
            report.push(format!("{w}:{bb}/{sk}"));
        }
    }
    Ok(report.join(" "))
}

// ---- analogy ----

use ais_core::analogy::{
    build_pairs, compose_grid, compose_row, extract_panel, inference_mask, render_prompt,
    GridPanels, PairMode, Quadrant,
};
use ais_core::imaging::RasterImage;

pub fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("ex{i:02}")).collect()
}

/// Counts for both modes over N in [2, 64], plus the worked examples.
pub fn check_pairing() -> Result<String, String> {
    for (n, mode, want) in [
        (10, PairMode::Disjoint, 5),
        (40, PairMode::Disjoint, 20),
        (9, PairMode::Disjoint, 4),
        (9, PairMode::AllPairs, 36),
    ] {
        let got = build_pairs(&ids(n), mode, None)
            .map_err(|e| e.to_string())?
            .len();
        if got != want {
            return Err(format!("N={n} {mode:?}: {got} pairs, want {want}"));
        }
    }
    for n in 2..=64 {
        let ids = ids(n);
        let disjoint = build_pairs(&ids, PairMode::Disjoint, None).map_err(|e| e.to_string())?;
        if disjoint.len() != n / 2 {
            return Err(format!("N={n}: {} disjoint pairs", disjoint.len()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (a, b) in &disjoint {
            if a == b || !seen.insert(a.clone()) || !seen.insert(b.clone()) {
                return Err(format!("N={n}: exemplar repeated in {a},{b}"));
            }
        }
        let all = build_pairs(&ids, PairMode::AllPairs, None).map_err(|e| e.to_string())?;
        let distinct: std::collections::BTreeSet<_> = all.iter().collect();
        if all.len() != n * (n - 1) / 2
            || distinct.len() != all.len()
            || all.iter().any(|(a, b)| a >= b)
        {
            return Err(format!("N={n}: {} all-pairs", all.len()));
        }
        if build_pairs(&ids, PairMode::Disjoint, None).ok() != Some(disjoint) {
            return Err(format!("N={n}: pairing not deterministic"));
        }
    }
    if build_pairs(&ids(1), PairMode::Disjoint, None).is_ok() {
        return Err("N=1 accepted".into());
    }
    Ok("N in [2,64], disjoint floor(N/2), all_pairs N(N-1)/2".into())
}

pub fn noise_panel(rng: &mut StdRng, side: u32) -> RasterImage {
    let px: Vec<u8> = (0..side * side * 3).map(|_| rng.random()).collect();
    RasterImage::new(side, side, ais_core::imaging::PixelFormat::Rgb8, px).unwrap()
}

/// Roundtrip at 1024², exact mask quadrant, 1×2 canvas size.
pub fn check_grid_geometry() -> Result<String, String> {
    let p = 512;
    let mut r = rng(42);
    let panels: Vec<RasterImage> = (0..4).map(|_| noise_panel(&mut r, p)).collect();
    let full = compose_grid(
        &GridPanels::complete(
            panels[0].clone(),
            panels[1].clone(),
            panels[2].clone(),
            panels[3].clone(),
        ),
        p,
    )
    .map_err(|e| e.to_string())?;
    for (q, want) in Quadrant::ALL.iter().zip(&panels) {
        if &extract_panel(&full, *q).map_err(|e| e.to_string())? != want {
            return Err(format!("{q:?} does not roundtrip"));
        }
    }
    let masked = compose_grid(
        &GridPanels::new(panels[0].clone(), panels[1].clone(), panels[2].clone()),
        p,
    )
    .map_err(|e| e.to_string())?;
    let mask = inference_mask(&masked).map_err(|e| e.to_string())?;
    let inside = mask.foreground().all(|(x, y)| x >= p && y >= p);
    if mask.dimensions() != (1024, 1024) || mask.count() != 262_144 || !inside {
        return Err(format!("mask covers {} px", mask.count()));
    }
    let br = extract_panel(&masked, Quadrant::BottomRight).map_err(|e| e.to_string())?;
    if br
        .pixels()
        .iter()
        .any(|&v| v != ais_core::analogy::MASK_FILL)
    {
        return Err("masked panel is not uniform".into());
    }
    let row = compose_row(&panels[0], Some(&panels[1]), p).map_err(|e| e.to_string())?;
    if row.canvas().dimensions() != (1024, 512) {
        return Err(format!("1x2 canvas is {:?}", row.canvas().dimensions()));
    }
    Ok("2x2 roundtrip at 1024², mask 262144 px, 1x2 canvas 1024x512".into())
}

pub fn prompt_fixture_path() -> PathBuf {
    PathBuf::from(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../fixtures/prompt_template.txt"
    ))
}

/// Rendered prompt equals the checked-in template with only the token replaced.
pub fn check_prompt_fixture() -> Result<String, String> {
    let template = std::fs::read_to_string(prompt_fixture_path()).map_err(|e| e.to_string())?;
    if template != ais_core::analogy::PROMPT_TEMPLATE {
        return Err("template constant differs from the fixture".into());
    }
    for token in ["bluecrayon", "sks", "x"] {
        let (head, tail) = template
            .split_once("[styvec]")
            .ok_or("fixture lacks the token")?;
        let want = format!("{head}{token}{tail}");
        if render_prompt(token).map_err(|e| e.to_string())?.as_bytes() != want.as_bytes() {
            return Err(format!("token {token}: bytes differ"));
        }
    }
    if render_prompt("").is_ok() || render_prompt("a\nb").is_ok() {
        return Err("invalid tokens accepted".into());
    }
    Ok(format!("{} bytes, byte-exact", template.len()))
}

/// IoU(x,x)=1, disjoint → 0, symmetric on random pairs.
pub fn check_iou_sanity() -> Result<String, String> {
    use ais_core::eval::iou;
    let mut r = rng(9);
    for i in 0..500 {
        let (w, h) = (r.random_range(1..40), r.random_range(1..40));
        let da = r.random_range(0.05..0.95);
        let a = random_image(&mut r, w, h, da);
        let db = r.random_range(0.05..0.95);
        let b = random_image(&mut r, w, h, db);
        let same = iou(&a, &a).map_err(|e| e.to_string())?;
        let ab = iou(&a, &b).map_err(|e| e.to_string())?;
        let ba = iou(&b, &a).map_err(|e| e.to_string())?;
        let inter = a.intersection(&b).unwrap().count();
        let uni = a.union(&b).unwrap().count();
        let want = if uni == 0 {
            1.0
        } else {
            inter as f64 / uni as f64
        };
        let complement = BinaryImage::from_fn(w, h, |x, y| !a.get(x, y));
        let dis = iou(&a, &complement).map_err(|e| e.to_string())?;
        if same != 1.0 || ab != ba || (ab - want).abs() > 1e-12 || dis != 0.0 {
            return Err(format!(
                "case {i}: self {same} ab {ab} ba {ba} want {want} disjoint {dis}"
            ));
        }
    }
    Ok("500 random pairs".into())
}
