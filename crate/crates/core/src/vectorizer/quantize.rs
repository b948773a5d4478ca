//! Palette reduction: median-cut initialisation over the colour histogram,
//! a few Lloyd refinement rounds, then nearest-colour assignment.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::imaging::{RasterImage, Rgb};
use crate::par::{self, Parallelism};

/// Per-pixel palette indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaletteImage {
    pub width: u32,
    pub height: u32,
    pub palette: Vec<Rgb>,
    pub labels: Vec<u16>,
}

impl PaletteImage {
    pub fn label_at(&self, x: u32, y: u32) -> u16 {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    pub fn color_at(&self, x: u32, y: u32) -> Rgb {
        self.palette[self.label_at(x, y) as usize]
    }

    /// Rgb rendering of the colour map.
    pub fn to_raster(&self) -> RasterImage {
        RasterImage::from_fn_rgb(self.width, self.height, |x, y| self.color_at(x, y))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuantizeOptions {
    pub colors: usize,
    pub refine_iterations: usize,
}

pub fn quantize_colors(img: &RasterImage, k: usize) -> Result<PaletteImage> {
    quantize_colors_with(
        img,
        QuantizeOptions {
            colors: k,
            refine_iterations: 4,
        },
        Parallelism::default(),
    )
}

pub fn quantize_colors_with(
    img: &RasterImage,
    opts: QuantizeOptions,
    par: Parallelism,
) -> Result<PaletteImage> {
    if opts.colors == 0 {
        return Err(Error::InvalidParameter(
            "palette size k must be at least 1".into(),
        ));
    }
    let k = opts.colors.min(u16::MAX as usize);
    let (w, h) = img.dimensions();

    let mut hist: BTreeMap<Rgb, u64> = BTreeMap::new();
    for y in 0..h {
        for x in 0..w {
            *hist.entry(img.rgb_at(x, y)).or_default() += 1;
        }
    }
    let entries: Vec<(Rgb, u64)> = hist.into_iter().collect();
    if entries.is_empty() {
        return Ok(PaletteImage {
            width: w,
            height: h,
            palette: Vec::new(),
            labels: Vec::new(),
        });
    }

    let mut palette: Vec<Rgb> = median_cut(&entries, k)
        .iter()
        .map(|b| weighted_mean(b))
        .collect();

    for _ in 0..opts.refine_iterations {
        let assignment = assign(&entries, &palette, par);
        let mut clusters: Vec<Vec<(Rgb, u64)>> = vec![Vec::new(); palette.len()];
        for (e, &a) in entries.iter().zip(&assignment) {
            clusters[a].push(*e);
        }
        let next: Vec<Rgb> = clusters
            .iter()
            .filter(|c| !c.is_empty())
            .map(|c| weighted_mean(c))
            .collect();
        if next == palette {
            break;
        }
        palette = next;
    }

    // merge duplicates, keeping first occurrence
    let mut unique: Vec<Rgb> = Vec::with_capacity(palette.len());
    for c in palette {
        if !unique.contains(&c) {
            unique.push(c);
        }
    }

    // drop entries that end up owning no pixel
    let assignment = assign(&entries, &unique, par);
    let mut used = vec![false; unique.len()];
    for &a in &assignment {
        used[a] = true;
    }
    let remap: Vec<usize> = used
        .iter()
        .scan(0usize, |next, &u| {
            let idx = *next;
            if u {
                *next += 1;
            }
            Some(idx)
        })
        .collect();
    let palette: Vec<Rgb> = unique
        .iter()
        .zip(&used)
        .filter(|(_, &u)| u)
        .map(|(c, _)| *c)
        .collect();

    let lookup: HashMap<Rgb, u16> = entries
        .iter()
        .zip(&assignment)
        .map(|(e, &a)| (e.0, remap[a] as u16))
        .collect();
    let rows = par::map_range(par, h as usize, |y| {
        (0..w)
            .map(|x| lookup[&img.rgb_at(x, y as u32)])
            .collect::<Vec<u16>>()
    });
    Ok(PaletteImage {
        width: w,
        height: h,
        palette,
        labels: rows.concat(),
    })
}

fn dist2(a: Rgb, b: Rgb) -> u32 {
    (0..3)
        .map(|i| {
            let d = a[i] as i32 - b[i] as i32;
            (d * d) as u32
        })
        .sum()
}

/// Nearest palette index per histogram entry; ties go to the lower index.
fn assign(entries: &[(Rgb, u64)], palette: &[Rgb], par: Parallelism) -> Vec<usize> {
    par::map(par, entries, |(c, _)| {
        let mut best = 0;
        let mut best_d = u32::MAX;
        for (i, &p) in palette.iter().enumerate() {
            let d = dist2(*c, p);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    })
}

/// Count-weighted channel mean, rounded half-up.
fn weighted_mean(entries: &[(Rgb, u64)]) -> Rgb {
    let total: u64 = entries.iter().map(|e| e.1).sum();
    let mut out = [0u8; 3];
    for (ch, o) in out.iter_mut().enumerate() {
        let sum: u64 = entries.iter().map(|(c, n)| c[ch] as u64 * n).sum();
        *o = ((2 * sum + total) / (2 * total)) as u8;
    }
    out
}

fn channel_range(b: &[(Rgb, u64)], ch: usize) -> u8 {
    let lo = b.iter().map(|e| e.0[ch]).min().unwrap_or(0);
    let hi = b.iter().map(|e| e.0[ch]).max().unwrap_or(0);
    hi - lo
}

/// Histogram entries `(colour, count)` in one median-cut box.
type ColorBox = Vec<(Rgb, u64)>;

fn median_cut(entries: &[(Rgb, u64)], k: usize) -> Vec<ColorBox> {
    let mut boxes = vec![entries.to_vec()];
    while boxes.len() < k {
        // widest splittable box; ties prefer more pixels, then the earlier box
        let pick = boxes
            .iter()
            .enumerate()
            .filter(|(_, b)| b.len() > 1)
            .max_by(|(ia, a), (ib, b)| {
                let ra = (0..3).map(|c| channel_range(a, c)).max().unwrap_or(0);
                let rb = (0..3).map(|c| channel_range(b, c)).max().unwrap_or(0);
                let na: u64 = a.iter().map(|e| e.1).sum();
                let nb: u64 = b.iter().map(|e| e.1).sum();
                ra.cmp(&rb).then(na.cmp(&nb)).then(ib.cmp(ia))
            })
            .map(|(i, _)| i);
        let Some(i) = pick else { break };
        let b = boxes.swap_remove(i);
        let (lo, hi) = split_box(b);
        boxes.insert(i, lo);
        boxes.push(hi);
    }
    boxes
}

fn split_box(mut b: ColorBox) -> (ColorBox, ColorBox) {
    let ranges: Vec<u8> = (0..3).map(|c| channel_range(&b, c)).collect();
    let ch = (0..3)
        .max_by(|&x, &y| ranges[x].cmp(&ranges[y]).then(y.cmp(&x)))
        .unwrap_or(0);
    b.sort_by(|x, y| x.0[ch].cmp(&y.0[ch]).then(x.0.cmp(&y.0)));
    let total: u64 = b.iter().map(|e| e.1).sum();
    let mut acc = 0;
    let mut median = b[0].0[ch];
    for e in &b {
        acc += e.1;
        if 2 * acc >= total {
            median = e.0[ch];
            break;
        }
    }
    let mut cut = b.partition_point(|e| e.0[ch] <= median);
    if cut == b.len() {
        cut = b.partition_point(|e| e.0[ch] < median);
    }
    let hi = b.split_off(cut);
    (b, hi)
}
