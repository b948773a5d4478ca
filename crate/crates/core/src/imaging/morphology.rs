//! Binary morphology: Zhang–Suen thinning and disk erosion.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::par::{self, Parallelism};

use super::binary::BinaryImage;

/// Closed disk structuring element: `(dx, dy)` is a member iff
/// `dx² + dy² ≤ radius²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StructuringDisk {
    pub radius: u32,
}

impl StructuringDisk {
    pub fn new(radius: u32) -> Self {
        Self { radius }
    }

    pub fn contains(&self, dx: i64, dy: i64) -> bool {
        let r = self.radius as i64;
        dx * dx + dy * dy <= r * r
    }

    /// Horizontal half-extent of the disk on row `dy` (`|dy| ≤ radius`).
    pub fn half_width(&self, dy: i64) -> i64 {
        let r = self.radius as i64;
        isqrt((r * r - dy * dy) as u64) as i64
    }

    /// All member offsets in scanline order.
    pub fn offsets(&self) -> Vec<(i64, i64)> {
        let r = self.radius as i64;
        let mut out = Vec::new();
        for dy in -r..=r {
            let hw = self.half_width(dy);
            for dx in -hw..=hw {
                out.push((dx, dy));
            }
        }
        out
    }
}

fn isqrt(n: u64) -> u64 {
    let mut s = (n as f64).sqrt() as u64;
    while s * s > n {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= n {
        s += 1;
    }
    s
}

/// Foreground union; errors when the canvases differ.
pub fn union(a: &BinaryImage, b: &BinaryImage) -> Result<BinaryImage> {
    a.union(b)
}

pub fn erode(img: &BinaryImage, disk: StructuringDisk) -> BinaryImage {
    erode_with(img, disk, Parallelism::default())
}

/// Erosion by a disk. A pixel survives iff every disk offset around it
/// lands on foreground; out-of-canvas pixels count as background.
pub fn erode_with(img: &BinaryImage, disk: StructuringDisk, par: Parallelism) -> BinaryImage {
    if disk.radius == 0 {
        return img.clone();
    }
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut out = BinaryImage::new(img.width(), img.height());
    if w == 0 || h == 0 {
        return out;
    }
    let r = disk.radius as i64;

    // Row prefix sums of foreground counts: prefix[y * (w + 1) + x] = count in row y, [0, x).
    let mut prefix = vec![0u32; (w + 1) * h];
    par::for_each_row(par, &mut prefix, w + 1, |y, row| {
        let bits = &img.bits()[y * w..(y + 1) * w];
        for x in 0..w {
            row[x + 1] = row[x] + bits[x] as u32;
        }
    });
    let half: Vec<i64> = (-r..=r).map(|dy| disk.half_width(dy)).collect();

    par::for_each_row(par, out.bits_mut(), w, |y, row| {
        let y = y as i64;
        if y - r < 0 || y + r >= h as i64 {
            return;
        }
        for (x, cell) in row.iter_mut().enumerate() {
            let x = x as i64;
            if !img.bits()[y as usize * w + x as usize] {
                continue;
            }
            *cell = half.iter().enumerate().all(|(k, &hw)| {
                let yy = (y - r + k as i64) as usize;
                if x - hw < 0 || x + hw >= w as i64 {
                    return false;
                }
                let p = &prefix[yy * (w + 1)..(yy + 1) * (w + 1)];
                (p[(x + hw + 1) as usize] - p[(x - hw) as usize]) as i64 == 2 * hw + 1
            });
        }
    });
    out
}

// Neighbour bit layout (Zhang–Suen naming P2..P9, clockwise from north):
// bit0 N, bit1 NE, bit2 E, bit3 SE, bit4 S, bit5 SW, bit6 W, bit7 NW.
const NEIGHBOURS: [(i64, i64); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

const fn bit(code: usize, i: usize) -> usize {
    (code >> i) & 1
}

const fn deletion_table(second: bool) -> [bool; 256] {
    let mut table = [false; 256];
    let mut code: usize = 0;
    while code < 256 {
        let b = code.count_ones();
        let mut a = 0;
        let mut i = 0;
        while i < 8 {
            if bit(code, i) == 0 && bit(code, (i + 1) % 8) == 1 {
                a += 1;
            }
            i += 1;
        }
        let (n, e, s, w) = (bit(code, 0), bit(code, 2), bit(code, 4), bit(code, 6));
        let directional = if second {
            n * e * w == 0 && n * s * w == 0
        } else {
            n * e * s == 0 && e * s * w == 0
        };
        table[code] = b >= 2 && b <= 6 && a == 1 && directional;
        code += 1;
    }
    table
}

static FIRST_PASS: [bool; 256] = deletion_table(false);
static SECOND_PASS: [bool; 256] = deletion_table(true);

fn neighbourhood(bits: &[bool], w: i64, h: i64, i: usize) -> usize {
    let (x, y) = (i as i64 % w, i as i64 / w);
    let mut code = 0;
    for (k, &(dx, dy)) in NEIGHBOURS.iter().enumerate() {
        let (nx, ny) = (x + dx, y + dy);
        if nx >= 0 && ny >= 0 && nx < w && ny < h && bits[(ny * w + nx) as usize] {
            code |= 1 << k;
        }
    }
    code
}

pub fn skeletonize(img: &BinaryImage) -> BinaryImage {
    skeletonize_with(img, Parallelism::default())
}

/// Zhang–Suen two-subiteration thinning, run until a full iteration
/// deletes nothing. Out-of-canvas pixels are background.
///
/// Only pixels touching the background can ever be deleted, so each
/// subiteration examines the current border set instead of the full canvas.
pub fn skeletonize_with(img: &BinaryImage, par: Parallelism) -> BinaryImage {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut bits = img.bits().to_vec();
    let mut stamp = vec![0u32; bits.len()];
    let mut epoch = 0u32;

    let mut candidates: Vec<usize> = (0..bits.len())
        .filter(|&i| bits[i] && neighbourhood(&bits, w, h, i) != 0xFF)
        .collect();

    loop {
        let mut deleted_any = false;
        for table in [&FIRST_PASS, &SECOND_PASS] {
            let current = &bits;
            let flags = par::map(par, &candidates, |&i| {
                table[neighbourhood(current, w, h, i)]
            });
            let doomed: Vec<usize> = candidates
                .iter()
                .zip(&flags)
                .filter(|(_, &f)| f)
                .map(|(&i, _)| i)
                .collect();
            if doomed.is_empty() {
                continue;
            }
            deleted_any = true;
            for &i in &doomed {
                bits[i] = false;
            }

            epoch += 1;
            let mut next = Vec::with_capacity(candidates.len());
            let mut push = |i: usize, next: &mut Vec<usize>| {
                if bits[i] && stamp[i] != epoch {
                    stamp[i] = epoch;
                    next.push(i);
                }
            };
            for &i in &candidates {
                push(i, &mut next);
            }
            for &i in &doomed {
                let (x, y) = (i as i64 % w, i as i64 / w);
                for &(dx, dy) in &NEIGHBOURS {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx >= 0 && ny >= 0 && nx < w && ny < h {
                        push((ny * w + nx) as usize, &mut next);
                    }
                }
            }
            candidates = next;
        }
        if !deleted_any {
            break;
        }
    }
    BinaryImage::from_bits(img.width(), img.height(), bits).expect("same canvas")
}
