//! Flat-colour region extraction with small-region absorption.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use crate::error::{Error, Result};
use crate::imaging::{BinaryImage, Rgb};

use super::quantize::PaletteImage;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub label: u16,
    pub fill: Rgb,
    pub area: u32,
    /// Scanline index (`y * width + x`) of the region's topmost-leftmost pixel.
    pub first_pixel: u32,
    /// `(x0, y0, x1, y1)`, exclusive max.
    pub bbox: (u32, u32, u32, u32),
}

/// Partition of the canvas into 4-connected flat-colour regions, numbered
/// in scanline order of their first pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMap {
    pub width: u32,
    pub height: u32,
    pub region_of: Vec<u32>,
    pub regions: Vec<Region>,
}

impl RegionMap {
    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// Full-canvas mask of region `id`.
    pub fn mask(&self, id: usize) -> BinaryImage {
        let w = self.width as usize;
        BinaryImage::from_fn(self.width, self.height, |x, y| {
            self.region_of[y as usize * w + x as usize] == id as u32
        })
    }

    /// Mask of region `id` cropped to its bounding box, plus the crop origin.
    pub fn cropped_mask(&self, id: usize) -> (BinaryImage, (u32, u32)) {
        let (x0, y0, x1, y1) = self.regions[id].bbox;
        let w = self.width as usize;
        let mask = BinaryImage::from_fn(x1 - x0, y1 - y0, |x, y| {
            self.region_of[(y + y0) as usize * w + (x + x0) as usize] == id as u32
        });
        (mask, (x0, y0))
    }

    /// Regions paired with their masks.
    pub fn masks(&self) -> Vec<(BinaryImage, Rgb)> {
        (0..self.len())
            .map(|i| (self.mask(i), self.regions[i].fill))
            .collect()
    }

    /// Region owning the most canvas-border pixels (ties: lower id).
    pub fn border_dominant(&self) -> Option<usize> {
        if self.regions.is_empty() {
            return None;
        }
        let (w, h) = (self.width as usize, self.height as usize);
        let mut counts = vec![0u32; self.regions.len()];
        for y in 0..h {
            for x in 0..w {
                if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
                    counts[self.region_of[y * w + x] as usize] += 1;
                }
            }
        }
        counts
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| a.cmp(b).then(ib.cmp(ia)))
            .map(|(i, _)| i)
    }
}

struct Node {
    label: u16,
    area: u32,
    first: u32,
    borders: BTreeMap<u32, u32>,
}

/// Splits the palette image into 4-connected equal-label components.
/// Components smaller than `min_area` are absorbed, smallest first (ties by
/// scanline order), into the neighbour sharing the longest border (ties:
/// lower palette label, then scanline order). Absorbed pixels take the
/// neighbour's label, so neighbours of that label that become connected
/// merge too.
pub fn extract_regions(pimg: &PaletteImage, min_area: u32) -> Result<RegionMap> {
    if min_area == 0 {
        return Err(Error::InvalidParameter(
            "min_area must be at least 1".into(),
        ));
    }
    let (w, h) = (pimg.width as usize, pimg.height as usize);
    let n = w * h;
    let mut comp = vec![u32::MAX; n];
    let mut nodes: Vec<Node> = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if comp[start] != u32::MAX {
            continue;
        }
        let id = nodes.len() as u32;
        let label = pimg.labels[start];
        comp[start] = id;
        stack.push(start);
        let mut area = 0;
        while let Some(i) = stack.pop() {
            area += 1;
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if comp[j] == u32::MAX && pimg.labels[j] == label {
                    comp[j] = id;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        nodes.push(Node {
            label,
            area,
            first: start as u32,
            borders: BTreeMap::new(),
        });
    }

    for y in 0..h {
        for x in 0..w {
            let a = comp[y * w + x];
            let mut link = |b: u32| {
                if a != b {
                    *nodes[a as usize].borders.entry(b).or_default() += 1;
                    *nodes[b as usize].borders.entry(a).or_default() += 1;
                }
            };
            if x + 1 < w {
                link(comp[y * w + x + 1]);
            }
            if y + 1 < h {
                link(comp[(y + 1) * w + x]);
            }
        }
    }

    let mut parent: Vec<u32> = (0..nodes.len() as u32).collect();
    let mut heap: BinaryHeap<Reverse<(u32, u32, u32)>> = nodes
        .iter()
        .enumerate()
        .filter(|(_, nd)| nd.area < min_area)
        .map(|(i, nd)| Reverse((nd.area, nd.first, i as u32)))
        .collect();

    while let Some(Reverse((area, first, id))) = heap.pop() {
        let node = &nodes[id as usize];
        if parent[id as usize] != id || node.area != area || node.first != first {
            continue;
        }
        let Some(target) = node
            .borders
            .iter()
            .max_by(|(&a, &la), (&b, &lb)| {
                let (na, nb) = (&nodes[a as usize], &nodes[b as usize]);
                la.cmp(&lb)
                    .then(nb.label.cmp(&na.label))
                    .then(nb.first.cmp(&na.first))
            })
            .map(|(&t, _)| t)
        else {
            continue;
        };
        let former: Vec<u32> = nodes[id as usize].borders.keys().copied().collect();
        merge(&mut nodes, &mut parent, target, id);
        let label = nodes[target as usize].label;
        for nb in former {
            if nb != target && parent[nb as usize] == nb && nodes[nb as usize].label == label {
                merge(&mut nodes, &mut parent, target, nb);
            }
        }
        let t = &nodes[target as usize];
        if t.area < min_area {
            heap.push(Reverse((t.area, t.first, target)));
        }
    }

    // resolve roots and renumber in scanline order
    let root = |mut i: u32| {
        while parent[i as usize] != i {
            i = parent[i as usize];
        }
        i
    };
    let mut roots: Vec<u32> = (0..nodes.len() as u32)
        .filter(|&i| parent[i as usize] == i)
        .collect();
    roots.sort_by_key(|&r| nodes[r as usize].first);
    let mut new_id = vec![u32::MAX; nodes.len()];
    for (k, &r) in roots.iter().enumerate() {
        new_id[r as usize] = k as u32;
    }
    let resolved: Vec<u32> = (0..nodes.len() as u32)
        .map(|i| new_id[root(i) as usize])
        .collect();

    let region_of: Vec<u32> = comp.iter().map(|&c| resolved[c as usize]).collect();
    let mut regions: Vec<Region> = roots
        .iter()
        .map(|&r| {
            let nd = &nodes[r as usize];
            Region {
                label: nd.label,
                fill: pimg.palette[nd.label as usize],
                area: nd.area,
                first_pixel: nd.first,
                bbox: (u32::MAX, u32::MAX, 0, 0),
            }
        })
        .collect();
    for (i, &r) in region_of.iter().enumerate() {
        let (x, y) = ((i % w) as u32, (i / w) as u32);
        let b = &mut regions[r as usize].bbox;
        *b = (b.0.min(x), b.1.min(y), b.2.max(x + 1), b.3.max(y + 1));
    }
    Ok(RegionMap {
        width: pimg.width,
        height: pimg.height,
        region_of,
        regions,
    })
}

/// Folds `src` into `dst` (both roots), rewiring border counts.
fn merge(nodes: &mut [Node], parent: &mut [u32], dst: u32, src: u32) {
    let borders = std::mem::take(&mut nodes[src as usize].borders);
    for (nb, len) in borders {
        nodes[nb as usize].borders.remove(&src);
        if nb == dst {
            continue;
        }
        *nodes[dst as usize].borders.entry(nb).or_default() += len;
        *nodes[nb as usize].borders.entry(dst).or_default() += len;
    }
    let (area, first) = (nodes[src as usize].area, nodes[src as usize].first);
    let d = &mut nodes[dst as usize];
    d.area += area;
    d.first = d.first.min(first);
    parent[src as usize] = dst;
}
