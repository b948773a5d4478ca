//! Boundary tracing of single-component masks into closed pixel-edge paths.
//!
//! Outer boundaries come from Moore-neighbour tracing (8-connected foreground)
//! terminated with Jacob's criterion; while sweeping around each boundary
//! pixel the exposed 4-neighbour sides are emitted as unit edges on the pixel
//! grid, so the resulting polygon runs along pixel corners and fills back to
//! the exact mask. Holes are the background 4-components not connected to
//! the exterior, traced the same way and reversed.
//!
//! Orientation is reported by the shoelace sign in pixel coordinates: outer
//! paths are positive (counter-clockwise in a y-up frame), holes negative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{label_components, BinaryImage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorPath {
    pub points: Vec<Point>,
    pub closed: bool,
}

impl VectorPath {
    pub fn closed(points: Vec<Point>) -> Self {
        Self {
            points,
            closed: true,
        }
    }

    pub fn open(points: Vec<Point>) -> Self {
        Self {
            points,
            closed: false,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Shoelace signed area (positive for outer boundaries).
    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        let mut acc = 0.0;
        for i in 0..n {
            let (p, q) = (self.points[i], self.points[(i + 1) % n]);
            acc += p.x * q.y - q.x * p.y;
        }
        acc / 2.0
    }

    pub fn translated(&self, dx: f64, dy: f64) -> VectorPath {
        VectorPath {
            points: self
                .points
                .iter()
                .map(|p| Point::new(p.x + dx, p.y + dy))
                .collect(),
            closed: self.closed,
        }
    }

    pub fn reversed(&self) -> VectorPath {
        let mut points = self.points.clone();
        points.reverse();
        VectorPath {
            points,
            closed: self.closed,
        }
    }

    /// Closed path with ≥ 3 points and no repeated consecutive vertex.
    pub fn is_well_formed(&self) -> bool {
        let n = self.points.len();
        if self.closed && n < 3 {
            return false;
        }
        let wrap = if self.closed { n } else { n.saturating_sub(1) };
        (0..wrap).all(|i| self.points[i] != self.points[(i + 1) % n])
    }
}

/// Outer boundary plus hole boundaries of one region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub outer: VectorPath,
    pub holes: Vec<VectorPath>,
}

impl Contour {
    pub fn paths(&self) -> impl Iterator<Item = &VectorPath> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }
}

// Clockwise on screen (y down), starting west.
/// A unit pixel edge `(from, to)`.
type Edge = ((i64, i64), (i64, i64));

const DIRS: [(i64, i64); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

fn dir_index(dx: i64, dy: i64) -> usize {
    DIRS.iter()
        .position(|&d| d == (dx, dy))
        .expect("unit 8-neighbour offset")
}

/// Unit edge `(start, end)` of pixel `(x, y)` facing the 4-neighbour in
/// direction `d` (one of W, N, E, S).
fn side(x: i64, y: i64, d: usize) -> Edge {
    match d {
        0 => ((x, y + 1), (x, y)),
        2 => ((x, y), (x + 1, y)),
        4 => ((x + 1, y), (x + 1, y + 1)),
        6 => ((x + 1, y + 1), (x, y + 1)),
        _ => unreachable!("diagonal directions have no side"),
    }
}

/// One sweep around `c` starting at backtrack direction `b`. Returns the
/// next boundary pixel and its backtrack direction, or `None` for an
/// isolated pixel. Exposed sides are appended to `edges`.
fn sweep(
    mask: &BinaryImage,
    c: (i64, i64),
    b: usize,
    edges: &mut Vec<Edge>,
) -> Option<((i64, i64), usize)> {
    for k in 0..8 {
        let d = (b + k) % 8;
        let n = (c.0 + DIRS[d].0, c.1 + DIRS[d].1);
        if mask.get_or_bg(n.0, n.1) {
            let pd = (b + k + 7) % 8;
            let prev = (c.0 + DIRS[pd].0, c.1 + DIRS[pd].1);
            return Some((n, dir_index(prev.0 - n.0, prev.1 - n.1)));
        }
        if d.is_multiple_of(2) {
            edges.push(side(c.0, c.1, d));
        }
    }
    None
}

/// Moore-neighbour boundary of the component containing the first
/// foreground pixel in scanline order, as a corner-vertex loop.
fn moore_loop(mask: &BinaryImage) -> Option<Vec<(i64, i64)>> {
    let start = mask.foreground().next()?;
    let s = (start.0 as i64, start.1 as i64);
    let mut edges = Vec::new();

    // Entered from the west; the first move fixes the state Jacob's
    // criterion waits for.
    let mut scratch = Vec::new();
    let Some(first) = sweep(mask, s, 0, &mut scratch) else {
        return Some(chain(&scratch));
    };
    let limit = 8 * mask.count() + 16;
    let mut state = first;
    for _ in 0..limit {
        let next = sweep(mask, state.0, state.1, &mut edges).expect("not isolated");
        state = next;
        if state == first {
            return Some(chain(&edges));
        }
    }
    unreachable!("Moore tracing failed to close the boundary")
}

/// Joins consecutive unit edges into vertices, keeping only direction changes.
fn chain(edges: &[Edge]) -> Vec<(i64, i64)> {
    debug_assert!(edges
        .iter()
        .zip(edges.iter().cycle().skip(1))
        .all(|(a, b)| a.1 == b.0));
    let n = edges.len();
    let dir = |e: &((i64, i64), (i64, i64))| (e.1 .0 - e.0 .0, e.1 .1 - e.0 .1);
    let mut pts: Vec<(i64, i64)> = (0..n)
        .filter(|&i| dir(&edges[(i + n - 1) % n]) != dir(&edges[i]))
        .map(|i| edges[i].0)
        .collect();
    // start at the topmost-leftmost vertex
    if let Some(pos) = pts
        .iter()
        .enumerate()
        .min_by_key(|(_, p)| (p.1, p.0))
        .map(|(i, _)| i)
    {
        pts.rotate_left(pos);
    }
    pts
}

fn to_path(pts: Vec<(i64, i64)>) -> VectorPath {
    VectorPath::closed(
        pts.into_iter()
            .map(|(x, y)| Point::new(x as f64, y as f64))
            .collect(),
    )
}

/// Traces the boundary of a mask holding exactly one 4-connected component.
pub fn trace_contour(mask: &BinaryImage) -> Result<Contour> {
    let (_, n) = label_components(mask, false);
    match n {
        0 => return Err(Error::EmptyMask),
        1 => {}
        _ => return Err(Error::NotSingleComponent(n)),
    }
    let outer = to_path(moore_loop(mask).expect("non-empty"));

    // Background 4-components of the mask padded by one pixel; the one
    // holding the padding corner is the exterior.
    let (x0, y0, x1, y1) = mask.bounding_box().expect("non-empty");
    let (pw, ph) = (x1 - x0 + 2, y1 - y0 + 2);
    let bg = BinaryImage::from_fn(pw, ph, |x, y| {
        !mask.get_or_bg(x as i64 + x0 as i64 - 1, y as i64 + y0 as i64 - 1)
    });
    let (labels, count) = label_components(&bg, false);
    let mut holes = Vec::new();
    for hole_id in 1..count as u32 {
        let hole = BinaryImage::from_bits(pw, ph, labels.iter().map(|&l| l == hole_id).collect())
            .expect("same canvas");
        let pts = moore_loop(&hole).expect("non-empty hole");
        holes.push(
            to_path(
                pts.into_iter()
                    .map(|(x, y)| (x + x0 as i64 - 1, y + y0 as i64 - 1))
                    .collect(),
            )
            .reversed(),
        );
    }
    for h in &mut holes {
        let pos = h
            .points
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        h.points.rotate_left(pos);
    }
    Ok(Contour { outer, holes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(p: &VectorPath) -> Vec<(f64, f64)> {
        p.points.iter().map(|p| (p.x, p.y)).collect()
    }

    #[test]
    fn single_pixel_is_unit_square() {
        let m = BinaryImage::from_fn(3, 3, |x, y| x == 1 && y == 1);
        let c = trace_contour(&m).unwrap();
        assert_eq!(
            pts(&c.outer),
            vec![(1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (1.0, 2.0)]
        );
        assert!(c.holes.is_empty());
        assert_eq!(c.outer.signed_area(), 1.0);
    }

    #[test]
    fn square_has_four_corners() {
        let m = BinaryImage::from_fn(14, 14, |x, y| (2..12).contains(&x) && (2..12).contains(&y));
        let c = trace_contour(&m).unwrap();
        assert_eq!(
            pts(&c.outer),
            vec![(2.0, 2.0), (12.0, 2.0), (12.0, 12.0), (2.0, 12.0)]
        );
        assert_eq!(c.outer.signed_area(), 100.0);
    }

    #[test]
    fn ring_has_one_clockwise_hole() {
        let m = BinaryImage::from_ascii(&["#####", "#...#", "#...#", "#####"]);
        let c = trace_contour(&m).unwrap();
        assert_eq!(c.holes.len(), 1);
        assert_eq!(c.holes[0].signed_area(), -6.0);
        assert_eq!(c.outer.signed_area(), 20.0);
    }

    #[test]
    fn diagonal_touch_still_encloses() {
        // background only touches the outside diagonally: still a hole
        let m = BinaryImage::from_ascii(&["####.", "#..#.", "#...#", "#####"]);
        let c = trace_contour(&m).unwrap();
        assert_eq!(c.holes.len(), 1);
        assert_eq!(c.holes[0].signed_area(), -5.0);
        let open = BinaryImage::from_ascii(&["##.##", "#...#", "#...#", "#####"]);
        assert!(trace_contour(&open).unwrap().holes.is_empty());
    }

    #[test]
    fn errors() {
        assert!(matches!(
            trace_contour(&BinaryImage::new(4, 4)),
            Err(Error::EmptyMask)
        ));
        let two = BinaryImage::from_ascii(&["#.#"]);
        assert!(matches!(
            trace_contour(&two),
            Err(Error::NotSingleComponent(2))
        ));
    }
}
