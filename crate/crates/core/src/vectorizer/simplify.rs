//! Ramer–Douglas–Peucker path simplification.

use super::contour::{Point, VectorPath};

/// Perpendicular distance from `p` to the line through `a` and `b`
/// (plain distance to `a` when the two coincide).
pub fn line_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len = (dx * dx + dy * dy).sqrt();
    if len == 0.0 {
        return ((p.x - a.x).powi(2) + (p.y - a.y).powi(2)).sqrt();
    }
    (dy * (p.x - a.x) - dx * (p.y - a.y)).abs() / len
}

/// Simplifies with distance threshold `eps`. Closed paths are split at their
/// two mutually farthest vertices and each half is simplified separately.
/// `eps == 0` returns the path unchanged.
pub fn simplify_path(path: &VectorPath, eps: f64) -> VectorPath {
    let pts = &path.points;
    let n = pts.len();
    if eps <= 0.0 || n < 3 || (path.closed && n < 4) {
        return path.clone();
    }
    let mut keep = vec![false; n];
    if !path.closed {
        keep[0] = true;
        keep[n - 1] = true;
        rdp(pts, &(0..n).collect::<Vec<_>>(), eps, &mut keep);
    } else {
        let (i, j) = farthest_pair(pts);
        keep[i] = true;
        keep[j] = true;
        let first: Vec<usize> = (i..=j).collect();
        let second: Vec<usize> = (j..n).chain(0..=i).collect();
        rdp(pts, &first, eps, &mut keep);
        rdp(pts, &second, eps, &mut keep);
        if keep.iter().filter(|&&k| k).count() < 3 {
            // a closed path needs a third vertex: the one farthest from the chord
            let (a, b) = (pts[i], pts[j]);
            let far = (0..n)
                .filter(|&k| k != i && k != j)
                .map(|k| (k, line_distance(pts[k], a, b)))
                .fold(None::<(usize, f64)>, |best, (k, d)| match best {
                    Some((_, bd)) if bd >= d => best,
                    _ => Some((k, d)),
                });
            match far {
                Some((k, d)) if d > 0.0 => keep[k] = true,
                _ => return path.clone(),
            }
        }
    }
    VectorPath {
        points: (0..n).filter(|&k| keep[k]).map(|k| pts[k]).collect(),
        closed: path.closed,
    }
}

/// Marks vertices kept by RDP on the chain `idx` (endpoints already kept).
fn rdp(pts: &[Point], idx: &[usize], eps: f64, keep: &mut [bool]) {
    let mut stack = vec![(0usize, idx.len() - 1)];
    while let Some((lo, hi)) = stack.pop() {
        if hi <= lo + 1 {
            continue;
        }
        let (a, b) = (pts[idx[lo]], pts[idx[hi]]);
        let mut best = lo;
        let mut best_d = -1.0;
        for k in lo + 1..hi {
            let d = line_distance(pts[idx[k]], a, b);
            if d > best_d {
                best = k;
                best_d = d;
            }
        }
        if best_d > eps {
            keep[idx[best]] = true;
            stack.push((best, hi));
            stack.push((lo, best));
        }
    }
}

/// Indices `(i, j)`, `i < j`, of the two vertices at maximal distance.
/// Ties resolve to the lexicographically smallest index pair.
fn farthest_pair(pts: &[Point]) -> (usize, usize) {
    // the diameter is realised by convex-hull vertices
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| {
        pts[a]
            .x
            .total_cmp(&pts[b].x)
            .then(pts[a].y.total_cmp(&pts[b].y))
            .then(a.cmp(&b))
    });
    order.dedup_by(|a, b| pts[*a] == pts[*b]);
    let hull = convex_hull(pts, &order);

    let d2 = |a: usize, b: usize| (pts[a].x - pts[b].x).powi(2) + (pts[a].y - pts[b].y).powi(2);
    let mut best = 0.0;
    for (p, &a) in hull.iter().enumerate() {
        for &b in &hull[p + 1..] {
            best = f64::max(best, d2(a, b));
        }
    }
    let mut pair = (0, pts.len().saturating_sub(1));
    let mut found = false;
    for (p, &a) in hull.iter().enumerate() {
        for &b in &hull[p + 1..] {
            if d2(a, b) == best {
                // smallest original index sharing each vertex's coordinates
                let ia = pts.iter().position(|q| *q == pts[a]).unwrap_or(a);
                let ib = pts.iter().position(|q| *q == pts[b]).unwrap_or(b);
                let cand = (ia.min(ib), ia.max(ib));
                if !found || cand < pair {
                    pair = cand;
                    found = true;
                }
            }
        }
    }
    pair
}

/// Andrew's monotone chain over pre-sorted, de-duplicated indices.
fn convex_hull(pts: &[Point], sorted: &[usize]) -> Vec<usize> {
    if sorted.len() < 3 {
        return sorted.to_vec();
    }
    let cross = |o: usize, a: usize, b: usize| {
        (pts[a].x - pts[o].x) * (pts[b].y - pts[o].y)
            - (pts[a].y - pts[o].y) * (pts[b].x - pts[o].x)
    };
    let mut hull: Vec<usize> = Vec::with_capacity(2 * sorted.len());
    for &p in sorted {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in sorted.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}
