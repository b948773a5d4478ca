//! Debug export of a layer set as SVG: a background rect followed by one
//! even-odd `<path>` per layer in back-to-front order. Not load-bearing.

use std::fmt::Write;

use super::{LayerSet, VectorPath};

fn subpath(out: &mut String, p: &VectorPath) {
    for (i, pt) in p.points.iter().enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        let _ = write!(out, "{cmd}{} {} ", pt.x, pt.y);
    }
    if p.closed {
        out.push_str("Z ");
    }
}

pub fn to_svg(set: &LayerSet) -> String {
    let hex = |c: [u8; 3]| format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2]);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
        w = set.width,
        h = set.height
    );
    let _ = writeln!(
        out,
        "  <rect width=\"100%\" height=\"100%\" fill=\"{}\"/>",
        hex(set.background)
    );
    for layer in &set.layers {
        let mut d = String::new();
        for p in layer.paths() {
            subpath(&mut d, p);
        }
        let _ = writeln!(
            out,
            "  <path data-z=\"{}\" fill=\"{}\" fill-rule=\"evenodd\" d=\"{}\"/>",
            layer.z,
            hex(layer.fill),
            d.trim_end()
        );
    }
    out.push_str("</svg>\n");
    out
}
