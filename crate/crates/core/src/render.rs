//! Deterministic SVG 1.1 pictures: Ford circles, triangulated polygons with
//! a highlighted horoball and its branches, and the geodesic overlay used
//! by the midpoint horoball search.

use std::fmt::Write;

use crate::error::Result;
use crate::farey::{big_to_f64, Slope};
use crate::hyperbolic::{geometric_horoball, GeometricHoroball};
use crate::ksystem::branch_profile;
use crate::triangulation::{FareyLabelling, Triangulation};

const BRANCH_COLOURS: [&str; 6] = [
    "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#a65628",
];

fn header(w: f64, h: f64) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    )
}

/// Ford circles of the slopes in `[0, 1]` with denominator at most `max_denom`.
pub fn ford_svg(max_denom: u64) -> String {
    let (w, h) = (800.0, 440.0);
    let scale = 700.0;
    let (x0, base) = (50.0, 420.0);
    let mut out = header(w, h);
    let _ = writeln!(
        out,
        "<line x1=\"0\" y1=\"{base}\" x2=\"{w}\" y2=\"{base}\" stroke=\"black\" stroke-width=\"1\"/>"
    );
    let _ = writeln!(
        out,
        "<line x1=\"0\" y1=\"{:.3}\" x2=\"{w}\" y2=\"{:.3}\" stroke=\"#555\" stroke-dasharray=\"4 3\"/>",
        base - scale * 0.5,
        base - scale * 0.5
    );
    for q in 1..=max_denom.max(1) {
        for p in 0..=q {
            if num_integer::gcd(p, q) != 1 {
                continue;
            }
            let r = 1.0 / (2.0 * (q * q) as f64);
            let cx = x0 + scale * p as f64 / q as f64;
            let cy = base - scale * r;
            let _ = writeln!(
                out,
                "<circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"{:.3}\" fill=\"none\" stroke=\"#1f4e79\" stroke-width=\"0.8\"><title>{p}/{q}</title></circle>",
                scale * r
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// The polygon with its diagonals; when `highlight` is set, the fan at that
/// vertex is shaded and each branch drawn in its own colour.
pub fn triangulation_svg(
    t: &Triangulation,
    l: &FareyLabelling,
    highlight: Option<usize>,
) -> Result<String> {
    let n = t.n();
    let (size, c, rad) = (600.0, 300.0, 240.0);
    let pos = |v: usize| {
        let a = std::f64::consts::PI / 2.0 + 2.0 * std::f64::consts::PI * v as f64 / n as f64;
        (c + rad * a.cos(), c - rad * a.sin())
    };
    let mut out = header(size, size);
    if let Some(v) = highlight {
        t.check_vertex(v)?;
        let p = branch_profile(t, v)?;
        for &i in &p.spine_nodes {
            let tri = t.triangles()[i];
            let pts: Vec<String> = tri
                .iter()
                .map(|&x| {
                    let (x, y) = pos(x);
                    format!("{x:.3},{y:.3}")
                })
                .collect();
            let _ = writeln!(
                out,
                "<polygon points=\"{}\" fill=\"#ffe9a8\" stroke=\"none\"/>",
                pts.join(" ")
            );
        }
        for (j, b) in p.branches.iter().enumerate() {
            let colour = BRANCH_COLOURS[j % BRANCH_COLOURS.len()];
            for w in b.vertices.windows(2) {
                let ((x1, y1), (x2, y2)) = (pos(w[0]), pos(w[1]));
                let _ = writeln!(
                    out,
                    "<line x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\" stroke=\"{colour}\" stroke-width=\"5\" stroke-opacity=\"0.5\"/>"
                );
            }
        }
    }
    let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    edges.extend_from_slice(t.diagonals());
    for (a, b) in edges {
        let ((x1, y1), (x2, y2)) = (pos(a), pos(b));
        let _ = writeln!(
            out,
            "<line x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\" stroke=\"black\" stroke-width=\"1.2\"/>"
        );
    }
    for v in 0..n {
        let (x, y) = pos(v);
        let (lx, ly) = (c + (x - c) * 1.1, c + (y - c) * 1.1);
        let fill = if Some(v) == highlight {
            "#c00"
        } else {
            "black"
        };
        let _ = writeln!(
            out,
            "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"3\" fill=\"{fill}\"/>"
        );
        let _ = writeln!(
            out,
            "<text x=\"{lx:.3}\" y=\"{ly:.3}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            l.label(v)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Upper half-plane view of the labels' Ford circles with the geodesic
/// between a pair realising `κ`, its midpoint and the chosen horoball.
pub fn geodesic_svg(t: &Triangulation, l: &FareyLabelling) -> Result<(String, GeometricHoroball)> {
    let g = geometric_horoball(t, l)?;
    let finite: Vec<f64> = l
        .labels
        .iter()
        .filter(|s| !s.is_infinity())
        .map(Slope::to_f64)
        .collect();
    let lo = finite.iter().cloned().fold(f64::INFINITY, f64::min) - 0.5;
    let hi = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 0.5;
    let (w, h, margin) = (800.0, 460.0, 20.0);
    let scale = ((w - 2.0 * margin) / (hi - lo)).min((h - 2.0 * margin) / 1.2);
    let base = h - margin;
    let px = |x: f64| margin + (x - lo) * scale;
    let py = |y: f64| base - y * scale;
    let mut out = header(w, h);
    let _ = writeln!(
        out,
        "<line x1=\"0\" y1=\"{base:.3}\" x2=\"{w}\" y2=\"{base:.3}\" stroke=\"black\"/>"
    );
    for (v, s) in l.labels.iter().enumerate() {
        let colour = if v == g.vertex { "#c00" } else { "#1f4e79" };
        let width = if v == g.vertex { 2.0 } else { 0.8 };
        if s.is_infinity() {
            let _ = writeln!(
                out,
                "<line x1=\"0\" y1=\"{:.3}\" x2=\"{w}\" y2=\"{:.3}\" stroke=\"{colour}\" stroke-width=\"{width}\"><title>1/0</title></line>",
                py(1.0),
                py(1.0)
            );
            continue;
        }
        let q = big_to_f64(s.denom());
        let r = 1.0 / (2.0 * q * q);
        let _ = writeln!(
            out,
            "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"{:.3}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"{width}\"><title>{s}</title></circle>",
            px(s.to_f64()),
            py(r),
            r * scale
        );
    }
    let (a, b) = (l.label(g.pair.0), l.label(g.pair.1));
    if a.is_infinity() || b.is_infinity() {
        let x = if a.is_infinity() {
            b.to_f64()
        } else {
            a.to_f64()
        };
        let _ = writeln!(
            out,
            "<line x1=\"{:.3}\" y1=\"{base:.3}\" x2=\"{:.3}\" y2=\"0\" stroke=\"#2a2\" stroke-width=\"1.5\"/>",
            px(x),
            px(x)
        );
    } else {
        let (xa, xb) = (a.to_f64(), b.to_f64());
        let r = (xb - xa).abs() / 2.0 * scale;
        let _ = writeln!(
            out,
            "<path d=\"M {:.3} {base:.3} A {r:.3} {r:.3} 0 0 1 {:.3} {base:.3}\" fill=\"none\" stroke=\"#2a2\" stroke-width=\"1.5\"/>",
            px(xa.min(xb)),
            px(xa.max(xb))
        );
    }
    let _ = writeln!(
        out,
        "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"4\" fill=\"#2a2\"><title>midpoint</title></circle>",
        px(g.midpoint.x),
        py(g.midpoint.y)
    );
    out.push_str("</svg>\n");
    Ok((out, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{generate, FamilyKind, FamilySpec};

    #[test]
    fn ford_picture_is_deterministic() {
        let a = ford_svg(5);
        assert_eq!(a, ford_svg(5));
        assert!(a.starts_with("<?xml"));
        assert!(a.trim_end().ends_with("</svg>"));
        // Farey fractions in [0, 1] with denominator ≤ 5: 2 + 1 + 2 + 2 + 4.
        assert_eq!(a.matches("<circle").count(), 11);
    }

    #[test]
    fn triangulation_pictures() {
        let (t, l) = generate(&FamilySpec::new(FamilyKind::Farey, 4).unwrap()).unwrap();
        let svg = triangulation_svg(&t, &l, Some(0)).unwrap();
        assert_eq!(svg.matches("<text").count(), t.n());
        assert_eq!(svg, triangulation_svg(&t, &l, Some(0)).unwrap());
        assert!(triangulation_svg(&t, &l, Some(99)).is_err());
        let (svg, g) = geodesic_svg(&t, &l).unwrap();
        assert!(svg.contains("midpoint"));
        assert!(g.vertex < t.n());
    }
}
