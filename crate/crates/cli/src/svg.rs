//! SVG rendering of cone triangles on the simplex.
//!
//! The simplex is drawn as an equilateral triangle of side 1000 with a
//! margin of 50: `(1,0,0)` bottom left, `(0,1,0)` bottom right, `(0,0,1)` on
//! top. A barycentric point `(b1, b2, b3)` goes to `b1 V1 + b2 V2 + b3 V3`.
//! Planar coordinates are written with three decimals; the exact
//! barycentric vertices are kept in each polygon's `data-vertices`.

use std::fmt::Write as _;

use sublab::cones::{a_corner_cones, cylinder_decomposition, ConeBasis, SubdivisionTree};
use num_traits::{One, Zero};
use sublab::exact::project_to_simplex;
use sublab::scalar::{format_rational, rational_to_f64};
use sublab::{OrderedPoint, Q};

use crate::error::CliResult;

pub const SIDE: f64 = 1000.0;
pub const MARGIN: f64 = 50.0;

fn height() -> f64 {
    SIDE * 3f64.sqrt() / 2.0
}

/// Planar position of a barycentric point.
pub fn to_plane(b: &[Q; 3]) -> (f64, f64) {
    let h = height();
    let v = [(MARGIN, MARGIN + h), (MARGIN + SIDE, MARGIN + h), (MARGIN + SIDE / 2.0, MARGIN)];
    let w = b.clone().map(|c| rational_to_f64(&c));
    let x = w[0] * v[0].0 + w[1] * v[1].0 + w[2] * v[2].0;
    let y = w[0] * v[0].1 + w[1] * v[1].1 + w[2] * v[2].1;
    (x, y)
}

struct Layer {
    name: &'static str,
    fill: &'static str,
    cones: Vec<ConeBasis>,
}

/// One picture per depth `k`: `A`, the middles absorbed at steps `1..=k`,
/// the complement of `T^{-k}(A)`, and the `3^k` branch cones of `T^k` with
/// the image of `A` in each of their bases.
pub fn render_depth(tree: &SubdivisionTree, k: u32) -> CliResult<String> {
    let mut layers = vec![Layer { name: "a-corners", fill: "#9db4d6", cones: a_corner_cones().to_vec() }];
    let absorbed: Vec<ConeBasis> =
        tree.levels.iter().take(k as usize).flat_map(|l| l.iter().map(ConeBasis::middle)).collect();
    layers.push(Layer { name: "absorbed", fill: "#c9d9ef", cones: absorbed });
    layers.push(Layer {
        name: "complement",
        fill: "#ffffff",
        cones: tree.levels[k as usize].clone(),
    });
    let cylinders = cylinder_decomposition(k)?;
    let cyl_a: Vec<ConeBasis> = cylinders.iter().flat_map(|c| c.corners()).collect();
    layers.push(Layer { name: "cylinders", fill: "none", cones: cylinders });
    layers.push(Layer { name: "cylinder-a", fill: "none", cones: cyl_a });

    let w = SIDE + 2.0 * MARGIN;
    let h = height() + 2.0 * MARGIN;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.3}" height="{h:.3}" viewBox="0 0 {w:.3} {h:.3}" data-depth="{k}">"#
    )
    .expect("write to string");
    for layer in &layers {
        let (stroke, width, dash) = match layer.name {
            "cylinders" | "cylinder-a" => ("#b05050", 0.5, " stroke-dasharray=\"4 3\""),
            _ => ("#203040", 0.8, ""),
        };
        writeln!(out, r#"  <g id="{}" data-layer="{}"{dash}>"#, layer.name, layer.name).expect("write");
        for c in &layer.cones {
            let v = c.triangle_vertices();
            let pts: Vec<String> = v.iter().map(|b| fmt_pt(to_plane(b))).collect();
            let bary: Vec<String> = v
                .iter()
                .map(|b| b.iter().map(format_rational).collect::<Vec<_>>().join(","))
                .collect();
            writeln!(
                out,
                r#"    <polygon points="{}" data-vertices="{}" data-depth="{}" fill="{}" stroke="{stroke}" stroke-width="{width}"/>"#,
                pts.join(" "),
                bary.join(";"),
                c.depth(),
                layer.fill
            )
            .expect("write");
        }
        writeln!(out, "  </g>").expect("write");
    }
    writeln!(out, "</svg>").expect("write");
    Ok(out)
}

/// An orbit of three-coordinate points, projected to the simplex and drawn
/// as a polyline over the outline of `A`. Zero points are skipped.
pub fn render_trace(trace: &[OrderedPoint<Q>]) -> CliResult<String> {
    let w = SIDE + 2.0 * MARGIN;
    let h = height() + 2.0 * MARGIN;
    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.3}" height="{h:.3}" viewBox="0 0 {w:.3} {h:.3}">"#)
        .expect("write");
    let outline = [[Q::one(), Q::zero(), Q::zero()], [Q::zero(), Q::one(), Q::zero()], [Q::zero(), Q::zero(), Q::one()]];
    let pts: Vec<String> = outline.iter().map(|b| fmt_pt(to_plane(b))).collect();
    writeln!(out, r##"  <polygon points="{}" fill="none" stroke="#203040" stroke-width="0.8"/>"##, pts.join(" "))
        .expect("write");
    for c in a_corner_cones() {
        let pts: Vec<String> = c.triangle_vertices().iter().map(|b| fmt_pt(to_plane(b))).collect();
        writeln!(out, r##"  <polygon points="{}" fill="#9db4d6" stroke="#203040" stroke-width="0.5"/>"##, pts.join(" "))
            .expect("write");
    }
    let mut path = Vec::new();
    for x in trace {
        let p = project_to_simplex(x).ok();
        if let Some(p) = p {
            let c = p.coords();
            path.push(fmt_pt(to_plane(&[c[0].clone(), c[1].clone(), c[2].clone()])));
        }
    }
    writeln!(out, r##"  <polyline points="{}" fill="none" stroke="#b05050" stroke-width="1"/>"##, path.join(" "))
        .expect("write");
    if let Some(first) = path.first() {
        let (x, y) = first.split_once(',').expect("formatted point");
        writeln!(out, r##"  <circle cx="{x}" cy="{y}" r="4" fill="#b05050"/>"##).expect("write");
    }
    writeln!(out, "</svg>").expect("write");
    Ok(out)
}

fn fmt_pt((x, y): (f64, f64)) -> String {
    format!("{x:.3},{y:.3}")
}

/// Exact barycentric vertices listed in an SVG produced by [`render_depth`].
pub fn vertices_in_svg(svg: &str) -> Vec<[String; 3]> {
    let mut out = Vec::new();
    for part in svg.split("data-vertices=\"").skip(1) {
        let Some(end) = part.find('"') else { continue };
        for v in part[..end].split(';') {
            let c: Vec<String> = v.split(',').map(str::to_string).collect();
            if c.len() == 3 {
                out.push([c[0].clone(), c[1].clone(), c[2].clone()]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use sublab::cones::complement_recursion;
    use sublab::scalar::q;

    #[test]
    fn corners_of_the_simplex() {
        let (x, y) = to_plane(&[q(1, 1), q(0, 1), q(0, 1)]);
        assert_eq!((x, y), (MARGIN, MARGIN + height()));
        let (x, _) = to_plane(&[q(0, 1), q(0, 1), q(1, 1)]);
        assert_eq!(x, MARGIN + SIDE / 2.0);
    }

    #[test]
    fn depth_one_has_centroid() {
        let t = complement_recursion(1).unwrap();
        let svg = render_depth(&t, 1).unwrap();
        let v = vertices_in_svg(&svg);
        assert!(v.contains(&["1/3".into(), "1/3".into(), "1/3".into()]));
        assert!(v.contains(&["1/4".into(), "1/4".into(), "1/2".into()]));
    }
}
