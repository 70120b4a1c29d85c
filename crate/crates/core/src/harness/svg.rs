//! Deterministic SVG figures of planar bodies, points and half-planes.

use std::fmt::Write as _;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::geometry::{clip, ConvexBody, Halfspace, Point};
use crate::scalar::{self, int, ratio, Scalar};

#[derive(Clone, Debug)]
pub enum SvgObject {
    Body(ConvexBody),
    Point(Point),
    Halfspace(Halfspace),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Style {
    pub stroke: String,
    pub fill: String,
    pub fill_opacity: f64,
}

impl Default for Style {
    fn default() -> Self {
        Style { stroke: "#1f3b73".into(), fill: "#6f94d6".into(), fill_opacity: 0.25 }
    }
}

impl Style {
    pub fn new(stroke: &str, fill: &str, fill_opacity: f64) -> Self {
        Style { stroke: stroke.into(), fill: fill.into(), fill_opacity }
    }
}

/// A number rounded to 12 significant digits, without trailing zeros.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return "0".into();
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn num(x: &Scalar) -> String {
    fmt12(scalar::to_f64(x))
}

fn dim_of(o: &SvgObject) -> usize {
    match o {
        SvgObject::Body(b) => b.dim(),
        SvgObject::Point(p) => p.dim(),
        SvgObject::Halfspace(h) => h.dim(),
    }
}

/// Joint bounding box of everything with finite extent.
fn extent(objects: &[(SvgObject, Style)]) -> Option<(Point, Point)> {
    let mut pts: Vec<Point> = Vec::new();
    for (o, _) in objects {
        match o {
            SvgObject::Body(b) if !b.is_empty() => pts.extend(b.verts().iter().cloned()),
            SvgObject::Body(_) => {}
            SvgObject::Point(p) => pts.push(p.clone()),
            SvgObject::Halfspace(h) => pts.push(h.foot()),
        }
    }
    let first = pts.first()?;
    let mut lo = first.clone();
    let mut hi = first.clone();
    for p in &pts {
        for i in 0..2 {
            if p.0[i] < lo.0[i] {
                lo.0[i] = p.0[i].clone();
            }
            if p.0[i] > hi.0[i] {
                hi.0[i] = p.0[i].clone();
            }
        }
    }
    Some((lo, hi))
}

/// Renders the objects in order. The y axis points up.
pub fn render_svg(objects: &[(SvgObject, Style)]) -> Result<String> {
    if let Some(d) = objects.iter().map(|(o, _)| dim_of(o)).find(|&d| d != 2) {
        return Err(Error::UnsupportedDimension(d));
    }
    let mut out = String::new();
    let Some((mut lo, mut hi)) = extent(objects) else {
        out.push_str("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1 1\">\n</svg>\n");
        return Ok(out);
    };
    let mut w = &hi.0[0] - &lo.0[0];
    let mut h = &hi.0[1] - &lo.0[1];
    let side = w.clone().max(h.clone());
    let side = if side.is_zero() { Scalar::one() } else { side };
    for (i, len) in [&mut w, &mut h].into_iter().enumerate() {
        if len.is_zero() {
            *len = side.clone();
            lo.0[i] -= &side / int(2);
            hi.0[i] += &side / int(2);
        }
    }
    let mx = &w * ratio(1, 20);
    let my = &h * ratio(1, 20);
    lo.0[0] -= &mx;
    lo.0[1] -= &my;
    hi.0[0] += &mx;
    hi.0[1] += &my;
    let view = ConvexBody::rect(lo.0[0].clone(), hi.0[0].clone(), lo.0[1].clone(), hi.0[1].clone());
    let vw = &hi.0[0] - &lo.0[0];
    let vh = &hi.0[1] - &lo.0[1];
    let radius = vw.clone().min(vh.clone()) * ratio(1, 100);
    let stroke_w = &radius / int(3);
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">",
        num(&lo.0[0]),
        num(&-&hi.0[1]),
        num(&vw),
        num(&vh)
    )
    .unwrap();
    let paint = |s: &Style| {
        format!(
            "fill=\"{}\" fill-opacity=\"{}\" stroke=\"{}\" stroke-width=\"{}\"",
            s.fill,
            fmt12(s.fill_opacity),
            s.stroke,
            num(&stroke_w)
        )
    };
    for (o, style) in objects {
        match o {
            SvgObject::Point(p) => {
                writeln!(
                    out,
                    "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" {}/>",
                    num(p.x()),
                    num(&-p.y()),
                    num(&radius),
                    paint(style)
                )
                .unwrap();
            }
            SvgObject::Body(b) => {
                if b.is_empty() {
                    continue;
                }
                let shown = if b.is_bounded() { b.clone() } else { crate::geometry::intersect(&[b.clone(), view.clone()])? };
                polygon(&mut out, &shown, &paint(style));
            }
            SvgObject::Halfspace(hs) => {
                let shown = clip(&view, hs)?;
                if !shown.is_empty() {
                    polygon(&mut out, &shown, &paint(style));
                }
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn polygon(out: &mut String, b: &ConvexBody, paint: &str) {
    let pts: Vec<String> = b.verts().iter().map(|p| format!("{},{}", num(p.x()), num(&-p.y()))).collect();
    match pts.len() {
        1 => {
            let p = &b.verts()[0];
            writeln!(out, "  <circle cx=\"{}\" cy=\"{}\" r=\"0\" {paint}/>", num(p.x()), num(&-p.y())).unwrap();
        }
        2 => writeln!(out, "  <polyline points=\"{}\" {paint}/>", pts.join(" ")).unwrap(),
        _ => writeln!(out, "  <polygon points=\"{}\" {paint}/>", pts.join(" ")).unwrap(),
    }
}

/// Vertex coordinates of every polygon element, in document order.
pub fn polygon_points(svg: &str) -> Vec<Vec<(f64, f64)>> {
    svg.lines()
        .filter_map(|l| l.trim().strip_prefix("<polygon points=\""))
        .map(|rest| {
            let list = rest.split('"').next().unwrap_or("");
            list.split_whitespace()
                .filter_map(|xy| {
                    let (x, y) = xy.split_once(',')?;
                    Some((x.parse().ok()?, y.parse().ok()?))
                })
                .collect()
        })
        .collect()
}
