//! Deterministic SVG emission with a two-layer group structure.
//!
//! The diagram's y axis points up; SVG's points down, so emitted
//! coordinates are flipped against the top of the bounding box. All numbers
//! are printed with exactly four decimals (never scientific notation,
//! negative zero normalized) and colors as two-decimal percentages, so
//! identical input produces byte-identical output.

use crate::decor::{Anchor, Layer, LineCap, RenderPrimitive, Shape};
use crate::geometry::Point;
use crate::model::{Baseline, Rgb, SceneGraph};
use crate::units::Length;
use std::fmt::Write as _;
use thiserror::Error;

/// Margin added on every side of the drawing.
const MARGIN: f64 = 0.2; // cm

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmitError {
    #[error("nothing to draw")]
    EmptyScene,
    #[error("baseline references undefined vertex `{0}`")]
    UndefinedVertex(String),
}

/// Bounds over all primitive geometry, including stroke half-widths and
/// estimated text boxes, plus a 2mm margin per side.
pub fn layout_bounds(prims: &[RenderPrimitive]) -> Result<BBox, EmitError> {
    let mut min = Point::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut grow = |p: Point, pad: f64| {
        min.x = min.x.min(p.x - pad);
        min.y = min.y.min(p.y - pad);
        max.x = max.x.max(p.x + pad);
        max.y = max.y.max(p.y + pad);
    };
    for prim in prims {
        match &prim.shape {
            Shape::Polyline(line) => {
                let pad = line.width.as_cm() / 2.0;
                for p in &line.pts {
                    grow(*p, pad);
                }
            }
            Shape::Polygon(poly) => {
                let pad = poly.stroke.map(|(_, w)| w.as_cm() / 2.0).unwrap_or(0.0);
                for p in &poly.pts {
                    grow(*p, pad);
                }
            }
            Shape::Text(t) => {
                let w = text_box_width(&t.text, t.size);
                let h = t.size.as_cm();
                grow(Point::new(t.pos.x - w / 2.0, t.pos.y - h / 2.0), 0.0);
                grow(Point::new(t.pos.x + w / 2.0, t.pos.y + h / 2.0), 0.0);
            }
        }
    }
    if !min.x.is_finite() {
        return Err(EmitError::EmptyScene);
    }
    Ok(BBox {
        min: Point::new(min.x - MARGIN, min.y - MARGIN),
        max: Point::new(max.x + MARGIN, max.y + MARGIN),
    })
}

/// The y value (in output pixels, already flipped) recorded as the
/// `data-baseline` attribute, when the scene declares one.
pub fn baseline_metadata(
    scene: &SceneGraph,
    bounds: &BBox,
    ppc: f64,
) -> Result<Option<f64>, EmitError> {
    let y_cm = match &scene.baseline {
        None => return Ok(None),
        Some(Baseline::Y(len)) => len.as_cm(),
        Some(Baseline::Vertex(name)) => {
            scene
                .vertex(name)
                .ok_or_else(|| EmitError::UndefinedVertex(name.clone()))?
                .pos
                .y
        }
    };
    Ok(Some((bounds.max.y - y_cm) * ppc))
}

/// Serializes primitives into an SVG document: one main group, one top
/// group, elements ordered by `z` within each.
pub fn to_svg(
    prims: &[RenderPrimitive],
    ppc: f64,
    baseline_px: Option<f64>,
) -> Result<String, EmitError> {
    let bounds = layout_bounds(prims)?;
    let width = (bounds.max.x - bounds.min.x) * ppc;
    let height = (bounds.max.y - bounds.min.y) * ppc;
    let tx = |x: f64| (x - bounds.min.x) * ppc;
    let ty = |y: f64| (bounds.max.y - y) * ppc;

    let mut out = String::new();
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}""#,
        fmt4(width),
        fmt4(height),
        fmt4(width),
        fmt4(height)
    );
    if let Some(b) = baseline_px {
        let _ = write!(out, r#" data-baseline="{}""#, fmt4(b));
    }
    out.push_str(">\n");

    for (layer, id) in [(Layer::Main, "layer-main"), (Layer::Top, "layer-top")] {
        let _ = writeln!(out, r#"<g id="{id}">"#);
        let mut members: Vec<&RenderPrimitive> =
            prims.iter().filter(|p| p.layer == layer).collect();
        members.sort_by_key(|p| p.z);
        for prim in members {
            write_shape(&mut out, &prim.shape, ppc, &tx, &ty);
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn write_shape(
    out: &mut String,
    shape: &Shape,
    ppc: f64,
    tx: &dyn Fn(f64) -> f64,
    ty: &dyn Fn(f64) -> f64,
) {
    match shape {
        Shape::Polyline(line) => {
            out.push_str("<polyline points=\"");
            for (i, p) in line.pts.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{},{}", fmt4(tx(p.x)), fmt4(ty(p.y)));
            }
            let cap = match line.cap {
                LineCap::Round => "round",
                LineCap::Butt => "butt",
            };
            let _ = write!(
                out,
                "\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\" stroke-linecap=\"{cap}\" stroke-linejoin=\"round\"",
                color(line.stroke),
                fmt4(line.width.as_cm() * ppc),
            );
            if let Some(dash) = &line.dash {
                let _ = write!(
                    out,
                    " stroke-dasharray=\"{} {}\"",
                    fmt4(dash.on.as_cm() * ppc),
                    fmt4(dash.off.as_cm() * ppc)
                );
            }
            out.push_str("/>\n");
        }
        Shape::Polygon(poly) => {
            out.push_str("<path d=\"");
            for (i, p) in poly.pts.iter().enumerate() {
                let cmd = if i == 0 { 'M' } else { 'L' };
                let _ = write!(out, "{cmd}{} {} ", fmt4(tx(p.x)), fmt4(ty(p.y)));
            }
            let _ = write!(out, "Z\" fill=\"{}\"", color(poly.fill));
            if let Some((stroke, width)) = poly.stroke {
                let _ = write!(
                    out,
                    " stroke=\"{}\" stroke-width=\"{}\"",
                    color(stroke),
                    fmt4(width.as_cm() * ppc)
                );
            }
            out.push_str("/>\n");
        }
        Shape::Text(t) => {
            let Anchor::Middle = t.anchor;
            let _ = write!(
                out,
                r#"<text x="{}" y="{}" font-size="{}" font-family="serif" fill="{}" text-anchor="middle" dominant-baseline="middle">"#,
                fmt4(tx(t.pos.x)),
                fmt4(ty(t.pos.y)),
                fmt4(t.size.as_cm() * ppc),
                color(t.color)
            );
            write_text_runs(out, &t.text, t.size.as_cm() * ppc);
            out.push_str("</text>\n");
        }
    }
}

/// Fixed four-decimal formatting; `-0.0000` is normalized to `0.0000`.
pub fn fmt4(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}

/// Colors as `rgb(r%,g%,b%)` with two-decimal percentages.
pub fn color(c: Rgb) -> String {
    format!("rgb({}%,{}%,{}%)", pct(c.r), pct(c.g), pct(c.b))
}

fn pct(v: f64) -> String {
    let s = format!("{:.2}", v * 100.0);
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

pub fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            other => out.push(other),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Script {
    Sup,
    Sub,
}

#[derive(Debug, Clone, PartialEq)]
struct TextRun {
    text: String,
    italic: bool,
    script: Option<Script>,
}

/// A micro-subset of TeX math for labels: `$...$` toggles italics and a
/// `^` or `_` inside math super/subscripts the next character (or braced
/// group). Everything else passes through literally.
fn text_runs(text: &str) -> Vec<TextRun> {
    let mut runs: Vec<TextRun> = Vec::new();
    let mut chars = text.chars().peekable();
    let mut math = false;
    let mut push = |c: &str, italic: bool, script: Option<Script>| {
        if let Some(last) = runs.last_mut() {
            if last.italic == italic && last.script == script {
                last.text.push_str(c);
                return;
            }
        }
        runs.push(TextRun {
            text: c.to_string(),
            italic,
            script,
        });
    };
    while let Some(ch) = chars.next() {
        match ch {
            '$' => math = !math,
            '^' | '_' if math => {
                let script = if ch == '^' { Script::Sup } else { Script::Sub };
                match chars.next() {
                    Some('{') => {
                        for c in chars.by_ref() {
                            if c == '}' {
                                break;
                            }
                            push(&c.to_string(), true, Some(script));
                        }
                    }
                    Some(c) => push(&c.to_string(), true, Some(script)),
                    None => {}
                }
            }
            other => push(&other.to_string(), math, None),
        }
    }
    runs
}

fn write_text_runs(out: &mut String, text: &str, font_px: f64) {
    for run in text_runs(text) {
        let escaped = escape_xml(&run.text);
        let needs_tspan = run.italic || run.script.is_some();
        if !needs_tspan {
            out.push_str(&escaped);
            continue;
        }
        out.push_str("<tspan");
        if run.italic {
            out.push_str(" font-style=\"italic\"");
        }
        match run.script {
            Some(Script::Sup) => {
                let _ = write!(
                    out,
                    " baseline-shift=\"super\" font-size=\"{}\"",
                    fmt4(font_px * 0.7)
                );
            }
            Some(Script::Sub) => {
                let _ = write!(
                    out,
                    " baseline-shift=\"sub\" font-size=\"{}\"",
                    fmt4(font_px * 0.7)
                );
            }
            None => {}
        }
        out.push('>');
        out.push_str(&escaped);
        out.push_str("</tspan>");
    }
}

/// Number of characters a label renders, after stripping math markers; used
/// only for bounding-box estimation.
pub fn display_char_count(text: &str) -> usize {
    text_runs(text).iter().map(|r| r.text.chars().count()).sum()
}

/// Estimated width: 0.55 of the font size per rendered character.
pub fn text_box_width(text: &str, size: Length) -> f64 {
    0.55 * size.as_cm() * display_char_count(text) as f64
}
