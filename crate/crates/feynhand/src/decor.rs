//! Turns resolved propagators and vertices into styled render primitives:
//! waveforms, coils, dash patterns, arrows, labels, momentum arrows,
//! insertion crosses, crossing halos and vertex marks.
//!
//! All derived sizes live in [`DecorParams`] and are recomputed from the
//! configuration snapshot, so wave and coil geometry scales linearly with
//! the line size and can be retuned in one place.

use crate::dsl::Span;
use crate::geometry::{base_path, GeomError, PathGeom, Point, Side};
use crate::model::{Config, Propagator, PropagatorStyle, Rgb, SceneGraph, Vertex, VertexStyle};
use crate::units::Length;
use std::f64::consts::PI;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Main,
    Top,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineCap {
    Round,
    Butt,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DashPattern {
    pub on: Length,
    pub off: Length,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub pts: Vec<Point>,
    pub stroke: Rgb,
    pub width: Length,
    pub dash: Option<DashPattern>,
    pub cap: LineCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub pts: Vec<Point>,
    pub fill: Rgb,
    pub stroke: Option<(Rgb, Length)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    Middle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextLabel {
    pub pos: Point,
    pub text: String,
    pub size: Length,
    pub color: Rgb,
    pub anchor: Anchor,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Polyline(Polyline),
    Polygon(Polygon),
    Text(TextLabel),
}

/// One drawable item. `z` is assigned in emission order and is strictly
/// increasing within each layer.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderPrimitive {
    pub shape: Shape,
    pub layer: Layer,
    pub z: u32,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecorErrorKind {
    #[error("path too short for a coil decoration")]
    PathTooShort,
    #[error(transparent)]
    Geometry(GeomError),
    #[error("scene references missing vertex `{0}`")]
    MissingVertex(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecorError {
    pub kind: DecorErrorKind,
    pub span: Span,
}

impl fmt::Display for DecorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.col, self.kind)
    }
}

impl std::error::Error for DecorError {}

/// Sizes derived from the configuration snapshot. Wave and coil parameters
/// scale linearly with the line size; momentum arrow sizes follow the 0.64
/// and 0.8 factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecorParams {
    pub linesize: Length,
    pub wave_amp: Length,
    pub wave_half: Length,
    pub coil_amp: Length,
    pub coil_pitch: Length,
    pub arrow_len: Length,
    pub arrow_halfwidth: Length,
    pub mom_width: Length,
    pub mom_tip: Length,
    pub mom_offset: Length,
    pub mom_label_extra: Length,
    pub edge_label_offset: Length,
    pub dash_on: Length,
    pub dash_off: Length,
    pub dot_on: Length,
    pub dot_off: Length,
    pub insertion_default: Length,
    pub font_size: Length,
    pub topsep: Length,
    pub topcolor: Rgb,
}

impl DecorParams {
    pub fn from_config(cfg: &Config) -> Self {
        DecorParams {
            linesize: cfg.linesize,
            wave_amp: cfg.linesize.scaled(4.0),
            wave_half: cfg.linesize.scaled(9.0),
            coil_amp: cfg.linesize.scaled(5.0),
            coil_pitch: cfg.linesize.scaled(8.0),
            arrow_len: cfg.arrowsize,
            arrow_halfwidth: cfg.arrowsize.scaled(0.35),
            mom_width: cfg.linesize.scaled(0.64),
            mom_tip: cfg.arrowsize.scaled(0.8),
            mom_offset: cfg.linesize.scaled(4.0) + Length::pt(3.0),
            mom_label_extra: Length::pt(6.0),
            edge_label_offset: Length::pt(8.0),
            dash_on: Length::pt(3.0),
            dash_off: Length::pt(3.0),
            dot_on: cfg.linesize,
            dot_off: Length::pt(2.0),
            insertion_default: cfg.arrowsize,
            font_size: Length::pt(10.0),
            topsep: cfg.topsep(),
            topcolor: cfg.topcolor,
        }
    }
}

const WAVE_SAMPLES_PER_HALF: usize = 16;
const COIL_SAMPLES_PER_LOOP: usize = 32;

/// Upper bound on wave half-periods and coil loops. At default sizes this
/// corresponds to several meters of path, far beyond any plottable diagram,
/// and keeps sample counts bounded on degenerate inputs.
const MAX_PERIODS: f64 = 4096.0;

/// Sine displacement along the left normal, with a whole number of
/// half-periods so the displacement vanishes exactly at both ends.
pub fn wave_polyline(
    path: &PathGeom,
    amp: Length,
    half_period: Length,
    stroke: Rgb,
    width: Length,
) -> Polyline {
    let n = (path.total_len() / half_period.as_cm())
        .round()
        .clamp(2.0, MAX_PERIODS);
    let steps = n as usize * WAVE_SAMPLES_PER_HALF;
    let a = amp.as_cm();
    let mut pts = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let s = i as f64 / steps as f64;
        let (p, tan) = path.point_at(s);
        let disp = a * (n * PI * s).sin();
        pts.push(p + tan.rot90() * disp);
    }
    pts[0] = path.start();
    let last = pts.len() - 1;
    pts[last] = path.end();
    Polyline {
        pts,
        stroke,
        width,
        dash: None,
        cap: LineCap::Round,
    }
}

/// Cycloidal coil: the point swings backward along the tangent by
/// `0.35 * pitch * sin(phase)` while bulging out along the left normal, so
/// consecutive loops overlap. Endpoints coincide with the path ends.
pub fn coil_polyline(
    path: &PathGeom,
    amp: Length,
    pitch: Length,
    stroke: Rgb,
    width: Length,
    span: Span,
) -> Result<Polyline, DecorError> {
    if path.total_len() <= pitch.as_cm() {
        return Err(DecorError {
            kind: DecorErrorKind::PathTooShort,
            span,
        });
    }
    let m = (path.total_len() / pitch.as_cm())
        .round()
        .clamp(2.0, MAX_PERIODS);
    let steps = m as usize * COIL_SAMPLES_PER_LOOP;
    let a = amp.as_cm();
    let swing = 0.35 * pitch.as_cm();
    let mut pts = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let u = i as f64 / steps as f64;
        let phase = 2.0 * PI * m * u;
        let (p, tan) = path.point_at(u);
        let normal = tan.rot90();
        let radial = 0.5 * a * (1.0 - phase.cos());
        let longitudinal = -swing * phase.sin();
        pts.push((p + normal * radial) + tan * longitudinal);
    }
    pts[0] = path.start();
    let last = pts.len() - 1;
    pts[last] = path.end();
    Ok(Polyline {
        pts,
        stroke,
        width,
        dash: None,
        cap: LineCap::Round,
    })
}

/// Filled isoceles triangle of the given length along the tangent, half a
/// width of `0.35 * size`, with its centroid at `at`.
pub fn arrow_glyph(at: Point, tangent: Point, size: Length, reversed: bool, color: Rgb) -> Polygon {
    let s = size.as_cm();
    let dir = if reversed { -tangent } else { tangent };
    let normal = dir.rot90();
    let tip = at + dir * (2.0 * s / 3.0);
    let base = at - dir * (s / 3.0);
    let half = normal * 0.35 * s;
    Polygon {
        pts: vec![tip, base + half, base - half],
        fill: color,
        stroke: None,
    }
}

/// Two strokes of the given length crossing at the path point, at 45
/// degrees to either side of the local tangent.
pub fn insertion_marks(
    path: &PathGeom,
    t: f64,
    size: Length,
    color: Rgb,
    width: Length,
) -> Vec<Polyline> {
    let (center, tan) = path.point_at(t);
    let half = size.as_cm() / 2.0;
    [45.0, -45.0]
        .iter()
        .map(|&deg| {
            let dir = tan.rotate_deg(deg);
            Polyline {
                pts: vec![center - dir * half, center + dir * half],
                stroke: color,
                width,
                dash: None,
                cap: LineCap::Round,
            }
        })
        .collect()
}

/// Momentum arrow: a parallel line sampled over the middle 60% of the path,
/// an arrow tip at the far end (near end when reversed), and the label a
/// little further out from the midpoint. It never inherits the propagator
/// style.
pub fn momentum_arrow(
    path: &PathGeom,
    mom: &crate::model::Momentum,
    params: &DecorParams,
) -> Vec<Shape> {
    let off = params.mom_offset.as_cm();
    let steps = 24;
    let mut pts = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let s = 0.2 + 0.6 * (i as f64 / steps as f64);
        pts.push(path.offset_point(s, mom.side, off));
    }
    let mut shapes = Vec::with_capacity(3);
    let (tip_at, tip_s, rev) = if mom.reversed {
        (pts[0], 0.2, true)
    } else {
        (pts[steps], 0.8, false)
    };
    shapes.push(Shape::Polyline(Polyline {
        pts,
        stroke: mom.arrow_color,
        width: params.mom_width,
        dash: None,
        cap: LineCap::Round,
    }));
    let (_, tan) = path.point_at(tip_s);
    shapes.push(Shape::Polygon(arrow_glyph(
        tip_at,
        tan,
        params.mom_tip,
        rev,
        mom.arrow_color,
    )));
    let label_pos = path.offset_point(0.5, mom.side, off + params.mom_label_extra.as_cm());
    shapes.push(Shape::Text(TextLabel {
        pos: label_pos,
        text: mom.text.clone(),
        size: params.font_size,
        color: mom.arrow_color,
        anchor: Anchor::Middle,
    }));
    shapes
}

/// Label centered a fixed offset to one side of the path midpoint.
pub fn edge_label(
    path: &PathGeom,
    text: &str,
    side: Side,
    color: Rgb,
    params: &DecorParams,
) -> TextLabel {
    TextLabel {
        pos: path.offset_point(0.5, side, params.edge_label_offset.as_cm()),
        text: text.to_string(),
        size: params.font_size,
        color,
        anchor: Anchor::Middle,
    }
}

/// All drawable primitives for one propagator, in paint order: the optional
/// crossing halo first, then the stroke, arrows, insertions, labels and the
/// momentum arrow. `top` moves everything to the top layer.
pub fn decorate(
    p: &Propagator,
    path: &PathGeom,
    cfg: &Config,
) -> Result<Vec<RenderPrimitive>, DecorError> {
    let params = DecorParams::from_config(cfg);
    let mut shapes: Vec<Shape> = Vec::new();

    let solid = |dash: Option<DashPattern>| {
        Shape::Polyline(Polyline {
            pts: path.flatten(),
            stroke: p.color,
            width: params.linesize,
            dash,
            cap: LineCap::Round,
        })
    };
    let arrow = |frac: f64, reversed: bool| {
        let (at, tan) = path.point_at(frac);
        Shape::Polygon(arrow_glyph(at, tan, params.arrow_len, reversed, p.color))
    };
    let wave = || {
        Shape::Polyline(wave_polyline(
            path,
            params.wave_amp,
            params.wave_half,
            p.color,
            params.linesize,
        ))
    };
    let coil = || {
        coil_polyline(
            path,
            params.coil_amp,
            params.coil_pitch,
            p.color,
            params.linesize,
            p.span,
        )
        .map(Shape::Polyline)
    };
    let dashed = Some(DashPattern {
        on: params.dash_on,
        off: params.dash_off,
    });
    let dotted = Some(DashPattern {
        on: params.dot_on,
        off: params.dot_off,
    });

    match p.style {
        PropagatorStyle::Plain => shapes.push(solid(None)),
        PropagatorStyle::Fermion => {
            shapes.push(solid(None));
            shapes.push(arrow(p.arrow_frac, false));
        }
        PropagatorStyle::AntiFermion => {
            shapes.push(solid(None));
            shapes.push(arrow(p.arrow_frac, true));
        }
        PropagatorStyle::Photon | PropagatorStyle::Boson => shapes.push(wave()),
        PropagatorStyle::ChargedBoson => {
            shapes.push(wave());
            shapes.push(arrow(p.arrow_frac, false));
        }
        PropagatorStyle::AntiChargedBoson => {
            shapes.push(wave());
            shapes.push(arrow(p.arrow_frac, true));
        }
        PropagatorStyle::Gluon => shapes.push(coil()?),
        PropagatorStyle::Scalar => shapes.push(solid(dashed)),
        PropagatorStyle::ChargedScalar => {
            shapes.push(solid(dashed));
            shapes.push(arrow(p.arrow_frac, false));
        }
        PropagatorStyle::AntiChargedScalar => {
            shapes.push(solid(dashed));
            shapes.push(arrow(p.arrow_frac, true));
        }
        PropagatorStyle::Ghost => shapes.push(solid(dotted)),
        PropagatorStyle::ChargedGhost => {
            shapes.push(solid(dotted));
            shapes.push(arrow(p.arrow_frac, false));
        }
        PropagatorStyle::AntiChargedGhost => {
            shapes.push(solid(dotted));
            shapes.push(arrow(p.arrow_frac, true));
        }
        PropagatorStyle::Majorana => {
            // Arrows point inward.
            shapes.push(solid(None));
            shapes.push(arrow(0.3, false));
            shapes.push(arrow(0.7, true));
        }
        PropagatorStyle::AntiMajorana => {
            // Arrows point outward.
            shapes.push(solid(None));
            shapes.push(arrow(0.3, true));
            shapes.push(arrow(0.7, false));
        }
    }

    for ins in &p.insertions {
        for line in insertion_marks(path, ins.t, ins.size, ins.color, params.linesize) {
            shapes.push(Shape::Polyline(line));
        }
    }
    if let Some(lbl) = &p.edge.label {
        shapes.push(Shape::Text(edge_label(
            path, &lbl.text, lbl.side, p.color, &params,
        )));
    }
    if let Some(mom) = &p.momentum {
        shapes.extend(momentum_arrow(path, mom, &params));
    }

    let layer = if p.top { Layer::Top } else { Layer::Main };
    let mut prims = Vec::with_capacity(shapes.len() + 1);
    if p.top {
        // Opaque gap-colored stroke painted under the decorated stroke.
        prims.push(RenderPrimitive {
            shape: Shape::Polyline(Polyline {
                pts: path.flatten(),
                stroke: params.topcolor,
                width: params.topsep,
                dash: None,
                cap: LineCap::Butt,
            }),
            layer,
            z: 0,
        });
    }
    prims.extend(
        shapes
            .into_iter()
            .map(|shape| RenderPrimitive { shape, layer, z: 0 }),
    );
    Ok(prims)
}

/// Marks drawn at a vertex. Bare vertices produce nothing; discs are
/// emitted as 64-gons.
pub fn vertex_marks(v: &Vertex, cfg: &Config) -> Vec<RenderPrimitive> {
    let params = DecorParams::from_config(cfg);
    let mut shapes: Vec<Shape> = Vec::new();
    let dot_r = cfg.dotsize.as_cm() / 2.0;
    let blob_r = cfg.blobsize.as_cm() / 2.0;
    let line = params.linesize;

    match v.style {
        VertexStyle::Bare => {}
        VertexStyle::Particle => {
            if let Some(text) = &v.label {
                shapes.push(Shape::Text(TextLabel {
                    pos: v.pos,
                    text: text.clone(),
                    size: params.font_size,
                    color: v.color,
                    anchor: Anchor::Middle,
                }));
            }
        }
        VertexStyle::Dot => {
            shapes.push(Shape::Polygon(Polygon {
                pts: disc(v.pos, dot_r),
                fill: v.color,
                stroke: None,
            }));
        }
        VertexStyle::RingDot => {
            shapes.push(Shape::Polygon(Polygon {
                pts: disc(v.pos, dot_r),
                fill: Rgb::WHITE,
                stroke: Some((v.color, line)),
            }));
        }
        VertexStyle::SquareDot => {
            let h = dot_r;
            shapes.push(Shape::Polygon(Polygon {
                pts: vec![
                    Point::new(v.pos.x - h, v.pos.y - h),
                    Point::new(v.pos.x + h, v.pos.y - h),
                    Point::new(v.pos.x + h, v.pos.y + h),
                    Point::new(v.pos.x - h, v.pos.y + h),
                ],
                fill: v.color,
                stroke: None,
            }));
        }
        VertexStyle::CrossDot => {
            shapes.push(Shape::Polygon(Polygon {
                pts: disc(v.pos, dot_r),
                fill: Rgb::WHITE,
                stroke: Some((v.color, line)),
            }));
            for deg in [45.0, 135.0] {
                let dir = Point::new(1.0, 0.0).rotate_deg(deg) * dot_r;
                shapes.push(Shape::Polyline(Polyline {
                    pts: vec![v.pos - dir, v.pos + dir],
                    stroke: v.color,
                    width: line,
                    dash: None,
                    cap: LineCap::Butt,
                }));
            }
        }
        VertexStyle::Blob | VertexStyle::NeBlob | VertexStyle::NwBlob => {
            let angle = if v.style == VertexStyle::NwBlob {
                -45.0
            } else {
                45.0
            };
            shapes.push(Shape::Polygon(Polygon {
                pts: disc(v.pos, blob_r),
                fill: Rgb::WHITE,
                stroke: Some((v.color, line)),
            }));
            for chord in hatch_chords(v.pos, blob_r - line.as_cm() / 2.0, angle, Length::pt(2.0)) {
                shapes.push(Shape::Polyline(Polyline {
                    pts: chord.to_vec(),
                    stroke: v.color,
                    width: line,
                    dash: None,
                    cap: LineCap::Butt,
                }));
            }
        }
        VertexStyle::GrayBlob => {
            shapes.push(Shape::Polygon(Polygon {
                pts: disc(v.pos, blob_r),
                fill: Rgb::new(0.5, 0.5, 0.5),
                stroke: Some((v.color, line)),
            }));
        }
        VertexStyle::RingBlob => {
            shapes.push(Shape::Polygon(Polygon {
                pts: disc(v.pos, blob_r),
                fill: Rgb::WHITE,
                stroke: Some((v.color, line)),
            }));
        }
    }
    shapes
        .into_iter()
        .map(|shape| RenderPrimitive {
            shape,
            layer: Layer::Main,
            z: 0,
        })
        .collect()
}

/// Renders a whole scene: propagators in source order, then vertex marks
/// over the line ends. `z` is assigned in final emission order.
pub fn render_scene(scene: &SceneGraph) -> Result<Vec<RenderPrimitive>, DecorError> {
    let mut prims = Vec::new();
    for p in &scene.propagators {
        let from = scene.vertex(&p.from).ok_or_else(|| DecorError {
            kind: DecorErrorKind::MissingVertex(p.from.clone()),
            span: p.span,
        })?;
        let to = scene.vertex(&p.to).ok_or_else(|| DecorError {
            kind: DecorErrorKind::MissingVertex(p.to.clone()),
            span: p.span,
        })?;
        let path = base_path(from.pos, to.pos, p.edge.curve_spec()).map_err(|e| DecorError {
            kind: DecorErrorKind::Geometry(e),
            span: p.span,
        })?;
        prims.extend(decorate(p, &path, &scene.config)?);
    }
    for v in &scene.vertices {
        prims.extend(vertex_marks(v, &scene.config));
    }
    for (i, prim) in prims.iter_mut().enumerate() {
        prim.z = i as u32;
    }
    Ok(prims)
}

fn disc(center: Point, r: f64) -> Vec<Point> {
    let n = 64;
    (0..n)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / n as f64;
            Point::new(center.x + r * a.cos(), center.y + r * a.sin())
        })
        .collect()
}

/// Chords of a disc at regular perpendicular offsets, forming hatching at
/// the given angle.
fn hatch_chords(center: Point, r: f64, angle_deg: f64, spacing: Length) -> Vec<[Point; 2]> {
    let dir = Point::new(1.0, 0.0).rotate_deg(angle_deg);
    let perp = dir.rot90();
    let sp = spacing.as_cm();
    let mut out = Vec::new();
    let k_max = (r / sp).floor() as i32;
    for k in -k_max..=k_max {
        let d = k as f64 * sp;
        if d.abs() >= r {
            continue;
        }
        let half = (r * r - d * d).sqrt();
        let mid = center + perp * d;
        out.push([mid - dir * half, mid + dir * half]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CurveSpec;
    use crate::units::PT_PER_CM;

    fn straight_2cm() -> PathGeom {
        base_path(Point::new(0.0, 0.0), Point::new(2.0, 0.0), None).unwrap()
    }

    #[test]
    fn wave_half_period_count() {
        // 2cm = 56.9055pt over 4.5pt half-periods rounds to 13.
        let path = straight_2cm();
        let cfg = Config::default();
        let params = DecorParams::from_config(&cfg);
        let n = (path.total_len() / params.wave_half.as_cm()).round();
        assert_eq!(n, 13.0);
        let poly = wave_polyline(
            &path,
            params.wave_amp,
            params.wave_half,
            Rgb::BLACK,
            params.linesize,
        );
        assert_eq!(poly.pts.len(), 13 * 16 + 1);
        assert_eq!(poly.pts[0], path.start());
        assert_eq!(*poly.pts.last().unwrap(), path.end());
    }

    #[test]
    fn coil_loop_count() {
        // 2cm over 4pt pitch rounds to 14 loops.
        let path = straight_2cm();
        let cfg = Config::default();
        let params = DecorParams::from_config(&cfg);
        let m = (path.total_len() / params.coil_pitch.as_cm()).round();
        assert_eq!(m, 14.0);
        let poly = coil_polyline(
            &path,
            params.coil_amp,
            params.coil_pitch,
            Rgb::BLACK,
            params.linesize,
            Span::default(),
        )
        .unwrap();
        assert_eq!(poly.pts[0], path.start());
        assert_eq!(*poly.pts.last().unwrap(), path.end());
        assert!(poly.pts.iter().all(|p| p.x.is_finite() && p.y.is_finite()));
    }

    #[test]
    fn extreme_paths_stay_bounded() {
        let long = base_path(Point::new(0.0, 0.0), Point::new(9.9e7, 0.0), None).unwrap();
        let cfg = Config::default();
        let params = DecorParams::from_config(&cfg);
        let wave = wave_polyline(&long, params.wave_amp, params.wave_half, Rgb::BLACK, params.linesize);
        assert!(wave.pts.len() <= 4096 * 16 + 1);
        let coil = coil_polyline(
            &long,
            params.coil_amp,
            params.coil_pitch,
            Rgb::BLACK,
            params.linesize,
            Span::default(),
        )
        .unwrap();
        assert!(coil.pts.len() <= 4096 * 32 + 1);
    }

    #[test]
    fn coil_needs_room() {
        let tiny = base_path(Point::new(0.0, 0.0), Point::new(0.01, 0.0), None).unwrap();
        let cfg = Config::default();
        let params = DecorParams::from_config(&cfg);
        let err = coil_polyline(
            &tiny,
            params.coil_amp,
            params.coil_pitch,
            Rgb::BLACK,
            params.linesize,
            Span::default(),
        )
        .unwrap_err();
        assert_eq!(err.kind, DecorErrorKind::PathTooShort);
    }

    #[test]
    fn coil_on_curved_path_is_finite() {
        let path = base_path(
            Point::new(0.0, 0.0),
            Point::new(2.0, 1.0),
            Some(CurveSpec {
                out_deg: 0.0,
                in_deg: 180.0,
                looseness: 1.0,
            }),
        )
        .unwrap();
        let cfg = Config::default();
        let params = DecorParams::from_config(&cfg);
        let poly = coil_polyline(
            &path,
            params.coil_amp,
            params.coil_pitch,
            Rgb::BLACK,
            params.linesize,
            Span::default(),
        )
        .unwrap();
        assert!(poly.pts.iter().all(|p| p.x.is_finite() && p.y.is_finite()));
        assert_eq!(poly.pts[0], path.start());
    }

    #[test]
    fn arrow_glyph_centroid_and_size() {
        let size = Length::pt(6.0);
        let glyph = arrow_glyph(
            Point::new(1.0, 0.0),
            Point::new(1.0, 0.0),
            size,
            false,
            Rgb::BLACK,
        );
        let centroid = glyph
            .pts
            .iter()
            .fold(Point::new(0.0, 0.0), |acc, p| acc + *p)
            * (1.0 / 3.0);
        assert!(centroid.dist(Point::new(1.0, 0.0)) < 1e-12);
        // tip-to-base distance along the tangent equals the size
        let tip = glyph.pts[0];
        let base_mid = (glyph.pts[1] + glyph.pts[2]) * 0.5;
        assert!((tip.dist(base_mid) - size.as_cm()).abs() < 1e-12);
        // half-width
        assert!((glyph.pts[1].dist(glyph.pts[2]) / 2.0 - 0.35 * size.as_cm()).abs() < 1e-12);

        let rev = arrow_glyph(
            Point::new(1.0, 0.0),
            Point::new(1.0, 0.0),
            size,
            true,
            Rgb::BLACK,
        );
        // Reversal mirrors the tip through the anchor.
        assert!((rev.pts[0].x - (2.0 - tip.x)).abs() < 1e-12);
    }

    #[test]
    fn scaling_laws() {
        let mut cfg = Config::default();
        let base = DecorParams::from_config(&cfg);
        cfg.set_length("linesize", Length::pt(1.0)).unwrap();
        let scaled = DecorParams::from_config(&cfg);
        assert_eq!(scaled.wave_amp.as_cm() / base.wave_amp.as_cm(), 2.0);
        assert_eq!(scaled.wave_half.as_cm() / base.wave_half.as_cm(), 2.0);
        assert_eq!(scaled.coil_amp.as_cm() / base.coil_amp.as_cm(), 2.0);
        assert_eq!(scaled.coil_pitch.as_cm() / base.coil_pitch.as_cm(), 2.0);
        assert_eq!(scaled.mom_width.as_cm() / base.mom_width.as_cm(), 2.0);
        // 0.64 and 0.8 factors hold exactly.
        assert_eq!(scaled.mom_width, cfg.linesize.scaled(0.64));
        assert_eq!(scaled.mom_tip, cfg.arrowsize.scaled(0.8));
        // Dash patterns are fixed, not scaled.
        assert_eq!(scaled.dash_on, base.dash_on);
        assert_eq!(scaled.dot_off, base.dot_off);
    }

    #[test]
    fn default_topsep_is_nine_points() {
        let params = DecorParams::from_config(&Config::default());
        assert!((params.topsep.as_pt() - 9.0).abs() < 1e-9);
        assert!((params.topsep.as_cm() - 18.0 * 0.5 / PT_PER_CM).abs() < 1e-12);
    }

    #[test]
    fn insertion_cross_positions() {
        let path = straight_2cm();
        let marks = insertion_marks(&path, 0.25, Length::pt(6.0), Rgb::BLACK, Length::pt(0.5));
        assert_eq!(marks.len(), 2);
        for m in &marks {
            let mid = (m.pts[0] + m.pts[1]) * 0.5;
            assert!(mid.dist(Point::new(0.5, 0.0)) < 1e-9);
            assert!((m.pts[0].dist(m.pts[1]) - Length::pt(6.0).as_cm()).abs() < 1e-9);
        }
        // A boundary fraction sits exactly on the path start.
        let marks = insertion_marks(&path, 0.0, Length::pt(6.0), Rgb::BLACK, Length::pt(0.5));
        let mid = (marks[0].pts[0] + marks[0].pts[1]) * 0.5;
        assert!(mid.dist(Point::new(0.0, 0.0)) < 1e-12);
    }

    #[test]
    fn momentum_line_spans_middle_of_path() {
        let path = straight_2cm();
        let cfg = Config::default();
        let params = DecorParams::from_config(&cfg);
        let mom = crate::model::Momentum {
            text: "$k$".to_string(),
            side: Side::Left,
            reversed: false,
            arrow_color: Rgb::BLACK,
        };
        let shapes = momentum_arrow(&path, &mom, &params);
        let Shape::Polyline(line) = &shapes[0] else {
            panic!("expected polyline")
        };
        let off = params.mom_offset.as_cm();
        assert!(line.pts[0].dist(Point::new(0.4, off)) < 1e-9);
        assert!(line.pts.last().unwrap().dist(Point::new(1.6, off)) < 1e-9);
        assert_eq!(line.width, params.mom_width);
    }

    #[test]
    fn edge_label_offsets() {
        let path = straight_2cm();
        let params = DecorParams::from_config(&Config::default());
        let lbl = edge_label(&path, "$k$", Side::Left, Rgb::BLACK, &params);
        assert!(lbl.pos.dist(Point::new(1.0, Length::pt(8.0).as_cm())) < 1e-9);
        let lbl = edge_label(&path, "$p'$", Side::Right, Rgb::BLACK, &params);
        assert!(lbl.pos.dist(Point::new(1.0, -Length::pt(8.0).as_cm())) < 1e-9);
    }

    #[test]
    fn vertex_mark_shapes() {
        let cfg = Config::default();
        let mk = |style| Vertex {
            name: "v".to_string(),
            pos: Point::new(2.0, 0.0),
            style,
            label: Some(String::new()),
            color: Rgb::BLACK,
        };
        assert!(vertex_marks(&mk(VertexStyle::Bare), &cfg).is_empty());
        let dot = vertex_marks(&mk(VertexStyle::Dot), &cfg);
        assert_eq!(dot.len(), 1);
        let Shape::Polygon(poly) = &dot[0].shape else {
            panic!()
        };
        assert_eq!(poly.pts.len(), 64);
        let r = cfg.dotsize.as_cm() / 2.0;
        for p in &poly.pts {
            assert!((p.dist(Point::new(2.0, 0.0)) - r).abs() < 1e-12);
        }
        // Crossdot: ring plus two strokes.
        assert_eq!(vertex_marks(&mk(VertexStyle::CrossDot), &cfg).len(), 3);
        // Blobs carry hatching.
        assert!(vertex_marks(&mk(VertexStyle::Blob), &cfg).len() > 2);
        let particle = Vertex {
            label: Some("e$^-$".to_string()),
            ..mk(VertexStyle::Particle)
        };
        let marks = vertex_marks(&particle, &cfg);
        assert_eq!(marks.len(), 1);
        assert!(matches!(&marks[0].shape, Shape::Text(t) if t.text == "e$^-$"));
    }

    #[test]
    fn plain_style_is_one_primitive() {
        let p = Propagator {
            style: PropagatorStyle::Plain,
            from: "a".to_string(),
            to: "b".to_string(),
            color: Rgb::BLACK,
            top: false,
            arrow_frac: 0.5,
            edge: crate::model::EdgeOpts {
                out: None,
                in_: None,
                looseness: 1.0,
                label: None,
            },
            momentum: None,
            insertions: vec![],
            span: Span::default(),
        };
        let prims = decorate(&p, &straight_2cm(), &Config::default()).unwrap();
        assert_eq!(prims.len(), 1);
        assert_eq!(prims[0].layer, Layer::Main);
    }

    #[test]
    fn top_propagator_gets_a_leading_halo() {
        let p = Propagator {
            style: PropagatorStyle::Fermion,
            from: "a".to_string(),
            to: "b".to_string(),
            color: Rgb::BLACK,
            top: true,
            arrow_frac: 0.5,
            edge: crate::model::EdgeOpts {
                out: None,
                in_: None,
                looseness: 1.0,
                label: None,
            },
            momentum: None,
            insertions: vec![],
            span: Span::default(),
        };
        let cfg = Config::default();
        let prims = decorate(&p, &straight_2cm(), &cfg).unwrap();
        assert!(prims.iter().all(|pr| pr.layer == Layer::Top));
        let Shape::Polyline(halo) = &prims[0].shape else {
            panic!("halo first")
        };
        assert_eq!(halo.width, cfg.topsep());
        assert_eq!(halo.stroke, Rgb::WHITE);
        assert_eq!(prims.len(), 3); // halo + line + arrow
    }

    #[test]
    fn charged_arrow_lands_at_fraction() {
        let p = Propagator {
            style: PropagatorStyle::ChargedBoson,
            from: "a".to_string(),
            to: "b".to_string(),
            color: Rgb::BLACK,
            top: false,
            arrow_frac: 0.25,
            edge: crate::model::EdgeOpts {
                out: None,
                in_: None,
                looseness: 1.0,
                label: None,
            },
            momentum: None,
            insertions: vec![],
            span: Span::default(),
        };
        let path = straight_2cm();
        let prims = decorate(&p, &path, &Config::default()).unwrap();
        let Shape::Polygon(glyph) = &prims[1].shape else {
            panic!("arrow expected")
        };
        let centroid = glyph
            .pts
            .iter()
            .fold(Point::new(0.0, 0.0), |acc, p| acc + *p)
            * (1.0 / 3.0);
        assert!(centroid.dist(path.point_at(0.25).0) < 1e-9);
    }

    #[test]
    fn every_style_is_decoratable() {
        let path = straight_2cm();
        let cfg = Config::default();
        for style in PropagatorStyle::ALL {
            let p = Propagator {
                style,
                from: "a".to_string(),
                to: "b".to_string(),
                color: Rgb::BLACK,
                top: false,
                arrow_frac: 0.5,
                edge: crate::model::EdgeOpts {
                    out: None,
                    in_: None,
                    looseness: 1.0,
                    label: None,
                },
                momentum: None,
                insertions: vec![],
                span: Span::default(),
            };
            let prims = decorate(&p, &path, &cfg).unwrap();
            assert!(!prims.is_empty(), "{style:?} produced nothing");
        }
    }
}
