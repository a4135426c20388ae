//! Resolves statements into a scene graph: vertices with absolute positions,
//! propagators with fully resolved styles and edge options, and the
//! configuration snapshot in force for the diagram.

use super::color::{eval_builtin, Rgb};
use super::config::Config;
use super::style::{
    is_propagator_style_name, resolve_propagator_style, resolve_vertex_style, PropagatorStyle,
    VertexStyle,
};
use super::{ModelError, ModelErrorKind, Warning};
use crate::dsl::{
    parse_color_expr, ColorExpr, Coord, OptionEntry, OptionList, OptionValue, Span, Stmt, StmtKind,
    VertexRef,
};
use crate::geometry::{desugar_bend, BendKind, CurveSpec, Point, Side};
use crate::units::Length;

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub name: String,
    pub pos: Point,
    pub style: VertexStyle,
    pub label: Option<String>,
    pub color: Rgb,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeLabel {
    pub text: String,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeOpts {
    pub out: Option<f64>,
    pub in_: Option<f64>,
    pub looseness: f64,
    pub label: Option<EdgeLabel>,
}

impl EdgeOpts {
    pub fn curve_spec(&self) -> Option<CurveSpec> {
        match (self.out, self.in_) {
            (Some(out_deg), Some(in_deg)) => Some(CurveSpec {
                out_deg,
                in_deg,
                looseness: self.looseness,
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Momentum {
    pub text: String,
    pub side: Side,
    pub reversed: bool,
    pub arrow_color: Rgb,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Insertion {
    pub t: f64,
    pub size: Length,
    pub color: Rgb,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub style: PropagatorStyle,
    pub from: String,
    pub to: String,
    pub color: Rgb,
    pub top: bool,
    pub arrow_frac: f64,
    pub edge: EdgeOpts,
    pub momentum: Option<Momentum>,
    pub insertions: Vec<Insertion>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Baseline {
    Vertex(String),
    Y(Length),
}

/// The resolved scene. Propagator order equals source order, which drives
/// layering: later entries draw on top within their layer.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneGraph {
    pub vertices: Vec<Vertex>,
    pub propagators: Vec<Propagator>,
    pub config: Config,
    pub baseline: Option<Baseline>,
}

impl SceneGraph {
    pub fn vertex(&self, name: &str) -> Option<&Vertex> {
        self.vertices.iter().find(|v| v.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltScene {
    pub scene: SceneGraph,
    pub warnings: Vec<Warning>,
}

/// Resolves a coordinate against already-registered vertices. Relative
/// placements move from the anchor by the explicit distances, defaulting to
/// the node distance on axes without one.
pub fn resolve_coord<F>(
    coord: &Coord,
    lookup: F,
    node_distance: Length,
) -> Result<Point, ModelError>
where
    F: Fn(&str) -> Option<Point>,
{
    match coord {
        Coord::Absolute { x, y } => Ok(Point::new(*x, *y)),
        Coord::Relative {
            vertical,
            horizontal,
            vdist,
            hdist,
            anchor,
        } => {
            let base = lookup(&anchor.name).ok_or_else(|| ModelError {
                kind: ModelErrorKind::UndefinedVertex(anchor.name.clone()),
                span: anchor.span,
            })?;
            let v = vdist.unwrap_or(node_distance).as_cm();
            let h = hdist.unwrap_or(node_distance).as_cm();
            let dy = match vertical {
                Some(crate::dsl::VDir::Above) => v,
                Some(crate::dsl::VDir::Below) => -v,
                None => 0.0,
            };
            let dx = match horizontal {
                Some(crate::dsl::HDir::Right) => h,
                Some(crate::dsl::HDir::Left) => -h,
                None => 0.0,
            };
            Ok(Point::new(base.x + dx, base.y + dy))
        }
    }
}

/// Builds the scene for one diagram. Configuration statements inside the
/// block mutate a local copy sequentially, so a style color override only
/// affects what is declared after it; the snapshot stored in the scene is
/// the state at the end of the block.
pub fn build_scene(stmts: &[Stmt], base: &Config) -> Result<BuiltScene, ModelError> {
    let mut b = SceneBuilder {
        cfg: base.clone(),
        vertices: Vec::new(),
        propagators: Vec::new(),
        baseline: None,
        warnings: Vec::new(),
    };
    for stmt in stmts {
        b.add_stmt(stmt)?;
    }
    Ok(BuiltScene {
        scene: SceneGraph {
            vertices: b.vertices,
            propagators: b.propagators,
            config: b.cfg,
            baseline: b.baseline,
        },
        warnings: b.warnings,
    })
}

struct SceneBuilder {
    cfg: Config,
    vertices: Vec<Vertex>,
    propagators: Vec<Propagator>,
    baseline: Option<Baseline>,
    warnings: Vec<Warning>,
}

impl SceneBuilder {
    fn lookup(&self, name: &str) -> Option<Point> {
        self.vertices.iter().find(|v| v.name == name).map(|v| v.pos)
    }

    fn add_stmt(&mut self, stmt: &Stmt) -> Result<(), ModelError> {
        if self.cfg.apply_stmt(stmt)? {
            return Ok(());
        }
        match &stmt.kind {
            StmtKind::EnvMarker { opts, .. } => self.apply_env_opts(opts),
            StmtKind::Vertex(decl) => self.add_vertex(decl, stmt.span),
            StmtKind::Propag(decl) => {
                let prop = self.fold_propagator(
                    &decl.style_opts,
                    &decl.edge_opts,
                    &decl.from,
                    &decl.to,
                    stmt.span,
                )?;
                self.propagators.push(prop);
                Ok(())
            }
            StmtKind::Graph(decl) => {
                let empty = OptionList::default();
                for (i, link) in decl.links.iter().enumerate() {
                    let prop = self.fold_propagator(
                        link,
                        &empty,
                        &decl.nodes[i],
                        &decl.nodes[i + 1],
                        stmt.span,
                    )?;
                    self.propagators.push(prop);
                }
                Ok(())
            }
            StmtKind::SetNextFilename(_) => Ok(()),
            _ => Ok(()),
        }
    }

    fn apply_env_opts(&mut self, opts: &OptionList) -> Result<(), ModelError> {
        for entry in &opts.entries {
            match entry.key.as_str() {
                "node distance" => {
                    let len = scalar_length(entry)?;
                    if !len.is_positive() {
                        return Err(ModelError {
                            kind: ModelErrorKind::NonPositiveLength("node distance".to_string()),
                            span: entry.span,
                        });
                    }
                    self.cfg.node_distance = len;
                }
                "baseline" => {
                    self.baseline = Some(parse_baseline(entry)?);
                }
                // Other wrapper options are generic TikZ keys with no effect
                // on the scene.
                _ => {}
            }
        }
        Ok(())
    }

    fn add_vertex(&mut self, decl: &crate::dsl::VertexDecl, span: Span) -> Result<(), ModelError> {
        if self.lookup(&decl.name).is_some() {
            return Err(ModelError {
                kind: ModelErrorKind::DuplicateVertex(decl.name.clone()),
                span,
            });
        }
        let mut style = match &decl.style {
            Some(name) => resolve_vertex_style(name).map_err(|e| ModelError {
                kind: ModelErrorKind::Style(e),
                span,
            })?,
            None => VertexStyle::Bare,
        };
        if style != VertexStyle::Bare && decl.label.is_none() {
            self.warnings.push(Warning {
                message: format!(
                    "vertex `{}` has a drawn style but no `{{}}` argument; nothing will be drawn",
                    decl.name
                ),
                span,
            });
            style = VertexStyle::Bare;
        }

        let mut color = None;
        for entry in &decl.opts.entries {
            match &entry.value {
                OptionValue::Flag => {
                    color = Some(self.flag_color(entry, true)?);
                }
                _ => {
                    return Err(ModelError {
                        kind: ModelErrorKind::UnknownOption(entry.key.clone()),
                        span: entry.span,
                    })
                }
            }
        }
        let color = match color {
            Some(c) => c,
            None => self
                .cfg
                .every_vertex
                .get(&style)
                .copied()
                .unwrap_or(Rgb::BLACK),
        };

        let pos = match &decl.coord {
            Some(coord) => resolve_coord(coord, |n| self.lookup(n), self.cfg.node_distance)?,
            None => Point::new(0.0, 0.0),
        };
        self.vertices.push(Vertex {
            name: decl.name.clone(),
            pos,
            style,
            label: decl.label.clone(),
            color,
        });
        Ok(())
    }

    /// Interprets a bare flag as a color. `vertex_context` switches the
    /// suggestion list used for unknown names.
    fn flag_color(&self, entry: &OptionEntry, vertex_context: bool) -> Result<Rgb, ModelError> {
        let key = entry.key.as_str();
        if key.contains('!') {
            let expr = parse_color_expr(key).map_err(|e| ModelError {
                kind: ModelErrorKind::UnknownColor(key.to_string()),
                span: Span::new(e.line, e.col),
            })?;
            return eval_builtin(&expr).map_err(|e| ModelError {
                kind: ModelErrorKind::UnknownColor(e.0),
                span: entry.span,
            });
        }
        match eval_builtin(&ColorExpr::Named(key.to_string())) {
            Ok(rgb) => Ok(rgb),
            Err(_) => {
                let unknown = if vertex_context {
                    resolve_vertex_style(key).unwrap_err()
                } else {
                    resolve_propagator_style(key).unwrap_err()
                };
                Err(ModelError {
                    kind: ModelErrorKind::Style(unknown),
                    span: entry.span,
                })
            }
        }
    }

    fn fold_propagator(
        &mut self,
        style_opts: &OptionList,
        edge_opts: &OptionList,
        from: &VertexRef,
        to: &VertexRef,
        span: Span,
    ) -> Result<Propagator, ModelError> {
        let from_pos = self.require_vertex(from)?;
        let to_pos = self.require_vertex(to)?;

        // Both brackets accept the same keys; the `to` bracket comes last so
        // it wins on conflict.
        let merged: Vec<&OptionEntry> = style_opts
            .entries
            .iter()
            .chain(edge_opts.entries.iter())
            .collect();

        let mut style = PropagatorStyle::Plain;
        let mut explicit_color = None;
        let mut top = false;
        let mut arrow_frac = 0.5_f64;
        let mut out = None;
        let mut in_ = None;
        let mut user_looseness = None;
        let mut bend: Option<BendKind> = None;
        let mut label = None;
        let mut momentum = None;
        let mut insertions: Vec<(f64, Length, Option<Rgb>)> = Vec::new();

        for entry in merged {
            let key = entry.key.as_str();
            let err = |kind: ModelErrorKind| ModelError {
                kind,
                span: entry.span,
            };
            match (key, &entry.value) {
                ("top", OptionValue::Flag) => top = true,
                ("half left", OptionValue::Flag) => bend = Some(BendKind::HalfLeft),
                ("half right", OptionValue::Flag) => bend = Some(BendKind::HalfRight),
                ("quarter left", OptionValue::Flag) => bend = Some(BendKind::QuarterLeft),
                ("quarter right", OptionValue::Flag) => bend = Some(BendKind::QuarterRight),
                (_, OptionValue::Flag) if is_propagator_style_name(key) => {
                    style = resolve_propagator_style(key).expect("checked membership");
                }
                (_, OptionValue::Flag) => {
                    explicit_color = Some(self.flag_color(entry, false)?);
                }
                ("out", OptionValue::Fraction(v)) => out = Some(*v),
                ("in", OptionValue::Fraction(v)) => in_ = Some(*v),
                ("looseness", OptionValue::Fraction(v)) => user_looseness = Some(*v),
                ("out" | "in" | "looseness", _) => {
                    return Err(err(ModelErrorKind::BadOptionValue {
                        key: key.to_string(),
                        expected: "a plain number",
                    }))
                }
                ("with arrow" | "with reversed arrow", OptionValue::Fraction(v)) => {
                    if !(0.0 < *v && *v < 1.0) {
                        return Err(err(ModelErrorKind::InvalidFraction {
                            key: key.to_string(),
                            value: *v,
                        }));
                    }
                    arrow_frac = *v;
                }
                ("with arrow" | "with reversed arrow", _) => {
                    return Err(err(ModelErrorKind::BadOptionValue {
                        key: key.to_string(),
                        expected: "a fraction between 0 and 1",
                    }))
                }
                ("edge label" | "edge label'", value) => {
                    let text = text_value(value).ok_or_else(|| {
                        err(ModelErrorKind::BadOptionValue {
                            key: key.to_string(),
                            expected: "label text",
                        })
                    })?;
                    let side = if key.ends_with('\'') {
                        Side::Right
                    } else {
                        Side::Left
                    };
                    label = Some(EdgeLabel { text, side });
                }
                (
                    "momentum" | "momentum'" | "mom" | "mom'" | "reversed momentum"
                    | "reversed momentum'" | "revmom" | "revmom'",
                    value,
                ) => {
                    momentum = Some(self.fold_momentum(key, value, entry.span)?);
                }
                ("insertion", OptionValue::Fraction(t)) => {
                    check_unit_fraction("insertion", *t, entry.span)?;
                    insertions.push((*t, self.cfg.arrowsize, None));
                }
                ("insertion", OptionValue::Braced { suboptions, label }) => {
                    let t: f64 = label.parse().map_err(|_| {
                        err(ModelErrorKind::BadOptionValue {
                            key: "insertion".to_string(),
                            expected: "a fraction between 0 and 1",
                        })
                    })?;
                    check_unit_fraction("insertion", t, entry.span)?;
                    let mut size = self.cfg.arrowsize;
                    let mut color = None;
                    for sub in &suboptions.entries {
                        match (sub.key.as_str(), &sub.value) {
                            ("size", OptionValue::Scalar(len)) => size = *len,
                            ("size", _) => {
                                return Err(ModelError {
                                    kind: ModelErrorKind::BadOptionValue {
                                        key: "size".to_string(),
                                        expected: "a length with unit",
                                    },
                                    span: sub.span,
                                })
                            }
                            ("style", value) => {
                                color = Some(color_value(value, sub.span)?);
                            }
                            (other, _) => {
                                return Err(ModelError {
                                    kind: ModelErrorKind::UnknownOption(other.to_string()),
                                    span: sub.span,
                                })
                            }
                        }
                    }
                    insertions.push((t, size, color));
                }
                ("insertion", _) => {
                    return Err(err(ModelErrorKind::BadOptionValue {
                        key: "insertion".to_string(),
                        expected: "a fraction or `{[size=..,style=..] fraction}`",
                    }))
                }
                (other, _) => return Err(err(ModelErrorKind::UnknownOption(other.to_string()))),
            }
        }

        // Bend shorthands desugar into out/in once endpoint positions are
        // known; explicit looseness multiplies the bend's base value.
        let looseness;
        if let Some(kind) = bend {
            let (o, i, base) = desugar_bend(kind, from_pos, to_pos);
            out = Some(o);
            in_ = Some(i);
            looseness = base * user_looseness.unwrap_or(1.0);
        } else {
            looseness = user_looseness.unwrap_or(1.0);
            if out.is_some() != in_.is_some() {
                return Err(ModelError {
                    kind: ModelErrorKind::LoneCurveAngle,
                    span,
                });
            }
        }

        let color = match explicit_color {
            Some(c) => c,
            None => self
                .cfg
                .every_propagator
                .get(&style)
                .copied()
                .unwrap_or(Rgb::BLACK),
        };
        let insertions = insertions
            .into_iter()
            .map(|(t, size, c)| Insertion {
                t,
                size,
                color: c.unwrap_or(color),
            })
            .collect();

        Ok(Propagator {
            style,
            from: from.name.clone(),
            to: to.name.clone(),
            color,
            top,
            arrow_frac,
            edge: EdgeOpts {
                out,
                in_,
                looseness,
                label,
            },
            momentum,
            insertions,
            span,
        })
    }

    fn fold_momentum(
        &self,
        key: &str,
        value: &OptionValue,
        span: Span,
    ) -> Result<Momentum, ModelError> {
        let reversed = key.starts_with("rev") || key.starts_with("reversed");
        let side = if key.ends_with('\'') {
            Side::Right
        } else {
            Side::Left
        };
        let (text, arrow_color) = match value {
            OptionValue::Braced { suboptions, label } => {
                let mut color = Rgb::BLACK;
                for sub in &suboptions.entries {
                    match (sub.key.as_str(), &sub.value) {
                        ("arrow style", v) => color = color_value(v, sub.span)?,
                        (other, _) => {
                            return Err(ModelError {
                                kind: ModelErrorKind::UnknownOption(other.to_string()),
                                span: sub.span,
                            })
                        }
                    }
                }
                (label.clone(), color)
            }
            other => {
                let text = text_value(other).ok_or(ModelError {
                    kind: ModelErrorKind::BadOptionValue {
                        key: key.to_string(),
                        expected: "label text or `{[arrow style=COLOR] label}`",
                    },
                    span,
                })?;
                (text, Rgb::BLACK)
            }
        };
        Ok(Momentum {
            text,
            side,
            reversed,
            arrow_color,
        })
    }

    fn require_vertex(&self, vref: &VertexRef) -> Result<Point, ModelError> {
        self.lookup(&vref.name).ok_or_else(|| ModelError {
            kind: ModelErrorKind::UndefinedVertex(vref.name.clone()),
            span: vref.span,
        })
    }
}

fn check_unit_fraction(key: &str, v: f64, span: Span) -> Result<(), ModelError> {
    if !(0.0..=1.0).contains(&v) {
        return Err(ModelError {
            kind: ModelErrorKind::InvalidFraction {
                key: key.to_string(),
                value: v,
            },
            span,
        });
    }
    Ok(())
}

fn text_value(value: &OptionValue) -> Option<String> {
    match value {
        OptionValue::Text(t) => Some(t.clone()),
        OptionValue::Braced { suboptions, label } if suboptions.is_empty() => Some(label.clone()),
        _ => None,
    }
}

fn color_value(value: &OptionValue, span: Span) -> Result<Rgb, ModelError> {
    let expr = match value {
        OptionValue::Color(c) => c.clone(),
        OptionValue::Text(t) => parse_color_expr(t).map_err(|e| ModelError {
            kind: ModelErrorKind::UnknownColor(t.clone()),
            span: Span::new(e.line, e.col),
        })?,
        _ => {
            return Err(ModelError {
                kind: ModelErrorKind::BadOptionValue {
                    key: "color".to_string(),
                    expected: "a color name or mix expression",
                },
                span,
            })
        }
    };
    eval_builtin(&expr).map_err(|e| ModelError {
        kind: ModelErrorKind::UnknownColor(e.0),
        span,
    })
}

fn scalar_length(entry: &OptionEntry) -> Result<Length, ModelError> {
    match &entry.value {
        OptionValue::Scalar(len) => Ok(*len),
        OptionValue::Fraction(v) => Ok(Length::cm(*v)),
        _ => Err(ModelError {
            kind: ModelErrorKind::BadOptionValue {
                key: entry.key.clone(),
                expected: "a length",
            },
            span: entry.span,
        }),
    }
}

fn parse_baseline(entry: &OptionEntry) -> Result<Baseline, ModelError> {
    match &entry.value {
        OptionValue::Scalar(len) => Ok(Baseline::Y(*len)),
        OptionValue::Fraction(v) => Ok(Baseline::Y(Length::cm(*v))),
        OptionValue::Text(t) => {
            let inner = t.trim();
            let inner = inner
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .unwrap_or(inner);
            let name = inner.strip_suffix(".base").unwrap_or(inner);
            if name.is_empty() {
                return Err(ModelError {
                    kind: ModelErrorKind::BadOptionValue {
                        key: "baseline".to_string(),
                        expected: "a length or `(vertex.base)`",
                    },
                    span: entry.span,
                });
            }
            Ok(Baseline::Vertex(name.to_string()))
        }
        _ => Err(ModelError {
            kind: ModelErrorKind::BadOptionValue {
                key: "baseline".to_string(),
                expected: "a length or `(vertex.base)`",
            },
            span: entry.span,
        }),
    }
}
