//! Sequential configuration state: the five lengths, gap color, node
//! distance and per-style color overrides.
//!
//! Configuration commands apply to everything that follows them. The gap
//! width tracks `18 x linesize` until it is set explicitly, after which it
//! is independent.

use super::color::{eval_builtin, Rgb};
use super::style::{
    is_propagator_style_name, is_vertex_style_name, resolve_propagator_style, resolve_vertex_style,
    PropagatorStyle, VertexStyle,
};
use super::{ModelError, ModelErrorKind};
use crate::dsl::{Stmt, StmtKind};
use crate::units::Length;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub dotsize: Length,
    pub blobsize: Length,
    pub linesize: Length,
    pub arrowsize: Length,
    topsep: Length,
    topsep_explicit: bool,
    pub topcolor: Rgb,
    pub node_distance: Length,
    pub every_vertex: BTreeMap<VertexStyle, Rgb>,
    pub every_propagator: BTreeMap<PropagatorStyle, Rgb>,
}

impl Default for Config {
    fn default() -> Self {
        let linesize = Length::pt(0.5);
        Config {
            dotsize: Length::mm(1.5),
            blobsize: Length::mm(7.5),
            linesize,
            arrowsize: Length::pt(6.0),
            topsep: linesize.scaled(18.0),
            topsep_explicit: false,
            topcolor: Rgb::WHITE,
            node_distance: Length::cm(1.0),
            every_vertex: BTreeMap::new(),
            every_propagator: BTreeMap::new(),
        }
    }
}

impl Config {
    pub fn topsep(&self) -> Length {
        self.topsep
    }

    pub fn set_length(&mut self, target: &str, value: Length) -> Result<(), ModelErrorKind> {
        if !value.is_positive() {
            return Err(ModelErrorKind::NonPositiveLength(target.to_string()));
        }
        match target {
            "dotsize" => self.dotsize = value,
            "blobsize" => self.blobsize = value,
            "linesize" => {
                self.linesize = value;
                if !self.topsep_explicit {
                    self.topsep = value.scaled(18.0);
                }
            }
            "arrowsize" => self.arrowsize = value,
            "topsep" => {
                self.topsep = value;
                self.topsep_explicit = true;
            }
            other => return Err(ModelErrorKind::UnknownLengthTarget(other.to_string())),
        }
        Ok(())
    }

    pub fn set_every(&mut self, style_name: &str, color: Rgb) -> Result<(), ModelErrorKind> {
        if is_vertex_style_name(style_name) {
            let style = resolve_vertex_style(style_name).expect("checked membership");
            self.every_vertex.insert(style, color);
            Ok(())
        } else if is_propagator_style_name(style_name) {
            let style = resolve_propagator_style(style_name).expect("checked membership");
            self.every_propagator.insert(style, color);
            Ok(())
        } else {
            Err(ModelErrorKind::Style(
                resolve_propagator_style(style_name).unwrap_err(),
            ))
        }
    }

    /// Applies one statement if it is a configuration command. Returns true
    /// when the statement was consumed.
    pub fn apply_stmt(&mut self, stmt: &Stmt) -> Result<bool, ModelError> {
        let at = |kind: ModelErrorKind| ModelError {
            kind,
            span: stmt.span,
        };
        match &stmt.kind {
            StmtKind::SetLength { target, value } => {
                self.set_length(target, *value).map_err(at)?;
                Ok(true)
            }
            StmtKind::SetTopColor(expr) => {
                self.topcolor =
                    eval_builtin(expr).map_err(|e| at(ModelErrorKind::UnknownColor(e.0)))?;
                Ok(true)
            }
            StmtKind::EveryStyle { style, color } => {
                let rgb = eval_builtin(color).map_err(|e| at(ModelErrorKind::UnknownColor(e.0)))?;
                self.set_every(style, rgb).map_err(at)?;
                Ok(true)
            }
            _ => Ok(false),
        }
    }
}

/// Folds statements into a stream of configuration snapshots: element `i` is
/// the state after the first `i` statements, so `out[0]` is the default
/// configuration and `out.last()` the final state.
pub fn apply_config(stmts: &[Stmt]) -> Result<Vec<Config>, ModelError> {
    let mut cfg = Config::default();
    let mut out = vec![cfg.clone()];
    for stmt in stmts {
        cfg.apply_stmt(stmt)?;
        out.push(cfg.clone());
    }
    Ok(out)
}
