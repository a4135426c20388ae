//! Scene resolution: symbol table, style aliases, colors and configuration.

pub mod color;
pub mod config;
pub mod scene;
pub mod style;

pub use color::{eval_builtin, eval_color, Rgb, UnknownColor, PALETTE};
pub use config::{apply_config, Config};
pub use scene::{
    build_scene, resolve_coord, Baseline, BuiltScene, EdgeLabel, EdgeOpts, Insertion, Momentum,
    Propagator, SceneGraph, Vertex,
};
pub use style::{
    resolve_propagator_style, resolve_style, resolve_vertex_style, PropagatorStyle, StyleId,
    StyleKind, UnknownStyle, VertexStyle,
};

use crate::dsl::Span;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelErrorKind {
    #[error(transparent)]
    Style(style::UnknownStyle),
    #[error("unknown color `{0}`")]
    UnknownColor(String),
    #[error("unknown length target `{0}`")]
    UnknownLengthTarget(String),
    #[error("length `{0}` must be strictly positive")]
    NonPositiveLength(String),
    #[error("undefined vertex `{0}`")]
    UndefinedVertex(String),
    #[error("vertex `{0}` is already defined")]
    DuplicateVertex(String),
    #[error("`{key}` value {value} is out of range")]
    InvalidFraction { key: String, value: f64 },
    #[error("`out` and `in` must be given together")]
    LoneCurveAngle,
    #[error("unsupported option `{0}`")]
    UnknownOption(String),
    #[error("option `{key}` expects {expected}")]
    BadOptionValue { key: String, expected: &'static str },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelError {
    pub kind: ModelErrorKind,
    pub span: Span,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.col, self.kind)
    }
}

impl std::error::Error for ModelError {}

/// Non-fatal findings produced during scene building.
#[derive(Debug, Clone, PartialEq)]
pub struct Warning {
    pub message: String,
    pub span: Span,
}
