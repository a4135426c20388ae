//! Parsed statements of the diagram DSL.

use crate::units::Length;
use std::ops::Range;

/// Source position (1-based line and column) used in diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

/// One statement with its position and the byte range it occupies in the
/// source, so callers can slice the original text back out.
#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
    pub src_range: Range<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Vertex(VertexDecl),
    Propag(PropagDecl),
    Graph(GraphDecl),
    SetLength {
        target: String,
        value: Length,
    },
    SetTopColor(ColorExpr),
    EveryStyle {
        style: String,
        color: ColorExpr,
    },
    SetNextFilename(String),
    EnvMarker {
        kind: EnvMarkerKind,
        env: String,
        opts: OptionList,
    },
}

impl StmtKind {
    /// True for statements that contribute drawable content to a diagram.
    pub fn is_drawable(&self) -> bool {
        matches!(
            self,
            StmtKind::Vertex(_) | StmtKind::Propag(_) | StmtKind::Graph(_)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvMarkerKind {
    Begin,
    End,
}

/// A vertex name occurrence, with the position of the reference for error
/// reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexRef {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexDecl {
    pub name: String,
    pub style: Option<String>,
    pub coord: Option<Coord>,
    pub label: Option<String>,
    /// Options left over after style and placement extraction (colors).
    pub opts: OptionList,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagDecl {
    pub style_opts: OptionList,
    pub from: VertexRef,
    pub edge_opts: OptionList,
    pub to: VertexRef,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphDecl {
    pub nodes: Vec<VertexRef>,
    /// Exactly `nodes.len() - 1` option lists, one per `--` connector.
    pub links: Vec<OptionList>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VDir {
    Above,
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HDir {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Coord {
    /// Absolute position in centimeters.
    Absolute { x: f64, y: f64 },
    /// Placement relative to a named vertex. When a combined direction gets a
    /// single explicit distance it applies to both axes; missing distances
    /// default to the node distance at resolution time.
    Relative {
        vertical: Option<VDir>,
        horizontal: Option<HDir>,
        vdist: Option<Length>,
        hdist: Option<Length>,
        anchor: VertexRef,
    },
}

/// Ordered `key[=value]` entries from one bracket group. Later entries
/// override earlier ones at resolution time; duplicate keys are kept.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OptionList {
    pub entries: Vec<OptionEntry>,
}

impl OptionList {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Last value for a key, honoring later-entry-wins semantics.
    pub fn get(&self, key: &str) -> Option<&OptionValue> {
        self.entries
            .iter()
            .rev()
            .find(|e| e.key == key)
            .map(|e| &e.value)
    }

    pub fn extend(&mut self, other: OptionList) {
        self.entries.extend(other.entries);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptionEntry {
    pub key: String,
    pub value: OptionValue,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OptionValue {
    /// Bare word with no `=value` part.
    Flag,
    /// Number with a unit suffix.
    Scalar(Length),
    /// Bare number (fractions, angles, looseness factors).
    Fraction(f64),
    /// A `name!pct!name` mixing expression.
    Color(ColorExpr),
    /// `{[suboptions] label}` as used by momentum and insertion values.
    Braced {
        suboptions: OptionList,
        label: String,
    },
    /// Anything else, stored as raw text.
    Text(String),
}

/// Color expression with xcolor-style mixing. `a!30!b` mixes 30% of `a` with
/// 70% of `b`; a missing right operand means white.
#[derive(Debug, Clone, PartialEq)]
pub enum ColorExpr {
    Named(String),
    Mix {
        left: Box<ColorExpr>,
        pct: f64,
        right: Box<ColorExpr>,
    },
}

/// Clears every position in a statement so two parses can be compared
/// structurally regardless of where they sat in their sources.
pub fn strip_spans(stmt: &mut Stmt) {
    stmt.span = Span::default();
    stmt.src_range = 0..0;
    match &mut stmt.kind {
        StmtKind::Vertex(v) => {
            strip_options(&mut v.opts);
            if let Some(Coord::Relative { anchor, .. }) = &mut v.coord {
                anchor.span = Span::default();
            }
        }
        StmtKind::Propag(p) => {
            strip_options(&mut p.style_opts);
            strip_options(&mut p.edge_opts);
            p.from.span = Span::default();
            p.to.span = Span::default();
        }
        StmtKind::Graph(g) => {
            for node in &mut g.nodes {
                node.span = Span::default();
            }
            for link in &mut g.links {
                strip_options(link);
            }
        }
        StmtKind::EnvMarker { opts, .. } => strip_options(opts),
        _ => {}
    }
}

fn strip_options(opts: &mut OptionList) {
    for entry in &mut opts.entries {
        entry.span = Span::default();
        if let OptionValue::Braced { suboptions, .. } = &mut entry.value {
            strip_options(suboptions);
        }
    }
}
