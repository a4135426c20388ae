//! File-level driver: splits sources into diagrams, folds configuration
//! between them, compiles each diagram to SVG and keeps a content-hash
//! cache so unchanged diagrams are not rewritten.
//!
//! Diagnostics go to stderr as `file:line:col: severity: message`. Exit
//! codes: 0 success, 1 any diagnostic error, 2 I/O failure.

use crate::decor::render_scene;
use crate::dsl::{parse, EnvMarkerKind, Span, Stmt, StmtKind};
use crate::emit::{baseline_metadata, layout_bounds, to_svg};
use crate::model::{build_scene, Config};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const CACHE_INDEX_NAME: &str = "fhcache.txt";

#[derive(Debug, Clone)]
pub struct JobSpec {
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub ppc: f64,
    pub force_remake: bool,
    pub name_override: Option<String>,
    pub check_only: bool,
}

impl Default for JobSpec {
    fn default() -> Self {
        JobSpec {
            inputs: Vec::new(),
            out_dir: PathBuf::from("graphics/fh"),
            ppc: crate::units::DEFAULT_PX_PER_CM,
            force_remake: false,
            name_override: None,
            check_only: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => write!(f, "error"),
            Severity::Warning => write!(f, "warning"),
        }
    }
}

/// One `file:line:col: severity: message` line.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub file: PathBuf,
    pub line: u32,
    pub col: u32,
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}: {}: {}",
            self.file.display(),
            self.line,
            self.col,
            self.severity,
            self.message
        )
    }
}

/// One compilable diagram: the configuration in force at its start, its
/// statements (environment markers included) and an optional output name
/// from `\fhsetnextfilename`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramUnit {
    pub config: Config,
    pub stmts: Vec<Stmt>,
    pub name: Option<String>,
    pub src_range: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitErrorKind {
    #[error("unbalanced environment `{0}`")]
    UnbalancedEnvironment(String),
    #[error("statement outside any feynhand block")]
    StrayStatement,
    #[error("{0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitError {
    pub kind: SplitErrorKind,
    pub span: Span,
}

impl fmt::Display for SplitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.col, self.kind)
    }
}

impl std::error::Error for SplitError {}

/// Splits a file's statements into diagram units. Configuration statements
/// between blocks fold into the running state, and each block snapshots the
/// state at its start. Blocks are `feynhand` environments (optionally
/// wrapped in `tikzpicture`); a file without environments is one implicit
/// diagram.
pub fn split_diagrams(stmts: &[Stmt]) -> Result<Vec<DiagramUnit>, SplitError> {
    let has_blocks = stmts.iter().any(|s| {
        matches!(
            &s.kind,
            StmtKind::EnvMarker { kind: EnvMarkerKind::Begin, env, .. } if env == "feynhand"
        )
    });

    let mut running = Config::default();
    let apply_config = |cfg: &mut Config, stmt: &Stmt| -> Result<bool, SplitError> {
        cfg.apply_stmt(stmt).map_err(|e| SplitError {
            kind: SplitErrorKind::Config(e.kind.to_string()),
            span: e.span,
        })
    };

    if !has_blocks {
        for stmt in stmts {
            if let StmtKind::EnvMarker { env, .. } = &stmt.kind {
                return Err(SplitError {
                    kind: SplitErrorKind::UnbalancedEnvironment(env.clone()),
                    span: stmt.span,
                });
            }
        }
        if !stmts.iter().any(|s| s.kind.is_drawable()) {
            return Ok(Vec::new());
        }
        let name = stmts.iter().find_map(|s| match &s.kind {
            StmtKind::SetNextFilename(n) => Some(n.clone()),
            _ => None,
        });
        let start = stmts.first().map(|s| s.src_range.start).unwrap_or(0);
        let end = stmts.last().map(|s| s.src_range.end).unwrap_or(0);
        return Ok(vec![DiagramUnit {
            config: running,
            stmts: stmts.to_vec(),
            name,
            src_range: start..end,
        }]);
    }

    let mut units = Vec::new();
    let mut pending_name: Option<String> = None;
    let mut tikz_marker: Option<Stmt> = None;
    let mut in_feynhand = false;
    let mut buf: Vec<Stmt> = Vec::new();
    let mut unit_cfg = Config::default();
    let mut unit_start = 0usize;

    for stmt in stmts {
        match &stmt.kind {
            StmtKind::EnvMarker {
                kind: EnvMarkerKind::Begin,
                env,
                ..
            } if env == "tikzpicture" => {
                if in_feynhand || tikz_marker.is_some() {
                    return Err(SplitError {
                        kind: SplitErrorKind::UnbalancedEnvironment(env.clone()),
                        span: stmt.span,
                    });
                }
                tikz_marker = Some(stmt.clone());
            }
            StmtKind::EnvMarker {
                kind: EnvMarkerKind::End,
                env,
                ..
            } if env == "tikzpicture" => {
                if in_feynhand || tikz_marker.is_none() {
                    return Err(SplitError {
                        kind: SplitErrorKind::UnbalancedEnvironment(env.clone()),
                        span: stmt.span,
                    });
                }
                tikz_marker = None;
            }
            StmtKind::EnvMarker {
                kind: EnvMarkerKind::Begin,
                env,
                ..
            } if env == "feynhand" => {
                if in_feynhand {
                    return Err(SplitError {
                        kind: SplitErrorKind::UnbalancedEnvironment(env.clone()),
                        span: stmt.span,
                    });
                }
                in_feynhand = true;
                unit_cfg = running.clone();
                buf = Vec::new();
                if let Some(marker) = &tikz_marker {
                    buf.push(marker.clone());
                    unit_start = marker.src_range.start;
                } else {
                    unit_start = stmt.src_range.start;
                }
                buf.push(stmt.clone());
            }
            StmtKind::EnvMarker {
                kind: EnvMarkerKind::End,
                env,
                ..
            } if env == "feynhand" => {
                if !in_feynhand {
                    return Err(SplitError {
                        kind: SplitErrorKind::UnbalancedEnvironment(env.clone()),
                        span: stmt.span,
                    });
                }
                in_feynhand = false;
                buf.push(stmt.clone());
                // In-block configuration changes persist for later blocks.
                for s in &buf {
                    apply_config(&mut running, s)?;
                }
                units.push(DiagramUnit {
                    config: unit_cfg.clone(),
                    stmts: std::mem::take(&mut buf),
                    name: pending_name.take(),
                    src_range: unit_start..stmt.src_range.end,
                });
            }
            _ if in_feynhand => buf.push(stmt.clone()),
            StmtKind::SetNextFilename(n) => pending_name = Some(n.clone()),
            _ => {
                if !apply_config(&mut running, stmt)? {
                    return Err(SplitError {
                        kind: SplitErrorKind::StrayStatement,
                        span: stmt.span,
                    });
                }
            }
        }
    }
    if in_feynhand {
        return Err(SplitError {
            kind: SplitErrorKind::UnbalancedEnvironment("feynhand".to_string()),
            span: stmts.last().map(|s| s.span).unwrap_or_default(),
        });
    }
    if let Some(marker) = tikz_marker {
        return Err(SplitError {
            kind: SplitErrorKind::UnbalancedEnvironment("tikzpicture".to_string()),
            span: marker.span,
        });
    }
    Ok(units)
}

/// Content hash of one diagram: tool version, output scale, effective
/// configuration and the diagram's source slice.
pub fn content_hash(cfg: &Config, source_slice: &str, ppc: f64) -> String {
    let mut hasher = Sha256::new();
    hasher.update(env!("CARGO_PKG_VERSION").as_bytes());
    hasher.update(b"\n");
    hasher.update(format!("{ppc:.6}\n").as_bytes());
    hasher.update(config_fingerprint(cfg).as_bytes());
    hasher.update(b"\n");
    hasher.update(source_slice.as_bytes());
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        let _ = fmt::Write::write_fmt(&mut hex, format_args!("{byte:02x}"));
    }
    hex
}

fn config_fingerprint(cfg: &Config) -> String {
    let mut s = String::new();
    let _ = fmt::Write::write_fmt(
        &mut s,
        format_args!(
            "dot={:.9};blob={:.9};line={:.9};arrow={:.9};topsep={:.9};nd={:.9};top={:.6},{:.6},{:.6}",
            cfg.dotsize.as_cm(),
            cfg.blobsize.as_cm(),
            cfg.linesize.as_cm(),
            cfg.arrowsize.as_cm(),
            cfg.topsep().as_cm(),
            cfg.node_distance.as_cm(),
            cfg.topcolor.r,
            cfg.topcolor.g,
            cfg.topcolor.b,
        ),
    );
    for (style, rgb) in &cfg.every_vertex {
        let _ = fmt::Write::write_fmt(
            &mut s,
            format_args!(";ev:{style:?}={:.6},{:.6},{:.6}", rgb.r, rgb.g, rgb.b),
        );
    }
    for (style, rgb) in &cfg.every_propagator {
        let _ = fmt::Write::write_fmt(
            &mut s,
            format_args!(";ep:{style:?}={:.6},{:.6},{:.6}", rgb.r, rgb.g, rgb.b),
        );
    }
    s
}

/// Renders an already-built scene into SVG text.
pub fn render_svg(scene: &crate::model::SceneGraph, ppc: f64) -> Result<String, UnitError> {
    let prims = render_scene(scene).map_err(UnitError::Decor)?;
    let bounds = layout_bounds(&prims).map_err(UnitError::Emit)?;
    let baseline = baseline_metadata(scene, &bounds, ppc).map_err(UnitError::Emit)?;
    to_svg(&prims, ppc, baseline).map_err(UnitError::Emit)
}

/// Compiles one diagram unit to SVG text plus any warnings.
pub fn compile_unit(
    unit: &DiagramUnit,
    ppc: f64,
) -> Result<(String, Vec<crate::model::Warning>), UnitError> {
    let built = build_scene(&unit.stmts, &unit.config).map_err(UnitError::Model)?;
    let svg = render_svg(&built.scene, ppc)?;
    Ok((svg, built.warnings))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UnitError {
    #[error(transparent)]
    Model(crate::model::ModelError),
    #[error(transparent)]
    Decor(crate::decor::DecorError),
    #[error("{0}")]
    Emit(crate::emit::EmitError),
}

impl UnitError {
    pub fn span(&self) -> Span {
        match self {
            UnitError::Model(e) => e.span,
            UnitError::Decor(e) => e.span,
            UnitError::Emit(_) => Span::new(1, 1),
        }
    }
}

/// Flat-text cache index: one `hash<space>filename` pair per line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CacheIndex {
    entries: BTreeMap<String, String>,
}

impl CacheIndex {
    pub fn load(path: &Path) -> CacheIndex {
        let mut entries = BTreeMap::new();
        if let Ok(text) = fs::read_to_string(path) {
            for line in text.lines() {
                if let Some((hash, name)) = line.split_once(' ') {
                    if !hash.is_empty() && !name.is_empty() {
                        entries.insert(name.to_string(), hash.to_string());
                    }
                }
            }
        }
        CacheIndex { entries }
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let mut out = String::new();
        for (name, hash) in &self.entries {
            out.push_str(hash);
            out.push(' ');
            out.push_str(name);
            out.push('\n');
        }
        fs::write(path, out)
    }

    pub fn is_fresh(&self, name: &str, hash: &str) -> bool {
        self.entries.get(name).map(String::as_str) == Some(hash)
    }

    pub fn record(&mut self, name: &str, hash: &str) {
        self.entries.insert(name.to_string(), hash.to_string());
    }
}

/// Runs a compile job. Returns the process exit code.
pub fn run(spec: &JobSpec) -> i32 {
    let mut sink = |d: &Diagnostic| eprintln!("{d}");
    let mut io_err = |msg: &str| eprintln!("feynhand: {msg}");
    run_with(spec, &mut sink, &mut io_err)
}

/// Same as [`run`] with caller-controlled output, which keeps the driver
/// testable without capturing stderr.
pub fn run_with(
    spec: &JobSpec,
    diag: &mut dyn FnMut(&Diagnostic),
    io_msg: &mut dyn FnMut(&str),
) -> i32 {
    let mut worst = 0i32;
    if spec.inputs.is_empty() {
        io_msg("no input files");
        return 2;
    }
    if !spec.check_only {
        if let Err(e) = fs::create_dir_all(&spec.out_dir) {
            io_msg(&format!(
                "cannot create output directory {}: {e}",
                spec.out_dir.display()
            ));
            return 2;
        }
    }
    let index_path = spec.out_dir.join(CACHE_INDEX_NAME);
    let mut index = CacheIndex::load(&index_path);
    let index_before = index.clone();

    for input in &spec.inputs {
        let code = compile_file(input, spec, &mut index, diag, io_msg);
        worst = worst.max(code);
    }

    if !spec.check_only && index != index_before {
        if let Err(e) = index.save(&index_path) {
            io_msg(&format!("cannot write cache index: {e}"));
            worst = worst.max(2);
        }
    }
    worst
}

fn compile_file(
    input: &Path,
    spec: &JobSpec,
    index: &mut CacheIndex,
    diag: &mut dyn FnMut(&Diagnostic),
    io_msg: &mut dyn FnMut(&str),
) -> i32 {
    let source = match fs::read_to_string(input) {
        Ok(s) => s,
        Err(e) => {
            io_msg(&format!("cannot read {}: {e}", input.display()));
            return 2;
        }
    };
    let report = |diag: &mut dyn FnMut(&Diagnostic), span: Span, severity, message: String| {
        diag(&Diagnostic {
            file: input.to_path_buf(),
            line: span.line,
            col: span.col,
            severity,
            message,
        });
    };

    let stmts = match parse(&source) {
        Ok(s) => s,
        Err(e) => {
            report(diag, e.span(), Severity::Error, e.kind.to_string());
            return 1;
        }
    };
    let units = match split_diagrams(&stmts) {
        Ok(u) => u,
        Err(e) => {
            report(diag, e.span, Severity::Error, e.kind.to_string());
            return 1;
        }
    };

    let stem = spec
        .name_override
        .clone()
        .or_else(|| input.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "diagram".to_string());

    let mut worst = 0i32;
    let many = units.len() > 1;
    for (i, unit) in units.iter().enumerate() {
        let built = match build_scene(&unit.stmts, &unit.config) {
            Ok(b) => b,
            Err(e) => {
                report(diag, e.span, Severity::Error, e.kind.to_string());
                worst = worst.max(1);
                continue;
            }
        };
        for w in &built.warnings {
            report(diag, w.span, Severity::Warning, w.message.clone());
        }
        if spec.check_only {
            continue;
        }

        let name = unit.name.clone().unwrap_or_else(|| {
            if many {
                format!("{stem}-{}", i + 1)
            } else {
                stem.clone()
            }
        });
        let file_name = format!("{name}.svg");
        let out_path = spec.out_dir.join(&file_name);
        let slice = &source[unit.src_range.clone()];
        let hash = content_hash(&built.scene.config, slice, spec.ppc);

        if !spec.force_remake && index.is_fresh(&file_name, &hash) && out_path.exists() {
            continue;
        }

        let svg = match render_svg(&built.scene, spec.ppc) {
            Ok(svg) => svg,
            Err(e) => {
                let (span, msg) = match &e {
                    UnitError::Model(m) => (m.span, m.kind.to_string()),
                    UnitError::Decor(d) => (d.span, d.kind.to_string()),
                    UnitError::Emit(em) => (
                        unit.stmts.first().map(|s| s.span).unwrap_or_default(),
                        em.to_string(),
                    ),
                };
                report(diag, span, Severity::Error, msg);
                worst = worst.max(1);
                continue;
            }
        };
        if let Err(e) = fs::write(&out_path, svg) {
            io_msg(&format!("cannot write {}: {e}", out_path.display()));
            worst = worst.max(2);
            continue;
        }
        index.record(&file_name, &hash);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::Length;

    #[test]
    fn bare_file_is_one_implicit_diagram() {
        let stmts =
            parse("\\vertex (a) at (0,0);\n\\vertex (b) at (1,0);\n\\propag (a) to (b);").unwrap();
        let units = split_diagrams(&stmts).unwrap();
        assert_eq!(units.len(), 1);
        assert_eq!(units[0].config, Config::default());
        assert_eq!(units[0].name, None);
    }

    #[test]
    fn config_between_blocks_folds_forward() {
        let src = "\
\\begin{feynhand}
\\vertex (a) at (0,0); \\vertex (b) at (1,0);
\\propag (a) to (b);
\\end{feynhand}
\\setlength{\\feynhanddotsize}{2mm}
\\begin{feynhand}
\\vertex (c) at (0,0); \\vertex (d) at (1,0);
\\propag (c) to (d);
\\end{feynhand}
";
        let stmts = parse(src).unwrap();
        let units = split_diagrams(&stmts).unwrap();
        assert_eq!(units.len(), 2);
        assert_eq!(units[0].config.dotsize, Length::mm(1.5));
        assert_eq!(units[1].config.dotsize, Length::mm(2.0));
    }

    #[test]
    fn set_next_filename_applies_to_following_block() {
        let src = "\
\\fhsetnextfilename{scatter};
\\begin{feynhand}
\\vertex (a) at (0,0); \\vertex (b) at (1,0);
\\propag (a) to (b);
\\end{feynhand}
";
        let stmts = parse(src).unwrap();
        let units = split_diagrams(&stmts).unwrap();
        assert_eq!(units[0].name.as_deref(), Some("scatter"));
    }

    #[test]
    fn in_block_length_changes_persist_for_later_blocks() {
        let src = "\
\\begin{feynhand}
\\setlength{\\feynhandlinesize}{1pt}
\\vertex (a) at (0,0); \\vertex (b) at (1,0); \\propag (a) to (b);
\\end{feynhand}
\\begin{feynhand}
\\vertex (c) at (0,0); \\vertex (d) at (1,0); \\propag (c) to (d);
\\end{feynhand}
";
        let stmts = parse(src).unwrap();
        let units = split_diagrams(&stmts).unwrap();
        // Block one starts at defaults; block two sees the change.
        assert_eq!(units[0].config.linesize, Length::pt(0.5));
        assert_eq!(units[1].config.linesize, Length::pt(1.0));
    }

    #[test]
    fn unbalanced_environments_are_rejected() {
        let stmts = parse("\\begin{feynhand}\n\\vertex (a) at (0,0);").unwrap();
        let err = split_diagrams(&stmts).unwrap_err();
        assert!(matches!(err.kind, SplitErrorKind::UnbalancedEnvironment(_)));

        let stmts = parse("\\end{feynhand}").unwrap();
        assert!(split_diagrams(&stmts).is_err());
    }

    #[test]
    fn stray_drawables_outside_blocks_are_rejected() {
        let src =
            "\\vertex (x) at (0,0);\n\\begin{feynhand}\n\\vertex (a) at (0,0);\n\\end{feynhand}";
        let stmts = parse(src).unwrap();
        let err = split_diagrams(&stmts).unwrap_err();
        assert_eq!(err.kind, SplitErrorKind::StrayStatement);
    }

    #[test]
    fn hash_depends_on_config_and_source() {
        let cfg = Config::default();
        let h1 = content_hash(&cfg, "\\propag (a) to (b);", 37.8);
        let h2 = content_hash(&cfg, "\\propag (a) to (c);", 37.8);
        assert_ne!(h1, h2);
        let mut cfg2 = cfg.clone();
        cfg2.set_length("dotsize", Length::mm(2.0)).unwrap();
        assert_ne!(h1, content_hash(&cfg2, "\\propag (a) to (b);", 37.8));
        assert_ne!(h1, content_hash(&cfg, "\\propag (a) to (b);", 50.0));
        assert_eq!(
            h1,
            content_hash(&Config::default(), "\\propag (a) to (b);", 37.8)
        );
    }

    #[test]
    fn cache_index_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(CACHE_INDEX_NAME);
        let mut index = CacheIndex::default();
        index.record("a.svg", "00ff");
        index.record("b.svg", "1234");
        index.save(&path).unwrap();
        let loaded = CacheIndex::load(&path);
        assert!(loaded.is_fresh("a.svg", "00ff"));
        assert!(!loaded.is_fresh("a.svg", "beef"));
        assert!(loaded.is_fresh("b.svg", "1234"));
    }
}
