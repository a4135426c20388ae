#![forbid(unsafe_code)]

//! A compiler for a Feynman-diagram DSL.
//!
//! The pipeline parses `.fh` source text into statements, resolves them
//! into a scene graph of positioned vertices and styled propagators,
//! computes decorated path geometry (waves, coils, arrows, labels) and
//! emits deterministic layered SVG. The `cli` module adds the file-level
//! driver with its content-hash output cache.

pub mod cli;
pub mod decor;
pub mod dsl;
pub mod emit;
pub mod geometry;
pub mod model;
pub mod units;
