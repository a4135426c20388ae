//! Vertex and propagator style identifiers and name resolution.
//!
//! Propagator styles come in a short and a long spelling (`fer` / `fermion`);
//! both resolve to the same identifier. Vertex blob styles additionally
//! accept the reversed spellings (`ringblob` / `blobring`).

use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexStyle {
    Bare,
    Particle,
    Dot,
    RingDot,
    SquareDot,
    CrossDot,
    Blob,
    RingBlob,
    GrayBlob,
    NwBlob,
    NeBlob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PropagatorStyle {
    Fermion,
    AntiFermion,
    Photon,
    Boson,
    ChargedBoson,
    AntiChargedBoson,
    Gluon,
    Scalar,
    ChargedScalar,
    AntiChargedScalar,
    Ghost,
    ChargedGhost,
    AntiChargedGhost,
    Majorana,
    AntiMajorana,
    Plain,
}

impl PropagatorStyle {
    pub const ALL: [PropagatorStyle; 16] = [
        PropagatorStyle::Fermion,
        PropagatorStyle::AntiFermion,
        PropagatorStyle::Photon,
        PropagatorStyle::Boson,
        PropagatorStyle::ChargedBoson,
        PropagatorStyle::AntiChargedBoson,
        PropagatorStyle::Gluon,
        PropagatorStyle::Scalar,
        PropagatorStyle::ChargedScalar,
        PropagatorStyle::AntiChargedScalar,
        PropagatorStyle::Ghost,
        PropagatorStyle::ChargedGhost,
        PropagatorStyle::AntiChargedGhost,
        PropagatorStyle::Majorana,
        PropagatorStyle::AntiMajorana,
        PropagatorStyle::Plain,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StyleKind {
    Vertex,
    Propagator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StyleId {
    Vertex(VertexStyle),
    Propagator(PropagatorStyle),
}

/// Short/long alias pairs for propagator styles. `plain` has no long form
/// and `photon` keeps its own identifier even though it draws the boson
/// waveform.
pub const PROPAGATOR_ALIASES: &[(&str, Option<&str>, PropagatorStyle)] = &[
    ("fer", Some("fermion"), PropagatorStyle::Fermion),
    ("antfer", Some("anti fermion"), PropagatorStyle::AntiFermion),
    ("pho", Some("photon"), PropagatorStyle::Photon),
    ("bos", Some("boson"), PropagatorStyle::Boson),
    (
        "chabos",
        Some("charged boson"),
        PropagatorStyle::ChargedBoson,
    ),
    (
        "antbos",
        Some("anti charged boson"),
        PropagatorStyle::AntiChargedBoson,
    ),
    ("glu", Some("gluon"), PropagatorStyle::Gluon),
    ("sca", Some("scalar"), PropagatorStyle::Scalar),
    (
        "chasca",
        Some("charged scalar"),
        PropagatorStyle::ChargedScalar,
    ),
    (
        "antsca",
        Some("anti charged scalar"),
        PropagatorStyle::AntiChargedScalar,
    ),
    ("gho", Some("ghost"), PropagatorStyle::Ghost),
    (
        "chagho",
        Some("charged ghost"),
        PropagatorStyle::ChargedGhost,
    ),
    (
        "antgho",
        Some("anti charged ghost"),
        PropagatorStyle::AntiChargedGhost,
    ),
    ("maj", Some("majorana"), PropagatorStyle::Majorana),
    (
        "antmaj",
        Some("anti majorana"),
        PropagatorStyle::AntiMajorana,
    ),
    ("plain", None, PropagatorStyle::Plain),
];

/// Vertex style names, including the alternate blob spellings.
pub const VERTEX_STYLE_NAMES: &[(&str, VertexStyle)] = &[
    ("particle", VertexStyle::Particle),
    ("dot", VertexStyle::Dot),
    ("ringdot", VertexStyle::RingDot),
    ("squaredot", VertexStyle::SquareDot),
    ("crossdot", VertexStyle::CrossDot),
    ("blob", VertexStyle::Blob),
    ("ringblob", VertexStyle::RingBlob),
    ("blobring", VertexStyle::RingBlob),
    ("grayblob", VertexStyle::GrayBlob),
    ("blobgray", VertexStyle::GrayBlob),
    ("NWblob", VertexStyle::NwBlob),
    ("blobNW", VertexStyle::NwBlob),
    ("NEblob", VertexStyle::NeBlob),
    ("blobNE", VertexStyle::NeBlob),
];

pub fn is_vertex_style_name(name: &str) -> bool {
    VERTEX_STYLE_NAMES.iter().any(|(n, _)| *n == name)
}

pub fn is_propagator_style_name(name: &str) -> bool {
    PROPAGATOR_ALIASES
        .iter()
        .any(|(short, long, _)| *short == name || *long == Some(name))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub struct UnknownStyle {
    pub name: String,
    pub suggestions: Vec<String>,
}

impl fmt::Display for UnknownStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown style `{}`", self.name)?;
        if !self.suggestions.is_empty() {
            write!(f, " (closest matches: {})", self.suggestions.join(", "))?;
        }
        Ok(())
    }
}

pub fn resolve_vertex_style(name: &str) -> Result<VertexStyle, UnknownStyle> {
    VERTEX_STYLE_NAMES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|&(_, id)| id)
        .ok_or_else(|| unknown(name, StyleKind::Vertex))
}

pub fn resolve_propagator_style(name: &str) -> Result<PropagatorStyle, UnknownStyle> {
    PROPAGATOR_ALIASES
        .iter()
        .find(|(short, long, _)| *short == name || *long == Some(name))
        .map(|&(_, _, id)| id)
        .ok_or_else(|| unknown(name, StyleKind::Propagator))
}

pub fn resolve_style(name: &str, kind: StyleKind) -> Result<StyleId, UnknownStyle> {
    match kind {
        StyleKind::Vertex => resolve_vertex_style(name).map(StyleId::Vertex),
        StyleKind::Propagator => resolve_propagator_style(name).map(StyleId::Propagator),
    }
}

fn unknown(name: &str, kind: StyleKind) -> UnknownStyle {
    let candidates: Vec<&str> = match kind {
        StyleKind::Vertex => VERTEX_STYLE_NAMES.iter().map(|(n, _)| *n).collect(),
        StyleKind::Propagator => PROPAGATOR_ALIASES
            .iter()
            .flat_map(|(short, long, _)| std::iter::once(*short).chain(long.iter().copied()))
            .collect(),
    };
    let mut scored: Vec<(usize, &str)> = candidates
        .iter()
        .map(|c| (edit_distance(name, c), *c))
        .filter(|(d, _)| *d <= 2)
        .collect();
    scored.sort();
    UnknownStyle {
        name: name.to_string(),
        suggestions: scored.iter().take(3).map(|(_, c)| c.to_string()).collect(),
    }
}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_and_long_names_agree() {
        assert_eq!(
            resolve_propagator_style("antfer").unwrap(),
            PropagatorStyle::AntiFermion
        );
        assert_eq!(
            resolve_propagator_style("anti fermion").unwrap(),
            PropagatorStyle::AntiFermion
        );
        assert_eq!(
            resolve_propagator_style("chabos").unwrap(),
            PropagatorStyle::ChargedBoson
        );
        assert_eq!(
            resolve_propagator_style("charged boson").unwrap(),
            PropagatorStyle::ChargedBoson
        );
        for (short, long, id) in PROPAGATOR_ALIASES {
            assert_eq!(resolve_propagator_style(short).unwrap(), *id);
            if let Some(long) = long {
                assert_eq!(resolve_propagator_style(long).unwrap(), *id);
            }
        }
    }

    #[test]
    fn plain_is_a_propagator_style() {
        assert_eq!(
            resolve_propagator_style("plain").unwrap(),
            PropagatorStyle::Plain
        );
    }

    #[test]
    fn blob_spellings() {
        assert_eq!(
            resolve_vertex_style("ringblob").unwrap(),
            VertexStyle::RingBlob
        );
        assert_eq!(
            resolve_vertex_style("blobring").unwrap(),
            VertexStyle::RingBlob
        );
        assert_eq!(resolve_vertex_style("NWblob").unwrap(), VertexStyle::NwBlob);
        assert_eq!(resolve_vertex_style("blobNW").unwrap(), VertexStyle::NwBlob);
    }

    #[test]
    fn unknown_style_suggests_near_misses() {
        let err = resolve_propagator_style("fre").unwrap_err();
        assert!(err.suggestions.contains(&"fer".to_string()), "{err:?}");
        let msg = err.to_string();
        assert!(msg.contains("unknown style `fre`"));
    }
}
