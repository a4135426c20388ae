//! RGB colors, the built-in palette and mix evaluation.

use crate::dsl::ColorExpr;
use thiserror::Error;

/// Linear RGB with components in `0..=1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Rgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Rgb {
    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Rgb { r, g, b }
    }

    pub const BLACK: Rgb = Rgb::new(0.0, 0.0, 0.0);
    pub const WHITE: Rgb = Rgb::new(1.0, 1.0, 1.0);
}

/// Built-in palette. The lowercase names follow the common xcolor values;
/// the capitalized display names carry dvips-flavored values so that e.g.
/// `Orange` is distinct from plain `orange`.
pub const PALETTE: &[(&str, Rgb)] = &[
    ("black", Rgb::new(0.0, 0.0, 0.0)),
    ("white", Rgb::new(1.0, 1.0, 1.0)),
    ("red", Rgb::new(1.0, 0.0, 0.0)),
    ("green", Rgb::new(0.0, 1.0, 0.0)),
    ("blue", Rgb::new(0.0, 0.0, 1.0)),
    ("yellow", Rgb::new(1.0, 1.0, 0.0)),
    ("orange", Rgb::new(1.0, 0.5, 0.0)),
    ("gray", Rgb::new(0.5, 0.5, 0.5)),
    ("brown", Rgb::new(0.75, 0.5, 0.25)),
    ("purple", Rgb::new(0.75, 0.0, 0.25)),
    ("Red", Rgb::new(1.0, 0.0, 0.0)),
    ("Blue", Rgb::new(0.0, 0.0, 1.0)),
    ("Green", Rgb::new(0.0, 1.0, 0.0)),
    ("Orange", Rgb::new(1.0, 0.39, 0.13)),
    ("RedOrange", Rgb::new(1.0, 0.23, 0.13)),
    ("Yellow", Rgb::new(1.0, 1.0, 0.0)),
];

#[derive(Debug, Clone, PartialEq, Error)]
#[error("unknown color `{0}`")]
pub struct UnknownColor(pub String);

/// Evaluates a mix expression against a palette. `Mix(a, p, b)` blends
/// `p/100` of `a` with the rest of `b`, componentwise. Name lookup prefers
/// an exact match and falls back to a case-insensitive one.
pub fn eval_color(expr: &ColorExpr, palette: &[(&str, Rgb)]) -> Result<Rgb, UnknownColor> {
    match expr {
        ColorExpr::Named(name) => lookup(name, palette),
        ColorExpr::Mix { left, pct, right } => {
            let a = eval_color(left, palette)?;
            let b = eval_color(right, palette)?;
            let t = pct / 100.0;
            Ok(Rgb::new(
                t * a.r + (1.0 - t) * b.r,
                t * a.g + (1.0 - t) * b.g,
                t * a.b + (1.0 - t) * b.b,
            ))
        }
    }
}

/// Evaluates against the built-in palette.
pub fn eval_builtin(expr: &ColorExpr) -> Result<Rgb, UnknownColor> {
    eval_color(expr, PALETTE)
}

fn lookup(name: &str, palette: &[(&str, Rgb)]) -> Result<Rgb, UnknownColor> {
    if let Some(&(_, rgb)) = palette.iter().find(|(n, _)| *n == name) {
        return Ok(rgb);
    }
    palette
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|&(_, rgb)| rgb)
        .ok_or_else(|| UnknownColor(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_color_expr;

    #[test]
    fn mix_with_black() {
        let expr = parse_color_expr("green!50!black").unwrap();
        assert_eq!(eval_builtin(&expr).unwrap(), Rgb::new(0.0, 0.5, 0.0));
    }

    #[test]
    fn named_lookup() {
        let expr = parse_color_expr("red").unwrap();
        assert_eq!(eval_builtin(&expr).unwrap(), Rgb::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn implicit_white_mix() {
        // 0.3*0.5 + 0.7*1.0 on every component.
        let expr = parse_color_expr("gray!30").unwrap();
        let rgb = eval_builtin(&expr).unwrap();
        assert!((rgb.r - 0.85).abs() < 1e-12);
        assert!((rgb.g - 0.85).abs() < 1e-12);
        assert!((rgb.b - 0.85).abs() < 1e-12);
    }

    #[test]
    fn case_insensitive_fallback_keeps_exact_matches_first() {
        let gray = parse_color_expr("Gray").unwrap();
        assert_eq!(eval_builtin(&gray).unwrap(), Rgb::new(0.5, 0.5, 0.5));
        // `Orange` and `orange` are distinct palette entries.
        let big = parse_color_expr("Orange").unwrap();
        let small = parse_color_expr("orange").unwrap();
        assert_ne!(eval_builtin(&big).unwrap(), eval_builtin(&small).unwrap());
    }

    #[test]
    fn unknown_color_is_an_error() {
        let expr = parse_color_expr("chartreuse").unwrap();
        assert_eq!(
            eval_builtin(&expr).unwrap_err(),
            UnknownColor("chartreuse".to_string())
        );
    }

    #[test]
    fn left_associative_chain() {
        // (a!30!b)!40!c evaluated directly.
        let expr = parse_color_expr("red!30!blue!40!green").unwrap();
        let inner = Rgb::new(0.3, 0.0, 0.7);
        let want = Rgb::new(0.4 * inner.r, 0.4 * inner.g + 0.6, 0.4 * inner.b);
        let got = eval_builtin(&expr).unwrap();
        assert!((got.r - want.r).abs() < 1e-12);
        assert!((got.g - want.g).abs() < 1e-12);
        assert!((got.b - want.b).abs() < 1e-12);
    }
}
