//! Recursive-descent parser producing [`Stmt`] values from source text.
//!
//! The grammar is a fixed command set: `\vertex`, `\propag`/`\propagator`,
//! `\graph`, the length/color/style configuration commands, and
//! `\begin`/`\end` markers for the `feynhand` and `tikzpicture` environments.
//! Anything else is an unknown command. Option keys are matched after
//! collapsing internal whitespace, so `half  left` equals `half left`.

use super::ast::*;
use super::token::{tokenize, LexError, LexErrorKind, Token, TokenKind};
use crate::units::{Length, UnitKind};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("missing `;` after statement")]
    MissingSemicolon,
    #[error("unknown command `{0}`")]
    UnknownCommand(String),
    #[error("unknown environment `{0}` (expected `feynhand` or `tikzpicture`)")]
    UnknownEnvironment(String),
    #[error("mismatched brackets in option list")]
    NestedBracketMismatch,
    #[error("empty option key")]
    EmptyKey,
    #[error("empty color name")]
    EmptyColorName,
    #[error("mix percentage {0} is outside 0..100")]
    BadPercentage(f64),
    #[error(transparent)]
    Lex(LexErrorKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: u32,
    pub col: u32,
}

impl ParseError {
    pub fn span(&self) -> Span {
        Span::new(self.line, self.col)
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.kind)
    }
}

impl std::error::Error for ParseError {}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> Self {
        ParseError {
            kind: ParseErrorKind::Lex(e.kind),
            line: e.line,
            col: e.col,
        }
    }
}

/// Parses a whole source file into statements, in source order.
pub fn parse(source: &str) -> Result<Vec<Stmt>, ParseError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser {
        src: source,
        tokens: &tokens,
        pos: 0,
    };
    let mut stmts = Vec::new();
    while !parser.at_end() {
        parser.parse_stmt_into(&mut stmts)?;
    }
    Ok(stmts)
}

/// Parses the contents of one `[...]` bracket group. Splits entries on
/// top-level commas only; commas nested in `{}`/`[]`/`()` do not split.
pub fn parse_options(text: &str) -> Result<OptionList, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        src: text,
        tokens: &tokens,
        pos: 0,
    };
    let opts = parser.parse_entries(None)?;
    Ok(opts)
}

/// Parses a color mixing expression like `green!50!black`. Mixing is
/// left-associative and a trailing `!pct` mixes toward white.
pub fn parse_color_expr(text: &str) -> Result<ColorExpr, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        src: text,
        tokens: &tokens,
        pos: 0,
    };
    let expr = parser.parse_color_tokens()?;
    if !parser.at_end() {
        return Err(parser.err_here(ParseErrorKind::Unexpected {
            expected: "end of color expression".into(),
            found: parser.found_desc(),
        }));
    }
    Ok(expr)
}

const PLACEMENT_KEYS: &[&str] = &[
    "above",
    "below",
    "left",
    "right",
    "above left",
    "above right",
    "below left",
    "below right",
];

struct Parser<'a> {
    src: &'a str,
    tokens: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<TokenKind> {
        self.peek().map(|t| t.kind)
    }

    fn peek_kind_at(&self, ahead: usize) -> Option<TokenKind> {
        self.tokens.get(self.pos + ahead).map(|t| t.kind)
    }

    fn advance(&mut self) -> Option<&Token> {
        let tok = self.tokens.get(self.pos)?;
        self.pos += 1;
        Some(tok)
    }

    fn span_of(tok: &Token) -> Span {
        Span::new(tok.line, tok.col)
    }

    fn here(&self) -> Span {
        match self.peek() {
            Some(t) => Self::span_of(t),
            None => self
                .tokens
                .last()
                .map(|t| Span::new(t.line, t.col + t.lexeme.chars().count() as u32))
                .unwrap_or_default(),
        }
    }

    fn err_here(&self, kind: ParseErrorKind) -> ParseError {
        let span = self.here();
        ParseError {
            kind,
            line: span.line,
            col: span.col,
        }
    }

    fn err_at(&self, kind: ParseErrorKind, span: Span) -> ParseError {
        ParseError {
            kind,
            line: span.line,
            col: span.col,
        }
    }

    fn found_desc(&self) -> String {
        match self.peek() {
            Some(t) => format!("`{}`", t.lexeme),
            None => "end of input".to_string(),
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Token, ParseError> {
        match self.peek() {
            Some(t) if t.kind == kind => Ok(self.advance().unwrap().clone()),
            _ => Err(self.err_here(ParseErrorKind::Unexpected {
                expected: what.to_string(),
                found: self.found_desc(),
            })),
        }
    }

    fn eat_semicolon_optional(&mut self) {
        if self.peek_kind() == Some(TokenKind::Semicolon) {
            self.advance();
        }
    }

    fn expect_semicolon(&mut self) -> Result<(), ParseError> {
        if self.peek_kind() == Some(TokenKind::Semicolon) {
            self.advance();
            Ok(())
        } else {
            Err(self.err_here(ParseErrorKind::MissingSemicolon))
        }
    }

    // ---- statements ----------------------------------------------------

    fn parse_stmt_into(&mut self, out: &mut Vec<Stmt>) -> Result<(), ParseError> {
        let start_idx = self.pos;
        let cmd = match self.peek() {
            Some(t) if t.kind == TokenKind::Command => self.advance().unwrap().clone(),
            _ => {
                return Err(self.err_here(ParseErrorKind::Unexpected {
                    expected: "a command".into(),
                    found: self.found_desc(),
                }))
            }
        };
        let span = Self::span_of(&cmd);
        let produced = match cmd.lexeme.as_str() {
            "\\vertex" => vec![StmtKind::Vertex(self.parse_vertex()?)],
            "\\propag" | "\\propagator" => vec![StmtKind::Propag(self.parse_propag()?)],
            "\\graph" => vec![StmtKind::Graph(self.parse_graph()?)],
            "\\setlength" => vec![self.parse_setlength()?],
            "\\renewcommand" | "\\feynhandtopcolor" => {
                vec![self.parse_topcolor(cmd.lexeme == "\\renewcommand")?]
            }
            "\\pgfqkeys" => self.parse_pgfqkeys()?,
            "\\fhsetnextfilename" => vec![self.parse_set_next_filename()?],
            "\\begin" | "\\end" => vec![self.parse_env_marker(cmd.lexeme == "\\begin")?],
            other => {
                return Err(self.err_at(ParseErrorKind::UnknownCommand(other.to_string()), span))
            }
        };
        let src_range = self.tokens[start_idx].offset..self.tokens[self.pos - 1].end_offset();
        for kind in produced {
            out.push(Stmt {
                kind,
                span,
                src_range: src_range.clone(),
            });
        }
        Ok(())
    }

    fn parse_vertex(&mut self) -> Result<VertexDecl, ParseError> {
        let mut opts = OptionList::default();
        if self.peek_kind() == Some(TokenKind::LBracket) {
            opts.extend(self.parse_bracket()?);
        }
        self.expect(TokenKind::LParen, "`(` before the vertex name")?;
        let name_tok = self.expect(TokenKind::Name, "a vertex name")?;
        self.expect(TokenKind::RParen, "`)` after the vertex name")?;
        if self.peek_kind() == Some(TokenKind::LBracket) {
            opts.extend(self.parse_bracket()?);
        }

        let mut coord_abs = None;
        if matches!(self.peek(), Some(t) if t.kind == TokenKind::Name && t.lexeme == "at") {
            self.advance();
            self.expect(TokenKind::LParen, "`(` after `at`")?;
            let x = self.parse_coord_component()?;
            self.expect(TokenKind::Comma, "`,` between coordinates")?;
            let y = self.parse_coord_component()?;
            self.expect(TokenKind::RParen, "`)` after coordinates")?;
            coord_abs = Some(Coord::Absolute { x, y });
        }

        let label = if self.peek_kind() == Some(TokenKind::LBrace) {
            Some(self.slurp_brace_group()?)
        } else {
            None
        };
        self.expect_semicolon()?;

        // Pull the style flag and any relative-placement key out of the
        // option soup; everything else (colors) is resolved later.
        let mut style = None;
        let mut coord_rel = None;
        let mut rest = Vec::new();
        for entry in opts.entries {
            if entry.value == OptionValue::Flag
                && crate::model::style::is_vertex_style_name(&entry.key)
            {
                style = Some(entry.key);
            } else if PLACEMENT_KEYS.contains(&entry.key.as_str()) {
                coord_rel = Some(self.placement_coord(&entry)?);
            } else {
                rest.push(entry);
            }
        }
        if coord_abs.is_some() && coord_rel.is_some() {
            return Err(self.err_at(
                ParseErrorKind::Unexpected {
                    expected: "either `at (x,y)` or a relative placement, not both".into(),
                    found: format!("vertex `{}` with both", name_tok.lexeme),
                },
                Self::span_of(&name_tok),
            ));
        }

        Ok(VertexDecl {
            name: name_tok.lexeme,
            style,
            coord: coord_abs.or(coord_rel),
            label,
            opts: OptionList { entries: rest },
        })
    }

    fn parse_propag(&mut self) -> Result<PropagDecl, ParseError> {
        let style_opts = if self.peek_kind() == Some(TokenKind::LBracket) {
            self.parse_bracket()?
        } else {
            OptionList::default()
        };
        let from = self.parse_vertex_ref()?;
        let to_kw = self.expect(TokenKind::Name, "`to`")?;
        if to_kw.lexeme != "to" {
            return Err(self.err_at(
                ParseErrorKind::Unexpected {
                    expected: "`to`".into(),
                    found: format!("`{}`", to_kw.lexeme),
                },
                Self::span_of(&to_kw),
            ));
        }
        let edge_opts = if self.peek_kind() == Some(TokenKind::LBracket) {
            self.parse_bracket()?
        } else {
            OptionList::default()
        };
        let to = self.parse_vertex_ref()?;
        self.expect_semicolon()?;
        Ok(PropagDecl {
            style_opts,
            from,
            edge_opts,
            to,
        })
    }

    fn parse_graph(&mut self) -> Result<GraphDecl, ParseError> {
        self.expect(TokenKind::LBrace, "`{` after \\graph")?;
        let mut nodes = vec![self.parse_vertex_ref()?];
        let mut links = Vec::new();
        while self.peek_kind() == Some(TokenKind::DashDash) {
            self.advance();
            let link = if self.peek_kind() == Some(TokenKind::LBracket) {
                self.parse_bracket()?
            } else {
                OptionList::default()
            };
            links.push(link);
            nodes.push(self.parse_vertex_ref()?);
        }
        self.expect(TokenKind::RBrace, "`}` closing the graph chain")?;
        self.expect_semicolon()?;
        if nodes.len() < 2 {
            return Err(self.err_here(ParseErrorKind::Unexpected {
                expected: "at least two chained vertices".into(),
                found: "a single node".into(),
            }));
        }
        Ok(GraphDecl { nodes, links })
    }

    fn parse_vertex_ref(&mut self) -> Result<VertexRef, ParseError> {
        self.expect(TokenKind::LParen, "`(` before a vertex name")?;
        let tok = self.expect(TokenKind::Name, "a vertex name")?;
        self.expect(TokenKind::RParen, "`)` after the vertex name")?;
        let span = Self::span_of(&tok);
        Ok(VertexRef {
            name: tok.lexeme,
            span,
        })
    }

    fn parse_setlength(&mut self) -> Result<StmtKind, ParseError> {
        self.expect(TokenKind::LBrace, "`{` after \\setlength")?;
        let macro_tok = self.expect(TokenKind::Command, "a length macro name")?;
        self.expect(TokenKind::RBrace, "`}` after the length macro")?;
        let target = match macro_tok.lexeme.as_str() {
            "\\feynhanddotsize" => "dotsize".to_string(),
            "\\feynhandblobsize" => "blobsize".to_string(),
            "\\feynhandlinesize" => "linesize".to_string(),
            "\\feynhandarrowsize" => "arrowsize".to_string(),
            "\\feynhandtopsep" => "topsep".to_string(),
            other => other.to_string(),
        };
        self.expect(TokenKind::LBrace, "`{` before the length value")?;
        let num = self.expect(TokenKind::Number, "a length value")?;
        let value = self.number_with_optional_unit(&num)?;
        self.expect(TokenKind::RBrace, "`}` after the length value")?;
        self.eat_semicolon_optional();
        Ok(StmtKind::SetLength { target, value })
    }

    fn parse_topcolor(&mut self, skip_first_group: bool) -> Result<StmtKind, ParseError> {
        if skip_first_group {
            self.slurp_brace_group()?;
        }
        let span = self.here();
        let text = self.slurp_brace_group()?;
        let color = parse_color_expr(&text).map_err(|e| self.err_at(e.kind, span))?;
        self.eat_semicolon_optional();
        Ok(StmtKind::SetTopColor(color))
    }

    fn parse_pgfqkeys(&mut self) -> Result<Vec<StmtKind>, ParseError> {
        let path_span = self.here();
        let path = self.slurp_brace_group()?;
        if path.trim() != "/tikzfeynhand" {
            return Err(self.err_at(
                ParseErrorKind::Unexpected {
                    expected: "the `/tikzfeynhand` key path".into(),
                    found: format!("`{}`", path.trim()),
                },
                path_span,
            ));
        }
        self.expect(TokenKind::LBrace, "`{` before the key list")?;
        let entries = self.parse_entries(Some(TokenKind::RBrace))?;
        self.expect(TokenKind::RBrace, "`}` after the key list")?;
        self.eat_semicolon_optional();

        let mut stmts = Vec::new();
        for entry in entries.entries {
            let style = entry.key.strip_prefix("every ").ok_or_else(|| {
                self.err_at(
                    ParseErrorKind::Unexpected {
                        expected: "an `every STYLE={/tikz/color=COLOR}` entry".into(),
                        found: format!("`{}`", entry.key),
                    },
                    entry.span,
                )
            })?;
            let color = self.every_style_color(&entry)?;
            stmts.push(StmtKind::EveryStyle {
                style: style.to_string(),
                color,
            });
        }
        Ok(stmts)
    }

    /// Only the `/tikz/color=...` sub-key is supported inside `every STYLE`.
    fn every_style_color(&self, entry: &OptionEntry) -> Result<ColorExpr, ParseError> {
        let bad = |found: String| {
            self.err_at(
                ParseErrorKind::Unexpected {
                    expected: "`{/tikz/color=COLOR}`".into(),
                    found,
                },
                entry.span,
            )
        };
        let OptionValue::Braced { suboptions, label } = &entry.value else {
            return Err(bad("a non-braced value".into()));
        };
        if !suboptions.is_empty() {
            return Err(bad("bracketed sub-options".into()));
        }
        let inner = parse_options(label).map_err(|e| self.err_at(e.kind, entry.span))?;
        if inner.len() != 1 || inner.entries[0].key != "/tikz/color" {
            return Err(bad(format!("`{label}`")));
        }
        match &inner.entries[0].value {
            OptionValue::Color(c) => Ok(c.clone()),
            OptionValue::Text(t) => {
                parse_color_expr(t).map_err(|e| self.err_at(e.kind, entry.span))
            }
            _ => Err(bad(format!("`{label}`"))),
        }
    }

    fn parse_set_next_filename(&mut self) -> Result<StmtKind, ParseError> {
        let span = self.here();
        let name = self.slurp_brace_group()?;
        let name = name.trim().to_string();
        if name.is_empty() {
            return Err(self.err_at(
                ParseErrorKind::Unexpected {
                    expected: "an output file name".into(),
                    found: "empty braces".into(),
                },
                span,
            ));
        }
        self.eat_semicolon_optional();
        Ok(StmtKind::SetNextFilename(name))
    }

    fn parse_env_marker(&mut self, begin: bool) -> Result<StmtKind, ParseError> {
        self.expect(TokenKind::LBrace, "`{` after \\begin or \\end")?;
        let env_tok = self.expect(TokenKind::Name, "an environment name")?;
        self.expect(TokenKind::RBrace, "`}` after the environment name")?;
        if env_tok.lexeme != "feynhand" && env_tok.lexeme != "tikzpicture" {
            return Err(self.err_at(
                ParseErrorKind::UnknownEnvironment(env_tok.lexeme.clone()),
                Self::span_of(&env_tok),
            ));
        }
        let opts = if begin && self.peek_kind() == Some(TokenKind::LBracket) {
            self.parse_bracket()?
        } else {
            OptionList::default()
        };
        Ok(StmtKind::EnvMarker {
            kind: if begin {
                EnvMarkerKind::Begin
            } else {
                EnvMarkerKind::End
            },
            env: env_tok.lexeme,
            opts,
        })
    }

    // ---- options ---------------------------------------------------------

    fn parse_bracket(&mut self) -> Result<OptionList, ParseError> {
        self.expect(TokenKind::LBracket, "`[`")?;
        let opts = self.parse_entries(Some(TokenKind::RBracket))?;
        self.expect(TokenKind::RBracket, "`]` closing the option list")?;
        Ok(opts)
    }

    fn parse_entries(&mut self, terminator: Option<TokenKind>) -> Result<OptionList, ParseError> {
        let mut entries = Vec::new();
        loop {
            match (terminator, self.peek()) {
                (Some(k), Some(t)) if t.kind == k => break,
                (Some(_), None) => return Err(self.err_here(ParseErrorKind::NestedBracketMismatch)),
                (None, None) => break,
                _ => {}
            }
            entries.push(self.parse_entry(terminator)?);
            if self.peek_kind() == Some(TokenKind::Comma) {
                self.advance();
            }
        }
        Ok(OptionList { entries })
    }

    fn parse_entry(&mut self, terminator: Option<TokenKind>) -> Result<OptionEntry, ParseError> {
        let first = match self.peek() {
            Some(t) => t.clone(),
            None => return Err(self.err_here(ParseErrorKind::EmptyKey)),
        };
        if first.kind == TokenKind::Comma {
            return Err(self.err_here(ParseErrorKind::EmptyKey));
        }
        if first.kind != TokenKind::Name {
            if first.kind == TokenKind::Equals {
                return Err(self.err_here(ParseErrorKind::EmptyKey));
            }
            return Err(self.err_here(ParseErrorKind::Unexpected {
                expected: "an option key".into(),
                found: self.found_desc(),
            }));
        }
        let span = Self::span_of(&first);

        // A single name directly followed by `!` is a color flag like
        // `green!50!black`; keep the raw expression text as the key.
        if self.peek_kind_at(1) == Some(TokenKind::Bang) {
            let start = self.pos;
            self.advance(); // name
            while self.peek_kind() == Some(TokenKind::Bang) {
                self.advance();
                let num = self.expect(TokenKind::Number, "a mix percentage")?;
                let pct: f64 = num.lexeme.parse().map_err(|_| {
                    self.err_at(ParseErrorKind::BadPercentage(f64::NAN), Self::span_of(&num))
                })?;
                if !(0.0..=100.0).contains(&pct) {
                    return Err(
                        self.err_at(ParseErrorKind::BadPercentage(pct), Self::span_of(&num))
                    );
                }
                if self.peek_kind() == Some(TokenKind::Bang)
                    && self.peek_kind_at(1) == Some(TokenKind::Name)
                {
                    self.advance();
                    self.advance();
                } else {
                    break;
                }
            }
            let raw = self.src[self.tokens[start].offset..self.tokens[self.pos - 1].end_offset()]
                .to_string();
            return Ok(OptionEntry {
                key: raw,
                value: OptionValue::Flag,
                span,
            });
        }

        let mut parts = Vec::new();
        while self.peek_kind() == Some(TokenKind::Name) {
            parts.push(self.advance().unwrap().lexeme.clone());
        }
        let mut key = parts.join(" ");
        if self.peek_kind() == Some(TokenKind::Prime) {
            self.advance();
            key.push('\'');
        }

        let value = if self.peek_kind() == Some(TokenKind::Equals) {
            self.advance();
            self.parse_value(terminator)?
        } else {
            match (terminator, self.peek_kind()) {
                (_, Some(TokenKind::Comma)) | (_, None) => OptionValue::Flag,
                (Some(k), Some(pk)) if pk == k => OptionValue::Flag,
                _ => {
                    return Err(self.err_here(ParseErrorKind::Unexpected {
                        expected: "`,`, `=` or the end of the option list".into(),
                        found: self.found_desc(),
                    }))
                }
            }
        };
        Ok(OptionEntry { key, value, span })
    }

    fn parse_value(&mut self, terminator: Option<TokenKind>) -> Result<OptionValue, ParseError> {
        let start = self.pos;
        let mut depth = 0i32;
        loop {
            let Some(tok) = self.peek() else {
                if terminator.is_some() {
                    return Err(self.err_here(ParseErrorKind::NestedBracketMismatch));
                }
                break;
            };
            match tok.kind {
                TokenKind::LBracket | TokenKind::LBrace | TokenKind::LParen => depth += 1,
                TokenKind::RBracket | TokenKind::RBrace | TokenKind::RParen => {
                    if depth == 0 {
                        if Some(tok.kind) == terminator {
                            break;
                        }
                        return Err(self.err_here(ParseErrorKind::NestedBracketMismatch));
                    }
                    depth -= 1;
                }
                TokenKind::Comma if depth == 0 => break,
                _ => {}
            }
            self.advance();
        }
        let range = start..self.pos;
        if range.is_empty() {
            return Err(self.err_here(ParseErrorKind::Unexpected {
                expected: "an option value".into(),
                found: self.found_desc(),
            }));
        }
        self.classify_value(range)
    }

    fn classify_value(&self, range: std::ops::Range<usize>) -> Result<OptionValue, ParseError> {
        let toks = &self.tokens[range.clone()];
        match toks {
            [t] if t.kind == TokenKind::Number => {
                let v: f64 = t.lexeme.parse().map_err(|_| {
                    self.err_at(
                        ParseErrorKind::Unexpected {
                            expected: "a number".into(),
                            found: format!("`{}`", t.lexeme),
                        },
                        Self::span_of(t),
                    )
                })?;
                return Ok(OptionValue::Fraction(v));
            }
            [n, u] if n.kind == TokenKind::Number && u.kind == TokenKind::Unit => {
                let v: f64 = n.lexeme.parse().unwrap_or(0.0);
                let unit = UnitKind::from_suffix(&u.lexeme).expect("lexer emits valid units");
                return Ok(OptionValue::Scalar(Length::from_unit(v, unit)));
            }
            _ => {}
        }
        if toks[0].kind == TokenKind::LBrace
            && toks.last().unwrap().kind == TokenKind::RBrace
            && Self::is_single_group(toks)
        {
            return self.classify_braced(range);
        }
        if toks[0].kind == TokenKind::Name && toks.iter().any(|t| t.kind == TokenKind::Bang) {
            let mut sub = Parser {
                src: self.src,
                tokens: toks,
                pos: 0,
            };
            let expr = sub.parse_color_tokens()?;
            if sub.at_end() {
                return Ok(OptionValue::Color(expr));
            }
        }
        let raw = &self.src[toks[0].offset..toks.last().unwrap().end_offset()];
        Ok(OptionValue::Text(raw.trim().to_string()))
    }

    /// True when the leading `{` of the slice matches its final `}`.
    fn is_single_group(toks: &[Token]) -> bool {
        let mut depth = 0i32;
        for (i, t) in toks.iter().enumerate() {
            match t.kind {
                TokenKind::LBrace => depth += 1,
                TokenKind::RBrace => {
                    depth -= 1;
                    if depth == 0 {
                        return i == toks.len() - 1;
                    }
                }
                _ => {}
            }
        }
        false
    }

    fn classify_braced(&self, range: std::ops::Range<usize>) -> Result<OptionValue, ParseError> {
        let toks = &self.tokens[range];
        let open = &toks[0];
        let close = toks.last().unwrap();
        let inner = &toks[1..toks.len() - 1];

        if let Some(first) = inner.first() {
            if first.kind == TokenKind::LBracket {
                // `{[suboptions] label}`
                let mut depth = 0i32;
                let mut close_idx = None;
                for (i, t) in inner.iter().enumerate() {
                    match t.kind {
                        TokenKind::LBracket => depth += 1,
                        TokenKind::RBracket => {
                            depth -= 1;
                            if depth == 0 {
                                close_idx = Some(i);
                                break;
                            }
                        }
                        _ => {}
                    }
                }
                let close_idx = close_idx.ok_or_else(|| {
                    self.err_at(ParseErrorKind::NestedBracketMismatch, Self::span_of(first))
                })?;
                let mut sub = Parser {
                    src: self.src,
                    tokens: &inner[1..close_idx],
                    pos: 0,
                };
                let suboptions = sub.parse_entries(None)?;
                let label = self.src[inner[close_idx].end_offset()..close.offset]
                    .trim()
                    .to_string();
                return Ok(OptionValue::Braced { suboptions, label });
            }
        }
        let label = self.src[open.end_offset()..close.offset].trim().to_string();
        Ok(OptionValue::Braced {
            suboptions: OptionList::default(),
            label,
        })
    }

    fn parse_color_tokens(&mut self) -> Result<ColorExpr, ParseError> {
        let name = match self.peek() {
            Some(t) if t.kind == TokenKind::Name => self.advance().unwrap().clone(),
            _ => return Err(self.err_here(ParseErrorKind::EmptyColorName)),
        };
        let mut expr = ColorExpr::Named(name.lexeme);
        while self.peek_kind() == Some(TokenKind::Bang) {
            self.advance();
            let num = self.expect(TokenKind::Number, "a mix percentage")?;
            let pct: f64 = num.lexeme.parse().map_err(|_| {
                self.err_at(ParseErrorKind::BadPercentage(f64::NAN), Self::span_of(&num))
            })?;
            if !(0.0..=100.0).contains(&pct) {
                return Err(self.err_at(ParseErrorKind::BadPercentage(pct), Self::span_of(&num)));
            }
            // `!pct!name` names the right operand; a bare `!pct` mixes
            // toward white.
            let right = if self.peek_kind() == Some(TokenKind::Bang)
                && self.peek_kind_at(1) == Some(TokenKind::Name)
            {
                self.advance();
                let n = self.advance().unwrap().clone();
                ColorExpr::Named(n.lexeme)
            } else {
                ColorExpr::Named("white".to_string())
            };
            expr = ColorExpr::Mix {
                left: Box::new(expr),
                pct,
                right: Box::new(right),
            };
        }
        Ok(expr)
    }

    // ---- shared pieces -----------------------------------------------------

    /// Coordinate component: a number with an optional unit, bare means cm.
    fn parse_coord_component(&mut self) -> Result<f64, ParseError> {
        let num = self.expect(TokenKind::Number, "a coordinate value")?;
        Ok(self.number_with_optional_unit(&num)?.as_cm())
    }

    fn number_with_optional_unit(&mut self, num: &Token) -> Result<Length, ParseError> {
        let v: f64 = num.lexeme.parse().map_err(|_| {
            self.err_at(
                ParseErrorKind::Unexpected {
                    expected: "a number".into(),
                    found: format!("`{}`", num.lexeme),
                },
                Self::span_of(num),
            )
        })?;
        if self.peek_kind() == Some(TokenKind::Unit) {
            let u = self.advance().unwrap();
            let unit = UnitKind::from_suffix(&u.lexeme).expect("lexer emits valid units");
            Ok(Length::from_unit(v, unit))
        } else {
            Ok(Length::cm(v))
        }
    }

    /// Consumes a balanced `{...}` group and returns the raw inner text,
    /// trimmed of surrounding whitespace.
    fn slurp_brace_group(&mut self) -> Result<String, ParseError> {
        let open = self.expect(TokenKind::LBrace, "`{`")?;
        let mut depth = 1i32;
        let mut close = None;
        while let Some(tok) = self.advance() {
            match tok.kind {
                TokenKind::LBrace => depth += 1,
                TokenKind::RBrace => {
                    depth -= 1;
                    if depth == 0 {
                        close = Some(tok.clone());
                        break;
                    }
                }
                _ => {}
            }
        }
        let close = close.ok_or_else(|| {
            self.err_at(ParseErrorKind::NestedBracketMismatch, Self::span_of(&open))
        })?;
        Ok(self.src[open.end_offset()..close.offset].trim().to_string())
    }

    /// Builds a relative coordinate from a placement entry such as
    /// `above right = 0.5cm and 2cm of a1`.
    fn placement_coord(&self, entry: &OptionEntry) -> Result<Coord, ParseError> {
        let (vertical, horizontal) = match entry.key.as_str() {
            "above" => (Some(VDir::Above), None),
            "below" => (Some(VDir::Below), None),
            "left" => (None, Some(HDir::Left)),
            "right" => (None, Some(HDir::Right)),
            "above left" => (Some(VDir::Above), Some(HDir::Left)),
            "above right" => (Some(VDir::Above), Some(HDir::Right)),
            "below left" => (Some(VDir::Below), Some(HDir::Left)),
            "below right" => (Some(VDir::Below), Some(HDir::Right)),
            _ => unreachable!("caller filters placement keys"),
        };
        let text = match &entry.value {
            OptionValue::Text(t) => t.clone(),
            _ => {
                return Err(self.err_at(
                    ParseErrorKind::Unexpected {
                        expected: "`[DISTANCE [and DISTANCE]] of VERTEX`".into(),
                        found: format!("a `{}` value without `of`", entry.key),
                    },
                    entry.span,
                ))
            }
        };
        let toks =
            tokenize(&text).map_err(|e| self.err_at(ParseErrorKind::Lex(e.kind), entry.span))?;
        let mut sub = Parser {
            src: &text,
            tokens: &toks,
            pos: 0,
        };
        let bad = |found: &str| {
            self.err_at(
                ParseErrorKind::Unexpected {
                    expected: "`[DISTANCE [and DISTANCE]] of VERTEX`".into(),
                    found: format!("`{found}`"),
                },
                entry.span,
            )
        };

        let mut d1 = None;
        let mut d2 = None;
        if sub.peek_kind() == Some(TokenKind::Number) {
            let num = sub.advance().unwrap().clone();
            d1 = Some(
                sub.number_with_optional_unit(&num)
                    .map_err(|_| bad(&text))?,
            );
            if matches!(sub.peek(), Some(t) if t.kind == TokenKind::Name && t.lexeme == "and") {
                sub.advance();
                let num = sub
                    .advance()
                    .filter(|t| t.kind == TokenKind::Number)
                    .cloned();
                let num = num.ok_or_else(|| bad(&text))?;
                d2 = Some(
                    sub.number_with_optional_unit(&num)
                        .map_err(|_| bad(&text))?,
                );
            }
        }
        match sub.peek() {
            Some(t) if t.kind == TokenKind::Name && t.lexeme == "of" => {
                sub.advance();
            }
            _ => return Err(bad(&text)),
        }
        let anchor_tok = match sub.advance() {
            Some(t) if t.kind == TokenKind::Name => t.clone(),
            _ => return Err(bad(&text)),
        };
        if !sub.at_end() {
            return Err(bad(&text));
        }

        let (vdist, hdist) = match (vertical.is_some(), horizontal.is_some(), d1, d2) {
            (_, _, None, _) => (None, None),
            (true, true, Some(a), Some(b)) => (Some(a), Some(b)),
            (true, true, Some(a), None) => (Some(a), Some(a)),
            (true, false, Some(a), None) => (Some(a), None),
            (false, true, Some(a), None) => (None, Some(a)),
            _ => return Err(bad(&text)),
        };
        Ok(Coord::Relative {
            vertical,
            horizontal,
            vdist,
            hdist,
            anchor: VertexRef {
                name: anchor_tok.lexeme,
                span: entry.span,
            },
        })
    }
}
