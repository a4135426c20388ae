//! Tokenizer for the diagram DSL.
//!
//! The token stream is lossless: concatenating lexemes together with the
//! skipped whitespace and comments reconstructs the source exactly, which is
//! what lets the parser slice label text and statement spans straight out of
//! the input.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Command,
    Name,
    Number,
    Unit,
    LBracket,
    RBracket,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semicolon,
    Equals,
    DashDash,
    Text,
    Dollar,
    Bang,
    Prime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub line: u32,
    pub col: u32,
    /// Byte offset of the first character in the source.
    pub offset: usize,
}

impl Token {
    pub fn end_offset(&self) -> usize {
        self.offset + self.lexeme.len()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LexErrorKind {
    #[error("unterminated brace group")]
    UnterminatedBrace,
    #[error("unterminated math segment (unbalanced `$`)")]
    UnterminatedMath,
    #[error("illegal character `{0}`")]
    IllegalCharacter(char),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexError {
    pub kind: LexErrorKind,
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for LexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.kind)
    }
}

impl std::error::Error for LexError {}

/// Splits source text into tokens. `%` starts a line comment outside brace
/// groups; inside braces it is kept as literal text.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    Lexer::new(source).run()
}

struct Lexer<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    i: usize,
    line: u32,
    col: u32,
    tokens: Vec<Token>,
    open_braces: Vec<(u32, u32)>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            chars: src.char_indices().collect(),
            i: 0,
            line: 1,
            col: 1,
            tokens: Vec::new(),
            open_braces: Vec::new(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).map(|&(_, c)| c)
    }

    fn peek_at(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.i + ahead).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars
            .get(self.i)
            .map(|&(o, _)| o)
            .unwrap_or(self.src.len())
    }

    fn bump(&mut self) -> Option<char> {
        let &(_, c) = self.chars.get(self.i)?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, kind: LexErrorKind, line: u32, col: u32) -> LexError {
        LexError { kind, line, col }
    }

    fn push(&mut self, kind: TokenKind, start: usize, end: usize, line: u32, col: u32) {
        self.tokens.push(Token {
            kind,
            lexeme: self.src[start..end].to_string(),
            line,
            col,
            offset: start,
        });
    }

    fn run(mut self) -> Result<Vec<Token>, LexError> {
        while let Some(c) = self.peek() {
            let (line, col) = (self.line, self.col);
            let start = self.offset();
            match c {
                c if c.is_whitespace() => {
                    self.bump();
                }
                '%' if self.open_braces.is_empty() => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                '%' => {
                    // Literal percent inside a brace group (label text).
                    self.bump();
                    self.push(TokenKind::Text, start, self.offset(), line, col);
                }
                '\\' => {
                    self.bump();
                    let mut letters = 0;
                    while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
                        self.bump();
                        letters += 1;
                    }
                    if letters == 0 {
                        return Err(self.err(LexErrorKind::IllegalCharacter('\\'), line, col));
                    }
                    self.push(TokenKind::Command, start, self.offset(), line, col);
                }
                '{' => {
                    self.bump();
                    self.open_braces.push((line, col));
                    self.push(TokenKind::LBrace, start, self.offset(), line, col);
                }
                '}' => {
                    self.bump();
                    self.open_braces.pop();
                    self.push(TokenKind::RBrace, start, self.offset(), line, col);
                }
                '[' => self.single(TokenKind::LBracket, start, line, col),
                ']' => self.single(TokenKind::RBracket, start, line, col),
                '(' => self.single(TokenKind::LParen, start, line, col),
                ')' => self.single(TokenKind::RParen, start, line, col),
                ',' => self.single(TokenKind::Comma, start, line, col),
                ';' => self.single(TokenKind::Semicolon, start, line, col),
                '=' => self.single(TokenKind::Equals, start, line, col),
                '!' => self.single(TokenKind::Bang, start, line, col),
                '\'' => self.single(TokenKind::Prime, start, line, col),
                '$' => {
                    self.bump();
                    self.push(TokenKind::Dollar, start, self.offset(), line, col);
                    self.lex_math_body(line, col)?;
                }
                '-' => {
                    if self.peek_at(1) == Some('-') {
                        self.bump();
                        self.bump();
                        self.push(TokenKind::DashDash, start, self.offset(), line, col);
                    } else if self.starts_number(1) {
                        self.lex_number(start, line, col);
                    } else {
                        return Err(self.err(LexErrorKind::IllegalCharacter('-'), line, col));
                    }
                }
                '+' => {
                    if self.starts_number(1) {
                        self.lex_number(start, line, col);
                    } else {
                        return Err(self.err(LexErrorKind::IllegalCharacter('+'), line, col));
                    }
                }
                c if c.is_ascii_digit() => self.lex_number(start, line, col),
                '.' if matches!(self.peek_at(1), Some(d) if d.is_ascii_digit()) => {
                    self.lex_number(start, line, col)
                }
                c if c.is_ascii_alphabetic() || c == '/' => {
                    self.bump();
                    while matches!(self.peek(), Some(c)
                        if c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '/'))
                    {
                        self.bump();
                    }
                    self.push(TokenKind::Name, start, self.offset(), line, col);
                }
                other => {
                    // Inside a brace group this is free label text.
                    if self.open_braces.is_empty() {
                        return Err(self.err(LexErrorKind::IllegalCharacter(other), line, col));
                    }
                    self.bump();
                    self.push(TokenKind::Text, start, self.offset(), line, col);
                }
            }
        }
        if let Some(&(line, col)) = self.open_braces.last() {
            return Err(self.err(LexErrorKind::UnterminatedBrace, line, col));
        }
        Ok(self.tokens)
    }

    fn single(&mut self, kind: TokenKind, start: usize, line: u32, col: u32) {
        self.bump();
        self.push(kind, start, self.offset(), line, col);
    }

    fn starts_number(&self, ahead: usize) -> bool {
        match self.peek_at(ahead) {
            Some(d) if d.is_ascii_digit() => true,
            Some('.') => matches!(self.peek_at(ahead + 1), Some(d) if d.is_ascii_digit()),
            _ => false,
        }
    }

    fn lex_number(&mut self, start: usize, line: u32, col: u32) {
        if matches!(self.peek(), Some('-') | Some('+')) {
            self.bump();
        }
        while matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
            self.bump();
        }
        if self.peek() == Some('.') {
            self.bump();
            while matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                self.bump();
            }
        }
        self.push(TokenKind::Number, start, self.offset(), line, col);
        self.maybe_unit();
    }

    /// Emit a unit token when a number is directly followed by `cm`, `mm` or
    /// `pt` that is not part of a longer name.
    fn maybe_unit(&mut self) {
        let (a, b) = (self.peek(), self.peek_at(1));
        let is_unit = matches!(
            (a, b),
            (Some('c'), Some('m')) | (Some('m'), Some('m')) | (Some('p'), Some('t'))
        );
        if !is_unit {
            return;
        }
        if matches!(self.peek_at(2), Some(c) if c.is_ascii_alphanumeric() || matches!(c, '_' | '.'))
        {
            return;
        }
        let (line, col) = (self.line, self.col);
        let start = self.offset();
        self.bump();
        self.bump();
        self.push(TokenKind::Unit, start, self.offset(), line, col);
    }

    fn lex_math_body(&mut self, open_line: u32, open_col: u32) -> Result<(), LexError> {
        let (line, col) = (self.line, self.col);
        let start = self.offset();
        loop {
            match self.peek() {
                Some('$') => break,
                Some(_) => {
                    self.bump();
                }
                None => {
                    return Err(self.err(LexErrorKind::UnterminatedMath, open_line, open_col));
                }
            }
        }
        let end = self.offset();
        if end > start {
            self.push(TokenKind::Text, start, end, line, col);
        }
        let (dline, dcol) = (self.line, self.col);
        let dstart = self.offset();
        self.bump();
        self.push(TokenKind::Dollar, dstart, self.offset(), dline, dcol);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Every token must be an exact slice of the source and the gaps between
    /// tokens may contain only whitespace and comments.
    pub(crate) fn assert_lossless(src: &str, tokens: &[Token]) {
        let mut pos = 0usize;
        for tok in tokens {
            assert_eq!(
                &src[tok.offset..tok.end_offset()],
                tok.lexeme,
                "lexeme is not a source slice"
            );
            assert_gap_is_blank(&src[pos..tok.offset]);
            pos = tok.end_offset();
        }
        assert_gap_is_blank(&src[pos..]);
    }

    fn assert_gap_is_blank(gap: &str) {
        for line in gap.split_inclusive('\n') {
            let before_comment = line.split('%').next().unwrap_or("");
            assert!(
                before_comment.trim().is_empty(),
                "unexpected gap content {gap:?}"
            );
        }
    }

    fn kinds(tokens: &[Token]) -> Vec<TokenKind> {
        tokens.iter().map(|t| t.kind).collect()
    }

    #[test]
    fn minimal_propagator_statement() {
        let src = r"\propag[fer] (a) to (b);";
        let toks = tokenize(src).unwrap();
        use TokenKind::*;
        assert_eq!(
            kinds(&toks),
            vec![
                Command, LBracket, Name, RBracket, LParen, Name, RParen, Name, LParen, Name,
                RParen, Semicolon
            ]
        );
        assert_eq!(toks[0].lexeme, r"\propag");
        assert_eq!(toks[7].lexeme, "to");
        assert_lossless(src, &toks);
    }

    #[test]
    fn empty_source() {
        assert_eq!(tokenize("").unwrap(), vec![]);
    }

    #[test]
    fn signed_numbers_in_coordinates() {
        let src = r"\vertex (v) at (1.5,-0.5);";
        let toks = tokenize(src).unwrap();
        let numbers: Vec<&str> = toks
            .iter()
            .filter(|t| t.kind == TokenKind::Number)
            .map(|t| t.lexeme.as_str())
            .collect();
        assert_eq!(numbers, vec!["1.5", "-0.5"]);
        assert_lossless(src, &toks);
    }

    #[test]
    fn unit_suffix_only_after_numbers() {
        let toks = tokenize("2mm").unwrap();
        assert_eq!(kinds(&toks), vec![TokenKind::Number, TokenKind::Unit]);
        let toks = tokenize("(cm)").unwrap();
        assert_eq!(
            kinds(&toks),
            vec![TokenKind::LParen, TokenKind::Name, TokenKind::RParen]
        );
    }

    #[test]
    fn math_segment_round_trips() {
        let src = r"{e$^-$}";
        let toks = tokenize(src).unwrap();
        use TokenKind::*;
        assert_eq!(
            kinds(&toks),
            vec![LBrace, Name, Dollar, Text, Dollar, RBrace]
        );
        assert_eq!(toks[3].lexeme, "^-");
        assert_lossless(src, &toks);
    }

    #[test]
    fn comments_skipped_outside_braces() {
        let src = "\\propag (a) to (b); % trailing note\n";
        let toks = tokenize(src).unwrap();
        assert_eq!(toks.last().unwrap().kind, TokenKind::Semicolon);
        // Inside a brace group a percent sign is literal text.
        let toks = tokenize("{50%}").unwrap();
        assert!(toks
            .iter()
            .any(|t| t.kind == TokenKind::Text && t.lexeme == "%"));
    }

    #[test]
    fn error_positions() {
        let err = tokenize("ab {cd").unwrap_err();
        assert_eq!(err.kind, LexErrorKind::UnterminatedBrace);
        assert_eq!((err.line, err.col), (1, 4));

        let err = tokenize("$k").unwrap_err();
        assert_eq!(err.kind, LexErrorKind::UnterminatedMath);

        let err = tokenize("a ^ b").unwrap_err();
        assert_eq!(err.kind, LexErrorKind::IllegalCharacter('^'));
        assert_eq!((err.line, err.col), (1, 3));
    }

    #[test]
    fn free_text_allowed_inside_braces() {
        let src = "{W\u{2212} boson & x^2}";
        let toks = tokenize(src).unwrap();
        assert_lossless(src, &toks);
        // Outside braces the same characters are illegal.
        assert!(tokenize("x & y").is_err());
    }

    #[test]
    fn dashdash_vs_negative_number() {
        let toks = tokenize("(a)--(b)").unwrap();
        assert!(toks.iter().any(|t| t.kind == TokenKind::DashDash));
        let toks = tokenize("-3").unwrap();
        assert_eq!(toks[0].kind, TokenKind::Number);
        assert_eq!(toks[0].lexeme, "-3");
    }
}
