//! DSL front end: tokenizer, AST and parser.

pub mod ast;
pub mod parser;
pub mod token;

pub use ast::{
    ColorExpr, Coord, EnvMarkerKind, GraphDecl, HDir, OptionEntry, OptionList, OptionValue,
    PropagDecl, Span, Stmt, StmtKind, VDir, VertexDecl, VertexRef,
};
pub use parser::{parse, parse_color_expr, parse_options, ParseError, ParseErrorKind};
pub use token::{tokenize, LexError, LexErrorKind, Token, TokenKind};
