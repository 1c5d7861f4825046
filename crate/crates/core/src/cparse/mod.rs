//! C front end: tokenizer and parser for the supported subset.

mod lexer;
mod parser;

pub use lexer::{tokenize, tokenize_file, Token, TokenKind, KEYWORDS};
pub use parser::parse;

use crate::ast::AstNode;
use crate::error::FrontendError;

/// Tokenizes and parses a whole translation unit.
pub fn parse_source(source: &str, file: &str) -> Result<AstNode, FrontendError> {
    let tokens = tokenize_file(source, file)?;
    Ok(parse(&tokens)?)
}
