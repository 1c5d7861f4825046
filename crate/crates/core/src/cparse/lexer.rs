use std::fmt;

use crate::ast::Coord;
use crate::error::LexError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Keyword,
    Identifier,
    IntConst,
    FloatConst,
    CharConst,
    StringLiteral,
    Operator,
    Punctuation,
    /// A whole preprocessor line, kept verbatim.
    Directive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub coord: Coord,
}

impl Token {
    pub fn is(&self, kind: TokenKind, lexeme: &str) -> bool {
        self.kind == kind && self.lexeme == lexeme
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "'{}'", self.lexeme)
    }
}

pub const KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else",
    "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long", "register",
    "restrict", "return", "short", "signed", "sizeof", "static", "struct", "switch", "typedef",
    "union", "unsigned", "void", "volatile", "while", "_Bool",
];

const OPERATORS: &[&str] = &[
    "<<=", ">>=", "...", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>",
    "<=", ">=", "==", "!=", "&&", "||", "->", "+", "-", "*", "/", "%", "<", ">", "=", "!", "&",
    "|", "^", "~", "?", ":", ".",
];

const PUNCTUATION: &[char] = &['(', ')', '{', '}', '[', ']', ';', ','];

pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    tokenize_file(source, "<input>")
}

/// Tokenizes `source`, attributing coords to `file`.
pub fn tokenize_file(source: &str, file: &str) -> Result<Vec<Token>, LexError> {
    Lexer::new(source, file).run()
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    column: u32,
    file: &'a str,
    at_line_start: bool,
}

impl<'a> Lexer<'a> {
    fn new(source: &str, file: &'a str) -> Self {
        Lexer {
            chars: source.chars().collect(),
            pos: 0,
            line: 1,
            column: 1,
            file,
            at_line_start: true,
        }
    }

    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
            self.at_line_start = true;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn coord(&self) -> Coord {
        Coord::new(self.file, self.line, self.column)
    }

    fn error(&self, coord: Coord, message: impl Into<String>) -> LexError {
        LexError {
            coord,
            message: message.into(),
        }
    }

    fn run(mut self) -> Result<Vec<Token>, LexError> {
        let mut tokens = Vec::new();
        while let Some(c) = self.peek(0) {
            if c.is_whitespace() {
                self.bump();
                continue;
            }
            if c == '/' && self.peek(1) == Some('/') {
                while let Some(c) = self.peek(0) {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
                continue;
            }
            if c == '/' && self.peek(1) == Some('*') {
                let start = self.coord();
                self.bump();
                self.bump();
                loop {
                    match self.peek(0) {
                        None => return Err(self.error(start, "unterminated comment")),
                        Some('*') if self.peek(1) == Some('/') => {
                            self.bump();
                            self.bump();
                            break;
                        }
                        Some(_) => {
                            self.bump();
                        }
                    }
                }
                continue;
            }

            let coord = self.coord();
            if c == '#' && self.at_line_start {
                tokens.push(self.directive(coord));
                continue;
            }
            self.at_line_start = false;

            let token = if c.is_ascii_alphabetic() || c == '_' {
                self.word(coord)
            } else if c.is_ascii_digit() || (c == '.' && self.peek(1).is_some_and(|d| d.is_ascii_digit())) {
                self.number(coord)?
            } else if c == '\'' {
                self.quoted(coord, '\'', TokenKind::CharConst)?
            } else if c == '"' {
                self.quoted(coord, '"', TokenKind::StringLiteral)?
            } else if PUNCTUATION.contains(&c) {
                self.bump();
                Token {
                    kind: TokenKind::Punctuation,
                    lexeme: c.to_string(),
                    coord,
                }
            } else if let Some(op) = self.operator() {
                for _ in 0..op.len() {
                    self.bump();
                }
                Token {
                    kind: TokenKind::Operator,
                    lexeme: op.to_string(),
                    coord,
                }
            } else {
                return Err(self.error(coord, format!("unrecognized character {c:?}")));
            };
            tokens.push(token);
        }
        Ok(tokens)
    }

    fn directive(&mut self, coord: Coord) -> Token {
        let mut text = String::new();
        while let Some(c) = self.peek(0) {
            if c == '\n' {
                break;
            }
            if c == '\\' && self.peek(1) == Some('\n') {
                text.push(c);
                self.bump();
                text.push('\n');
                self.bump();
                continue;
            }
            text.push(c);
            self.bump();
        }
        Token {
            kind: TokenKind::Directive,
            lexeme: text.trim_end().to_string(),
            coord,
        }
    }

    fn word(&mut self, coord: Coord) -> Token {
        let mut text = String::new();
        while let Some(c) = self.peek(0) {
            if c.is_ascii_alphanumeric() || c == '_' {
                text.push(c);
                self.bump();
            } else {
                break;
            }
        }
        let kind = if KEYWORDS.contains(&text.as_str()) {
            TokenKind::Keyword
        } else {
            TokenKind::Identifier
        };
        Token {
            kind,
            lexeme: text,
            coord,
        }
    }

    fn number(&mut self, coord: Coord) -> Result<Token, LexError> {
        let mut text = String::new();
        let mut is_float = false;
        if self.peek(0) == Some('0') && matches!(self.peek(1), Some('x' | 'X')) {
            text.push(self.bump().unwrap_or('0'));
            text.push(self.bump().unwrap_or('x'));
            while let Some(c) = self.peek(0).filter(|c| c.is_ascii_hexdigit()) {
                text.push(c);
                self.bump();
            }
            if text.len() == 2 {
                return Err(self.error(coord, "hexadecimal constant has no digits"));
            }
        } else {
            while let Some(c) = self.peek(0).filter(|c| c.is_ascii_digit()) {
                text.push(c);
                self.bump();
            }
            if self.peek(0) == Some('.') {
                is_float = true;
                text.push('.');
                self.bump();
                while let Some(c) = self.peek(0).filter(|c| c.is_ascii_digit()) {
                    text.push(c);
                    self.bump();
                }
            }
            if matches!(self.peek(0), Some('e' | 'E')) {
                let sign = matches!(self.peek(1), Some('+' | '-'));
                let digit_at = if sign { 2 } else { 1 };
                if self.peek(digit_at).is_some_and(|d| d.is_ascii_digit()) {
                    is_float = true;
                    for _ in 0..digit_at {
                        text.push(self.bump().unwrap_or('e'));
                    }
                    while let Some(c) = self.peek(0).filter(|c| c.is_ascii_digit()) {
                        text.push(c);
                        self.bump();
                    }
                }
            }
        }
        while let Some(c) = self.peek(0).filter(|c| matches!(c, 'u' | 'U' | 'l' | 'L' | 'f' | 'F')) {
            if matches!(c, 'f' | 'F') {
                is_float = true;
            }
            text.push(c);
            self.bump();
        }
        if self.peek(0).is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            let c = self.peek(0).unwrap_or('?');
            return Err(self.error(self.coord(), format!("invalid suffix {c:?} on constant")));
        }
        Ok(Token {
            kind: if is_float {
                TokenKind::FloatConst
            } else {
                TokenKind::IntConst
            },
            lexeme: text,
            coord,
        })
    }

    fn quoted(&mut self, coord: Coord, quote: char, kind: TokenKind) -> Result<Token, LexError> {
        let mut text = String::new();
        text.push(quote);
        self.bump();
        loop {
            match self.peek(0) {
                None | Some('\n') => {
                    return Err(self.error(coord, format!("missing terminating {quote} character")))
                }
                Some('\\') => {
                    text.push('\\');
                    self.bump();
                    match self.bump() {
                        Some(c) => text.push(c),
                        None => {
                            return Err(
                                self.error(coord, format!("missing terminating {quote} character"))
                            )
                        }
                    }
                }
                Some(c) if c == quote => {
                    text.push(c);
                    self.bump();
                    break;
                }
                Some(c) => {
                    text.push(c);
                    self.bump();
                }
            }
        }
        if kind == TokenKind::CharConst && text.len() <= 2 {
            return Err(self.error(coord, "empty character constant"));
        }
        Ok(Token {
            kind,
            lexeme: text,
            coord,
        })
    }

    fn operator(&self) -> Option<&'static str> {
        OPERATORS.iter().copied().find(|op| {
            op.chars()
                .enumerate()
                .all(|(i, c)| self.peek(i) == Some(c))
        })
    }
}
