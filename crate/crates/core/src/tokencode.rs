//! Integer encodings of AST nodes: non-terminal ordinals, banded 6-digit
//! terminal codes, their decimal concatenation, and the corpus vocabulary.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ast::{locate, AstNode, NodeKind};
use crate::error::CodeError;
use crate::scopes::is_callee;

/// Generalized terminal for every datatype lexeme.
pub const DATATYPE_CODE: u64 = 111_111;

/// Width of a terminal code in decimal digits.
pub const TERMINAL_WIDTH: u32 = 6;
const TERMINAL_SCALE: u64 = 10u64.pow(TERMINAL_WIDTH);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminalCategory {
    Identifier,
    Keyword,
    String,
    Datatype,
    IntLiteral,
    FloatLiteral,
}

/// Inclusive code range per category. Literals of every kind share a band.
pub fn band(category: TerminalCategory) -> (u64, u64) {
    match category {
        TerminalCategory::Datatype => (DATATYPE_CODE, DATATYPE_CODE),
        TerminalCategory::Identifier => (200_000, 499_999),
        TerminalCategory::Keyword => (500_000, 599_999),
        TerminalCategory::String | TerminalCategory::IntLiteral | TerminalCategory::FloatLiteral => {
            (600_000, 999_999)
        }
    }
}

fn band_key(category: TerminalCategory) -> u8 {
    match category {
        TerminalCategory::Datatype => 0,
        TerminalCategory::Identifier => 1,
        TerminalCategory::Keyword => 2,
        _ => 3,
    }
}

pub fn encode_nonterminal(kind: NodeKind) -> u64 {
    u64::from(kind.ordinal())
}

pub fn compose(nonterminal: u64, terminal: u64) -> u64 {
    nonterminal * TERMINAL_SCALE + terminal
}

/// Splits a composite code into (non-terminal, terminal).
pub fn decompose(code: u64) -> Result<(u64, u64), CodeError> {
    let terminal = code % TERMINAL_SCALE;
    let nonterminal = code / TERMINAL_SCALE;
    if terminal < 100_000 {
        return Err(CodeError::Decode(code));
    }
    if !(1..=NodeKind::ALL.len() as u64).contains(&nonterminal) {
        return Err(CodeError::Nonterminal(nonterminal));
    }
    Ok((nonterminal, terminal))
}

pub fn one_hot(index: usize, size: usize) -> Result<Vec<f64>, CodeError> {
    if index >= size {
        return Err(CodeError::Range { index, size });
    }
    let mut v = vec![0.0; size];
    v[index] = 1.0;
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerminalEntry {
    pub code: u64,
    pub lexeme: String,
    pub category: TerminalCategory,
}

/// First-come assignment of terminal codes within each band.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Codebook {
    assigned: BTreeMap<(TerminalCategory, String), u64>,
    next: BTreeMap<u8, u64>,
    entries: Vec<TerminalEntry>,
}

impl Codebook {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn encode_terminal(&mut self, lexeme: &str, category: TerminalCategory) -> Result<u64, CodeError> {
        if category == TerminalCategory::Datatype {
            return Ok(DATATYPE_CODE);
        }
        if let Some(&code) = self.assigned.get(&(category, lexeme.to_string())) {
            return Ok(code);
        }
        let (lo, hi) = band(category);
        let next = self.next.entry(band_key(category)).or_insert(lo);
        if *next > hi {
            return Err(CodeError::Capacity(format!("{category:?}")));
        }
        let code = *next;
        *next += 1;
        self.assigned.insert((category, lexeme.to_string()), code);
        self.entries.push(TerminalEntry {
            code,
            lexeme: lexeme.to_string(),
            category,
        });
        Ok(code)
    }

    pub fn lookup(&self, lexeme: &str, category: TerminalCategory) -> Option<u64> {
        if category == TerminalCategory::Datatype {
            return Some(DATATYPE_CODE);
        }
        self.assigned.get(&(category, lexeme.to_string())).copied()
    }

    pub fn entries(&self) -> &[TerminalEntry] {
        &self.entries
    }

    fn from_entries(entries: Vec<TerminalEntry>) -> Self {
        let mut book = Codebook::new();
        for e in entries {
            book.assigned.insert((e.category, e.lexeme.clone()), e.code);
            let next = book.next.entry(band_key(e.category)).or_insert(0);
            *next = (*next).max(e.code + 1);
            book.entries.push(e);
        }
        book
    }
}

/// One classification example: an `ID·x` key and its declaration triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrainingPair {
    pub input: u64,
    pub decl: u64,
    pub typedecl: u64,
    pub identifiertype: u64,
}

impl TrainingPair {
    pub fn targets(&self) -> [u64; 3] {
        [self.decl, self.typedecl, self.identifiertype]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    codes: Vec<u64>,
    index: BTreeMap<u64, usize>,
    pub pairs: Vec<TrainingPair>,
    pub codebook: Codebook,
}

#[derive(Serialize, Deserialize)]
struct VocabularyDoc {
    entries: Vec<(u64, usize)>,
    pairs: Vec<TrainingPair>,
    terminals: Vec<(u64, String, TerminalCategory)>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn index_of(&self, code: u64) -> Option<usize> {
        self.index.get(&code).copied()
    }

    pub fn code_at(&self, index: usize) -> Option<u64> {
        self.codes.get(index).copied()
    }

    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    fn insert(&mut self, code: u64) {
        if !self.index.contains_key(&code) {
            self.index.insert(code, self.codes.len());
            self.codes.push(code);
        }
    }

    /// Composite `ID·x` code of an identifier known to the corpus.
    pub fn id_code(&self, identifier: &str) -> Option<u64> {
        self.codebook
            .lookup(identifier, TerminalCategory::Identifier)
            .map(|t| compose(encode_nonterminal(NodeKind::ID), t))
    }

    /// Lexeme behind a terminal code.
    pub fn lexeme(&self, terminal: u64) -> Option<&str> {
        self.codebook
            .entries()
            .iter()
            .find(|e| e.code == terminal)
            .map(|e| e.lexeme.as_str())
    }

    pub fn to_json(&self) -> String {
        let doc = VocabularyDoc {
            entries: self.codes.iter().enumerate().map(|(i, &c)| (c, i)).collect(),
            pairs: self.pairs.clone(),
            terminals: self
                .codebook
                .entries()
                .iter()
                .map(|e| (e.code, e.lexeme.clone(), e.category))
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("vocabulary serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let doc: VocabularyDoc = serde_json::from_str(text)?;
        let mut entries = doc.entries;
        entries.sort_by_key(|&(_, i)| i);
        let mut vocab = Vocabulary {
            pairs: doc.pairs,
            codebook: Codebook::from_entries(
                doc.terminals
                    .into_iter()
                    .map(|(code, lexeme, category)| TerminalEntry {
                        code,
                        lexeme,
                        category,
                    })
                    .collect(),
            ),
            ..Vocabulary::default()
        };
        for (code, _) in entries {
            vocab.insert(code);
        }
        Ok(vocab)
    }

    /// SHA-256 of the JSON form; the model file records it.
    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.to_json().as_bytes()).into()
    }
}

/// Builds the corpus vocabulary. Every identifier that appears as a
/// non-callee `ID` contributes its `ID`, `Decl` and `TypeDecl` codes, the
/// shared `IdentifierType·111111` code, and one training pair.
pub fn build_vocabulary(roots: &[AstNode]) -> Result<Vocabulary, CodeError> {
    let mut vocab = Vocabulary::default();
    let type_code = compose(encode_nonterminal(NodeKind::IdentifierType), DATATYPE_CODE);
    for root in roots {
        let nodes = locate(root);
        for (i, entry) in nodes.iter().enumerate() {
            if !entry.node.is(NodeKind::ID) || is_callee(&nodes, i) {
                continue;
            }
            let Some(name) = entry.node.str_attr("name") else {
                continue;
            };
            if vocab.codebook.lookup(name, TerminalCategory::Identifier).is_some() {
                continue;
            }
            let t = vocab.codebook.encode_terminal(name, TerminalCategory::Identifier)?;
            let pair = TrainingPair {
                input: compose(encode_nonterminal(NodeKind::ID), t),
                decl: compose(encode_nonterminal(NodeKind::Decl), t),
                typedecl: compose(encode_nonterminal(NodeKind::TypeDecl), t),
                identifiertype: type_code,
            };
            vocab.insert(pair.input);
            vocab.insert(pair.decl);
            vocab.insert(pair.typedecl);
            vocab.insert(pair.identifiertype);
            vocab.pairs.push(pair);
        }
    }
    Ok(vocab)
}
