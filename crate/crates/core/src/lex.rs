//! Lexical front end shared by the preprocessor and the C parser.
//!
//! Tokens are preprocessing tokens in the C sense: identifiers, pp-numbers,
//! string and character literals and punctuators. Every token remembers the
//! place it was spelled and, once it has passed through macro expansion, the
//! chain of invocations that produced it.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::pp::InvocationId;

/// Index of a file registered with a [`crate::pp::SourceMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FileId(pub u32);

impl FileId {
    /// Pseudo file holding command-line and builtin definitions.
    pub const COMMAND_LINE: FileId = FileId(u32::MAX);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Location {
    pub file: FileId,
    pub offset: u32,
    pub line: u32,
    pub column: u32,
}

impl Location {
    pub fn new(file: FileId, offset: u32, line: u32, column: u32) -> Self {
        Location {
            file,
            offset,
            line,
            column,
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    Identifier,
    Number,
    Str,
    Char,
    Punct,
    Hash,
    HashHash,
    Eof,
}

/// Where an expanded token came from inside one invocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    /// Copied (or synthesized by `#`/`##`) from the macro body.
    Body,
    /// Substituted from argument `index`; `occurrence` counts the
    /// substitutions of that argument in body order.
    Arg { index: u32, occurrence: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ExpansionStep {
    pub invocation: InvocationId,
    pub origin: Origin,
}

#[derive(Debug)]
struct Link {
    step: ExpansionStep,
    next: Provenance,
}

/// Expansion history of a token, most recent substitution first.
///
/// An empty chain means the token was spelled directly in a source file.
#[derive(Debug, Clone, Default)]
pub struct Provenance(Option<Arc<Link>>);

impl Provenance {
    pub fn spelled() -> Self {
        Provenance(None)
    }

    pub fn is_spelled(&self) -> bool {
        self.0.is_none()
    }

    /// The most recent expansion step, if any.
    pub fn expanded_from(&self) -> Option<ExpansionStep> {
        self.0.as_ref().map(|l| l.step)
    }

    pub fn push(&self, step: ExpansionStep) -> Provenance {
        Provenance(Some(Arc::new(Link {
            step,
            next: self.clone(),
        })))
    }

    pub fn steps(&self) -> ProvenanceIter<'_> {
        ProvenanceIter { cur: self }
    }
}

impl PartialEq for Provenance {
    fn eq(&self, other: &Self) -> bool {
        self.steps().eq(other.steps())
    }
}

impl Eq for Provenance {}

pub struct ProvenanceIter<'a> {
    cur: &'a Provenance,
}

impl<'a> Iterator for ProvenanceIter<'a> {
    type Item = ExpansionStep;

    fn next(&mut self) -> Option<ExpansionStep> {
        let link = self.cur.0.as_ref()?;
        self.cur = &link.next;
        Some(link.step)
    }
}

/// Names of macros that may not be expanded from this token (the
/// standard "blue paint" set).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct HideSet(Option<Arc<Vec<Arc<str>>>>);

impl HideSet {
    pub(crate) fn contains(&self, name: &str) -> bool {
        match &self.0 {
            Some(v) => v.binary_search_by(|n| (**n).cmp(name)).is_ok(),
            None => false,
        }
    }

    pub(crate) fn names(&self) -> &[Arc<str>] {
        match &self.0 {
            Some(v) => v,
            None => &[],
        }
    }

    pub(crate) fn with(&self, name: &Arc<str>) -> HideSet {
        if self.contains(name) {
            return self.clone();
        }
        let mut v = self.names().to_vec();
        let pos = v.binary_search(name).unwrap_or_else(|p| p);
        v.insert(pos, name.clone());
        HideSet(Some(Arc::new(v)))
    }

    pub(crate) fn union(&self, other: &HideSet) -> HideSet {
        if other.0.is_none() {
            return self.clone();
        }
        if self.0.is_none() {
            return other.clone();
        }
        let mut v: Vec<Arc<str>> = self.names().to_vec();
        for n in other.names() {
            if let Err(p) = v.binary_search(n) {
                v.insert(p, n.clone());
            }
        }
        HideSet(Some(Arc::new(v)))
    }

    pub(crate) fn intersect(&self, other: &HideSet) -> HideSet {
        let v: Vec<Arc<str>> = self
            .names()
            .iter()
            .filter(|n| other.contains(n))
            .cloned()
            .collect();
        if v.is_empty() {
            HideSet(None)
        } else {
            HideSet(Some(Arc::new(v)))
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub text: Arc<str>,
    pub loc: Location,
    /// Byte length of the spelling in the source, including any line splices.
    pub len: u32,
    pub leading_space: bool,
    pub line_start: bool,
    pub provenance: Provenance,
    pub(crate) hide: HideSet,
}

impl Token {
    pub fn new(kind: TokenKind, text: &str, loc: Location) -> Self {
        Token {
            kind,
            text: Arc::from(text),
            loc,
            len: text.len() as u32,
            leading_space: false,
            line_start: false,
            provenance: Provenance::spelled(),
            hide: HideSet::default(),
        }
    }

    pub fn is(&self, text: &str) -> bool {
        matches!(
            self.kind,
            TokenKind::Punct | TokenKind::Hash | TokenKind::HashHash | TokenKind::Identifier
        ) && &*self.text == text
    }

    pub fn is_ident(&self) -> bool {
        self.kind == TokenKind::Identifier
    }
}

impl PartialEq for Token {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.text == other.text
            && self.loc == other.loc
            && self.provenance == other.provenance
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{file:?}:{location}: {message}")]
pub struct LexError {
    pub message: String,
    pub file: FileId,
    pub location: Location,
}

/// Render tokens as text, one space wherever the source had whitespace.
pub fn spell(tokens: &[Token]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 && t.leading_space {
            out.push(' ');
        }
        out.push_str(&t.text);
    }
    out
}

/// Render tokens with a space between every pair; unambiguous when re-lexed.
pub fn spell_spaced(tokens: &[Token]) -> String {
    tokens
        .iter()
        .map(|t| &*t.text)
        .collect::<Vec<_>>()
        .join(" ")
}

const PUNCTUATORS: &[&str] = &[
    "...", "<<=", ">>=", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "*=",
    "/=", "%=", "+=", "-=", "&=", "^=", "|=", "##", "[", "]", "(", ")", "{", "}", ".", "&", "*",
    "+", "-", "~", "!", "/", "%", "<", ">", "^", "|", "?", ":", ";", "=", ",", "#",
];

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_' || b == b'$' || b >= 0x80
}

fn is_ident_continue(b: u8) -> bool {
    is_ident_start(b) || b.is_ascii_digit()
}

/// Streaming lexer over one source buffer.
pub(crate) struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    file: FileId,
    line_starts: Vec<usize>,
    at_line_start: bool,
    /// Recover from unterminated literals and comments instead of failing;
    /// the error is parked in `recovered` for the caller to inspect.
    lenient: bool,
    pub(crate) recovered: Option<LexError>,
}

impl<'a> Lexer<'a> {
    pub(crate) fn new(src: &'a str, file: FileId) -> Self {
        let bytes = src.as_bytes();
        let mut line_starts = vec![0];
        for (i, b) in bytes.iter().enumerate() {
            if *b == b'\n' {
                line_starts.push(i + 1);
            }
        }
        Lexer {
            src: bytes,
            pos: 0,
            file,
            line_starts,
            at_line_start: true,
            lenient: false,
            recovered: None,
        }
    }

    pub(crate) fn lenient(src: &'a str, file: FileId) -> Self {
        let mut lexer = Lexer::new(src, file);
        lexer.lenient = true;
        lexer
    }

    fn location(&self, offset: usize) -> Location {
        let line = match self.line_starts.binary_search(&offset) {
            Ok(l) => l,
            Err(l) => l - 1,
        };
        Location::new(
            self.file,
            offset as u32,
            line as u32 + 1,
            (offset - self.line_starts[line]) as u32 + 1,
        )
    }

    fn error(&self, offset: usize, message: impl Into<String>) -> LexError {
        LexError {
            message: message.into(),
            file: self.file,
            location: self.location(offset),
        }
    }

    /// Length of a backslash-newline splice starting at `at`, or 0.
    fn splice_len(&self, at: usize) -> usize {
        if self.src.get(at) != Some(&b'\\') {
            return 0;
        }
        match self.src.get(at + 1) {
            Some(b'\n') => 2,
            Some(b'\r') if self.src.get(at + 2) == Some(&b'\n') => 3,
            _ => 0,
        }
    }

    fn skip_splices(&mut self) {
        loop {
            let n = self.splice_len(self.pos);
            if n == 0 {
                break;
            }
            self.pos += n;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_splices();
        self.src.get(self.pos).copied()
    }

    /// Look `n` logical characters ahead, skipping splices.
    fn peek_nth(&self, n: usize) -> Option<u8> {
        let mut p = self.pos;
        let mut left = n;
        loop {
            loop {
                let s = self.splice_len(p);
                if s == 0 {
                    break;
                }
                p += s;
            }
            let b = *self.src.get(p)?;
            if left == 0 {
                return Some(b);
            }
            left -= 1;
            p += 1;
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        Some(b)
    }

    /// Skip whitespace and comments; returns (saw whitespace, saw newline).
    fn skip_trivia(&mut self) -> Result<(bool, bool), LexError> {
        let mut space = false;
        let mut newline = false;
        loop {
            match self.peek() {
                Some(b'\n') => {
                    self.pos += 1;
                    space = true;
                    newline = true;
                }
                Some(b' ' | b'\t' | b'\r' | 0x0b | 0x0c) => {
                    self.pos += 1;
                    space = true;
                }
                Some(b'/') if self.peek_nth(1) == Some(b'*') => {
                    let start = self.pos;
                    self.bump();
                    self.bump();
                    loop {
                        match self.bump() {
                            None => {
                                let err = self.error(start, "unterminated comment");
                                if !self.lenient {
                                    return Err(err);
                                }
                                self.recovered = Some(err);
                                break;
                            }
                            Some(b'*') if self.peek() == Some(b'/') => {
                                self.bump();
                                break;
                            }
                            Some(_) => {}
                        }
                    }
                    space = true;
                }
                Some(b'/') if self.peek_nth(1) == Some(b'/') => {
                    while let Some(b) = self.peek() {
                        if b == b'\n' {
                            break;
                        }
                        self.pos += 1;
                    }
                    space = true;
                }
                _ => return Ok((space, newline)),
            }
        }
    }


    pub(crate) fn next_token(&mut self) -> Result<Token, LexError> {
        let (space, newline) = self.skip_trivia()?;
        if newline {
            self.at_line_start = true;
        }
        let start = self.pos;
        let line_start = self.at_line_start;
        let mut text: Vec<u8> = Vec::new();
        let kind = match self.peek() {
            None => TokenKind::Eof,
            Some(b) if b.is_ascii_digit() || (b == b'.' && self.peek_nth(1).is_some_and(|c| c.is_ascii_digit())) => {
                self.lex_number(&mut text);
                TokenKind::Number
            }
            Some(b) if is_ident_start(b) => {
                while let Some(c) = self.peek() {
                    if !is_ident_continue(c) {
                        break;
                    }
                    text.push(c);
                    self.pos += 1;
                }
                let prefix = matches!(&text[..], b"L" | b"u" | b"U" | b"u8");
                match self.peek() {
                    Some(q @ (b'"' | b'\'')) if prefix => {
                        if q == b'\'' && text == b"u8" {
                            TokenKind::Identifier
                        } else {
                            self.lex_quoted(q, start, &mut text)?;
                            if q == b'"' {
                                TokenKind::Str
                            } else {
                                TokenKind::Char
                            }
                        }
                    }
                    _ => TokenKind::Identifier,
                }
            }
            Some(b'"') => {
                self.lex_quoted(b'"', start, &mut text)?;
                TokenKind::Str
            }
            Some(b'\'') => {
                self.lex_quoted(b'\'', start, &mut text)?;
                TokenKind::Char
            }
            Some(_) => self.lex_punct(&mut text),
        };
        self.at_line_start = false;
        let text = String::from_utf8_lossy(&text);
        let mut tok = Token::new(kind, &text, self.location(start));
        tok.len = (self.pos - start) as u32;
        tok.leading_space = space;
        tok.line_start = line_start;
        Ok(tok)
    }

    fn lex_number(&mut self, text: &mut Vec<u8>) {
        while let Some(c) = self.peek() {
            if matches!(c, b'e' | b'E' | b'p' | b'P')
                && matches!(self.peek_nth(1), Some(b'+' | b'-'))
            {
                text.push(c);
                self.bump();
                text.push(self.bump().unwrap_or(b'+'));
            } else if is_ident_continue(c) || c == b'.' {
                text.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn lex_quoted(&mut self, quote: u8, start: usize, text: &mut Vec<u8>) -> Result<(), LexError> {
        text.push(quote);
        self.bump();
        loop {
            match self.peek() {
                None | Some(b'\n') => {
                    let what = if quote == b'"' { "string" } else { "character" };
                    let err = self.error(start, format!("unterminated {what} literal"));
                    if !self.lenient {
                        return Err(err);
                    }
                    self.recovered = Some(err);
                    return Ok(());
                }
                Some(b'\\') => {
                    text.push(b'\\');
                    self.pos += 1;
                    match self.peek() {
                        Some(b'\n') | None => {}
                        Some(c) => {
                            text.push(c);
                            self.pos += 1;
                        }
                    }
                }
                Some(c) => {
                    text.push(c);
                    self.pos += 1;
                    if c == quote {
                        return Ok(());
                    }
                }
            }
        }
    }

    fn lex_punct(&mut self, text: &mut Vec<u8>) -> TokenKind {
        for p in PUNCTUATORS {
            let pb = p.as_bytes();
            if (0..pb.len()).all(|i| self.peek_nth(i) == Some(pb[i])) {
                for _ in 0..pb.len() {
                    self.bump();
                }
                text.extend_from_slice(pb);
                return match *p {
                    "#" => TokenKind::Hash,
                    "##" => TokenKind::HashHash,
                    _ => TokenKind::Punct,
                };
            }
        }
        // Stray character: a single-character punctuator token. Keep whole
        // UTF-8 sequences together.
        let first = self.bump().unwrap_or(b'?');
        text.push(first);
        if first >= 0x80 {
            while let Some(c) = self.peek() {
                if c & 0xC0 != 0x80 {
                    break;
                }
                text.push(c);
                self.pos += 1;
            }
        }
        TokenKind::Punct
    }
}

/// Split source text into preprocessing tokens, terminated by an `Eof` token.
pub fn tokenize(source: &str, file: FileId) -> Result<Vec<Token>, LexError> {
    let mut lexer = Lexer::new(source, file);
    let mut out = Vec::new();
    loop {
        let tok = lexer.next_token()?;
        let eof = tok.kind == TokenKind::Eof;
        out.push(tok);
        if eof {
            return Ok(out);
        }
    }
}

/// Lex a string that must form exactly one token (used by `##`).
pub(crate) fn lex_single(text: &str) -> Option<Token> {
    let mut lexer = Lexer::new(text, FileId::COMMAND_LINE);
    let tok = lexer.next_token().ok()?;
    if tok.kind == TokenKind::Eof || tok.leading_space {
        return None;
    }
    let rest = lexer.next_token().ok()?;
    if rest.kind != TokenKind::Eof || rest.leading_space {
        return None;
    }
    Some(tok)
}
