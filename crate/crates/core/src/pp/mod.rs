//! Trace-producing C preprocessor.
//!
//! [`preprocess`] runs a single configuration of a translation unit through
//! the directive set we support and records every macro expansion as an
//! [`InvocationRecord`] whose token ranges point into the final output.

mod engine;
mod expr;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::lex::{FileId, LexError, Location, Token};

pub(crate) use expr::decode_escapes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct InvocationId(pub u32);

impl InvocationId {
    /// Expansions inside `#if` and `#include` lines are not recorded.
    pub(crate) const DIRECTIVE: InvocationId = InvocationId(u32::MAX);
}

impl fmt::Display for InvocationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DefinitionId(pub u32);

/// Position in the combined directive/declaration stream of a unit.
///
/// Macro definitions sit at even keys (twice the number of output tokens
/// emitted before the directive) and declarations at odd keys (twice their
/// token index plus one), so a definition orders before every token that
/// follows it and after every token that precedes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Ordinal {
    pub key: u64,
    pub seq: u32,
}

impl Ordinal {
    pub fn for_definition(tokens_before: usize, seq: u32) -> Self {
        Ordinal {
            key: 2 * tokens_before as u64,
            seq,
        }
    }

    pub fn for_token(index: usize) -> Self {
        Ordinal {
            key: 2 * index as u64 + 1,
            seq: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MacroKind {
    ObjectLike,
    FunctionLike,
}

#[derive(Debug, Clone)]
pub struct MacroDefinition {
    pub id: DefinitionId,
    pub name: Arc<str>,
    pub kind: MacroKind,
    /// Parameter names; a variadic macro ends with `__VA_ARGS__`.
    pub params: Vec<String>,
    pub variadic: bool,
    pub body: Vec<Token>,
    pub location: Location,
    pub ordinal: Ordinal,
    /// Number of output tokens emitted before the `#define` was processed.
    pub output_position: usize,
    /// Predefined or given on the command line.
    pub builtin: bool,
}

impl MacroDefinition {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p == name)
    }

    /// Body text with a single space wherever the definition had whitespace.
    pub fn body_text(&self) -> String {
        crate::lex::spell(&self.body)
    }

    fn same_as(&self, other: &MacroDefinition) -> bool {
        self.kind == other.kind
            && self.params == other.params
            && self.variadic == other.variadic
            && self.body.len() == other.body.len()
            && self
                .body
                .iter()
                .zip(&other.body)
                .enumerate()
                .all(|(i, (a, b))| {
                    a.text == b.text && (i == 0 || a.leading_space == b.leading_space)
                })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Nesting {
    TopLevel,
    /// Spelled in (or produced by) the body of the parent invocation.
    Body(InvocationId),
    /// Part of argument `index` of the parent invocation.
    Argument(InvocationId, u32),
}

impl Nesting {
    pub fn parent(self) -> Option<InvocationId> {
        match self {
            Nesting::TopLevel => None,
            Nesting::Body(p) | Nesting::Argument(p, _) => Some(p),
        }
    }
}

/// Source extent of an invocation spelled entirely in one file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpelledSpan {
    pub file: FileId,
    pub start: u32,
    pub end: u32,
}

impl SpelledSpan {
    pub fn contains(&self, loc: &Location) -> bool {
        loc.file == self.file && loc.offset >= self.start && loc.offset < self.end
    }
}

#[derive(Debug, Clone)]
pub struct InvocationRecord {
    pub id: InvocationId,
    pub name: Arc<str>,
    pub definition: DefinitionId,
    pub location: Location,
    pub spelled: Option<SpelledSpan>,
    /// Argument tokens as written, before expansion.
    pub raw_args: Vec<Vec<Token>>,
    /// Tokens of the final output produced by this expansion.
    pub expansion: Range<usize>,
    /// Output range of the first substitution of each argument; `None` when
    /// the argument is never substituted (unused, or only stringized/pasted).
    pub arg_ranges: Vec<Option<Range<usize>>>,
    /// Output ranges of every substitution of each argument, in body order.
    pub arg_occurrences: Vec<Vec<Range<usize>>>,
    pub nesting: Nesting,
}

impl InvocationRecord {
    pub fn parent(&self) -> Option<InvocationId> {
        self.nesting.parent()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionalKind {
    If,
    Ifdef,
    Ifndef,
    Elif,
}

/// One `#if`-family directive and the names its condition mentions.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionalSite {
    pub location: Location,
    pub kind: ConditionalKind,
    pub names: BTreeSet<String>,
    /// Whether the directive was reached while its enclosing group was live.
    pub evaluated: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    files: Vec<(PathBuf, Arc<str>, bool)>,
}

impl SourceMap {
    pub fn add(&mut self, path: PathBuf, text: Arc<str>) -> FileId {
        self.add_file(path, text, false)
    }

    pub(crate) fn add_file(&mut self, path: PathBuf, text: Arc<str>, system: bool) -> FileId {
        self.files.push((path, text, system));
        FileId(self.files.len() as u32 - 1)
    }

    /// Whether the file was found through a system include directory.
    pub fn is_system(&self, id: FileId) -> bool {
        self.files.get(id.0 as usize).is_some_and(|f| f.2)
    }

    pub fn path(&self, id: FileId) -> Option<&Path> {
        self.files.get(id.0 as usize).map(|f| f.0.as_path())
    }

    pub fn text(&self, id: FileId) -> Option<&str> {
        self.files.get(id.0 as usize).map(|f| &*f.1)
    }

    pub fn display(&self, id: FileId) -> String {
        if id == FileId::COMMAND_LINE {
            return "<command-line>".to_string();
        }
        self.path(id)
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| format!("<file {}>", id.0))
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }
}

/// Everything the preprocessor learned about one translation unit.
#[derive(Debug, Clone)]
pub struct ExpansionTrace {
    pub sources: SourceMap,
    pub output: Vec<Token>,
    pub definitions: Vec<MacroDefinition>,
    pub invocations: Vec<InvocationRecord>,
    pub conditionals: Vec<ConditionalSite>,
}

impl ExpansionTrace {
    pub fn definition(&self, id: DefinitionId) -> &MacroDefinition {
        &self.definitions[id.0 as usize]
    }

    pub fn invocation(&self, id: InvocationId) -> &InvocationRecord {
        &self.invocations[id.0 as usize]
    }

    /// Invocations directly nested in `parent` (body or argument).
    pub fn children(&self, parent: InvocationId) -> impl Iterator<Item = &InvocationRecord> {
        self.invocations
            .iter()
            .filter(move |r| r.parent() == Some(parent))
    }

    pub fn output_lexemes(&self) -> Vec<&str> {
        self.output.iter().map(|t| &*t.text).collect()
    }
}

/// All invocations of the macro called `name`, in output-stream order.
pub fn invocations_of<'t>(trace: &'t ExpansionTrace, name: &str) -> Vec<&'t InvocationRecord> {
    let mut v: Vec<&InvocationRecord> = trace
        .invocations
        .iter()
        .filter(|r| &*trace.definition(r.definition).name == name)
        .collect();
    v.sort_by_key(|r| (r.expansion.start, r.id));
    v
}

/// Where the preprocessor gets file contents from.
pub trait SourceProvider: Sync {
    fn load(&self, path: &Path) -> Option<String>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FileSystem;

impl SourceProvider for FileSystem {
    fn load(&self, path: &Path) -> Option<String> {
        let bytes = std::fs::read(path).ok()?;
        Some(String::from_utf8_lossy(&bytes).into_owned())
    }
}

/// In-memory file set, keyed by path.
#[derive(Debug, Clone, Default)]
pub struct MemoryFiles {
    files: HashMap<PathBuf, String>,
}

impl MemoryFiles {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, path: impl Into<PathBuf>, text: impl Into<String>) -> Self {
        self.insert(path, text);
        self
    }

    pub fn insert(&mut self, path: impl Into<PathBuf>, text: impl Into<String>) {
        self.files.insert(path.into(), text.into());
    }
}

impl SourceProvider for MemoryFiles {
    fn load(&self, path: &Path) -> Option<String> {
        self.files.get(path).cloned()
    }
}

#[derive(Debug, Clone, Default)]
pub struct PreprocessOptions {
    pub include_paths: Vec<PathBuf>,
    /// Searched after `include_paths`; files found here are system headers.
    pub system_include_paths: Vec<PathBuf>,
    /// `NAME` or `NAME=VALUE`, applied in order.
    pub defines: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PpError {
    #[error("{file}: {source}")]
    Lex {
        file: String,
        #[source]
        source: LexError,
    },
    #[error("{file}:{location}: {message}")]
    Directive {
        file: String,
        location: Location,
        message: String,
    },
    #[error("{file}:{location}: {header}: no such file")]
    MissingInclude {
        file: String,
        location: Location,
        header: String,
    },
    #[error("{file}:{location}: #error {message}")]
    ErrorDirective {
        file: String,
        location: Location,
        message: String,
    },
    #[error("{file}:{location}: {message}")]
    Expansion {
        file: String,
        location: Location,
        message: String,
    },
    #[error("cannot read {0}")]
    Unreadable(String),
    #[error("invalid command-line definition '{0}'")]
    BadDefine(String),
}

/// Preprocess `main` and everything it includes.
pub fn preprocess(
    main: &Path,
    options: &PreprocessOptions,
    provider: &dyn SourceProvider,
) -> Result<ExpansionTrace, PpError> {
    engine::Engine::new(provider, options).run(main)
}

/// Convenience wrapper over an in-memory main file with no includes.
pub fn preprocess_str(name: &str, source: &str) -> Result<ExpansionTrace, PpError> {
    let files = MemoryFiles::new().with(name, source);
    preprocess(Path::new(name), &PreprocessOptions::default(), &files)
}
