//! Directive processing and macro expansion.
//!
//! Expansion follows the usual hideset algorithm. Spacing between tokens
//! (which only matters for `#`) is modelled with GCC-style padding items so
//! that stringized text matches what the system compiler produces.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::lex::{
    lex_single, ExpansionStep, FileId, HideSet, LexError, Lexer, Location, Origin, Provenance,
    Token, TokenKind,
};

use super::expr;
use super::{
    ConditionalKind, ConditionalSite, DefinitionId, ExpansionTrace, InvocationId,
    InvocationRecord, MacroDefinition, MacroKind, Nesting, Ordinal, PpError, PreprocessOptions,
    SourceMap, SourceProvider, SpelledSpan,
};

const MAX_INCLUDE_DEPTH: usize = 200;
const MAX_ARG_NESTING: usize = 256;

#[derive(Debug, Clone)]
enum Item {
    Tok(Token),
    /// Padding. `Some(white)` stands for a source token with that spacing
    /// flag, `None` for a bare separator after an expansion.
    Pad(Option<bool>),
    /// Marks where a body or argument substitution begins, so that empty
    /// expansions still get a position in the output.
    Anchor(ExpansionStep),
    Placemarker,
}

/// Arguments, the closing `)` and the anchors skipped before the `(`.
type CollectedArgs = (Vec<Vec<Item>>, Token, Vec<Item>);

struct Input {
    buf: VecDeque<Item>,
    /// Pull more tokens from the include stack once `buf` runs dry.
    files: bool,
}

impl Input {
    fn isolated(items: Vec<Item>) -> Self {
        Input {
            buf: items.into(),
            files: false,
        }
    }

    fn prepend(&mut self, items: Vec<Item>) {
        for it in items.into_iter().rev() {
            self.buf.push_front(it);
        }
    }
}

struct Frame {
    file: FileId,
    path: PathBuf,
    tokens: Vec<Token>,
    lex_errors: HashMap<usize, LexError>,
    pos: usize,
    cond_base: usize,
    /// Index into the search path list where this file was found.
    search_index: Option<usize>,
}

struct Cond {
    parent_active: bool,
    taken: bool,
    active: bool,
    seen_else: bool,
    location: Location,
}

pub(crate) struct Engine<'p> {
    provider: &'p dyn SourceProvider,
    options: &'p PreprocessOptions,
    sources: SourceMap,
    macros: HashMap<Arc<str>, DefinitionId>,
    definitions: Vec<Arc<MacroDefinition>>,
    invocations: Vec<InvocationRecord>,
    conditionals: Vec<ConditionalSite>,
    frames: Vec<Frame>,
    conds: Vec<Cond>,
    emitted: usize,
    anchors: HashMap<(InvocationId, Origin), usize>,
    directive_seq: u32,
    recording: bool,
    arg_nesting: usize,
}

fn lex_file(text: &str, file: FileId) -> (Vec<Token>, HashMap<usize, LexError>) {
    let mut lexer = Lexer::lenient(text, file);
    let mut tokens = Vec::new();
    let mut errors = HashMap::new();
    loop {
        let tok = match lexer.next_token() {
            Ok(t) => t,
            // Lenient mode only fails on conditions it cannot recover from;
            // treat them like the end of the file.
            Err(e) => {
                errors.insert(tokens.len(), e.clone());
                let mut t = Token::new(TokenKind::Eof, "", e.location);
                t.line_start = true;
                tokens.push(t);
                break;
            }
        };
        if let Some(e) = lexer.recovered.take() {
            errors.insert(tokens.len(), e);
        }
        let eof = tok.kind == TokenKind::Eof;
        tokens.push(tok);
        if eof {
            break;
        }
    }
    (tokens, errors)
}

fn tokens_of(items: &[Item]) -> impl Iterator<Item = &Token> {
    items.iter().filter_map(|it| match it {
        Item::Tok(t) => Some(t),
        _ => None,
    })
}

/// Spell an argument as a string literal, spacing it the way GCC does.
fn stringify(items: &[Item]) -> String {
    let mut s = String::from("\"");
    let mut source: Option<bool> = None;
    let mut first = true;
    for it in items {
        match it {
            Item::Pad(p) => {
                if source.is_none() || (source == Some(false) && p.is_none()) {
                    source = *p;
                }
            }
            Item::Tok(t) => {
                if !first && source.unwrap_or(t.leading_space) {
                    s.push(' ');
                }
                source = None;
                first = false;
                if matches!(t.kind, TokenKind::Str | TokenKind::Char) {
                    for c in t.text.chars() {
                        if c == '"' || c == '\\' {
                            s.push('\\');
                        }
                        s.push(c);
                    }
                } else {
                    s.push_str(&t.text);
                }
            }
            _ => {}
        }
    }
    s.push('"');
    s
}

impl<'p> Engine<'p> {
    pub(crate) fn new(provider: &'p dyn SourceProvider, options: &'p PreprocessOptions) -> Self {
        Engine {
            provider,
            options,
            sources: SourceMap::default(),
            macros: HashMap::new(),
            definitions: Vec::new(),
            invocations: Vec::new(),
            conditionals: Vec::new(),
            frames: Vec::new(),
            conds: Vec::new(),
            emitted: 0,
            anchors: HashMap::new(),
            directive_seq: 0,
            recording: true,
            arg_nesting: 0,
        }
    }

    pub(crate) fn run(mut self, main: &Path) -> Result<ExpansionTrace, PpError> {
        self.predefine()?;
        let text = self
            .provider
            .load(main)
            .ok_or_else(|| PpError::Unreadable(main.display().to_string()))?;
        self.push_file(main.to_path_buf(), text, false, None);

        let mut input = Input {
            buf: VecDeque::new(),
            files: true,
        };
        let mut out = Vec::new();
        self.expand(&mut input, &mut out, None, true)?;
        let output: Vec<Token> = out
            .into_iter()
            .filter_map(|it| match it {
                Item::Tok(t) => Some(t),
                _ => None,
            })
            .collect();
        self.compute_ranges(&output);

        Ok(ExpansionTrace {
            sources: self.sources,
            output,
            definitions: self.definitions.iter().map(|d| (**d).clone()).collect(),
            invocations: self.invocations,
            conditionals: self.conditionals,
        })
    }

    // ---- errors -------------------------------------------------------

    fn file_name(&self, file: FileId) -> String {
        self.sources.display(file)
    }

    fn directive_error(&self, loc: Location, message: impl Into<String>) -> PpError {
        PpError::Directive {
            file: self.file_name(loc.file),
            location: loc,
            message: message.into(),
        }
    }

    fn expansion_error(&self, loc: Location, message: impl Into<String>) -> PpError {
        PpError::Expansion {
            file: self.file_name(loc.file),
            location: loc,
            message: message.into(),
        }
    }

    fn lex_error(&self, e: LexError) -> PpError {
        PpError::Lex {
            file: self.file_name(e.file),
            source: e,
        }
    }

    // ---- definitions --------------------------------------------------

    fn predefine(&mut self) -> Result<(), PpError> {
        let builtins = [
            "__STDC__ 1",
            "__STDC_VERSION__ 199901L",
            "__STDC_HOSTED__ 1",
        ];
        for text in builtins {
            self.define_text(text, text)?;
        }
        for d in &self.options.defines.clone() {
            let text = match d.split_once('=') {
                Some((name, value)) => format!("{name} {value}"),
                None => format!("{d} 1"),
            };
            self.define_text(&text, d)?;
        }
        Ok(())
    }

    fn define_text(&mut self, text: &str, original: &str) -> Result<(), PpError> {
        let toks = crate::lex::tokenize(text, FileId::COMMAND_LINE)
            .map_err(|_| PpError::BadDefine(original.to_string()))?;
        let line = &toks[..toks.len() - 1];
        self.define(line, Location::new(FileId::COMMAND_LINE, 0, 0, 0), true)
            .map_err(|_| PpError::BadDefine(original.to_string()))
    }

    fn define(&mut self, line: &[Token], at: Location, builtin: bool) -> Result<(), PpError> {
        let Some(name_tok) = line.first() else {
            return Err(self.directive_error(at, "no macro name given in #define directive"));
        };
        if !name_tok.is_ident() {
            return Err(self.directive_error(name_tok.loc, "macro names must be identifiers"));
        }
        if &*name_tok.text == "defined" {
            return Err(self.directive_error(name_tok.loc, "\"defined\" cannot be used as a macro name"));
        }

        let mut params = Vec::new();
        let mut variadic = false;
        let mut kind = MacroKind::ObjectLike;
        let mut i = 1;
        if line.get(1).is_some_and(|t| t.is("(") && !t.leading_space) {
            kind = MacroKind::FunctionLike;
            i = 2;
            if line.get(i).is_some_and(|t| t.is(")")) {
                i += 1;
            } else {
                loop {
                    let Some(t) = line.get(i) else {
                        return Err(self.directive_error(name_tok.loc, "missing ')' in macro parameter list"));
                    };
                    if t.is("...") {
                        variadic = true;
                        params.push("__VA_ARGS__".to_string());
                        i += 1;
                        if !line.get(i).is_some_and(|t| t.is(")")) {
                            return Err(self.directive_error(t.loc, "missing ')' after \"...\""));
                        }
                        i += 1;
                        break;
                    }
                    if !t.is_ident() || &*t.text == "__VA_ARGS__" {
                        return Err(self.directive_error(t.loc, "expected parameter name"));
                    }
                    if params.iter().any(|p| p == &*t.text) {
                        return Err(self.directive_error(t.loc, format!("duplicate macro parameter \"{}\"", t.text)));
                    }
                    params.push(t.text.to_string());
                    i += 1;
                    match line.get(i) {
                        Some(t) if t.is(",") => i += 1,
                        Some(t) if t.is(")") => {
                            i += 1;
                            break;
                        }
                        _ => {
                            return Err(self.directive_error(t.loc, "expected ',' or ')' in macro parameter list"))
                        }
                    }
                }
            }
        }

        let mut body: Vec<Token> = line[i..].to_vec();
        for t in &mut body {
            t.line_start = false;
        }
        if let Some(first) = body.first_mut() {
            first.leading_space = false;
        }
        if body.first().is_some_and(|t| t.kind == TokenKind::HashHash)
            || body.last().is_some_and(|t| t.kind == TokenKind::HashHash)
        {
            let t = body.iter().find(|t| t.kind == TokenKind::HashHash).unwrap();
            return Err(self.directive_error(t.loc, "'##' cannot appear at either end of a macro expansion"));
        }
        if kind == MacroKind::FunctionLike {
            for (k, t) in body.iter().enumerate() {
                if t.kind == TokenKind::Hash {
                    let ok = body
                        .get(k + 1)
                        .is_some_and(|n| n.is_ident() && params.iter().any(|p| p == &*n.text));
                    if !ok {
                        return Err(self.directive_error(t.loc, "'#' is not followed by a macro parameter"));
                    }
                }
            }
        }

        let seq = self.directive_seq;
        self.directive_seq += 1;
        let id = DefinitionId(self.definitions.len() as u32);
        let def = MacroDefinition {
            id,
            name: name_tok.text.clone(),
            kind,
            params,
            variadic,
            body,
            location: name_tok.loc,
            ordinal: Ordinal::for_definition(self.emitted, seq),
            output_position: self.emitted,
            builtin,
        };
        if let Some(&old) = self.macros.get(&def.name) {
            let prev = &self.definitions[old.0 as usize];
            // Identical redefinition is allowed and keeps the original.
            if prev.same_as(&def) {
                return Ok(());
            }
        }
        self.macros.insert(def.name.clone(), id);
        self.definitions.push(Arc::new(def));
        Ok(())
    }

    // ---- files and directives ----------------------------------------

    fn push_file(&mut self, path: PathBuf, text: String, system: bool, search_index: Option<usize>) {
        let text: Arc<str> = Arc::from(text);
        let file = self.sources.add_file(path.clone(), text.clone(), system);
        let (tokens, lex_errors) = lex_file(&text, file);
        self.frames.push(Frame {
            file,
            path,
            tokens,
            lex_errors,
            pos: 0,
            cond_base: self.conds.len(),
            search_index,
        });
    }

    fn active(&self) -> bool {
        self.conds.last().is_none_or(|c| c.active)
    }

    fn at_directive(&self) -> bool {
        self.frames.last().is_some_and(|f| {
            let t = &f.tokens[f.pos];
            t.kind == TokenKind::Hash && t.line_start
        })
    }

    fn next_item(&mut self, input: &mut Input) -> Result<Option<Item>, PpError> {
        if let Some(it) = input.buf.pop_front() {
            return Ok(Some(it));
        }
        if !input.files {
            return Ok(None);
        }
        Ok(self.next_file_token()?.map(Item::Tok))
    }

    fn next_file_token(&mut self) -> Result<Option<Token>, PpError> {
        loop {
            let active = self.active();
            let Some(frame) = self.frames.last_mut() else {
                return Ok(None);
            };
            let idx = frame.pos;
            let tok = &frame.tokens[idx];
            if tok.kind == TokenKind::Eof {
                if let Some(e) = frame.lex_errors.get(&idx) {
                    if active {
                        let e = e.clone();
                        return Err(self.lex_error(e));
                    }
                }
                if self.conds.len() > frame.cond_base {
                    let loc = self.conds[self.conds.len() - 1].location;
                    return Err(self.directive_error(loc, "unterminated conditional directive"));
                }
                self.frames.pop();
                continue;
            }
            if tok.kind == TokenKind::Hash && tok.line_start {
                self.directive()?;
                continue;
            }
            frame.pos += 1;
            if !active {
                continue;
            }
            if let Some(e) = frame.lex_errors.get(&idx) {
                let e = e.clone();
                return Err(self.lex_error(e));
            }
            return Ok(Some(frame.tokens[idx].clone()));
        }
    }

    fn directive(&mut self) -> Result<(), PpError> {
        let frame = self.frames.last_mut().expect("directive outside a file");
        let hash_loc = frame.tokens[frame.pos].loc;
        frame.pos += 1;
        let start = frame.pos;
        while !(frame.tokens[frame.pos].line_start || frame.tokens[frame.pos].kind == TokenKind::Eof) {
            frame.pos += 1;
        }
        let end = frame.pos;
        let line: Vec<Token> = frame.tokens[start..end].to_vec();
        let lex_error = (start..end).find_map(|i| frame.lex_errors.get(&i).cloned());
        let file = frame.file;
        let active = self.active();

        let Some(name_tok) = line.first() else {
            return Ok(());
        };
        let name = name_tok.text.to_string();
        let rest = &line[1..];
        match name.as_str() {
            "if" | "ifdef" | "ifndef" | "elif" | "else" | "endif" => {
                if active {
                    if let Some(e) = lex_error.filter(|_| matches!(name.as_str(), "if" | "elif")) {
                        return Err(self.lex_error(e));
                    }
                }
                self.conditional(&name, name_tok.loc, rest)
            }
            _ if !active => Ok(()),
            "error" => Err(PpError::ErrorDirective {
                file: self.file_name(file),
                location: hash_loc,
                message: crate::lex::spell(rest),
            }),
            "pragma" | "line" | "ident" | "sccs" | "warning" => Ok(()),
            _ => {
                if let Some(e) = lex_error {
                    return Err(self.lex_error(e));
                }
                match name.as_str() {
                    "define" => self.define(rest, name_tok.loc, false),
                    "undef" => {
                        match rest.first() {
                            Some(t) if t.is_ident() => {
                                self.directive_seq += 1;
                                self.macros.remove(&t.text);
                            }
                            _ => {
                                return Err(self.directive_error(name_tok.loc, "no macro name given in #undef directive"))
                            }
                        }
                        Ok(())
                    }
                    "include" => self.include(rest, name_tok.loc, false),
                    "include_next" => self.include(rest, name_tok.loc, true),
                    _ => Err(self.directive_error(
                        name_tok.loc,
                        format!("invalid preprocessing directive #{name}"),
                    )),
                }
            }
        }
    }

    fn record_condition(&mut self, kind: ConditionalKind, loc: Location, rest: &[Token], evaluated: bool) {
        let names: BTreeSet<String> = rest
            .iter()
            .filter(|t| t.is_ident() && &*t.text != "defined")
            .map(|t| t.text.to_string())
            .collect();
        self.conditionals.push(ConditionalSite {
            location: loc,
            kind,
            names,
            evaluated,
        });
    }

    fn conditional(&mut self, name: &str, loc: Location, rest: &[Token]) -> Result<(), PpError> {
        let live = self.active();
        match name {
            "ifdef" | "ifndef" => {
                let kind = if name == "ifdef" { ConditionalKind::Ifdef } else { ConditionalKind::Ifndef };
                let target = rest.first().filter(|t| t.is_ident());
                if live && target.is_none() {
                    return Err(self.directive_error(loc, format!("no macro name given in #{name} directive")));
                }
                if let Some(t) = target {
                    self.record_condition(kind, loc, std::slice::from_ref(t), live);
                }
                let value = target.is_some_and(|t| self.macros.contains_key(&t.text)) == (name == "ifdef");
                let active = live && value;
                self.conds.push(Cond {
                    parent_active: live,
                    taken: !live || value,
                    active,
                    seen_else: false,
                    location: loc,
                });
            }
            "if" => {
                self.record_condition(ConditionalKind::If, loc, rest, live);
                let value = if live { self.eval_condition(rest, loc)? } else { false };
                self.conds.push(Cond {
                    parent_active: live,
                    taken: !live || value,
                    active: live && value,
                    seen_else: false,
                    location: loc,
                });
            }
            "elif" => {
                let (parent_active, taken, seen_else) = match self.conds.last() {
                    Some(c) if self.conds.len() > self.frames.last().map_or(0, |f| f.cond_base) => {
                        (c.parent_active, c.taken, c.seen_else)
                    }
                    _ => return Err(self.directive_error(loc, "#elif without #if")),
                };
                if seen_else {
                    return Err(self.directive_error(loc, "#elif after #else"));
                }
                let evaluated = parent_active && !taken;
                self.record_condition(ConditionalKind::Elif, loc, rest, evaluated);
                let value = if evaluated { self.eval_condition(rest, loc)? } else { false };
                let c = self.conds.last_mut().unwrap();
                c.active = evaluated && value;
                c.taken |= value;
            }
            "else" => {
                if self.conds.len() <= self.frames.last().map_or(0, |f| f.cond_base) {
                    return Err(self.directive_error(loc, "#else without #if"));
                }
                let c = self.conds.last_mut().unwrap();
                if c.seen_else {
                    return Err(self.directive_error(loc, "#else after #else"));
                }
                c.seen_else = true;
                c.active = c.parent_active && !c.taken;
                c.taken = true;
            }
            _ => {
                if self.conds.len() <= self.frames.last().map_or(0, |f| f.cond_base) {
                    return Err(self.directive_error(loc, "#endif without #if"));
                }
                self.conds.pop();
            }
        }
        Ok(())
    }

    fn eval_condition(&mut self, rest: &[Token], loc: Location) -> Result<bool, PpError> {
        let mut items = Vec::new();
        let mut i = 0;
        while i < rest.len() {
            let t = &rest[i];
            if t.is_ident() && &*t.text == "defined" {
                let (name, next) = match (rest.get(i + 1), rest.get(i + 2), rest.get(i + 3)) {
                    (Some(p), Some(n), Some(c)) if p.is("(") && n.is_ident() && c.is(")") => (n, i + 4),
                    (Some(n), _, _) if n.is_ident() => (n, i + 2),
                    _ => {
                        return Err(self.directive_error(t.loc, "operator \"defined\" requires an identifier"))
                    }
                };
                let v = if self.macros.contains_key(&name.text) { "1" } else { "0" };
                items.push(Item::Tok(Token::new(TokenKind::Number, v, t.loc)));
                i = next;
                continue;
            }
            items.push(Item::Tok(t.clone()));
            i += 1;
        }
        let saved = self.recording;
        self.recording = false;
        let expanded = self.expand_isolated(items, None);
        self.recording = saved;
        let toks: Vec<Token> = tokens_of(&expanded?).cloned().collect();
        expr::evaluate(&toks).map_err(|m| self.directive_error(loc, m))
    }

    /// `#include`, or `#include_next` when `next` is set: the search resumes
    /// after the directory the current file came from.
    fn include(&mut self, rest: &[Token], loc: Location, next: bool) -> Result<(), PpError> {
        let mut toks: Vec<Token> = rest.to_vec();
        if !(toks.first().is_some_and(|t| t.kind == TokenKind::Str || t.is("<"))) {
            let saved = self.recording;
            self.recording = false;
            let expanded = self.expand_isolated(toks.into_iter().map(Item::Tok).collect(), None);
            self.recording = saved;
            toks = tokens_of(&expanded?).cloned().collect();
        }
        let (header, quoted) = match toks.first() {
            Some(t) if t.kind == TokenKind::Str && t.text.starts_with('"') && t.text.len() >= 2 => {
                (t.text[1..t.text.len() - 1].to_string(), true)
            }
            Some(t) if t.is("<") => {
                let Some(close) = toks.iter().position(|t| t.is(">")) else {
                    return Err(self.directive_error(loc, "missing terminating > character"));
                };
                (crate::lex::spell(&toks[1..close]), false)
            }
            _ => return Err(self.directive_error(loc, "#include expects \"FILENAME\" or <FILENAME>")),
        };
        if self.frames.len() >= MAX_INCLUDE_DEPTH {
            return Err(self.directive_error(loc, "#include nested too deeply"));
        }
        let resume = if next {
            self.frames.last().and_then(|f| f.search_index).map(|i| i + 1)
        } else {
            None
        };
        let mut candidates = Vec::new();
        if quoted && resume.is_none() {
            let current = self.frames.last();
            let dir = current
                .and_then(|f| f.path.parent().map(Path::to_path_buf))
                .unwrap_or_default();
            let system = current.is_some_and(|f| self.sources.is_system(f.file));
            candidates.push((dir.join(&header), system, None));
        }
        let dirs = self
            .options
            .include_paths
            .iter()
            .map(|d| (d, false))
            .chain(self.options.system_include_paths.iter().map(|d| (d, true)));
        for (i, (dir, system)) in dirs.enumerate().skip(resume.unwrap_or(0)) {
            candidates.push((dir.join(&header), system, Some(i)));
        }
        for (path, system, index) in candidates {
            if let Some(text) = self.provider.load(&path) {
                self.push_file(path, text, system, index);
                return Ok(());
            }
        }
        Err(PpError::MissingInclude {
            file: self.file_name(loc.file),
            location: loc,
            header,
        })
    }

    // ---- expansion ----------------------------------------------------

    /// Fully expand `items` on their own, as for a macro argument.
    fn expand_isolated(&mut self, items: Vec<Item>, ctx: Option<(InvocationId, u32)>) -> Result<Vec<Item>, PpError> {
        self.arg_nesting += 1;
        if self.arg_nesting > MAX_ARG_NESTING {
            self.arg_nesting -= 1;
            let loc = tokens_of(&items).next().map(|t| t.loc).unwrap_or(Location::new(FileId::COMMAND_LINE, 0, 0, 0));
            return Err(self.expansion_error(loc, "macro arguments nested too deeply"));
        }
        let mut input = Input::isolated(items);
        let mut out = Vec::new();
        let r = self.expand(&mut input, &mut out, ctx, false);
        self.arg_nesting -= 1;
        r.map(|_| out)
    }

    fn expand(
        &mut self,
        input: &mut Input,
        out: &mut Vec<Item>,
        ctx: Option<(InvocationId, u32)>,
        top: bool,
    ) -> Result<(), PpError> {
        while let Some(item) = self.next_item(input)? {
            match item {
                Item::Tok(tok) => {
                    if let Some(def) = self.expandable(&tok) {
                        match def.kind {
                            MacroKind::ObjectLike => {
                                let items = self.expand_object(&tok, &def, ctx)?;
                                input.prepend(items);
                                continue;
                            }
                            MacroKind::FunctionLike => {
                                if let Some((args, rparen, anchors)) = self.collect_args(input, &tok, &def)? {
                                    // Anchors skipped while looking for `(` still mark positions.
                                    let mut items = anchors;
                                    items.extend(self.expand_function(&tok, &def, args, &rparen, ctx)?);
                                    input.prepend(items);
                                    continue;
                                }
                            }
                        }
                    }
                    if top {
                        self.emitted += 1;
                    }
                    out.push(Item::Tok(tok));
                }
                Item::Anchor(step) if top => {
                    self.anchors.entry((step.invocation, step.origin)).or_insert(self.emitted);
                }
                Item::Pad(_) | Item::Placemarker if top => {}
                other => out.push(other),
            }
        }
        Ok(())
    }

    fn expandable(&self, tok: &Token) -> Option<Arc<MacroDefinition>> {
        if !tok.is_ident() || tok.hide.contains(&tok.text) {
            return None;
        }
        self.macros
            .get(&tok.text)
            .map(|id| self.definitions[id.0 as usize].clone())
    }

    /// Look for `(` after a function-like macro name and gather the
    /// arguments. Returns `None`, leaving the input as it was apart from
    /// dropped padding, when the name is not followed by `(`.
    fn collect_args(
        &mut self,
        input: &mut Input,
        name: &Token,
        def: &MacroDefinition,
    ) -> Result<Option<CollectedArgs>, PpError> {
        let mut skipped = Vec::new();
        loop {
            if input.buf.is_empty() && input.files && self.at_directive() {
                self.restore(input, skipped, None);
                return Ok(None);
            }
            match self.next_item(input)? {
                None => {
                    self.restore(input, skipped, None);
                    return Ok(None);
                }
                Some(Item::Tok(t)) if t.is("(") => break,
                Some(Item::Tok(t)) => {
                    self.restore(input, skipped, Some(t));
                    return Ok(None);
                }
                Some(other) => skipped.push(other),
            }
        }
        let anchors: Vec<Item> = skipped
            .into_iter()
            .filter(|it| matches!(it, Item::Anchor(_)))
            .collect();
        let mut args: Vec<Vec<Item>> = vec![Vec::new()];
        let n = def.params.len();
        let mut depth = 0usize;
        let rparen = loop {
            let Some(item) = self.next_item(input)? else {
                return Err(self.expansion_error(
                    name.loc,
                    format!("unterminated argument list invoking macro \"{}\"", def.name),
                ));
            };
            if let Item::Tok(t) = &item {
                if t.is("(") {
                    depth += 1;
                } else if t.is(")") {
                    if depth == 0 {
                        break t.clone();
                    }
                    depth -= 1;
                } else if t.is(",") && depth == 0 && !(def.variadic && args.len() == n) {
                    args.push(Vec::new());
                    continue;
                }
            }
            args.last_mut().unwrap().push(item);
        };
        for a in &mut args {
            while matches!(a.first(), Some(Item::Pad(_))) {
                a.remove(0);
            }
            while matches!(a.last(), Some(Item::Pad(_))) {
                a.pop();
            }
        }

        let given = args.len();
        if n == 0 {
            if given == 1 && tokens_of(&args[0]).next().is_none() {
                args.clear();
            } else {
                return Err(self.expansion_error(
                    name.loc,
                    format!("macro \"{}\" passed {given} arguments, but takes just 0", def.name),
                ));
            }
        } else if def.variadic && given == n - 1 {
            args.push(Vec::new());
        } else if given < n {
            return Err(self.expansion_error(
                name.loc,
                format!("macro \"{}\" requires {n} arguments, but only {given} given", def.name),
            ));
        } else if given > n {
            return Err(self.expansion_error(
                name.loc,
                format!("macro \"{}\" passed {given} arguments, but takes just {n}", def.name),
            ));
        }
        Ok(Some((args, rparen, anchors)))
    }

    fn restore(&self, input: &mut Input, skipped: Vec<Item>, next: Option<Token>) {
        let last_pad = skipped.iter().rev().find(|it| matches!(it, Item::Pad(_))).cloned();
        let mut back: Vec<Item> = skipped
            .into_iter()
            .filter(|it| matches!(it, Item::Anchor(_)))
            .collect();
        back.extend(last_pad);
        back.extend(next.map(Item::Tok));
        input.prepend(back);
    }

    fn new_invocation(
        &mut self,
        name: &Token,
        def: &MacroDefinition,
        args: &[Vec<Item>],
        rparen: Option<&Token>,
        ctx: Option<(InvocationId, u32)>,
    ) -> InvocationId {
        if !self.recording {
            return InvocationId::DIRECTIVE;
        }
        let nesting = match name.provenance.expanded_from() {
            Some(step) => match step.origin {
                Origin::Body => Nesting::Body(step.invocation),
                Origin::Arg { index, .. } => Nesting::Argument(step.invocation, index),
            },
            None => match ctx {
                Some((p, k)) => Nesting::Argument(p, k),
                None => Nesting::TopLevel,
            },
        };
        let last = rparen.unwrap_or(name);
        let spelled = (name.provenance.is_spelled()
            && last.provenance.is_spelled()
            && name.loc.file == last.loc.file
            && name.loc.offset <= last.loc.offset)
            .then(|| SpelledSpan {
                file: name.loc.file,
                start: name.loc.offset,
                end: last.loc.offset + last.len,
            });
        let id = InvocationId(self.invocations.len() as u32);
        self.invocations.push(InvocationRecord {
            id,
            name: def.name.clone(),
            definition: def.id,
            location: name.loc,
            spelled,
            raw_args: args.iter().map(|a| tokens_of(a).cloned().collect()).collect(),
            expansion: 0..0,
            arg_ranges: vec![None; args.len()],
            arg_occurrences: vec![Vec::new(); args.len()],
            nesting,
        });
        id
    }

    fn wrap(id: InvocationId, name: &Token, items: Vec<Item>) -> Vec<Item> {
        let mut v = Vec::with_capacity(items.len() + 3);
        v.push(Item::Anchor(ExpansionStep {
            invocation: id,
            origin: Origin::Body,
        }));
        v.push(Item::Pad(Some(name.leading_space)));
        v.extend(items);
        v.push(Item::Pad(None));
        v
    }

    fn expand_object(
        &mut self,
        name: &Token,
        def: &MacroDefinition,
        ctx: Option<(InvocationId, u32)>,
    ) -> Result<Vec<Item>, PpError> {
        let hs = name.hide.with(&def.name);
        let id = self.new_invocation(name, def, &[], None, ctx);
        let items = self.substitute(name, def, id, &[], &hs)?;
        Ok(Self::wrap(id, name, items))
    }

    fn expand_function(
        &mut self,
        name: &Token,
        def: &MacroDefinition,
        args: Vec<Vec<Item>>,
        rparen: &Token,
        ctx: Option<(InvocationId, u32)>,
    ) -> Result<Vec<Item>, PpError> {
        let hs = name.hide.intersect(&rparen.hide).with(&def.name);
        let id = self.new_invocation(name, def, &args, Some(rparen), ctx);
        let items = self.substitute(name, def, id, &args, &hs)?;
        Ok(Self::wrap(id, name, items))
    }

    fn substitute(
        &mut self,
        name: &Token,
        def: &MacroDefinition,
        id: InvocationId,
        args: &[Vec<Item>],
        hs: &HideSet,
    ) -> Result<Vec<Item>, PpError> {
        let body = &def.body;
        let func = def.kind == MacroKind::FunctionLike;
        let body_prov: Provenance = name.provenance.push(ExpansionStep {
            invocation: id,
            origin: Origin::Body,
        });
        let from_body = |t: &Token| {
            let mut t = t.clone();
            t.provenance = body_prov.clone();
            t.hide = hs.clone();
            t.line_start = false;
            t
        };
        let mut expanded: Vec<Option<Vec<Item>>> = vec![None; args.len()];
        let mut occurrences = vec![0u32; args.len()];
        let mut out: Vec<Item> = Vec::new();
        let mut paste_next = false;
        let mut i = 0;
        while i < body.len() {
            let t = &body[i];
            if t.kind == TokenKind::HashHash {
                paste_next = true;
                i += 1;
                continue;
            }
            let param = if func && t.is_ident() { def.param_index(&t.text) } else { None };
            let operand: Vec<Item> = if func && t.kind == TokenKind::Hash {
                let p = def.param_index(&body[i + 1].text).expect("checked at definition");
                let mut s = Token::new(TokenKind::Str, &stringify(&args[p]), t.loc);
                s.leading_space = t.leading_space;
                i += 2;
                vec![Item::Tok(from_body(&s))]
            } else if let Some(p) = param {
                i += 1;
                let pasted = paste_next || body.get(i).is_some_and(|n| n.kind == TokenKind::HashHash);
                if pasted {
                    let toks: Vec<Item> = tokens_of(&args[p])
                        .map(|a| {
                            let mut a = a.clone();
                            a.provenance = body_prov.clone();
                            a.hide = a.hide.union(hs);
                            a.line_start = false;
                            Item::Tok(a)
                        })
                        .collect();
                    if toks.is_empty() {
                        vec![Item::Placemarker]
                    } else {
                        toks
                    }
                } else {
                    if expanded[p].is_none() {
                        expanded[p] = Some(self.expand_isolated(args[p].clone(), Some((id, p as u32)))?);
                    }
                    let step = ExpansionStep {
                        invocation: id,
                        origin: Origin::Arg {
                            index: p as u32,
                            occurrence: occurrences[p],
                        },
                    };
                    occurrences[p] += 1;
                    let mut v = Vec::new();
                    if i > 1 {
                        v.push(Item::Pad(Some(t.leading_space)));
                    }
                    v.push(Item::Anchor(step));
                    for it in expanded[p].as_ref().unwrap() {
                        match it {
                            Item::Tok(a) => {
                                let mut a = a.clone();
                                a.provenance = a.provenance.push(step);
                                a.hide = a.hide.union(hs);
                                a.line_start = false;
                                v.push(Item::Tok(a));
                            }
                            Item::Placemarker => {}
                            other => v.push(other.clone()),
                        }
                    }
                    v.push(Item::Pad(None));
                    v
                }
            } else {
                i += 1;
                vec![Item::Tok(from_body(t))]
            };
            if paste_next {
                paste_next = false;
                self.paste(&mut out, operand, &body_prov, hs)?;
            } else {
                out.extend(operand);
            }
        }
        out.retain(|it| !matches!(it, Item::Placemarker));
        if self.recording {
            let rec = &mut self.invocations[id.0 as usize];
            for (k, n) in occurrences.iter().enumerate() {
                rec.arg_occurrences[k] = vec![0..0; *n as usize];
            }
        }
        Ok(out)
    }

    fn paste(&self, out: &mut Vec<Item>, mut rhs: Vec<Item>, prov: &Provenance, hs: &HideSet) -> Result<(), PpError> {
        let first = rhs.remove(0);
        let joined = match (out.pop(), first) {
            (None | Some(Item::Placemarker), x) => x,
            (Some(x), Item::Placemarker) => x,
            (Some(Item::Tok(a)), Item::Tok(b)) => {
                let text = format!("{}{}", a.text, b.text);
                let Some(mut t) = lex_single(&text) else {
                    return Err(self.expansion_error(
                        a.loc,
                        format!(
                            "pasting \"{}\" and \"{}\" does not give a valid preprocessing token",
                            a.text, b.text
                        ),
                    ));
                };
                t.loc = a.loc;
                t.len = a.len;
                t.leading_space = a.leading_space;
                t.provenance = prov.clone();
                t.hide = hs.clone();
                Item::Tok(t)
            }
            (Some(x), y) => {
                out.push(x);
                y
            }
        };
        out.push(joined);
        out.extend(rhs);
        Ok(())
    }

    // ---- output ranges -----------------------------------------------

    fn compute_ranges(&mut self, output: &[Token]) {
        #[derive(Clone, Copy)]
        struct Run {
            start: usize,
            end: usize,
            closed: bool,
        }
        fn extend<K: std::hash::Hash + Eq>(runs: &mut HashMap<K, Run>, key: K, i: usize) {
            let r = runs.entry(key).or_insert(Run {
                start: i,
                end: i,
                closed: false,
            });
            if r.closed {
                return;
            }
            if r.end == i {
                r.end = i + 1;
            } else if r.end < i {
                r.closed = true;
            }
        }

        let mut inv_runs: HashMap<InvocationId, Run> = HashMap::new();
        let mut arg_runs: HashMap<(InvocationId, u32, u32), Run> = HashMap::new();
        for (i, tok) in output.iter().enumerate() {
            for step in tok.provenance.steps() {
                extend(&mut inv_runs, step.invocation, i);
                if let Origin::Arg { index, occurrence } = step.origin {
                    extend(&mut arg_runs, (step.invocation, index, occurrence), i);
                }
            }
        }

        for k in 0..self.invocations.len() {
            let id = InvocationId(k as u32);
            let range = match inv_runs.get(&id) {
                Some(r) => r.start..r.end,
                None => {
                    let pos = self
                        .anchors
                        .get(&(id, Origin::Body))
                        .copied()
                        .or_else(|| {
                            self.invocations[k]
                                .parent()
                                .map(|p| self.invocations[p.0 as usize].expansion.start)
                        })
                        .unwrap_or(0);
                    pos..pos
                }
            };
            let rec = &mut self.invocations[k];
            rec.expansion = range.clone();
            for (a, occs) in rec.arg_occurrences.iter_mut().enumerate() {
                for (o, slot) in occs.iter_mut().enumerate() {
                    let key = (id, a as u32, o as u32);
                    *slot = match arg_runs.get(&key) {
                        Some(r) => r.start..r.end,
                        None => {
                            let origin = Origin::Arg {
                                index: a as u32,
                                occurrence: o as u32,
                            };
                            let pos = self.anchors.get(&(id, origin)).copied().unwrap_or(range.start);
                            pos..pos
                        }
                    };
                }
            }
            rec.arg_ranges = rec.arg_occurrences.iter().map(|o| o.first().cloned()).collect();
        }
    }
}
