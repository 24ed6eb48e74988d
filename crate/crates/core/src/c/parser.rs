//! Recursive-descent parser for C99 plus the GNU extensions common in
//! system code. Names are resolved and expressions typed while parsing,
//! which is also how typedef names are told apart from identifiers.
//!
//! Unparseable statements and external declarations become `Skipped` nodes;
//! the only fatal error is a brace imbalance at file scope.

use std::collections::HashMap;

use crate::lex::{Token, TokenKind};
use crate::pp::Ordinal;

use super::ast::{Ast, BinaryOp, Node, NodeId, NodeKind, UnaryOp};
use super::sema::{Decl, DeclKind, ScopeKind, Semantics};
use super::types::{
    float_literal_type, int_literal_type, int_literal_value, is_float_literal, usual_arithmetic,
    FloatKind, FunctionType, IntKind, Type, INT,
};
use super::{DeclId, Diagnostic, ParseError};

/// Marker for a recoverable syntax error; details go to the diagnostics.
#[derive(Debug)]
struct Stop;

type PResult<T> = Result<T, Stop>;

#[derive(Default)]
struct Scope {
    kind: Option<ScopeKind>,
    ordinary: HashMap<String, DeclId>,
    tags: HashMap<String, DeclId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Storage {
    Typedef,
    Extern,
    Static,
    Auto,
    Register,
}

#[derive(Default)]
struct BasicSpec {
    void: bool,
    bool_: bool,
    char_: bool,
    short: bool,
    int: bool,
    long: u8,
    float: bool,
    double: bool,
    signed: bool,
    unsigned: bool,
    complex: bool,
    int128: bool,
}

impl BasicSpec {
    fn any(&self) -> bool {
        self.void
            || self.bool_
            || self.char_
            || self.short
            || self.int
            || self.long > 0
            || self.float
            || self.double
            || self.signed
            || self.unsigned
            || self.complex
            || self.int128
    }

    fn resolve(&self) -> Type {
        if self.void {
            return Type::Void;
        }
        if self.bool_ {
            return Type::Int(IntKind::Bool);
        }
        if self.float || self.double {
            let k = if self.float {
                FloatKind::Float
            } else if self.long > 0 {
                FloatKind::LongDouble
            } else {
                FloatKind::Double
            };
            return if self.complex { Type::Complex(k) } else { Type::Float(k) };
        }
        if self.complex && !self.char_ && !self.short && !self.int && self.long == 0 {
            return Type::Complex(FloatKind::Double);
        }
        let k = if self.char_ {
            if self.unsigned {
                IntKind::UChar
            } else if self.signed {
                IntKind::SChar
            } else {
                IntKind::Char
            }
        } else if self.int128 {
            if self.unsigned {
                IntKind::UInt128
            } else {
                IntKind::Int128
            }
        } else if self.short {
            if self.unsigned {
                IntKind::UShort
            } else {
                IntKind::Short
            }
        } else if self.long >= 2 {
            if self.unsigned {
                IntKind::ULongLong
            } else {
                IntKind::LongLong
            }
        } else if self.long == 1 {
            if self.unsigned {
                IntKind::ULong
            } else {
                IntKind::Long
            }
        } else if self.unsigned {
            IntKind::UInt
        } else {
            IntKind::Int
        };
        Type::Int(k)
    }
}

struct Specs {
    storage: Option<Storage>,
    ty: Type,
    type_refs: Vec<DeclId>,
    first: usize,
    last: usize,
    type_span: Option<(usize, usize)>,
    children: Vec<NodeId>,
}

#[derive(Debug, Clone)]
enum Deriv {
    Pointer,
    Array(Option<u64>),
    Function(FunctionType),
}

struct Declarator {
    name: Option<usize>,
    derivs: Vec<Deriv>,
    first: usize,
    /// One past the last token; equal to `first` for an empty declarator.
    end: usize,
    /// Parameters of the function declarator attached to the name.
    params: Option<Vec<DeclId>>,
    children: Vec<NodeId>,
    /// Old-style identifier list.
    kr: bool,
}

fn apply(base: Type, derivs: &[Deriv]) -> Type {
    let mut t = base;
    for d in derivs {
        t = match d {
            Deriv::Pointer => Type::pointer_to(t),
            Deriv::Array(n) => Type::Array(Box::new(t), *n),
            Deriv::Function(f) => {
                let mut f = f.clone();
                f.ret = t;
                Type::Function(Box::new(f))
            }
        };
    }
    t
}

/// Parameter type adjustment: arrays and functions become pointers.
fn adjust_param(t: Type) -> Type {
    match t {
        Type::Array(e, _) => Type::Pointer(e),
        Type::Function(_) => Type::pointer_to(t),
        t => t,
    }
}

const QUALIFIERS: &[&str] = &[
    "const", "volatile", "restrict", "__restrict", "__restrict__", "__const", "__const__",
    "__volatile", "__volatile__", "_Atomic", "_Nonnull", "_Nullable", "__capability",
];

const FUNCTION_SPECIFIERS: &[&str] = &[
    "inline", "__inline", "__inline__", "_Noreturn", "__forceinline",
];

const BASIC_TYPES: &[&str] = &[
    "void", "_Bool", "char", "short", "int", "long", "float", "double", "signed", "__signed",
    "__signed__", "unsigned", "_Complex", "__complex__", "__int128", "__int128_t", "__uint128_t",
];

const ATTRIBUTE_KEYWORDS: &[&str] = &["__attribute__", "__attribute", "__declspec", "_Alignas", "__asm__", "__asm", "asm"];

pub(crate) struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    ast: Ast,
    decls: Vec<Decl>,
    scopes: Vec<Scope>,
    diagnostics: Vec<Diagnostic>,
}

impl<'t> Parser<'t> {
    pub(crate) fn new(toks: &'t [Token]) -> Self {
        let toks = match toks.last() {
            Some(t) if t.kind == TokenKind::Eof => &toks[..toks.len() - 1],
            _ => toks,
        };
        Parser {
            toks,
            pos: 0,
            ast: Ast::default(),
            decls: Vec::new(),
            scopes: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub(crate) fn finish(self) -> (Ast, Semantics, Vec<Diagnostic>) {
        (self.ast, Semantics { decls: self.decls }, self.diagnostics)
    }

    // ---- token helpers ------------------------------------------------

    fn peek(&self) -> Option<&'t Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&'t Token> {
        self.toks.get(self.pos + n)
    }

    fn at(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.is(text))
    }

    fn at_any(&self, set: &[&str]) -> bool {
        self.peek().is_some_and(|t| set.iter().any(|s| t.is(s)))
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.at(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error<T>(&mut self, message: impl Into<String>) -> PResult<T> {
        let message = message.into();
        let found = self.peek().map(|t| t.text.to_string()).unwrap_or_else(|| "end of input".into());
        self.diagnostics.push(Diagnostic {
            token: self.pos,
            message: format!("{message} (found `{found}`)"),
        });
        Err(Stop)
    }

    fn expect(&mut self, text: &str) -> PResult<usize> {
        if self.at(text) {
            self.pos += 1;
            Ok(self.pos - 1)
        } else {
            self.error(format!("expected `{text}`"))
        }
    }

    fn expect_ident(&mut self) -> PResult<usize> {
        match self.peek() {
            Some(t) if t.is_ident() => {
                self.pos += 1;
                Ok(self.pos - 1)
            }
            _ => self.error("expected identifier"),
        }
    }

    fn text(&self, idx: usize) -> &'t str {
        &self.toks[idx].text
    }

    /// Skip `__attribute__((...))`, `__asm__("...")` and friends.
    fn skip_attributes(&mut self) -> PResult<()> {
        loop {
            if self.at_any(ATTRIBUTE_KEYWORDS) {
                self.pos += 1;
                while self.at_any(&["volatile", "__volatile__", "goto", "inline"]) {
                    self.pos += 1;
                }
                if self.at("(") {
                    self.skip_balanced()?;
                }
            } else if self.at("__extension__") {
                self.pos += 1;
            } else {
                return Ok(());
            }
        }
    }

    /// Skip a parenthesized group starting at the current `(`.
    fn skip_balanced(&mut self) -> PResult<()> {
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            self.pos += 1;
            if t.is("(") || t.is("[") || t.is("{") {
                depth += 1;
            } else if t.is(")") || t.is("]") || t.is("}") {
                depth -= 1;
                if depth == 0 {
                    return Ok(());
                }
            }
        }
        self.error("unbalanced parentheses")
    }

    // ---- nodes, scopes, declarations ------------------------------------

    fn mk(&mut self, kind: NodeKind, children: Vec<NodeId>, first: usize, last: usize) -> NodeId {
        let id = NodeId(self.ast.nodes.len() as u32);
        for &c in &children {
            self.ast.nodes[c.0 as usize].parent = Some(id);
        }
        self.ast.nodes.push(Node {
            kind,
            children,
            parent: None,
            first,
            last,
            ty: None,
            decl: None,
            type_refs: Vec::new(),
            bit_field: false,
        });
        id
    }

    fn mk_expr(&mut self, kind: NodeKind, children: Vec<NodeId>, first: usize, last: usize, ty: Type) -> NodeId {
        let id = self.mk(kind, children, first, last);
        self.ast.nodes[id.0 as usize].ty = Some(ty);
        id
    }

    fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.ast.nodes[id.0 as usize]
    }

    fn first(&self, id: NodeId) -> usize {
        self.ast.node(id).first
    }

    fn last(&self, id: NodeId) -> usize {
        self.ast.node(id).last
    }

    fn ty(&self, id: NodeId) -> Type {
        self.ast.node(id).ty.clone().unwrap_or(Type::Error)
    }

    fn push_scope(&mut self, kind: ScopeKind) {
        self.scopes.push(Scope {
            kind: Some(kind),
            ..Scope::default()
        });
    }

    fn pop_scope(&mut self) {
        self.scopes.pop();
    }

    fn scope_kind(&self) -> ScopeKind {
        self.scopes.last().and_then(|s| s.kind).unwrap_or(ScopeKind::File)
    }

    fn lookup(&self, name: &str) -> Option<DeclId> {
        self.scopes.iter().rev().find_map(|s| s.ordinary.get(name).copied())
    }

    fn lookup_tag(&self, name: &str) -> Option<DeclId> {
        self.scopes.iter().rev().find_map(|s| s.tags.get(name).copied())
    }

    fn is_typedef_name(&self, t: &Token) -> bool {
        if t.text.as_ref() == "__builtin_va_list" {
            return true;
        }
        t.is_ident()
            && self
                .lookup(&t.text)
                .is_some_and(|d| self.decls[d.0 as usize].kind == DeclKind::Typedef)
    }

    fn new_decl(&mut self, name: &str, kind: DeclKind, ty: Type, node: NodeId, token: usize, scope: ScopeKind) -> DeclId {
        let id = DeclId(self.decls.len() as u32);
        self.decls.push(Decl {
            id,
            name: name.to_string(),
            kind,
            ty,
            node,
            token,
            scope,
            ordinal: Ordinal::for_token(token),
            bit_field: false,
            fields: Vec::new(),
            complete: false,
        });
        id
    }

    /// Declare an ordinary identifier in the innermost scope, reusing an
    /// earlier declaration of the same entity.
    fn declare(&mut self, name_idx: usize, kind: DeclKind, ty: Type, node: NodeId) -> DeclId {
        let name = self.text(name_idx);
        let scope = self.scope_kind();
        if let Some(&prev) = self.scopes.last().and_then(|s| s.ordinary.get(name)) {
            let p = &mut self.decls[prev.0 as usize];
            if p.kind == kind {
                // Keep the most informative type.
                let richer = match (&p.ty.canonical(), &ty.canonical()) {
                    (Type::Array(_, None), Type::Array(_, Some(_))) => true,
                    (Type::Function(a), Type::Function(b)) => a.unprototyped && !b.unprototyped,
                    _ => false,
                };
                if richer {
                    p.ty = ty;
                }
                return prev;
            }
        }
        let id = self.new_decl(name, kind, ty, node, name_idx, scope);
        if let Some(s) = self.scopes.last_mut() {
            s.ordinary.insert(name.to_string(), id);
        }
        id
    }

    /// Block-scope `extern` and function declarations name file-scope
    /// entities.
    fn declare_external(&mut self, name_idx: usize, kind: DeclKind, ty: Type, node: NodeId) -> DeclId {
        let name = self.text(name_idx);
        let id = match self.scopes[0].ordinary.get(name) {
            Some(&d) if self.decls[d.0 as usize].kind == kind => d,
            _ => self.new_decl(name, kind, ty, node, name_idx, ScopeKind::File),
        };
        if let Some(s) = self.scopes.last_mut() {
            s.ordinary.insert(name.to_string(), id);
        }
        id
    }

    fn mark(&self) -> (usize, usize, usize) {
        (self.ast.nodes.len(), self.decls.len(), self.scopes.len())
    }

    fn rollback(&mut self, mark: (usize, usize, usize)) {
        let (nodes, decls, scopes) = mark;
        self.ast.nodes.truncate(nodes);
        self.decls.truncate(decls);
        self.scopes.truncate(scopes.max(1));
        for s in &mut self.scopes {
            s.ordinary.retain(|_, d| (d.0 as usize) < decls);
            s.tags.retain(|_, d| (d.0 as usize) < decls);
        }
        for d in &mut self.decls {
            d.fields.retain(|f| (f.0 as usize) < decls);
        }
    }

    // ---- translation unit ---------------------------------------------

    pub(crate) fn translation_unit(&mut self) -> Result<NodeId, ParseError> {
        // Reserve the root so it gets id 0.
        let root = self.mk(NodeKind::TranslationUnit, Vec::new(), 0, self.toks.len().saturating_sub(1));
        self.push_scope(ScopeKind::File);
        let mut items = Vec::new();
        while self.pos < self.toks.len() {
            if self.eat(";") {
                continue;
            }
            let start = self.pos;
            let mark = self.mark();
            match self.external_declaration() {
                Ok(n) => items.push(n),
                Err(Stop) => {
                    self.rollback(mark);
                    self.pos = start;
                    self.skip_external()?;
                    let last = self.pos.max(start + 1) - 1;
                    items.push(self.mk(NodeKind::Skipped, Vec::new(), start, last));
                }
            }
        }
        for &c in &items {
            self.ast.nodes[c.0 as usize].parent = Some(root);
        }
        self.ast.nodes[root.0 as usize].children = items;
        Ok(root)
    }

    /// Skip a malformed external declaration.
    fn skip_external(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        let mut parens = 0i64;
        let mut braces = 0i64;
        while let Some(t) = self.peek() {
            self.pos += 1;
            if t.is("(") || t.is("[") {
                parens += 1;
            } else if t.is(")") || t.is("]") {
                parens -= 1;
            } else if t.is("{") {
                braces += 1;
            } else if t.is("}") {
                braces -= 1;
                if braces < 0 {
                    return Err(ParseError::Unbalanced {
                        token: self.pos - 1,
                        message: "unmatched `}` at file scope".into(),
                    });
                }
                if braces == 0 {
                    // A function body ends the declaration; an initializer
                    // or tag body does not.
                    let open = self.matching_open(self.pos - 1);
                    if open.is_some_and(|o| o > start && self.toks[o - 1].is(")")) && !self.at(";") {
                        return Ok(());
                    }
                }
            } else if t.is(";") && braces == 0 && parens <= 0 {
                return Ok(());
            }
        }
        if braces > 0 {
            return Err(ParseError::Unbalanced {
                token: start,
                message: "unterminated `{` at end of input".into(),
            });
        }
        Ok(())
    }

    fn matching_open(&self, close: usize) -> Option<usize> {
        let mut depth = 0usize;
        for i in (0..=close).rev() {
            let t = &self.toks[i];
            if t.is("}") {
                depth += 1;
            } else if t.is("{") {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
        }
        None
    }

    fn external_declaration(&mut self) -> PResult<NodeId> {
        if self.at("_Static_assert") {
            return self.static_assert();
        }
        if self.at_any(&["asm", "__asm__", "__asm"]) {
            let first = self.pos;
            self.skip_attributes()?;
            let last = self.expect(";")?;
            return Ok(self.mk(NodeKind::Asm, Vec::new(), first, last));
        }
        let first = self.pos;
        let specs = match self.decl_specs()? {
            Some(s) => s,
            None => {
                // Old-style implicit int: `main() { ... }`.
                if self.peek().is_some_and(|t| t.is_ident()) && self.peek_at(1).is_some_and(|t| t.is("(")) {
                    Specs {
                        storage: None,
                        ty: INT,
                        type_refs: Vec::new(),
                        first,
                        last: first,
                        type_span: None,
                        children: Vec::new(),
                    }
                } else {
                    return self.error("expected a declaration");
                }
            }
        };
        self.declaration_rest(first, specs, true)
    }

    fn static_assert(&mut self) -> PResult<NodeId> {
        let first = self.pos;
        self.pos += 1;
        self.expect("(")?;
        let cond = self.assign_expr()?;
        let mut children = vec![cond];
        if self.eat(",") {
            children.push(self.string_literal()?);
        }
        self.expect(")")?;
        let last = self.expect(";")?;
        Ok(self.mk(NodeKind::StaticAssert, children, first, last))
    }

    fn type_spec_node(&mut self, specs: &Specs) -> NodeId {
        let (first, last) = specs.type_span.unwrap_or((specs.first, specs.last));
        let n = self.mk(NodeKind::TypeSpec, specs.children.clone(), first, last);
        let node = self.node_mut(n);
        node.ty = Some(specs.ty.clone());
        node.type_refs = specs.type_refs.clone();
        n
    }

    /// Everything after the declaration specifiers: declarators,
    /// initializers and `;`, or a function body.
    fn declaration_rest(&mut self, first: usize, specs: Specs, file_scope: bool) -> PResult<NodeId> {
        let spec_node = self.type_spec_node(&specs);
        let mut children = vec![spec_node];
        if self.at(";") {
            let last = self.expect(";")?;
            return Ok(self.mk(NodeKind::Declaration, children, first, last));
        }
        let mut first_decl = true;
        loop {
            let d = self.declarator(false)?;
            self.skip_attributes()?;
            let ty = apply(specs.ty.clone(), &d.derivs);
            let Some(name_idx) = d.name else {
                return self.error("expected declarator name");
            };
            let is_function = matches!(ty, Type::Function(_));
            if first_decl && file_scope && is_function && (self.at("{") || (d.kr && !self.at(";") && !self.at(","))) {
                return self.function_definition(first, spec_node, specs.storage, d, ty, name_idx);
            }
            first_decl = false;

            let decl_node = self.mk(NodeKind::InitDeclarator, d.children.clone(), d.first, d.end.max(d.first + 1) - 1);
            let kind = match (specs.storage, is_function) {
                (Some(Storage::Typedef), _) => DeclKind::Typedef,
                (_, true) => DeclKind::Function,
                _ => DeclKind::Var,
            };
            let id = if !file_scope && (kind == DeclKind::Function || specs.storage == Some(Storage::Extern)) {
                self.declare_external(name_idx, kind, ty.clone(), decl_node)
            } else {
                self.declare(name_idx, kind, ty.clone(), decl_node)
            };
            self.node_mut(decl_node).decl = Some(id);
            self.node_mut(decl_node).ty = Some(ty.clone());

            if self.eat("=") {
                let init = self.initializer(&ty)?;
                let last = self.last(init);
                let node = self.node_mut(decl_node);
                node.children.push(init);
                node.last = last;
                self.node_mut(init).parent = Some(decl_node);
                // An initializer can complete an array's size.
                if let (Type::Array(e, None), NodeKind::InitList) = (ty.canonical(), self.ast.kind(init).clone()) {
                    let n = self.ast.children(init).len() as u64;
                    let d = &mut self.decls[id.0 as usize];
                    if matches!(d.ty.canonical(), Type::Array(_, None)) {
                        d.ty = Type::Array(e.clone(), Some(n));
                    }
                } else if let (Type::Array(e, None), NodeKind::StrLit) = (ty.canonical(), self.ast.kind(init).clone()) {
                    if let Type::Array(_, Some(n)) = self.ty(init) {
                        let d = &mut self.decls[id.0 as usize];
                        d.ty = Type::Array(e.clone(), Some(n));
                    }
                }
            }
            self.skip_attributes()?;
            children.push(decl_node);
            if self.eat(",") {
                continue;
            }
            let last = self.expect(";")?;
            return Ok(self.mk(NodeKind::Declaration, children, first, last));
        }
    }

    fn function_definition(
        &mut self,
        first: usize,
        spec_node: NodeId,
        _storage: Option<Storage>,
        d: Declarator,
        ty: Type,
        name_idx: usize,
    ) -> PResult<NodeId> {
        let decl_node = self.mk(NodeKind::InitDeclarator, d.children.clone(), d.first, d.end.max(d.first + 1) - 1);
        self.node_mut(decl_node).ty = Some(ty.clone());
        // Placeholder node id until the definition node exists.
        let fid = self.declare(name_idx, DeclKind::Function, ty.clone(), decl_node);
        self.node_mut(decl_node).decl = Some(fid);

        self.push_scope(ScopeKind::Param);
        let params = d.params.clone().unwrap_or_default();
        for &p in &params {
            let name = self.decls[p.0 as usize].name.clone();
            if !name.is_empty() {
                self.scopes.last_mut().unwrap().ordinary.insert(name, p);
            }
        }
        let mut children = vec![spec_node, decl_node];
        // Old-style parameter declarations.
        while !self.at("{") {
            let dfirst = self.pos;
            let Some(specs) = self.decl_specs()? else {
                self.pop_scope();
                return self.error("expected `{` for function body");
            };
            let spec = self.type_spec_node(&specs);
            let mut kids = vec![spec];
            loop {
                let pd = self.declarator(false)?;
                let pty = adjust_param(apply(specs.ty.clone(), &pd.derivs));
                if let Some(n) = pd.name {
                    let pnode = self.mk(NodeKind::InitDeclarator, pd.children, pd.first, pd.end.max(pd.first + 1) - 1);
                    if let Some(&pid) = params.iter().find(|&&p| self.decls[p.0 as usize].name == self.text(n)) {
                        self.decls[pid.0 as usize].ty = pty.clone();
                        self.node_mut(pnode).decl = Some(pid);
                    }
                    self.node_mut(pnode).ty = Some(pty);
                    kids.push(pnode);
                }
                if !self.eat(",") {
                    break;
                }
            }
            let last = self.expect(";")?;
            children.push(self.mk(NodeKind::Declaration, kids, dfirst, last));
        }
        if d.kr {
            let ptypes: Vec<Type> = params.iter().map(|p| self.decls[p.0 as usize].ty.clone()).collect();
            if let Type::Function(f) = &mut self.decls[fid.0 as usize].ty {
                f.params = ptypes;
            }
        }
        let body = self.compound();
        self.pop_scope();
        let body = body?;
        children.push(body);
        let last = self.last(body);
        let def = self.mk(NodeKind::FunctionDef, children, first, last);
        self.node_mut(def).decl = Some(fid);
        self.node_mut(def).ty = Some(ty);
        if self.decls[fid.0 as usize].node == decl_node {
            self.decls[fid.0 as usize].node = def;
        }
        Ok(def)
    }

    // ---- declaration specifiers ---------------------------------------

    fn starts_type_name(&self, t: &Token) -> bool {
        if !t.is_ident() {
            return false;
        }
        let s = &*t.text;
        BASIC_TYPES.contains(&s)
            || QUALIFIERS.contains(&s)
            || matches!(s, "struct" | "union" | "enum" | "typeof" | "__typeof__" | "__typeof")
            || self.is_typedef_name(t)
    }

    fn starts_declaration(&self) -> bool {
        let Some(t) = self.peek() else { return false };
        if !t.is_ident() {
            return false;
        }
        let s = &*t.text;
        if matches!(s, "typedef" | "extern" | "static" | "auto" | "register" | "_Thread_local" | "__thread" | "_Static_assert")
            || FUNCTION_SPECIFIERS.contains(&s)
            || (s.starts_with("__attribute") && !self.peek_at(1).is_some_and(|n| n.is(":")))
        {
            return true;
        }
        if self.is_typedef_name(t) {
            // `T: ...` is a label, `T = ...` an expression on a shadowing name.
            return !self.peek_at(1).is_some_and(|n| n.is(":") || n.is("="));
        }
        self.starts_type_name(t)
    }

    fn decl_specs(&mut self) -> PResult<Option<Specs>> {
        let first = self.pos;
        let mut storage = None;
        let mut basic = BasicSpec::default();
        let mut named: Option<Type> = None;
        let mut type_refs = Vec::new();
        let mut children = Vec::new();
        let mut type_span: Option<(usize, usize)> = None;
        let mut any = false;
        while let Some(t) = self.peek() {
            if !t.is_ident() {
                break;
            }
            let s = &*t.text;
            let idx = self.pos;
            let free = named.is_none() && !basic.any();
            // Specifiers that consume more than one token.
            let complex = match s {
                "_Atomic" if self.peek_at(1).is_some_and(|n| n.is("(")) => {
                    self.pos += 2;
                    let tn = self.type_name()?;
                    self.expect(")")?;
                    named = Some(self.ty(tn));
                    type_refs.extend(self.collect_type_refs(tn));
                    children.push(tn);
                    true
                }
                "struct" | "union" | "enum" if free => {
                    let (ty, refs, node) = self.tag_specifier()?;
                    named = Some(ty);
                    type_refs.extend(refs);
                    children.push(node);
                    true
                }
                "typeof" | "__typeof__" | "__typeof" if free => {
                    self.pos += 1;
                    self.expect("(")?;
                    let inner = if self.peek().is_some_and(|t| self.starts_type_name(t)) {
                        let tn = self.type_name()?;
                        type_refs.extend(self.collect_type_refs(tn));
                        tn
                    } else {
                        self.expr()?
                    };
                    self.expect(")")?;
                    named = Some(self.ty(inner));
                    children.push(inner);
                    true
                }
                _ => false,
            };
            if complex {
                let last = self.pos - 1;
                type_span = Some((type_span.map_or(idx, |(f, _)| f), last));
                any = true;
                continue;
            }
            if ATTRIBUTE_KEYWORDS.contains(&s) || s == "__extension__" {
                self.skip_attributes()?;
                any = true;
                continue;
            }
            let type_token = match s {
                "typedef" => {
                    storage = Some(Storage::Typedef);
                    false
                }
                "extern" => {
                    storage = Some(Storage::Extern);
                    false
                }
                "static" => {
                    storage = Some(Storage::Static);
                    false
                }
                "auto" => {
                    storage = Some(Storage::Auto);
                    false
                }
                "register" => {
                    storage = Some(Storage::Register);
                    false
                }
                "_Thread_local" | "__thread" => false,
                _ if FUNCTION_SPECIFIERS.contains(&s) || QUALIFIERS.contains(&s) => false,
                "void" => {
                    basic.void = true;
                    true
                }
                "_Bool" => {
                    basic.bool_ = true;
                    true
                }
                "char" => {
                    basic.char_ = true;
                    true
                }
                "short" => {
                    basic.short = true;
                    true
                }
                "int" => {
                    basic.int = true;
                    true
                }
                "long" => {
                    basic.long += 1;
                    true
                }
                "float" => {
                    basic.float = true;
                    true
                }
                "double" => {
                    basic.double = true;
                    true
                }
                "signed" | "__signed" | "__signed__" => {
                    basic.signed = true;
                    true
                }
                "unsigned" => {
                    basic.unsigned = true;
                    true
                }
                "_Complex" | "__complex__" => {
                    basic.complex = true;
                    true
                }
                "__int128" | "__int128_t" => {
                    basic.int128 = true;
                    true
                }
                "__uint128_t" => {
                    basic.int128 = true;
                    basic.unsigned = true;
                    true
                }
                "__builtin_va_list" if free => {
                    named = Some(Type::Builtin("__builtin_va_list"));
                    true
                }
                _ if free && self.is_typedef_name(t) => {
                    let d = self.lookup(s).expect("typedef name resolves");
                    let target = self.decls[d.0 as usize].ty.clone();
                    named = Some(Type::Typedef(d, Box::new(target)));
                    type_refs.push(d);
                    true
                }
                _ => break,
            };
            if type_token {
                type_span = Some((type_span.map_or(idx, |(f, _)| f), idx));
            }
            self.pos += 1;
            any = true;
        }
        if !any {
            return Ok(None);
        }
        let ty = named.unwrap_or_else(|| basic.resolve());
        Ok(Some(Specs {
            storage,
            ty,
            type_refs,
            first,
            last: self.pos.max(first + 1) - 1,
            type_span,
            children,
        }))
    }

    fn collect_type_refs(&self, node: NodeId) -> Vec<DeclId> {
        self.ast
            .subtree(node)
            .into_iter()
            .flat_map(|n| self.ast.node(n).type_refs.clone())
            .collect()
    }

    /// `struct`/`union`/`enum` specifier. Returns the type, the tags it
    /// references and its `TagDecl` node.
    fn tag_specifier(&mut self) -> PResult<(Type, Vec<DeclId>, NodeId)> {
        let kw = self.pos;
        let kind = match self.text(kw) {
            "struct" => DeclKind::Struct,
            "union" => DeclKind::Union,
            _ => DeclKind::Enum,
        };
        self.pos += 1;
        self.skip_attributes()?;
        let tag = match self.peek() {
            Some(t) if t.is_ident() => {
                self.pos += 1;
                Some(self.pos - 1)
            }
            _ => None,
        };
        self.skip_attributes()?;
        let scope = self.scope_kind();
        let mk_type = |d: DeclId| if kind == DeclKind::Enum { Type::Enum(d) } else { Type::Record(d) };

        if !self.at("{") {
            let Some(tag_idx) = tag else {
                return self.error("expected tag name or `{`");
            };
            let name = self.text(tag_idx);
            // `struct s;` on its own declares a new tag in this scope.
            let standalone = self.at(";");
            let existing = if standalone {
                self.scopes.last().and_then(|s| s.tags.get(name).copied())
            } else {
                self.lookup_tag(name)
            };
            let node = self.mk(NodeKind::TagDecl, Vec::new(), kw, tag_idx);
            let d = match existing {
                Some(d) => d,
                None => {
                    let d = self.new_decl(name, kind, Type::Error, node, tag_idx, scope);
                    self.decls[d.0 as usize].ty = mk_type(d);
                    self.scopes.last_mut().unwrap().tags.insert(name.to_string(), d);
                    d
                }
            };
            self.node_mut(node).decl = Some(d);
            return Ok((mk_type(d), vec![d], node));
        }

        // Definition.
        let reuse = tag.and_then(|t| {
            let name = self.text(t);
            self.scopes
                .last()
                .and_then(|s| s.tags.get(name).copied())
                .filter(|d| !self.decls[d.0 as usize].complete)
        });
        let node = self.mk(NodeKind::TagDecl, Vec::new(), kw, kw);
        let d = match reuse {
            Some(d) => d,
            None => {
                let (name, tok) = match tag {
                    Some(t) => (self.text(t), t),
                    None => ("", kw),
                };
                let d = self.new_decl(name, kind, Type::Error, node, tok, scope);
                self.decls[d.0 as usize].ty = mk_type(d);
                if !name.is_empty() {
                    self.scopes.last_mut().unwrap().tags.insert(name.to_string(), d);
                }
                d
            }
        };
        self.node_mut(node).decl = Some(d);
        self.expect("{")?;
        let mut members = Vec::new();
        if kind == DeclKind::Enum {
            while !self.at("}") {
                let name_idx = self.expect_ident()?;
                self.skip_attributes()?;
                let mut kids = Vec::new();
                let mut last = name_idx;
                if self.eat("=") {
                    let v = self.conditional_expr()?;
                    last = self.last(v);
                    kids.push(v);
                }
                let e = self.mk(NodeKind::Enumerator, kids, name_idx, last);
                let c = self.declare(name_idx, DeclKind::EnumConstant, INT, e);
                self.node_mut(e).decl = Some(c);
                self.node_mut(e).ty = Some(INT);
                members.push(e);
                if !self.eat(",") {
                    break;
                }
            }
        } else {
            let mut fields = Vec::new();
            while !self.at("}") {
                if self.eat(";") {
                    continue;
                }
                if self.at("_Static_assert") {
                    members.push(self.static_assert()?);
                    continue;
                }
                let first = self.pos;
                let Some(specs) = self.decl_specs()? else {
                    return self.error("expected member declaration");
                };
                let spec = self.type_spec_node(&specs);
                let mut kids = vec![spec];
                if self.at(";") {
                    // Anonymous struct or union member.
                    if matches!(specs.ty, Type::Record(_)) {
                        let f = self.new_decl("", DeclKind::Field, specs.ty.clone(), spec, first, ScopeKind::Member);
                        fields.push(f);
                    }
                } else {
                    loop {
                        let fd = if self.at(":") {
                            Declarator {
                                name: None,
                                derivs: Vec::new(),
                                first: self.pos,
                                end: self.pos,
                                params: None,
                                children: Vec::new(),
                                kr: false,
                            }
                        } else {
                            self.declarator(false)?
                        };
                        let fty = apply(specs.ty.clone(), &fd.derivs);
                        let mut fkids = fd.children.clone();
                        let mut last = fd.end.max(fd.first + 1) - 1;
                        let mut bit_field = false;
                        if self.eat(":") {
                            let w = self.conditional_expr()?;
                            last = self.last(w);
                            fkids.push(w);
                            bit_field = true;
                        }
                        self.skip_attributes()?;
                        let fnode = self.mk(NodeKind::InitDeclarator, fkids, fd.first, last);
                        self.node_mut(fnode).ty = Some(fty.clone());
                        if let Some(n) = fd.name {
                            let f = self.new_decl(self.text(n), DeclKind::Field, fty, fnode, n, ScopeKind::Member);
                            self.decls[f.0 as usize].bit_field = bit_field;
                            self.node_mut(fnode).decl = Some(f);
                            fields.push(f);
                        }
                        kids.push(fnode);
                        if !self.eat(",") {
                            break;
                        }
                    }
                }
                let last = self.expect(";")?;
                members.push(self.mk(NodeKind::Declaration, kids, first, last));
            }
            self.decls[d.0 as usize].fields = fields;
        }
        let close = self.expect("}")?;
        self.decls[d.0 as usize].complete = true;
        for &m in &members {
            self.node_mut(m).parent = Some(node);
        }
        let n = self.node_mut(node);
        n.children = members;
        n.last = close;
        self.skip_attributes()?;
        Ok((mk_type(d), Vec::new(), node))
    }

    // ---- declarators --------------------------------------------------

    fn declarator(&mut self, abstract_ok: bool) -> PResult<Declarator> {
        let first = self.pos;
        let mut ptrs = 0;
        while self.at("*") || self.at("^") {
            self.pos += 1;
            ptrs += 1;
            while self.at_any(QUALIFIERS) || self.at_any(ATTRIBUTE_KEYWORDS) {
                if self.at_any(QUALIFIERS) {
                    self.pos += 1;
                } else {
                    self.skip_attributes()?;
                }
            }
        }
        self.skip_attributes()?;
        let mut name = None;
        let mut inner: Vec<Deriv> = Vec::new();
        let mut params = None;
        let mut children = Vec::new();
        let mut kr = false;
        let nested = self.at("(")
            && self.peek_at(1).is_some_and(|t| {
                t.is("*")
                    || t.is("^")
                    || t.is("(")
                    || t.is("[")
                    || (t.is_ident() && !self.starts_type_name(t) && !abstract_ok)
                    || (t.is_ident() && ATTRIBUTE_KEYWORDS.contains(&&*t.text))
            });
        if nested {
            self.pos += 1;
            let d = self.declarator(abstract_ok)?;
            self.expect(")")?;
            name = d.name;
            inner = d.derivs;
            params = d.params;
            children = d.children;
            kr = d.kr;
        } else if let Some(t) = self.peek() {
            if t.is_ident() && !self.starts_type_name(t) && !ATTRIBUTE_KEYWORDS.contains(&&*t.text) {
                name = Some(self.pos);
                self.pos += 1;
            }
        }
        if name.is_none() && !abstract_ok && !self.at(":") {
            return self.error("expected declarator");
        }
        let name_here = !nested;
        let mut suffix = Vec::new();
        loop {
            self.skip_attributes_no_asm()?;
            if self.eat("[") {
                while self.at_any(QUALIFIERS) || self.at("static") {
                    self.pos += 1;
                }
                let mut size = None;
                if self.at("*") && self.peek_at(1).is_some_and(|t| t.is("]")) {
                    self.pos += 1;
                } else if !self.at("]") {
                    let e = self.assign_expr()?;
                    size = self.const_value(e);
                    children.push(e);
                }
                self.expect("]")?;
                suffix.push(Deriv::Array(size));
            } else if self.at("(") {
                self.pos += 1;
                let (f, decls, nodes, is_kr) = self.param_list()?;
                if name_here && params.is_none() && suffix.is_empty() {
                    params = Some(decls);
                    kr = is_kr;
                }
                children.extend(nodes);
                suffix.push(Deriv::Function(f));
            } else {
                break;
            }
        }
        let mut derivs = vec![Deriv::Pointer; ptrs];
        derivs.extend(suffix.into_iter().rev());
        derivs.extend(inner);
        Ok(Declarator {
            name,
            derivs,
            first,
            end: self.pos,
            params,
            children,
            kr,
        })
    }

    /// Attributes may sit between declarator parts, but an `asm` label ends
    /// the declarator and is skipped by the caller.
    fn skip_attributes_no_asm(&mut self) -> PResult<()> {
        while self.at_any(&["__attribute__", "__attribute"]) {
            self.pos += 1;
            if self.at("(") {
                self.skip_balanced()?;
            }
        }
        Ok(())
    }

    fn const_value(&self, e: NodeId) -> Option<u64> {
        let e = self.ast.strip_parens(e);
        match self.ast.kind(e) {
            NodeKind::IntLit => int_literal_value(&self.toks[self.first(e)].text),
            _ => None,
        }
    }

    /// Parameter list after `(`, through `)`.
    fn param_list(&mut self) -> PResult<(FunctionType, Vec<DeclId>, Vec<NodeId>, bool)> {
        let mut f = FunctionType {
            ret: Type::Error,
            params: Vec::new(),
            variadic: false,
            unprototyped: false,
        };
        let mut decls = Vec::new();
        let mut nodes = Vec::new();
        if self.eat(")") {
            f.unprototyped = true;
            return Ok((f, decls, nodes, false));
        }
        if self.at("void") && self.peek_at(1).is_some_and(|t| t.is(")")) {
            let first = self.pos;
            self.pos += 2;
            let spec = self.mk(NodeKind::TypeSpec, Vec::new(), first, first);
            self.node_mut(spec).ty = Some(Type::Void);
            let p = self.mk(NodeKind::ParamDecl, vec![spec], first, first);
            nodes.push(p);
            return Ok((f, decls, nodes, false));
        }
        self.push_scope(ScopeKind::Param);
        // Old-style identifier list.
        let kr = self.peek().is_some_and(|t| t.is_ident() && !self.starts_declaration())
            && self.peek_at(1).is_some_and(|t| t.is(",") || t.is(")"));
        let result = (|| -> PResult<bool> {
            if kr {
                loop {
                    let idx = self.expect_ident()?;
                    let node = self.mk(NodeKind::ParamDecl, Vec::new(), idx, idx);
                    let d = self.declare(idx, DeclKind::Param, INT, node);
                    self.node_mut(node).decl = Some(d);
                    self.node_mut(node).ty = Some(INT);
                    decls.push(d);
                    nodes.push(node);
                    f.params.push(INT);
                    if !self.eat(",") {
                        break;
                    }
                }
                self.expect(")")?;
                f.unprototyped = true;
                return Ok(true);
            }
            loop {
                if self.eat("...") {
                    f.variadic = true;
                    break;
                }
                let first = self.pos;
                let Some(specs) = self.decl_specs()? else {
                    return self.error("expected parameter declaration");
                };
                let spec = self.type_spec_node(&specs);
                let d = self.declarator(true)?;
                self.skip_attributes()?;
                let ty = adjust_param(apply(specs.ty.clone(), &d.derivs));
                let last = if d.end > d.first { d.end - 1 } else { specs.last };
                let mut kids = vec![spec];
                kids.extend(d.children.iter().copied());
                let node = self.mk(NodeKind::ParamDecl, kids, first, last.max(first));
                self.node_mut(node).ty = Some(ty.clone());
                if let Some(n) = d.name {
                    let pd = self.declare(n, DeclKind::Param, ty.clone(), node);
                    self.node_mut(node).decl = Some(pd);
                    decls.push(pd);
                }
                nodes.push(node);
                f.params.push(ty);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(")")?;
            Ok(false)
        })();
        self.pop_scope();
        let kr = result?;
        Ok((f, decls, nodes, kr))
    }

    fn type_name(&mut self) -> PResult<NodeId> {
        let first = self.pos;
        let Some(specs) = self.decl_specs()? else {
            return self.error("expected type name");
        };
        let spec = self.type_spec_node(&specs);
        let d = self.declarator(true)?;
        if d.name.is_some() {
            return self.error("unexpected name in type name");
        }
        let ty = apply(specs.ty.clone(), &d.derivs);
        let mut kids = vec![spec];
        kids.extend(d.children.iter().copied());
        let last = self.pos.max(first + 1) - 1;
        let n = self.mk(NodeKind::TypeName, kids, first, last);
        self.node_mut(n).ty = Some(ty);
        Ok(n)
    }

    fn initializer(&mut self, target: &Type) -> PResult<NodeId> {
        if self.at("{") {
            return self.init_list(target);
        }
        self.assign_expr()
    }

    fn init_list(&mut self, target: &Type) -> PResult<NodeId> {
        let first = self.expect("{")?;
        let mut items = Vec::new();
        while !self.at("}") {
            let start = self.pos;
            if self.at(".") || self.at("[") {
                let mut kids = Vec::new();
                while self.at(".") || self.at("[") {
                    if self.eat(".") {
                        self.expect_ident()?;
                    } else {
                        self.pos += 1;
                        kids.push(self.conditional_expr()?);
                        if self.eat("...") {
                            kids.push(self.conditional_expr()?);
                        }
                        self.expect("]")?;
                    }
                }
                self.expect("=")?;
                let v = self.initializer(&Type::Error)?;
                kids.push(v);
                let last = self.last(v);
                items.push(self.mk(NodeKind::Designated, kids, start, last));
            } else if self.peek().is_some_and(|t| t.is_ident()) && self.peek_at(1).is_some_and(|t| t.is(":")) {
                // GNU `field: value`.
                self.pos += 2;
                let v = self.initializer(&Type::Error)?;
                let last = self.last(v);
                items.push(self.mk(NodeKind::Designated, vec![v], start, last));
            } else {
                let elem = target.pointee().cloned().unwrap_or(Type::Error);
                items.push(self.initializer(&elem)?);
            }
            if !self.eat(",") {
                break;
            }
        }
        let last = self.expect("}")?;
        Ok(self.mk_expr(NodeKind::InitList, items, first, last, target.clone()))
    }

    // ---- statements ---------------------------------------------------

    /// Parse a statement, turning a syntax error into a `Skipped` node.
    fn statement(&mut self) -> NodeId {
        let start = self.pos;
        let mark = self.mark();
        match self.stmt() {
            Ok(n) => n,
            Err(Stop) => {
                self.rollback(mark);
                self.pos = start;
                self.skip_statement();
                let last = self.pos.max(start + 1) - 1;
                self.mk(NodeKind::Skipped, Vec::new(), start, last)
            }
        }
    }

    fn skip_statement(&mut self) {
        let start = self.pos;
        let mut depth = 0i64;
        while let Some(t) = self.peek() {
            if t.is("}") && depth == 0 {
                if self.pos == start {
                    self.pos += 1;
                }
                return;
            }
            self.pos += 1;
            if t.is("(") || t.is("[") || t.is("{") {
                depth += 1;
            } else if t.is(")") || t.is("]") {
                depth -= 1;
            } else if t.is("}") {
                depth -= 1;
                if depth <= 0 && !self.at(";") && !self.at(",") && !self.at(")") {
                    return;
                }
            } else if t.is(";") && depth <= 0 {
                return;
            }
        }
    }

    fn block_item(&mut self) -> NodeId {
        if self.starts_declaration() {
            let start = self.pos;
            let mark = self.mark();
            let r = (|| -> PResult<NodeId> {
                if self.at("_Static_assert") {
                    return self.static_assert();
                }
                let specs = self.decl_specs()?.expect("declaration start");
                self.declaration_rest(start, specs, false)
            })();
            match r {
                Ok(n) => n,
                Err(Stop) => {
                    self.rollback(mark);
                    self.pos = start;
                    self.skip_statement();
                    let last = self.pos.max(start + 1) - 1;
                    self.mk(NodeKind::Skipped, Vec::new(), start, last)
                }
            }
        } else {
            self.statement()
        }
    }

    fn compound(&mut self) -> PResult<NodeId> {
        let first = self.expect("{")?;
        self.push_scope(ScopeKind::Block);
        let depth = self.scopes.len();
        let mut items = Vec::new();
        while self.pos < self.toks.len() && !self.at("}") {
            items.push(self.block_item());
            self.scopes.truncate(depth);
        }
        self.pop_scope();
        let last = self.expect("}")?;
        Ok(self.mk(NodeKind::Compound, items, first, last))
    }

    fn paren_condition(&mut self) -> PResult<NodeId> {
        self.expect("(")?;
        let e = self.expr()?;
        self.expect(")")?;
        Ok(e)
    }

    fn sub_statement(&mut self) -> PResult<NodeId> {
        if self.at("}") || self.pos >= self.toks.len() {
            return self.error("expected statement");
        }
        Ok(self.statement())
    }

    fn stmt(&mut self) -> PResult<NodeId> {
        let first = self.pos;
        let Some(t) = self.peek() else {
            return self.error("expected statement");
        };
        if t.is("{") {
            return self.compound();
        }
        if t.is(";") {
            self.pos += 1;
            return Ok(self.mk(NodeKind::Null, Vec::new(), first, first));
        }
        if t.is_ident() {
            match &*t.text {
                "if" => {
                    self.pos += 1;
                    let c = self.paren_condition()?;
                    let then = self.sub_statement()?;
                    let mut kids = vec![c, then];
                    if self.eat("else") {
                        kids.push(self.sub_statement()?);
                    }
                    let last = self.last(*kids.last().unwrap());
                    return Ok(self.mk(NodeKind::If, kids, first, last));
                }
                "while" => {
                    self.pos += 1;
                    let c = self.paren_condition()?;
                    let body = self.sub_statement()?;
                    let last = self.last(body);
                    return Ok(self.mk(NodeKind::While, vec![c, body], first, last));
                }
                "do" => {
                    self.pos += 1;
                    let body = self.sub_statement()?;
                    self.expect("while")?;
                    self.expect("(")?;
                    let c = self.expr()?;
                    let last = self.expect(")")?;
                    self.expect(";")?;
                    return Ok(self.mk(NodeKind::DoWhile, vec![body, c], first, last));
                }
                "for" => {
                    self.pos += 1;
                    self.expect("(")?;
                    self.push_scope(ScopeKind::Block);
                    let r = (|| -> PResult<Vec<NodeId>> {
                        let mut kids = Vec::new();
                        if self.starts_declaration() {
                            let start = self.pos;
                            let specs = self.decl_specs()?.expect("declaration start");
                            kids.push(self.declaration_rest(start, specs, false)?);
                        } else {
                            if !self.at(";") {
                                kids.push(self.expr()?);
                            }
                            self.expect(";")?;
                        }
                        if !self.at(";") {
                            kids.push(self.expr()?);
                        }
                        self.expect(";")?;
                        if !self.at(")") {
                            kids.push(self.expr()?);
                        }
                        self.expect(")")?;
                        kids.push(self.sub_statement()?);
                        Ok(kids)
                    })();
                    self.pop_scope();
                    let kids = r?;
                    let last = self.last(*kids.last().unwrap());
                    return Ok(self.mk(NodeKind::For, kids, first, last));
                }
                "switch" => {
                    self.pos += 1;
                    let c = self.paren_condition()?;
                    let body = self.sub_statement()?;
                    let last = self.last(body);
                    return Ok(self.mk(NodeKind::Switch, vec![c, body], first, last));
                }
                "case" => {
                    self.pos += 1;
                    let mut kids = vec![self.conditional_expr()?];
                    if self.eat("...") {
                        kids.push(self.conditional_expr()?);
                    }
                    let colon = self.expect(":")?;
                    let mut last = colon;
                    if !self.at("}") {
                        let s = self.statement();
                        last = self.last(s);
                        kids.push(s);
                    }
                    return Ok(self.mk(NodeKind::Case, kids, first, last));
                }
                "default" => {
                    self.pos += 1;
                    let colon = self.expect(":")?;
                    let mut kids = Vec::new();
                    let mut last = colon;
                    if !self.at("}") {
                        let s = self.statement();
                        last = self.last(s);
                        kids.push(s);
                    }
                    return Ok(self.mk(NodeKind::Default, kids, first, last));
                }
                "goto" => {
                    self.pos += 1;
                    let last = if self.eat("*") {
                        let e = self.expr()?;
                        self.last(e)
                    } else {
                        self.expect_ident()?
                    };
                    let label = self.text(last).to_string();
                    self.expect(";")?;
                    return Ok(self.mk(NodeKind::Goto(label), Vec::new(), first, last));
                }
                "break" | "continue" => {
                    self.pos += 1;
                    self.expect(";")?;
                    let kind = if &*t.text == "break" { NodeKind::Break } else { NodeKind::Continue };
                    return Ok(self.mk(kind, Vec::new(), first, first));
                }
                "return" => {
                    self.pos += 1;
                    let mut kids = Vec::new();
                    let mut last = first;
                    if !self.at(";") {
                        let e = self.expr()?;
                        last = self.last(e);
                        kids.push(e);
                    }
                    self.expect(";")?;
                    return Ok(self.mk(NodeKind::Return, kids, first, last));
                }
                "asm" | "__asm__" | "__asm" => {
                    self.skip_attributes()?;
                    let last = self.pos.max(first + 1) - 1;
                    self.expect(";")?;
                    return Ok(self.mk(NodeKind::Asm, Vec::new(), first, last));
                }
                _ => {}
            }
            if self.peek_at(1).is_some_and(|n| n.is(":")) {
                self.pos += 2;
                let label = t.text.to_string();
                self.skip_attributes()?;
                let mut kids = Vec::new();
                let mut last = first + 1;
                if !self.at("}") {
                    let s = self.block_item();
                    last = self.last(s);
                    kids.push(s);
                }
                return Ok(self.mk(NodeKind::Label(label), kids, first, last));
            }
        }
        let e = self.expr()?;
        self.expect(";")?;
        Ok(e)
    }

    // ---- expressions --------------------------------------------------

    fn expr(&mut self) -> PResult<NodeId> {
        let mut lhs = self.assign_expr()?;
        while self.eat(",") {
            let rhs = self.assign_expr()?;
            let (f, l) = (self.first(lhs), self.last(rhs));
            let ty = self.ty(rhs);
            lhs = self.mk_expr(NodeKind::Comma, vec![lhs, rhs], f, l, ty);
        }
        Ok(lhs)
    }

    fn assign_expr(&mut self) -> PResult<NodeId> {
        let lhs = self.conditional_expr()?;
        let op = match self.peek() {
            Some(t) if t.kind == TokenKind::Punct => match &*t.text {
                "=" => Some(None),
                "*=" => Some(Some(BinaryOp::Mul)),
                "/=" => Some(Some(BinaryOp::Div)),
                "%=" => Some(Some(BinaryOp::Rem)),
                "+=" => Some(Some(BinaryOp::Add)),
                "-=" => Some(Some(BinaryOp::Sub)),
                "<<=" => Some(Some(BinaryOp::Shl)),
                ">>=" => Some(Some(BinaryOp::Shr)),
                "&=" => Some(Some(BinaryOp::BitAnd)),
                "^=" => Some(Some(BinaryOp::BitXor)),
                "|=" => Some(Some(BinaryOp::BitOr)),
                _ => None,
            },
            _ => None,
        };
        let Some(op) = op else { return Ok(lhs) };
        self.pos += 1;
        let rhs = self.assign_expr()?;
        let (f, l) = (self.first(lhs), self.last(rhs));
        let ty = self.ty(lhs);
        Ok(self.mk_expr(NodeKind::Assign(op), vec![lhs, rhs], f, l, ty))
    }

    fn conditional_expr(&mut self) -> PResult<NodeId> {
        let c = self.binary_expr(1)?;
        if !self.eat("?") {
            return Ok(c);
        }
        let f = self.first(c);
        if self.eat(":") {
            // GNU `a ?: b`.
            let b = self.conditional_expr()?;
            let l = self.last(b);
            let ty = self.join_types(&self.ty(c), &self.ty(b));
            return Ok(self.mk_expr(NodeKind::Conditional, vec![c, b], f, l, ty));
        }
        let a = self.expr()?;
        self.expect(":")?;
        let b = self.conditional_expr()?;
        let l = self.last(b);
        let ty = self.join_types(&self.ty(a), &self.ty(b));
        Ok(self.mk_expr(NodeKind::Conditional, vec![c, a, b], f, l, ty))
    }

    fn join_types(&self, a: &Type, b: &Type) -> Type {
        if a.is_arithmetic() && b.is_arithmetic() {
            return usual_arithmetic(a, b);
        }
        if a.is_void() || b.is_void() {
            return Type::Void;
        }
        if a.is_pointer() {
            if let Some(p) = a.pointee() {
                if p.is_void() && b.is_pointer() {
                    return b.decay();
                }
            }
            return a.decay();
        }
        if b.is_pointer() {
            return b.decay();
        }
        a.decay()
    }

    fn binary_expr(&mut self, min_prec: u8) -> PResult<NodeId> {
        let mut lhs = self.cast_expr()?;
        while let Some(op) = self
            .peek()
            .filter(|t| t.kind == TokenKind::Punct)
            .and_then(|t| BinaryOp::from_punct(&t.text))
        {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.pos += 1;
            let rhs = self.binary_expr(prec + 1)?;
            let ty = self.binary_type(op, lhs, rhs);
            let (f, l) = (self.first(lhs), self.last(rhs));
            lhs = self.mk_expr(NodeKind::Binary(op), vec![lhs, rhs], f, l, ty);
        }
        Ok(lhs)
    }

    fn binary_type(&self, op: BinaryOp, lhs: NodeId, rhs: NodeId) -> Type {
        use BinaryOp::*;
        let (a, b) = (self.ty(lhs).decay(), self.ty(rhs).decay());
        match op {
            Lt | Gt | Le | Ge | Eq | Ne | LogAnd | LogOr => INT,
            Shl | Shr => a.promote(),
            Add if a.is_pointer() => a,
            Add if b.is_pointer() => b,
            Sub if a.is_pointer() && b.is_pointer() => Type::Int(IntKind::Long),
            Sub if a.is_pointer() => a,
            _ => usual_arithmetic(&a, &b),
        }
    }

    fn cast_expr(&mut self) -> PResult<NodeId> {
        if self.at("(") && self.peek_at(1).is_some_and(|t| self.starts_type_name(t)) {
            let first = self.pos;
            self.pos += 1;
            let tn = self.type_name()?;
            self.expect(")")?;
            let ty = self.ty(tn);
            if self.at("{") {
                let init = self.init_list(&ty)?;
                let last = self.last(init);
                let lit = self.mk_expr(NodeKind::CompoundLiteral, vec![tn, init], first, last, ty);
                return self.postfix_ops(lit);
            }
            let operand = self.cast_expr()?;
            let last = self.last(operand);
            return Ok(self.mk_expr(NodeKind::Cast, vec![tn, operand], first, last, ty));
        }
        self.unary_expr()
    }

    fn unary_expr(&mut self) -> PResult<NodeId> {
        let first = self.pos;
        let Some(t) = self.peek() else {
            return self.error("expected expression");
        };
        if t.kind == TokenKind::Punct {
            let op = match &*t.text {
                "++" | "--" => {
                    self.pos += 1;
                    let e = self.unary_expr()?;
                    let (l, ty) = (self.last(e), self.ty(e));
                    return Ok(self.mk_expr(NodeKind::PreIncDec { inc: &*t.text == "++" }, vec![e], first, l, ty));
                }
                "&&" => {
                    // GNU label address.
                    self.pos += 1;
                    let l = self.expect_ident()?;
                    return Ok(self.mk_expr(NodeKind::Unary(UnaryOp::AddrOf), Vec::new(), first, l, Type::pointer_to(Type::Void)));
                }
                "&" => UnaryOp::AddrOf,
                "*" => UnaryOp::Deref,
                "+" => UnaryOp::Plus,
                "-" => UnaryOp::Minus,
                "~" => UnaryOp::BitNot,
                "!" => UnaryOp::Not,
                _ => return self.postfix_expr(),
            };
            self.pos += 1;
            let e = self.cast_expr()?;
            let et = self.ty(e);
            let ty = match op {
                UnaryOp::AddrOf => Type::pointer_to(et),
                UnaryOp::Deref => match et.canonical() {
                    Type::Function(_) => et.clone(),
                    _ => et.pointee().cloned().unwrap_or(Type::Error),
                },
                UnaryOp::Not => INT,
                _ => et.promote(),
            };
            let l = self.last(e);
            return Ok(self.mk_expr(NodeKind::Unary(op), vec![e], first, l, ty));
        }
        if t.is_ident() {
            match &*t.text {
                "sizeof" | "_Alignof" | "__alignof__" | "__alignof" => {
                    self.pos += 1;
                    let size_t = Type::Int(IntKind::ULong);
                    if self.at("(") && self.peek_at(1).is_some_and(|n| self.starts_type_name(n)) {
                        let save = self.pos;
                        self.pos += 1;
                        let tn = self.type_name()?;
                        let close = self.expect(")")?;
                        if !self.at("{") {
                            let kind = if &*t.text == "sizeof" { NodeKind::SizeofType } else { NodeKind::AlignofType };
                            return Ok(self.mk_expr(kind, vec![tn], first, close, size_t));
                        }
                        self.pos = save;
                    }
                    let e = self.unary_expr()?;
                    let l = self.last(e);
                    return Ok(self.mk_expr(NodeKind::SizeofExpr, vec![e], first, l, size_t));
                }
                "__extension__" => {
                    self.pos += 1;
                    return self.cast_expr();
                }
                "__real__" | "__imag__" | "__real" | "__imag" => {
                    self.pos += 1;
                    let e = self.cast_expr()?;
                    let ty = match self.ty(e).canonical() {
                        Type::Complex(k) => Type::Float(*k),
                        t => t.clone(),
                    };
                    let l = self.last(e);
                    return Ok(self.mk_expr(NodeKind::Unary(UnaryOp::Plus), vec![e], first, l, ty));
                }
                _ => {}
            }
        }
        self.postfix_expr()
    }

    fn postfix_expr(&mut self) -> PResult<NodeId> {
        let p = self.primary_expr()?;
        self.postfix_ops(p)
    }

    fn postfix_ops(&mut self, mut e: NodeId) -> PResult<NodeId> {
        loop {
            let f = self.first(e);
            if self.eat("[") {
                let idx = self.expr()?;
                let l = self.expect("]")?;
                let (a, b) = (self.ty(e), self.ty(idx));
                let ty = a
                    .pointee()
                    .or_else(|| b.pointee())
                    .cloned()
                    .unwrap_or(Type::Error);
                e = self.mk_expr(NodeKind::Index, vec![e, idx], f, l, ty);
            } else if self.eat("(") {
                let mut args = vec![e];
                if !self.at(")") {
                    loop {
                        args.push(self.assign_expr()?);
                        if !self.eat(",") {
                            break;
                        }
                    }
                }
                let l = self.expect(")")?;
                let ty = match self.ty(e).function() {
                    Some(f) => f.ret.clone(),
                    None => INT,
                };
                e = self.mk_expr(NodeKind::Call, args, f, l, ty);
            } else if self.at(".") || self.at("->") {
                let arrow = self.at("->");
                self.pos += 1;
                let l = self.expect_ident()?;
                let field = self.text(l).to_string();
                let base = self.ty(e);
                let record = if arrow { base.pointee().cloned() } else { Some(base) };
                let fd = match record.as_ref().map(|r| r.canonical()) {
                    Some(Type::Record(d)) => super::sema::find_field(&self.decls, *d, &field),
                    _ => None,
                };
                let (ty, bit_field) = match fd {
                    Some(fd) => (self.decls[fd.0 as usize].ty.clone(), self.decls[fd.0 as usize].bit_field),
                    None => (Type::Error, false),
                };
                e = self.mk_expr(NodeKind::Member { arrow, field }, vec![e], f, l, ty);
                self.node_mut(e).bit_field = bit_field;
            } else if self.at("++") || self.at("--") {
                let inc = self.at("++");
                let l = self.pos;
                self.pos += 1;
                let ty = self.ty(e);
                e = self.mk_expr(NodeKind::PostIncDec { inc }, vec![e], f, l, ty);
            } else {
                return Ok(e);
            }
        }
    }

    fn string_literal(&mut self) -> PResult<NodeId> {
        let first = self.pos;
        let mut len = 0u64;
        while let Some(t) = self.peek() {
            if t.kind != TokenKind::Str {
                break;
            }
            let body = t.text.find('"').map(|q| &t.text[q + 1..t.text.len() - 1]).unwrap_or("");
            len += crate::pp::decode_escapes(body).map(|v| v.len() as u64).unwrap_or(body.len() as u64);
            self.pos += 1;
        }
        if self.pos == first {
            return self.error("expected string literal");
        }
        let ty = Type::Array(Box::new(Type::Int(IntKind::Char)), Some(len + 1));
        Ok(self.mk_expr(NodeKind::StrLit, Vec::new(), first, self.pos - 1, ty))
    }

    fn primary_expr(&mut self) -> PResult<NodeId> {
        let first = self.pos;
        let Some(t) = self.peek() else {
            return self.error("expected expression");
        };
        match t.kind {
            TokenKind::Number => {
                self.pos += 1;
                if is_float_literal(&t.text) {
                    Ok(self.mk_expr(NodeKind::FloatLit, Vec::new(), first, first, float_literal_type(&t.text)))
                } else {
                    Ok(self.mk_expr(NodeKind::IntLit, Vec::new(), first, first, int_literal_type(&t.text)))
                }
            }
            TokenKind::Char => {
                self.pos += 1;
                Ok(self.mk_expr(NodeKind::CharLit, Vec::new(), first, first, INT))
            }
            TokenKind::Str => self.string_literal(),
            TokenKind::Punct if t.is("(") => {
                if self.peek_at(1).is_some_and(|n| n.is("{")) {
                    self.pos += 1;
                    let body = self.compound()?;
                    let last = self.expect(")")?;
                    let ty = self
                        .ast
                        .children(body)
                        .last()
                        .filter(|&&c| self.ast.kind(c).is_expr())
                        .map(|&c| self.ty(c))
                        .unwrap_or(Type::Void);
                    return Ok(self.mk_expr(NodeKind::StmtExpr, vec![body], first, last, ty));
                }
                self.pos += 1;
                let e = self.expr()?;
                let last = self.expect(")")?;
                let ty = self.ty(e);
                Ok(self.mk_expr(NodeKind::Paren, vec![e], first, last, ty))
            }
            TokenKind::Identifier => {
                let name = &*t.text;
                match name {
                    "__builtin_va_arg" => {
                        self.pos += 1;
                        self.expect("(")?;
                        let ap = self.assign_expr()?;
                        self.expect(",")?;
                        let tn = self.type_name()?;
                        let last = self.expect(")")?;
                        let ty = self.ty(tn);
                        return Ok(self.mk_expr(NodeKind::VaArg, vec![ap, tn], first, last, ty));
                    }
                    "__builtin_offsetof" => {
                        self.pos += 1;
                        self.expect("(")?;
                        let tn = self.type_name()?;
                        self.expect(",")?;
                        let mut kids = vec![tn];
                        self.expect_ident()?;
                        loop {
                            if self.eat(".") {
                                self.expect_ident()?;
                            } else if self.eat("[") {
                                kids.push(self.expr()?);
                                self.expect("]")?;
                            } else {
                                break;
                            }
                        }
                        let last = self.expect(")")?;
                        return Ok(self.mk_expr(NodeKind::Offsetof, kids, first, last, Type::Int(IntKind::ULong)));
                    }
                    "__builtin_types_compatible_p" => {
                        self.pos += 1;
                        self.expect("(")?;
                        let a = self.type_name()?;
                        self.expect(",")?;
                        let b = self.type_name()?;
                        let last = self.expect(")")?;
                        return Ok(self.mk_expr(NodeKind::TypesCompatible, vec![a, b], first, last, INT));
                    }
                    "__func__" | "__FUNCTION__" | "__PRETTY_FUNCTION__" => {
                        self.pos += 1;
                        let ty = Type::Array(Box::new(Type::Int(IntKind::Char)), None);
                        return Ok(self.mk_expr(NodeKind::StrLit, Vec::new(), first, first, ty));
                    }
                    _ => {}
                }
                if self.starts_type_name(t) || self.is_keyword(name) {
                    return self.error("expected expression");
                }
                self.pos += 1;
                let decl = self.lookup(name).filter(|d| self.decls[d.0 as usize].kind.is_value());
                let ty = match decl {
                    Some(d) => self.decls[d.0 as usize].ty.clone(),
                    None if self.at("(") => Type::Function(Box::new(FunctionType {
                        ret: INT,
                        params: Vec::new(),
                        variadic: false,
                        unprototyped: true,
                    })),
                    None => Type::Error,
                };
                let n = self.mk_expr(NodeKind::Ident(name.to_string()), Vec::new(), first, first, ty);
                self.node_mut(n).decl = decl;
                Ok(n)
            }
            _ => self.error("expected expression"),
        }
    }

    fn is_keyword(&self, s: &str) -> bool {
        matches!(
            s,
            "if" | "else" | "while" | "do" | "for" | "switch" | "case" | "default" | "goto"
                | "break" | "continue" | "return" | "typedef" | "extern" | "static" | "auto"
                | "register" | "struct" | "union" | "enum" | "sizeof" | "inline"
        )
    }
}
