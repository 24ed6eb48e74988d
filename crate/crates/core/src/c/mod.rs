//! C front end: parsing, name resolution and expression types.

pub mod ast;
mod parser;
pub mod sema;
pub mod types;

use serde::Serialize;
use thiserror::Error;

use crate::lex::Token;

use ast::{Ast, NodeId, NodeKind};
use sema::Semantics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DeclId(pub u32);

/// A recoverable problem; the affected tokens became a `Skipped` node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub token: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("token {token}: {message}")]
    Unbalanced { token: usize, message: String },
}

#[derive(Debug, Clone)]
pub struct TranslationUnit {
    pub ast: Ast,
    pub sema: Semantics,
    pub diagnostics: Vec<Diagnostic>,
}

impl TranslationUnit {
    /// Token extents (inclusive) of every function body.
    pub fn function_bodies(&self) -> Vec<(usize, usize)> {
        self.ast
            .children(self.ast.root())
            .iter()
            .filter(|&&n| *self.ast.kind(n) == NodeKind::FunctionDef)
            .filter_map(|&n| self.ast.children(n).last())
            .map(|&b| (self.ast.node(b).first, self.ast.node(b).last))
            .collect()
    }

    pub fn node(&self, id: NodeId) -> &ast::Node {
        self.ast.node(id)
    }
}

/// Parse a preprocessed token stream (a trailing `Eof` token is ignored).
pub fn parse(tokens: &[Token]) -> Result<TranslationUnit, ParseError> {
    let mut p = parser::Parser::new(tokens);
    p.translation_unit()?;
    let (ast, sema, diagnostics) = p.finish();
    Ok(TranslationUnit {
        ast,
        sema,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::ast::{BinaryOp, NodeClass};
    use super::sema::{DeclKind, ScopeKind};
    use super::types::{IntKind, Type};
    use super::*;
    use crate::lex::{tokenize, FileId};

    fn parse_src(src: &str) -> (Vec<Token>, TranslationUnit) {
        let toks = tokenize(src, FileId(0)).unwrap();
        let tu = parse(&toks).unwrap();
        (toks, tu)
    }

    fn find(tu: &TranslationUnit, pred: impl Fn(&NodeKind) -> bool) -> Vec<NodeId> {
        tu.ast
            .reachable()
            .into_iter()
            .filter(|&n| pred(tu.ast.kind(n)))
            .collect()
    }

    #[test]
    fn declarations_and_types() {
        let (_, tu) = parse_src("typedef unsigned long size_t; size_t n; int *a[3]; int (*fp)(int, char);");
        let decls = &tu.sema.decls;
        assert_eq!(decls[0].kind, DeclKind::Typedef);
        assert!(matches!(decls[1].ty, Type::Typedef(_, _)));
        assert_eq!(decls[2].ty, Type::Array(Box::new(Type::pointer_to(Type::Int(IntKind::Int))), Some(3)));
        let f = decls[3].ty.function().unwrap();
        assert_eq!(f.params.len(), 2);
        assert!(decls[3].ty.is_pointer());
        assert!(tu.diagnostics.is_empty());
    }

    #[test]
    fn extents_follow_clang() {
        let src = "int f(int x) { x++; return x + 1; }";
        let (toks, tu) = parse_src(src);
        let ret = find(&tu, |k| *k == NodeKind::Return)[0];
        let n = tu.node(ret);
        assert_eq!(&*toks[n.first].text, "return");
        assert_eq!(&*toks[n.last].text, "1");
        let inc = find(&tu, |k| matches!(k, NodeKind::PostIncDec { .. }))[0];
        let comp = tu.ast.parent(inc).unwrap();
        assert_eq!(*tu.ast.kind(comp), NodeKind::Compound);
        assert_eq!(tu.node(inc).last - tu.node(inc).first, 1);
        assert_eq!(tu.function_bodies().len(), 1);
    }

    #[test]
    fn typedef_names_disambiguate_casts() {
        let (_, tu) = parse_src("typedef int T; int g(int a) { return (T)a * (a) * 2; }");
        assert_eq!(find(&tu, |k| *k == NodeKind::Cast).len(), 1);
        let mul = find(&tu, |k| *k == NodeKind::Binary(BinaryOp::Mul));
        assert_eq!(mul.len(), 2);
    }

    #[test]
    fn scopes_and_references() {
        let (_, tu) = parse_src("int g; void f(int p) { int l = p + g; { struct s { int a : 3; } v; v.a = l; } }");
        let ids = find(&tu, |k| matches!(k, NodeKind::Ident(_)));
        let scopes: Vec<ScopeKind> = ids
            .iter()
            .filter_map(|&i| tu.node(i).decl)
            .map(|d| tu.sema.decl(d).scope)
            .collect();
        assert!(scopes.contains(&ScopeKind::Param));
        assert!(scopes.contains(&ScopeKind::File));
        assert!(scopes.contains(&ScopeKind::Block));
        let member = find(&tu, |k| matches!(k, NodeKind::Member { .. }))[0];
        assert!(tu.node(member).bit_field);
        let s = tu.sema.decls.iter().find(|d| d.name == "s").unwrap();
        assert!(s.is_local());
    }

    #[test]
    fn anonymous_records() {
        let (_, tu) = parse_src("struct { int x; } pt; int h(void) { return pt.x; }");
        let pt = tu.sema.decls.iter().find(|d| d.name == "pt").unwrap();
        assert!(tu.sema.is_anonymous_type(&pt.ty));
        let m = find(&tu, |k| matches!(k, NodeKind::Member { .. }))[0];
        assert_eq!(tu.node(m).ty, Some(Type::Int(IntKind::Int)));
    }

    #[test]
    fn recovery_produces_skipped_nodes() {
        let (_, tu) = parse_src("int a; int f(void) { a = ; return a; } @@@ ; int b;");
        assert_eq!(find(&tu, |k| *k == NodeKind::Skipped).len(), 2);
        assert!(tu.sema.decls.iter().any(|d| d.name == "b"));
        assert_eq!(find(&tu, |k| *k == NodeKind::Return).len(), 1);
    }

    #[test]
    fn unbalanced_braces_are_fatal() {
        let toks = tokenize("int f(void) { return 0;", FileId(0)).unwrap();
        assert!(parse(&toks).is_err());
        let toks = tokenize("int x; }", FileId(0)).unwrap();
        assert!(parse(&toks).is_err());
    }

    #[test]
    fn statements_and_control_flow() {
        let src = "void f(int x) { switch (x) { case 1: break; default: x--; } \
                   while (x) continue; do x++; while (x < 3); for (int i = 0; i < 2; i++) ; \
                   lbl: goto lbl; }";
        let (_, tu) = parse_src(src);
        assert!(tu.diagnostics.is_empty(), "{:?}", tu.diagnostics);
        for k in [NodeKind::Switch, NodeKind::Case, NodeKind::Default, NodeKind::While, NodeKind::DoWhile, NodeKind::For] {
            assert_eq!(find(&tu, |n| *n == k).len(), 1, "{k:?}");
        }
        let case = find(&tu, |n| *n == NodeKind::Case)[0];
        assert_eq!(tu.ast.kind(case).class(), NodeClass::ControlKeyword);
    }

    #[test]
    fn gnu_extensions() {
        let src = "int f(int a) { int r = ({ int t = a; t * 2; }); __typeof__(a) b = a ?: 1; \
                   __asm__ __volatile__(\"nop\"); return r + b + __builtin_offsetof(struct q { int z; }, z); }";
        let (_, tu) = parse_src(src);
        assert!(tu.diagnostics.is_empty(), "{:?}", tu.diagnostics);
        assert_eq!(find(&tu, |k| *k == NodeKind::StmtExpr).len(), 1);
    }

    #[test]
    fn old_style_definitions() {
        let (_, tu) = parse_src("int add(a, b) int a; long b; { return a + b; }");
        assert!(tu.diagnostics.is_empty(), "{:?}", tu.diagnostics);
        let b = tu.sema.decls.iter().find(|d| d.name == "b").unwrap();
        assert_eq!(b.ty, Type::Int(IntKind::Long));
    }

    #[test]
    fn spelling_types() {
        let (_, tu) = parse_src("struct node; int (*fp)(int); struct node *p; char buf[4];");
        let spell = |name: &str| {
            let d = tu.sema.decls.iter().find(|d| d.name == name).unwrap();
            tu.sema.spell_decl(&d.ty, "v").unwrap()
        };
        assert_eq!(spell("fp"), "int (*v)(int)");
        assert_eq!(spell("p"), "struct node *v");
        assert_eq!(spell("buf"), "char v[4]");
    }
}
