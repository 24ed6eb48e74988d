//! Per-unit node sets backing the property formulas.

use std::collections::BTreeSet;

use crate::c::ast::{BinaryOp, NodeId, NodeKind, UnaryOp};
use crate::c::sema::Decl;
use crate::c::types::Type;
use crate::c::TranslationUnit;
use crate::pp::{ExpansionTrace, MacroDefinition, Ordinal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactQuery {
    /// Assigned, incremented or decremented, or passed to a call with its
    /// address taken (`&x` or an array object; string literals excluded).
    SideEffectedExprs,
    /// Assignments, increments, decrements and calls.
    SideEffectExprs,
    /// Operands of unary `&`, including the member and subscript chain
    /// down to the base object.
    AddressedExprs,
    /// Identifiers naming an object, function or enumerator.
    DeclRefs,
    /// Declaration references whose declaration is in a block or
    /// parameter scope.
    LocalDeclRefs,
    /// Type specifiers and type names that mention a typedef or tag.
    TypeRefs,
    AnonTypeExprs,
    LocalTypeExprs,
    /// `?:`, `&&` and `||`.
    CondExprs,
    Exprs,
}

impl FactQuery {
    fn bit(self) -> u16 {
        1 << self as u16
    }
}

/// Facts about one translation unit. Membership is decided once for
/// every node; a query restricts it to a subtree.
#[derive(Debug, Clone)]
pub struct ProgramFacts<'a> {
    pub tu: &'a TranslationUnit,
    pub trace: &'a ExpansionTrace,
    flags: Vec<u16>,
    bodies: Vec<(usize, usize)>,
}

impl<'a> ProgramFacts<'a> {
    pub fn new(tu: &'a TranslationUnit, trace: &'a ExpansionTrace) -> Self {
        let mut facts = ProgramFacts {
            tu,
            trace,
            flags: vec![0; tu.ast.len()],
            bodies: tu.function_bodies(),
        };
        for n in tu.ast.reachable() {
            facts.classify(n);
        }
        facts
    }

    fn mark(&mut self, n: NodeId, q: FactQuery) {
        self.flags[n.0 as usize] |= q.bit();
    }

    fn is_array(&self, n: NodeId) -> bool {
        matches!(self.tu.node(n).ty.as_ref().map(Type::canonical), Some(Type::Array(..)))
    }

    /// Mark `n` and the objects it is part of.
    fn mark_chain(&mut self, n: NodeId, q: FactQuery) {
        self.mark(n, q);
        let ast = &self.tu.ast;
        let next = match ast.kind(n) {
            NodeKind::Paren => Some(ast.children(n)[0]),
            NodeKind::Member { arrow, .. } if !arrow || q == FactQuery::AddressedExprs => {
                Some(ast.children(n)[0])
            }
            NodeKind::Index if self.is_array(ast.children(n)[0]) => Some(ast.children(n)[0]),
            _ => None,
        };
        if let Some(c) = next {
            self.mark_chain(c, q);
        }
    }

    fn classify(&mut self, n: NodeId) {
        use FactQuery::*;
        let tu = self.tu;
        let node = tu.node(n);
        match &node.kind {
            NodeKind::Assign(_) | NodeKind::PreIncDec { .. } | NodeKind::PostIncDec { .. } => {
                self.mark(n, SideEffectExprs);
                self.mark_chain(node.children[0], SideEffectedExprs);
            }
            NodeKind::Call => {
                self.mark(n, SideEffectExprs);
                for &arg in &node.children[1..] {
                    let inner = tu.ast.strip_parens(arg);
                    if *tu.ast.kind(inner) == NodeKind::Unary(UnaryOp::AddrOf) {
                        self.mark_chain(tu.ast.children(inner)[0], SideEffectedExprs);
                    } else if self.is_array(inner) && *tu.ast.kind(inner) != NodeKind::StrLit {
                        self.mark_chain(arg, SideEffectedExprs);
                    }
                }
            }
            NodeKind::Unary(UnaryOp::AddrOf) => self.mark_chain(node.children[0], AddressedExprs),
            NodeKind::Conditional | NodeKind::Binary(BinaryOp::LogAnd | BinaryOp::LogOr) => {
                self.mark(n, CondExprs)
            }
            NodeKind::Ident(_) => {
                if let Some(d) = node.decl.map(|d| tu.sema.decl(d)) {
                    if d.kind.is_value() {
                        self.mark(n, DeclRefs);
                        if d.is_local() {
                            self.mark(n, LocalDeclRefs);
                        }
                    }
                }
            }
            NodeKind::TypeSpec | NodeKind::TypeName if !node.type_refs.is_empty() => {
                self.mark(n, TypeRefs)
            }
            _ => {}
        }
        if node.kind.is_expr() {
            self.mark(n, Exprs);
            if let Some(ty) = &node.ty {
                if tu.sema.is_anonymous_type(ty) {
                    self.mark(n, AnonTypeExprs);
                }
                if tu.sema.is_local_type(ty) {
                    self.mark(n, LocalTypeExprs);
                }
            }
        }
    }

    /// Whether `n` belongs to the unit-wide set for `q`.
    pub fn is(&self, q: FactQuery, n: NodeId) -> bool {
        self.flags[n.0 as usize] & q.bit() != 0
    }

    /// Members of `q` within the subtree rooted at `subtree`.
    pub fn query(&self, q: FactQuery, subtree: NodeId) -> BTreeSet<NodeId> {
        self.tu
            .ast
            .subtree(subtree)
            .into_iter()
            .filter(|&n| self.is(q, n))
            .collect()
    }

    /// Proper subexpressions of `n`.
    pub fn sub_exprs(&self, n: NodeId) -> BTreeSet<NodeId> {
        let mut s = self.query(FactQuery::Exprs, n);
        s.remove(&n);
        s
    }

    pub fn in_tree(&self, inner: NodeId, outer: NodeId) -> bool {
        self.tu.ast.in_tree(inner, outer)
    }

    pub fn ty(&self, n: NodeId) -> Option<&Type> {
        self.tu.node(n).ty.as_ref()
    }

    pub fn decl_of(&self, n: NodeId) -> Option<&Decl> {
        self.tu.node(n).decl.map(|d| self.tu.sema.decl(d))
    }

    /// Whether the declaration's first declaration node lies inside `tree`.
    pub fn decl_in(&self, decl: &Decl, tree: NodeId) -> bool {
        self.in_tree(decl.node, tree)
    }

    /// Whether the macro was defined inside a function body.
    pub fn defined_locally(&self, def: &MacroDefinition) -> bool {
        let pos = def.output_position;
        self.bodies.iter().any(|&(first, last)| first < pos && pos <= last)
    }

    pub fn defined_before(&self, m: &MacroDefinition, later: Ordinal) -> bool {
        m.ordinal < later
    }

    /// The declaration of the named type of `ty`, looking through pointers
    /// and arrays.
    pub fn type_decl(&self, ty: &Type) -> Option<&Decl> {
        self.tu.sema.type_decl(ty)
    }

    pub fn in_condition(&self, name: &str) -> bool {
        self.trace.conditionals.iter().any(|c| c.names.contains(name))
    }
}
