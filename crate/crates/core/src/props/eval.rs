//! Property formulas over one aligned invocation.
//!
//! `m.ast` is the aligned body node; a keyword alignment has no node, so
//! the formulas reading `m.ast` see an empty tree. For `a.ast` the first
//! substitution is used where the formula needs a single node (types,
//! expression-ness) and every aligned substitution where it asks for
//! membership in a set (modified, addressed, captured). An argument is
//! conditional when its first use sits in an operand that may be skipped.
//! References and subexpressions counted against the body exclude those
//! inside argument substitutions (or parentheses around one), which belong
//! to the call site, and declarations made inside the expansion itself are
//! never unordered.

use crate::align::{AlignmentResult, BodyAlignment};
use crate::c::ast::{BinaryOp, NodeClass, NodeId, NodeKind};
use crate::lex::TokenKind;
use crate::pp::{InvocationRecord, MacroDefinition, MacroKind, Nesting};

use super::facts::{FactQuery, ProgramFacts};
use super::{PropertyId, PropertySet};

pub fn check_property(
    inv: &InvocationRecord,
    alignment: &AlignmentResult,
    facts: &ProgramFacts,
    p: PropertyId,
) -> bool {
    let unaligned = raw(inv, alignment, facts, PropertyId::Unaligned);
    if p == PropertyId::Unaligned {
        return unaligned;
    }
    if unaligned && !p.survives_unaligned() {
        return false;
    }
    raw(inv, alignment, facts, p)
}

pub fn check_all(inv: &InvocationRecord, alignment: &AlignmentResult, facts: &ProgramFacts) -> PropertySet {
    PropertySet::from_iter(
        inv.id,
        PropertyId::ALL
            .into_iter()
            .filter(|&p| check_property(inv, alignment, facts, p)),
    )
}

/// Uses of an argument inside a conditionally evaluated operand: the right
/// side of `&&`/`||` or the second and third operands of `?:`.
fn conditionally_evaluated(facts: &ProgramFacts, cond: NodeId, arg: NodeId) -> bool {
    let ast = &facts.tu.ast;
    let kids = ast.children(cond);
    let operands: &[NodeId] = match ast.kind(cond) {
        NodeKind::Binary(BinaryOp::LogAnd | BinaryOp::LogOr) => &kids[1..],
        NodeKind::Conditional => &kids[1..],
        _ => &[],
    };
    operands.iter().any(|&o| ast.in_tree(arg, o))
}

fn stringizes_or_pastes(def: &MacroDefinition) -> bool {
    def.body.iter().any(|t| match t.kind {
        TokenKind::HashHash => true,
        TokenKind::Hash => def.kind == MacroKind::FunctionLike,
        _ => false,
    })
}

fn raw(inv: &InvocationRecord, al: &AlignmentResult, facts: &ProgramFacts, p: PropertyId) -> bool {
    use FactQuery as Q;
    use PropertyId::*;
    let trace = facts.trace;
    let def = trace.definition(inv.definition);
    let m = al.node();
    let firsts = || al.args.iter().flatten().copied();
    let all_uses = || al.occurrences.iter().flatten().copied();
    let in_set = |q: Q| move |n: NodeId| facts.is(q, n);
    let later = |ordinal| facts.defined_before(def, ordinal);
    let from_body = |q: Q, m: NodeId| {
        facts.query(q, m).into_iter().filter(|&n| {
            let inner = facts.tu.ast.strip_parens(n);
            !all_uses().any(|a| facts.in_tree(inner, a))
        })
    };
    let type_later = |n: NodeId| {
        facts
            .ty(n)
            .and_then(|t| facts.type_decl(t))
            .is_some_and(|d| later(d.ordinal))
    };

    match p {
        ModifiedBody => m.is_some_and(in_set(Q::SideEffectedExprs)),
        ModifiedArguments => all_uses().any(in_set(Q::SideEffectedExprs)),
        AddressedBody => m.is_some_and(in_set(Q::AddressedExprs)),
        AddressedArguments => all_uses().any(in_set(Q::AddressedExprs)),
        Unhygienic => m.is_some_and(|m| {
            facts.query(Q::LocalDeclRefs, m).into_iter().any(|d| {
                let captured = !all_uses().any(|a| facts.in_tree(d, a));
                let declared_inside = facts.decl_of(d).is_some_and(|decl| facts.decl_in(decl, m));
                captured && !declared_inside
            })
        }),
        LocallyDefined => facts.defined_locally(def),
        UnorderedDeclarations => m.is_some_and(|m| {
            from_body(Q::DeclRefs, m)
                .filter_map(|d| facts.decl_of(d))
                .any(|d| later(d.ordinal) && !facts.decl_in(d, m))
        }),
        UnorderedExpansionType => m.is_some_and(type_later),
        UnorderedTypeDeclarations => m.is_some_and(|m| {
            from_body(Q::TypeRefs, m).any(|t| {
                facts
                    .tu
                    .node(t)
                    .type_refs
                    .iter()
                    .map(|&d| facts.tu.sema.decl(d))
                    .any(|d| later(d.ordinal) && !facts.decl_in(d, m))
            })
        }),
        UnorderedArgumentTypes => firsts().any(type_later),
        UnorderedMacros => trace
            .children(inv.id)
            .filter(|n| matches!(n.nesting, Nesting::Body(_)))
            .any(|n| later(trace.definition(n.definition).ordinal)),
        ConditionMacro => facts.in_condition(&inv.name),
        AnonymousType => m.is_some_and(in_set(Q::AnonTypeExprs)),
        AnonymousArgumentTypes => all_uses().any(in_set(Q::AnonTypeExprs)),
        LocalArgumentTypes => all_uses().any(in_set(Q::LocalTypeExprs)),
        LocallyTypedSubexpressions => m.is_some_and(|m| {
            from_body(Q::LocalTypeExprs, m).any(|e| e != m)
        }),
        LocalType => m.is_some_and(|m| {
            facts.is(Q::LocalTypeExprs, m)
                && !facts
                    .ty(m)
                    .and_then(|t| facts.type_decl(t))
                    .is_some_and(|d| facts.decl_in(d, m))
        }),
        VoidArguments => firsts().any(|a| facts.ty(a).is_some_and(|t| t.canonical().is_void())),
        SideEffectingArguments => m.is_some_and(|m| {
            facts
                .query(Q::SideEffectExprs, m)
                .into_iter()
                .any(|e| all_uses().any(|a| facts.in_tree(e, a)))
        }),
        Unaligned => al.body.is_none() || al.args.iter().any(Option::is_none),
        ConditionalArguments => m.is_some_and(|m| {
            facts
                .query(Q::CondExprs, m)
                .into_iter()
                .any(|c| firsts().any(|a| conditionally_evaluated(facts, c, a)))
        }),
        NestedInBody => matches!(inv.nesting, Nesting::Body(_)),
        NestedInArgument => matches!(inv.nesting, Nesting::Argument(..)),
        ControlFlow => match al.body {
            Some(BodyAlignment::Keyword { .. }) => true,
            Some(BodyAlignment::Node(n)) => facts.tu.ast.kind(n).class() == NodeClass::ControlKeyword,
            None => false,
        },
        NonExpressionArguments => firsts().any(|a| !facts.is(Q::Exprs, a)),
        StringizingTokenPasting => stringizes_or_pastes(def),
    }
}
