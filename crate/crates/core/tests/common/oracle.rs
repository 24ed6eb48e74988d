//! Brute-force evaluation of the property formulas, compared against the
//! property engine on every golden invocation.
//!
//! Each helper set is a predicate quantified over every reachable node, and
//! each property is written out directly from its formula. Nothing here
//! uses the engine's precomputed facts.

use macport::align::{Aligner, AlignmentResult, BodyAlignment};
use macport::c::ast::{BinaryOp, NodeId, NodeKind, UnaryOp};
use macport::c::sema::ScopeKind;
use macport::c::types::Type;
use macport::c::{parse, TranslationUnit};
use macport::lex::TokenKind;
use macport::pp::{preprocess_str, ExpansionTrace, InvocationRecord, MacroKind, Nesting};
use macport::props::{check_all, PropertyId, ProgramFacts};

struct World<'a> {
    tu: &'a TranslationUnit,
    trace: &'a ExpansionTrace,
    nodes: Vec<NodeId>,
}

impl<'a> World<'a> {
    fn new(tu: &'a TranslationUnit, trace: &'a ExpansionTrace) -> Self {
        let mut nodes = Vec::new();
        let mut stack = vec![tu.ast.root()];
        while let Some(n) = stack.pop() {
            nodes.push(n);
            stack.extend(tu.ast.children(n).iter().copied());
        }
        World { tu, trace, nodes }
    }

    fn kind(&self, n: NodeId) -> &NodeKind {
        &self.tu.ast.nodes[n.0 as usize].kind
    }

    fn kids(&self, n: NodeId) -> &[NodeId] {
        &self.tu.ast.nodes[n.0 as usize].children
    }

    fn ty(&self, n: NodeId) -> Option<&Type> {
        self.tu.ast.nodes[n.0 as usize].ty.as_ref()
    }

    /// InTree(a, b), by searching b's descendants.
    fn in_tree(&self, a: NodeId, b: NodeId) -> bool {
        a == b || self.kids(b).iter().any(|&k| self.in_tree(a, k))
    }

    fn subtree(&self, m: NodeId) -> Vec<NodeId> {
        self.nodes.iter().copied().filter(|&n| self.in_tree(n, m)).collect()
    }

    fn is_array(&self, n: NodeId) -> bool {
        matches!(self.ty(n).map(Type::canonical), Some(Type::Array(..)))
    }

    fn unparen(&self, mut n: NodeId) -> NodeId {
        while *self.kind(n) == NodeKind::Paren {
            n = self.kids(n)[0];
        }
        n
    }

    /// Whether `e` is the object designated by `lv` or an enclosing object
    /// of it (through parentheses, `.`, array subscripts, and `->` when the
    /// pointer itself is of interest).
    fn designates(&self, lv: NodeId, e: NodeId, through_arrow: bool) -> bool {
        if lv == e {
            return true;
        }
        let k = self.kids(lv);
        match self.kind(lv) {
            NodeKind::Paren => self.designates(k[0], e, through_arrow),
            NodeKind::Member { arrow: false, .. } => self.designates(k[0], e, through_arrow),
            NodeKind::Member { arrow: true, .. } if through_arrow => self.designates(k[0], e, through_arrow),
            NodeKind::Index if self.is_array(k[0]) => self.designates(k[0], e, through_arrow),
            _ => false,
        }
    }

    fn side_effected(&self, e: NodeId) -> bool {
        self.nodes.iter().any(|&p| match self.kind(p) {
            NodeKind::Assign(_) | NodeKind::PreIncDec { .. } | NodeKind::PostIncDec { .. } => {
                self.designates(self.kids(p)[0], e, false)
            }
            NodeKind::Call => self.kids(p)[1..].iter().any(|&arg| {
                let i = self.unparen(arg);
                match self.kind(i) {
                    NodeKind::Unary(UnaryOp::AddrOf) => self.designates(self.kids(i)[0], e, false),
                    NodeKind::StrLit => false,
                    _ => self.is_array(i) && self.designates(arg, e, false),
                }
            }),
            _ => false,
        })
    }

    fn addressed(&self, e: NodeId) -> bool {
        self.nodes.iter().any(|&p| {
            *self.kind(p) == NodeKind::Unary(UnaryOp::AddrOf) && self.designates(self.kids(p)[0], e, true)
        })
    }

    fn side_effect(&self, e: NodeId) -> bool {
        matches!(
            self.kind(e),
            NodeKind::Assign(_) | NodeKind::PreIncDec { .. } | NodeKind::PostIncDec { .. } | NodeKind::Call
        )
    }

    fn decl_ref(&self, e: NodeId) -> Option<&macport::c::sema::Decl> {
        if !matches!(self.kind(e), NodeKind::Ident(_)) {
            return None;
        }
        let d = self.tu.ast.nodes[e.0 as usize].decl?;
        let d = &self.tu.sema.decls[d.0 as usize];
        d.kind.is_value().then_some(d)
    }

    fn local_decl_ref(&self, e: NodeId) -> bool {
        self.decl_ref(e)
            .is_some_and(|d| matches!(d.scope, ScopeKind::Block | ScopeKind::Param))
    }

    fn expr(&self, e: NodeId) -> bool {
        self.kind(e).is_expr()
    }

    fn anon_type(&self, e: NodeId) -> bool {
        self.expr(e) && self.ty(e).is_some_and(|t| self.tu.sema.is_anonymous_type(t))
    }

    fn local_type(&self, e: NodeId) -> bool {
        self.expr(e)
            && self
                .ty(e)
                .and_then(|t| self.tu.sema.type_decl(t))
                .is_some_and(|d| matches!(d.scope, ScopeKind::Block | ScopeKind::Param))
    }

    fn cond(&self, e: NodeId) -> bool {
        matches!(
            self.kind(e),
            NodeKind::Conditional | NodeKind::Binary(BinaryOp::LogAnd | BinaryOp::LogOr)
        )
    }
}

fn oracle(w: &World, inv: &InvocationRecord, al: &AlignmentResult, p: PropertyId) -> bool {
    use PropertyId::*;
    let def = w.trace.definition(inv.definition);
    let m = match al.body {
        Some(BodyAlignment::Node(n)) => Some(n),
        _ => None,
    };
    let firsts: Vec<NodeId> = al.args.iter().flatten().copied().collect();
    let uses: Vec<NodeId> = al.occurrences.iter().flatten().copied().collect();
    let in_arg = |n: NodeId| uses.iter().any(|&a| w.in_tree(n, a));
    let body_nodes: Vec<NodeId> = m
        .map(|m| {
            w.subtree(m)
                .into_iter()
                .filter(|&n| !in_arg(w.unparen(n)))
                .collect()
        })
        .unwrap_or_default();
    let decl_in = |decl_node: NodeId| m.is_some_and(|m| w.in_tree(decl_node, m));
    let after = |ordinal| def.ordinal < ordinal;
    let type_after = |n: NodeId| {
        w.ty(n)
            .and_then(|t| w.tu.sema.type_decl(t))
            .is_some_and(|d| after(d.ordinal))
    };

    let unaligned = al.body.is_none() || al.args.iter().any(Option::is_none);
    let survives = [Unaligned, StringizingTokenPasting, ConditionMacro, NestedInBody, NestedInArgument, LocallyDefined];
    if unaligned && !survives.contains(&p) {
        return false;
    }

    match p {
        ModifiedBody => m.is_some_and(|m| w.side_effected(m)),
        ModifiedArguments => uses.iter().any(|&a| w.side_effected(a)),
        AddressedBody => m.is_some_and(|m| w.addressed(m)),
        AddressedArguments => uses.iter().any(|&a| w.addressed(a)),
        Unhygienic => m.is_some_and(|m| {
            w.subtree(m).into_iter().any(|d| {
                w.local_decl_ref(d)
                    && uses.iter().all(|&a| !w.in_tree(d, a))
                    && !decl_in(w.decl_ref(d).unwrap().node)
            })
        }),
        LocallyDefined => w.nodes.iter().any(|&n| {
            let node = &w.tu.ast.nodes[n.0 as usize];
            *w.kind(n) == NodeKind::Compound
                && node.parent.is_some_and(|f| *w.kind(f) == NodeKind::FunctionDef)
                && node.first < def.output_position
                && def.output_position <= node.last
        }),
        UnorderedDeclarations => body_nodes
            .iter()
            .filter_map(|&d| w.decl_ref(d))
            .any(|d| after(d.ordinal) && !decl_in(d.node)),
        UnorderedExpansionType => m.is_some_and(type_after),
        UnorderedTypeDeclarations => body_nodes.iter().any(|&t| {
            matches!(w.kind(t), NodeKind::TypeSpec | NodeKind::TypeName)
                && w.tu.ast.nodes[t.0 as usize].type_refs.iter().any(|d| {
                    let d = &w.tu.sema.decls[d.0 as usize];
                    after(d.ordinal) && !decl_in(d.node)
                })
        }),
        UnorderedArgumentTypes => firsts.iter().any(|&a| type_after(a)),
        UnorderedMacros => w.trace.invocations.iter().any(|n| {
            n.nesting == Nesting::Body(inv.id) && after(w.trace.definition(n.definition).ordinal)
        }),
        ConditionMacro => w.trace.conditionals.iter().any(|c| c.names.contains(&*inv.name)),
        AnonymousType => m.is_some_and(|m| w.anon_type(m)),
        AnonymousArgumentTypes => uses.iter().any(|&a| w.anon_type(a)),
        LocalArgumentTypes => uses.iter().any(|&a| w.local_type(a)),
        LocallyTypedSubexpressions => m.is_some_and(|m| body_nodes.iter().any(|&e| e != m && w.local_type(e))),
        LocalType => m.is_some_and(|m| {
            w.local_type(m) && !decl_in(w.tu.sema.type_decl(w.ty(m).unwrap()).unwrap().node)
        }),
        VoidArguments => firsts.iter().any(|&a| w.ty(a).is_some_and(|t| t.canonical().is_void())),
        SideEffectingArguments => m.is_some_and(|m| {
            w.subtree(m)
                .into_iter()
                .any(|e| w.side_effect(e) && uses.iter().any(|&a| w.in_tree(e, a)))
        }),
        Unaligned => unaligned,
        ConditionalArguments => m.is_some_and(|m| {
            w.subtree(m).into_iter().filter(|&e| w.cond(e)).any(|e| {
                // Operands after the first are the ones that may be skipped.
                w.kids(e)[1..]
                    .iter()
                    .any(|&o| firsts.iter().any(|&a| w.in_tree(a, o)))
            })
        }),
        NestedInBody => w.trace.invocations.iter().any(|n| inv.nesting == Nesting::Body(n.id)),
        NestedInArgument => w
            .trace
            .invocations
            .iter()
            .any(|n| matches!(inv.nesting, Nesting::Argument(parent, _) if parent == n.id)),
        ControlFlow => match al.body {
            Some(BodyAlignment::Keyword { .. }) => true,
            Some(BodyAlignment::Node(n)) => matches!(
                w.kind(n),
                NodeKind::Return | NodeKind::Case | NodeKind::Continue | NodeKind::Break | NodeKind::Goto(_)
            ),
            None => false,
        },
        NonExpressionArguments => firsts.iter().any(|&a| !w.expr(a)),
        StringizingTokenPasting => def.body.iter().any(|t| {
            t.kind == TokenKind::HashHash || (t.kind == TokenKind::Hash && def.kind == MacroKind::FunctionLike)
        }),
    }
}

/// Number of invocations checked and one line per disagreement.
pub fn disagreements(name: &str, source: &str) -> (usize, Vec<String>) {
    let trace = preprocess_str(name, source).unwrap();
    let tu = parse(&trace.output).unwrap();
    let facts = ProgramFacts::new(&tu, &trace);
    let aligner = Aligner::new(&tu);
    let world = World::new(&tu, &trace);
    let mut out = Vec::new();
    for inv in &trace.invocations {
        let al = aligner.align(inv);
        let engine = check_all(inv, &al, &facts);
        for p in PropertyId::ALL {
            let expected = oracle(&world, inv, &al, p);
            if engine.get(p) != expected {
                out.push(format!(
                    "{name}: {} {}: engine {} oracle {expected}",
                    inv.name,
                    p.name(),
                    engine.get(p)
                ));
            }
        }
    }
    (trace.invocations.len(), out)
}
