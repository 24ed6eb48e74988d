//! C function suggestions for macros that can become functions.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use crate::align::{AlignmentClass, AlignmentResult};
use crate::c::ast::NodeId;
use crate::c::sema::Semantics;
use crate::c::types::{usual_arithmetic, Type};
use crate::classify::{DefinitionRef, DefinitionVerdict, PortabilityCategory};
use crate::lex::{Token, TokenKind};
use crate::pp::{InvocationRecord, MacroDefinition, MacroKind, Nesting};
use crate::props::{FactQuery, ProgramFacts};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Passing {
    ByValue,
    ByAddress,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Param {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
    pub passing: Passing,
}

impl Param {
    fn declaration(&self, sema: &Semantics, ty: &Type) -> Option<String> {
        match self.passing {
            Passing::ByValue => sema.spell_decl(&ty.decay(), &self.name),
            Passing::ByAddress => sema.spell_decl(&Type::pointer_to(ty.decay()), &self.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "names", rename_all = "kebab-case")]
pub enum Adaptation {
    /// Arguments passed by address; the body dereferences them.
    Pointerize(Vec<String>),
    /// The function returns the address of the body's object.
    PointerizeReturn,
    /// Captured locals appended as parameters.
    CaptureParams(Vec<String>),
    /// Declarations and macros to move above the definition.
    ReorderDecls(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FunctionSuggestion {
    pub target: DefinitionRef,
    pub name: String,
    pub return_type: String,
    pub params: Vec<Param>,
    /// Complete function definition.
    pub text: String,
    pub adaptations: Vec<Adaptation>,
    pub confidence: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum NotApplicable {
    NeverInvoked,
    /// Invocations disagree on the type at `position`.
    Polymorphic {
        position: String,
        first: String,
        second: String,
    },
    /// Not every invocation aligns to a typed expression or statement.
    Untyped { position: String },
    /// A type that cannot be written down, such as an anonymous struct.
    Unspellable { position: String },
    Category {
        category: PortabilityCategory,
        hint: String,
    },
}

impl fmt::Display for NotApplicable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NotApplicable::NeverInvoked => f.write_str("never invoked"),
            NotApplicable::Polymorphic {
                position,
                first,
                second,
            } => write!(f, "polymorphic {position}: {first} vs {second}"),
            NotApplicable::Untyped { position } => write!(f, "no type for {position}"),
            NotApplicable::Unspellable { position } => write!(f, "cannot spell the type of {position}"),
            NotApplicable::Category { category, hint } => write!(f, "{category}: {hint}"),
        }
    }
}

/// Inferred types; `ret` is `void` for statement bodies.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    pub ret: Type,
    pub params: Vec<Type>,
}

/// Common type of two observations: identical types, integer types under
/// the usual arithmetic conversions, or the wider floating type. Pointers
/// and everything else must match exactly.
pub fn join_types(a: &Type, b: &Type) -> Option<Type> {
    let (ca, cb) = (a.canonical(), b.canonical());
    if ca == cb {
        return Some(a.clone());
    }
    match (ca, cb) {
        _ if a.is_integer() && b.is_integer() => Some(usual_arithmetic(a, b)),
        (Type::Float(x), Type::Float(y)) => Some(Type::Float((*x).max(*y))),
        _ => None,
    }
}

fn spell(sema: &Semantics, ty: &Type) -> String {
    sema.spell_type(ty).unwrap_or_else(|| "<unnamed>".into())
}

fn join_all(
    sema: &Semantics,
    position: &str,
    types: impl IntoIterator<Item = Option<Type>>,
) -> Result<Type, NotApplicable> {
    let mut acc: Option<Type> = None;
    for t in types {
        let t = match t {
            Some(t) if !t.is_error() => t.decay(),
            _ => {
                return Err(NotApplicable::Untyped {
                    position: position.into(),
                })
            }
        };
        acc = Some(match acc {
            None => t,
            Some(a) => join_types(&a, &t).ok_or_else(|| NotApplicable::Polymorphic {
                position: position.into(),
                first: spell(sema, &a),
                second: spell(sema, &t),
            })?,
        });
    }
    acc.ok_or(NotApplicable::NeverInvoked)
}

/// Return and parameter types common to all invocations.
pub fn infer_signature(
    def: &MacroDefinition,
    uses: &[(&InvocationRecord, &AlignmentResult)],
    facts: &ProgramFacts,
) -> Result<Signature, NotApplicable> {
    let tu = facts.tu;
    if uses.is_empty() {
        return Err(NotApplicable::NeverInvoked);
    }
    let statement = uses.iter().any(|(_, a)| a.class == AlignmentClass::Statement);
    let ret = if statement {
        if uses.iter().any(|(_, a)| a.class != AlignmentClass::Statement) {
            return Err(NotApplicable::Untyped {
                position: "return value".into(),
            });
        }
        Type::Void
    } else {
        join_all(
            &tu.sema,
            "return value",
            uses.iter().map(|(_, a)| match a.class {
                AlignmentClass::Expression => a.node().and_then(|n| facts.ty(n).cloned()),
                _ => None,
            }),
        )?
    };
    let params = (0..def.arity())
        .map(|k| {
            join_all(
                &tu.sema,
                &format!("parameter {}", def.params[k]),
                uses.iter().map(|(_, a)| {
                    a.args
                        .get(k)
                        .copied()
                        .flatten()
                        .filter(|&n| facts.is(FactQuery::Exprs, n))
                        .and_then(|n| facts.ty(n).cloned())
                }),
            )
        })
        .collect::<Result<Vec<Type>, _>>()?;
    Ok(Signature { ret, params })
}

/// A local the body uses without receiving it as an argument.
#[derive(Debug, Clone, PartialEq)]
pub struct Capture {
    pub name: String,
    pub ty: Type,
    pub by_address: bool,
}

/// Calling-convention and scope facts a suggestion has to account for.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdaptationFacts {
    /// Argument positions modified or addressed in some invocation.
    pub by_address: BTreeSet<usize>,
    pub pointer_return: bool,
    pub captures: Vec<Capture>,
    /// Declarations and macros referenced before they are defined.
    pub reorder: BTreeSet<String>,
}

pub fn adaptation_facts(
    def: &MacroDefinition,
    uses: &[(&InvocationRecord, &AlignmentResult)],
    facts: &ProgramFacts,
) -> AdaptationFacts {
    let tu = facts.tu;
    let trace = facts.trace;
    let mut out = AdaptationFacts::default();
    let mut captures: BTreeMap<String, Capture> = BTreeMap::new();
    let changed = |n: NodeId| facts.is(FactQuery::SideEffectedExprs, n) || facts.is(FactQuery::AddressedExprs, n);
    for (inv, al) in uses {
        for (k, occ) in al.occurrences.iter().enumerate() {
            if occ.iter().any(|&n| changed(n)) {
                out.by_address.insert(k);
            }
        }
        let Some(m) = al.node() else {
            continue;
        };
        if changed(m) {
            out.pointer_return = true;
        }
        let in_arg = |n: NodeId| al.occurrences.iter().flatten().any(|&a| facts.in_tree(n, a));
        for r in facts.query(FactQuery::DeclRefs, m) {
            if in_arg(r) {
                continue;
            }
            let Some(d) = facts.decl_of(r) else { continue };
            if def.ordinal < d.ordinal {
                out.reorder.insert(d.name.clone());
            }
            if d.is_local() && !facts.decl_in(d, m) {
                let c = captures.entry(d.name.clone()).or_insert_with(|| Capture {
                    name: d.name.clone(),
                    ty: d.ty.clone(),
                    by_address: false,
                });
                c.by_address |= changed(r);
            }
        }
        for t in facts.query(FactQuery::TypeRefs, m) {
            for &d in &tu.node(t).type_refs {
                let d = tu.sema.decl(d);
                if def.ordinal < d.ordinal && !in_arg(t) {
                    out.reorder.insert(d.name.clone());
                }
            }
        }
        let mut typed: Vec<&Type> = facts.ty(m).into_iter().collect();
        typed.extend(al.args.iter().flatten().filter_map(|&a| facts.ty(a)));
        for ty in typed {
            if let Some(d) = facts.type_decl(ty) {
                if def.ordinal < d.ordinal && !d.name.is_empty() {
                    out.reorder.insert(d.name.clone());
                }
            }
        }
        for child in trace.children(inv.id) {
            if matches!(child.nesting, Nesting::Body(_)) {
                let cd = trace.definition(child.definition);
                if def.ordinal < cd.ordinal {
                    out.reorder.insert(cd.name.to_string());
                }
            }
        }
    }
    out.captures = captures.into_values().collect();
    out
}

/// Why a non-interface-equivalent category cannot become a function, and
/// what to do instead.
pub fn category_hint(category: PortabilityCategory) -> &'static str {
    use PortabilityCategory::*;
    match category {
        Thunkizing => "pass the argument as a thunk (a function computing it) so its evaluation stays deferred",
        CallsiteContextAltering => {
            "the expansion is not a single syntactic unit at every call site; parenthesize the body or rewrite the call sites"
        }
        Nested => "convert the enclosing macro first; that removes the nesting",
        Metaprogramming => "the macro generates code (control flow, stringizing, pasting or non-expression arguments) and has no function equivalent",
        MultipleNonInterfaceEquivalent => "several call-site-changing properties hold; address each one before converting",
        _ => "",
    }
}

/// Body tokens with uses of `names` replaced by `(*name)`. Member names
/// after `.` and `->` are left alone.
fn dereference(body: &[Token], names: &HashSet<&str>) -> String {
    let mut out = String::new();
    for (i, t) in body.iter().enumerate() {
        if i > 0 && t.leading_space {
            out.push(' ');
        }
        let member = i > 0 && (body[i - 1].is(".") || body[i - 1].is("->"));
        if t.kind == TokenKind::Identifier && !member && names.contains(&*t.text) {
            out.push_str(&format!("(*{})", t.text));
        } else {
            out.push_str(&t.text);
        }
    }
    out
}

/// Suggest a function for an interface-equivalent definition.
///
/// `taken` holds names already in use (declarations and macros); a
/// suggestion whose lowercased name is taken gets an `_fn` suffix.
pub fn suggest_function(
    def: &MacroDefinition,
    verdict: &DefinitionVerdict,
    signature: &Signature,
    adapt: &AdaptationFacts,
    sema: &Semantics,
    taken: &HashSet<String>,
) -> Result<FunctionSuggestion, NotApplicable> {
    let category = verdict.category.ok_or(NotApplicable::NeverInvoked)?;
    if !category.is_interface_equivalent() {
        return Err(NotApplicable::Category {
            category,
            hint: category_hint(category).into(),
        });
    }
    let mut name = def.name.to_lowercase();
    if taken.contains(&name) || name == *def.name {
        name.push_str("_fn");
    }

    let mut params = Vec::new();
    let mut decls = Vec::new();
    let mut deref: HashSet<&str> = HashSet::new();
    for (k, ty) in signature.params.iter().enumerate() {
        let by_address = adapt.by_address.contains(&k);
        let p = Param {
            name: def.params[k].clone(),
            ty: spell(sema, &ty.decay()),
            passing: if by_address { Passing::ByAddress } else { Passing::ByValue },
        };
        if by_address {
            deref.insert(&def.params[k]);
        }
        decls.push(p.declaration(sema, ty).ok_or_else(|| NotApplicable::Unspellable {
            position: format!("parameter {}", p.name),
        })?);
        params.push(p);
    }
    for c in &adapt.captures {
        let p = Param {
            name: c.name.clone(),
            ty: spell(sema, &c.ty.decay()),
            passing: if c.by_address { Passing::ByAddress } else { Passing::ByValue },
        };
        if c.by_address {
            deref.insert(&c.name);
        }
        decls.push(p.declaration(sema, &c.ty).ok_or_else(|| NotApplicable::Unspellable {
            position: format!("captured {}", c.name),
        })?);
        params.push(p);
    }

    let body = dereference(&def.body, &deref);
    let statement = signature.ret.is_void() && verdict.invocations.iter().all(|i| i.alignment == AlignmentClass::Statement);
    let ret_ty = if adapt.pointer_return && !statement {
        Type::pointer_to(signature.ret.clone())
    } else {
        signature.ret.clone()
    };
    let return_type = sema.spell_type(&ret_ty).ok_or_else(|| NotApplicable::Unspellable {
        position: "return value".into(),
    })?;
    let param_text = if decls.is_empty() {
        "void".to_string()
    } else {
        decls.join(", ")
    };
    let head = sema
        .spell_decl(
            &ret_ty,
            &format!("{name}({param_text})"),
        )
        .unwrap_or_else(|| format!("{return_type} {name}({param_text})"));
    let text = if statement {
        if def.body.first().is_some_and(|t| t.is("{")) && def.body.last().is_some_and(|t| t.is("}")) {
            format!("{head} {body}")
        } else {
            format!("{head} {{ {body}; }}")
        }
    } else if adapt.pointer_return {
        format!("{head} {{ return &({body}); }}")
    } else if signature.ret.is_void() {
        format!("{head} {{ {body}; }}")
    } else {
        format!("{head} {{ return {body}; }}")
    };

    let mut adaptations = Vec::new();
    let pointerized: Vec<String> = params
        .iter()
        .take(signature.params.len())
        .filter(|p| p.passing == Passing::ByAddress)
        .map(|p| p.name.clone())
        .collect();
    if !pointerized.is_empty() {
        adaptations.push(Adaptation::Pointerize(pointerized));
    }
    if adapt.pointer_return && !statement {
        adaptations.push(Adaptation::PointerizeReturn);
    }
    if !adapt.captures.is_empty() {
        adaptations.push(Adaptation::CaptureParams(
            adapt.captures.iter().map(|c| c.name.clone()).collect(),
        ));
    }
    if !adapt.reorder.is_empty() {
        adaptations.push(Adaptation::ReorderDecls(adapt.reorder.iter().cloned().collect()));
    }
    let confidence = if adaptations.is_empty() {
        if def.kind == MacroKind::ObjectLike {
            "body copied verbatim; call sites need `()`".to_string()
        } else {
            "body copied verbatim".to_string()
        }
    } else {
        let mut notes = Vec::new();
        if adaptations.iter().any(|a| matches!(a, Adaptation::Pointerize(_) | Adaptation::CaptureParams(_))) {
            notes.push("call sites must pass the extra or by-address arguments");
        }
        if adapt.pointer_return && !statement {
            notes.push("call sites must dereference the result");
        }
        if !adapt.reorder.is_empty() {
            notes.push("move the listed declarations above the function");
        }
        notes.join("; ")
    };

    Ok(FunctionSuggestion {
        target: verdict.definition.clone(),
        name,
        return_type,
        params,
        text,
        adaptations,
        confidence,
    })
}
