//! Declarations and the queries the property engine runs against them.

use serde::Serialize;

use crate::pp::Ordinal;

use super::ast::NodeId;
use super::types::Type;
use super::DeclId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeclKind {
    Var,
    Function,
    Param,
    Typedef,
    EnumConstant,
    Field,
    Struct,
    Union,
    Enum,
}

impl DeclKind {
    pub fn is_tag(self) -> bool {
        matches!(self, DeclKind::Struct | DeclKind::Union | DeclKind::Enum)
    }

    pub fn is_type(self) -> bool {
        self.is_tag() || self == DeclKind::Typedef
    }

    /// Objects, functions and enumerators: things an identifier expression
    /// can refer to.
    pub fn is_value(self) -> bool {
        matches!(
            self,
            DeclKind::Var | DeclKind::Function | DeclKind::Param | DeclKind::EnumConstant
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScopeKind {
    File,
    Param,
    Block,
    Member,
}

#[derive(Debug, Clone)]
pub struct Decl {
    pub id: DeclId,
    /// Empty for anonymous structs, unions and enums.
    pub name: String,
    pub kind: DeclKind,
    pub ty: Type,
    /// Node of the first declaration.
    pub node: NodeId,
    /// Name token (or `struct`/`union`/`enum` keyword when anonymous).
    pub token: usize,
    pub scope: ScopeKind,
    pub ordinal: Ordinal,
    pub bit_field: bool,
    /// Members of a struct or union, in order; anonymous members have an
    /// empty name.
    pub fields: Vec<DeclId>,
    pub complete: bool,
}

impl Decl {
    pub fn is_local(&self) -> bool {
        matches!(self.scope, ScopeKind::Block | ScopeKind::Param)
    }

    pub fn is_anonymous(&self) -> bool {
        self.name.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Semantics {
    pub decls: Vec<Decl>,
}

impl Semantics {
    pub fn decl(&self, id: DeclId) -> &Decl {
        &self.decls[id.0 as usize]
    }

    /// Find a member of a struct or union, looking inside anonymous members.
    pub fn field(&self, record: DeclId, name: &str) -> Option<DeclId> {
        find_field(&self.decls, record, name)
    }

    /// The declaration a type refers to after removing pointers and arrays.
    pub fn type_decl(&self, ty: &Type) -> Option<&Decl> {
        ty.declaration().map(|d| self.decl(d))
    }

    /// Whether the type is a struct, union or enum without a tag, reached
    /// without going through a typedef name.
    pub fn is_anonymous_type(&self, ty: &Type) -> bool {
        match ty {
            Type::Pointer(t) | Type::Array(t, _) => self.is_anonymous_type(t),
            Type::Record(d) | Type::Enum(d) => self.decl(*d).is_anonymous(),
            _ => false,
        }
    }

    /// Whether the type's declaration lives in a block or parameter scope.
    pub fn is_local_type(&self, ty: &Type) -> bool {
        self.type_decl(ty).is_some_and(|d| d.is_local())
    }

    /// Spell a declaration of `name` with type `ty`; `None` when the type
    /// cannot be written down (anonymous tags, unknown types).
    pub fn spell_decl(&self, ty: &Type, name: &str) -> Option<String> {
        let (base, decl) = self.spell_parts(ty, name.to_string())?;
        if decl.is_empty() {
            Some(base)
        } else {
            Some(format!("{base} {decl}"))
        }
    }

    pub fn spell_type(&self, ty: &Type) -> Option<String> {
        self.spell_decl(ty, "")
    }

    fn spell_parts(&self, ty: &Type, inner: String) -> Option<(String, String)> {
        match ty {
            Type::Void => Some(("void".into(), inner)),
            Type::Int(k) => Some((k.name().into(), inner)),
            Type::Float(k) => Some((k.name().into(), inner)),
            Type::Complex(k) => Some((format!("{} _Complex", k.name()), inner)),
            Type::Builtin(n) => Some(((*n).into(), inner)),
            Type::Typedef(d, _) => Some((self.decl(*d).name.clone(), inner)),
            Type::Record(d) | Type::Enum(d) => {
                let decl = self.decl(*d);
                if decl.is_anonymous() {
                    return None;
                }
                let kw = match decl.kind {
                    DeclKind::Union => "union",
                    DeclKind::Enum => "enum",
                    _ => "struct",
                };
                Some((format!("{kw} {}", decl.name), inner))
            }
            Type::Pointer(t) => {
                let wrapped = matches!(**t, Type::Array(..) | Type::Function(_));
                let inner = if wrapped {
                    format!("(*{inner})")
                } else {
                    format!("*{inner}")
                };
                self.spell_parts(t, inner)
            }
            Type::Array(t, n) => {
                let size = n.map(|n| n.to_string()).unwrap_or_default();
                self.spell_parts(t, format!("{inner}[{size}]"))
            }
            Type::Function(f) => {
                let mut params: Vec<String> = Vec::new();
                for p in &f.params {
                    params.push(self.spell_type(p)?);
                }
                if f.variadic {
                    params.push("...".into());
                }
                if params.is_empty() && !f.unprototyped {
                    params.push("void".into());
                }
                self.spell_parts(&f.ret, format!("{inner}({})", params.join(", ")))
            }
            Type::Error => None,
        }
    }
}

pub(crate) fn find_field(decls: &[Decl], record: DeclId, name: &str) -> Option<DeclId> {
    for &f in &decls[record.0 as usize].fields {
        let d = &decls[f.0 as usize];
        if d.name == name {
            return Some(f);
        }
        if d.name.is_empty() {
            if let Type::Record(inner) = d.ty.canonical() {
                if let Some(found) = find_field(decls, *inner, name) {
                    return Some(found);
                }
            }
        }
    }
    None
}
