//! Arena-allocated syntax tree over the preprocessed token stream.
//!
//! Node extents are inclusive token indices into the preprocessor output.
//! Extents follow Clang's source ranges: expression statements are the bare
//! expression (there is no wrapper node) and `return`, `break`, `continue`,
//! `goto` and `do ... while (...)` stop before their `;`. Declarations
//! include the `;`.

use std::fmt;

use serde::Serialize;

use super::types::Type;
use super::DeclId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinaryOp {
    Mul,
    Div,
    Rem,
    Add,
    Sub,
    Shl,
    Shr,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    BitAnd,
    BitXor,
    BitOr,
    LogAnd,
    LogOr,
}

impl BinaryOp {
    pub fn from_punct(s: &str) -> Option<BinaryOp> {
        use BinaryOp::*;
        Some(match s {
            "*" => Mul,
            "/" => Div,
            "%" => Rem,
            "+" => Add,
            "-" => Sub,
            "<<" => Shl,
            ">>" => Shr,
            "<" => Lt,
            ">" => Gt,
            "<=" => Le,
            ">=" => Ge,
            "==" => Eq,
            "!=" => Ne,
            "&" => BitAnd,
            "^" => BitXor,
            "|" => BitOr,
            "&&" => LogAnd,
            "||" => LogOr,
            _ => return None,
        })
    }

    pub fn precedence(self) -> u8 {
        use BinaryOp::*;
        match self {
            Mul | Div | Rem => 10,
            Add | Sub => 9,
            Shl | Shr => 8,
            Lt | Gt | Le | Ge => 7,
            Eq | Ne => 6,
            BitAnd => 5,
            BitXor => 4,
            BitOr => 3,
            LogAnd => 2,
            LogOr => 1,
        }
    }

    pub fn is_comparison(self) -> bool {
        use BinaryOp::*;
        matches!(self, Lt | Gt | Le | Ge | Eq | Ne)
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinaryOp::LogAnd | BinaryOp::LogOr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnaryOp {
    AddrOf,
    Deref,
    Plus,
    Minus,
    BitNot,
    Not,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    TranslationUnit,

    // Declarations.
    FunctionDef,
    /// Declaration statement or external declaration, including `;`.
    /// Children: `TypeSpec`, then `InitDeclarator`s.
    Declaration,
    /// Type specifiers of a declaration (storage classes excluded).
    TypeSpec,
    /// `struct`/`union` or `enum` with a body, or a bare tag declaration.
    TagDecl,
    /// One declarator with its initializer or bit-field width.
    InitDeclarator,
    ParamDecl,
    Enumerator,
    /// Type name in a cast, `sizeof`, compound literal or builtin.
    TypeName,
    StaticAssert,

    // Statements.
    Compound,
    If,
    While,
    DoWhile,
    For,
    Switch,
    Case,
    Default,
    Label(String),
    Goto(String),
    Break,
    Continue,
    Return,
    Null,
    Asm,

    // Expressions.
    Ident(String),
    IntLit,
    FloatLit,
    CharLit,
    StrLit,
    Paren,
    Call,
    Index,
    Member { arrow: bool, field: String },
    PostIncDec { inc: bool },
    PreIncDec { inc: bool },
    Unary(UnaryOp),
    Cast,
    SizeofExpr,
    SizeofType,
    AlignofType,
    Binary(BinaryOp),
    /// Simple (`None`) or compound assignment.
    Assign(Option<BinaryOp>),
    Conditional,
    Comma,
    CompoundLiteral,
    InitList,
    /// `.field =` or `[index] =` inside an initializer list.
    Designated,
    StmtExpr,
    VaArg,
    Offsetof,
    TypesCompatible,

    /// Tokens the parser could not make sense of.
    Skipped,
}

/// Coarse syntactic class, used when aligning token ranges with nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeClass {
    Expression,
    Statement,
    Declaration,
    Type,
    /// `return`, `case`, `break`, `continue` or `goto`.
    ControlKeyword,
    Other,
}

impl NodeKind {
    pub fn is_expr(&self) -> bool {
        use NodeKind::*;
        matches!(
            self,
            Ident(_)
                | IntLit
                | FloatLit
                | CharLit
                | StrLit
                | Paren
                | Call
                | Index
                | Member { .. }
                | PostIncDec { .. }
                | PreIncDec { .. }
                | Unary(_)
                | Cast
                | SizeofExpr
                | SizeofType
                | AlignofType
                | Binary(_)
                | Assign(_)
                | Conditional
                | Comma
                | CompoundLiteral
                | InitList
                | StmtExpr
                | VaArg
                | Offsetof
                | TypesCompatible
        )
    }

    pub fn is_stmt(&self) -> bool {
        use NodeKind::*;
        matches!(
            self,
            Compound
                | If
                | While
                | DoWhile
                | For
                | Switch
                | Case
                | Default
                | Label(_)
                | Goto(_)
                | Break
                | Continue
                | Return
                | Null
                | Asm
        )
    }

    pub fn class(&self) -> NodeClass {
        use NodeKind::*;
        match self {
            Return | Case | Break | Continue | Goto(_) => NodeClass::ControlKeyword,
            TypeSpec | TypeName => NodeClass::Type,
            Declaration | FunctionDef | TagDecl | StaticAssert => NodeClass::Declaration,
            k if k.is_expr() => NodeClass::Expression,
            k if k.is_stmt() => NodeClass::Statement,
            _ => NodeClass::Other,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
    /// First token, inclusive.
    pub first: usize,
    /// Last token, inclusive.
    pub last: usize,
    /// Type of an expression, or the type named by a `TypeSpec`/`TypeName`.
    pub ty: Option<Type>,
    /// Declaration referenced (identifiers) or introduced (declarators,
    /// parameters, enumerators, tag declarations, function definitions).
    pub decl: Option<DeclId>,
    /// Typedef, struct, union and enum declarations a type mentions.
    pub type_refs: Vec<DeclId>,
    /// Bit-field member access.
    pub bit_field: bool,
}

impl Node {
    pub fn extent(&self) -> std::ops::Range<usize> {
        self.first..self.last + 1
    }
}

#[derive(Debug, Clone, Default)]
pub struct Ast {
    pub nodes: Vec<Node>,
}

impl Ast {
    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0 as usize]
    }

    pub fn kind(&self, id: NodeId) -> &NodeKind {
        &self.node(id).kind
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.node(id).children
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.node(id).parent
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `id` and all its descendants, preorder.
    pub fn subtree(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.children(n).iter().rev());
        }
        out
    }

    /// Whether `inner` is `outer` or one of its descendants.
    pub fn in_tree(&self, inner: NodeId, outer: NodeId) -> bool {
        let mut cur = Some(inner);
        while let Some(n) = cur {
            if n == outer {
                return true;
            }
            cur = self.parent(n);
        }
        false
    }

    /// Skip any number of enclosing parentheses.
    pub fn strip_parens(&self, mut id: NodeId) -> NodeId {
        while *self.kind(id) == NodeKind::Paren {
            id = self.children(id)[0];
        }
        id
    }

    /// Nodes reachable from the root, preorder.
    pub fn reachable(&self) -> Vec<NodeId> {
        if self.nodes.is_empty() {
            return Vec::new();
        }
        self.subtree(self.root())
    }

    /// Indented dump for debugging and test failure messages.
    pub fn dump(&self, id: NodeId, tokens: &[crate::lex::Token]) -> String {
        let mut s = String::new();
        self.dump_into(id, tokens, 0, &mut s);
        s
    }

    fn dump_into(&self, id: NodeId, tokens: &[crate::lex::Token], depth: usize, s: &mut String) {
        use fmt::Write;
        let n = self.node(id);
        let text: Vec<&str> = tokens
            .get(n.first..=n.last.min(tokens.len().saturating_sub(1)))
            .unwrap_or(&[])
            .iter()
            .map(|t| &*t.text)
            .collect();
        let _ = writeln!(s, "{:indent$}{:?} [{}..={}] `{}`", "", n.kind, n.first, n.last, text.join(" "), indent = depth * 2);
        for &c in &n.children {
            self.dump_into(c, tokens, depth + 1, s);
        }
    }
}
