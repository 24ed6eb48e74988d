//! Matching invocation token ranges against syntax-tree nodes.

use std::collections::HashMap;
use std::ops::Range;

use serde::Serialize;

use crate::c::ast::{NodeClass, NodeId, NodeKind};
use crate::c::TranslationUnit;
use crate::pp::{InvocationId, InvocationRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlignmentClass {
    Expression,
    Statement,
    Declaration,
    Type,
    ControlKeyword,
    Unaligned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BodyAlignment {
    /// A node whose extent is exactly the expansion.
    Node(NodeId),
    /// The expansion starts with the keyword of `statement` (`return`,
    /// `case`, `break`, `continue`, `goto`) but covers only part of it.
    Keyword { token: usize, statement: NodeId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlignmentResult {
    pub invocation: InvocationId,
    pub body: Option<BodyAlignment>,
    /// Node of each argument's first substitution.
    pub args: Vec<Option<NodeId>>,
    /// Nodes of every aligned substitution of each argument, in body order.
    pub occurrences: Vec<Vec<NodeId>>,
    pub class: AlignmentClass,
}

impl AlignmentResult {
    /// The aligned node, when the body aligned to a whole node.
    pub fn node(&self) -> Option<NodeId> {
        match self.body {
            Some(BodyAlignment::Node(n)) => Some(n),
            _ => None,
        }
    }

    pub fn is_aligned(&self) -> bool {
        self.body.is_some()
    }
}

/// Nodes of a unit indexed by first token, for repeated alignment.
#[derive(Debug, Clone)]
pub struct Aligner<'a> {
    tu: &'a TranslationUnit,
    /// Reachable nodes by first token, outermost first.
    by_first: HashMap<usize, Vec<NodeId>>,
}

impl<'a> Aligner<'a> {
    pub fn new(tu: &'a TranslationUnit) -> Self {
        let mut by_first: HashMap<usize, Vec<NodeId>> = HashMap::new();
        for n in tu.ast.reachable() {
            if matches!(tu.ast.kind(n), NodeKind::TranslationUnit) {
                continue;
            }
            by_first.entry(tu.node(n).first).or_default().push(n);
        }
        Aligner { tu, by_first }
    }

    /// Outermost node whose extent is exactly `range`. A declaration also
    /// matches its extent without the closing `;`.
    pub fn node_for(&self, range: &Range<usize>) -> Option<NodeId> {
        if range.is_empty() {
            return None;
        }
        let found = self.by_first.get(&range.start)?.iter().copied().find(|&n| {
            let node = self.tu.node(n);
            node.last + 1 == range.end
                || (node.kind == NodeKind::Declaration && node.last == range.end)
        })?;
        (*self.tu.ast.kind(found) != NodeKind::Skipped).then_some(found)
    }

    fn keyword_for(&self, range: &Range<usize>) -> Option<BodyAlignment> {
        if range.is_empty() {
            return None;
        }
        self.by_first.get(&range.start)?.iter().find_map(|&n| {
            let node = self.tu.node(n);
            (node.kind.class() == NodeClass::ControlKeyword && range.end <= node.last + 1).then_some(
                BodyAlignment::Keyword {
                    token: range.start,
                    statement: n,
                },
            )
        })
    }

    pub fn align(&self, inv: &InvocationRecord) -> AlignmentResult {
        let body = self
            .node_for(&inv.expansion)
            .map(BodyAlignment::Node)
            .or_else(|| self.keyword_for(&inv.expansion));
        let class = match body {
            None => AlignmentClass::Unaligned,
            Some(BodyAlignment::Keyword { .. }) => AlignmentClass::ControlKeyword,
            Some(BodyAlignment::Node(n)) => class_of(self.tu.ast.kind(n)),
        };
        let args = inv
            .arg_ranges
            .iter()
            .map(|r| r.as_ref().and_then(|r| self.node_for(r)))
            .collect();
        let occurrences = inv
            .arg_occurrences
            .iter()
            .map(|rs| rs.iter().filter_map(|r| self.node_for(r)).collect())
            .collect();
        AlignmentResult {
            invocation: inv.id,
            body,
            args,
            occurrences,
            class,
        }
    }
}

fn class_of(kind: &NodeKind) -> AlignmentClass {
    match kind.class() {
        NodeClass::Expression => AlignmentClass::Expression,
        NodeClass::Statement => AlignmentClass::Statement,
        NodeClass::Declaration => AlignmentClass::Declaration,
        NodeClass::Type => AlignmentClass::Type,
        NodeClass::ControlKeyword => AlignmentClass::ControlKeyword,
        NodeClass::Other => match kind {
            NodeKind::Designated => AlignmentClass::Expression,
            NodeKind::Label(_) => AlignmentClass::Statement,
            _ => AlignmentClass::Declaration,
        },
    }
}

/// Align a single invocation; prefer [`Aligner`] for many.
pub fn align(inv: &InvocationRecord, tu: &TranslationUnit) -> AlignmentResult {
    Aligner::new(tu).align(inv)
}
