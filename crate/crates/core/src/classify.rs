//! Portability categories, definition verdicts and corpus statistics.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::align::AlignmentClass;
use crate::pp::{InvocationId, MacroKind};
use crate::props::{PropertyGroup, PropertyId, PropertySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PortabilityCategory {
    DefinitionAdapting,
    CallingConventionAdapting,
    ScopeAdapting,
    MultipleInterfaceEquivalent,
    Thunkizing,
    CallsiteContextAltering,
    Nested,
    Metaprogramming,
    MultipleNonInterfaceEquivalent,
}

impl PortabilityCategory {
    pub const ALL: [PortabilityCategory; 9] = [
        PortabilityCategory::DefinitionAdapting,
        PortabilityCategory::CallingConventionAdapting,
        PortabilityCategory::ScopeAdapting,
        PortabilityCategory::MultipleInterfaceEquivalent,
        PortabilityCategory::Thunkizing,
        PortabilityCategory::CallsiteContextAltering,
        PortabilityCategory::Nested,
        PortabilityCategory::Metaprogramming,
        PortabilityCategory::MultipleNonInterfaceEquivalent,
    ];

    pub fn is_interface_equivalent(self) -> bool {
        use PortabilityCategory::*;
        matches!(
            self,
            DefinitionAdapting | CallingConventionAdapting | ScopeAdapting | MultipleInterfaceEquivalent
        )
    }

    pub fn from_group(g: PropertyGroup) -> PortabilityCategory {
        match g {
            PropertyGroup::CallingConventionAdapting => PortabilityCategory::CallingConventionAdapting,
            PropertyGroup::ScopeAdapting => PortabilityCategory::ScopeAdapting,
            PropertyGroup::Thunkizing => PortabilityCategory::Thunkizing,
            PropertyGroup::CallsiteContextAltering => PortabilityCategory::CallsiteContextAltering,
            PropertyGroup::Nested => PortabilityCategory::Nested,
            PropertyGroup::Metaprogramming => PortabilityCategory::Metaprogramming,
        }
    }

    pub fn name(self) -> &'static str {
        use PortabilityCategory::*;
        match self {
            DefinitionAdapting => "definition-adapting",
            CallingConventionAdapting => "calling-convention-adapting",
            ScopeAdapting => "scope-adapting",
            MultipleInterfaceEquivalent => "multiple-interface-equivalent",
            Thunkizing => "thunkizing",
            CallsiteContextAltering => "callsite-context-altering",
            Nested => "nested",
            Metaprogramming => "metaprogramming",
            MultipleNonInterfaceEquivalent => "multiple-non-interface-equivalent",
        }
    }
}

impl fmt::Display for PortabilityCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Category of a single invocation.
pub fn categorize_invocation(props: &PropertySet, class: AlignmentClass) -> PortabilityCategory {
    let groups = props.groups();
    let non_ie: Vec<PropertyGroup> = groups
        .iter()
        .copied()
        .filter(|g| !g.is_interface_equivalent())
        .collect();
    if class == AlignmentClass::Type && !props.get(PropertyId::Unaligned) {
        return PortabilityCategory::ScopeAdapting;
    }
    match non_ie.as_slice() {
        [] => {}
        [g] => return PortabilityCategory::from_group(*g),
        _ => return PortabilityCategory::MultipleNonInterfaceEquivalent,
    }
    match groups.as_slice() {
        [] => PortabilityCategory::DefinitionAdapting,
        [g] => PortabilityCategory::from_group(*g),
        _ => PortabilityCategory::MultipleInterfaceEquivalent,
    }
}

/// Combine the categories of a definition's invocations.
pub fn aggregate_categories(categories: &[PortabilityCategory]) -> Option<PortabilityCategory> {
    let first = *categories.first()?;
    if categories.iter().all(|&c| c == first) {
        Some(first)
    } else if categories.iter().all(|c| c.is_interface_equivalent()) {
        Some(PortabilityCategory::MultipleInterfaceEquivalent)
    } else {
        Some(PortabilityCategory::MultipleNonInterfaceEquivalent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalyzabilityNote {
    Normal,
    NeverInvoked,
    /// At least one invocation aligned to a type and was treated as
    /// scope-adapting.
    TypeAlignedConservative,
    /// Variadic definitions are reported as metaprogramming.
    VariadicFlagged,
    /// A bit-field argument is modified or addressed, which a function
    /// parameter cannot express.
    BitFieldArgument,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SourceLocation {
    pub file: String,
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// What the classifier needs to know about one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvocationVerdict {
    #[serde(skip)]
    pub id: InvocationId,
    pub location: SourceLocation,
    /// Location of the outermost enclosing invocation; equal to `location`
    /// for top-level invocations.
    pub site: SourceLocation,
    /// Distinguishes invocations sharing `location` and `site`.
    pub index: u32,
    #[serde(serialize_with = "serialize_props")]
    pub properties: PropertySet,
    pub alignment: AlignmentClass,
    /// The body aligned to an expression built from literals and
    /// enumeration constants only.
    #[serde(skip)]
    pub constant: bool,
    /// A bit-field argument is modified or has its address taken.
    #[serde(skip)]
    pub bit_field_argument: bool,
    pub category: PortabilityCategory,
}

impl InvocationVerdict {
    pub fn key(&self) -> (&SourceLocation, &SourceLocation, u32) {
        (&self.location, &self.site, self.index)
    }
}

fn serialize_props<S: Serializer>(p: &PropertySet, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(p.names())
}

/// Category of an invocation after the bit-field rule.
pub fn invocation_category(props: &PropertySet, class: AlignmentClass, bit_field_argument: bool) -> PortabilityCategory {
    let c = categorize_invocation(props, class);
    if bit_field_argument && c.is_interface_equivalent() {
        PortabilityCategory::CallsiteContextAltering
    } else {
        c
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DefinitionRef {
    pub name: String,
    pub location: SourceLocation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefinitionVerdict {
    pub definition: DefinitionRef,
    pub kind: MacroKind,
    pub variadic: bool,
    pub invocations: Vec<InvocationVerdict>,
    /// `None` when the definition was never invoked.
    pub category: Option<PortabilityCategory>,
    pub note: AnalyzabilityNote,
    pub baseline: bool,
}

impl DefinitionVerdict {
    pub fn invocation_count(&self) -> usize {
        self.invocations.len()
    }

    pub fn properties(&self) -> PropertySet {
        let mut acc = PropertySet::empty(InvocationId(0));
        for inv in &self.invocations {
            acc = acc.union(&inv.properties);
        }
        acc
    }

    pub fn is_interface_equivalent(&self) -> bool {
        self.category.is_some_and(PortabilityCategory::is_interface_equivalent)
    }

    /// Every invocation aligned, with at least one invocation.
    pub fn is_aligned(&self) -> bool {
        !self.invocations.is_empty()
            && self
                .invocations
                .iter()
                .all(|i| !i.properties.get(PropertyId::Unaligned))
    }
}

/// Build a definition verdict from its invocations. Invocations are
/// sorted by key so the result does not depend on input order.
pub fn aggregate_definition(
    definition: DefinitionRef,
    kind: MacroKind,
    variadic: bool,
    mut invocations: Vec<InvocationVerdict>,
) -> DefinitionVerdict {
    invocations.sort_by(|a, b| a.key().cmp(&b.key()));
    let categories: Vec<PortabilityCategory> = invocations.iter().map(|i| i.category).collect();
    let mut category = aggregate_categories(&categories);
    let note = if invocations.is_empty() {
        AnalyzabilityNote::NeverInvoked
    } else if variadic {
        category = Some(PortabilityCategory::Metaprogramming);
        AnalyzabilityNote::VariadicFlagged
    } else if invocations.iter().any(|i| i.bit_field_argument) {
        AnalyzabilityNote::BitFieldArgument
    } else if invocations
        .iter()
        .any(|i| i.alignment == AlignmentClass::Type && i.category == PortabilityCategory::ScopeAdapting)
    {
        AnalyzabilityNote::TypeAlignedConservative
    } else {
        AnalyzabilityNote::Normal
    };
    let baseline = baseline_mennie(kind, &invocations);
    DefinitionVerdict {
        definition,
        kind,
        variadic,
        invocations,
        category,
        note,
        baseline,
    }
}

/// The prior-work baseline: object-like macros whose every invocation is a
/// constant expression with no property.
pub fn baseline_mennie(kind: MacroKind, invocations: &[InvocationVerdict]) -> bool {
    kind == MacroKind::ObjectLike
        && !invocations.is_empty()
        && invocations
            .iter()
            .all(|i| i.constant && i.properties.is_empty())
}

/// IE-to-baseline ratio; infinite when the baseline is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Finite(f64),
    Infinite,
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Ratio::Finite(r) => s.serialize_f64(*r),
            Ratio::Infinite => s.serialize_str("inf"),
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(r) => write!(f, "{r:.2}"),
            Ratio::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    /// Definitions with at least one invocation.
    pub definitions: usize,
    pub never_invoked: usize,
    pub categories: BTreeMap<PortabilityCategory, usize>,
    pub interface_equivalent: usize,
    pub interface_equivalent_percent: f64,
    pub aligned: usize,
    pub aligned_percent: f64,
    pub baseline: usize,
    pub ratio: Ratio,
}

fn percent(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        100.0 * n as f64 / d as f64
    }
}

pub fn summarize(verdicts: &[DefinitionVerdict]) -> SummaryStats {
    let analyzed: Vec<&DefinitionVerdict> = verdicts.iter().filter(|v| v.category.is_some()).collect();
    let mut categories: BTreeMap<PortabilityCategory, usize> =
        PortabilityCategory::ALL.into_iter().map(|c| (c, 0)).collect();
    for v in &analyzed {
        *categories.get_mut(&v.category.unwrap()).unwrap() += 1;
    }
    let ie = analyzed.iter().filter(|v| v.is_interface_equivalent()).count();
    let aligned = analyzed.iter().filter(|v| v.is_aligned()).count();
    let baseline = analyzed.iter().filter(|v| v.baseline).count();
    assert!(
        aligned >= ie,
        "interface-equivalent definitions must be aligned ({aligned} aligned, {ie} interface-equivalent)"
    );
    SummaryStats {
        definitions: analyzed.len(),
        never_invoked: verdicts.len() - analyzed.len(),
        categories,
        interface_equivalent: ie,
        interface_equivalent_percent: percent(ie, analyzed.len()),
        aligned,
        aligned_percent: percent(aligned, analyzed.len()),
        baseline,
        ratio: if baseline == 0 {
            Ratio::Infinite
        } else {
            Ratio::Finite(ie as f64 / baseline as f64)
        },
    }
}
