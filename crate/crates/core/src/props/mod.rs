//! The 26 invocation properties and their evaluation.

mod eval;
mod facts;

use std::fmt;

use serde::{Serialize, Serializer};

use crate::pp::InvocationId;

pub use eval::{check_all, check_property};
pub use facts::{FactQuery, ProgramFacts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropertyGroup {
    CallingConventionAdapting,
    ScopeAdapting,
    Thunkizing,
    CallsiteContextAltering,
    Nested,
    Metaprogramming,
}

impl PropertyGroup {
    pub const ALL: [PropertyGroup; 6] = [
        PropertyGroup::CallingConventionAdapting,
        PropertyGroup::ScopeAdapting,
        PropertyGroup::Thunkizing,
        PropertyGroup::CallsiteContextAltering,
        PropertyGroup::Nested,
        PropertyGroup::Metaprogramming,
    ];

    pub fn is_interface_equivalent(self) -> bool {
        matches!(
            self,
            PropertyGroup::CallingConventionAdapting | PropertyGroup::ScopeAdapting
        )
    }
}

macro_rules! properties {
    ($($group:ident { $($name:ident),* $(,)? })*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum PropertyId {
            $($($name,)*)*
        }

        impl PropertyId {
            pub const ALL: [PropertyId; 26] = [$($(PropertyId::$name,)*)*];

            pub fn group(self) -> PropertyGroup {
                match self {
                    $($(PropertyId::$name)|* => PropertyGroup::$group,)*
                }
            }

            pub fn name(self) -> &'static str {
                match self {
                    $($(PropertyId::$name => stringify!($name),)*)*
                }
            }
        }
    };
}

properties! {
    CallingConventionAdapting {
        ModifiedBody, ModifiedArguments, AddressedBody, AddressedArguments, Unhygienic,
    }
    ScopeAdapting {
        LocallyDefined, UnorderedDeclarations, UnorderedExpansionType,
        UnorderedTypeDeclarations, UnorderedArgumentTypes, UnorderedMacros,
        ConditionMacro, AnonymousType, AnonymousArgumentTypes, LocalArgumentTypes,
        LocallyTypedSubexpressions, LocalType,
    }
    Thunkizing { VoidArguments, SideEffectingArguments }
    CallsiteContextAltering { Unaligned, ConditionalArguments }
    Nested { NestedInBody, NestedInArgument }
    Metaprogramming { ControlFlow, NonExpressionArguments, StringizingTokenPasting }
}

impl PropertyId {
    pub fn from_name(name: &str) -> Option<PropertyId> {
        PropertyId::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Properties that stay meaningful when the body does not align: they
    /// read only tokens, the expansion trace or the definition site.
    pub fn survives_unaligned(self) -> bool {
        use PropertyId::*;
        matches!(
            self,
            Unaligned
                | StringizingTokenPasting
                | ConditionMacro
                | NestedInBody
                | NestedInArgument
                | LocallyDefined
        )
    }

    fn bit(self) -> u32 {
        1 << self as u32
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for PropertyId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Truth values of all properties for one invocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PropertySet {
    pub invocation: InvocationId,
    bits: u32,
}

impl PropertySet {
    pub fn empty(invocation: InvocationId) -> Self {
        PropertySet {
            invocation,
            bits: 0,
        }
    }

    pub fn from_iter(invocation: InvocationId, props: impl IntoIterator<Item = PropertyId>) -> Self {
        let mut s = PropertySet::empty(invocation);
        for p in props {
            s.insert(p);
        }
        s
    }

    pub fn get(&self, p: PropertyId) -> bool {
        self.bits & p.bit() != 0
    }

    pub fn set(&mut self, p: PropertyId, value: bool) {
        if value {
            self.bits |= p.bit();
        } else {
            self.bits &= !p.bit();
        }
    }

    pub fn insert(&mut self, p: PropertyId) {
        self.set(p, true);
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// True properties, in declaration order.
    pub fn iter(&self) -> impl Iterator<Item = PropertyId> + '_ {
        PropertyId::ALL.into_iter().filter(|&p| self.get(p))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.iter().map(PropertyId::name).collect()
    }

    /// Groups with at least one true property.
    pub fn groups(&self) -> Vec<PropertyGroup> {
        PropertyGroup::ALL
            .into_iter()
            .filter(|&g| self.iter().any(|p| p.group() == g))
            .collect()
    }

    pub fn union(&self, other: &PropertySet) -> PropertySet {
        PropertySet {
            invocation: self.invocation,
            bits: self.bits | other.bits,
        }
    }
}
