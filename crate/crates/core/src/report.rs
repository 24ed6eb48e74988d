//! Analysis reports: JSON and CSV output and merging across units.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::align::AlignmentClass;
use crate::classify::{
    aggregate_definition, summarize, AnalyzabilityNote, DefinitionRef, DefinitionVerdict,
    InvocationVerdict, PortabilityCategory, SourceLocation, SummaryStats,
};
use crate::codegen::{FunctionSuggestion, NotApplicable};
use crate::pp::MacroKind;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Suggestion {
    Suggested(FunctionSuggestion),
    NotApplicable(NotApplicable),
}

impl From<Result<FunctionSuggestion, NotApplicable>> for Suggestion {
    fn from(r: Result<FunctionSuggestion, NotApplicable>) -> Self {
        match r {
            Ok(s) => Suggestion::Suggested(s),
            Err(e) => Suggestion::NotApplicable(e),
        }
    }
}

/// Verdicts for a set of units, keyed by definition.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub verdicts: BTreeMap<DefinitionRef, DefinitionVerdict>,
    pub suggestions: BTreeMap<DefinitionRef, Suggestion>,
}

#[derive(Serialize)]
struct InvocationEntry<'a> {
    location: &'a SourceLocation,
    category: PortabilityCategory,
    alignment: AlignmentClass,
}

#[derive(Serialize)]
struct DefinitionEntry<'a> {
    name: &'a str,
    location: &'a SourceLocation,
    kind: MacroKind,
    invocation_count: usize,
    properties: Vec<&'static str>,
    invocations: Vec<InvocationEntry<'a>>,
    category: &'static str,
    note: AnalyzabilityNote,
    baseline: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    suggestion: Option<&'a Suggestion>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    version: &'static str,
    definitions: Vec<DefinitionEntry<'a>>,
    summary: SummaryStats,
}

fn category_name(v: &DefinitionVerdict) -> &'static str {
    v.category.map(|c| c.name()).unwrap_or("unanalyzed")
}

impl Report {
    pub fn insert(&mut self, verdict: DefinitionVerdict, suggestion: Option<Suggestion>) {
        let key = verdict.definition.clone();
        if let Some(s) = suggestion {
            self.suggestions.entry(key.clone()).or_insert(s);
        }
        let merged = match self.verdicts.remove(&key) {
            Some(old) => combine(old, verdict),
            None => verdict,
        };
        self.verdicts.insert(key, merged);
    }

    /// Combine two reports. A definition seen in both keeps the union of
    /// its invocations (by location) and is re-aggregated; on conflicts
    /// the left side wins.
    pub fn merge(mut self, other: Report) -> Report {
        for (key, v) in other.verdicts {
            let s = other.suggestions.get(&key).cloned();
            self.insert(v, s);
        }
        self
    }

    /// Verdicts in definition-location order.
    pub fn definitions(&self) -> impl Iterator<Item = &DefinitionVerdict> {
        let mut v: Vec<&DefinitionVerdict> = self.verdicts.values().collect();
        v.sort_by(|a, b| {
            (&a.definition.location, &a.definition.name).cmp(&(&b.definition.location, &b.definition.name))
        });
        v.into_iter()
    }

    pub fn summary(&self) -> SummaryStats {
        let v: Vec<DefinitionVerdict> = self.definitions().cloned().collect();
        summarize(&v)
    }

    pub fn to_json(&self) -> String {
        let definitions = self
            .definitions()
            .map(|v| DefinitionEntry {
                name: &v.definition.name,
                location: &v.definition.location,
                kind: v.kind,
                invocation_count: v.invocation_count(),
                properties: v.properties().names(),
                invocations: v
                    .invocations
                    .iter()
                    .map(|i| InvocationEntry {
                        location: &i.location,
                        category: i.category,
                        alignment: i.alignment,
                    })
                    .collect(),
                category: category_name(v),
                note: v.note,
                baseline: v.baseline,
                suggestion: self.suggestions.get(&v.definition),
            })
            .collect();
        let json = ReportJson {
            version: VERSION,
            definitions,
            summary: self.summary(),
        };
        let mut s = serde_json::to_string_pretty(&json).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,file,line,column,kind,invocations,category,note,baseline,properties\n");
        for v in self.definitions() {
            let loc = &v.definition.location;
            let kind = match v.kind {
                MacroKind::ObjectLike => "object-like",
                MacroKind::FunctionLike => "function-like",
            };
            let note = serde_json::to_value(v.note).ok();
            let note = note.as_ref().and_then(|n| n.as_str()).unwrap_or("");
            let fields = [
                v.definition.name.clone(),
                loc.file.clone(),
                loc.line.to_string(),
                loc.column.to_string(),
                kind.to_string(),
                v.invocation_count().to_string(),
                category_name(v).to_string(),
                note.to_string(),
                v.baseline.to_string(),
                v.properties().names().join(";"),
            ];
            let row: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Short human-readable summary.
    pub fn summary_text(&self) -> String {
        let s = self.summary();
        let mut out = format!(
            "{} macro definitions analyzed ({} never invoked)\n",
            s.definitions, s.never_invoked
        );
        for (c, n) in &s.categories {
            if *n > 0 {
                out.push_str(&format!("  {:<36} {n}\n", c.name()));
            }
        }
        out.push_str(&format!(
            "interface-equivalent: {} ({:.1}%)\naligned: {} ({:.1}%)\nbaseline: {} (ratio {})\n",
            s.interface_equivalent, s.interface_equivalent_percent, s.aligned, s.aligned_percent, s.baseline, s.ratio
        ));
        out
    }
}

fn combine(a: DefinitionVerdict, b: DefinitionVerdict) -> DefinitionVerdict {
    let mut invs: BTreeMap<(SourceLocation, SourceLocation, u32), InvocationVerdict> = BTreeMap::new();
    for i in b.invocations.into_iter().chain(a.invocations) {
        invs.insert((i.location.clone(), i.site.clone(), i.index), i);
    }
    aggregate_definition(a.definition, a.kind, a.variadic, invs.into_values().collect())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
