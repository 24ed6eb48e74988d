//! The per-unit pipeline: preprocess, parse, align, evaluate, classify and
//! suggest.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::align::{Aligner, AlignmentResult};
use crate::c::ast::{NodeId, NodeKind, UnaryOp};
use crate::c::sema::DeclKind;
use crate::c::{parse, ParseError, TranslationUnit};
use crate::classify::{
    aggregate_definition, invocation_category, DefinitionRef, DefinitionVerdict, InvocationVerdict,
    SourceLocation,
};
use crate::codegen::{
    adaptation_facts, category_hint, infer_signature, suggest_function, FunctionSuggestion, NotApplicable,
};
use crate::lex::Location;
use crate::pp::{
    preprocess, preprocess_str, ExpansionTrace, InvocationRecord, MacroDefinition, PpError,
    PreprocessOptions, SourceProvider,
};
use crate::props::{check_all, FactQuery, ProgramFacts};
use crate::report::Report;

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    /// Skip definitions from system headers.
    pub exclude_system: bool,
    /// Directories whose headers count as system headers, in addition to
    /// files found through system include paths.
    pub system_roots: Vec<PathBuf>,
    pub suggest: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            exclude_system: true,
            system_roots: Vec::new(),
            suggest: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum AnalyzeError {
    #[error(transparent)]
    Preprocess(#[from] PpError),
    #[error("{file}: parse error at {location}: {message}")]
    Parse {
        file: String,
        location: String,
        message: String,
    },
}

pub fn source_location(trace: &ExpansionTrace, loc: &Location) -> SourceLocation {
    SourceLocation {
        file: trace.sources.display(loc.file),
        line: loc.line,
        column: loc.column,
    }
}

fn parse_unit(trace: &ExpansionTrace) -> Result<TranslationUnit, AnalyzeError> {
    parse(&trace.output).map_err(|e| {
        let ParseError::Unbalanced { token, message } = e;
        let location = trace
            .output
            .get(token)
            .or(trace.output.last())
            .map(|t| source_location(trace, &t.loc).to_string())
            .unwrap_or_else(|| "end of file".into());
        AnalyzeError::Parse {
            file: trace.sources.display(crate::lex::FileId(0)),
            location,
            message,
        }
    })
}

/// Whether the aligned body is built from literals and enumeration
/// constants only.
fn constant_expression(tu: &TranslationUnit, n: NodeId) -> bool {
    tu.ast.subtree(n).into_iter().all(|c| match tu.ast.kind(c) {
        NodeKind::IntLit | NodeKind::FloatLit | NodeKind::CharLit | NodeKind::StrLit | NodeKind::Paren => true,
        NodeKind::Unary(op) => *op != UnaryOp::AddrOf && *op != UnaryOp::Deref,
        NodeKind::Binary(_) | NodeKind::Conditional => true,
        NodeKind::Ident(_) => tu
            .node(c)
            .decl
            .is_some_and(|d| tu.sema.decl(d).kind == DeclKind::EnumConstant),
        _ => false,
    })
}

fn bit_field_argument(facts: &ProgramFacts, al: &AlignmentResult) -> bool {
    al.occurrences.iter().flatten().any(|&n| {
        (facts.is(FactQuery::SideEffectedExprs, n) || facts.is(FactQuery::AddressedExprs, n))
            && facts.tu.node(facts.tu.ast.strip_parens(n)).bit_field
    })
}

fn site_of(trace: &ExpansionTrace, inv: &InvocationRecord) -> Location {
    let mut cur = inv;
    while let Some(p) = cur.parent() {
        cur = trace.invocation(p);
    }
    cur.location
}

fn is_system(trace: &ExpansionTrace, loc: &Location, options: &AnalysisOptions) -> bool {
    trace.sources.is_system(loc.file)
        || trace
            .sources
            .path(loc.file)
            .is_some_and(|p| options.system_roots.iter().any(|r| p.starts_with(r)))
}

/// Analyze an already preprocessed unit.
pub fn analyze_trace(trace: &ExpansionTrace, options: &AnalysisOptions) -> Result<Report, AnalyzeError> {
    let tu = parse_unit(trace)?;
    let facts = ProgramFacts::new(&tu, trace);
    let aligner = Aligner::new(&tu);

    let alignments: Vec<AlignmentResult> = trace.invocations.iter().map(|inv| aligner.align(inv)).collect();
    let mut counters: BTreeMap<(SourceLocation, SourceLocation), u32> = BTreeMap::new();
    let mut by_def: BTreeMap<DefinitionRef, Vec<usize>> = BTreeMap::new();
    let mut verdicts: BTreeMap<DefinitionRef, Vec<InvocationVerdict>> = BTreeMap::new();

    for def in &trace.definitions {
        if def.builtin || (options.exclude_system && is_system(trace, &def.location, options)) {
            continue;
        }
        let key = DefinitionRef {
            name: def.name.to_string(),
            location: source_location(trace, &def.location),
        };
        by_def.entry(key.clone()).or_default().push(def.id.0 as usize);
        verdicts.entry(key).or_default();
    }

    for (inv, al) in trace.invocations.iter().zip(&alignments) {
        let def = trace.definition(inv.definition);
        let key = DefinitionRef {
            name: def.name.to_string(),
            location: source_location(trace, &def.location),
        };
        let Some(list) = verdicts.get_mut(&key) else {
            continue;
        };
        let properties = check_all(inv, al, &facts);
        let location = source_location(trace, &inv.location);
        let site = source_location(trace, &site_of(trace, inv));
        let counter = counters.entry((location.clone(), site.clone())).or_default();
        let index = *counter;
        *counter += 1;
        let bit_field = bit_field_argument(&facts, al);
        list.push(InvocationVerdict {
            id: inv.id,
            location,
            site,
            index,
            properties,
            alignment: al.class,
            constant: al.node().is_some_and(|n| constant_expression(&tu, n)),
            bit_field_argument: bit_field,
            category: invocation_category(&properties, al.class, bit_field),
        });
    }

    let taken: HashSet<String> = tu
        .sema
        .decls
        .iter()
        .map(|d| d.name.clone())
        .chain(trace.definitions.iter().map(|d| d.name.to_string()))
        .filter(|n| !n.is_empty())
        .collect();

    let mut report = Report::default();
    for (key, invs) in verdicts {
        let defs = &by_def[&key];
        let def = &trace.definitions[defs[0]];
        let verdict = aggregate_definition(key.clone(), def.kind, def.variadic, invs);
        let suggestion = options.suggest.then(|| {
            let uses: Vec<(&InvocationRecord, &AlignmentResult)> = trace
                .invocations
                .iter()
                .zip(&alignments)
                .filter(|(inv, _)| defs.contains(&(inv.definition.0 as usize)))
                .collect();
            suggestion_for(def, &verdict, &uses, &facts, &taken).into()
        });
        report.insert(verdict, suggestion);
    }
    Ok(report)
}

fn suggestion_for(
    def: &MacroDefinition,
    verdict: &DefinitionVerdict,
    uses: &[(&InvocationRecord, &AlignmentResult)],
    facts: &ProgramFacts,
    taken: &HashSet<String>,
) -> Result<FunctionSuggestion, NotApplicable> {
    match verdict.category {
        None => return Err(NotApplicable::NeverInvoked),
        Some(c) if !c.is_interface_equivalent() => {
            return Err(NotApplicable::Category {
                category: c,
                hint: category_hint(c).into(),
            })
        }
        _ => {}
    }
    let sig = infer_signature(def, uses, facts)?;
    let adapt = adaptation_facts(def, uses, facts);
    suggest_function(def, verdict, &sig, &adapt, &facts.tu.sema, taken)
}

/// Preprocess and analyze one file.
pub fn analyze_file(
    path: &Path,
    pp: &PreprocessOptions,
    provider: &dyn SourceProvider,
    options: &AnalysisOptions,
) -> Result<Report, AnalyzeError> {
    let trace = preprocess(path, pp, provider)?;
    analyze_trace(&trace, options)
}

/// Analyze a source string with no includes.
pub fn analyze_source(name: &str, source: &str, options: &AnalysisOptions) -> Result<Report, AnalyzeError> {
    let trace = preprocess_str(name, source)?;
    analyze_trace(&trace, options)
}
