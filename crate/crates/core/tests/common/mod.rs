//! Golden corpus loading shared by the integration tests.
#![allow(dead_code)]

pub mod host_cpp;
pub mod oracle;
pub mod roundtrip;
pub mod units;
pub mod stress;

use std::path::{Path, PathBuf};

use macport::analyze::{analyze_source, AnalysisOptions};
use macport::report::Report;

/// One `// expect NAME CATEGORY PROPS` line; `PROPS` is a comma list or `-`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub name: String,
    pub category: String,
    pub properties: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct GoldenFile {
    pub path: PathBuf,
    pub name: String,
    pub source: String,
    pub expectations: Vec<Expectation>,
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn parse_expectation(line: &str) -> Option<Expectation> {
    let rest = line.trim().strip_prefix("// expect ")?;
    let mut parts = rest.split_whitespace();
    let name = parts.next()?.to_string();
    let category = parts.next()?.to_string();
    let props = parts.next().unwrap_or("-");
    let mut properties: Vec<String> = if props == "-" {
        Vec::new()
    } else {
        props.split(',').map(str::to_string).collect()
    };
    properties.sort();
    Some(Expectation { name, category, properties })
}

pub fn golden_files() -> Vec<GoldenFile> {
    files_in(&golden_dir())
}

/// The 20-macro corpus mixing baseline constants with other macros.
pub fn mixed_file() -> GoldenFile {
    files_in(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/mixed")).remove(0)
}

pub fn files_in(dir: &Path) -> Vec<GoldenFile> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .expect("corpus dir")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "c"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let source = std::fs::read_to_string(&path).unwrap();
            let expectations = source.lines().filter_map(parse_expectation).collect();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            GoldenFile { path, name, source, expectations }
        })
        .collect()
}

pub fn analyze(file: &GoldenFile, suggest: bool) -> Report {
    let options = AnalysisOptions { suggest, ..Default::default() };
    analyze_source(&file.name, &file.source, &options)
        .unwrap_or_else(|e| panic!("{}: {e}", file.name))
}

/// Differences between the report and the file's expectations. Every
/// analyzed definition must have exactly one expectation.
pub fn mismatches(file: &GoldenFile, report: &Report) -> Vec<String> {
    let mut out = Vec::new();
    let mut seen = Vec::new();
    for v in report.definitions() {
        let name = &v.definition.name;
        seen.push(name.clone());
        let Some(exp) = file.expectations.iter().find(|e| &e.name == name) else {
            out.push(format!("{}: {name} has no expectation", file.name));
            continue;
        };
        let category = v.category.map(|c| c.name()).unwrap_or("unanalyzed");
        let mut props: Vec<String> = v.properties().names().into_iter().map(String::from).collect();
        props.sort();
        if category != exp.category || props != exp.properties {
            out.push(format!(
                "{}: {name}: got {category} {props:?}, expected {} {:?}",
                file.name, exp.category, exp.properties
            ));
        }
    }
    for e in &file.expectations {
        if !seen.contains(&e.name) {
            out.push(format!("{}: {} was not analyzed", file.name, e.name));
        }
    }
    out
}
