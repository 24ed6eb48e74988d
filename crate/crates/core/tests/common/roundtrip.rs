//! Differential harness: a macro and its suggested function are compiled
//! side by side and evaluated on the same random inputs.

use std::fmt::Write as _;
use std::process::Command;

use macport::classify::PortabilityCategory;
use macport::codegen::FunctionSuggestion;
use macport::lex::TokenKind;
use macport::pp::{preprocess_str, MacroDefinition};
use macport::report::Suggestion;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::{analyze, GoldenFile};

const INTEGER_TYPES: &[&str] = &[
    "char",
    "signed char",
    "unsigned char",
    "short",
    "unsigned short",
    "int",
    "unsigned int",
    "long",
    "unsigned long",
    "long long",
    "unsigned long long",
];

pub struct Candidate {
    pub file: String,
    pub definition: String,
    pub body: String,
    pub params: Vec<String>,
    pub suggestion: FunctionSuggestion,
    /// Inputs stay in `0..=30` when the body shifts.
    pub shifts: bool,
}

/// Definition-adapting macros whose suggestion has integer parameters and
/// result and whose body mentions nothing but its parameters.
pub fn candidates(files: &[GoldenFile]) -> Vec<Candidate> {
    let mut out = Vec::new();
    for f in files {
        let report = analyze(f, true);
        let trace = preprocess_str(&f.name, &f.source).unwrap();
        for v in report.definitions() {
            if v.category != Some(PortabilityCategory::DefinitionAdapting) {
                continue;
            }
            let Some(Suggestion::Suggested(s)) = report.suggestions.get(&v.definition) else {
                continue;
            };
            let def: &MacroDefinition = trace
                .definitions
                .iter()
                .find(|d| *d.name == v.definition.name && !d.builtin)
                .unwrap();
            let integer = |t: &str| INTEGER_TYPES.contains(&t);
            let pure = def
                .body
                .iter()
                .filter(|t| t.kind == TokenKind::Identifier)
                .all(|t| def.params.iter().any(|p| **p == *t.text));
            if def.params.is_empty() || !pure || !integer(&s.return_type) || !s.params.iter().all(|p| integer(&p.ty)) {
                continue;
            }
            out.push(Candidate {
                file: f.name.clone(),
                definition: def.name.to_string(),
                body: def.body_text(),
                params: def.params.iter().map(|p| p.to_string()).collect(),
                suggestion: s.clone(),
                shifts: def.body.iter().any(|t| &*t.text == "<<" || &*t.text == ">>"),
            });
        }
    }
    out
}

fn program(c: &Candidate, inputs: &[Vec<i64>]) -> String {
    let s = &c.suggestion;
    let mut src = String::from("int printf(const char *, ...);\n");
    writeln!(src, "#define {}({}) {}", c.definition, c.params.join(", "), c.body).unwrap();
    writeln!(src, "{}", s.text).unwrap();
    writeln!(src, "static const long long inputs[{}][{}] = {{", inputs.len(), s.params.len()).unwrap();
    for row in inputs {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}LL")).collect();
        writeln!(src, "  {{{}}},", cells.join(", ")).unwrap();
    }
    src.push_str("};\nint main(void) {\n  int i;\n");
    writeln!(src, "  for (i = 0; i < {}; i++) {{", inputs.len()).unwrap();
    let args: Vec<String> = s
        .params
        .iter()
        .enumerate()
        .map(|(j, p)| format!("(({})inputs[i][{j}])", p.ty))
        .collect();
    let args = args.join(", ");
    writeln!(
        src,
        "    printf(\"%lld %lld\\n\", (long long)({}({args})), (long long)({}({args})));",
        c.definition, s.name
    )
    .unwrap();
    src.push_str("  }\n  return 0;\n}\n");
    src
}

/// Compile and run the harness for one candidate; returns the number of
/// inputs on which the two disagree.
pub fn check(c: &Candidate, samples: usize, seed: u64) -> Result<usize, String> {
    let mut rng = StdRng::seed_from_u64(seed);
    let inputs: Vec<Vec<i64>> = (0..samples)
        .map(|_| {
            c.suggestion
                .params
                .iter()
                .map(|_| if c.shifts { rng.gen_range(0..=30) } else { rng.gen_range(-10_000..=10_000) })
                .collect()
        })
        .collect();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let src = dir.path().join("h.c");
    let exe = dir.path().join("h");
    std::fs::write(&src, program(c, &inputs)).map_err(|e| e.to_string())?;
    let cc = Command::new("cc")
        .args(["-std=c99", "-O1", "-fwrapv", "-o"])
        .arg(&exe)
        .arg(&src)
        .output()
        .map_err(|e| format!("cannot run cc: {e}"))?;
    if !cc.status.success() {
        return Err(format!(
            "{}: {}: harness does not compile:\n{}",
            c.file,
            c.definition,
            String::from_utf8_lossy(&cc.stderr)
        ));
    }
    let run = Command::new(&exe).output().map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&run.stdout);
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() != samples {
        return Err(format!("{}: harness printed {} lines", c.definition, lines.len()));
    }
    Ok(lines
        .iter()
        .filter(|l| {
            let mut it = l.split(' ');
            it.next() != it.next()
        })
        .count())
}
