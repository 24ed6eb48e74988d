use std::path::Path;

use macport_cli::{run, EXIT_OK, EXIT_UNIT_ERROR, EXIT_USAGE};
use serde_json::Value;

const MASK: &str = "#define MASK(B) (1<<(B))\nint flags(int b) { return MASK(b) | MASK(3); }\n";

fn macport(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("macport").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn definition<'v>(json: &'v Value, name: &str) -> &'v Value {
    json["definitions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|d| d["name"] == name)
        .unwrap_or_else(|| panic!("{name} missing from {json}"))
}

#[test]
fn analyzes_a_file_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("mask.c");
    std::fs::write(&src, MASK).unwrap();
    let json = dir.path().join("out.json");
    let csv = dir.path().join("out.csv");
    let (code, out, err) = macport(&[
        "analyze",
        "--nostdinc",
        "--suggest",
        "--json",
        path(&json),
        "--csv",
        path(&csv),
        path(&src),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("1 macro definitions analyzed"), "{out}");
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let mask = definition(&report, "MASK");
    assert_eq!(mask["category"], "definition-adapting");
    assert_eq!(mask["invocation_count"], 2);
    assert_eq!(mask["suggestion"]["text"], "int mask(int B) { return (1<<(B)); }");
    let csv = std::fs::read_to_string(&csv).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("MASK,"), "{csv}");
}

#[test]
fn missing_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("out.json");
    let missing = dir.path().join("nope.c");
    let (code, out, err) = macport(&["analyze", "--json", path(&json), path(&missing)]);
    assert_eq!(code, EXIT_USAGE);
    assert!(out.is_empty());
    assert!(err.contains("no such file"), "{err}");
    assert!(!json.exists());

    let (code, _, err) = macport(&["analyze"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("no input files"), "{err}");
    assert_eq!(macport(&["frobnicate"]).0, EXIT_USAGE);
}

#[test]
fn unit_errors_still_report_the_rest() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.c");
    let bad = dir.path().join("bad.c");
    std::fs::write(&good, MASK).unwrap();
    std::fs::write(&bad, "#include \"absent.h\"\n").unwrap();
    let json = dir.path().join("out.json");
    let (code, _, err) = macport(&["analyze", "--nostdinc", "--json", path(&json), path(&good), path(&bad)]);
    assert_eq!(code, EXIT_UNIT_ERROR);
    assert!(err.contains("bad.c"), "{err}");
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    definition(&report, "MASK");
}

#[test]
fn compile_commands_supply_include_paths_and_defines() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("inc")).unwrap();
    std::fs::write(
        dir.path().join("inc/util.h"),
        "#if WIDE\n#define SCALE(x) ((x) * 4)\n#else\n#define SCALE(x) ((x) * 2)\n#endif\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("a.c"), "#include \"util.h\"\nint f(int v) { return SCALE(v); }\n").unwrap();
    let db = serde_json::json!([{
        "directory": path(dir.path()),
        "file": "a.c",
        "arguments": ["cc", "-Iinc", "-DWIDE=1", "-c", "a.c"],
    }]);
    let db_path = dir.path().join("compile_commands.json");
    std::fs::write(&db_path, db.to_string()).unwrap();
    let json = dir.path().join("out.json");
    let (code, _, err) = macport(&[
        "analyze",
        "--nostdinc",
        "--suggest",
        "--compile-commands",
        path(&db_path),
        "--json",
        path(&json),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let scale = definition(&report, "SCALE");
    assert_eq!(scale["location"]["line"], 2);
    assert!(scale["suggestion"]["text"].as_str().unwrap().contains("* 4"), "{scale}");

    std::fs::write(&db_path, "{\"file\": 1}").unwrap();
    assert_eq!(macport(&["analyze", "--compile-commands", path(&db_path)]).0, EXIT_USAGE);
}

#[test]
fn json_is_identical_across_runs_and_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for i in 0..4 {
        let f = dir.path().join(format!("u{i}.c"));
        std::fs::write(&f, format!("{MASK}#define K{i} {i}\nint g{i} = K{i} + MASK({i});\n")).unwrap();
        files.push(f);
    }
    let mut outputs = Vec::new();
    for jobs in ["1", "4", "4"] {
        let json = dir.path().join(format!("out{}.json", outputs.len()));
        let mut args = vec!["analyze", "--nostdinc", "--suggest", "-j", jobs, "--json", path(&json)];
        args.extend(files.iter().map(|f| path(f)));
        assert_eq!(macport(&args).0, EXIT_OK);
        outputs.push(std::fs::read(&json).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}
