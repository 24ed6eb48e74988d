//! Output tokens of the host C preprocessor and of ours.

use std::io::Write;
use std::process::{Command, Stdio};

use macport::lex::{tokenize, FileId, TokenKind};
use macport::pp::preprocess_str;

/// Lexemes produced by `cpp -P -undef -nostdinc -std=c99`, without
/// `#pragma` lines.
pub fn host_lexemes(source: &str) -> Vec<String> {
    let mut child = Command::new("cpp")
        .args(["-P", "-undef", "-nostdinc", "-std=c99", "-w", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("a host `cpp` is required for this test");
    child.stdin.take().unwrap().write_all(source.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success(), "cpp failed: {}", String::from_utf8_lossy(&out.stderr));
    let text: String = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .filter(|l| !l.trim_start().starts_with("#pragma"))
        .map(|l| format!("{l}\n"))
        .collect();
    tokenize(&text, FileId(0))
        .unwrap()
        .into_iter()
        .filter(|t| t.kind != TokenKind::Eof)
        .map(|t| t.text.to_string())
        .collect()
}

pub fn ours(name: &str, source: &str) -> Vec<String> {
    let trace = preprocess_str(name, source).unwrap_or_else(|e| panic!("{name}: {e}"));
    trace.output_lexemes().into_iter().map(String::from).collect()
}

pub fn first_difference(a: &[String], b: &[String]) -> String {
    let i = a.iter().zip(b).position(|(x, y)| x != y).unwrap_or(a.len().min(b.len()));
    let lo = i.saturating_sub(5);
    format!(
        "at token {i}: ours {:?} host {:?}",
        &a[lo..(i + 5).min(a.len())],
        &b[lo..(i + 5).min(b.len())]
    )
}
