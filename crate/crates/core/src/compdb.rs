//! `compile_commands.json` loading.

use std::path::{Path, PathBuf};

use serde_json::Value;
use thiserror::Error;

use crate::pp::PreprocessOptions;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileCommand {
    /// Source file, resolved against `directory`.
    pub file: PathBuf,
    pub directory: PathBuf,
    pub include_paths: Vec<PathBuf>,
    pub system_include_paths: Vec<PathBuf>,
    /// `NAME` or `NAME=VALUE`.
    pub defines: Vec<String>,
}

impl CompileCommand {
    pub fn preprocess_options(&self) -> PreprocessOptions {
        PreprocessOptions {
            include_paths: self.include_paths.clone(),
            system_include_paths: self.system_include_paths.clone(),
            defines: self.defines.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompileDatabase {
    pub commands: Vec<CompileCommand>,
    /// One message per skipped entry.
    pub warnings: Vec<String>,
}

#[derive(Debug, Error)]
pub enum CompileDbError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("expected a JSON array of compile commands")]
    NotAnArray,
}

pub fn load_compilation_database(path: &Path) -> Result<CompileDatabase, CompileDbError> {
    let text = std::fs::read_to_string(path).map_err(|source| CompileDbError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_compilation_database(&text)
}

pub fn parse_compilation_database(text: &str) -> Result<CompileDatabase, CompileDbError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CompileDbError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let Value::Array(entries) = value else {
        return Err(CompileDbError::NotAnArray);
    };
    let mut db = CompileDatabase::default();
    for (i, entry) in entries.iter().enumerate() {
        match command(entry) {
            Ok(c) => db.commands.push(c),
            Err(why) => db.warnings.push(format!("entry {i}: {why}; skipped")),
        }
    }
    Ok(db)
}

fn command(entry: &Value) -> Result<CompileCommand, String> {
    let obj = entry.as_object().ok_or("not an object")?;
    let file = obj.get("file").and_then(Value::as_str).ok_or("missing \"file\"")?;
    let directory = PathBuf::from(obj.get("directory").and_then(Value::as_str).unwrap_or("."));
    let args: Vec<String> = if let Some(args) = obj.get("arguments").and_then(Value::as_array) {
        args.iter().filter_map(|a| a.as_str().map(String::from)).collect()
    } else if let Some(cmd) = obj.get("command").and_then(Value::as_str) {
        shlex::split(cmd).ok_or("unbalanced quotes in \"command\"")?
    } else {
        Vec::new()
    };

    let mut c = CompileCommand {
        file: directory.join(file),
        directory: directory.clone(),
        include_paths: Vec::new(),
        system_include_paths: Vec::new(),
        defines: Vec::new(),
    };
    let mut it = args.iter().skip(1);
    while let Some(arg) = it.next() {
        let mut value = |flag: &str| -> Option<String> {
            if arg == flag {
                it.next().cloned()
            } else {
                arg.strip_prefix(flag).map(String::from)
            }
        };
        if let Some(v) = value("-isystem") {
            c.system_include_paths.push(directory.join(v));
        } else if let Some(v) = value("-iquote") {
            c.include_paths.push(directory.join(v));
        } else if let Some(v) = value("-I") {
            c.include_paths.push(directory.join(v));
        } else if let Some(v) = value("-D") {
            c.defines.push(v);
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arguments_form() {
        let db = parse_compilation_database(
            r#"[{"file":"a.c","directory":"/w","arguments":["cc","-Iinc","-DX=1","-I","other","-isystem","/sys","a.c"]}]"#,
        )
        .unwrap();
        let c = &db.commands[0];
        assert_eq!(c.file, PathBuf::from("/w/a.c"));
        assert_eq!(c.include_paths, [PathBuf::from("/w/inc"), PathBuf::from("/w/other")]);
        assert_eq!(c.system_include_paths, [PathBuf::from("/sys")]);
        assert_eq!(c.defines, ["X=1"]);
        assert!(db.warnings.is_empty());
    }

    #[test]
    fn command_form_and_skips() {
        let db = parse_compilation_database(
            r#"[{"file":"b.c","directory":"/w","command":"gcc -D 'MSG=\"hi there\"' -c b.c"},
                {"directory":"/w","arguments":["cc"]}]"#,
        )
        .unwrap();
        assert_eq!(db.commands.len(), 1);
        assert_eq!(db.commands[0].defines, ["MSG=\"hi there\""]);
        assert_eq!(db.warnings.len(), 1);
        assert!(parse_compilation_database("[]").unwrap().commands.is_empty());
    }

    #[test]
    fn malformed_json_reports_line() {
        match parse_compilation_database("[\n{\"file\": }\n]") {
            Err(CompileDbError::Json { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_compilation_database("{}"), Err(CompileDbError::NotAnArray)));
    }
}
