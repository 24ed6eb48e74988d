//! Command-line driver: argument handling, unit scheduling and output.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;

use clap::{ArgAction, Parser, Subcommand};
use macport::analyze::{analyze_file, AnalysisOptions};
use macport::compdb::load_compilation_database;
use macport::pp::{FileSystem, PreprocessOptions};
use macport::report::Report;
use rayon::prelude::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNIT_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "macport", version, about = "Classify C macros by how they can be ported to functions")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Analyze source files or a compilation database.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, clap::Args)]
struct AnalyzeArgs {
    /// C source files.
    files: Vec<PathBuf>,
    /// Read units from a compile_commands.json file.
    #[arg(long, value_name = "PATH")]
    compile_commands: Option<PathBuf>,
    /// Add an include directory.
    #[arg(short = 'I', value_name = "DIR")]
    include: Vec<PathBuf>,
    /// Add a system include directory.
    #[arg(long = "isystem", value_name = "DIR")]
    isystem: Vec<PathBuf>,
    /// Define a macro, NAME or NAME=VALUE.
    #[arg(short = 'D', value_name = "DEF")]
    define: Vec<String>,
    /// Do not search the host's default system include directories.
    #[arg(long)]
    nostdinc: bool,
    /// Write the JSON report here.
    #[arg(long, value_name = "OUT")]
    json: Option<PathBuf>,
    /// Write the CSV report here.
    #[arg(long, value_name = "OUT")]
    csv: Option<PathBuf>,
    /// Include function suggestions in the report.
    #[arg(long)]
    suggest: bool,
    /// Skip macros defined in system headers (`--exclude-system=false` keeps them).
    #[arg(long, action = ArgAction::Set, num_args = 0..=1, require_equals = true, default_value_t = true, default_missing_value = "true")]
    exclude_system: bool,
    /// Number of units analyzed in parallel.
    #[arg(long, short = 'j', value_name = "N")]
    jobs: Option<usize>,
}

struct Unit {
    file: PathBuf,
    pp: PreprocessOptions,
}

/// Default system include directories of the host compiler, most specific
/// first.
fn host_system_dirs() -> Vec<PathBuf> {
    let mut dirs = Vec::new();
    if let Ok(out) = Command::new("cc").arg("-print-file-name=include").output() {
        let dir = PathBuf::from(String::from_utf8_lossy(&out.stdout).trim());
        if dir.is_absolute() && dir.is_dir() {
            dirs.push(dir);
        }
    }
    dirs.push(PathBuf::from("/usr/local/include"));
    if let Ok(entries) = std::fs::read_dir("/usr/include") {
        let mut multiarch: Vec<PathBuf> = entries
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.is_dir() && p.to_string_lossy().ends_with("-linux-gnu"))
            .collect();
        multiarch.sort();
        dirs.extend(multiarch);
    }
    dirs.push(PathBuf::from("/usr/include"));
    dirs.into_iter().filter(|d| d.is_dir()).collect()
}

/// Target macros the host headers test; compiler-identity macros such as
/// `__GNUC__` are left out so headers stay on their portable paths.
fn host_target_defines() -> Vec<String> {
    let mut d: Vec<&str> = Vec::new();
    if cfg!(target_os = "linux") {
        d.extend(["__linux__", "__linux", "__unix__", "__unix", "__ELF__"]);
    }
    if cfg!(target_arch = "x86_64") {
        d.extend(["__x86_64__", "__x86_64", "__amd64__", "__amd64"]);
    } else if cfg!(target_arch = "aarch64") {
        d.push("__aarch64__");
    }
    if cfg!(target_pointer_width = "64") {
        d.extend(["__LP64__", "_LP64", "__SIZEOF_POINTER__=8", "__SIZEOF_LONG__=8"]);
    } else {
        d.extend(["__SIZEOF_POINTER__=4", "__SIZEOF_LONG__=4"]);
    }
    d.extend(["__CHAR_BIT__=8", "__SIZEOF_INT__=4", "__SIZEOF_SHORT__=2", "__SIZEOF_LONG_LONG__=8"]);
    d.into_iter().map(String::from).collect()
}

fn write_output(path: &Path, text: &str, err: &mut dyn Write) -> bool {
    match std::fs::write(path, text) {
        Ok(()) => true,
        Err(e) => {
            let _ = writeln!(err, "macport: cannot write {}: {e}", path.display());
            false
        }
    }
}

/// Run the command line; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let Cmd::Analyze(a) = cli.command;

    let system_dirs = if a.nostdinc { Vec::new() } else { host_system_dirs() };
    let host_defines = if a.nostdinc { Vec::new() } else { host_target_defines() };
    let defines: Vec<String> = host_defines.iter().chain(&a.define).cloned().collect();
    let mut units = Vec::new();
    for f in &a.files {
        if !f.is_file() {
            let _ = writeln!(err, "macport: {}: no such file", f.display());
            return EXIT_USAGE;
        }
        units.push(Unit {
            file: f.clone(),
            pp: PreprocessOptions {
                include_paths: a.include.clone(),
                system_include_paths: a.isystem.iter().chain(&system_dirs).cloned().collect(),
                defines: defines.clone(),
            },
        });
    }
    if let Some(path) = &a.compile_commands {
        let db = match load_compilation_database(path) {
            Ok(db) => db,
            Err(e) => {
                let _ = writeln!(err, "macport: {}: {e}", path.display());
                return EXIT_USAGE;
            }
        };
        for w in &db.warnings {
            let _ = writeln!(err, "macport: warning: {}: {w}", path.display());
        }
        for c in db.commands {
            let mut pp = c.preprocess_options();
            pp.include_paths.extend(a.include.iter().cloned());
            pp.system_include_paths.extend(a.isystem.iter().chain(&system_dirs).cloned());
            pp.defines = host_defines.iter().chain(&pp.defines).chain(&a.define).cloned().collect();
            units.push(Unit { file: c.file, pp });
        }
    }
    if units.is_empty() {
        let _ = writeln!(err, "macport: no input files (give source files or --compile-commands)");
        return EXIT_USAGE;
    }

    let options = AnalysisOptions {
        exclude_system: a.exclude_system,
        system_roots: system_dirs.clone(),
        suggest: a.suggest,
    };
    let analyze = |u: &Unit| analyze_file(&u.file, &u.pp, &FileSystem, &options);
    let results: Vec<_> = match a.jobs {
        Some(1) => units.iter().map(analyze).collect(),
        jobs => {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(n) = jobs {
                builder = builder.num_threads(n);
            }
            match builder.build() {
                Ok(pool) => pool.install(|| units.par_iter().map(analyze).collect()),
                Err(_) => units.iter().map(analyze).collect(),
            }
        }
    };

    let mut failed = false;
    let mut report = Report::default();
    for (unit, r) in units.iter().zip(results) {
        match r {
            Ok(r) => report = report.merge(r),
            Err(e) => {
                failed = true;
                let _ = writeln!(err, "macport: {}: {e}", unit.file.display());
            }
        }
    }

    if let Some(p) = &a.json {
        failed |= !write_output(p, &report.to_json(), err);
    }
    if let Some(p) = &a.csv {
        failed |= !write_output(p, &report.to_csv(), err);
    }
    let _ = write!(out, "{}", report.summary_text());
    if failed {
        EXIT_UNIT_ERROR
    } else {
        EXIT_OK
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> AnalyzeArgs {
        let Cmd::Analyze(a) = Cli::try_parse_from(args).unwrap().command;
        a
    }

    #[test]
    fn flags() {
        let a = parse(&["macport", "analyze", "-I", "inc", "-DX=1", "-j", "2", "--exclude-system=false", "a.c"]);
        assert_eq!(a.include, [PathBuf::from("inc")]);
        assert_eq!(a.define, ["X=1"]);
        assert_eq!(a.jobs, Some(2));
        assert!(!a.exclude_system);
        assert!(parse(&["macport", "analyze", "--exclude-system", "a.c"]).exclude_system);
        assert!(parse(&["macport", "analyze", "a.c"]).exclude_system);
    }

    #[test]
    fn target_defines_omit_compiler_identity() {
        let d = host_target_defines();
        assert!(d.iter().any(|m| m.starts_with("__SIZEOF_POINTER__=")));
        assert!(!d.iter().any(|m| m.starts_with("__GNUC__")));
    }

    #[test]
    fn help_goes_to_stdout() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["macport", "--help"], &mut out, &mut err), EXIT_OK);
        assert!(String::from_utf8(out).unwrap().contains("analyze"));
        assert!(err.is_empty());
    }
}
