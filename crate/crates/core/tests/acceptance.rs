//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed:
//! `cargo test -p macport --test acceptance`.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::host_cpp::{first_difference, host_lexemes, ours};
use common::{analyze, golden_files, mismatches, mixed_file, roundtrip, stress, units, GoldenFile};
use macport::props::PropertyId;
use macport::report::Report;

type Outcome = Result<String, String>;
type Criterion = fn(&[GoldenFile]) -> Outcome;

fn within(start: Instant, limit: Duration, detail: String) -> Outcome {
    let took = start.elapsed();
    if took <= limit {
        Ok(format!("{detail}; {took:.2?}"))
    } else {
        Err(format!("{detail}; took {took:.2?}, limit {limit:?}"))
    }
}

fn golden_exactness(files: &[GoldenFile]) -> Outcome {
    let start = Instant::now();
    let macros: usize = files.iter().map(|f| f.expectations.len()).sum();
    if macros < 30 {
        return Err(format!("only {macros} golden macros"));
    }
    let covered: BTreeSet<&str> = files
        .iter()
        .flat_map(|f| &f.expectations)
        .flat_map(|e| e.properties.iter().map(String::as_str))
        .collect();
    let missing: Vec<&str> = PropertyId::ALL
        .iter()
        .map(|p| p.name())
        .filter(|p| !covered.contains(p))
        .collect();
    if !missing.is_empty() {
        return Err(format!("properties without a golden instance: {missing:?}"));
    }
    let bad: Vec<String> = files.iter().flat_map(|f| mismatches(f, &analyze(f, false))).collect();
    if !bad.is_empty() {
        return Err(format!("{} mismatches: {}", bad.len(), bad.join("; ")));
    }
    within(start, Duration::from_secs(5), format!("{macros} macros, 0 mismatches"))
}

fn preprocessor_conformance(files: &[GoldenFile]) -> Outcome {
    let start = Instant::now();
    let mut inputs: Vec<(String, String)> = files.iter().map(|f| (f.name.clone(), f.source.clone())).collect();
    inputs.extend((0..50).map(|seed| (format!("stress{seed}.c"), stress::stress_file(seed))));
    for (name, src) in &inputs {
        let (a, b) = (ours(name, src), host_lexemes(src));
        if a != b {
            return Err(format!("{name}: {}", first_difference(&a, &b)));
        }
    }
    within(start, Duration::from_secs(30), format!("{} of {} files identical", inputs.len(), inputs.len()))
}

fn oracle_equivalence(files: &[GoldenFile]) -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for f in files {
        let (n, d) = common::oracle::disagreements(&f.name, &f.source);
        checked += n;
        bad.extend(d);
    }
    if bad.is_empty() {
        Ok(format!("{checked} invocations x 26 properties agree"))
    } else {
        Err(format!("{} disagreements: {}", bad.len(), bad.join("; ")))
    }
}

fn aligned_covers_interface_equivalent(files: &[GoldenFile]) -> Outcome {
    let mut corpora: Vec<(String, Report)> = files.iter().map(|f| (f.name.clone(), analyze(f, false))).collect();
    let whole = corpora.iter().fold(Report::default(), |acc, (_, r)| acc.merge(r.clone()));
    corpora.push(("golden corpus".into(), whole));
    corpora.push(("mixed corpus".into(), analyze(&mixed_file(), false)));
    corpora.push(("two units".into(), units::unit("a.c").merge(units::unit("b.c"))));
    for (name, r) in &corpora {
        let s = r.summary();
        if s.aligned_percent < s.interface_equivalent_percent {
            return Err(format!(
                "{name}: aligned {:.1}% < interface-equivalent {:.1}%",
                s.aligned_percent, s.interface_equivalent_percent
            ));
        }
    }
    Ok(format!("{} corpora", corpora.len()))
}

fn baseline_subset(files: &[GoldenFile]) -> Outcome {
    let mut all: Vec<GoldenFile> = files.to_vec();
    all.push(mixed_file());
    for f in &all {
        for v in analyze(f, false).definitions() {
            if v.baseline && !v.is_interface_equivalent() {
                return Err(format!("{}: baseline {} is not interface-equivalent", f.name, v.definition.name));
            }
        }
    }
    let mixed = mixed_file();
    let s = analyze(&mixed, false).summary();
    let detail = format!(
        "{} macros: interface-equivalent {} vs baseline {}",
        mixed.expectations.len(),
        s.interface_equivalent,
        s.baseline
    );
    if mixed.expectations.len() == 20 && s.interface_equivalent > s.baseline {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn codegen_round_trip(files: &[GoldenFile]) -> Outcome {
    let start = Instant::now();
    let cands = roundtrip::candidates(files);
    if cands.is_empty() {
        return Err("no pure arithmetic definition-adapting macros".into());
    }
    for (i, c) in cands.iter().enumerate() {
        let bad = roundtrip::check(c, 1000, i as u64)?;
        if bad != 0 {
            return Err(format!("{}: {bad} of 1000 inputs differ", c.definition));
        }
    }
    within(start, Duration::from_secs(60), format!("{} macros x 1000 inputs agree", cands.len()))
}

fn determinism_and_merge(files: &[GoldenFile]) -> Outcome {
    let run = |order: &mut dyn Iterator<Item = &GoldenFile>| {
        order.map(|f| analyze(f, true)).fold(Report::default(), Report::merge).to_json()
    };
    let first = run(&mut files.iter());
    if first != run(&mut files.iter()) {
        return Err("JSON differs between two runs".into());
    }
    if first != run(&mut files.iter().rev()) {
        return Err("JSON depends on unit order".into());
    }
    let merged = units::unit("a.c").merge(units::unit("b.c"));
    let whole = units::unit("whole.c");
    if merged.summary() != whole.summary() {
        return Err(format!("merged {:?} != whole {:?}", merged.summary(), whole.summary()));
    }
    Ok("byte-identical JSON; merged summary equals whole-program summary".into())
}

fn main() {
    let files = golden_files();
    let criteria: [(&str, Criterion); 7] = [
        ("golden-corpus exactness", golden_exactness),
        ("preprocessor conformance", preprocessor_conformance),
        ("formula-oracle equivalence", oracle_equivalence),
        ("aligned >= interface-equivalent", aligned_covers_interface_equivalent),
        ("baseline subset", baseline_subset),
        ("codegen round-trip", codegen_round_trip),
        ("determinism and merge", determinism_and_merge),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(|| check(&files)))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Err(format!("panicked: {msg}"))
            });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
