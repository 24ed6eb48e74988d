#![no_main]

use libfuzzer_sys::fuzz_target;
use macport::analyze::{analyze_source, AnalysisOptions};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let options = AnalysisOptions {
        suggest: true,
        ..AnalysisOptions::default()
    };
    if let Ok(report) = analyze_source("fuzz.c", text, &options) {
        let _ = report.to_json();
        let _ = report.to_csv();
    }
});
