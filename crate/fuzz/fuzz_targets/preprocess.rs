#![no_main]

use libfuzzer_sys::fuzz_target;
use macport::pp::preprocess_str;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(trace) = preprocess_str("fuzz.c", text) {
            let _ = trace.output_lexemes();
        }
    }
});
