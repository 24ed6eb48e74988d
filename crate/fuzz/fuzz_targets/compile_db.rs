#![no_main]

use libfuzzer_sys::fuzz_target;
use macport::compdb::parse_compilation_database;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(db) = parse_compilation_database(text) {
            for c in &db.commands {
                let _ = c.preprocess_options();
            }
        }
    }
});
