#![no_main]

use libfuzzer_sys::fuzz_target;
use macport::lex::{tokenize, FileId};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = tokenize(text, FileId(0));
    }
});
