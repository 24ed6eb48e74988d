#![no_main]

use libfuzzer_sys::fuzz_target;
use macport::c::parse;
use macport::lex::{tokenize, FileId};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(tokens) = tokenize(text, FileId(0)) {
        let _ = parse(&tokens);
    }
});
