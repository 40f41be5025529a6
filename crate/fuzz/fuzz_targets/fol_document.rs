#![no_main]

use libfuzzer_sys::fuzz_target;
use mathworld::fol::parse_fol_document;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_fol_document(text);
    }
});
