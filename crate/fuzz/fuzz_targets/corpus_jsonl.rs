#![no_main]

use libfuzzer_sys::fuzz_target;
use mathworld::corpus::{corpus_to_string, parse_corpus};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(records) = parse_corpus(text) {
        let again = parse_corpus(&corpus_to_string(&records)).expect("saved corpus reloads");
        assert_eq!(records.len(), again.len());
    }
});
