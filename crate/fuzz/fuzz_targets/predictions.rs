#![no_main]

use libfuzzer_sys::fuzz_target;
use mathworld::corpus::{parse_predictions, predictions_to_string};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_predictions(text) {
        let again = parse_predictions(&predictions_to_string(&p.forms)).expect("saved predictions reload");
        assert_eq!(p.forms, again.forms);
    }
});
