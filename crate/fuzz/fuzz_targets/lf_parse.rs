#![no_main]

use libfuzzer_sys::fuzz_target;
use mathworld::convert::lfs_to_graph;
use mathworld::lf::{parse_logical_form, parse_recover, serialize_logical_form, ParseMode};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(form) = parse_logical_form(text, ParseMode::Strict) {
        let again =
            parse_logical_form(&serialize_logical_form(&form), ParseMode::Strict).expect("serialized form reparses");
        assert_eq!(form, again);
    }
    let (form, _) = parse_recover(text);
    let _ = lfs_to_graph(std::slice::from_ref(&form));
});
