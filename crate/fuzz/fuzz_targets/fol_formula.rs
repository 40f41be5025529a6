#![no_main]

use libfuzzer_sys::fuzz_target;
use mathworld::fol::parse_formula;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_formula(text) {
        let again = parse_formula(&f.pretty()).expect("pretty output reparses");
        assert_eq!(f, again);
    }
});
