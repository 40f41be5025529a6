#![no_main]

use libfuzzer_sys::fuzz_target;
use mathworld::convert::lfs_to_graph;
use mathworld::corpus::parse_sentence_forms;
use mathworld::lf::ParseMode;
use mathworld::reason::solve_reference;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_sentence_forms(text, ParseMode::Strict);
    if let Ok((forms, _)) = parse_sentence_forms(text, ParseMode::Recover) {
        let conversion = lfs_to_graph(&forms);
        let _ = solve_reference(&conversion.model);
    }
});
