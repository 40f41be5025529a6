#![no_main]

use libfuzzer_sys::fuzz_target;
use mathworld::corpus::{graph_to_string, parse_graph};
use mathworld::reason::solve_reference;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(file) = parse_graph(text) {
        let again = parse_graph(&graph_to_string(&file.model, &file.states)).expect("saved graph reloads");
        assert_eq!(file.model, again.model);
        let _ = solve_reference(&file.model);
    }
});
