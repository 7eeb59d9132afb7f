//! Fuzz the reaction-config parser end to end: no input may panic the
//! parser, and any graph that passes validation must also compile into a
//! step map of the right dimension.

#![no_main]

use libfuzzer_sys::fuzz_target;
use oqwalk::config::parse_reaction_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(graph) = parse_reaction_config(text) else {
        return;
    };
    if graph.validate().is_ok() {
        let map = graph
            .compile()
            .expect("a graph that validates must compile");
        assert_eq!(map.dim(), graph.n_nodes);
    }
});
