//! Fuzz the sweep-config parser: no input may panic, and an accepted
//! sweep section must produce a spec whose own validation agrees with
//! the parser about what is well-formed (a nonempty grid, in-range
//! threshold, buildable base model).

#![no_main]

use libfuzzer_sys::fuzz_target;
use oqwalk::config::parse_sweep_config;
use oqwalk::scenarios::SweepSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok((graph, section)) = parse_sweep_config(text) else {
        return;
    };
    assert!(!section.grid.is_empty(), "parser accepted an empty grid");
    if graph.validate().is_ok() {
        let spec = SweepSpec::from_section(graph, &section);
        let _ = spec.validate();
    }
});
