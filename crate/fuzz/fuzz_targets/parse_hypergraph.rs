#![no_main]

use libfuzzer_sys::fuzz_target;
use removal_lab::hypergraph::Hypergraph;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(graph) = Hypergraph::from_text(text) {
        // Round trip is bit-exact on canonical output.
        let canonical = graph.to_text();
        let back = Hypergraph::from_text(&canonical).expect("canonical form parses");
        assert_eq!(back, graph);
        assert_eq!(back.to_text(), canonical);
    }
});
