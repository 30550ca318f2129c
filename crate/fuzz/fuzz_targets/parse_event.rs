#![no_main]

use libfuzzer_sys::fuzz_target;
use removal_lab::embedding::parse_event;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(event) = parse_event(text) {
        // Canonical rendering must re-parse to the same formula.
        let printed = event.to_string();
        let reparsed = parse_event(&printed).expect("canonical form parses");
        assert_eq!(reparsed, event);
    }
});
