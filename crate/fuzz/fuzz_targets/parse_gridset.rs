#![no_main]

use libfuzzer_sys::fuzz_target;
use removal_lab::arithmetic::GridSet;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(set) = GridSet::from_text(text) {
        let back = GridSet::from_text(&set.to_text()).expect("canonical form parses");
        assert_eq!(back, set);
    }
});
