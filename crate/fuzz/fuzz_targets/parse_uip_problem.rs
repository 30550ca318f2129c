#![no_main]

use libfuzzer_sys::fuzz_target;
use removal_lab::uip::UipProblemJson;

fuzz_target!(|data: &[u8]| {
    let Ok(parsed) = serde_json::from_slice::<UipProblemJson>(data) else {
        return;
    };
    // Semantic validation must reject or accept without panicking.
    let _ = parsed.to_problem();
});
