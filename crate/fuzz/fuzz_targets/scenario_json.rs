#![no_main]
use libfuzzer_sys::fuzz_target;
use maglat::scenario::{parse_scenario, resolve};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for strict in [false, true] {
        if let Ok(loaded) = parse_scenario(text, strict) {
            if strict {
                assert!(loaded.unknown_keys.is_empty());
            }
            // resolution may reject the inputs but must not panic
            let _ = resolve(&loaded.config);
        }
    }
});
