#![no_main]

use libfuzzer_sys::fuzz_target;
use metapulse::scenario::parse_config;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        // An accepted config must survive its own serialization.
        if let Ok(config) = parse_config(s) {
            let again = parse_config(&config.to_toml()).expect("round trip");
            assert_eq!(again.to_toml(), config.to_toml());
        }
    }
});
