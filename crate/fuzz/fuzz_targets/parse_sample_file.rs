#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(samples) = metapulse::scenario::parse_sample_file(s) {
            assert!(samples.len() >= 2);
            assert!(samples.windows(2).all(|w| w[0].0 < w[1].0));
        }
    }
});
