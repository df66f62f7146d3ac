#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = fracflux::config::parse_temporal(text) {
            let _ = spec.eval(0.5);
        }
    }
});
