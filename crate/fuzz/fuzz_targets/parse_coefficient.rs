#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = fracflux::config::parse_coefficient(text, None);
        let _ = fracflux::config::parse_coefficient(text, Some(&[0.0, 1.0, 0.5]));
    }
});
