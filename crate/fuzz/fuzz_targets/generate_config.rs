#![no_main]

use libfuzzer_sys::fuzz_target;
use scl_core::config::GenerateConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = GenerateConfig::parse(text, "fuzz");
    }
});
