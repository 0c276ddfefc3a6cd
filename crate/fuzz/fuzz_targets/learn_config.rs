#![no_main]

use libfuzzer_sys::fuzz_target;
use scl_core::config::LearnConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = LearnConfig::parse(text, "fuzz");
    }
});
