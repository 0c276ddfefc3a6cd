#![no_main]

use libfuzzer_sys::fuzz_target;
use scl_core::io::{matrix_to_csv, parse_matrix_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_matrix_csv(text, "fuzz") {
        assert!(m.iter().all(|v| v.is_finite()));
        assert_eq!(parse_matrix_csv(&matrix_to_csv(&m), "fuzz").unwrap(), m);
    }
});
