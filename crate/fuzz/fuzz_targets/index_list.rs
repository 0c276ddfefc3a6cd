#![no_main]

use libfuzzer_sys::fuzz_target;
use scl_core::io::{index_list_to_csv, parse_index_list};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(list) = parse_index_list(text, "fuzz") {
        assert_eq!(parse_index_list(&index_list_to_csv(&list), "fuzz").unwrap(), list);
    }
});
