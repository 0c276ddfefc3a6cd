#![no_main]

use libfuzzer_sys::fuzz_target;
use scl_core::io::parse_learn_result;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(result) = parse_learn_result(text, "fuzz") {
        assert!(result.complex.validate_shape().is_ok());
        let again = parse_learn_result(&result.to_json(), "fuzz").unwrap();
        assert_eq!(again.complex, result.complex);
    }
});
