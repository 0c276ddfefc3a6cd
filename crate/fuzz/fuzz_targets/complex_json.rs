#![no_main]

use libfuzzer_sys::fuzz_target;
use scl_core::io::{complex_to_json, parse_complex_json, ComplexJson};
use scl_core::ComplexSkeleton;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(complex) = parse_complex_json(text, "fuzz") else { return };
    let skeleton = ComplexSkeleton::new(complex.n_nodes).expect("validated node count");
    let sel = complex.to_selection(&skeleton).expect("validated complex maps to a selection");
    assert!(sel.is_closed(&skeleton));
    assert_eq!(ComplexJson::from_selection(&skeleton, &sel), complex);
    assert_eq!(parse_complex_json(&complex_to_json(&complex), "fuzz").unwrap(), complex);
});
