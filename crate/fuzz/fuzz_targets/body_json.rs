#![no_main]

use libfuzzer_sys::fuzz_target;
use lpgeom::format::{body_to_json, parse_body};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(body) = parse_body(text) {
        let again = parse_body(&body_to_json(&body)).expect("serialized bodies parse");
        assert_eq!(again.dim(), body.dim());
    }
});
