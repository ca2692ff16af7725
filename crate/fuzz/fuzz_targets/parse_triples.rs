#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(ts) = d2t::mr::parse_triples(s) {
            // Serialization must round-trip whatever parses.
            let again = d2t::mr::parse_triples(&d2t::mr::serialize_triples(&ts)).unwrap();
            assert_eq!(ts, again);
        }
    }
});
