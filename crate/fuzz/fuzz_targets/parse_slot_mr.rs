#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(mr) = d2t::mr::parse_slot_mr(s) {
            let again = d2t::mr::parse_slot_mr(&d2t::mr::serialize_slot_mr(&mr)).unwrap();
            assert_eq!(mr, again);
        }
    }
});
