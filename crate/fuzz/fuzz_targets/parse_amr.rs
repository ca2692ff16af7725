#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(g) = d2t::mr::parse_amr(s) {
            let again = d2t::mr::parse_amr(&d2t::mr::serialize_amr(&g)).unwrap();
            assert_eq!(g, again);
            // Linearization must not panic on any parsed graph.
            let mut reg = d2t::linearize::SpecialTokenRegistry::standard();
            let _ = d2t::linearize::linearize_amr(&g, &mut reg);
        }
    }
});
