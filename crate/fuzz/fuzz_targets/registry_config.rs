#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(reg) = d2t::linearize::SpecialTokenRegistry::from_config(s) {
            let again =
                d2t::linearize::SpecialTokenRegistry::from_config(&reg.to_config()).unwrap();
            assert_eq!(reg.to_config(), again.to_config());
        }
    }
});
