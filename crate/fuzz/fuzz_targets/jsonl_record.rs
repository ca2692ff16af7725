#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(record) = serde_json::from_str::<d2t::cli::CorpusRecord>(s) {
            if let Ok(mr) = record.parse_data() {
                // Any parseable record must linearize without panicking.
                let mut reg = d2t::linearize::SpecialTokenRegistry::standard();
                let _ = d2t::linearize::linearize(&mr, &mut reg, d2t::linearize::SlotOrder::Source);
            }
        }
    }
});
