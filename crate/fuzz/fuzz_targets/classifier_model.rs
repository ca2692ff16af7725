#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(model) = d2t::toy::FeatureClassifierModel::from_file_format(s) {
            let again =
                d2t::toy::FeatureClassifierModel::from_file_format(&model.to_file_format())
                    .unwrap();
            assert_eq!(model.to_file_format(), again.to_file_format());
        }
    }
});
