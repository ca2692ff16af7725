#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(vocab) = d2t::bpe::BpeVocab::from_file_format(s) {
            // A loaded vocabulary must encode/decode arbitrary bytes.
            let sample: &[u8] = &[0, 255, b'a', b'<', b'b'];
            let seq = d2t::bpe::encode_bytes(&vocab, sample);
            assert_eq!(d2t::bpe::decode_bytes(&vocab, &seq).unwrap(), sample);
            let again = d2t::bpe::BpeVocab::from_file_format(&vocab.to_file_format()).unwrap();
            assert_eq!(vocab.size(), again.size());
        }
    }
});
