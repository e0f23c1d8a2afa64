#![no_main]

use chronograph_core::corpus::{read_corpus, write_corpus};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(corpus) = read_corpus(data) {
        corpus.validate().expect("accepted corpus is valid");
        let mut bytes = Vec::new();
        write_corpus(&corpus, &mut bytes).unwrap();
        assert_eq!(read_corpus(&bytes[..]).unwrap(), corpus);
    }
});
