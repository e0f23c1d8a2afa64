#![no_main]

use chronograph_core::ingest::read_annotations;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(a) = read_annotations(data) {
        assert!(a.unknown_occupations as usize <= data.len());
    }
});
