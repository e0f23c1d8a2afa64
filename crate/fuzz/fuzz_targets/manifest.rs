#![no_main]

use chronograph_core::bundle::Manifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = Manifest::from_json(data) {
        assert_eq!(m.compute_hash(), m.params_hash);
    }
});
