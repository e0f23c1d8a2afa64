#![no_main]

use chronograph_core::pipeline::YearRecord;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(r) = YearRecord::from_json(data) {
        let top = r.truncated(3);
        assert!(top.entries.len() <= 3);
    }
});
