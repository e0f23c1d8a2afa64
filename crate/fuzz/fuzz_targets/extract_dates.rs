#![no_main]

use chronograph_core::ingest::extract_dates;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let categories: Vec<&str> = text.split('\n').collect();
    if let Some(d) = extract_dates(&categories) {
        assert!(d.conflicts as usize <= categories.len());
        let mut reversed = categories.clone();
        reversed.reverse();
        assert_eq!(extract_dates(&reversed), Some(d));
    }
});
