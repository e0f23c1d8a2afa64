#![no_main]

use chronograph_core::ingest::DumpReader;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let mut reader = DumpReader::new(data, 4096);
    let mut errors = 0;
    for page in reader.by_ref() {
        match page {
            Ok(page) => assert!(!page.title.is_empty()),
            Err(e) => {
                errors += 1;
                assert!(e.offset() <= data.len() as u64);
            }
        }
    }
    assert!(errors <= 1);
    let stats = reader.stats();
    assert!(stats.pages + stats.oversized <= data.len() as u64);
});
