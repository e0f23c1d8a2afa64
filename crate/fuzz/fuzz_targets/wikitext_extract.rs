#![no_main]

use chronograph_core::ingest::wikitext::{extract, normalize_title};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let found = extract(text);
    for title in found.wikilinks.iter().chain(&found.categories) {
        assert!(!title.is_empty());
        assert_eq!(normalize_title(title).as_deref(), Some(title.as_str()));
    }
});
