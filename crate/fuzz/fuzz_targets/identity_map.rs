#![no_main]

use chronograph_core::reports::IdentityMap;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = IdentityMap::read(data);
});
