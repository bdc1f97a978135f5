#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(mols) = poseval::structio::parse_sdf(text) {
            let _ = poseval::structio::write_sdf(&mols);
        }
    }
});
