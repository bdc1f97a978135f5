#![no_main]

use libfuzzer_sys::fuzz_target;

// The parser must never panic; structured errors are fine. Round-trip
// successfully parsed structures through the writer as a bonus check.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(st) = poseval::structio::parse_pdb(text) {
            let _ = poseval::structio::write_pdb(&st);
        }
    }
});
