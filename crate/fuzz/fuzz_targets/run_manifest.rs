#![no_main]
use freiheit_cli::RunManifest;
use libfuzzer_sys::fuzz_target;

// replay trusts nothing in a manifest beyond its shape
fuzz_target!(|data: &[u8]| {
    let _ = serde_json::from_slice::<RunManifest>(data);
});
