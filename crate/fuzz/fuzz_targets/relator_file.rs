#![no_main]
use freiheit::density::parse_relators;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(r) = parse_relators(s) {
        assert_eq!(parse_relators(&r.to_text()).unwrap(), r);
    }
});
