#![no_main]
use freiheit::words::parse_word;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(w) = parse_word(s) {
        assert_eq!(parse_word(&w.to_text()).unwrap(), w);
    }
});
