#![no_main]
use freiheit::abstract_diagrams::{classify, parse_abstract_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(add) = parse_abstract_json(s) {
        let again = serde_json::to_string(&add.to_json()).unwrap();
        assert_eq!(parse_abstract_json(&again).unwrap(), add);
        let _ = classify(&add);
    }
});
