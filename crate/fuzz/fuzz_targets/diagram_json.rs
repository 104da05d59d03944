#![no_main]
use freiheit::planar::parse_diagram_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok((d, _)) = parse_diagram_json(s) {
        let again = serde_json::to_string(&d.to_json()).unwrap();
        assert_eq!(parse_diagram_json(&again).unwrap().0, d);
    }
});
