#![no_main]
use freiheit::stallings::{fold, parse_graph};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse_graph(s) {
        assert_eq!(parse_graph(&g.to_text()).unwrap(), g);
        if g.edge_count() <= 64 && g.is_connected() {
            let _ = fold(&g);
        }
    }
});
