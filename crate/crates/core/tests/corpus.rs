//! Every fuzz seed goes through the same checks the fuzz targets make.

use freiheit::abstract_diagrams::{classify, parse_abstract_json};
use freiheit::density::parse_relators;
use freiheit::experiments::validate_config;
use freiheit::planar::parse_diagram_json;
use freiheit::stallings::{fold, parse_graph};
use freiheit::words::parse_word;
use std::path::Path;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn word_seeds() {
    let mut ok = 0;
    for (_, s) in seeds("word_text") {
        if let Ok(w) = parse_word(&s) {
            assert_eq!(parse_word(&w.to_text()).unwrap(), w);
            ok += 1;
        }
    }
    assert!(ok >= 3);
}

#[test]
fn graph_seeds() {
    let mut ok = 0;
    for (name, s) in seeds("graph_text") {
        if let Ok(g) = parse_graph(&s) {
            assert_eq!(parse_graph(&g.to_text()).unwrap(), g, "{name}");
            fold(&g).unwrap();
            ok += 1;
        }
    }
    assert!(ok >= 4);
}

#[test]
fn diagram_seeds() {
    for (name, s) in seeds("diagram_json") {
        let (d, _) = parse_diagram_json(&s).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again = serde_json::to_string(&d.to_json()).unwrap();
        assert_eq!(parse_diagram_json(&again).unwrap().0, d, "{name}");
    }
}

#[test]
fn abstract_seeds() {
    let mut ok = 0;
    for (name, s) in seeds("abstract_json") {
        if let Ok(add) = parse_abstract_json(&s) {
            let again = serde_json::to_string(&add.to_json()).unwrap();
            assert_eq!(parse_abstract_json(&again).unwrap(), add, "{name}");
            classify(&add).unwrap();
            ok += 1;
        }
    }
    assert_eq!(ok, 2);
}

#[test]
fn config_seeds() {
    let valid: Vec<String> = seeds("config_json").into_iter().filter(|(_, s)| validate_config(s).is_ok()).map(|(n, _)| n).collect();
    assert_eq!(valid, ["defaults", "sweep"]);
}

#[test]
fn relator_seeds() {
    for (name, s) in seeds("relator_file") {
        match parse_relators(&s) {
            Ok(r) => assert_eq!(parse_relators(&r.to_text()).unwrap(), r, "{name}"),
            Err(_) => assert_eq!(name, "one_generator"),
        }
    }
}
