use freiheit::abstract_diagrams::*;
use freiheit::planar::twin;
use freiheit::stallings::{parse_graph, LabeledGraph};
use freiheit::words::enumerate_cyclically_reduced;
use freiheit::{Error, Word};
use std::collections::{BTreeMap, BTreeSet};

fn small_pairs(ell: usize) -> Vec<AbstractDistortionDiagram> {
    enumerate_abstract_distortion_diagrams(2, ell).unwrap()
}

/// Classes straight from the definitions: collect the letters on every
/// undirected edge, then a letter is free when it is the least letter on
/// each edge it decorates and none of them lies on p, semi-free when the
/// same holds except that one of them lies on p.
fn brute_classes(add: &AbstractDistortionDiagram) -> BTreeMap<(usize, usize), LetterClass> {
    let d = &add.base;
    let walk = d.outer_walk();
    let pbar: BTreeSet<usize> = (0..add.p.length).map(|t| walk[(add.p.start + t) % walk.len()].min(twin(walk[(add.p.start + t) % walk.len()]))).collect();
    let mut on_edge: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    let mut edges_of: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for f in d.faces() {
        for (j, &x) in f.boundary.iter().enumerate() {
            let e = x.min(twin(x));
            let letter = (f.relator + 1, j + 1);
            on_edge.entry(e).or_default().push(letter);
            edges_of.entry(letter).or_default().push(e);
        }
    }
    edges_of
        .into_iter()
        .map(|(x, es)| {
            let minimal = es.iter().all(|e| on_edge[e].iter().all(|&y| y >= x));
            let on_p = es.iter().any(|e| pbar.contains(e));
            let c = match (minimal, on_p) {
                (false, _) => LetterClass::NotFreeToFill,
                (true, true) => LetterClass::SemiFreeToFill,
                (true, false) => LetterClass::FreeToFill,
            };
            (x, c)
        })
        .collect()
}

#[test]
fn classify_matches_brute_force() {
    let pairs = small_pairs(4);
    assert!(pairs.len() > 1000);
    for add in &pairs {
        let got: BTreeMap<(usize, usize), LetterClass> =
            classify(add).unwrap().classes.iter().map(|(x, c)| ((x.relator, x.position), *c)).collect();
        assert_eq!(got, brute_classes(add));
    }
}

#[test]
fn decorations_count_incidences() {
    for ad in enumerate_abstract_diagrams(2, 4).unwrap() {
        let lens = relator_lengths(&ad).unwrap();
        let mut alpha = vec![0; lens.len()];
        for f in ad.faces() {
            alpha[f.relator] += 1;
        }
        let expect: usize = lens.iter().zip(&alpha).map(|(l, a)| l * a).sum();
        assert_eq!(decorate(&ad).unwrap().total(), expect);
        let parts = edge_partition(&ad).unwrap();
        let mut all: Vec<usize> = parts.iter().flatten().copied().collect();
        all.sort();
        let n = all.len();
        all.dedup();
        assert_eq!(all.len(), n, "edge sets overlap");
        assert_eq!(n, ad.edge_count());
    }
}

#[test]
fn first_use_renumbering_keeps_classes() {
    for add in small_pairs(3) {
        let (re, order) = underlying_abstract(&add.base);
        let renumbered = AbstractDistortionDiagram::new(re, add.p).unwrap();
        let before = classify(&add).unwrap();
        let after = classify(&renumbered).unwrap();
        if order.windows(2).all(|w| w[0] < w[1]) {
            assert_eq!(before, after);
        }
    }
}

/// Tuples of distinct words of B_ℓ that fill the diagram, with p read on Γ.
fn brute_fillings(add: &AbstractDistortionDiagram, m: usize, ell: usize, gamma: &LabeledGraph) -> usize {
    let lens = relator_lengths(&add.base).unwrap();
    let pool: Vec<Word> = enumerate_cyclically_reduced(m, ell, 1e6).unwrap().collect();
    let by_len = |l: usize| pool.iter().filter(|w| w.len() == l).cloned().collect::<Vec<_>>();
    let mut tuples: Vec<Vec<Word>> = vec![Vec::new()];
    for &l in &lens {
        let cands = by_len(l);
        tuples = tuples
            .into_iter()
            .flat_map(|t| cands.iter().filter(|w| !t.contains(w)).map(|w| [t.clone(), vec![w.clone()]].concat()).collect::<Vec<_>>())
            .collect();
    }
    let pdarts = add.path_darts();
    tuples
        .iter()
        .filter(|t| match fill(&add.base, t) {
            Ok(d) => gamma.reads(&d.word_of(&pdarts)),
            Err(Error::NotFillable(_)) => false,
            Err(e) => panic!("{e}"),
        })
        .count()
}

#[test]
fn fillings_match_brute_force() {
    let loop_a = parse_graph("V 1\nE 0 0 a\n").unwrap();
    let eight = parse_graph("V 1\nE 0 0 a\nE 0 0 b\n").unwrap();
    let mut checked = 0;
    for add in small_pairs(3) {
        let counts = filling_counts_by_path(&add.base, 2, 3, &loop_a).unwrap();
        for g in [&loop_a, &eight] {
            let n = enumerate_fillings(&add, 2, 3, g).unwrap().len();
            assert_eq!(n, brute_fillings(&add, 2, 3, g), "{:?}", add.to_json());
            if std::ptr::eq(g, &loop_a) {
                assert_eq!(counts.count(add.p) as usize, n);
            }
            checked += 1;
        }
    }
    assert!(checked > 100);
}

#[test]
fn fillings_respect_the_bound() {
    let gs = [parse_graph("V 1\nE 0 0 a\n").unwrap(), parse_graph("V 1\nE 0 0 a\nE 0 0 b\n").unwrap()];
    for add in small_pairs(3) {
        let t = bound_terms(&add).unwrap();
        for (g, r) in gs.iter().zip([1, 2]) {
            let n = enumerate_fillings(&add, 2, 3, g).unwrap().len() as u64;
            assert!(bound_holds(n, t, 2, r, g.edge_count()));
        }
    }
}

#[test]
fn json_round_trip() {
    for add in small_pairs(3).into_iter().step_by(7) {
        let text = serde_json::to_string(&add.to_json()).unwrap();
        assert_eq!(parse_abstract_json(&text).unwrap(), add);
    }
    assert!(parse_abstract_json("{").is_err());
    assert!(parse_abstract_json("{\"vertices\": 1}").is_err());
}

#[test]
fn census_matches_hand_count() {
    // one-gon and two-gon; p is empty or any (start, length) on the walk
    let c = abstract_census(1, 2).unwrap();
    assert_eq!(c.diagrams, 2);
    assert_eq!(c.pairs, (1 + 1) + (1 + 4));
}
