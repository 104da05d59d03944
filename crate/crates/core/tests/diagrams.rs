use freiheit::abstract_diagrams::{fill, underlying_abstract};
use freiheit::density::{parse_relators, RelatorSet};
use freiheit::diagrams::*;
use freiheit::planar::{twin, Diagram};
use freiheit::words::parse_word;
use freiheit::Word;

fn rels(text: &str) -> RelatorSet {
    parse_relators(text).unwrap()
}

fn families() -> Vec<RelatorSet> {
    vec![
        rels("m 2\nabAB\n"),
        rels("m 2\naab\nab\n"),
        rels("m 2\naaa\n"),
        rels("m 2\naabb\nabab\n"),
        rels("m 3\nabc\nacb\n"),
    ]
}

/// Two faces with the same relator and one common undirected edge at the
/// same position of their positive boundaries.
fn reduced_by_pairs(d: &Diagram) -> bool {
    let fs = d.faces();
    for a in 0..fs.len() {
        for b in a + 1..fs.len() {
            if fs[a].relator != fs[b].relator {
                continue;
            }
            for (j, &x) in fs[a].boundary.iter().enumerate() {
                for (k, &y) in fs[b].boundary.iter().enumerate() {
                    if j == k && (x == y || x == twin(y)) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

#[test]
fn is_reduced_matches_pair_oracle() {
    let mut seen_unreduced = 0;
    for r in families() {
        let all = enumerate_disk_diagrams(&r, 3, EnumOptions { prune: false, ..EnumOptions::default() }).unwrap();
        assert!(!all.is_empty());
        for d in &all {
            assert_eq!(is_reduced(d), reduced_by_pairs(d));
            if !is_reduced(d) {
                seen_unreduced += 1;
            }
        }
    }
    assert!(seen_unreduced > 0, "the unpruned search should meet reducible pairs");
}

#[test]
fn enumerated_diagrams_validate_and_round_trip() {
    for r in families() {
        for d in enumerate_reduced_disk_diagrams(&r, 3).unwrap() {
            validate(&d, &r).unwrap();
            assert!(is_reduced(&d));
            assert_eq!(d.euler_characteristic(), 2);
            let (ad, order) = underlying_abstract(&d);
            let words: Vec<Word> = order.iter().map(|&i| r.relators()[i].clone()).collect();
            let back = fill(&ad, &words).unwrap();
            let original: Vec<usize> = back.faces().iter().map(|f| order[f.relator]).collect();
            assert_eq!(back.relabeled(back.labels().to_vec(), &original), d);
        }
    }
}

#[test]
fn one_face_boundary_is_the_relator() {
    for r in families() {
        for d in enumerate_reduced_disk_diagrams(&r, 1).unwrap() {
            let rel = &r.relators()[d.faces()[0].relator];
            assert_eq!(boundary_word(&d), rel.cyclic_canonical());
            assert_eq!(isoperimetric_ratio(&d, rel.len()), 1.0);
        }
    }
    let comm = rels("m 2\nabAB\n");
    assert_eq!(enumerate_reduced_disk_diagrams(&comm, 1).unwrap().len(), 1);
    assert!(enumerate_reduced_disk_diagrams(&comm, 0).unwrap().is_empty());
}

#[test]
fn flipped_label_fails_validation() {
    let r = rels("m 2\nabAB\n");
    let d = Diagram::polygon(4, 0, Some(parse_word("abAB").unwrap().letters())).unwrap();
    validate(&d, &r).unwrap();
    let bad = Diagram::polygon(4, 0, Some(parse_word("abAb").unwrap().letters()));
    // a polygon reading abAb is either refused outright or fails the face check
    if let Ok(bad) = bad {
        assert!(validate(&bad, &r).is_err());
    }
}

#[test]
fn triviality_witnesses_replay() {
    let r = rels("m 2\nab\nb\n");
    for w in ["ab", "b", "a", "aab", "abab"] {
        let w = parse_word(w).unwrap();
        match bounded_triviality(&r, &w, TrivialityBudget::for_length(2)) {
            TrivialityVerdict::Trivial { steps } => assert!(replay(&r, &w, &steps).unwrap().is_empty()),
            v => panic!("{w} should be trivial, got {v:?}"),
        }
    }
    let free = RelatorSet::explicit(2, Vec::new()).unwrap();
    for w in ["a", "abAB", "bb"] {
        let v = bounded_triviality(&free, &parse_word(w).unwrap(), TrivialityBudget::for_length(4));
        assert!(!v.is_trivial());
    }
}

#[test]
fn torsion_loop_fails_the_certificate() {
    let r = rels("m 2\naaaa\n");
    let g = freiheit::stallings::parse_graph("V 1\nE 0 0 a\n").unwrap();
    let rep = certify_bilipschitz(&r, &g, 1, 1000.0).unwrap();
    assert!(!rep.holds);
    let empty = RelatorSet::explicit(2, Vec::new()).unwrap();
    assert!(certify_bilipschitz(&empty, &g, 2, 1.0).unwrap().holds);
}
