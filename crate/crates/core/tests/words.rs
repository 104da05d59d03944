use freiheit::seed::rng_for;
use freiheit::words::*;
use freiheit::{Alphabet, Letter, Word};
use num_bigint::BigUint;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::{HashMap, HashSet};

fn stack_reduce(w: &[Letter]) -> Vec<Letter> {
    let mut st: Vec<Letter> = Vec::new();
    for &x in w {
        if st.last() == Some(&-x) {
            st.pop();
        } else {
            st.push(x);
        }
    }
    st
}

fn stack_cyclic(w: &[Letter]) -> Vec<Letter> {
    let mut v = stack_reduce(w);
    while v.len() >= 2 && v[0] == -v[v.len() - 1] {
        v.remove(0);
        v.pop();
    }
    v
}

fn letters(m: usize) -> Vec<Letter> {
    (1..=m as Letter).flat_map(|i| [i, -i]).collect()
}

/// Every word of length exactly `len` over the 2m letters.
fn all_words(m: usize, len: usize) -> Vec<Vec<Letter>> {
    let ls = letters(m);
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out.into_iter().flat_map(|w| ls.iter().map(move |&x| [w.clone(), vec![x]].concat())).collect();
    }
    out
}

fn word_strategy(m: usize, max: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((1..=m as Letter, any::<bool>()).prop_map(|(i, s)| if s { i } else { -i }), 0..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn free_reduction_matches_stack(w in word_strategy(3, 24)) {
        let a = Alphabet::new(3).unwrap();
        let r = free_reduce(&a, &Word(w.clone())).unwrap();
        prop_assert_eq!(r.letters(), &stack_reduce(&w)[..]);
        prop_assert!(r.is_reduced());
        prop_assert_eq!(free_reduce(&a, &r).unwrap(), r.clone());
        prop_assert!(r.len() <= w.len());
    }

    #[test]
    fn cyclic_reduction_matches_stack(w in word_strategy(3, 24)) {
        let a = Alphabet::new(3).unwrap();
        let r = cyclic_reduce(&a, &Word(w.clone())).unwrap();
        prop_assert_eq!(r.letters(), &stack_cyclic(&w)[..]);
        prop_assert!(r.is_cyclically_reduced());
        prop_assert_eq!(cyclic_reduce(&a, &r).unwrap(), r);
    }
}

proptest! {
    #[test]
    fn text_round_trip(w in word_strategy(5, 30)) {
        let w = Word(w);
        prop_assert_eq!(parse_word(&w.to_text()).unwrap(), w);
    }

    #[test]
    fn rank_unrank_round_trip(m in 2usize..4, ell in 1usize..9, seed in any::<u64>()) {
        let c = CrCounts::new(m, ell).unwrap();
        let mut rng = rng_for(seed, &[]);
        let w = c.sample(&mut rng);
        prop_assert!(w.is_cyclically_reduced() && !w.is_empty() && w.len() <= ell);
        let i = c.rank(&w).unwrap();
        prop_assert_eq!(c.unrank(i), w);
    }

    #[test]
    fn cyclic_canonical_is_rotation_invariant(w in word_strategy(2, 12), k in 0usize..12) {
        let w = Word(stack_cyclic(&w));
        prop_assume!(!w.is_empty());
        let k = k % w.len();
        prop_assert_eq!(w.rotate(k).cyclic_canonical(), w.cyclic_canonical());
        prop_assert_eq!(w.inverse().cyclic_canonical(), w.cyclic_canonical());
    }
}

#[test]
fn counts_match_brute_force() {
    for m in [2, 3] {
        for len in 0..=6 {
            let ws = all_words(m, len);
            let reduced = ws.iter().filter(|w| stack_reduce(w).len() == len).count();
            let cyc = ws.iter().filter(|w| stack_cyclic(w).len() == len).count();
            assert_eq!(count_reduced_exact(m, len), BigUint::from(reduced), "m={m} L={len}");
            assert_eq!(count_cyclically_reduced(m, len), BigUint::from(cyc), "m={m} L={len}");
            if len > 0 {
                let closed = BigUint::from(2 * m) * BigUint::from(2 * m - 1).pow(len as u32 - 1);
                assert_eq!(count_reduced_exact(m, len), closed);
            }
        }
    }
}

#[test]
fn enumeration_is_exhaustive_and_ordered() {
    for m in [2, 3] {
        let ell = 5;
        let listed: Vec<Word> = enumerate_cyclically_reduced(m, ell, 1e7).unwrap().collect();
        let distinct: HashSet<&Word> = listed.iter().collect();
        assert_eq!(distinct.len(), listed.len());
        let brute: usize = (1..=ell).map(|l| all_words(m, l).iter().filter(|w| stack_cyclic(w).len() == l).count()).sum();
        assert_eq!(listed.len(), brute);
        assert!(listed.windows(2).all(|p| shortlex_cmp(&p[0], &p[1]).is_lt()));
        for l in 1..=ell {
            let n = listed.iter().filter(|w| w.len() == l).count();
            assert!(BigUint::from(n) <= count_reduced_exact(m, l));
        }
        assert_eq!(BigUint::from(listed.len()), count_b(m, ell));
    }
}

#[test]
fn enumerate_two_generators_length_two() {
    let ws: Vec<String> = enumerate_cyclically_reduced(2, 2, 1e7).unwrap().map(|w| w.to_text()).collect();
    assert_eq!(ws.len(), 16);
    assert_eq!(&ws[..4], &["a", "A", "b", "B"]);
}

#[test]
fn sampling_is_uniform_on_b4() {
    let c = CrCounts::new(2, 4).unwrap();
    let n = c.total() as usize;
    let draws = 200 * n;
    let mut rng = rng_for(11, &[4]);
    let mut hist: HashMap<Word, usize> = HashMap::new();
    for _ in 0..draws {
        *hist.entry(c.sample(&mut rng)).or_default() += 1;
    }
    assert_eq!(hist.len(), n);
    let expect = draws as f64 / n as f64;
    let chi: f64 = hist.values().map(|&o| (o as f64 - expect).powi(2) / expect).sum();
    let p = 1.0 - ChiSquared::new((n - 1) as f64).unwrap().cdf(chi);
    assert!(p > 0.001, "chi2 = {chi}, p = {p}");
}

#[test]
fn malformed_words_are_rejected() {
    assert!(parse_word("ab1").is_err());
    assert!(parse_word("a b").is_err());
    assert_eq!(parse_word("1").unwrap(), Word::empty());
    let a = Alphabet::new(2).unwrap();
    assert!(free_reduce(&a, &parse_word("c").unwrap()).is_err());
}
