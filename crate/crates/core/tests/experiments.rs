use freiheit::density::*;
use freiheit::experiments::*;
use freiheit::seed::{density_key, rng_for};
use freiheit::words::{count_b, parse_word, CrCounts};
use freiheit::{Letter, Word};
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::Rng;
use std::collections::BTreeMap;

fn random_reduced<R: Rng>(rng: &mut R, r: usize, len: usize) -> Word {
    let mut w: Vec<Letter> = Vec::new();
    while w.len() < len {
        let x = rng.random_range(1..=r as Letter) * if rng.random_bool(0.5) { 1 } else { -1 };
        if w.last() != Some(&-x) {
            w.push(x);
        }
    }
    Word(w)
}

#[test]
fn rewriting_stays_over_kept_generators() {
    let (m, r, ell) = (3, 2, 7);
    for t in 0..100u64 {
        let mut rng = rng_for(21, &[t]);
        let model = DensityModel::new(ModelKind::Bernoulli, 0.3, 21).unwrap();
        let rels = sample_relators(m, ell, &model, &mut rng).unwrap();
        let mut subs = BTreeMap::new();
        for i in r + 1..=m {
            let len = rng.random_range(0..ell);
            subs.insert(i, random_reduced(&mut rng, r, len));
        }
        let out = rewrite_presentation(&rels, &subs, r).unwrap();
        assert_eq!(out.relators.len() + out.dropped.len(), rels.len());
        for w in &out.relators {
            assert!(w.over_first(r), "{w}");
            assert!(w.is_cyclically_reduced());
            assert!(w.len() <= ell * (ell - 1));
        }
    }
}

#[test]
fn rewriting_rejects_bad_substitutions() {
    let rels = RelatorSet::explicit(3, vec![parse_word("abc").unwrap()]).unwrap();
    assert!(rewrite_presentation(&rels, &BTreeMap::new(), 2).is_err());
    let mut subs = BTreeMap::new();
    subs.insert(3, parse_word("c").unwrap());
    assert!(rewrite_presentation(&rels, &subs, 2).is_err());
    subs.insert(3, parse_word("abab").unwrap());
    assert!(rewrite_presentation(&rels, &subs, 2).is_err());
    subs.insert(3, parse_word("BA").unwrap());
    let out = rewrite_presentation(&rels, &subs, 2).unwrap();
    assert_eq!(out.dropped, vec![0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn collapse_witnesses_replay(seed in any::<u64>(), d in 0.1f64..0.5) {
        let model = DensityModel::new(ModelKind::Bernoulli, d, seed).unwrap();
        let rels = sample_relators(3, 6, &model, &mut rng_for(seed, &[6])).unwrap();
        for mode in [CollapseMatch::Leading, CollapseMatch::Cyclic] {
            let res = collapse_probe_with(&rels, 2, None, mode).unwrap();
            for (_, s) in &res.substitutions {
                if let Some(s) = s {
                    prop_assert!(s.replays(&rels, &res.kept));
                }
            }
            if res.complete() {
                let out = rewrite_presentation(&rels, &res.map(), 2).unwrap();
                prop_assert!(out.relators.iter().all(|w| w.over_first(2)));
            }
        }
    }

    #[test]
    fn streaming_trial_agrees_with_probe(seed in any::<u64>(), d in 0.1f64..0.6) {
        let (m, r, ell) = (3, 2, 6);
        let model = DensityModel::new(ModelKind::Bernoulli, d, seed).unwrap();
        let path = [ell as u64, density_key(d), 0];
        let rels = sample_relators(m, ell, &model, &mut rng_for(seed, &path)).unwrap();
        for mode in [CollapseMatch::Leading, CollapseMatch::Cyclic] {
            let (hit, size) = collapse_trial(m, r, ell, &model, mode, &path).unwrap();
            prop_assert_eq!(size, rels.len());
            prop_assert_eq!(hit, collapse_probe_with(&rels, r, None, mode).unwrap().complete());
        }
    }

    #[test]
    fn triviality_witnesses_are_relator_rotations(seed in any::<u64>()) {
        let model = DensityModel::new(ModelKind::Bernoulli, 0.5, seed).unwrap();
        let rels = sample_relators(2, 5, &model, &mut rng_for(seed, &[5])).unwrap();
        let canon: Vec<Word> = rels.relators().iter().map(|w| w.cyclic_canonical()).collect();
        for w in rels.triviality_witnesses() {
            prop_assert!(canon.contains(&w.xw.cyclic_canonical()));
            prop_assert!(canon.contains(&w.w.cyclic_canonical()));
            prop_assert_eq!(w.xw.letters()[0].unsigned_abs() as usize, w.generator);
        }
    }
}

trait Witnesses {
    fn triviality_witnesses(&self) -> Vec<TrivialityWitness>;
}

impl Witnesses for RelatorSet {
    fn triviality_witnesses(&self) -> Vec<TrivialityWitness> {
        triviality_probe(self).per_generator.into_iter().flatten().collect()
    }
}

#[test]
fn cancelling_suffix_kills_a_generator() {
    let rels = RelatorSet::explicit(2, vec![parse_word("abbb").unwrap(), parse_word("bbb").unwrap()]).unwrap();
    let ev = triviality_probe(&rels);
    assert!(ev.per_generator[0].is_some());
}

/// Monte Carlo collapse frequency against (1 - (1-p)^{|A|})^{m-r} at sizes
/// where both are far from 0 and 1.
#[test]
fn collapse_frequency_tracks_oracle() {
    let (m, r, ell, trials) = (3, 2, 8, 400);
    for d in [0.2, 0.25, 0.3] {
        let p = collapse_probability(m, r, ell, d, CollapseMatch::Leading).unwrap();
        let f = collapse_frequency(m, r, ell, d, trials, 99, CollapseMatch::Leading).unwrap();
        let sd = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((f - p).abs() <= 4.0 * sd + 1e-9, "d = {d}: freq {f}, oracle {p}");
    }
}

#[test]
fn witness_count_matches_enumeration() {
    let (m, r, ell) = (3, 2, 5);
    let c = CrCounts::new(m, ell).unwrap();
    let kept = kept_generators(m, r, None).unwrap();
    for mode in [CollapseMatch::Leading, CollapseMatch::Cyclic] {
        let mut n = 0;
        for i in 0..c.total() {
            let w = c.unrank(i);
            let rels = RelatorSet::explicit(m, vec![w]).unwrap();
            if collapse_probe_with(&rels, r, Some(&kept), mode).unwrap().substitutions[0].1.is_some() {
                n += 1;
            }
        }
        assert_eq!(n as f64, witness_count(r, ell, mode), "{mode:?}");
    }
}

#[test]
fn bernoulli_sizes_follow_the_density() {
    let (m, ell, d) = (2, 10, 0.5);
    let b = count_b(m, ell).to_f64().unwrap();
    let p = b.powf(d - 1.0);
    let model = DensityModel::new(ModelKind::Bernoulli, d, 3).unwrap();
    let trials = 200;
    let mean: f64 = (0..trials)
        .map(|t| sample_relators(m, ell, &model, &mut rng_for(3, &[t])).unwrap().len() as f64)
        .sum::<f64>()
        / trials as f64;
    let sd = (b * p * (1.0 - p) / trials as f64).sqrt();
    assert!((mean - b * p).abs() < 4.0 * sd, "mean {mean} vs {}", b * p);
}

#[test]
fn intersecting_with_everything_keeps_b() {
    for row in intersection_experiment(1.0, 0.4, 2, &[8], 20, ModelKind::Bernoulli, 5).unwrap() {
        assert_eq!(row.size_intersection, row.size_b);
    }
}

#[test]
fn config_validation_collects_every_error() {
    let cfg = validate_config(r#"{"m": 3, "r": 2}"#).unwrap();
    assert_eq!(cfg.ells, vec![12]);
    assert_eq!(cfg.trials, 100);
    let e = validate_config(r#"{"m": 3, "r": 3, "densities": [1.5], "bogus": 1}"#).unwrap_err();
    assert!(e.0.len() >= 3, "{e}");
    assert!(validate_config("[]").is_err());
    assert!(validate_config("not json").is_err());
}

#[test]
fn sweep_does_not_depend_on_threads() {
    let cfg = validate_config(r#"{"m": 3, "r": 2, "ells": [6, 8], "densities": [0.2, 0.4], "trials": 10, "seed": 4}"#).unwrap();
    let run = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(|| sweep_csv(&transition_sweep(&cfg).unwrap()));
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one.lines().count(), 5);
}

#[test]
fn critical_density_values() {
    let c = critical_density(3, 2).unwrap();
    assert!((c.d_r - (1.0 - 3f64.ln() / 5f64.ln())).abs() < 1e-12);
    assert_eq!(critical_density(10, 1).unwrap().d_r, 0.5);
    assert!(critical_density(3, 3).is_err());
    assert!(epsilon_d(3, 2, 0.5).is_err());
}
