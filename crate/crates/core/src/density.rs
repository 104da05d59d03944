//! Random subsets at density d: the Bernoulli model, the fixed-cardinality
//! model, density estimates, relator sets and the intersection experiment.

use crate::error::{feasibility, Error, Result};
use crate::seed::{density_key, rng_for};
use crate::words::{count_b, shortlex_cmp, Alphabet, CrCounts, Word};
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Largest subset materialised in memory.
pub const DEFAULT_SUBSET_LIMIT: f64 = 5e7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Bernoulli,
    #[serde(alias = "count")]
    UniformCount,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bernoulli" => Ok(ModelKind::Bernoulli),
            "count" | "uniform_count" => Ok(ModelKind::UniformCount),
            _ => Err(Error::Domain(format!("unknown model {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityModel {
    pub kind: ModelKind,
    pub d: f64,
    pub seed: u64,
}

impl DensityModel {
    pub fn new(kind: ModelKind, d: f64, seed: u64) -> Result<Self> {
        check_density(kind, d)?;
        Ok(DensityModel { kind, d, seed })
    }
}

fn check_density(kind: ModelKind, d: f64) -> Result<()> {
    let ok = match kind {
        ModelKind::Bernoulli => d > 0.0 && d <= 1.0,
        ModelKind::UniformCount => (0.0..=1.0).contains(&d),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(match kind {
            ModelKind::Bernoulli => format!("Bernoulli model needs 0 < d <= 1, got {d}"),
            ModelKind::UniformCount => format!("density must lie in [0, 1], got {d}"),
        }))
    }
}

/// ln p for p = N^(d-1).
pub fn log_inclusion_probability(universe: f64, d: f64) -> f64 {
    (d - 1.0) * universe.ln()
}

/// Sorted indices of a Bernoulli subset of {0..n}, each kept with
/// probability n^(d-1). Gaps between kept indices are drawn from the
/// geometric law, so the cost is proportional to the output size.
pub fn bernoulli_indices<R: Rng + ?Sized>(n: u64, d: f64, rng: &mut R) -> Result<Vec<u64>> {
    check_density(ModelKind::Bernoulli, d)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let expected = (d * (n as f64).ln()).exp();
    feasibility("expected Bernoulli subset size", expected, DEFAULT_SUBSET_LIMIT)?;
    if d == 1.0 {
        return Ok((0..n).collect());
    }
    let p = log_inclusion_probability(n as f64, d).exp();
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!("inclusion probability {p}")));
    }
    // Gaps are Geometric(p) by inversion: floor(ln U / ln(1-p)), U in (0,1].
    let log_q = (-p).ln_1p();
    let mut out = Vec::with_capacity((expected * 1.2) as usize + 8);
    let mut pos: u64 = 0;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        let gap = if log_q == 0.0 { u64::MAX } else { (u.ln() / log_q).floor().min(u64::MAX as f64) as u64 };
        let idx = pos.saturating_add(gap);
        if idx >= n {
            break;
        }
        out.push(idx);
        pos = idx + 1;
    }
    Ok(out)
}

/// Subset size for a Bernoulli draw over a universe too large for exact
/// gap sampling: normal approximation of Binomial(N, p), Poisson when the
/// mean is small.
pub fn bernoulli_size_approx<R: Rng + ?Sized>(n: &BigUint, d: f64, rng: &mut R) -> Result<u64> {
    check_density(ModelKind::Bernoulli, d)?;
    let nf = n.to_f64().unwrap_or(f64::INFINITY);
    let mean = (d * nf.ln()).exp();
    feasibility("expected Bernoulli subset size", mean, DEFAULT_SUBSET_LIMIT)?;
    let p = log_inclusion_probability(nf, d).exp();
    let size = if mean < 1000.0 {
        Poisson::new(mean).map(|pd| pd.sample(rng)).unwrap_or(0.0)
    } else {
        let sd = (mean * (1.0 - p)).sqrt();
        Normal::new(mean, sd).map(|nd| nd.sample(rng)).unwrap_or(mean).round().max(0.0)
    };
    Ok(size as u64)
}

/// ⌊n^d⌋, snapping to an integer when n^d is one up to rounding error.
pub fn uniform_count_size(n: f64, d: f64) -> u64 {
    let f = (d * n.ln()).exp();
    let r = f.round();
    if (f - r).abs() <= 1e-9 * r.max(1.0) {
        r as u64
    } else {
        f.floor() as u64
    }
}

/// Sorted indices of a uniformly chosen subset of {0..n} of size ⌊n^d⌋
/// (Floyd's algorithm).
pub fn uniform_count_indices<R: Rng + ?Sized>(n: u64, d: f64, rng: &mut R) -> Result<Vec<u64>> {
    check_density(ModelKind::UniformCount, d)?;
    let k = uniform_count_size(n as f64, d).min(n);
    feasibility("fixed-cardinality subset size", k as f64, DEFAULT_SUBSET_LIMIT)?;
    Ok(floyd(n, k, rng))
}

pub fn floyd<R: Rng + ?Sized>(n: u64, k: u64, rng: &mut R) -> Vec<u64> {
    let mut chosen: HashSet<u64> = HashSet::with_capacity(k as usize);
    for j in (n - k)..n {
        let t = rng.random_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut v: Vec<u64> = chosen.into_iter().collect();
    v.sort_unstable();
    v
}

/// log(size)/log(universe); -∞ for the empty subset.
pub fn density_estimate(subset_size: &BigUint, universe_size: &BigUint) -> f64 {
    if subset_size.is_zero() {
        return f64::NEG_INFINITY;
    }
    big_ln(subset_size) / big_ln(universe_size)
}

pub(crate) fn big_ln(x: &BigUint) -> f64 {
    match x.to_f64() {
        Some(f) if f.is_finite() => f.ln(),
        _ => {
            let bits = x.bits();
            let shift = bits - 64;
            let top = (x >> shift).to_f64().unwrap();
            top.ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
}

/// The conditioning event |E|^(d-ε) <= |A| <= |E|^(d+ε).
pub fn conditioning_event(subset_size: u64, universe: f64, d: f64, eps: f64) -> bool {
    let s = subset_size as f64;
    let ln_n = universe.ln();
    s > 0.0 && s.ln() >= (d - eps) * ln_n && s.ln() <= (d + eps) * ln_n
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Model(DensityModel),
    Explicit,
}

/// A deduplicated set of nonempty cyclically reduced relators of length ≤ ℓ,
/// kept in shortlex order.
#[derive(Clone, Debug, PartialEq)]
pub struct RelatorSet {
    alphabet: Alphabet,
    ell: usize,
    relators: Vec<Word>,
    provenance: Provenance,
}

impl RelatorSet {
    pub fn new(alphabet: Alphabet, ell: usize, words: Vec<Word>, provenance: Provenance) -> Result<Self> {
        for w in &words {
            alphabet.check(w)?;
            if w.is_empty() || !w.is_cyclically_reduced() || w.len() > ell {
                return Err(Error::Domain(format!(
                    "relator {w} must be nonempty, cyclically reduced and of length at most {ell}"
                )));
            }
        }
        let mut relators = words;
        relators.sort_by(shortlex_cmp);
        relators.dedup();
        Ok(RelatorSet { alphabet, ell, relators, provenance })
    }

    /// Explicit list; ℓ is the longest relator (at least 1).
    pub fn explicit(m: usize, words: Vec<Word>) -> Result<Self> {
        let ell = words.iter().map(Word::len).max().unwrap_or(1).max(1);
        Self::new(Alphabet::new(m)?, ell, words, Provenance::Explicit)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn m(&self) -> usize {
        self.alphabet.m()
    }

    pub fn max_len(&self) -> usize {
        self.ell
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn len(&self) -> usize {
        self.relators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relators.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("m {}\n", self.m());
        for r in &self.relators {
            s.push_str(&r.to_text());
            s.push('\n');
        }
        s
    }
}

/// Reads one relator per line; `#` starts a comment; an optional `m N`
/// line fixes the generator count, otherwise it is the largest index used
/// (at least 2).
pub fn parse_relators(text: &str) -> Result<RelatorSet> {
    let mut m: Option<usize> = None;
    let mut words = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("m ") {
            let v = rest.trim().parse::<usize>().map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
            m = Some(v);
            continue;
        }
        let w = crate::words::parse_word(line).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        words.push(w);
    }
    let used = words.iter().flat_map(|w| w.0.iter()).map(|x| x.unsigned_abs() as usize).max().unwrap_or(0);
    let m = m.unwrap_or(used.max(2));
    RelatorSet::explicit(m, words)
}

/// Samples R_ℓ ⊂ B_ℓ under the given model. Universes that fit in 64 bits
/// are sampled exactly by index; larger ones draw the size first and then
/// distinct uniform words by rejection.
pub fn sample_relators<R: Rng + ?Sized>(m: usize, ell: usize, model: &DensityModel, rng: &mut R) -> Result<RelatorSet> {
    let mut words = Vec::new();
    for_each_sampled_relator(m, ell, model, rng, |w| words.push(w))?;
    RelatorSet::new(Alphabet::new(m)?, ell, words, Provenance::Model(*model))
}

/// The same draw as [`sample_relators`], handed over as shortlex ranks in
/// increasing order.
pub fn for_each_sampled_index<R: Rng + ?Sized, F: FnMut(&CrCounts, u128)>(
    m: usize,
    ell: usize,
    model: &DensityModel,
    rng: &mut R,
    mut f: F,
) -> Result<()> {
    check_density(model.kind, model.d)?;
    let counts = CrCounts::new(m, ell)?;
    if let Ok(n) = u64::try_from(counts.total()) {
        let idx = match model.kind {
            ModelKind::Bernoulli => bernoulli_indices(n, model.d, rng)?,
            ModelKind::UniformCount => uniform_count_indices(n, model.d, rng)?,
        };
        for i in idx {
            f(&counts, i as u128);
        }
    } else {
        let total = count_b(m, ell);
        let size = match model.kind {
            ModelKind::Bernoulli => bernoulli_size_approx(&total, model.d, rng)?,
            ModelKind::UniformCount => {
                let k = uniform_count_size(total.to_f64().unwrap_or(f64::INFINITY), model.d);
                feasibility("fixed-cardinality subset size", k as f64, DEFAULT_SUBSET_LIMIT)?;
                k
            }
        };
        let mut seen = HashSet::with_capacity(size as usize);
        while (seen.len() as u64) < size {
            seen.insert(rng.random_range(0..counts.total()));
        }
        let mut idx: Vec<u128> = seen.into_iter().collect();
        idx.sort_unstable();
        for i in idx {
            f(&counts, i);
        }
    }
    Ok(())
}

/// Sampled relators in rank order, unranked one at a time.
pub fn for_each_sampled_relator<R: Rng + ?Sized, F: FnMut(Word)>(
    m: usize,
    ell: usize,
    model: &DensityModel,
    rng: &mut R,
    mut f: F,
) -> Result<()> {
    for_each_sampled_index(m, ell, model, rng, |counts, i| f(counts.unrank(i)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionRow {
    pub ell: usize,
    pub d_a: f64,
    pub d_b: f64,
    pub trial: usize,
    pub size_a: u64,
    pub size_b: u64,
    pub size_intersection: u64,
    pub density_estimate: f64,
}

fn sorted_intersection_len(a: &[u64], b: &[u64]) -> u64 {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn draw_indices<R: Rng + ?Sized>(kind: ModelKind, n: u64, d: f64, rng: &mut R) -> Result<Vec<u64>> {
    match kind {
        ModelKind::Bernoulli => bernoulli_indices(n, d, rng),
        ModelKind::UniformCount => uniform_count_indices(n, d, rng),
    }
}

/// Independent A, B ⊂ B_ℓ at densities d_a, d_b; one row per (ℓ, trial).
pub fn intersection_experiment(
    d_a: f64,
    d_b: f64,
    m: usize,
    ells: &[usize],
    trials: usize,
    kind: ModelKind,
    seed: u64,
) -> Result<Vec<IntersectionRow>> {
    check_density(kind, d_a)?;
    check_density(kind, d_b)?;
    let mut rows = Vec::new();
    for &ell in ells {
        let counts = CrCounts::new(m, ell)?;
        let n = u64::try_from(counts.total())
            .map_err(|_| Error::Feasibility { what: format!("|B_{ell}| as an index range"), estimate: counts.total() as f64, limit: u64::MAX as f64 })?;
        let universe = BigUint::from(n);
        let cell: Result<Vec<IntersectionRow>> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let path = [ell as u64, density_key(d_a), density_key(d_b), t as u64];
                let a = draw_indices(kind, n, d_a, &mut rng_for(seed, &[path[0], path[1], path[2], path[3], 0]))?;
                let b = draw_indices(kind, n, d_b, &mut rng_for(seed, &[path[0], path[1], path[2], path[3], 1]))?;
                let k = sorted_intersection_len(&a, &b);
                Ok(IntersectionRow {
                    ell,
                    d_a,
                    d_b,
                    trial: t,
                    size_a: a.len() as u64,
                    size_b: b.len() as u64,
                    size_intersection: k,
                    density_estimate: density_estimate(&BigUint::from(k), &universe),
                })
            })
            .collect();
        rows.extend(cell?);
    }
    Ok(rows)
}

pub fn intersection_csv(rows: &[IntersectionRow]) -> String {
    let mut s = String::from("ell,d_a,d_b,trial,size_a,size_b,size_intersection,density_estimate\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.ell,
            r.d_a,
            r.d_b,
            r.trial,
            r.size_a,
            r.size_b,
            r.size_intersection,
            fmt_estimate(r.density_estimate)
        ));
    }
    s
}

fn fmt_estimate(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.6}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_for;

    #[test]
    fn estimate_examples() {
        let b = |x: u64| BigUint::from(x);
        assert_eq!(density_estimate(&b(1000), &b(1000)), 1.0);
        assert_eq!(density_estimate(&b(1), &b(1_000_000)), 0.0);
        assert_eq!(density_estimate(&b(0), &b(10)), f64::NEG_INFINITY);
        let huge = BigUint::from(3u32).pow(2000);
        assert!((density_estimate(&BigUint::from(3u32).pow(1000), &huge) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn count_sizes() {
        assert_eq!(uniform_count_size(100.0, 0.5), 10);
        assert_eq!(uniform_count_size(1e6, 0.0), 1);
        let mut rng = rng_for(1, &[]);
        assert_eq!(uniform_count_indices(100, 0.5, &mut rng).unwrap().len(), 10);
    }

    #[test]
    fn bernoulli_full_and_domain() {
        let mut rng = rng_for(2, &[]);
        assert_eq!(bernoulli_indices(50, 1.0, &mut rng).unwrap(), (0..50).collect::<Vec<_>>());
        assert!(matches!(bernoulli_indices(50, 0.0, &mut rng), Err(Error::Domain(_))));
        assert!(DensityModel::new(ModelKind::UniformCount, 0.0, 1).is_ok());
        assert!(DensityModel::new(ModelKind::UniformCount, 1.5, 1).is_err());
    }

    #[test]
    fn relator_file() {
        let r = parse_relators("# comment\nm 3\nabAB\nc\n").unwrap();
        assert_eq!(r.m(), 3);
        assert_eq!(r.len(), 2);
        assert!(parse_relators("aA\n").is_err());
    }
}
