//! Phase-transition harness: critical densities, collapse and triviality
//! probes, presentation rewriting, a bounded freeness probe, the
//! fillability bound and density sweeps.

use crate::abstract_diagrams::{fill, relator_lengths, AbstractDistortionDiagram};
use crate::density::{for_each_sampled_index, sample_relators, DensityModel, ModelKind, RelatorSet};
use crate::diagrams::{bounded_triviality, replay, RewriteStep, TrivialityBudget, TrivialityVerdict};
use crate::error::{Error, Result};
use crate::seed::{density_key, rng_for};
use crate::stallings::{wedge_of_words, LabeledGraph};
use crate::words::{count_b, count_reduced_exact, Alphabet, Letter, Word};
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::{BTreeMap, HashSet};
use std::fmt;

fn check_range(m: usize, r: usize) -> Result<()> {
    if m < 2 || r == 0 || r >= m {
        return Err(Error::Domain(format!("need m >= 2 and 1 <= r <= m-1, got m = {m}, r = {r}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalDensity {
    pub d_r: f64,
    pub c_r: f64,
}

/// c_r = log_{2m-1}(2r-1) and d_r = min(1/2, 1 - c_r).
pub fn critical_density(m: usize, r: usize) -> Result<CriticalDensity> {
    check_range(m, r)?;
    let c_r = ((2 * r - 1) as f64).ln() / ((2 * m - 1) as f64).ln();
    Ok(CriticalDensity { d_r: (1.0 - c_r).min(0.5), c_r })
}

/// (d_r - d) / 5, defined below d_r.
pub fn epsilon_d(m: usize, r: usize, d: f64) -> Result<f64> {
    let cd = critical_density(m, r)?;
    if !(d < cd.d_r) {
        return Err(Error::Domain(format!("density {d} is not below d_r = {:.6}", cd.d_r)));
    }
    Ok((cd.d_r - d) / 5.0)
}

/// How a relator may witness x_i = w with w over the kept generators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapseMatch {
    /// x_i^{±1} is the first or the last letter and every other letter is
    /// a kept generator.
    #[default]
    Leading,
    /// Any rotation: exactly one letter of x_i, the rest kept generators.
    Cyclic,
}

impl std::str::FromStr for CollapseMatch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leading" => Ok(CollapseMatch::Leading),
            "cyclic" => Ok(CollapseMatch::Cyclic),
            _ => Err(Error::Domain(format!("unknown collapse match {s:?} (leading or cyclic)"))),
        }
    }
}

/// x_i ↦ w found in relator `relator`: rotating it by `rotation` gives
/// x_i^{exponent} followed by a word over the kept generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Substitution {
    pub generator: usize,
    pub word: Word,
    pub relator: usize,
    pub rotation: usize,
    pub exponent: i8,
}

impl Substitution {
    /// Checks the witness against R.
    pub fn replays(&self, rels: &RelatorSet, kept: &[usize]) -> bool {
        let Some(r) = rels.relators().get(self.relator) else { return false };
        if self.rotation >= r.len() {
            return false;
        }
        let v = r.rotate(self.rotation);
        let (head, rest) = (v.letters()[0], Word(v.letters()[1..].to_vec()));
        head == self.exponent * self.generator as Letter
            && rest.letters().iter().all(|x| kept.contains(&(x.unsigned_abs() as usize)))
            && substitution_word(&rest, self.exponent) == self.word
    }
}

/// x^e · rest = 1 gives x = (rest^{-1})^e.
fn substitution_word(rest: &Word, e: i8) -> Word {
    if e > 0 {
        rest.inverse()
    } else {
        rest.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CollapseResult {
    pub kept: Vec<usize>,
    /// One entry per generator outside `kept`, in increasing order.
    pub substitutions: Vec<(usize, Option<Substitution>)>,
}

impl CollapseResult {
    pub fn complete(&self) -> bool {
        self.substitutions.iter().all(|(_, s)| s.is_some())
    }

    pub fn map(&self) -> BTreeMap<usize, Word> {
        self.substitutions.iter().filter_map(|(i, s)| s.as_ref().map(|s| (*i, s.word.clone()))).collect()
    }
}

/// The kept generator set: the first r, or the given list.
pub fn kept_generators(m: usize, r: usize, generators: Option<&[usize]>) -> Result<Vec<usize>> {
    check_range(m, r)?;
    let kept: Vec<usize> = match generators {
        None => (1..=r).collect(),
        Some(g) => {
            let mut g = g.to_vec();
            g.sort_unstable();
            g.dedup();
            if g.len() != r || g.iter().any(|&x| x == 0 || x > m) {
                return Err(Error::Domain(format!("generator choice must be {r} distinct indices in 1..={m}")));
            }
            g
        }
    };
    Ok(kept)
}

/// A witness for some generator outside `kept` inside one relator.
fn match_relator(w: &Word, kept: &[usize], mode: CollapseMatch) -> Option<(usize, usize, i8, Word)> {
    let l = w.letters();
    let n = l.len();
    let outside: Vec<usize> = (0..n).filter(|&k| !kept.contains(&(l[k].unsigned_abs() as usize))).collect();
    if outside.len() != 1 {
        return None;
    }
    let k = outside[0];
    let x = l[k];
    let rotation = match mode {
        CollapseMatch::Cyclic => k,
        CollapseMatch::Leading if k == 0 => 0,
        CollapseMatch::Leading if k == n - 1 => k,
        CollapseMatch::Leading => return None,
    };
    let v = w.rotate(rotation);
    let rest = Word(v.letters()[1..].to_vec());
    let e = x.signum();
    Some((x.unsigned_abs() as usize, rotation, e, substitution_word(&rest, e)))
}

pub fn collapse_probe(rels: &RelatorSet, r: usize) -> Result<CollapseResult> {
    collapse_probe_with(rels, r, None, CollapseMatch::default())
}

/// Scans R in order and keeps the first witness per generator.
pub fn collapse_probe_with(rels: &RelatorSet, r: usize, generators: Option<&[usize]>, mode: CollapseMatch) -> Result<CollapseResult> {
    let m = rels.m();
    let kept = kept_generators(m, r, generators)?;
    let mut found: BTreeMap<usize, Substitution> = BTreeMap::new();
    for (ri, w) in rels.relators().iter().enumerate() {
        if let Some((g, rotation, exponent, word)) = match_relator(w, &kept, mode) {
            found.entry(g).or_insert(Substitution { generator: g, word, relator: ri, rotation, exponent });
        }
    }
    let substitutions = (1..=m).filter(|i| !kept.contains(i)).map(|i| (i, found.remove(&i))).collect();
    Ok(CollapseResult { kept, substitutions })
}

/// Generator witnessed by `l`, if any. Same test as `match_relator`
/// without building the substitution.
fn witness_generator(l: &[Letter], kept: &[bool], mode: CollapseMatch) -> Option<usize> {
    let mut at = None;
    for (k, &x) in l.iter().enumerate() {
        if !kept[x.unsigned_abs() as usize] {
            if at.is_some() {
                return None;
            }
            at = Some(k);
        }
    }
    let k = at?;
    match mode {
        CollapseMatch::Leading if k != 0 && k != l.len() - 1 => None,
        _ => Some(l[k].unsigned_abs() as usize),
    }
}

/// Whether a sampled R collapses, without building the relator set.
/// Once every generator has a witness the remaining ranks are only counted.
pub fn collapse_trial(m: usize, r: usize, ell: usize, model: &DensityModel, mode: CollapseMatch, path: &[u64]) -> Result<(bool, usize)> {
    let kept = kept_generators(m, r, None)?;
    let mut is_kept = vec![false; m + 1];
    for &g in &kept {
        is_kept[g] = true;
    }
    let mut rng = rng_for(model.seed, path);
    let mut hit = is_kept.clone();
    hit[0] = true;
    let mut missing = m - kept.len();
    let mut size = 0;
    let mut buf = Vec::with_capacity(ell);
    for_each_sampled_index(m, ell, model, &mut rng, |counts, i| {
        size += 1;
        if missing == 0 {
            return;
        }
        counts.unrank_into(i, &mut buf);
        if let Some(g) = witness_generator(&buf, &is_kept, mode) {
            if !hit[g] {
                hit[g] = true;
                missing -= 1;
            }
        }
    })?;
    Ok((missing == 0, size))
}

/// |A| for one generator: relators x^{±1}·w or w·x^{±1}, w reduced over r
/// letters (Leading), or rotations of x^{±1}·w with x^{±1}·w cyclically
/// reduced (Cyclic), of total length at most ℓ.
pub fn witness_count(r: usize, ell: usize, mode: CollapseMatch) -> f64 {
    let mut total = 0.0;
    for len in 1..=ell {
        let rest = if len == 1 { 1.0 } else { count_reduced_exact(r, len - 1).to_f64().unwrap_or(f64::INFINITY) };
        total += match (mode, len) {
            (_, 1) => 2.0,
            (CollapseMatch::Leading, _) => 4.0 * rest,
            (CollapseMatch::Cyclic, _) => 2.0 * len as f64 * rest,
        };
    }
    total
}

/// Probability that a Bernoulli R contains a witness for every generator
/// beyond the first r: (1 - (1-p)^{|A|})^{m-r} with p = |B_ℓ|^{d-1}.
pub fn collapse_probability(m: usize, r: usize, ell: usize, d: f64, mode: CollapseMatch) -> Result<f64> {
    check_range(m, r)?;
    let b = count_b(m, ell).to_f64().unwrap_or(f64::INFINITY);
    let p = ((d - 1.0) * b.ln()).exp();
    let a = witness_count(r, ell, mode);
    let one = -(a * (-p).ln_1p()).exp_m1();
    Ok(one.powi((m - r) as i32))
}

/// Expected |R ∩ A| = |B_ℓ|^d |A| / |B_ℓ| for one generator.
pub fn expected_witnesses(m: usize, r: usize, ell: usize, d: f64, mode: CollapseMatch) -> Result<f64> {
    check_range(m, r)?;
    let b = count_b(m, ell).to_f64().unwrap_or(f64::INFINITY);
    Ok(witness_count(r, ell, mode) * ((d - 1.0) * b.ln()).exp())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrivialityWitness {
    pub generator: usize,
    /// w with w in R up to rotation and inversion.
    pub w: Word,
    /// A rotation of a relator that reads x_i^{±1} w.
    pub xw: Word,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrivialityEvidence {
    pub per_generator: Vec<Option<TrivialityWitness>>,
}

impl TrivialityEvidence {
    pub fn all_trivial(&self) -> bool {
        !self.per_generator.is_empty() && self.per_generator.iter().all(Option::is_some)
    }

    pub fn any(&self) -> bool {
        self.per_generator.iter().any(Option::is_some)
    }
}

/// For each generator, looks for relators u, v with a rotation of v equal
/// to x^{±1} followed by a rotation of u or of u^{-1}; then x = 1 in G.
pub fn triviality_probe(rels: &RelatorSet) -> TrivialityEvidence {
    let m = rels.m();
    let mut cyclic: HashSet<&[Letter]> = HashSet::new();
    let mut store = Vec::new();
    for r in rels.relators() {
        for base in [r.clone(), r.inverse()] {
            for k in 0..base.len() {
                store.push(base.rotate(k));
            }
        }
    }
    cyclic.extend(store.iter().map(|w| w.letters()));
    let mut per_generator: Vec<Option<TrivialityWitness>> = vec![None; m];
    for v in rels.relators() {
        let n = v.len();
        if n < 2 {
            continue;
        }
        for k in 0..n {
            let g = v.letters()[k].unsigned_abs() as usize;
            if per_generator[g - 1].is_some() {
                continue;
            }
            let rot = v.rotate(k);
            if cyclic.contains(&rot.letters()[1..]) {
                per_generator[g - 1] =
                    Some(TrivialityWitness { generator: g, w: Word(rot.letters()[1..].to_vec()), xw: rot });
            }
        }
    }
    TrivialityEvidence { per_generator }
}

/// A presentation over X_r after substituting x_i ↦ w_i for i > r.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rewritten {
    pub r: usize,
    /// Nonempty rewritten relators, cyclically reduced, in input order.
    pub relators: Vec<Word>,
    /// Input indices whose image reduced to the empty word.
    pub dropped: Vec<usize>,
    pub max_len: usize,
}

impl Rewritten {
    pub fn to_relator_set(&self) -> Result<RelatorSet> {
        RelatorSet::explicit(self.r.max(2), self.relators.clone())
    }
}

pub fn rewrite_presentation(rels: &RelatorSet, subs: &BTreeMap<usize, Word>, r: usize) -> Result<Rewritten> {
    let m = rels.m();
    check_range(m, r)?;
    let ell = rels.max_len();
    for i in r + 1..=m {
        let w = subs.get(&i).ok_or_else(|| Error::Domain(format!("substitution for x{i} is missing")))?;
        if w.letters().iter().any(|x| x.unsigned_abs() as usize > r) {
            return Err(Error::Precondition(format!("substitution for x{i} leaves the first {r} generators")));
        }
        if w.len() + 1 > ell.max(1) {
            return Err(Error::Precondition(format!("substitution for x{i} is longer than l - 1 = {}", ell.saturating_sub(1))));
        }
    }
    let mut relators = Vec::new();
    let mut dropped = Vec::new();
    for (idx, w) in rels.relators().iter().enumerate() {
        let mut out = Vec::new();
        for &x in w.letters() {
            let g = x.unsigned_abs() as usize;
            if g <= r {
                out.push(x);
            } else if x > 0 {
                out.extend_from_slice(subs[&g].letters());
            } else {
                out.extend_from_slice(subs[&g].inverse().letters());
            }
        }
        let red = Word(out).cyclically_reduced();
        if red.is_empty() {
            dropped.push(idx);
        } else {
            relators.push(red);
        }
    }
    let max_len = relators.iter().map(Word::len).max().unwrap_or(0);
    Ok(Rewritten { r, relators, dropped, max_len })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreenessBudget {
    pub max_word_len: usize,
    pub triviality: TrivialityBudget,
}

impl Default for FreenessBudget {
    fn default() -> Self {
        FreenessBudget { max_word_len: 8, triviality: TrivialityBudget { max_length: 24, max_steps: 2000 } }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum FreenessVerdict {
    NoCollapseFound { words_checked: usize, exhausted_words: usize },
    Collapse { word: Word, steps: Vec<RewriteStep> },
}

impl FreenessVerdict {
    pub fn is_free(&self) -> bool {
        matches!(self, FreenessVerdict::NoCollapseFound { .. })
    }
}

/// Cyclically reduced labels of closed reduced paths in Γ, up to rotation
/// and inversion, of length 1..=max_len, shortlex by representative.
pub fn loop_words(gamma: &LabeledGraph, max_len: usize) -> Vec<Word> {
    let darts = gamma.darts();
    let mut out: HashSet<Word> = HashSet::new();
    let mut stack: Vec<usize> = Vec::new();
    fn go(
        gamma: &LabeledGraph,
        darts: &[crate::stallings::Dart],
        stack: &mut Vec<usize>,
        max_len: usize,
        out: &mut HashSet<Word>,
    ) {
        let first = &darts[stack[0]];
        let last = &darts[*stack.last().unwrap()];
        if last.dst == first.src {
            let w = Word(stack.iter().map(|&d| darts[d].label).collect());
            if w.is_cyclically_reduced() {
                out.insert(w.cyclic_canonical());
            }
        }
        if stack.len() == max_len {
            return;
        }
        for (i, d) in darts.iter().enumerate() {
            if d.src == last.dst && !(d.edge == last.edge && d.forward != last.forward) {
                stack.push(i);
                go(gamma, darts, stack, max_len, out);
                stack.pop();
            }
        }
    }
    if max_len > 0 {
        for i in 0..darts.len() {
            stack.push(i);
            go(gamma, &darts, &mut stack, max_len, &mut out);
            stack.pop();
        }
    }
    let mut v: Vec<Word> = out.into_iter().collect();
    v.sort_by(crate::words::shortlex_cmp);
    v
}

/// Runs the bounded word-problem search on every loop word of Γ up to the
/// budget length. A collapse always carries a witness that replays to the
/// empty word; "no collapse found" proves nothing.
pub fn freeness_probe(rels: &RelatorSet, gamma: &LabeledGraph, budget: FreenessBudget) -> Result<FreenessVerdict> {
    if !gamma.is_reduced() {
        return Err(Error::Precondition("freeness probe needs a reduced graph".into()));
    }
    let words = loop_words(gamma, budget.max_word_len);
    let mut exhausted = 0;
    for w in &words {
        match bounded_triviality(rels, w, budget.triviality) {
            TrivialityVerdict::Trivial { steps } => {
                if !replay(rels, w, &steps)?.is_empty() {
                    return Err(Error::Invariant(format!("triviality witness for {w} does not replay")));
                }
                return Ok(FreenessVerdict::Collapse { word: w.clone(), steps });
            }
            TrivialityVerdict::Unknown { exhausted: true, .. } => exhausted += 1,
            TrivialityVerdict::Unknown { .. } => {}
        }
    }
    Ok(FreenessVerdict::NoCollapseFound { words_checked: words.len(), exhausted_words: exhausted })
}

/// ln of ℓ^{10K³} (2m-1)^{-2 ε_d ℓ}.
pub fn fillability_bound(k: usize, ell: usize, m: usize, r: usize, d: f64) -> Result<f64> {
    let eps = epsilon_d(m, r, d)?;
    Ok(10.0 * (k as f64).powi(3) * (ell as f64).ln() - 2.0 * eps * ell as f64 * ((2 * m - 1) as f64).ln())
}

/// Least ℓ past the maximum of the bound at which it falls below 1; the
/// bound decreases from there on.
pub fn fillability_crossover(k: usize, m: usize, r: usize, d: f64) -> Result<usize> {
    let eps = epsilon_d(m, r, d)?;
    let a = 10.0 * (k as f64).powi(3);
    let b = 2.0 * eps * ((2 * m - 1) as f64).ln();
    let peak = (a / b).ceil().max(1.0) as usize;
    let f = |l: usize| fillability_bound(k, l, m, r, d);
    if f(peak)? < 0.0 {
        return Ok(peak);
    }
    let mut hi = peak.max(2);
    while f(hi)? >= 0.0 {
        hi = hi.checked_mul(2).ok_or_else(|| Error::Domain("crossover beyond usize".into()))?;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if f(mid)? < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Whether some tuple of distinct relators of R fills (D, p) with the label
/// of p readable on Γ.
pub fn fillable_by(add: &AbstractDistortionDiagram, rels: &RelatorSet, gamma: &LabeledGraph) -> Result<bool> {
    let lengths = relator_lengths(&add.base)?;
    let pools: Vec<Vec<&Word>> = lengths.iter().map(|&l| rels.relators().iter().filter(|w| w.len() == l).collect()).collect();
    let pdarts = add.path_darts();
    let mut pick = vec![0usize; lengths.len()];
    fn rec(
        add: &AbstractDistortionDiagram,
        pools: &[Vec<&Word>],
        pick: &mut Vec<usize>,
        i: usize,
        pdarts: &[usize],
        gamma: &LabeledGraph,
    ) -> bool {
        if i == pools.len() {
            let words: Vec<Word> = pick.iter().zip(pools).map(|(&j, p)| p[j].clone()).collect();
            if (0..words.len()).any(|a| (a + 1..words.len()).any(|b| words[a] == words[b])) {
                return false;
            }
            return match fill(&add.base, &words) {
                Ok(d) => gamma.reads(&d.word_of(pdarts)),
                Err(_) => false,
            };
        }
        for j in 0..pools[i].len() {
            pick[i] = j;
            if rec(add, pools, pick, i + 1, pdarts, gamma) {
                return true;
            }
        }
        false
    }
    Ok(rec(add, &pools, &mut pick, 0, &pdarts, gamma))
}

/// Fraction of Bernoulli presentations at (m, ℓ, d) that fill (D, p).
pub fn fillability_frequency(
    add: &AbstractDistortionDiagram,
    gamma: &LabeledGraph,
    m: usize,
    ell: usize,
    d: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let model = DensityModel::new(ModelKind::Bernoulli, d, seed)?;
            let mut rng = rng_for(seed, &[ell as u64, density_key(d), t as u64]);
            let rels = sample_relators(m, ell, &model, &mut rng)?;
            fillable_by(add, &rels, gamma)
        })
        .collect::<Result<_>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / trials.max(1) as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionConfig {
    pub m: usize,
    pub r: usize,
    pub ells: Vec<usize>,
    pub densities: Vec<f64>,
    pub trials: usize,
    pub model: ModelKind,
    pub seed: u64,
    pub collapse_match: CollapseMatch,
    /// Kept generators, 1-based; the first r when absent.
    pub generators: Option<Vec<usize>>,
    /// Loop-word length for the freeness probe; 0 skips it.
    pub freeness_word_len: usize,
    pub triviality_steps: usize,
}

/// Every problem found in a config, not just the first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config: {}", self.0.join("; "))
    }
}

impl std::error::Error for ConfigErrors {}

impl From<ConfigErrors> for Error {
    fn from(e: ConfigErrors) -> Self {
        Error::Domain(e.0.join("; "))
    }
}

const CONFIG_KEYS: [&str; 11] = [
    "m",
    "r",
    "ells",
    "densities",
    "trials",
    "model",
    "seed",
    "collapse_match",
    "generators",
    "freeness_word_len",
    "triviality_steps",
];

pub fn validate_config(text: &str) -> std::result::Result<TransitionConfig, ConfigErrors> {
    let v: Value = serde_json::from_str(text).map_err(|e| ConfigErrors(vec![format!("not JSON: {e}")]))?;
    let Some(obj) = v.as_object() else { return Err(ConfigErrors(vec!["config must be a JSON object".into()])) };
    let mut errs = Vec::new();
    for k in obj.keys() {
        if !CONFIG_KEYS.contains(&k.as_str()) {
            errs.push(format!("unknown field {k:?}"));
        }
    }
    let uint = |key: &str, default: Option<u64>, errs: &mut Vec<String>| -> Option<u64> {
        match obj.get(key) {
            None => {
                if default.is_none() {
                    errs.push(format!("{key} is required"));
                }
                default
            }
            Some(x) => x.as_u64().or_else(|| {
                errs.push(format!("{key} must be a nonnegative integer"));
                None
            }),
        }
    };
    let m = uint("m", None, &mut errs);
    let r = uint("r", None, &mut errs);
    let trials = uint("trials", Some(100), &mut errs);
    let seed = uint("seed", Some(0), &mut errs);
    let freeness_word_len = uint("freeness_word_len", Some(0), &mut errs);
    let triviality_steps = uint("triviality_steps", Some(2000), &mut errs);
    if let (Some(m), Some(r)) = (m, r) {
        if m < 2 || m > 26 {
            errs.push(format!("m = {m} must lie in 2..=26"));
        }
        if r < 1 || r + 1 > m {
            errs.push(format!("r = {r} is outside the range 1 <= r <= m-1"));
        }
    }
    if trials == Some(0) {
        errs.push("trials must be at least 1".into());
    }
    let ells: Vec<usize> = match obj.get("ells") {
        None => vec![12],
        Some(Value::Array(a)) => a
            .iter()
            .filter_map(|x| match x.as_u64() {
                Some(l) if l >= 1 => Some(l as usize),
                _ => {
                    errs.push(format!("ells entry {x} must be a positive integer"));
                    None
                }
            })
            .collect(),
        Some(_) => {
            errs.push("ells must be an array".into());
            Vec::new()
        }
    };
    let densities: Vec<f64> = match obj.get("densities") {
        None => vec![0.15, 0.3, 0.45],
        Some(Value::Array(a)) => a
            .iter()
            .filter_map(|x| match x.as_f64() {
                Some(d) if (0.0..=1.0).contains(&d) => Some(d),
                _ => {
                    errs.push(format!("density {x} must lie in [0, 1]"));
                    None
                }
            })
            .collect(),
        Some(_) => {
            errs.push("densities must be an array".into());
            Vec::new()
        }
    };
    let model = match obj.get("model") {
        None => Some(ModelKind::Bernoulli),
        Some(x) => serde_json::from_value::<ModelKind>(x.clone()).map_err(|e| errs.push(format!("model: {e}"))).ok(),
    };
    if model == Some(ModelKind::Bernoulli) && densities.contains(&0.0) {
        errs.push("the Bernoulli model needs densities above 0".into());
    }
    let collapse_match = match obj.get("collapse_match") {
        None => Some(CollapseMatch::Leading),
        Some(x) => serde_json::from_value::<CollapseMatch>(x.clone()).map_err(|e| errs.push(format!("collapse_match: {e}"))).ok(),
    };
    let generators = match obj.get("generators") {
        None | Some(Value::Null) => None,
        Some(x) => match serde_json::from_value::<Vec<usize>>(x.clone()) {
            Ok(g) => {
                if let (Some(m), Some(r)) = (m, r) {
                    if r >= 1 && r < m {
                        if let Err(e) = kept_generators(m as usize, r as usize, Some(&g)) {
                            errs.push(format!("generators: {e}"));
                        }
                    }
                }
                Some(g)
            }
            Err(e) => {
                errs.push(format!("generators: {e}"));
                None
            }
        },
    };
    if !errs.is_empty() {
        return Err(ConfigErrors(errs));
    }
    Ok(TransitionConfig {
        m: m.unwrap() as usize,
        r: r.unwrap() as usize,
        ells,
        densities,
        trials: trials.unwrap() as usize,
        model: model.unwrap(),
        seed: seed.unwrap(),
        collapse_match: collapse_match.unwrap(),
        generators,
        freeness_word_len: freeness_word_len.unwrap() as usize,
        triviality_steps: triviality_steps.unwrap() as usize,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub m: usize,
    pub r: usize,
    pub ell: usize,
    pub d: f64,
    pub trials: usize,
    pub collapse_freq: f64,
    pub trivial_freq: f64,
    /// None when the freeness probe is off.
    pub free_freq: Option<f64>,
    pub mean_relator_count: f64,
    pub seed: u64,
    /// Trials where some freeness search ran out of budget.
    pub exhausted: usize,
}

struct TrialOutcome {
    collapse: bool,
    trivial: bool,
    free: bool,
    size: usize,
    exhausted: bool,
}

fn run_trial(cfg: &TransitionConfig, gamma: &LabeledGraph, ell: usize, d: f64, t: usize) -> Result<TrialOutcome> {
    let model = DensityModel::new(cfg.model, d, cfg.seed)?;
    let mut rng = rng_for(cfg.seed, &[ell as u64, density_key(d), t as u64]);
    let rels = sample_relators(cfg.m, ell, &model, &mut rng)?;
    let collapse = collapse_probe_with(&rels, cfg.r, cfg.generators.as_deref(), cfg.collapse_match)?.complete();
    let trivial = triviality_probe(&rels).all_trivial();
    let (free, exhausted) = if cfg.freeness_word_len == 0 {
        (false, false)
    } else {
        let budget = FreenessBudget {
            max_word_len: cfg.freeness_word_len,
            triviality: TrivialityBudget { max_length: 3 * ell, max_steps: cfg.triviality_steps },
        };
        match freeness_probe(&rels, gamma, budget)? {
            FreenessVerdict::NoCollapseFound { exhausted_words, .. } => (true, exhausted_words > 0),
            FreenessVerdict::Collapse { .. } => (false, false),
        }
    };
    Ok(TrialOutcome { collapse, trivial, free, size: rels.len(), exhausted })
}

/// Rows in grid order (ℓ outer, d inner). Every trial draws from
/// (seed, ℓ, d, trial), so the table does not depend on scheduling.
/// free_freq is left empty when the freeness probe is off.
pub fn transition_sweep(cfg: &TransitionConfig) -> Result<Vec<SweepRow>> {
    let kept = kept_generators(cfg.m, cfg.r, cfg.generators.as_deref())?;
    Alphabet::new(cfg.m)?;
    let gamma = wedge_of_words(&kept.iter().map(|&g| Word(vec![g as Letter])).collect::<Vec<_>>())?;
    let cells: Vec<(usize, f64)> = cfg.ells.iter().flat_map(|&l| cfg.densities.iter().map(move |&d| (l, d))).collect();
    cells
        .par_iter()
        .map(|&(ell, d)| {
            let outs: Vec<TrialOutcome> =
                (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, &gamma, ell, d, t)).collect::<Result<_>>()?;
            let n = cfg.trials as f64;
            let freq = |f: &dyn Fn(&TrialOutcome) -> bool| outs.iter().filter(|o| f(o)).count() as f64 / n;
            Ok(SweepRow {
                m: cfg.m,
                r: cfg.r,
                ell,
                d,
                trials: cfg.trials,
                collapse_freq: freq(&|o| o.collapse),
                trivial_freq: freq(&|o| o.trivial),
                free_freq: (cfg.freeness_word_len > 0).then(|| freq(&|o| o.free)),
                mean_relator_count: outs.iter().map(|o| o.size as f64).sum::<f64>() / n,
                seed: cfg.seed,
                exhausted: outs.iter().filter(|o| o.exhausted).count(),
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("m,r,ell,d,trials,collapse_freq,trivial_freq,free_freq,mean_relator_count,seed,exhausted\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{:.6},{:.6},{},{:.3},{},{}\n",
            r.m,
            r.r,
            r.ell,
            r.d,
            r.trials,
            r.collapse_freq,
            r.trivial_freq,
            r.free_freq.map(|f| format!("{f:.6}")).unwrap_or_default(),
            r.mean_relator_count,
            r.seed,
            r.exhausted
        ));
    }
    s
}

/// Fraction of trials in which the collapse probe succeeds, sampling each
/// presentation from (seed, ℓ, d, trial) exactly as the sweep does.
pub fn collapse_frequency(m: usize, r: usize, ell: usize, d: f64, trials: usize, seed: u64, mode: CollapseMatch) -> Result<f64> {
    let model = DensityModel::new(ModelKind::Bernoulli, d, seed)?;
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| collapse_trial(m, r, ell, &model, mode, &[ell as u64, density_key(d), t as u64]).map(|x| x.0))
        .collect::<Result<_>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / trials.max(1) as f64)
}

/// Fraction of trials where every generator has triviality evidence.
pub fn triviality_frequency(m: usize, ell: usize, d: f64, trials: usize, seed: u64) -> Result<f64> {
    let model = DensityModel::new(ModelKind::Bernoulli, d, seed)?;
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(seed, &[ell as u64, density_key(d), t as u64]);
            sample_relators(m, ell, &model, &mut rng).map(|rels| triviality_probe(&rels).all_trivial())
        })
        .collect::<Result<_>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / trials.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::parse_word;

    fn rs(m: usize, ws: &[&str]) -> RelatorSet {
        RelatorSet::explicit(m, ws.iter().map(|w| parse_word(w).unwrap()).collect()).unwrap()
    }

    #[test]
    fn critical_values() {
        assert_eq!(critical_density(7, 1).unwrap().d_r, 0.5);
        let c = critical_density(3, 2).unwrap();
        assert!((c.d_r - (1.0 - 3f64.ln() / 5f64.ln())).abs() < 1e-12);
        assert!((epsilon_d(3, 2, 0.1).unwrap() - 0.043478).abs() < 1e-5);
        assert!(epsilon_d(3, 2, 0.4).is_err());
        assert!(critical_density(3, 3).is_err());
    }

    #[test]
    fn collapse_examples() {
        let res = collapse_probe(&rs(3, &["cab"]), 2).unwrap();
        assert_eq!(res.map()[&3], parse_word("BA").unwrap());
        let res = collapse_probe(&rs(2, &["baa"]), 1).unwrap();
        assert_eq!(res.map()[&2], parse_word("AA").unwrap());
        for (_, s) in &res.substitutions {
            assert!(s.as_ref().unwrap().replays(&rs(2, &["baa"]), &[1]));
        }
        assert!(!collapse_probe(&rs(3, &["acb"]), 2).unwrap().complete());
        assert!(collapse_probe_with(&rs(3, &["acb"]), 2, None, CollapseMatch::Cyclic).unwrap().complete());
    }

    #[test]
    fn rewrite_drops_witness() {
        let r = rs(3, &["cab"]);
        let subs = collapse_probe(&r, 2).unwrap().map();
        let out = rewrite_presentation(&r, &subs, 2).unwrap();
        assert!(out.relators.is_empty());
        assert_eq!(out.dropped, vec![0]);
        assert!(rewrite_presentation(&r, &BTreeMap::new(), 2).is_err());
    }

    #[test]
    fn planted_pair_and_torsion() {
        let ev = triviality_probe(&rs(2, &["abAB", "aabAB"]));
        assert!(ev.per_generator[0].is_some());
        assert!(!triviality_probe(&rs(2, &[])).any());
        let loop_a = wedge_of_words(&[parse_word("a").unwrap()]).unwrap();
        let v = freeness_probe(&rs(2, &["aaaa"]), &loop_a, FreenessBudget::default()).unwrap();
        assert!(matches!(v, FreenessVerdict::Collapse { ref word, .. } if *word == parse_word("aaaa").unwrap()));
        assert!(freeness_probe(&rs(2, &[]), &loop_a, FreenessBudget::default()).unwrap().is_free());
    }

    #[test]
    fn config_errors_are_collected() {
        let e = validate_config(r#"{"m": 2, "r": 2, "densities": [1.5], "trials": 0}"#).unwrap_err();
        assert_eq!(e.0.len(), 3, "{e}");
        let c = validate_config(r#"{"m": 3, "r": 2}"#).unwrap();
        assert_eq!(c.trials, 100);
        assert_eq!(c.model, ModelKind::Bernoulli);
    }

    #[test]
    fn crossover_is_where_bound_drops() {
        let l = fillability_crossover(2, 3, 2, 0.1).unwrap();
        assert!(fillability_bound(2, l, 3, 2, 0.1).unwrap() < 0.0);
        assert!(fillability_bound(2, l - 1, 3, 2, 0.1).unwrap() >= 0.0);
        assert!(fillability_bound(2, 20, 3, 2, 0.1).unwrap() > 0.0);
    }
}
