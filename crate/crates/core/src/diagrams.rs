//! Van Kampen diagrams over a relator set: validation, boundary words,
//! reducibility, enumeration of small disk diagrams, isoperimetric ratios,
//! a bounded word-problem search and the bi-Lipschitz certificate.

use crate::density::RelatorSet;
use crate::error::{feasibility, Error, Result, ValidationKind};
use crate::planar::{twin, Diagram, PathJson};
use crate::stallings::LabeledGraph;
use crate::words::{letter_key, Letter, Word};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet, VecDeque};

pub use crate::planar::VanKampenDiagram;

pub const MAX_DIAGRAM_FACES: usize = 3;
pub const DEFAULT_SEARCH_LIMIT: f64 = 1e10;

/// Checks the complex and that every face spells its relator.
pub fn validate(d: &Diagram, rels: &RelatorSet) -> Result<()> {
    if d.is_abstract() && d.dart_count() > 0 {
        return Err(Error::Validation { kind: ValidationKind::FaceLabel, msg: "diagram has no edge labels".into() });
    }
    d.check_structure()?;
    for (i, f) in d.faces().iter().enumerate() {
        let r = rels.relators().get(f.relator).ok_or_else(|| Error::Validation {
            kind: ValidationKind::FaceLabel,
            msg: format!("face {i}: relator index {} out of range", f.relator),
        })?;
        let w = d.word_of(&f.boundary);
        if &w != r {
            return Err(Error::Validation {
                kind: ValidationKind::FaceLabel,
                msg: format!("face {i} reads {w} instead of relator {r}"),
            });
        }
    }
    Ok(())
}

/// Label of the outer walk as stored.
pub fn boundary_walk_word(d: &Diagram) -> Word {
    d.word_of(&d.outer_walk())
}

/// Outer walk label, least over rotations and inversion.
pub fn boundary_word(d: &Diagram) -> Word {
    boundary_walk_word(d).cyclic_canonical()
}

/// No two distinct faces with the same label whose positive boundaries
/// use the same dart at the same position.
pub fn is_reduced(d: &Diagram) -> bool {
    let mut seen: HashMap<usize, (usize, usize, usize)> = HashMap::new();
    for (fi, f) in d.faces().iter().enumerate() {
        for (j, &e) in f.boundary.iter().enumerate() {
            if let Some(&(g, rel, pos)) = seen.get(&e) {
                if g != fi && rel == f.relator && pos == j {
                    return false;
                }
            }
            seen.insert(e, (fi, f.relator, j));
        }
    }
    true
}

pub fn isoperimetric_ratio(d: &Diagram, ell: usize) -> f64 {
    d.boundary_length() as f64 / (ell as f64 * d.face_count() as f64)
}

#[derive(Clone, Copy, Debug)]
pub struct EnumOptions {
    /// Drop non-reduced diagrams as soon as they appear.
    pub prune: bool,
    pub limit: f64,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions { prune: true, limit: DEFAULT_SEARCH_LIMIT }
    }
}

/// Rough size of the gluing search: choices of (relator, sign, start) per
/// face and of (position, arc length) per gluing, with one letter of
/// agreement expected per gluing.
fn search_estimate(lengths: &[usize], m: usize, k: usize) -> f64 {
    let n: f64 = lengths.iter().map(|&l| 2.0 * l as f64).sum();
    let lmax = lengths.iter().copied().max().unwrap_or(0) as f64;
    (1..=k)
        .map(|j| n.powi(j as i32) * (j as f64 * lmax).powi(2 * (j as i32 - 1)) / (2.0 * m as f64).powi(j as i32 - 1))
        .sum()
}

/// Every reduced disk diagram over R with 1..=K faces, one per isomorphism
/// class (reflections identified). Diagrams are built face by face: each
/// new face meets the current disk in one boundary arc and is otherwise new.
pub fn enumerate_reduced_disk_diagrams(rels: &RelatorSet, k: usize) -> Result<Vec<Diagram>> {
    enumerate_disk_diagrams(rels, k, EnumOptions::default())
}

pub fn enumerate_disk_diagrams(rels: &RelatorSet, k: usize, opts: EnumOptions) -> Result<Vec<Diagram>> {
    if k > MAX_DIAGRAM_FACES {
        return Err(Error::Feasibility { what: "faces per diagram".into(), estimate: k as f64, limit: MAX_DIAGRAM_FACES as f64 });
    }
    let lengths: Vec<usize> = rels.relators().iter().map(Word::len).collect();
    feasibility("disk diagram search", search_estimate(&lengths, rels.m(), k), opts.limit)?;
    let mut out = Vec::new();
    if k == 0 || rels.is_empty() {
        return Ok(out);
    }
    let mut seen = HashSet::new();
    let mut level = Vec::new();
    for (i, r) in rels.relators().iter().enumerate() {
        let d = Diagram::polygon(r.len(), i, Some(r.letters()))?;
        if seen.insert(d.canonical_code()) {
            level.push(d);
        }
    }
    out.extend(level.iter().cloned());
    for _ in 1..k {
        let children: Vec<Vec<Diagram>> = level.par_iter().map(|d| glue_children(d, rels, opts.prune)).collect();
        let mut next = Vec::new();
        for c in children.into_iter().flatten() {
            if seen.insert(c.canonical_code()) {
                next.push(c);
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    Ok(out)
}

fn glue_children(d: &Diagram, rels: &RelatorSet, prune: bool) -> Vec<Diagram> {
    let walk = d.outer_walk();
    let b = walk.len();
    let labels: Vec<Letter> = walk.iter().map(|&e| d.label(e)).collect();
    let mut out = Vec::new();
    for a in 0..b {
        for (ri, r) in rels.relators().iter().enumerate() {
            let len = r.len();
            let rl = r.letters();
            for s in 1..b.min(len) {
                let arc = |i: usize| labels[(a + i) % b];
                for positive in [true, false] {
                    for st in 0..len {
                        let want = |c: usize| -> Letter {
                            if positive {
                                rl[(c + len - st % len) % len]
                            } else {
                                -rl[((2 * len) - 1 - c - st) % len]
                            }
                        };
                        if (0..s).any(|i| want(i) != arc(i)) {
                            continue;
                        }
                        let path: Vec<Letter> = (s..len).map(want).collect();
                        let Ok(child) = d.glue(a, s, len, ri, positive, st, &path) else { continue };
                        if prune && !is_reduced(&child) {
                            continue;
                        }
                        out.push(child);
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrivialityBudget {
    pub max_length: usize,
    pub max_steps: usize,
}

impl TrivialityBudget {
    /// max_length = 3ℓ, max_steps = 10^6.
    pub fn for_length(ell: usize) -> Self {
        TrivialityBudget { max_length: 3 * ell, max_steps: 1_000_000 }
    }
}

/// One rewrite: rotate the current word to start at `position`, match its
/// first `matched` letters against the rotation `rotation` of relator
/// `relator` (inverted if `inverted`), replace them by the inverse of the
/// unmatched remainder, then cyclically reduce.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteStep {
    pub position: usize,
    pub relator: usize,
    pub inverted: bool,
    pub rotation: usize,
    pub matched: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrivialityVerdict {
    Trivial { steps: Vec<RewriteStep> },
    Unknown { exhausted: bool, explored: usize },
}

impl TrivialityVerdict {
    pub fn is_trivial(&self) -> bool {
        matches!(self, TrivialityVerdict::Trivial { .. })
    }
}

fn relator_variant(rels: &RelatorSet, relator: usize, inverted: bool, rotation: usize) -> Option<Word> {
    let r = rels.relators().get(relator)?;
    let r = if inverted { r.inverse() } else { r.clone() };
    (rotation < r.len()).then(|| r.rotate(rotation))
}

pub fn apply_step(rels: &RelatorSet, w: &Word, step: &RewriteStep) -> Result<Word> {
    let bad = || Error::Domain(format!("rewrite {step:?} does not apply to {w}"));
    let rv = relator_variant(rels, step.relator, step.inverted, step.rotation).ok_or_else(bad)?;
    let n = w.len();
    if n == 0 || step.position >= n || step.matched == 0 || step.matched > n.min(rv.len()) {
        return Err(bad());
    }
    let c = w.rotate(step.position);
    if c.letters()[..step.matched] != rv.letters()[..step.matched] {
        return Err(bad());
    }
    let replacement = Word(rv.letters()[step.matched..].to_vec()).inverse();
    let rest = Word(c.letters()[step.matched..].to_vec());
    Ok(replacement.concat(&rest).cyclically_reduced())
}

/// Applies a witness and returns the final word.
pub fn replay(rels: &RelatorSet, w: &Word, steps: &[RewriteStep]) -> Result<Word> {
    let mut cur = w.clone();
    for s in steps {
        cur = apply_step(rels, &cur, s)?;
    }
    Ok(cur)
}

/// Breadth-first search over cyclic words by relator rewrites. Reports
/// triviality only with a replayable witness; never claims nontriviality.
pub fn bounded_triviality(rels: &RelatorSet, w: &Word, budget: TrivialityBudget) -> TrivialityVerdict {
    let start = w.cyclically_reduced();
    if start.is_empty() {
        return TrivialityVerdict::Trivial { steps: Vec::new() };
    }
    // rotations of r and r^-1 indexed by first letter
    let mut by_first: Vec<Vec<(usize, bool, usize, Word)>> = vec![Vec::new(); 2 * rels.m()];
    for (i, r) in rels.relators().iter().enumerate() {
        for inverted in [false, true] {
            let base = if inverted { r.inverse() } else { r.clone() };
            for k in 0..base.len() {
                let v = base.rotate(k);
                by_first[letter_key(v.letters()[0])].push((i, inverted, k, v));
            }
        }
    }
    struct Node {
        word: Word,
        parent: usize,
        step: Option<RewriteStep>,
    }
    let mut nodes = vec![Node { word: start.clone(), parent: usize::MAX, step: None }];
    let mut seen: HashSet<Word> = HashSet::from([start.cyclic_canonical()]);
    let mut queue = VecDeque::from([0usize]);
    let mut explored = 0;
    let witness = |nodes: &Vec<Node>, mut i: usize, last: RewriteStep| {
        let mut steps = vec![last];
        while let Some(s) = nodes[i].step {
            steps.push(s);
            i = nodes[i].parent;
        }
        steps.reverse();
        steps
    };
    while let Some(ni) = queue.pop_front() {
        if explored >= budget.max_steps {
            return TrivialityVerdict::Unknown { exhausted: true, explored };
        }
        explored += 1;
        let c = nodes[ni].word.clone();
        let n = c.len();
        let cl = c.letters();
        for p in 0..n {
            let Some(list) = by_first.get(letter_key(cl[p])) else { continue };
            for (ri, inverted, rot, v) in list {
                let vl = v.letters();
                let mut k = 0;
                while k < n.min(vl.len()) && cl[(p + k) % n] == vl[k] {
                    k += 1;
                    let step = RewriteStep { position: p, relator: *ri, inverted: *inverted, rotation: *rot, matched: k };
                    let mut nw: Vec<Letter> = vl[k..].iter().rev().map(|&x| -x).collect();
                    nw.extend((k..n).map(|t| cl[(p + t) % n]));
                    let nw = Word(nw).cyclically_reduced();
                    if nw.is_empty() {
                        return TrivialityVerdict::Trivial { steps: witness(&nodes, ni, step) };
                    }
                    if nw.len() > budget.max_length {
                        continue;
                    }
                    if seen.insert(nw.cyclic_canonical()) {
                        nodes.push(Node { word: nw, parent: ni, step: Some(step) });
                        queue.push_back(nodes.len() - 1);
                    }
                }
            }
        }
    }
    TrivialityVerdict::Unknown { exhausted: false, explored }
}

/// A van Kampen diagram with a subpath of its outer walk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistortionDiagram {
    pub diagram: Diagram,
    pub p: PathJson,
}

impl DistortionDiagram {
    pub fn path_darts(&self) -> Vec<usize> {
        let walk = self.diagram.outer_walk();
        (0..self.p.length).map(|i| walk[(self.p.start + i) % walk.len()]).collect()
    }

    pub fn validate(&self, rels: &RelatorSet, gamma: &LabeledGraph) -> Result<()> {
        validate(&self.diagram, rels)?;
        let b = self.diagram.boundary_length();
        if self.p.length > b || self.p.start >= b {
            return Err(Error::Domain("p does not lie on the boundary".into()));
        }
        let w = self.diagram.word_of(&self.path_darts());
        if !gamma.reads(&w) {
            return Err(Error::Domain(format!("label {w} of p is not readable on the graph")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilipschitzReport {
    pub diagrams_checked: usize,
    pub readable_paths: usize,
    pub max_ratio: f64,
    /// (diagram index, start, length) of a path attaining the maximum.
    pub worst: Option<(usize, usize, usize)>,
    pub threshold: f64,
    pub holds: bool,
}

/// Checks |p| ≤ λ/(1+λ)·|∂D| for every boundary subpath p readable on Γ,
/// over all reduced disk diagrams with at most K faces.
pub fn certify_bilipschitz(rels: &RelatorSet, gamma: &LabeledGraph, k: usize, lambda: f64) -> Result<BilipschitzReport> {
    if !gamma.is_reduced() {
        return Err(Error::Precondition("the graph must be reduced".into()));
    }
    let diagrams = enumerate_reduced_disk_diagrams(rels, k)?;
    certify_on(&diagrams, gamma, lambda)
}

pub fn certify_on(diagrams: &[Diagram], gamma: &LabeledGraph, lambda: f64) -> Result<BilipschitzReport> {
    let threshold = if lambda.is_infinite() { 1.0 } else { lambda / (1.0 + lambda) };
    let per: Vec<(usize, f64, Option<(usize, usize)>)> = diagrams
        .par_iter()
        .map(|d| {
            let walk = d.outer_walk();
            let b = walk.len();
            let (mut count, mut best, mut arg) = (0, 0.0f64, None);
            for s in 0..b {
                let mut states = vec![true; gamma.vertex_count()];
                for len in 1..=b {
                    let x = d.label(walk[(s + len - 1) % b]);
                    states = step(gamma, &states, x);
                    if !states.iter().any(|&v| v) {
                        break;
                    }
                    count += 1;
                    let ratio = len as f64 / b as f64;
                    if ratio > best {
                        best = ratio;
                        arg = Some((s, len));
                    }
                }
            }
            (count, best, arg)
        })
        .collect();
    let mut report = BilipschitzReport { diagrams_checked: diagrams.len(), readable_paths: 0, max_ratio: 0.0, worst: None, threshold, holds: true };
    for (i, (count, best, arg)) in per.into_iter().enumerate() {
        report.readable_paths += count;
        if best > report.max_ratio {
            report.max_ratio = best;
            report.worst = arg.map(|(s, l)| (i, s, l));
        }
    }
    report.holds = report.max_ratio <= threshold;
    Ok(report)
}

fn step(g: &LabeledGraph, from: &[bool], x: Letter) -> Vec<bool> {
    let mut out = vec![false; g.vertex_count()];
    for e in g.edges() {
        if e.label == x && from[e.src] {
            out[e.dst] = true;
        }
        if e.label == -x && from[e.dst] {
            out[e.src] = true;
        }
    }
    out
}

/// Darts of the outer walk that are twins of darts of face f.
pub fn shared_boundary(d: &Diagram, f: usize) -> usize {
    let cyc: HashSet<usize> = d.face_cycle(f).into_iter().collect();
    d.outer_walk().iter().filter(|&&e| cyc.contains(&twin(e))).count()
}
