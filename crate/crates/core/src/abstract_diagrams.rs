//! Abstract diagrams: planar complexes whose faces carry abstract relator
//! indices instead of words. Decorations, preferred faces, letter classes,
//! elementary segments, fillings and the bound on their number.
//!
//! Abstract relators are 0-based in `Face::relator` and 1-based in
//! [`AbstractLetter`], so relator `i` of a face shows up as `i + 1` in
//! letters and reports.

use crate::diagrams::is_reduced;
use crate::error::{feasibility, Error, Result};
use crate::planar::{parse_diagram_json, twin, Diagram, DiagramJson, PathJson};
use crate::stallings::LabeledGraph;
use crate::words::{Alphabet, Letter, Word};
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

pub const MAX_ABSTRACT_FACES: usize = 2;
pub const MAX_ABSTRACT_LENGTH: usize = 6;
/// Cap on the number of letter assignments a filling search may visit.
pub const DEFAULT_FILLING_LIMIT: f64 = 1e9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct AbstractLetter {
    pub relator: usize,
    pub position: usize,
}

impl fmt::Display for AbstractLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.relator, self.position)
    }
}

/// One decoration of an undirected edge: the letter, whether it runs along
/// the edge's even dart, and the face it comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Decoration {
    pub letter: AbstractLetter,
    pub forward: bool,
    pub face: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decorations {
    /// Indexed by edge id (dart / 2).
    pub per_edge: Vec<Vec<Decoration>>,
}

impl Decorations {
    pub fn total(&self) -> usize {
        self.per_edge.iter().map(Vec::len).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LetterClass {
    FreeToFill,
    SemiFreeToFill,
    NotFreeToFill,
}

impl fmt::Display for LetterClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LetterClass::FreeToFill => "free",
            LetterClass::SemiFreeToFill => "semi-free",
            LetterClass::NotFreeToFill => "not-free",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RelatorCounts {
    pub length: usize,
    pub alpha: usize,
    pub eta: usize,
    pub eta_prime: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LetterClassification {
    pub classes: Vec<(AbstractLetter, LetterClass)>,
    pub relators: Vec<RelatorCounts>,
}

impl LetterClassification {
    pub fn class_of(&self, x: AbstractLetter) -> Option<LetterClass> {
        self.classes.iter().find(|(y, _)| *y == x).map(|&(_, c)| c)
    }

    pub fn with_class(&self, c: LetterClass) -> Vec<AbstractLetter> {
        self.classes.iter().filter(|(_, k)| *k == c).map(|&(x, _)| x).collect()
    }
}

/// An abstract diagram with a subpath p of its outer walk, stored as
/// (start offset, length).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractDistortionDiagram {
    pub base: Diagram,
    pub p: PathJson,
}

impl AbstractDistortionDiagram {
    pub fn new(base: Diagram, p: PathJson) -> Result<Self> {
        let b = base.boundary_length();
        if p.length > b || p.start >= b {
            return Err(Error::Domain(format!("path ({}, {}) does not fit a boundary of length {b}", p.start, p.length)));
        }
        Ok(AbstractDistortionDiagram { base: base.to_abstract(), p })
    }

    pub fn without_path(base: Diagram) -> Self {
        AbstractDistortionDiagram { base: base.to_abstract(), p: PathJson { start: 0, length: 0 } }
    }

    pub fn path_darts(&self) -> Vec<usize> {
        let walk = self.base.outer_walk();
        (0..self.p.length).map(|i| walk[(self.p.start + i) % walk.len()]).collect()
    }

    /// p̄ as edge ids.
    pub fn path_edges(&self) -> BTreeSet<usize> {
        self.path_darts().iter().map(|d| d / 2).collect()
    }

    /// Endpoints of p; none when p is empty.
    pub fn endpoints(&self) -> Vec<usize> {
        let ds = self.path_darts();
        match (ds.first(), ds.last()) {
            (Some(&a), Some(&b)) => vec![self.base.origin(a), self.base.head(b)],
            _ => Vec::new(),
        }
    }

    pub fn to_json(&self) -> DiagramJson {
        let mut j = self.base.to_json();
        j.p = Some(self.p);
        j
    }
}

/// Reads an abstract (distortion) diagram; dart labels, if any, are dropped
/// and a missing p means the empty path.
pub fn parse_abstract_json(text: &str) -> Result<AbstractDistortionDiagram> {
    let (d, p) = parse_diagram_json(text)?;
    relator_lengths(&d)?;
    AbstractDistortionDiagram::new(d, p.unwrap_or(PathJson { start: 0, length: 0 }))
}

/// ℓ_1..ℓ_k. Labels must be exactly 0..k-1 and faces sharing a label must
/// have equal length.
pub fn relator_lengths(ad: &Diagram) -> Result<Vec<usize>> {
    let mut len: BTreeMap<usize, usize> = BTreeMap::new();
    for f in ad.faces() {
        let l = f.boundary.len();
        if *len.entry(f.relator).or_insert(l) != l {
            return Err(Error::Domain(format!("faces labeled {} have different lengths", f.relator + 1)));
        }
    }
    if len.keys().copied().ne(0..len.len()) {
        return Err(Error::Domain("abstract labels must be 1..k with none skipped".into()));
    }
    Ok(len.into_values().collect())
}

pub fn decorate(ad: &Diagram) -> Result<Decorations> {
    let mut per_edge = vec![Vec::new(); ad.edge_count()];
    for (fi, f) in ad.faces().iter().enumerate() {
        for (j, &d) in f.boundary.iter().enumerate() {
            per_edge[d / 2].push(Decoration {
                letter: AbstractLetter { relator: f.relator + 1, position: j + 1 },
                forward: d % 2 == 0,
                face: fi,
            });
        }
    }
    if let Some(e) = per_edge.iter().position(Vec::is_empty) {
        return Err(Error::Precondition(format!("edge {e} is isolated")));
    }
    Ok(Decorations { per_edge })
}

struct LetterIndex {
    lengths: Vec<usize>,
    offsets: Vec<usize>,
}

impl LetterIndex {
    fn new(lengths: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(lengths.len());
        let mut acc = 0;
        for &l in &lengths {
            offsets.push(acc);
            acc += l;
        }
        LetterIndex { lengths, offsets }
    }

    fn count(&self) -> usize {
        self.lengths.iter().sum()
    }

    fn index(&self, x: AbstractLetter) -> usize {
        self.offsets[x.relator - 1] + x.position - 1
    }

    fn letter(&self, idx: usize) -> AbstractLetter {
        let i = self.offsets.partition_point(|&o| o <= idx) - 1;
        AbstractLetter { relator: i + 1, position: idx - self.offsets[i] + 1 }
    }

    /// Consecutive letter pairs, cyclically, skipping length-one relators.
    fn adjacent(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, &l) in self.lengths.iter().enumerate() {
            if l < 2 {
                continue;
            }
            for j in 0..l {
                out.push((self.offsets[i] + j, self.offsets[i] + (j + 1) % l));
            }
        }
        out
    }
}

struct ParityUnion {
    parent: Vec<usize>,
    flip: Vec<bool>,
}

impl ParityUnion {
    fn new(n: usize) -> Self {
        ParityUnion { parent: (0..n).collect(), flip: vec![false; n] }
    }

    fn find(&mut self, x: usize) -> (usize, bool) {
        if self.parent[x] == x {
            return (x, false);
        }
        let p = self.parent[x];
        let (r, f) = self.find(p);
        self.parent[x] = r;
        self.flip[x] ^= f;
        (r, self.flip[x])
    }

    /// Records φ(a) = φ(b)^{±1}; false on a contradiction.
    fn union(&mut self, a: usize, b: usize, inverse: bool) -> bool {
        let (ra, fa) = self.find(a);
        let (rb, fb) = self.find(b);
        if ra == rb {
            return fa ^ fb == inverse;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        self.flip[hi] = fa ^ fb ^ inverse;
        true
    }
}

/// The letter constraints forced by shared edges, after the structural
/// fillability checks.
struct Shape {
    index: LetterIndex,
    decorations: Decorations,
    /// Component per letter, numbered by least letter.
    comp: Vec<usize>,
    /// Letter value is the inverse of its component value.
    flip: Vec<bool>,
    comps: usize,
}

fn shape(ad: &Diagram) -> Result<Shape> {
    let index = LetterIndex::new(relator_lengths(ad)?);
    let decorations = decorate(ad)?;
    for decs in &decorations.per_edge {
        for (a, x) in decs.iter().enumerate() {
            for y in &decs[a + 1..] {
                if x.letter == y.letter {
                    let how = if x.forward == y.forward { "the same direction" } else { "opposite directions" };
                    return Err(Error::NotFillable(format!(
                        "an edge decorated twice by the same abstract letter {} with {how}",
                        x.letter
                    )));
                }
            }
        }
    }
    let n = index.count();
    let mut uf = ParityUnion::new(n);
    for decs in &decorations.per_edge {
        if let [x, y] = decs[..] {
            if !uf.union(index.index(x.letter), index.index(y.letter), x.forward != y.forward) {
                return Err(Error::NotFillable(format!(
                    "shared edges force {} to equal its own inverse",
                    x.letter
                )));
            }
        }
    }
    for (a, b) in index.adjacent() {
        let (ra, fa) = uf.find(a);
        let (rb, fb) = uf.find(b);
        if ra == rb && fa != fb {
            return Err(Error::NotFillable(format!(
                "shared edges force {} to cancel {}",
                index.letter(b),
                index.letter(a)
            )));
        }
    }
    let mut id = vec![usize::MAX; n];
    let mut comp = vec![0; n];
    let mut flip = vec![false; n];
    let mut comps = 0;
    for x in 0..n {
        let (r, f) = uf.find(x);
        if id[r] == usize::MAX {
            id[r] = comps;
            comps += 1;
        }
        comp[x] = id[r];
        flip[x] = f;
    }
    // make each component's least letter carry the component value itself
    let mut lead_flip = vec![None; comps];
    for x in 0..n {
        lead_flip[comp[x]].get_or_insert(flip[x]);
    }
    for x in 0..n {
        flip[x] ^= lead_flip[comp[x]].unwrap();
    }
    Ok(Shape { index, decorations, comp, flip, comps })
}

/// Structural fillability: no edge decorated twice by one letter, and the
/// shared-edge constraints neither contradict themselves nor force a
/// cancellation inside a relator.
pub fn check_fillable_shape(ad: &Diagram) -> Result<()> {
    shape(ad).map(|_| ())
}

fn min_decoration(decs: &[Decoration]) -> &Decoration {
    decs.iter().min_by_key(|x| x.letter).expect("decorated edge")
}

/// Classes of all abstract letters, in lexicographic order.
pub fn classify(add: &AbstractDistortionDiagram) -> Result<LetterClassification> {
    let sh = shape(&add.base)?;
    let pbar = add.path_edges();
    let n = sh.index.count();
    let mut minimal = vec![true; n];
    let mut on_p = vec![false; n];
    for (e, decs) in sh.decorations.per_edge.iter().enumerate() {
        let least = min_decoration(decs).letter;
        for x in decs {
            let i = sh.index.index(x.letter);
            if x.letter != least {
                minimal[i] = false;
            }
            if pbar.contains(&e) {
                on_p[i] = true;
            }
        }
    }
    let mut classes = Vec::with_capacity(n);
    let mut relators: Vec<RelatorCounts> =
        sh.index.lengths.iter().map(|&length| RelatorCounts { length, alpha: 0, eta: 0, eta_prime: 0 }).collect();
    for f in add.base.faces() {
        relators[f.relator].alpha += 1;
    }
    for i in 0..n {
        let x = sh.index.letter(i);
        let c = match (minimal[i], on_p[i]) {
            (false, _) => LetterClass::NotFreeToFill,
            (true, false) => LetterClass::FreeToFill,
            (true, true) => LetterClass::SemiFreeToFill,
        };
        match c {
            LetterClass::FreeToFill => relators[x.relator - 1].eta += 1,
            LetterClass::SemiFreeToFill => relators[x.relator - 1].eta_prime += 1,
            LetterClass::NotFreeToFill => {}
        }
        classes.push((x, c));
    }
    Ok(LetterClassification { classes, relators })
}

/// Edge ids grouped by preferred face.
pub fn edge_partition(ad: &Diagram) -> Result<Vec<Vec<usize>>> {
    let sh = shape(ad)?;
    let mut parts = vec![Vec::new(); ad.face_count()];
    for (e, decs) in sh.decorations.per_edge.iter().enumerate() {
        parts[min_decoration(decs).face].push(e);
    }
    Ok(parts)
}

/// Vertices of degree at least 3, face starting points and endpoints of p.
pub fn distinguished_vertices(add: &AbstractDistortionDiagram) -> BTreeSet<usize> {
    let d = &add.base;
    let mut degree = vec![0usize; d.vertex_count()];
    for x in 0..d.dart_count() {
        degree[d.origin(x)] += 1;
    }
    let mut out: BTreeSet<usize> = (0..d.vertex_count()).filter(|&v| degree[v] >= 3).collect();
    out.extend(d.faces().iter().map(|f| d.origin(f.boundary[0])));
    out.extend(add.endpoints());
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub relator: usize,
    /// 1-based position of the first letter.
    pub start: usize,
    pub len: usize,
    /// The common class of its letters, or None when they disagree.
    pub class: Option<LetterClass>,
}

impl Segment {
    pub fn letters(&self) -> Vec<AbstractLetter> {
        (0..self.len).map(|t| AbstractLetter { relator: self.relator, position: self.start + t }).collect()
    }
}

/// Elementary segments of abstract relator `i` (1-based).
pub fn elementary_segments(add: &AbstractDistortionDiagram, i: usize) -> Result<Vec<Segment>> {
    let cls = classify(add)?;
    let lengths = relator_lengths(&add.base)?;
    if i == 0 || i > lengths.len() {
        return Err(Error::Domain(format!("no abstract relator {i}")));
    }
    Ok(segments_with(add, &cls, i, lengths[i - 1]))
}

fn segments_with(add: &AbstractDistortionDiagram, cls: &LetterClassification, i: usize, len: usize) -> Vec<Segment> {
    let dist = distinguished_vertices(add);
    let d = &add.base;
    let mut marked = BTreeSet::from([1usize]);
    for f in d.faces().iter().filter(|f| f.relator + 1 == i) {
        for (j, &e) in f.boundary.iter().enumerate() {
            if dist.contains(&d.origin(e)) {
                marked.insert(j + 1);
            }
        }
    }
    let starts: Vec<usize> = marked.into_iter().collect();
    let mut out = Vec::with_capacity(starts.len());
    for (s, &start) in starts.iter().enumerate() {
        let end = starts.get(s + 1).copied().unwrap_or(len + 1);
        let mut seg = Segment { relator: i, start, len: end - start, class: None };
        let cs: BTreeSet<LetterClass> = seg.letters().into_iter().filter_map(|x| cls.class_of(x)).collect();
        if cs.len() == 1 {
            seg.class = cs.into_iter().next();
        }
        out.push(seg);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FaceCounts {
    pub face: usize,
    pub relator: usize,
    /// |E_f|: edges preferring this face.
    pub preferred: usize,
    /// |E_f ∩ p̄|.
    pub preferred_on_p: usize,
    pub eta: usize,
    pub eta_prime: usize,
}

/// Both sides of the counting inequalities for one distortion diagram.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub faces: Vec<FaceCounts>,
    pub edges: usize,
    pub p_edges: usize,
    pub sum_alpha_eta: usize,
    pub sum_alpha_eta_prime: usize,
    /// Σ η'_i without the α_i weights.
    pub sum_eta_prime: usize,
    pub distinguished: usize,
    pub max_segments: usize,
    pub partition_ok: bool,
    pub segments_uniform: bool,
    pub violations: Vec<String>,
}

impl CountReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Computes every per-face and global count and lists each inequality that
/// fails; see [`assert_count_inequalities`] for the asserting form.
pub fn count_inequalities(add: &AbstractDistortionDiagram) -> Result<CountReport> {
    let cls = classify(add)?;
    let parts = edge_partition(&add.base)?;
    let pbar = add.path_edges();
    let d = &add.base;
    let k = d.face_count();
    let mut violations = Vec::new();

    let mut seen = BTreeSet::new();
    let mut partition_ok = true;
    for part in &parts {
        for &e in part {
            partition_ok &= seen.insert(e);
        }
    }
    partition_ok &= seen.len() == d.edge_count();
    if !partition_ok {
        violations.push("preferred-face sets do not partition the edges".into());
    }

    let mut faces = Vec::with_capacity(k);
    for (fi, f) in d.faces().iter().enumerate() {
        let rc = cls.relators[f.relator];
        let on_p = parts[fi].iter().filter(|e| pbar.contains(e)).count();
        let row = FaceCounts {
            face: fi,
            relator: f.relator + 1,
            preferred: parts[fi].len(),
            preferred_on_p: on_p,
            eta: rc.eta,
            eta_prime: rc.eta_prime,
        };
        if row.eta_prime > row.preferred_on_p {
            violations.push(format!(
                "face {fi}: eta'_{} = {} exceeds |E_f and p| = {}",
                row.relator, row.eta_prime, row.preferred_on_p
            ));
        }
        if row.eta > row.preferred - row.preferred_on_p {
            violations.push(format!(
                "face {fi}: eta_{} = {} exceeds |E_f| - |E_f and p| = {}",
                row.relator,
                row.eta,
                row.preferred - row.preferred_on_p
            ));
        }
        faces.push(row);
    }
    let sum_alpha_eta: usize = cls.relators.iter().map(|r| r.alpha * r.eta).sum();
    let sum_alpha_eta_prime: usize = cls.relators.iter().map(|r| r.alpha * r.eta_prime).sum();
    let sum_eta_prime: usize = cls.relators.iter().map(|r| r.eta_prime).sum();
    let edges = d.edge_count();
    let p_edges = pbar.len();
    if sum_alpha_eta_prime > p_edges {
        violations.push(format!("sum alpha_i eta'_i = {sum_alpha_eta_prime} exceeds |p| = {p_edges}"));
    }
    if sum_alpha_eta > edges - p_edges {
        violations.push(format!("sum alpha_i eta_i = {sum_alpha_eta} exceeds |E| - |p| = {}", edges - p_edges));
    }
    for r in &cls.relators {
        if r.eta + r.eta_prime > r.length {
            violations.push(format!("eta + eta' = {} exceeds length {}", r.eta + r.eta_prime, r.length));
        }
    }

    let distinguished = distinguished_vertices(add).len();
    if distinguished > 3 * k {
        violations.push(format!("{distinguished} distinguished vertices exceed 3|D| = {}", 3 * k));
    }
    let mut max_segments = 0;
    let mut segments_uniform = true;
    for (i, r) in cls.relators.iter().enumerate() {
        let segs = segments_with(add, &cls, i + 1, r.length);
        max_segments = max_segments.max(segs.len());
        if segs.len() > 3 * k * k {
            violations.push(format!("relator {}: {} segments exceed 3|D|^2 = {}", i + 1, segs.len(), 3 * k * k));
        }
        for s in segs.iter().filter(|s| s.class.is_none()) {
            segments_uniform = false;
            violations.push(format!("relator {}: segment at {} of length {} mixes classes", i + 1, s.start, s.len));
        }
    }
    Ok(CountReport {
        faces,
        edges,
        p_edges,
        sum_alpha_eta,
        sum_alpha_eta_prime,
        sum_eta_prime,
        distinguished,
        max_segments,
        partition_ok,
        segments_uniform,
        violations,
    })
}

pub fn assert_count_inequalities(add: &AbstractDistortionDiagram) -> Result<CountReport> {
    let r = count_inequalities(add)?;
    if r.holds() {
        Ok(r)
    } else {
        Err(Error::Invariant(r.violations.join("; ")))
    }
}

/// Replaces relators by abstract indices in first-use order over faces.
/// Returns the abstract diagram and, per abstract index, the original
/// relator index.
pub fn underlying_abstract(d: &Diagram) -> (Diagram, Vec<usize>) {
    let mut order = Vec::new();
    let mut map = BTreeMap::new();
    let relators: Vec<usize> = d
        .faces()
        .iter()
        .map(|f| {
            *map.entry(f.relator).or_insert_with(|| {
                order.push(f.relator);
                order.len() - 1
            })
        })
        .collect();
    (d.relabeled(Vec::new(), &relators), order)
}

/// Labels darts from the words of the abstract relators. Face labels stay
/// abstract indices, i.e. indices into `words`.
pub fn fill(ad: &Diagram, words: &[Word]) -> Result<Diagram> {
    let lengths = relator_lengths(ad)?;
    if lengths.len() != words.len() {
        return Err(Error::Domain(format!("{} abstract relators but {} words", lengths.len(), words.len())));
    }
    let mut labels: Vec<Letter> = vec![0; ad.dart_count()];
    for f in ad.faces() {
        let w = &words[f.relator];
        if w.len() != f.boundary.len() {
            return Err(Error::NotFillable(format!("relator {} has length {} but the face has {}", f.relator + 1, w.len(), f.boundary.len())));
        }
        for (&d, &x) in f.boundary.iter().zip(w.letters()) {
            for (dd, xx) in [(d, x), (twin(d), -x)] {
                if labels[dd] != 0 && labels[dd] != xx {
                    return Err(Error::NotFillable(format!("dart {dd} gets two labels")));
                }
                labels[dd] = xx;
            }
        }
    }
    if labels.contains(&0) {
        return Err(Error::Precondition("isolated edge left unlabeled".into()));
    }
    let rels: Vec<usize> = ad.faces().iter().map(|f| f.relator).collect();
    Ok(ad.relabeled(labels, &rels))
}

struct Plan {
    shape: Shape,
    /// Consecutive pairs to test when a component gets its value.
    checks: Vec<Vec<(usize, usize)>>,
    /// Per dart: letter index and whether the dart reads it inverted.
    dart_letter: Vec<(usize, bool)>,
}

fn plan(ad: &Diagram) -> Result<Option<Plan>> {
    let shape = match shape(ad) {
        Ok(s) => s,
        Err(Error::NotFillable(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let mut checks = vec![Vec::new(); shape.comps];
    for (a, b) in shape.index.adjacent() {
        checks[shape.comp[a].max(shape.comp[b])].push((a, b));
    }
    let mut dart_letter = vec![(0, false); ad.dart_count()];
    for f in ad.faces() {
        for (j, &d) in f.boundary.iter().enumerate() {
            let x = shape.index.offsets[f.relator] + j;
            dart_letter[d] = (x, false);
            dart_letter[twin(d)] = (x, true);
        }
    }
    Ok(Some(Plan { shape, checks, dart_letter }))
}

impl Plan {
    fn value(&self, vals: &[Letter], x: usize) -> Letter {
        let v = vals[self.shape.comp[x]];
        if self.shape.flip[x] {
            -v
        } else {
            v
        }
    }

    fn letters(&self, vals: &[Letter]) -> Vec<Letter> {
        (0..self.shape.index.count()).map(|x| self.value(vals, x)).collect()
    }

    fn relator(&self, letters: &[Letter], i: usize) -> Word {
        let o = self.shape.index.offsets[i];
        Word(letters[o..o + self.shape.index.lengths[i]].to_vec())
    }

    fn distinct(&self, letters: &[Letter]) -> bool {
        let ix = &self.shape.index;
        let k = ix.lengths.len();
        (0..k).all(|a| {
            (a + 1..k).all(|b| {
                ix.lengths[a] != ix.lengths[b]
                    || letters[ix.offsets[a]..ix.offsets[a] + ix.lengths[a]] != letters[ix.offsets[b]..ix.offsets[b] + ix.lengths[b]]
            })
        })
    }

    fn walk_word(&self, letters: &[Letter], walk: &[usize]) -> Vec<Letter> {
        walk.iter()
            .map(|&d| {
                let (x, inv) = self.dart_letter[d];
                if inv {
                    -letters[x]
                } else {
                    letters[x]
                }
            })
            .collect()
    }

    /// Visits every letter assignment with the first component fixed to
    /// `first`, calling `f` on the letters of each filling.
    fn search<F: FnMut(&[Letter])>(&self, alphabet: &Alphabet, first: Letter, f: &mut F) {
        let mut vals = vec![0; self.shape.comps];
        vals[0] = first;
        if self.consistent(&vals, 0) {
            self.descend(alphabet, &mut vals, 1, f);
        }
    }

    fn consistent(&self, vals: &[Letter], c: usize) -> bool {
        self.checks[c].iter().all(|&(a, b)| self.value(vals, b) != -self.value(vals, a))
    }

    fn descend<F: FnMut(&[Letter])>(&self, alphabet: &Alphabet, vals: &mut Vec<Letter>, c: usize, f: &mut F) {
        if c == vals.len() {
            let letters = self.letters(vals);
            if self.distinct(&letters) {
                f(&letters);
            }
            return;
        }
        for x in alphabet.letters() {
            vals[c] = x;
            if self.consistent(vals, c) {
                self.descend(alphabet, vals, c + 1, f);
            }
        }
    }

    fn guard(&self, m: usize) -> Result<()> {
        feasibility("filling search", ((2 * m) as f64).powi(self.shape.comps as i32), DEFAULT_FILLING_LIMIT)
    }
}

fn prepare(ad: &Diagram, m: usize, ell: usize) -> Result<Option<(Plan, Alphabet)>> {
    let alphabet = Alphabet::new(m)?;
    if ad.face_count() > MAX_ABSTRACT_FACES || relator_lengths(ad)?.iter().any(|&l| l > MAX_ABSTRACT_LENGTH) {
        return Err(Error::Feasibility {
            what: format!("filling enumeration supports at most {MAX_ABSTRACT_FACES} faces of length {MAX_ABSTRACT_LENGTH}"),
            estimate: ad.face_count() as f64,
            limit: MAX_ABSTRACT_FACES as f64,
        });
    }
    let Some(plan) = plan(ad)? else { return Ok(None) };
    if plan.shape.index.lengths.iter().any(|&l| l > ell) {
        return Ok(None);
    }
    plan.guard(m)?;
    Ok(Some((plan, alphabet)))
}

/// All tuples of distinct cyclically reduced words of length at most `ell`
/// that fill the diagram with the label of p readable on Γ.
pub fn enumerate_fillings(add: &AbstractDistortionDiagram, m: usize, ell: usize, gamma: &LabeledGraph) -> Result<Vec<Vec<Word>>> {
    let Some((plan, alphabet)) = prepare(&add.base, m, ell)? else { return Ok(Vec::new()) };
    let pdarts = add.path_darts();
    let k = plan.shape.index.lengths.len();
    let firsts: Vec<Letter> = alphabet.letters().collect();
    let chunks: Vec<Vec<Vec<Word>>> = firsts
        .par_iter()
        .map(|&x| {
            let mut out = Vec::new();
            plan.search(&alphabet, x, &mut |letters| {
                if gamma.readable_prefix(&plan.walk_word(letters, &pdarts)) == pdarts.len() {
                    out.push((0..k).map(|i| plan.relator(letters, i)).collect());
                }
            });
            out
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

/// Filling counts of one abstract diagram for every choice of p at once.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathFillingCounts {
    pub boundary: usize,
    /// Fillings ignoring p, i.e. for the empty path.
    pub total: u64,
    /// `by_path[start][length - 1]`.
    pub by_path: Vec<Vec<u64>>,
}

impl PathFillingCounts {
    pub fn count(&self, p: PathJson) -> u64 {
        if p.length == 0 {
            self.total
        } else {
            self.by_path[p.start][p.length - 1]
        }
    }
}

pub fn filling_counts_by_path(ad: &Diagram, m: usize, ell: usize, gamma: &LabeledGraph) -> Result<PathFillingCounts> {
    let b = ad.boundary_length();
    let mut acc = PathFillingCounts { boundary: b, total: 0, by_path: vec![vec![0; b]; b] };
    let Some((plan, alphabet)) = prepare(ad, m, ell)? else { return Ok(acc) };
    let walk = ad.outer_walk();
    let firsts: Vec<Letter> = alphabet.letters().collect();
    let parts: Vec<PathFillingCounts> = firsts
        .par_iter()
        .map(|&x| {
            let mut c = PathFillingCounts { boundary: b, total: 0, by_path: vec![vec![0; b]; b] };
            plan.search(&alphabet, x, &mut |letters| {
                c.total += 1;
                let w = plan.walk_word(letters, &walk);
                let twice: Vec<Letter> = w.iter().chain(w.iter()).copied().collect();
                for s in 0..b {
                    let reach = gamma.readable_prefix(&twice[s..s + b]);
                    for len in 1..=reach {
                        c.by_path[s][len - 1] += 1;
                    }
                }
            });
            c
        })
        .collect();
    for c in parts {
        acc.total += c.total;
        for (row, crow) in acc.by_path.iter_mut().zip(&c.by_path) {
            for (a, b) in row.iter_mut().zip(crow) {
                *a += b;
            }
        }
    }
    Ok(acc)
}

/// The exponents entering the filling bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoundTerms {
    pub k: usize,
    pub faces: usize,
    pub eta: usize,
    pub eta_prime: usize,
}

pub fn bound_terms(add: &AbstractDistortionDiagram) -> Result<BoundTerms> {
    let cls = classify(add)?;
    Ok(BoundTerms {
        k: cls.relators.len(),
        faces: add.base.face_count(),
        eta: cls.relators.iter().map(|r| r.eta).sum(),
        eta_prime: cls.relators.iter().map(|r| r.eta_prime).sum(),
    })
}

fn check_bound_args(m: usize, r: usize, gamma_size: usize) -> Result<()> {
    if m < 2 || r == 0 || gamma_size == 0 {
        return Err(Error::Domain(format!("bound needs m >= 2, r >= 1 and a nonempty graph (m = {m}, r = {r}, |G| = {gamma_size})")));
    }
    Ok(())
}

/// Natural log of (2m/(2m-1))^k (2|Γ|)^{3|D|²k} (2m-1)^{Ση} (2r-1)^{Ση'}.
pub fn filling_bound(add: &AbstractDistortionDiagram, m: usize, r: usize, gamma_size: usize) -> Result<f64> {
    check_bound_args(m, r, gamma_size)?;
    Ok(log_bound(bound_terms(add)?, m, r, gamma_size))
}

pub fn log_bound(t: BoundTerms, m: usize, r: usize, gamma_size: usize) -> f64 {
    let m2 = (2 * m) as f64;
    t.k as f64 * (m2 / (m2 - 1.0)).ln()
        + (3 * t.faces * t.faces * t.k) as f64 * ((2 * gamma_size) as f64).ln()
        + t.eta as f64 * (m2 - 1.0).ln()
        + t.eta_prime as f64 * ((2 * r - 1) as f64).ln()
}

/// The bound as an exact fraction (numerator, denominator).
pub fn filling_bound_exact(add: &AbstractDistortionDiagram, m: usize, r: usize, gamma_size: usize) -> Result<(BigUint, BigUint)> {
    check_bound_args(m, r, gamma_size)?;
    Ok(exact_bound(bound_terms(add)?, m, r, gamma_size))
}

pub fn exact_bound(t: BoundTerms, m: usize, r: usize, gamma_size: usize) -> (BigUint, BigUint) {
    let pow = |b: usize, e: usize| BigUint::from(b).pow(e as u32);
    let num = pow(2 * m, t.k) * pow(2 * gamma_size, 3 * t.faces * t.faces * t.k) * pow(2 * m - 1, t.eta) * pow(2 * r - 1, t.eta_prime);
    (num, pow(2 * m - 1, t.k))
}

/// count ≤ bound, exactly when the bound has fewer than 10^5 bits and in
/// the log domain with 1e-9 slack otherwise.
pub fn bound_holds(count: u64, t: BoundTerms, m: usize, r: usize, gamma_size: usize) -> bool {
    let bits = log_bound(t, m, r, gamma_size) / std::f64::consts::LN_2;
    if bits < 1e5 {
        let (num, den) = exact_bound(t, m, r, gamma_size);
        BigUint::from(count) * den <= num
    } else {
        count == 0 || (count as f64).ln() <= log_bound(t, m, r, gamma_size) + 1e-9
    }
}

fn check_enum_args(k: usize, ell: usize) -> Result<()> {
    if k > MAX_ABSTRACT_FACES || ell > MAX_ABSTRACT_LENGTH {
        return Err(Error::Feasibility {
            what: format!("abstract enumeration supports K <= {MAX_ABSTRACT_FACES} and face length <= {MAX_ABSTRACT_LENGTH}"),
            estimate: (k.max(ell)) as f64,
            limit: MAX_ABSTRACT_LENGTH as f64,
        });
    }
    Ok(())
}

/// Disk-like abstract diagrams with at most `k` faces of length at most
/// `ell`, reduced and fillable-shaped, one per isomorphism class (labels
/// and starting points included). Labels are in first-use order.
pub fn enumerate_abstract_diagrams(k: usize, ell: usize) -> Result<Vec<Diagram>> {
    check_enum_args(k, ell)?;
    let mut out = Vec::new();
    if k == 0 {
        return Ok(out);
    }
    let mut seen = HashSet::new();
    let mut level = Vec::new();
    for len in 1..=ell {
        let d = Diagram::polygon(len, 0, None)?;
        if seen.insert(d.canonical_code()) {
            level.push(d);
        }
    }
    out.extend(level.iter().cloned());
    for _ in 1..k {
        let mut next = Vec::new();
        for d in &level {
            let lengths = relator_lengths(d)?;
            let b = d.boundary_length();
            for a in 0..b {
                for len in 2..=ell {
                    for label in 0..=lengths.len() {
                        if label < lengths.len() && lengths[label] != len {
                            continue;
                        }
                        for s in 1..b.min(len) {
                            for positive in [true, false] {
                                for st in 0..len {
                                    let Ok(c) = d.glue(a, s, len, label, positive, st, &[]) else { continue };
                                    if !is_reduced(&c) || check_fillable_shape(&c).is_err() {
                                        continue;
                                    }
                                    if seen.insert(c.canonical_code()) {
                                        next.push(c);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out.retain(|d| check_fillable_shape(d).is_ok());
    Ok(out)
}

/// Every choice of p on an outer walk of length `b`: the empty path, then
/// (start, length) for all starts and lengths 1..=b.
pub fn path_choices(b: usize) -> Vec<PathJson> {
    let mut out = vec![PathJson { start: 0, length: 0 }];
    for start in 0..b {
        for length in 1..=b {
            out.push(PathJson { start, length });
        }
    }
    out
}

pub fn enumerate_abstract_distortion_diagrams(k: usize, ell: usize) -> Result<Vec<AbstractDistortionDiagram>> {
    let mut out = Vec::new();
    for d in enumerate_abstract_diagrams(k, ell)? {
        for p in path_choices(d.boundary_length()) {
            out.push(AbstractDistortionDiagram { base: d.clone(), p });
        }
    }
    Ok(out)
}

/// Canonical code of a pair (D, p): darts of p carry their index along p.
pub fn pair_code(add: &AbstractDistortionDiagram) -> Vec<u32> {
    let n = add.base.dart_count();
    let mut mark = vec![0u32; n];
    let mut mirror = vec![0u32; n];
    let ds = add.path_darts();
    let len = ds.len() as u32;
    for (i, &d) in ds.iter().enumerate() {
        mark[d] = i as u32 + 1;
        mirror[twin(d)] = len - i as u32;
    }
    add.base.canonical_code_marked(&mark, &mirror)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbstractCensus {
    pub k: usize,
    pub ell: usize,
    pub diagrams: usize,
    /// Pairs (D, p) as emitted: every start and length on the stored walk.
    pub pairs: usize,
    /// Pairs up to isomorphism of the pair.
    pub pair_classes: usize,
    /// ℓ^{5K}.
    pub bound: f64,
}

pub fn abstract_census(k: usize, ell: usize) -> Result<AbstractCensus> {
    let ds = enumerate_abstract_diagrams(k, ell)?;
    let mut pairs = 0;
    let mut classes = HashSet::new();
    for d in &ds {
        for p in path_choices(d.boundary_length()) {
            pairs += 1;
            classes.insert(pair_code(&AbstractDistortionDiagram { base: d.clone(), p }));
        }
    }
    Ok(AbstractCensus {
        k,
        ell,
        diagrams: ds.len(),
        pairs,
        pair_classes: classes.len(),
        bound: (ell as f64).powi(5 * k as i32),
    })
}

const S3: f64 = 0.866_025_403_784_438_6;

fn hexagon_points() -> Vec<(f64, f64)> {
    vec![
        (0.0, 0.0),
        (0.0, 1.0),
        (S3, 1.5),
        (2.0 * S3, 1.0),
        (2.0 * S3, 0.0),
        (S3, -0.5),
        (-S3, 1.5),
        (-2.0 * S3, 1.0),
        (-2.0 * S3, 0.0),
        (-S3, -0.5),
        (S3, -1.5),
        (0.0, -2.0),
        (-S3, -1.5),
    ]
}

/// Two hexagons labeled 1 and 2 sharing a vertical edge. The left one is
/// read counterclockwise from its upper left corner, the right one
/// counterclockwise from its upper right corner, so the shared edge is
/// letter 4 of relator 1 going up and letter 3 of relator 2 going down.
pub fn two_hexagon_example() -> Diagram {
    let pts = hexagon_points()[..10].to_vec();
    Diagram::from_embedding(&pts, &[(vec![7, 8, 9, 0, 1, 6], 0), (vec![3, 2, 1, 0, 5, 4], 1)]).expect("valid drawing")
}

/// Three hexagons around the origin: two labeled 1 side by side over one
/// labeled 2. Left face: counterclockwise from its upper left corner. Right
/// face: clockwise from its lower right corner. Bottom face:
/// counterclockwise from its upper right corner. Letters (1,4), (2,1) and
/// (2,2) lose their edges to (1,3), (1,2) and (1,3).
pub fn three_hexagon_example() -> Diagram {
    Diagram::from_embedding(
        &hexagon_points(),
        &[
            (vec![7, 8, 9, 0, 1, 6], 0),
            (vec![4, 5, 0, 1, 2, 3], 0),
            (vec![5, 0, 9, 12, 11, 10], 1),
        ],
    )
    .expect("valid drawing")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stallings::parse_graph;

    fn letter(i: usize, j: usize) -> AbstractLetter {
        AbstractLetter { relator: i, position: j }
    }

    #[test]
    fn three_hexagons_classes() {
        let add = AbstractDistortionDiagram::without_path(three_hexagon_example());
        let cls = classify(&add).unwrap();
        assert_eq!(cls.with_class(LetterClass::NotFreeToFill), vec![letter(1, 4), letter(2, 1), letter(2, 2)]);
        assert!(cls.with_class(LetterClass::SemiFreeToFill).is_empty());
        let parts = edge_partition(&add.base).unwrap();
        assert_eq!(parts.iter().map(Vec::len).sum::<usize>(), add.base.edge_count());
    }

    #[test]
    fn two_hexagons_shared_edge() {
        let d = two_hexagon_example();
        let dec = decorate(&d).unwrap();
        let shared: Vec<_> = dec.per_edge.iter().filter(|x| x.len() == 2).collect();
        assert_eq!(shared.len(), 1);
        let (x, y) = (shared[0][0], shared[0][1]);
        assert_eq!((x.letter, y.letter), (letter(1, 4), letter(2, 3)));
        assert_ne!(x.forward, y.forward);
        assert_eq!(dec.total(), 12);
    }

    #[test]
    fn one_face_everything_free() {
        let add = AbstractDistortionDiagram::without_path(Diagram::polygon(4, 0, None).unwrap());
        let cls = classify(&add).unwrap();
        assert_eq!(cls.with_class(LetterClass::FreeToFill).len(), 4);
        let segs = elementary_segments(&add, 1).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].len, 4);
        let full = AbstractDistortionDiagram::new(add.base.clone(), PathJson { start: 0, length: 4 }).unwrap();
        let rep = count_inequalities(&full).unwrap();
        assert_eq!(rep.sum_alpha_eta_prime, 4);
        assert!(rep.holds(), "{:?}", rep.violations);
    }

    #[test]
    fn length_two_fillings_and_bound() {
        let add = AbstractDistortionDiagram::without_path(Diagram::polygon(2, 0, None).unwrap());
        let loop_a = parse_graph("V 1\nE 0 0 a\n").unwrap();
        let f = enumerate_fillings(&add, 2, 2, &loop_a).unwrap();
        assert_eq!(f.len(), 12);
        let (num, den) = filling_bound_exact(&add, 2, 1, 1).unwrap();
        assert_eq!(num, BigUint::from(96u32) * &den);
        assert!((filling_bound(&add, 2, 1, 1).unwrap() - 96f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn self_inverse_edge_is_not_fillable() {
        // one face whose boundary uses an edge in both directions is not a
        // disk, so build the pattern from two faces of one label meeting
        // along the same position in opposite directions
        let pts = hexagon_points()[..10].to_vec();
        let d = Diagram::from_embedding(&pts, &[(vec![7, 8, 9, 0, 1, 6], 0), (vec![4, 3, 2, 1, 0, 5], 0)]).unwrap();
        assert!(matches!(classify(&AbstractDistortionDiagram::without_path(d.clone())), Err(Error::NotFillable(_))));
        let loop_a = parse_graph("V 1\nE 0 0 a\n").unwrap();
        assert!(enumerate_fillings(&AbstractDistortionDiagram::without_path(d), 2, 6, &loop_a).unwrap().is_empty());
    }

    #[test]
    fn small_census() {
        let c = abstract_census(1, 2).unwrap();
        assert_eq!(c.diagrams, 2);
        // 1-gon: empty + 1 path; 2-gon: empty + 4 paths
        assert_eq!(c.pairs, 7);
    }
}
