//! Planar 2-complexes as combinatorial maps with a distinguished outer face,
//! carrying relator (or abstract) face labels and optional dart labels.
//!
//! Darts come in pairs: the twin of dart `d` is `d ^ 1`. `next[d]` is the
//! dart following `d` along the face on its left; the rotation at a vertex
//! is `next[twin(d)]`. Each inner face stores its positive boundary: the
//! dart sequence that spells the relator from its starting point. The face
//! is positive when that sequence is the face's own cycle and negative when
//! it is the reversed cycle of twins.

use crate::error::{Error, Result, ValidationKind};
use crate::words::{letter_char, letter_key, parse_letter, Letter, Word};
use serde::{Deserialize, Serialize};

#[inline]
pub fn twin(d: usize) -> usize {
    d ^ 1
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    /// Relator index (0-based) or abstract label (0-based).
    pub relator: usize,
    pub positive: bool,
    /// Positive boundary e_1..e_k.
    pub boundary: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagram {
    origin: Vec<usize>,
    next: Vec<usize>,
    /// Dart labels; empty for abstract diagrams.
    labels: Vec<Letter>,
    faces: Vec<Face>,
    outer_start: usize,
    vertex_count: usize,
    // derived
    cycle_of: Vec<usize>,
    cycles: Vec<Vec<usize>>,
}

pub type VanKampenDiagram = Diagram;
pub type AbstractDiagram = Diagram;

/// Marks a dart carries from positive boundaries: (label + 1, position + 1)
/// for the face on its left and on its right, 0 when absent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Marks {
    left: (u32, u32),
    right: (u32, u32),
}

impl Diagram {
    /// One positive face of length `len`; `labels` spells the face from its
    /// starting point.
    pub fn polygon(len: usize, relator: usize, labels: Option<&[Letter]>) -> Result<Diagram> {
        if len == 0 {
            return Err(Error::Domain("a face needs a nonempty boundary".into()));
        }
        let mut origin = vec![0; 2 * len];
        let mut next = vec![0; 2 * len];
        for j in 0..len {
            let (d, t) = (2 * j, 2 * j + 1);
            origin[d] = j;
            origin[t] = (j + 1) % len;
            next[d] = 2 * ((j + 1) % len);
            next[t] = 2 * ((j + len - 1) % len) + 1;
        }
        let mut lab = Vec::new();
        if let Some(l) = labels {
            if l.len() != len {
                return Err(Error::Domain("label count differs from face length".into()));
            }
            for &x in l {
                lab.push(x);
                lab.push(-x);
            }
        }
        let boundary = (0..len).map(|j| 2 * j).collect();
        Diagram::assemble(origin, next, lab, vec![Face { relator, positive: true, boundary }], 1, len)
    }

    /// Builds an abstract diagram from a straight-line drawing. Each face is
    /// its vertex sequence from the starting point, in reading order, with a
    /// 0-based label.
    pub fn from_embedding(points: &[(f64, f64)], faces: &[(Vec<usize>, usize)]) -> Result<Diagram> {
        let mut edge_of = std::collections::BTreeMap::new();
        let mut origin = Vec::new();
        let mut dart = |u: usize, v: usize, origin: &mut Vec<usize>| -> usize {
            if let Some(&d) = edge_of.get(&(u, v)) {
                return d;
            }
            let d = origin.len();
            origin.push(u);
            origin.push(v);
            edge_of.insert((u, v), d);
            edge_of.insert((v, u), d + 1);
            d
        };
        let mut out = Vec::new();
        for (vs, label) in faces {
            let len = vs.len();
            if len < 2 {
                return Err(Error::Domain("drawn faces need at least two vertices".into()));
            }
            let boundary: Vec<usize> = (0..len).map(|j| dart(vs[j], vs[(j + 1) % len], &mut origin)).collect();
            out.push(Face { relator: *label, positive: true, boundary });
        }
        let n = origin.len();
        let angle = |d: usize| {
            let (a, b) = (points[origin[d]], points[origin[twin(d)]]);
            (b.1 - a.1).atan2(b.0 - a.0)
        };
        let mut around = vec![Vec::new(); points.len()];
        for d in 0..n {
            around[origin[d]].push(d);
        }
        let mut next = vec![0; n];
        for ds in &mut around {
            ds.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));
            let k = ds.len();
            for (i, &d) in ds.iter().enumerate() {
                // the dart into this vertex along twin(d) continues with the
                // next dart clockwise from d
                next[twin(d)] = ds[(i + k - 1) % k];
            }
        }
        for f in &mut out {
            let len = f.boundary.len();
            f.positive = (0..len).all(|j| next[f.boundary[j]] == f.boundary[(j + 1) % len]);
        }
        let used: Vec<usize> = (0..points.len()).filter(|&v| !around[v].is_empty()).collect();
        if used.len() != points.len() {
            return Err(Error::Domain("every drawn vertex must lie on a face".into()));
        }
        let mut in_face = vec![false; n];
        for f in &out {
            for &d in &f.boundary {
                in_face[if f.positive { d } else { twin(d) }] = true;
            }
        }
        let outer_start = (0..n).find(|&d| !in_face[d]).ok_or_else(|| Error::Domain("no outer face".into()))?;
        let d = Diagram::assemble(origin, next, Vec::new(), out, outer_start, points.len())?;
        d.check_structure()?;
        Ok(d)
    }

    fn assemble(
        origin: Vec<usize>,
        next: Vec<usize>,
        labels: Vec<Letter>,
        faces: Vec<Face>,
        outer_start: usize,
        vertex_count: usize,
    ) -> Result<Diagram> {
        let n = next.len();
        let mut cycle_of = vec![usize::MAX; n];
        let mut cycles = Vec::new();
        for d in 0..n {
            if cycle_of[d] != usize::MAX {
                continue;
            }
            let id = cycles.len();
            let mut c = Vec::new();
            let mut e = d;
            loop {
                if cycle_of[e] != usize::MAX {
                    return Err(Error::Validation {
                        kind: ValidationKind::Involution,
                        msg: "face successor is not a permutation".into(),
                    });
                }
                cycle_of[e] = id;
                c.push(e);
                e = next[e];
                if e == d {
                    break;
                }
            }
            cycles.push(c);
        }
        Ok(Diagram { origin, next, labels, faces, outer_start, vertex_count, cycle_of, cycles })
    }

    pub fn dart_count(&self) -> usize {
        self.next.len()
    }

    pub fn edge_count(&self) -> usize {
        self.next.len() / 2
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// |D|: number of inner faces.
    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn is_abstract(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, d: usize) -> Letter {
        self.labels[d]
    }

    pub fn labels(&self) -> &[Letter] {
        &self.labels
    }

    pub fn origin(&self, d: usize) -> usize {
        self.origin[d]
    }

    pub fn head(&self, d: usize) -> usize {
        self.origin[twin(d)]
    }

    pub fn next(&self, d: usize) -> usize {
        self.next[d]
    }

    /// Rotation successor around the origin of d.
    pub fn next_at_vertex(&self, d: usize) -> usize {
        self.next[twin(d)]
    }

    pub fn outer_cycle_id(&self) -> usize {
        self.cycle_of[self.outer_start]
    }

    pub fn is_outer(&self, d: usize) -> bool {
        self.cycle_of[d] == self.outer_cycle_id()
    }

    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn cycle_of(&self, d: usize) -> usize {
        self.cycle_of[d]
    }

    /// The outer walk, starting at the stored outer start dart.
    pub fn outer_walk(&self) -> Vec<usize> {
        let mut w = vec![self.outer_start];
        let mut d = self.next[self.outer_start];
        while d != self.outer_start {
            w.push(d);
            d = self.next[d];
        }
        w
    }

    /// |∂D|.
    pub fn boundary_length(&self) -> usize {
        self.cycles[self.outer_cycle_id()].len()
    }

    pub fn word_of(&self, darts: &[usize]) -> Word {
        Word(darts.iter().map(|&d| self.labels[d]).collect())
    }

    /// The face's cycle in face-successor order.
    pub fn face_cycle(&self, f: usize) -> Vec<usize> {
        let face = &self.faces[f];
        if face.positive {
            face.boundary.clone()
        } else {
            face.boundary.iter().rev().map(|&d| twin(d)).collect()
        }
    }

    fn marks(&self) -> Vec<Marks> {
        let mut m = vec![Marks::default(); self.dart_count()];
        for f in &self.faces {
            for (j, &d) in f.boundary.iter().enumerate() {
                let mark = (f.relator as u32 + 1, j as u32 + 1);
                if f.positive {
                    m[d].left = mark;
                } else {
                    m[d].right = mark;
                }
            }
        }
        m
    }

    fn prev(&self) -> Vec<usize> {
        let mut p = vec![0; self.dart_count()];
        for (d, &n) in self.next.iter().enumerate() {
            p[n] = d;
        }
        p
    }

    /// Canonical code: least breadth-first code over every root dart, for
    /// the diagram and its mirror image.
    pub fn canonical_code(&self) -> Vec<u32> {
        let zeros = vec![0; self.dart_count()];
        self.canonical_code_marked(&zeros, &zeros)
    }

    /// Canonical code with an extra per-dart mark, given for the diagram
    /// and for its mirror image.
    pub fn canonical_code_marked(&self, extra: &[u32], extra_mirror: &[u32]) -> Vec<u32> {
        let n = self.dart_count();
        let marks = self.marks();
        let outer: Vec<bool> = (0..n).map(|d| self.is_outer(d)).collect();
        let prev = self.prev();
        let mirror_next: Vec<usize> = (0..n).map(|d| twin(prev[twin(d)])).collect();
        let mirror_marks: Vec<Marks> = marks.iter().map(|mk| Marks { left: mk.right, right: mk.left }).collect();
        let mirror_outer: Vec<bool> = (0..n).map(|d| outer[twin(d)]).collect();
        let mut best: Option<Vec<u32>> = None;
        for (next, mk, out, ex) in
            [(&self.next, &marks, &outer, extra), (&mirror_next, &mirror_marks, &mirror_outer, extra_mirror)]
        {
            for root in 0..n {
                if let Some(c) = self.code_from(root, next, mk, out, ex, best.as_deref()) {
                    best = Some(c);
                }
            }
        }
        best.unwrap_or_default()
    }

    /// Returns the code from `root` if it beats `bound`.
    fn code_from(&self, root: usize, next: &[usize], marks: &[Marks], outer: &[bool], extra: &[u32], bound: Option<&[u32]>) -> Option<Vec<u32>> {
        let n = next.len();
        let mut num = vec![u32::MAX; n];
        let mut order = Vec::with_capacity(n);
        num[root] = 0;
        order.push(root);
        let mut code = Vec::with_capacity(9 * n + 1);
        code.push(n as u32);
        let mut i = 0;
        let mut tied = true;
        while i < order.len() {
            let d = order[i];
            for t in [next[d], twin(d)] {
                if num[t] == u32::MAX {
                    num[t] = order.len() as u32;
                    order.push(t);
                }
            }
            let lab = if self.labels.is_empty() { 0 } else { letter_key(self.labels[d]) as u32 + 1 };
            let mk = marks[d];
            let entry = [num[next[d]], num[twin(d)], lab, outer[d] as u32, mk.left.0, mk.left.1, mk.right.0, mk.right.1, extra[d]];
            let start = code.len();
            code.extend_from_slice(&entry);
            if tied {
                if let Some(b) = bound {
                    match code[start..].cmp(&b[start..start + entry.len()]) {
                        std::cmp::Ordering::Greater => return None,
                        std::cmp::Ordering::Less => tied = false,
                        std::cmp::Ordering::Equal => {}
                    }
                }
            }
            i += 1;
        }
        if tied && bound.is_some() {
            return None;
        }
        Some(code)
    }

    /// V - E + F including the outer face.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edge_count() as i64 + self.cycles.len() as i64
    }

    /// Glues a new face onto the outer boundary along the arc of `s` outer
    /// darts starting at outer-walk position `a`, closing it with a fresh
    /// path. The new face has length `len` and positive boundary given by
    /// its cycle (positive) or reversed twin cycle (negative) rotated by
    /// `start`. `path_labels` labels the fresh path in face order and is
    /// ignored for abstract diagrams.
    #[allow(clippy::too_many_arguments)]
    pub fn glue(&self, a: usize, s: usize, len: usize, relator: usize, positive: bool, start: usize, path_labels: &[Letter]) -> Result<Diagram> {
        let walk = self.outer_walk();
        let b = walk.len();
        if s == 0 || s >= b || s >= len {
            return Err(Error::Domain(format!("cannot glue a face of length {len} along {s} of {b} boundary edges")));
        }
        let t = len - s;
        let arc: Vec<usize> = (0..s).map(|k| walk[(a + k) % b]).collect();
        let before = walk[(a + b - 1) % b];
        let after = walk[(a + s) % b];
        let u = self.origin[arc[0]];
        let v = self.head(arc[s - 1]);
        let base = self.dart_count();
        let mut origin = self.origin.clone();
        let mut next = self.next.clone();
        let mut labels = self.labels.clone();
        let mut vc = self.vertex_count;
        // path vertices w_0 = v, w_1..w_{t-1} fresh, w_t = u
        let mut w = vec![v];
        for _ in 1..t {
            w.push(vc);
            vc += 1;
        }
        w.push(u);
        for k in 0..t {
            origin.push(w[k]);
            origin.push(w[k + 1]);
            next.push(0);
            next.push(0);
            if !self.labels.is_empty() {
                labels.push(path_labels[k]);
                labels.push(-path_labels[k]);
            }
        }
        let pd = |k: usize| base + 2 * k;
        let qd = |k: usize| base + 2 * k + 1;
        next[arc[s - 1]] = pd(0);
        for k in 0..t - 1 {
            next[pd(k)] = pd(k + 1);
        }
        next[pd(t - 1)] = arc[0];
        next[before] = qd(t - 1);
        for k in (1..t).rev() {
            next[qd(k)] = qd(k - 1);
        }
        next[qd(0)] = after;
        let mut cycle: Vec<usize> = arc.clone();
        cycle.extend((0..t).map(pd));
        let ordered: Vec<usize> = if positive { cycle } else { cycle.iter().rev().map(|&d| twin(d)).collect() };
        let boundary: Vec<usize> = (0..len).map(|j| ordered[(start + j) % len]).collect();
        let mut faces = self.faces.clone();
        faces.push(Face { relator, positive, boundary });
        let outer_start = if arc.contains(&self.outer_start) { qd(t - 1) } else { self.outer_start };
        Diagram::assemble(origin, next, labels, faces, outer_start, vc)
    }

    /// Drops dart labels.
    pub fn to_abstract(&self) -> Diagram {
        let mut d = self.clone();
        d.labels.clear();
        d
    }

    /// Same complex with new dart labels and face labels.
    pub fn relabeled(&self, labels: Vec<Letter>, relators: &[usize]) -> Diagram {
        let mut d = self.clone();
        d.labels = labels;
        for (f, &r) in d.faces.iter_mut().zip(relators) {
            f.relator = r;
        }
        d
    }

    /// Structural checks: involution and origins, Euler formula, connectivity,
    /// face boundaries matching cycles and forming reduced loops.
    pub fn check_structure(&self) -> Result<()> {
        let n = self.dart_count();
        let bad = |kind, msg: String| Err(Error::Validation { kind, msg });
        if n % 2 != 0 || self.origin.len() != n || (!self.labels.is_empty() && self.labels.len() != n) {
            return bad(ValidationKind::Involution, "dart arrays have inconsistent sizes".into());
        }
        for d in 0..n {
            if self.origin[self.next[d]] != self.head(d) {
                return bad(ValidationKind::Involution, format!("dart {d}: successor does not start at its head"));
            }
            if !self.labels.is_empty() && self.labels[twin(d)] != -self.labels[d] {
                return bad(ValidationKind::Involution, format!("dart {d}: inverse label mismatch"));
            }
            if self.origin[d] >= self.vertex_count {
                return bad(ValidationKind::Involution, format!("dart {d}: origin out of range"));
            }
        }
        // connectivity over darts
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        if n > 0 {
            seen[0] = true;
        }
        while let Some(d) = stack.pop() {
            for e in [self.next[d], twin(d)] {
                if !seen[e] {
                    seen[e] = true;
                    stack.push(e);
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            return bad(ValidationKind::Connectivity, "complex is disconnected".into());
        }
        // vertices are the rotation orbits
        let mut vseen = vec![false; n];
        let mut vertices = 0;
        for d in 0..n {
            if vseen[d] {
                continue;
            }
            vertices += 1;
            let mut e = d;
            while !vseen[e] {
                vseen[e] = true;
                if self.origin[e] != self.origin[d] {
                    return bad(ValidationKind::Involution, format!("rotation at dart {d} leaves its vertex"));
                }
                e = self.next_at_vertex(e);
            }
        }
        if vertices != self.vertex_count {
            return bad(ValidationKind::Euler, format!("{vertices} rotation orbits for {} vertices", self.vertex_count));
        }
        if self.euler_characteristic() != 2 {
            return bad(ValidationKind::Euler, format!("V - E + F = {}", self.euler_characteristic()));
        }
        if self.cycles.len() != self.faces.len() + 1 {
            return bad(ValidationKind::Euler, "faces do not match the cycles of the map".into());
        }
        let mut used = vec![false; self.cycles.len()];
        used[self.outer_cycle_id()] = true;
        for (i, f) in self.faces.iter().enumerate() {
            if f.boundary.is_empty() || f.boundary.iter().any(|&d| d >= n) {
                return bad(ValidationKind::FaceLabel, format!("face {i} has an invalid boundary"));
            }
            let cyc = self.face_cycle(i);
            let id = self.cycle_of[cyc[0]];
            let c = &self.cycles[id];
            let k = c.len();
            let at = c.iter().position(|&d| d == cyc[0]).unwrap();
            if k != cyc.len() || (0..k).any(|j| c[(at + j) % k] != cyc[j]) || used[id] {
                return bad(ValidationKind::FaceLabel, format!("face {i} boundary is not a face of the map"));
            }
            used[id] = true;
            if k > 1 && (0..k).any(|j| cyc[(j + 1) % k] == twin(cyc[j])) {
                return bad(ValidationKind::FaceLabel, format!("face {i} boundary backtracks"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> DiagramJson {
        let darts = (0..self.dart_count())
            .map(|d| DartJson {
                id: d,
                inverse: twin(d),
                next_at_vertex: self.next_at_vertex(d),
                origin: self.origin[d],
                label: if self.labels.is_empty() { None } else { Some(letter_char(self.labels[d]).to_string()) },
            })
            .collect();
        let mut faces: Vec<FaceJson> = self
            .faces
            .iter()
            .map(|f| FaceJson { darts: f.boundary.clone(), relator: Some(f.relator), sign: Some(if f.positive { 1 } else { -1 }) })
            .collect();
        faces.push(FaceJson { darts: self.outer_walk(), relator: None, sign: None });
        DiagramJson { vertices: self.vertex_count, darts, outer_face: faces.len() - 1, faces, p: None }
    }

    pub fn from_json(j: &DiagramJson) -> Result<Diagram> {
        let n = j.darts.len();
        let inv = |msg: String| Error::Validation { kind: ValidationKind::Involution, msg };
        let mut slot = vec![usize::MAX; n];
        for (i, d) in j.darts.iter().enumerate() {
            if d.id >= n || slot[d.id] != usize::MAX {
                return Err(inv(format!("dart ids must be a permutation of 0..{n}")));
            }
            slot[d.id] = i;
        }
        let dart = |id: usize| &j.darts[slot[id]];
        // renumber so that twins are d, d ^ 1
        let mut new_id = vec![usize::MAX; n];
        let mut count = 0;
        for id in 0..n {
            if new_id[id] != usize::MAX {
                continue;
            }
            let t = dart(id).inverse;
            if t >= n || t == id || dart(t).inverse != id {
                return Err(inv(format!("dart {id}: inverse is not an involution")));
            }
            new_id[id] = count;
            new_id[t] = count + 1;
            count += 2;
        }
        let mut origin = vec![0; n];
        let mut next = vec![0; n];
        let mut labels = Vec::new();
        let labelled = j.darts.iter().any(|d| d.label.is_some());
        if labelled {
            labels = vec![0; n];
        }
        for id in 0..n {
            let d = dart(id);
            let nid = new_id[id];
            origin[nid] = d.origin;
            if d.next_at_vertex >= n {
                return Err(inv(format!("dart {id}: next_at_vertex out of range")));
            }
            // next(twin(d)) = rotation(d)  =>  next(x) = rotation(twin(x))
            next[twin(nid)] = new_id[d.next_at_vertex];
            if labelled {
                let s = d.label.as_deref().ok_or_else(|| inv(format!("dart {id} has no label")))?;
                let mut cs = s.chars();
                labels[nid] = match (cs.next().and_then(parse_letter), cs.next()) {
                    (Some(x), None) => x,
                    _ => return Err(inv(format!("dart {id}: bad label {s:?}"))),
                };
            }
        }
        let mut perm = vec![false; n];
        for &x in &next {
            if perm[x] {
                return Err(inv("next_at_vertex is not a permutation".into()));
            }
            perm[x] = true;
        }
        if j.outer_face >= j.faces.len() {
            return Err(Error::Validation { kind: ValidationKind::FaceLabel, msg: "outer face id out of range".into() });
        }
        let mut faces = Vec::new();
        let mut outer_start = None;
        for (i, f) in j.faces.iter().enumerate() {
            if f.darts.iter().any(|&d| d >= n) || f.darts.is_empty() {
                return Err(Error::Validation { kind: ValidationKind::FaceLabel, msg: format!("face {i}: bad dart list") });
            }
            let ds: Vec<usize> = f.darts.iter().map(|&d| new_id[d]).collect();
            if i == j.outer_face {
                outer_start = Some(ds[0]);
                continue;
            }
            let relator = f.relator.ok_or_else(|| Error::Validation { kind: ValidationKind::FaceLabel, msg: format!("face {i}: missing relator") })?;
            let positive = match f.sign {
                Some(1) => true,
                Some(-1) => false,
                _ => return Err(Error::Validation { kind: ValidationKind::FaceLabel, msg: format!("face {i}: sign must be 1 or -1") }),
            };
            faces.push(Face { relator, positive, boundary: ds });
        }
        let vertex_count = j.vertices;
        if origin.iter().any(|&o| o >= vertex_count) {
            return Err(inv("origin out of range".into()));
        }
        let d = Diagram::assemble(origin, next, labels, faces, outer_start.unwrap(), vertex_count)?;
        let outer = &j.faces[j.outer_face].darts;
        let walk = d.outer_walk();
        if walk.len() != outer.len() || walk.iter().zip(outer).any(|(&a, &b)| a != new_id[b]) {
            return Err(Error::Validation { kind: ValidationKind::FaceLabel, msg: "outer face darts are not a face of the map".into() });
        }
        d.check_structure()?;
        Ok(d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DartJson {
    pub id: usize,
    pub inverse: usize,
    pub next_at_vertex: usize,
    pub origin: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceJson {
    pub darts: Vec<usize>,
    #[serde(default)]
    pub relator: Option<usize>,
    #[serde(default)]
    pub sign: Option<i8>,
}

/// Boundary subpath on the outer walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathJson {
    pub start: usize,
    pub length: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramJson {
    pub vertices: usize,
    pub darts: Vec<DartJson>,
    pub faces: Vec<FaceJson>,
    pub outer_face: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<PathJson>,
}

pub fn parse_diagram_json(text: &str) -> Result<(Diagram, Option<PathJson>)> {
    let j: DiagramJson = serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
    let d = Diagram::from_json(&j)?;
    if let Some(p) = j.p {
        if p.length > d.boundary_length() || (d.boundary_length() > 0 && p.start >= d.boundary_length()) {
            return Err(Error::Domain("boundary path does not fit on the outer walk".into()));
        }
    }
    Ok((d, j.p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polygon_structure() {
        for len in 1..6 {
            let d = Diagram::polygon(len, 0, None).unwrap();
            d.check_structure().unwrap();
            assert_eq!(d.boundary_length(), len);
            assert_eq!(d.euler_characteristic(), 2);
        }
    }

    #[test]
    fn glue_keeps_a_disk() {
        let d = Diagram::polygon(4, 0, None).unwrap();
        let e = d.glue(1, 2, 5, 1, false, 3, &[]).unwrap();
        e.check_structure().unwrap();
        assert_eq!(e.boundary_length(), 4 + 5 - 4);
        assert_eq!(e.face_count(), 2);
    }

    #[test]
    fn json_round_trip() {
        let d = Diagram::polygon(3, 0, Some(&[1, 2, -1])).unwrap();
        let e = d.glue(0, 1, 4, 0, true, 2, &[3, 1, 2]).unwrap_or(d.clone());
        let j = serde_json::to_string(&e.to_json()).unwrap();
        let (back, _) = parse_diagram_json(&j).unwrap();
        assert_eq!(back.canonical_code(), e.canonical_code());
    }
}
