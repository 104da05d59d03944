//! X-labeled graphs: wedges of words, Stallings folding, readable words,
//! arc statistics, and exhaustive generation of small reduced graphs and of
//! topological types.

use crate::error::{Error, Result};
use crate::words::{letter_at, letter_char, letter_key, parse_letter, Letter, Word};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub label: Letter,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    base: Option<usize>,
}

/// A directed side of an edge: (source, label, target).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dart {
    pub src: usize,
    pub label: Letter,
    pub dst: usize,
    pub edge: usize,
    pub forward: bool,
}

impl LabeledGraph {
    pub fn new(vertex_count: usize, edges: Vec<Edge>, base: Option<usize>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::Domain("a graph needs at least one vertex".into()));
        }
        for e in &edges {
            if e.src >= vertex_count || e.dst >= vertex_count || e.label == 0 {
                return Err(Error::Domain(format!("bad edge {e:?} for {vertex_count} vertices")));
            }
        }
        if base.is_some_and(|b| b >= vertex_count) {
            return Err(Error::Domain("base vertex out of range".into()));
        }
        Ok(LabeledGraph { vertex_count, edges, base })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// |Γ|: number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn base(&self) -> Option<usize> {
        self.base
    }

    pub fn max_label(&self) -> usize {
        self.edges.iter().map(|e| e.label.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn darts(&self) -> Vec<Dart> {
        let mut v = Vec::with_capacity(2 * self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            v.push(Dart { src: e.src, label: e.label, dst: e.dst, edge: i, forward: true });
            v.push(Dart { src: e.dst, label: -e.label, dst: e.src, edge: i, forward: false });
        }
        v
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertex_count];
        for e in &self.edges {
            d[e.src] += 1;
            d[e.dst] += 1;
        }
        d
    }

    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for e in &self.edges {
            adj[e.src].push(e.dst);
            adj[e.dst].push(e.src);
        }
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// No two darts with the same source and label.
    pub fn is_deterministic(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.darts().iter().all(|d| seen.insert((d.src, d.label)))
    }

    /// Deterministic and without degree-1 vertices.
    pub fn is_reduced(&self) -> bool {
        self.is_deterministic() && self.degrees().iter().all(|&d| d != 1)
    }

    /// Transition table indexed by vertex and letter key; only meaningful
    /// for deterministic graphs.
    fn transitions(&self, m: usize) -> Vec<Vec<Option<usize>>> {
        let mut t = vec![vec![None; 2 * m]; self.vertex_count];
        for d in self.darts() {
            t[d.src][letter_key(d.label)] = Some(d.dst);
        }
        t
    }

    fn step_set(&self, from: &[bool], x: Letter) -> Vec<bool> {
        let mut out = vec![false; self.vertex_count];
        for d in self.darts() {
            if d.label == x && from[d.src] {
                out[d.dst] = true;
            }
        }
        out
    }

    /// Whether w labels a path starting somewhere in Γ.
    pub fn reads(&self, w: &Word) -> bool {
        let mut s = vec![true; self.vertex_count];
        for &x in w.letters() {
            s = self.step_set(&s, x);
            if !s.iter().any(|&b| b) {
                return false;
            }
        }
        true
    }

    /// Length of the longest prefix of w that labels a path in Γ.
    pub fn readable_prefix(&self, w: &[Letter]) -> usize {
        let mut s = vec![true; self.vertex_count];
        for (i, &x) in w.iter().enumerate() {
            s = self.step_set(&s, x);
            if !s.iter().any(|&b| b) {
                return i;
            }
        }
        w.len()
    }

    /// Whether w labels a closed path at v.
    pub fn reads_loop_at(&self, v: usize, w: &Word) -> bool {
        let mut s = vec![false; self.vertex_count];
        s[v] = true;
        for &x in w.letters() {
            s = self.step_set(&s, x);
        }
        s[v]
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("V {}\n", self.vertex_count);
        if let Some(b) = self.base {
            if b != 0 {
                s.push_str(&format!("B {b}\n"));
            }
        }
        for e in &self.edges {
            s.push_str(&format!("E {} {} {}\n", e.src, e.dst, letter_char(e.label)));
        }
        s
    }
}

/// Parses `V n` / `E src dst label` lines; an optional `B v` line sets the
/// base (default 0).
pub fn parse_graph(text: &str) -> Result<LabeledGraph> {
    let mut n: Option<usize> = None;
    let mut base = 0;
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let perr = |msg: String| Error::Parse { line: i + 1, msg };
        let tok: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<usize>().map_err(|e| perr(format!("{s:?}: {e}")));
        match tok[0] {
            "V" if tok.len() == 2 => {
                if n.is_some() {
                    return Err(perr("duplicate V line".into()));
                }
                n = Some(num(tok[1])?);
            }
            "B" if tok.len() == 2 => base = num(tok[1])?,
            "E" if tok.len() == 4 => {
                let mut cs = tok[3].chars();
                let label = match (cs.next().and_then(parse_letter), cs.next()) {
                    (Some(x), None) => x,
                    _ => return Err(perr(format!("bad label {:?}", tok[3]))),
                };
                edges.push(Edge { src: num(tok[1])?, dst: num(tok[2])?, label });
            }
            _ => return Err(perr(format!("unrecognised line {line:?}"))),
        }
    }
    let n = n.ok_or(Error::Parse { line: 0, msg: "missing V line".into() })?;
    LabeledGraph::new(n, edges, Some(base))
}

/// Wedge of one labeled cycle per word at base vertex 0. Words need not be
/// reduced; folding takes care of cancellation.
pub fn wedge_of_words(words: &[Word]) -> Result<LabeledGraph> {
    let mut n = 1;
    let mut edges = Vec::new();
    for w in words {
        if w.is_empty() {
            return Err(Error::Domain("wedge_of_words: empty word".into()));
        }
        let mut prev = 0;
        for (i, &x) in w.letters().iter().enumerate() {
            let next = if i + 1 == w.len() {
                0
            } else {
                n += 1;
                n - 1
            };
            edges.push(Edge { src: prev, dst: next, label: x });
            prev = next;
        }
    }
    LabeledGraph::new(n, edges, Some(0))
}

pub fn betti(g: &LabeledGraph) -> Result<i64> {
    if !g.is_connected() {
        return Err(Error::Precondition("betti number of a disconnected graph".into()));
    }
    Ok(g.edge_count() as i64 - g.vertex_count() as i64 + 1)
}

struct Folder {
    parent: Vec<usize>,
    adj: Vec<BTreeMap<Letter, usize>>,
    work: Vec<(usize, usize, Letter)>,
}

impl Folder {
    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        let (keep, lose) = if self.adj[a].len() >= self.adj[b].len() { (a, b) } else { (b, a) };
        self.parent[lose] = keep;
        let moved = std::mem::take(&mut self.adj[lose]);
        for (x, u) in moved {
            self.work.push((keep, u, x));
        }
    }

    fn attach(&mut self, s: usize, t: usize, x: Letter) {
        match self.adj[s].get(&x).copied() {
            Some(u) => {
                let u = self.find(u);
                if u != t {
                    self.union(u, t);
                }
            }
            None => {
                self.adj[s].insert(x, t);
            }
        }
    }

    fn run(&mut self) {
        while let Some((s, t, x)) = self.work.pop() {
            let (s, t) = (self.find(s), self.find(t));
            self.attach(s, t, x);
            let (s, t) = (self.find(s), self.find(t));
            self.attach(t, s, -x);
        }
    }
}

/// Folds and prunes. With `keep_base` the base vertex survives pruning.
fn fold_impl(g: &LabeledGraph, keep_base: bool) -> Result<LabeledGraph> {
    if !g.is_connected() {
        return Err(Error::Precondition("fold needs a connected graph".into()));
    }
    let n = g.vertex_count();
    let mut f = Folder { parent: (0..n).collect(), adj: vec![BTreeMap::new(); n], work: Vec::new() };
    for e in g.edges().iter().rev() {
        f.work.push((e.src, e.dst, e.label));
    }
    f.run();
    let mut base = f.find(g.base().unwrap_or(0));
    // Rewrite adjacency onto representatives.
    let reps: Vec<usize> = (0..n).filter(|&v| f.find(v) == v).collect();
    let mut adj: BTreeMap<usize, BTreeMap<Letter, usize>> = BTreeMap::new();
    for &v in &reps {
        let row: BTreeMap<Letter, usize> = f.adj[v].clone().into_iter().map(|(x, u)| (x, f.find(u))).collect();
        adj.insert(v, row);
    }
    let mut queue: Vec<usize> = reps.iter().copied().filter(|v| adj[v].len() == 1).collect();
    while let Some(v) = queue.pop() {
        if !adj.contains_key(&v) || adj[&v].len() != 1 || (keep_base && v == base) {
            continue;
        }
        let (x, u) = adj.remove(&v).unwrap().into_iter().next().unwrap();
        adj.get_mut(&u).unwrap().remove(&-x);
        if v == base {
            base = u;
        }
        if adj[&u].len() == 1 {
            queue.push(u);
        }
    }
    // Renumber breadth-first from the base in letter order.
    let mut num: BTreeMap<usize, usize> = BTreeMap::new();
    let mut order = vec![base];
    num.insert(base, 0);
    let mut q = VecDeque::from([base]);
    while let Some(v) = q.pop_front() {
        let mut row: Vec<(Letter, usize)> = adj[&v].iter().map(|(&x, &u)| (x, u)).collect();
        row.sort_by_key(|&(x, _)| letter_key(x));
        for (_, u) in row {
            if !num.contains_key(&u) {
                num.insert(u, order.len());
                order.push(u);
                q.push_back(u);
            }
        }
    }
    let mut edges = Vec::new();
    for (&v, row) in &adj {
        for (&x, &u) in row {
            let (a, b) = (num[&v], num[&u]);
            if x > 0 {
                edges.push(Edge { src: a, dst: b, label: x });
            }
        }
    }
    edges.sort();
    LabeledGraph::new(order.len(), edges, Some(0))
}

/// Stallings folding followed by removal of every degree-1 vertex, so the
/// result is reduced (or a single vertex). Base loops survive up to cyclic
/// reduction; the base moves onto the core when its hair is pruned.
pub fn fold(g: &LabeledGraph) -> Result<LabeledGraph> {
    fold_impl(g, false)
}

/// Folding that never prunes the base vertex, so every base loop with
/// nonempty free reduction is still a base loop of the result.
pub fn fold_based(g: &LabeledGraph) -> Result<LabeledGraph> {
    fold_impl(g, true)
}

/// BFS code of a deterministic connected graph from a root: vertex count,
/// largest generator index, then each vertex's targets per letter slot
/// (0 for no edge, k+1 for the k-th visited vertex).
pub fn code_from_root(g: &LabeledGraph, root: usize) -> Vec<u32> {
    let m = g.max_label();
    let t = g.transitions(m);
    code_with(&t, g.vertex_count(), m, root)
}

fn code_with(t: &[Vec<Option<usize>>], n: usize, m: usize, root: usize) -> Vec<u32> {
    let mut num = vec![u32::MAX; n];
    let mut order = Vec::with_capacity(n);
    num[root] = 0;
    order.push(root);
    let mut code = vec![n as u32, m as u32];
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        for k in 0..2 * m {
            match t[v][k] {
                None => code.push(0),
                Some(u) => {
                    if num[u] == u32::MAX {
                        num[u] = order.len() as u32;
                        order.push(u);
                    }
                    code.push(num[u] + 1);
                }
            }
        }
        i += 1;
    }
    code
}

/// Minimum code over all roots and the number of roots attaining it
/// (the automorphism group order).
pub fn canonical_code(g: &LabeledGraph) -> Result<(Vec<u32>, usize)> {
    if !g.is_deterministic() || !g.is_connected() {
        return Err(Error::Precondition("canonical code needs a folded connected graph".into()));
    }
    let m = g.max_label();
    let t = g.transitions(m);
    let mut best: Option<Vec<u32>> = None;
    let mut aut = 0;
    for r in 0..g.vertex_count() {
        let c = code_with(&t, g.vertex_count(), m, r);
        match &best {
            Some(b) if c > *b => {}
            Some(b) if c == *b => aut += 1,
            _ => {
                best = Some(c);
                aut = 1;
            }
        }
    }
    Ok((best.unwrap(), aut))
}

pub fn isomorphic(a: &LabeledGraph, b: &LabeledGraph) -> Result<bool> {
    Ok(canonical_code(a)?.0 == canonical_code(b)?.0)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReadableCount {
    /// Label-distinct reduced words of the given length.
    pub words: u128,
    /// Reduced paths of the given length.
    pub paths: u128,
}

/// Counts reduced words of length exactly L readable on g, and reduced
/// paths of that length.
pub fn readable_words(g: &LabeledGraph, len: usize) -> Result<ReadableCount> {
    if !g.is_connected() {
        return Err(Error::Precondition("readable_words needs a connected graph".into()));
    }
    let darts = g.darts();
    // paths
    let mut cur: Vec<u128> = vec![1; darts.len()];
    let paths = if len == 0 {
        g.vertex_count() as u128
    } else {
        for _ in 1..len {
            let mut next = vec![0u128; darts.len()];
            for (i, d) in darts.iter().enumerate() {
                if cur[i] == 0 {
                    continue;
                }
                for (j, e) in darts.iter().enumerate() {
                    if e.src == d.dst && !(e.edge == d.edge && e.forward != d.forward) {
                        next[j] += cur[i];
                    }
                }
            }
            cur = next;
        }
        cur.iter().sum()
    };
    let mut words = 0u128;
    let m = g.max_label();
    let start = vec![true; g.vertex_count()];
    word_dfs(g, m, &start, 0, len, &mut |_| words += 1);
    Ok(ReadableCount { words, paths })
}

/// All reduced words of length exactly L readable on g, in shortlex order.
pub fn readable_word_list(g: &LabeledGraph, len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let start = vec![true; g.vertex_count()];
    word_dfs(g, g.max_label(), &start, 0, len, &mut |w| out.push(Word(w.to_vec())));
    out
}

fn word_dfs(g: &LabeledGraph, m: usize, set: &[bool], prev: Letter, left: usize, emit: &mut dyn FnMut(&[Letter])) {
    fn go(g: &LabeledGraph, m: usize, set: &[bool], prev: Letter, left: usize, buf: &mut Vec<Letter>, emit: &mut dyn FnMut(&[Letter])) {
        if left == 0 {
            emit(buf);
            return;
        }
        for k in 0..2 * m {
            let x = letter_at(k);
            if x == -prev {
                continue;
            }
            let s = g.step_set(set, x);
            if s.iter().any(|&b| b) {
                buf.push(x);
                go(g, m, &s, x, left - 1, buf, emit);
                buf.pop();
            }
        }
    }
    let mut buf = Vec::new();
    go(g, m, set, prev, left, &mut buf, emit);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphStats {
    pub degree3plus: usize,
    pub maximal_arcs: usize,
}

/// Branch vertices and maximal arcs (paths whose interior vertices have
/// degree 2 and whose ends have degree at least 3).
pub fn graph_stats(g: &LabeledGraph) -> Result<GraphStats> {
    if !g.is_connected() {
        return Err(Error::Precondition("graph_stats needs a connected graph".into()));
    }
    let deg = g.degrees();
    if deg.contains(&1) {
        return Err(Error::Precondition("graph_stats: degree-1 vertex present".into()));
    }
    let r = betti(g)?;
    let degree3plus = deg.iter().filter(|&&d| d >= 3).count();
    let arc_ends = g.darts().iter().filter(|d| deg[d.src] >= 3).count();
    let stats = GraphStats { degree3plus, maximal_arcs: arc_ends / 2 };
    if r >= 2 {
        let bound = 2 * (r as usize - 1);
        if stats.degree3plus > bound || stats.maximal_arcs > 3 * (r as usize - 1) {
            return Err(Error::Invariant(format!("arc bounds fail for b_1 = {r}: {stats:?}")));
        }
    }
    Ok(stats)
}

/// An unlabeled multigraph with loops; edges as (u, v) with u ≤ v.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TopoGraph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl TopoGraph {
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertices];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn topo_canonical(_n: usize, edges: &[(usize, usize)], perms: &[Vec<usize>]) -> Vec<(usize, usize)> {
    perms
        .iter()
        .map(|p| {
            let mut e: Vec<(usize, usize)> =
                edges.iter().map(|&(u, v)| (p[u].min(p[v]), p[u].max(p[v]))).collect();
            e.sort();
            e
        })
        .min()
        .unwrap()
}

/// Homeomorphism types of connected graphs with b_1 = r and all degrees
/// at least 3; for r = 1 the single type is the cycle, returned as one
/// vertex with a loop.
pub fn enumerate_topological_types(r: usize) -> Result<Vec<TopoGraph>> {
    if r == 0 {
        return Err(Error::Domain("b_1 must be at least 1".into()));
    }
    crate::error::feasibility("topological types with b_1 = r", r as f64, 4.0)?;
    if r == 1 {
        return Ok(vec![TopoGraph { vertices: 1, edges: vec![(0, 0)] }]);
    }
    let mut found = BTreeSet::new();
    for n in 1..=2 * (r - 1) {
        let e = n + r - 1;
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u..n).map(move |v| (u, v))).collect();
        let perms = permutations(n);
        let mut chosen = Vec::with_capacity(e);
        multisets(&pairs, 0, e, &mut chosen, &mut |edges| {
            let g = TopoGraph { vertices: n, edges: edges.to_vec() };
            if g.degrees().iter().all(|&d| d >= 3) && topo_connected(&g) {
                found.insert((n, topo_canonical(n, edges, &perms)));
            }
        });
    }
    Ok(found.into_iter().map(|(vertices, edges)| TopoGraph { vertices, edges }).collect())
}

fn multisets(pairs: &[(usize, usize)], from: usize, left: usize, chosen: &mut Vec<(usize, usize)>, f: &mut dyn FnMut(&[(usize, usize)])) {
    if left == 0 {
        f(chosen);
        return;
    }
    for i in from..pairs.len() {
        chosen.push(pairs[i]);
        multisets(pairs, i, left - 1, chosen, f);
        chosen.pop();
    }
}

fn topo_connected(g: &TopoGraph) -> bool {
    let mut parent: Vec<usize> = (0..g.vertices).collect();
    fn find(p: &mut [usize], v: usize) -> usize {
        if p[v] != v {
            let r = find(p, p[v]);
            p[v] = r;
        }
        p[v]
    }
    for &(u, v) in &g.edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        parent[a] = b;
    }
    let r0 = find(&mut parent, 0);
    (0..g.vertices).all(|v| find(&mut parent, v) == r0)
}

pub const MAX_ENUMERATED_EDGES: usize = 12;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Unset,
    Empty,
    To(usize),
}

struct GraphGen {
    m: usize,
    max_edges: usize,
    max_betti: usize,
    slots: Vec<Vec<Slot>>,
    edges: usize,
    out: Vec<LabeledGraph>,
}

impl GraphGen {
    fn b1(&self) -> i64 {
        self.edges as i64 - self.slots.len() as i64 + 1
    }

    fn rec(&mut self, v: usize, k: usize) {
        let n = self.slots.len();
        if v == n {
            self.finish();
            return;
        }
        if k == 2 * self.m {
            let deg = self.slots[v].iter().filter(|s| matches!(s, Slot::To(_))).count();
            if deg != 1 {
                self.rec(v + 1, 0);
            }
            return;
        }
        if self.slots[v][k] != Slot::Unset {
            self.rec(v, k + 1);
            return;
        }
        let x = letter_at(k);
        let kx = letter_key(-x);
        self.slots[v][k] = Slot::Empty;
        self.rec(v, k + 1);
        if self.edges < self.max_edges {
            self.edges += 1;
            for w in v..n {
                if self.slots[w][kx] == Slot::Unset && self.b1() <= self.max_betti as i64 {
                    self.slots[v][k] = Slot::To(w);
                    self.slots[w][kx] = Slot::To(v);
                    self.rec(v, k + 1);
                    self.slots[w][kx] = Slot::Unset;
                }
            }
            if n < self.max_edges {
                let mut row = vec![Slot::Unset; 2 * self.m];
                row[kx] = Slot::To(v);
                self.slots.push(row);
                self.slots[v][k] = Slot::To(n);
                self.rec(v, k + 1);
                self.slots.pop();
            }
            self.edges -= 1;
        }
        self.slots[v][k] = Slot::Unset;
    }

    fn finish(&mut self) {
        if self.edges == 0 || self.b1() > self.max_betti as i64 {
            return;
        }
        let n = self.slots.len();
        let t: Vec<Vec<Option<usize>>> = self
            .slots
            .iter()
            .map(|row| row.iter().map(|s| if let Slot::To(u) = s { Some(*u) } else { None }).collect())
            .collect();
        let c0 = code_with(&t, n, self.m, 0);
        if (1..n).any(|r| code_with(&t, n, self.m, r) < c0) {
            return;
        }
        let mut edges = Vec::new();
        for (v, row) in t.iter().enumerate() {
            for (k, s) in row.iter().enumerate() {
                let x = letter_at(k);
                if let Some(u) = *s {
                    if x > 0 {
                        edges.push(Edge { src: v, dst: u, label: x });
                    }
                }
            }
        }
        self.out.push(LabeledGraph { vertex_count: n, edges, base: Some(0) });
    }
}

/// One representative per isomorphism class of reduced connected graphs
/// over m generators with 1 ≤ |Γ| ≤ max_edges and b_1 ≤ max_betti.
pub fn enumerate_reduced_graphs(m: usize, max_edges: usize, max_betti: usize) -> Result<Vec<LabeledGraph>> {
    crate::error::feasibility("edges in reduced-graph enumeration", max_edges as f64, MAX_ENUMERATED_EDGES as f64)?;
    if m < 1 {
        return Err(Error::Domain("need at least one generator".into()));
    }
    let mut gen = GraphGen { m, max_edges, max_betti, slots: vec![vec![Slot::Unset; 2 * m]], edges: 0, out: Vec::new() };
    gen.rec(0, 0);
    Ok(gen.out)
}

/// Number of vertex-labeled copies of g: V!/|Aut(g)|.
pub fn labeled_copies(g: &LabeledGraph) -> Result<f64> {
    let (_, aut) = canonical_code(g)?;
    let fact: f64 = (1..=g.vertex_count()).map(|k| k as f64).product();
    Ok(fact / aut as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::parse_word;

    fn ws(v: &[&str]) -> Vec<Word> {
        v.iter().map(|s| parse_word(s).unwrap()).collect()
    }

    #[test]
    fn wedges() {
        let g = wedge_of_words(&ws(&["a"])).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count(), betti(&g).unwrap()), (1, 1, 1));
        let g = wedge_of_words(&ws(&["a", "b"])).unwrap();
        assert_eq!((g.edge_count(), betti(&g).unwrap()), (2, 2));
        let g = wedge_of_words(&ws(&["abA"])).unwrap();
        assert_eq!((g.vertex_count(), betti(&g).unwrap()), (3, 1));
        assert!(wedge_of_words(&[Word::empty()]).is_err());
    }

    #[test]
    fn folding_examples() {
        let g = fold_based(&wedge_of_words(&ws(&["ab", "ac"])).unwrap()).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (2, 3));
        assert!(g.reads_loop_at(0, &parse_word("ab").unwrap()));
        let g = fold(&wedge_of_words(&ws(&["aA"])).unwrap()).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (1, 0));
        let g = fold(&wedge_of_words(&ws(&["abA"])).unwrap()).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (1, 1));
        let g = fold_based(&wedge_of_words(&ws(&["abA"])).unwrap()).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (2, 2));
    }

    #[test]
    fn stats_examples() {
        let cycle = wedge_of_words(&ws(&["abab"])).unwrap();
        assert_eq!(graph_stats(&cycle).unwrap(), GraphStats { degree3plus: 0, maximal_arcs: 0 });
        let eight = wedge_of_words(&ws(&["a", "b"])).unwrap();
        assert_eq!(graph_stats(&eight).unwrap(), GraphStats { degree3plus: 1, maximal_arcs: 2 });
        let theta = parse_graph("V 2\nE 0 1 a\nE 0 1 b\nE 0 1 c\n").unwrap();
        assert_eq!(graph_stats(&theta).unwrap(), GraphStats { degree3plus: 2, maximal_arcs: 3 });
        let hair = parse_graph("V 2\nE 0 0 a\nE 0 1 b\n").unwrap();
        assert!(matches!(graph_stats(&hair), Err(Error::Precondition(_))));
    }

    #[test]
    fn topological_counts() {
        assert_eq!(enumerate_topological_types(1).unwrap().len(), 1);
        assert_eq!(enumerate_topological_types(2).unwrap().len(), 3);
        assert!(enumerate_topological_types(5).is_err());
    }

    #[test]
    fn one_edge_graphs() {
        assert_eq!(enumerate_reduced_graphs(2, 1, 1).unwrap().len(), 2);
    }

    #[test]
    fn readable_small() {
        let loop_a = wedge_of_words(&ws(&["a"])).unwrap();
        for l in 1..6 {
            assert_eq!(readable_words(&loop_a, l).unwrap(), ReadableCount { words: 2, paths: 2 });
        }
        let eight = wedge_of_words(&ws(&["a", "b"])).unwrap();
        assert_eq!(readable_words(&eight, 1).unwrap().words, 4);
        let aa = wedge_of_words(&ws(&["aa"])).unwrap();
        assert_eq!(readable_words(&aa, 3).unwrap(), ReadableCount { words: 2, paths: 4 });
    }

    #[test]
    fn graph_text_round_trip() {
        let g = parse_graph("# theta\nV 2\nE 0 1 a\nE 1 0 B\n").unwrap();
        assert_eq!(parse_graph(&g.to_text()).unwrap(), g);
        assert!(parse_graph("E 0 1 a").is_err());
        assert!(parse_graph("V 1\nE 0 1 a").is_err());
    }
}
