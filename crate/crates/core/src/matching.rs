//! Mono enumeration (subgraph matching with injective edge maps), overlap
//! enumeration between two graphs, and bounded enumeration of graph
//! extensions used by the brute-force condition checks.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use crate::error::GraphError;
use crate::graph::{Cospan, Edge, Graph, Label, Morphism, Span, TypeGraph, TypedGraph};

/// A partial pre-assignment of pattern elements to target elements.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Seed {
    pub v: Vec<Option<usize>>,
    pub e: Vec<Option<usize>>,
}

impl Seed {
    pub fn empty(pattern: &Graph) -> Self {
        Seed { v: vec![None; pattern.vertex_count()], e: vec![None; pattern.edge_count()] }
    }

    /// Seed fixing `g ∘ f = h` for monos `f: X → pattern`, `h: X → target`.
    pub fn along(pattern: &Graph, f: &Morphism, h: &Morphism) -> Self {
        let mut s = Seed::empty(pattern);
        for (x, &y) in f.vmap.iter().enumerate() {
            s.v[y] = Some(h.vmap[x]);
        }
        for (x, &y) in f.emap.iter().enumerate() {
            s.e[y] = Some(h.emap[x]);
        }
        s
    }
}

type Buckets = BTreeMap<(usize, usize, Label), Vec<usize>>;

fn buckets(g: &Graph) -> Buckets {
    let mut b: Buckets = BTreeMap::new();
    for (i, e) in g.edges().iter().enumerate() {
        b.entry((e.ends.0, e.ends.1, e.label)).or_default().push(i);
    }
    b
}

fn bucket_len(b: &Buckets, x: usize, y: usize, l: Label) -> usize {
    let k = if x <= y { (x, y, l) } else { (y, x, l) };
    b.get(&k).map_or(0, Vec::len)
}

struct Matcher<'a> {
    pattern: &'a Graph,
    target: &'a Graph,
    seed: Seed,
    tbuckets: Buckets,
    tdegree: Vec<usize>,
    pdegree: Vec<usize>,
    /// For each pattern vertex: (other endpoint, label, multiplicity).
    padj: Vec<Vec<(usize, Label, usize)>>,
    order: Vec<usize>,
    vmap: Vec<usize>,
    vused: Vec<bool>,
    emap: Vec<usize>,
    eused: Vec<bool>,
}

impl<'a> Matcher<'a> {
    fn new(pattern: &'a Graph, target: &'a Graph, seed: Seed) -> Self {
        let pb = buckets(pattern);
        let mut padj = vec![Vec::new(); pattern.vertex_count()];
        for (&(a, b, l), es) in &pb {
            padj[a].push((b, l, es.len()));
            if a != b {
                padj[b].push((a, l, es.len()));
            }
        }
        let pdegree: Vec<usize> = (0..pattern.vertex_count()).map(|v| pattern.degree(v)).collect();
        let tdegree = (0..target.vertex_count()).map(|v| target.degree(v)).collect();
        // Fixed vertices first, then greedily the vertex most connected to the
        // already ordered ones.
        let n = pattern.vertex_count();
        let mut order: Vec<usize> = (0..n).filter(|&v| seed.v[v].is_some()).collect();
        let mut placed = vec![false; n];
        order.iter().for_each(|&v| placed[v] = true);
        while order.len() < n {
            let best = (0..n)
                .filter(|&v| !placed[v])
                .max_by_key(|&v| {
                    let links = padj[v].iter().filter(|(q, _, _)| placed[*q] && *q != v).count();
                    (links, pdegree[v], core::cmp::Reverse(v))
                })
                .expect("unplaced vertex exists");
            placed[best] = true;
            order.push(best);
        }
        Matcher {
            pattern,
            target,
            seed,
            tbuckets: buckets(target),
            tdegree,
            pdegree,
            padj,
            order,
            vmap: vec![usize::MAX; n],
            vused: vec![false; target.vertex_count()],
            emap: vec![usize::MAX; pattern.edge_count()],
            eused: vec![false; target.edge_count()],
        }
    }

    fn feasible(&self, p: usize, t: usize) -> bool {
        if self.vused[t] || self.pattern.vertex_label(p) != self.target.vertex_label(t) || self.tdegree[t] < self.pdegree[p] {
            return false;
        }
        self.padj[p].iter().all(|&(q, l, m)| {
            let img = if q == p { t } else { self.vmap[q] };
            img == usize::MAX || bucket_len(&self.tbuckets, t, img, l) >= m
        })
    }

    fn run<F: FnMut(&Morphism) -> ControlFlow<()>>(&mut self, f: &mut F) -> ControlFlow<()> {
        self.assign_vertex(0, f)
    }

    fn assign_vertex<F: FnMut(&Morphism) -> ControlFlow<()>>(&mut self, depth: usize, f: &mut F) -> ControlFlow<()> {
        if depth == self.order.len() {
            return self.assign_edge(0, f);
        }
        let p = self.order[depth];
        let candidates: Vec<usize> = match self.seed.v[p] {
            Some(t) => {
                if t < self.target.vertex_count() {
                    vec![t]
                } else {
                    Vec::new()
                }
            }
            None => (0..self.target.vertex_count()).collect(),
        };
        for t in candidates {
            if !self.feasible(p, t) {
                continue;
            }
            self.vmap[p] = t;
            self.vused[t] = true;
            let r = self.assign_vertex(depth + 1, f);
            self.vused[t] = false;
            self.vmap[p] = usize::MAX;
            r?;
        }
        ControlFlow::Continue(())
    }

    fn assign_edge<F: FnMut(&Morphism) -> ControlFlow<()>>(&mut self, i: usize, f: &mut F) -> ControlFlow<()> {
        if i == self.pattern.edge_count() {
            let m = Morphism { vmap: self.vmap.clone(), emap: self.emap.clone() };
            return f(&m);
        }
        let e = *self.pattern.edge(i);
        let key = Edge::new(self.vmap[e.ends.0], self.vmap[e.ends.1], e.label);
        let bucket: Vec<usize> = match self.tbuckets.get(&(key.ends.0, key.ends.1, key.label)) {
            Some(b) => b.clone(),
            None => return ControlFlow::Continue(()),
        };
        for t in bucket {
            if self.eused[t] || self.seed.e[i].is_some_and(|s| s != t) {
                continue;
            }
            self.emap[i] = t;
            self.eused[t] = true;
            let r = self.assign_edge(i + 1, f);
            self.eused[t] = false;
            self.emap[i] = usize::MAX;
            r?;
        }
        ControlFlow::Continue(())
    }
}

/// Visits every mono `pattern ↪ target` compatible with `seed`. The visitor
/// may stop the enumeration by returning `Break`.
pub fn for_each_mono<F>(pattern: &Graph, target: &Graph, seed: Option<Seed>, mut f: F) -> ControlFlow<()>
where
    F: FnMut(&Morphism) -> ControlFlow<()>,
{
    if pattern.vertex_count() > target.vertex_count() || pattern.edge_count() > target.edge_count() {
        return ControlFlow::Continue(());
    }
    let seed = seed.unwrap_or_else(|| Seed::empty(pattern));
    Matcher::new(pattern, target, seed).run(&mut f)
}

/// All monos `pattern ↪ target`, sorted lexicographically by vertex map
/// then edge map.
pub fn monos(pattern: &Graph, target: &Graph) -> Vec<Morphism> {
    monos_seeded(pattern, target, None)
}

pub fn monos_seeded(pattern: &Graph, target: &Graph, seed: Option<Seed>) -> Vec<Morphism> {
    let mut out = Vec::new();
    let _ = for_each_mono(pattern, target, seed, |m| {
        out.push(m.clone());
        ControlFlow::Continue(())
    });
    out.sort();
    out
}

pub fn count_monos(pattern: &Graph, target: &Graph) -> usize {
    let mut n = 0;
    let _ = for_each_mono(pattern, target, None, |_| {
        n += 1;
        ControlFlow::Continue(())
    });
    n
}

pub fn has_mono(pattern: &Graph, target: &Graph, seed: Option<Seed>) -> bool {
    for_each_mono(pattern, target, seed, |_| ControlFlow::Break(())).is_break()
}

/// Typed front end: both graphs must be typed over the same type graph.
pub fn enumerate_monos(pattern: &TypedGraph<'_>, target: &TypedGraph<'_>) -> Result<Vec<Morphism>, GraphError> {
    if pattern.types != target.types {
        return Err(GraphError::TypeGraphMismatch);
    }
    Ok(monos(&pattern.carrier, &target.carrier))
}

/// All isomorphisms `a → b`.
pub fn isomorphisms(a: &Graph, b: &Graph) -> Vec<Morphism> {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return Vec::new();
    }
    monos(a, b)
}

pub fn automorphisms(g: &Graph) -> Vec<Morphism> {
    monos(g, g)
}

/// A partial isomorphism between two graphs: matched vertex pairs and
/// matched edge pairs, injective on both sides, label preserving, and with
/// matched edges having matched incidences. Equivalently an iso class of
/// mono spans `A ↩ M ↪ B`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct PartialIso {
    pub vpairs: Vec<(usize, usize)>,
    pub epairs: Vec<(usize, usize)>,
}

impl PartialIso {
    /// Pairs `f(x) ~ g(x)` for every element `x` of a common subobject.
    pub fn along(f: &Morphism, g: &Morphism) -> Self {
        PartialIso { vpairs: f.vmap.iter().zip(&g.vmap).map(|(&a, &b)| (a, b)).collect(), epairs: f.emap.iter().zip(&g.emap).map(|(&a, &b)| (a, b)).collect() }
    }

    pub fn is_trivial(&self) -> bool {
        self.vpairs.is_empty() && self.epairs.is_empty()
    }

    /// The span `A ↩ M ↪ B` this partial iso denotes.
    pub fn span(&self, a: &Graph) -> Span {
        let mut apex = Graph::new();
        let mut index = BTreeMap::new();
        for &(x, _) in &self.vpairs {
            let m = apex.add_vertex(a.vertex_label(x));
            index.insert(x, m);
        }
        for &(ea, _) in &self.epairs {
            let e = a.edge(ea);
            apex.add_edge(index[&e.ends.0], index[&e.ends.1], e.label);
        }
        Span {
            apex,
            left: Morphism { vmap: self.vpairs.iter().map(|p| p.0).collect(), emap: self.epairs.iter().map(|p| p.0).collect() },
            right: Morphism { vmap: self.vpairs.iter().map(|p| p.1).collect(), emap: self.epairs.iter().map(|p| p.1).collect() },
        }
    }

    /// Pushout of the denoted span: `A` followed by the unmatched part of
    /// `B`. Both legs are mono.
    pub fn glue(&self, a: &Graph, b: &Graph) -> Cospan {
        let mut apex = a.clone();
        let mut vb = vec![usize::MAX; b.vertex_count()];
        let mut eb = vec![usize::MAX; b.edge_count()];
        for &(x, y) in &self.vpairs {
            vb[y] = x;
        }
        for &(x, y) in &self.epairs {
            eb[y] = x;
        }
        for (v, slot) in vb.iter_mut().enumerate() {
            if *slot == usize::MAX {
                *slot = apex.add_vertex(b.vertex_label(v));
            }
        }
        for (i, e) in b.edges().iter().enumerate() {
            if eb[i] == usize::MAX {
                eb[i] = apex.add_edge(vb[e.ends.0], vb[e.ends.1], e.label);
            }
        }
        Cospan { apex, left: Morphism::identity(a), right: Morphism { vmap: vb, emap: eb } }
    }
}

/// Enumerates every partial isomorphism between `a` and `b` that extends
/// `fixed`. Distinct results are non-isomorphic as spans over `a` and `b`.
pub fn partial_isos(a: &Graph, b: &Graph, fixed: &PartialIso) -> Vec<PartialIso> {
    let mut va = vec![None; a.vertex_count()];
    let mut vb_used = vec![false; b.vertex_count()];
    for &(x, y) in &fixed.vpairs {
        va[x] = Some(y);
        vb_used[y] = true;
    }
    let mut ea_fixed = vec![false; a.edge_count()];
    let mut eb_used = vec![false; b.edge_count()];
    for &(x, y) in &fixed.epairs {
        ea_fixed[x] = true;
        eb_used[y] = true;
    }
    let free_v: Vec<usize> = (0..a.vertex_count()).filter(|&v| va[v].is_none()).collect();
    let free_e: Vec<usize> = (0..a.edge_count()).filter(|&e| !ea_fixed[e]).collect();
    let mut out = Vec::new();
    let mut st = OverlapState { a, b, va, vb_used, eb_used, epairs: fixed.epairs.clone(), free_v, free_e };
    st.vertices(0, &mut out);
    out
}

struct OverlapState<'a> {
    a: &'a Graph,
    b: &'a Graph,
    va: Vec<Option<usize>>,
    vb_used: Vec<bool>,
    eb_used: Vec<bool>,
    epairs: Vec<(usize, usize)>,
    free_v: Vec<usize>,
    free_e: Vec<usize>,
}

impl OverlapState<'_> {
    fn vertices(&mut self, i: usize, out: &mut Vec<PartialIso>) {
        if i == self.free_v.len() {
            self.edges(0, out);
            return;
        }
        let x = self.free_v[i];
        self.vertices(i + 1, out);
        for y in 0..self.b.vertex_count() {
            if self.vb_used[y] || self.a.vertex_label(x) != self.b.vertex_label(y) {
                continue;
            }
            self.va[x] = Some(y);
            self.vb_used[y] = true;
            self.vertices(i + 1, out);
            self.vb_used[y] = false;
            self.va[x] = None;
        }
    }

    fn edges(&mut self, i: usize, out: &mut Vec<PartialIso>) {
        if i == self.free_e.len() {
            let mut vpairs: Vec<(usize, usize)> = self.va.iter().enumerate().filter_map(|(x, y)| y.map(|y| (x, y))).collect();
            vpairs.sort_unstable();
            let mut epairs = self.epairs.clone();
            epairs.sort_unstable();
            out.push(PartialIso { vpairs, epairs });
            return;
        }
        let x = self.free_e[i];
        self.edges(i + 1, out);
        let e = *self.a.edge(x);
        let (Some(p), Some(q)) = (self.va[e.ends.0], self.va[e.ends.1]) else {
            return;
        };
        let want = Edge::new(p, q, e.label);
        for y in 0..self.b.edge_count() {
            if self.eb_used[y] || *self.b.edge(y) != want {
                continue;
            }
            self.eb_used[y] = true;
            self.epairs.push((x, y));
            self.edges(i + 1, out);
            self.epairs.pop();
            self.eb_used[y] = false;
        }
    }
}

/// Vertex labels and typed edge shapes available when enumerating graphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    pub vertex_labels: Vec<Label>,
    /// (edge label, endpoint label, endpoint label); equal endpoint labels
    /// with a loop in the type graph admit loops.
    pub edge_shapes: Vec<(Label, Label, Label)>,
}

impl Alphabet {
    pub fn untyped() -> Self {
        Alphabet { vertex_labels: vec![0], edge_shapes: vec![(0, 0, 0)] }
    }

    pub fn from_type_graph(t: &TypeGraph) -> Self {
        Alphabet {
            vertex_labels: (0..t.vertex_type_count() as Label).collect(),
            edge_shapes: t.graph().edges().iter().map(|e| (e.label, e.ends.0 as Label, e.ends.1 as Label)).collect(),
        }
    }

    fn allows(&self, label: Label, a: Label, b: Label) -> bool {
        self.edge_shapes.iter().any(|&(l, x, y)| l == label && ((x, y) == (a, b) || (y, x) == (a, b)))
    }
}

/// All graphs obtained from `root` by adding new vertices and edges, with
/// at most `max_vertices` vertices and `max_edges` edges in total. `root`
/// occupies the first indices of each result, so the inclusion is the
/// canonical mono `root ↪ Z`. Every mono out of `root` into a graph within
/// the bounds is isomorphic (under `root`) to one of these inclusions.
/// Results are not reduced up to isomorphism.
pub fn extensions(root: &Graph, alphabet: &Alphabet, max_vertices: usize, max_edges: usize) -> Vec<Graph> {
    let mut out = Vec::new();
    let extra = max_vertices.saturating_sub(root.vertex_count());
    for k in 0..=extra {
        // non-decreasing label sequences for the new vertices
        let mut labels = vec![0usize; k];
        loop {
            let mut g = root.clone();
            for &li in &labels {
                g.add_vertex(alphabet.vertex_labels[li]);
            }
            let slots = edge_slots(&g, alphabet);
            let budget = max_edges.saturating_sub(root.edge_count());
            add_edges(&g, &slots, 0, budget, &mut out);
            if !next_multiset(&mut labels, alphabet.vertex_labels.len()) {
                break;
            }
        }
    }
    out
}

fn edge_slots(g: &Graph, alphabet: &Alphabet) -> Vec<(usize, usize, Label)> {
    let mut slots = Vec::new();
    for a in 0..g.vertex_count() {
        for b in a..g.vertex_count() {
            for &(l, _, _) in &alphabet.edge_shapes {
                if alphabet.allows(l, g.vertex_label(a), g.vertex_label(b)) && !slots.contains(&(a, b, l)) {
                    slots.push((a, b, l));
                }
            }
        }
    }
    slots
}

fn add_edges(g: &Graph, slots: &[(usize, usize, Label)], from: usize, budget: usize, out: &mut Vec<Graph>) {
    out.push(g.clone());
    if budget == 0 {
        return;
    }
    for (i, &(a, b, l)) in slots.iter().enumerate().skip(from) {
        let mut h = g.clone();
        h.add_edge(a, b, l);
        add_edges(&h, slots, i, budget - 1, out);
    }
}

fn next_multiset(xs: &mut [usize], base: usize) -> bool {
    // advance a non-decreasing sequence over 0..base
    let n = xs.len();
    for i in (0..n).rev() {
        if xs[i] + 1 < base {
            xs[i] += 1;
            let v = xs[i];
            xs[i + 1..].iter_mut().for_each(|x| *x = v);
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::untyped(3, &[(0, 1), (1, 2), (0, 2)])
    }

    #[test]
    fn vertex_into_two_vertices() {
        assert_eq!(monos(&Graph::discrete(1), &Graph::discrete(2)).len(), 2);
    }

    #[test]
    fn empty_pattern_has_one_mono() {
        assert_eq!(monos(&Graph::new(), &triangle()).len(), 1);
    }

    #[test]
    fn edge_into_triangle() {
        let ms = monos(&Graph::untyped(2, &[(0, 1)]), &triangle());
        assert_eq!(ms.len(), 6);
        let edge = Graph::untyped(2, &[(0, 1)]);
        assert!(ms.iter().all(|m| m.is_mono(&edge, &triangle())));
    }

    #[test]
    fn parallel_edges_are_permuted() {
        let double = Graph::untyped(2, &[(0, 1), (0, 1)]);
        // 2 vertex orientations x 2 edge assignments
        assert_eq!(monos(&double, &double).len(), 4);
        assert_eq!(monos(&Graph::untyped(2, &[(0, 1)]), &double).len(), 4);
    }

    #[test]
    fn loops_only_match_loops() {
        let lp = Graph::untyped(1, &[(0, 0)]);
        assert_eq!(monos(&lp, &triangle()).len(), 0);
        assert_eq!(monos(&lp, &Graph::untyped(2, &[(0, 0), (1, 1), (0, 1)])).len(), 2);
    }

    #[test]
    fn seeds_restrict_images() {
        let edge = Graph::untyped(2, &[(0, 1)]);
        let mut s = Seed::empty(&edge);
        s.v[0] = Some(2);
        assert_eq!(monos_seeded(&edge, &triangle(), Some(s)).len(), 2);
    }

    #[test]
    fn overlaps_of_vertex_and_edge() {
        // (one vertex) vs (edge): unmatched, or matched with either endpoint
        let isos = partial_isos(&Graph::discrete(1), &Graph::untyped(2, &[(0, 1)]), &PartialIso::default());
        assert_eq!(isos.len(), 3);
    }

    #[test]
    fn overlaps_of_two_edges() {
        let e = Graph::untyped(2, &[(0, 1)]);
        // vertex partial injections: 1 + 4 + 2 = 7; full vertex matches may
        // also match the edge: +2
        assert_eq!(partial_isos(&e, &e, &PartialIso::default()).len(), 9);
    }

    #[test]
    fn extensions_cover_small_graphs() {
        let exts = extensions(&Graph::new(), &Alphabet::untyped(), 2, 1);
        // 0 vertices: {∅}; 1 vertex: {•, loop}; 2 vertices: {••, loop on
        // either vertex, edge}
        assert_eq!(exts.len(), 1 + 2 + 4);
    }
}
