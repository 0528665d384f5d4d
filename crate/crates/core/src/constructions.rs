//! Pushouts, pullbacks, pushout complements, final pullback complements and
//! epi-mono factorization in the category of undirected multigraphs.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::GraphError;
use crate::graph::{Cospan, Edge, Graph, Morphism, Span};

/// A composable pair `A → object → D` completing a square.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Complement {
    pub object: Graph,
    /// `A → object`
    pub first: Morphism,
    /// `object → D`
    pub second: Morphism,
}

/// Image factorization `f = mono ∘ epi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub image: Graph,
    pub epi: Morphism,
    pub mono: Morphism,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }

    /// Dense class numbering in order of first occurrence.
    fn classes(&mut self) -> (Vec<usize>, usize) {
        let n = self.0.len();
        let mut id = vec![usize::MAX; n];
        let mut out = vec![0; n];
        let mut k = 0;
        for (x, slot) in out.iter_mut().enumerate() {
            let r = self.find(x);
            if id[r] == usize::MAX {
                id[r] = k;
                k += 1;
            }
            *slot = id[r];
        }
        (out, k)
    }
}

/// Pushout of `B ←f A →g C`. Returns the cospan `B → D ← C`.
pub fn pushout(a: &Graph, b: &Graph, c: &Graph, f: &Morphism, g: &Morphism) -> Result<Cospan, GraphError> {
    if !f.is_homomorphism(a, b) || !g.is_homomorphism(a, c) {
        return Err(GraphError::IllFormedSpan);
    }
    let (nb, nc) = (b.vertex_count(), c.vertex_count());
    let mut uv = UnionFind::new(nb + nc);
    for x in 0..a.vertex_count() {
        uv.union(f.vmap[x], nb + g.vmap[x]);
    }
    let (eb, ec) = (b.edge_count(), c.edge_count());
    let mut ue = UnionFind::new(eb + ec);
    for x in 0..a.edge_count() {
        ue.union(f.emap[x], eb + g.emap[x]);
    }
    let (vclass, nv) = uv.classes();
    let (eclass, ne) = ue.classes();
    let mut vlabels = vec![0; nv];
    for v in 0..nb {
        vlabels[vclass[v]] = b.vertex_label(v);
    }
    for v in 0..nc {
        vlabels[vclass[nb + v]] = c.vertex_label(v);
    }
    let mut edges = vec![Edge::new(0, 0, 0); ne];
    for (i, e) in b.edges().iter().enumerate() {
        edges[eclass[i]] = Edge::new(vclass[e.ends.0], vclass[e.ends.1], e.label);
    }
    for (i, e) in c.edges().iter().enumerate() {
        edges[eclass[eb + i]] = Edge::new(vclass[nb + e.ends.0], vclass[nb + e.ends.1], e.label);
    }
    let apex = Graph::from_parts(vlabels, edges)?;
    Ok(Cospan {
        apex,
        left: Morphism { vmap: vclass[..nb].to_vec(), emap: eclass[..eb].to_vec() },
        right: Morphism { vmap: vclass[nb..].to_vec(), emap: eclass[eb..].to_vec() },
    })
}

/// Pullback of `B →f D ←g C`. Returns the span `B ← P → C`.
///
/// Fails when an edge pair would have more than two incident vertex pairs,
/// which only happens when neither leg is mono.
pub fn pullback(b: &Graph, c: &Graph, d: &Graph, f: &Morphism, g: &Morphism) -> Result<Span, GraphError> {
    if !f.is_homomorphism(b, d) || !g.is_homomorphism(c, d) {
        return Err(GraphError::IllFormedSpan);
    }
    let mut apex = Graph::new();
    let mut left = Morphism::default();
    let mut right = Morphism::default();
    let mut pair_index = BTreeMap::new();
    for x in 0..b.vertex_count() {
        for y in 0..c.vertex_count() {
            if f.vmap[x] == g.vmap[y] {
                pair_index.insert((x, y), apex.add_vertex(b.vertex_label(x)));
                left.vmap.push(x);
                right.vmap.push(y);
            }
        }
    }
    for (i, ex) in b.edges().iter().enumerate() {
        for (j, ey) in c.edges().iter().enumerate() {
            if f.emap[i] != g.emap[j] {
                continue;
            }
            let mut inc: Vec<usize> = Vec::new();
            for x in [ex.ends.0, ex.ends.1] {
                for y in [ey.ends.0, ey.ends.1] {
                    if let Some(&p) = pair_index.get(&(x, y)) {
                        if !inc.contains(&p) {
                            inc.push(p);
                        }
                    }
                }
            }
            match inc.len() {
                1 => apex.add_edge(inc[0], inc[0], ex.label),
                2 => apex.add_edge(inc[0], inc[1], ex.label),
                _ => return Err(GraphError::PullbackNotDefined),
            };
            left.emap.push(i);
            right.emap.push(j);
        }
    }
    Ok(Span { apex, left, right })
}

fn restrict(x: &Graph, keep_v: &[bool], keep_e: &[bool], k: &Morphism) -> Complement {
    let (object, incl) = x.subgraph(keep_v, keep_e).expect("kept edges have kept ends");
    let (vinv, einv) = incl.preimage(x);
    let first = Morphism { vmap: k.vmap.iter().map(|&v| vinv[v].expect("kept")).collect(), emap: k.emap.iter().map(|&e| einv[e].expect("kept")).collect() };
    Complement { object, first, second: incl }
}

/// Pushout complement of `K →ki I →m X` for monos `ki` and `m`: the object
/// `C` with `K → C → X` such that `X` is the pushout of `I ← K → C`.
/// `None` when the dangling condition fails (an edge outside the image of
/// `I` is incident to a deleted vertex).
pub fn pushout_complement(k: &Graph, i: &Graph, x: &Graph, ki: &Morphism, m: &Morphism) -> Option<Complement> {
    debug_assert!(ki.is_mono(k, i) && m.is_mono(i, x));
    let (keep_v, keep_e) = deleted(i, x, ki, m);
    let (_, in_i_e) = m.preimage(x);
    for (e, edge) in x.edges().iter().enumerate() {
        if in_i_e[e].is_none() && (!keep_v[edge.ends.0] || !keep_v[edge.ends.1]) {
            return None;
        }
    }
    let km = ki.then(m);
    Some(restrict(x, &keep_v, &keep_e, &km))
}

/// `X` minus the image of `I \ K`.
fn deleted(i: &Graph, x: &Graph, ki: &Morphism, m: &Morphism) -> (Vec<bool>, Vec<bool>) {
    let (kv, ke) = ki.preimage(i);
    let mut keep_v = vec![true; x.vertex_count()];
    let mut keep_e = vec![true; x.edge_count()];
    for v in 0..i.vertex_count() {
        if kv[v].is_none() {
            keep_v[m.vmap[v]] = false;
        }
    }
    for e in 0..i.edge_count() {
        if ke[e].is_none() {
            keep_e[m.emap[e]] = false;
        }
    }
    (keep_v, keep_e)
}

/// Final pullback complement of `A →a B →b D` (both mono):
/// `V_C = V_D ∖ (V_B ∖ V_A)` and `E_C` the edges of `E_D ∖ (E_B ∖ E_A)` whose
/// incidence lies inside `V_C`.
pub fn final_pullback_complement(a: &Graph, bg: &Graph, d: &Graph, ab: &Morphism, bd: &Morphism) -> Complement {
    debug_assert!(ab.is_mono(a, bg) && bd.is_mono(bg, d));
    let (keep_v, mut keep_e) = deleted(bg, d, ab, bd);
    for (e, edge) in d.edges().iter().enumerate() {
        if !keep_v[edge.ends.0] || !keep_v[edge.ends.1] {
            keep_e[e] = false;
        }
    }
    let ad = ab.then(bd);
    restrict(d, &keep_v, &keep_e, &ad)
}

/// Epi-mono factorization of `f: A → B`.
///
/// The vertex and edge maps are factorized in sets; the image edges are
/// the image of `p: E_A → P`, where `P` is the pullback of the target
/// incidence along the image vertex inclusion, and `p(e) = (f(e), e_V(i(e)))`.
pub fn epi_mono_factorize(a: &Graph, b: &Graph, f: &Morphism) -> Factorization {
    debug_assert!(f.is_homomorphism(a, b));
    // step 1: set factorization of the vertex map
    let mut vimg: Vec<usize> = f.vmap.clone();
    vimg.sort_unstable();
    vimg.dedup();
    let vpos = |w: usize| vimg.binary_search(&w).expect("in image");
    let ev: Vec<usize> = f.vmap.iter().map(|&w| vpos(w)).collect();
    // steps 2-3: p lands in P = {(e', S) | i'(e') = m_V(S)}; factorize p
    let mut p: Vec<(usize, Edge)> = a.edges().iter().zip(&f.emap).map(|(e, &t)| (t, Edge::new(ev[e.ends.0], ev[e.ends.1], e.label))).collect();
    let ep_src = p.clone();
    p.sort_unstable();
    p.dedup();
    // step 4: the image object and the two factors
    let vlabels = vimg.iter().map(|&w| b.vertex_label(w)).collect();
    let image = Graph::from_parts(vlabels, p.iter().map(|x| x.1).collect()).expect("incidence inside image");
    let epi = Morphism { vmap: ev, emap: ep_src.iter().map(|x| p.binary_search(x).expect("in image")).collect() };
    let mono = Morphism { vmap: vimg.clone(), emap: p.iter().map(|x| x.0).collect() };
    Factorization { image, epi, mono }
}
