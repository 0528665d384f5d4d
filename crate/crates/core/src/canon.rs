//! Canonical forms of labelled multigraphs.
//!
//! Each connected component is canonicalized by colour refinement with
//! individualization, keeping the lexicographically least leaf encoding.
//! Components are then sorted by encoding. Two graphs are isomorphic iff
//! their keys are equal.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{Graph, Morphism};
use crate::matching;

/// Total encoding of a canonical graph. Equal keys mean isomorphic graphs.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GraphKey(pub Vec<u64>);

/// A canonical representative together with the isomorphism onto it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Canonical {
    pub graph: Graph,
    /// Input graph → canonical graph.
    pub iso: Morphism,
    pub key: GraphKey,
}

fn colour(label: u32, tag: u32) -> u64 {
    ((label as u64) << 32) | tag as u64
}

/// Encoding of a graph in its current numbering, with element tags.
fn encode(g: &Graph, vtags: &[u32], etags: &[u32]) -> Vec<u64> {
    let mut out = Vec::with_capacity(2 + g.vertex_count() + 3 * g.edge_count());
    out.push(g.vertex_count() as u64);
    for (v, &tag) in vtags.iter().enumerate().take(g.vertex_count()) {
        out.push(colour(g.vertex_label(v), tag));
    }
    out.push(g.edge_count() as u64);
    for (i, e) in g.edges().iter().enumerate() {
        out.push(e.ends.0 as u64);
        out.push(e.ends.1 as u64);
        out.push(colour(e.label, etags[i]));
    }
    out
}

/// Plain encoding of `g` in its own numbering (not canonical).
pub fn encoding(g: &Graph) -> Vec<u64> {
    encode(g, &vec![0; g.vertex_count()], &vec![0; g.edge_count()])
}

struct Component {
    vcol: Vec<u64>,
    /// Non-loop neighbours: (neighbour, edge colour).
    adj: Vec<Vec<(usize, u64)>>,
    /// (a, b, colour, original edge index) in local vertex numbering.
    edges: Vec<(usize, usize, u64, usize)>,
}

fn rank(sigs: &[Vec<u64>]) -> Vec<u64> {
    let mut sorted: Vec<&Vec<u64>> = sigs.iter().collect();
    sorted.sort();
    sorted.dedup();
    sigs.iter().map(|s| sorted.binary_search(&s).expect("present") as u64).collect()
}

impl Component {
    fn refine(&self, mut col: Vec<u64>) -> Vec<u64> {
        let n = col.len();
        let mut classes = count_classes(&col);
        loop {
            let sigs: Vec<Vec<u64>> = (0..n)
                .map(|v| {
                    let mut s = Vec::with_capacity(2 * self.adj[v].len() + 1);
                    s.push(col[v]);
                    let mut pairs: Vec<(u64, u64)> = self.adj[v].iter().map(|&(w, c)| (c, col[w])).collect();
                    pairs.sort_unstable();
                    for (c, k) in pairs {
                        s.push(c);
                        s.push(k);
                    }
                    s
                })
                .collect();
            let next = rank(&sigs);
            let k = count_classes(&next);
            col = next;
            if k == classes {
                return col;
            }
            classes = k;
        }
    }

    fn leaf_encoding(&self, col: &[u64]) -> (Vec<u64>, Vec<usize>, Vec<usize>) {
        // col is discrete: a permutation of 0..n
        let n = col.len();
        let vperm: Vec<usize> = col.iter().map(|&c| c as usize).collect();
        let mut vlab = vec![0u64; n];
        for v in 0..n {
            vlab[vperm[v]] = self.vcol[v];
        }
        let mut es: Vec<(usize, usize, u64, usize)> = self
            .edges
            .iter()
            .map(|&(a, b, c, i)| {
                let (x, y) = (vperm[a], vperm[b]);
                (x.min(y), x.max(y), c, i)
            })
            .collect();
        es.sort_unstable();
        let mut enc = Vec::with_capacity(1 + n + 3 * es.len());
        enc.push(n as u64);
        enc.extend_from_slice(&vlab);
        for &(a, b, c, _) in &es {
            enc.push(a as u64);
            enc.push(b as u64);
            enc.push(c);
        }
        let order = es.iter().map(|e| e.3).collect();
        (enc, vperm, order)
    }

    fn search(&self, col: Vec<u64>, best: &mut Option<(Vec<u64>, Vec<usize>, Vec<usize>)>) {
        let col = self.refine(col);
        let n = col.len();
        if count_classes(&col) == n {
            let leaf = self.leaf_encoding(&col);
            if best.as_ref().is_none_or(|b| leaf.0 < b.0) {
                *best = Some(leaf);
            }
            return;
        }
        // first non-singleton cell of least colour
        let mut counts = vec![0usize; n];
        col.iter().for_each(|&c| counts[c as usize] += 1);
        let target = (0..n).find(|&c| counts[c] > 1).expect("non-discrete") as u64;
        for v in 0..n {
            if col[v] != target {
                continue;
            }
            let ind: Vec<u64> = (0..n).map(|u| 2 * col[u] + u64::from(col[u] == target && u != v)).collect();
            self.search(ind, best);
        }
    }
}

fn count_classes(col: &[u64]) -> usize {
    let mut s = col.to_vec();
    s.sort_unstable();
    s.dedup();
    s.len()
}

/// Canonical form of `g` where elements carry extra tags; tags take part
/// in the encoding and must be preserved by isomorphisms.
pub fn canonical_tagged(g: &Graph, vtags: &[u32], etags: &[u32]) -> Canonical {
    let comps = g.components();
    let mut local = vec![0usize; g.vertex_count()];
    let mut comp_of = vec![0usize; g.vertex_count()];
    for (ci, c) in comps.iter().enumerate() {
        for (i, &v) in c.iter().enumerate() {
            local[v] = i;
            comp_of[v] = ci;
        }
    }
    let mut parts: Vec<Component> = comps
        .iter()
        .map(|c| Component { vcol: c.iter().map(|&v| colour(g.vertex_label(v), vtags[v])).collect(), adj: vec![Vec::new(); c.len()], edges: Vec::new() })
        .collect();
    let mut loops: Vec<Vec<Vec<u64>>> = comps.iter().map(|c| vec![Vec::new(); c.len()]).collect();
    for (i, e) in g.edges().iter().enumerate() {
        let ci = comp_of[e.ends.0];
        let (a, b) = (local[e.ends.0], local[e.ends.1]);
        let c = colour(e.label, etags[i]);
        parts[ci].edges.push((a, b, c, i));
        if a == b {
            loops[ci][a].push(c);
        } else {
            parts[ci].adj[a].push((b, c));
            parts[ci].adj[b].push((a, c));
        }
    }
    // (component key, component index, vertex order, edge order)
    type Solved = (Vec<u64>, usize, Vec<usize>, Vec<usize>);
    let mut solved: Vec<Solved> = Vec::new();
    for (ci, p) in parts.iter().enumerate() {
        let init: Vec<Vec<u64>> = (0..p.vcol.len())
            .map(|v| {
                let mut s = vec![p.vcol[v]];
                let mut l = loops[ci][v].clone();
                l.sort_unstable();
                s.extend(l);
                s
            })
            .collect();
        let mut best = None;
        p.search(rank(&init), &mut best);
        let (enc, vperm, eorder) = best.expect("at least one leaf");
        solved.push((enc, ci, vperm, eorder));
    }
    solved.sort();
    let mut vmap = vec![0usize; g.vertex_count()];
    let mut emap = vec![0usize; g.edge_count()];
    let (mut voff, mut eoff) = (0, 0);
    for (_, ci, vperm, eorder) in &solved {
        for (i, &v) in comps[*ci].iter().enumerate() {
            vmap[v] = voff + vperm[i];
        }
        for (k, &e) in eorder.iter().enumerate() {
            emap[e] = eoff + k;
        }
        voff += vperm.len();
        eoff += eorder.len();
    }
    let graph = g.permuted(&vmap, &emap);
    let mut vt = vec![0u32; g.vertex_count()];
    let mut et = vec![0u32; g.edge_count()];
    for v in 0..g.vertex_count() {
        vt[vmap[v]] = vtags[v];
    }
    for e in 0..g.edge_count() {
        et[emap[e]] = etags[e];
    }
    let key = GraphKey(encode(&graph, &vt, &et));
    Canonical { graph, iso: Morphism { vmap, emap }, key }
}

pub fn canonical(g: &Graph) -> Canonical {
    canonical_tagged(g, &vec![0; g.vertex_count()], &vec![0; g.edge_count()])
}

pub fn canonical_key(g: &Graph) -> GraphKey {
    canonical(g).key
}

pub fn is_isomorphic(a: &Graph, b: &Graph) -> bool {
    a.vertex_count() == b.vertex_count() && a.edge_count() == b.edge_count() && canonical_key(a) == canonical_key(b)
}

/// Every isomorphism from `g` onto its canonical graph: the canonical
/// isomorphism followed by each automorphism of the canonical graph.
pub fn canonical_labelings(c: &Canonical) -> Vec<Morphism> {
    matching::automorphisms(&c.graph).iter().map(|a| c.iso.then(a)).collect()
}

/// As [`canonical_labelings`] but for tagged canonical forms: only
/// automorphisms preserving tags are kept.
pub fn tagged_labelings(c: &Canonical, vtags: &[u32], etags: &[u32]) -> Vec<Morphism> {
    // tags transported to the canonical numbering
    let mut vt = vec![0u32; vtags.len()];
    let mut et = vec![0u32; etags.len()];
    for (v, &w) in c.iso.vmap.iter().enumerate() {
        vt[w] = vtags[v];
    }
    for (e, &f) in c.iso.emap.iter().enumerate() {
        et[f] = etags[e];
    }
    let coloured = c.graph.map_labels(|v, l| tagged_label(l, vt[v]), |e, l| tagged_label(l, et[e]));
    matching::automorphisms(&coloured).iter().map(|a| c.iso.then(a)).collect()
}

/// Folds a tag into a label for matching purposes. Labels in this crate
/// stay far below 2^16, tags likewise.
fn tagged_label(label: u32, tag: u32) -> u32 {
    (label << 16) | (tag & 0xffff)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn relabel_randomly(g: &Graph, seed: u64) -> Graph {
        // deterministic shuffle
        let n = g.vertex_count();
        let m = g.edge_count();
        let mut vp: Vec<usize> = (0..n).collect();
        let mut ep: Vec<usize> = (0..m).collect();
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = |k: usize| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 33) as usize) % k
        };
        for i in (1..n).rev() {
            let j = next(i + 1);
            vp.swap(i, j);
        }
        for i in (1..m).rev() {
            let j = next(i + 1);
            ep.swap(i, j);
        }
        g.permuted(&vp, &ep)
    }

    #[test]
    fn iso_onto_canonical_graph() {
        let g = Graph::untyped(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 0), (1, 2)]);
        let c = canonical(&g);
        assert!(c.iso.is_mono(&g, &c.graph));
        assert!(c.iso.is_iso(&c.graph));
    }

    #[test]
    fn invariant_under_renumbering() {
        let g = Graph::untyped(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 1)]);
        let k = canonical_key(&g);
        for s in 0..20 {
            assert_eq!(canonical_key(&relabel_randomly(&g, s)), k);
        }
    }

    #[test]
    fn distinguishes_non_isomorphic() {
        let c6 = Graph::untyped(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]);
        let two_triangles = Graph::untyped(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]);
        assert_ne!(canonical_key(&c6), canonical_key(&two_triangles));
        let double = Graph::untyped(2, &[(0, 1), (0, 1)]);
        let edge_loop = Graph::untyped(2, &[(0, 1), (0, 0)]);
        assert_ne!(canonical_key(&double), canonical_key(&edge_loop));
    }

    #[test]
    fn tags_matter() {
        let g = Graph::untyped(2, &[(0, 1)]);
        let a = canonical_tagged(&g, &[1, 0], &[0]);
        let b = canonical_tagged(&g, &[0, 1], &[0]);
        let c = canonical_tagged(&g, &[1, 1], &[0]);
        assert_eq!(a.key, b.key);
        assert_ne!(a.key, c.key);
    }

    #[test]
    fn labelings_count_automorphisms() {
        let tri = Graph::untyped(3, &[(0, 1), (1, 2), (2, 0)]);
        let c = canonical(&tri);
        let ls = canonical_labelings(&c);
        assert_eq!(ls.len(), 6);
        assert!(ls.iter().all(|m| m.is_mono(&tri, &c.graph)));
    }
}
