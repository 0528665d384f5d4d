//! Finite undirected multigraphs with labelled vertices and edges, and the
//! morphisms between them.
//!
//! An edge's incidence is a set of one or two vertices; a one-element set is
//! a loop. Labels index into a [`TypeGraph`]; untyped graphs use label `0`
//! everywhere, which is typing over the terminal graph (one vertex carrying
//! one loop).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::GraphError;

/// Vertex or edge label (an index into the type graph).
pub type Label = u32;

/// An undirected edge. `ends` is normalized so that `ends.0 <= ends.1`;
/// equal ends encode a loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub ends: (usize, usize),
    pub label: Label,
}

impl Edge {
    pub fn new(a: usize, b: usize, label: Label) -> Self {
        let ends = if a <= b { (a, b) } else { (b, a) };
        Edge { ends, label }
    }

    pub fn is_loop(&self) -> bool {
        self.ends.0 == self.ends.1
    }

    pub fn touches(&self, v: usize) -> bool {
        self.ends.0 == v || self.ends.1 == v
    }

    /// The other endpoint, or `v` itself for a loop.
    pub fn opposite(&self, v: usize) -> usize {
        if self.ends.0 == v {
            self.ends.1
        } else {
            self.ends.0
        }
    }
}

/// A finite undirected multigraph. Vertex and edge identifiers are the
/// dense indices `0..vertex_count()` and `0..edge_count()`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Graph {
    vlabels: Vec<Label>,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from raw parts, checking that every endpoint exists.
    pub fn from_parts(vlabels: Vec<Label>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let n = vlabels.len();
        for (i, e) in edges.iter().enumerate() {
            if e.ends.0 >= n || e.ends.1 >= n {
                return Err(GraphError::DanglingIncidence { edge: i });
            }
        }
        let edges = edges.into_iter().map(|e| Edge::new(e.ends.0, e.ends.1, e.label)).collect();
        Ok(Graph { vlabels, edges })
    }

    /// `n` vertices with label 0 and no edges.
    pub fn discrete(n: usize) -> Self {
        Graph { vlabels: vec![0; n], edges: Vec::new() }
    }

    /// Untyped graph from an edge list over `n` vertices.
    pub fn untyped(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Graph::discrete(n);
        for &(a, b) in edges {
            g.add_edge(a, b, 0);
        }
        g
    }

    pub fn add_vertex(&mut self, label: Label) -> usize {
        self.vlabels.push(label);
        self.vlabels.len() - 1
    }

    /// Panics if an endpoint does not exist.
    pub fn add_edge(&mut self, a: usize, b: usize, label: Label) -> usize {
        assert!(a < self.vlabels.len() && b < self.vlabels.len(), "edge endpoint out of range");
        self.edges.push(Edge::new(a, b, label));
        self.edges.len() - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.vlabels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of vertices plus number of edges.
    pub fn size(&self) -> usize {
        self.vlabels.len() + self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vlabels.is_empty()
    }

    pub fn vertex_label(&self, v: usize) -> Label {
        self.vlabels[v]
    }

    pub fn vertex_labels(&self) -> &[Label] {
        &self.vlabels
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edges incident to `v` (loops included once).
    pub fn incident(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().enumerate().filter(move |(_, e)| e.touches(v)).map(|(i, _)| i)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident(v).count()
    }

    /// Number of edges with the given (unordered) endpoints and label.
    pub fn multiplicity(&self, a: usize, b: usize, label: Label) -> usize {
        let key = Edge::new(a, b, label);
        self.edges.iter().filter(|e| **e == key).count()
    }

    /// Disjoint union; the vertices and edges of `other` are shifted past
    /// those of `self`. Returns the union and the two coproduct injections.
    pub fn disjoint_union(&self, other: &Graph) -> (Graph, Morphism, Morphism) {
        let mut g = self.clone();
        let off_v = g.vertex_count();
        let off_e = g.edge_count();
        g.vlabels.extend_from_slice(&other.vlabels);
        g.edges.extend(other.edges.iter().map(|e| Edge::new(e.ends.0 + off_v, e.ends.1 + off_v, e.label)));
        let left = Morphism::inclusion(self.vertex_count(), self.edge_count());
        let right = Morphism { vmap: (off_v..off_v + other.vertex_count()).collect(), emap: (off_e..off_e + other.edge_count()).collect() };
        (g, left, right)
    }

    /// Subgraph on the given vertices and edges (edges must have both ends
    /// kept). Returns the subgraph and its inclusion into `self`.
    pub fn subgraph(&self, keep_v: &[bool], keep_e: &[bool]) -> Result<(Graph, Morphism), GraphError> {
        let mut newv = vec![usize::MAX; self.vertex_count()];
        let mut g = Graph::new();
        let mut vmap = Vec::new();
        for v in 0..self.vertex_count() {
            if keep_v[v] {
                newv[v] = g.add_vertex(self.vlabels[v]);
                vmap.push(v);
            }
        }
        let mut emap = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if keep_e[i] {
                let (a, b) = (newv[e.ends.0], newv[e.ends.1]);
                if a == usize::MAX || b == usize::MAX {
                    return Err(GraphError::DanglingIncidence { edge: i });
                }
                g.add_edge(a, b, e.label);
                emap.push(i);
            }
        }
        Ok((g, Morphism { vmap, emap }))
    }

    /// Connected components as sorted vertex lists, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.ends.0), find(&mut parent, e.ends.1));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut comps: Vec<Vec<usize>> = Vec::new();
        let mut index = vec![usize::MAX; n];
        for v in 0..n {
            let r = find(&mut parent, v);
            if index[r] == usize::MAX {
                index[r] = comps.len();
                comps.push(Vec::new());
            }
            comps[index[r]].push(v);
        }
        comps
    }

    /// Relabels vertices and edges. Panics on out-of-range indices.
    pub fn map_labels(&self, vf: impl Fn(usize, Label) -> Label, ef: impl Fn(usize, Label) -> Label) -> Graph {
        Graph {
            vlabels: self.vlabels.iter().enumerate().map(|(i, &l)| vf(i, l)).collect(),
            edges: self.edges.iter().enumerate().map(|(i, e)| Edge { ends: e.ends, label: ef(i, e.label) }).collect(),
        }
    }

    /// Image of this graph under a bijective renumbering `vperm` / `eperm`
    /// (old index → new index).
    pub fn permuted(&self, vperm: &[usize], eperm: &[usize]) -> Graph {
        let mut vlabels = vec![0; self.vertex_count()];
        for (old, &new) in vperm.iter().enumerate() {
            vlabels[new] = self.vlabels[old];
        }
        let mut edges = vec![Edge::new(0, 0, 0); self.edge_count()];
        for (old, &new) in eperm.iter().enumerate() {
            let e = self.edges[old];
            edges[new] = Edge::new(vperm[e.ends.0], vperm[e.ends.1], e.label);
        }
        Graph { vlabels, edges }
    }
}

/// A graph homomorphism given by its vertex and edge components. The source
/// and target graphs are not stored; operations that need them take them as
/// arguments.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Morphism {
    pub vmap: Vec<usize>,
    pub emap: Vec<usize>,
}

impl Morphism {
    pub fn new(vmap: Vec<usize>, emap: Vec<usize>) -> Self {
        Morphism { vmap, emap }
    }

    pub fn identity(g: &Graph) -> Self {
        Self::inclusion(g.vertex_count(), g.edge_count())
    }

    /// Inclusion of the first `nv` vertices and `ne` edges.
    pub fn inclusion(nv: usize, ne: usize) -> Self {
        Morphism { vmap: (0..nv).collect(), emap: (0..ne).collect() }
    }

    /// The unique morphism out of the empty graph.
    pub fn from_empty() -> Self {
        Morphism::default()
    }

    /// `then ∘ self`: apply `self` first.
    pub fn then(&self, then: &Morphism) -> Morphism {
        Morphism { vmap: self.vmap.iter().map(|&v| then.vmap[v]).collect(), emap: self.emap.iter().map(|&e| then.emap[e]).collect() }
    }

    pub fn is_injective(&self) -> bool {
        fn inj(xs: &[usize]) -> bool {
            let mut s = xs.to_vec();
            s.sort_unstable();
            s.windows(2).all(|w| w[0] != w[1])
        }
        inj(&self.vmap) && inj(&self.emap)
    }

    pub fn is_surjective_onto(&self, target: &Graph) -> bool {
        let mut hv = vec![false; target.vertex_count()];
        let mut he = vec![false; target.edge_count()];
        self.vmap.iter().for_each(|&v| hv[v] = true);
        self.emap.iter().for_each(|&e| he[e] = true);
        hv.into_iter().all(|x| x) && he.into_iter().all(|x| x)
    }

    pub fn is_iso(&self, target: &Graph) -> bool {
        self.is_injective() && self.is_surjective_onto(target)
    }

    /// Checks the homomorphism law: labels are preserved and the image of an
    /// edge's incidence set is the incidence set of the image edge.
    pub fn is_homomorphism(&self, source: &Graph, target: &Graph) -> bool {
        if self.vmap.len() != source.vertex_count() || self.emap.len() != source.edge_count() {
            return false;
        }
        if self.vmap.iter().any(|&v| v >= target.vertex_count()) || self.emap.iter().any(|&e| e >= target.edge_count()) {
            return false;
        }
        for (v, &w) in self.vmap.iter().enumerate() {
            if source.vertex_label(v) != target.vertex_label(w) {
                return false;
            }
        }
        for (i, e) in source.edges().iter().enumerate() {
            let img = target.edge(self.emap[i]);
            if img.label != e.label {
                return false;
            }
            if Edge::new(self.vmap[e.ends.0], self.vmap[e.ends.1], e.label) != *img {
                return false;
            }
        }
        true
    }

    pub fn is_mono(&self, source: &Graph, target: &Graph) -> bool {
        self.is_homomorphism(source, target) && self.is_injective()
    }

    pub fn check(&self, source: &Graph, target: &Graph) -> Result<(), GraphError> {
        if self.is_homomorphism(source, target) {
            Ok(())
        } else {
            Err(GraphError::NotHomomorphism)
        }
    }

    pub fn check_mono(&self, source: &Graph, target: &Graph) -> Result<(), GraphError> {
        self.check(source, target)?;
        if self.is_injective() {
            Ok(())
        } else {
            Err(GraphError::NotMono)
        }
    }

    /// Inverse of an isomorphism onto `target`.
    pub fn inverse(&self, target: &Graph) -> Morphism {
        let mut vmap = vec![usize::MAX; target.vertex_count()];
        let mut emap = vec![usize::MAX; target.edge_count()];
        for (v, &w) in self.vmap.iter().enumerate() {
            vmap[w] = v;
        }
        for (e, &f) in self.emap.iter().enumerate() {
            emap[f] = e;
        }
        Morphism { vmap, emap }
    }

    /// Partial inverse of a mono: `None` where an element is not in the image.
    pub fn preimage(&self, target: &Graph) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
        let mut vinv = vec![None; target.vertex_count()];
        let mut einv = vec![None; target.edge_count()];
        for (v, &w) in self.vmap.iter().enumerate() {
            vinv[w] = Some(v);
        }
        for (e, &f) in self.emap.iter().enumerate() {
            einv[f] = Some(e);
        }
        (vinv, einv)
    }
}

/// A span `A ← apex → B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Span {
    pub apex: Graph,
    pub left: Morphism,
    pub right: Morphism,
}

/// A cospan `A → apex ← B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cospan {
    pub apex: Graph,
    pub left: Morphism,
    pub right: Morphism,
}

/// A graph whose vertices are vertex types and whose edges are the allowed
/// edge types (loops encode per-vertex properties).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeGraph {
    graph: Graph,
    vertex_names: Vec<String>,
    edge_names: Vec<String>,
}

impl TypeGraph {
    /// The terminal type graph: one vertex type `_` with one loop type `_`.
    /// Every graph has exactly one typing over it.
    pub fn untyped() -> Self {
        let mut g = Graph::new();
        g.add_vertex(0);
        g.add_edge(0, 0, 0);
        TypeGraph { graph: g, vertex_names: vec![String::from("_")], edge_names: vec![String::from("_")] }
    }

    pub fn new() -> Self {
        TypeGraph { graph: Graph::new(), vertex_names: Vec::new(), edge_names: Vec::new() }
    }

    pub fn add_vertex_type(&mut self, name: &str) -> Label {
        let l = self.graph.add_vertex(self.graph.vertex_count() as Label) as Label;
        self.vertex_names.push(String::from(name));
        l
    }

    pub fn add_edge_type(&mut self, name: &str, a: Label, b: Label) -> Label {
        let l = self.graph.edge_count() as Label;
        self.graph.add_edge(a as usize, b as usize, l);
        self.edge_names.push(String::from(name));
        l
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn is_untyped(&self) -> bool {
        *self == TypeGraph::untyped()
    }

    pub fn vertex_type(&self, name: &str) -> Option<Label> {
        self.vertex_names.iter().position(|n| n == name).map(|i| i as Label)
    }

    pub fn edge_type(&self, name: &str) -> Option<Label> {
        self.edge_names.iter().position(|n| n == name).map(|i| i as Label)
    }

    pub fn vertex_name(&self, l: Label) -> &str {
        &self.vertex_names[l as usize]
    }

    pub fn edge_name(&self, l: Label) -> &str {
        &self.edge_names[l as usize]
    }

    pub fn vertex_type_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn edge_type_count(&self) -> usize {
        self.edge_names.len()
    }

    /// Edge types joining vertex types `a` and `b`.
    pub fn edge_types_between(&self, a: Label, b: Label) -> Vec<Label> {
        let key = Edge::new(a as usize, b as usize, 0);
        self.graph.edges().iter().filter(|e| e.ends == key.ends).map(|e| e.label).collect()
    }

    /// Checks that the labels of `g` form a homomorphism into this type graph.
    pub fn check(&self, g: &Graph) -> Result<(), GraphError> {
        for v in 0..g.vertex_count() {
            if g.vertex_label(v) as usize >= self.graph.vertex_count() {
                return Err(GraphError::UntypedVertex { vertex: v });
            }
        }
        for (i, e) in g.edges().iter().enumerate() {
            if e.label as usize >= self.graph.edge_count() {
                return Err(GraphError::UntypedEdge { edge: i });
            }
            let t = self.graph.edge(e.label as usize);
            let want = Edge::new(g.vertex_label(e.ends.0) as usize, g.vertex_label(e.ends.1) as usize, e.label);
            if *t != want {
                return Err(GraphError::UntypedEdge { edge: i });
            }
        }
        Ok(())
    }

    /// The typing morphism of `g` (not mono in general).
    pub fn typing(&self, g: &Graph) -> Result<Morphism, GraphError> {
        self.check(g)?;
        Ok(Morphism { vmap: g.vertex_labels().iter().map(|&l| l as usize).collect(), emap: g.edges().iter().map(|e| e.label as usize).collect() })
    }
}

impl Default for TypeGraph {
    fn default() -> Self {
        Self::untyped()
    }
}

/// A graph together with the type graph it is typed over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedGraph<'t> {
    pub carrier: Graph,
    pub types: &'t TypeGraph,
}

impl<'t> TypedGraph<'t> {
    pub fn new(carrier: Graph, types: &'t TypeGraph) -> Result<Self, GraphError> {
        types.check(&carrier)?;
        Ok(TypedGraph { carrier, types })
    }

    pub fn typing(&self) -> Morphism {
        self.types.typing(&self.carrier).expect("checked at construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loops_are_single_vertex_incidence() {
        let mut g = Graph::discrete(1);
        let e = g.add_edge(0, 0, 0);
        assert!(g.edge(e).is_loop());
        assert_eq!(g.degree(0), 1);
    }

    #[test]
    fn from_parts_rejects_dangling() {
        assert!(Graph::from_parts(vec![0], vec![Edge::new(0, 1, 0)]).is_err());
    }

    #[test]
    fn typing_respects_type_graph() {
        let mut t = TypeGraph::new();
        let a = t.add_vertex_type("A");
        let b = t.add_vertex_type("B");
        let bond = t.add_edge_type("bond", a, b);
        let mut g = Graph::new();
        let x = g.add_vertex(a);
        let y = g.add_vertex(b);
        g.add_edge(x, y, bond);
        assert!(t.check(&g).is_ok());
        let mut bad = Graph::new();
        let x = bad.add_vertex(a);
        let y = bad.add_vertex(a);
        bad.add_edge(x, y, bond);
        assert!(t.check(&bad).is_err());
        assert!(TypeGraph::untyped().check(&Graph::untyped(2, &[(0, 1), (1, 1)])).is_ok());
    }

    #[test]
    fn morphism_laws() {
        let path = Graph::untyped(3, &[(0, 1), (1, 2)]);
        let edge = Graph::untyped(2, &[(0, 1)]);
        let f = Morphism::new(vec![1, 2], vec![1]);
        assert!(f.is_mono(&edge, &path));
        let bad = Morphism::new(vec![0, 2], vec![1]);
        assert!(!bad.is_homomorphism(&edge, &path));
        let id = Morphism::identity(&path);
        assert_eq!(f.then(&id), f);
    }
}
