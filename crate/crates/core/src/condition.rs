//! Nested application conditions over a root graph.
//!
//! A condition does not store its root; every operation takes the root
//! graph explicitly. `Exists` embeddings are monos out of the root, and the
//! inner condition is rooted at the embedding's target.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use crate::canon::{canonical_tagged, tagged_labelings};
use crate::constructions::{pushout, pushout_complement};
use crate::error::ConditionError;
use crate::graph::{Graph, Morphism, Span};
use crate::matching::{extensions, for_each_mono, has_mono, partial_isos, Alphabet, PartialIso, Seed};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    True,
    Exists(Box<Extension>),
    Not(Box<Condition>),
    And(Vec<Condition>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Extension {
    pub target: Graph,
    /// root ↪ target
    pub embedding: Morphism,
    pub inner: Condition,
}

impl Condition {
    pub fn falsity() -> Self {
        Condition::Not(Box::new(Condition::True))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Condition::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Condition::Not(c) if c.is_true())
    }

    pub fn exists(target: Graph, embedding: Morphism, inner: Condition) -> Self {
        Condition::Exists(Box::new(Extension { target, embedding, inner }))
    }

    /// `∃(root ↪ target)` with a trivially true inner condition.
    pub fn exists_plain(target: Graph, embedding: Morphism) -> Self {
        Self::exists(target, embedding, Condition::True)
    }

    /// `∀(root ↪ target, inner) := ¬∃(root ↪ target, ¬inner)`.
    pub fn forall(target: Graph, embedding: Morphism, inner: Condition) -> Self {
        Self::negate(Self::exists(target, embedding, Self::negate(inner)))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn negate(c: Condition) -> Self {
        Condition::Not(Box::new(c))
    }

    pub fn and(cs: Vec<Condition>) -> Self {
        Condition::And(cs)
    }

    /// `a ∨ b := ¬(¬a ∧ ¬b)`, n-ary. The empty disjunction is false.
    pub fn or(cs: Vec<Condition>) -> Self {
        Self::negate(Condition::And(cs.into_iter().map(Self::negate).collect()))
    }

    /// Total number of vertices and edges over all extension targets.
    pub fn context_size(&self) -> usize {
        match self {
            Condition::True => 0,
            Condition::Exists(x) => x.target.size() + x.inner.context_size(),
            Condition::Not(c) => c.context_size(),
            Condition::And(cs) => cs.iter().map(Condition::context_size).sum(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Condition::True => 0,
            Condition::Exists(x) => 1 + x.inner.depth(),
            Condition::Not(c) => c.depth(),
            Condition::And(cs) => cs.iter().map(Condition::depth).max().unwrap_or(0),
        }
    }

    /// Re-roots the condition along `phi: X' → X` (a mono), giving a
    /// condition over `X'` whose top-level embeddings are `emb ∘ phi`. When
    /// `phi` is an iso this is satisfaction-preserving relabelling.
    pub fn precompose(&self, phi: &Morphism) -> Condition {
        match self {
            Condition::True => Condition::True,
            Condition::Exists(x) => Condition::exists(x.target.clone(), phi.then(&x.embedding), x.inner.clone()),
            Condition::Not(c) => Condition::negate(c.precompose(phi)),
            Condition::And(cs) => Condition::And(cs.iter().map(|c| c.precompose(phi)).collect()),
        }
    }
}

/// Checks that every embedding is a mono from the enclosing root.
pub fn check_rooted(root: &Graph, c: &Condition) -> Result<(), ConditionError> {
    match c {
        Condition::True => Ok(()),
        Condition::Exists(x) => {
            x.embedding.check_mono(root, &x.target).map_err(ConditionError::RootMismatch)?;
            check_rooted(&x.target, &x.inner)
        }
        Condition::Not(c) => check_rooted(root, c),
        Condition::And(cs) => cs.iter().try_for_each(|c| check_rooted(root, c)),
    }
}

/// `h ⊨ c` for a mono `h: root ↪ z`; no validation.
pub fn holds(h: &Morphism, z: &Graph, c: &Condition) -> bool {
    match c {
        Condition::True => true,
        Condition::Not(c) => !holds(h, z, c),
        Condition::And(cs) => cs.iter().all(|c| holds(h, z, c)),
        Condition::Exists(x) => {
            let seed = Seed::along(&x.target, &x.embedding, h);
            for_each_mono(&x.target, z, Some(seed), |g| if holds(g, z, &x.inner) { ControlFlow::Break(()) } else { ControlFlow::Continue(()) }).is_break()
        }
    }
}

/// `h ⊨ c` with `h: root ↪ z` checked to be a mono.
pub fn satisfies(root: &Graph, z: &Graph, h: &Morphism, c: &Condition) -> Result<bool, ConditionError> {
    h.check_mono(root, z).map_err(ConditionError::RootMismatch)?;
    check_rooted(root, c)?;
    Ok(holds(h, z, c))
}

/// `z ⊨ c` for a constraint `c` (rooted at the empty graph).
pub fn graph_satisfies(z: &Graph, c: &Condition) -> bool {
    holds(&Morphism::from_empty(), z, c)
}

/// Shift along a mono `f: X ↪ Y`: the condition over `Y` satisfied by `g`
/// exactly when `g ∘ f` satisfies `c`.
#[allow(clippy::only_used_in_recursion)]
pub fn shift(x: &Graph, y: &Graph, f: &Morphism, c: &Condition) -> Condition {
    match c {
        Condition::True => Condition::True,
        Condition::Not(c) => Condition::negate(shift(x, y, f, c)),
        Condition::And(cs) => Condition::And(cs.iter().map(|c| shift(x, y, f, c)).collect()),
        Condition::Exists(ext) => {
            let fixed = PartialIso::along(f, &ext.embedding);
            let mut terms = Vec::new();
            for overlap in partial_isos(y, &ext.target, &fixed) {
                let glued = overlap.glue(y, &ext.target);
                let inner = shift(&ext.target, &glued.apex, &glued.right, &ext.inner);
                terms.push(Condition::exists(glued.apex, glued.left, inner));
            }
            Condition::or(terms)
        }
    }
}

/// Transports a condition over `far` backwards through the span
/// `near ← K → far` of monos. For a match `m: near ↪ X` and its comatch
/// `n: far ↪ Y`, `m ⊨ trans(c)` iff `n ⊨ c`.
///
/// Each `∃(a: far ↪ Y')` layer takes the pushout complement of `K → far → Y'`
/// (false if it does not exist) and glues the complement to `near` along
/// `K`.
pub fn trans(span: &Span, near: &Graph, far: &Graph, c: &Condition) -> Result<Condition, ConditionError> {
    if !span.left.is_mono(&span.apex, near) || !span.right.is_mono(&span.apex, far) {
        return Err(ConditionError::NonMonoSpan);
    }
    Ok(trans_unchecked(span, near, far, c))
}

fn trans_unchecked(span: &Span, near: &Graph, far: &Graph, c: &Condition) -> Condition {
    match c {
        Condition::True => Condition::True,
        Condition::Not(c) => Condition::negate(trans_unchecked(span, near, far, c)),
        Condition::And(cs) => Condition::And(cs.iter().map(|c| trans_unchecked(span, near, far, c)).collect()),
        Condition::Exists(ext) => {
            let Some(z) = pushout_complement(&span.apex, far, &ext.target, &span.right, &ext.embedding) else {
                return Condition::falsity();
            };
            let glued = pushout(&span.apex, near, &z.object, &span.left, &z.first).expect("well-formed span");
            let inner_span = Span { apex: z.object, left: glued.right, right: z.second };
            let inner = trans_unchecked(&inner_span, &glued.apex, &ext.target, &ext.inner);
            Condition::exists(glued.apex, glued.left, inner)
        }
    }
}

/// Graphs whose presence is globally forbidden (negative constraints
/// `¬∃(∅ ↪ N)`). Used to simplify conditions that can only be satisfied in
/// states violating a constraint.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Forbidden(pub Vec<Graph>);

impl Forbidden {
    pub fn none() -> Self {
        Forbidden(Vec::new())
    }

    /// Collects `N` from every top-level conjunct of the form `¬∃(∅ ↪ N)`.
    pub fn from_constraints<'a>(cs: impl IntoIterator<Item = &'a Condition>) -> Self {
        let mut out = Vec::new();
        for c in cs {
            collect_forbidden(c, &mut out);
        }
        Forbidden(out)
    }

    pub fn hits(&self, g: &Graph) -> bool {
        self.0.iter().any(|n| has_mono(n, g, None))
    }
}

fn collect_forbidden(c: &Condition, out: &mut Vec<Graph>) {
    match c {
        Condition::And(cs) => cs.iter().for_each(|c| collect_forbidden(c, out)),
        Condition::Not(inner) => {
            if let Condition::Exists(x) = inner.as_ref() {
                if x.inner.is_true() {
                    out.push(x.target.clone());
                }
            }
        }
        _ => {}
    }
}

/// Normal form used for rule identity: flattened conjunctions, no double
/// negations, no trivially true conjuncts, sorted and deduplicated children,
/// `∃` along an iso replaced by the relabelled inner condition, and `∃`
/// layers whose target contains a forbidden graph replaced by false.
pub fn normalize(root: &Graph, c: &Condition, forbidden: &Forbidden) -> Condition {
    match c {
        Condition::True => Condition::True,
        Condition::Not(inner) => match normalize(root, inner, forbidden) {
            Condition::Not(x) => *x,
            n => Condition::negate(n),
        },
        Condition::And(cs) => {
            let mut flat = Vec::new();
            for c in cs {
                match normalize(root, c, forbidden) {
                    Condition::True => {}
                    Condition::And(xs) => flat.extend(xs),
                    n => flat.push(n),
                }
            }
            if flat.iter().any(Condition::is_false) {
                return Condition::falsity();
            }
            let mut keyed: Vec<(Vec<u64>, Condition)> = flat.into_iter().map(|c| (encode(root, &c), c)).collect();
            keyed.sort_by(|a, b| a.0.cmp(&b.0));
            keyed.dedup_by(|a, b| a.0 == b.0);
            for (k, c) in &keyed {
                if let Condition::Not(x) = c {
                    let kx = encode(root, x);
                    if keyed.iter().any(|(k2, _)| *k2 == kx) && kx != *k {
                        return Condition::falsity();
                    }
                }
            }
            match keyed.len() {
                0 => Condition::True,
                1 => keyed.pop().expect("one").1,
                _ => Condition::And(keyed.into_iter().map(|x| x.1).collect()),
            }
        }
        Condition::Exists(x) => {
            if forbidden.hits(&x.target) {
                return Condition::falsity();
            }
            let inner = normalize(&x.target, &x.inner, forbidden);
            if inner.is_false() {
                return Condition::falsity();
            }
            if x.embedding.is_iso(&x.target) {
                return normalize(root, &inner.precompose(&x.embedding), forbidden);
            }
            Condition::exists(x.target.clone(), x.embedding.clone(), inner)
        }
    }
}

const TOK_TRUE: u64 = u64::MAX;
const TOK_NOT: u64 = u64::MAX - 1;
const TOK_AND: u64 = u64::MAX - 2;
const TOK_EXISTS: u64 = u64::MAX - 3;

/// Encoding of a condition relative to the given numbering of its root.
/// Conditions that differ only by renumbering the extension targets get
/// equal encodings; conjunct order is irrelevant.
#[allow(clippy::only_used_in_recursion)]
pub fn encode(root: &Graph, c: &Condition) -> Vec<u64> {
    match c {
        Condition::True => vec![TOK_TRUE],
        Condition::Not(x) => {
            let mut out = vec![TOK_NOT];
            out.extend(encode(root, x));
            out
        }
        Condition::And(cs) => {
            let mut parts: Vec<Vec<u64>> = cs.iter().map(|c| encode(root, c)).collect();
            parts.sort();
            let mut out = vec![TOK_AND, parts.len() as u64];
            for p in parts {
                out.push(p.len() as u64);
                out.extend(p);
            }
            out
        }
        Condition::Exists(x) => {
            let mut vt = vec![0u32; x.target.vertex_count()];
            let mut et = vec![0u32; x.target.edge_count()];
            for (v, &w) in x.embedding.vmap.iter().enumerate() {
                vt[w] = v as u32 + 1;
            }
            for (e, &f) in x.embedding.emap.iter().enumerate() {
                et[f] = e as u32 + 1;
            }
            let canon = canonical_tagged(&x.target, &vt, &et);
            let inner = if x.inner.is_true() {
                vec![TOK_TRUE]
            } else {
                tagged_labelings(&canon, &vt, &et)
                    .iter()
                    .map(|lab| encode(&canon.graph, &x.inner.precompose(&lab.inverse(&canon.graph))))
                    .min()
                    .expect("at least the canonical labelling")
            };
            let mut out = vec![TOK_EXISTS, canon.key.0.len() as u64];
            out.extend(canon.key.0);
            out.push(inner.len() as u64);
            out.extend(inner);
            out
        }
    }
}

/// Outcome of the sound falsity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Falsity {
    /// No mono out of the root satisfies the condition.
    FalseProven,
    /// `witness: root ↪ graph` satisfies the condition.
    Witnessed {
        graph: Graph,
        witness: Morphism,
    },
    Unknown,
}

/// Sound tri-state satisfiability check. Falsity is only claimed when the
/// normal form is syntactically false; witnesses are searched among the
/// root, the (composed) extension targets of the condition, and all
/// extensions of the root within the default bound
/// `|root| + context size + 2` (capped to keep the search finite and small).
pub fn is_provably_false(root: &Graph, c: &Condition, forbidden: &Forbidden, alphabet: &Alphabet) -> Falsity {
    let n = normalize(root, c, forbidden);
    if n.is_false() {
        return Falsity::FalseProven;
    }
    let mut candidates: Vec<(Graph, Morphism)> = vec![(root.clone(), Morphism::identity(root))];
    collect_targets(&n, &Morphism::identity(root), &mut candidates);
    for (g, h) in &candidates {
        if holds(h, g, &n) && !forbidden.hits(g) {
            return Falsity::Witnessed { graph: g.clone(), witness: h.clone() };
        }
    }
    let bound = root.size() + c.context_size() + 2;
    let max_v = bound.min(root.vertex_count() + 2);
    let max_e = bound.min(root.edge_count() + 2);
    for g in extensions(root, alphabet, max_v, max_e) {
        let h = Morphism::inclusion(root.vertex_count(), root.edge_count());
        if holds(&h, &g, &n) && !forbidden.hits(&g) {
            return Falsity::Witnessed { graph: g, witness: h };
        }
    }
    Falsity::Unknown
}

fn collect_targets(c: &Condition, along: &Morphism, out: &mut Vec<(Graph, Morphism)>) {
    match c {
        Condition::True => {}
        Condition::Not(x) => collect_targets(x, along, out),
        Condition::And(cs) => cs.iter().for_each(|c| collect_targets(c, along, out)),
        Condition::Exists(x) => {
            let h = along.then(&x.embedding);
            out.push((x.target.clone(), h.clone()));
            let mut nested = Vec::new();
            collect_targets(&x.inner, &Morphism::identity(&x.target), &mut nested);
            for (g, inner_h) in nested {
                // root ↪ target ↪ nested target
                out.push((g, h.then(&inner_h)));
            }
        }
    }
}

/// Outcome of the bounded equivalence check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    /// Same truth value on every mono out of the root into graphs within
    /// the bound.
    EquivalentUpToBound,
    Inequivalent {
        graph: Graph,
        witness: Morphism,
    },
}

/// Compares two conditions over the same root on every extension of the
/// root with at most `max_vertices` vertices and `max_edges` edges.
pub fn conditions_equivalent(
    root: &Graph,
    c1: &Condition,
    c2: &Condition,
    alphabet: &Alphabet,
    max_vertices: usize,
    max_edges: usize,
) -> Result<Equivalence, ConditionError> {
    check_rooted(root, c1)?;
    check_rooted(root, c2)?;
    let h = Morphism::inclusion(root.vertex_count(), root.edge_count());
    for g in extensions(root, alphabet, max_vertices, max_edges) {
        if holds(&h, &g, c1) != holds(&h, &g, c2) {
            return Ok(Equivalence::Inequivalent { graph: g, witness: h });
        }
    }
    Ok(Equivalence::EquivalentUpToBound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_vertices_plus_edge() -> (Graph, Morphism) {
        (Graph::untyped(2, &[(0, 1)]), Morphism::new(vec![0, 1], vec![]))
    }

    /// ¬∃(•• ↪ •–•): the two root vertices are not linked.
    fn unlinked() -> Condition {
        let (t, e) = two_vertices_plus_edge();
        Condition::negate(Condition::exists_plain(t, e))
    }

    #[test]
    fn at_least_two_vertices() {
        let c1 = Condition::exists_plain(Graph::discrete(2), Morphism::default());
        assert!(graph_satisfies(&Graph::discrete(2), &c1));
        assert!(!graph_satisfies(&Graph::discrete(1), &c1));
    }

    #[test]
    fn no_multiedges() {
        let double = Graph::untyped(2, &[(0, 1), (0, 1)]);
        let cs = Condition::negate(Condition::exists_plain(double.clone(), Morphism::default()));
        assert!(!graph_satisfies(&double, &cs));
        assert!(graph_satisfies(&Graph::untyped(2, &[(0, 1)]), &cs));
    }

    #[test]
    fn shift_is_sound_on_small_graphs() {
        // shift ¬∃(•• ↪ •–•) along • ↪ •• (first vertex)
        let root = Graph::discrete(2);
        let c = unlinked();
        let y = Graph::discrete(3);
        let f = Morphism::new(vec![0, 1], vec![]);
        let s = shift(&root, &y, &f, &c);
        check_rooted(&y, &s).unwrap();
        let h = Morphism::inclusion(3, 0);
        for z in extensions(&y, &Alphabet::untyped(), 4, 3) {
            assert_eq!(holds(&h, &z, &s), holds(&f.then(&h), &z, &c));
        }
    }

    #[test]
    fn normalization_collapses() {
        let root = Graph::discrete(2);
        let c = unlinked();
        let both = Condition::And(vec![c.clone(), Condition::negate(c.clone())]);
        assert!(normalize(&root, &both, &Forbidden::none()).is_false());
        let dbl = Condition::negate(Condition::negate(c.clone()));
        assert_eq!(normalize(&root, &dbl, &Forbidden::none()), c);
        let iso = Condition::exists(root.clone(), Morphism::new(vec![1, 0], vec![]), c.clone());
        let n = normalize(&root, &iso, &Forbidden::none());
        assert_eq!(encode(&root, &n), encode(&root, &c));
    }

    #[test]
    fn encoding_ignores_target_numbering() {
        let root = Graph::discrete(1);
        let a = Condition::exists_plain(Graph::untyped(2, &[(0, 1)]), Morphism::new(vec![0], vec![]));
        let b = Condition::exists_plain(Graph::untyped(2, &[(0, 1)]), Morphism::new(vec![1], vec![]));
        assert_eq!(encode(&root, &a), encode(&root, &b));
        let loopy = Condition::exists_plain(Graph::untyped(1, &[(0, 0)]), Morphism::new(vec![0], vec![]));
        assert_ne!(encode(&root, &a), encode(&root, &loopy));
    }

    #[test]
    fn falsity_tristate() {
        let root = Graph::new();
        let pair = Graph::untyped(2, &[(0, 1), (0, 1)]);
        let c2 = Condition::negate(Condition::exists_plain(pair, Morphism::default()));
        assert!(matches!(is_provably_false(&root, &c2, &Forbidden::none(), &Alphabet::untyped()), Falsity::Witnessed { .. }));
        assert_eq!(is_provably_false(&root, &Condition::falsity(), &Forbidden::none(), &Alphabet::untyped()), Falsity::FalseProven);
    }

    #[test]
    fn forall_is_not_exists_not() {
        let root = Graph::discrete(1);
        let (t, _) = two_vertices_plus_edge();
        let e = Morphism::new(vec![0], vec![]);
        // inner: the far vertex carries a loop
        let inner = Condition::exists_plain(Graph::untyped(2, &[(0, 1), (1, 1)]), Morphism::new(vec![0, 1], vec![0]));
        let a = Condition::forall(t.clone(), e.clone(), inner.clone());
        let b = Condition::negate(Condition::exists(t, e, Condition::negate(inner)));
        let eq = conditions_equivalent(&root, &a, &b, &Alphabet::untyped(), 3, 3).unwrap();
        assert_eq!(eq, Equivalence::EquivalentUpToBound);
    }

    #[test]
    fn two_vertices_vs_true() {
        let c = Condition::exists_plain(Graph::discrete(2), Morphism::default());
        match conditions_equivalent(&Graph::new(), &c, &Condition::True, &Alphabet::untyped(), 2, 1).unwrap() {
            Equivalence::Inequivalent { graph, .. } => assert!(graph.is_empty()),
            other => panic!("{other:?}"),
        }
    }
}
