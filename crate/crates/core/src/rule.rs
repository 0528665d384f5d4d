//! Linear rules with application conditions and their direct derivations.

use alloc::vec;
use alloc::vec::Vec;

use crate::canon::{canonical, canonical_tagged, tagged_labelings, Canonical, GraphKey};
use crate::condition::{check_rooted, encode, holds, normalize, shift, trans, Condition, Forbidden};
use crate::constructions::{final_pullback_complement, pushout, pushout_complement, Complement};
use crate::error::RuleError;
use crate::graph::{Graph, Morphism, Span};
use crate::matching::monos;

/// Rewriting semantics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Semantics {
    Dpo,
    Sqpo,
}

/// A rule `O ↩ K ↪ I` with a condition over `I`. Rules are applied from
/// input `I` to output `O`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub output: Graph,
    pub context: Graph,
    pub input: Graph,
    /// K ↪ O
    pub o: Morphism,
    /// K ↪ I
    pub i: Morphism,
    pub cond: Condition,
}

impl Rule {
    pub fn new(output: Graph, context: Graph, input: Graph, o: Morphism, i: Morphism, cond: Condition) -> Result<Self, RuleError> {
        o.check_mono(&context, &output).map_err(RuleError::NonMonoLeg)?;
        i.check_mono(&context, &input).map_err(RuleError::NonMonoLeg)?;
        check_rooted(&input, &cond)?;
        Ok(Rule { output, context, input, o, i, cond })
    }

    /// The identity rule `P = P = P` with a condition over `P`.
    pub fn identity(pattern: Graph, cond: Condition) -> Self {
        let id = Morphism::identity(&pattern);
        Rule { output: pattern.clone(), context: pattern.clone(), input: pattern, o: id.clone(), i: id, cond }
    }

    /// The empty rule `∅ ↩ ∅ ↪ ∅`, the algebra unit.
    pub fn empty() -> Self {
        Self::identity(Graph::new(), Condition::True)
    }

    /// Rule from an unconditioned span with `K` given by the legs.
    pub fn plain(output: Graph, context: Graph, input: Graph, o: Morphism, i: Morphism) -> Result<Self, RuleError> {
        Self::new(output, context, input, o, i, Condition::True)
    }

    pub fn span(&self) -> Span {
        Span { apex: self.context.clone(), left: self.o.clone(), right: self.i.clone() }
    }

    /// Parallel composition `R ⊎ R'`: componentwise disjoint unions, with
    /// both conditions shifted onto the joint input.
    pub fn disjoint_union(&self, other: &Rule) -> Rule {
        let (output, o1, o2) = self.output.disjoint_union(&other.output);
        let (context, _, _) = self.context.disjoint_union(&other.context);
        let (input, i1, i2) = self.input.disjoint_union(&other.input);
        let leg = |a: &Morphism, into_a: &Morphism, b: &Morphism, into_b: &Morphism| {
            let (mut m, n) = (a.then(into_a), b.then(into_b));
            m.vmap.extend(n.vmap);
            m.emap.extend(n.emap);
            m
        };
        let o = leg(&self.o, &o1, &other.o, &o2);
        let i = leg(&self.i, &i1, &other.i, &i2);
        let cond = Condition::And(vec![shift(&self.input, &input, &i1, &self.cond), shift(&other.input, &input, &i2, &other.cond)]);
        Rule { output, context, input, o, i, cond }
    }

    /// DPO-style observable shape: `I ↩ K ↪ I` with identical legs.
    pub fn is_dpo_diagonal(&self) -> bool {
        self.output == self.input && self.o == self.i
    }

    /// SqPO-style observable shape: both legs are isos.
    pub fn is_identity_shaped(&self) -> bool {
        self.is_dpo_diagonal() && self.i.is_iso(&self.input)
    }

    /// The rule read backwards, `I ↩ K ↪ O`, with the condition transported
    /// to `O`.
    pub fn reversed(&self) -> Rule {
        let cond = trans(&Span { apex: self.context.clone(), left: self.o.clone(), right: self.i.clone() }, &self.output, &self.input, &self.cond)
            .expect("rule legs are mono");
        Rule { output: self.input.clone(), context: self.context.clone(), input: self.output.clone(), o: self.i.clone(), i: self.o.clone(), cond }
    }

    pub fn key(&self) -> RuleKey {
        rule_key(self, &Forbidden::none())
    }
}

/// Identity of a rule class: the tagged canonical form of `O +_K I` with the
/// normalized condition encoded relative to the canonical numbering of `I`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleKey(pub Vec<u64>);

const TAG_K: u32 = 0;
const TAG_I: u32 = 1;
const TAG_O: u32 = 2;

fn tagged_union(r: &Rule) -> (Graph, Morphism, Vec<u32>, Vec<u32>) {
    let po = pushout(&r.context, &r.output, &r.input, &r.o, &r.i).expect("rule legs well-formed");
    let mut vt = vec![TAG_O; po.apex.vertex_count()];
    let mut et = vec![TAG_O; po.apex.edge_count()];
    po.right.vmap.iter().for_each(|&v| vt[v] = TAG_I);
    po.right.emap.iter().for_each(|&e| et[e] = TAG_I);
    for k in 0..r.context.vertex_count() {
        vt[po.right.vmap[r.i.vmap[k]]] = TAG_K;
    }
    for k in 0..r.context.edge_count() {
        et[po.right.emap[r.i.emap[k]]] = TAG_K;
    }
    (po.apex, po.right, vt, et)
}

/// Isomorphism from `I` onto its copy in canonical numbering, given `I`'s
/// embedding into the canonical union.
fn canonical_input(in_union: &Morphism, vt: &[u32], et: &[u32], c: &Canonical) -> Morphism {
    // canonical numbering of I = order of I-elements inside the canonical union
    let mut vrank = vec![usize::MAX; vt.len()];
    let mut erank = vec![usize::MAX; et.len()];
    let mut is_i_v = vec![false; vt.len()];
    let mut is_i_e = vec![false; et.len()];
    for (u, &w) in c.iso.vmap.iter().enumerate() {
        is_i_v[w] = vt[u] != TAG_O;
    }
    for (u, &w) in c.iso.emap.iter().enumerate() {
        is_i_e[w] = et[u] != TAG_O;
    }
    let mut k = 0;
    for w in 0..vt.len() {
        if is_i_v[w] {
            vrank[w] = k;
            k += 1;
        }
    }
    let mut k = 0;
    for w in 0..et.len() {
        if is_i_e[w] {
            erank[w] = k;
            k += 1;
        }
    }
    let lab = in_union.then(&c.iso);
    Morphism { vmap: lab.vmap.iter().map(|&w| vrank[w]).collect(), emap: lab.emap.iter().map(|&w| erank[w]).collect() }
}

/// Rule class key with the condition normalized against `forbidden`.
pub fn rule_key(r: &Rule, forbidden: &Forbidden) -> RuleKey {
    let (union, in_union, vt, et) = tagged_union(r);
    let canon = canonical_tagged(&union, &vt, &et);
    let cond = normalize(&r.input, &r.cond, forbidden);
    let mut key = canon.key.0.clone();
    key.push(u64::MAX);
    if cond.is_true() {
        key.push(u64::MAX);
        return RuleKey(key);
    }
    let best = tagged_labelings(&canon, &vt, &et)
        .into_iter()
        .map(|lab| {
            let c = Canonical { graph: canon.graph.clone(), iso: lab, key: GraphKey::default() };
            let psi = canonical_input(&in_union, &vt, &et, &c);
            let i_can = r.input.permuted(&psi.vmap, &psi.emap);
            encode(&i_can, &cond.precompose(&psi.inverse(&i_can)))
        })
        .min()
        .expect("identity labelling");
    key.extend(best);
    RuleKey(key)
}

pub fn rules_equal(a: &Rule, b: &Rule) -> bool {
    a.key() == b.key()
}

/// A direct derivation `X ⇒ Y` along a match.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    /// I ↪ X
    pub matched: Morphism,
    /// The complement object `D` with `K ↪ D ↪ X`.
    pub complement: Complement,
    pub result: Graph,
    /// O ↪ Y
    pub comatch: Morphism,
    /// D ↪ Y
    pub d_to_y: Morphism,
}

/// Whether `m: I ↪ X` is admissible, given that it is a mono.
pub fn is_admissible(r: &Rule, x: &Graph, m: &Morphism, sem: Semantics) -> bool {
    holds(m, x, &r.cond) && (sem == Semantics::Sqpo || pushout_complement(&r.context, &r.input, x, &r.i, m).is_some())
}

/// All admissible matches, sorted lexicographically.
pub fn admissible_matches(r: &Rule, x: &Graph, sem: Semantics) -> Vec<Morphism> {
    monos(&r.input, x).into_iter().filter(|m| is_admissible(r, x, m, sem)).collect()
}

/// Builds both squares for an admissible match without canonicalizing.
pub fn derive(r: &Rule, x: &Graph, m: &Morphism, sem: Semantics) -> Result<Derivation, RuleError> {
    if !m.is_mono(&r.input, x) || !holds(m, x, &r.cond) {
        return Err(RuleError::MatchNotAdmissible);
    }
    let complement = match sem {
        Semantics::Dpo => pushout_complement(&r.context, &r.input, x, &r.i, m).ok_or(RuleError::MatchNotAdmissible)?,
        Semantics::Sqpo => final_pullback_complement(&r.context, &r.input, x, &r.i, m),
    };
    let po = pushout(&r.context, &r.output, &complement.object, &r.o, &complement.first).expect("legs well-formed");
    Ok(Derivation { matched: m.clone(), complement, result: po.apex, comatch: po.left, d_to_y: po.right })
}

/// `R_m(X)` in canonical form.
pub fn apply(r: &Rule, x: &Graph, m: &Morphism, sem: Semantics) -> Result<Graph, RuleError> {
    Ok(canonical(&derive(r, x, m, sem)?.result).graph)
}

/// Comatches `O ↪ Y` for which the output square admits a pushout
/// complement (DPO† admissibility).
pub fn dpo_dagger_matches(r: &Rule, y: &Graph) -> Vec<Morphism> {
    monos(&r.output, y).into_iter().filter(|m| pushout_complement(&r.context, &r.output, y, &r.o, m).is_some()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::is_isomorphic;

    fn vertex_dup() -> Rule {
        // R_V = (• ↩ ∅ ↪ •)
        Rule::plain(Graph::discrete(1), Graph::new(), Graph::discrete(1), Morphism::default(), Morphism::default()).unwrap()
    }

    fn vertex_plus_edge() -> Graph {
        Graph::untyped(3, &[(1, 2)])
    }

    #[test]
    fn dpo_rejects_dangling_matches() {
        assert_eq!(admissible_matches(&vertex_dup(), &vertex_plus_edge(), Semantics::Dpo).len(), 1);
        assert_eq!(admissible_matches(&vertex_dup(), &vertex_plus_edge(), Semantics::Sqpo).len(), 3);
    }

    #[test]
    fn edge_creation_blocked_by_condition() {
        let two = Graph::discrete(2);
        let edge = Graph::untyped(2, &[(0, 1)]);
        let cond = Condition::negate(Condition::exists_plain(edge.clone(), Morphism::new(vec![0, 1], vec![])));
        let rc = Rule::new(edge.clone(), two.clone(), two.clone(), Morphism::new(vec![0, 1], vec![]), Morphism::identity(&two), cond).unwrap();
        assert!(admissible_matches(&rc, &edge, Semantics::Dpo).is_empty());
        let y = apply(&rc, &two, &Morphism::identity(&two), Semantics::Dpo).unwrap();
        assert!(is_isomorphic(&y, &edge));
    }

    #[test]
    fn sqpo_deletion_side_effect() {
        let del = Rule::plain(Graph::new(), Graph::new(), Graph::discrete(1), Morphism::default(), Morphism::default()).unwrap();
        let x = Graph::untyped(2, &[(0, 1)]);
        let y = apply(&del, &x, &Morphism::new(vec![0], vec![]), Semantics::Sqpo).unwrap();
        assert!(is_isomorphic(&y, &Graph::discrete(1)));
        assert!(apply(&del, &x, &Morphism::new(vec![0], vec![]), Semantics::Dpo).is_err());
    }

    #[test]
    fn identity_rule_preserves_state() {
        let p = Graph::untyped(2, &[(0, 1)]);
        let x = Graph::untyped(3, &[(0, 1), (1, 2)]);
        let r = Rule::identity(p, Condition::True);
        for m in admissible_matches(&r, &x, Semantics::Dpo) {
            assert!(is_isomorphic(&apply(&r, &x, &m, Semantics::Dpo).unwrap(), &x));
        }
    }

    #[test]
    fn dagger_matches() {
        let edge = Graph::untyped(2, &[(0, 1)]);
        let two = Graph::discrete(2);
        let create = Rule::plain(edge.clone(), two.clone(), two.clone(), Morphism::new(vec![0, 1], vec![]), Morphism::identity(&two)).unwrap();
        assert_eq!(dpo_dagger_matches(&create, &edge).len(), 2);
        let spawn = Rule::plain(Graph::discrete(1), Graph::new(), Graph::new(), Morphism::default(), Morphism::default()).unwrap();
        assert!(dpo_dagger_matches(&spawn, &Graph::untyped(1, &[(0, 0)])).is_empty());
    }

    #[test]
    fn keys_identify_relabelled_rules() {
        let rv = vertex_dup();
        assert!(rules_equal(&rv, &rv.reversed()));
        let edge = Graph::untyped(2, &[(0, 1)]);
        let two = Graph::discrete(2);
        let cond = Condition::negate(Condition::exists_plain(edge.clone(), Morphism::new(vec![0, 1], vec![])));
        let with = Rule::new(edge.clone(), two.clone(), two.clone(), Morphism::new(vec![0, 1], vec![]), Morphism::identity(&two), cond.clone()).unwrap();
        let without = Rule::plain(edge.clone(), two.clone(), two.clone(), Morphism::new(vec![0, 1], vec![]), Morphism::identity(&two)).unwrap();
        assert!(!rules_equal(&with, &without));
        let swapped = Rule::new(edge, two.clone(), two.clone(), Morphism::new(vec![1, 0], vec![]), Morphism::new(vec![1, 0], vec![]), cond).unwrap();
        assert!(rules_equal(&with, &swapped));
    }
}
