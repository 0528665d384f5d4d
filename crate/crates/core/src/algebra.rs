//! The rule algebra: rule composition along overlaps, the bilinear product,
//! commutators, the canonical representation on state vectors and the jump
//! closure.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::canon::{canonical, GraphKey};
use crate::condition::{normalize, shift, trans, Condition, Forbidden};
use crate::constructions::{final_pullback_complement, pullback, pushout, pushout_complement};
use crate::graph::{Graph, Span};
use crate::matching::{partial_isos, PartialIso};
use crate::rule::{admissible_matches, apply, rule_key, Rule, RuleKey, Semantics};

/// Exact coefficients.
pub type Q = Ratio<i64>;

/// Semantics plus the global negative constraints used to simplify
/// composite conditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Algebra {
    pub semantics: Semantics,
    pub forbidden: Forbidden,
}

/// One admissible composition of `R2` after `R1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositionMatch {
    /// Pairs (element of I2, element of O1).
    pub overlap: PartialIso,
    /// The glued object N21 with `I2 → N21 ← O1`.
    pub n21: Graph,
    pub composite: Rule,
}

/// A finitely supported rational combination of rule classes. Each entry
/// keeps one representative rule with its normalized condition; equality
/// compares classes and coefficients only.
#[derive(Clone, Debug, Default)]
pub struct RuleVector(pub BTreeMap<RuleKey, (Rule, Q)>);

impl PartialEq for RuleVector {
    fn eq(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|((k1, e1), (k2, e2))| k1 == k2 && e1.1 == e2.1)
    }
}

impl Eq for RuleVector {}

/// A finitely supported rational combination of graph iso-classes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StateVector(pub BTreeMap<GraphKey, (Graph, Q)>);

impl Algebra {
    pub fn new(semantics: Semantics) -> Self {
        Algebra { semantics, forbidden: Forbidden::none() }
    }

    pub fn with_forbidden(semantics: Semantics, forbidden: Forbidden) -> Self {
        Algebra { semantics, forbidden }
    }

    /// The representative stored for a rule: condition normalized.
    pub fn normalized(&self, r: &Rule) -> Rule {
        let mut r = r.clone();
        r.cond = normalize(&r.input, &r.cond, &self.forbidden);
        r
    }

    pub fn key(&self, r: &Rule) -> RuleKey {
        rule_key(r, &self.forbidden)
    }

    /// `δ(R)` scaled by `c`.
    pub fn basis(&self, r: &Rule, c: Q) -> RuleVector {
        let mut v = RuleVector::default();
        v.add_rule(self, r, c);
        v
    }

    /// Composes `r2` after `r1` along one overlap of `I2` with `O1`.
    /// `None` when the overlap is not admissible.
    pub fn compose_along(&self, r2: &Rule, r1: &Rule, overlap: &PartialIso) -> Option<CompositionMatch> {
        let n = overlap.glue(&r2.input, &r1.output);
        let (i2_n, o1_n) = (&n.left, &n.right);
        // R2 side: complement of K2 → I2 → N21, then O21 by pushout
        let d2 = match self.semantics {
            Semantics::Dpo => pushout_complement(&r2.context, &r2.input, &n.apex, &r2.i, i2_n)?,
            Semantics::Sqpo => final_pullback_complement(&r2.context, &r2.input, &n.apex, &r2.i, i2_n),
        };
        let o21 = pushout(&r2.context, &r2.output, &d2.object, &r2.o, &d2.first).ok()?;
        // R1 side, read backwards: complement of K1 → O1 → N21, then I21
        let d1 = pushout_complement(&r1.context, &r1.output, &n.apex, &r1.o, o1_n)?;
        let i21 = pushout(&r1.context, &r1.input, &d1.object, &r1.i, &d1.first).ok()?;
        if self.forbidden.hits(&i21.apex) {
            return None;
        }
        // K21 as the pullback of D2 → N21 ← D1
        let k21 = pullback(&d2.object, &d1.object, &n.apex, &d2.second, &d1.second).ok()?;
        let o = k21.left.then(&o21.right);
        let i = k21.right.then(&i21.right);
        // c_I21 = Shift(I1 ↪ I21, c1) ∧ Trans(I21 ← D1 → N21, Shift(I2 ↪ N21, c2))
        let c1 = shift(&r1.input, &i21.apex, &i21.left, &r1.cond);
        let c2n = shift(&r2.input, &n.apex, i2_n, &r2.cond);
        let back = Span { apex: d1.object.clone(), left: i21.right.clone(), right: d1.second.clone() };
        let c2 = trans(&back, &i21.apex, &n.apex, &c2n).ok()?;
        let cond = normalize(&i21.apex, &Condition::And(alloc::vec![c1, c2]), &self.forbidden);
        if cond.is_false() {
            return None;
        }
        let composite = Rule { output: o21.apex, context: k21.apex, input: i21.apex, o, i, cond };
        Some(CompositionMatch { overlap: overlap.clone(), n21: n.apex, composite })
    }

    /// All admissible compositions of `r2` after `r1`.
    pub fn composition_matches(&self, r2: &Rule, r1: &Rule) -> Vec<CompositionMatch> {
        partial_isos(&r2.input, &r1.output, &PartialIso::default()).iter().filter_map(|mu| self.compose_along(r2, r1, mu)).collect()
    }

    /// `δ(R2) * δ(R1) = Σ_μ δ(R2 ∘_μ R1)`.
    pub fn compose(&self, r2: &Rule, r1: &Rule) -> RuleVector {
        let mut out = RuleVector::default();
        for m in self.composition_matches(r2, r1) {
            out.add_rule(self, &m.composite, Q::one());
        }
        out
    }

    pub fn product(&self, a: &RuleVector, b: &RuleVector) -> RuleVector {
        let mut out = RuleVector::default();
        for (r2, c2) in a.0.values() {
            for (r1, c1) in b.0.values() {
                for m in self.composition_matches(r2, r1) {
                    out.add_rule(self, &m.composite, c2 * c1);
                }
            }
        }
        out
    }

    /// `[a, b] = a*b − b*a`.
    pub fn commutator(&self, a: &RuleVector, b: &RuleVector) -> RuleVector {
        let mut out = self.product(a, b);
        out.add_scaled(&self.product(b, a), -Q::one());
        out
    }

    /// `ρ(v)|s⟩`: every admissible match of every rule applied to every
    /// state, results collected on canonical keys.
    pub fn represent(&self, v: &RuleVector, s: &StateVector) -> StateVector {
        let mut out = StateVector::default();
        for (r, c) in v.0.values() {
            for (x, d) in s.0.values() {
                for m in admissible_matches(r, x, self.semantics) {
                    let y = apply(r, x, &m, self.semantics).expect("admissible");
                    out.add(&y, c * d);
                }
            }
        }
        out
    }

    /// Jump closure `Ô(v)`: DPO sends `(O ↩ K ↪ I; c)` to `(I ↩ K ↪ I; c)`,
    /// SqPO to `(I = I = I; c)`.
    pub fn jump_closure(&self, v: &RuleVector) -> RuleVector {
        let mut out = RuleVector::default();
        for (r, c) in v.0.values() {
            out.add_rule(self, &jump_closure_rule(r, self.semantics), *c);
        }
        out
    }
}

pub fn jump_closure_rule(r: &Rule, sem: Semantics) -> Rule {
    match sem {
        Semantics::Dpo => {
            Rule { output: r.input.clone(), context: r.context.clone(), input: r.input.clone(), o: r.i.clone(), i: r.i.clone(), cond: r.cond.clone() }
        }
        Semantics::Sqpo => Rule::identity(r.input.clone(), r.cond.clone()),
    }
}

impl RuleVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_rule(&mut self, alg: &Algebra, r: &Rule, c: Q) {
        if c.is_zero() {
            return;
        }
        let key = alg.key(r);
        let entry = self.0.entry(key.clone()).or_insert_with(|| (alg.normalized(r), Q::zero()));
        entry.1 += c;
        if entry.1.is_zero() {
            self.0.remove(&key);
        }
    }

    /// `self += c · other`; both vectors must use the same algebra keys.
    pub fn add_scaled(&mut self, other: &RuleVector, c: Q) {
        for (k, (r, d)) in &other.0 {
            let e = self.0.entry(k.clone()).or_insert_with(|| (r.clone(), Q::zero()));
            e.1 += c * d;
            if e.1.is_zero() {
                self.0.remove(k);
            }
        }
    }

    pub fn scaled(&self, c: Q) -> RuleVector {
        let mut out = RuleVector::zero();
        out.add_scaled(self, c);
        out
    }

    pub fn coefficient(&self, k: &RuleKey) -> Q {
        self.0.get(k).map_or(Q::zero(), |e| e.1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RuleKey, &Rule, Q)> {
        self.0.iter().map(|(k, (r, c))| (k, r, *c))
    }
}

impl StateVector {
    pub fn basis(x: &Graph) -> Self {
        let mut s = StateVector::default();
        s.add(x, Q::one());
        s
    }

    pub fn add(&mut self, x: &Graph, c: Q) {
        if c.is_zero() {
            return;
        }
        let can = canonical(x);
        let e = self.0.entry(can.key.clone()).or_insert_with(|| (can.graph, Q::zero()));
        e.1 += c;
        if e.1.is_zero() {
            self.0.remove(&can.key);
        }
    }

    pub fn coefficient(&self, x: &Graph) -> Q {
        self.0.get(&canonical(x).key).map_or(Q::zero(), |e| e.1)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

/// `⟨|s⟩`: the sum of coefficients.
pub fn dual_project(s: &StateVector) -> Q {
    s.0.values().map(|e| e.1).sum()
}
