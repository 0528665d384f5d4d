//! Executable property checks: random small instances, brute-force
//! oracles, and the algebraic identities the engine must satisfy
//! (associativity, representation homomorphism, concurrency, jump closure,
//! FPC universality, factorization uniqueness).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{dual_project, Algebra, RuleVector, StateVector, Q};
use crate::canon::{canonical, canonical_key, is_isomorphic, GraphKey};
use crate::condition::Condition;
use crate::constructions::{epi_mono_factorize, final_pullback_complement, pullback};
use crate::graph::{Edge, Graph, Morphism};
use crate::rule::{admissible_matches, apply, derive, Rule, Semantics};

/// Every homomorphism `src → tgt` (not necessarily injective).
pub fn homomorphisms(src: &Graph, tgt: &Graph) -> Vec<Morphism> {
    let mut out = Vec::new();
    let mut vmap = vec![0usize; src.vertex_count()];
    hom_vertices(src, tgt, 0, &mut vmap, &mut out);
    out
}

fn hom_vertices(src: &Graph, tgt: &Graph, v: usize, vmap: &mut Vec<usize>, out: &mut Vec<Morphism>) {
    if v == src.vertex_count() {
        let mut emap = vec![0usize; src.edge_count()];
        hom_edges(src, tgt, 0, vmap, &mut emap, out);
        return;
    }
    for w in 0..tgt.vertex_count() {
        if tgt.vertex_label(w) == src.vertex_label(v) {
            vmap[v] = w;
            hom_vertices(src, tgt, v + 1, vmap, out);
        }
    }
}

fn hom_edges(src: &Graph, tgt: &Graph, e: usize, vmap: &[usize], emap: &mut Vec<usize>, out: &mut Vec<Morphism>) {
    if e == src.edge_count() {
        out.push(Morphism { vmap: vmap.to_vec(), emap: emap.clone() });
        return;
    }
    let ed = src.edge(e);
    let want = Edge::new(vmap[ed.ends.0], vmap[ed.ends.1], ed.label);
    for (f, fe) in tgt.edges().iter().enumerate() {
        if *fe == want {
            emap[e] = f;
            hom_edges(src, tgt, e + 1, vmap, emap, out);
        }
    }
}

/// Random untyped graph with at most `max_v` vertices and `max_e` edges.
pub fn random_graph(rng: &mut impl Rng, max_v: usize, max_e: usize) -> Graph {
    let n = rng.gen_range(0..=max_v);
    let mut g = Graph::discrete(n);
    if n > 0 {
        for _ in 0..rng.gen_range(0..=max_e) {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            g.add_edge(a, b, 0);
        }
    }
    g
}

/// Random subgraph inclusion into `g`.
fn random_subgraph(rng: &mut impl Rng, g: &Graph, p: f64) -> (Graph, Morphism) {
    let keep_v: Vec<bool> = (0..g.vertex_count()).map(|_| rng.gen_bool(p)).collect();
    let keep_e: Vec<bool> = g.edges().iter().map(|e| keep_v[e.ends.0] && keep_v[e.ends.1] && rng.gen_bool(p)).collect();
    g.subgraph(&keep_v, &keep_e).expect("kept edges have kept ends")
}

/// Random mono extension `g ↪ h` adding up to `extra_v` vertices and
/// `extra_e` edges.
fn random_extension(rng: &mut impl Rng, g: &Graph, extra_v: usize, extra_e: usize) -> (Graph, Morphism) {
    let mut h = g.clone();
    for _ in 0..rng.gen_range(0..=extra_v) {
        h.add_vertex(0);
    }
    if h.vertex_count() > 0 {
        for _ in 0..rng.gen_range(0..=extra_e) {
            let (a, b) = (rng.gen_range(0..h.vertex_count()), rng.gen_range(0..h.vertex_count()));
            h.add_edge(a, b, 0);
        }
    }
    (h, Morphism::inclusion(g.vertex_count(), g.edge_count()))
}

/// Random condition over `root` of nesting depth at most `depth`.
pub fn random_condition(rng: &mut impl Rng, root: &Graph, depth: usize) -> Condition {
    if depth == 0 || rng.gen_bool(0.4) {
        return Condition::True;
    }
    let (target, emb) = random_extension(rng, root, 1, 1);
    let inner = if rng.gen_bool(0.3) { random_condition(rng, &target, depth - 1) } else { Condition::True };
    let c = Condition::exists(target, emb, inner);
    if rng.gen_bool(0.6) {
        Condition::negate(c)
    } else {
        c
    }
}

/// Random linear rule with interfaces of at most `max_v` vertices.
pub fn random_rule(rng: &mut impl Rng, max_v: usize, with_condition: bool) -> Rule {
    let input = random_graph(rng, max_v, 2);
    let (context, i) = random_subgraph(rng, &input, 0.6);
    let room = max_v.saturating_sub(context.vertex_count());
    let (output, o) = random_extension(rng, &context, room.min(2), 2);
    let cond = if with_condition { random_condition(rng, &input, 1) } else { Condition::True };
    Rule::new(output, context, input, o, i, cond).expect("random rule well-formed")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Summary of a property suite run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl Report {
    fn new(name: &str) -> Self {
        Report { name: String::from(name), cases: 0, failures: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn results_multiset(results: impl IntoIterator<Item = Graph>) -> BTreeMap<GraphKey, usize> {
    let mut m = BTreeMap::new();
    for g in results {
        *m.entry(canonical_key(&g)).or_insert(0) += 1;
    }
    m
}

/// `(a*b)*c = a*(b*c)` for one triple.
pub fn check_associativity(alg: &Algebra, r3: &Rule, r2: &Rule, r1: &Rule) -> bool {
    let (a, b, c) = (alg.basis(r3, Q::one()), alg.basis(r2, Q::one()), alg.basis(r1, Q::one()));
    alg.product(&alg.product(&a, &b), &c) == alg.product(&a, &alg.product(&b, &c))
}

/// `ρ(a*b)|X⟩ = ρ(a)ρ(b)|X⟩`.
pub fn check_homomorphism(alg: &Algebra, r2: &Rule, r1: &Rule, x: &Graph) -> bool {
    let (a, b) = (alg.basis(r2, Q::one()), alg.basis(r1, Q::one()));
    let s = StateVector::basis(x);
    alg.represent(&alg.product(&a, &b), &s) == alg.represent(&a, &alg.represent(&b, &s))
}

/// Two-step derivations `X ⇒R1 ⇒R2` are in bijection with one-step
/// derivations along the composites, with equal results.
pub fn check_concurrency(alg: &Algebra, r2: &Rule, r1: &Rule, x: &Graph) -> bool {
    let sem = alg.semantics;
    let mut two_step = Vec::new();
    for m1 in admissible_matches(r1, x, sem) {
        let x1 = derive(r1, x, &m1, sem).expect("admissible").result;
        for m2 in admissible_matches(r2, &x1, sem) {
            two_step.push(apply(r2, &x1, &m2, sem).expect("admissible"));
        }
    }
    let mut one_step = Vec::new();
    for cm in alg.composition_matches(r2, r1) {
        for m in admissible_matches(&cm.composite, x, sem) {
            one_step.push(apply(&cm.composite, x, &m, sem).expect("admissible"));
        }
    }
    results_multiset(two_step) == results_multiset(one_step)
}

/// `⟨|ρ(v)|X⟩ = ⟨|ρ(Ô(v))|X⟩`.
pub fn check_jump_closure(alg: &Algebra, v: &RuleVector, x: &Graph) -> bool {
    let s = StateVector::basis(x);
    dual_project(&alg.represent(v, &s)) == dual_project(&alg.represent(&alg.jump_closure(v), &s))
}

/// FPC of `a: A ↪ B`, `b: B ↪ D` is a pullback, and every pullback of `b`
/// along some `r: E → D` whose `B`-leg factors through `a` factors uniquely
/// through the FPC. Competitors range over all `E` with at most
/// `max_e_vertices` vertices and 2 edges.
pub fn check_fpc(a_g: &Graph, b_g: &Graph, d_g: &Graph, a: &Morphism, b: &Morphism, max_e_vertices: usize) -> Result<(), String> {
    let fpc = final_pullback_complement(a_g, b_g, d_g, a, b);
    let (c_g, c, d) = (&fpc.object, &fpc.first, &fpc.second);
    if !c.is_mono(a_g, c_g) || !d.is_mono(c_g, d_g) {
        return Err(String::from("FPC legs are not mono"));
    }
    // pullback of (b, d) must be A
    let pb = pullback(b_g, c_g, d_g, b, d).map_err(|e| format!("{e}"))?;
    if !is_isomorphic(&pb.apex, a_g) {
        return Err(String::from("FPC square is not a pullback"));
    }
    for e_g in small_graphs(max_e_vertices, 2) {
        for r in homomorphisms(&e_g, d_g) {
            let Ok(pb) = pullback(b_g, &e_g, d_g, b, &r) else { continue };
            // does the B-leg factor through a?
            let (ainv_v, ainv_e) = a.preimage(b_g);
            if pb.left.vmap.iter().any(|&v| ainv_v[v].is_none()) || pb.left.emap.iter().any(|&e| ainv_e[e].is_none()) {
                continue;
            }
            // mediating s: E → C with d∘s = r exists iff r lands in the image of d
            let (dinv_v, dinv_e) = d.preimage(d_g);
            let ok = r.vmap.iter().all(|&v| dinv_v[v].is_some()) && r.emap.iter().all(|&e| dinv_e[e].is_some());
            if !ok {
                return Err(format!("no mediating morphism for competitor {e_g:?} via {r:?}"));
            }
        }
    }
    Ok(())
}

/// All untyped graphs on exactly `0..=max_v` vertices with at most `max_e`
/// edges, not reduced up to isomorphism.
pub fn small_graphs(max_v: usize, max_e: usize) -> Vec<Graph> {
    crate::matching::extensions(&Graph::new(), &crate::matching::Alphabet::untyped(), max_v, max_e)
}

/// Re-factorizing `m∘e` yields a factorization isomorphic to `(e, m)`.
pub fn check_factorization(a: &Graph, img: &Graph, b: &Graph, e: &Morphism, m: &Morphism) -> bool {
    let f = e.then(m);
    let fac = epi_mono_factorize(a, b, &f);
    if fac.epi.then(&fac.mono) != f || !fac.mono.is_mono(&fac.image, b) || !fac.epi.is_surjective_onto(&fac.image) {
        return false;
    }
    if !fac.epi.is_homomorphism(a, &fac.image) {
        return false;
    }
    // the comparison iso img → image is m followed by the inverse of mono
    let (inv_v, inv_e) = fac.mono.preimage(b);
    let iso = Morphism {
        vmap: m.vmap.iter().map(|&v| inv_v[v].unwrap_or(usize::MAX)).collect(),
        emap: m.emap.iter().map(|&x| inv_e[x].unwrap_or(usize::MAX)).collect(),
    };
    iso.vmap.iter().all(|&v| v != usize::MAX)
        && iso.emap.iter().all(|&x| x != usize::MAX)
        && iso.is_mono(img, &fac.image)
        && iso.is_iso(&fac.image)
        && e.then(&iso) == fac.epi
        && canonical(img).key == canonical(&fac.image).key
}

/// Random epi `A ↠ img` and mono `img ↪ B`.
pub fn random_epi_mono(rng: &mut impl Rng, max_v: usize) -> (Graph, Graph, Graph, Morphism, Morphism) {
    let img = random_graph(rng, max_v.min(3), 3);
    // A: each vertex of img gets 1-2 preimages, each edge 1-2 preimages
    let mut a = Graph::new();
    let mut ev = Vec::new();
    for v in 0..img.vertex_count() {
        for _ in 0..rng.gen_range(1..=2) {
            a.add_vertex(img.vertex_label(v));
            ev.push(v);
        }
    }
    let pre: Vec<Vec<usize>> = (0..img.vertex_count()).map(|v| (0..a.vertex_count()).filter(|&x| ev[x] == v).collect()).collect();
    let mut ee = Vec::new();
    for (i, e) in img.edges().iter().enumerate() {
        for _ in 0..rng.gen_range(1..=2) {
            let x = pre[e.ends.0][rng.gen_range(0..pre[e.ends.0].len())];
            let y = pre[e.ends.1][rng.gen_range(0..pre[e.ends.1].len())];
            a.add_edge(x, y, e.label);
            ee.push(i);
        }
    }
    let (b, m) = random_extension(rng, &img, 2, 2);
    (a, img, b, Morphism { vmap: ev, emap: ee }, m)
}

/// Runs `count` random cases of a suite; `case` returns an error message on
/// failure.
pub fn run_suite(name: &str, count: usize, seed: u64, mut case: impl FnMut(&mut ChaCha8Rng) -> Result<(), String>) -> Report {
    let mut report = Report::new(name);
    let mut r = rng(seed);
    for i in 0..count {
        report.cases += 1;
        if let Err(msg) = case(&mut r) {
            report.failures.push(format!("case {i}: {msg}"));
        }
    }
    report
}

/// The standard property suites with `count` cases each.
pub fn standard_suites(count: usize, seed: u64) -> Vec<Report> {
    let mut out = Vec::new();
    for sem in [Semantics::Dpo, Semantics::Sqpo] {
        let alg = Algebra::new(sem);
        let tag = match sem {
            Semantics::Dpo => "dpo",
            Semantics::Sqpo => "sqpo",
        };
        out.push(run_suite(&format!("associativity/{tag}"), count, seed, |r| {
            let (a, b, c) = (random_rule(r, 3, true), random_rule(r, 3, true), random_rule(r, 3, true));
            if check_associativity(&alg, &a, &b, &c) {
                Ok(())
            } else {
                Err(format!("{a:?}\n{b:?}\n{c:?}"))
            }
        }));
        out.push(run_suite(&format!("homomorphism/{tag}"), count, seed + 1, |r| {
            let (a, b, x) = (random_rule(r, 2, true), random_rule(r, 2, true), random_graph(r, 4, 3));
            if check_homomorphism(&alg, &a, &b, &x) {
                Ok(())
            } else {
                Err(format!("{a:?}\n{b:?}\n{x:?}"))
            }
        }));
        out.push(run_suite(&format!("concurrency/{tag}"), count, seed + 2, |r| {
            let (a, b, x) = (random_rule(r, 2, true), random_rule(r, 2, true), random_graph(r, 4, 3));
            if check_concurrency(&alg, &a, &b, &x) {
                Ok(())
            } else {
                Err(format!("{a:?}\n{b:?}\n{x:?}"))
            }
        }));
        out.push(run_suite(&format!("jump-closure/{tag}"), count, seed + 3, |r| {
            let (a, x) = (random_rule(r, 3, true), random_graph(r, 4, 3));
            let v = alg.basis(&a, Q::one());
            if check_jump_closure(&alg, &v, &x) {
                Ok(())
            } else {
                Err(format!("{a:?}\n{x:?}"))
            }
        }));
    }
    out.push(run_suite("fpc-universality", count, seed + 4, |r| {
        let d = random_graph(r, 5, 4);
        let (b, bd) = random_subgraph(r, &d, 0.5);
        let (a, ab) = random_subgraph(r, &b, 0.5);
        check_fpc(&a, &b, &d, &ab, &bd, 2)
    }));
    out.push(run_suite("epi-mono-uniqueness", count, seed + 5, |r| {
        let (a, img, b, e, m) = random_epi_mono(r, 5);
        if check_factorization(&a, &img, &b, &e, &m) {
            Ok(())
        } else {
            Err(format!("{a:?}\n{img:?}\n{b:?}"))
        }
    }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homomorphism_count() {
        // edge into a single edge: 2 vertex maps
        assert_eq!(homomorphisms(&Graph::untyped(2, &[(0, 1)]), &Graph::untyped(2, &[(0, 1)])).len(), 2);
        // edge into a loop: collapse
        assert_eq!(homomorphisms(&Graph::untyped(2, &[(0, 1)]), &Graph::untyped(1, &[(0, 0)])).len(), 1);
    }
}
