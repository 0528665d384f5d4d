//! Property checks on the rules of one model.
//!
//! States are explored from the model's initial graph, so every state
//! checked is reachable and satisfies the global constraints.

use std::collections::{BTreeSet, VecDeque};

use num_traits::One;
use rand::seq::SliceRandom;
use rulealg_core::algebra::{StateVector, Q};
use rulealg_core::model::{build_generator, ModelSpec};
use rulealg_core::rule::{admissible_matches, apply, Rule};
use rulealg_core::verify::{check_associativity, check_homomorphism, check_jump_closure, rng};
use rulealg_core::{canonical_key, Graph};

use crate::io::{sketch_graph, sketch_rule};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckOptions {
    /// Upper bound on cases per property; exhaustive below it.
    pub cases: usize,
    pub max_states: usize,
    /// Products are only checked when the rules involved have at most this
    /// many vertices and edges in their inputs and outputs together.
    pub max_size: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { cases: 200, max_states: 8, max_size: 30, seed: 0 }
    }
}

/// Breadth-first states reachable from `x0`, deduplicated up to iso.
pub fn reachable_states(spec: &ModelSpec, x0: &Graph, limit: usize) -> Vec<Graph> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::from([x0.clone()]);
    while let Some(x) = queue.pop_front() {
        if out.len() >= limit {
            break;
        }
        if !seen.insert(canonical_key(&x)) {
            continue;
        }
        for t in &spec.transitions {
            for m in admissible_matches(&t.rule, &x, t.semantics) {
                if let Ok(y) = apply(&t.rule, &x, &m, t.semantics) {
                    queue.push_back(y);
                }
            }
        }
        out.push(x);
    }
    out
}

/// All index tuples when there are at most `cases`, otherwise a seeded
/// sample of `cases` of them.
fn tuples(dims: &[usize], cases: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut all = vec![Vec::new()];
    for &d in dims {
        all = all.into_iter().flat_map(|t| (0..d).map(move |i| [t.clone(), vec![i]].concat())).collect();
    }
    if all.len() > cases {
        all.shuffle(&mut rng(seed));
        all.truncate(cases);
        all.sort();
    }
    all
}

/// One property: cases run, cases skipped for size, failures.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub name: String,
    pub cases: usize,
    pub skipped: usize,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn size(r: &Rule) -> usize {
    r.input.size() + r.output.size()
}

pub fn check_model(spec: &ModelSpec, x0: &Graph, opts: CheckOptions) -> Vec<Outcome> {
    let report = |name: &str| Outcome { name: name.into(), ..Outcome::default() };
    let mut shape = report("observables-diagonal");
    shape.cases = 1;
    if let Err(e) = spec.validate() {
        shape.failures.push(e.to_string());
    }
    let alg = match spec.algebra() {
        Ok(a) => a,
        Err(e) => {
            let mut r = report("algebra");
            r.cases = 1;
            r.failures.push(e.to_string());
            return vec![shape, r];
        }
    };
    let rules: Vec<&Rule> = spec.transitions.iter().map(|t| &t.rule).collect();
    let names: Vec<&str> = spec.transitions.iter().map(|t| t.name.as_str()).collect();
    let states = reachable_states(spec, x0, opts.max_states);
    let types = &spec.types;
    let n = rules.len();

    let mut assoc = report("associativity");
    for t in tuples(&[n, n, n], opts.cases, opts.seed) {
        if t.iter().map(|&i| size(rules[i])).sum::<usize>() > opts.max_size {
            assoc.skipped += 1;
            continue;
        }
        assoc.cases += 1;
        if !check_associativity(&alg, rules[t[0]], rules[t[1]], rules[t[2]]) {
            assoc
                .failures
                .push(format!("({} * {}) * {} differs from {} * ({} * {})", names[t[0]], names[t[1]], names[t[2]], names[t[0]], names[t[1]], names[t[2]]));
        }
    }

    let mut hom = report("representation-homomorphism");
    for t in tuples(&[n, n, states.len()], opts.cases, opts.seed + 1) {
        if size(rules[t[0]]) + size(rules[t[1]]) > opts.max_size {
            hom.skipped += 1;
            continue;
        }
        hom.cases += 1;
        if !check_homomorphism(&alg, rules[t[0]], rules[t[1]], &states[t[2]]) {
            hom.failures.push(format!("{} * {} on {}", names[t[0]], names[t[1]], sketch_graph(&states[t[2]], types)));
        }
    }

    let mut jc = report("jump-closure");
    for t in tuples(&[n, states.len()], opts.cases, opts.seed + 2) {
        jc.cases += 1;
        let v = alg.basis(rules[t[0]], Q::one());
        if !check_jump_closure(&alg, &v, &states[t[1]]) {
            jc.failures.push(format!("{} = [{}] on {}", names[t[0]], sketch_rule(rules[t[0]], types), sketch_graph(&states[t[1]], types)));
        }
    }

    let mut inv = report("constraints-preserved");
    for x in &states {
        inv.cases += 1;
        if let Some(c) = spec.violated_constraint(x) {
            inv.failures.push(format!("{} violates `{}`", sketch_graph(x, types), c));
        }
    }

    let mut cons = report("generator-conservation");
    match build_generator(spec) {
        Ok(g) => {
            for x in &states {
                cons.cases += 1;
                if !g.conserves(&alg, &StateVector::basis(x)) {
                    cons.failures.push(format!("on {}", sketch_graph(x, types)));
                }
            }
        }
        Err(e) => {
            cons.cases = 1;
            cons.failures.push(e.to_string());
        }
    }
    vec![shape, inv, assoc, hom, jc, cons]
}

/// `name: passed/cases` per property, followed by the failures.
pub fn render_reports(reports: &[Outcome]) -> String {
    let mut s = String::new();
    for r in reports {
        let verdict = if r.passed() { "pass" } else { "FAIL" };
        s.push_str(&format!("{} {}: {}/{}", verdict, r.name, r.cases - r.failures.len(), r.cases));
        if r.skipped > 0 {
            s.push_str(&format!(" ({} skipped over the size budget)", r.skipped));
        }
        s.push('\n');
        for f in &r.failures {
            s.push_str(&format!("    {}\n", f));
        }
    }
    s
}
