//! The shipped model files compile to the expected specs.

use std::path::PathBuf;

use num_traits::One;
use rulealg::dsl::{self, format, parse, CompiledModel};
use rulealg_core::algebra::{RuleVector, Q};
use rulealg_core::ode::{derive_moment_odes, Closure, DeriveOptions};
use rulealg_core::poly::Poly;

fn source(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {}", p.display(), e))
}

fn load(name: &str) -> CompiledModel {
    let src = source(name);
    dsl::load(&src).unwrap_or_else(|ds| panic!("{}", ds.iter().map(|d| d.render(&src, name)).collect::<Vec<_>>().join("\n")))
}

fn lin(terms: &[(usize, i64)]) -> Poly {
    let mut p = Poly::zero();
    for &(i, c) in terms {
        p.add(&Poly::param(i).scaled(Q::from_integer(c)));
    }
    p
}

#[test]
fn example1_counts() {
    let m = load("example1.model");
    assert_eq!(m.spec.transitions.len(), 4);
    assert_eq!(m.spec.constraints.len(), 1);
    assert_eq!(m.spec.observables.len(), 3);
    assert_eq!(m.spec.forbidden().0.len(), 1);
    assert!(m.warnings.is_empty());
}

#[test]
fn example1_derives_the_closed_system() {
    let m = load("example1.model");
    let sys = derive_moment_odes(&m.spec, m.derive).unwrap();
    assert_eq!(sys.status, Closure::Closed);
    assert_eq!(sys.variables.len(), 3);
    let p = |n: &str| m.spec.param_index(n).unwrap();
    let (np, nm, ep, em) = (p("nu_p"), p("nu_m"), p("eps_p"), p("eps_m"));
    let (v, pair, edge) = (sys.variable("V").unwrap(), sys.variable("Pair").unwrap(), sys.variable("Edge").unwrap());
    assert_eq!(sys.coefficient(v, None), lin(&[(np, 1)]));
    assert_eq!(sys.coefficient(v, Some(v)), lin(&[(nm, -1)]));
    assert_eq!(sys.coefficient(pair, Some(v)), lin(&[(np, 1)]));
    assert_eq!(sys.coefficient(pair, Some(pair)), lin(&[(nm, -2), (ep, -1)]));
    assert_eq!(sys.coefficient(pair, Some(edge)), lin(&[(em, 1)]));
    assert_eq!(sys.coefficient(edge, Some(pair)), lin(&[(ep, 1)]));
    assert_eq!(sys.coefficient(edge, Some(edge)), lin(&[(nm, -2), (em, -1)]));
}

#[test]
fn shipped_models_round_trip() {
    for name in ["example1.model", "kappa_kp.model"] {
        let sm = parse(&source(name)).unwrap();
        let text = format(&sm);
        assert_eq!(parse(&text).unwrap(), sm, "{name}");
    }
}

#[test]
fn kappa_counts() {
    let m = load("kappa_kp.model");
    assert_eq!(m.spec.transitions.len(), 8);
    assert_eq!(m.spec.observables.len(), 2);
    assert_eq!(m.spec.forbidden().0.len(), 21);
    assert!(m.spec.violated_constraint(&m.init).is_none());
}

#[test]
fn kappa_kinase_commutators() {
    let m = load("kappa_kp.model");
    let alg = m.spec.algebra().unwrap();
    let o_k = alg.basis(&m.spec.observables[0].rule, Q::one());
    for t in &m.spec.transitions {
        let x: RuleVector = alg.basis(&t.rule, Q::one());
        let c = alg.commutator(&o_k, &x);
        let expect = match t.name.as_str() {
            "k_plus" => x.clone(),
            "k_minus" => x.scaled(-Q::one()),
            _ => RuleVector::zero(),
        };
        assert_eq!(c, expect, "{}", t.name);
    }
}

#[test]
fn phosphorylation_cascade_starts() {
    let m = load("kappa_kp.model");
    let alg = m.spec.algebra().unwrap();
    let o_p = alg.basis(&m.spec.observables[1].rule, Q::one());
    let t_plus = alg.basis(&m.spec.transitions[4].rule, Q::one());
    // a single new operator: t_plus acting next to a phosphorylated pb
    let c = alg.commutator(&o_p, &t_plus);
    assert_eq!(c.len(), 1);
    let (_, r, coef) = c.iter().next().unwrap();
    assert_eq!(coef, Q::one());
    assert_eq!((r.input.vertex_count(), r.input.edge_count()), (6, 7));
    // its jump closure is an observable not in the model
    let jc = alg.jump_closure(&c);
    assert_eq!(jc.len(), 1);
    let (_, o, _) = jc.iter().next().unwrap();
    assert!(o.is_identity_shaped());
    assert!(m.spec.observables.iter().all(|x| alg.key(&x.rule) != alg.key(o)));
}

#[test]
fn kappa_does_not_close() {
    let m = load("kappa_kp.model");
    let sys = derive_moment_odes(&m.spec, DeriveOptions { max_depth: 3, order: 1 }).unwrap();
    assert_eq!(sys.status, Closure::NonClosing { depth: 3 });
    assert!(sys.rounds.windows(2).all(|w| w[0] < w[1]));
}
