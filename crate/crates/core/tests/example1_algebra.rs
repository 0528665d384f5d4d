//! The vertex/edge birth-death model on multigraph-free undirected graphs:
//! commutators of the pattern observables with the transition operators.

use num_traits::One;
use rulealg_core::algebra::{Algebra, RuleVector, Q};
use rulealg_core::condition::{Condition, Forbidden};
use rulealg_core::rule::{Rule, Semantics};
use rulealg_core::{Graph, Morphism};

fn half() -> Q {
    Q::new(1, 2)
}

fn not_linked() -> Condition {
    Condition::negate(Condition::exists_plain(Graph::untyped(2, &[(0, 1)]), Morphism::new(vec![0, 1], vec![])))
}

fn no_multiedge() -> Condition {
    Condition::negate(Condition::exists_plain(Graph::untyped(2, &[(0, 1), (0, 1)]), Morphism::default()))
}

struct Model {
    alg: Algebra,
    v_plus: RuleVector,
    v_minus: RuleVector,
    e_plus: RuleVector,
    e_minus: RuleVector,
    o_v: RuleVector,
    o_pair: RuleVector,
    o_edge: RuleVector,
}

fn model() -> Model {
    let alg = Algebra::with_forbidden(Semantics::Sqpo, Forbidden::from_constraints([&no_multiedge()]));
    let (one, two, edge) = (Graph::discrete(1), Graph::discrete(2), Graph::untyped(2, &[(0, 1)]));
    let id2 = Morphism::identity(&two);
    let v_plus = Rule::plain(one.clone(), Graph::new(), Graph::new(), Morphism::default(), Morphism::default()).unwrap();
    let v_minus = Rule::plain(Graph::new(), Graph::new(), one.clone(), Morphism::default(), Morphism::default()).unwrap();
    let e_plus = Rule::new(edge.clone(), two.clone(), two.clone(), id2.clone(), id2.clone(), not_linked()).unwrap();
    let e_minus = Rule::plain(two.clone(), two.clone(), edge.clone(), id2.clone(), id2.clone()).unwrap();
    let o_v = Rule::identity(one, Condition::True);
    let o_pair = Rule::identity(two, not_linked());
    let o_edge = Rule::identity(edge, Condition::True);
    Model {
        v_plus: alg.basis(&v_plus, Q::one()),
        v_minus: alg.basis(&v_minus, Q::one()),
        e_plus: alg.basis(&e_plus, half()),
        e_minus: alg.basis(&e_minus, half()),
        o_v: alg.basis(&o_v, Q::one()),
        o_pair: alg.basis(&o_pair, half()),
        o_edge: alg.basis(&o_edge, half()),
        alg,
    }
}

/// Â = (•• ↩ • ↪ •): a vertex spawns an unlinked sibling.
fn a_hat(alg: &Algebra) -> RuleVector {
    let r = Rule::plain(Graph::discrete(2), Graph::discrete(1), Graph::discrete(1), Morphism::new(vec![0], vec![]), Morphism::identity(&Graph::discrete(1)))
        .unwrap();
    alg.basis(&r, Q::one())
}

/// B̂ = (• ↩ • ↪ ••; not linked): delete one vertex of an unlinked pair.
fn b_hat(alg: &Algebra) -> RuleVector {
    let r = Rule::new(Graph::discrete(1), Graph::discrete(1), Graph::discrete(2), Morphism::new(vec![0], vec![]), Morphism::new(vec![0], vec![]), not_linked())
        .unwrap();
    alg.basis(&r, Q::one())
}

/// Ĉ = (• ↩ • ↪ •–•): delete one endpoint of an edge.
fn c_hat(alg: &Algebra) -> RuleVector {
    let edge = Graph::untyped(2, &[(0, 1)]);
    let r = Rule::plain(Graph::discrete(1), Graph::discrete(1), edge, Morphism::new(vec![0], vec![]), Morphism::new(vec![0], vec![])).unwrap();
    alg.basis(&r, Q::one())
}

#[test]
fn vertex_count_commutators() {
    let m = model();
    assert_eq!(m.alg.commutator(&m.o_v, &m.v_plus), m.v_plus);
    assert_eq!(m.alg.commutator(&m.o_v, &m.v_minus), m.v_minus.scaled(-Q::one()));
    assert!(m.alg.commutator(&m.o_v, &m.e_plus).is_zero());
    assert!(m.alg.commutator(&m.o_v, &m.e_minus).is_zero());
}

#[test]
fn unlinked_pair_commutators() {
    let m = model();
    assert_eq!(m.alg.commutator(&m.o_pair, &m.v_plus), a_hat(&m.alg));
    assert_eq!(m.alg.commutator(&m.o_pair, &m.v_minus), b_hat(&m.alg).scaled(-Q::one()));
    assert_eq!(m.alg.commutator(&m.o_pair, &m.e_plus), m.e_plus.scaled(-Q::one()));
    assert_eq!(m.alg.commutator(&m.o_pair, &m.e_minus), m.e_minus);
}

#[test]
fn edge_commutators() {
    let m = model();
    assert!(m.alg.commutator(&m.o_edge, &m.v_plus).is_zero());
    assert_eq!(m.alg.commutator(&m.o_edge, &m.v_minus), c_hat(&m.alg).scaled(-Q::one()));
    assert_eq!(m.alg.commutator(&m.o_edge, &m.e_plus), m.e_plus);
    assert_eq!(m.alg.commutator(&m.o_edge, &m.e_minus), m.e_minus.scaled(-Q::one()));
}

#[test]
fn closures_of_new_contributions() {
    let m = model();
    assert_eq!(m.alg.jump_closure(&a_hat(&m.alg)), m.o_v);
    assert_eq!(m.alg.jump_closure(&b_hat(&m.alg)), m.o_pair.scaled(Q::from_integer(2)));
    assert_eq!(m.alg.jump_closure(&c_hat(&m.alg)), m.o_edge.scaled(Q::from_integer(2)));
    assert_eq!(m.alg.jump_closure(&m.e_plus), m.o_pair);
    assert_eq!(m.alg.jump_closure(&m.e_minus), m.o_edge);
}

mod odes {
    use super::*;
    use rulealg_core::model::{build_generator, Constraint, ModelSpec, Observable, Transition};
    use rulealg_core::ode::{closed_form_example1, derive_moment_odes, integrate_odes, BirthDeathRates, Closure, DeriveOptions};
    use rulealg_core::poly::Poly;
    use rulealg_core::TypeGraph;

    pub fn spec() -> ModelSpec {
        let m = model();
        let mut spec = ModelSpec::new(TypeGraph::untyped(), Semantics::Sqpo);
        spec.constraints.push(Constraint { name: "no_multiedge".into(), cond: no_multiedge() });
        let rule_of = |v: &RuleVector| v.iter().next().unwrap().1.clone();
        for (name, rate, v, scale) in [
            ("vertex_birth", "nu_p", &m.v_plus, Q::one()),
            ("vertex_death", "nu_m", &m.v_minus, Q::one()),
            ("edge_birth", "eps_p", &m.e_plus, half()),
            ("edge_death", "eps_m", &m.e_minus, half()),
        ] {
            let rate = spec.param(rate);
            spec.transitions.push(Transition { name: name.into(), rate, scale, rule: rule_of(v), semantics: Semantics::Sqpo });
        }
        for (name, v, scale) in [("V", &m.o_v, Q::one()), ("Pair", &m.o_pair, half()), ("Edge", &m.o_edge, half())] {
            spec.observables.push(Observable { name: name.into(), scale, rule: rule_of(v) });
        }
        spec
    }

    fn lin(terms: &[(usize, i64)]) -> Poly {
        let mut p = Poly::zero();
        for &(i, c) in terms {
            p.add(&Poly::param(i).scaled(Q::from_integer(c)));
        }
        p
    }

    #[test]
    fn generator_terms() {
        let g = build_generator(&spec()).unwrap();
        assert_eq!(g.offdiag.len(), 4);
        // Ô(½ δ(R_E+)) = O_{•|•}
        assert_eq!(g.diag[2].1, model().o_pair);
    }

    #[test]
    fn three_closed_equations() {
        let s = spec();
        let sys = derive_moment_odes(&s, DeriveOptions::default()).unwrap();
        assert_eq!(sys.status, Closure::Closed);
        assert_eq!(sys.variables.len(), 3);
        let (np, nm, ep, em) = (0, 1, 2, 3);
        let (v, pair, edge) = (sys.variable("V").unwrap(), sys.variable("Pair").unwrap(), sys.variable("Edge").unwrap());
        assert_eq!(sys.coefficient(v, None), lin(&[(np, 1)]));
        assert_eq!(sys.coefficient(v, Some(v)), lin(&[(nm, -1)]));
        assert!(sys.coefficient(v, Some(pair)).is_zero() && sys.coefficient(v, Some(edge)).is_zero());
        assert_eq!(sys.coefficient(pair, Some(v)), lin(&[(np, 1)]));
        assert_eq!(sys.coefficient(pair, Some(pair)), lin(&[(nm, -2), (ep, -1)]));
        assert_eq!(sys.coefficient(pair, Some(edge)), lin(&[(em, 1)]));
        assert!(sys.coefficient(pair, None).is_zero());
        assert_eq!(sys.coefficient(edge, Some(pair)), lin(&[(ep, 1)]));
        assert_eq!(sys.coefficient(edge, Some(edge)), lin(&[(nm, -2), (em, -1)]));
        assert!(sys.coefficient(edge, Some(v)).is_zero() && sys.coefficient(edge, None).is_zero());
        for eq in &sys.equations {
            assert!(eq.len() <= 3);
        }
    }

    #[test]
    fn integration_matches_closed_form() {
        let sys = derive_moment_odes(&spec(), DeriveOptions::default()).unwrap();
        let r = BirthDeathRates { nu_plus: 1.3, nu_minus: 0.7, eps_plus: 2.1, eps_minus: 0.4 };
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 0.5).collect();
        let out = integrate_odes(&sys, &[1.3, 0.7, 2.1, 0.4], &[0.0; 3], &grid).unwrap();
        let ix = [sys.variable("V").unwrap(), sys.variable("Pair").unwrap(), sys.variable("Edge").unwrap()];
        for (t, row) in grid.iter().zip(&out) {
            let cf = closed_form_example1(r, *t).unwrap();
            for k in 0..3 {
                assert!((row[ix[k]] - cf[k]).abs() < 1e-8, "t={t} k={k}: {} vs {}", row[ix[k]], cf[k]);
            }
        }
    }
}

mod simulation {
    use super::odes::spec;
    use rulealg_core::ode::{closed_form_example1, BirthDeathRates};
    use rulealg_core::ssa::{Simulator, SsaConfig};
    use rulealg_core::Graph;

    #[test]
    fn ensemble_tracks_the_means() {
        let mut s = spec();
        for p in s.params.iter_mut() {
            p.value = Some(1.0);
        }
        let sim = Simulator::new(&s).unwrap();
        let cfg = SsaConfig { t_max: 2.0, grid: vec![1.0, 2.0], record_events: false, audit: true };
        let n = 2000;
        let mut sum = [[0.0; 3]; 2];
        let mut sq = [[0.0; 3]; 2];
        for run in 0..n {
            let tr = sim.run(&Graph::new(), &cfg, 99, run).unwrap();
            for k in 0..2 {
                for o in 0..3 {
                    sum[k][o] += tr.samples[k][o];
                    sq[k][o] += tr.samples[k][o] * tr.samples[k][o];
                }
            }
        }
        let r = BirthDeathRates { nu_plus: 1.0, nu_minus: 1.0, eps_plus: 1.0, eps_minus: 1.0 };
        for (k, t) in [1.0, 2.0].into_iter().enumerate() {
            let cf = closed_form_example1(r, t).unwrap();
            for o in 0..3 {
                let mean = sum[k][o] / n as f64;
                let var = sq[k][o] / n as f64 - mean * mean;
                let se = (var / n as f64).sqrt();
                assert!((mean - cf[o]).abs() < 4.0 * se + 1e-12, "t={t} o={o}: {mean} vs {}", cf[o]);
            }
        }
    }
}
