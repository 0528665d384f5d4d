//! Acceptance gate: one line per criterion, then a single assertion.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the table.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::One;
use rand::Rng;
use rulealg::dsl::{self, CompiledModel};
use rulealg::ensemble::{run_ensemble, uniform_grid, EnsembleConfig};
use rulealg_core::algebra::{Algebra, RuleVector, Q};
use rulealg_core::condition::Condition;
use rulealg_core::ode::{derive_moment_odes, integrate_odes, Closure, DeriveOptions};
use rulealg_core::poly::Poly;
use rulealg_core::rule::Rule;
use rulealg_core::verify::{rng, standard_suites};
use rulealg_core::{Graph, Morphism};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict, Duration);

fn model_path(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name).display().to_string()
}

fn load(name: &str) -> CompiledModel {
    let src = std::fs::read_to_string(model_path(name)).unwrap();
    dsl::load(&src).unwrap_or_else(|ds| panic!("{name}: {ds:?}"))
}

fn ensure(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn rulealg(args: &[String]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rulealg")).args(args).output().expect("binary runs")
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn not_linked() -> Condition {
    Condition::negate(Condition::exists_plain(Graph::untyped(2, &[(0, 1)]), Morphism::new(vec![0, 1], vec![])))
}

/// `link * vertex = δ(link ⊎ vertex) + 2 δ(link'), vertex * link = δ(link ⊎ vertex)`
/// under DPO, with `link'` joining a fresh vertex to an old one.
fn rule_algebra_example() -> Verdict {
    let m = load("worked_example.model");
    let alg = m.spec.algebra().map_err(|e| e.to_string())?;
    let rule = |n: &str| m.spec.transitions.iter().find(|t| t.name == n).unwrap().rule.clone();
    let (link, vertex) = (rule("link"), rule("vertex"));
    let both = alg.basis(&link.disjoint_union(&vertex), Q::one());
    let primed =
        Rule::plain(Graph::untyped(2, &[(0, 1)]), Graph::discrete(1), Graph::discrete(1), Morphism::new(vec![0], vec![]), Morphism::new(vec![0], vec![]))
            .unwrap();
    let mut want = both.clone();
    want.add_rule(&alg, &primed, Q::from_integer(2));
    let (l, v) = (alg.basis(&link, Q::one()), alg.basis(&vertex, Q::one()));
    ensure(alg.product(&l, &v) == want, "link * vertex")?;
    ensure(alg.product(&v, &l) == both, "vertex * link")?;
    Ok("2 + 1 terms, exact".into())
}

fn example1_vectors(m: &CompiledModel, alg: &Algebra) -> impl Fn(&str) -> RuleVector {
    let spec = m.spec.clone();
    let alg = alg.clone();
    move |name: &str| {
        if let Some(t) = spec.transitions.iter().find(|t| t.name == name) {
            alg.basis(&t.rule, t.scale)
        } else {
            let o = spec.observables.iter().find(|o| o.name == name).unwrap();
            alg.basis(&o.rule, o.scale)
        }
    }
}

fn commutator_table() -> Verdict {
    let m = load("example1.model");
    let alg = m.spec.algebra().map_err(|e| e.to_string())?;
    let v = example1_vectors(&m, &alg);
    let (vp, vm, ep, em) = (v("vertex_birth"), v("vertex_death"), v("edge_birth"), v("edge_death"));
    let (ov, op, oe) = (v("V"), v("Pair"), v("Edge"));
    let neg = |x: &RuleVector| x.scaled(-Q::one());
    let (one, two, edge) = (Graph::discrete(1), Graph::discrete(2), Graph::untyped(2, &[(0, 1)]));
    let first = Morphism::new(vec![0], vec![]);
    let a_hat = alg.basis(&Rule::plain(two.clone(), one.clone(), one.clone(), first.clone(), Morphism::identity(&one)).unwrap(), Q::one());
    let b_hat = alg.basis(&Rule::new(one.clone(), one.clone(), two, first.clone(), first.clone(), not_linked()).unwrap(), Q::one());
    let c_hat = alg.basis(&Rule::plain(one.clone(), one, edge, first.clone(), first).unwrap(), Q::one());
    let zero = RuleVector::zero();
    let table: Vec<(&str, RuleVector, RuleVector)> = vec![
        ("[O_V, V+] = V+", alg.commutator(&ov, &vp), vp.clone()),
        ("[O_V, V-] = -V-", alg.commutator(&ov, &vm), neg(&vm)),
        ("[O_V, E+] = 0", alg.commutator(&ov, &ep), zero.clone()),
        ("[O_V, E-] = 0", alg.commutator(&ov, &em), zero.clone()),
        ("[O_Pair, V+] = A", alg.commutator(&op, &vp), a_hat.clone()),
        ("[O_Pair, V-] = -B", alg.commutator(&op, &vm), neg(&b_hat)),
        ("[O_Pair, E+] = -E+", alg.commutator(&op, &ep), neg(&ep)),
        ("[O_Pair, E-] = E-", alg.commutator(&op, &em), em.clone()),
        ("[O_Edge, V+] = 0", alg.commutator(&oe, &vp), zero),
        ("[O_Edge, V-] = -C", alg.commutator(&oe, &vm), neg(&c_hat)),
        ("[O_Edge, E+] = E+", alg.commutator(&oe, &ep), ep.clone()),
        ("[O_Edge, E-] = -E-", alg.commutator(&oe, &em), neg(&em)),
        ("jc(A) = O_V", alg.jump_closure(&a_hat), ov.clone()),
        ("jc(B) = 2 O_Pair", alg.jump_closure(&b_hat), op.scaled(Q::from_integer(2))),
        ("jc(C) = 2 O_Edge", alg.jump_closure(&c_hat), oe.scaled(Q::from_integer(2))),
    ];
    for (name, got, want) in &table {
        ensure(got == want, *name)?;
    }
    Ok(format!("{} identities", table.len()))
}

fn lin(terms: &[(usize, i64)]) -> Poly {
    let mut p = Poly::zero();
    for &(i, c) in terms {
        p.add(&Poly::param(i).scaled(Q::from_integer(c)));
    }
    p
}

fn ode_derivation() -> Verdict {
    let m = load("example1.model");
    let sys = derive_moment_odes(&m.spec, DeriveOptions { max_depth: 3, order: 1 }).map_err(|e| e.to_string())?;
    ensure(sys.status == Closure::Closed, format!("status {:?}", sys.status))?;
    ensure(sys.variables.len() == 3, format!("{} variables", sys.variables.len()))?;
    let p = |n: &str| m.spec.param_index(n).unwrap();
    let (np, nm, ep, em) = (p("nu_p"), p("nu_m"), p("eps_p"), p("eps_m"));
    let var = |n: &str| sys.variable(n).ok_or(format!("no variable {n}"));
    let (v, pair, edge) = (var("V")?, var("Pair")?, var("Edge")?);
    let want: [(usize, Option<usize>, Poly); 12] = [
        (v, None, lin(&[(np, 1)])),
        (v, Some(v), lin(&[(nm, -1)])),
        (v, Some(pair), Poly::zero()),
        (v, Some(edge), Poly::zero()),
        (pair, None, Poly::zero()),
        (pair, Some(v), lin(&[(np, 1)])),
        (pair, Some(pair), lin(&[(nm, -2), (ep, -1)])),
        (pair, Some(edge), lin(&[(em, 1)])),
        (edge, None, Poly::zero()),
        (edge, Some(v), Poly::zero()),
        (edge, Some(pair), lin(&[(ep, 1)])),
        (edge, Some(edge), lin(&[(nm, -2), (em, -1)])),
    ];
    for (eq, w, c) in &want {
        ensure(sys.coefficient(*eq, *w) == *c, format!("coefficient of {:?} in d/dt {}", w.map(|i| &sys.variables[i].name), sys.variables[*eq].name))?;
    }
    Ok("closed, 3 equations, 12 coefficients".into())
}

fn numerics_vs_closed_form() -> Verdict {
    let mut rng = rng(2024);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for k in 0..5 {
        let r: Vec<f64> = (0..4).map(|_| rng.gen_range(0.2..3.0)).collect();
        let (nu_p, nu_m, eps_p, eps_m) = (r[0], r[1], r[2], r[3]);
        let out = dir.path().join(k.to_string()).display().to_string();
        let mut args = strings(&["integrate", "--against-closed-form", "--model"]);
        args.push(model_path("example1.model"));
        for (n, x) in [("nu_p", nu_p), ("nu_m", nu_m), ("eps_p", eps_p), ("eps_m", eps_m)] {
            args.extend(["--param".to_string(), format!("{n}={x:?}")]);
        }
        args.extend(strings(&["--t-max", "10", "--grid", "0.1", "--out"]));
        args.push(out.clone());
        let o = rulealg(&args);
        let text = String::from_utf8_lossy(&o.stdout).into_owned();
        ensure(o.status.code() == Some(0), format!("set {k}: exit {:?}: {}{}", o.status.code(), text, String::from_utf8_lossy(&o.stderr)))?;
        let line = text.lines().find(|l| l.starts_with("max abs deviation")).ok_or("no deviation line")?;
        let dev: f64 = line.rsplit(' ').next().unwrap().parse().map_err(|_| line.to_string())?;
        ensure(dev < 1e-6, format!("set {k}: deviation {dev:e}"))?;
        worst = worst.max(dev);

        // asymptotics at t = 50, from the model directly
        let m = load("example1.model");
        let sys = derive_moment_odes(&m.spec, DeriveOptions::default()).map_err(|e| e.to_string())?;
        let mut params = vec![0.0; 4];
        for (n, x) in [("nu_p", nu_p), ("nu_m", nu_m), ("eps_p", eps_p), ("eps_m", eps_m)] {
            params[m.spec.param_index(n).unwrap()] = x;
        }
        let xs = integrate_odes(&sys, &params, &[0.0; 3], &[0.0, 50.0]).map_err(|e| e.to_string())?;
        let at50 = sys.evaluate_outputs(&xs[1]);
        let alpha = eps_m + eps_p + 2.0 * nu_m;
        let want = [nu_p / nu_m, nu_p * nu_p * (eps_m + 2.0 * nu_m) / (2.0 * nu_m * nu_m * alpha), eps_p * nu_p * nu_p / (2.0 * nu_m * nu_m * alpha)];
        for i in 0..3 {
            ensure((at50[i] - want[i]).abs() < 1e-4, format!("set {k}: t=50 output {i}: {} vs {}", at50[i], want[i]))?;
        }
    }
    Ok(format!("5 parameter sets, max deviation {worst:.1e}"))
}

fn ssa_vs_ode() -> Verdict {
    let m = load("example1.model");
    let grid = uniform_grid(5.0, 1.0);
    let cfg = EnsembleConfig { runs: 10_000, seed: 42, t_max: 5.0, grid: grid.clone(), keep: 0, record_events: false, audit: false };
    let ens = run_ensemble(&m.spec, &m.init, &cfg).map_err(|e| e.to_string())?;
    let sys = derive_moment_odes(&m.spec, DeriveOptions::default()).map_err(|e| e.to_string())?;
    let xs = integrate_odes(&sys, &m.spec.param_values().map_err(|e| e.to_string())?, &[0.0; 3], &grid).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for t in [1.0, 2.0, 5.0] {
        let k = ens.at(t);
        let ode = sys.evaluate_outputs(&xs[k]);
        for (i, name) in ens.names.iter().enumerate() {
            let z = (ens.mean[k][i] - ode[i]).abs() / ens.se[k][i];
            worst = worst.max(z);
            ensure(z < 4.0, format!("{name} at t={t}: {} vs {} ({z:.2} SE)", ens.mean[k][i], ode[i]))?;
        }
    }
    let var = ens.var[ens.at(5.0)][ens.column("V").unwrap()];
    // Poisson value nu_p / nu_m = 1 at unit rates
    ensure((var - 1.0).abs() < 0.1, format!("vertex variance {var}"))?;
    Ok(format!("max {worst:.2} SE, vertex variance {var:.3}"))
}

fn property_suites() -> Verdict {
    let reports = standard_suites(200, 2024);
    let mut names = Vec::new();
    for r in &reports {
        ensure(r.cases >= 200, format!("{}: {} cases", r.name, r.cases))?;
        if let Some(f) = r.failures.first() {
            return Err(format!("{}: {}", r.name, f));
        }
        names.push(r.name.clone());
    }
    Ok(format!("{} suites x 200 cases", names.len()))
}

fn kappa_non_closure() -> Verdict {
    let m = load("kappa_kp.model");
    let alg = m.spec.algebra().map_err(|e| e.to_string())?;
    let o_k = alg.basis(&m.spec.observables[0].rule, Q::one());
    for t in &m.spec.transitions {
        let x = alg.basis(&t.rule, Q::one());
        let want = match t.name.as_str() {
            "k_plus" => x.clone(),
            "k_minus" => x.scaled(-Q::one()),
            _ => RuleVector::zero(),
        };
        ensure(alg.commutator(&o_k, &x) == want, format!("[O_K, {}]", t.name))?;
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut args = strings(&["derive", "--json", "--depth", "3", "--model"]);
    args.push(model_path("kappa_kp.model"));
    args.extend(["--out".to_string(), dir.path().display().to_string()]);
    let o = rulealg(&args);
    ensure(o.status.code() == Some(0), "derive failed")?;
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).map_err(|e| e.to_string())?;
    ensure(j["status"]["kind"] == "non-closing", format!("status {}", j["status"]))?;
    let rounds: Vec<u64> = j["rounds"].as_array().ok_or("no rounds")?.iter().filter_map(|x| x.as_u64()).collect();
    ensure(rounds.len() == 4 && rounds.windows(2).all(|w| w[0] < w[1]), format!("rounds {rounds:?}"))?;
    Ok(format!("8 commutators exact, observables per round {rounds:?}"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 7] = [
        ("rule-algebra example", rule_algebra_example, Duration::from_secs(1)),
        ("commutator table", commutator_table, Duration::from_secs(10)),
        ("ODE derivation", ode_derivation, Duration::from_secs(60)),
        ("numerics vs closed form", numerics_vs_closed_form, Duration::from_secs(5)),
        ("SSA vs ODE", ssa_vs_ode, Duration::from_secs(300)),
        ("property suites", property_suites, Duration::from_secs(600)),
        ("Kappa non-closure", kappa_non_closure, Duration::from_secs(60)),
    ];
    let mut failed = Vec::new();
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = f();
        let took = start.elapsed();
        let verdict = match verdict {
            Ok(d) if took <= *budget => Ok(d),
            Ok(d) => Err(format!("{d}, but over the {budget:?} budget")),
            Err(e) => Err(e),
        };
        match &verdict {
            Ok(d) => println!("criterion {}: PASS {} ({:.2?}): {}", i + 1, name, took, d),
            Err(e) => {
                println!("criterion {}: FAIL {} ({:.2?}): {}", i + 1, name, took, e);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
