//! Moment equations for pattern-count observables.
//!
//! `d/dt ⟨O⟩ = ⟨| Ô([O, Ĥ]) |Ψ(t)⟩`: every commutator with a transition is
//! jump-closed into diagonal rules, and each diagonal rule class becomes a
//! variable. New classes are expanded breadth first until none remain or the
//! depth budget is spent.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::One;

use crate::algebra::{Algebra, Q};
use crate::error::ModelError;
use crate::graph::Graph;
use crate::model::ModelSpec;
use crate::poly::Poly;
use crate::rule::{admissible_matches, Rule, RuleKey};

/// A diagonal rule class tracked by the system, in coordinates
/// `x = scale · ⟨δ(rule)⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub key: RuleKey,
    pub rule: Rule,
    pub scale: Q,
    /// Expansion round in which the class was first reached; user
    /// observables sit at depth 0.
    pub depth: usize,
}

/// `coef · x_var`, or `coef` alone when `var` is `None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub var: Option<usize>,
    pub coef: Poly,
}

/// A named linear combination of variables, e.g. a second moment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub name: String,
    pub terms: Vec<(usize, Q)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Closure {
    Closed,
    /// Terms on classes beyond this depth were dropped.
    Truncated {
        depth: usize,
    },
    /// Unexpanded classes remain after `depth` rounds.
    NonClosing {
        depth: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OdeSystem {
    pub params: Vec<String>,
    pub variables: Vec<Variable>,
    /// One right-hand side per variable. Frontier variables of a
    /// non-closing system have an empty equation and `expanded = false`.
    pub equations: Vec<Vec<Term>>,
    pub expanded: Vec<bool>,
    pub outputs: Vec<Output>,
    pub status: Closure,
    /// Number of variables known after each expansion round, starting with
    /// the initial set.
    pub rounds: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeriveOptions {
    pub max_depth: usize,
    /// 1 for means, 2 to add the pairwise products of observables.
    pub order: usize,
}

impl Default for DeriveOptions {
    fn default() -> Self {
        DeriveOptions { max_depth: 3, order: 1 }
    }
}

struct Builder {
    empty: RuleKey,
    vars: Vec<Variable>,
    index: BTreeMap<RuleKey, usize>,
}

impl Builder {
    /// Variable for a diagonal class, `None` for the unit class whose
    /// expectation is 1.
    fn intern(&mut self, key: &RuleKey, rule: &Rule, depth: usize) -> Option<usize> {
        if *key == self.empty {
            return None;
        }
        if let Some(&i) = self.index.get(key) {
            return Some(i);
        }
        let i = self.vars.len();
        self.vars.push(Variable { name: format!("X{}", i), key: key.clone(), rule: rule.clone(), scale: Q::one(), depth });
        self.index.insert(key.clone(), i);
        Some(i)
    }
}

pub fn derive_moment_odes(model: &ModelSpec, opts: DeriveOptions) -> Result<OdeSystem, ModelError> {
    model.validate()?;
    let alg = model.algebra()?;
    let mut b = Builder { empty: alg.key(&Rule::empty()), vars: Vec::new(), index: BTreeMap::new() };
    let mut outputs = Vec::new();

    // output terms are collected against ⟨δ(B)⟩ and rescaled at the end
    let mut named = Vec::new();
    for o in &model.observables {
        let v = alg.basis(&o.rule, o.scale);
        let mut terms = Vec::new();
        for (key, rule, c) in v.iter() {
            if let Some(i) = b.intern(key, rule, 0) {
                terms.push((i, c));
            }
        }
        // a single-class observable names its variable
        if let [(i, c)] = terms[..] {
            if !named.contains(&i) {
                named.push(i);
                b.vars[i].name = o.name.clone();
                b.vars[i].scale = c;
            }
        }
        outputs.push(Output { name: o.name.clone(), terms });
    }
    if opts.order >= 2 {
        let obs: Vec<_> = model.observables.iter().map(|o| alg.basis(&o.rule, o.scale)).collect();
        for (p, a) in obs.iter().enumerate() {
            for (q, c) in obs.iter().enumerate().skip(p) {
                let prod = alg.product(a, c);
                let mut terms = Vec::new();
                for (key, rule, k) in prod.iter() {
                    if let Some(i) = b.intern(key, rule, 0) {
                        terms.push((i, k));
                    }
                }
                let name = format!("{}*{}", model.observables[p].name, model.observables[q].name);
                outputs.push(Output { name, terms });
            }
        }
    }
    for out in outputs.iter_mut() {
        for (i, k) in out.terms.iter_mut() {
            *k /= b.vars[*i].scale;
        }
    }

    let gens: Vec<_> = model.transitions.iter().map(|t| (t.rate, alg.basis(&t.rule, t.scale))).collect();
    let mut equations: Vec<Vec<Term>> = Vec::new();
    let mut rounds = vec![b.vars.len()];
    let mut next = 0;
    let mut depth = 0;
    while next < b.vars.len() && depth < opts.max_depth {
        let end = b.vars.len();
        for v in next..end {
            let unit = alg.basis(&b.vars[v].rule, Q::one());
            let mut acc: BTreeMap<Option<usize>, Poly> = BTreeMap::new();
            for (rate, h) in &gens {
                let closed = alg.jump_closure(&alg.commutator(&unit, h));
                for (key, rule, c) in closed.iter() {
                    let w = b.intern(key, rule, depth + 1);
                    acc.entry(w).or_default().add_term(vec![*rate], c);
                }
            }
            // d(s_v y_v) = s_v Σ c y_w = Σ (s_v / s_w) c x_w
            let sv = b.vars[v].scale;
            let eq = acc
                .into_iter()
                .filter(|(_, p)| !p.is_zero())
                .map(|(w, p)| {
                    let f = match w {
                        Some(w) => sv / b.vars[w].scale,
                        None => sv,
                    };
                    Term { var: w, coef: p.scaled(f) }
                })
                .collect();
            equations.push(eq);
        }
        next = end;
        depth += 1;
        rounds.push(b.vars.len());
    }
    let n = b.vars.len();
    let expanded: Vec<bool> = (0..n).map(|i| i < equations.len()).collect();
    equations.resize(n, Vec::new());
    let status = if next == n { Closure::Closed } else { Closure::NonClosing { depth } };
    Ok(OdeSystem { params: model.param_names(), variables: b.vars, equations, expanded, outputs, status, rounds })
}

impl OdeSystem {
    pub fn is_closed(&self) -> bool {
        self.status == Closure::Closed
    }

    /// Drops frontier variables and every term on them.
    pub fn truncated(&self) -> OdeSystem {
        let Closure::NonClosing { depth } = self.status else {
            return self.clone();
        };
        let keep: Vec<Option<usize>> = {
            let mut k = 0;
            self.expanded
                .iter()
                .map(|&e| {
                    e.then(|| {
                        k += 1;
                        k - 1
                    })
                })
                .collect()
        };
        let remap = |v: Option<usize>| -> Option<Option<usize>> {
            match v {
                None => Some(None),
                Some(i) => keep[i].map(Some),
            }
        };
        let mut out = self.clone();
        out.variables = self.variables.iter().zip(&keep).filter(|(_, k)| k.is_some()).map(|(v, _)| v.clone()).collect();
        out.equations = self
            .equations
            .iter()
            .zip(&keep)
            .filter(|(_, k)| k.is_some())
            .map(|(eq, _)| eq.iter().filter_map(|t| remap(t.var).map(|var| Term { var, coef: t.coef.clone() })).collect())
            .collect();
        out.expanded = vec![true; out.variables.len()];
        out.outputs = self
            .outputs
            .iter()
            .map(|o| Output { name: o.name.clone(), terms: o.terms.iter().filter_map(|&(i, c)| keep[i].map(|j| (j, c))).collect() })
            .collect();
        out.status = Closure::Truncated { depth };
        out
    }

    pub fn variable(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Coefficient of `x_var` (or the constant term) in the equation of `v`.
    pub fn coefficient(&self, v: usize, var: Option<usize>) -> Poly {
        self.equations[v].iter().find(|t| t.var == var).map(|t| t.coef.clone()).unwrap_or_default()
    }

    /// `A`, `b` of `dx/dt = A x + b` at the given rates.
    pub fn linear_system(&self, params: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<f64>), ModelError> {
        if let Closure::NonClosing { .. } = self.status {
            return Err(ModelError::NonClosing);
        }
        let n = self.variables.len();
        let mut a = vec![vec![0.0; n]; n];
        let mut b = vec![0.0; n];
        for (v, eq) in self.equations.iter().enumerate() {
            for t in eq {
                if let Some(p) = t.coef.max_param() {
                    if p >= params.len() || params[p].is_nan() {
                        return Err(ModelError::UnboundParameter(self.params.get(p).cloned().unwrap_or_default()));
                    }
                }
                let c = t.coef.eval(params);
                match t.var {
                    Some(w) => a[v][w] += c,
                    None => b[v] += c,
                }
            }
        }
        Ok((a, b))
    }

    /// Variable values for the state `x0`: `scale · |matches|`.
    pub fn initial_values(&self, x0: &Graph, alg: &Algebra) -> Vec<f64> {
        self.variables
            .iter()
            .map(|v| {
                let m = admissible_matches(&v.rule, x0, alg.semantics).len() as f64;
                m * (*v.scale.numer() as f64) / (*v.scale.denom() as f64)
            })
            .collect()
    }

    /// Output values from variable values.
    pub fn evaluate_outputs(&self, x: &[f64]) -> Vec<f64> {
        self.outputs.iter().map(|o| o.terms.iter().map(|&(i, c)| x[i] * (*c.numer() as f64) / (*c.denom() as f64)).sum()).collect()
    }

    /// `d/dt name = ...` lines.
    pub fn render(&self) -> Vec<String> {
        self.variables
            .iter()
            .enumerate()
            .filter(|(i, _)| self.expanded[*i])
            .map(|(i, v)| {
                let rhs: Vec<String> = self.equations[i]
                    .iter()
                    .map(|t| {
                        let c = t.coef.render(&self.params);
                        match t.var {
                            None => format!("({})", c),
                            Some(w) => format!("({})*<{}>", c, self.variables[w].name),
                        }
                    })
                    .collect();
                let rhs = if rhs.is_empty() { String::from("0") } else { rhs.join(" + ") };
                format!("d/dt <{}> = {}", v.name, rhs)
            })
            .collect()
    }
}

/// Relative agreement demanded between successive step halvings.
pub const RICHARDSON_TOL: f64 = 1e-9;

fn rk4_steps(a: &[Vec<f64>], b: &[f64], x: &[f64], dt: f64, steps: usize) -> Vec<f64> {
    let n = x.len();
    let f = |y: &[f64]| -> Vec<f64> { (0..n).map(|i| b[i] + a[i].iter().zip(y).map(|(p, q)| p * q).sum::<f64>()).collect() };
    let axpy = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(p, q)| p + s * q).collect() };
    let h = dt / steps as f64;
    let mut y = x.to_vec();
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&axpy(&y, &k1, h / 2.0));
        let k3 = f(&axpy(&y, &k2, h / 2.0));
        let k4 = f(&axpy(&y, &k3, h));
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

/// Classic RK4 on each grid interval, halving the step until two successive
/// refinements agree to `RICHARDSON_TOL` relative. `grid` must be
/// nondecreasing and start at the time of `init`; one row per grid point.
pub fn integrate_odes(sys: &OdeSystem, params: &[f64], init: &[f64], grid: &[f64]) -> Result<Vec<Vec<f64>>, ModelError> {
    let n = sys.variables.len();
    if init.len() != n {
        return Err(ModelError::InitialLength { got: init.len(), want: n });
    }
    let (a, b) = sys.linear_system(params)?;
    let mut out = Vec::with_capacity(grid.len());
    let mut x = init.to_vec();
    let mut t = grid.first().copied().unwrap_or(0.0);
    // steps per unit time, carried over between intervals
    let mut density = 10.0_f64;
    for &tn in grid {
        let dt = tn - t;
        if dt > 0.0 {
            let mut steps = libm::ceil(dt * density).max(1.0) as usize;
            let mut coarse = rk4_steps(&a, &b, &x, dt, steps);
            loop {
                let fine = rk4_steps(&a, &b, &x, dt, 2 * steps);
                let ok = coarse.iter().zip(&fine).all(|(c, f)| libm::fabs(c - f) <= RICHARDSON_TOL * libm::fabs(*f).max(1e-6));
                steps *= 2;
                coarse = fine;
                if ok || steps > 1 << 22 {
                    break;
                }
            }
            density = steps as f64 / dt / 2.0;
            x = coarse;
            t = tn;
        }
        out.push(x.clone());
    }
    Ok(out)
}

/// Rates of the vertex/edge birth-death model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BirthDeathRates {
    pub nu_plus: f64,
    pub nu_minus: f64,
    pub eps_plus: f64,
    pub eps_minus: f64,
}

/// Explicit solution from the empty graph: `(⟨O_•⟩, ⟨O_{•|•}⟩, ⟨O_{•–•}⟩)`.
pub fn closed_form_example1(r: BirthDeathRates, t: f64) -> Result<[f64; 3], ModelError> {
    let (np, nm, ep, em) = (r.nu_plus, r.nu_minus, r.eps_plus, r.eps_minus);
    let alpha = em + ep + 2.0 * nm;
    let beta = em + ep + nm;
    let kappa = em + nm;
    let lambda = em + ep;
    let omega = em + 2.0 * nm;
    for (name, v) in [("nu_minus", nm), ("alpha", alpha), ("beta", beta), ("lambda", lambda)] {
        if v == 0.0 {
            return Err(ModelError::DegenerateDenominator(name));
        }
    }
    let e = libm::exp;
    let v = np / nm * (1.0 - e(-t * nm));
    let pre = np * np * e(-alpha * t) / (2.0 * alpha * beta * lambda * nm * nm);
    let pair =
        pre * (alpha * beta * em * e(lambda * t) + 2.0 * ep * nm * nm - 2.0 * alpha * kappa * lambda * e(beta * t) + beta * lambda * omega * e(alpha * t));
    let edge = ep * pre * (alpha * beta * e(lambda * t) - 2.0 * alpha * lambda * e(beta * t) + beta * lambda * e(alpha * t) - 2.0 * nm * nm);
    Ok([v, pair, edge])
}

/// `t → ∞` limits of `closed_form_example1`.
pub fn asymptotics_example1(r: BirthDeathRates) -> [f64; 3] {
    let (np, nm, ep, em) = (r.nu_plus, r.nu_minus, r.eps_plus, r.eps_minus);
    let alpha = em + ep + 2.0 * nm;
    [np / nm, np * np * (em + 2.0 * nm) / (2.0 * nm * nm * alpha), ep * np * np / (2.0 * nm * nm * alpha)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_starts_at_zero_and_converges() {
        let r = BirthDeathRates { nu_plus: 1.0, nu_minus: 1.0, eps_plus: 1.0, eps_minus: 1.0 };
        for v in closed_form_example1(r, 0.0).unwrap() {
            assert!(v.abs() < 1e-12);
        }
        let late = closed_form_example1(r, 60.0).unwrap();
        let lim = asymptotics_example1(r);
        assert_eq!(lim, [1.0, 0.375, 0.125]);
        for i in 0..3 {
            assert!((late[i] - lim[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rk4_matches_exponential_decay() {
        let sys = OdeSystem {
            params: vec![String::from("k")],
            variables: vec![Variable { name: "x".into(), key: RuleKey(vec![]), rule: Rule::empty(), scale: Q::one(), depth: 0 }],
            equations: vec![vec![Term { var: Some(0), coef: Poly::param(0).scaled(-Q::one()) }]],
            expanded: vec![true],
            outputs: vec![],
            status: Closure::Closed,
            rounds: vec![1],
        };
        let out = integrate_odes(&sys, &[2.0], &[1.0], &[0.0, 0.5, 3.0]).unwrap();
        assert!((out[1][0] - libm::exp(-1.0)).abs() < 1e-10);
        assert!((out[2][0] - libm::exp(-6.0)).abs() < 1e-12);
        assert_eq!(integrate_odes(&sys, &[2.0], &[], &[0.0]), Err(ModelError::InitialLength { got: 0, want: 1 }));
    }
}
