//! Stochastic rewriting systems: rates, transitions, constraints,
//! observables and the symbolic CTMC generator `H = Ĥ − Ô(Ĥ)`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::algebra::{dual_project, Algebra, RuleVector, StateVector, Q};
use crate::condition::{graph_satisfies, Condition, Forbidden};
use crate::error::ModelError;
use crate::graph::{Graph, TypeGraph};
use crate::rule::{Rule, Semantics};

#[derive(Clone, Debug, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub value: Option<f64>,
}

/// A global constraint, a condition rooted at the empty graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub cond: Condition,
}

/// `(κ, scale · δ(R))` with `κ` a parameter index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    pub rate: usize,
    pub scale: Q,
    pub rule: Rule,
    pub semantics: Semantics,
}

/// `scale · ρ(δ(P = P = P; c))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observable {
    pub name: String,
    pub scale: Q,
    pub rule: Rule,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub types: TypeGraph,
    pub semantics: Semantics,
    pub constraints: Vec<Constraint>,
    pub params: Vec<Parameter>,
    pub transitions: Vec<Transition>,
    pub observables: Vec<Observable>,
}

impl ModelSpec {
    pub fn new(types: TypeGraph, semantics: Semantics) -> Self {
        ModelSpec { types, semantics, constraints: Vec::new(), params: Vec::new(), transitions: Vec::new(), observables: Vec::new() }
    }

    /// Index of parameter `name`, declaring it unbound if new.
    pub fn param(&mut self, name: &str) -> usize {
        if let Some(i) = self.param_index(name) {
            return i;
        }
        self.params.push(Parameter { name: name.to_string(), value: None });
        self.params.len() - 1
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn param_names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    pub fn forbidden(&self) -> Forbidden {
        Forbidden::from_constraints(self.constraints.iter().map(|c| &c.cond))
    }

    /// The single semantics shared by all transitions.
    pub fn uniform_semantics(&self) -> Result<Semantics, ModelError> {
        match self.transitions.iter().map(|t| t.semantics).find(|&s| s != self.semantics) {
            Some(_) => Err(ModelError::MixedSemantics),
            None => Ok(self.semantics),
        }
    }

    pub fn algebra(&self) -> Result<Algebra, ModelError> {
        Ok(Algebra::with_forbidden(self.uniform_semantics()?, self.forbidden()))
    }

    /// Observables must be diagonal: identity-shaped, or `I ↩ K ↪ I` under
    /// DPO.
    pub fn validate(&self) -> Result<(), ModelError> {
        for o in &self.observables {
            let ok = match self.semantics {
                Semantics::Sqpo => o.rule.is_identity_shaped(),
                Semantics::Dpo => o.rule.is_dpo_diagonal(),
            };
            if !ok {
                return Err(ModelError::NotDiagonal(o.name.clone()));
            }
        }
        for p in &self.params {
            if let Some(v) = p.value {
                if v.is_nan() || v <= 0.0 {
                    return Err(ModelError::NonPositiveRate { name: p.name.clone(), value: v });
                }
            }
        }
        Ok(())
    }

    /// Bound parameter values; every rate used by a transition must be bound
    /// and strictly positive.
    pub fn param_values(&self) -> Result<Vec<f64>, ModelError> {
        let mut out = Vec::with_capacity(self.params.len());
        for p in &self.params {
            match p.value {
                Some(v) if v > 0.0 => out.push(v),
                Some(v) => return Err(ModelError::NonPositiveRate { name: p.name.clone(), value: v }),
                None if self.transitions.iter().any(|t| self.params[t.rate].name == p.name) => return Err(ModelError::UnboundParameter(p.name.clone())),
                None => out.push(f64::NAN),
            }
        }
        Ok(out)
    }

    /// Name of the first constraint `x` violates.
    pub fn violated_constraint(&self, x: &Graph) -> Option<&str> {
        self.constraints.iter().find(|c| !graph_satisfies(x, &c.cond)).map(|c| c.name.as_str())
    }
}

/// `Ĥ = Σ_j κ_j · scale_j · δ(R_j)` and its jump closure, one summand per
/// transition so that rates stay symbolic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub offdiag: Vec<(usize, RuleVector)>,
    pub diag: Vec<(usize, RuleVector)>,
}

impl Generator {
    pub fn is_zero(&self) -> bool {
        self.offdiag.iter().all(|(_, v)| v.is_zero())
    }

    /// `⟨| (Ĥ_j − Ô(Ĥ_j)) |s⟩ = 0` for every transition separately, which
    /// gives `⟨|H|s⟩ = 0` for all rate values.
    pub fn conserves(&self, alg: &Algebra, s: &StateVector) -> bool {
        self.offdiag.iter().zip(&self.diag).all(|((_, h), (_, d))| {
            let mut v = h.clone();
            v.add_scaled(d, -Q::one());
            dual_project(&alg.represent(&v, s)).is_zero()
        })
    }
}

pub fn build_generator(model: &ModelSpec) -> Result<Generator, ModelError> {
    model.validate()?;
    let alg = model.algebra()?;
    let mut offdiag = Vec::new();
    let mut diag = Vec::new();
    for t in &model.transitions {
        if t.scale.is_zero() {
            continue;
        }
        let v = alg.basis(&t.rule, t.scale);
        diag.push((t.rate, alg.jump_closure(&v)));
        offdiag.push((t.rate, v));
    }
    Ok(Generator { offdiag, diag })
}
