//! Lowering of a parsed model to a `ModelSpec`.

use std::collections::BTreeMap;

use rulealg_core::algebra::Q;
use rulealg_core::condition::Condition;
use rulealg_core::model::{Constraint, ModelSpec, Observable, Parameter, Transition};
use rulealg_core::ode::DeriveOptions;
use rulealg_core::rule::{Rule, Semantics};
use rulealg_core::{Graph, Label, Morphism, TypeGraph};

use super::ast::*;
use super::Diagnostic;

/// A graph whose vertices and edges carry the names they were declared
/// with. Implicit edge names are `a-b:type`, with `#k` appended to the
/// k-th repeat inside one block.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NamedGraph {
    pub graph: Graph,
    pub vnames: Vec<String>,
    pub enames: Vec<String>,
}

impl NamedGraph {
    fn vertex(&self, name: &str) -> Option<usize> {
        self.vnames.iter().position(|n| n == name)
    }

    fn edge(&self, name: &str) -> Option<usize> {
        self.enames.iter().position(|n| n == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulateSettings {
    pub t_max: f64,
    pub runs: u64,
    pub seed: u64,
    pub grid: f64,
}

impl Default for SimulateSettings {
    fn default() -> Self {
        SimulateSettings { t_max: 10.0, runs: 1000, seed: 0, grid: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompiledModel {
    pub spec: ModelSpec,
    pub derive: DeriveOptions,
    pub simulate: SimulateSettings,
    pub init: Graph,
    pub patterns: BTreeMap<String, Graph>,
    pub warnings: Vec<Diagnostic>,
}

struct Ctx<'a> {
    types: TypeGraph,
    typed: bool,
    patterns: BTreeMap<String, &'a PatternDecl>,
    diags: Vec<Diagnostic>,
}

pub fn compile(sm: &SourceModel) -> Result<CompiledModel, Vec<Diagnostic>> {
    let mut ctx = Ctx { types: TypeGraph::untyped(), typed: false, patterns: BTreeMap::new(), diags: Vec::new() };
    let mut semantics = Semantics::Sqpo;
    let mut derive = DeriveOptions::default();
    let mut simulate = SimulateSettings::default();

    // declarations first, so that use may precede definition
    let mut seen_types = false;
    for item in &sm.items {
        match item {
            Item::Semantics(s, _) => semantics = *s,
            Item::TypeGraph(entries, span) => {
                if seen_types {
                    ctx.diags.push(Diagnostic::error("duplicate typegraph block", *span));
                    continue;
                }
                seen_types = true;
                ctx.typed = true;
                ctx.types = build_types(entries, &mut ctx.diags);
            }
            Item::Pattern(p) => {
                if ctx.patterns.insert(p.name.name.clone(), p).is_some() {
                    ctx.diags.push(Diagnostic::error(format!("pattern `{}` is declared twice", p.name.name), p.name.span));
                }
            }
            Item::Derive(d) => {
                if let Some(o) = d.order {
                    if !(1..=2).contains(&o) {
                        ctx.diags.push(Diagnostic::error("moment order must be 1 or 2", d.span));
                    }
                    derive.order = o as usize;
                }
                if let Some(k) = d.depth {
                    derive.max_depth = k as usize;
                }
            }
            Item::Simulate(s) => {
                if let Some(t) = s.t_max {
                    simulate.t_max = t;
                }
                if let Some(r) = s.runs {
                    simulate.runs = r;
                }
                if let Some(x) = s.seed {
                    simulate.seed = x;
                }
                if let Some(g) = s.grid {
                    if g <= 0.0 {
                        ctx.diags.push(Diagnostic::error("grid spacing must be positive", s.span));
                    }
                    simulate.grid = g;
                }
            }
            _ => {}
        }
    }

    let mut spec = ModelSpec::new(ctx.types.clone(), semantics);
    for item in &sm.items {
        if let Item::Param(p) = item {
            if spec.param_index(&p.name.name).is_some() {
                ctx.diags.push(Diagnostic::error(format!("parameter `{}` is declared twice", p.name.name), p.name.span));
                continue;
            }
            if let Some(v) = p.value {
                if v <= 0.0 || !v.is_finite() {
                    ctx.diags.push(Diagnostic::error(format!("rate `{}` must be strictly positive", p.name.name), p.span));
                }
            }
            spec.params.push(Parameter { name: p.name.name.clone(), value: p.value });
        }
    }

    let mut init = Graph::new();
    let mut patterns = BTreeMap::new();
    for (name, p) in &ctx.patterns {
        if let Ok(g) = extend(&NamedGraph::default(), &p.body, &ctx.types, ctx.typed) {
            patterns.insert(name.clone(), g.graph);
        }
    }
    for item in &sm.items {
        match item {
            Item::Pattern(p) => {
                if let Err(d) = extend(&NamedGraph::default(), &p.body, &ctx.types, ctx.typed) {
                    ctx.diags.push(d);
                }
            }
            Item::Constraint(c) => {
                let name = c.name.as_ref().map_or_else(|| format!("constraint{}", spec.constraints.len() + 1), |n| n.name.clone());
                if let Some(cond) = ctx.condition(&NamedGraph::default(), &c.cond) {
                    spec.constraints.push(Constraint { name, cond });
                }
            }
            Item::Rule(r) => {
                if spec.transitions.iter().any(|t| t.name == r.name.name) {
                    ctx.diags.push(Diagnostic::error(format!("rule `{}` is declared twice", r.name.name), r.name.span));
                    continue;
                }
                let Some(rate) = spec.param_index(&r.rate.name) else {
                    ctx.diags.push(Diagnostic::error(format!("undeclared rate parameter `{}`", r.rate.name), r.rate.span));
                    continue;
                };
                let Some(scale) = ctx.scale(r.scale, r.span) else { continue };
                if let Some(rule) = ctx.rule(r) {
                    let semantics = r.semantics.unwrap_or(semantics);
                    spec.transitions.push(Transition { name: r.name.name.clone(), rate, scale, rule, semantics });
                }
            }
            Item::Observable(o) => {
                if spec.observables.iter().any(|x| x.name == o.name.name) {
                    ctx.diags.push(Diagnostic::error(format!("observable `{}` is declared twice", o.name.name), o.name.span));
                    continue;
                }
                let Some(scale) = ctx.scale(o.scale, o.span) else { continue };
                let Some(body) = ctx.body(&o.pattern) else { continue };
                let g = match extend(&NamedGraph::default(), body, &ctx.types, ctx.typed) {
                    Ok(g) => g,
                    Err(d) => {
                        ctx.diags.push(d);
                        continue;
                    }
                };
                let cond = match &o.cond {
                    Some(c) => match ctx.condition(&g, c) {
                        Some(c) => c,
                        None => continue,
                    },
                    None => Condition::True,
                };
                spec.observables.push(Observable { name: o.name.name.clone(), scale, rule: Rule::identity(g.graph, cond) });
            }
            Item::Init(g, _) => {
                if let Some(body) = ctx.body(g) {
                    match extend(&NamedGraph::default(), body, &ctx.types, ctx.typed) {
                        Ok(g) => init = g.graph,
                        Err(d) => ctx.diags.push(d),
                    }
                }
            }
            _ => {}
        }
    }

    let mut warnings = Vec::new();
    if spec.observables.is_empty() {
        warnings.push(Diagnostic::warning("model declares no observables", Span::default()));
    }
    if ctx.diags.is_empty() {
        Ok(CompiledModel { spec, derive, simulate, init, patterns, warnings })
    } else {
        ctx.diags.sort_by_key(|d| d.span.start);
        Err(ctx.diags)
    }
}

fn build_types(entries: &[TypeEntry], diags: &mut Vec<Diagnostic>) -> TypeGraph {
    let mut t = TypeGraph::new();
    let lookup = |t: &TypeGraph, id: &Ident, diags: &mut Vec<Diagnostic>| {
        let l = t.vertex_type(&id.name);
        if l.is_none() {
            diags.push(Diagnostic::error(format!("unknown vertex type `{}`", id.name), id.span));
        }
        l
    };
    for e in entries {
        match e {
            TypeEntry::Vertex(v) => {
                if t.vertex_type(&v.name).is_some() {
                    diags.push(Diagnostic::error(format!("vertex type `{}` is declared twice", v.name), v.span));
                } else {
                    t.add_vertex_type(&v.name);
                }
            }
            TypeEntry::Edge { a, b, name } => {
                if let (Some(x), Some(y)) = (lookup(&t, a, diags), lookup(&t, b, diags)) {
                    if edge_type(&t, x, y, &name.name).is_some() {
                        diags.push(Diagnostic::error(format!("edge type `{}` is declared twice", name.name), name.span));
                    } else {
                        t.add_edge_type(&name.name, x, y);
                    }
                }
            }
            TypeEntry::Loop { a, name } => {
                if let Some(x) = lookup(&t, a, diags) {
                    if edge_type(&t, x, x, &name.name).is_some() {
                        diags.push(Diagnostic::error(format!("loop type `{}` is declared twice", name.name), name.span));
                    } else {
                        t.add_edge_type(&name.name, x, x);
                    }
                }
            }
        }
    }
    t
}

fn edge_type(t: &TypeGraph, a: Label, b: Label, name: &str) -> Option<Label> {
    t.edge_types_between(a, b).into_iter().find(|&l| t.edge_name(l) == name)
}

/// `root` extended by the elements of a block, glued by name. The root
/// occupies the first indices, so the embedding is a prefix inclusion.
pub fn extend(root: &NamedGraph, body: &[Element], types: &TypeGraph, typed: bool) -> Result<NamedGraph, Diagnostic> {
    let mut g = root.clone();
    let mut added = Vec::new();
    for e in body {
        let Element::Vertex { name, ty } = e else { continue };
        let label = match (ty, typed) {
            (Some(t), false) => return Err(Diagnostic::error(format!("type `{}` used but the model has no typegraph", t.name), t.span)),
            (Some(t), true) => Some(types.vertex_type(&t.name).ok_or_else(|| Diagnostic::error(format!("unknown vertex type `{}`", t.name), t.span))?),
            (None, false) => Some(0),
            (None, true) => None,
        };
        match g.vertex(&name.name) {
            Some(v) if added.contains(&v) => return Err(Diagnostic::error(format!("vertex `{}` is declared twice", name.name), name.span)),
            Some(v) => {
                if label.is_some_and(|l| l != g.graph.vertex_label(v)) {
                    return Err(Diagnostic::error(
                        format!("vertex `{}` already has type `{}`", name.name, types.vertex_name(g.graph.vertex_label(v))),
                        name.span,
                    ));
                }
            }
            None => {
                let l = label.ok_or_else(|| Diagnostic::error(format!("vertex `{}` needs a type", name.name), name.span))?;
                g.graph.add_vertex(l);
                g.vnames.push(name.name.clone());
                added.push(g.vnames.len() - 1);
            }
        }
    }
    let mut repeats: BTreeMap<String, usize> = BTreeMap::new();
    for e in body {
        let (name, a, b, ty) = match e {
            Element::Vertex { .. } => continue,
            Element::Edge { name, a, b, ty } => (name.as_ref(), a, b, ty.as_ref()),
            Element::Prop { v, ty } => (None, v, v, Some(ty)),
        };
        let va = g.vertex(&a.name).ok_or_else(|| Diagnostic::error(format!("unknown vertex `{}`", a.name), a.span))?;
        let vb = g.vertex(&b.name).ok_or_else(|| Diagnostic::error(format!("unknown vertex `{}`", b.name), b.span))?;
        let (la, lb) = (g.graph.vertex_label(va), g.graph.vertex_label(vb));
        let label = match (ty, typed) {
            (Some(t), false) => return Err(Diagnostic::error(format!("type `{}` used but the model has no typegraph", t.name), t.span)),
            (None, false) => 0,
            (Some(t), true) => edge_type(types, la, lb, &t.name).ok_or_else(|| {
                Diagnostic::error(format!("no edge type `{}` between `{}` and `{}`", t.name, types.vertex_name(la), types.vertex_name(lb)), t.span)
            })?,
            (None, true) => match types.edge_types_between(la, lb)[..] {
                [l] => l,
                _ => return Err(Diagnostic::error(format!("edge `{} - {}` needs a type", a.name, b.name), a.span.to(b.span))),
            },
        };
        let ename = match name {
            Some(n) => n.name.clone(),
            None => {
                let (x, y) = if a.name <= b.name { (&a.name, &b.name) } else { (&b.name, &a.name) };
                let tname = if typed { types.edge_name(label) } else { "" };
                let base = format!("{}-{}:{}", x, y, tname);
                let k = repeats.entry(base.clone()).or_insert(0);
                *k += 1;
                if *k == 1 {
                    base
                } else {
                    format!("{}#{}", base, *k - 1)
                }
            }
        };
        let span = name.map_or(a.span.to(b.span), |n| n.span);
        match g.edge(&ename) {
            Some(e) if e < root.enames.len() => {
                let have = g.graph.edge(e);
                let want = rulealg_core::Edge::new(va, vb, label);
                if *have != want {
                    return Err(Diagnostic::error(format!("edge `{}` conflicts with an edge of the same name", ename), span));
                }
            }
            Some(_) => return Err(Diagnostic::error(format!("edge `{}` is declared twice", ename), span)),
            None => {
                g.graph.add_edge(va, vb, label);
                g.enames.push(ename);
            }
        }
    }
    Ok(g)
}

impl<'a> Ctx<'a> {
    fn body<'b>(&mut self, r: &'b GraphRef) -> Option<&'b [Element]>
    where
        'a: 'b,
    {
        match r {
            GraphRef::Inline(body, _) => Some(body),
            GraphRef::Named(n) => match self.patterns.get(&n.name) {
                Some(p) => Some(&p.body),
                None => {
                    self.diags.push(Diagnostic::error(format!("undeclared pattern `{}`", n.name), n.span));
                    None
                }
            },
        }
    }

    fn scale(&mut self, r: Option<Ratio>, span: Span) -> Option<Q> {
        let r = r.unwrap_or(Ratio { num: 1, den: 1 });
        if r.den == 0 || Q::new(r.num, r.den) <= Q::from_integer(0) {
            self.diags.push(Diagnostic::error("scale must be positive", span));
            return None;
        }
        Some(Q::new(r.num, r.den))
    }

    fn graph(&mut self, root: &NamedGraph, r: &GraphRef) -> Option<NamedGraph> {
        let body = self.body(r)?;
        match extend(root, body, &self.types, self.typed) {
            Ok(g) => Some(g),
            Err(d) => {
                self.diags.push(d);
                None
            }
        }
    }

    fn condition(&mut self, root: &NamedGraph, c: &CondExpr) -> Option<Condition> {
        Some(match c {
            CondExpr::True(_) => Condition::True,
            CondExpr::False(_) => Condition::falsity(),
            CondExpr::Exists { pattern, inner, .. } => {
                let target = self.graph(root, pattern)?;
                let inner = match inner {
                    Some(i) => self.condition(&target, i)?,
                    None => Condition::True,
                };
                let emb = Morphism::inclusion(root.vnames.len(), root.enames.len());
                Condition::exists(target.graph, emb, inner)
            }
            CondExpr::Forall { pattern, inner, .. } => {
                let target = self.graph(root, pattern)?;
                let inner = self.condition(&target, inner)?;
                let emb = Morphism::inclusion(root.vnames.len(), root.enames.len());
                Condition::forall(target.graph, emb, inner)
            }
            CondExpr::Not(x, _) => Condition::negate(self.condition(root, x)?),
            CondExpr::And(xs, _) => Condition::and(xs.iter().map(|x| self.condition(root, x)).collect::<Option<Vec<_>>>()?),
            CondExpr::Or(xs, _) => Condition::or(xs.iter().map(|x| self.condition(root, x)).collect::<Option<Vec<_>>>()?),
        })
    }

    /// `O ↩ K ↪ I` with `K` the elements named in both input and output.
    fn rule(&mut self, r: &RuleDecl) -> Option<Rule> {
        let input = self.graph(&NamedGraph::default(), &r.input)?;
        let output = self.graph(&NamedGraph::default(), &r.output)?;
        let mut k = Graph::new();
        let (mut kv_i, mut kv_o, mut ke_i, mut ke_o) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (v, name) in input.vnames.iter().enumerate() {
            let Some(w) = output.vertex(name) else { continue };
            if input.graph.vertex_label(v) != output.graph.vertex_label(w) {
                self.diags.push(Diagnostic::error(format!("vertex `{}` changes type between input and output", name), r.output.span()));
                return None;
            }
            k.add_vertex(input.graph.vertex_label(v));
            kv_i.push(v);
            kv_o.push(w);
        }
        for (e, name) in input.enames.iter().enumerate() {
            let Some(f) = output.edge(name) else { continue };
            let (ei, eo) = (input.graph.edge(e), output.graph.edge(f));
            let ends = |g: &NamedGraph, (a, b): (usize, usize)| {
                let (x, y) = (g.vnames[a].clone(), g.vnames[b].clone());
                if x <= y {
                    (x, y)
                } else {
                    (y, x)
                }
            };
            if ei.label != eo.label || ends(&input, ei.ends) != ends(&output, eo.ends) {
                self.diags.push(Diagnostic::error(
                    format!("edge `{}` is shared but its ends or type differ, so the context embedding is not a mono homomorphism", name),
                    r.output.span(),
                ));
                return None;
            }
            let ka = kv_i.iter().position(|&v| v == ei.ends.0).expect("shared edge ends are shared");
            let kb = kv_i.iter().position(|&v| v == ei.ends.1).expect("shared edge ends are shared");
            k.add_edge(ka, kb, ei.label);
            ke_i.push(e);
            ke_o.push(f);
        }
        let cond = match &r.cond {
            Some(c) => self.condition(&input, c)?,
            None => Condition::True,
        };
        match Rule::new(output.graph, k, input.graph, Morphism::new(kv_o, ke_o), Morphism::new(kv_i, ke_i), cond) {
            Ok(rule) => Some(rule),
            Err(e) => {
                self.diags.push(Diagnostic::error(e.to_string(), r.span));
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{load, parse};
    use super::*;

    #[test]
    fn identity_rule_has_true_condition() {
        let m = load("param k = 1.0; rule id rate k { input { a; }; output { a; }; }").unwrap();
        let r = &m.spec.transitions[0].rule;
        assert!(r.is_identity_shaped());
        assert!(r.cond.is_true());
        assert_eq!(m.warnings.len(), 1);
    }

    #[test]
    fn undeclared_pattern_is_reported_at_the_reference() {
        let src = "param k = 1.0; rule r rate k { input Missing; output { }; }";
        let diags = load(src).unwrap_err();
        assert_eq!(diags.len(), 1);
        assert_eq!(&src[diags[0].span.start..diags[0].span.end], "Missing");
    }

    #[test]
    fn conditions_glue_by_name() {
        let m = load("param k = 1.0; rule e rate k { input { a; b; }; output { a; b; a - b; }; where not exists { a - b; }; }").unwrap();
        let r = &m.spec.transitions[0].rule;
        let Condition::Not(inner) = &r.cond else { panic!() };
        let Condition::Exists(x) = inner.as_ref() else { panic!() };
        assert_eq!((x.target.vertex_count(), x.target.edge_count()), (2, 1));
        assert_eq!(x.embedding, Morphism::new(vec![0, 1], vec![]));
        assert_eq!((r.context.vertex_count(), r.context.edge_count()), (2, 0));
    }

    #[test]
    fn typed_edges_resolve_by_endpoint_types() {
        let src = "typegraph { vertex A; vertex B; edge A - B : t; loop A : p; loop B : p; }\n\
                   pattern P { a : A; b : B; a - b; prop a : p; prop b : p; }";
        let m = load(src).unwrap();
        let p = &m.patterns["P"];
        assert_eq!(p.edge_count(), 3);
        assert!(m.spec.types.check(p).is_ok());
        let bad = load("typegraph { vertex A; } pattern P { a : A; b : A; a - b; }").unwrap_err();
        assert!(bad[0].message.contains("needs a type"));
    }

    #[test]
    fn inconsistent_shared_edge_is_rejected() {
        let src = "param k = 1.0; rule r rate k { input { a; b; c; e = a - b; }; output { a; b; c; e = a - c; }; }";
        let diags = load(src).unwrap_err();
        assert!(diags[0].message.contains("not a mono"));
    }

    #[test]
    fn compilation_is_deterministic() {
        let src = "param k = 2.0; constraint not exists { x; y; x - y; x - y; }; observable v { pattern { a; }; }";
        assert_eq!(compile(&parse(src).unwrap()), compile(&parse(src).unwrap()));
    }
}
