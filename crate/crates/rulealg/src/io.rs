//! JSON and CSV output, text sketches of graphs and rules, model digests.

use std::io::Write;
use std::path::Path;

use rulealg_core::algebra::{RuleVector, StateVector, Q};
use rulealg_core::condition::{encode, Condition};
use rulealg_core::model::ModelSpec;
use rulealg_core::ode::{Closure, OdeSystem};
use rulealg_core::rule::{Rule, Semantics};
use rulealg_core::{Graph, TypeGraph};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub fn semantics_name(s: Semantics) -> &'static str {
    match s {
        Semantics::Dpo => "dpo",
        Semantics::Sqpo => "sqpo",
    }
}

pub fn rational(q: Q) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// `(0:K 1:k | 0-1:site)`; untyped graphs drop the labels.
pub fn sketch_graph(g: &Graph, types: &TypeGraph) -> String {
    let typed = !types.is_untyped();
    let vs: Vec<String> =
        (0..g.vertex_count()).map(|v| if typed { format!("{}:{}", v, types.vertex_name(g.vertex_label(v))) } else { v.to_string() }).collect();
    let es: Vec<String> = g
        .edges()
        .iter()
        .map(|e| {
            let (a, b) = e.ends;
            if typed {
                format!("{}-{}:{}", a, b, types.edge_name(e.label))
            } else {
                format!("{}-{}", a, b)
            }
        })
        .collect();
    match (vs.is_empty(), es.is_empty()) {
        (true, _) => "()".into(),
        (false, true) => format!("({})", vs.join(" ")),
        (false, false) => format!("({} | {})", vs.join(" "), es.join(" ")),
    }
}

pub fn sketch_condition(c: &Condition, types: &TypeGraph) -> String {
    match c {
        Condition::True => "true".into(),
        Condition::Not(x) if x.is_true() => "false".into(),
        Condition::Not(x) => format!("not {}", sketch_condition(x, types)),
        Condition::And(xs) => {
            let parts: Vec<String> = xs.iter().map(|x| sketch_condition(x, types)).collect();
            format!("({})", parts.join(" and "))
        }
        Condition::Exists(x) => {
            let base = format!("exists {}", sketch_graph(&x.target, types));
            if x.inner.is_true() {
                base
            } else {
                format!("{} [{}]", base, sketch_condition(&x.inner, types))
            }
        }
    }
}

/// `O <- K -> I`, read right to left, with the leg maps when `K` is not
/// empty.
pub fn sketch_rule(r: &Rule, types: &TypeGraph) -> String {
    let mut s = format!("{} <- {} -> {}", sketch_graph(&r.output, types), sketch_graph(&r.context, types), sketch_graph(&r.input, types));
    if r.context.vertex_count() > 0 {
        s.push_str(&format!(" via o={:?} i={:?}", r.o.vmap, r.i.vmap));
    }
    if !r.cond.is_true() {
        s.push_str(&format!(" where {}", sketch_condition(&r.cond, types)));
    }
    s
}

pub fn graph_json(g: &Graph, types: &TypeGraph) -> Value {
    let vertices: Vec<&str> = (0..g.vertex_count()).map(|v| types.vertex_name(g.vertex_label(v))).collect();
    let edges: Vec<Value> = g.edges().iter().map(|e| json!([e.ends.0, e.ends.1, types.edge_name(e.label)])).collect();
    json!({ "vertices": vertices, "edges": edges })
}

pub fn rule_json(r: &Rule, types: &TypeGraph) -> Value {
    json!({
        "output": graph_json(&r.output, types),
        "context": graph_json(&r.context, types),
        "input": graph_json(&r.input, types),
        "o": { "vertices": r.o.vmap, "edges": r.o.emap },
        "i": { "vertices": r.i.vmap, "edges": r.i.emap },
        "condition": sketch_condition(&r.cond, types),
    })
}

pub fn rule_vector_json(v: &RuleVector, types: &TypeGraph) -> Value {
    let terms: Vec<Value> =
        v.iter().map(|(_, r, c)| json!({ "coefficient": rational(c), "sketch": sketch_rule(r, types), "rule": rule_json(r, types) })).collect();
    json!({ "terms": terms })
}

/// One line per term, `coefficient * sketch`; `0` for the zero vector.
pub fn rule_vector_text(v: &RuleVector, types: &TypeGraph) -> String {
    if v.is_zero() {
        return "0\n".into();
    }
    v.iter().map(|(_, r, c)| format!("{} * [{}]\n", rational(c), sketch_rule(r, types))).collect()
}

pub fn state_vector_json(s: &StateVector, types: &TypeGraph) -> Value {
    let terms: Vec<Value> =
        s.0.values().map(|(g, c)| json!({ "coefficient": rational(*c), "sketch": sketch_graph(g, types), "graph": graph_json(g, types) })).collect();
    json!({ "terms": terms })
}

pub fn state_vector_text(s: &StateVector, types: &TypeGraph) -> String {
    if s.is_zero() {
        return "0\n".into();
    }
    s.0.values().map(|(g, c)| format!("{} * {}\n", rational(*c), sketch_graph(g, types))).collect()
}

pub fn closure_name(c: Closure) -> String {
    match c {
        Closure::Closed => "closed".into(),
        Closure::Truncated { depth } => format!("truncated at depth {}", depth),
        Closure::NonClosing { depth } => format!("non-closing at depth {}", depth),
    }
}

pub fn ode_json(sys: &OdeSystem, types: &TypeGraph) -> Value {
    let status = match sys.status {
        Closure::Closed => json!({ "kind": "closed" }),
        Closure::Truncated { depth } => json!({ "kind": "truncated", "depth": depth }),
        Closure::NonClosing { depth } => json!({ "kind": "non-closing", "depth": depth }),
    };
    let variables: Vec<Value> = sys
        .variables
        .iter()
        .zip(&sys.expanded)
        .map(|(v, &expanded)| {
            json!({
                "name": v.name,
                "depth": v.depth,
                "scale": rational(v.scale),
                "expanded": expanded,
                "pattern": sketch_rule(&v.rule, types),
            })
        })
        .collect();
    let equations: Vec<Value> = sys
        .equations
        .iter()
        .enumerate()
        .filter(|(i, _)| sys.expanded[*i])
        .map(|(i, eq)| {
            let terms: Vec<Value> =
                eq.iter().map(|t| json!({ "variable": t.var.map(|w| sys.variables[w].name.clone()), "coefficient": t.coef.render(&sys.params) })).collect();
            json!({ "variable": sys.variables[i].name, "terms": terms })
        })
        .collect();
    let outputs: Vec<Value> = sys
        .outputs
        .iter()
        .map(|o| {
            let terms: Vec<Value> = o.terms.iter().map(|&(v, c)| json!([sys.variables[v].name, rational(c)])).collect();
            json!({ "name": o.name, "terms": terms })
        })
        .collect();
    json!({
        "status": status,
        "rounds": sys.rounds,
        "parameters": sys.params,
        "variables": variables,
        "equations": equations,
        "outputs": outputs,
    })
}

pub fn ode_text(sys: &OdeSystem) -> String {
    let mut s = format!("# status: {}\n", closure_name(sys.status));
    s.push_str(&format!("# variables per round: {:?}\n", sys.rounds));
    for line in sys.render() {
        s.push_str(&line);
        s.push('\n');
    }
    s
}

/// SHA-256 over the rule classes, conditions, rates and observables, in
/// declaration order.
pub fn model_digest(spec: &ModelSpec) -> String {
    let mut h = Sha256::new();
    let mut put = |tag: &str, words: &[u64]| {
        h.update(tag.as_bytes());
        h.update((words.len() as u64).to_le_bytes());
        for w in words {
            h.update(w.to_le_bytes());
        }
    };
    put(semantics_name(spec.semantics), &[]);
    for p in &spec.params {
        put(&p.name, &[p.value.map_or(u64::MAX, f64::to_bits)]);
    }
    for c in &spec.constraints {
        put(&c.name, &encode(&Graph::new(), &c.cond));
    }
    for t in &spec.transitions {
        put(&t.name, &[t.rate as u64, *t.scale.numer() as u64, *t.scale.denom() as u64]);
        put(semantics_name(t.semantics), &t.rule.key().0);
    }
    for o in &spec.observables {
        put(&o.name, &[*o.scale.numer() as u64, *o.scale.denom() as u64]);
        put("", &o.rule.key().0);
    }
    h.finalize().iter().map(|b| format!("{:02x}", b)).collect()
}

/// Writes `header` then `rows` to a CSV file.
pub fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()
}

pub fn write_json(path: &Path, v: &Value) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, v)?;
    f.write_all(b"\n")
}

/// `{:?}` keeps the shortest round-tripping form, so CSVs are bit-exact.
pub fn float(x: f64) -> String {
    format!("{:?}", x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rulealg_core::Morphism;

    #[test]
    fn sketches() {
        let t = TypeGraph::untyped();
        let edge = Graph::untyped(2, &[(0, 1)]);
        assert_eq!(sketch_graph(&edge, &t), "(0 1 | 0-1)");
        assert_eq!(sketch_graph(&Graph::new(), &t), "()");
        let c = Condition::negate(Condition::exists_plain(edge.clone(), Morphism::new(vec![0, 1], vec![])));
        let two = Graph::discrete(2);
        let id = Morphism::identity(&two);
        let r = Rule::new(edge, two.clone(), two, id.clone(), id, c).unwrap();
        assert_eq!(sketch_rule(&r, &t), "(0 1 | 0-1) <- (0 1) -> (0 1) via o=[0, 1] i=[0, 1] where not exists (0 1 | 0-1)");
        assert_eq!(rational(Q::new(-2, 4)), "-1/2");
    }
}
