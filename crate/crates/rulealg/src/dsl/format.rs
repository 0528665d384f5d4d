//! Canonical pretty-printing. `parse(format(m)) == m` for every parsed `m`.

use std::fmt::Write;

use rulealg_core::rule::Semantics;

use super::ast::*;

pub fn format(m: &SourceModel) -> String {
    let mut out = String::new();
    let mut prev: Option<std::mem::Discriminant<Item>> = None;
    for item in &m.items {
        let d = std::mem::discriminant(item);
        // blank line between groups and around block items
        if prev.is_some() && (prev != Some(d) || is_block(item)) {
            out.push('\n');
        }
        prev = Some(d);
        item_text(item, &mut out);
    }
    out
}

fn is_block(item: &Item) -> bool {
    matches!(item, Item::TypeGraph(..) | Item::Pattern(_) | Item::Rule(_) | Item::Observable(_))
}

fn semantics(s: Semantics) -> &'static str {
    match s {
        Semantics::Dpo => "dpo",
        Semantics::Sqpo => "sqpo",
    }
}

fn ratio(r: Ratio) -> String {
    if r.den == 1 {
        format!("{}", r.num)
    } else {
        format!("{}/{}", r.num, r.den)
    }
}

/// Shortest text that reads back as the same float.
fn float(x: f64) -> String {
    format!("{:?}", x)
}

fn item_text(item: &Item, out: &mut String) {
    match item {
        Item::Semantics(s, _) => {
            let _ = writeln!(out, "semantics {};", semantics(*s));
        }
        Item::TypeGraph(entries, _) => {
            out.push_str("typegraph {\n");
            for e in entries {
                let _ = match e {
                    TypeEntry::Vertex(v) => writeln!(out, "    vertex {};", v.name),
                    TypeEntry::Edge { a, b, name } => writeln!(out, "    edge {} - {} : {};", a.name, b.name, name.name),
                    TypeEntry::Loop { a, name } => writeln!(out, "    loop {} : {};", a.name, name.name),
                };
            }
            out.push_str("}\n");
        }
        Item::Pattern(p) => {
            let _ = writeln!(out, "pattern {} {{", p.name.name);
            for e in &p.body {
                let _ = writeln!(out, "    {}", element(e));
            }
            out.push_str("}\n");
        }
        Item::Constraint(c) => {
            out.push_str("constraint ");
            if let Some(n) = &c.name {
                let _ = write!(out, "{}: ", n.name);
            }
            let _ = writeln!(out, "{};", cond(&c.cond));
        }
        Item::Rule(r) => {
            let _ = write!(out, "rule {}", r.name.name);
            if let Some(s) = r.semantics {
                let _ = write!(out, " {}", semantics(s));
            }
            let _ = write!(out, " rate {}", r.rate.name);
            if let Some(s) = r.scale {
                let _ = write!(out, " scale {}", ratio(s));
            }
            out.push_str(" {\n");
            let _ = writeln!(out, "    input {};", graph_ref(&r.input));
            let _ = writeln!(out, "    output {};", graph_ref(&r.output));
            if let Some(c) = &r.cond {
                let _ = writeln!(out, "    where {};", cond(c));
            }
            out.push_str("}\n");
        }
        Item::Observable(o) => {
            let _ = write!(out, "observable {}", o.name.name);
            if let Some(s) = o.scale {
                let _ = write!(out, " scale {}", ratio(s));
            }
            out.push_str(" {\n");
            let _ = writeln!(out, "    pattern {};", graph_ref(&o.pattern));
            if let Some(c) = &o.cond {
                let _ = writeln!(out, "    where {};", cond(c));
            }
            out.push_str("}\n");
        }
        Item::Param(p) => {
            let _ = match p.value {
                Some(v) => writeln!(out, "param {} = {};", p.name.name, float(v)),
                None => writeln!(out, "param {};", p.name.name),
            };
        }
        Item::Derive(d) => {
            out.push_str("derive moments");
            if let Some(o) = d.order {
                let _ = write!(out, " order {}", o);
            }
            if let Some(k) = d.depth {
                let _ = write!(out, " depth {}", k);
            }
            out.push_str(";\n");
        }
        Item::Simulate(s) => {
            out.push_str("simulate");
            if let Some(t) = s.t_max {
                let _ = write!(out, " t_max {}", float(t));
            }
            if let Some(r) = s.runs {
                let _ = write!(out, " runs {}", r);
            }
            if let Some(x) = s.seed {
                let _ = write!(out, " seed {}", x);
            }
            if let Some(g) = s.grid {
                let _ = write!(out, " grid {}", float(g));
            }
            out.push_str(";\n");
        }
        Item::Init(g, _) => {
            let _ = writeln!(out, "init {};", graph_ref(g));
        }
    }
}

pub fn element(e: &Element) -> String {
    let ty = |t: &Option<Ident>| t.as_ref().map(|t| format!(" : {}", t.name)).unwrap_or_default();
    match e {
        Element::Vertex { name, ty: t } => format!("{}{};", name.name, ty(t)),
        Element::Edge { name, a, b, ty: t } => {
            let n = name.as_ref().map(|n| format!("{} = ", n.name)).unwrap_or_default();
            format!("{}{} - {}{};", n, a.name, b.name, ty(t))
        }
        Element::Prop { v, ty } => format!("prop {} : {};", v.name, ty.name),
    }
}

pub fn graph_ref(g: &GraphRef) -> String {
    match g {
        GraphRef::Named(n) => n.name.clone(),
        GraphRef::Inline(body, _) if body.is_empty() => "{ }".to_string(),
        GraphRef::Inline(body, _) => {
            let parts: Vec<String> = body.iter().map(element).collect();
            format!("{{ {} }}", parts.join(" "))
        }
    }
}

pub fn cond(c: &CondExpr) -> String {
    let nested = |c: &CondExpr| match c {
        CondExpr::And(..) | CondExpr::Or(..) => format!("({})", cond(c)),
        _ => cond(c),
    };
    match c {
        CondExpr::True(_) => "true".into(),
        CondExpr::False(_) => "false".into(),
        CondExpr::Exists { pattern, inner, .. } => match inner {
            Some(i) => format!("exists {} [{}]", graph_ref(pattern), cond(i)),
            None => format!("exists {}", graph_ref(pattern)),
        },
        CondExpr::Forall { pattern, inner, .. } => format!("forall {} [{}]", graph_ref(pattern), cond(inner)),
        CondExpr::Not(x, _) => format!("not {}", nested(x)),
        CondExpr::And(xs, _) => xs.iter().map(nested).collect::<Vec<_>>().join(" and "),
        CondExpr::Or(xs, _) => xs.iter().map(nested).collect::<Vec<_>>().join(" or "),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse;
    use super::*;

    #[test]
    fn round_trip_is_a_fixpoint() {
        let src = "semantics dpo; param k = 0.5; param j;\n\
                   pattern P { a : A; b; e = a - b : t; prop a : p; }\n\
                   constraint c1: not (exists P and exists { x; }) or forall P [exists { a - b; } [true]];\n\
                   rule r sqpo rate k scale 1/2 { input P; output { }; where not exists { a - b : t; }; }\n\
                   observable o { pattern { a; }; }\n\
                   derive moments depth 2; simulate t_max 10.0 seed 3 grid 0.25; init { x; y; };";
        let m = parse(src).unwrap();
        let text = format(&m);
        let again = parse(&text).unwrap();
        assert_eq!(m, again);
        assert_eq!(text, format(&again));
    }

    #[test]
    fn empty_model_formats_to_nothing() {
        assert_eq!(format(&SourceModel::default()), "");
    }
}
