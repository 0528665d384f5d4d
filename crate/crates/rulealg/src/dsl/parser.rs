//! Recursive-descent parser. Errors inside an item are reported and the
//! parser resynchronizes at the next top-level keyword.

use rulealg_core::rule::Semantics;

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::Diagnostic;

const ITEM_KEYWORDS: &[&str] = &["semantics", "typegraph", "pattern", "constraint", "rule", "observable", "param", "derive", "simulate", "init"];
const COND_KEYWORDS: &[&str] = &["true", "false", "not", "exists", "forall", "and", "or"];

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

pub fn parse(src: &str) -> Result<SourceModel, Vec<Diagnostic>> {
    let toks = lex(src).map_err(|d| vec![d])?;
    let mut p = Parser { toks, pos: 0 };
    let mut items = Vec::new();
    let mut diags = Vec::new();
    while !p.at_eof() {
        match p.item() {
            Ok(it) => items.push(it),
            Err(d) => {
                diags.push(d);
                p.synchronize();
            }
        }
    }
    if diags.is_empty() {
        Ok(SourceModel { items })
    } else {
        Err(diags)
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].span.end
        }
    }

    fn unexpected(&self, what: &str) -> Diagnostic {
        let t = self.peek();
        let found = match &t.tok {
            Tok::Ident(s) => format!("`{}`", s),
            Tok::Num(s) => format!("`{}`", s),
            Tok::Punct(c) => format!("`{}`", c),
            Tok::Eof => "end of file".to_string(),
        };
        Diagnostic::error(format!("expected {}, found {}", what, found), t.span)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn is_punct(&self, c: char) -> bool {
        self.peek().tok == Tok::Punct(c)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.is_punct(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Span> {
        if self.is_kw(kw) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("`{}`", kw)))
        }
    }

    fn expect_punct(&mut self, c: char) -> PResult<Span> {
        if self.is_punct(c) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("`{}`", c)))
        }
    }

    /// A name that is not a reserved word.
    fn ident(&mut self, what: &str) -> PResult<Ident> {
        match &self.peek().tok {
            Tok::Ident(s) if !COND_KEYWORDS.contains(&s.as_str()) => {
                let t = self.bump();
                let Tok::Ident(name) = t.tok else { unreachable!() };
                Ok(Ident { name, span: t.span })
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn number(&mut self) -> PResult<(String, Span)> {
        let neg = self.is_punct('-');
        let start = self.peek().span;
        if neg {
            self.bump();
        }
        match &self.peek().tok {
            Tok::Num(_) => {
                let t = self.bump();
                let Tok::Num(s) = t.tok else { unreachable!() };
                Ok((if neg { format!("-{}", s) } else { s }, start.to(t.span)))
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    fn float(&mut self) -> PResult<f64> {
        let (s, span) = self.number()?;
        s.parse().map_err(|_| Diagnostic::error(format!("invalid number `{}`", s), span))
    }

    fn int(&mut self) -> PResult<i64> {
        let (s, span) = self.number()?;
        s.parse().map_err(|_| Diagnostic::error(format!("expected an integer, found `{}`", s), span))
    }

    fn uint(&mut self) -> PResult<u64> {
        let (s, span) = self.number()?;
        s.parse().map_err(|_| Diagnostic::error(format!("expected a nonnegative integer, found `{}`", s), span))
    }

    fn ratio(&mut self) -> PResult<Ratio> {
        let start = self.peek().span;
        let num = self.int()?;
        let den = if self.eat_punct('/') { self.int()? } else { 1 };
        if den <= 0 {
            return Err(Diagnostic::error("scale denominator must be positive", start.to(self.toks[self.pos - 1].span)));
        }
        Ok(Ratio { num, den })
    }

    fn synchronize(&mut self) {
        let mut depth = 0i32;
        // always make progress
        self.bump();
        while !self.at_eof() {
            match &self.peek().tok {
                Tok::Punct('{') => depth += 1,
                Tok::Punct('}') => depth -= 1,
                Tok::Ident(s) if depth <= 0 && ITEM_KEYWORDS.contains(&s.as_str()) => {
                    let prev = &self.toks[self.pos - 1].tok;
                    if matches!(prev, Tok::Punct(';') | Tok::Punct('}')) {
                        return;
                    }
                }
                _ => {}
            }
            self.bump();
        }
    }

    fn item(&mut self) -> PResult<Item> {
        let start = self.peek().span;
        let Tok::Ident(kw) = self.peek().tok.clone() else {
            return Err(self.unexpected("a declaration"));
        };
        self.bump();
        let item = match kw.as_str() {
            "semantics" => {
                let s = self.semantics()?.ok_or_else(|| self.unexpected("`dpo` or `sqpo`"))?;
                self.expect_punct(';')?;
                Item::Semantics(s, self.span_from(start))
            }
            "typegraph" => {
                self.expect_punct('{')?;
                let mut entries = Vec::new();
                while !self.eat_punct('}') {
                    entries.push(self.type_entry()?);
                }
                Item::TypeGraph(entries, self.span_from(start))
            }
            "pattern" => {
                let name = self.ident("a pattern name")?;
                let body = self.block()?;
                Item::Pattern(PatternDecl { name, body, span: self.span_from(start) })
            }
            "constraint" => {
                let name = if matches!(self.peek_at(1), Tok::Punct(':')) { Some(self.ident("a constraint name")?) } else { None };
                if name.is_some() {
                    self.expect_punct(':')?;
                }
                let cond = self.cond()?;
                self.expect_punct(';')?;
                Item::Constraint(ConstraintDecl { name, cond, span: self.span_from(start) })
            }
            "rule" => Item::Rule(self.rule(start)?),
            "observable" => Item::Observable(self.observable(start)?),
            "param" => {
                let name = self.ident("a parameter name")?;
                let value = if self.eat_punct('=') { Some(self.float()?) } else { None };
                self.expect_punct(';')?;
                Item::Param(ParamDecl { name, value, span: self.span_from(start) })
            }
            "derive" => {
                self.expect_kw("moments")?;
                let (mut order, mut depth) = (None, None);
                while !self.eat_punct(';') {
                    if self.eat_kw("order") {
                        order = Some(self.uint()?);
                    } else if self.eat_kw("depth") {
                        depth = Some(self.uint()?);
                    } else {
                        return Err(self.unexpected("`order`, `depth` or `;`"));
                    }
                }
                Item::Derive(DeriveDecl { order, depth, span: self.span_from(start) })
            }
            "simulate" => {
                let mut d = SimulateDecl { t_max: None, runs: None, seed: None, grid: None, span: start };
                while !self.eat_punct(';') {
                    if self.eat_kw("t_max") {
                        d.t_max = Some(self.float()?);
                    } else if self.eat_kw("runs") {
                        d.runs = Some(self.uint()?);
                    } else if self.eat_kw("seed") {
                        d.seed = Some(self.uint()?);
                    } else if self.eat_kw("grid") {
                        d.grid = Some(self.float()?);
                    } else {
                        return Err(self.unexpected("`t_max`, `runs`, `seed`, `grid` or `;`"));
                    }
                }
                d.span = self.span_from(start);
                Item::Simulate(d)
            }
            "init" => {
                let g = self.graph_ref()?;
                self.expect_punct(';')?;
                Item::Init(g, self.span_from(start))
            }
            _ => return Err(Diagnostic::error(format!("unknown declaration `{}`", kw), start)),
        };
        Ok(item)
    }

    fn span_from(&self, start: Span) -> Span {
        Span::new(start.start, self.prev_end())
    }

    fn semantics(&mut self) -> PResult<Option<Semantics>> {
        if self.eat_kw("dpo") {
            Ok(Some(Semantics::Dpo))
        } else if self.eat_kw("sqpo") {
            Ok(Some(Semantics::Sqpo))
        } else {
            Ok(None)
        }
    }

    fn type_entry(&mut self) -> PResult<TypeEntry> {
        let e = if self.eat_kw("vertex") {
            TypeEntry::Vertex(self.ident("a vertex type name")?)
        } else if self.eat_kw("edge") {
            let a = self.ident("a vertex type")?;
            self.expect_punct('-')?;
            let b = self.ident("a vertex type")?;
            self.expect_punct(':')?;
            TypeEntry::Edge { a, b, name: self.ident("an edge type name")? }
        } else if self.eat_kw("loop") {
            let a = self.ident("a vertex type")?;
            self.expect_punct(':')?;
            TypeEntry::Loop { a, name: self.ident("a loop type name")? }
        } else {
            return Err(self.unexpected("`vertex`, `edge`, `loop` or `}`"));
        };
        self.expect_punct(';')?;
        Ok(e)
    }

    fn block(&mut self) -> PResult<Vec<Element>> {
        self.expect_punct('{')?;
        let mut out = Vec::new();
        while !self.eat_punct('}') {
            out.push(self.element()?);
        }
        Ok(out)
    }

    fn element(&mut self) -> PResult<Element> {
        let e = if self.eat_kw("prop") {
            let v = self.ident("a vertex name")?;
            self.expect_punct(':')?;
            Element::Prop { v, ty: self.ident("a loop type")? }
        } else {
            let first = self.ident("a vertex or edge")?;
            if self.eat_punct('=') {
                let a = self.ident("a vertex name")?;
                self.expect_punct('-')?;
                let b = self.ident("a vertex name")?;
                let ty = if self.eat_punct(':') { Some(self.ident("an edge type")?) } else { None };
                Element::Edge { name: Some(first), a, b, ty }
            } else if self.eat_punct('-') {
                let b = self.ident("a vertex name")?;
                let ty = if self.eat_punct(':') { Some(self.ident("an edge type")?) } else { None };
                Element::Edge { name: None, a: first, b, ty }
            } else {
                let ty = if self.eat_punct(':') { Some(self.ident("a vertex type")?) } else { None };
                Element::Vertex { name: first, ty }
            }
        };
        self.expect_punct(';')?;
        Ok(e)
    }

    fn graph_ref(&mut self) -> PResult<GraphRef> {
        if self.is_punct('{') {
            let start = self.peek().span;
            let body = self.block()?;
            Ok(GraphRef::Inline(body, self.span_from(start)))
        } else {
            Ok(GraphRef::Named(self.ident("a pattern name or `{`")?))
        }
    }

    fn rule(&mut self, start: Span) -> PResult<RuleDecl> {
        let name = self.ident("a rule name")?;
        let semantics = self.semantics()?;
        self.expect_kw("rate")?;
        let rate = self.ident("a rate parameter")?;
        let scale = if self.eat_kw("scale") { Some(self.ratio()?) } else { None };
        self.expect_punct('{')?;
        self.expect_kw("input")?;
        let input = self.graph_ref()?;
        self.expect_punct(';')?;
        self.expect_kw("output")?;
        let output = self.graph_ref()?;
        self.expect_punct(';')?;
        let cond = self.where_clause()?;
        self.expect_punct('}')?;
        Ok(RuleDecl { name, semantics, rate, scale, input, output, cond, span: self.span_from(start) })
    }

    fn observable(&mut self, start: Span) -> PResult<ObservableDecl> {
        let name = self.ident("an observable name")?;
        let scale = if self.eat_kw("scale") { Some(self.ratio()?) } else { None };
        self.expect_punct('{')?;
        self.expect_kw("pattern")?;
        let pattern = self.graph_ref()?;
        self.expect_punct(';')?;
        let cond = self.where_clause()?;
        self.expect_punct('}')?;
        Ok(ObservableDecl { name, scale, pattern, cond, span: self.span_from(start) })
    }

    fn where_clause(&mut self) -> PResult<Option<CondExpr>> {
        if self.eat_kw("where") {
            let c = self.cond()?;
            self.expect_punct(';')?;
            Ok(Some(c))
        } else {
            Ok(None)
        }
    }

    fn cond(&mut self) -> PResult<CondExpr> {
        let first = self.conjunction()?;
        if !self.is_kw("or") {
            return Ok(first);
        }
        let mut parts = vec![first];
        while self.eat_kw("or") {
            parts.push(self.conjunction()?);
        }
        let span = parts[0].span().to(parts[parts.len() - 1].span());
        Ok(CondExpr::Or(parts, span))
    }

    fn conjunction(&mut self) -> PResult<CondExpr> {
        let first = self.unary()?;
        if !self.is_kw("and") {
            return Ok(first);
        }
        let mut parts = vec![first];
        while self.eat_kw("and") {
            parts.push(self.unary()?);
        }
        let span = parts[0].span().to(parts[parts.len() - 1].span());
        Ok(CondExpr::And(parts, span))
    }

    fn unary(&mut self) -> PResult<CondExpr> {
        let start = self.peek().span;
        if self.eat_kw("not") {
            let inner = self.unary()?;
            let span = start.to(inner.span());
            return Ok(CondExpr::Not(Box::new(inner), span));
        }
        if self.eat_kw("true") {
            return Ok(CondExpr::True(start));
        }
        if self.eat_kw("false") {
            return Ok(CondExpr::False(start));
        }
        if self.eat_punct('(') {
            let c = self.cond()?;
            self.expect_punct(')')?;
            return Ok(c);
        }
        if self.eat_kw("exists") {
            let pattern = self.graph_ref()?;
            let inner = if self.eat_punct('[') {
                let c = self.cond()?;
                self.expect_punct(']')?;
                Some(Box::new(c))
            } else {
                None
            };
            return Ok(CondExpr::Exists { pattern, inner, span: self.span_from(start) });
        }
        if self.eat_kw("forall") {
            let pattern = self.graph_ref()?;
            self.expect_punct('[')?;
            let c = self.cond()?;
            self.expect_punct(']')?;
            return Ok(CondExpr::Forall { pattern, inner: Box::new(c), span: self.span_from(start) });
        }
        Err(self.unexpected("a condition"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_an_empty_model() {
        assert_eq!(parse("").unwrap(), SourceModel::default());
        assert_eq!(parse("  # only a comment\n").unwrap(), SourceModel::default());
    }

    #[test]
    fn condition_precedence() {
        let m = parse("constraint c: not exists A and exists B or true;").unwrap();
        let Item::Constraint(c) = &m.items[0] else { panic!() };
        let CondExpr::Or(parts, _) = &c.cond else { panic!("{:?}", c.cond) };
        assert!(matches!(&parts[0], CondExpr::And(xs, _) if matches!(xs[0], CondExpr::Not(..))));
        assert!(matches!(parts[1], CondExpr::True(_)));
    }

    #[test]
    fn errors_carry_spans_and_recover() {
        let src = "param k = ;\nparam j = 1.0;\nrule r rate k { input {a;}; outpt {}; }\n";
        let diags = parse(src).unwrap_err();
        assert_eq!(diags.len(), 2);
        assert_eq!(&src[diags[0].span.start..diags[0].span.end], ";");
        assert_eq!(&src[diags[1].span.start..diags[1].span.end], "outpt");
    }
}
