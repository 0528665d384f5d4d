//! Syntax tree of `.model` files. Spans never take part in equality, so
//! two trees compare equal when they differ only in layout.

use rulealg_core::rule::Semantics;

/// Byte range into the source text.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

// consistent with `eq`: all spans are equal
impl std::hash::Hash for Span {
    fn hash<H: std::hash::Hasher>(&self, _: &mut H) {}
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span { start: self.start.min(other.start), end: self.end.max(other.end) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

/// `p/q`, or an integer when `q = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ratio {
    pub num: i64,
    pub den: i64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SourceModel {
    pub items: Vec<Item>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Semantics(Semantics, Span),
    TypeGraph(Vec<TypeEntry>, Span),
    Pattern(PatternDecl),
    Constraint(ConstraintDecl),
    Rule(RuleDecl),
    Observable(ObservableDecl),
    Param(ParamDecl),
    Derive(DeriveDecl),
    Simulate(SimulateDecl),
    Init(GraphRef, Span),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeEntry {
    Vertex(Ident),
    Edge { a: Ident, b: Ident, name: Ident },
    Loop { a: Ident, name: Ident },
}

/// One line of a graph block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Element {
    /// `a;` or `a : T;`
    Vertex { name: Ident, ty: Option<Ident> },
    /// `a - b;`, `a - b : t;`, `e = a - b : t;`
    Edge { name: Option<Ident>, a: Ident, b: Ident, ty: Option<Ident> },
    /// `prop a : t;`, a typed loop.
    Prop { v: Ident, ty: Ident },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphRef {
    Named(Ident),
    Inline(Vec<Element>, Span),
}

impl GraphRef {
    pub fn span(&self) -> Span {
        match self {
            GraphRef::Named(i) => i.span,
            GraphRef::Inline(_, s) => *s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CondExpr {
    True(Span),
    False(Span),
    Exists { pattern: GraphRef, inner: Option<Box<CondExpr>>, span: Span },
    Forall { pattern: GraphRef, inner: Box<CondExpr>, span: Span },
    Not(Box<CondExpr>, Span),
    And(Vec<CondExpr>, Span),
    Or(Vec<CondExpr>, Span),
}

impl CondExpr {
    pub fn span(&self) -> Span {
        match self {
            CondExpr::True(s) | CondExpr::False(s) | CondExpr::Not(_, s) | CondExpr::And(_, s) | CondExpr::Or(_, s) => *s,
            CondExpr::Exists { span, .. } | CondExpr::Forall { span, .. } => *span,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatternDecl {
    pub name: Ident,
    pub body: Vec<Element>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintDecl {
    pub name: Option<Ident>,
    pub cond: CondExpr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuleDecl {
    pub name: Ident,
    pub semantics: Option<Semantics>,
    pub rate: Ident,
    pub scale: Option<Ratio>,
    pub input: GraphRef,
    pub output: GraphRef,
    pub cond: Option<CondExpr>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableDecl {
    pub name: Ident,
    pub scale: Option<Ratio>,
    pub pattern: GraphRef,
    pub cond: Option<CondExpr>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamDecl {
    pub name: Ident,
    pub value: Option<f64>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeriveDecl {
    pub order: Option<u64>,
    pub depth: Option<u64>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulateDecl {
    pub t_max: Option<f64>,
    pub runs: Option<u64>,
    pub seed: Option<u64>,
    pub grid: Option<f64>,
    pub span: Span,
}
