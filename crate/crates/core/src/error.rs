use alloc::string::String;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge {edge} has an endpoint outside the vertex set")]
    DanglingIncidence { edge: usize },
    #[error("maps do not form a graph homomorphism")]
    NotHomomorphism,
    #[error("morphism is not injective")]
    NotMono,
    #[error("vertex {vertex} has no type in the type graph")]
    UntypedVertex { vertex: usize },
    #[error("edge {edge} is not typed by an edge of the type graph")]
    UntypedEdge { edge: usize },
    #[error("graphs are typed over different type graphs")]
    TypeGraphMismatch,
    #[error("pullback incidence has more than two vertices; neither leg is mono")]
    PullbackNotDefined,
    #[error("span legs do not share a common apex")]
    IllFormedSpan,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConditionError {
    #[error("condition root does not match: {0}")]
    RootMismatch(GraphError),
    #[error("span for condition transport is not a pair of monos")]
    NonMonoSpan,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule leg is not a mono: {0}")]
    NonMonoLeg(GraphError),
    #[error("rule condition is not rooted at the input: {0}")]
    Condition(#[from] ConditionError),
    #[error("match is not admissible for this rule")]
    MatchNotAdmissible,
    #[error("composition match is not admissible")]
    CompositionNotAdmissible,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),
    #[error("rate `{name}` must be strictly positive, got {value}")]
    NonPositiveRate { name: String, value: f64 },
    #[error("observable `{0}` is not diagonal")]
    NotDiagonal(String),
    #[error("model mixes DPO and SqPO transitions; symbolic derivation needs a single semantics")]
    MixedSemantics,
    #[error("state violates a global constraint: {0}")]
    ConstraintViolation(String),
    #[error("generator conservation failed at t={time}: outflow {outflow} != diagonal {diagonal}")]
    Conservation { time: f64, outflow: f64, diagonal: f64 },
    #[error("ODE system does not close and no truncation depth was given")]
    NonClosing,
    #[error("degenerate parameter combination: {0} is zero")]
    DegenerateDenominator(&'static str),
    #[error("initial vector has {got} entries, system has {want} variables")]
    InitialLength { got: usize, want: usize },
}
