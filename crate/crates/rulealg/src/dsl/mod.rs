//! The `.model` language: lexer, parser, formatter and compiler.
//!
//! ```text
//! typegraph { vertex A; edge A - A : bond; loop A : phos; }
//! pattern Pair { a : A; b : A; }
//! constraint simple: not exists { x : A; y : A; x - y : bond; x - y : bond; };
//! rule bind rate k scale 1/2 {
//!     input Pair;
//!     output { a : A; b : A; a - b : bond; };
//!     where not exists { a - b : bond; };
//! }
//! observable pairs scale 1/2 { pattern Pair; }
//! param k = 1.0;
//! derive moments order 1 depth 3;
//! simulate t_max 10 runs 1000 seed 42 grid 0.1;
//! ```
//!
//! Elements with the same name in a rule's input and output form its
//! context. Patterns used inside conditions are glued onto the graph they
//! extend by name, so `exists { a - b; }` over an input with vertices `a`,
//! `b` asks for an edge between them.

pub mod ast;
pub mod compile;
pub mod format;
pub mod lexer;
pub mod parser;

pub use ast::{SourceModel, Span};
pub use compile::{compile, CompiledModel, NamedGraph, SimulateSettings};
pub use format::format;
pub use parser::parse;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn error(message: impl Into<String>, span: Span) -> Self {
        Diagnostic { severity: Severity::Error, message: message.into(), span }
    }

    pub fn warning(message: impl Into<String>, span: Span) -> Self {
        Diagnostic { severity: Severity::Warning, message: message.into(), span }
    }

    /// `path:line:col: error: message`, 1-based.
    pub fn render(&self, src: &str, path: &str) -> String {
        let (line, col) = line_col(src, self.span.start);
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        format!("{}:{}:{}: {}: {}", path, line, col, sev, self.message)
    }
}

/// 1-based line and column (in characters) of a byte offset.
pub fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(src.len());
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Parses and compiles in one go.
pub fn load(src: &str) -> Result<CompiledModel, Vec<Diagnostic>> {
    let sm = parse(src)?;
    compile(&sm)
}
