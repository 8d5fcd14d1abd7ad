//! A small text language for string diagrams.
//!
//! ```text
//! program := decl* expr
//! decl    := "let" IDENT "=" par ";"
//! expr    := par ( ";" par )*
//! par     := atom ( "*" atom )*
//! atom    := id[X] | swap[X,Y] | copy[X] | del[X] | unif[G] | mult[G]
//!          | unit[G] | inv[G] | act[N,G] | IDENT | "(" expr ")"
//! ```
//!
//! `a ; b` runs `a` then `b`; `*` places terms side by side and binds
//! tighter than `;`. Objects are environment names or integers (an
//! anonymous set of that size). `#` starts a comment.
//!
//! ```
//! use catsec::diagram::{evaluate, Environment};
//! use catsec::grouphopf::FiniteGroup;
//!
//! let mut env = Environment::new();
//! env.add_group("G", FiniteGroup::cyclic(2).unwrap()).unwrap();
//! let m = evaluate("unif[G] ; copy[G]", &env).unwrap();
//! assert_eq!(m.matrix(), &[0.5, 0.0, 0.0, 0.5]);
//! ```

mod ast;
mod env;
mod eval;
mod lexer;
mod parser;
mod typecheck;

use std::fmt;

use thiserror::Error;

pub use ast::{pretty_print, Decl, Node, NodeKind, Obj, Program, Span};
pub use env::{EnvObject, Environment};
pub use eval::eval;
pub use parser::{parse, parse_expr, KEYWORDS};
pub use typecheck::{typecheck, Leaf, Typed, TypedDiagram, TypedKind};

use crate::finstoch::{FinStochError, Morphism, WireList};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub found: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: found {}, expected {}",
            self.line,
            self.col,
            self.found,
            self.expected.join(" or ")
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone)]
pub enum TypeErrorKind {
    Unbound(String),
    Mismatch { left: WireList, right: WireList },
    MissingGroup(String),
    EmptyObject,
    Duplicate(String),
}

#[derive(Debug, Clone)]
pub struct TypeError {
    pub span: Span,
    pub kind: TypeErrorKind,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.span.line, self.span.col)?;
        match &self.kind {
            TypeErrorKind::Unbound(n) => write!(f, "unbound name `{n}`"),
            TypeErrorKind::Mismatch { left, right } => write!(
                f,
                "interface mismatch: {} (size {}) feeds {} (size {})",
                left,
                left.total_size(),
                right,
                right.total_size()
            ),
            TypeErrorKind::MissingGroup(o) => write!(f, "object `{o}` has no group structure"),
            TypeErrorKind::EmptyObject => write!(f, "objects must have at least one element"),
            TypeErrorKind::Duplicate(n) => write!(f, "`{n}` is already defined"),
        }
    }
}

impl std::error::Error for TypeError {}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("name `{0}` is defined twice")]
    Duplicate(String),
    #[error("`{0}` is a reserved word")]
    Reserved(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("group `{0}`: {1}")]
    Group(String, String),
    #[error("morphism `{0}`: {1}")]
    Morphism(String, FinStochError),
    #[error(transparent)]
    FinStoch(#[from] FinStochError),
    #[error("reading environment: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing environment: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("syntax error at {0}")]
    Parse(#[from] ParseError),
    #[error("type error at {0}")]
    Type(#[from] TypeError),
    #[error(transparent)]
    Eval(#[from] FinStochError),
}

/// Parses, type-checks and evaluates a program.
pub fn evaluate(src: &str, env: &Environment) -> Result<Morphism, DiagramError> {
    let prog = parse(src)?;
    let typed = typecheck(&prog, env)?;
    Ok(eval(&typed, env)?)
}
