//! Language front end: terms, programs, parsing, unification and rendering.

pub mod parse;
pub mod program;
pub mod render;
pub mod term;
pub mod unify;

pub use parse::{parse_program, parse_term};
pub use program::{Clause, PredicateDecl, Program, DEFAULT_DTYPE};
pub use render::{render_clause, render_goal, render_program, render_term};
pub use term::{Sym, Term};
pub use unify::{apply, match_ground, unify, Subst};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LangError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("weight {value} at line {line}, column {col} is outside [0,1]")]
    Weight { line: usize, col: usize, value: f64 },
    #[error("predicate {name} is declared with arity {declared} but used with arity {found}")]
    Arity { name: String, declared: usize, found: usize },
}
