//! The rule language: ASCII logic-program text with sorts, classical (`-`) and
//! default (`not`) negation, inequality guards and step arithmetic.
//!
//! ```text
//! step(1..2).
//! room(lab). room(office).
//! holds(exists(C,R),I) :- holds(in(O,R),I), is(O,C).
//! -holds(in(O,R2),I) :- holds(in(O,R1),I), R1 != R2.
//! ```

mod ast;
mod lexer;
mod parser;

pub use ast::{serialize_program, Atom, Guard, Literal, Pos, Program, Rule, SortValue, Term};
pub use lexer::MAX_IDENT_LEN;
pub use parser::parse_program;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: {reason}: {found:?}")]
    Lex {
        pos: Pos,
        found: char,
        reason: String,
    },
    #[error("{pos}: identifier of length {len} exceeds the {MAX_IDENT_LEN}-character limit")]
    IdentTooLong { pos: Pos, len: usize },
    #[error("{pos}: expected {expected}, found {found}")]
    Syntax {
        pos: Pos,
        expected: String,
        found: String,
    },
    #[error("{pos}: head variable {var} does not occur in the rule body")]
    Unsafe { pos: Pos, var: String },
    #[error("{pos}: `{name}` used with arity {second}, but with arity {first} at {first_pos}")]
    ArityConflict {
        name: String,
        first: usize,
        first_pos: Pos,
        second: usize,
        pos: Pos,
    },
    #[error("{pos}: disjunctive heads are not supported")]
    DisjunctiveHead { pos: Pos },
}
