//! Grounding, stratified solving and the evolving knowledge base.

mod ground;
mod hierarchy;
mod knowledge;
mod solve;
mod terms;

pub use ground::{ground, GroundProgram, GroundRule};
pub use hierarchy::{HierarchyEdit, ObjectHierarchy};
pub use knowledge::{
    AssertOutcome, Confidence, FactMeta, KnowledgeBase, Provenance, RepairRecord,
};
pub use solve::{solve, AnswerSet};
pub use terms::{located, GroundAtom, GroundLiteral, GroundTerm};

use thiserror::Error;

use crate::rule_lang::{ParseError, Program};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KbError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("constant `{constant}` in rule {rule} is not declared in any sort")]
    UnsortedConstant { constant: String, rule: usize },
    #[error("cannot infer a sort for variable {var} in rule {rule}")]
    UnsortedVariable { var: String, rule: usize },
    #[error("temporal rules present but no step range is declared")]
    MissingStepRange,
    #[error("negative cycle through {}: {}", predicates.join(", "), atoms.join(", "))]
    NonStratified {
        predicates: Vec<String>,
        atoms: Vec<String>,
    },
    #[error("inconsistent answer set: {positive} and {negative}")]
    Inconsistent {
        positive: GroundLiteral,
        negative: GroundLiteral,
    },
    #[error("constraint violated: :- {body}")]
    ConstraintViolated { body: String },
    #[error("ill-sorted fact {fact}: {reason}")]
    IllSorted { fact: String, reason: String },
    #[error("cannot repair {positive} vs {negative}: supporting facts have equal precedence")]
    RepairTie {
        positive: GroundLiteral,
        negative: GroundLiteral,
    },
    #[error("cannot repair {positive} vs {negative}: no distinguishing facts")]
    Unrepairable {
        positive: GroundLiteral,
        negative: GroundLiteral,
    },
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("classes {keep} and {absorbed} have different parents")]
    MergeParents { keep: String, absorbed: String },
    #[error("invalid hierarchy: {0}")]
    Hierarchy(String),
}

/// Grounds and solves `p` in one step.
pub fn solve_program(p: &Program) -> Result<AnswerSet, KbError> {
    solve(&ground(p)?)
}
