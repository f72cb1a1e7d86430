use std::fmt;

use crate::rule_lang::{self, Atom, Literal, Term};

/// Variable-free term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroundTerm {
    Sym(String),
    Int(i64),
    Func(String, Vec<GroundTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<GroundTerm>,
}

/// A ground atom, possibly classically negated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundLiteral {
    pub negated: bool,
    pub atom: GroundAtom,
}

impl GroundTerm {
    pub fn sym(s: impl Into<String>) -> Self {
        GroundTerm::Sym(s.into())
    }

    pub fn func(name: impl Into<String>, args: Vec<GroundTerm>) -> Self {
        GroundTerm::Func(name.into(), args)
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            GroundTerm::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            GroundTerm::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn from_term(t: &Term) -> Option<Self> {
        Some(match t {
            Term::Const(s) => GroundTerm::Sym(s.clone()),
            Term::Int(i) => GroundTerm::Int(*i),
            Term::Func(a) => GroundTerm::Func(
                a.predicate.clone(),
                a.args
                    .iter()
                    .map(GroundTerm::from_term)
                    .collect::<Option<_>>()?,
            ),
            Term::Var(_) | Term::Arith { .. } => return None,
        })
    }

    pub fn to_term(&self) -> Term {
        match self {
            GroundTerm::Sym(s) => Term::Const(s.clone()),
            GroundTerm::Int(i) => Term::Int(*i),
            GroundTerm::Func(f, args) => {
                Term::Func(Atom::new(f.clone(), args.iter().map(Self::to_term).collect()))
            }
        }
    }
}

impl GroundAtom {
    pub fn new(predicate: impl Into<String>, args: Vec<GroundTerm>) -> Self {
        GroundAtom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn from_atom(a: &Atom) -> Option<Self> {
        Some(GroundAtom {
            predicate: a.predicate.clone(),
            args: a
                .args
                .iter()
                .map(GroundTerm::from_term)
                .collect::<Option<_>>()?,
        })
    }

    pub fn to_atom(&self) -> Atom {
        Atom::new(
            self.predicate.clone(),
            self.args.iter().map(GroundTerm::to_term).collect(),
        )
    }
}

impl GroundLiteral {
    pub fn pos(atom: GroundAtom) -> Self {
        GroundLiteral {
            negated: false,
            atom,
        }
    }

    pub fn neg(atom: GroundAtom) -> Self {
        GroundLiteral {
            negated: true,
            atom,
        }
    }

    /// The classically complementary literal.
    pub fn complement(&self) -> Self {
        GroundLiteral {
            negated: !self.negated,
            atom: self.atom.clone(),
        }
    }

    /// Parses a single ground literal such as `-holds(in(printer1, lab), 2)`.
    pub fn parse(text: &str) -> Option<Self> {
        let src = format!("{}.", text.trim().trim_end_matches('.'));
        let program = rule_lang::parse_program(&src).ok()?;
        if let Some((sort, values)) = program.sorts.first() {
            let v = values.first()?;
            let arg = match v {
                rule_lang::SortValue::Const(c) => GroundTerm::Sym(c.clone()),
                rule_lang::SortValue::Int(i) => GroundTerm::Int(*i),
                rule_lang::SortValue::Range(..) => return None,
            };
            return Some(GroundLiteral::pos(GroundAtom::new(sort.clone(), vec![arg])));
        }
        let rule = program.rules.first()?;
        if !rule.is_fact() {
            return None;
        }
        let head = rule.head.as_ref()?;
        Some(GroundLiteral {
            negated: head.classically_negated,
            atom: GroundAtom::from_atom(&head.atom)?,
        })
    }

    pub fn to_literal(&self) -> Literal {
        Literal {
            atom: self.atom.to_atom(),
            classically_negated: self.negated,
            default_negated: false,
        }
    }
}

impl fmt::Display for GroundTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_atom())
    }
}

impl fmt::Display for GroundLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("-")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// Shorthand for `holds(in(object, room), step)`.
pub fn located(object: &str, room: &str, step: i64) -> GroundLiteral {
    GroundLiteral::pos(GroundAtom::new(
        "holds",
        vec![
            GroundTerm::func(
                "in",
                vec![GroundTerm::sym(object), GroundTerm::sym(room)],
            ),
            GroundTerm::Int(step),
        ],
    ))
}
