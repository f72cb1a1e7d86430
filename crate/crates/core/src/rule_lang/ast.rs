use std::fmt;

use indexmap::IndexMap;

/// A term inside an atom argument list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Lowercase symbol, e.g. `printer1`.
    Const(String),
    /// Uppercase symbol, e.g. `R1`.
    Var(String),
    Int(i64),
    /// `I+1` / `I-1`.
    Arith { var: String, offset: i64 },
    /// A nested fluent term such as `in(O, R)`.
    Func(Atom),
}

impl Term {
    pub fn constant(s: impl Into<String>) -> Self {
        Term::Const(s.into())
    }

    pub fn var(s: impl Into<String>) -> Self {
        Term::Var(s.into())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Const(_) | Term::Int(_) => true,
            Term::Var(_) | Term::Arith { .. } => false,
            Term::Func(a) => a.is_ground(),
        }
    }

    /// Pushes every variable name (including arithmetic bases) in order of appearance.
    pub fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var(v) | Term::Arith { var: v, .. } => out.push(v),
            Term::Func(a) => a.collect_vars(out),
            Term::Const(_) | Term::Int(_) => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        for t in &self.args {
            t.collect_vars(out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub atom: Atom,
    /// Classical negation, written `-p(..)`.
    pub classically_negated: bool,
    /// Default negation, written `not p(..)`; body positions only.
    pub default_negated: bool,
}

impl Literal {
    pub fn positive(atom: Atom) -> Self {
        Literal {
            atom,
            classically_negated: false,
            default_negated: false,
        }
    }

    pub fn classical_neg(atom: Atom) -> Self {
        Literal {
            atom,
            classically_negated: true,
            default_negated: false,
        }
    }
}

/// Inequality guard `left != right`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Guard {
    pub left: Term,
    pub right: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    /// `None` for integrity constraints.
    pub head: Option<Literal>,
    pub body: Vec<Literal>,
    pub guards: Vec<Guard>,
}

impl Rule {
    pub fn fact(head: Literal) -> Self {
        Rule {
            head: Some(head),
            body: Vec::new(),
            guards: Vec::new(),
        }
    }

    pub fn is_fact(&self) -> bool {
        self.head.is_some() && self.body.is_empty() && self.guards.is_empty()
    }
}

/// One declared member of a sort: a symbol, an integer, or an integer range.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SortValue {
    Const(String),
    Int(i64),
    Range(i64, i64),
}

impl SortValue {
    /// Expands ranges into their integer members.
    pub fn expand(&self) -> Vec<Term> {
        match self {
            SortValue::Const(c) => vec![Term::Const(c.clone())],
            SortValue::Int(i) => vec![Term::Int(*i)],
            SortValue::Range(lo, hi) => (*lo..=*hi).map(Term::Int).collect(),
        }
    }
}

/// Source position of a statement, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Program {
    pub sorts: IndexMap<String, Vec<SortValue>>,
    pub rules: Vec<Rule>,
    /// Start position of each rule, parallel to `rules`. Not part of equality.
    pub positions: Vec<Pos>,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.sorts == other.sorts && self.rules == other.rules
    }
}

impl Eq for Program {}

impl Program {
    pub fn push_rule(&mut self, rule: Rule) {
        self.rules.push(rule);
        self.positions.push(Pos::default());
    }

    pub fn declare(&mut self, sort: impl Into<String>, value: SortValue) {
        let members = self.sorts.entry(sort.into()).or_default();
        if !members.contains(&value) {
            members.push(value);
        }
    }

    /// Appends all sorts and rules of `other`.
    pub fn extend(&mut self, other: Program) {
        for (sort, values) in other.sorts {
            for v in values {
                self.declare(sort.clone(), v);
            }
        }
        self.rules.extend(other.rules);
        self.positions.extend(other.positions);
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(s) | Term::Var(s) => f.write_str(s),
            Term::Int(i) => write!(f, "{i}"),
            Term::Arith { var, offset } if *offset < 0 => write!(f, "{var}-{}", -offset),
            Term::Arith { var, offset } => write!(f, "{var}+{offset}"),
            Term::Func(a) => write!(f, "{a}"),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if self.args.is_empty() {
            return Ok(());
        }
        f.write_str("(")?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.default_negated {
            f.write_str("not ")?;
        }
        if self.classically_negated {
            f.write_str("-")?;
        }
        write!(f, "{}", self.atom)
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} != {}", self.left, self.right)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(h) = &self.head {
            write!(f, "{h}")?;
        }
        if !self.body.is_empty() || !self.guards.is_empty() {
            f.write_str(if self.head.is_some() { " :- " } else { ":- " })?;
            let parts = self
                .body
                .iter()
                .map(ToString::to_string)
                .chain(self.guards.iter().map(ToString::to_string));
            for (i, p) in parts.enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                f.write_str(&p)?;
            }
        }
        f.write_str(".")
    }
}

impl fmt::Display for SortValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SortValue::Const(c) => f.write_str(c),
            SortValue::Int(i) => write!(f, "{i}"),
            SortValue::Range(lo, hi) => write!(f, "{lo}..{hi}"),
        }
    }
}

/// Canonical text for a program: sort declarations first, then rules in order,
/// one statement per line.
pub fn serialize_program(p: &Program) -> String {
    let mut lines = Vec::new();
    for (sort, values) in &p.sorts {
        for v in values {
            lines.push(format!("{sort}({v})."));
        }
    }
    lines.extend(p.rules.iter().map(ToString::to_string));
    lines.join("\n")
}
