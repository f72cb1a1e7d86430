use std::collections::{HashMap, HashSet};

use super::ast::{Atom, Guard, Literal, Pos, Program, Rule, SortValue, Term};
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

/// Parses rule-language source into a [`Program`].
///
/// Unary ground facts over predicates that never head a proper rule are
/// collected as sort declarations (`room(lab).`, `step(1..5).`).
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, at: 0 };
    let mut statements = Vec::new();
    while parser.peek() != &Tok::Eof {
        statements.push(parser.statement()?);
    }
    assemble(statements)
}

enum Statement {
    Rule(Rule, Pos),
    Range { sort: String, lo: i64, hi: i64, pos: Pos },
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let idx = (self.at + n).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at < self.tokens.len() - 1 {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == &want {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            pos: self.pos(),
            expected: expected.to_string(),
            found: self.peek().describe(),
        }
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        let start = self.pos();

        if self.peek() == &Tok::If {
            self.bump();
            let (body, guards) = self.body()?;
            self.expect(Tok::Dot, "`.`")?;
            return Ok(Statement::Rule(
                Rule {
                    head: None,
                    body,
                    guards,
                },
                start,
            ));
        }

        // sortdecl with a range: ident "(" int ".." int ")" "."
        if let (Tok::Ident(name), Tok::LParen, Tok::Int(lo), Tok::DotDot) = (
            self.peek().clone(),
            self.peek_at(1).clone(),
            self.peek_at(2).clone(),
            self.peek_at(3).clone(),
        ) {
            self.at += 4;
            let hi = match self.bump().tok {
                Tok::Int(hi) => hi,
                _ => {
                    self.at -= 1;
                    return Err(self.unexpected("integer upper bound"));
                }
            };
            self.expect(Tok::RParen, "`)`")?;
            self.expect(Tok::Dot, "`.`")?;
            if hi < lo {
                return Err(ParseError::Syntax {
                    pos: start,
                    expected: "non-empty range".into(),
                    found: format!("{lo}..{hi}"),
                });
            }
            return Ok(Statement::Range {
                sort: name,
                lo,
                hi,
                pos: start,
            });
        }

        let head = self.literal()?;
        match self.peek() {
            Tok::Pipe | Tok::Semicolon => {
                return Err(ParseError::DisjunctiveHead { pos: self.pos() })
            }
            Tok::Ident(s) if s == "or" => {
                return Err(ParseError::DisjunctiveHead { pos: self.pos() })
            }
            _ => {}
        }
        let (body, guards) = if self.peek() == &Tok::If {
            self.bump();
            self.body()?
        } else {
            (Vec::new(), Vec::new())
        };
        self.expect(Tok::Dot, "`.` or `:-`")?;
        Ok(Statement::Rule(
            Rule {
                head: Some(head),
                body,
                guards,
            },
            start,
        ))
    }

    fn body(&mut self) -> Result<(Vec<Literal>, Vec<Guard>), ParseError> {
        let mut lits = Vec::new();
        let mut guards = Vec::new();
        loop {
            self.body_elem(&mut lits, &mut guards)?;
            if self.peek() == &Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        Ok((lits, guards))
    }

    fn body_elem(
        &mut self,
        lits: &mut Vec<Literal>,
        guards: &mut Vec<Guard>,
    ) -> Result<(), ParseError> {
        if let Tok::Ident(s) = self.peek() {
            // `not` followed by a literal; a bare constant named `not` is not a literal start
            if s == "not" && matches!(self.peek_at(1), Tok::Ident(_) | Tok::Minus) {
                self.bump();
                let mut lit = self.literal()?;
                lit.default_negated = true;
                lits.push(lit);
                return Ok(());
            }
        }

        // A guard starts with a term followed by `!=`. Literals and terms share
        // syntax, so parse a term and decide.
        if self.peek() == &Tok::Minus {
            lits.push(self.literal()?);
            return Ok(());
        }
        let pos = self.pos();
        let term = self.term(0)?;
        if self.peek() == &Tok::Neq {
            self.bump();
            let right = self.term(0)?;
            guards.push(Guard { left: term, right });
            return Ok(());
        }
        match term {
            Term::Func(atom) => lits.push(Literal::positive(atom)),
            Term::Const(name) => lits.push(Literal::positive(Atom::new(name, Vec::new()))),
            _ => {
                return Err(ParseError::Syntax {
                    pos,
                    expected: "literal or `!=` guard".into(),
                    found: self.peek().describe(),
                })
            }
        }
        Ok(())
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let negated = if self.peek() == &Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let atom = self.atom(0)?;
        Ok(Literal {
            atom,
            classically_negated: negated,
            default_negated: false,
        })
    }

    fn atom(&mut self, depth: usize) -> Result<Atom, ParseError> {
        let name = match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                s
            }
            _ => return Err(self.unexpected("predicate name")),
        };
        let mut args = Vec::new();
        if self.peek() == &Tok::LParen {
            self.bump();
            loop {
                args.push(self.term(depth + 1)?);
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::RParen => {
                        self.bump();
                        break;
                    }
                    _ => return Err(self.unexpected("`,` or `)`")),
                }
            }
        }
        Ok(Atom::new(name, args))
    }

    /// `depth` counts enclosing atoms; function terms may nest one level.
    fn term(&mut self, depth: usize) -> Result<Term, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Term::Int(i))
            }
            Tok::Var(v) => {
                self.bump();
                let sign = match self.peek() {
                    Tok::Plus => 1,
                    Tok::Minus => -1,
                    _ => return Ok(Term::Var(v)),
                };
                self.bump();
                match self.bump().tok {
                    Tok::Int(k) => Ok(Term::Arith {
                        var: v,
                        offset: sign * k,
                    }),
                    _ => {
                        self.at -= 1;
                        Err(self.unexpected("integer offset"))
                    }
                }
            }
            Tok::Ident(_) => {
                if self.peek_at(1) == &Tok::LParen {
                    if depth >= 2 {
                        return Err(ParseError::Syntax {
                            pos,
                            expected: "term (function terms nest one level)".into(),
                            found: "nested function term".into(),
                        });
                    }
                    let a = self.atom(depth)?;
                    Ok(Term::Func(a))
                } else {
                    let Tok::Ident(s) = self.bump().tok else {
                        unreachable!()
                    };
                    Ok(Term::Const(s))
                }
            }
            _ => Err(self.unexpected("term")),
        }
    }
}

fn assemble(statements: Vec<Statement>) -> Result<Program, ParseError> {
    let mut arities: HashMap<String, (usize, Pos)> = HashMap::new();
    for st in &statements {
        match st {
            Statement::Rule(rule, pos) => {
                for lit in rule.head.iter().chain(&rule.body) {
                    record_arity(&lit.atom, *pos, &mut arities)?;
                }
                for g in &rule.guards {
                    for t in [&g.left, &g.right] {
                        if let Term::Func(a) = t {
                            record_arity(a, *pos, &mut arities)?;
                        }
                    }
                }
                check_safety(rule, *pos)?;
            }
            Statement::Range { sort, pos, .. } => {
                let probe = Atom::new(sort.clone(), vec![Term::Int(0)]);
                record_arity(&probe, *pos, &mut arities)?;
            }
        }
    }

    // Predicates defined by proper rules cannot be sorts.
    let mut derived: HashSet<&str> = HashSet::new();
    for st in &statements {
        if let Statement::Rule(rule, _) = st {
            if let Some(h) = &rule.head {
                if !is_sort_fact(rule) {
                    derived.insert(h.atom.predicate.as_str());
                }
            }
        }
    }

    let mut program = Program::default();
    for st in &statements {
        match st {
            Statement::Range { sort, lo, hi, .. } => {
                program.declare(sort.clone(), SortValue::Range(*lo, *hi));
            }
            Statement::Rule(rule, pos) => {
                let head = rule.head.as_ref();
                let as_sort = is_sort_fact(rule)
                    && head.is_some_and(|h| !derived.contains(h.atom.predicate.as_str()));
                if as_sort {
                    let h = &head.unwrap().atom;
                    let value = match &h.args[0] {
                        Term::Const(c) => SortValue::Const(c.clone()),
                        Term::Int(i) => SortValue::Int(*i),
                        _ => unreachable!("checked by is_sort_fact"),
                    };
                    program.declare(h.predicate.clone(), value);
                } else {
                    program.rules.push(rule.clone());
                    program.positions.push(*pos);
                }
            }
        }
    }
    Ok(program)
}

fn is_sort_fact(rule: &Rule) -> bool {
    match &rule.head {
        Some(h) if rule.is_fact() && !h.classically_negated && h.atom.args.len() == 1 => {
            matches!(h.atom.args[0], Term::Const(_) | Term::Int(_))
        }
        _ => false,
    }
}

fn record_arity(
    atom: &Atom,
    pos: Pos,
    seen: &mut HashMap<String, (usize, Pos)>,
) -> Result<(), ParseError> {
    let arity = atom.args.len();
    match seen.get(&atom.predicate) {
        Some(&(prev, prev_pos)) if prev != arity => {
            return Err(ParseError::ArityConflict {
                name: atom.predicate.clone(),
                first: prev,
                first_pos: prev_pos,
                second: arity,
                pos,
            })
        }
        Some(_) => {}
        None => {
            seen.insert(atom.predicate.clone(), (arity, pos));
        }
    }
    for t in &atom.args {
        if let Term::Func(inner) = t {
            record_arity(inner, pos, seen)?;
        }
    }
    Ok(())
}

/// Every head variable must occur somewhere in the body: bound by a positive
/// literal, or typed through a negative literal or guard and grounded over its sort.
fn check_safety(rule: &Rule, pos: Pos) -> Result<(), ParseError> {
    let Some(head) = &rule.head else {
        return Ok(());
    };
    let mut head_vars = Vec::new();
    head.atom.collect_vars(&mut head_vars);
    if head_vars.is_empty() {
        return Ok(());
    }
    let mut body_vars = Vec::new();
    for lit in &rule.body {
        lit.atom.collect_vars(&mut body_vars);
    }
    for g in &rule.guards {
        g.left.collect_vars(&mut body_vars);
        g.right.collect_vars(&mut body_vars);
    }
    let body_vars: HashSet<&str> = body_vars.into_iter().collect();
    for v in head_vars {
        if !body_vars.contains(v) {
            return Err(ParseError::Unsafe {
                pos,
                var: v.to_string(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule_lang::serialize_program;

    #[test]
    fn printer_fact() {
        let p = parse_program("is(printer1, printer).").unwrap();
        assert_eq!(p.rules.len(), 1);
        let head = p.rules[0].head.as_ref().unwrap();
        assert_eq!(
            head.atom,
            Atom::new(
                "is",
                vec![Term::constant("printer1"), Term::constant("printer")]
            )
        );
        assert!(p.rules[0].is_fact());
    }

    #[test]
    fn empty_input() {
        let p = parse_program("").unwrap();
        assert!(p.rules.is_empty());
        assert!(p.sorts.is_empty());
        assert_eq!(serialize_program(&p), "");
    }

    #[test]
    fn inertia_rule_shape() {
        let p = parse_program(
            "holds(in(O,R1),I+1) :- holds(in(O,R1),I), not holds(in(O,R2),I+1), R1 != R2.",
        )
        .unwrap();
        let r = &p.rules[0];
        assert_eq!(r.body.len(), 2);
        assert_eq!(r.body.iter().filter(|l| l.default_negated).count(), 1);
        assert_eq!(r.guards.len(), 1);
        let head = &r.head.as_ref().unwrap().atom;
        assert_eq!(
            head.args[1],
            Term::Arith {
                var: "I".into(),
                offset: 1
            }
        );
    }

    #[test]
    fn serialize_fact() {
        let p = parse_program("is(printer1,printer).").unwrap();
        assert_eq!(serialize_program(&p), "is(printer1, printer).");
    }

    #[test]
    fn sort_declarations() {
        let p = parse_program("room(lab). room(office). step(1..3). is(p1, printer).").unwrap();
        assert_eq!(
            p.sorts["room"],
            vec![
                SortValue::Const("lab".into()),
                SortValue::Const("office".into())
            ]
        );
        assert_eq!(p.sorts["step"], vec![SortValue::Range(1, 3)]);
        assert_eq!(p.rules.len(), 1);
    }

    #[test]
    fn derived_unary_predicate_is_not_a_sort() {
        let p = parse_program("robot(nao). robot(X) :- wheeled(X). wheeled(pb).").unwrap();
        assert!(!p.sorts.contains_key("robot"));
        assert!(p.sorts.contains_key("wheeled"));
        assert_eq!(p.rules.len(), 2);
    }

    #[test]
    fn classical_negation_and_constraint() {
        let p = parse_program("-clmbstair(X) :- robot(X), not ab(d(X)).\n:- a, not b.").unwrap();
        assert!(p.rules[0].head.as_ref().unwrap().classically_negated);
        assert!(p.rules[1].head.is_none());
        assert_eq!(
            serialize_program(&p),
            "-clmbstair(X) :- robot(X), not ab(d(X)).\n:- a, not b."
        );
    }

    #[test]
    fn unsafe_head_variable() {
        let err = parse_program("p(X) :- q(Y).").unwrap_err();
        assert!(matches!(err, ParseError::Unsafe { ref var, .. } if var == "X"));
        // bound through a guard only: typed by its sort at grounding time
        assert!(parse_program("-h(in(O,R2)) :- h(in(O,R1)), R1 != R2.").is_ok());
        assert!(matches!(
            parse_program("p(X)."),
            Err(ParseError::Unsafe { .. })
        ));
    }

    #[test]
    fn arity_conflict() {
        let err = parse_program("p(a). p(a, b).").unwrap_err();
        assert!(matches!(err, ParseError::ArityConflict { first: 1, second: 2, .. }));
    }

    #[test]
    fn disjunction_rejected() {
        for src in ["p(a) | q(a).", "p(a) or -p(a).", "p ; q."] {
            assert!(
                matches!(parse_program(src), Err(ParseError::DisjunctiveHead { .. })),
                "{src}"
            );
        }
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_program("p(a).\nq(b :- r.").unwrap_err();
        match err {
            ParseError::Syntax { pos, .. } => assert_eq!(pos.line, 2),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn nesting_limited_to_one_level() {
        assert!(parse_program("holds(in(o, r), 1).").is_ok());
        assert!(matches!(
            parse_program("p(f(g(a)))."),
            Err(ParseError::Syntax { .. })
        ));
    }

    #[test]
    fn propositional_atoms() {
        let p = parse_program("a. b :- a, not c.").unwrap();
        assert_eq!(p.rules.len(), 2);
        assert_eq!(p.rules[1].body[0].atom, Atom::new("a", vec![]));
    }
}
