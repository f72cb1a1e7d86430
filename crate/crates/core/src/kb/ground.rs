//! Bottom-up grounding over sorts.
//!
//! Rules are instantiated semi-naively against the set of atoms that may
//! become true (facts, sort members and heads of earlier instances). Variables
//! not bound by a positive body literal range over the sort inferred for their
//! argument positions. Negative literals over atoms that can never be derived
//! are dropped from the ground rules.

use std::collections::{HashMap, HashSet};

use super::terms::{GroundAtom, GroundLiteral, GroundTerm};
use super::KbError;
use crate::rule_lang::{Atom, Literal, Program, Term};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum GT {
    Sym(u32),
    Int(i64),
    Func(u32, Box<[GT]>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct GA {
    pub pred: u32,
    pub neg: bool,
    pub args: Box<[GT]>,
}

/// A rule with all variables substituted; atoms are indices into the
/// program's atom table.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundRule {
    pub head: Option<u32>,
    pub pos: Vec<u32>,
    pub neg: Vec<u32>,
}

/// Variable-free program plus the atom-level dependency graph.
#[derive(Debug, Clone)]
pub struct GroundProgram {
    pub(crate) symbols: Vec<String>,
    pub(crate) atoms: Vec<GA>,
    pub rules: Vec<GroundRule>,
    /// For each atom, the body atoms of rules deriving it; `true` marks a
    /// default-negated dependency.
    pub deps: Vec<Vec<(u32, bool)>>,
}

impl GroundProgram {
    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn literal(&self, id: u32) -> GroundLiteral {
        let a = &self.atoms[id as usize];
        GroundLiteral {
            negated: a.neg,
            atom: GroundAtom {
                predicate: self.symbols[a.pred as usize].clone(),
                args: a.args.iter().map(|t| self.term(t)).collect(),
            },
        }
    }

    fn term(&self, t: &GT) -> GroundTerm {
        match t {
            GT::Sym(s) => GroundTerm::Sym(self.symbols[*s as usize].clone()),
            GT::Int(i) => GroundTerm::Int(*i),
            GT::Func(f, args) => GroundTerm::Func(
                self.symbols[*f as usize].clone(),
                args.iter().map(|a| self.term(a)).collect(),
            ),
        }
    }

    /// Looks up the id of a ground literal, if it occurs in the program.
    pub fn find(&self, lit: &GroundLiteral) -> Option<u32> {
        let sym = |s: &str| self.symbols.iter().position(|x| x == s).map(|i| i as u32);
        fn conv(t: &GroundTerm, sym: &dyn Fn(&str) -> Option<u32>) -> Option<GT> {
            Some(match t {
                GroundTerm::Sym(s) => GT::Sym(sym(s)?),
                GroundTerm::Int(i) => GT::Int(*i),
                GroundTerm::Func(f, args) => GT::Func(
                    sym(f)?,
                    args.iter().map(|a| conv(a, sym)).collect::<Option<_>>()?,
                ),
            })
        }
        let target = GA {
            pred: sym(&lit.atom.predicate)?,
            neg: lit.negated,
            args: lit
                .atom
                .args
                .iter()
                .map(|a| conv(a, &sym))
                .collect::<Option<_>>()?,
        };
        self.atoms.iter().position(|a| *a == target).map(|i| i as u32)
    }

    /// Renders the ground rules in rule-language syntax, one per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            if let Some(h) = r.head {
                out.push_str(&self.literal(h).to_string());
            }
            let body: Vec<String> = r
                .pos
                .iter()
                .map(|&a| self.literal(a).to_string())
                .chain(r.neg.iter().map(|&a| format!("not {}", self.literal(a))))
                .collect();
            if !body.is_empty() {
                out.push_str(if r.head.is_some() { " :- " } else { ":- " });
                out.push_str(&body.join(", "));
            }
            out.push_str(".\n");
        }
        out
    }
}

#[derive(Default)]
struct Interner {
    ids: HashMap<String, u32>,
    names: Vec<String>,
}

impl Interner {
    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(s.to_string());
        self.ids.insert(s.to_string(), id);
        id
    }
}

#[derive(Debug, Clone)]
enum PT {
    Sym(u32),
    Int(i64),
    Var(usize),
    Arith(usize, i64),
    Func(u32, Vec<PT>),
}

#[derive(Debug, Clone)]
struct PA {
    pred: u32,
    neg: bool,
    args: Vec<PT>,
}

#[derive(Debug)]
struct CRule {
    head: Option<PA>,
    pos: Vec<PA>,
    neg: Vec<PA>,
    guards: Vec<(PT, PT)>,
    nvars: usize,
    /// Variables not bound by positive literals, with their sort domains.
    free: Vec<(usize, Vec<GT>)>,
}

struct Store {
    atoms: Vec<GA>,
    ids: HashMap<GA, u32>,
    /// Round in which the atom became derivable, `None` if never.
    stamp: Vec<Option<u32>>,
    by_pred: HashMap<(u32, bool), Vec<u32>>,
}

impl Store {
    fn intern(&mut self, a: GA) -> u32 {
        if let Some(&id) = self.ids.get(&a) {
            return id;
        }
        let id = self.atoms.len() as u32;
        self.atoms.push(a.clone());
        self.stamp.push(None);
        self.ids.insert(a, id);
        id
    }

    /// Marks an atom derivable; returns true if it was not before.
    fn make_possible(&mut self, id: u32, round: u32) -> bool {
        if self.stamp[id as usize].is_some() {
            return false;
        }
        self.stamp[id as usize] = Some(round);
        let a = &self.atoms[id as usize];
        self.by_pred.entry((a.pred, a.neg)).or_default().push(id);
        true
    }
}

type Subst = Vec<Option<GT>>;

/// Instantiates `p` over its sorts.
pub fn ground(p: &Program) -> Result<GroundProgram, KbError> {
    let mut interner = Interner::default();

    // declared constants
    let mut declared: HashSet<GT> = HashSet::new();
    let mut sort_members: Vec<(u32, Vec<GT>)> = Vec::new();
    for (sort, values) in &p.sorts {
        let sid = interner.intern(sort);
        let mut members = Vec::new();
        for v in values {
            for t in v.expand() {
                let g = match t {
                    Term::Const(c) => GT::Sym(interner.intern(&c)),
                    Term::Int(i) => GT::Int(i),
                    _ => unreachable!(),
                };
                declared.insert(g.clone());
                if !members.contains(&g) {
                    members.push(g);
                }
            }
        }
        sort_members.push((sid, members));
    }

    let temporal = p.rules.iter().any(rule_has_arith);
    if temporal && !p.sorts.contains_key("step") {
        return Err(KbError::MissingStepRange);
    }

    for (idx, rule) in p.rules.iter().enumerate() {
        check_constants(rule_literals(rule), rule, idx, &declared, &mut interner)?;
    }

    let domains = infer_sorts(p, &sort_members, &mut interner);

    let mut crules = Vec::with_capacity(p.rules.len());
    for (idx, rule) in p.rules.iter().enumerate() {
        crules.push(compile(idx, rule, &mut interner, &domains)?);
    }

    let int_constants: HashSet<i64> = declared
        .iter()
        .filter_map(|g| match g {
            GT::Int(i) => Some(*i),
            _ => None,
        })
        .collect();

    let mut store = Store {
        atoms: Vec::new(),
        ids: HashMap::new(),
        stamp: Vec::new(),
        by_pred: HashMap::new(),
    };
    let mut seen_rules: HashSet<GroundRule> = HashSet::new();
    let mut rules: Vec<GroundRule> = Vec::new();

    // round 0: sort members and facts
    for (sid, members) in &sort_members {
        for m in members {
            let id = store.intern(GA {
                pred: *sid,
                neg: false,
                args: vec![m.clone()].into_boxed_slice(),
            });
            push_rule(
                GroundRule {
                    head: Some(id),
                    pos: vec![],
                    neg: vec![],
                },
                &mut seen_rules,
                &mut rules,
            );
            store.make_possible(id, 0);
        }
    }

    let ctx = Ctx {
        ints: &int_constants,
    };
    let mut round = 0u32;
    loop {
        round += 1;
        let mut added = false;
        for rule in &crules {
            let mut out: Vec<(Option<GA>, Vec<u32>, Vec<GA>)> = Vec::new();
            if rule.pos.is_empty() {
                if round == 1 {
                    let mut subst: Subst = vec![None; rule.nvars];
                    ctx.finish(rule, &mut subst, Vec::new(), &mut out);
                }
            } else {
                for delta in 0..rule.pos.len() {
                    let mut subst: Subst = vec![None; rule.nvars];
                    let mut chosen = Vec::with_capacity(rule.pos.len());
                    ctx.join(rule, &store, 0, delta, round, &mut subst, &mut chosen, &mut out);
                }
            }
            for (head, pos, neg) in out {
                let head_id = head.map(|h| store.intern(h));
                let neg_ids = neg.into_iter().map(|n| store.intern(n)).collect();
                let gr = GroundRule {
                    head: head_id,
                    pos,
                    neg: neg_ids,
                };
                if push_rule(gr, &mut seen_rules, &mut rules) {
                    if let Some(h) = head_id {
                        added |= store.make_possible(h, round);
                    }
                }
            }
        }
        if !added && round > 1 {
            break;
        }
        if !added && round == 1 && crules.iter().all(|r| r.pos.is_empty()) {
            break;
        }
    }

    // default negation of an underivable atom always holds
    for r in &mut rules {
        r.neg.retain(|&n| store.stamp[n as usize].is_some());
    }

    let mut deps = vec![Vec::new(); store.atoms.len()];
    for r in &rules {
        if let Some(h) = r.head {
            let d = &mut deps[h as usize];
            for &b in &r.pos {
                if !d.contains(&(b, false)) {
                    d.push((b, false));
                }
            }
            for &b in &r.neg {
                if !d.contains(&(b, true)) {
                    d.push((b, true));
                }
            }
        }
    }

    Ok(GroundProgram {
        symbols: interner.names,
        atoms: store.atoms,
        rules,
        deps,
    })
}

fn push_rule(r: GroundRule, seen: &mut HashSet<GroundRule>, rules: &mut Vec<GroundRule>) -> bool {
    if seen.contains(&r) {
        return false;
    }
    seen.insert(r.clone());
    rules.push(r);
    true
}

struct Ctx<'a> {
    ints: &'a HashSet<i64>,
}

impl Ctx<'_> {
    #[allow(clippy::too_many_arguments)]
    fn join(
        &self,
        rule: &CRule,
        store: &Store,
        i: usize,
        delta: usize,
        round: u32,
        subst: &mut Subst,
        chosen: &mut Vec<u32>,
        out: &mut Vec<(Option<GA>, Vec<u32>, Vec<GA>)>,
    ) {
        if i == rule.pos.len() {
            self.finish(rule, subst, chosen.clone(), out);
            return;
        }
        let lit = &rule.pos[i];
        let Some(cands) = store.by_pred.get(&(lit.pred, lit.neg)) else {
            return;
        };
        for &id in cands {
            let Some(stamp) = store.stamp[id as usize] else {
                continue;
            };
            let ok = match i.cmp(&delta) {
                std::cmp::Ordering::Less => stamp + 1 < round,
                std::cmp::Ordering::Equal => stamp + 1 == round,
                std::cmp::Ordering::Greater => stamp < round,
            };
            if !ok {
                continue;
            }
            let atom = &store.atoms[id as usize];
            if atom.args.len() != lit.args.len() {
                continue;
            }
            let mut trail = Vec::new();
            let matched = lit
                .args
                .iter()
                .zip(atom.args.iter())
                .all(|(p, g)| match_term(p, g, subst, &mut trail));
            if matched {
                chosen.push(id);
                self.join(rule, store, i + 1, delta, round, subst, chosen, out);
                chosen.pop();
            }
            for v in trail {
                subst[v] = None;
            }
        }
    }

    /// Enumerates free variables over their sorts, checks guards and emits instances.
    fn finish(
        &self,
        rule: &CRule,
        subst: &mut Subst,
        pos: Vec<u32>,
        out: &mut Vec<(Option<GA>, Vec<u32>, Vec<GA>)>,
    ) {
        let free: Vec<&(usize, Vec<GT>)> =
            rule.free.iter().filter(|(v, _)| subst[*v].is_none()).collect();
        self.enumerate(rule, &free, 0, subst, &pos, out);
    }

    fn enumerate(
        &self,
        rule: &CRule,
        free: &[&(usize, Vec<GT>)],
        k: usize,
        subst: &mut Subst,
        pos: &[u32],
        out: &mut Vec<(Option<GA>, Vec<u32>, Vec<GA>)>,
    ) {
        if k < free.len() {
            let (v, dom) = free[k];
            for g in dom {
                subst[*v] = Some(g.clone());
                self.enumerate(rule, free, k + 1, subst, pos, out);
            }
            subst[*v] = None;
            return;
        }
        for (l, r) in &rule.guards {
            match (self.inst_term(l, subst), self.inst_term(r, subst)) {
                (Some(a), Some(b)) if a != b => {}
                _ => return,
            }
        }
        let head = match &rule.head {
            Some(h) => match self.inst_atom(h, subst) {
                Some(a) => Some(a),
                None => return,
            },
            None => None,
        };
        let mut neg = Vec::with_capacity(rule.neg.len());
        for n in &rule.neg {
            match self.inst_atom(n, subst) {
                Some(a) => neg.push(a),
                // `not p(..)` over an out-of-sort step is vacuously true
                None => continue,
            }
        }
        out.push((head, pos.to_vec(), neg));
    }

    fn inst_atom(&self, a: &PA, subst: &Subst) -> Option<GA> {
        Some(GA {
            pred: a.pred,
            neg: a.neg,
            args: a
                .args
                .iter()
                .map(|t| self.inst_term(t, subst))
                .collect::<Option<_>>()?,
        })
    }

    fn inst_term(&self, t: &PT, subst: &Subst) -> Option<GT> {
        Some(match t {
            PT::Sym(s) => GT::Sym(*s),
            PT::Int(i) => GT::Int(*i),
            PT::Var(v) => subst[*v].clone()?,
            PT::Arith(v, off) => match subst[*v].as_ref()? {
                GT::Int(x) => {
                    let y = x.checked_add(*off)?;
                    if !self.ints.contains(&y) {
                        return None;
                    }
                    GT::Int(y)
                }
                _ => return None,
            },
            PT::Func(f, args) => GT::Func(
                *f,
                args.iter()
                    .map(|a| self.inst_term(a, subst))
                    .collect::<Option<_>>()?,
            ),
        })
    }
}

fn match_term(p: &PT, g: &GT, subst: &mut Subst, trail: &mut Vec<usize>) -> bool {
    match (p, g) {
        (PT::Sym(a), GT::Sym(b)) => a == b,
        (PT::Int(a), GT::Int(b)) => a == b,
        (PT::Var(v), _) => match &subst[*v] {
            Some(bound) => bound == g,
            None => {
                subst[*v] = Some(g.clone());
                trail.push(*v);
                true
            }
        },
        (PT::Arith(v, off), GT::Int(x)) => {
            let Some(base) = x.checked_sub(*off) else {
                return false;
            };
            match &subst[*v] {
                Some(bound) => *bound == GT::Int(base),
                None => {
                    subst[*v] = Some(GT::Int(base));
                    trail.push(*v);
                    true
                }
            }
        }
        (PT::Func(f, args), GT::Func(h, gargs)) => {
            f == h
                && args.len() == gargs.len()
                && args
                    .iter()
                    .zip(gargs.iter())
                    .all(|(a, b)| match_term(a, b, subst, trail))
        }
        _ => false,
    }
}

fn rule_literals(rule: &crate::rule_lang::Rule) -> impl Iterator<Item = &Literal> {
    rule.head.iter().chain(rule.body.iter())
}

fn rule_has_arith(rule: &crate::rule_lang::Rule) -> bool {
    fn term(t: &Term) -> bool {
        match t {
            Term::Arith { .. } => true,
            Term::Func(a) => a.args.iter().any(term),
            _ => false,
        }
    }
    rule_literals(rule).any(|l| l.atom.args.iter().any(term))
        || rule.guards.iter().any(|g| term(&g.left) || term(&g.right))
}

fn check_constants<'a>(
    lits: impl Iterator<Item = &'a Literal>,
    rule: &crate::rule_lang::Rule,
    idx: usize,
    declared: &HashSet<GT>,
    interner: &mut Interner,
) -> Result<(), KbError> {
    fn walk(
        t: &Term,
        declared: &HashSet<GT>,
        interner: &mut Interner,
    ) -> Result<(), String> {
        match t {
            Term::Const(c) => {
                if !declared.contains(&GT::Sym(interner.intern(c))) {
                    return Err(c.clone());
                }
            }
            Term::Int(i) => {
                if !declared.contains(&GT::Int(*i)) {
                    return Err(i.to_string());
                }
            }
            Term::Func(a) => {
                for t in &a.args {
                    walk(t, declared, interner)?;
                }
            }
            Term::Var(_) | Term::Arith { .. } => {}
        }
        Ok(())
    }
    let guard_terms = rule.guards.iter().flat_map(|g| [&g.left, &g.right]);
    let terms = lits.flat_map(|l| l.atom.args.iter()).chain(guard_terms);
    for t in terms {
        walk(t, declared, interner).map_err(|constant| KbError::UnsortedConstant {
            constant,
            rule: idx,
        })?;
    }
    Ok(())
}

/// Union-find over argument positions and rule variables.
#[derive(Default)]
struct Sorts {
    keys: HashMap<SortKey, usize>,
    parent: Vec<usize>,
    consts: Vec<Vec<GT>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum SortKey {
    Path(Vec<(u32, usize, usize)>),
    Var(usize, String),
}

impl Sorts {
    fn node(&mut self, k: SortKey) -> usize {
        if let Some(&n) = self.keys.get(&k) {
            return n;
        }
        let n = self.parent.len();
        self.parent.push(n);
        self.consts.push(Vec::new());
        self.keys.insert(k, n);
        n
    }

    fn find(&mut self, mut n: usize) -> usize {
        while self.parent[n] != n {
            self.parent[n] = self.parent[self.parent[n]];
            n = self.parent[n];
        }
        n
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[rb] = ra;
            let moved = std::mem::take(&mut self.consts[rb]);
            for c in moved {
                if !self.consts[ra].contains(&c) {
                    self.consts[ra].push(c);
                }
            }
        }
    }

    fn add_const(&mut self, n: usize, c: GT) {
        let r = self.find(n);
        if !self.consts[r].contains(&c) {
            self.consts[r].push(c);
        }
    }
}

/// Domain per (rule, variable) for variables not bound by positive literals,
/// inferred from the constants seen at the argument positions they share.
fn infer_sorts(
    p: &Program,
    sort_members: &[(u32, Vec<GT>)],
    interner: &mut Interner,
) -> HashMap<(usize, String), Vec<GT>> {
    let mut s = Sorts::default();

    fn walk_atom(
        a: &Atom,
        prefix: &[(u32, usize, usize)],
        rule: usize,
        s: &mut Sorts,
        interner: &mut Interner,
    ) {
        let f = interner.intern(&a.predicate);
        for (i, t) in a.args.iter().enumerate() {
            let mut path = prefix.to_vec();
            path.push((f, a.args.len(), i));
            match t {
                Term::Var(v) | Term::Arith { var: v, .. } => {
                    let pn = s.node(SortKey::Path(path));
                    let vn = s.node(SortKey::Var(rule, v.clone()));
                    s.union(pn, vn);
                }
                Term::Const(c) => {
                    let pn = s.node(SortKey::Path(path));
                    let g = GT::Sym(interner.intern(c));
                    s.add_const(pn, g);
                }
                Term::Int(k) => {
                    let pn = s.node(SortKey::Path(path));
                    s.add_const(pn, GT::Int(*k));
                }
                Term::Func(inner) => walk_atom(inner, &path, rule, s, interner),
            }
        }
    }

    for (sid, members) in sort_members {
        let pn = s.node(SortKey::Path(vec![(*sid, 1, 0)]));
        for m in members {
            s.add_const(pn, m.clone());
        }
    }
    for (idx, rule) in p.rules.iter().enumerate() {
        for lit in rule_literals(rule) {
            walk_atom(&lit.atom, &[], idx, &mut s, interner);
        }
        for g in &rule.guards {
            let side = |t: &Term, s: &mut Sorts, interner: &mut Interner| -> Option<usize> {
                match t {
                    Term::Var(v) | Term::Arith { var: v, .. } => {
                        Some(s.node(SortKey::Var(idx, v.clone())))
                    }
                    Term::Const(c) => {
                        let _ = interner.intern(c);
                        None
                    }
                    _ => None,
                }
            };
            let l = side(&g.left, &mut s, interner);
            let r = side(&g.right, &mut s, interner);
            match (l, r) {
                (Some(a), Some(b)) => s.union(a, b),
                (Some(a), None) => {
                    if let Some(c) = const_gt(&g.right, interner) {
                        s.add_const(a, c);
                    }
                }
                (None, Some(b)) => {
                    if let Some(c) = const_gt(&g.left, interner) {
                        s.add_const(b, c);
                    }
                }
                (None, None) => {}
            }
        }
    }

    let mut out = HashMap::new();
    let var_keys: Vec<(usize, String, usize)> = s
        .keys
        .iter()
        .filter_map(|(k, &n)| match k {
            SortKey::Var(r, v) => Some((*r, v.clone(), n)),
            _ => None,
        })
        .collect();
    for (r, v, n) in var_keys {
        let root = s.find(n);
        let seen = &s.consts[root];
        let mut dom: Vec<GT> = Vec::new();
        for (_, members) in sort_members {
            if members.iter().any(|m| seen.contains(m)) {
                for m in members {
                    if !dom.contains(m) {
                        dom.push(m.clone());
                    }
                }
            }
        }
        out.insert((r, v), dom);
    }
    out
}

fn const_gt(t: &Term, interner: &mut Interner) -> Option<GT> {
    match t {
        Term::Const(c) => Some(GT::Sym(interner.intern(c))),
        Term::Int(i) => Some(GT::Int(*i)),
        _ => None,
    }
}

fn compile(
    idx: usize,
    rule: &crate::rule_lang::Rule,
    interner: &mut Interner,
    domains: &HashMap<(usize, String), Vec<GT>>,
) -> Result<CRule, KbError> {
    let mut vars: Vec<String> = Vec::new();
    let mut slot = |v: &str, vars: &mut Vec<String>| -> usize {
        if let Some(i) = vars.iter().position(|x| x == v) {
            i
        } else {
            vars.push(v.to_string());
            vars.len() - 1
        }
    };

    fn pt(
        t: &Term,
        interner: &mut Interner,
        vars: &mut Vec<String>,
        slot: &mut dyn FnMut(&str, &mut Vec<String>) -> usize,
    ) -> PT {
        match t {
            Term::Const(c) => PT::Sym(interner.intern(c)),
            Term::Int(i) => PT::Int(*i),
            Term::Var(v) => PT::Var(slot(v, vars)),
            Term::Arith { var, offset } => PT::Arith(slot(var, vars), *offset),
            Term::Func(a) => PT::Func(
                interner.intern(&a.predicate),
                a.args
                    .iter()
                    .map(|x| pt(x, interner, vars, slot))
                    .collect(),
            ),
        }
    }
    let pa = |l: &Literal,
                  interner: &mut Interner,
                  vars: &mut Vec<String>,
                  slot: &mut dyn FnMut(&str, &mut Vec<String>) -> usize|
     -> PA {
        PA {
            pred: interner.intern(&l.atom.predicate),
            neg: l.classically_negated,
            args: l
                .atom
                .args
                .iter()
                .map(|t| pt(t, interner, vars, slot))
                .collect(),
        }
    };

    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for l in &rule.body {
        let a = pa(l, interner, &mut vars, &mut slot);
        if l.default_negated {
            neg.push(a);
        } else {
            pos.push(a);
        }
    }
    let head = rule
        .head
        .as_ref()
        .map(|h| pa(h, interner, &mut vars, &mut slot));
    let guards = rule
        .guards
        .iter()
        .map(|g| {
            (
                pt(&g.left, interner, &mut vars, &mut slot),
                pt(&g.right, interner, &mut vars, &mut slot),
            )
        })
        .collect();

    // variables bound by positive literals
    let mut bound = HashSet::new();
    for l in rule.body.iter().filter(|l| !l.default_negated) {
        let mut vs = Vec::new();
        l.atom.collect_vars(&mut vs);
        bound.extend(vs.into_iter().map(str::to_string));
    }
    let mut free = Vec::new();
    for (i, v) in vars.iter().enumerate() {
        if bound.contains(v) {
            continue;
        }
        let dom = domains.get(&(idx, v.clone())).cloned().unwrap_or_default();
        // with a positive body an empty domain just means no instances
        if dom.is_empty() && pos.is_empty() {
            return Err(KbError::UnsortedVariable {
                var: v.clone(),
                rule: idx,
            });
        }
        free.push((i, dom));
    }

    Ok(CRule {
        head,
        pos,
        neg,
        guards,
        nvars: vars.len(),
        free,
    })
}
