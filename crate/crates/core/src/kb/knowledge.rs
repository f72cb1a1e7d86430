use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use log::debug;

use super::ground::{ground, GroundProgram};
use super::hierarchy::{HierarchyEdit, ObjectHierarchy};
use super::solve::{evaluate_for_repair, solve, AnswerSet};
use super::terms::{GroundAtom, GroundLiteral, GroundTerm};
use super::KbError;
use crate::rule_lang::{parse_program, Atom, Literal, Program, Rule, SortValue, Term};

/// Where a stored fact came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    Initial,
    Sensor,
    Human,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Confidence {
    Low,
    High,
}

/// Bookkeeping attached to every stored fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FactMeta {
    pub provenance: Provenance,
    pub confidence: Confidence,
    /// KB step at which the fact was asserted.
    pub timestep: i64,
}

impl FactMeta {
    pub fn initial() -> Self {
        FactMeta {
            provenance: Provenance::Initial,
            confidence: Confidence::High,
            timestep: 0,
        }
    }

    pub fn sensor(confidence: Confidence, timestep: i64) -> Self {
        FactMeta {
            provenance: Provenance::Sensor,
            confidence,
            timestep,
        }
    }

    pub fn human(timestep: i64) -> Self {
        FactMeta {
            provenance: Provenance::Human,
            confidence: Confidence::High,
            timestep,
        }
    }

    fn rank(&self) -> u8 {
        match (self.provenance, self.confidence) {
            (Provenance::Human, _) => 3,
            (Provenance::Sensor, Confidence::High) => 2,
            (Provenance::Sensor, Confidence::Low) => 1,
            (Provenance::Initial, _) => 0,
        }
    }

    /// Human beats high-confidence sensor beats low-confidence sensor beats
    /// initial knowledge; within a rank the later timestep wins.
    pub fn precedence(&self, other: &FactMeta) -> Ordering {
        (self.rank(), self.timestep, self.confidence).cmp(&(
            other.rank(),
            other.timestep,
            other.confidence,
        ))
    }
}

/// One resolved conflict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairRecord {
    pub kept: GroundLiteral,
    pub rejected: GroundLiteral,
    pub demoted: Vec<(GroundLiteral, FactMeta)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssertOutcome {
    Unchanged,
    Added,
    /// Added, after which the listed conflicts were repaired.
    Repaired(Vec<RepairRecord>),
}

/// Static rules plus a provenance-tracked fact store and object hierarchy.
///
/// The step sort is managed by the KB and always spans `1..=now`.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    base: Program,
    facts: IndexMap<GroundLiteral, FactMeta>,
    demoted: Vec<(GroundLiteral, FactMeta)>,
    repairs: Vec<RepairRecord>,
    hierarchy: ObjectHierarchy,
    temporal: bool,
    now: i64,
    cache: Option<AnswerSet>,
}

impl KnowledgeBase {
    /// Loads a program; its ground facts become initial facts.
    pub fn from_program(p: Program) -> Result<Self, KbError> {
        Self::with_facts(p, std::iter::empty())
    }

    pub fn from_text(src: &str) -> Result<Self, KbError> {
        Self::from_program(parse_program(src)?)
    }

    /// Loads a program plus extra facts and solves once.
    pub fn with_facts(
        p: Program,
        extra: impl IntoIterator<Item = (GroundLiteral, FactMeta)>,
    ) -> Result<Self, KbError> {
        let mut base = Program {
            sorts: p.sorts,
            ..Program::default()
        };
        let mut facts = IndexMap::new();
        for rule in p.rules {
            let ground_head = rule
                .head
                .as_ref()
                .filter(|h| rule.is_fact() && h.atom.is_ground())
                .and_then(|h| {
                    GroundAtom::from_atom(&h.atom).map(|atom| GroundLiteral {
                        negated: h.classically_negated,
                        atom,
                    })
                });
            match ground_head {
                Some(lit) => {
                    facts.entry(lit).or_insert(FactMeta::initial());
                }
                None => base.push_rule(rule),
            }
        }
        for (lit, meta) in extra {
            facts.insert(lit, meta);
        }

        let temporal = base.sorts.contains_key("step");
        let mut now = 1;
        if let Some(values) = base.sorts.shift_remove("step") {
            for v in values {
                now = now.max(match v {
                    SortValue::Int(i) | SortValue::Range(_, i) => i,
                    SortValue::Const(_) => 1,
                });
            }
        }
        let mut kb = KnowledgeBase {
            base,
            facts,
            demoted: Vec::new(),
            repairs: Vec::new(),
            hierarchy: ObjectHierarchy::new(),
            temporal,
            now,
            cache: None,
        };
        for lit in kb.facts.keys() {
            if kb.temporal {
                if let Some(t) = lit.atom.args.last().and_then(GroundTerm::as_int) {
                    kb.now = kb.now.max(t);
                }
            }
        }
        kb.rebuild_hierarchy()?;
        kb.refresh()?;
        Ok(kb)
    }

    fn rebuild_hierarchy(&mut self) -> Result<(), KbError> {
        let pairs = |pred: &'static str| {
            self.facts
                .keys()
                .filter(move |l| !l.negated && l.atom.predicate == pred && l.atom.args.len() == 2)
                .filter_map(|l| Some((l.atom.args[0].as_sym()?, l.atom.args[1].as_sym()?)))
        };
        self.hierarchy = ObjectHierarchy::from_pairs(pairs("subclass"), pairs("is"))?;
        Ok(())
    }

    /// Current (latest) step.
    pub fn now(&self) -> i64 {
        self.now
    }

    /// Extends the step range by one and returns the new current step.
    pub fn advance(&mut self) -> i64 {
        self.now += 1;
        self.cache = None;
        self.now
    }

    pub fn hierarchy(&self) -> &ObjectHierarchy {
        &self.hierarchy
    }

    pub fn facts(&self) -> impl Iterator<Item = (&GroundLiteral, &FactMeta)> {
        self.facts.iter()
    }

    pub fn fact_count(&self) -> usize {
        self.facts.len()
    }

    pub fn contains_fact(&self, lit: &GroundLiteral) -> bool {
        self.facts.contains_key(lit)
    }

    /// Facts removed by conflict repair, oldest first.
    pub fn demoted(&self) -> &[(GroundLiteral, FactMeta)] {
        &self.demoted
    }

    pub fn repairs(&self) -> &[RepairRecord] {
        &self.repairs
    }

    fn is_sort_fact(&self, lit: &GroundLiteral) -> bool {
        !lit.negated
            && lit.atom.args.len() == 1
            && self.base.sorts.contains_key(&lit.atom.predicate)
            && !matches!(lit.atom.args[0], GroundTerm::Func(..))
    }

    /// The full program: static rules, sorts, step range and stored facts.
    pub fn program(&self) -> Program {
        let mut p = self.base.clone();
        if self.temporal {
            p.sorts
                .insert("step".to_string(), vec![SortValue::Range(1, self.now)]);
        }
        for lit in self.facts.keys() {
            if self.is_sort_fact(lit) {
                let v = match &lit.atom.args[0] {
                    GroundTerm::Sym(s) => SortValue::Const(s.clone()),
                    GroundTerm::Int(i) => SortValue::Int(*i),
                    GroundTerm::Func(..) => unreachable!(),
                };
                p.declare(lit.atom.predicate.clone(), v);
            } else {
                p.push_rule(Rule::fact(lit.to_literal()));
            }
        }
        p
    }

    fn declared(&self) -> HashSet<GroundTerm> {
        let mut out = HashSet::new();
        for values in self.base.sorts.values() {
            for v in values {
                for t in v.expand() {
                    if let Some(g) = GroundTerm::from_term(&t) {
                        out.insert(g);
                    }
                }
            }
        }
        for lit in self.facts.keys().filter(|l| self.is_sort_fact(l)) {
            out.insert(lit.atom.args[0].clone());
        }
        out
    }

    fn check_sorted(&self, lit: &GroundLiteral) -> Result<(), KbError> {
        if self.is_sort_fact(lit) {
            return Ok(());
        }
        let declared = self.declared();
        fn walk(
            t: &GroundTerm,
            declared: &HashSet<GroundTerm>,
            temporal: bool,
        ) -> Result<(), String> {
            match t {
                GroundTerm::Sym(_) if !declared.contains(t) => {
                    Err(format!("`{t}` is not declared in any sort"))
                }
                GroundTerm::Int(i) if !declared.contains(t) && !(temporal && *i >= 1) => {
                    Err(format!("integer {i} is outside every sort"))
                }
                GroundTerm::Func(_, args) => {
                    args.iter().try_for_each(|a| walk(a, declared, temporal))
                }
                _ => Ok(()),
            }
        }
        lit.atom
            .args
            .iter()
            .try_for_each(|a| walk(a, &declared, self.temporal))
            .map_err(|reason| KbError::IllSorted {
                fact: lit.to_string(),
                reason,
            })
    }

    /// Stores a fact and re-solves, repairing any inconsistency it causes.
    ///
    /// Step arguments beyond the current range extend it.
    pub fn assert_fact(
        &mut self,
        lit: GroundLiteral,
        meta: FactMeta,
    ) -> Result<AssertOutcome, KbError> {
        if self.facts.contains_key(&lit) {
            return Ok(AssertOutcome::Unchanged);
        }
        self.check_sorted(&lit)?;
        let saved = self.clone();
        let result = self.insert_and_solve(lit, meta);
        if result.is_err() {
            *self = saved;
        }
        result
    }

    fn insert_and_solve(
        &mut self,
        lit: GroundLiteral,
        meta: FactMeta,
    ) -> Result<AssertOutcome, KbError> {
        if self.temporal {
            if let Some(t) = lit.atom.args.last().and_then(GroundTerm::as_int) {
                self.now = self.now.max(t);
            }
        }
        let hierarchy_fact = !lit.negated
            && matches!(lit.atom.predicate.as_str(), "is" | "subclass")
            && lit.atom.args.len() == 2;
        self.facts.insert(lit, meta);
        if hierarchy_fact {
            self.rebuild_hierarchy()?;
        }
        self.cache = None;
        let records = self.refresh()?;
        Ok(if records.is_empty() {
            AssertOutcome::Added
        } else {
            AssertOutcome::Repaired(records)
        })
    }

    /// Removes a stored fact. Returns whether it was present.
    pub fn retract_fact(&mut self, lit: &GroundLiteral) -> Result<bool, KbError> {
        if self.facts.shift_remove(lit).is_none() {
            return Ok(false);
        }
        if matches!(lit.atom.predicate.as_str(), "is" | "subclass") {
            self.rebuild_hierarchy()?;
        }
        self.cache = None;
        self.refresh()?;
        Ok(true)
    }

    /// Solves, repairing inconsistencies until a model exists.
    fn refresh(&mut self) -> Result<Vec<RepairRecord>, KbError> {
        let mut records = Vec::new();
        loop {
            let g = ground(&self.program())?;
            match solve(&g) {
                Ok(a) => {
                    self.cache = Some(a);
                    return Ok(records);
                }
                Err(KbError::Inconsistent { positive, negative }) => {
                    records.push(self.repair_in(&g, positive, negative)?);
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Resolves a contradictory pair by demoting the facts that support only
    /// the weaker side.
    pub fn repair_conflict(
        &mut self,
        positive: GroundLiteral,
        negative: GroundLiteral,
    ) -> Result<RepairRecord, KbError> {
        let g = ground(&self.program())?;
        let rec = self.repair_in(&g, positive, negative)?;
        self.cache = None;
        self.refresh()?;
        Ok(rec)
    }

    fn repair_in(
        &mut self,
        g: &GroundProgram,
        positive: GroundLiteral,
        negative: GroundLiteral,
    ) -> Result<RepairRecord, KbError> {
        let truth = evaluate_for_repair(g)?;
        let fact_ids: HashMap<u32, GroundLiteral> = self
            .facts
            .keys()
            .filter_map(|l| g.find(l).map(|id| (id, l.clone())))
            .collect();
        let mut deriving: HashMap<u32, Vec<usize>> = HashMap::new();
        for (i, r) in g.rules.iter().enumerate() {
            if let Some(h) = r.head {
                deriving.entry(h).or_default().push(i);
            }
        }
        let support = |lit: &GroundLiteral| -> HashSet<GroundLiteral> {
            let mut out = HashSet::new();
            let Some(start) = g.find(lit) else {
                return out;
            };
            let mut seen = HashSet::from([start]);
            let mut stack = vec![start];
            while let Some(a) = stack.pop() {
                if let Some(f) = fact_ids.get(&a) {
                    out.insert(f.clone());
                }
                for &ri in deriving.get(&a).into_iter().flatten() {
                    let r = &g.rules[ri];
                    let fires = r.pos.iter().all(|&b| truth[b as usize])
                        && r.neg.iter().all(|&b| !truth[b as usize]);
                    if fires {
                        for &b in &r.pos {
                            if seen.insert(b) {
                                stack.push(b);
                            }
                        }
                    }
                }
            }
            out
        };
        let sp = support(&positive);
        let sn = support(&negative);
        let only_pos: Vec<&GroundLiteral> = sp.difference(&sn).collect();
        let only_neg: Vec<&GroundLiteral> = sn.difference(&sp).collect();
        let strongest = |side: &[&GroundLiteral]| {
            side.iter()
                .map(|l| self.facts[*l])
                .max_by(|a, b| a.precedence(b))
        };
        let (sp_best, sn_best) = (strongest(&only_pos), strongest(&only_neg));
        let negative_loses = match (sp_best, sn_best) {
            (None, None) => {
                return Err(KbError::Unrepairable { positive, negative });
            }
            (None, Some(_)) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => match a.precedence(&b) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => return Err(KbError::RepairTie { positive, negative }),
            },
        };
        let (kept, rejected, losers) = if negative_loses {
            (positive, negative, only_neg)
        } else {
            (negative, positive, only_pos)
        };
        let mut losers: Vec<GroundLiteral> = losers.into_iter().cloned().collect();
        losers.sort();
        let mut demoted = Vec::new();
        for l in losers {
            if let Some(meta) = self.facts.shift_remove(&l) {
                demoted.push((l, meta));
            }
        }
        debug!("repair kept {kept}, rejected {rejected}, demoted {demoted:?}");
        self.demoted.extend(demoted.iter().cloned());
        let rec = RepairRecord {
            kept,
            rejected,
            demoted,
        };
        self.repairs.push(rec.clone());
        self.rebuild_hierarchy()?;
        Ok(rec)
    }

    /// The current answer set.
    pub fn answer_set(&mut self) -> Result<&AnswerSet, KbError> {
        if self.cache.is_none() {
            self.refresh()?;
        }
        Ok(self.cache.as_ref().expect("refreshed"))
    }

    /// All believed atoms unifying with `pattern`; a classically negated
    /// pattern matches negative literals.
    pub fn query(&mut self, pattern: &Literal) -> Result<Vec<GroundAtom>, KbError> {
        let a = self.answer_set()?;
        let pool = if pattern.classically_negated {
            &a.negative
        } else {
            &a.positive
        };
        Ok(pool
            .iter()
            .filter(|g| unify_atom(&pattern.atom, g))
            .cloned()
            .collect())
    }

    /// [`query`](Self::query) with the pattern written in rule syntax,
    /// e.g. `holds(exists(printer, R), 2)`.
    pub fn query_text(&mut self, pattern: &str) -> Result<Vec<GroundAtom>, KbError> {
        let p = parse_program(&format!("q :- {}.", pattern.trim().trim_end_matches('.')))?;
        let lit = p.rules[0].body[0].clone();
        self.query(&lit)
    }

    /// The answer set as newline-delimited ground literals.
    pub fn export_answer_set(&mut self) -> Result<String, KbError> {
        Ok(self.answer_set()?.to_text())
    }

    /// Applies a hierarchy edit and the matching fact changes.
    pub fn revise_hierarchy(&mut self, edit: &HierarchyEdit) -> Result<(), KbError> {
        let mut next = self.hierarchy.clone();
        next.revise(edit)?;
        match edit {
            HierarchyEdit::AddInstance { instance, class } => {
                let obj = GroundLiteral::pos(GroundAtom::new(
                    "object",
                    vec![GroundTerm::sym(instance.as_str())],
                ));
                if self.base.sorts.contains_key("object") {
                    self.facts.entry(obj).or_insert(FactMeta::initial());
                }
                let is = GroundLiteral::pos(GroundAtom::new(
                    "is",
                    vec![GroundTerm::sym(instance.as_str()), GroundTerm::sym(class.as_str())],
                ));
                self.check_sorted(&is)?;
                self.facts.entry(is).or_insert(FactMeta::initial());
            }
            HierarchyEdit::RemoveInstance { instance } => {
                let target = GroundTerm::sym(instance.as_str());
                self.facts
                    .retain(|l, _| !l.atom.args.iter().any(|a| mentions(a, &target)));
            }
            HierarchyEdit::MergeClasses { keep, absorbed } => {
                let (keep_t, gone) = (GroundTerm::sym(keep.as_str()), GroundTerm::sym(absorbed.as_str()));
                let old = std::mem::take(&mut self.facts);
                for (mut l, meta) in old {
                    let p = l.atom.predicate.as_str();
                    if p == "subclass" && l.atom.args.first() == Some(&gone) {
                        continue;
                    }
                    if p == "is" || p == "subclass" {
                        for a in &mut l.atom.args {
                            if *a == gone {
                                *a = keep_t.clone();
                            }
                        }
                    }
                    self.facts.entry(l).or_insert(meta);
                }
            }
        }
        self.hierarchy = next;
        self.cache = None;
        self.refresh()?;
        Ok(())
    }
}

fn mentions(t: &GroundTerm, target: &GroundTerm) -> bool {
    t == target
        || matches!(t, GroundTerm::Func(_, args) if args.iter().any(|a| mentions(a, target)))
}

fn unify_atom(p: &Atom, g: &GroundAtom) -> bool {
    if p.predicate != g.predicate || p.args.len() != g.args.len() {
        return false;
    }
    let mut b = HashMap::new();
    p.args.iter().zip(&g.args).all(|(t, gt)| unify(t, gt, &mut b))
}

fn unify<'a>(t: &'a Term, g: &GroundTerm, b: &mut HashMap<&'a str, GroundTerm>) -> bool {
    let mut bind = |v: &'a str, val: GroundTerm| match b.get(v) {
        Some(prev) => *prev == val,
        None => {
            b.insert(v, val);
            true
        }
    };
    match (t, g) {
        (Term::Var(v), _) => bind(v, g.clone()),
        (Term::Arith { var, offset }, GroundTerm::Int(i)) => bind(var, GroundTerm::Int(i - offset)),
        (Term::Const(c), GroundTerm::Sym(s)) => c == s,
        (Term::Int(i), GroundTerm::Int(j)) => i == j,
        (Term::Func(a), GroundTerm::Func(f, args)) => {
            a.predicate == *f
                && a.args.len() == args.len()
                && a.args.iter().zip(args).all(|(x, y)| unify(x, y, b))
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::terms::located;

    const BASE: &str = "
        room(lab). room(office). object(printer1). class(printer).
        step(1..2).
        is(printer1, printer).
        -holds(in(O,R2),I) :- holds(in(O,R1),I), R1 != R2.
        holds(in(O,R),I+1) :- holds(in(O,R),I), not -holds(in(O,R),I+1).
        holds(in(printer1, lab), 1).
    ";

    #[test]
    fn precedence_table() {
        let human = FactMeta::human(5);
        let low = FactMeta::sensor(Confidence::Low, 3);
        assert_eq!(human.precedence(&low), Ordering::Greater);
        let newer = FactMeta::sensor(Confidence::High, 7);
        let older = FactMeta::sensor(Confidence::High, 2);
        assert_eq!(newer.precedence(&older), Ordering::Greater);
        assert_eq!(newer.precedence(&newer), Ordering::Equal);
        assert_eq!(
            FactMeta::sensor(Confidence::Low, 9).precedence(&FactMeta::initial()),
            Ordering::Greater
        );
    }

    #[test]
    fn reassert_is_idempotent() {
        let mut kb = KnowledgeBase::from_text(BASE).unwrap();
        let f = located("printer1", "lab", 1);
        let before = kb.answer_set().unwrap().clone();
        assert_eq!(
            kb.assert_fact(f, FactMeta::human(1)).unwrap(),
            AssertOutcome::Unchanged
        );
        assert_eq!(*kb.answer_set().unwrap(), before);
    }

    #[test]
    fn human_beats_sensor_in_either_order() {
        let sensor = (located("printer1", "lab", 2), FactMeta::sensor(Confidence::High, 2));
        let human = (located("printer1", "office", 2), FactMeta::human(2));
        let run = |first: &(GroundLiteral, FactMeta), second: &(GroundLiteral, FactMeta)| {
            let mut kb = KnowledgeBase::from_text(BASE).unwrap();
            kb.assert_fact(first.0.clone(), first.1).unwrap();
            kb.assert_fact(second.0.clone(), second.1).unwrap();
            let mut facts: Vec<_> = kb.facts().map(|(l, m)| (l.clone(), *m)).collect();
            facts.sort_by(|a, b| a.0.cmp(&b.0));
            (facts, kb.demoted().to_vec(), kb.answer_set().unwrap().clone())
        };
        let a = run(&sensor, &human);
        let b = run(&human, &sensor);
        assert_eq!(a, b);
        assert!(a.0.iter().any(|(l, _)| *l == human.0));
        assert_eq!(a.1, vec![sensor.clone()]);
    }

    #[test]
    fn equal_precedence_is_a_tie() {
        let mut kb = KnowledgeBase::from_text(BASE).unwrap();
        kb.assert_fact(located("printer1", "lab", 2), FactMeta::human(2))
            .unwrap();
        let err = kb
            .assert_fact(located("printer1", "office", 2), FactMeta::human(2))
            .unwrap_err();
        assert!(matches!(err, KbError::RepairTie { .. }));
        assert!(!kb.contains_fact(&located("printer1", "office", 2)));
        assert!(kb.answer_set().is_ok());
    }

    #[test]
    fn ill_sorted_fact() {
        let mut kb = KnowledgeBase::from_text(BASE).unwrap();
        let err = kb
            .assert_fact(located("printer1", "kitchen", 2), FactMeta::human(2))
            .unwrap_err();
        assert!(matches!(err, KbError::IllSorted { .. }));
    }

    #[test]
    fn query_patterns() {
        let mut kb = KnowledgeBase::from_text(BASE).unwrap();
        assert_eq!(kb.query_text("holds(in(printer1, R), 2)").unwrap().len(), 1);
        assert_eq!(kb.query_text("-holds(in(O, R), I)").unwrap().len(), 2);
        assert!(kb.query_text("unknown(X)").unwrap().is_empty());
    }

    #[test]
    fn hierarchy_edits_update_facts() {
        let mut kb = KnowledgeBase::from_text(BASE).unwrap();
        kb.revise_hierarchy(&HierarchyEdit::AddInstance {
            instance: "printer2".into(),
            class: "printer".into(),
        })
        .unwrap();
        assert_eq!(kb.query_text("is(O, printer)").unwrap().len(), 2);
        assert_eq!(kb.hierarchy().count_class_instances("printer"), 2);
        kb.revise_hierarchy(&HierarchyEdit::RemoveInstance {
            instance: "printer1".into(),
        })
        .unwrap();
        assert!(kb.query_text("holds(in(printer1, R), I)").unwrap().is_empty());
    }

    #[test]
    fn advancing_extends_inertia() {
        let mut kb = KnowledgeBase::from_text(BASE).unwrap();
        assert_eq!(kb.advance(), 3);
        assert!(kb.answer_set().unwrap().contains(&located("printer1", "lab", 3)));
    }
}
