//! Evaluation of a ground program to its unique stratified model.
//!
//! Components of the atom dependency graph are evaluated bottom-up. A
//! component without internal default negation is computed as a least
//! fixpoint. A component with internal default negation is simplified against
//! the atoms already decided and split again; if no progress is possible the
//! program has a negative cycle.

use std::collections::{BTreeSet, HashMap, HashSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::ground::GroundProgram;
use super::terms::{GroundAtom, GroundLiteral};
use super::KbError;

/// The set of literals believed true.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnswerSet {
    pub positive: BTreeSet<GroundAtom>,
    pub negative: BTreeSet<GroundAtom>,
}

impl AnswerSet {
    pub fn contains(&self, lit: &GroundLiteral) -> bool {
        if lit.negated {
            self.negative.contains(&lit.atom)
        } else {
            self.positive.contains(&lit.atom)
        }
    }

    pub fn len(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All literals, positive ones first, each group in sorted order.
    pub fn literals(&self) -> impl Iterator<Item = GroundLiteral> + '_ {
        self.positive
            .iter()
            .cloned()
            .map(GroundLiteral::pos)
            .chain(self.negative.iter().cloned().map(GroundLiteral::neg))
    }

    /// Newline-delimited ground literals in rule-language syntax.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for l in self.literals() {
            out.push_str(&l.to_string());
            out.push_str(".\n");
        }
        out
    }
}

#[derive(Debug, Clone)]
struct SRule {
    head: u32,
    pos: Vec<u32>,
    neg: Vec<u32>,
}

impl SRule {
    fn size(&self) -> usize {
        self.pos.len() + self.neg.len()
    }
}

/// Computes the stratified model of `g`.
///
/// Classically contradictory literals raise [`KbError::Inconsistent`] and a
/// satisfied constraint body raises [`KbError::ConstraintViolated`].
pub fn solve(g: &GroundProgram) -> Result<AnswerSet, KbError> {
    let truth = evaluate(g)?;

    for r in g.rules.iter().filter(|r| r.head.is_none()) {
        let holds = r.pos.iter().all(|&a| truth[a as usize])
            && r.neg.iter().all(|&a| !truth[a as usize]);
        if holds {
            let body = r
                .pos
                .iter()
                .map(|&a| g.literal(a).to_string())
                .chain(r.neg.iter().map(|&a| format!("not {}", g.literal(a))))
                .collect::<Vec<_>>()
                .join(", ");
            return Err(KbError::ConstraintViolated { body });
        }
    }

    let mut out = AnswerSet::default();
    for (id, &t) in truth.iter().enumerate() {
        if !t {
            continue;
        }
        let lit = g.literal(id as u32);
        if lit.negated {
            out.negative.insert(lit.atom);
        } else {
            out.positive.insert(lit.atom);
        }
    }
    if let Some(atom) = out.positive.intersection(&out.negative).next() {
        return Err(KbError::Inconsistent {
            positive: GroundLiteral::pos(atom.clone()),
            negative: GroundLiteral::neg(atom.clone()),
        });
    }
    Ok(out)
}

/// Truth value of every atom of `g` in its stratified model.
///
/// When a negative cycle blocks evaluation, the components that do not depend
/// on it are still decided. A contradiction among those is reported as
/// [`KbError::Inconsistent`], since repairing it may remove the cycle.
pub(crate) fn evaluate(g: &GroundProgram) -> Result<Vec<bool>, KbError> {
    evaluate_with(g, false)
}

/// Like [`evaluate`], but a blocked program with a contradiction among its
/// decided atoms yields those atoms (undecided ones false) for repair.
pub(crate) fn evaluate_for_repair(g: &GroundProgram) -> Result<Vec<bool>, KbError> {
    evaluate_with(g, true)
}

fn evaluate_with(g: &GroundProgram, partial: bool) -> Result<Vec<bool>, KbError> {
    let rules: Vec<SRule> = g
        .rules
        .iter()
        .filter_map(|r| {
            r.head.map(|head| SRule {
                head,
                pos: r.pos.clone(),
                neg: r.neg.clone(),
            })
        })
        .collect();
    let mut truth: Vec<Option<bool>> = vec![None; g.num_atoms()];
    let mut cycles = Vec::new();
    eval(rules, &mut truth, &mut cycles);
    let Some(cycle) = cycles.into_iter().next() else {
        return Ok(truth.into_iter().map(|t| t.unwrap_or(false)).collect());
    };
    let contradiction = (0..g.num_atoms() as u32)
        .filter(|&a| truth[a as usize] == Some(true))
        .map(|a| g.literal(a))
        .filter(|l| !l.negated)
        .find(|l| {
            g.find(&l.complement())
                .is_some_and(|c| truth[c as usize] == Some(true))
        });
    match contradiction {
        Some(_) if partial => Ok(truth.into_iter().map(|t| t.unwrap_or(false)).collect()),
        Some(positive) => Err(KbError::Inconsistent {
            negative: positive.complement(),
            positive,
        }),
        None => {
            let mut predicates: Vec<String> = Vec::new();
            let mut atoms: Vec<String> = Vec::new();
            for a in cycle {
                let lit = g.literal(a);
                if !predicates.contains(&lit.atom.predicate) {
                    predicates.push(lit.atom.predicate.clone());
                }
                atoms.push(lit.to_string());
            }
            atoms.sort();
            Err(KbError::NonStratified { predicates, atoms })
        }
    }
}

/// Decides every head of `rules`. Atoms of an irreducible negative cycle, and
/// everything depending on them, stay undecided; each such cycle is recorded.
fn eval(rules: Vec<SRule>, truth: &mut [Option<bool>], cycles: &mut Vec<Vec<u32>>) {
    let mut local: HashMap<u32, usize> = HashMap::new();
    let mut scope: Vec<u32> = Vec::new();
    for r in &rules {
        local.entry(r.head).or_insert_with(|| {
            scope.push(r.head);
            scope.len() - 1
        });
    }
    // atoms without rules here cannot be derived
    for r in &rules {
        for &b in r.pos.iter().chain(&r.neg) {
            if !local.contains_key(&b) && truth[b as usize].is_none() {
                truth[b as usize] = Some(false);
            }
        }
    }

    let mut graph: DiGraph<u32, ()> = DiGraph::with_capacity(scope.len(), rules.len());
    for &a in &scope {
        graph.add_node(a);
    }
    let mut by_head: Vec<Vec<usize>> = vec![Vec::new(); scope.len()];
    for (i, r) in rules.iter().enumerate() {
        let h = local[&r.head];
        by_head[h].push(i);
        for &b in r.pos.iter().chain(&r.neg) {
            if let Some(&bl) = local.get(&b) {
                graph.update_edge((h as u32).into(), (bl as u32).into(), ());
            }
        }
    }

    let input_size: usize = rules.iter().map(SRule::size).sum();
    // dependencies come before dependents in this order
    'components: for comp in tarjan_scc(&graph) {
        let members: HashSet<u32> = comp.iter().map(|n| graph[*n]).collect();
        let mut simplified = Vec::new();
        let mut has_internal_neg = false;
        for n in &comp {
            for &ri in &by_head[n.index()] {
                let r = &rules[ri];
                let outside = r.pos.iter().chain(&r.neg).filter(|b| !members.contains(b));
                if outside.clone().any(|&b| truth[b as usize].is_none()) {
                    // depends on a blocked cycle
                    continue 'components;
                }
                let mut keep = true;
                let mut pos = Vec::new();
                let mut neg = Vec::new();
                for &b in &r.pos {
                    if members.contains(&b) {
                        pos.push(b);
                    } else if truth[b as usize] != Some(true) {
                        keep = false;
                        break;
                    }
                }
                if !keep {
                    continue;
                }
                for &b in &r.neg {
                    if members.contains(&b) {
                        neg.push(b);
                    } else if truth[b as usize] == Some(true) {
                        keep = false;
                        break;
                    }
                }
                if keep {
                    has_internal_neg |= !neg.is_empty();
                    simplified.push(SRule {
                        head: r.head,
                        pos,
                        neg,
                    });
                }
            }
        }

        if !has_internal_neg {
            least_fixpoint(&members, &simplified, truth);
            continue;
        }
        let size: usize = simplified.iter().map(SRule::size).sum();
        if members.len() == scope.len() && simplified.len() == rules.len() && size == input_size {
            let mut cycle: Vec<u32> = members.into_iter().collect();
            cycle.sort_unstable();
            cycles.push(cycle);
            return;
        }
        let before = cycles.len();
        eval(simplified, truth, cycles);
        if cycles.len() == before {
            for a in members {
                if truth[a as usize].is_none() {
                    truth[a as usize] = Some(false);
                }
            }
        }
    }
}

fn least_fixpoint(members: &HashSet<u32>, rules: &[SRule], truth: &mut [Option<bool>]) {
    let mut watchers: HashMap<u32, Vec<usize>> = HashMap::new();
    let mut missing: Vec<usize> = Vec::with_capacity(rules.len());
    let mut queue: Vec<u32> = Vec::new();
    let mut derived: HashSet<u32> = HashSet::new();
    for (i, r) in rules.iter().enumerate() {
        missing.push(r.pos.len());
        for &b in &r.pos {
            watchers.entry(b).or_default().push(i);
        }
        if r.pos.is_empty() && derived.insert(r.head) {
            queue.push(r.head);
        }
    }
    while let Some(a) = queue.pop() {
        if let Some(ws) = watchers.get(&a) {
            for &i in ws {
                missing[i] -= 1;
                if missing[i] == 0 && derived.insert(rules[i].head) {
                    queue.push(rules[i].head);
                }
            }
        }
    }
    for &a in members {
        truth[a as usize] = Some(derived.contains(&a));
    }
}
