#![allow(dead_code)]

pub mod equations;

use std::collections::BTreeSet;

use rand::Rng;

/// Propositional rule over atoms `a0..a{n-1}`; `head == None` is a constraint.
#[derive(Debug, Clone)]
pub struct PropRule {
    pub head: Option<usize>,
    pub pos: Vec<usize>,
    pub neg: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct PropProgram {
    pub atoms: usize,
    pub rules: Vec<PropRule>,
}

impl PropProgram {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            let body: Vec<String> = r
                .pos
                .iter()
                .map(|a| format!("a{a}"))
                .chain(r.neg.iter().map(|a| format!("not a{a}")))
                .collect();
            match (r.head, body.is_empty()) {
                (Some(h), true) => out.push_str(&format!("a{h}.\n")),
                (Some(h), false) => out.push_str(&format!("a{h} :- {}.\n", body.join(", "))),
                (None, _) => out.push_str(&format!(":- {}.\n", body.join(", "))),
            }
        }
        out
    }
}

/// Random program that is stratified by construction: every atom gets a
/// level, positive bodies use levels at or below the head and negative
/// bodies strictly lower levels.
pub fn random_stratified(rng: &mut impl Rng, max_atoms: usize, with_constraints: bool) -> PropProgram {
    let n = rng.gen_range(1..=max_atoms);
    let level: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
    let mut rules = Vec::new();
    for _ in 0..rng.gen_range(1..=2 * n) {
        let h = rng.gen_range(0..n);
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for _ in 0..rng.gen_range(0..=3) {
            let b = rng.gen_range(0..n);
            if level[b] <= level[h] && !pos.contains(&b) {
                pos.push(b);
            }
        }
        for _ in 0..rng.gen_range(0..=2) {
            let b = rng.gen_range(0..n);
            if level[b] < level[h] && !neg.contains(&b) {
                neg.push(b);
            }
        }
        rules.push(PropRule {
            head: Some(h),
            pos,
            neg,
        });
    }
    if with_constraints && rng.gen_bool(0.3) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        rules.push(PropRule {
            head: None,
            pos: vec![a],
            neg: if a != b { vec![b] } else { vec![] },
        });
    }
    PropProgram { atoms: n, rules }
}

/// Arbitrary program, possibly with negative cycles.
pub fn random_unrestricted(rng: &mut impl Rng, max_atoms: usize) -> PropProgram {
    let n = rng.gen_range(1..=max_atoms);
    let mut rules = Vec::new();
    for _ in 0..rng.gen_range(1..=2 * n) {
        let h = rng.gen_range(0..n);
        let pos: BTreeSet<usize> = (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..n)).collect();
        let neg: BTreeSet<usize> = (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..n)).collect();
        rules.push(PropRule {
            head: Some(h),
            pos: pos.into_iter().collect(),
            neg: neg.into_iter().collect(),
        });
    }
    PropProgram { atoms: n, rules }
}

/// All stable models, by enumerating every candidate set and comparing it
/// with the least model of its reduct.
pub fn stable_models(p: &PropProgram) -> Vec<BTreeSet<usize>> {
    let n = p.atoms;
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let m = |a: usize| mask & (1 << a) != 0;
        // reduct: drop rules with a negated atom in M, strip remaining negation
        let reduct: Vec<&PropRule> = p
            .rules
            .iter()
            .filter(|r| r.head.is_some() && r.neg.iter().all(|&a| !m(a)))
            .collect();
        let mut least = vec![false; n];
        loop {
            let mut changed = false;
            for r in &reduct {
                let h = r.head.unwrap();
                if !least[h] && r.pos.iter().all(|&a| least[a]) {
                    least[h] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if (0..n).all(|a| least[a] == m(a)) {
            let violated = p
                .rules
                .iter()
                .filter(|r| r.head.is_none())
                .any(|r| r.pos.iter().all(|&a| m(a)) && r.neg.iter().all(|&a| !m(a)));
            if !violated {
                out.push((0..n).filter(|&a| m(a)).collect());
            }
        }
    }
    out
}
