//! Shared fixtures and the reference forward chainer.
#![allow(dead_code)]

use std::collections::BTreeSet;

use nemesys::lang::{parse_program, Clause, Program, Term};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> Program {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_program(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

pub const CONSTS: [&str; 3] = ["a", "b", "c"];
/// `(name, arity)`; the full base is 3 + 9 + 9 = 21 ground atoms.
pub const PREDS: [(&str, usize); 3] = [("p", 1), ("q", 2), ("r", 2)];
const VARS: [&str; 3] = ["X", "Y", "Z"];

pub fn herbrand_base() -> Vec<Term> {
    let mut out = Vec::new();
    for (p, n) in PREDS {
        let mut tuples: Vec<Vec<Term>> = vec![Vec::new()];
        for _ in 0..n {
            tuples = tuples
                .into_iter()
                .flat_map(|t| CONSTS.iter().map(move |c| [t.clone(), vec![Term::constant(c)]].concat()))
                .collect();
        }
        out.extend(tuples.into_iter().map(|args| Term::compound(p, args)));
    }
    out
}

fn literal<R: Rng>(rng: &mut R, pool: &[&str]) -> Term {
    let (p, n) = PREDS[rng.gen_range(0..PREDS.len())];
    Term::compound(p, (0..n).map(|_| Term::var(pool[rng.gen_range(0..pool.len())])).collect())
}

/// Facts plus up to four range-restricted rules, all weights in {0, 1}.
pub fn random_boolean_program<R: Rng>(rng: &mut R) -> Program {
    let mut clauses = Vec::new();
    let base = herbrand_base();
    let n = rng.gen_range(2..=6);
    for f in base.choose_multiple(rng, n) {
        let w = if rng.gen_bool(0.85) { 1.0 } else { 0.0 };
        clauses.push(Clause::fact(f.clone(), w));
    }
    for _ in 0..rng.gen_range(1..=4) {
        let body: Vec<Term> = (0..rng.gen_range(1..=2)).map(|_| literal(rng, &VARS)).collect();
        let mut bound = Vec::new();
        for b in &body {
            b.vars(&mut bound);
        }
        let names: Vec<&str> = bound.iter().map(|s| s.as_str()).collect();
        let head = literal(rng, &names);
        let w = if rng.gen_bool(0.9) { 1.0 } else { 0.0 };
        clauses.push(Clause::new(head, body, w));
    }
    Program { clauses, ..Program::default() }
}

fn substitute(t: &Term, env: &[(String, Term)]) -> Term {
    match t {
        Term::Var(v) => env.iter().find(|(n, _)| n == v.as_str()).map(|p| p.1.clone()).unwrap_or_else(|| t.clone()),
        _ if t.args().is_empty() => t.clone(),
        _ => Term::app(t.functor().unwrap(), t.args().iter().map(|a| substitute(a, env)).collect()),
    }
}

/// Naive bottom-up evaluation by enumerating every assignment of the
/// clause variables over `CONSTS`. Shares no code with the engine.
pub fn symbolic_closure(p: &Program) -> BTreeSet<Term> {
    let mut known: BTreeSet<Term> = BTreeSet::new();
    loop {
        let mut added = false;
        for c in p.clauses.iter().filter(|c| c.weight > 0.5) {
            let mut vs = Vec::new();
            c.head.vars(&mut vs);
            for b in &c.body {
                b.vars(&mut vs);
            }
            let mut names: Vec<String> = vs.iter().map(|s| s.as_str().to_string()).collect();
            names.sort();
            names.dedup();
            let total = CONSTS.len().pow(names.len() as u32);
            for code in 0..total {
                let mut k = code;
                let env: Vec<(String, Term)> = names
                    .iter()
                    .map(|n| {
                        let c = Term::constant(CONSTS[k % CONSTS.len()]);
                        k /= CONSTS.len();
                        (n.clone(), c)
                    })
                    .collect();
                if c.body.iter().all(|b| known.contains(&substitute(b, &env))) {
                    added |= known.insert(substitute(&c.head, &env));
                }
            }
        }
        if !added {
            return known;
        }
    }
}
