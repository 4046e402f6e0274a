//! Engine-supplied predicates. Each builtin either enumerates the ground
//! instances of a partially bound call or reports that it is not yet callable.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::lang::term::names;
use crate::lang::{Sym, Term};

/// Relevance assigned by `norelate/2` to unrelated atom pairs.
pub const NORELATE_EPS: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    AssertProbs,
    Do,
    Norelate,
    Move,
    Equal,
    ConditionMet,
    ChangeState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Guard {
    Distinct,
    Indep,
}

impl Builtin {
    pub fn from_key(name: &str, arity: usize) -> Option<Builtin> {
        Some(match (name, arity) {
            ("assert_probs", 1) => Builtin::AssertProbs,
            ("do", 1) => Builtin::Do,
            ("norelate", 2) => Builtin::Norelate,
            ("move", 3) => Builtin::Move,
            ("equal", 2) => Builtin::Equal,
            ("condition_met", 2) => Builtin::ConditionMet,
            ("change_state", 2) => Builtin::ChangeState,
            _ => return None,
        })
    }
}

impl Guard {
    pub fn from_key(name: &str, arity: usize) -> Option<Guard> {
        match (name, arity) {
            ("distinct", 2) => Some(Guard::Distinct),
            ("indep", 2) => Some(Guard::Indep),
            _ => None,
        }
    }
}

/// Grid bounds for planner states `pos_hori(O,X)` / `pos_vert(O,Y)`,
/// coordinates ranging over `1..=width` and `1..=height`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub width: u64,
    pub height: u64,
}

/// Data the builtins read: the lifted object program and driver settings.
#[derive(Clone, Debug, Default)]
pub struct BuiltinCtx {
    clause_weight: HashMap<(Term, Term), f64>,
    clauses_by_head: HashMap<Term, Vec<Term>>,
    clauses: Vec<(Term, Term)>,
    fact_weight: HashMap<Term, f64>,
    facts: Vec<Term>,
    ancestors: HashMap<Term, HashSet<Term>>,
    do_sites: Vec<(Term, f64)>,
    pub grid: Option<Grid>,
    pub eps: f64,
}

impl BuiltinCtx {
    /// `clauses` are ground `(head, body)` pairs with weights; bodies are
    /// `true` for facts.
    pub fn new(clauses: &[(Term, Term, f64)], do_sites: &[(Term, f64)], grid: Option<Grid>) -> BuiltinCtx {
        let mut ctx = BuiltinCtx { grid, eps: NORELATE_EPS, do_sites: do_sites.to_vec(), ..Default::default() };
        let truth = Term::truth();
        let mut parents: HashMap<Term, BTreeSet<Term>> = HashMap::new();
        for (h, b, w) in clauses {
            let key = (h.clone(), b.clone());
            match ctx.clause_weight.get_mut(&key) {
                Some(old) => *old = old.max(*w),
                None => {
                    ctx.clause_weight.insert(key, *w);
                    ctx.clauses.push((h.clone(), b.clone()));
                    ctx.clauses_by_head.entry(h.clone()).or_default().push(b.clone());
                }
            }
            if *b == truth {
                match ctx.fact_weight.get_mut(h) {
                    Some(old) => *old = old.max(*w),
                    None => {
                        ctx.fact_weight.insert(h.clone(), *w);
                        ctx.facts.push(h.clone());
                    }
                }
            } else {
                parents.entry(h.clone()).or_default().extend(b.conjuncts());
            }
        }
        for start in parents.keys() {
            let mut seen = HashSet::new();
            let mut stack: Vec<&Term> = parents[start].iter().collect();
            while let Some(a) = stack.pop() {
                if seen.insert(a.clone()) {
                    if let Some(ps) = parents.get(a) {
                        stack.extend(ps.iter());
                    }
                }
            }
            ctx.ancestors.insert(start.clone(), seen);
        }
        ctx
    }

    pub fn fact_weight(&self, atom: &Term) -> Option<f64> {
        self.fact_weight.get(atom).copied()
    }

    pub fn do_sites(&self) -> &[(Term, f64)] {
        &self.do_sites
    }

    /// True when `atom` is derived, directly or transitively, from `site`.
    pub fn depends_on(&self, atom: &Term, site: &Term) -> bool {
        self.ancestors.get(atom).map(|s| s.contains(site)).unwrap_or(false)
    }

    /// Atoms that lie on a dependency cycle.
    pub fn cyclic_atoms(&self) -> Vec<Term> {
        let mut out: Vec<Term> =
            self.ancestors.iter().filter(|(a, anc)| anc.contains(*a)).map(|(a, _)| a.clone()).collect();
        out.sort();
        out
    }

    /// Weight of an object-level term for `assert_probs`: the clause weight of
    /// a ground neck, the product over a conjunction, or a fact weight.
    pub fn assert_weight(&self, t: &Term) -> Option<f64> {
        if *t == Term::truth() {
            return Some(1.0);
        }
        if t.is_functor(names::NECK, 2) {
            let a = t.args();
            return self.clause_weight.get(&(a[0].clone(), a[1].clone())).copied();
        }
        if t.is_functor(names::CONJ, 2) {
            let mut p = 1.0;
            for c in t.conjuncts() {
                p *= self.fact_weight(&c)?;
            }
            return Some(p);
        }
        self.fact_weight(t)
    }

    /// Ground instances of a builtin call, or `None` when the call is not
    /// sufficiently instantiated to enumerate.
    pub fn solve(&self, b: Builtin, call: &Term) -> Option<Vec<Term>> {
        let args = call.args();
        let f = call.functor().expect("builtin call is compound");
        let rebuild = |xs: Vec<Term>| Term::app(f, xs);
        match b {
            Builtin::AssertProbs => {
                let x = &args[0];
                if x.is_ground() {
                    return Some(if self.assert_weight(x).is_some() { vec![call.clone()] } else { vec![] });
                }
                if x.is_functor(names::NECK, 2) {
                    let (h, body) = (&x.args()[0], &x.args()[1]);
                    let cands: Vec<(Term, Term)> = if h.is_ground() {
                        self.clauses_by_head
                            .get(h)
                            .map(|bs| bs.iter().map(|b| (h.clone(), b.clone())).collect())
                            .unwrap_or_default()
                    } else {
                        self.clauses.clone()
                    };
                    let out = cands
                        .into_iter()
                        .filter(|(ch, cb)| matches(h, ch) && matches(body, cb))
                        .map(|(ch, cb)| rebuild(vec![Term::neck(ch, cb)]))
                        .collect();
                    return Some(out);
                }
                if x.is_functor(names::CONJ, 2) {
                    return None;
                }
                Some(self.facts.iter().filter(|a| matches(x, a)).map(|a| rebuild(vec![a.clone()])).collect())
            }
            Builtin::Do => {
                let x = &args[0];
                Some(self.do_sites.iter().filter(|(s, _)| matches(x, s)).map(|(s, _)| rebuild(vec![s.clone()])).collect())
            }
            Builtin::Norelate => {
                if !(args[0].is_ground() && args[1].is_ground()) {
                    return None;
                }
                Some(if args[0] != args[1] { vec![call.clone()] } else { vec![] })
            }
            Builtin::Equal => match (args[0].is_ground(), args[1].is_ground()) {
                (true, true) => Some(if args[0] == args[1] { vec![call.clone()] } else { vec![] }),
                (true, false) if matches(&args[1], &args[0]) => Some(vec![rebuild(vec![args[0].clone(), args[0].clone()])]),
                (false, true) if matches(&args[0], &args[1]) => Some(vec![rebuild(vec![args[1].clone(), args[1].clone()])]),
                (true, false) | (false, true) => Some(vec![]),
                _ => None,
            },
            Builtin::ConditionMet => {
                let known = if args[0].is_ground() { &args[0] } else if args[1].is_ground() { &args[1] } else { return None };
                let ok = self.state_in_bounds(known)
                    && matches(&args[0], known)
                    && matches(&args[1], known);
                Some(if ok { vec![rebuild(vec![known.clone(), known.clone()])] } else { vec![] })
            }
            Builtin::ChangeState => {
                if args[0].is_ground() {
                    let out = self
                        .neighbours(&args[0])
                        .into_iter()
                        .filter(|(_, n)| self.state_in_bounds(n) && matches(&args[1], n))
                        .map(|(_, n)| rebuild(vec![args[0].clone(), n]))
                        .collect();
                    Some(out)
                } else if args[1].is_ground() {
                    let out = self
                        .neighbours(&args[1])
                        .into_iter()
                        .filter(|(_, n)| self.state_in_bounds(n) && self.state_in_bounds(&args[1]) && matches(&args[0], n))
                        .map(|(_, n)| rebuild(vec![n, args[1].clone()]))
                        .collect();
                    Some(out)
                } else {
                    None
                }
            }
            Builtin::Move => {
                if args[1].is_ground() {
                    let out = self
                        .successors(&args[1])
                        .into_iter()
                        .filter(|(a, n)| matches(&args[0], a) && matches(&args[2], n))
                        .map(|(a, n)| rebuild(vec![a, args[1].clone(), n]))
                        .collect();
                    Some(out)
                } else if args[2].is_ground() {
                    let out = self
                        .predecessors(&args[2])
                        .into_iter()
                        .filter(|(a, o)| matches(&args[0], a) && matches(&args[1], o))
                        .map(|(a, o)| rebuild(vec![a, o, args[2].clone()]))
                        .collect();
                    Some(out)
                } else {
                    None
                }
            }
        }
    }

    /// Valuation of a ground builtin atom.
    pub fn value(&self, b: Builtin, atom: &Term) -> f64 {
        match b {
            Builtin::AssertProbs => self.assert_weight(&atom.args()[0]).unwrap_or(0.0),
            Builtin::Do => self.do_sites.iter().find(|(s, _)| *s == atom.args()[0]).map(|(_, v)| *v).unwrap_or(0.0),
            Builtin::Norelate => self.eps,
            _ => 1.0,
        }
    }

    /// `None` when the guard cannot be decided yet.
    pub fn check(&self, g: Guard, call: &Term) -> Option<bool> {
        let a = call.args();
        if !(a[0].is_ground() && a[1].is_ground()) {
            return None;
        }
        Some(match g {
            Guard::Distinct => a[0] != a[1],
            Guard::Indep => a[0].conjuncts().iter().all(|c| *c != a[1] && !self.depends_on(c, &a[1])),
        })
    }

    fn state_in_bounds(&self, s: &Term) -> bool {
        let Some((axis, _, coord)) = decode_state(s) else { return false };
        match self.grid {
            None => coord >= 1,
            Some(g) => {
                let max = if axis == Axis::Hori { g.width } else { g.height };
                (1..=max).contains(&coord)
            }
        }
    }

    /// One-step moves from a state: `(action, next state)`.
    fn successors(&self, s: &Term) -> Vec<(Term, Term)> {
        let Some((axis, obj, c)) = decode_state(s) else { return vec![] };
        let (inc, dec) = axis.actions();
        let mut out = vec![(Term::constant(inc), encode_state(axis, &obj, c + 1))];
        if c > 0 {
            out.push((Term::constant(dec), encode_state(axis, &obj, c - 1)));
        }
        out
    }

    fn predecessors(&self, s: &Term) -> Vec<(Term, Term)> {
        let Some((axis, obj, c)) = decode_state(s) else { return vec![] };
        let (inc, dec) = axis.actions();
        let mut out = vec![(Term::constant(dec), encode_state(axis, &obj, c + 1))];
        if c > 0 {
            out.push((Term::constant(inc), encode_state(axis, &obj, c - 1)));
        }
        out
    }

    fn neighbours(&self, s: &Term) -> Vec<(Term, Term)> {
        self.successors(s)
    }
}

fn matches(pattern: &Term, ground: &Term) -> bool {
    let mut s = crate::lang::Subst::new();
    crate::lang::match_ground(pattern, ground, &mut s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Hori,
    Vert,
}

impl Axis {
    pub fn functor(self) -> &'static str {
        match self {
            Axis::Hori => "pos_hori",
            Axis::Vert => "pos_vert",
        }
    }

    /// (increasing action, decreasing action). `move_up` increases y.
    pub fn actions(self) -> (&'static str, &'static str) {
        match self {
            Axis::Hori => ("move_right", "move_left"),
            Axis::Vert => ("move_up", "move_down"),
        }
    }
}

pub fn encode_state(axis: Axis, obj: &Term, coord: u64) -> Term {
    Term::compound(axis.functor(), vec![obj.clone(), Term::peano(coord)])
}

pub fn decode_state(s: &Term) -> Option<(Axis, Term, u64)> {
    let axis = match s.functor()?.as_str() {
        "pos_hori" => Axis::Hori,
        "pos_vert" => Axis::Vert,
        _ => return None,
    };
    let a = s.args();
    if a.len() != 2 {
        return None;
    }
    Some((axis, a[0].clone(), a[1].as_peano()?))
}

/// Builtin keyed by predicate, for classifying rule literals.
pub fn classify(key: (Sym, usize)) -> (Option<Builtin>, Option<Guard>) {
    (Builtin::from_key(key.0.as_str(), key.1), Guard::from_key(key.0.as_str(), key.1))
}
