//! Semi-naive bottom-up enumeration of possible atoms and rule instances.
//!
//! The same engine grounds the object program and the meta program. Head
//! positions may carry a pool: compound head patterns are pre-bound from it,
//! head variables left unbound by the body are enumerated from it, and the
//! finished head is checked for membership when the pool is strict.

use std::collections::{HashMap, HashSet};

use super::builtins::{Builtin, BuiltinCtx, Guard};
use crate::lang::{apply, match_ground, Subst, Sym, Term};

#[derive(Clone, Debug)]
pub(crate) enum Lit {
    Idb(Term),
    Builtin(Builtin, Term),
    Guard(Guard, Term),
}

impl Lit {
    fn term(&self) -> &Term {
        match self {
            Lit::Idb(t) | Lit::Builtin(_, t) | Lit::Guard(_, t) => t,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct HeadPool {
    pub pool: usize,
    /// Reject heads whose argument is outside the pool.
    pub strict: bool,
}

#[derive(Clone, Debug)]
pub(crate) struct SatRule {
    pub head: Term,
    pub body: Vec<Lit>,
    pub head_pools: Vec<Option<HeadPool>>,
    pub depth_bound: usize,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Pools {
    items: Vec<Vec<Term>>,
    sets: Vec<HashSet<Term>>,
}

impl Pools {
    pub fn add(&mut self, mut items: Vec<Term>) -> usize {
        items.sort();
        items.dedup();
        self.sets.push(items.iter().cloned().collect());
        self.items.push(items);
        self.items.len() - 1
    }

    pub fn items(&self, id: usize) -> &[Term] {
        &self.items[id]
    }

    pub fn contains(&self, id: usize, t: &Term) -> bool {
        self.sets[id].contains(t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Instance {
    pub rule: usize,
    pub head: Term,
    /// Ground non-guard body literals in source order.
    pub body: Vec<Term>,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Drops {
    pub depth: usize,
    pub pool: usize,
    pub unsafe_vars: usize,
}

#[derive(Debug)]
pub(crate) struct Saturation {
    pub atoms: Vec<Term>,
    pub instances: Vec<Instance>,
    pub builtin_atoms: HashMap<Term, Builtin>,
    pub drops: Vec<Drops>,
    pub max_round: u32,
    /// First round each atom was derived in; the EDB is round 0.
    #[cfg_attr(not(test), allow(dead_code))]
    pub round: HashMap<Term, u32>,
}

#[derive(Default)]
struct Db {
    atoms: Vec<Term>,
    round: HashMap<Term, u32>,
    by_pred: HashMap<(Sym, usize), Vec<usize>>,
}

impl Db {
    fn insert(&mut self, t: Term, round: u32) -> bool {
        if self.round.contains_key(&t) {
            return false;
        }
        let key = t.predicate().expect("atoms are not variables");
        self.by_pred.entry(key).or_default().push(self.atoms.len());
        self.round.insert(t.clone(), round);
        self.atoms.push(t);
        true
    }
}

/// Which rounds a literal may match: `lo <= round <= hi`.
#[derive(Clone, Copy)]
struct Window {
    lo: u32,
    hi: u32,
}

struct Join<'a> {
    rule: &'a SatRule,
    db: &'a Db,
    pools: &'a Pools,
    ctx: &'a BuiltinCtx,
    windows: Vec<Window>,
    delta_lit: Option<usize>,
    head_var_pools: Vec<(Sym, usize)>,
}

struct Sink {
    found: Vec<(Term, Vec<Term>)>,
    drops: Drops,
}

impl<'a> Join<'a> {
    fn run(&self, s: Subst, remaining: &mut Vec<usize>, bound: &mut Vec<Option<Term>>, sink: &mut Sink) {
        // Decidable guards prune first; ready builtins enumerate next.
        for (pos, &li) in remaining.iter().enumerate() {
            match &self.rule.body[li] {
                Lit::Guard(g, t) => {
                    let call = apply(t, &s);
                    match self.ctx.check(*g, &call) {
                        Some(false) => return,
                        Some(true) => {
                            remaining.remove(pos);
                            self.run(s, remaining, bound, sink);
                            remaining.insert(pos, li);
                            return;
                        }
                        None => {}
                    }
                }
                Lit::Builtin(b, t) => {
                    let call = apply(t, &s);
                    if let Some(sols) = self.ctx.solve(*b, &call) {
                        remaining.remove(pos);
                        for g in sols {
                            let mut s2 = s.clone();
                            if match_ground(&call, &g, &mut s2) {
                                bound[li] = Some(g);
                                self.run(s2, remaining, bound, sink);
                            }
                        }
                        bound[li] = None;
                        remaining.insert(pos, li);
                        return;
                    }
                }
                Lit::Idb(_) => {}
            }
        }
        // Next relational literal: the delta literal first, then the most bound.
        let mut pick: Option<(usize, usize)> = None;
        for (pos, &li) in remaining.iter().enumerate() {
            if let Lit::Idb(t) = &self.rule.body[li] {
                let call = apply(t, &s);
                let mut vs = Vec::new();
                call.vars(&mut vs);
                let score = if Some(li) == self.delta_lit { 0 } else { vs.len() + 1 };
                if pick.map(|(_, best)| score < best).unwrap_or(true) {
                    pick = Some((pos, score));
                }
            }
        }
        if let Some((pos, _)) = pick {
            let li = remaining.remove(pos);
            let call = apply(self.rule.body[li].term(), &s);
            let w = self.windows[li];
            let in_window = |r: u32| r >= w.lo && r <= w.hi;
            if call.is_ground() {
                if self.db.round.get(&call).map(|&r| in_window(r)).unwrap_or(false) {
                    bound[li] = Some(call);
                    self.run(s, remaining, bound, sink);
                }
            } else if let Some(ids) = call.predicate().and_then(|k| self.db.by_pred.get(&k)) {
                for &id in ids {
                    let atom = &self.db.atoms[id];
                    if !in_window(self.db.round[atom]) {
                        continue;
                    }
                    let mut s2 = s.clone();
                    if match_ground(&call, atom, &mut s2) {
                        bound[li] = Some(atom.clone());
                        self.run(s2, remaining, bound, sink);
                    }
                }
            }
            bound[li] = None;
            remaining.insert(pos, li);
            return;
        }
        // Only uncallable builtins or guards remain, or nothing remains:
        // enumerate an unbound pooled head variable.
        for (v, pool) in &self.head_var_pools {
            if matches!(apply(&Term::Var(*v), &s), Term::Var(_)) {
                for item in self.pools.items(*pool) {
                    let mut s2 = s.clone();
                    s2.bind(*v, item.clone());
                    self.run(s2, remaining, bound, sink);
                }
                return;
            }
        }
        if !remaining.is_empty() {
            sink.drops.unsafe_vars += 1;
            return;
        }
        let head = apply(&self.rule.head, &s);
        if !head.is_ground() {
            sink.drops.unsafe_vars += 1;
            return;
        }
        if head.arg_depth() > self.rule.depth_bound {
            sink.drops.depth += 1;
            return;
        }
        for (a, hp) in head.args().iter().zip(&self.rule.head_pools) {
            if let Some(hp) = hp {
                if hp.strict && !self.pools.contains(hp.pool, a) {
                    sink.drops.pool += 1;
                    return;
                }
            }
        }
        let body: Vec<Term> = self
            .rule
            .body
            .iter()
            .zip(bound.iter())
            .filter(|(l, _)| !matches!(l, Lit::Guard(..)))
            .map(|(_, b)| b.clone().expect("all body literals bound"))
            .collect();
        sink.found.push((head, body));
    }
}

/// Substitutions pre-binding compound head patterns from their strict pools.
fn prebind(rule: &SatRule, pools: &Pools) -> Vec<Subst> {
    let mut out = vec![Subst::new()];
    for (a, hp) in rule.head.args().iter().zip(&rule.head_pools) {
        let Some(hp) = hp else { continue };
        if !hp.strict || a.is_var() || a.is_ground() {
            continue;
        }
        let mut next = Vec::new();
        for s in &out {
            let pat = apply(a, s);
            for item in pools.items(hp.pool) {
                let mut s2 = s.clone();
                if match_ground(&pat, item, &mut s2) {
                    next.push(s2);
                }
            }
        }
        out = next;
    }
    out
}

fn head_var_pools(rule: &SatRule) -> Vec<(Sym, usize)> {
    rule.head
        .args()
        .iter()
        .zip(&rule.head_pools)
        .filter_map(|(a, hp)| match (a, hp) {
            (Term::Var(v), Some(hp)) => Some((*v, hp.pool)),
            _ => None,
        })
        .collect()
}

/// Runs rules to a fixpoint from `edb` (round 0). Fails with the atom count
/// when more than `max_atoms` atoms are produced.
pub(crate) fn saturate(
    rules: &[SatRule],
    edb: &[Term],
    pools: &Pools,
    ctx: &BuiltinCtx,
    max_atoms: usize,
) -> Result<Saturation, usize> {
    let mut db = Db::default();
    for t in edb {
        db.insert(t.clone(), 0);
    }
    let mut seen: HashSet<Instance> = HashSet::new();
    let mut instances = Vec::new();
    let mut builtin_atoms: HashMap<Term, Builtin> = HashMap::new();
    let mut drops = vec![Drops::default(); rules.len()];
    let prebound: Vec<Vec<Subst>> = rules.iter().map(|r| prebind(r, pools)).collect();
    let hvp: Vec<Vec<(Sym, usize)>> = rules.iter().map(head_var_pools).collect();
    let mut max_round = 0;
    let mut k: u32 = 1;
    loop {
        let mut new_heads: Vec<Term> = Vec::new();
        for (ri, rule) in rules.iter().enumerate() {
            let idb: Vec<usize> =
                rule.body.iter().enumerate().filter(|(_, l)| matches!(l, Lit::Idb(_))).map(|(i, _)| i).collect();
            let mut passes: Vec<(Option<usize>, Vec<Window>)> = Vec::new();
            if idb.is_empty() {
                if k == 1 {
                    passes.push((None, vec![Window { lo: 0, hi: 0 }; rule.body.len()]));
                }
            } else {
                for &p in &idb {
                    let windows = (0..rule.body.len())
                        .map(|q| {
                            if q < p {
                                if k >= 2 { Window { lo: 0, hi: k - 2 } } else { Window { lo: 1, hi: 0 } }
                            } else if q == p {
                                Window { lo: k - 1, hi: k - 1 }
                            } else {
                                Window { lo: 0, hi: k - 1 }
                            }
                        })
                        .collect();
                    passes.push((Some(p), windows));
                }
            }
            for (delta_lit, windows) in passes {
                let join = Join {
                    rule,
                    db: &db,
                    pools,
                    ctx,
                    windows,
                    delta_lit,
                    head_var_pools: hvp[ri].clone(),
                };
                let mut sink = Sink { found: Vec::new(), drops: Drops::default() };
                for s in &prebound[ri] {
                    let mut remaining: Vec<usize> = (0..rule.body.len()).collect();
                    let mut bound = vec![None; rule.body.len()];
                    join.run(s.clone(), &mut remaining, &mut bound, &mut sink);
                }
                drops[ri].depth += sink.drops.depth;
                drops[ri].pool += sink.drops.pool;
                drops[ri].unsafe_vars += sink.drops.unsafe_vars;
                for (head, body) in sink.found {
                    let inst = Instance { rule: ri, head, body };
                    if seen.contains(&inst) {
                        continue;
                    }
                    for (lit, g) in rule.body.iter().filter(|l| !matches!(l, Lit::Guard(..))).zip(&inst.body) {
                        if let Lit::Builtin(b, _) = lit {
                            builtin_atoms.entry(g.clone()).or_insert(*b);
                        }
                    }
                    new_heads.push(inst.head.clone());
                    seen.insert(inst.clone());
                    instances.push(inst);
                }
            }
        }
        let mut grew = false;
        for h in new_heads {
            if db.insert(h, k) {
                grew = true;
                max_round = k;
            }
        }
        if db.atoms.len() + builtin_atoms.len() > max_atoms {
            return Err(db.atoms.len() + builtin_atoms.len());
        }
        if !grew {
            break;
        }
        k += 1;
    }
    Ok(Saturation { atoms: db.atoms, instances, builtin_atoms, drops, max_round, round: db.round })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn rule(head: &str, body: &[&str]) -> SatRule {
        let head = t(head);
        let n = head.args().len();
        SatRule { head, body: body.iter().map(|b| Lit::Idb(t(b))).collect(), head_pools: vec![None; n], depth_bound: 8 }
    }

    #[test]
    fn transitive_closure_rounds() {
        let rules = vec![rule("reach(X,Y)", &["edge(X,Y)"]), rule("reach(X,Z)", &["edge(X,Y)", "reach(Y,Z)"])];
        let edb = vec![t("edge(a,b)"), t("edge(b,c)"), t("edge(c,d)")];
        let sat = saturate(&rules, &edb, &Pools::default(), &BuiltinCtx::default(), 1000).unwrap();
        assert_eq!(sat.round[&t("reach(a,b)")], 1);
        assert_eq!(sat.round[&t("reach(a,d)")], 3);
        assert_eq!(sat.max_round, 3);
        assert_eq!(sat.instances.len(), 6);
    }

    #[test]
    fn head_variables_come_from_pools() {
        let mut pools = Pools::default();
        let p = pools.add(vec![t("a"), t("b")]);
        let mut r = rule("path(A,A,[])", &[]);
        r.head_pools = vec![Some(HeadPool { pool: p, strict: false }), None, None];
        let sat = saturate(&[r], &[], &pools, &BuiltinCtx::default(), 1000).unwrap();
        assert_eq!(sat.atoms, vec![t("path(a,a,[])"), t("path(b,b,[])")]);
    }

    #[test]
    fn explosion_guard_trips() {
        let rules = vec![rule("n(succ(X))", &["n(X)"])];
        let err = saturate(&rules, &[t("n(0)")], &Pools::default(), &BuiltinCtx::default(), 5).unwrap_err();
        assert!(err > 5);
    }
}
