//! Grounding: the finite atom table and one index tensor per meta-rule.
//!
//! Object clauses are saturated first to obtain the possible object atoms and
//! their ground `clause/2` liftings. The meta program is then saturated over
//! those facts. Typed meta positions draw from finite pools:
//!
//! | dtype    | pool                                                       |
//! |----------|------------------------------------------------------------|
//! | `goal`   | `true`, object atoms, conjunction suffixes of ground bodies |
//! | `atom`   | object atoms                                               |
//! | `proofs` | `goal` plus seeded proof lists and their suffixes          |
//! | `nat`    | Peano numerals `0..=max_nat`                                |
//! | `site`   | intervention sites                                         |

pub mod builtins;
mod saturate;
pub mod table;
pub mod tensor;

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

pub use builtins::{Builtin, BuiltinCtx, Grid, Guard};
use saturate::{saturate, HeadPool, Lit, Pools, SatRule};
pub use table::{GroundAtomTable, BOT, TOP};
pub use tensor::IndexTensor;

use crate::lang::term::names;
use crate::lang::{render_clause, Clause, Program, Sym, Term, DEFAULT_DTYPE};
use crate::meta::{MetaFactSet, MetaProgram, MetaRule};

/// Environment variable overriding [`GroundingConfig::max_atoms`].
pub const MAX_ATOMS_ENV: &str = "NEMESYS_MAX_GROUND_ATOMS";
pub const DEFAULT_MAX_ATOMS: usize = 250_000;
/// Upper bound for the derived default step count.
pub const T_CAP: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroundingConfig {
    /// Maximum argument depth of object atoms.
    pub object_depth: usize,
    /// Maximum argument depth of meta atoms.
    pub meta_depth: usize,
    /// Largest numeral in the `nat` pool.
    pub max_nat: u64,
    pub s_cap: Option<usize>,
    pub l_cap: Option<usize>,
    pub max_atoms: usize,
    /// Object predicates whose typed cross product exceeds this are not
    /// enumerated into the table.
    pub herbrand_limit: usize,
}

impl Default for GroundingConfig {
    fn default() -> Self {
        let max_atoms = std::env::var(MAX_ATOMS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_ATOMS);
        GroundingConfig {
            object_depth: 4,
            meta_depth: 12,
            max_nat: 3,
            s_cap: None,
            l_cap: None,
            max_atoms,
            herbrand_limit: 10_000,
        }
    }
}

/// Driver-supplied additions to the meta-level facts.
#[derive(Clone, Debug, Default)]
pub struct GroundExtras {
    /// Extra meta atoms with initial valuations.
    pub seeds: Vec<(Term, f64)>,
    /// Extra members of the `proofs` pool.
    pub proof_seeds: Vec<Term>,
    /// Intervention sites with their `do` valuations.
    pub do_sites: Vec<(Term, f64)>,
    pub grid: Option<Grid>,
}

#[derive(Debug, thiserror::Error)]
pub enum GroundError {
    #[error("grounding explosion at the {stage} level: {atoms} atoms exceed the ceiling of {limit} (raise {MAX_ATOMS_ENV} or lower the depth bounds)")]
    Explosion { stage: &'static str, atoms: usize, limit: usize },
    #[error("datatype '{0}' has an empty constant pool")]
    EmptyPool(String),
    #[error("rule {rule} needs {found} {what} but the cap is {cap}")]
    Cap { rule: usize, what: &'static str, found: usize, cap: usize },
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RuleReport {
    pub rule: String,
    pub groundings: usize,
    pub s: usize,
    pub l: usize,
    pub dropped_depth: usize,
    pub dropped_pool: usize,
    pub dropped_unsafe: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct GroundingReport {
    pub atoms: usize,
    pub object_atoms: usize,
    pub herbrand_object_atoms: usize,
    pub ground_clauses: usize,
    pub object_dropped: usize,
    pub rounds: u32,
    pub default_t: usize,
    pub per_predicate: BTreeMap<String, usize>,
    pub rules: Vec<RuleReport>,
    pub support: Vec<RuleReport>,
}

/// Everything the reasoner needs from grounding.
#[derive(Clone, Debug)]
pub struct Grounding {
    pub table: GroundAtomTable,
    pub rules: Vec<Clause>,
    pub support: Vec<Clause>,
    pub tensors: Vec<IndexTensor>,
    pub support_tensors: Vec<IndexTensor>,
    /// Initial valuation: ⊤, facts, builtins and seeds.
    pub v0: Vec<f64>,
    /// Table index of `do(site)` for each site that occurs.
    pub do_index: Vec<(Term, usize)>,
    /// Possible object atoms, sorted.
    pub object_atoms: Vec<Term>,
    /// Ground object clauses `(head, body, weight)`, bodies `true` for facts.
    pub ground_clauses: Vec<(Term, Term, f64)>,
    pub ctx: BuiltinCtx,
    pub default_t: usize,
    pub report: GroundingReport,
}

impl Grounding {
    /// Live instances of listing rule `rule`: `(head, substitution, body)`.
    pub fn groundings(&self, rule: usize) -> Vec<(usize, usize, Vec<usize>)> {
        tensor_groundings(&self.tensors[rule])
    }

    pub fn index(&self, atom: &Term) -> Option<usize> {
        self.table.get(atom)
    }

    pub fn c(&self) -> usize {
        self.tensors.len()
    }
}

fn tensor_groundings(t: &IndexTensor) -> Vec<(usize, usize, Vec<usize>)> {
    let mut out = Vec::new();
    for j in 0..t.g {
        for k in 0..t.s {
            if t.get(j, k, 0) == BOT {
                continue;
            }
            out.push((j, k, (0..t.l).map(|p| t.get(j, k, p)).collect()));
        }
    }
    out
}

fn object_pool(p: &Program, dt: Sym, defaults: &[Term]) -> Result<Vec<Term>, GroundError> {
    if dt.as_str() == DEFAULT_DTYPE {
        return Ok(defaults.to_vec());
    }
    match p.dtypes.get(&dt) {
        Some(items) if !items.is_empty() => Ok(items.clone()),
        _ => Err(GroundError::EmptyPool(dt.as_str().to_string())),
    }
}

/// Typed cross product of every object predicate with finite pools.
fn herbrand_atoms(p: &Program, defaults: &[Term], limit: usize) -> Result<Vec<Term>, GroundError> {
    let mut out = Vec::new();
    for (name, arity) in p.predicates() {
        let mut pools = Vec::new();
        for pos in 0..arity {
            let dt = p.dtype_of(name, arity, pos).unwrap_or(Sym::new(DEFAULT_DTYPE));
            pools.push(object_pool(p, dt, defaults)?);
        }
        let size = pools.iter().map(|x| x.len()).product::<usize>();
        if size > limit || (arity > 0 && size == 0) {
            continue;
        }
        let mut combos: Vec<Vec<Term>> = vec![Vec::new()];
        for pool in &pools {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    pool.iter().map(move |x| {
                        let mut c2 = c.clone();
                        c2.push(x.clone());
                        c2
                    })
                })
                .collect();
        }
        out.extend(combos.into_iter().map(|args| Term::app(name, args)));
    }
    Ok(out)
}

/// Every term buildable from `base` with the given functors whose depth is
/// at most `depth`, sorted.
pub fn terms_up_to_depth(base: &[Term], functors: &[(&str, usize)], depth: usize) -> Vec<Term> {
    let mut all: Vec<Term> = base.to_vec();
    for _ in 0..depth {
        let mut next = all.clone();
        for (f, n) in functors {
            let mut combos: Vec<Vec<Term>> = vec![Vec::new()];
            for _ in 0..*n {
                combos = combos
                    .into_iter()
                    .flat_map(|c| {
                        all.iter().map(move |x| {
                            let mut c2 = c.clone();
                            c2.push(x.clone());
                            c2
                        })
                    })
                    .collect();
            }
            next.extend(combos.into_iter().map(|args| Term::compound(f, args)));
        }
        next.sort();
        next.dedup();
        all = next;
    }
    all
}

/// All right-nested conjunction suffixes of `t`, including `t`.
fn conj_suffixes(t: &Term, out: &mut Vec<Term>) {
    let mut cur = t;
    loop {
        out.push(cur.clone());
        if cur.is_functor(names::CONJ, 2) {
            cur = &cur.args()[1];
        } else {
            break;
        }
    }
}

fn classify_body(body: &[Term], guards: &[Term]) -> Vec<Lit> {
    let mut lits: Vec<Lit> = body
        .iter()
        .map(|b| {
            let key = b.predicate().expect("body literal is an atom");
            match builtins::classify(key) {
                (Some(bi), _) => Lit::Builtin(bi, b.clone()),
                (None, Some(g)) => Lit::Guard(g, b.clone()),
                _ => Lit::Idb(b.clone()),
            }
        })
        .collect();
    for g in guards {
        let key = g.predicate().expect("guard is an atom");
        if let (_, Some(kind)) = builtins::classify(key) {
            lits.push(Lit::Guard(kind, g.clone()));
        }
    }
    lits
}

fn rule_report(clause: &Clause, t: &IndexTensor, drops: &saturate::Drops) -> RuleReport {
    RuleReport {
        rule: render_clause(clause),
        groundings: tensor_groundings(t).len(),
        s: t.s,
        l: t.l,
        dropped_depth: drops.depth,
        dropped_pool: drops.pool,
        dropped_unsafe: drops.unsafe_vars,
    }
}

/// Grounds a meta program over a lifted object program.
pub fn build(mp: &MetaProgram, mf: &MetaFactSet, cfg: &GroundingConfig, extras: &GroundExtras) -> Result<Grounding, GroundError> {
    let prog = &mf.object;
    let defaults: Vec<Term> = prog.constants().into_iter().filter(|c| *c != Term::nil()).collect();

    // Object level.
    let mut opools = Pools::default();
    let mut orules = Vec::new();
    for c in &prog.clauses {
        let (name, arity) = c.head.predicate().expect("clause head is an atom");
        let decl = prog.decl(name, arity);
        let mut head_pools = Vec::new();
        for pos in 0..arity {
            let dt = decl.and_then(|d| d.dtypes.get(pos).copied()).unwrap_or(Sym::new(DEFAULT_DTYPE));
            let items = object_pool(prog, dt, &defaults)?;
            let strict = decl.map(|d| !d.auto).unwrap_or(false);
            head_pools.push(Some(HeadPool { pool: opools.add(items), strict }));
        }
        orules.push(SatRule {
            head: c.head.clone(),
            body: c.body.iter().map(|b| Lit::Idb(b.clone())).collect(),
            head_pools,
            depth_bound: cfg.object_depth,
        });
    }
    let osat = saturate(&orules, &[], &opools, &BuiltinCtx::default(), cfg.max_atoms)
        .map_err(|atoms| GroundError::Explosion { stage: "object", atoms, limit: cfg.max_atoms })?;
    let object_dropped: usize = osat.drops.iter().map(|d| d.depth + d.pool + d.unsafe_vars).sum();
    let mut ground_clauses: Vec<(Term, Term, f64)> = osat
        .instances
        .iter()
        .map(|i| (i.head.clone(), Term::conj_of(&i.body), prog.clauses[i.rule].weight))
        .collect();
    ground_clauses.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
    let mut object_atoms = osat.atoms.clone();
    object_atoms.sort();
    let herbrand = herbrand_atoms(prog, &defaults, cfg.herbrand_limit)?;

    let ctx = BuiltinCtx::new(&ground_clauses, &extras.do_sites, extras.grid);

    // Meta pools.
    let mut goal_items = vec![Term::truth()];
    goal_items.extend(object_atoms.iter().cloned());
    for (_, b, _) in &ground_clauses {
        conj_suffixes(b, &mut goal_items);
    }
    let mut atom_items = object_atoms.clone();
    atom_items.extend(herbrand.iter().cloned());
    let mut proof_items = goal_items.clone();
    for p in &extras.proof_seeds {
        conj_suffixes(p, &mut proof_items);
    }
    let mut mpools = Pools::default();
    let goal_pool = mpools.add(goal_items);
    let atom_pool = mpools.add(atom_items);
    let proofs_pool = mpools.add(proof_items);
    let nat_pool = mpools.add((0..=cfg.max_nat).map(Term::peano).collect());
    let site_pool = mpools.add(extras.do_sites.iter().map(|(s, _)| s.clone()).collect());
    let pool_for = |dt: Sym| -> Option<usize> {
        match dt.as_str() {
            "goal" => Some(goal_pool),
            "atom" => Some(atom_pool),
            "proofs" => Some(proofs_pool),
            "nat" => Some(nat_pool),
            "site" => Some(site_pool),
            _ => None,
        }
    };

    let all_rules: Vec<&MetaRule> = mp.rules.iter().chain(mp.support.iter()).collect();
    let mrules: Vec<SatRule> = all_rules
        .iter()
        .map(|r| {
            let head = r.clause.head.clone();
            let key = head.predicate().expect("meta head is an atom");
            let head_pools = (0..key.1)
                .map(|pos| mp.dtype_of(key, pos).and_then(pool_for).map(|pool| HeadPool { pool, strict: true }))
                .collect();
            SatRule { head, body: classify_body(&r.clause.body, &r.guards), head_pools, depth_bound: cfg.meta_depth }
        })
        .collect();

    let mut edb: Vec<Term> =
        ground_clauses.iter().map(|(h, b, _)| Term::compound("clause", vec![h.clone(), b.clone()])).collect();
    edb.extend(extras.seeds.iter().map(|(t, _)| t.clone()));
    let msat = saturate(&mrules, &edb, &mpools, &ctx, cfg.max_atoms)
        .map_err(|atoms| GroundError::Explosion { stage: "meta", atoms, limit: cfg.max_atoms })?;

    // Table.
    let mut all: Vec<Term> = herbrand.clone();
    all.extend(object_atoms.iter().cloned());
    all.extend(msat.atoms.iter().cloned());
    all.extend(msat.builtin_atoms.keys().cloned());
    let table = GroundAtomTable::from_atoms(all);
    if table.len() > cfg.max_atoms {
        return Err(GroundError::Explosion { stage: "table", atoms: table.len(), limit: cfg.max_atoms });
    }
    let g = table.len();

    // Tensors.
    let mut per_rule: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); all_rules.len()];
    for inst in &msat.instances {
        let h = table.get(&inst.head).expect("heads are tabled");
        let body = inst.body.iter().map(|b| table.get(b).expect("body atoms are tabled")).collect();
        per_rule[inst.rule].push((h, body));
    }
    let mut tensors = Vec::new();
    for (ri, mut gs) in per_rule.into_iter().enumerate() {
        gs.sort();
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for (h, _) in &gs {
            *counts.entry(*h).or_default() += 1;
        }
        let s = counts.values().copied().max().unwrap_or(1);
        let l = mrules[ri].body.iter().filter(|l| !matches!(l, Lit::Guard(..))).count().max(1);
        if let Some(cap) = cfg.s_cap {
            if s > cap {
                return Err(GroundError::Cap { rule: ri, what: "substitutions", found: s, cap });
            }
        }
        if let Some(cap) = cfg.l_cap {
            if l > cap {
                return Err(GroundError::Cap { rule: ri, what: "body atoms", found: l, cap });
            }
        }
        tensors.push(IndexTensor::build(ri, g, s, l, &gs));
    }
    let support_tensors = tensors.split_off(mp.rules.len());

    // Initial valuation.
    let mut v0 = vec![0.0f64; g];
    v0[TOP] = 1.0;
    for (h, b, w) in &ground_clauses {
        let i = table.get(&Term::compound("clause", vec![h.clone(), b.clone()])).expect("clause facts are tabled");
        v0[i] = v0[i].max(*w);
    }
    for (atom, b) in &msat.builtin_atoms {
        v0[table.get(atom).expect("builtin atoms are tabled")] = ctx.value(*b, atom);
    }
    for (atom, w) in &extras.seeds {
        if let Some(i) = table.get(atom) {
            v0[i] = *w;
        }
    }
    let do_index = extras
        .do_sites
        .iter()
        .filter_map(|(s, _)| table.get(&Term::compound("do", vec![s.clone()])).map(|i| (s.clone(), i)))
        .collect();

    let default_t = (2 + msat.max_round as usize).min(T_CAP);
    let mut per_predicate = BTreeMap::new();
    for a in table.atoms().iter().skip(2) {
        if let Some((n, ar)) = a.predicate() {
            *per_predicate.entry(format!("{n}/{ar}")).or_insert(0) += 1;
        }
    }
    let rules: Vec<Clause> = mp.rules.iter().map(|r| r.clause.clone()).collect();
    let support: Vec<Clause> = mp.support.iter().map(|r| r.clause.clone()).collect();
    let report = GroundingReport {
        atoms: g,
        object_atoms: object_atoms.len(),
        herbrand_object_atoms: herbrand.len(),
        ground_clauses: ground_clauses.len(),
        object_dropped,
        rounds: msat.max_round,
        default_t,
        per_predicate,
        rules: rules.iter().zip(&tensors).zip(&msat.drops).map(|((c, t), d)| rule_report(c, t, d)).collect(),
        support: support
            .iter()
            .zip(&support_tensors)
            .zip(&msat.drops[mp.rules.len()..])
            .map(|((c, t), d)| rule_report(c, t, d))
            .collect(),
    };
    Ok(Grounding {
        table,
        rules,
        support,
        tensors,
        support_tensors,
        v0,
        do_index,
        object_atoms,
        ground_clauses,
        ctx,
        default_t,
        report,
    })
}
