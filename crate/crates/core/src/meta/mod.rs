//! Meta conversion: reifying object programs as `clause/2` facts, and the
//! built-in meta-interpreters.
//!
//! An interpreter file holds the listing rules first. Clauses after a
//! `#support.` directive are base cases the engine keeps active regardless of
//! rule selection, and `#guard N atom.` attaches a grounding-time filter to
//! listing rule `N`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use crate::lang::{parse_program, Clause, LangError, PredicateDecl, Program, Sym, Term};

pub const NAIVE_TEXT: &str = include_str!("../../interpreters/naive.pl");
pub const PROOFTREE_TEXT: &str = include_str!("../../interpreters/prooftree.pl");
pub const LRP2_TEXT: &str = include_str!("../../interpreters/lrp2.pl");
pub const DEPTH_TEXT: &str = include_str!("../../interpreters/depth.pl");
pub const PLANNER_TEXT: &str = include_str!("../../interpreters/planner.pl");
pub const CAUSAL_TEXT: &str = include_str!("../../interpreters/causal.pl");

/// Predicates whose valuation the engine supplies rather than derives.
pub const BUILTINS: [(&str, usize); 7] = [
    ("assert_probs", 1),
    ("do", 1),
    ("norelate", 2),
    ("move", 3),
    ("equal", 2),
    ("condition_met", 2),
    ("change_state", 2),
];

/// Filters usable in `#guard` directives; they never enter the index tensors.
pub const GUARDS: [(&str, usize); 2] = [("distinct", 2), ("indep", 2)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Interpreter {
    Naive,
    ProofTree,
    Lrp2,
    Depth,
    Planner,
    Causal,
}

impl Interpreter {
    pub const ALL: [Interpreter; 6] = [
        Interpreter::Naive,
        Interpreter::ProofTree,
        Interpreter::Lrp2,
        Interpreter::Depth,
        Interpreter::Planner,
        Interpreter::Causal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Interpreter::Naive => "naive",
            Interpreter::ProofTree => "prooftree",
            Interpreter::Lrp2 => "lrp2",
            Interpreter::Depth => "depth",
            Interpreter::Planner => "planner",
            Interpreter::Causal => "causal",
        }
    }

    pub fn text(self) -> &'static str {
        match self {
            Interpreter::Naive => NAIVE_TEXT,
            Interpreter::ProofTree => PROOFTREE_TEXT,
            Interpreter::Lrp2 => LRP2_TEXT,
            Interpreter::Depth => DEPTH_TEXT,
            Interpreter::Planner => PLANNER_TEXT,
            Interpreter::Causal => CAUSAL_TEXT,
        }
    }

    pub fn from_name(name: &str) -> Option<Interpreter> {
        Interpreter::ALL.into_iter().find(|i| i.name() == name)
    }
}

impl fmt::Display for Interpreter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MetaError {
    #[error("unknown interpreter '{0}' (expected one of naive, prooftree, lrp2, depth, planner, causal, or a file path)")]
    UnknownInterpreter(String),
    #[error("cannot read meta-program {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Parse(#[from] LangError),
    #[error("meta-program defines reserved builtin {0}")]
    ReservedHead(String),
    #[error("guard refers to rule {0}, but the listing has {1} rules")]
    GuardIndex(usize, usize),
    #[error("goal predicate {0} is not defined by the lifted program")]
    UnknownGoal(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetaRule {
    pub clause: Clause,
    pub guards: Vec<Term>,
}

#[derive(Clone, Debug)]
pub struct MetaProgram {
    pub name: String,
    pub kind: Option<Interpreter>,
    pub rules: Vec<MetaRule>,
    pub support: Vec<MetaRule>,
    pub decls: Vec<PredicateDecl>,
    pub builtins: BTreeSet<(Sym, usize)>,
}

impl MetaProgram {
    pub fn from_program(name: &str, kind: Option<Interpreter>, p: &Program) -> Result<MetaProgram, MetaError> {
        let builtins: BTreeSet<(Sym, usize)> = BUILTINS.iter().map(|(n, a)| (Sym::new(n), *a)).collect();
        let guard_keys: BTreeSet<(Sym, usize)> = GUARDS.iter().map(|(n, a)| (Sym::new(n), *a)).collect();
        for c in &p.clauses {
            let key = c.head.predicate().expect("parser rejects variable heads");
            if builtins.contains(&key) || guard_keys.contains(&key) || key.0.as_str() == "clause" {
                return Err(MetaError::ReservedHead(format!("{}/{}", key.0, key.1)));
            }
        }
        let listing = p.listing();
        let mut rules: Vec<MetaRule> =
            listing.iter().map(|c| MetaRule { clause: c.clone(), guards: Vec::new() }).collect();
        for (n, g) in &p.guards {
            if *n == 0 || *n > rules.len() {
                return Err(MetaError::GuardIndex(*n, rules.len()));
            }
            rules[*n - 1].guards.push(g.clone());
        }
        let support = p.support().iter().map(|c| MetaRule { clause: c.clone(), guards: Vec::new() }).collect();
        let decls = p.decls.iter().filter(|d| !d.auto).cloned().collect();
        Ok(MetaProgram { name: name.to_string(), kind, rules, support, decls, builtins })
    }

    pub fn is_builtin(&self, key: (Sym, usize)) -> bool {
        self.builtins.contains(&key)
    }

    /// Declared datatype of a meta-predicate argument, if any.
    pub fn dtype_of(&self, key: (Sym, usize), pos: usize) -> Option<Sym> {
        self.decls
            .iter()
            .find(|d| d.name == key.0 && d.arity == key.1)
            .and_then(|d| d.dtypes.get(pos).copied())
    }

    /// Predicates defined by listing or support rules.
    pub fn head_predicates(&self) -> BTreeSet<(Sym, usize)> {
        self.rules
            .iter()
            .chain(self.support.iter())
            .filter_map(|r| r.clause.head.predicate())
            .collect()
    }

    /// Merges several interpreters into one candidate pool. Listing rules are
    /// concatenated in order; support rules and declarations are unioned.
    pub fn union(name: &str, parts: &[&MetaProgram]) -> MetaProgram {
        let mut out = MetaProgram {
            name: name.to_string(),
            kind: None,
            rules: Vec::new(),
            support: Vec::new(),
            decls: Vec::new(),
            builtins: BTreeSet::new(),
        };
        for p in parts {
            out.rules.extend(p.rules.iter().cloned());
            for s in &p.support {
                if !out.support.contains(s) {
                    out.support.push(s.clone());
                }
            }
            for d in &p.decls {
                if !out.decls.iter().any(|e| e.name == d.name && e.arity == d.arity) {
                    out.decls.push(d.clone());
                }
            }
            out.builtins.extend(p.builtins.iter().copied());
        }
        out
    }
}

/// Loads a built-in interpreter by name, or parses a user meta-program file.
pub fn load_interpreter(name: &str) -> Result<MetaProgram, MetaError> {
    if let Some(kind) = Interpreter::from_name(name) {
        return Ok(builtin_interpreter(kind));
    }
    let path = Path::new(name);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|source| MetaError::Io { path: name.to_string(), source })?;
        let prog = parse_program(&text)?;
        return MetaProgram::from_program(name, None, &prog);
    }
    Err(MetaError::UnknownInterpreter(name.to_string()))
}

pub fn builtin_interpreter(kind: Interpreter) -> MetaProgram {
    let prog = parse_program(kind.text()).expect("built-in interpreter text parses");
    MetaProgram::from_program(kind.name(), Some(kind), &prog).expect("built-in interpreter is well formed")
}

/// Lifted object program: one `clause/2` fact per object clause.
#[derive(Clone, Debug)]
pub struct MetaFactSet {
    /// `(clause(H,B), weight)` in source order.
    pub clause_facts: Vec<(Term, f64)>,
    /// Weight of each object fact, keyed by the reified atom.
    pub fact_weights: BTreeMap<Term, f64>,
    /// The object program, kept for datatype information.
    pub object: Program,
}

/// Reifies each clause `H :- B1,...,Bn` as `clause(H, (B1,...,Bn))` and each
/// fact `F` as `clause(F, true)`, carrying weights across.
pub fn lift_program(p: &Program) -> MetaFactSet {
    let mut clause_facts = Vec::with_capacity(p.clauses.len());
    let mut fact_weights = BTreeMap::new();
    for c in &p.clauses {
        let body = Term::conj_of(&c.body);
        clause_facts.push((Term::compound("clause", vec![c.head.clone(), body]), c.weight));
        if c.is_fact() {
            fact_weights.insert(c.head.clone(), c.weight);
        }
    }
    MetaFactSet { clause_facts, fact_weights, object: p.clone() }
}

/// Inverse of [`lift_program`] on the clause list.
pub fn unlift(facts: &MetaFactSet) -> Vec<Clause> {
    facts
        .clause_facts
        .iter()
        .map(|(t, w)| {
            let a = t.args();
            Clause::new(a[0].clone(), a[1].conjuncts(), *w)
        })
        .collect()
}

/// Meta-level query patterns for an object goal under an interpreter.
///
/// Unbound positions (proof terms, depth counters, intervention sites) are
/// fresh variables for the caller to match against the table.
pub fn make_goal_atoms(goal: &Term, mp: &MetaProgram, facts: &MetaFactSet) -> Result<Vec<Term>, MetaError> {
    if let Some(key) = goal.predicate() {
        let defined = facts.clause_facts.iter().any(|(c, _)| c.args()[0].predicate() == Some(key));
        if !defined && mp.kind != Some(Interpreter::Planner) {
            return Err(MetaError::UnknownGoal(format!("{}/{}", key.0, key.1)));
        }
    }
    let v = Term::var;
    let g = goal.clone();
    let atoms = match mp.kind {
        Some(Interpreter::Naive) => vec![Term::compound("solve", vec![g])],
        Some(Interpreter::ProofTree) => vec![Term::compound("solve", vec![g, v("Proof")])],
        Some(Interpreter::Lrp2) => vec![Term::compound("rp", vec![g, v("Proof"), v("Atom")])],
        Some(Interpreter::Depth) => vec![Term::compound("li", vec![g, v("Depth")])],
        Some(Interpreter::Planner) => vec![Term::compound("planf", vec![v("Start"), v("Goal"), v("Stack")])],
        Some(Interpreter::Causal) => {
            vec![Term::compound("prob", vec![g.clone()]), Term::compound("probs_do", vec![g, v("Site")])]
        }
        None => {
            let mut out = Vec::new();
            for key in mp.head_predicates() {
                if mp.dtype_of(key, 0).map(|d| d.as_str() == "goal").unwrap_or(false) {
                    let mut args = vec![g.clone()];
                    args.extend((1..key.1).map(|i| v(&format!("Q{i}"))));
                    out.push(Term::app(key.0, args));
                }
            }
            out
        }
    };
    Ok(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_term;

    #[test]
    fn rule_counts_match_listings() {
        let counts: Vec<(Interpreter, usize)> = Interpreter::ALL
            .iter()
            .map(|k| (*k, builtin_interpreter(*k).rules.len()))
            .collect();
        assert_eq!(
            counts,
            vec![
                (Interpreter::Naive, 3),
                (Interpreter::ProofTree, 3),
                (Interpreter::Lrp2, 9),
                (Interpreter::Depth, 2),
                (Interpreter::Planner, 2),
                (Interpreter::Causal, 8),
            ]
        );
    }

    #[test]
    fn causal_guards_attach_to_rules() {
        let c = builtin_interpreter(Interpreter::Causal);
        assert_eq!(c.rules[4].guards.len(), 1);
        assert_eq!(c.rules[7].guards.len(), 1);
        assert_eq!(c.support.len(), 1);
    }

    #[test]
    fn lifts_rule_and_fact() {
        let p = parse_program("same_shape_pair(X,Y):-shape(X,Z),shape(Y,Z).\nedge(a,b).\n0.8: light :- night.").unwrap();
        let m = lift_program(&p);
        assert_eq!(m.clause_facts[0].0, parse_term("clause(same_shape_pair(X,Y),(shape(X,Z),shape(Y,Z)))").unwrap());
        assert_eq!(m.clause_facts[1], (parse_term("clause(edge(a,b),true)").unwrap(), 1.0));
        assert_eq!(m.clause_facts[2], (parse_term("clause(light,night)").unwrap(), 0.8));
        assert_eq!(m.fact_weights[&parse_term("edge(a,b)").unwrap()], 1.0);
        assert_eq!(unlift(&m), p.clauses);
    }

    #[test]
    fn goal_atoms_per_interpreter() {
        let p = parse_program("same_shape_pair(X,Y):-shape(X,Z),shape(Y,Z).\nlight.").unwrap();
        let m = lift_program(&p);
        let g = parse_term("same_shape_pair(obj0,obj2)").unwrap();
        let naive = make_goal_atoms(&g, &builtin_interpreter(Interpreter::Naive), &m).unwrap();
        assert_eq!(naive, vec![parse_term("solve(same_shape_pair(obj0,obj2))").unwrap()]);
        let pt = make_goal_atoms(&g, &builtin_interpreter(Interpreter::ProofTree), &m).unwrap();
        assert_eq!(pt[0].args().len(), 2);
        let light = parse_term("light").unwrap();
        let c = make_goal_atoms(&light, &builtin_interpreter(Interpreter::Causal), &m).unwrap();
        assert_eq!(c[1].functor().unwrap().as_str(), "probs_do");
        let unknown = parse_term("nope(a)").unwrap();
        assert!(make_goal_atoms(&unknown, &builtin_interpreter(Interpreter::Naive), &m).is_err());
    }

    #[test]
    fn unknown_interpreter_name() {
        assert!(matches!(load_interpreter("no_such_meta"), Err(MetaError::UnknownInterpreter(_))));
    }
}
