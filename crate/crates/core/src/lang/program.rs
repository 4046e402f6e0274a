use std::collections::{BTreeMap, BTreeSet};

use super::term::{Sym, Term};

/// Datatype assigned to argument positions of undeclared predicates.
pub const DEFAULT_DTYPE: &str = "default";

#[derive(Clone, Debug, PartialEq)]
pub struct Clause {
    pub head: Term,
    pub body: Vec<Term>,
    pub weight: f64,
}

impl Clause {
    pub fn new(head: Term, body: Vec<Term>, weight: f64) -> Clause {
        Clause { head, body, weight }
    }

    pub fn fact(head: Term, weight: f64) -> Clause {
        Clause::new(head, Vec::new(), weight)
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    pub fn vars(&self) -> Vec<Sym> {
        let mut out = Vec::new();
        self.head.vars(&mut out);
        self.body.iter().for_each(|b| b.vars(&mut out));
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredicateDecl {
    pub name: Sym,
    pub arity: usize,
    pub dtypes: Vec<Sym>,
    /// Set for declarations synthesized from usage rather than written out.
    pub auto: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub decls: Vec<PredicateDecl>,
    pub dtypes: BTreeMap<Sym, Vec<Term>>,
    pub clauses: Vec<Clause>,
    /// Grounding filters attached to clause numbers (1-based).
    pub guards: Vec<(usize, Term)>,
    /// Index of the first clause after a `#support.` directive.
    pub support_from: Option<usize>,
}

impl Program {
    pub fn decl(&self, name: Sym, arity: usize) -> Option<&PredicateDecl> {
        self.decls.iter().find(|d| d.name == name && d.arity == arity)
    }

    /// Datatype of an argument position, if declared.
    pub fn dtype_of(&self, name: Sym, arity: usize, pos: usize) -> Option<Sym> {
        self.decl(name, arity).and_then(|d| d.dtypes.get(pos).copied())
    }

    /// Clauses of the main listing, excluding support clauses.
    pub fn listing(&self) -> &[Clause] {
        match self.support_from {
            Some(i) => &self.clauses[..i],
            None => &self.clauses,
        }
    }

    pub fn support(&self) -> &[Clause] {
        match self.support_from {
            Some(i) => &self.clauses[i..],
            None => &[],
        }
    }

    /// Every predicate key used as a head or body atom.
    pub fn predicates(&self) -> BTreeSet<(Sym, usize)> {
        let mut out = BTreeSet::new();
        for c in &self.clauses {
            if let Some(p) = c.head.predicate() {
                out.insert(p);
            }
            for b in &c.body {
                if let Some(p) = b.predicate() {
                    out.insert(p);
                }
            }
        }
        out
    }

    /// Constants appearing directly as clause arguments, sorted.
    pub fn constants(&self) -> Vec<Term> {
        let mut set = BTreeSet::new();
        let mut visit = |atom: &Term| {
            for a in atom.args() {
                if let Term::Const(_) = a {
                    set.insert(a.clone());
                }
            }
        };
        for c in &self.clauses {
            visit(&c.head);
            c.body.iter().for_each(&mut visit);
        }
        set.into_iter().collect()
    }
}
