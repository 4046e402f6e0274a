//! Symbols and first-order terms.
//!
//! Object-level and meta-level syntax share this one representation: an atom
//! is a compound (or a bare constant for zero-arity predicates), and a
//! meta-atom simply carries object atoms among its arguments.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

/// Interned name. Equality and hashing are on the interned id.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sym(u32);

struct Interner {
    names: Vec<&'static str>,
    ids: HashMap<&'static str, u32>,
}

fn interner() -> &'static RwLock<Interner> {
    static INTERNER: OnceLock<RwLock<Interner>> = OnceLock::new();
    INTERNER.get_or_init(|| {
        RwLock::new(Interner {
            names: Vec::new(),
            ids: HashMap::new(),
        })
    })
}

impl Sym {
    pub fn new(name: &str) -> Sym {
        if let Some(&id) = interner().read().expect("interner poisoned").ids.get(name) {
            return Sym(id);
        }
        let mut w = interner().write().expect("interner poisoned");
        if let Some(&id) = w.ids.get(name) {
            return Sym(id);
        }
        let leaked: &'static str = Box::leak(name.to_owned().into_boxed_str());
        let id = w.names.len() as u32;
        w.names.push(leaked);
        w.ids.insert(leaked, id);
        Sym(id)
    }

    pub fn as_str(self) -> &'static str {
        interner().read().expect("interner poisoned").names[self.0 as usize]
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl PartialOrd for Sym {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Sym {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if self.0 == other.0 {
            std::cmp::Ordering::Equal
        } else {
            self.as_str().cmp(other.as_str())
        }
    }
}

/// Well-known functor and constant names.
pub mod names {
    pub const CONS: &str = "cons";
    pub const NIL: &str = "nil";
    pub const SUCC: &str = "succ";
    pub const ZERO: &str = "0";
    pub const CONJ: &str = ",";
    pub const NECK: &str = ":-";
    pub const TRUE: &str = "true";
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Const(Sym),
    Var(Sym),
    Compound(Sym, Arc<[Term]>),
}

impl Term {
    pub fn constant(name: &str) -> Term {
        Term::Const(Sym::new(name))
    }

    pub fn var(name: &str) -> Term {
        Term::Var(Sym::new(name))
    }

    /// Builds `f(args)`; zero arguments yield the constant `f`.
    pub fn compound(functor: &str, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::Const(Sym::new(functor))
        } else {
            Term::Compound(Sym::new(functor), args.into())
        }
    }

    pub fn app(functor: Sym, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::Const(functor)
        } else {
            Term::Compound(functor, args.into())
        }
    }

    pub fn nil() -> Term {
        Term::constant(names::NIL)
    }

    pub fn truth() -> Term {
        Term::constant(names::TRUE)
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::compound(names::CONS, vec![head, tail])
    }

    pub fn conj(a: Term, b: Term) -> Term {
        Term::compound(names::CONJ, vec![a, b])
    }

    pub fn neck(head: Term, body: Term) -> Term {
        Term::compound(names::NECK, vec![head, body])
    }

    /// Proper list from items, terminated by `nil`.
    pub fn list(items: Vec<Term>) -> Term {
        Term::list_with_tail(items, Term::nil())
    }

    pub fn list_with_tail(items: Vec<Term>, tail: Term) -> Term {
        items.into_iter().rev().fold(tail, |acc, t| Term::cons(t, acc))
    }

    /// Right-nested conjunction; an empty slice gives `true`.
    pub fn conj_of(items: &[Term]) -> Term {
        match items.split_last() {
            None => Term::truth(),
            Some((last, rest)) => rest
                .iter()
                .rev()
                .fold(last.clone(), |acc, t| Term::conj(t.clone(), acc)),
        }
    }

    /// Peano numeral `succ^n(0)`.
    pub fn peano(n: u64) -> Term {
        Term::succ_n(Term::constant(names::ZERO), n)
    }

    pub fn succ_n(base: Term, n: u64) -> Term {
        (0..n).fold(base, |acc, _| Term::compound(names::SUCC, vec![acc]))
    }

    pub fn functor(&self) -> Option<Sym> {
        match self {
            Term::Const(s) | Term::Compound(s, _) => Some(*s),
            Term::Var(_) => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, a) => a,
            _ => &[],
        }
    }

    /// Predicate key `(name, arity)` when the term can stand as an atom.
    pub fn predicate(&self) -> Option<(Sym, usize)> {
        match self {
            Term::Const(s) => Some((*s, 0)),
            Term::Compound(s, a) => Some((*s, a.len())),
            Term::Var(_) => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_functor(&self, name: &str, arity: usize) -> bool {
        match self {
            Term::Const(s) => arity == 0 && s.as_str() == name,
            Term::Compound(s, a) => a.len() == arity && s.as_str() == name,
            Term::Var(_) => false,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Const(_) => true,
            Term::Var(_) => false,
            Term::Compound(_, a) => a.iter().all(Term::is_ground),
        }
    }

    /// Functor nesting depth: constants and variables are 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Compound(_, a) => 1 + a.iter().map(Term::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    /// Deepest argument of an atom, or 0 for constants.
    pub fn arg_depth(&self) -> usize {
        self.args().iter().map(Term::depth).max().unwrap_or(0)
    }

    pub fn vars(&self, out: &mut Vec<Sym>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(*v)
                }
            }
            Term::Compound(_, a) => a.iter().for_each(|t| t.vars(out)),
            Term::Const(_) => {}
        }
    }

    pub fn occurs(&self, v: Sym) -> bool {
        match self {
            Term::Var(w) => *w == v,
            Term::Compound(_, a) => a.iter().any(|t| t.occurs(v)),
            Term::Const(_) => false,
        }
    }

    /// Value of a ground Peano numeral.
    pub fn as_peano(&self) -> Option<u64> {
        let mut n = 0;
        let mut t = self;
        loop {
            match t {
                Term::Const(s) if s.as_str() == names::ZERO => return Some(n),
                Term::Compound(s, a) if a.len() == 1 && s.as_str() == names::SUCC => {
                    n += 1;
                    t = &a[0];
                }
                _ => return None,
            }
        }
    }

    /// Items of a `nil`-terminated list.
    pub fn as_list(&self) -> Option<Vec<Term>> {
        let mut items = Vec::new();
        let mut t = self;
        loop {
            match t {
                Term::Const(s) if s.as_str() == names::NIL => return Some(items),
                Term::Compound(s, a) if a.len() == 2 && s.as_str() == names::CONS => {
                    items.push(a[0].clone());
                    t = &a[1];
                }
                _ => return None,
            }
        }
    }

    /// Flattens a right-nested conjunction; `true` flattens to nothing.
    pub fn conjuncts(&self) -> Vec<Term> {
        let mut out = Vec::new();
        let mut t = self;
        loop {
            match t {
                Term::Compound(s, a) if a.len() == 2 && s.as_str() == names::CONJ => {
                    out.push(a[0].clone());
                    t = &a[1];
                }
                Term::Const(s) if s.as_str() == names::TRUE && out.is_empty() => return out,
                other => {
                    out.push(other.clone());
                    return out;
                }
            }
        }
    }

    /// All subterms, including `self`, in pre-order.
    pub fn subterms(&self) -> Vec<&Term> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            if let Term::Compound(_, a) = out[i] {
                out.extend(a.iter());
            }
            i += 1;
        }
        out
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::lang::render::render_term(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::lang::render::render_term(self))
    }
}
