use std::collections::HashMap;

use super::term::{Sym, Term};

/// Variable bindings. Bindings may chain; [`apply`] resolves them fully.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Subst {
    map: HashMap<Sym, Term>,
}

impl Subst {
    pub fn new() -> Subst {
        Subst::default()
    }

    pub fn get(&self, v: Sym) -> Option<&Term> {
        self.map.get(&v)
    }

    pub fn bind(&mut self, v: Sym, t: Term) {
        self.map.insert(v, t);
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Sym, &Term)> {
        self.map.iter()
    }

    /// Follows variable-to-variable chains to the representative term.
    fn walk<'a>(&'a self, t: &'a Term) -> &'a Term {
        let mut cur = t;
        while let Term::Var(v) = cur {
            match self.map.get(v) {
                Some(next) => cur = next,
                None => break,
            }
        }
        cur
    }

    fn occurs(&self, v: Sym, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(w) => *w == v,
            Term::Compound(_, a) => a.iter().any(|x| self.occurs(v, x)),
            Term::Const(_) => false,
        }
    }

    /// Returns an equivalent substitution whose range contains no bound variables.
    pub fn normalized(&self) -> Subst {
        let map = self.map.keys().map(|k| (*k, apply(&Term::Var(*k), self))).collect();
        Subst { map }
    }
}

/// Most general unifier of `a` and `b` extending `s`, with occurs-check.
pub fn unify(a: &Term, b: &Term, s: &Subst) -> Option<Subst> {
    let mut out = s.clone();
    if unify_in(a, b, &mut out) {
        Some(out)
    } else {
        None
    }
}

/// In-place variant of [`unify`]; `s` is left partially updated on failure.
pub fn unify_in(a: &Term, b: &Term, s: &mut Subst) -> bool {
    let a = s.walk(a).clone();
    let b = s.walk(b).clone();
    match (&a, &b) {
        (Term::Var(x), Term::Var(y)) if x == y => true,
        (Term::Var(x), t) | (t, Term::Var(x)) => {
            if s.occurs(*x, t) {
                return false;
            }
            s.bind(*x, t.clone());
            true
        }
        (Term::Const(x), Term::Const(y)) => x == y,
        (Term::Compound(f, xs), Term::Compound(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| unify_in(x, y, s))
        }
        _ => false,
    }
}

/// One-way matching of `pattern` against a ground term, extending `s`.
///
/// Bound pattern variables must agree structurally with `ground`.
pub fn match_ground(pattern: &Term, ground: &Term, s: &mut Subst) -> bool {
    match pattern {
        Term::Var(v) => match s.map.get(v) {
            Some(bound) => {
                let bound = bound.clone();
                match_ground(&bound, ground, s)
            }
            None => {
                s.bind(*v, ground.clone());
                true
            }
        },
        Term::Const(c) => matches!(ground, Term::Const(d) if c == d),
        Term::Compound(f, xs) => match ground {
            Term::Compound(g, ys) if f == g && xs.len() == ys.len() => {
                xs.iter().zip(ys.iter()).all(|(x, y)| match_ground(x, y, s))
            }
            _ => false,
        },
    }
}

/// Simultaneous replacement of bound variables, resolving chains.
pub fn apply(t: &Term, s: &Subst) -> Term {
    if s.is_empty() {
        return t.clone();
    }
    match t {
        Term::Var(v) => match s.map.get(v) {
            Some(b) => apply(b, s),
            None => t.clone(),
        },
        Term::Const(_) => t.clone(),
        Term::Compound(f, a) => {
            if t.is_ground() {
                return t.clone();
            }
            Term::Compound(*f, a.iter().map(|x| apply(x, s)).collect::<Vec<_>>().into())
        }
    }
}

/// Renames every variable in `t` by appending `suffix`.
pub fn rename(t: &Term, suffix: &str) -> Term {
    match t {
        Term::Var(v) => Term::var(&format!("{}{}", v.as_str(), suffix)),
        Term::Const(_) => t.clone(),
        Term::Compound(f, a) => Term::Compound(*f, a.iter().map(|x| rename(x, suffix)).collect::<Vec<_>>().into()),
    }
}
