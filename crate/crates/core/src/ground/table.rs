use std::collections::HashMap;

use crate::lang::{render_term, Term};

pub const TOP: usize = 0;
pub const BOT: usize = 1;

/// Ordered ground atom table with reserved ⊤ and ⊥ at indices 0 and 1.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundAtomTable {
    atoms: Vec<Term>,
    index: HashMap<Term, usize>,
}

impl GroundAtomTable {
    /// Builds a table from arbitrary ground atoms. Duplicates are merged and
    /// the remaining atoms are sorted by rendered text.
    pub fn from_atoms<I: IntoIterator<Item = Term>>(atoms: I) -> GroundAtomTable {
        let mut keyed: Vec<(String, Term)> = atoms.into_iter().map(|a| (render_term(&a), a)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        keyed.dedup_by(|a, b| a.1 == b.1);
        let mut list = vec![top_atom(), bot_atom()];
        list.extend(keyed.into_iter().map(|(_, a)| a).filter(|a| *a != top_atom() && *a != bot_atom()));
        let index = list.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        GroundAtomTable { atoms: list, index }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    /// A table always holds ⊤ and ⊥; this reports whether it holds anything else.
    pub fn is_empty(&self) -> bool {
        self.atoms.len() == 2
    }

    pub fn get(&self, atom: &Term) -> Option<usize> {
        self.index.get(atom).copied()
    }

    pub fn atom(&self, i: usize) -> &Term {
        &self.atoms[i]
    }

    pub fn atoms(&self) -> &[Term] {
        &self.atoms
    }

    /// One `index<TAB>atom` line per entry.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (i, a) in self.atoms.iter().enumerate() {
            s.push_str(&format!("{i}\t{}\n", render_term(a)));
        }
        s
    }
}

pub fn top_atom() -> Term {
    Term::constant("$top")
}

pub fn bot_atom() -> Term {
    Term::constant("$bot")
}
