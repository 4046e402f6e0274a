//! Text rendering that round-trips with the parser.

use super::program::{Clause, Program};
use super::term::{names, Term};

/// Peano numerals at or below this depth render as integer literals.
pub const PEANO_LITERAL_LIMIT: u64 = 1024;

pub fn render_term(t: &Term) -> String {
    let mut s = String::new();
    write_term(&mut s, t, 999);
    s
}

/// Renders an atom or conjunction at clause-body priority.
pub fn render_goal(t: &Term) -> String {
    let mut s = String::new();
    write_term(&mut s, t, 1200);
    s
}

fn is_plain_ident(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => false,
    }
}

fn is_digits(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_digit())
}

fn write_name(out: &mut String, name: &str) {
    if is_plain_ident(name) || is_digits(name) || name.starts_with('$') {
        out.push_str(name);
    } else {
        out.push('\'');
        for c in name.chars() {
            if c == '\'' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('\'');
    }
}

/// Splits `succ^n(base)` into `(base, n)`.
fn peel_succ(t: &Term) -> (&Term, u64) {
    let mut n = 0;
    let mut cur = t;
    while let Term::Compound(s, a) = cur {
        if a.len() == 1 && s.as_str() == names::SUCC {
            n += 1;
            cur = &a[0];
        } else {
            break;
        }
    }
    (cur, n)
}

fn write_term(out: &mut String, t: &Term, prec: u32) {
    match t {
        Term::Var(v) => out.push_str(v.as_str()),
        Term::Const(c) => {
            if c.as_str() == names::NIL {
                out.push_str("[]");
            } else {
                write_name(out, c.as_str());
            }
        }
        Term::Compound(f, args) => {
            let name = f.as_str();
            if name == names::SUCC && args.len() == 1 {
                let (base, n) = peel_succ(t);
                if let Some(k) = base.as_peano() {
                    if n + k <= PEANO_LITERAL_LIMIT {
                        out.push_str(&(n + k).to_string());
                        return;
                    }
                }
                if base.is_var() {
                    let wrap = prec < 500;
                    if wrap {
                        out.push('(');
                    }
                    write_term(out, base, 499);
                    out.push('+');
                    out.push_str(&n.to_string());
                    if wrap {
                        out.push(')');
                    }
                    return;
                }
            }
            if name == names::CONS && args.len() == 2 {
                write_list(out, t);
                return;
            }
            if name == names::CONJ && args.len() == 2 {
                let wrap = prec < 1000;
                if wrap {
                    out.push('(');
                }
                write_term(out, &args[0], 999);
                out.push(',');
                write_term(out, &args[1], 1000);
                if wrap {
                    out.push(')');
                }
                return;
            }
            if name == names::NECK && args.len() == 2 {
                let wrap = prec < 1200;
                if wrap {
                    out.push('(');
                }
                write_term(out, &args[0], 1199);
                out.push_str(":-");
                write_term(out, &args[1], 1199);
                if wrap {
                    out.push(')');
                }
                return;
            }
            write_name(out, name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_term(out, a, 999);
            }
            out.push(')');
        }
    }
}

fn write_list(out: &mut String, t: &Term) {
    out.push('[');
    let mut cur = t;
    let mut first = true;
    loop {
        match cur {
            Term::Compound(f, a) if a.len() == 2 && f.as_str() == names::CONS => {
                if !first {
                    out.push(',');
                }
                first = false;
                write_term(out, &a[0], 999);
                cur = &a[1];
            }
            Term::Const(c) if c.as_str() == names::NIL => break,
            tail => {
                out.push('|');
                write_term(out, tail, 999);
                break;
            }
        }
    }
    out.push(']');
}

fn format_weight(w: f64) -> String {
    let s = format!("{w}");
    if s.contains('.') || s.contains('e') {
        s
    } else {
        format!("{s}.0")
    }
}

pub fn render_clause(c: &Clause) -> String {
    let mut s = String::new();
    if c.weight != 1.0 {
        s.push_str(&format_weight(c.weight));
        s.push_str(": ");
    }
    write_term(&mut s, &c.head, 999);
    if !c.body.is_empty() {
        s.push_str(" :- ");
        for (i, b) in c.body.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            write_term(&mut s, b, 999);
        }
    }
    s.push('.');
    s
}

/// Renders declarations, datatype pools and clauses, one statement per line.
pub fn render_program(p: &Program) -> String {
    let mut s = String::new();
    for (dt, pool) in &p.dtypes {
        s.push_str("#dtype ");
        s.push_str(dt.as_str());
        s.push_str(" {");
        let items: Vec<String> = pool.iter().map(render_term).collect();
        s.push_str(&items.join(","));
        s.push_str("}.\n");
    }
    for d in p.decls.iter().filter(|d| !d.auto) {
        s.push_str(&format!("#pred {}/{} [", d.name, d.arity));
        let dts: Vec<&str> = d.dtypes.iter().map(|x| x.as_str()).collect();
        s.push_str(&dts.join(","));
        s.push_str("].\n");
    }
    for (n, g) in &p.guards {
        s.push_str(&format!("#guard {} {}.\n", n, render_term(g)));
    }
    for (i, c) in p.clauses.iter().enumerate() {
        if p.support_from == Some(i) {
            s.push_str("#support.\n");
        }
        s.push_str(&render_clause(c));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_lists_and_numbers() {
        let l = Term::list(vec![Term::constant("a"), Term::constant("b")]);
        assert_eq!(render_term(&l), "[a,b]");
        assert_eq!(render_term(&Term::peano(2)), "2");
        assert_eq!(render_term(&Term::nil()), "[]");
        let open = Term::list_with_tail(vec![Term::constant("a")], Term::var("T"));
        assert_eq!(render_term(&open), "[a|T]");
    }

    #[test]
    fn renders_weighted_clause() {
        let c = Clause::new(Term::constant("head"), vec![Term::constant("body")], 0.9);
        assert_eq!(render_clause(&c), "0.9: head :- body.");
    }

    #[test]
    fn renders_operators_in_arguments() {
        let t = Term::compound(
            "solve",
            vec![
                Term::conj(Term::var("A"), Term::var("B")),
                Term::neck(Term::var("A"), Term::truth()),
            ],
        );
        assert_eq!(render_term(&t), "solve((A,B),(A:-true))");
        let s = Term::compound("p", vec![Term::succ_n(Term::var("X"), 1)]);
        assert_eq!(render_term(&s), "p(X+1)");
    }
}
