//! Recursive-descent parser for weighted logic programs.
//!
//! Operator priorities follow the usual Prolog table for the handful of
//! operators the language has: `:-` (1200, xfx), `,` (1000, xfy) and the
//! successor shorthand `X+n` (500, yfx, integer right operand only).

use super::program::{Clause, PredicateDecl, Program, DEFAULT_DTYPE};
use super::term::{Sym, Term};
use super::LangError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(u64),
    Real(f64),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

const PUNCTS: [&str; 14] = ["::-", ":-", "(", ")", "[", "]", "{", "}", ",", "|", ".", ":", "+", "/"];

fn lex(text: &str) -> Result<Vec<Spanned>, LangError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| LangError::Syntax { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (sl, sc) = (line, col);
        if c == '#' {
            out.push(Spanned { tok: Tok::Punct("#"), line: sl, col: sc });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let is_real = i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit();
            if is_real {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if is_real {
                Tok::Real(s.parse().map_err(|_| err(sl, sc, format!("bad number '{s}'")))?)
            } else {
                Tok::Int(s.parse().map_err(|_| err(sl, sc, format!("integer '{s}' out of range")))?)
            };
            out.push(Spanned { tok, line: sl, col: sc });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if c.is_uppercase() || c == '_' { Tok::Var(s) } else { Tok::Ident(s) };
            out.push(Spanned { tok, line: sl, col: sc });
            continue;
        }
        if c == '\'' {
            let mut s = String::new();
            i += 1;
            col += 1;
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(err(sl, sc, "unterminated quoted atom".into())),
                    Some('\\') if i + 1 < chars.len() => {
                        s.push(chars[i + 1]);
                        i += 2;
                        col += 2;
                    }
                    Some('\'') => {
                        i += 1;
                        col += 1;
                        break;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                        col += 1;
                    }
                }
            }
            out.push(Spanned { tok: Tok::Ident(s), line: sl, col: sc });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                i += p.len();
                col += p.len();
                out.push(Spanned { tok: Tok::Punct(p), line: sl, col: sc });
            }
            None => return Err(err(sl, sc, format!("unexpected character '{c}'"))),
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    fresh: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Parser, LangError> {
        Ok(Parser { toks: lex(text)?, pos: 0, fresh: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let s = &self.toks[self.pos];
        (s.line, s.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, LangError> {
        let (line, col) = self.here();
        Err(LangError::Syntax { line, col, msg: msg.into() })
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn expect(&mut self, p: &str) -> Result<(), LangError> {
        if self.is_punct(p) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected '{p}', found {}", describe(self.peek())))
        }
    }

    fn expr(&mut self, max: u32) -> Result<Term, LangError> {
        let mut left = self.primary()?;
        let mut left_prec = 0;
        loop {
            if self.is_punct("+") && max >= 500 && left_prec <= 500 {
                self.bump();
                match self.bump() {
                    Tok::Int(n) => left = Term::succ_n(left, n),
                    other => return self.error(format!("expected integer after '+', found {}", describe(&other))),
                }
                left_prec = 500;
            } else if self.is_punct(",") && max >= 1000 && left_prec < 1000 {
                self.bump();
                let right = self.expr(1000)?;
                left = Term::conj(left, right);
                left_prec = 1000;
            } else if (self.is_punct(":-") || self.is_punct("::-")) && max >= 1200 && left_prec < 1200 {
                self.bump();
                let right = self.expr(1199)?;
                left = Term::neck(left, right);
                left_prec = 1200;
            } else {
                return Ok(left);
            }
        }
    }

    fn primary(&mut self) -> Result<Term, LangError> {
        match self.bump() {
            Tok::Int(n) => Ok(Term::peano(n)),
            Tok::Real(r) => self.error(format!("real number {r} is only allowed as a clause weight")),
            Tok::Var(v) => {
                if v == "_" {
                    self.fresh += 1;
                    Ok(Term::var(&format!("_G{}", self.fresh)))
                } else {
                    Ok(Term::var(&v))
                }
            }
            Tok::Ident(name) => {
                if self.is_punct("(") {
                    self.bump();
                    let mut args = vec![self.expr(999)?];
                    while self.is_punct(",") {
                        self.bump();
                        args.push(self.expr(999)?);
                    }
                    self.expect(")")?;
                    Ok(Term::compound(&name, args))
                } else {
                    Ok(Term::constant(&name))
                }
            }
            Tok::Punct("[") => {
                if self.is_punct("]") {
                    self.bump();
                    return Ok(Term::nil());
                }
                let mut items = vec![self.expr(999)?];
                while self.is_punct(",") {
                    self.bump();
                    items.push(self.expr(999)?);
                }
                let tail = if self.is_punct("|") {
                    self.bump();
                    self.expr(999)?
                } else {
                    Term::nil()
                };
                self.expect("]")?;
                Ok(Term::list_with_tail(items, tail))
            }
            Tok::Punct("(") => {
                let t = self.expr(1200)?;
                self.expect(")")?;
                Ok(t)
            }
            other => {
                self.pos -= 1;
                self.error(format!("expected a term, found {}", describe(&other)))
            }
        }
    }

    fn ident(&mut self) -> Result<String, LangError> {
        match self.bump() {
            Tok::Ident(s) => Ok(s),
            other => {
                self.pos -= 1;
                self.error(format!("expected a name, found {}", describe(&other)))
            }
        }
    }

    fn directive(&mut self, prog: &mut Program) -> Result<(), LangError> {
        let (line, col) = self.here();
        let kind = self.ident()?;
        match kind.as_str() {
            "pred" => {
                let name = self.ident()?;
                self.expect("/")?;
                let arity = match self.bump() {
                    Tok::Int(n) => n as usize,
                    other => return self.error(format!("expected arity, found {}", describe(&other))),
                };
                let mut dtypes = Vec::new();
                if self.is_punct("[") {
                    self.bump();
                    if !self.is_punct("]") {
                        dtypes.push(Sym::new(&self.ident()?));
                        while self.is_punct(",") {
                            self.bump();
                            dtypes.push(Sym::new(&self.ident()?));
                        }
                    }
                    self.expect("]")?;
                }
                if dtypes.len() != arity {
                    return Err(LangError::Syntax {
                        line,
                        col,
                        msg: format!("#pred {name}/{arity} lists {} datatypes", dtypes.len()),
                    });
                }
                let sym = Sym::new(&name);
                prog.decls.retain(|d| !(d.name == sym && d.arity == arity));
                prog.decls.push(PredicateDecl { name: sym, arity, dtypes, auto: false });
            }
            "dtype" => {
                let name = Sym::new(&self.ident()?);
                self.expect("{")?;
                let mut pool = Vec::new();
                if !self.is_punct("}") {
                    pool.push(self.expr(999)?);
                    while self.is_punct(",") {
                        self.bump();
                        pool.push(self.expr(999)?);
                    }
                }
                self.expect("}")?;
                if let Some(bad) = pool.iter().find(|t| !t.is_ground()) {
                    return Err(LangError::Syntax { line, col, msg: format!("datatype pool member {bad} is not ground") });
                }
                prog.dtypes.entry(name).or_default().extend(pool);
            }
            "guard" => {
                let n = match self.bump() {
                    Tok::Int(n) if n >= 1 => n as usize,
                    other => return self.error(format!("expected clause number, found {}", describe(&other))),
                };
                let g = self.expr(999)?;
                prog.guards.push((n, g));
            }
            "support" => {
                prog.support_from = Some(prog.clauses.len());
            }
            other => {
                return Err(LangError::Syntax { line, col, msg: format!("unknown directive #{other}") });
            }
        }
        self.expect(".")
    }

    fn statement(&mut self, prog: &mut Program) -> Result<(), LangError> {
        if self.is_punct("#") {
            self.bump();
            return self.directive(prog);
        }
        let (line, col) = self.here();
        let mut weight = 1.0;
        let weighted = matches!(self.peek(), Tok::Int(_) | Tok::Real(_)) && matches!(self.peek_at(1), Tok::Punct(":"));
        if weighted {
            weight = match self.bump() {
                Tok::Int(n) => n as f64,
                Tok::Real(r) => r,
                _ => unreachable!(),
            };
            self.bump();
            if !(0.0..=1.0).contains(&weight) {
                return Err(LangError::Weight { line, col, value: weight });
            }
        }
        let head = self.expr(999)?;
        if head.is_var() {
            return Err(LangError::Syntax { line, col, msg: "clause head must not be a variable".into() });
        }
        let mut body = Vec::new();
        if self.is_punct(":-") || self.is_punct("::-") {
            self.bump();
            body = self.expr(1000)?.conjuncts();
            if body.iter().any(Term::is_var) {
                return Err(LangError::Syntax { line, col, msg: "body atoms must not be bare variables".into() });
            }
        }
        self.expect(".")?;
        prog.clauses.push(Clause::new(head, body, weight));
        Ok(())
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Var(s) => format!("variable '{s}'"),
        Tok::Int(n) => format!("'{n}'"),
        Tok::Real(r) => format!("'{r}'"),
        Tok::Punct(p) => format!("'{p}'"),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses program text, checks arities and auto-declares unseen predicates.
pub fn parse_program(text: &str) -> Result<Program, LangError> {
    let mut p = Parser::new(text)?;
    let mut prog = Program::default();
    while *p.peek() != Tok::Eof {
        p.statement(&mut prog)?;
    }
    check_arities(&prog)?;
    auto_declare(&mut prog);
    Ok(prog)
}

/// Parses a single term; operators are allowed at full priority.
pub fn parse_term(text: &str) -> Result<Term, LangError> {
    let mut p = Parser::new(text)?;
    let t = p.expr(1200)?;
    if p.is_punct(".") {
        p.bump();
    }
    if *p.peek() != Tok::Eof {
        return p.error(format!("trailing input {}", describe(p.peek())));
    }
    Ok(t)
}

fn check_arities(prog: &Program) -> Result<(), LangError> {
    for c in &prog.clauses {
        for atom in std::iter::once(&c.head).chain(c.body.iter()) {
            if let Some((name, arity)) = atom.predicate() {
                let same_name: Vec<&PredicateDecl> = prog.decls.iter().filter(|d| d.name == name).collect();
                if !same_name.is_empty() && !same_name.iter().any(|d| d.arity == arity) {
                    return Err(LangError::Arity {
                        name: name.to_string(),
                        declared: same_name[0].arity,
                        found: arity,
                    });
                }
            }
        }
    }
    Ok(())
}

fn auto_declare(prog: &mut Program) {
    let default = Sym::new(DEFAULT_DTYPE);
    let mut needs_pool = false;
    for (name, arity) in prog.predicates() {
        if prog.decl(name, arity).is_none() {
            needs_pool |= arity > 0;
            prog.decls.push(PredicateDecl { name, arity, dtypes: vec![default; arity], auto: true });
        }
    }
    if needs_pool && !prog.dtypes.contains_key(&default) {
        let pool = prog.constants();
        prog.dtypes.insert(default, pool);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::render::{render_clause, render_program};

    #[test]
    fn parses_rule() {
        let p = parse_program("same_shape_pair(X,Y):-shape(X,Z),shape(Y,Z).").unwrap();
        assert_eq!(p.clauses.len(), 1);
        assert_eq!(p.clauses[0].head.args().len(), 2);
        assert_eq!(p.clauses[0].body.len(), 2);
    }

    #[test]
    fn parses_weighted_fact() {
        let p = parse_program("0.5: night.").unwrap();
        assert_eq!(p.clauses[0].weight, 0.5);
        assert!(p.clauses[0].is_fact());
    }

    #[test]
    fn integer_literal_is_peano() {
        let p = parse_program("p(2).").unwrap();
        assert_eq!(p.clauses[0].head.args()[0], Term::peano(2));
    }

    #[test]
    fn plus_one_is_succ() {
        let t = parse_term("move(move_right,pos_hori(O,X),pos_hori(O,X+1))").unwrap();
        assert_eq!(t.args()[2].args()[1], Term::succ_n(Term::var("X"), 1));
    }

    #[test]
    fn weight_out_of_range() {
        assert!(matches!(parse_program("1.5: a."), Err(LangError::Weight { .. })));
    }

    #[test]
    fn arity_mismatch() {
        let e = parse_program("#pred p/2 [d,d].\np(a).").unwrap_err();
        assert!(matches!(e, LangError::Arity { .. }));
    }

    #[test]
    fn syntax_error_has_position() {
        match parse_program("p(a).\nq(b") {
            Err(LangError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn anonymous_variables_are_distinct() {
        let p = parse_program("p(_,_).").unwrap();
        let a = p.clauses[0].head.args();
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn declarations_and_pools() {
        let p = parse_program("#dtype node {a,b}.\n#pred edge/2 [node,node].\nedge(a,b).\nfoo(c).").unwrap();
        assert_eq!(p.dtypes[&Sym::new("node")].len(), 2);
        assert!(!p.decl(Sym::new("edge"), 2).unwrap().auto);
        assert!(p.decl(Sym::new("foo"), 1).unwrap().auto);
        assert_eq!(p.dtypes[&Sym::new(DEFAULT_DTYPE)], vec![Term::constant("a"), Term::constant("b"), Term::constant("c")]);
    }

    #[test]
    fn clause_roundtrip() {
        let src = "0.9: h(X,[a,b|T],3) :- b((X,Y)), c((Y:-true)), d(X+2).";
        let p = parse_program(src).unwrap();
        let again = parse_program(&render_clause(&p.clauses[0])).unwrap();
        assert_eq!(p.clauses, again.clauses);
        let whole = parse_program(&render_program(&p)).unwrap();
        assert_eq!(whole.clauses, p.clauses);
    }

    #[test]
    fn comments_are_skipped() {
        let p = parse_program("% header\na. % trailing\n").unwrap();
        assert_eq!(p.clauses.len(), 1);
    }
}
