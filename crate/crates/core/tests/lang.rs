use nemesys::lang::{apply, match_ground, parse_program, parse_term, render_clause, render_term, unify, Clause, Subst, Term};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Term> {
    prop_oneof![
        prop::sample::select(vec!["a", "b", "obj0", "triangle", "hello world", "it's"]).prop_map(Term::constant),
        prop::sample::select(vec!["X", "Y", "Z", "Body_Atom"]).prop_map(Term::var),
    ]
}

fn term() -> impl Strategy<Value = Term> {
    leaf().prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            (prop::sample::select(vec!["f", "g", "edge"]), prop::collection::vec(inner.clone(), 1..=3))
                .prop_map(|(f, args)| Term::compound(f, args)),
            prop::collection::vec(inner.clone(), 0..=3).prop_map(Term::list),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::conj(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Term::neck(a, b)),
        ]
    })
}

fn ground_term() -> impl Strategy<Value = Term> {
    term().prop_map(|t| {
        let mut vs = Vec::new();
        t.vars(&mut vs);
        let mut s = Subst::new();
        for v in vs {
            s.bind(v, Term::constant("k"));
        }
        apply(&t, &s)
    })
}

fn atom() -> impl Strategy<Value = Term> {
    (prop::sample::select(vec!["p", "q", "same_shape_pair"]), prop::collection::vec(term(), 1..=3)).prop_map(|(f, a)| Term::compound(f, a))
}

proptest! {
    #[test]
    fn terms_round_trip(t in term()) {
        let text = render_term(&t);
        prop_assert_eq!(parse_term(&text).unwrap(), t, "{}", text);
    }

    #[test]
    fn clauses_round_trip(head in atom(), body in prop::collection::vec(atom(), 0..=3), w in prop::sample::select(vec![1.0, 0.5, 0.98, 0.02, 0.0])) {
        let c = Clause::new(head, body, w);
        let text = render_clause(&c);
        let p = parse_program(&text).unwrap();
        prop_assert_eq!(p.clauses.len(), 1);
        prop_assert_eq!(&p.clauses[0].head, &c.head);
        prop_assert_eq!(&p.clauses[0].body, &c.body);
        prop_assert_eq!(p.clauses[0].weight, c.weight);
    }

    #[test]
    fn unifiers_make_both_sides_equal(a in term(), b in term()) {
        if let Some(s) = unify(&a, &b, &Subst::new()) {
            prop_assert_eq!(apply(&a, &s), apply(&b, &s));
        }
    }

    #[test]
    fn a_term_unifies_with_its_instances(t in term(), g in ground_term()) {
        let mut vs = Vec::new();
        t.vars(&mut vs);
        let mut theta = Subst::new();
        for v in vs {
            theta.bind(v, g.clone());
        }
        let inst = apply(&t, &theta);
        let s = unify(&t, &inst, &Subst::new());
        prop_assert!(s.is_some());
        prop_assert_eq!(apply(&t, &s.unwrap()), inst.clone());
        let mut m = Subst::new();
        prop_assert!(match_ground(&t, &inst, &mut m));
        prop_assert_eq!(apply(&t, &m), inst);
    }

    #[test]
    fn matching_agrees_with_unification_on_ground_terms(p in term(), g in ground_term()) {
        let m = match_ground(&p, &g, &mut Subst::new());
        let u = unify(&p, &g, &Subst::new()).is_some();
        prop_assert_eq!(m, u);
    }
}

#[test]
fn occurs_check_blocks_cyclic_bindings() {
    let x = Term::var("X");
    assert!(unify(&x, &Term::compound("f", vec![x.clone()]), &Subst::new()).is_none());
    let l = parse_term("[X|X]").unwrap();
    assert!(unify(&x, &l, &Subst::new()).is_none());
}

#[test]
fn syntax_errors_point_at_the_line() {
    let e = parse_program("p(a).\nq(b :- r.\n").unwrap_err().to_string();
    assert!(e.contains("line 2"), "{e}");
}

#[test]
fn weights_and_lists_parse() {
    let p = parse_program("0.9: patient :- medicine_a, medicine_b.\npath(A,A,[]).").unwrap();
    assert_eq!(p.clauses[0].weight, 0.9);
    assert_eq!(p.clauses[0].body.len(), 2);
    assert_eq!(p.clauses[1].weight, 1.0);
    assert_eq!(p.clauses[1].head.args()[2], Term::nil());
}

fn ground_subst(t: &Term, pick: &[bool], g: &Term) -> (Subst, Subst) {
    let mut vs = Vec::new();
    t.vars(&mut vs);
    vs.sort();
    vs.dedup();
    let (mut all, mut part) = (Subst::new(), Subst::new());
    for (i, v) in vs.into_iter().enumerate() {
        let val = Term::compound("w", vec![g.clone(), Term::constant(&format!("c{i}"))]);
        all.bind(v, val.clone());
        if pick.get(i).copied().unwrap_or(false) {
            part.bind(v, val);
        }
    }
    (all, part)
}

proptest! {
    #[test]
    fn unifiers_are_most_general(t in term(), g in ground_term(), p1 in prop::collection::vec(any::<bool>(), 6), p2 in prop::collection::vec(any::<bool>(), 6)) {
        // a and b are partial instances of t; both match the full instance.
        let (all, part1) = ground_subst(&t, &p1, &g);
        let (_, part2) = ground_subst(&t, &p2, &g);
        let (a, b, full) = (apply(&t, &part1), apply(&t, &part2), apply(&t, &all));
        let mut direct = Subst::new();
        prop_assert!(match_ground(&a, &full, &mut direct) && match_ground(&b, &full, &mut direct));
        let s = unify(&a, &b, &Subst::new()).expect("common instance exists");
        prop_assert!(match_ground(&apply(&a, &s), &full, &mut Subst::new()));
    }
}

#[test]
fn corpus_programs_round_trip() {
    let root = env!("CARGO_MANIFEST_DIR");
    let mut seen = 0;
    for dir in ["fixtures", "interpreters"] {
        for entry in std::fs::read_dir(format!("{root}/{dir}")).unwrap() {
            let path = entry.unwrap().path();
            let p = parse_program(&std::fs::read_to_string(&path).unwrap()).unwrap();
            let again = parse_program(&nemesys::lang::render_program(&p)).unwrap();
            assert_eq!(again.clauses.len(), p.clauses.len(), "{}", path.display());
            for (x, y) in p.clauses.iter().zip(&again.clauses) {
                assert_eq!((&x.head, &x.body, x.weight), (&y.head, &y.body, y.weight), "{}", path.display());
            }
            assert_eq!(again.support_from, p.support_from);
            seen += 1;
        }
    }
    assert!(seen >= 10);
}
