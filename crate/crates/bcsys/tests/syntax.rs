use bcsys::syntax::*;
use proptest::prelude::*;

fn u_el() -> BindingSignature {
    parse_signature("type U; type El(tm)").unwrap()
}

fn pi_sig() -> BindingSignature {
    parse_signature(
        "# dependent products\n\
         type U\n\
         type El(tm)\n\
         type Pi(ty, tm^1.ty)\n\
         term lam(ty, tm^1.tm)\n\
         term app(tm, tm)\n",
    )
    .unwrap()
}

#[test]
fn parses_declarations() {
    let s = u_el();
    assert_eq!(s.formers.len(), 2);
    assert_eq!(s.formers[1].args, vec![ArgSpec { sort: Sort::Tm, binds: 0 }]);
    let p = pi_sig();
    assert_eq!(p.formers[2].args[1], ArgSpec { sort: Sort::Ty, binds: 1 });
    assert_eq!(parse_signature("").unwrap(), BindingSignature::default());
    assert_eq!(parse_signature("  # nothing\n\n").unwrap().formers.len(), 0);
    // printing and re-parsing is the identity
    assert_eq!(parse_signature(&p.to_string()).unwrap(), p);
}

#[test]
fn rejects_bad_input() {
    match parse_signature("type U\ntype Bad(ty^1.ty)") {
        Err(SyntaxError::BindsType { line: 2, col: 10, .. }) => {}
        other => panic!("{other:?}"),
    }
    match parse_signature("type U; type U") {
        Err(SyntaxError::Duplicate { line: 1, col: 14, .. }) => {}
        other => panic!("{other:?}"),
    }
    match parse_signature("type El(tm") {
        Err(SyntaxError::Parse { line: 1, .. }) => {}
        other => panic!("{other:?}"),
    }
    assert!(parse_signature("kind U").is_err());
    assert!(parse_signature("type F(tm^.ty)").is_err());
}

#[test]
fn enumerates_u_el() {
    let s = u_el();
    let (ty, tm) = enumerate_raw(&s, 0, 2);
    assert_eq!(ty.len(), 1);
    assert!(tm.is_empty());
    let (ty, tm) = enumerate_raw(&s, 1, 2);
    let names: Vec<String> = ty.iter().map(|e| e.render(&s)).collect();
    assert_eq!(names, ["U", "El(0)"]);
    assert_eq!(tm, vec![RawExpr::Var(0)]);
    assert_eq!(enumerate_raw(&s, 2, 2).0.len(), 3);
}

#[test]
fn enumerates_binders() {
    let s = pi_sig();
    let (ty, _) = enumerate_raw(&s, 0, 3);
    // El needs a closed term, and the smallest is lam(U, x.x)
    let names: Vec<String> = ty.iter().map(|e| e.render(&s)).collect();
    assert_eq!(names, ["U", "El(lam(U,^1.0))", "Pi(U,^1.U)", "Pi(U,^1.El(0))"]);
    let (_, tm) = enumerate_raw(&s, 0, 2);
    // lam(U, x.x) is the only closed term of size ≤ 2
    assert_eq!(tm.len(), 1);
    for e in enumerate_raw(&s, 1, 3).0.iter().chain(&enumerate_raw(&s, 1, 3).1) {
        assert!(e.size() <= 3);
    }
}

#[test]
fn syntactic_frame_counts() {
    let f = build_syntactic_bframe(&u_el(), 3, 2).unwrap();
    let ctx: Vec<usize> = (0..=3).map(|n| f.frame.ctxs_at(n).len()).collect();
    assert_eq!(ctx, [1, 1, 2, 6]);
    let tms: Vec<usize> = (1..=3).map(|n| f.frame.tms().filter(|&t| f.frame.tm_level(t) == n).count()).collect();
    assert_eq!(tms, [0, 2, 12]);
}

#[test]
fn syntactic_structure_is_a_b_system() {
    for (sig, h, bound) in [(u_el(), 3, 2), (pi_sig(), 2, 2)] {
        let f = build_syntactic_bframe(&sig, h, bound).unwrap();
        let (_, r) = f.structure_report();
        assert!(r.all_pass(), "{r}");
    }
    // Pi grows under substitution, so some substitutions leave the bound
    let f = build_syntactic_bframe(&pi_sig(), 2, 2).unwrap();
    let (_, p) = f.structure();
    assert!(p.subst_out_of_bound > 0 && p.subst_defined > 0);
    let f = build_syntactic_bframe(&u_el(), 3, 2).unwrap();
    assert_eq!(f.structure().1.subst_out_of_bound, 0);
}

#[test]
fn generic_element_is_the_last_variable() {
    let s = u_el();
    let f = build_syntactic_bframe(&s, 3, 2).unwrap();
    let (b, _) = f.structure();
    let u = RawExpr::Form { former: 0, args: vec![] };
    let x = f.ctx_of(std::slice::from_ref(&u)).unwrap();
    let d = b.delta(x).unwrap();
    assert_eq!(f.element[d as usize], (x, RawExpr::Var(0), u.clone()));
    assert_eq!(f.frame.bd(d), f.ctx_of(&[u.clone(), u]).unwrap());
    assert_eq!(Some(f.frame.bd(d)), b.w(x).at(x));
}

fn expr(depth: u32) -> impl Strategy<Value = RawExpr> {
    let leaf = (0u32..4).prop_map(RawExpr::Var);
    leaf.prop_recursive(depth, 16, 3, |inner| {
        prop::collection::vec((0u32..2, inner), 0..3).prop_map(|args| RawExpr::Form { former: 0, args })
    })
}

proptest! {
    #[test]
    fn subst_after_shift_is_identity(e in expr(3), j in 0u32..3, s in expr(2)) {
        prop_assert_eq!(e.shift(j, 1).subst(j, &s), e);
    }

    #[test]
    fn shift_is_injective(a in expr(3), b in expr(3), j in 0u32..3) {
        prop_assert_eq!(a.shift(j, 1) == b.shift(j, 1), a == b);
    }

    #[test]
    fn enumeration_is_deterministic(n in 0u32..3, bound in 1u32..3) {
        let s = pi_sig();
        prop_assert_eq!(enumerate_raw(&s, n, bound), enumerate_raw(&s, n, bound));
    }
}
