use bcsys::bsys::*;

#[test]
fn finset_heights_validate() {
    for n in 0..=5 {
        let b = build_finset_bsystem(n);
        let r = validate_bsystem(&b);
        assert!(r.all_pass(), "height {n}:\n{r}");
    }
}

#[test]
fn finset_counts() {
    let b = build_finset_bsystem(5);
    for n in 0..=5 {
        assert_eq!(b.frame.ctxs_at(n).len(), 1);
        // B̃_{n+1} = [n]
        if n < 5 {
            assert_eq!(b.frame.tms_at(n + 1).len(), n as usize);
        }
    }
}

#[test]
fn wrong_generic_element_breaks_the_axioms() {
    let mut b = build_finset_bsystem(4);
    let x = b.frame.ctxs_at(2)[0];
    assert_eq!(b.frame.tm_name(b.delta(x).unwrap()), "1");
    // same boundary, so only the equational laws can notice
    b.gen[x as usize] = b.frame.tm_by_name(3, "0");
    let r = validate_bsystem(&b);
    assert_eq!(r.failures(), ["axiom-1", "axiom-2", "axiom-5"], "{r}");
}

#[test]
fn missing_weakening_entry() {
    let mut b = build_finset_bsystem(3);
    let x = b.frame.ctxs_at(2)[0];
    assert!(b.weak[x as usize].ctx.remove(&x).is_some());
    assert_eq!(validate_bsystem(&b).failures(), ["weak-typing", "gen-typing"]);
    // partiality excuses the hom, not the boundary of δ(X), which needs W_X(X)
    assert_eq!(validate_partial_bsystem(&b).failures(), ["gen-typing"]);
}

#[test]
fn frame_construction_errors() {
    let mut f = BFrame::new(1);
    let root = f.add_ctx(0, "()", None).unwrap();
    assert_eq!(f.add_ctx(2, "x", Some(root)), Err(BError::Level(2)));
    assert_eq!(f.add_ctx(0, "()", None), Err(BError::Duplicate { level: 0, name: "()".into() }));
    assert!(matches!(f.add_ctx(1, "y", Some(9)), Err(BError::Dangling(_))));
    assert_eq!(f.add_tm(0, "t", root), Err(BError::Level(0)));
    assert!(validate_bframe(&f).all_pass());

    // two roots
    f.add_ctx(0, "()'", None).unwrap();
    assert_eq!(validate_bframe(&f).failures(), ["root-singleton"]);
}

#[test]
fn truncation_is_the_smaller_system() {
    let big = build_finset_bsystem(5);
    for m in 0..=5 {
        let t = big.truncate(m);
        let small = build_finset_bsystem(m);
        assert_eq!(t.frame, small.frame);
        assert!(validate_bsystem(&t).all_pass());
        for x in t.frame.ctxs() {
            assert_eq!(t.delta(x), small.delta(x));
        }
    }
}

#[test]
fn substitution_and_weakening_on_variables() {
    // both examples reach B̃_4, so they need height 4
    let b = build_finset_bsystem(4);
    let f = &b.frame;
    let var = |level: u32, i: u32| f.tm_by_name(level, &i.to_string()).unwrap();

    // S_x for x = 1 ∈ B̃_3 = [2]: variables [3] → [2] as [id_2, 1]
    let sx = b.s(var(3, 1));
    let got: Vec<Tm> = (0..3).map(|i| sx.at_tm(var(4, i)).unwrap()).collect();
    assert_eq!(got, [var(3, 0), var(3, 1), var(3, 1)]);

    // W_X for X = 2 over ft X = 1: variables [2] → [3] as i_1 + id_1
    let x = f.ctx_by_name(2, "2").unwrap();
    let w = b.w(x);
    let got: Vec<Tm> = (0..2).map(|i| w.at_tm(var(3, i)).unwrap()).collect();
    assert_eq!(got, [var(4, 0), var(4, 2)]);
}
