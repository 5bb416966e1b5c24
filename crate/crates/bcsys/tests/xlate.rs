use bcsys::bsys::*;
use bcsys::cat::Functor;
use bcsys::cesys::*;
use bcsys::csys::*;
use bcsys::esys::*;
use bcsys::xlate::*;
use proptest::prelude::*;

fn inclusion(small: &BSystem) -> BHom {
    let f = &small.frame;
    BHom { ctx: f.ctxs().map(|x| (x, x)).collect(), tm: f.tms().map(|t| (t, t)).collect() }
}

#[test]
fn b_to_e_is_a_stratified_e_system() {
    for n in 0..=4 {
        let b = build_finset_bsystem(n);
        let e = b_to_e(&b);
        let r = validate_esystem(&e);
        assert!(r.all_pass(), "height {n}\n{r}");
        assert_eq!(e.stratification().unwrap().max_level(), n);
    }
}

#[test]
fn e_to_b_of_nat() {
    let nat = NatE::new(3);
    let eb = e_to_b(&nat).unwrap();
    let f = &eb.b.frame;
    assert!(validate_bsystem(&eb.b).all_pass());
    for n in 0..=3 {
        assert_eq!(f.ctxs().filter(|&x| f.level(x) == n).count(), 1);
    }
    for n in 1..=3 {
        // individual arrows n → n−1 of 𝒩 carry the functions [1] → [n−1]
        assert_eq!(f.tms().filter(|&t| f.tm_level(t) == n).count() as u32, n - 1);
    }
    // δ on level n is the last element, as in the finite-set system
    let fin = build_finset_bsystem(3);
    for x in f.ctxs().filter(|&x| f.level(x) > 0 && f.level(x) < 3) {
        let d = eb.b.delta(x).unwrap();
        let y = fin.frame.ctxs().find(|&y| fin.frame.level(y) == f.level(x)).unwrap();
        let want = fin.delta(y).unwrap();
        let (_, i) = finset_decode(want);
        let t = eb.term_of_tm[d as usize];
        assert_eq!(nat.decode(t), vec![i]);
    }
}

#[test]
fn terminal_translations() {
    let b = build_finset_bsystem(0);
    let e = b_to_e(&b);
    assert_eq!(e.cat().n_objects(), 1);
    assert_eq!(e_to_b(&NatE::new(0)).unwrap().b.frame.height(), 0);
    let a = build_finset_cesystem(0);
    let ce = ce_to_e(&a);
    assert_eq!((ce.e.cat.n_objects(), ce.e.n_terms()), (1, 1));
    assert_eq!(e_to_ce(&NatE::new(0)).unwrap().ce.base.n_arrows(), 1);
    let c = ce_to_c(&a).unwrap();
    assert_eq!(c.cat.n_objects(), 1);
}

#[test]
fn b_roundtrip_is_the_one_element_pairing() {
    for n in 0..=4 {
        let b = build_finset_bsystem(n);
        let (e, eb, iso) = b_roundtrip_iso(&b).unwrap();
        assert!(iso.verified(), "height {n}\n{}", iso.report);
        for x in b.frame.tms() {
            let t = eb.term_of_tm[iso.fwd.tm[&x] as usize];
            assert_eq!(e.list(t), &[x]);
        }
    }
}

#[test]
fn nat_is_b_to_e_of_finite_sets() {
    for n in 0..=4 {
        let nat = NatE::new(n);
        let e = b_to_e(&build_finset_bsystem(n));
        let w = nat_to_finset_iso(&nat, &e).unwrap();
        assert!(w.verified(), "height {n}\n{}", w.report);
    }
}

#[test]
fn c_and_ce_round_trips() {
    for n in 0..=3 {
        let a = build_finset_cesystem(n);
        let (c, back, w) = comp_iso(&a).unwrap();
        assert!(validate_csystem(&c).all_pass());
        for o in c.cat.objects() {
            assert_eq!(c.len[o as usize], o);
        }
        assert!(validate_cesystem(&back.ce, CEFlags::ALL).all_pass());
        assert!(w.verified(), "height {n}\n{}", w.report);
        // individual families of c_to_ce are the projections, and levels are lengths
        let s = back.ce.fam_strat().unwrap();
        for o in c.cat.objects() {
            assert_eq!(s.level(o), c.len[o as usize]);
            if let Some(p) = s.individual(o) {
                assert_eq!(Some(back.ce.i_arr(p)), c.proj[o as usize]);
            }
        }
        // ce_to_c ∘ c_to_ce is the identity on the nose
        let again = ce_to_c(&back.ce).unwrap();
        assert_eq!(again.cat, c.cat);
        assert_eq!((&again.len, &again.ft, &again.proj), (&c.len, &c.ft, &c.proj));
        assert_eq!(again.pb, c.pb);
    }
}

#[test]
fn ce_to_e_of_finite_sets_is_nat() {
    for n in 0..=3 {
        let a = build_finset_cesystem(n);
        let e = ce_to_e(&a);
        assert!(validate_esystem(&e.e).all_pass());
        for q in e.e.cat.arrows().filter(|&q| e.e.cat.is_id(q)) {
            assert_eq!(e.e.terms(q).len(), 1);
        }
        let w = finset_ce_to_nat_iso(&e, &FinsetOp::new(n), &NatE::new(n)).unwrap();
        assert!(w.verified(), "height {n}\n{}", w.report);
    }
}

#[test]
fn e_to_ce_of_nat_counts_internal_morphisms() {
    let nat = NatE::new(9);
    let ce = e_to_ce(&nat).unwrap();
    assert_eq!(ce.m, 3);
    let r = validate_cesystem(&ce.ce, CEFlags::ALL);
    assert!(r.all_pass(), "{r}");
    let base = &ce.ce.base;
    for d in base.objects() {
        for g in base.objects() {
            let (n, m) = (ce.obj[g as usize], ce.obj[d as usize]);
            // internal morphisms m → n are functions [n] → [m]
            assert_eq!(base.hom(d, g).len() as u32, m.pow(n), "hom({m}, {n})");
        }
    }
}

#[test]
fn unit_and_counit() {
    for n in [3, 6, 9] {
        let u = unit(&NatE::new(n)).unwrap();
        assert!(u.report.all_pass(), "η at {n}\n{}", u.report);
    }
    let u = unit(&b_to_e(&build_finset_bsystem(6))).unwrap();
    assert!(u.report.all_pass(), "{}", u.report);
    for n in 0..=3 {
        let c = counit(&build_finset_cesystem(n)).unwrap();
        assert!(c.inverse.is_some() && c.report.all_pass(), "ε at {n}\n{}", c.report);
    }
    let c = counit(&build_twisted_finset_cesystem(2)).unwrap();
    assert!(c.inverse.is_none());
    assert_eq!(c.report.failures(), vec!["invertible"]);
}

#[test]
fn triangles() {
    for n in [3, 9] {
        let (r, _) = triangle_e(&NatE::new(n)).unwrap();
        assert!(r.all_pass(), "{r}");
    }
    for n in 1..=3 {
        let (r, _) = triangle_ce(&build_finset_cesystem(n)).unwrap();
        assert!(r.all_pass(), "{r}");
    }
}

#[test]
fn unpairing_in_ce_derived_e_systems() {
    let a = build_finset_cesystem(3);
    let e = ce_to_e(&a);
    let eb = e_to_b(&e.e).unwrap();
    let e2 = b_to_e(&eb.b);
    let w = unpair_iso(&a, &e, &eb, &e2).unwrap();
    assert!(w.verified(), "{}", w.report);
}

#[test]
fn composite_round_trips() {
    let b = build_finset_bsystem(3);
    let rt = roundtrip_b(&b).unwrap();
    assert!(rt.iso.verified(), "{}", rt.iso.report);
    assert_eq!(rt.target.frame.height(), 1);

    let c = ce_to_c(&build_finset_cesystem(3)).unwrap();
    let rt = roundtrip_c(&c).unwrap();
    assert!(rt.iso.verified(), "{}", rt.iso.report);
    // c2b of finite-set contexts is the finite-set B-system
    let back = c2b(&c).unwrap();
    let h = c2b_finset_iso(&back);
    assert!(h.report.all_pass(), "{}", h.report);
}

/// c2b(finite sets) → e_to_b(𝒩) → e_to_b(b_to_e(finite sets)) → finite sets.
fn c2b_finset_iso(back: &C2B) -> IsoWitness<BHom> {
    let nat = NatE::new(3);
    let fin = build_finset_bsystem(3);
    let (e, eb, w0) = b_roundtrip_iso(&fin).unwrap();
    let x = e_to_b(&nat).unwrap();
    let w1 = finset_ce_to_nat_iso(&back.e, &FinsetOp::new(3), &nat).unwrap();
    let w2 = nat_to_finset_iso(&nat, &e).unwrap();
    let to_x = e_hom_to_b(&back.b, &x, &w1.fwd).unwrap();
    let to_eb = e_hom_to_b(&x, &eb, &w2.fwd).unwrap();
    let fwd = to_x.then(&to_eb).then(&w0.bwd);
    let bwd = fwd.inverse().unwrap();
    let report = check_b_iso(&back.b.b, &fin, &fwd, &bwd);
    IsoWitness { fwd, bwd, report }
}

#[test]
fn stage_failures_name_the_stage() {
    let mut c = ce_to_c(&build_finset_cesystem(2)).unwrap();
    let o = c.cat.objects().find(|&o| c.len[o as usize] == 2).unwrap();
    c.len[o as usize] = 1;
    match c2b(&c) {
        Err(XlateError::Stage { stage, .. }) => assert_eq!(stage, "input"),
        other => panic!("expected a stage error, got {:?}", other.map(|_| ())),
    }
    assert!(matches!(ce_to_c(&build_twisted_finset_cesystem(2)), Err(XlateError::NotRooted(_))));
    assert!(matches!(e_to_b(&GroupE::s3()), Err(XlateError::NotStratified(_))));
}

#[test]
fn hom_translation_is_functorial() {
    let big = build_finset_bsystem(4);
    let mid = big.truncate(2);
    let small = big.truncate(1);
    let (eb, em, es) = (b_to_e(&big), b_to_e(&mid), b_to_e(&small));
    let (i_sm, i_mb) = (inclusion(&small), inclusion(&mid));
    let f_sm = b_hom_to_e(&es, &em, &i_sm).unwrap();
    let f_mb = b_hom_to_e(&em, &eb, &i_mb).unwrap();
    let f_sb = b_hom_to_e(&es, &eb, &i_sm.then(&i_mb)).unwrap();
    assert!(validate_ehom(&es, &em, &f_sm).all_pass());
    assert!(validate_ehom(&em, &eb, &f_mb).all_pass());
    assert_eq!(f_mb.after(&f_sm), f_sb);
    // and back: every E-hom between translated systems comes from a B-hom
    let (bs, bb) = (e_to_b(&es).unwrap(), e_to_b(&eb).unwrap());
    let g = e_hom_to_b(&bs, &bb, &f_sb).unwrap();
    for x in small.frame.ctxs() {
        assert_eq!(g.at(bs.ctx_of_obj[x as usize]), Some(bb.ctx_of_obj[x as usize]));
    }
    assert_eq!(b_hom_to_e(&eb, &eb, &BHom::identity(&big.frame, big.frame.root())).unwrap(), EHom::identity(&eb));
}

#[test]
fn ce_hom_translation() {
    let a = build_finset_cesystem(2);
    let e = ce_to_e(&a);
    let id = ce_hom_to_e(&e, &e, &CEHom::identity(&a)).unwrap();
    assert_eq!(id, EHom::identity(&e.e));
    let x = e_to_ce(&NatE::new(6)).unwrap();
    let h = e_hom_to_ce(&x, &x, &EHom::identity(&NatE::new(6))).unwrap();
    assert_eq!(h, CEHom::identity(&x.ce));
    assert_eq!(h.base, Functor::identity(&x.ce.base));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn translations_validate(n in 0u32..=4) {
        let b = build_finset_bsystem(n);
        let e = b_to_e(&b);
        prop_assert!(validate_esystem(&e).all_pass());
        let eb = e_to_b(&e).unwrap();
        prop_assert!(validate_bsystem(&eb.b).all_pass());
        let ce = e_to_ce(&e).unwrap();
        prop_assert!(validate_cesystem(&ce.ce, CEFlags::ALL).all_pass());
        let c = ce_to_c(&ce.ce).unwrap();
        prop_assert!(validate_csystem(&c).all_pass());
    }

    #[test]
    fn b_to_e_term_counts(n in 0u32..=4, k in 0u32..=4) {
        prop_assume!(n + k <= 4);
        let e = b_to_e(&build_finset_bsystem(4));
        let a = e.tree.arrow(n + k, k);
        prop_assert_eq!(e.terms(a).len() as u64, u64::from(n).pow(k));
    }
}

#[test]
fn composite_round_trip_keeps_a_third_of_the_height() {
    let rt = roundtrip_b(&build_finset_bsystem(6)).unwrap();
    assert_eq!(rt.target.frame.height(), 2);
    assert!(rt.iso.verified(), "{}", rt.iso.report);
}
