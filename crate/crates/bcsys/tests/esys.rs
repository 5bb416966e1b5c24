use bcsys::esys::*;
use proptest::prelude::*;

#[test]
fn nat_e_validates() {
    for h in 0..=4 {
        let e = build_nat_esystem(h);
        let r = validate_esystem(&e);
        assert!(r.all_pass(), "height {h}:\n{r}");
    }
}

#[test]
fn nat_e_term_counts() {
    // |T(n, k)| = n^k, independently counted from the arrow list
    let e = build_nat_esystem(4);
    let mut total = 0;
    for n in 0..=4u32 {
        for k in 0..=(4 - n) {
            let a = e.arrow(n, k).unwrap();
            assert_eq!(e.terms(a).len() as u32, n.pow(k));
            total += n.pow(k);
        }
    }
    assert_eq!(e.n_terms() as u32, total);
}

#[test]
fn nat_e_pairing_and_calculus() {
    let e = build_nat_esystem(4);
    let r = check_pairing(&e);
    assert!(r.all_pass(), "{r}");
    let r = check_calculus(&build_nat_esystem(3));
    assert!(r.all_pass(), "{r}");
}

#[test]
fn materialized_copy_agrees() {
    let e = build_nat_esystem(3);
    let t = ESystem::materialize(&e);
    assert!(validate_esystem(&t).all_pass());
    let id = EHom::identity(&e);
    assert!(check_e_iso(&e, &t, &id, &id).all_pass());
}

#[test]
fn truncation_is_a_subsystem() {
    let e = build_nat_esystem(4);
    let t = ESystem::truncate(&e, 2).unwrap();
    assert_eq!(t.cat.n_objects(), 3);
    assert!(validate_esystem(&t).all_pass());
}

#[test]
fn s3_fails_exactly_the_expected_laws() {
    let g = GroupE::s3();
    assert_eq!(g.n_auts(), 6);
    let r = validate_esystem(&g);
    let mut f = r.failures();
    f.sort();
    assert_eq!(f, ["E-axiom-3", "E-axiom-4", "E-axiom-5", "terminal"], "{r}");
}

#[test]
fn cyclic_group_automorphisms() {
    // |Aut(Z_n)| = φ(n)
    for (n, phi) in [(1, 1), (2, 1), (3, 2), (4, 2), (5, 4), (6, 2), (8, 4)] {
        let mult = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        assert_eq!(build_group_structure(mult).unwrap().n_auts(), phi, "n={n}");
    }
}

#[test]
fn non_group_rejected() {
    let mult = vec![vec![0, 0], vec![0, 1]];
    assert!(build_group_structure(mult).is_err());
}

proptest! {
    #[test]
    fn pairing_roundtrip(n in 1u32..4, k in 0u32..2, l in 0u32..2, seed in any::<u64>()) {
        let e = build_nat_esystem(7);
        let a = e.arrow(n, k).unwrap();
        let p = e.arrow(n + k, l).unwrap();
        let ap = e.cat().comp(a, p);
        let ts = e.terms(ap);
        let s = ts[(seed as usize) % ts.len()];
        let (pr1, pr2) = projections(&e, a, p).unwrap();
        let dp = e.cat().id(e.cat().dom(p));
        let x = e.subst_term(s, pr1, dp).unwrap();
        let u = e.subst_term(s, pr2, dp).unwrap();
        prop_assert_eq!(term_extension(&e, a, p, x, u).unwrap(), s);
        // as functions: s = x ++ u
        let mut xs = e.decode(x);
        xs.extend(e.decode(u));
        prop_assert_eq!(xs, e.decode(s));
    }
}

