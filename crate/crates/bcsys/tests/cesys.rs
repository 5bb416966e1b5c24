use bcsys::cat::{validate_functor, Functor};
use bcsys::cesys::*;
use bcsys::report::Status;

#[test]
fn finset_ce_validates() {
    for n in 0..=3 {
        let a = build_finset_cesystem(n);
        let r = validate_cesystem(&a, CEFlags::ALL);
        assert!(r.all_pass(), "n={n}\n{r}");
        assert!(a.is_rooted());
    }
}

#[test]
fn finset_ce_counts() {
    // arrows of 𝔽^op truncated at 2: Σ_{m,k ≤ 2} m^k
    let a = build_finset_cesystem(2);
    let expect: u32 = (0..=2u32).flat_map(|m| (0..=2u32).map(move |k| m.pow(k))).sum();
    assert_eq!(a.base.n_arrows() as u32, expect);
    assert_eq!(a.fam.n_arrows(), 6);
    let r = validate_cesystem(&a, CEFlags::ALL);
    // the square law enumerates every pullback that fits, none missing
    let sq = r.get("pullback-square").unwrap();
    assert_eq!(sq.checked as usize, a.pb.len());
    assert!(r.get("CE-d").unwrap().checked > 0);
}

#[test]
fn twisted_ce_is_not_rooted() {
    let a = build_twisted_finset_cesystem(2);
    let r = validate_cesystem(&a, CEFlags { rooted: false, stratified: true });
    assert!(r.all_pass(), "{r}");
    let r = validate_cesystem(&a, CEFlags::ALL);
    assert_eq!(r.failures(), vec!["rooted"]);
    assert!(!a.is_rooted());
}

#[test]
fn broken_projection_is_caught() {
    let mut a = build_finset_cesystem(2);
    // replace one π₂ by a different parallel arrow
    let key = a
        .pb_keys()
        .into_iter()
        .find(|&(f, fa)| !a.fam.is_id(fa) && !a.base.is_id(f) && {
            let p2 = a.pb[&(f, fa)].1;
            a.base.hom(a.base.dom(p2), a.base.cod(p2)).len() > 1
        })
        .unwrap();
    let (fs, p2) = a.pb[&key];
    let other = *a.base.hom(a.base.dom(p2), a.base.cod(p2)).iter().find(|&&x| x != p2).unwrap();
    a.pb.insert(key, (fs, other));
    let r = validate_cesystem(&a, CEFlags::ALL);
    assert!(!r.all_pass());
}

#[test]
fn slices_are_rooted_ce_systems() {
    let a = build_finset_cesystem(3);
    for g in a.base.objects() {
        let s = slice_cesystem(&a, g);
        let r = validate_cesystem(&s.ce, CEFlags::ALL);
        assert!(r.all_pass(), "over {g}\n{r}");
        assert_eq!(s.ce.fam.n_objects() as u32, 3 - g + 1);
    }
    // the slice over the root is the system itself
    let s = slice_cesystem(&a, a.root);
    assert_eq!(s.ce.base.n_arrows(), a.base.n_arrows());
}

#[test]
fn pullback_is_a_ce_hom_of_slices() {
    let a = build_finset_cesystem(3);
    let mut seen = 0;
    for f in a.base.arrows() {
        if let Some((sg, sd, h)) = pullback_slice_hom(&a, f) {
            let r = validate_ce_hom(&sg.ce, &sd.ce, &h, true);
            assert!(r.all_pass(), "f={}\n{r}", a.base.arr_name(f));
            seen += 1;
        }
    }
    assert!(seen > 10);
}

#[test]
fn identity_and_non_hom() {
    let a = build_finset_cesystem(2);
    let id = CEHom::identity(&a);
    assert!(check_ce_iso(&a, &a, &id, &id, true).all_pass());
    assert!(validate_functor(&a.fam, &a.base, &a.i_functor(), None).all_pass());
    // arrow indices do not line up with the doubled base
    let bad = CEHom { fam: Functor::identity(&a.fam), base: Functor::identity(&a.base) };
    let b = build_twisted_finset_cesystem(2);
    let r = validate_ce_hom(&a, &b, &bad, false);
    assert!(!r.all_pass());
    assert!(r.entries.iter().any(|e| matches!(e.status, Status::Fail(_))));
}
