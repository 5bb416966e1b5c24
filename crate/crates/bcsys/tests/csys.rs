use bcsys::cat::Functor;
use bcsys::cesys::build_finset_cesystem;
use bcsys::csys::*;
use bcsys::xlate::ce_to_c;

fn finset_c(n: u32) -> CSystem {
    ce_to_c(&build_finset_cesystem(n)).unwrap()
}

#[test]
fn finite_set_contexts_validate() {
    for n in 0..=3 {
        let c = finset_c(n);
        let r = validate_csystem(&c);
        assert!(r.all_pass(), "n={n}\n{r}");
        assert_eq!(c.height(), n);
    }
}

#[test]
fn pullback_check_counts_cones() {
    let c = finset_c(2);
    let (f, gamma) = c.pb_keys().into_iter().find(|&(f, _)| !c.cat.is_id(f)).unwrap();
    let (fg, q) = c.pullback(f, gamma).unwrap();
    let (pg, pf) = (c.proj[gamma as usize].unwrap(), c.proj[fg as usize].unwrap());
    assert!(check_pullback(&c.cat, f, pg, pf, q).is_ok());
    // the projection to Γ's father cannot be the leg into Γ
    assert_eq!(check_pullback(&c.cat, f, pg, pf, pg), Err("square is ill-typed".to_string()));
    // a commuting square through the terminal is not a pullback once some hom-set has two cones
    let one = c.one;
    let x = c.cat.objects().find(|&o| c.len[o as usize] == 2).unwrap();
    let bang = |o| c.cat.hom(o, one)[0];
    let err = check_pullback(&c.cat, bang(x), bang(x), c.cat.id(x), c.cat.id(x)).unwrap_err();
    assert!(err.contains("cones"), "{err}");
}

#[test]
fn wrong_length_and_missing_projection() {
    let mut c = finset_c(2);
    c.len[1] = 2;
    assert!(!validate_csystem(&c).all_pass());
    let mut c = finset_c(2);
    c.proj[2] = None;
    assert_eq!(validate_csystem(&c).failures(), vec!["projections"]);
}

#[test]
fn wrong_pullback_object() {
    let mut c = finset_c(2);
    let key = c.pb_keys().into_iter().find(|&(f, _)| !c.cat.is_id(f)).unwrap();
    let (o, q) = c.pb[&key];
    c.pb.insert(key, (c.ft[o as usize], q));
    assert!(!validate_csystem(&c).all_pass());
}

#[test]
fn identity_is_an_iso_and_a_shift_is_not_a_hom() {
    let c = finset_c(2);
    let id = Functor::identity(&c.cat);
    assert!(check_c_iso(&c, &c, &id, &id).all_pass());
    let c3 = finset_c(3);
    // same category shape fails to match lengths in a taller system
    let r = validate_csystem_hom(&c, &c3, &id);
    assert!(!r.all_pass());
}
