use bcsys::cat::*;
use proptest::prelude::*;

/// Parent of node i > 0 drawn from 0..i.
fn parents() -> impl Strategy<Value = Vec<usize>> {
    (1usize..=16).prop_flat_map(|n| (1..n).map(|i| 0..i).collect::<Vec<_>>()).prop_map(|mut p| {
        p.insert(0, 0);
        p
    })
}

/// The tree with the given parent array, and for each object of its free
/// category the original node index.
fn tree(parent: &[usize]) -> (RootedTree, Vec<usize>) {
    let n = parent.len();
    let mut depth = vec![0usize; n];
    for i in 1..n {
        depth[i] = depth[parent[i]] + 1;
    }
    let h = depth.iter().copied().max().unwrap();
    let mut levels = vec![Vec::new(); h + 1];
    let mut pos = vec![0; n];
    for i in 0..n {
        pos[i] = levels[depth[i]].len();
        levels[depth[i]].push(format!("n{i}"));
    }
    let mut par = vec![Vec::new(); h + 1];
    for i in 1..n {
        par[depth[i]].push(pos[parent[i]]);
    }
    let mut node = Vec::new();
    for d in 0..=h {
        node.extend((0..n).filter(|&i| depth[i] == d));
    }
    (RootedTree { levels, parent: par }, node)
}

fn ancestor_or_self(parent: &[usize], mut x: usize, y: usize) -> bool {
    loop {
        if x == y {
            return true;
        }
        if x == 0 {
            return false;
        }
        x = parent[x];
    }
}

proptest! {
    #[test]
    fn free_tree_categories(parent in parents()) {
        let (t, node) = tree(&parent);
        prop_assert!(t.validate().is_ok());
        let (c, s) = free_cat_of_tree(&t);
        let r = validate_fincat(&c);
        prop_assert!(r.all_pass(), "{}", r);
        // one arrow x → y exactly when y is on the path from x to the root
        for x in c.objects() {
            for y in c.objects() {
                let want = usize::from(ancestor_or_self(&parent, node[x as usize], node[y as usize]));
                prop_assert_eq!(c.hom(x, y).len(), want);
            }
        }
        let s2 = stratify(&c).unwrap();
        prop_assert_eq!(&s2, &s);
        let back = tree_of_strat(&c, &s);
        prop_assert_eq!(&back.parent, &t.parent);
        prop_assert_eq!(back.levels.iter().map(Vec::len).collect::<Vec<_>>(), t.levels.iter().map(Vec::len).collect::<Vec<_>>());
    }

    #[test]
    fn slices_inherit_the_stratification(parent in parents(), pick in any::<prop::sample::Index>()) {
        let (t, _) = tree(&parent);
        let (c, s) = free_cat_of_tree(&t);
        let apex = pick.index(c.n_objects()) as Obj;
        let sl = slice(&c, apex);
        prop_assert!(validate_fincat(&sl.cat).all_pass());
        let ss = slice_stratification(&c, &s, &sl).unwrap();
        prop_assert_eq!(ss, stratify(&sl.cat).unwrap());
    }

    #[test]
    fn terminal_slice_is_isomorphic(parent in parents()) {
        let (t, _) = tree(&parent);
        let (c, s) = free_cat_of_tree(&t);
        let sl = slice(&c, c.terminal().unwrap());
        let (d, bang) = terminal_slice_iso(&c, &sl).unwrap();
        let ss = slice_stratification(&c, &s, &sl).unwrap();
        prop_assert!(validate_functor(&sl.cat, &c, &d, Some((&ss, &s))).all_pass());
        prop_assert!(validate_functor(&c, &sl.cat, &bang, Some((&s, &ss))).all_pass());
        prop_assert!(d.after(&bang).is_identity());
        prop_assert!(bang.after(&d).is_identity());
    }

    #[test]
    fn individual_factorization(parent in parents()) {
        let (t, _) = tree(&parent);
        let (c, s) = free_cat_of_tree(&t);
        for f in c.arrows() {
            let steps = factor_individuals(&c, &s, f).unwrap();
            prop_assert_eq!(steps.len() as u32, s.level(c.dom(f)) - s.level(c.cod(f)));
            prop_assert!(steps.iter().all(|&a| s.is_individual(&c, a)));
        }
    }
}

#[test]
fn chains() {
    for h in 0..5 {
        let t = RootedTree::chain(h);
        assert_eq!((t.height(), t.size()), (h, h + 1));
        let (c, s) = free_cat_of_tree(&t);
        assert_eq!(c.n_arrows(), (h + 1) * (h + 2) / 2);
        assert_eq!(s.max_level() as usize, h);
    }
}

#[test]
fn malformed_trees() {
    let mut t = RootedTree::chain(2);
    t.parent[2] = vec![3];
    assert_eq!(t.validate(), Err(TreeError::Range(2)));
    t.parent[2] = vec![];
    assert_eq!(t.validate(), Err(TreeError::Parent(2)));
    t.levels[0].push("again".into());
    assert_eq!(t.validate(), Err(TreeError::Root(2)));
}

#[test]
fn builder_errors() {
    let mut b = CatBuilder::new();
    b.object("x");
    assert_eq!(b.build().unwrap_err(), CatError::MissingIdentity("x".into()));

    let mut b = CatBuilder::new();
    let x = b.object("x");
    let i = b.identity_arrow("i", x);
    b.set_compose(i, i, 7);
    assert!(matches!(b.build(), Err(CatError::Dangling(_))));
}

#[test]
fn missing_compositions_are_reported() {
    let mut b = CatBuilder::new();
    let x = b.object("x");
    let y = b.object("y");
    let ix = b.identity_arrow("ix", x);
    let iy = b.identity_arrow("iy", y);
    let f = b.arrow("f", x, y);
    b.set_compose(ix, ix, ix);
    b.set_compose(iy, iy, iy);
    b.set_compose(ix, f, f);
    b.set_terminal(y);
    let c = b.build().unwrap();
    let r = validate_fincat(&c);
    // the missing composite is iy ∘ f, a unit instance
    assert_eq!(r.failures(), ["composition-total", "left-unit"]);
    // still stratifiable: the structure check does not need composites
    assert_eq!(stratify(&c).unwrap().levels(), [1, 0]);
}

#[test]
fn two_parallel_arrows_are_not_stratified() {
    let mut b = CatBuilder::new();
    let x = b.object("x");
    let y = b.object("y");
    b.identity_arrow("ix", x);
    b.identity_arrow("iy", y);
    b.arrow("f", x, y);
    b.arrow("g", x, y);
    b.set_terminal(y);
    b.compose_with(|arrows, f, g| {
        let (af, ag) = (&arrows[f as usize], &arrows[g as usize]);
        match (af.dom == af.cod, ag.dom == ag.cod) {
            (true, _) => Some(g),
            (_, true) => Some(f),
            _ => None,
        }
    });
    let c = b.build().unwrap();
    assert!(validate_fincat(&c).get("terminal").is_some_and(|l| !l.passed()));
    let e = stratify(&c).unwrap_err();
    assert_eq!((e.condition, e.object.as_str(), e.k, e.count), (StratCondition::UniqueDown, "x", 0, 2));
}
