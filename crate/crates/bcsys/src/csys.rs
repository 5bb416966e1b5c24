//! C-systems (contextual categories) and their homomorphisms.

use rustc_hash::FxHashMap;

use crate::cat::{validate_fincat, validate_functor, Arr, FinCat, Functor, Obj};
use crate::report::{Check, Report};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CSystem {
    pub cat: FinCat,
    pub one: Obj,
    pub len: Vec<u32>,
    pub ft: Vec<Obj>,
    /// `p_Γ : Γ → ft Γ`, `None` at length 0.
    pub proj: Vec<Option<Arr>>,
    /// `(f : Δ → ft Γ, Γ) ↦ (f*Γ, q(f, Γ))`.
    pub pb: FxHashMap<(Arr, Obj), (Obj, Arr)>,
}

impl CSystem {
    pub fn height(&self) -> u32 {
        self.len.iter().copied().max().unwrap_or(0)
    }

    pub fn pullback(&self, f: Arr, gamma: Obj) -> Option<(Obj, Arr)> {
        self.pb.get(&(f, gamma)).copied()
    }

    /// Sorted pullback keys, for deterministic iteration.
    pub fn pb_keys(&self) -> Vec<(Arr, Obj)> {
        let mut k: Vec<_> = self.pb.keys().copied().collect();
        k.sort_unstable();
        k
    }
}

/// Checks that the square `g∘q = f∘p` commutes and is a pullback, by enumerating all cones.
///
/// ```text
///  P --q--> X
///  |p       |g
///  v        v
///  D --f--> G
/// ```
pub fn check_pullback(c: &FinCat, f: Arr, g: Arr, p: Arr, q: Arr) -> Result<(), String> {
    if c.cod(f) != c.cod(g) || c.dom(p) != c.dom(q) || c.cod(p) != c.dom(f) || c.cod(q) != c.dom(g) {
        return Err("square is ill-typed".into());
    }
    if c.try_comp(g, q) != c.try_comp(f, p) {
        return Err("square does not commute".into());
    }
    let (d, x, apex) = (c.dom(f), c.dom(g), c.dom(p));
    for z in c.objects() {
        // cones (a, b) with f∘a = g∘b, counted by their common value
        let mut via_f: FxHashMap<Arr, u32> = FxHashMap::default();
        for &a in c.hom(z, d) {
            *via_f.entry(c.comp(f, a)).or_default() += 1;
        }
        let mut cones = 0u64;
        for &b in c.hom(z, x) {
            cones += u64::from(via_f.get(&c.comp(g, b)).copied().unwrap_or(0));
        }
        let mut seen = FxHashMap::default();
        for &u in c.hom(z, apex) {
            if let Some(u0) = seen.insert((c.comp(p, u), c.comp(q, u)), u) {
                return Err(format!("two mediating arrows {} and {} from {}", c.arr_name(u0), c.arr_name(u), c.obj_name(z)));
            }
        }
        if seen.len() as u64 != cones {
            return Err(format!("{} cones from {} but {} mediating arrows", cones, c.obj_name(z), seen.len()));
        }
    }
    Ok(())
}

pub fn validate_csystem(cs: &CSystem) -> Report {
    let c = &cs.cat;
    let mut r = Report::new();
    let cr = validate_fincat(c);
    r.push(cr.summarize("category"));
    let shape = cs.len.len() == c.n_objects() && cs.ft.len() == c.n_objects() && cs.proj.len() == c.n_objects();
    let mut sc = Check::new("shape");
    sc.test(shape && (cs.one as usize) < c.n_objects(), || "length/ft/proj tables do not cover the objects".into());
    sc.finish_into(&mut r);
    if !r.all_pass() {
        return r;
    }
    let len = |o: Obj| cs.len[o as usize];
    let ft = |o: Obj| cs.ft[o as usize];

    let mut c1 = Check::new("C-axiom-i");
    for o in c.objects() {
        c1.test((len(o) == 0) == (o == cs.one), || format!("{} has length {}", c.obj_name(o), len(o)));
    }
    c1.finish_into(&mut r);

    let mut c2 = Check::new("C-axiom-ii");
    for o in c.objects().filter(|&o| len(o) > 0) {
        c2.test(len(ft(o)) + 1 == len(o), || format!("ℓ(ft {}) ≠ ℓ − 1", c.obj_name(o)));
    }
    c2.finish_into(&mut r);

    let mut c3 = Check::new("C-axiom-iii");
    c3.test(ft(cs.one) == cs.one, || "ft(1) ≠ 1".into());
    c3.finish_into(&mut r);

    let mut c4 = Check::new("C-axiom-iv");
    for o in c.objects() {
        let n = c.hom(o, cs.one).len();
        c4.test(n == 1, || format!("{n} arrows {} → 1", c.obj_name(o)));
    }
    c4.finish_into(&mut r);

    let mut pj = Check::new("projections");
    for o in c.objects() {
        match (len(o) > 0, cs.proj[o as usize]) {
            (false, p) => {
                pj.test(p.is_none(), || "projection on the terminal".into());
            }
            (true, None) => pj.fail(|| format!("p_{} missing", c.obj_name(o))),
            (true, Some(p)) => {
                pj.test((p as usize) < c.n_arrows() && c.dom(p) == o && c.cod(p) == ft(o), || format!("p_{} ill-typed", c.obj_name(o)));
            }
        }
    }
    pj.finish_into(&mut r);
    if !r.all_pass() {
        return r;
    }
    let proj = |o: Obj| cs.proj[o as usize].unwrap();
    let h = cs.height();

    let mut c5 = Check::new("C-axiom-v");
    let mut tot = Check::new("pullback-total");
    for gamma in c.objects().filter(|&o| len(o) > 0) {
        for &f in c.into(ft(gamma)) {
            let delta = c.dom(f);
            let what = || format!("(f={}, Γ={})", c.arr_name(f), c.obj_name(gamma));
            let Some((fg, q)) = cs.pullback(f, gamma) else {
                if len(delta) < h {
                    tot.fail(|| format!("{} missing", what()));
                } else {
                    tot.skip();
                }
                continue;
            };
            tot.ok();
            if !c5.test(len(fg) > 0 && ft(fg) == delta && c.dom(q) == fg && c.cod(q) == gamma, || format!("{}: ill-typed", what())) {
                continue;
            }
            let res = check_pullback(c, f, proj(gamma), proj(fg), q);
            c5.test(res.is_ok(), || format!("{}: {}", what(), res.unwrap_err()));
        }
    }
    for &(f, gamma) in cs.pb.keys() {
        if (f as usize) >= c.n_arrows() || (gamma as usize) >= c.n_objects() || len(gamma) == 0 || c.cod(f) != ft(gamma) {
            tot.fail(|| format!("stray pullback entry ({f}, {gamma})"));
        }
    }
    tot.finish_into(&mut r);
    c5.finish_into(&mut r);

    let mut c6 = Check::new("C-axiom-vi");
    for gamma in c.objects().filter(|&o| len(o) > 0) {
        let got = cs.pullback(c.id(ft(gamma)), gamma);
        c6.test(got == Some((gamma, c.id(gamma))), || format!("Γ={}", c.obj_name(gamma)));
    }
    c6.finish_into(&mut r);

    let mut c7 = Check::new("C-axiom-vii");
    for gamma in c.objects().filter(|&o| len(o) > 0) {
        for &g in c.into(ft(gamma)) {
            let Some((gg, qg)) = cs.pullback(g, gamma) else { continue };
            for &f in c.into(c.dom(g)) {
                let lhs = cs.pullback(c.comp(g, f), gamma);
                let rhs = cs.pullback(f, gg).map(|(o, qf)| (o, c.comp(qg, qf)));
                if lhs.is_none() && rhs.is_none() {
                    c7.skip();
                } else {
                    c7.test(lhs == rhs, || format!("g={}, f={}, Γ={}", c.arr_name(g), c.arr_name(f), c.obj_name(gamma)));
                }
            }
        }
    }
    c7.finish_into(&mut r);
    r
}

/// Conditions (i)–(v) on a functor between C-systems.
pub fn validate_csystem_hom(src: &CSystem, tgt: &CSystem, h: &Functor) -> Report {
    let mut r = validate_functor(&src.cat, &tgt.cat, h, None);
    if !r.all_pass() {
        return r;
    }
    let fo = |o: Obj| h.obj[o as usize];
    let fa = |a: Arr| h.arr[a as usize];
    let sc = &src.cat;

    let mut c1 = Check::new("hom-i");
    c1.test(fo(src.one) == tgt.one, || "1 not preserved".into());
    c1.finish_into(&mut r);
    let mut c2 = Check::new("hom-ii");
    let mut c3 = Check::new("hom-iii");
    let mut c4 = Check::new("hom-iv");
    for o in sc.objects() {
        c2.test(tgt.len[fo(o) as usize] == src.len[o as usize], || format!("length of {}", sc.obj_name(o)));
        c3.test(tgt.ft[fo(o) as usize] == fo(src.ft[o as usize]), || format!("ft of {}", sc.obj_name(o)));
        c4.test(src.proj[o as usize].map(fa) == tgt.proj[fo(o) as usize], || format!("p_{}", sc.obj_name(o)));
    }
    c2.finish_into(&mut r);
    c3.finish_into(&mut r);
    c4.finish_into(&mut r);
    let mut c5 = Check::new("hom-v");
    for (f, gamma) in src.pb_keys() {
        let (fg, q) = src.pb[&(f, gamma)];
        let got = tgt.pullback(fa(f), fo(gamma));
        c5.test(got == Some((fo(fg), fa(q))), || format!("f={}, Γ={}", sc.arr_name(f), sc.obj_name(gamma)));
    }
    c5.finish_into(&mut r);
    r
}

/// Checks that `fwd` and `bwd` are mutually inverse C-system homomorphisms.
pub fn check_c_iso(a: &CSystem, b: &CSystem, fwd: &Functor, bwd: &Functor) -> Report {
    let mut r = Report::new();
    r.extend_prefixed("fwd/", validate_csystem_hom(a, b, fwd));
    r.extend_prefixed("bwd/", validate_csystem_hom(b, a, bwd));
    let mut c = Check::new("bwd∘fwd = id");
    c.test(bwd.after(fwd) == Functor::identity(&a.cat), || "not the identity".into());
    c.finish_into(&mut r);
    let mut c = Check::new("fwd∘bwd = id");
    c.test(fwd.after(bwd) == Functor::identity(&b.cat), || "not the identity".into());
    c.finish_into(&mut r);
    r
}
