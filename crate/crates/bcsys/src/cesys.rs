//! CE-systems: an identity-on-objects functor `I : F → C` with a functorial
//! choice of pullbacks of families along context morphisms.

use rustc_hash::FxHashMap;

use crate::cat::{
    full_subcategory, slice, stratify, validate_fincat, validate_functor, Arr, CatBuilder, FinCat, FreeTreeCat, Functor, Obj, SliceCat,
    Stratification,
};
use crate::csys::check_pullback;
use crate::report::{Check, Report};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CESystem {
    /// Families.
    pub fam: FinCat,
    /// Contexts, on the same objects.
    pub base: FinCat,
    /// `I` on arrows; identity on objects.
    pub i: Vec<Arr>,
    pub root: Obj,
    /// `(f : Δ → Γ, A ∈ F/Γ) ↦ (f*A ∈ F/Δ, π₂(f, A) : Δ.f*A → Γ.A)`.
    pub pb: FxHashMap<(Arr, Arr), (Arr, Arr)>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CEFlags {
    pub rooted: bool,
    pub stratified: bool,
}

impl CEFlags {
    pub const ALL: CEFlags = CEFlags { rooted: true, stratified: true };
}

impl CESystem {
    pub fn pullback(&self, f: Arr, a: Arr) -> Option<(Arr, Arr)> {
        self.pb.get(&(f, a)).copied()
    }

    pub fn i_arr(&self, a: Arr) -> Arr {
        self.i[a as usize]
    }

    pub fn i_functor(&self) -> Functor {
        Functor { obj: self.fam.objects().collect(), arr: self.i.clone() }
    }

    pub fn pb_keys(&self) -> Vec<(Arr, Arr)> {
        let mut k: Vec<_> = self.pb.keys().copied().collect();
        k.sort_unstable();
        k
    }

    pub fn fam_strat(&self) -> Option<Stratification> {
        stratify(&self.fam).ok()
    }

    pub fn is_rooted(&self) -> bool {
        self.base.objects().all(|o| self.base.hom(o, self.root).len() == 1)
    }

    /// Whether the chosen pullback `(f, a)` is expected inside the truncation.
    fn pb_expected(&self, s: Option<&Stratification>, f: Arr, a: Arr) -> bool {
        match s {
            None => false,
            Some(s) => {
                let (d, g, ga) = (self.base.dom(f), self.base.cod(f), self.fam.dom(a));
                s.level(d) + s.level(ga) - s.level(g) <= s.max_level()
            }
        }
    }
}

pub fn validate_cesystem(a: &CESystem, flags: CEFlags) -> Report {
    let (fam, base) = (&a.fam, &a.base);
    let mut r = Report::new();
    r.push(validate_fincat(fam).summarize("fam-category"));
    r.push(validate_fincat(base).summarize("base-category"));
    let mut so = Check::new("shared-objects");
    so.test(fam.obj_names() == base.obj_names(), || "object tables differ".into());
    so.test(a.i.len() == fam.n_arrows() && (a.root as usize) < fam.n_objects(), || "I or root out of range".into());
    so.finish_into(&mut r);
    if !r.all_pass() {
        return r;
    }
    r.push(validate_functor(fam, base, &a.i_functor(), None).summarize("I-functor"));
    let mut rt = Check::new("root-terminal-fam");
    for o in fam.objects() {
        let n = fam.hom(o, a.root).len();
        rt.test(n == 1, || format!("{n} families {} → root", fam.obj_name(o)));
    }
    rt.finish_into(&mut r);
    if !r.all_pass() {
        return r;
    }
    let strat = a.fam_strat();

    let mut tot = Check::new("pullback-total");
    let mut typ = Check::new("pullback-typing");
    let mut sq = Check::new("pullback-square");
    for f in base.arrows() {
        let (d, g) = (base.dom(f), base.cod(f));
        for &fa in fam.into(g) {
            let what = || format!("(f={}, A={})", base.arr_name(f), fam.arr_name(fa));
            let Some((fs, p2)) = a.pullback(f, fa) else {
                if a.pb_expected(strat.as_ref(), f, fa) {
                    tot.fail(|| format!("{} missing", what()));
                } else {
                    tot.skip();
                }
                continue;
            };
            tot.ok();
            let ok = (fs as usize) < fam.n_arrows()
                && (p2 as usize) < base.n_arrows()
                && fam.cod(fs) == d
                && base.dom(p2) == fam.dom(fs)
                && base.cod(p2) == fam.dom(fa);
            if !typ.test(ok, || format!("{} ill-typed", what())) {
                continue;
            }
            let res = check_pullback(base, f, a.i_arr(fa), a.i_arr(fs), p2);
            sq.test(res.is_ok(), || format!("{}: {}", what(), res.unwrap_err()));
        }
    }
    for &(f, fa) in a.pb.keys() {
        let ok = (f as usize) < base.n_arrows() && (fa as usize) < fam.n_arrows() && fam.cod(fa) == base.cod(f);
        tot.test(ok, || format!("stray pullback entry ({f}, {fa})"));
    }
    tot.finish_into(&mut r);
    typ.finish_into(&mut r);
    sq.finish_into(&mut r);
    if !r.all_pass() {
        return r;
    }

    // the four functoriality clauses; a side falling outside the table counts as a skip
    let both = |c: &mut Check, l: Option<(Arr, Arr)>, rr: Option<(Arr, Arr)>, w: &dyn Fn() -> String| {
        if l.is_none() && rr.is_none() {
            c.skip();
        } else {
            c.test(l == rr, w);
        }
    };
    let mut ca = Check::new("CE-a");
    let mut cb = Check::new("CE-b");
    let mut cc = Check::new("CE-c");
    let mut cd = Check::new("CE-d");
    for f in base.arrows() {
        let (d, g) = (base.dom(f), base.cod(f));
        both(&mut ca, a.pullback(f, fam.id(g)), Some((fam.id(d), f)), &|| format!("f={}", base.arr_name(f)));
    }
    for g in base.objects() {
        for &fa in fam.into(g) {
            let l = a.pullback(base.id(g), fa);
            both(&mut cb, l, Some((fa, base.id(fam.dom(fa)))), &|| format!("A={}", fam.arr_name(fa)));
        }
    }
    for f in base.arrows() {
        for &fa in fam.into(base.cod(f)) {
            let Some((fs, p2)) = a.pullback(f, fa) else { continue };
            for &g in base.into(base.dom(f)) {
                let l = a.pullback(base.comp(f, g), fa);
                let rr = a.pullback(g, fs).map(|(gs, q2)| (gs, base.comp(p2, q2)));
                both(&mut cc, l, rr, &|| format!("f={}, g={}, A={}", base.arr_name(f), base.arr_name(g), fam.arr_name(fa)));
            }
            for &p in fam.into(fam.dom(fa)) {
                let l = a.pullback(f, fam.comp(fa, p));
                let rr = a.pullback(p2, p).map(|(ps, q2)| (fam.comp(fs, ps), q2));
                both(&mut cd, l, rr, &|| format!("f={}, A={}, P={}", base.arr_name(f), fam.arr_name(fa), fam.arr_name(p)));
            }
        }
    }
    for c in [ca, cb, cc, cd] {
        c.finish_into(&mut r);
    }

    if flags.rooted {
        let mut c = Check::new("rooted");
        for o in base.objects() {
            let n = base.hom(o, a.root).len();
            c.test(n == 1, || format!("{n} context morphisms {} → root", base.obj_name(o)));
        }
        c.finish_into(&mut r);
    }
    if flags.stratified {
        let mut c = Check::new("stratified-fam");
        match &strat {
            None => c.fail(|| format!("{}", stratify(fam).unwrap_err())),
            Some(s) => {
                c.test(s.level(a.root) == 0, || "root is not at level 0".into());
            }
        }
        c.finish_into(&mut r);
        let mut ind = Check::new("stratified-pullback");
        let mut gr = Check::new("grassmann");
        if let Some(s) = &strat {
            for (f, fa) in a.pb_keys() {
                let (fs, p2) = a.pb[&(f, fa)];
                let lhs = s.level(fam.dom(fs));
                let rhs = s.level(base.dom(f)) + s.level(fam.dom(fa)) - s.level(base.cod(f));
                gr.test(lhs == rhs, || format!("(f={}, A={}): {lhs} ≠ {rhs}", base.arr_name(f), fam.arr_name(fa)));
                // f* on slices sends individual arrows over A to individual arrows
                for &h in fam.into(fam.dom(fa)) {
                    if !s.is_individual(fam, h) {
                        continue;
                    }
                    match a.pullback(p2, h) {
                        None => ind.skip(),
                        Some((hs, _)) => {
                            ind.test(s.is_individual(fam, hs), || {
                                format!("f={}: {} over {} not sent to an individual", base.arr_name(f), fam.arr_name(h), fam.arr_name(fa))
                            });
                        }
                    }
                }
            }
        } else {
            ind.skip();
            gr.skip();
        }
        ind.finish_into(&mut r);
        gr.finish_into(&mut r);
    }
    r
}

/// A commuting square of functors over the two `I`s.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CEHom {
    pub fam: Functor,
    pub base: Functor,
}

impl CEHom {
    pub fn identity(a: &CESystem) -> CEHom {
        CEHom { fam: Functor::identity(&a.fam), base: Functor::identity(&a.base) }
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &CEHom) -> CEHom {
        CEHom { fam: self.fam.after(&first.fam), base: self.base.after(&first.base) }
    }

    pub fn inverse(&self, tgt: &CESystem) -> Option<CEHom> {
        Some(CEHom { fam: self.fam.inverse(&tgt.fam)?, base: self.base.inverse(&tgt.base)? })
    }

    pub fn is_bijective(&self, tgt: &CESystem) -> bool {
        self.fam.is_bijective(&tgt.fam) && self.base.is_bijective(&tgt.base)
    }
}

/// With `stratified`, the family functor must be stratified and pullback
/// preservation is checked along individual families only.
pub fn validate_ce_hom(src: &CESystem, tgt: &CESystem, h: &CEHom, stratified: bool) -> Report {
    let mut r = Report::new();
    let strats = if stratified { src.fam_strat().zip(tgt.fam_strat()) } else { None };
    let mut fr = validate_functor(&src.fam, &tgt.fam, &h.fam, strats.as_ref().map(|(a, b)| (a, b)));
    if stratified && strats.is_none() {
        fr.push(crate::report::absent("stratified", "a side is not stratified"));
    }
    r.extend_prefixed("fam/", fr);
    r.extend_prefixed("base/", validate_functor(&src.base, &tgt.base, &h.base, None));
    if !r.all_pass() {
        return r;
    }
    let mut sq = Check::new("square");
    sq.test(h.fam.obj == h.base.obj, || "object maps differ".into());
    for a in src.fam.arrows() {
        sq.test(h.base.arr[src.i_arr(a) as usize] == tgt.i_arr(h.fam.arr[a as usize]), || format!("at {}", src.fam.arr_name(a)));
    }
    sq.finish_into(&mut r);
    let mut rt = Check::new("root");
    rt.test(h.fam.obj[src.root as usize] == tgt.root, || "root not preserved".into());
    rt.finish_into(&mut r);
    let mut pb = Check::new("pullback");
    let indiv = strats.as_ref().map(|(s, _)| s);
    for (f, fa) in src.pb_keys() {
        if let Some(s) = indiv {
            if !s.is_individual(&src.fam, fa) {
                continue;
            }
        }
        let (fs, p2) = src.pb[&(f, fa)];
        let got = tgt.pullback(h.base.arr[f as usize], h.fam.arr[fa as usize]);
        pb.test(got == Some((h.fam.arr[fs as usize], h.base.arr[p2 as usize])), || {
            format!("f={}, A={}", src.base.arr_name(f), src.fam.arr_name(fa))
        });
    }
    pb.finish_into(&mut r);
    r
}

pub fn check_ce_iso(a: &CESystem, b: &CESystem, fwd: &CEHom, bwd: &CEHom, stratified: bool) -> Report {
    let mut r = Report::new();
    r.extend_prefixed("fwd/", validate_ce_hom(a, b, fwd, stratified));
    r.extend_prefixed("bwd/", validate_ce_hom(b, a, bwd, stratified));
    let mut c = Check::new("bwd∘fwd = id");
    c.test(bwd.after(fwd) == CEHom::identity(a), || "not the identity".into());
    c.finish_into(&mut r);
    let mut c = Check::new("fwd∘bwd = id");
    c.test(fwd.after(bwd) == CEHom::identity(b), || "not the identity".into());
    c.finish_into(&mut r);
    r
}

/// Old ids kept by [`truncate_cesystem`], indexed by new id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CERestriction {
    pub obj: Vec<Obj>,
    pub fam: Vec<Arr>,
    pub base: Vec<Arr>,
}

/// The full sub-CE-system on the objects of family level ≤ m.
pub fn truncate_cesystem(a: &CESystem, m: u32) -> Option<(CESystem, CERestriction)> {
    let s = a.fam_strat()?;
    let (fam, obj, fam_old) = full_subcategory(&a.fam, |o| s.level(o) <= m);
    let (base, _, base_old) = full_subcategory(&a.base, |o| s.level(o) <= m);
    let fmap: FxHashMap<Arr, Arr> = fam_old.iter().enumerate().map(|(i, &x)| (x, i as Arr)).collect();
    let bmap: FxHashMap<Arr, Arr> = base_old.iter().enumerate().map(|(i, &x)| (x, i as Arr)).collect();
    let i = fam_old.iter().map(|&x| bmap[&a.i_arr(x)]).collect();
    let mut pb = FxHashMap::default();
    for (&(f, x), &(y, q)) in &a.pb {
        if let (Some(&f2), Some(&x2), Some(&y2), Some(&q2)) = (bmap.get(&f), fmap.get(&x), fmap.get(&y), bmap.get(&q)) {
            pb.insert((f2, x2), (y2, q2));
        }
    }
    let root = obj.iter().position(|&o| o == a.root)? as Obj;
    Some((CESystem { fam, base, i, root, pb }, CERestriction { obj, fam: fam_old, base: base_old }))
}

// ---------------------------------------------------------------------------
// slices

#[derive(Clone, Debug)]
pub struct CESlice {
    pub ce: CESystem,
    /// Slice object ↦ the family into the apex it stands for.
    pub obj_arrow: Vec<Arr>,
    fam_slice: SliceCat,
    /// `(A, B, u)` for every base arrow of the slice.
    base_triple: Vec<(Arr, Arr, Arr)>,
    base_of: FxHashMap<(Arr, Arr, Arr), Arr>,
}

impl CESlice {
    pub fn fam_arrow_of(&self, h: Arr, over: Arr) -> Option<Arr> {
        self.fam_slice.arrow_of(h, over)
    }
    pub fn fam_pair(&self, a: Arr) -> (Arr, Arr) {
        self.fam_slice.arr_pair[a as usize]
    }
    /// Base arrow `u : dom A → dom B` seen as a slice arrow `A → B`.
    pub fn base_arrow_of(&self, a: Arr, b: Arr, u: Arr) -> Option<Arr> {
        self.base_of.get(&(a, b, u)).copied()
    }
    pub fn base_triple(&self, x: Arr) -> (Arr, Arr, Arr) {
        self.base_triple[x as usize]
    }
}

/// The slice CE-system over `gamma`: families `F/Γ`, contexts the arrows
/// between images under `I` in `C/Γ`.  It is always rooted.
pub fn slice_cesystem(a: &CESystem, gamma: Obj) -> CESlice {
    let (fam, base) = (&a.fam, &a.base);
    let fs = slice(fam, gamma);
    let objs = fs.obj_arrow.clone();
    let mut b = CatBuilder::new();
    for name in fs.cat.obj_names() {
        b.object(name.clone());
    }
    let mut base_triple = Vec::new();
    let mut base_of = FxHashMap::default();
    for (ia, &x) in objs.iter().enumerate() {
        for (ib, &y) in objs.iter().enumerate() {
            for &u in base.hom(fam.dom(x), fam.dom(y)) {
                if base.comp(a.i_arr(y), u) != a.i_arr(x) {
                    continue;
                }
                let id = b.arrow(format!("{}:{}→{}", base.arr_name(u), fam.arr_name(x), fam.arr_name(y)), ia as Obj, ib as Obj);
                if ia == ib && base.is_id(u) {
                    b.set_identity(ia as Obj, id);
                }
                base_triple.push((x, y, u));
                base_of.insert((x, y, u), id);
            }
        }
    }
    if let Some(t) = fs.object_of(fam.id(gamma)) {
        b.set_terminal(t);
    }
    {
        let bt = &base_triple;
        let bo = &base_of;
        b.compose_with(|_, f, g| {
            let (x, _, u) = bt[f as usize];
            let (_, z, v) = bt[g as usize];
            bo.get(&(x, z, base.comp(v, u))).copied()
        });
    }
    let sbase = b.build().expect("slice base category is well formed");
    let i: Vec<Arr> = fs
        .arr_pair
        .iter()
        .map(|&(h, over)| base_of[&(fam.comp(over, h), over, a.i_arr(h))])
        .collect();
    let mut pb = FxHashMap::default();
    for (xid, &(x, y, u)) in base_triple.iter().enumerate() {
        for &h in fam.into(fam.dom(y)) {
            let Some((hs, p2)) = a.pullback(u, h) else { continue };
            let (Some(fam_arr), Some(src_arr)) = (fs.arrow_of(h, y), fs.arrow_of(hs, x)) else { continue };
            let Some(&p2s) = base_of.get(&(fam.comp(x, hs), fam.comp(y, h), p2)) else { continue };
            pb.insert((xid as Arr, fam_arr), (src_arr, p2s));
        }
    }
    let root = fs.object_of(fam.id(gamma)).expect("identity lies in the slice");
    let ce = CESystem { fam: fs.cat.clone(), base: sbase, i, root, pb };
    CESlice { ce, obj_arrow: objs, fam_slice: fs, base_triple, base_of }
}

/// The pullback functor `f* : A/Γ → A/Δ` as a CE-homomorphism of slices.
pub fn pullback_slice_hom(a: &CESystem, f: Arr) -> Option<(CESlice, CESlice, CEHom)> {
    let (fam, base) = (&a.fam, &a.base);
    let (d, g) = (base.dom(f), base.cod(f));
    let sg = slice_cesystem(a, g);
    let sd = slice_cesystem(a, d);
    let obj: Vec<Obj> = sg
        .obj_arrow
        .iter()
        .map(|&x| a.pullback(f, x).and_then(|(xs, _)| sd.fam_slice.object_of(xs)))
        .collect::<Option<_>>()?;
    let fam_arr: Vec<Arr> = sg
        .fam_slice
        .arr_pair
        .iter()
        .map(|&(h, over)| {
            let (os, p2) = a.pullback(f, over)?;
            let (hs, _) = a.pullback(p2, h)?;
            sd.fam_arrow_of(hs, os)
        })
        .collect::<Option<_>>()?;
    // on contexts: the arrow induced between the two chosen pullbacks
    let base_arr: Vec<Arr> = sg
        .base_triple
        .iter()
        .map(|&(x, y, u)| {
            let (xs, px) = a.pullback(f, x)?;
            let (ys, py) = a.pullback(f, y)?;
            let want = base.comp(u, px);
            let v = base
                .hom(fam.dom(xs), fam.dom(ys))
                .iter()
                .copied()
                .find(|&v| base.comp(a.i_arr(ys), v) == a.i_arr(xs) && base.comp(py, v) == want)?;
            sd.base_arrow_of(xs, ys, v)
        })
        .collect::<Option<_>>()?;
    let h = CEHom { fam: Functor { obj: obj.clone(), arr: fam_arr }, base: Functor { obj, arr: base_arr } };
    Some((sg, sd, h))
}

// ---------------------------------------------------------------------------
// finite sets

/// `𝔽^op` truncated at `n`: objects `0..=n`, arrows `m → k` the functions `[k] → [m]`.
#[derive(Clone, Debug)]
pub struct FinsetOp {
    pub n: u32,
    pub cat: FinCat,
    offset: FxHashMap<(u32, u32), u32>,
    decode: Vec<(u32, u32, u32)>,
}

impl FinsetOp {
    pub fn new(n: u32) -> FinsetOp {
        let mut b = CatBuilder::new();
        for o in 0..=n {
            b.object(o.to_string());
        }
        let mut offset = FxHashMap::default();
        let mut decode = Vec::new();
        for m in 0..=n {
            for k in 0..=n {
                offset.insert((m, k), decode.len() as u32);
                for code in 0..m.pow(k) {
                    let f = digits(code, m, k);
                    let s: Vec<String> = f.iter().map(u32::to_string).collect();
                    b.arrow(format!("{m}→{k}[{}]", s.join(" ")), m, k);
                    decode.push((m, k, code));
                }
            }
        }
        for o in 0..=n {
            let id: Vec<u32> = (0..o).collect();
            b.set_identity(o, offset[&(o, o)] + undigits(&id, o));
        }
        b.set_terminal(0);
        {
            let (off, dec) = (&offset, &decode);
            // g∘f for f : l → m, g : m → k is the function φ_f ∘ φ_g : [k] → [l]
            b.compose_with(|_, f, g| {
                let (l, m, cf) = dec[f as usize];
                let (_, k, cg) = dec[g as usize];
                let (pf, pg) = (digits(cf, l, m), digits(cg, m, k));
                let h: Vec<u32> = pg.iter().map(|&v| pf[v as usize]).collect();
                Some(off[&(l, k)] + undigits(&h, l))
            });
        }
        let cat = b.build().expect("finite-set category is well formed");
        FinsetOp { n, cat, offset, decode }
    }

    /// The arrow `m → k` given by `phi : [k] → [m]`.
    pub fn arrow(&self, m: u32, phi: &[u32]) -> Option<Arr> {
        let k = phi.len() as u32;
        if m > self.n || k > self.n || phi.iter().any(|&v| v >= m) {
            return None;
        }
        Some(self.offset[&(m, k)] + undigits(phi, m))
    }

    /// `(m, φ : [k] → [m])` for an arrow `m → k`.
    pub fn function(&self, a: Arr) -> (u32, Vec<u32>) {
        let (m, k, c) = self.decode[a as usize];
        (m, digits(c, m, k))
    }
}

fn digits(mut code: u32, base: u32, len: u32) -> Vec<u32> {
    (0..len)
        .map(|_| {
            let v = code % base;
            code /= base;
            v
        })
        .collect()
}

fn undigits(f: &[u32], base: u32) -> u32 {
    f.iter().rev().fold(0, |acc, &v| acc * base + v)
}

/// The CE-system `(ℕ, ≥) → 𝔽^op` truncated at `n`, with pullbacks `[f, 1_k]`.
pub fn build_finset_cesystem(n: u32) -> CESystem {
    let fop = FinsetOp::new(n);
    let tree = FreeTreeCat::new((0..=n).map(|o| o.to_string()).collect(), (0..=n).map(|o| o.checked_sub(1)).collect());
    let fam = tree.cat.clone();
    // I(n+k ≥ n) is the initial-segment inclusion [n] → [n+k]
    let i: Vec<Arr> = fam
        .arrows()
        .map(|a| {
            let (x, k) = tree.decode(a);
            fop.arrow(x, &(0..x - k).collect::<Vec<_>>()).unwrap()
        })
        .collect();
    let mut pb = FxHashMap::default();
    for f in fop.cat.arrows() {
        let (m, phi) = fop.function(f);
        let g = phi.len() as u32;
        for k in 0..=(n - g) {
            if m + k > n {
                continue;
            }
            let fa = tree.arrow(g + k, k);
            let fs = tree.arrow(m + k, k);
            let mut psi = phi.clone();
            psi.extend(m..m + k);
            pb.insert((f, fa), (fs, fop.arrow(m + k, &psi).unwrap()));
        }
    }
    CESystem { fam, base: fop.cat, i, root: 0, pb }
}

/// The finite-set CE-system with every context morphism paired with an
/// element of `Z/2`; pullbacks carry the twist along.  Not rooted.
pub fn build_twisted_finset_cesystem(n: u32) -> CESystem {
    let a = build_finset_cesystem(n);
    let mut b = CatBuilder::new();
    for name in a.base.obj_names() {
        b.object(name.clone());
    }
    for x in a.base.arrows() {
        for s in 0..2 {
            b.arrow(format!("{}#{s}", a.base.arr_name(x)), a.base.dom(x), a.base.cod(x));
        }
    }
    for o in a.base.objects() {
        b.set_identity(o, 2 * a.base.id(o));
    }
    let base0 = a.base.clone();
    b.compose_with(|_, f, g| Some(2 * base0.comp(g / 2, f / 2) + (f % 2 + g % 2) % 2));
    let base = b.build().expect("twisted base is well formed");
    let i = a.i.iter().map(|&x| 2 * x).collect();
    let mut pb = FxHashMap::default();
    for (&(f, fa), &(fs, p2)) in &a.pb {
        for s in 0..2 {
            pb.insert((2 * f + s, fa), (fs, 2 * p2 + s));
        }
    }
    CESystem { fam: a.fam, base, i, root: a.root, pb }
}
