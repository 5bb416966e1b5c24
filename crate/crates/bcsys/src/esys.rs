//! Categories with term structure, E-systems, and the pairing/projection calculus.
//!
//! A slice functor `G : F/Θ → F/Θ'` is represented by its action on pairs
//! `(h, B)` — the slice morphism `h : B∘h → B` — and on terms of `h`.  The
//! image of a slice object `B` is `G(B, id_Θ)`.

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::cat::{full_subcategory, validate_fincat, validate_functor, Arr, CatBuilder, FinCat, FreeTreeCat, Functor, Obj, Stratification};
use crate::report::{absent, Check, LawResult, Report};

pub type TermId = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EError {
    #[error("{0}")]
    Slice(String),
    #[error("operation leaves the truncation: {0}")]
    Truncated(String),
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("{0}")]
    Other(String),
}

/// A category with term structure together with substitution, weakening and
/// identity terms.  Partial operations return `None` outside the truncation.
pub trait ESys {
    fn cat(&self) -> &FinCat;
    fn n_terms(&self) -> usize;
    /// `T(a)`.
    fn terms(&self, a: Arr) -> &[TermId];
    fn term_arrow(&self, t: TermId) -> Arr;
    fn term_name(&self, t: TermId) -> String;
    /// `S_x(h, over)` for `x ∈ T(A)`, `over` an arrow into `dom A`.
    fn subst(&self, x: TermId, h: Arr, over: Arr) -> Option<Arr>;
    fn subst_term(&self, x: TermId, t: TermId, over: Arr) -> Option<TermId>;
    /// `W_a(h, over)`, `over` an arrow into `cod a`.
    fn weak(&self, a: Arr, h: Arr, over: Arr) -> Option<Arr>;
    fn weak_term(&self, a: Arr, t: TermId, over: Arr) -> Option<TermId>;
    /// `1_a ∈ T(W_a(a))`.
    fn one(&self, a: Arr) -> Option<TermId>;
    fn stratification(&self) -> Option<&Stratification>;
}

// ---------------------------------------------------------------------------
// slice functors

pub trait SliceFun {
    fn arr(&self, h: Arr, over: Arr) -> Option<Arr>;
    fn term(&self, t: TermId, over: Arr) -> Option<TermId>;
}

pub struct IdF;
impl SliceFun for IdF {
    fn arr(&self, h: Arr, _: Arr) -> Option<Arr> {
        Some(h)
    }
    fn term(&self, t: TermId, _: Arr) -> Option<TermId> {
        Some(t)
    }
}

pub struct SubstF<'a> {
    pub e: &'a dyn ESys,
    pub x: TermId,
}
impl SliceFun for SubstF<'_> {
    fn arr(&self, h: Arr, over: Arr) -> Option<Arr> {
        self.e.subst(self.x, h, over)
    }
    fn term(&self, t: TermId, over: Arr) -> Option<TermId> {
        self.e.subst_term(self.x, t, over)
    }
}

pub struct WeakF<'a> {
    pub e: &'a dyn ESys,
    pub a: Arr,
}
impl SliceFun for WeakF<'_> {
    fn arr(&self, h: Arr, over: Arr) -> Option<Arr> {
        self.e.weak(self.a, h, over)
    }
    fn term(&self, t: TermId, over: Arr) -> Option<TermId> {
        self.e.weak_term(self.a, t, over)
    }
}

/// A global E-homomorphism acting on every slice.
pub struct GlobalF<'a>(pub &'a EHom);
impl SliceFun for GlobalF<'_> {
    fn arr(&self, h: Arr, _: Arr) -> Option<Arr> {
        self.0.functor.arr.get(h as usize).copied()
    }
    fn term(&self, t: TermId, _: Arr) -> Option<TermId> {
        self.0.term.get(t as usize).copied()
    }
}

/// `outer ∘ inner`; `src` is the category `inner` acts on.
pub struct CompF<'a> {
    pub outer: Box<dyn SliceFun + 'a>,
    pub inner: Box<dyn SliceFun + 'a>,
    pub src: &'a FinCat,
}
impl CompF<'_> {
    fn over_image(&self, over: Arr) -> Option<Arr> {
        self.inner.arr(over, self.src.id(self.src.cod(over)))
    }
}
impl SliceFun for CompF<'_> {
    fn arr(&self, h: Arr, over: Arr) -> Option<Arr> {
        let h1 = self.inner.arr(h, over)?;
        self.outer.arr(h1, self.over_image(over)?)
    }
    fn term(&self, t: TermId, over: Arr) -> Option<TermId> {
        let t1 = self.inner.term(t, over)?;
        self.outer.term(t1, self.over_image(over)?)
    }
}

/// `G / Y : (h, P) ↦ G(h, Y∘P)`.
pub struct SlicedF<'a> {
    pub g: Box<dyn SliceFun + 'a>,
    pub y: Arr,
    pub src: &'a FinCat,
}
impl SliceFun for SlicedF<'_> {
    fn arr(&self, h: Arr, over: Arr) -> Option<Arr> {
        self.g.arr(h, self.src.try_comp(self.y, over)?)
    }
    fn term(&self, t: TermId, over: Arr) -> Option<TermId> {
        self.g.term(t, self.src.try_comp(self.y, over)?)
    }
}

pub fn subst_f(e: &dyn ESys, x: TermId) -> Box<dyn SliceFun + '_> {
    Box::new(SubstF { e, x })
}
pub fn weak_f(e: &dyn ESys, a: Arr) -> Box<dyn SliceFun + '_> {
    Box::new(WeakF { e, a })
}
pub fn comp_f<'a>(outer: Box<dyn SliceFun + 'a>, inner: Box<dyn SliceFun + 'a>, src: &'a FinCat) -> Box<dyn SliceFun + 'a> {
    Box::new(CompF { outer, inner, src })
}
pub fn sliced_f<'a>(g: Box<dyn SliceFun + 'a>, y: Arr, src: &'a FinCat) -> Box<dyn SliceFun + 'a> {
    Box::new(SlicedF { g, y, src })
}

/// Compares two slice functors on every slice morphism and term over `apex`.
pub fn slice_eq(
    e: &dyn ESys,
    apex: Obj,
    f: &dyn SliceFun,
    g: &dyn SliceFun,
    c: &mut Check,
    what: &dyn Fn() -> String,
) {
    let cat = e.cat();
    for &b in cat.into(apex) {
        for &h in cat.into(cat.dom(b)) {
            c.test_eq(f.arr(h, b), g.arr(h, b), || format!("{} at ({}, over {})", what(), cat.arr_name(h), cat.arr_name(b)));
            for &t in e.terms(h) {
                c.test_eq(f.term(t, b), g.term(t, b), || {
                    format!("{} at term {} over {}", what(), e.term_name(t), cat.arr_name(b))
                });
            }
        }
    }
}

/// Functor-with-term-structure laws for a slice functor `g : src/apex → tgt/tgt_apex`.
pub fn check_slice_functor(
    src: &dyn ESys,
    apex: Obj,
    tgt: &dyn ESys,
    tgt_apex: Obj,
    g: &dyn SliceFun,
    c: &mut Check,
    what: &dyn Fn() -> String,
) {
    let (sc, tc) = (src.cat(), tgt.cat());
    let id_apex = sc.id(apex);
    for &b in sc.into(apex) {
        let Some(gb) = g.arr(b, id_apex) else {
            c.skip();
            continue;
        };
        if !c.test(tc.cod(gb) == tgt_apex, || format!("{}: object {} leaves the target slice", what(), sc.arr_name(b))) {
            continue;
        }
        for &h in sc.into(sc.dom(b)) {
            let Some(gh) = g.arr(h, b) else {
                c.skip();
                continue;
            };
            let tri = g.arr(sc.comp(b, h), id_apex);
            let ok = tc.cod(gh) == tc.dom(gb) && tri.is_some_and(|t| tc.try_comp(gb, gh) == Some(t));
            if tri.is_none() {
                c.skip();
            } else {
                c.test(ok, || format!("{}: ({}, over {}) is not a slice morphism", what(), sc.arr_name(h), sc.arr_name(b)));
            }
            if sc.is_id(h) {
                c.test(tc.is_id(gh), || format!("{}: identity over {} not preserved", what(), sc.arr_name(b)));
            }
            for &h2 in sc.into(sc.dom(h)) {
                let lhs = g.arr(sc.comp(h, h2), b);
                let rhs = g.arr(h2, sc.comp(b, h)).and_then(|g2| tc.try_comp(gh, g2));
                c.test_eq(lhs, rhs, || {
                    format!("{}: composition ({} ∘ {}, over {})", what(), sc.arr_name(h), sc.arr_name(h2), sc.arr_name(b))
                });
            }
            for &t in src.terms(h) {
                match g.term(t, b) {
                    None => c.skip(),
                    Some(gt) => {
                        c.test((gt as usize) < tgt.n_terms() && tgt.term_arrow(gt) == gh, || {
                            format!("{}: term {} lands outside T(G h)", what(), src.term_name(t))
                        });
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// validation

/// Which structure a slice functor `g : E/Θ → E/Θ'` preserves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PresFlags {
    pub root: bool,
    pub sub: bool,
    pub weak: bool,
    pub proj: bool,
}

/// Preservation checks for a slice functor of `e` into itself; records into the four checks.
fn preservation(e: &dyn ESys, theta: Obj, theta2: Obj, g: &dyn SliceFun, checks: &mut [Check; 4], what: &dyn Fn() -> String) {
    let cat = e.cat();
    let [root, sub, weak, proj] = checks;
    let id = cat.id(theta);
    root.test_eq(g.arr(id, id), Some(cat.id(theta2)), || format!("{what}: root", what = what()));
    for &y in cat.into(theta) {
        for &a in cat.into(cat.dom(y)) {
            let ya = cat.comp(y, a);
            let ga = g.arr(a, y);
            // sub: S_{G x} ∘ (G/(Y∘A)) = (G/Y) ∘ S_x on E/dom A
            for &x in e.terms(a) {
                let Some(gx) = g.term(x, y) else {
                    sub.skip();
                    continue;
                };
                let lhs = CompF { outer: subst_f(e, gx), inner: Box::new(SlicedF { g: Box::new(Ref(g)), y: ya, src: cat }), src: cat };
                let rhs = CompF { outer: Box::new(SlicedF { g: Box::new(Ref(g)), y, src: cat }), inner: subst_f(e, x), src: cat };
                slice_eq(e, cat.dom(a), &lhs, &rhs, sub, &|| format!("{}: x={}", what(), e.term_name(x)));
            }
            let Some(ga) = ga else {
                weak.skip();
                proj.skip();
                continue;
            };
            // weak: W_{G A} ∘ (G/Y) = (G/(Y∘A)) ∘ W_A on E/dom Y
            let lhs = CompF { outer: weak_f(e, ga), inner: Box::new(SlicedF { g: Box::new(Ref(g)), y, src: cat }), src: cat };
            let rhs = CompF { outer: Box::new(SlicedF { g: Box::new(Ref(g)), y: ya, src: cat }), inner: weak_f(e, a), src: cat };
            slice_eq(e, cat.dom(y), &lhs, &rhs, weak, &|| format!("{}: A={}", what(), cat.arr_name(a)));
            // proj: G(1_A) = 1_{G A}
            let lhs = e.one(a).and_then(|o| g.term(o, ya));
            proj.test_eq(lhs, e.one(ga), || format!("{}: 1 at A={}", what(), cat.arr_name(a)));
        }
    }
}

struct Ref<'a>(&'a dyn SliceFun);
impl SliceFun for Ref<'_> {
    fn arr(&self, h: Arr, over: Arr) -> Option<Arr> {
        self.0.arr(h, over)
    }
    fn term(&self, t: TermId, over: Arr) -> Option<TermId> {
        self.0.term(t, over)
    }
}

fn pres_checks() -> [Check; 4] {
    [Check::new("root"), Check::new("sub"), Check::new("weak"), Check::new("proj")]
}

/// Folds per-functor preservation outcomes into one law entry.
struct Aggregate {
    c: Check,
    checked: u64,
    skipped: u64,
}
impl Aggregate {
    fn new(law: &str) -> Self {
        Aggregate { c: Check::new(law), checked: 0, skipped: 0 }
    }
    fn add(&mut self, parts: &[&LawResult], who: &dyn Fn() -> String) {
        for p in parts {
            self.checked += p.checked;
            self.skipped += p.skipped;
            if let crate::report::Status::Fail(w) = &p.status {
                self.c.fail(|| format!("{}: {} fails: {w}", who(), p.law));
            }
        }
        self.c.ok();
    }
    fn finish(self) -> LawResult {
        let mut r = self.c.finish();
        r.checked = self.checked;
        r.skipped = self.skipped;
        r
    }
}

/// Validates the term category and every E-system law.
pub fn validate_esystem(e: &dyn ESys) -> Report {
    let cat = e.cat();
    let mut r = Report::new();

    let cr = validate_fincat(cat);
    let mut tc = Check::new("term-category");
    tc.test(cr.all_pass(), || cr.summarize("category").status_text().to_string());
    for t in 0..e.n_terms() as TermId {
        let a = e.term_arrow(t);
        tc.test((a as usize) < cat.n_arrows() && e.terms(a).contains(&t), || format!("term {}", e.term_name(t)));
    }
    tc.finish_into(&mut r);
    if !r.all_pass() {
        return r;
    }

    match cat.terminal() {
        None => r.push(absent("terminal", "no chosen terminal object")),
        Some(t) => {
            let mut c = Check::new("terminal");
            for o in cat.objects() {
                c.test(cat.hom(o, t).len() == 1, || format!("{} arrows {} → terminal", cat.hom(o, t).len(), cat.obj_name(o)));
            }
            c.finish_into(&mut r);
        }
    }

    // pre-substitution: functor laws and S_x(id) = id
    let mut pre_s = Check::new("pre-substitution");
    for a in cat.arrows() {
        for &x in e.terms(a) {
            let g = SubstF { e, x };
            check_slice_functor(e, cat.dom(a), e, cat.cod(a), &g, &mut pre_s, &|| format!("S_{}", e.term_name(x)));
        }
    }
    pre_s.finish_into(&mut r);

    let mut pre_w = Check::new("pre-weakening");
    for a in cat.arrows() {
        let (gamma, ga) = (cat.cod(a), cat.dom(a));
        let g = WeakF { e, a };
        check_slice_functor(e, gamma, e, ga, &g, &mut pre_w, &|| format!("W_{}", cat.arr_name(a)));
        pre_w.test_eq(g.arr(cat.id(gamma), cat.id(gamma)), Some(cat.id(ga)), || format!("W_{}(id) ≠ id", cat.arr_name(a)));
        if cat.is_id(a) {
            slice_eq(e, gamma, &g, &IdF, &mut pre_w, &|| format!("W_id at {}", cat.obj_name(gamma)));
        }
        for &p in cat.into(ga) {
            let ap = cat.comp(a, p);
            let lhs = WeakF { e, a: ap };
            let rhs = CompF { outer: weak_f(e, p), inner: weak_f(e, a), src: cat };
            slice_eq(e, gamma, &lhs, &rhs, &mut pre_w, &|| format!("W_{{A∘P}} ≠ W_P∘W_A for A={}, P={}", cat.arr_name(a), cat.arr_name(p)));
        }
    }
    pre_w.finish_into(&mut r);

    let mut pre_p = Check::new("pre-projection");
    for a in cat.arrows() {
        let wa = e.weak(a, a, cat.id(cat.cod(a)));
        match (wa, e.one(a)) {
            (None, _) => pre_p.skip(),
            (Some(_), None) => pre_p.fail(|| format!("1_{} missing", cat.arr_name(a))),
            (Some(w), Some(o)) => {
                pre_p.test(e.term_arrow(o) == w, || format!("1_{} ∉ T(W_A(A))", cat.arr_name(a)));
            }
        }
    }
    pre_p.finish_into(&mut r);
    if !r.entries.iter().filter(|l| l.law != "terminal").all(LawResult::passed) {
        return r;
    }

    let mut subsys = Aggregate::new("substitution-system");
    let mut e1 = Aggregate::new("E-axiom-1");
    for a in cat.arrows() {
        for &x in e.terms(a) {
            let mut cs = pres_checks();
            let g = SubstF { e, x };
            preservation(e, cat.dom(a), cat.cod(a), &g, &mut cs, &|| format!("S_{}", e.term_name(x)));
            let [root, sub, weak, proj] = cs.map(Check::finish);
            let who = || format!("S_{}", e.term_name(x));
            subsys.add(&[&sub], &who);
            e1.add(&[&root, &sub, &weak, &proj], &who);
        }
    }
    let mut weaksys = Aggregate::new("weakening-system");
    let mut projsys = Aggregate::new("projection-system");
    let mut e2 = Aggregate::new("E-axiom-2");
    for a in cat.arrows() {
        let mut cs = pres_checks();
        let g = WeakF { e, a };
        preservation(e, cat.cod(a), cat.dom(a), &g, &mut cs, &|| format!("W_{}", cat.arr_name(a)));
        let [root, sub, weak, proj] = cs.map(Check::finish);
        let who = || format!("W_{}", cat.arr_name(a));
        weaksys.add(&[&weak], &who);
        projsys.add(&[&proj], &who);
        e2.add(&[&root, &sub, &weak, &proj], &who);
    }
    r.push(subsys.finish());
    r.push(weaksys.finish());
    r.push(projsys.finish());
    r.push(e1.finish());
    r.push(e2.finish());

    // E3: S_x ∘ W_A = id on E/Γ
    let mut e3 = Check::new("E-axiom-3");
    for a in cat.arrows() {
        for &x in e.terms(a) {
            let lhs = CompF { outer: subst_f(e, x), inner: weak_f(e, a), src: cat };
            slice_eq(e, cat.cod(a), &lhs, &IdF, &mut e3, &|| format!("x={}", e.term_name(x)));
        }
    }
    e3.finish_into(&mut r);

    // E4: S_x(1_A) = x
    let mut e4 = Check::new("E-axiom-4");
    for a in cat.arrows() {
        let one = e.one(a);
        for &x in e.terms(a) {
            let lhs = one.and_then(|o| e.subst_term(x, o, cat.id(cat.dom(a))));
            e4.test_eq(lhs, Some(x), || format!("x={}", e.term_name(x)));
        }
    }
    e4.finish_into(&mut r);

    // E5: S_{1_A} ∘ (W_A/A) = id on E/Γ.A
    let mut e5 = Check::new("E-axiom-5");
    for a in cat.arrows() {
        let Some(one) = e.one(a) else {
            e5.skip();
            continue;
        };
        let lhs = CompF { outer: subst_f(e, one), inner: sliced_f(weak_f(e, a), a, cat), src: cat };
        slice_eq(e, cat.dom(a), &lhs, &IdF, &mut e5, &|| format!("A={}", cat.arr_name(a)));
    }
    e5.finish_into(&mut r);
    r
}

trait StatusText {
    fn status_text(&self) -> String;
}
impl StatusText for LawResult {
    fn status_text(&self) -> String {
        match &self.status {
            crate::report::Status::Pass => "pass".into(),
            crate::report::Status::Fail(w) | crate::report::Status::Absent(w) => w.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// pairing calculus

fn check_term(e: &dyn ESys, t: TermId, a: Arr, what: &str) -> Result<(), EError> {
    if e.term_arrow(t) != a {
        return Err(EError::Slice(format!("{what} {} is not a term of {}", e.term_name(t), e.cat().arr_name(a))));
    }
    Ok(())
}

fn trunc(what: &str) -> EError {
    EError::Truncated(what.to_string())
}

/// `⟨x, u⟩ := S_u(S_x(1_{A.P})) ∈ T(A∘P)`.
pub fn term_extension(e: &dyn ESys, a: Arr, p: Arr, x: TermId, u: TermId) -> Result<TermId, EError> {
    let cat = e.cat();
    if cat.cod(p) != cat.dom(a) {
        return Err(EError::Slice(format!("{} is not over dom {}", cat.arr_name(p), cat.arr_name(a))));
    }
    check_term(e, x, a, "x")?;
    let sxp = e.subst(x, p, cat.id(cat.dom(a))).ok_or_else(|| trunc("S_x(P)"))?;
    check_term(e, u, sxp, "u")?;
    let ap = cat.comp(a, p);
    let one = e.one(ap).ok_or_else(|| trunc("1_{A.P}"))?;
    let s1 = e.subst_term(x, one, p).ok_or_else(|| trunc("S_x(1_{A.P})"))?;
    e.subst_term(u, s1, cat.id(cat.dom(sxp))).ok_or_else(|| trunc("S_u(S_x(1_{A.P}))"))
}

/// `(pr1, pr2) = (W_P(1_A), 1_P)`.
pub fn projections(e: &dyn ESys, a: Arr, p: Arr) -> Result<(TermId, TermId), EError> {
    let cat = e.cat();
    if cat.cod(p) != cat.dom(a) {
        return Err(EError::Slice(format!("{} is not over dom {}", cat.arr_name(p), cat.arr_name(a))));
    }
    let one_a = e.one(a).ok_or_else(|| trunc("1_A"))?;
    let pr1 = e.weak_term(p, one_a, cat.id(cat.dom(a))).ok_or_else(|| trunc("W_P(1_A)"))?;
    let pr2 = e.one(p).ok_or_else(|| trunc("1_P"))?;
    Ok((pr1, pr2))
}

/// Checks that `(x, u) ↦ ⟨x, u⟩` is a bijection `Σ_{x∈T(A)} T(S_x P) → T(A∘P)` for every
/// composable pair, that unpairing through the projections inverts it, and that `|T(id)| = 1`.
pub fn check_pairing(e: &dyn ESys) -> Report {
    let cat = e.cat();
    let mut r = Report::new();
    let mut idc = Check::new("T(id) singleton");
    for o in cat.objects() {
        let n = e.terms(cat.id(o)).len();
        idc.test(n == 1, || format!("|T(id_{})| = {n}", cat.obj_name(o)));
    }
    idc.finish_into(&mut r);

    let mut bij = Check::new("pairing-bijective");
    let mut inv = Check::new("unpairing-inverse");
    for a in cat.arrows() {
        for &p in cat.into(cat.dom(a)) {
            let ap = cat.comp(a, p);
            let what = || format!("A={}, P={}", cat.arr_name(a), cat.arr_name(p));
            if e.one(ap).is_none() {
                bij.skip();
                continue;
            }
            let mut image = Vec::new();
            let mut defined = true;
            'outer: for &x in e.terms(a) {
                let Some(sxp) = e.subst(x, p, cat.id(cat.dom(a))) else {
                    defined = false;
                    break;
                };
                for &u in e.terms(sxp) {
                    match term_extension(e, a, p, x, u) {
                        Ok(t) => image.push(t),
                        Err(_) => {
                            defined = false;
                            break 'outer;
                        }
                    }
                }
            }
            if !defined {
                bij.skip();
                continue;
            }
            let n_img = image.len();
            image.sort_unstable();
            image.dedup();
            let target = e.terms(ap);
            bij.test(image.len() == n_img && image.len() == target.len() && image.iter().all(|t| e.term_arrow(*t) == ap), || {
                format!("{}: {} pairs, {} distinct, |T(A.P)| = {}", what(), n_img, image.len(), target.len())
            });
            let Ok((pr1, pr2)) = projections(e, a, p) else {
                inv.skip();
                continue;
            };
            let dp = cat.id(cat.dom(p));
            for &s in target {
                let x = e.subst_term(s, pr1, dp);
                let u = e.subst_term(s, pr2, dp);
                match (x, u) {
                    (Some(x), Some(u)) => {
                        let back = term_extension(e, a, p, x, u).ok();
                        inv.test(back == Some(s), || format!("{}: s={}", what(), e.term_name(s)));
                    }
                    _ => inv.skip(),
                }
            }
        }
    }
    bij.finish_into(&mut r);
    inv.finish_into(&mut r);
    r
}

/// `f* = S_f ∘ (W_A/B)` for `f ∈ hom(A, B) = T(W_A(B))`.
pub fn precompose<'a>(e: &'a dyn ESys, a: Arr, b: Arr, f: TermId) -> Box<dyn SliceFun + 'a> {
    let cat = e.cat();
    comp_f(subst_f(e, f), sliced_f(weak_f(e, a), b, cat), cat)
}

/// `hom(A, B) = T(W_A(B))` for `A, B` over the same object.
pub fn internal_hom(e: &dyn ESys, a: Arr, b: Arr) -> Option<&[TermId]> {
    let cat = e.cat();
    let w = e.weak(a, b, cat.id(cat.cod(b)))?;
    Some(e.terms(w))
}

/// `g ∘ f := f*(g)` for internal morphisms `f : A → B`, `g : B → C`.
pub fn internal_comp(e: &dyn ESys, a: Arr, b: Arr, f: TermId, g: TermId) -> Option<TermId> {
    let cat = e.cat();
    precompose(e, a, b, f).term(g, cat.id(cat.dom(b)))
}

/// The category of internal morphisms over `gamma`, restricted to the slice
/// objects for which every hom-set and composite is defined.
#[derive(Clone, Debug)]
pub struct InternalHomCat {
    pub cat: FinCat,
    /// Object ↦ the slice object (arrow into `gamma`) it stands for.
    pub obj_arrow: Vec<Arr>,
    /// Arrow ↦ the term it stands for.
    pub arrow_term: Vec<TermId>,
    pub term_arrow: FxHashMap<TermId, Arr>,
}

pub fn internal_hom_cat(e: &dyn ESys, gamma: Obj) -> Result<InternalHomCat, EError> {
    internal_hom_cat_with(e, gamma, |_| true)
}

/// As [`internal_hom_cat`], restricted to slice objects accepted by `keep`.
pub fn internal_hom_cat_with(e: &dyn ESys, gamma: Obj, keep: impl Fn(Arr) -> bool) -> Result<InternalHomCat, EError> {
    let c = e.cat();
    let objs: Vec<Arr> = c.into(gamma).iter().copied().filter(|&a| keep(a)).collect();
    let mut b = CatBuilder::new();
    let mut ob = FxHashMap::default();
    for &a in &objs {
        ob.insert(a, b.object(c.obj_name(c.dom(a)).to_string()));
    }
    let mut arrow_term = Vec::new();
    let mut term_arrow = FxHashMap::default();
    let mut homs = FxHashMap::default();
    for &x in &objs {
        for &y in &objs {
            let hs = internal_hom(e, x, y)
                .ok_or_else(|| trunc(&format!("hom({}, {})", c.arr_name(x), c.arr_name(y))))?;
            for &t in hs {
                let id = b.arrow(e.term_name(t), ob[&x], ob[&y]);
                arrow_term.push(t);
                term_arrow.insert(t, id);
            }
            homs.insert((x, y), hs.to_vec());
        }
        let one = e.one(x).ok_or_else(|| trunc("identity term"))?;
        let id = *term_arrow.get(&one).ok_or_else(|| EError::Other("identity term outside hom".into()))?;
        b.set_identity(ob[&x], id);
    }
    if let Some(&t) = objs.iter().find(|&&a| c.is_id(a)) {
        b.set_terminal(ob[&t]);
    }
    for &x in &objs {
        for &y in &objs {
            for &f in &homs[&(x, y)] {
                let pre = precompose(e, x, y, f);
                for &z in &objs {
                    for &g in &homs[&(y, z)] {
                        let gf = pre.term(g, c.id(c.dom(y))).ok_or_else(|| trunc("internal composite"))?;
                        let h = *term_arrow.get(&gf).ok_or_else(|| EError::Other("composite leaves hom-set".into()))?;
                        b.set_compose(term_arrow[&f], term_arrow[&g], h);
                    }
                }
            }
        }
    }
    let cat = b.build().map_err(|e| EError::Other(e.to_string()))?;
    Ok(InternalHomCat { cat, obj_arrow: objs, arrow_term, term_arrow })
}

/// `f·F := ⟨W_P(f), F⟩ ∈ hom(A.P, B.Q)` for `f ∈ hom(A,B)` and `F ∈ hom_f(P,Q) = hom(P, f*Q)`.
pub fn vertical_compose(e: &dyn ESys, a: Arr, b: Arr, p: Arr, q: Arr, f: TermId, big_f: TermId) -> Result<TermId, EError> {
    let cat = e.cat();
    let ap = cat.comp(a, p);
    let id_a = cat.id(cat.dom(a));
    let wpf = e.weak_term(p, f, id_a).ok_or_else(|| trunc("W_P(f)"))?;
    let big_a = e.weak(ap, b, cat.id(cat.cod(b))).ok_or_else(|| trunc("W_{A.P}(B)"))?;
    let big_p = e.weak(ap, q, b).ok_or_else(|| trunc("W_{A.P}/B (Q)"))?;
    let _ = hom_over(e, a, b, p, q, f)?;
    term_extension(e, big_a, big_p, wpf, big_f)
}

/// `hom_f(P, Q) = hom(P, f*Q)` in context `Γ.A`.
pub fn hom_over(e: &dyn ESys, a: Arr, b: Arr, p: Arr, q: Arr, f: TermId) -> Result<Vec<TermId>, EError> {
    let cat = e.cat();
    let fq = precompose(e, a, b, f).arr(q, cat.id(cat.dom(b))).ok_or_else(|| trunc("f*Q"))?;
    let _ = p;
    internal_hom(e, p, fq).map(<[TermId]>::to_vec).ok_or_else(|| trunc("hom(P, f*Q)"))
}

/// Exhaustive checks of the derived identities of the pairing calculus.
pub fn check_calculus(e: &dyn ESys) -> Report {
    let cat = e.cat();
    let mut r = Report::new();
    let over = |a: Arr| cat.into(cat.dom(a)).to_vec();

    // S_{⟨x,u⟩} = S_u ∘ (S_x / P)
    let mut c = Check::new("subst-by-tmext");
    for a in cat.arrows() {
        for p in over(a) {
            for &x in e.terms(a) {
                let Some(sxp) = e.subst(x, p, cat.id(cat.dom(a))) else { continue };
                for &u in e.terms(sxp) {
                    let Ok(xu) = term_extension(e, a, p, x, u) else {
                        c.skip();
                        continue;
                    };
                    let lhs = SubstF { e, x: xu };
                    let rhs = CompF { outer: subst_f(e, u), inner: sliced_f(subst_f(e, x), p, cat), src: cat };
                    slice_eq(e, cat.dom(p), &lhs, &rhs, &mut c, &|| format!("x={}, u={}", e.term_name(x), e.term_name(u)));
                }
            }
        }
    }
    c.finish_into(&mut r);

    // ⟨⟨x,u⟩,v⟩ = ⟨x,⟨u,v⟩⟩
    let mut c = Check::new("tmext-assoc");
    for a in cat.arrows() {
        for p in over(a) {
            for rr in over(p) {
                let ap = cat.comp(a, p);
                let prr = cat.comp(p, rr);
                for &x in e.terms(a) {
                    let Some(sxp) = e.subst(x, p, cat.id(cat.dom(a))) else { continue };
                    let Some(sxr) = e.subst(x, rr, p) else { continue };
                    for &u in e.terms(sxp) {
                        let Ok(xu) = term_extension(e, a, p, x, u) else {
                            c.skip();
                            continue;
                        };
                        let Some(sxur) = e.subst(xu, rr, cat.id(cat.dom(p))) else { continue };
                        for &v in e.terms(sxur) {
                            let lhs = term_extension(e, ap, rr, xu, v).ok();
                            let uv = term_extension(e, sxp, sxr, u, v).ok();
                            let rhs = uv.and_then(|uv| term_extension(e, a, prr, x, uv).ok());
                            c.test_eq(lhs, rhs, || format!("x={}, u={}, v={}", e.term_name(x), e.term_name(u), e.term_name(v)));
                        }
                    }
                }
            }
        }
    }
    c.finish_into(&mut r);

    // ⟨x,u⟩[pr1] = x, ⟨x,u⟩[pr2] = u, ⟨pr1,pr2⟩ = 1_{A.P}
    let mut c = Check::new("pairproj");
    for a in cat.arrows() {
        for p in over(a) {
            let Ok((pr1, pr2)) = projections(e, a, p) else {
                c.skip();
                continue;
            };
            let ap = cat.comp(a, p);
            let dp = cat.id(cat.dom(p));
            for &x in e.terms(a) {
                let Some(sxp) = e.subst(x, p, cat.id(cat.dom(a))) else { continue };
                for &u in e.terms(sxp) {
                    let Ok(xu) = term_extension(e, a, p, x, u) else {
                        c.skip();
                        continue;
                    };
                    c.test_eq(e.subst_term(xu, pr1, dp), Some(x), || format!("pr1 at x={}, u={}", e.term_name(x), e.term_name(u)));
                    c.test_eq(e.subst_term(xu, pr2, dp), Some(u), || format!("pr2 at x={}, u={}", e.term_name(x), e.term_name(u)));
                }
            }
            let wa = e.weak(ap, a, cat.id(cat.cod(a)));
            let wp = e.weak(ap, p, a);
            if let (Some(wa), Some(wp)) = (wa, wp) {
                let lhs = term_extension(e, wa, wp, pr1, pr2).ok();
                c.test_eq(lhs, e.one(ap), || format!("⟨pr1,pr2⟩ at A={}, P={}", cat.arr_name(a), cat.arr_name(p)));
            } else {
                c.skip();
            }
        }
    }
    c.finish_into(&mut r);

    // pr1* = W_P
    let mut c = Check::new("precomp-by-proj");
    for a in cat.arrows() {
        for p in over(a) {
            let Ok((pr1, _)) = projections(e, a, p) else {
                c.skip();
                continue;
            };
            let ap = cat.comp(a, p);
            let lhs = precompose(e, ap, a, pr1);
            let rhs = WeakF { e, a: p };
            slice_eq(e, cat.dom(a), lhs.as_ref(), &rhs, &mut c, &|| format!("A={}, P={}", cat.arr_name(a), cat.arr_name(p)));
        }
    }
    c.finish_into(&mut r);

    // (1_A)* = id, f*∘g* = (g∘f)*, f*∘W_B = W_A
    let mut cid = Check::new("precomp-identity");
    let mut cc = Check::new("compcomp");
    let mut cw = Check::new("compW_W");
    for gamma in cat.objects() {
        let objs = cat.into(gamma).to_vec();
        for &a in &objs {
            if let Some(one) = e.one(a) {
                let lhs = precompose(e, a, a, one);
                slice_eq(e, cat.dom(a), lhs.as_ref(), &IdF, &mut cid, &|| format!("A={}", cat.arr_name(a)));
            }
            for &b in &objs {
                let Some(hab) = internal_hom(e, a, b) else { continue };
                for &f in hab {
                    let fs = precompose(e, a, b, f);
                    let lhs = CompF { outer: precompose(e, a, b, f), inner: weak_f(e, b), src: cat };
                    slice_eq(e, gamma, &lhs, &WeakF { e, a }, &mut cw, &|| format!("f={}", e.term_name(f)));
                    for &cc_obj in &objs {
                        let Some(hbc) = internal_hom(e, b, cc_obj) else { continue };
                        for &g in hbc {
                            let Some(gf) = fs.term(g, cat.id(cat.dom(b))) else {
                                cc.skip();
                                continue;
                            };
                            let lhs = CompF { outer: precompose(e, a, b, f), inner: precompose(e, b, cc_obj, g), src: cat };
                            let rhs = precompose(e, a, cc_obj, gf);
                            slice_eq(e, cat.dom(cc_obj), &lhs, rhs.as_ref(), &mut cc, &|| {
                                format!("f={}, g={}", e.term_name(f), e.term_name(g))
                            });
                        }
                    }
                }
            }
        }
    }
    cid.finish_into(&mut r);
    cc.finish_into(&mut r);
    cw.finish_into(&mut r);

    // interchange and prjsquare
    let mut ci = Check::new("interchange");
    let mut cu = Check::new("prjsquare-uniqueness");
    for gamma in cat.objects() {
        let objs = cat.into(gamma).to_vec();
        for &a in &objs {
            for &b in &objs {
                let Some(hab) = internal_hom(e, a, b) else { continue };
                for &f in hab {
                    for p in over(a) {
                        for q in over(b) {
                            let Ok(fs) = hom_over(e, a, b, p, q, f) else { continue };
                            for &big_f in &fs {
                                let Ok(ff) = vertical_compose(e, a, b, p, q, f, big_f) else {
                                    cu.skip();
                                    continue;
                                };
                                prjsquare_unique(e, a, b, p, q, f, big_f, ff, &mut cu);
                                for &cobj in &objs {
                                    let Some(hbc) = internal_hom(e, b, cobj) else { continue };
                                    for &g in hbc {
                                        for rr in over(cobj) {
                                            let Ok(gs) = hom_over(e, b, cobj, q, rr, g) else { continue };
                                            for &big_g in &gs {
                                                interchange_one(e, (a, b, cobj), (p, q, rr), (f, g), (big_f, big_g), ff, &mut ci);
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    ci.finish_into(&mut r);
    cu.finish_into(&mut r);
    r
}

#[allow(clippy::too_many_arguments)]
fn prjsquare_unique(e: &dyn ESys, a: Arr, b: Arr, p: Arr, q: Arr, f: TermId, big_f: TermId, ff: TermId, c: &mut Check) {
    let cat = e.cat();
    let (ap, bq) = (cat.comp(a, p), cat.comp(b, q));
    let (Ok((pr1_ap, _)), Ok((pr1_bq, pr2_bq))) = (projections(e, a, p), projections(e, b, q)) else {
        c.skip();
        return;
    };
    let Some(cands) = internal_hom(e, ap, bq) else {
        c.skip();
        return;
    };
    // target of the first property: f ∘ pr1(A,P) = pr1(A,P)*(f)
    let want1 = internal_comp(e, ap, a, pr1_ap, f);
    let mut found = Vec::new();
    for &h in cands {
        let hs = precompose(e, ap, bq, h);
        let p1 = hs.term(pr1_bq, cat.id(cat.dom(bq)));
        let p2 = hs.term(pr2_bq, cat.id(cat.dom(q)));
        if p1.is_none() || p2.is_none() || want1.is_none() {
            c.skip();
            return;
        }
        if p1 == want1 && p2 == Some(big_f) {
            found.push(h);
        }
    }
    c.test(found == [ff], || format!("f={}, F={}: candidates {:?}", e.term_name(f), e.term_name(big_f), found.len()));
}

#[allow(clippy::too_many_arguments)]
fn interchange_one(
    e: &dyn ESys,
    (a, b, cobj): (Arr, Arr, Arr),
    (p, q, rr): (Arr, Arr, Arr),
    (f, g): (TermId, TermId),
    (big_f, big_g): (TermId, TermId),
    ff: TermId,
    c: &mut Check,
) {
    let cat = e.cat();
    let (ap, bq) = (cat.comp(a, p), cat.comp(b, q));
    let Ok(gg) = vertical_compose(e, b, cobj, q, rr, g, big_g) else {
        c.skip();
        return;
    };
    // lhs: (g·G) ∘ (f·F) in context Γ
    let lhs = internal_comp(e, ap, bq, ff, gg);
    // rhs: (g∘f) · (G∘F), with G∘F := F*((f*/Q)(G))
    let Some(gf) = internal_comp(e, a, b, f, g) else {
        c.skip();
        return;
    };
    let fq = precompose(e, a, b, f).arr(q, cat.id(cat.dom(b)));
    let Some(fq) = fq else {
        c.skip();
        return;
    };
    let f_star_q = sliced_f(precompose(e, a, b, f), q, cat);
    let bullet = comp_f(precompose(e, p, fq, big_f), f_star_q, cat);
    let g_after_f = bullet.term(big_g, cat.id(cat.dom(q)));
    let rhs = g_after_f.and_then(|h| vertical_compose(e, a, cobj, p, rr, gf, h).ok());
    c.test_eq(lhs, rhs, || format!("f={}, g={}, F={}, G={}", e.term_name(f), e.term_name(g), e.term_name(big_f), e.term_name(big_g)));
}

// ---------------------------------------------------------------------------
// homomorphisms

/// A global functor with term structure between two E-systems.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EHom {
    pub functor: Functor,
    pub term: Vec<TermId>,
}

impl EHom {
    pub fn identity(e: &dyn ESys) -> EHom {
        EHom { functor: Functor::identity(e.cat()), term: (0..e.n_terms() as TermId).collect() }
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &EHom) -> EHom {
        EHom {
            functor: self.functor.after(&first.functor),
            term: first.term.iter().map(|&t| self.term[t as usize]).collect(),
        }
    }

    pub fn inverse(&self, tgt: &dyn ESys) -> Option<EHom> {
        Some(EHom {
            functor: self.functor.inverse(tgt.cat())?,
            term: crate::cat::invert(&self.term, tgt.n_terms())?,
        })
    }

    pub fn is_bijective(&self, tgt: &dyn ESys) -> bool {
        self.functor.is_bijective(tgt.cat()) && crate::cat::bijective(&self.term, tgt.n_terms())
    }
}

/// Checks that `h : src → tgt` is an E-homomorphism: functor, term typing,
/// terminal, and preservation of substitution, weakening and identity terms.
pub fn validate_ehom(src: &dyn ESys, tgt: &dyn ESys, h: &EHom) -> Report {
    let (sc, tc) = (src.cat(), tgt.cat());
    let mut r = validate_functor(sc, tc, &h.functor, None);
    if !r.all_pass() {
        return r;
    }
    let mut typ = Check::new("term-typing");
    typ.test(h.term.len() == src.n_terms(), || "term map does not cover the source".into());
    for t in 0..src.n_terms().min(h.term.len()) as TermId {
        let ht = h.term[t as usize];
        typ.test(
            (ht as usize) < tgt.n_terms() && tgt.term_arrow(ht) == h.functor.arr[src.term_arrow(t) as usize],
            || format!("term {}", src.term_name(t)),
        );
    }
    typ.finish_into(&mut r);
    if !r.all_pass() {
        return r;
    }
    let mut root = Check::new("root");
    if let (Some(t1), Some(t2)) = (sc.terminal(), tc.terminal()) {
        root.test(h.functor.obj[t1 as usize] == t2, || "terminal not preserved".into());
    }
    root.finish_into(&mut r);

    let g = GlobalF(h);
    let mut sub = Check::new("sub");
    let mut weak = Check::new("weak");
    let mut proj = Check::new("proj");
    for a in sc.arrows() {
        let ha = h.functor.arr[a as usize];
        // (H/Γ) ∘ S_x = S_{Hx} ∘ (H/Γ.A)
        for &x in src.terms(a) {
            let hx = h.term[x as usize];
            let lhs = CompF { outer: Box::new(GlobalF(h)), inner: subst_f(src, x), src: sc };
            let rhs = CompF { outer: subst_f(tgt, hx), inner: Box::new(GlobalF(h)), src: sc };
            slice_eq(src, sc.dom(a), &lhs, &rhs, &mut sub, &|| format!("x={}", src.term_name(x)));
        }
        // (H/Γ.A) ∘ W_A = W_{HA} ∘ (H/Γ)
        let lhs = CompF { outer: Box::new(GlobalF(h)), inner: weak_f(src, a), src: sc };
        let rhs = CompF { outer: weak_f(tgt, ha), inner: Box::new(GlobalF(h)), src: sc };
        slice_eq(src, sc.cod(a), &lhs, &rhs, &mut weak, &|| format!("A={}", sc.arr_name(a)));
        let lhs = src.one(a).and_then(|o| g.term(o, 0));
        proj.test_eq(lhs, tgt.one(ha), || format!("1 at A={}", sc.arr_name(a)));
    }
    for c in [sub, weak, proj] {
        c.finish_into(&mut r);
    }
    r
}

/// Checks that `fwd` and `bwd` are mutually inverse E-homomorphisms.
pub fn check_e_iso(a: &dyn ESys, b: &dyn ESys, fwd: &EHom, bwd: &EHom) -> Report {
    let mut r = Report::new();
    r.extend_prefixed("fwd/", validate_ehom(a, b, fwd));
    r.extend_prefixed("bwd/", validate_ehom(b, a, bwd));
    let mut c = Check::new("bwd∘fwd = id");
    c.test(bwd.after(fwd) == EHom::identity(a), || "not the identity".into());
    c.finish_into(&mut r);
    let mut c = Check::new("fwd∘bwd = id");
    c.test(fwd.after(bwd) == EHom::identity(b), || "not the identity".into());
    c.finish_into(&mut r);
    r
}

// ---------------------------------------------------------------------------
// tabulated E-systems

/// A slice functor as explicit tables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SliceTable {
    pub arr: FxHashMap<(Arr, Arr), Arr>,
    pub term: FxHashMap<(TermId, Arr), TermId>,
}

impl SliceFun for SliceTable {
    fn arr(&self, h: Arr, over: Arr) -> Option<Arr> {
        self.arr.get(&(h, over)).copied()
    }
    fn term(&self, t: TermId, over: Arr) -> Option<TermId> {
        self.term.get(&(t, over)).copied()
    }
}

/// An E-system given entirely by tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ESystem {
    pub cat: FinCat,
    pub term_names: Vec<String>,
    pub term_arrow: Vec<Arr>,
    terms_of: Vec<Vec<TermId>>,
    /// Indexed by term.
    pub subst: Vec<SliceTable>,
    /// Indexed by arrow.
    pub weak: Vec<SliceTable>,
    /// Indexed by arrow.
    pub one: Vec<Option<TermId>>,
    pub strat: Option<Stratification>,
}

impl ESystem {
    /// Assembles the tables; `term_arrow` entries must be valid arrows.
    pub fn new(
        cat: FinCat,
        term_names: Vec<String>,
        term_arrow: Vec<Arr>,
        subst: Vec<SliceTable>,
        weak: Vec<SliceTable>,
        one: Vec<Option<TermId>>,
        strat: Option<Stratification>,
    ) -> ESystem {
        let mut terms_of = vec![Vec::new(); cat.n_arrows()];
        for (t, &a) in term_arrow.iter().enumerate() {
            terms_of[a as usize].push(t as TermId);
        }
        ESystem { cat, term_names, term_arrow, terms_of, subst, weak, one, strat }
    }

    /// Tabulates any E-system over its full slice domains.
    pub fn materialize(e: &dyn ESys) -> ESystem {
        let cat = e.cat();
        let tab = |g: &dyn SliceFun, apex: Obj| {
            let mut t = SliceTable::default();
            for &b in cat.into(apex) {
                for &h in cat.into(cat.dom(b)) {
                    if let Some(v) = g.arr(h, b) {
                        t.arr.insert((h, b), v);
                    }
                    for &x in e.terms(h) {
                        if let Some(v) = g.term(x, b) {
                            t.term.insert((x, b), v);
                        }
                    }
                }
            }
            t
        };
        let n = e.n_terms() as TermId;
        let term_arrow: Vec<Arr> = (0..n).map(|t| e.term_arrow(t)).collect();
        let subst = (0..n).map(|x| tab(&SubstF { e, x }, cat.dom(term_arrow[x as usize]))).collect();
        let weak = cat.arrows().map(|a| tab(&WeakF { e, a }, cat.cod(a))).collect();
        let one = cat.arrows().map(|a| e.one(a)).collect();
        ESystem::new(
            cat.clone(),
            (0..n).map(|t| e.term_name(t)).collect(),
            term_arrow,
            subst,
            weak,
            one,
            e.stratification().cloned(),
        )
    }

    /// Restriction to objects of level ≤ m (requires a stratification).
    pub fn truncate(e: &dyn ESys, m: u32) -> Option<ESystem> {
        Self::truncate_with_maps(e, m).map(|(t, _)| t)
    }

    /// As [`ESystem::truncate`], also returning the old ids of what was kept.
    pub fn truncate_with_maps(e: &dyn ESys, m: u32) -> Option<(ESystem, Restriction)> {
        let s = e.stratification()?;
        let cat = e.cat();
        let (cat2, keep_o, keep_a) = full_subcategory(cat, |o| s.level(o) <= m);
        let amap: FxHashMap<Arr, Arr> = keep_a.iter().enumerate().map(|(i, &a)| (a, i as Arr)).collect();
        let mut tmap = FxHashMap::default();
        let mut names = Vec::new();
        let mut tarrow = Vec::new();
        let mut keep_t = Vec::new();
        for t in 0..e.n_terms() as TermId {
            if let Some(&a2) = amap.get(&e.term_arrow(t)) {
                tmap.insert(t, names.len() as TermId);
                names.push(e.term_name(t));
                tarrow.push(a2);
                keep_t.push(t);
            }
        }
        let tab = |g: &dyn SliceFun, apex: Obj| {
            let mut t = SliceTable::default();
            for &bb in cat.into(apex) {
                let Some(&b2) = amap.get(&bb) else { continue };
                for &h in cat.into(cat.dom(bb)) {
                    let Some(&h2) = amap.get(&h) else { continue };
                    if let Some(v) = g.arr(h, bb).and_then(|v| amap.get(&v)) {
                        t.arr.insert((h2, b2), *v);
                    }
                    for &x in e.terms(h) {
                        if let Some(v) = g.term(x, bb).and_then(|v| tmap.get(&v)) {
                            t.term.insert((tmap[&x], b2), *v);
                        }
                    }
                }
            }
            t
        };
        let subst = keep_t.iter().map(|&x| tab(&SubstF { e, x }, cat.dom(e.term_arrow(x)))).collect();
        let weak = keep_a.iter().map(|&a| tab(&WeakF { e, a }, cat.cod(a))).collect();
        let one = keep_a.iter().map(|&a| e.one(a).and_then(|o| tmap.get(&o).copied())).collect();
        let strat = crate::cat::check_stratification(&cat2, &keep_o.iter().map(|&o| s.level(o)).collect::<Vec<_>>()).ok();
        let t = ESystem::new(cat2, names, tarrow, subst, weak, one, strat);
        Some((t, Restriction { obj: keep_o, arr: keep_a, term: keep_t }))
    }
}

/// Old ids of the objects, arrows and terms kept by a truncation, indexed by new id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Restriction {
    pub obj: Vec<Obj>,
    pub arr: Vec<Arr>,
    pub term: Vec<TermId>,
}

impl ESys for ESystem {
    fn cat(&self) -> &FinCat {
        &self.cat
    }
    fn n_terms(&self) -> usize {
        self.term_arrow.len()
    }
    fn terms(&self, a: Arr) -> &[TermId] {
        &self.terms_of[a as usize]
    }
    fn term_arrow(&self, t: TermId) -> Arr {
        self.term_arrow[t as usize]
    }
    fn term_name(&self, t: TermId) -> String {
        self.term_names[t as usize].clone()
    }
    fn subst(&self, x: TermId, h: Arr, over: Arr) -> Option<Arr> {
        self.subst.get(x as usize)?.arr(h, over)
    }
    fn subst_term(&self, x: TermId, t: TermId, over: Arr) -> Option<TermId> {
        self.subst.get(x as usize)?.term(t, over)
    }
    fn weak(&self, a: Arr, h: Arr, over: Arr) -> Option<Arr> {
        self.weak.get(a as usize)?.arr(h, over)
    }
    fn weak_term(&self, a: Arr, t: TermId, over: Arr) -> Option<TermId> {
        self.weak.get(a as usize)?.term(t, over)
    }
    fn one(&self, a: Arr) -> Option<TermId> {
        self.one.get(a as usize).copied().flatten()
    }
    fn stratification(&self) -> Option<&Stratification> {
        self.strat.as_ref()
    }
}

// ---------------------------------------------------------------------------
// the E-system of standard finite sets

/// The poset `(ℕ, ≥)` truncated at `N` with `T(n, k) = Set([k], [n])`.
///
/// Object `n` has id `n`; the arrow `(n, k) : n+k → n` is `arrow(n+k, k)` of the chain.
#[derive(Clone, Debug)]
pub struct NatE {
    pub height: u32,
    tree: FreeTreeCat,
    term_off: Vec<u32>,
    terms_of: Vec<Vec<TermId>>,
    term_arrow: Vec<Arr>,
}

fn pow(n: u32, k: u32) -> u32 {
    n.pow(k)
}

impl NatE {
    pub fn new(height: u32) -> NatE {
        let names = (0..=height).map(|n| n.to_string()).collect();
        let parent = (0..=height).map(|n| n.checked_sub(1)).collect();
        let tree = FreeTreeCat::new(names, parent);
        let mut term_off = Vec::new();
        let mut terms_of = Vec::new();
        let mut term_arrow = Vec::new();
        for a in tree.cat.arrows() {
            let (n, k) = Self::nk_of(&tree, a);
            let off = term_arrow.len() as u32;
            term_off.push(off);
            let cnt = pow(n, k);
            terms_of.push((off..off + cnt).collect());
            term_arrow.extend(std::iter::repeat_n(a, cnt as usize));
        }
        NatE { height, tree, term_off, terms_of, term_arrow }
    }

    fn nk_of(tree: &FreeTreeCat, a: Arr) -> (u32, u32) {
        let (x, k) = tree.decode(a);
        (x - k, k)
    }

    /// `(n, k)` for the arrow `n+k → n`.
    pub fn nk(&self, a: Arr) -> (u32, u32) {
        Self::nk_of(&self.tree, a)
    }

    pub fn arrow(&self, n: u32, k: u32) -> Option<Arr> {
        (n + k <= self.height).then(|| self.tree.arrow(n + k, k))
    }

    /// The function `[k] → [n]` a term stands for.
    pub fn decode(&self, t: TermId) -> Vec<u32> {
        let a = self.term_arrow[t as usize];
        let (n, k) = self.nk(a);
        let mut code = t - self.term_off[a as usize];
        (0..k)
            .map(|_| {
                let v = code % n;
                code /= n;
                v
            })
            .collect()
    }

    pub fn encode(&self, n: u32, f: &[u32]) -> Option<TermId> {
        let a = self.arrow(n, f.len() as u32)?;
        let mut code = 0;
        for &v in f.iter().rev() {
            if v >= n {
                return None;
            }
            code = code * n + v;
        }
        Some(self.term_off[a as usize] + code)
    }
}

impl ESys for NatE {
    fn cat(&self) -> &FinCat {
        &self.tree.cat
    }
    fn n_terms(&self) -> usize {
        self.term_arrow.len()
    }
    fn terms(&self, a: Arr) -> &[TermId] {
        &self.terms_of[a as usize]
    }
    fn term_arrow(&self, t: TermId) -> Arr {
        self.term_arrow[t as usize]
    }
    fn term_name(&self, t: TermId) -> String {
        let (n, k) = self.nk(self.term_arrow[t as usize]);
        let f: Vec<String> = self.decode(t).iter().map(u32::to_string).collect();
        format!("({n},{k})[{}]", f.join(" "))
    }
    // S_f for f ∈ T(n,k): ((n+k+j, l), (n+k, j)) ↦ ((n+j, l), (n, j))
    fn subst(&self, x: TermId, h: Arr, over: Arr) -> Option<Arr> {
        let (n, k) = self.nk(self.term_arrow[x as usize]);
        let (base, j) = self.nk(over);
        let (hb, l) = self.nk(h);
        if base != n + k || hb != n + k + j {
            return None;
        }
        self.arrow(n + j, l)
    }
    fn subst_term(&self, x: TermId, t: TermId, over: Arr) -> Option<TermId> {
        let (n, k) = self.nk(self.term_arrow[x as usize]);
        let (base, j) = self.nk(over);
        let h = self.term_arrow[t as usize];
        let (hb, _) = self.nk(h);
        if base != n + k || hb != n + k + j {
            return None;
        }
        let f = self.decode(x);
        let g: Vec<u32> = self
            .decode(t)
            .into_iter()
            .map(|v| if v < n { v } else if v < n + k { f[(v - n) as usize] } else { v - k })
            .collect();
        self.encode(n + j, &g)
    }
    // W_{(n,k)}: ((n+j, l), (n, j)) ↦ ((n+k+j, l), (n+k, j))
    fn weak(&self, a: Arr, h: Arr, over: Arr) -> Option<Arr> {
        let (n, k) = self.nk(a);
        let (base, j) = self.nk(over);
        let (hb, l) = self.nk(h);
        if base != n || hb != n + j {
            return None;
        }
        self.arrow(n + k + j, l)
    }
    fn weak_term(&self, a: Arr, t: TermId, over: Arr) -> Option<TermId> {
        let (n, k) = self.nk(a);
        let (base, j) = self.nk(over);
        let (hb, l) = self.nk(self.term_arrow[t as usize]);
        if base != n || hb != n + j || n + k + j + l > self.height {
            return None;
        }
        let g: Vec<u32> = self.decode(t).into_iter().map(|v| if v < n { v } else { v + k }).collect();
        self.encode(n + k + j, &g)
    }
    // 1_{(n,k)} = (i ↦ n + i) ∈ T(n+k, k)
    fn one(&self, a: Arr) -> Option<TermId> {
        let (n, k) = self.nk(a);
        if n + 2 * k > self.height {
            return None;
        }
        self.encode(n + k, &(0..k).map(|i| n + i).collect::<Vec<_>>())
    }
    fn stratification(&self) -> Option<&Stratification> {
        Some(&self.tree.strat)
    }
}

pub fn build_nat_esystem(height: u32) -> NatE {
    NatE::new(height)
}

// ---------------------------------------------------------------------------
// group structures

/// The one-object structure of a finite group: arrows are group elements,
/// `A ∘ P := P·A`, `T(g) = Aut(G)`, substitution by automorphisms,
/// weakening by conjugation, identity terms the identity automorphism.
#[derive(Clone, Debug)]
pub struct GroupE {
    mult: Vec<Vec<usize>>,
    inv: Vec<usize>,
    auts: Vec<Vec<usize>>,
    aut_ix: FxHashMap<Vec<usize>, usize>,
    cat: FinCat,
    terms_of: Vec<Vec<TermId>>,
}

impl GroupE {
    pub fn new(mult: Vec<Vec<usize>>) -> Result<GroupE, EError> {
        let n = mult.len();
        if n == 0 || mult.iter().any(|row| row.len() != n || row.iter().any(|&v| v >= n)) {
            return Err(EError::NotAGroup("table is not a square table over its elements".into()));
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mult[mult[a][b]][c] != mult[a][mult[b][c]] {
                        return Err(EError::NotAGroup(format!("non-associative table at ({a},{b},{c})")));
                    }
                }
            }
        }
        let e = (0..n)
            .find(|&e| (0..n).all(|a| mult[e][a] == a && mult[a][e] == a))
            .ok_or_else(|| EError::NotAGroup("no identity".into()))?;
        let mut inv = vec![0; n];
        for (a, slot) in inv.iter_mut().enumerate() {
            *slot = (0..n).find(|&b| mult[a][b] == e).ok_or_else(|| EError::NotAGroup(format!("{a} has no inverse")))?;
        }
        let auts = automorphisms(&mult);
        let aut_ix = auts.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        let mut b = CatBuilder::new();
        let star = b.object("*");
        for g in 0..n {
            b.arrow(g.to_string(), star, star);
        }
        b.set_identity(star, e as Arr);
        // g ∘ f = f·g
        b.compose_with(|_, f, g| Some(mult[f as usize][g as usize] as Arr));
        let cat = b.build().map_err(|e| EError::Other(e.to_string()))?;
        let na = auts.len() as TermId;
        let terms_of = (0..n as TermId).map(|g| (g * na..(g + 1) * na).collect()).collect();
        Ok(GroupE { mult, inv, auts, aut_ix, cat, terms_of })
    }

    /// The symmetric group on three letters.
    pub fn s3() -> GroupE {
        let perms: Vec<[usize; 3]> = vec![[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
        let ix = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
        let mult = perms
            .iter()
            .map(|a| perms.iter().map(|b| ix([a[b[0]], a[b[1]], a[b[2]]])).collect())
            .collect();
        GroupE::new(mult).expect("S3 is a group")
    }

    pub fn mult_table(&self) -> &[Vec<usize>] {
        &self.mult
    }

    pub fn n_auts(&self) -> usize {
        self.auts.len()
    }

    fn split(&self, t: TermId) -> (usize, usize) {
        let na = self.auts.len();
        (t as usize / na, t as usize % na)
    }
    fn term(&self, g: usize, aut: usize) -> TermId {
        (g * self.auts.len() + aut) as TermId
    }
    fn conj(&self, g: usize) -> Vec<usize> {
        (0..self.mult.len()).map(|h| self.mult[self.mult[g][h]][self.inv[g]]).collect()
    }
    /// `x ∘ y ∘ x⁻¹` on automorphism indices.
    fn conj_aut(&self, x: &[usize], y: usize) -> usize {
        let n = x.len();
        let mut xinv = vec![0; n];
        for (i, &v) in x.iter().enumerate() {
            xinv[v] = i;
        }
        let y = &self.auts[y];
        let c: Vec<usize> = (0..n).map(|h| x[y[xinv[h]]]).collect();
        self.aut_ix[&c]
    }
}

fn automorphisms(mult: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = mult.len();
    let mut out = Vec::new();
    let mut cur = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn go(i: usize, mult: &[Vec<usize>], cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let n = mult.len();
        if i == n {
            let hom = (0..n).all(|a| (0..n).all(|b| cur[mult[a][b]] == mult[cur[a]][cur[b]]));
            if hom {
                out.push(cur.clone());
            }
            return;
        }
        for v in 0..n {
            if used[v] {
                continue;
            }
            cur[i] = v;
            // prune with products among the already assigned prefix
            let ok = (0..=i).all(|a| {
                (0..=i).all(|b| {
                    let ab = mult[a][b];
                    ab > i || cur[ab] == mult[cur[a]][cur[b]]
                })
            });
            if ok {
                used[v] = true;
                go(i + 1, mult, cur, used, out);
                used[v] = false;
            }
            cur[i] = usize::MAX;
        }
    }
    go(0, mult, &mut cur, &mut used, &mut out);
    out
}

impl ESys for GroupE {
    fn cat(&self) -> &FinCat {
        &self.cat
    }
    fn n_terms(&self) -> usize {
        self.mult.len() * self.auts.len()
    }
    fn terms(&self, a: Arr) -> &[TermId] {
        &self.terms_of[a as usize]
    }
    fn term_arrow(&self, t: TermId) -> Arr {
        self.split(t).0 as Arr
    }
    fn term_name(&self, t: TermId) -> String {
        let (g, a) = self.split(t);
        format!("{g}:aut{a}")
    }
    fn subst(&self, x: TermId, h: Arr, _: Arr) -> Option<Arr> {
        let (_, a) = self.split(x);
        Some(self.auts[a][h as usize] as Arr)
    }
    fn subst_term(&self, x: TermId, t: TermId, _: Arr) -> Option<TermId> {
        let (_, a) = self.split(x);
        let (g, y) = self.split(t);
        let x = &self.auts[a];
        Some(self.term(x[g], self.conj_aut(x, y)))
    }
    fn weak(&self, a: Arr, h: Arr, _: Arr) -> Option<Arr> {
        Some(self.conj(a as usize)[h as usize] as Arr)
    }
    fn weak_term(&self, a: Arr, t: TermId, _: Arr) -> Option<TermId> {
        let phi = self.conj(a as usize);
        let (g, y) = self.split(t);
        Some(self.term(phi[g], self.conj_aut(&phi, y)))
    }
    fn one(&self, a: Arr) -> Option<TermId> {
        let id = self.aut_ix[&(0..self.mult.len()).collect::<Vec<_>>()];
        Some(self.term(a as usize, id))
    }
    fn stratification(&self) -> Option<&Stratification> {
        None
    }
}

pub fn build_group_structure(mult: Vec<Vec<usize>>) -> Result<GroupE, EError> {
    GroupE::new(mult)
}
