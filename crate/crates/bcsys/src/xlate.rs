//! Translations between B-, C-, E- and CE-systems, their action on
//! homomorphisms, and the isomorphisms witnessing that round trips are
//! identities up to truncation.
//!
//! Passing from E-systems to CE-systems costs height: internal morphisms
//! between objects of level ≤ m, their composites and the chosen pullbacks
//! live at levels up to 3m, so an E-system of height N yields a CE-system of
//! height ⌊N/3⌋.  All other translations preserve height.

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::bsys::{check_b_iso, validate_bsystem, BError, BFrame, BHom, BStructure, BSystem, Ctx, Tm};
use crate::cat::{stratify, Arr, CatBuilder, FinCat, FreeTreeCat, Functor, Obj, Stratification};
use crate::cesys::{
    check_ce_iso, truncate_cesystem, validate_ce_hom, validate_cesystem, CEFlags, CEHom, CERestriction, CESystem,
    FinsetOp,
};
use crate::csys::{check_c_iso, validate_csystem, CSystem};
use crate::esys::{
    check_e_iso, internal_hom_cat_with, precompose, projections, term_extension, validate_ehom, validate_esystem,
    vertical_compose, EError, EHom, ESys, ESystem, NatE, Restriction, SliceTable, TermId,
};
use crate::report::{Check, LawResult, Report};

#[derive(Debug, Error)]
pub enum XlateError {
    #[error("{0} is not stratified")]
    NotStratified(&'static str),
    #[error("{0} is not rooted")]
    NotRooted(&'static str),
    #[error("no terminal object")]
    NoTerminal,
    #[error("stage `{stage}` failed: {failures}")]
    Stage { stage: &'static str, failures: String, report: Box<Report> },
    #[error("{0}")]
    Undefined(String),
    #[error(transparent)]
    E(#[from] EError),
    #[error(transparent)]
    B(#[from] BError),
}

fn undefined(what: &str) -> XlateError {
    XlateError::Undefined(what.to_string())
}

fn stage(name: &'static str, r: Report) -> Result<(), XlateError> {
    if r.all_pass() {
        Ok(())
    } else {
        Err(XlateError::Stage { stage: name, failures: r.failures().join(", "), report: Box::new(r) })
    }
}

/// Mutually inverse homomorphisms with the report verifying them.
#[derive(Clone, Debug)]
pub struct IsoWitness<H> {
    pub fwd: H,
    pub bwd: H,
    pub report: Report,
}

impl<H> IsoWitness<H> {
    pub fn verified(&self) -> bool {
        self.report.all_pass()
    }
}

fn inverse_index(v: &[u32]) -> FxHashMap<u32, u32> {
    v.iter().enumerate().map(|(i, &x)| (x, i as u32)).collect()
}

fn owned_strat(c: &FinCat, s: Option<&Stratification>) -> Option<Stratification> {
    s.cloned().or_else(|| stratify(c).ok())
}

// ---------------------------------------------------------------------------
// B → E

/// The E-system of a B-system: the free category on its tree of contexts,
/// with `T(X, k)` the lists of term elements built by iterated substitution.
#[derive(Clone, Debug)]
pub struct BtoE {
    pub b: BSystem,
    pub tree: FreeTreeCat,
    lists: Vec<Vec<Tm>>,
    term_arrow: Vec<Arr>,
    terms_of: Vec<Vec<TermId>>,
    names: Vec<String>,
    index: FxHashMap<(Arr, Vec<Tm>), TermId>,
}

pub fn b_to_e(b: &BSystem) -> BtoE {
    let f = &b.frame;
    let tree = FreeTreeCat::new(f.ctxs().map(|x| f.describe_ctx(x)).collect(), f.ctxs().map(|x| f.ft(x)).collect());
    let mut memo: FxHashMap<(Ctx, u32), Vec<Vec<Tm>>> = FxHashMap::default();
    // T(X, k+1) = Σ_{t ∈ T(ft X, k)} T(S_t X, 1)
    fn lists(b: &BSystem, x: Ctx, k: u32, memo: &mut FxHashMap<(Ctx, u32), Vec<Vec<Tm>>>) -> Vec<Vec<Tm>> {
        if k == 0 {
            return vec![vec![]];
        }
        if let Some(v) = memo.get(&(x, k)) {
            return v.clone();
        }
        let p = b.frame.ft(x).expect("k ≤ level");
        let mut out = Vec::new();
        for t in lists(b, p, k - 1, memo) {
            let Some(y) = t.iter().try_fold(x, |y, &u| b.s(u).at(y)) else { continue };
            for &u in b.frame.tms_over(y) {
                let mut l = t.clone();
                l.push(u);
                out.push(l);
            }
        }
        memo.insert((x, k), out.clone());
        out
    }
    let cat = &tree.cat;
    let mut all = Vec::new();
    let mut term_arrow = Vec::new();
    let mut terms_of = vec![Vec::new(); cat.n_arrows()];
    let mut names = Vec::new();
    let mut index = FxHashMap::default();
    for a in cat.arrows() {
        let (x, k) = tree.decode(a);
        for l in lists(b, x, k, &mut memo) {
            let id = all.len() as TermId;
            let parts: Vec<&str> = l.iter().map(|&u| f.tm_name(u)).collect();
            names.push(format!("{}[{}]", cat.arr_name(a), parts.join(",")));
            index.insert((a, l.clone()), id);
            all.push(l);
            term_arrow.push(a);
            terms_of[a as usize].push(id);
        }
    }
    BtoE { b: b.clone(), tree, lists: all, term_arrow, terms_of, names, index }
}

impl BtoE {
    pub fn list(&self, t: TermId) -> &[Tm] {
        &self.lists[t as usize]
    }

    pub fn term_of(&self, a: Arr, list: &[Tm]) -> Option<TermId> {
        self.index.get(&(a, list.to_vec())).copied()
    }

    fn s_ctx(&self, x: TermId, y: Ctx) -> Option<Ctx> {
        self.lists[x as usize].iter().try_fold(y, |y, &u| self.b.s(u).at(y))
    }

    fn s_tm(&self, x: TermId, v: Tm) -> Option<Tm> {
        self.lists[x as usize].iter().try_fold(v, |v, &u| self.b.s(u).at_tm(v))
    }

    /// The contexts `ft^{k-1} X, …, X` whose weakenings make up `W_{(X,k)}`.
    fn weak_chain(&self, a: Arr) -> Vec<Ctx> {
        let (x, k) = self.tree.decode(a);
        (0..k).rev().map(|i| self.tree.ft_pow(x, i)).collect()
    }

    fn w_ctx(&self, a: Arr, y: Ctx) -> Option<Ctx> {
        self.weak_chain(a).into_iter().try_fold(y, |y, z| self.b.w(z).at(y))
    }

    fn w_tm(&self, a: Arr, v: Tm) -> Option<Tm> {
        self.weak_chain(a).into_iter().try_fold(v, |v, z| self.b.w(z).at_tm(v))
    }

    fn typed_over(&self, apex: Obj, h: Arr, over: Arr) -> bool {
        let c = &self.tree.cat;
        c.cod(over) == apex && c.cod(h) == c.dom(over)
    }

    /// `1_{(X,1)} = δ(X)`, `1_{(X,k+1)} = (W_X(1_{(ft X, k)}), δ(X))`.
    fn one_list(&self, x: Ctx, k: u32) -> Option<Vec<Tm>> {
        if k == 0 {
            return Some(vec![]);
        }
        let p = self.b.frame.ft(x)?;
        let mut l: Vec<Tm> = self.one_list(p, k - 1)?.into_iter().map(|v| self.b.w(x).at_tm(v)).collect::<Option<_>>()?;
        l.push(self.b.delta(x)?);
        Some(l)
    }
}

impl ESys for BtoE {
    fn cat(&self) -> &FinCat {
        &self.tree.cat
    }
    fn n_terms(&self) -> usize {
        self.lists.len()
    }
    fn terms(&self, a: Arr) -> &[TermId] {
        &self.terms_of[a as usize]
    }
    fn term_arrow(&self, t: TermId) -> Arr {
        self.term_arrow[t as usize]
    }
    fn term_name(&self, t: TermId) -> String {
        self.names[t as usize].clone()
    }
    fn subst(&self, x: TermId, h: Arr, over: Arr) -> Option<Arr> {
        let c = &self.tree.cat;
        if !self.typed_over(c.dom(self.term_arrow(x)), h, over) {
            return None;
        }
        let (z, l) = self.tree.decode(h);
        Some(self.tree.arrow(self.s_ctx(x, z)?, l))
    }
    fn subst_term(&self, x: TermId, t: TermId, over: Arr) -> Option<TermId> {
        let h = self.term_arrow(t);
        let a = self.subst(x, h, over)?;
        let l: Vec<Tm> = self.list(t).iter().map(|&v| self.s_tm(x, v)).collect::<Option<_>>()?;
        self.term_of(a, &l)
    }
    fn weak(&self, a: Arr, h: Arr, over: Arr) -> Option<Arr> {
        if !self.typed_over(self.tree.cat.cod(a), h, over) {
            return None;
        }
        let (z, l) = self.tree.decode(h);
        Some(self.tree.arrow(self.w_ctx(a, z)?, l))
    }
    fn weak_term(&self, a: Arr, t: TermId, over: Arr) -> Option<TermId> {
        let h = self.weak(a, self.term_arrow(t), over)?;
        let l: Vec<Tm> = self.list(t).iter().map(|&v| self.w_tm(a, v)).collect::<Option<_>>()?;
        self.term_of(h, &l)
    }
    fn one(&self, a: Arr) -> Option<TermId> {
        let (x, k) = self.tree.decode(a);
        let wx = self.w_ctx(a, x)?;
        self.term_of(self.tree.arrow(wx, k), &self.one_list(x, k)?)
    }
    fn stratification(&self) -> Option<&Stratification> {
        Some(&self.tree.strat)
    }
}

// ---------------------------------------------------------------------------
// E → B

/// The B-system of a stratified E-system: contexts are objects, terms of
/// level n+1 are terms of individual arrows out of level n+1.
#[derive(Clone, Debug)]
pub struct EtoB {
    pub b: BSystem,
    pub ctx_of_obj: Vec<Ctx>,
    pub obj_of_ctx: Vec<Obj>,
    pub tm_of_term: FxHashMap<TermId, Tm>,
    pub term_of_tm: Vec<TermId>,
}

struct EtoBStructure<'a> {
    e: &'a dyn ESys,
    s: &'a Stratification,
    ctx_of_obj: &'a [Ctx],
    obj_of_ctx: &'a [Obj],
    tm_of_term: &'a FxHashMap<TermId, Tm>,
    term_of_tm: &'a [TermId],
    bd: Vec<Obj>,
}

impl EtoBStructure<'_> {
    fn down(&self, o: Obj, to: Obj) -> Option<Arr> {
        self.s.down(self.e.cat(), o, self.s.level(to))
    }
    fn ctx(&self, r: Arr) -> Ctx {
        self.ctx_of_obj[self.e.cat().dom(r) as usize]
    }
}

impl BStructure for EtoBStructure<'_> {
    fn subst_ctx(&self, x: Tm, y: Ctx) -> Option<Ctx> {
        let big_x = self.bd[x as usize];
        let b = self.down(self.obj_of_ctx[y as usize], big_x)?;
        let r = self.e.subst(self.term_of_tm[x as usize], b, self.e.cat().id(big_x))?;
        Some(self.ctx(r))
    }
    fn subst_tm(&self, x: Tm, t: Tm) -> Option<Tm> {
        let big_x = self.bd[x as usize];
        let z = self.bd[t as usize];
        let over = self.down(self.s.parent(self.e.cat(), z)?, big_x)?;
        let r = self.e.subst_term(self.term_of_tm[x as usize], self.term_of_tm[t as usize], over)?;
        self.tm_of_term.get(&r).copied()
    }
    fn weak_ctx(&self, big_x: Ctx, y: Ctx) -> Option<Ctx> {
        let x = self.obj_of_ctx[big_x as usize];
        let (ind, p) = (self.s.individual(x)?, self.s.parent(self.e.cat(), x)?);
        let b = self.down(self.obj_of_ctx[y as usize], p)?;
        let r = self.e.weak(ind, b, self.e.cat().id(p))?;
        Some(self.ctx(r))
    }
    fn weak_tm(&self, big_x: Ctx, t: Tm) -> Option<Tm> {
        let x = self.obj_of_ctx[big_x as usize];
        let (ind, p) = (self.s.individual(x)?, self.s.parent(self.e.cat(), x)?);
        let z = self.bd[t as usize];
        let over = self.down(self.s.parent(self.e.cat(), z)?, p)?;
        let r = self.e.weak_term(ind, self.term_of_tm[t as usize], over)?;
        self.tm_of_term.get(&r).copied()
    }
    fn gen(&self, big_x: Ctx) -> Option<Tm> {
        let ind = self.s.individual(self.obj_of_ctx[big_x as usize])?;
        self.tm_of_term.get(&self.e.one(ind)?).copied()
    }
}

pub fn e_to_b(e: &dyn ESys) -> Result<EtoB, XlateError> {
    let cat = e.cat();
    let s = owned_strat(cat, e.stratification()).ok_or(XlateError::NotStratified("E-system"))?;
    let height = s.max_level();
    let mut frame = BFrame::new(height);
    let mut ctx_of_obj = vec![0; cat.n_objects()];
    let mut obj_of_ctx = Vec::new();
    for n in 0..=height {
        for o in s.at_level(n) {
            let ft = s.parent(cat, o).map(|p| ctx_of_obj[p as usize]);
            ctx_of_obj[o as usize] = frame.add_ctx(n, cat.obj_name(o), ft)?;
            obj_of_ctx.push(o);
        }
    }
    let mut tm_of_term = FxHashMap::default();
    let mut term_of_tm = Vec::new();
    let mut bd = Vec::new();
    for n in 1..=height {
        for o in s.at_level(n) {
            let ind = s.individual(o).expect("non-root object");
            for &t in e.terms(ind) {
                tm_of_term.insert(t, frame.add_tm(n, e.term_name(t), ctx_of_obj[o as usize])?);
                term_of_tm.push(t);
                bd.push(o);
            }
        }
    }
    let st = EtoBStructure {
        e,
        s: &s,
        ctx_of_obj: &ctx_of_obj,
        obj_of_ctx: &obj_of_ctx,
        tm_of_term: &tm_of_term,
        term_of_tm: &term_of_tm,
        bd,
    };
    let b = BSystem::tabulate(frame, &st);
    Ok(EtoB { b, ctx_of_obj, obj_of_ctx, tm_of_term, term_of_tm })
}

/// `b_to_e` on a homomorphism `h : src → tgt` of B-systems.
pub fn b_hom_to_e(src: &BtoE, tgt: &BtoE, h: &BHom) -> Option<EHom> {
    let sc = &src.tree.cat;
    let obj: Vec<Obj> = sc.objects().map(|o| h.at(o)).collect::<Option<_>>()?;
    let arr: Vec<Arr> = sc
        .arrows()
        .map(|a| {
            let (x, k) = src.tree.decode(a);
            tgt.tree.arrow(obj[x as usize], k)
        })
        .collect();
    let term = (0..src.n_terms() as TermId)
        .map(|t| {
            let l: Vec<Tm> = src.list(t).iter().map(|&v| h.at_tm(v)).collect::<Option<_>>()?;
            tgt.term_of(arr[src.term_arrow(t) as usize], &l)
        })
        .collect::<Option<_>>()?;
    Some(EHom { functor: Functor { obj, arr }, term })
}

/// `e_to_b` on a homomorphism of stratified E-systems.
pub fn e_hom_to_b(src: &EtoB, tgt: &EtoB, h: &EHom) -> Option<BHom> {
    let mut out = BHom::default();
    for (c, &o) in src.obj_of_ctx.iter().enumerate() {
        out.ctx.insert(c as Ctx, tgt.ctx_of_obj[h.functor.obj[o as usize] as usize]);
    }
    for (v, &t) in src.term_of_tm.iter().enumerate() {
        out.tm.insert(v as Tm, *tgt.tm_of_term.get(&h.term[t as usize])?);
    }
    Some(out)
}

/// The isomorphism `b ≅ e_to_b(b_to_e(b))`: contexts to themselves, a term
/// element `x` to the one-element list `[x]`.
pub fn b_roundtrip_iso(b: &BSystem) -> Result<(BtoE, EtoB, IsoWitness<BHom>), XlateError> {
    let e = b_to_e(b);
    let eb = e_to_b(&e)?;
    let f = &b.frame;
    let mut fwd = BHom::default();
    for x in f.ctxs() {
        fwd.ctx.insert(x, eb.ctx_of_obj[x as usize]);
    }
    for x in f.tms() {
        let t = e.term_of(e.tree.arrow(f.bd(x), 1), &[x]).ok_or_else(|| undefined("one-element list"))?;
        fwd.tm.insert(x, eb.tm_of_term[&t]);
    }
    let bwd = fwd.inverse().ok_or_else(|| undefined("inverse"))?;
    let report = check_b_iso(b, &eb.b, &fwd, &bwd);
    Ok((e, eb, IsoWitness { fwd, bwd, report }))
}

/// The isomorphism `𝒩 ≅ b_to_e(finite sets)` at equal height: a function
/// `f : [k] → [n]` goes to the list of its values as term elements of `B̃_{n+1}`.
pub fn nat_to_finset_iso(nat: &NatE, bte: &BtoE) -> Option<IsoWitness<EHom>> {
    use crate::bsys::finset_tm;
    let nc = nat.cat();
    let obj: Vec<Obj> = nc.objects().collect();
    let arr: Vec<Arr> = nc
        .arrows()
        .map(|a| {
            let (n, k) = nat.nk(a);
            bte.tree.arrow(n + k, k)
        })
        .collect();
    let term = (0..nat.n_terms() as TermId)
        .map(|t| {
            let a = nat.term_arrow(t);
            let (n, _) = nat.nk(a);
            let l: Vec<Tm> = nat.decode(t).iter().map(|&v| finset_tm(n, v)).collect();
            bte.term_of(arr[a as usize], &l)
        })
        .collect::<Option<_>>()?;
    let fwd = EHom { functor: Functor { obj, arr }, term };
    let bwd = fwd.inverse(bte)?;
    let report = check_e_iso(nat, bte, &fwd, &bwd);
    Some(IsoWitness { fwd, bwd, report })
}

// ---------------------------------------------------------------------------
// C ↔ CE

#[derive(Clone, Debug)]
pub struct CtoCE {
    pub ce: CESystem,
    pub tree: FreeTreeCat,
}

/// Families are the free category on the canonical projections.
pub fn c_to_ce(c: &CSystem) -> CtoCE {
    let cat = &c.cat;
    let parent = cat.objects().map(|o| (c.len[o as usize] > 0).then(|| c.ft[o as usize])).collect();
    let tree = FreeTreeCat::new(cat.obj_names().to_vec(), parent);
    let fam = &tree.cat;
    let i: Vec<Arr> = fam
        .arrows()
        .map(|a| {
            let (x, k) = tree.decode(a);
            let (mut acc, mut y) = (cat.id(x), x);
            for _ in 0..k {
                acc = cat.comp(c.proj[y as usize].expect("positive length"), acc);
                y = c.ft[y as usize];
            }
            acc
        })
        .collect();
    // f*(X, k): pull back along f, then along each successive q, one projection at a time
    let mut pb = FxHashMap::default();
    for f in cat.arrows() {
        'fam: for &a in fam.into(cat.cod(f)) {
            let (x, k) = tree.decode(a);
            let (mut o, mut q) = (cat.dom(f), f);
            for j in (0..k).rev() {
                let Some((o2, q2)) = c.pullback(q, tree.ft_pow(x, j)) else { continue 'fam };
                (o, q) = (o2, q2);
            }
            if tree.strat.level(o) < k {
                continue;
            }
            pb.insert((f, a), (tree.arrow(o, k), q));
        }
    }
    CtoCE { ce: CESystem { fam: fam.clone(), base: cat.clone(), i, root: c.one, pb }, tree }
}

/// Requires a rooted, stratified CE-system.
pub fn ce_to_c(a: &CESystem) -> Result<CSystem, XlateError> {
    let s = a.fam_strat().ok_or(XlateError::NotStratified("CE-system"))?;
    if !a.is_rooted() {
        return Err(XlateError::NotRooted("CE-system"));
    }
    let (fam, base) = (&a.fam, &a.base);
    let len = fam.objects().map(|o| s.level(o)).collect();
    let ft = fam.objects().map(|o| s.parent(fam, o).unwrap_or(o)).collect();
    let proj = fam.objects().map(|o| s.individual(o).map(|p| a.i_arr(p))).collect();
    let mut pb = FxHashMap::default();
    for g in fam.objects() {
        let Some(ind) = s.individual(g) else { continue };
        for &f in base.into(fam.cod(ind)) {
            if let Some((fs, q)) = a.pullback(f, ind) {
                pb.insert((f, g), (fam.dom(fs), q));
            }
        }
    }
    Ok(CSystem { cat: base.clone(), one: a.root, len, ft, proj, pb })
}

/// The isomorphism `a ≅ c_to_ce(ce_to_c(a))`: identity on contexts, each
/// family to its factorization into individual arrows.
pub fn comp_iso(a: &CESystem) -> Result<(CSystem, CtoCE, IsoWitness<CEHom>), XlateError> {
    let c = ce_to_c(a)?;
    let back = c_to_ce(&c);
    let fwd = comp_hom(a, &back).ok_or_else(|| undefined("factorization"))?;
    let bwd = fwd.inverse(&back.ce).ok_or_else(|| undefined("inverse of the factorization"))?;
    let report = check_ce_iso(a, &back.ce, &fwd, &bwd, true);
    Ok((c, back, IsoWitness { fwd, bwd, report }))
}

fn comp_hom(a: &CESystem, back: &CtoCE) -> Option<CEHom> {
    let s = a.fam_strat()?;
    let fam = &a.fam;
    let arr = fam.arrows().map(|x| back.tree.arrow(fam.dom(x), s.level(fam.dom(x)) - s.level(fam.cod(x)))).collect();
    Some(CEHom { fam: Functor { obj: fam.objects().collect(), arr }, base: Functor::identity(&a.base) })
}

// ---------------------------------------------------------------------------
// CE → E

/// The E-system of a CE-system: terms of a family are the sections of its
/// image, weakening and substitution are pullback.
#[derive(Clone, Debug)]
pub struct CEtoE {
    pub e: ESystem,
    /// Term ↦ the context morphism it is.
    pub section: Vec<Arr>,
    pub term_of: FxHashMap<(Arr, Arr), TermId>,
}

fn unique_section(a: &CESystem, fam_arr: Arr, from: Obj, along: Arr, want: Arr) -> Option<Arr> {
    let base = &a.base;
    let id = base.id(from);
    let mut it = base
        .hom(from, a.fam.dom(fam_arr))
        .iter()
        .copied()
        .filter(|&s| base.comp(a.i_arr(fam_arr), s) == id && base.comp(along, s) == want);
    let s = it.next()?;
    it.next().is_none().then_some(s)
}

/// `f*` on `F/cod f`, tabulated.
fn pullback_table(a: &CESystem, f: Arr, terms_of: &[Vec<TermId>], section: &[Arr], term_of: &FxHashMap<(Arr, Arr), TermId>) -> SliceTable {
    let (fam, base) = (&a.fam, &a.base);
    let mut t = SliceTable::default();
    for &bb in fam.into(base.cod(f)) {
        let Some((bs, g)) = a.pullback(f, bb) else { continue };
        for &h in fam.into(fam.dom(bb)) {
            let Some((hs, p2)) = a.pullback(g, h) else { continue };
            t.arr.insert((h, bb), hs);
            for &x in &terms_of[h as usize] {
                let want = base.comp(section[x as usize], g);
                if let Some(s) = unique_section(a, hs, fam.dom(bs), p2, want) {
                    t.term.insert((x, bb), term_of[&(hs, s)]);
                }
            }
        }
    }
    t
}

pub fn ce_to_e(a: &CESystem) -> CEtoE {
    let (fam, base) = (&a.fam, &a.base);
    let mut section = Vec::new();
    let mut term_arrow = Vec::new();
    let mut names = Vec::new();
    let mut term_of = FxHashMap::default();
    let mut terms_of = vec![Vec::new(); fam.n_arrows()];
    for q in fam.arrows() {
        let g = fam.cod(q);
        for &x in base.hom(g, fam.dom(q)) {
            if base.comp(a.i_arr(q), x) == base.id(g) {
                let id = section.len() as TermId;
                term_of.insert((q, x), id);
                terms_of[q as usize].push(id);
                section.push(x);
                term_arrow.push(q);
                names.push(format!("{}∈{}", base.arr_name(x), fam.arr_name(q)));
            }
        }
    }
    let subst = section.iter().map(|&x| pullback_table(a, x, &terms_of, &section, &term_of)).collect();
    let weak = fam.arrows().map(|q| pullback_table(a, a.i_arr(q), &terms_of, &section, &term_of)).collect();
    let one = fam
        .arrows()
        .map(|q| {
            let (wq, p2) = a.pullback(a.i_arr(q), q)?;
            let d = fam.dom(q);
            let s = unique_section(a, wq, d, p2, base.id(d))?;
            term_of.get(&(wq, s)).copied()
        })
        .collect();
    let e = ESystem::new(fam.clone(), names, term_arrow, subst, weak, one, a.fam_strat());
    CEtoE { e, section, term_of }
}

/// `ce_to_e` on a CE-homomorphism.
pub fn ce_hom_to_e(src: &CEtoE, tgt: &CEtoE, h: &CEHom) -> Option<EHom> {
    let term = (0..src.section.len())
        .map(|t| {
            let q = src.e.term_arrow[t];
            tgt.term_of.get(&(h.fam.arr[q as usize], h.base.arr[src.section[t] as usize])).copied()
        })
        .collect::<Option<_>>()?;
    Some(EHom { functor: h.fam.clone(), term })
}

// ---------------------------------------------------------------------------
// E → CE

/// The CE-system of internal morphisms of an E-system, truncated at `m`.
#[derive(Clone, Debug)]
pub struct EtoCE {
    pub ce: CESystem,
    pub m: u32,
    /// Family object / arrow ↦ the object / arrow of the E-system.
    pub obj: Vec<Obj>,
    pub arr: Vec<Arr>,
    /// Context morphism ↦ the internal morphism (a term of the E-system).
    pub base_term: Vec<TermId>,
    pub term_base: FxHashMap<TermId, Arr>,
}

pub fn e_to_ce(e: &dyn ESys) -> Result<EtoCE, XlateError> {
    let cat = e.cat();
    let s = owned_strat(cat, e.stratification()).ok_or(XlateError::NotStratified("E-system"))?;
    let root = cat.terminal().ok_or(XlateError::NoTerminal)?;
    let m = s.max_level() / 3;
    let keep = |o: Obj| s.level(o) <= m;
    let (fam, obj, arr) = crate::cat::full_subcategory(cat, keep);
    let pos = inverse_index(&obj);
    let apos = inverse_index(&arr);
    let bang = |o: Obj| cat.bang(o).ok_or(XlateError::NoTerminal);

    let ihc = internal_hom_cat_with(e, root, |a| keep(cat.dom(a)))?;
    // the same category, with objects in family order
    let mut b = CatBuilder::new();
    for o in fam.objects() {
        b.object(fam.obj_name(o));
    }
    let ob: Vec<Obj> = ihc.obj_arrow.iter().map(|&a| pos[&cat.dom(a)]).collect();
    for x in ihc.cat.arrows() {
        b.arrow(ihc.cat.arr_name(x), ob[ihc.cat.dom(x) as usize], ob[ihc.cat.cod(x) as usize]);
    }
    for o in ihc.cat.objects() {
        b.set_identity(ob[o as usize], ihc.cat.id(o));
    }
    b.set_terminal(pos[&root]);
    for (&(f, g), &h) in ihc.cat.compose_table() {
        b.set_compose(f, g, h);
    }
    let base = b.build().map_err(|err| undefined(&err.to_string()))?;

    // I(Q) = pr1 ∈ hom(Θ.Q, Θ)
    let mut i = Vec::with_capacity(fam.n_arrows());
    for &q in &arr {
        let (pr1, _) = projections(e, bang(cat.cod(q))?, q)?;
        let x = *ihc.term_arrow.get(&pr1).ok_or_else(|| undefined("projection outside the internal homs"))?;
        i.push(x);
    }
    let mut pb = FxHashMap::default();
    for f in base.arrows() {
        let (d, g) = (obj[base.dom(f) as usize], obj[base.cod(f) as usize]);
        let tf = ihc.arrow_term[f as usize];
        let (bd, bg) = (bang(d)?, bang(g)?);
        let pre = precompose(e, bd, bg, tf);
        for &r in cat.into(g) {
            let Some(&r2) = apos.get(&r) else { continue };
            if s.level(d) + s.level(cat.dom(r)) - s.level(g) > m {
                continue;
            }
            let Some(fr) = pre.arr(r, cat.id(g)) else { continue };
            let Some(&fr2) = apos.get(&fr) else { continue };
            let Some(one) = e.one(fr) else { continue };
            let Ok(q) = vertical_compose(e, bd, bg, fr, r, tf, one) else { continue };
            let Some(&q2) = ihc.term_arrow.get(&q) else { continue };
            pb.insert((f, r2), (fr2, q2));
        }
    }
    let ce = CESystem { fam, base, i, root: pos[&root], pb };
    Ok(EtoCE { ce, m, obj, arr, base_term: ihc.arrow_term, term_base: ihc.term_arrow })
}

/// `e_to_ce` on an E-homomorphism.
pub fn e_hom_to_ce(src: &EtoCE, tgt: &EtoCE, h: &EHom) -> Option<CEHom> {
    let opos = inverse_index(&tgt.obj);
    let apos = inverse_index(&tgt.arr);
    let obj: Vec<Obj> = src.obj.iter().map(|&o| opos.get(&h.functor.obj[o as usize]).copied()).collect::<Option<_>>()?;
    let arr = src.arr.iter().map(|&a| apos.get(&h.functor.arr[a as usize]).copied()).collect::<Option<_>>()?;
    let barr = src.base_term.iter().map(|&t| tgt.term_base.get(&h.term[t as usize]).copied()).collect::<Option<_>>()?;
    Some(CEHom { fam: Functor { obj: obj.clone(), arr }, base: Functor { obj, arr: barr } })
}

// ---------------------------------------------------------------------------
// unit and counit

/// `η : e → ce_to_e(e_to_ce(e))` on the truncation where the right side lives.
#[derive(Clone, Debug)]
pub struct Unit {
    pub ce: EtoCE,
    pub back: CEtoE,
    pub trunc: ESystem,
    pub restr: Restriction,
    pub eta: EHom,
    pub inverse: Option<EHom>,
    pub report: Report,
}

/// `η(x) = ⟨1_{!Γ}, x⟩ ∈ hom(!Γ, !Γ.A)` on objects the identity.
pub fn unit(e: &dyn ESys) -> Result<Unit, XlateError> {
    let cat = e.cat();
    let ce = e_to_ce(e)?;
    let back = ce_to_e(&ce.ce);
    let view = StratView { e, strat: owned_strat(cat, e.stratification()) };
    let (trunc, restr) = ESystem::truncate_with_maps(&view, ce.m).ok_or(XlateError::NotStratified("E-system"))?;
    let root = cat.terminal().ok_or(XlateError::NoTerminal)?;
    let opos = inverse_index(&ce.obj);
    let apos = inverse_index(&ce.arr);
    let functor = Functor {
        obj: restr.obj.iter().map(|o| opos[o]).collect(),
        arr: restr.arr.iter().map(|a| apos[a]).collect(),
    };
    let mut term = Vec::with_capacity(restr.term.len());
    for &x in &restr.term {
        let q = e.term_arrow(x);
        let g = cat.cod(q);
        let bg = cat.bang(g).ok_or(XlateError::NoTerminal)?;
        let a1 = e.weak(bg, bg, cat.id(root)).ok_or_else(|| undefined("W_{!Γ}(!Γ)"))?;
        let p1 = e.weak(bg, q, bg).ok_or_else(|| undefined("W_{!Γ}(A)"))?;
        let one = e.one(bg).ok_or_else(|| undefined("1_{!Γ}"))?;
        let t = term_extension(e, a1, p1, one, x)?;
        let b = *ce.term_base.get(&t).ok_or_else(|| undefined("⟨1, x⟩ outside the internal homs"))?;
        term.push(*back.term_of.get(&(apos[&q], b)).ok_or_else(|| undefined("⟨1, x⟩ is not a section"))?);
    }
    let eta = EHom { functor, term };
    let inverse = eta.inverse(&back.e);
    let report = match &inverse {
        Some(inv) => check_e_iso(&trunc, &back.e, &eta, inv),
        None => {
            let mut r = validate_ehom(&trunc, &back.e, &eta);
            let mut c = Check::new("invertible");
            c.fail(|| "η is not bijective".into());
            c.finish_into(&mut r);
            r
        }
    };
    Ok(Unit { ce, back, trunc, restr, eta, inverse, report })
}

/// `ε : e_to_ce(ce_to_e(a)) → a` onto the truncation of `a`.
#[derive(Clone, Debug)]
pub struct Counit {
    pub e: CEtoE,
    pub ce: EtoCE,
    pub trunc: CESystem,
    pub restr: CERestriction,
    pub eps: CEHom,
    pub inverse: Option<CEHom>,
    pub report: Report,
}

/// `ε` is the identity on families and `x ↦ π₂(I(!_Δ), !_Γ) ∘ x` on contexts.
pub fn counit(a: &CESystem) -> Result<Counit, XlateError> {
    let e = ce_to_e(a);
    let ce = e_to_ce(&e.e)?;
    let (trunc, restr) = truncate_cesystem(a, ce.m).ok_or(XlateError::NotStratified("CE-system"))?;
    let (fam, base) = (&a.fam, &a.base);
    let opos = inverse_index(&restr.obj);
    let fpos = inverse_index(&restr.fam);
    let bpos = inverse_index(&restr.base);
    let obj: Vec<Obj> = ce.obj.iter().map(|o| opos[o]).collect();
    let farr = ce.arr.iter().map(|x| fpos[x]).collect();
    let bang = |o: Obj| fam.hom(o, a.root).first().copied().ok_or(XlateError::NoTerminal);
    let mut barr = Vec::with_capacity(ce.ce.base.n_arrows());
    for x in ce.ce.base.arrows() {
        let (d, g) = (ce.obj[ce.ce.base.dom(x) as usize], ce.obj[ce.ce.base.cod(x) as usize]);
        let sec = e.section[ce.base_term[x as usize] as usize];
        let (_, p2) = a.pullback(a.i_arr(bang(d)?), bang(g)?).ok_or_else(|| undefined("π₂(I(!Δ), !Γ)"))?;
        let psi = base.comp(p2, sec);
        barr.push(*bpos.get(&psi).ok_or_else(|| undefined("ψ leaves the truncation"))?);
    }
    let eps = CEHom { fam: Functor { obj: obj.clone(), arr: farr }, base: Functor { obj, arr: barr } };
    let inverse = eps.inverse(&trunc);
    let report = match &inverse {
        Some(inv) => check_ce_iso(&ce.ce, &trunc, &eps, inv, true),
        None => {
            let mut r = validate_ce_hom(&ce.ce, &trunc, &eps, true);
            let mut c = Check::new("invertible");
            c.fail(|| "ε is not bijective".into());
            c.finish_into(&mut r);
            r
        }
    };
    Ok(Counit { e, ce, trunc, restr, eps, inverse, report })
}

/// Borrows an E-system, supplying a computed stratification when it has none.
struct StratView<'a> {
    e: &'a dyn ESys,
    strat: Option<Stratification>,
}

impl ESys for StratView<'_> {
    fn cat(&self) -> &FinCat {
        self.e.cat()
    }
    fn n_terms(&self) -> usize {
        self.e.n_terms()
    }
    fn terms(&self, a: Arr) -> &[TermId] {
        self.e.terms(a)
    }
    fn term_arrow(&self, t: TermId) -> Arr {
        self.e.term_arrow(t)
    }
    fn term_name(&self, t: TermId) -> String {
        self.e.term_name(t)
    }
    fn subst(&self, x: TermId, h: Arr, over: Arr) -> Option<Arr> {
        self.e.subst(x, h, over)
    }
    fn subst_term(&self, x: TermId, t: TermId, over: Arr) -> Option<TermId> {
        self.e.subst_term(x, t, over)
    }
    fn weak(&self, a: Arr, h: Arr, over: Arr) -> Option<Arr> {
        self.e.weak(a, h, over)
    }
    fn weak_term(&self, a: Arr, t: TermId, over: Arr) -> Option<TermId> {
        self.e.weak_term(a, t, over)
    }
    fn one(&self, a: Arr) -> Option<TermId> {
        self.e.one(a)
    }
    fn stratification(&self) -> Option<&Stratification> {
        self.strat.as_ref()
    }
}

fn same_names_e(src: &dyn ESys, tgt: &dyn ESys, h: &EHom, law: &str) -> LawResult {
    let (sc, tc) = (src.cat(), tgt.cat());
    let mut c = Check::new(law);
    for o in sc.objects() {
        c.test(sc.obj_name(o) == tc.obj_name(h.functor.obj[o as usize]), || format!("object {}", sc.obj_name(o)));
    }
    for a in sc.arrows() {
        c.test(sc.arr_name(a) == tc.arr_name(h.functor.arr[a as usize]), || format!("arrow {}", sc.arr_name(a)));
    }
    for t in 0..src.n_terms() as TermId {
        c.test(src.term_name(t) == tgt.term_name(h.term[t as usize]), || format!("term {}", src.term_name(t)));
    }
    c.finish()
}

fn same_names_ce(src: &CESystem, tgt: &CESystem, h: &CEHom, law: &str) -> LawResult {
    let mut c = Check::new(law);
    for o in src.fam.objects() {
        c.test(src.fam.obj_name(o) == tgt.fam.obj_name(h.fam.obj[o as usize]), || format!("object {}", src.fam.obj_name(o)));
    }
    for a in src.fam.arrows() {
        c.test(src.fam.arr_name(a) == tgt.fam.arr_name(h.fam.arr[a as usize]), || format!("family {}", src.fam.arr_name(a)));
    }
    for a in src.base.arrows() {
        c.test(src.base.arr_name(a) == tgt.base.arr_name(h.base.arr[a as usize]), || format!("context morphism {}", src.base.arr_name(a)));
    }
    c.finish()
}

/// `ε_{e_to_ce(e)} ∘ e_to_ce(η_e) = id`, checked on the levels where both sides live.
/// Returns the report and the height of the CE-system compared.
pub fn triangle_e(e: &dyn ESys) -> Result<(Report, u32), XlateError> {
    let u = unit(e)?;
    let src = e_to_ce(&u.trunc)?;
    let cnt = counit(&u.ce.ce)?;
    let f_eta = e_hom_to_ce(&src, &cnt.ce, &u.eta).ok_or_else(|| undefined("e_to_ce(η)"))?;
    let comp = cnt.eps.after(&f_eta);
    let mut r = Report::new();
    r.extend_prefixed("composite/", validate_ce_hom(&src.ce, &cnt.trunc, &comp, true));
    r.push(same_names_ce(&src.ce, &cnt.trunc, &comp, "triangle ε∘Fη = id"));
    Ok((r, src.m))
}

/// `ce_to_e(ε_a) ∘ η_{ce_to_e(a)} = id`, checked on the levels where both sides live.
pub fn triangle_ce(a: &CESystem) -> Result<(Report, u32), XlateError> {
    let cnt = counit(a)?;
    let u = unit(&cnt.e.e)?;
    let tgt = ce_to_e(&cnt.trunc);
    let g_eps = ce_hom_to_e(&u.back, &tgt, &cnt.eps).ok_or_else(|| undefined("ce_to_e(ε)"))?;
    let comp = g_eps.after(&u.eta);
    let mut r = Report::new();
    r.extend_prefixed("composite/", validate_ehom(&u.trunc, &tgt.e, &comp));
    r.push(same_names_e(&u.trunc, &tgt.e, &comp, "triangle Gε∘η = id"));
    Ok((r, cnt.ce.m))
}

/// Unpairing in a CE-system: `b_to_e(e_to_b(ce_to_e(a))) ≅ ce_to_e(a)` at full height.
/// A section `s` of `A∘P` splits into `x = I(P)∘s` and the section of `x*P` induced by `s`.
pub fn unpair_iso(a: &CESystem, e: &CEtoE, eb: &EtoB, e2: &BtoE) -> Option<IsoWitness<EHom>> {
    let s = a.fam_strat()?;
    let (fam, base) = (&a.fam, &a.base);
    let obj: Vec<Obj> = fam.objects().map(|o| eb.ctx_of_obj[o as usize]).collect();
    let arr: Vec<Arr> = fam
        .arrows()
        .map(|q| e2.tree.arrow(obj[fam.dom(q) as usize], s.level(fam.dom(q)) - s.level(fam.cod(q))))
        .collect();
    fn split(a: &CESystem, s: &Stratification, e: &CEtoE, eb: &EtoB, q: Arr, sec: Arr) -> Option<Vec<Tm>> {
        let (fam, base) = (&a.fam, &a.base);
        let x = fam.dom(q);
        if x == fam.cod(q) {
            return Some(vec![]);
        }
        let p = s.individual(x)?;
        let rest = s.down(fam, fam.cod(p), s.level(fam.cod(q)))?;
        let head = base.comp(a.i_arr(p), sec);
        let (xp, pi) = a.pullback(head, p)?;
        let u = unique_section(a, xp, fam.cod(q), pi, sec)?;
        let mut l = split(a, s, e, eb, rest, head)?;
        l.push(*eb.tm_of_term.get(e.term_of.get(&(xp, u))?)?);
        Some(l)
    }
    let _ = base;
    let term = (0..e.section.len())
        .map(|t| {
            let q = e.e.term_arrow[t];
            let l = split(a, &s, e, eb, q, e.section[t])?;
            e2.term_of(arr[q as usize], &l)
        })
        .collect::<Option<_>>()?;
    let fwd = EHom { functor: Functor { obj, arr }, term };
    let bwd = fwd.inverse(e2)?;
    let report = check_e_iso(&e.e, e2, &fwd, &bwd);
    Some(IsoWitness { fwd, bwd, report })
}

// ---------------------------------------------------------------------------
// the composite equivalence

#[derive(Clone, Debug)]
pub struct B2C {
    pub e: BtoE,
    pub ce: EtoCE,
    pub c: CSystem,
}

/// `ce_to_c ∘ e_to_ce ∘ b_to_e`, validating every stage.
pub fn b2c(b: &BSystem) -> Result<B2C, XlateError> {
    stage("input", validate_bsystem(b))?;
    let e = b_to_e(b);
    stage("b_to_e", validate_esystem(&e))?;
    let ce = e_to_ce(&e)?;
    stage("e_to_ce", validate_cesystem(&ce.ce, CEFlags::ALL))?;
    let c = ce_to_c(&ce.ce)?;
    stage("ce_to_c", validate_csystem(&c))?;
    Ok(B2C { e, ce, c })
}

#[derive(Clone, Debug)]
pub struct C2B {
    pub ce: CtoCE,
    pub e: CEtoE,
    pub b: EtoB,
}

/// `e_to_b ∘ ce_to_e ∘ c_to_ce`, validating every stage.
pub fn c2b(c: &CSystem) -> Result<C2B, XlateError> {
    stage("input", validate_csystem(c))?;
    let ce = c_to_ce(c);
    stage("c_to_ce", validate_cesystem(&ce.ce, CEFlags::ALL))?;
    let e = ce_to_e(&ce.ce);
    stage("ce_to_e", validate_esystem(&e.e))?;
    let b = e_to_b(&e.e)?;
    stage("e_to_b", validate_bsystem(&b.b))?;
    Ok(C2B { ce, e, b })
}

#[derive(Clone, Debug)]
pub struct BRoundTrip {
    pub there: B2C,
    pub back: C2B,
    /// The input truncated to the height that survives the trip.
    pub target: BSystem,
    pub iso: IsoWitness<BHom>,
}

/// `c2b(b2c(b))` with an isomorphism from the truncation of `b`.
pub fn roundtrip_b(b: &BSystem) -> Result<BRoundTrip, XlateError> {
    let there = b2c(b)?;
    let back = c2b(&there.c)?;
    let m = there.ce.m;
    let a = &there.ce.ce;
    let fact = comp_hom(a, &back.ce).and_then(|h| h.inverse(&back.ce.ce)).ok_or_else(|| undefined("c_to_ce∘ce_to_c iso"))?;
    let u = unit(&there.e)?;
    let eta_inv = u.inverse.as_ref().ok_or_else(|| undefined("η⁻¹"))?;
    let g_fact = ce_hom_to_e(&back.e, &u.back, &fact).ok_or_else(|| undefined("ce_to_e(fact)"))?;
    let to_e = eta_inv.after(&g_fact);
    let bt = e_to_b(&u.trunc)?;
    let h = e_hom_to_b(&back.b, &bt, &to_e).ok_or_else(|| undefined("e_to_b of the composite"))?;
    // e_to_b(truncated b_to_e(b)) → truncated b, by names
    let target = b.truncate(m);
    let (f, tf) = (&b.frame, &target.frame);
    let mut last = BHom::default();
    for (c, &o) in bt.obj_of_ctx.iter().enumerate() {
        let x = u.restr.obj[o as usize];
        let y = tf.ctx_by_name(f.level(x), f.ctx_name(x)).ok_or_else(|| undefined("context"))?;
        last.ctx.insert(c as Ctx, y);
    }
    for (v, &t) in bt.term_of_tm.iter().enumerate() {
        let x = *there.e.list(u.restr.term[t as usize]).first().ok_or_else(|| undefined("term element"))?;
        let y = tf.tm_by_name(f.tm_level(x), f.tm_name(x)).ok_or_else(|| undefined("term element"))?;
        last.tm.insert(v as Tm, y);
    }
    let bwd = h.then(&last);
    let fwd = bwd.inverse().ok_or_else(|| undefined("inverse"))?;
    let report = check_b_iso(&target, &back.b.b, &fwd, &bwd);
    Ok(BRoundTrip { there, back, target, iso: IsoWitness { fwd, bwd, report } })
}

#[derive(Clone, Debug)]
pub struct CRoundTrip {
    pub back: C2B,
    pub there: B2C,
    pub target: CSystem,
    pub iso: IsoWitness<Functor>,
}

/// `b2c(c2b(c))` with an isomorphism from the truncation of `c`.
pub fn roundtrip_c(c: &CSystem) -> Result<CRoundTrip, XlateError> {
    let back = c2b(c)?;
    let there = b2c(&back.b.b)?;
    let a = &back.ce.ce;
    let phi = unpair_iso(a, &back.e, &back.b, &there.e).ok_or_else(|| undefined("unpairing"))?;
    stage("unpairing", phi.report.clone())?;
    let cnt = counit(a)?;
    let f_phi = e_hom_to_ce(&there.ce, &cnt.ce, &phi.bwd).ok_or_else(|| undefined("e_to_ce(φ⁻¹)"))?;
    let h = cnt.eps.after(&f_phi);
    let target = ce_to_c(&cnt.trunc)?;
    let bwd = h.base;
    let fwd = bwd.inverse(&target.cat).ok_or_else(|| undefined("inverse"))?;
    let report = check_c_iso(&target, &there.c, &fwd, &bwd);
    Ok(CRoundTrip { back, there, target, iso: IsoWitness { fwd, bwd, report } })
}

// ---------------------------------------------------------------------------
// finite sets

/// `ce_to_e(finite-set CE-system) ≅ 𝒩`: a section of `n+k ≥ n`, a function
/// `[n+k] → [n]` fixing `[n]`, goes to its values on the last `k` points.
pub fn finset_ce_to_nat_iso(e: &CEtoE, fop: &FinsetOp, nat: &NatE) -> Option<IsoWitness<EHom>> {
    let fam = &e.e.cat;
    let obj: Vec<Obj> = fam.objects().collect();
    let arr: Vec<Arr> = fam.arrows().map(|q| nat.arrow(fam.cod(q), fam.dom(q) - fam.cod(q))).collect::<Option<_>>()?;
    let term = (0..e.section.len())
        .map(|t| {
            let (n, phi) = fop.function(e.section[t]);
            nat.encode(n, &phi[n as usize..])
        })
        .collect::<Option<_>>()?;
    let fwd = EHom { functor: Functor { obj, arr }, term };
    let bwd = fwd.inverse(nat)?;
    let report = check_e_iso(&e.e, nat, &fwd, &bwd);
    Some(IsoWitness { fwd, bwd, report })
}
