//! B-frames, their slices and homomorphisms, and B-systems.

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::report::{Check, LawResult, Report};

/// Global id of a context element (an element of some `B_n`).
pub type Ctx = u32;
/// Global id of a term element (an element of some `B̃_{n+1}`).
pub type Tm = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BError {
    #[error("duplicate element `{name}` at level {level}")]
    Duplicate { level: u32, name: String },
    #[error("dangling reference: {0}")]
    Dangling(String),
    #[error("level {0} exceeds the frame height")]
    Level(u32),
}

/// A height-truncated B-frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BFrame {
    height: u32,
    ctx_name: Vec<String>,
    ctx_level: Vec<u32>,
    ctx_ft: Vec<Option<Ctx>>,
    tm_name: Vec<String>,
    tm_level: Vec<u32>,
    tm_bd: Vec<Ctx>,
    ctx_by_level: Vec<Vec<Ctx>>,
    tm_by_level: Vec<Vec<Tm>>,
    children: Vec<Vec<Ctx>>,
    tm_over: Vec<Vec<Tm>>,
    ctx_ix: FxHashMap<(u32, String), Ctx>,
    tm_ix: FxHashMap<(u32, String), Tm>,
}

impl BFrame {
    pub fn new(height: u32) -> Self {
        BFrame {
            height,
            ctx_name: vec![],
            ctx_level: vec![],
            ctx_ft: vec![],
            tm_name: vec![],
            tm_level: vec![],
            tm_bd: vec![],
            ctx_by_level: vec![Vec::new(); height as usize + 1],
            tm_by_level: vec![Vec::new(); height as usize + 1],
            children: vec![],
            tm_over: vec![],
            ctx_ix: FxHashMap::default(),
            tm_ix: FxHashMap::default(),
        }
    }

    /// Adds an element of `B_level`; `ft` must be given exactly when level > 0
    /// for the frame to validate, but this is not enforced here.
    pub fn add_ctx(&mut self, level: u32, name: impl Into<String>, ft: Option<Ctx>) -> Result<Ctx, BError> {
        let name = name.into();
        if level > self.height {
            return Err(BError::Level(level));
        }
        if let Some(p) = ft {
            if p as usize >= self.ctx_name.len() {
                return Err(BError::Dangling(format!("ft of `{name}`")));
            }
        }
        let id = self.ctx_name.len() as Ctx;
        if self.ctx_ix.insert((level, name.clone()), id).is_some() {
            return Err(BError::Duplicate { level, name });
        }
        self.ctx_name.push(name);
        self.ctx_level.push(level);
        self.ctx_ft.push(ft);
        self.ctx_by_level[level as usize].push(id);
        self.children.push(Vec::new());
        self.tm_over.push(Vec::new());
        if let Some(p) = ft {
            self.children[p as usize].push(id);
        }
        Ok(id)
    }

    /// Adds an element of `B̃_level` with boundary `bd`.
    pub fn add_tm(&mut self, level: u32, name: impl Into<String>, bd: Ctx) -> Result<Tm, BError> {
        let name = name.into();
        if level > self.height || level == 0 {
            return Err(BError::Level(level));
        }
        if bd as usize >= self.ctx_name.len() {
            return Err(BError::Dangling(format!("bd of `{name}`")));
        }
        let id = self.tm_name.len() as Tm;
        if self.tm_ix.insert((level, name.clone()), id).is_some() {
            return Err(BError::Duplicate { level, name });
        }
        self.tm_name.push(name);
        self.tm_level.push(level);
        self.tm_bd.push(bd);
        self.tm_by_level[level as usize].push(id);
        self.tm_over[bd as usize].push(id);
        Ok(id)
    }

    pub fn height(&self) -> u32 {
        self.height
    }
    pub fn n_ctx(&self) -> usize {
        self.ctx_name.len()
    }
    pub fn n_tm(&self) -> usize {
        self.tm_name.len()
    }
    pub fn ctxs(&self) -> impl Iterator<Item = Ctx> {
        0..self.ctx_name.len() as Ctx
    }
    pub fn tms(&self) -> impl Iterator<Item = Tm> {
        0..self.tm_name.len() as Tm
    }
    pub fn ctxs_at(&self, n: u32) -> &[Ctx] {
        self.ctx_by_level.get(n as usize).map(Vec::as_slice).unwrap_or(&[])
    }
    pub fn tms_at(&self, n: u32) -> &[Tm] {
        self.tm_by_level.get(n as usize).map(Vec::as_slice).unwrap_or(&[])
    }
    pub fn ctx_name(&self, x: Ctx) -> &str {
        &self.ctx_name[x as usize]
    }
    pub fn tm_name(&self, t: Tm) -> &str {
        &self.tm_name[t as usize]
    }
    pub fn ctx_by_name(&self, level: u32, name: &str) -> Option<Ctx> {
        self.ctx_ix.get(&(level, name.to_string())).copied()
    }
    pub fn tm_by_name(&self, level: u32, name: &str) -> Option<Tm> {
        self.tm_ix.get(&(level, name.to_string())).copied()
    }
    pub fn level(&self, x: Ctx) -> u32 {
        self.ctx_level[x as usize]
    }
    pub fn tm_level(&self, t: Tm) -> u32 {
        self.tm_level[t as usize]
    }
    pub fn ft(&self, x: Ctx) -> Option<Ctx> {
        self.ctx_ft[x as usize]
    }
    pub fn bd(&self, t: Tm) -> Ctx {
        self.tm_bd[t as usize]
    }
    pub fn children(&self, x: Ctx) -> &[Ctx] {
        &self.children[x as usize]
    }
    /// Terms with boundary exactly `x`.
    pub fn tms_over(&self, x: Ctx) -> &[Tm] {
        &self.tm_over[x as usize]
    }
    /// The (first) element of `B_0`.
    pub fn root(&self) -> Ctx {
        self.ctx_by_level[0].first().copied().unwrap_or(0)
    }

    pub fn ft_pow(&self, mut x: Ctx, k: u32) -> Option<Ctx> {
        for _ in 0..k {
            x = self.ft(x)?;
        }
        Some(x)
    }

    /// `y` lies in the slice over `x` (possibly `y = x`).
    pub fn above_eq(&self, y: Ctx, x: Ctx) -> bool {
        let (ly, lx) = (self.level(y), self.level(x));
        ly >= lx && self.ft_pow(y, ly - lx) == Some(x)
    }

    pub fn strictly_above(&self, y: Ctx, x: Ctx) -> bool {
        y != x && self.above_eq(y, x)
    }

    /// Context elements of the slice over `x`, in breadth-first order.
    pub fn slice_ctx(&self, x: Ctx) -> Vec<Ctx> {
        let mut out = vec![x];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(self.children(out[i]));
            i += 1;
        }
        out
    }

    /// Term elements of the slice over `x`: boundary strictly above `x`.
    pub fn slice_tm(&self, x: Ctx) -> Vec<Tm> {
        let mut out = Vec::new();
        for y in self.slice_ctx(x) {
            if y != x {
                out.extend_from_slice(self.tms_over(y));
            }
        }
        out
    }

    pub fn describe_ctx(&self, x: Ctx) -> String {
        format!("{}@{}", self.ctx_name(x), self.level(x))
    }
    pub fn describe_tm(&self, t: Tm) -> String {
        format!("{}@~{}", self.tm_name(t), self.tm_level(t))
    }
}

pub fn validate_bframe(b: &BFrame) -> Report {
    let mut r = Report::new();
    let mut root = Check::new("root-singleton");
    let n0 = b.ctxs_at(0).len();
    root.test(n0 == 1, || format!("|B_0| = {n0}"));
    root.finish_into(&mut r);

    let mut ft = Check::new("ft-total");
    for x in b.ctxs() {
        let l = b.level(x);
        let ok = match b.ft(x) {
            None => l == 0,
            Some(p) => l > 0 && b.level(p) + 1 == l,
        };
        ft.test(ok, || format!("ft of {}", b.describe_ctx(x)));
    }
    ft.finish_into(&mut r);

    let mut bd = Check::new("bd-total");
    for t in b.tms() {
        bd.test(b.level(b.bd(t)) == b.tm_level(t), || format!("bd of {}", b.describe_tm(t)));
    }
    bd.finish_into(&mut r);
    r
}

/// A derived view of the slice frame `𝔹/X`, with maps back to the ambient frame.
#[derive(Clone, Debug)]
pub struct BSlice {
    pub frame: BFrame,
    pub ctx_map: Vec<Ctx>,
    pub tm_map: Vec<Tm>,
}

pub fn slice_bframe(b: &BFrame, x: Ctx) -> Result<BSlice, BError> {
    if x as usize >= b.n_ctx() {
        return Err(BError::Dangling(format!("slice apex #{x}")));
    }
    let base = b.level(x);
    let mut f = BFrame::new(b.height() - base);
    let mut local = FxHashMap::default();
    let mut ctx_map = Vec::new();
    for y in b.slice_ctx(x) {
        let ft = if y == x { None } else { b.ft(y).map(|p| local[&p]) };
        local.insert(y, f.add_ctx(b.level(y) - base, b.ctx_name(y), ft)?);
        ctx_map.push(y);
    }
    let mut tm_map = Vec::new();
    for t in b.slice_tm(x) {
        f.add_tm(b.tm_level(t) - base, b.tm_name(t), local[&b.bd(t)])?;
        tm_map.push(t);
    }
    Ok(BSlice { frame: f, ctx_map, tm_map })
}

/// A (partial) homomorphism between slices of B-frames, as element tables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BHom {
    pub ctx: FxHashMap<Ctx, Ctx>,
    pub tm: FxHashMap<Tm, Tm>,
}

impl BHom {
    pub fn at(&self, x: Ctx) -> Option<Ctx> {
        self.ctx.get(&x).copied()
    }
    pub fn at_tm(&self, t: Tm) -> Option<Tm> {
        self.tm.get(&t).copied()
    }

    /// The identity on the slice over `x`.
    pub fn identity(b: &BFrame, x: Ctx) -> BHom {
        BHom {
            ctx: b.slice_ctx(x).into_iter().map(|y| (y, y)).collect(),
            tm: b.slice_tm(x).into_iter().map(|t| (t, t)).collect(),
        }
    }

    /// `next ∘ self`, defined wherever both steps are.
    pub fn then(&self, next: &BHom) -> BHom {
        BHom {
            ctx: self.ctx.iter().filter_map(|(&k, v)| Some((k, next.at(*v)?))).collect(),
            tm: self.tm.iter().filter_map(|(&k, v)| Some((k, next.at_tm(*v)?))).collect(),
        }
    }

    /// Inverse tables, when injective.
    pub fn inverse(&self) -> Option<BHom> {
        let mut inv = BHom::default();
        for (&k, &v) in &self.ctx {
            if inv.ctx.insert(v, k).is_some() {
                return None;
            }
        }
        for (&k, &v) in &self.tm {
            if inv.tm.insert(v, k).is_some() {
                return None;
            }
        }
        Some(inv)
    }
}

/// Checks that `h` is a frame homomorphism `src/xs → tgt/xt` on the maximal common domain.
pub fn validate_bframe_hom(src: &BFrame, xs: Ctx, tgt: &BFrame, xt: Ctx, h: &BHom) -> Report {
    bframe_hom(src, xs, tgt, xt, h, false)
}

fn bframe_hom(src: &BFrame, xs: Ctx, tgt: &BFrame, xt: Ctx, h: &BHom, partial: bool) -> Report {
    let mut r = Report::new();
    let (ls, lt) = (src.level(xs), tgt.level(xt));
    let in_range = |m: u32| !partial && lt + m <= tgt.height();

    let mut base = Check::new("hom-base");
    base.test(h.at(xs) == Some(xt), || format!("{} not sent to {}", src.describe_ctx(xs), tgt.describe_ctx(xt)));
    base.finish_into(&mut r);

    let mut total = Check::new("hom-total");
    let mut levels = Check::new("hom-levels");
    let mut ft = Check::new("hom-ft");
    for y in src.slice_ctx(xs) {
        let m = src.level(y) - ls;
        match h.at(y) {
            None if in_range(m) => total.fail(|| format!("{} has no image", src.describe_ctx(y))),
            None => total.skip(),
            Some(hy) => {
                total.ok();
                let ok = hy != u32::MAX
                    && (hy as usize) < tgt.n_ctx()
                    && tgt.above_eq(hy, xt)
                    && tgt.level(hy) == lt + m;
                levels.test(ok, || format!("{} ↦ {}", src.describe_ctx(y), hy));
                if ok && y != xs {
                    let lhs = tgt.ft(hy);
                    let rhs = src.ft(y).and_then(|p| h.at(p));
                    ft.test_eq(lhs, rhs, || format!("ft∘H ≠ H∘ft at {}", src.describe_ctx(y)));
                }
            }
        }
    }
    let mut bd = Check::new("hom-bd");
    for t in src.slice_tm(xs) {
        let m = src.tm_level(t) - ls;
        match h.at_tm(t) {
            None if in_range(m) => total.fail(|| format!("{} has no image", src.describe_tm(t))),
            None => total.skip(),
            Some(ht) => {
                total.ok();
                let ok = (ht as usize) < tgt.n_tm() && tgt.tm_level(ht) == lt + m && tgt.strictly_above(tgt.bd(ht), xt);
                levels.test(ok, || format!("{} ↦ #{}", src.describe_tm(t), ht));
                if ok {
                    bd.test_eq(Some(tgt.bd(ht)), h.at(src.bd(t)), || format!("bd∘H̃ ≠ H∘bd at {}", src.describe_tm(t)));
                }
            }
        }
    }
    for c in [total, levels, ft, bd] {
        c.finish_into(&mut r);
    }
    r
}

/// A B-frame with substitution, weakening and generic-element structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BSystem {
    pub frame: BFrame,
    /// `subst[x]` : 𝔹/bd(x) → 𝔹/ft(bd(x)).
    pub subst: Vec<BHom>,
    /// `weak[X]` : 𝔹/ft(X) → 𝔹/X; empty for the root.
    pub weak: Vec<BHom>,
    /// `gen[X]` = δ(X), defined when level(X) + 1 ≤ height.
    pub gen: Vec<Option<Tm>>,
}

/// Element-wise description of a pre-B-system structure, tabulated by [`BSystem::tabulate`].
pub trait BStructure {
    fn subst_ctx(&self, x: Tm, y: Ctx) -> Option<Ctx>;
    fn subst_tm(&self, x: Tm, t: Tm) -> Option<Tm>;
    fn weak_ctx(&self, big_x: Ctx, y: Ctx) -> Option<Ctx>;
    fn weak_tm(&self, big_x: Ctx, t: Tm) -> Option<Tm>;
    fn gen(&self, big_x: Ctx) -> Option<Tm>;
}

impl BSystem {
    pub fn tabulate(frame: BFrame, s: &impl BStructure) -> BSystem {
        let mut subst = Vec::with_capacity(frame.n_tm());
        for x in frame.tms() {
            let bx = frame.bd(x);
            let mut h = BHom::default();
            for y in frame.slice_ctx(bx) {
                if let Some(z) = s.subst_ctx(x, y) {
                    h.ctx.insert(y, z);
                }
            }
            for t in frame.slice_tm(bx) {
                if let Some(u) = s.subst_tm(x, t) {
                    h.tm.insert(t, u);
                }
            }
            subst.push(h);
        }
        let mut weak = Vec::with_capacity(frame.n_ctx());
        let mut gen = Vec::with_capacity(frame.n_ctx());
        for big_x in frame.ctxs() {
            let mut h = BHom::default();
            if let Some(p) = frame.ft(big_x) {
                for y in frame.slice_ctx(p) {
                    if let Some(z) = s.weak_ctx(big_x, y) {
                        h.ctx.insert(y, z);
                    }
                }
                for t in frame.slice_tm(p) {
                    if let Some(u) = s.weak_tm(big_x, t) {
                        h.tm.insert(t, u);
                    }
                }
            }
            weak.push(h);
            gen.push(if frame.level(big_x) > 0 { s.gen(big_x) } else { None });
        }
        BSystem { frame, subst, weak, gen }
    }

    pub fn height(&self) -> u32 {
        self.frame.height()
    }

    pub fn s(&self, x: Tm) -> &BHom {
        &self.subst[x as usize]
    }
    pub fn w(&self, big_x: Ctx) -> &BHom {
        &self.weak[big_x as usize]
    }
    pub fn delta(&self, big_x: Ctx) -> Option<Tm> {
        self.gen[big_x as usize]
    }

    /// Restriction to levels ≤ m.
    pub fn truncate(&self, m: u32) -> BSystem {
        let b = &self.frame;
        let m = m.min(b.height());
        let mut f = BFrame::new(m);
        let mut cmap = FxHashMap::default();
        let mut tmap = FxHashMap::default();
        for x in b.ctxs().filter(|&x| b.level(x) <= m) {
            let id = f.add_ctx(b.level(x), b.ctx_name(x), b.ft(x).map(|p| cmap[&p])).expect("subframe");
            cmap.insert(x, id);
        }
        for t in b.tms().filter(|&t| b.tm_level(t) <= m) {
            tmap.insert(t, f.add_tm(b.tm_level(t), b.tm_name(t), cmap[&b.bd(t)]).expect("subframe"));
        }
        let restrict = |h: &BHom| BHom {
            ctx: h.ctx.iter().filter_map(|(k, v)| Some((*cmap.get(k)?, *cmap.get(v)?))).collect(),
            tm: h.tm.iter().filter_map(|(k, v)| Some((*tmap.get(k)?, *tmap.get(v)?))).collect(),
        };
        let keep_c: Vec<Ctx> = b.ctxs().filter(|x| cmap.contains_key(x)).collect();
        let keep_t: Vec<Tm> = b.tms().filter(|t| tmap.contains_key(t)).collect();
        BSystem {
            subst: keep_t.iter().map(|&t| restrict(self.s(t))).collect(),
            weak: keep_c.iter().map(|&x| restrict(self.w(x))).collect(),
            gen: keep_c.iter().map(|&x| self.delta(x).and_then(|d| tmap.get(&d).copied())).collect(),
            frame: f,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preservation {
    Sub,
    Weak,
    Gen,
}

impl Preservation {
    fn law(self) -> &'static str {
        match self {
            Preservation::Sub => "sub-preservation",
            Preservation::Weak => "weak-preservation",
            Preservation::Gen => "gen-preservation",
        }
    }
}

/// Checks that `h : src/xs → tgt/xt` preserves one kind of structure, on the common domain.
pub fn check_preservation(
    src: &BSystem,
    xs: Ctx,
    tgt: &BSystem,
    xt: Ctx,
    h: &BHom,
    which: Preservation,
) -> LawResult {
    let _ = xt;
    let (sb, tb) = (&src.frame, &tgt.frame);
    let mut c = Check::new(which.law());
    match which {
        Preservation::Sub => {
            for x in sb.slice_tm(xs) {
                let Some(hx) = h.at_tm(x) else {
                    c.skip();
                    continue;
                };
                let (sx, shx) = (src.s(x), tgt.s(hx));
                for y in sb.slice_ctx(sb.bd(x)) {
                    let lhs = h.at(y).and_then(|hy| shx.at(hy));
                    let rhs = sx.at(y).and_then(|z| h.at(z));
                    c.test_eq(lhs, rhs, || format!("x={} at {}", sb.describe_tm(x), sb.describe_ctx(y)));
                }
                for t in sb.slice_tm(sb.bd(x)) {
                    let lhs = h.at_tm(t).and_then(|ht| shx.at_tm(ht));
                    let rhs = sx.at_tm(t).and_then(|u| h.at_tm(u));
                    c.test_eq(lhs, rhs, || format!("x={} at term {}", sb.describe_tm(x), sb.describe_tm(t)));
                }
            }
        }
        Preservation::Weak => {
            for big_x in sb.slice_ctx(xs) {
                if big_x == xs {
                    continue;
                }
                let Some(hx) = h.at(big_x) else {
                    c.skip();
                    continue;
                };
                let (wx, whx) = (src.w(big_x), tgt.w(hx));
                let p = sb.ft(big_x).expect("non-root");
                for y in sb.slice_ctx(p) {
                    let lhs = h.at(y).and_then(|hy| whx.at(hy));
                    let rhs = wx.at(y).and_then(|z| h.at(z));
                    c.test_eq(lhs, rhs, || format!("X={} at {}", sb.describe_ctx(big_x), sb.describe_ctx(y)));
                }
                for t in sb.slice_tm(p) {
                    let lhs = h.at_tm(t).and_then(|ht| whx.at_tm(ht));
                    let rhs = wx.at_tm(t).and_then(|u| h.at_tm(u));
                    c.test_eq(lhs, rhs, || format!("X={} at term {}", sb.describe_ctx(big_x), sb.describe_tm(t)));
                }
            }
        }
        Preservation::Gen => {
            for big_x in sb.slice_ctx(xs) {
                if big_x == xs {
                    continue;
                }
                let lhs = src.delta(big_x).and_then(|d| h.at_tm(d));
                let rhs = h.at(big_x).and_then(|hx| tgt.delta(hx));
                c.test_eq(lhs, rhs, || format!("δ at {}", sb.describe_ctx(big_x)));
            }
        }
    }
    let _ = tb;
    c.finish()
}

/// All three preservation checks for one hom, folded into a single entry.
fn pre_b_hom(src: &BSystem, xs: Ctx, tgt: &BSystem, xt: Ctx, h: &BHom) -> Report {
    let mut r = Report::new();
    for w in [Preservation::Sub, Preservation::Weak, Preservation::Gen] {
        r.push(check_preservation(src, xs, tgt, xt, h, w));
    }
    r
}

/// Validates the frame, the structure maps and the five B-system axioms.
pub fn validate_bsystem(b: &BSystem) -> Report {
    bsystem_report(b, false)
}

/// As [`validate_bsystem`], but substitution and weakening may be undefined
/// anywhere; every law is checked where its instances are defined.
pub fn validate_partial_bsystem(b: &BSystem) -> Report {
    bsystem_report(b, true)
}

fn bsystem_report(b: &BSystem, partial: bool) -> Report {
    let f = &b.frame;
    let mut r = validate_bframe(f);
    if !r.all_pass() {
        return r;
    }

    let mut styp = Check::new("subst-typing");
    for x in f.tms() {
        let bx = f.bd(x);
        let p = f.ft(bx).expect("term boundary above the root");
        let rep = bframe_hom(f, bx, f, p, b.s(x), partial);
        styp.test(rep.all_pass(), || format!("S_{}: {}", f.describe_tm(x), rep.summarize("").law_witness()));
    }
    styp.finish_into(&mut r);

    let mut wtyp = Check::new("weak-typing");
    for big_x in f.ctxs() {
        let Some(p) = f.ft(big_x) else { continue };
        let rep = bframe_hom(f, p, f, big_x, b.w(big_x), partial);
        wtyp.test(rep.all_pass(), || format!("W_{}: {}", f.describe_ctx(big_x), rep.summarize("").law_witness()));
    }
    wtyp.finish_into(&mut r);

    let mut gtyp = Check::new("gen-typing");
    for big_x in f.ctxs().filter(|&x| f.level(x) > 0) {
        let expected = f.level(big_x) < f.height();
        match b.delta(big_x) {
            None if expected => gtyp.fail(|| format!("δ({}) missing", f.describe_ctx(big_x))),
            None => gtyp.skip(),
            Some(d) => {
                let ok = (d as usize) < f.n_tm() && Some(f.bd(d)) == b.w(big_x).at(big_x);
                gtyp.test(ok, || format!("bd δ({}) ≠ W_X(X)", f.describe_ctx(big_x)));
            }
        }
    }
    gtyp.finish_into(&mut r);
    if !r.all_pass() {
        return r;
    }

    let mut ax1 = Check::new("axiom-1");
    let mut checked = 0;
    for x in f.tms() {
        let bx = f.bd(x);
        let rep = pre_b_hom(b, bx, b, f.ft(bx).unwrap(), b.s(x));
        checked += rep.entries.iter().map(|e| e.checked).sum::<u64>();
        ax1.test(rep.all_pass(), || format!("S_{}: {}", f.describe_tm(x), rep.summarize("").law_witness()));
    }
    let mut res = ax1.finish();
    res.checked = checked;
    r.push(res);

    let mut ax2 = Check::new("axiom-2");
    let mut checked = 0;
    for big_x in f.ctxs() {
        let Some(p) = f.ft(big_x) else { continue };
        let rep = pre_b_hom(b, p, b, big_x, b.w(big_x));
        checked += rep.entries.iter().map(|e| e.checked).sum::<u64>();
        ax2.test(rep.all_pass(), || format!("W_{}: {}", f.describe_ctx(big_x), rep.summarize("").law_witness()));
    }
    let mut res = ax2.finish();
    res.checked = checked;
    r.push(res);

    // S_x ∘ W_{bd x} = id on 𝔹/ft(bd x)
    let mut ax3 = Check::new("axiom-3");
    for x in f.tms() {
        let bx = f.bd(x);
        let p = f.ft(bx).unwrap();
        let (sx, w) = (b.s(x), b.w(bx));
        for y in f.slice_ctx(p) {
            ax3.test_eq(w.at(y).and_then(|z| sx.at(z)), Some(y), || {
                format!("x={} at {}", f.describe_tm(x), f.describe_ctx(y))
            });
        }
        for t in f.slice_tm(p) {
            ax3.test_eq(w.at_tm(t).and_then(|u| sx.at_tm(u)), Some(t), || {
                format!("x={} at term {}", f.describe_tm(x), f.describe_tm(t))
            });
        }
    }
    ax3.finish_into(&mut r);

    // S_x(δ(bd x)) = x
    let mut ax4 = Check::new("axiom-4");
    for x in f.tms() {
        let lhs = b.delta(f.bd(x)).and_then(|d| b.s(x).at_tm(d));
        ax4.test_eq(lhs, Some(x), || format!("x={} ∈ B̃_{}", f.tm_name(x), f.tm_level(x)));
    }
    ax4.finish_into(&mut r);

    // S_{δX} ∘ (W_X / X) = id on 𝔹/X
    let mut ax5 = Check::new("axiom-5");
    for big_x in f.ctxs().filter(|&x| f.level(x) > 0) {
        let Some(d) = b.delta(big_x) else {
            ax5.skip();
            continue;
        };
        let (w, sd) = (b.w(big_x), b.s(d));
        for y in f.slice_ctx(big_x) {
            ax5.test_eq(w.at(y).and_then(|z| sd.at(z)), Some(y), || {
                format!("X={} at {}", f.describe_ctx(big_x), f.describe_ctx(y))
            });
        }
        for t in f.slice_tm(big_x) {
            ax5.test_eq(w.at_tm(t).and_then(|u| sd.at_tm(u)), Some(t), || {
                format!("X={} at term {}", f.describe_ctx(big_x), f.describe_tm(t))
            });
        }
    }
    ax5.finish_into(&mut r);
    r
}

trait Witness {
    fn law_witness(&self) -> String;
}
impl Witness for LawResult {
    fn law_witness(&self) -> String {
        match &self.status {
            crate::report::Status::Pass => String::new(),
            crate::report::Status::Fail(w) | crate::report::Status::Absent(w) => w.clone(),
        }
    }
}

/// Checks that `fwd : a → b` and `bwd : b → a` are mutually inverse pre-B-homomorphisms.
pub fn check_b_iso(a: &BSystem, b: &BSystem, fwd: &BHom, bwd: &BHom) -> Report {
    let mut r = Report::new();
    let (ra, rb) = (a.frame.root(), b.frame.root());
    r.extend_prefixed("fwd/", validate_bframe_hom(&a.frame, ra, &b.frame, rb, fwd));
    r.extend_prefixed("fwd/", pre_b_hom(a, ra, b, rb, fwd));
    r.extend_prefixed("bwd/", validate_bframe_hom(&b.frame, rb, &a.frame, ra, bwd));
    r.extend_prefixed("bwd/", pre_b_hom(b, rb, a, ra, bwd));
    for (name, sys, h, back) in [("bwd∘fwd", a, fwd, bwd), ("fwd∘bwd", b, bwd, fwd)] {
        let mut c = Check::new(format!("{name} = id"));
        let f = &sys.frame;
        for x in f.ctxs() {
            c.test(h.at(x).and_then(|y| back.at(y)) == Some(x), || f.describe_ctx(x));
        }
        for t in f.tms() {
            c.test(h.at_tm(t).and_then(|u| back.at_tm(u)) == Some(t), || f.describe_tm(t));
        }
        c.finish_into(&mut r);
    }
    r
}

/// Ids in the finite-set B-system: context `n` has id `n`; term `x ∈ [n]` of `B̃_{n+1}` has id `n(n-1)/2 + x`.
pub fn finset_tm(n: u32, x: u32) -> Tm {
    n * n.saturating_sub(1) / 2 + x
}

struct Finset {
    height: u32,
}

impl BStructure for Finset {
    // x ∈ [n] with bd x = n+1: level n+1+j ↦ n+j
    fn subst_ctx(&self, _x: Tm, y: Ctx) -> Option<Ctx> {
        Some(y - 1)
    }
    fn subst_tm(&self, x: Tm, t: Tm) -> Option<Tm> {
        let (n, xv) = finset_decode(x);
        let (m, y) = finset_decode(t); // y ∈ [m], m = n+1+j
        let v = match y.cmp(&n) {
            std::cmp::Ordering::Less => y,
            std::cmp::Ordering::Equal => xv,
            std::cmp::Ordering::Greater => y - 1,
        };
        Some(finset_tm(m - 1, v))
    }
    // X = n+1: level n+j ↦ n+1+j
    fn weak_ctx(&self, _big_x: Ctx, y: Ctx) -> Option<Ctx> {
        (y < self.height).then_some(y + 1)
    }
    fn weak_tm(&self, big_x: Ctx, t: Tm) -> Option<Tm> {
        let n = big_x - 1;
        let (m, y) = finset_decode(t);
        (m + 2 <= self.height).then(|| finset_tm(m + 1, if y < n { y } else { y + 1 }))
    }
    fn gen(&self, big_x: Ctx) -> Option<Tm> {
        (big_x < self.height).then(|| finset_tm(big_x, big_x - 1))
    }
}

/// `(n, x)` for a term id of the finite-set system.
pub fn finset_decode(t: Tm) -> (u32, u32) {
    let mut n = 1;
    while finset_tm(n + 1, 0) <= t {
        n += 1;
    }
    (n, t - finset_tm(n, 0))
}

/// The B-system of standard finite sets: `B_n = {n}`, `B̃_{n+1} = [n]`.
pub fn build_finset_bsystem(height: u32) -> BSystem {
    let mut f = BFrame::new(height);
    for n in 0..=height {
        f.add_ctx(n, n.to_string(), n.checked_sub(1)).expect("fresh");
    }
    for n in 0..height {
        for x in 0..n {
            let id = f.add_tm(n + 1, x.to_string(), n + 1).expect("fresh");
            debug_assert_eq!(id, finset_tm(n, x));
        }
    }
    BSystem::tabulate(f, &Finset { height })
}
