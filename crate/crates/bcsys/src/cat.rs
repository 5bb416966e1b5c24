//! Finite strict categories, functors, slices, rooted trees and stratifications.

use std::fmt;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::report::{Check, Report};

pub type Obj = u32;
pub type Arr = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatError {
    #[error("duplicate {kind} id `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("dangling reference: {0}")]
    Dangling(String),
    #[error("object `{0}` has no identity arrow")]
    MissingIdentity(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub name: String,
    pub dom: Obj,
    pub cod: Obj,
}

/// A finite strict category with an explicit composition table.
///
/// `compose` is keyed by `(f, g)` and holds `g ∘ f`.
#[derive(Clone, Debug)]
pub struct FinCat {
    objects: Vec<String>,
    arrows: Vec<Arrow>,
    identity: Vec<Arr>,
    compose: FxHashMap<(Arr, Arr), Arr>,
    terminal: Option<Obj>,
    obj_ix: FxHashMap<String, Obj>,
    arr_ix: FxHashMap<String, Arr>,
    into: Vec<Vec<Arr>>,
    out: Vec<Vec<Arr>>,
    hom: FxHashMap<(Obj, Obj), Vec<Arr>>,
}

impl PartialEq for FinCat {
    fn eq(&self, other: &Self) -> bool {
        self.objects == other.objects
            && self.arrows == other.arrows
            && self.identity == other.identity
            && self.compose == other.compose
            && self.terminal == other.terminal
    }
}
impl Eq for FinCat {}

#[derive(Default, Debug)]
pub struct CatBuilder {
    objects: Vec<String>,
    arrows: Vec<Arrow>,
    identity: Vec<Option<Arr>>,
    compose: FxHashMap<(Arr, Arr), Arr>,
    terminal: Option<Obj>,
    obj_ix: FxHashMap<String, Obj>,
    arr_ix: FxHashMap<String, Arr>,
    error: Option<CatError>,
}

impl CatBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn object(&mut self, name: impl Into<String>) -> Obj {
        let name = name.into();
        let id = self.objects.len() as Obj;
        if self.obj_ix.insert(name.clone(), id).is_some() && self.error.is_none() {
            self.error = Some(CatError::Duplicate { kind: "object", name: name.clone() });
        }
        self.objects.push(name);
        self.identity.push(None);
        id
    }

    pub fn arrow(&mut self, name: impl Into<String>, dom: Obj, cod: Obj) -> Arr {
        let name = name.into();
        let id = self.arrows.len() as Arr;
        let n = self.objects.len() as Obj;
        if (dom >= n || cod >= n) && self.error.is_none() {
            self.error = Some(CatError::Dangling(format!("arrow `{name}` endpoints")));
        }
        if self.arr_ix.insert(name.clone(), id).is_some() && self.error.is_none() {
            self.error = Some(CatError::Duplicate { kind: "arrow", name: name.clone() });
        }
        self.arrows.push(Arrow { name, dom, cod });
        id
    }

    /// Adds an arrow and declares it the identity of `o`.
    pub fn identity_arrow(&mut self, name: impl Into<String>, o: Obj) -> Arr {
        let a = self.arrow(name, o, o);
        self.set_identity(o, a);
        a
    }

    pub fn set_identity(&mut self, o: Obj, a: Arr) {
        match self.identity.get_mut(o as usize) {
            Some(slot) => *slot = Some(a),
            None => {
                if self.error.is_none() {
                    self.error = Some(CatError::Dangling(format!("identity of object #{o}")));
                }
            }
        }
    }

    /// Declares `g ∘ f = h`.
    pub fn set_compose(&mut self, f: Arr, g: Arr, h: Arr) {
        self.compose.insert((f, g), h);
    }

    pub fn set_terminal(&mut self, o: Obj) {
        self.terminal = Some(o);
    }

    pub fn arrow_data(&self) -> &[Arrow] {
        &self.arrows
    }

    /// Fills the composition table over every composable pair using `f`.
    pub fn compose_with(&mut self, mut f: impl FnMut(&[Arrow], Arr, Arr) -> Option<Arr>) {
        let mut out: Vec<Vec<Arr>> = vec![Vec::new(); self.objects.len()];
        for (i, a) in self.arrows.iter().enumerate() {
            if let Some(v) = out.get_mut(a.dom as usize) {
                v.push(i as Arr);
            }
        }
        for fi in 0..self.arrows.len() {
            let cod = self.arrows[fi].cod as usize;
            if cod >= out.len() {
                continue;
            }
            for &g in &out[cod] {
                if let Some(h) = f(&self.arrows, fi as Arr, g) {
                    self.compose.insert((fi as Arr, g), h);
                }
            }
        }
    }

    pub fn build(self) -> Result<FinCat, CatError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        let n = self.objects.len() as Obj;
        let m = self.arrows.len() as Arr;
        let mut identity = Vec::with_capacity(self.identity.len());
        for (o, id) in self.identity.iter().enumerate() {
            match id {
                Some(a) if *a < m => identity.push(*a),
                Some(_) => return Err(CatError::Dangling(format!("identity of `{}`", self.objects[o]))),
                None => return Err(CatError::MissingIdentity(self.objects[o].clone())),
            }
        }
        for (&(f, g), &h) in &self.compose {
            if f >= m || g >= m || h >= m {
                return Err(CatError::Dangling("composition table entry".into()));
            }
        }
        if let Some(t) = self.terminal {
            if t >= n {
                return Err(CatError::Dangling("terminal object".into()));
            }
        }
        let mut into = vec![Vec::new(); n as usize];
        let mut out = vec![Vec::new(); n as usize];
        let mut hom: FxHashMap<(Obj, Obj), Vec<Arr>> = FxHashMap::default();
        for (i, a) in self.arrows.iter().enumerate() {
            into[a.cod as usize].push(i as Arr);
            out[a.dom as usize].push(i as Arr);
            hom.entry((a.dom, a.cod)).or_default().push(i as Arr);
        }
        Ok(FinCat {
            objects: self.objects,
            arrows: self.arrows,
            identity,
            compose: self.compose,
            terminal: self.terminal,
            obj_ix: self.obj_ix,
            arr_ix: self.arr_ix,
            into,
            out,
            hom,
        })
    }
}

impl FinCat {
    pub fn n_objects(&self) -> usize {
        self.objects.len()
    }
    pub fn n_arrows(&self) -> usize {
        self.arrows.len()
    }
    pub fn objects(&self) -> impl Iterator<Item = Obj> + Clone {
        0..self.objects.len() as Obj
    }
    pub fn arrows(&self) -> impl Iterator<Item = Arr> + Clone {
        0..self.arrows.len() as Arr
    }
    pub fn obj_name(&self, o: Obj) -> &str {
        &self.objects[o as usize]
    }
    pub fn arr_name(&self, a: Arr) -> &str {
        &self.arrows[a as usize].name
    }
    pub fn obj_names(&self) -> &[String] {
        &self.objects
    }
    pub fn arrow_data(&self) -> &[Arrow] {
        &self.arrows
    }
    pub fn obj_by_name(&self, name: &str) -> Option<Obj> {
        self.obj_ix.get(name).copied()
    }
    pub fn arr_by_name(&self, name: &str) -> Option<Arr> {
        self.arr_ix.get(name).copied()
    }
    pub fn dom(&self, a: Arr) -> Obj {
        self.arrows[a as usize].dom
    }
    pub fn cod(&self, a: Arr) -> Obj {
        self.arrows[a as usize].cod
    }
    pub fn id(&self, o: Obj) -> Arr {
        self.identity[o as usize]
    }
    pub fn is_id(&self, a: Arr) -> bool {
        self.identity[self.dom(a) as usize] == a
    }
    pub fn terminal(&self) -> Option<Obj> {
        self.terminal
    }
    pub fn compose_table(&self) -> &FxHashMap<(Arr, Arr), Arr> {
        &self.compose
    }
    /// `g ∘ f`, if recorded.
    pub fn try_comp(&self, g: Arr, f: Arr) -> Option<Arr> {
        self.compose.get(&(f, g)).copied()
    }
    /// `g ∘ f` in a category whose table is known to be total.
    pub fn comp(&self, g: Arr, f: Arr) -> Arr {
        match self.try_comp(g, f) {
            Some(h) => h,
            None => panic!("composite {} ∘ {} missing", self.arr_name(g), self.arr_name(f)),
        }
    }
    pub fn into(&self, o: Obj) -> &[Arr] {
        &self.into[o as usize]
    }
    pub fn out(&self, o: Obj) -> &[Arr] {
        &self.out[o as usize]
    }
    pub fn hom(&self, a: Obj, b: Obj) -> &[Arr] {
        self.hom.get(&(a, b)).map(Vec::as_slice).unwrap_or(&[])
    }
    /// The unique arrow into the chosen terminal object.
    pub fn bang(&self, o: Obj) -> Option<Arr> {
        let t = self.terminal?;
        match self.hom(o, t) {
            [a] => Some(*a),
            _ => None,
        }
    }
}

/// The full subcategory on the objects accepted by `keep`, with the old ids
/// of its objects and arrows.
pub fn full_subcategory(c: &FinCat, keep: impl Fn(Obj) -> bool) -> (FinCat, Vec<Obj>, Vec<Arr>) {
    let objs: Vec<Obj> = c.objects().filter(|&o| keep(o)).collect();
    let mut b = CatBuilder::new();
    let mut omap = FxHashMap::default();
    for &o in &objs {
        omap.insert(o, b.object(c.obj_name(o)));
    }
    let mut amap = FxHashMap::default();
    let mut arrs = Vec::new();
    for a in c.arrows() {
        if let (Some(&d), Some(&t)) = (omap.get(&c.dom(a)), omap.get(&c.cod(a))) {
            amap.insert(a, b.arrow(c.arr_name(a), d, t));
            arrs.push(a);
        }
    }
    for &o in &objs {
        b.set_identity(omap[&o], amap[&c.id(o)]);
    }
    if let Some(&t) = c.terminal().and_then(|t| omap.get(&t)) {
        b.set_terminal(t);
    }
    for (&(f, g), &h) in c.compose_table() {
        if let (Some(&f2), Some(&g2), Some(&h2)) = (amap.get(&f), amap.get(&g), amap.get(&h)) {
            b.set_compose(f2, g2, h2);
        }
    }
    (b.build().expect("full subcategory of a valid category"), objs, arrs)
}

pub fn validate_fincat(c: &FinCat) -> Report {
    let mut r = Report::new();
    let name = |a: Arr| c.arr_name(a).to_string();

    let mut idt = Check::new("identity-typing");
    for o in c.objects() {
        let i = c.id(o);
        idt.test(c.dom(i) == o && c.cod(i) == o, || format!("identity of {} is {}", c.obj_name(o), name(i)));
    }
    idt.finish_into(&mut r);

    let mut typing = Check::new("composition-typing");
    for (&(f, g), &h) in sorted(c.compose_table()) {
        typing.test(
            c.cod(f) == c.dom(g) && c.dom(h) == c.dom(f) && c.cod(h) == c.cod(g),
            || format!("(f,g) = ({},{}) composite {} has wrong endpoints", name(f), name(g), name(h)),
        );
    }
    typing.finish_into(&mut r);

    let mut total = Check::new("composition-total");
    for f in c.arrows() {
        for &g in c.out(c.cod(f)) {
            total.test(c.try_comp(g, f).is_some(), || format!("(f,g) = ({},{}) has no composite", name(f), name(g)));
        }
    }
    total.finish_into(&mut r);

    let mut lu = Check::new("left-unit");
    let mut ru = Check::new("right-unit");
    for f in c.arrows() {
        lu.test(c.try_comp(c.id(c.cod(f)), f) == Some(f), || format!("id ∘ {} ≠ {}", name(f), name(f)));
        ru.test(c.try_comp(f, c.id(c.dom(f))) == Some(f), || format!("{} ∘ id ≠ {}", name(f), name(f)));
    }
    lu.finish_into(&mut r);
    ru.finish_into(&mut r);

    let mut assoc = Check::new("associativity");
    for f in c.arrows() {
        for &g in c.out(c.cod(f)) {
            let gf = c.try_comp(g, f);
            for &h in c.out(c.cod(g)) {
                let lhs = gf.and_then(|gf| c.try_comp(h, gf));
                let rhs = c.try_comp(h, g).and_then(|hg| c.try_comp(hg, f));
                assoc.test_eq(lhs, rhs, || format!("(f,g,h) = ({},{},{})", name(f), name(g), name(h)));
            }
        }
    }
    assoc.finish_into(&mut r);

    if let Some(t) = c.terminal() {
        let mut term = Check::new("terminal");
        for o in c.objects() {
            let n = c.hom(o, t).len();
            term.test(n == 1, || format!("{} arrows {} → {}", n, c.obj_name(o), c.obj_name(t)));
        }
        term.finish_into(&mut r);
    }
    r
}

fn sorted<K: Ord + Copy, V>(m: &FxHashMap<K, V>) -> Vec<(&K, &V)> {
    let mut v: Vec<_> = m.iter().collect();
    v.sort_by_key(|(k, _)| **k);
    v
}

/// Object and arrow maps of a functor between two finite categories.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Functor {
    pub obj: Vec<Obj>,
    pub arr: Vec<Arr>,
}

impl Functor {
    pub fn identity(c: &FinCat) -> Self {
        Functor { obj: c.objects().collect(), arr: c.arrows().collect() }
    }

    /// `self` after `first`.
    pub fn after(&self, first: &Functor) -> Functor {
        Functor {
            obj: first.obj.iter().map(|&o| self.obj[o as usize]).collect(),
            arr: first.arr.iter().map(|&a| self.arr[a as usize]).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.obj.iter().enumerate().all(|(i, &o)| i as Obj == o)
            && self.arr.iter().enumerate().all(|(i, &a)| i as Arr == a)
    }

    /// True when both maps are bijections.
    pub fn is_bijective(&self, tgt: &FinCat) -> bool {
        bijective(&self.obj, tgt.n_objects()) && bijective(&self.arr, tgt.n_arrows())
    }

    /// Inverse maps, when bijective.
    pub fn inverse(&self, tgt: &FinCat) -> Option<Functor> {
        Some(Functor { obj: invert(&self.obj, tgt.n_objects())?, arr: invert(&self.arr, tgt.n_arrows())? })
    }
}

pub(crate) fn bijective(map: &[u32], n: usize) -> bool {
    invert(map, n).is_some()
}

pub(crate) fn invert(map: &[u32], n: usize) -> Option<Vec<u32>> {
    if map.len() != n {
        return None;
    }
    let mut inv = vec![u32::MAX; n];
    for (i, &x) in map.iter().enumerate() {
        let slot = inv.get_mut(x as usize)?;
        if *slot != u32::MAX {
            return None;
        }
        *slot = i as u32;
    }
    Some(inv)
}

/// Checks the functor laws; with stratifications supplied, also that levels,
/// the terminal and individual arrows are preserved.
pub fn validate_functor(
    src: &FinCat,
    tgt: &FinCat,
    f: &Functor,
    strat: Option<(&Stratification, &Stratification)>,
) -> Report {
    let mut r = Report::new();
    let mut total = Check::new("functor-total");
    let shape_ok = f.obj.len() == src.n_objects()
        && f.arr.len() == src.n_arrows()
        && f.obj.iter().all(|&o| (o as usize) < tgt.n_objects())
        && f.arr.iter().all(|&a| (a as usize) < tgt.n_arrows());
    total.test(shape_ok, || "object/arrow map does not cover the source or leaves the target".into());
    total.finish_into(&mut r);
    if !shape_ok {
        return r;
    }
    let fo = |o: Obj| f.obj[o as usize];
    let fa = |a: Arr| f.arr[a as usize];

    let mut typing = Check::new("functor-typing");
    for a in src.arrows() {
        typing.test(tgt.dom(fa(a)) == fo(src.dom(a)) && tgt.cod(fa(a)) == fo(src.cod(a)), || {
            format!("image of {} has wrong endpoints", src.arr_name(a))
        });
    }
    typing.finish_into(&mut r);

    let mut ids = Check::new("functor-identity");
    for o in src.objects() {
        ids.test(fa(src.id(o)) == tgt.id(fo(o)), || format!("identity of {}", src.obj_name(o)));
    }
    ids.finish_into(&mut r);

    let mut comp = Check::new("functor-composition");
    for a in src.arrows() {
        for &b in src.out(src.cod(a)) {
            let lhs = src.try_comp(b, a).map(fa);
            let rhs = tgt.try_comp(fa(b), fa(a));
            comp.test_eq(lhs, rhs, || format!("F({} ∘ {})", src.arr_name(b), src.arr_name(a)));
        }
    }
    comp.finish_into(&mut r);

    if let Some((ls, lt)) = strat {
        let mut term = Check::new("preserves-terminal");
        if let (Some(t), Some(t2)) = (src.terminal(), tgt.terminal()) {
            term.test(fo(t) == t2, || format!("terminal {} ↦ {}", src.obj_name(t), tgt.obj_name(fo(t))));
        }
        term.finish_into(&mut r);
        let mut ind = Check::new("preserves-individual");
        for a in src.arrows() {
            if ls.is_individual(src, a) {
                ind.test(lt.is_individual(tgt, fa(a)), || format!("{} not sent to an individual arrow", src.arr_name(a)));
            }
        }
        ind.finish_into(&mut r);
        let mut lev = Check::new("preserves-level");
        for o in src.objects() {
            lev.test(ls.level(o) == lt.level(fo(o)), || {
                format!("{} at level {} ↦ level {}", src.obj_name(o), ls.level(o), lt.level(fo(o)))
            });
        }
        lev.finish_into(&mut r);
    }
    r
}

/// A rooted tree given by level sets and parent maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedTree {
    /// Node names per level; level 0 holds the root.
    pub levels: Vec<Vec<String>>,
    /// `parent[n][i]` is the index in `levels[n-1]` of the parent of `levels[n][i]`; `parent[0]` is empty.
    pub parent: Vec<Vec<usize>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("level 0 must hold exactly one node, found {0}")]
    Root(usize),
    #[error("parent map at level {0} is not total")]
    Parent(usize),
    #[error("parent index out of range at level {0}")]
    Range(usize),
}

impl RootedTree {
    pub fn height(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    pub fn size(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn validate(&self) -> Result<(), TreeError> {
        let roots = self.levels.first().map_or(0, Vec::len);
        if roots != 1 {
            return Err(TreeError::Root(roots));
        }
        if self.parent.len() != self.levels.len() {
            return Err(TreeError::Parent(self.parent.len()));
        }
        for n in 1..self.levels.len() {
            if self.parent[n].len() != self.levels[n].len() {
                return Err(TreeError::Parent(n));
            }
            if self.parent[n].iter().any(|&p| p >= self.levels[n - 1].len()) {
                return Err(TreeError::Range(n));
            }
        }
        Ok(())
    }

    pub fn chain(height: usize) -> Self {
        RootedTree {
            levels: (0..=height).map(|n| vec![n.to_string()]).collect(),
            parent: (0..=height).map(|n| if n == 0 { vec![] } else { vec![0] }).collect(),
        }
    }
}

/// Levels of a stratified category, with the individual arrow out of each non-root object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratification {
    level: Vec<u32>,
    individual: Vec<Option<Arr>>,
}

impl Stratification {
    pub fn level(&self, o: Obj) -> u32 {
        self.level[o as usize]
    }
    pub fn levels(&self) -> &[u32] {
        &self.level
    }
    pub fn max_level(&self) -> u32 {
        self.level.iter().copied().max().unwrap_or(0)
    }
    /// The unique individual arrow out of `o`; `None` for the terminal object.
    pub fn individual(&self, o: Obj) -> Option<Arr> {
        self.individual[o as usize]
    }
    pub fn is_individual(&self, c: &FinCat, a: Arr) -> bool {
        self.level(c.dom(a)) == self.level(c.cod(a)) + 1
    }
    /// `ft(o)`: codomain of the individual arrow.
    pub fn parent(&self, c: &FinCat, o: Obj) -> Option<Obj> {
        self.individual(o).map(|a| c.cod(a))
    }
    pub fn at_level(&self, n: u32) -> impl Iterator<Item = Obj> + '_ {
        self.level.iter().enumerate().filter(move |(_, &l)| l == n).map(|(i, _)| i as Obj)
    }
    /// The unique arrow from `o` down to level `k` (k ≤ level(o)).
    pub fn down(&self, c: &FinCat, o: Obj, k: u32) -> Option<Arr> {
        let mut a = c.id(o);
        let mut cur = o;
        while self.level(cur) > k {
            let p = self.individual(cur)?;
            a = c.try_comp(p, a)?;
            cur = c.cod(p);
        }
        (self.level(cur) == k).then_some(a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StratCondition {
    /// No chosen terminal object.
    NoTerminal,
    /// (i) the terminal object sits at level 0.
    TerminalLevel,
    /// (ii) exactly one arrow from X to each level k ≤ level(X).
    UniqueDown,
    /// (iii) no arrow raises the level.
    NoRaise,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("stratification condition {condition:?} violated at `{object}` (level {k}: {count} arrows)")]
pub struct StratFailure {
    pub condition: StratCondition,
    pub object: String,
    pub k: u32,
    pub count: usize,
}

/// Checks the three level conditions for a candidate level function.
pub fn check_stratification(c: &FinCat, level: &[u32]) -> Result<Stratification, StratFailure> {
    let fail = |condition, o: Obj, k, count| StratFailure { condition, object: c.obj_name(o).to_string(), k, count };
    let Some(t) = c.terminal() else {
        return Err(StratFailure { condition: StratCondition::NoTerminal, object: String::new(), k: 0, count: 0 });
    };
    assert_eq!(level.len(), c.n_objects(), "level map must cover every object");
    if level[t as usize] != 0 {
        return Err(fail(StratCondition::TerminalLevel, t, level[t as usize], 0));
    }
    let mut order: Vec<Obj> = c.objects().collect();
    order.sort_by_key(|&o| (level[o as usize], o));
    let mut individual = vec![None; c.n_objects()];
    for &x in &order {
        let lx = level[x as usize];
        let mut counts = vec![0usize; lx as usize + 1];
        for &a in c.out(x) {
            let ly = level[c.cod(a) as usize];
            if ly <= lx {
                counts[ly as usize] += 1;
                if ly + 1 == lx {
                    individual[x as usize] = Some(a);
                }
            }
        }
        if let Some(k) = counts.iter().position(|&n| n != 1) {
            return Err(fail(StratCondition::UniqueDown, x, k as u32, counts[k]));
        }
    }
    for &x in &order {
        let lx = level[x as usize];
        if let Some(&a) = c.out(x).iter().find(|&&a| level[c.cod(a) as usize] > lx) {
            let k = level[c.cod(a) as usize];
            let count = c.out(x).iter().filter(|&&b| level[c.cod(b) as usize] == k).count();
            return Err(fail(StratCondition::NoRaise, x, k, count));
        }
    }
    Ok(Stratification { level: level.to_vec(), individual })
}

/// Computes the stratification of `c`, or the first violated condition.
///
/// Levels are assigned breadth-first from the terminal: an object joins level
/// n+1 once all its outgoing arrows hit assigned objects and one of them hits
/// level n; anything reachable from a level by an arrow is pulled into it.
pub fn stratify(c: &FinCat) -> Result<Stratification, StratFailure> {
    let Some(t) = c.terminal() else {
        return Err(StratFailure { condition: StratCondition::NoTerminal, object: String::new(), k: 0, count: 0 });
    };
    let n = c.n_objects();
    let mut level: Vec<Option<u32>> = vec![None; n];
    let close = |level: &mut Vec<Option<u32>>, seed: Vec<Obj>, l: u32| {
        let mut stack = seed;
        for &s in &stack {
            level[s as usize] = Some(l);
        }
        while let Some(x) = stack.pop() {
            for &a in c.out(x) {
                let y = c.cod(a);
                if level[y as usize].is_none() {
                    level[y as usize] = Some(l);
                    stack.push(y);
                }
            }
        }
    };
    close(&mut level, vec![t], 0);
    let mut cur = 0;
    loop {
        let cand: Vec<Obj> = c
            .objects()
            .filter(|&x| level[x as usize].is_none())
            .filter(|&x| {
                let outs = c.out(x).iter().map(|&a| c.cod(a)).filter(|&y| y != x);
                let mut hits = false;
                for y in outs {
                    match level[y as usize] {
                        None => return false,
                        Some(l) if l == cur => hits = true,
                        Some(_) => {}
                    }
                }
                hits
            })
            .collect();
        if cand.is_empty() {
            break;
        }
        cur += 1;
        close(&mut level, cand, cur);
    }
    let top = level.iter().flatten().copied().max().unwrap_or(0);
    let level: Vec<u32> = level.into_iter().map(|l| l.unwrap_or(top + 1)).collect();
    check_stratification(c, &level)
}

/// The individual arrows whose composite is `f`, in order of application.
pub fn factor_individuals(c: &FinCat, s: &Stratification, f: Arr) -> Result<Vec<Arr>, String> {
    let (x, z) = (c.dom(f), c.cod(f));
    if s.level(x) < s.level(z) {
        return Err(format!("arrow {} raises the level", c.arr_name(f)));
    }
    let mut out = Vec::new();
    let mut g = f;
    while s.level(c.dom(g)) > s.level(z) {
        let p = s.individual(c.dom(g)).ok_or("missing individual arrow")?;
        let rest = c
            .hom(c.cod(p), z)
            .iter()
            .copied()
            .find(|&h| c.try_comp(h, p) == Some(g))
            .ok_or_else(|| format!("{} does not factor through {}", c.arr_name(g), c.arr_name(p)))?;
        out.push(p);
        g = rest;
    }
    if !c.is_id(g) {
        return Err(format!("{} is a non-identity level-preserving arrow", c.arr_name(g)));
    }
    Ok(out)
}

/// A free category on a forest given by parent pointers, with its stratification.
///
/// Arrow `(X, k)` : X → ft^k X has id `offset[X] + k`.
#[derive(Clone, Debug)]
pub struct FreeTreeCat {
    pub cat: FinCat,
    pub strat: Stratification,
    offset: Vec<u32>,
    parent: Vec<Option<Obj>>,
}

impl FreeTreeCat {
    /// Builds the free category; `parent[root]` must be `None` and parents must form a tree.
    pub fn new(names: Vec<String>, parent: Vec<Option<Obj>>) -> Self {
        let n = names.len();
        let mut level = vec![u32::MAX; n];
        fn lev(o: usize, parent: &[Option<Obj>], level: &mut [u32]) -> u32 {
            if level[o] == u32::MAX {
                level[o] = match parent[o] {
                    None => 0,
                    Some(p) => lev(p as usize, parent, level) + 1,
                };
            }
            level[o]
        }
        for o in 0..n {
            lev(o, &parent, &mut level);
        }
        let mut b = CatBuilder::new();
        for name in &names {
            b.object(name.clone());
        }
        let mut offset = Vec::with_capacity(n);
        for o in 0..n {
            offset.push(b.arrow_data().len() as u32);
            let mut y = o as Obj;
            for k in 0..=level[o] {
                let a = b.arrow(format!("{}/{k}", names[o]), o as Obj, y);
                if k == 0 {
                    b.set_identity(o as Obj, a);
                }
                if let Some(p) = parent[y as usize] {
                    y = p;
                }
            }
        }
        if let Some(root) = parent.iter().position(Option::is_none) {
            b.set_terminal(root as Obj);
        }
        // (ft^k X, j) ∘ (X, k) = (X, k + j)
        let mut owner = Vec::new();
        for (o, &l) in level.iter().enumerate() {
            for k in 0..=l {
                owner.push((o as Obj, k));
            }
        }
        b.compose_with(|_, f, g| {
            let (x, k) = owner[f as usize];
            let (_, j) = owner[g as usize];
            Some(offset[x as usize] + k + j)
        });
        let cat = b.build().expect("free tree category is well formed");
        let individual = (0..n).map(|o| (level[o] > 0).then(|| offset[o] + 1)).collect();
        FreeTreeCat { cat, strat: Stratification { level, individual }, offset, parent }
    }

    pub fn arrow(&self, x: Obj, k: u32) -> Arr {
        debug_assert!(k <= self.strat.level(x));
        self.offset[x as usize] + k
    }

    /// `(X, k)` for an arrow id.
    pub fn decode(&self, a: Arr) -> (Obj, u32) {
        let x = self.cat.dom(a);
        (x, a - self.offset[x as usize])
    }

    pub fn parent(&self, x: Obj) -> Option<Obj> {
        self.parent[x as usize]
    }

    pub fn ft_pow(&self, x: Obj, k: u32) -> Obj {
        self.cat.cod(self.arrow(x, k))
    }
}

pub fn free_cat_of_tree(t: &RootedTree) -> (FinCat, Stratification) {
    let f = free_tree_of(t);
    (f.cat, f.strat)
}

pub(crate) fn free_tree_of(t: &RootedTree) -> FreeTreeCat {
    let mut names = Vec::new();
    let mut parent = Vec::new();
    let mut base = Vec::new();
    for (n, lvl) in t.levels.iter().enumerate() {
        base.push(names.len());
        for (i, x) in lvl.iter().enumerate() {
            names.push(format!("{n}:{x}"));
            parent.push(if n == 0 { None } else { Some((base[n - 1] + t.parent[n][i]) as Obj) });
        }
    }
    FreeTreeCat::new(names, parent)
}

pub fn tree_of_strat(c: &FinCat, s: &Stratification) -> RootedTree {
    let top = s.max_level();
    let mut levels = vec![Vec::new(); top as usize + 1];
    let mut pos = vec![0usize; c.n_objects()];
    for n in 0..=top {
        for o in s.at_level(n) {
            pos[o as usize] = levels[n as usize].len();
            levels[n as usize].push(c.obj_name(o).to_string());
        }
    }
    let mut parent = vec![Vec::new(); top as usize + 1];
    for n in 1..=top {
        for o in s.at_level(n) {
            let p = s.parent(c, o).expect("non-root object has an individual arrow");
            parent[n as usize].push(pos[p as usize]);
        }
    }
    RootedTree { levels, parent }
}

/// The slice category over `apex`, materialized.
#[derive(Clone, Debug)]
pub struct SliceCat {
    pub cat: FinCat,
    pub apex: Obj,
    /// Slice object ↦ arrow into the apex.
    pub obj_arrow: Vec<Arr>,
    /// Slice arrow ↦ `(h, B)` representing `h : B∘h → B`.
    pub arr_pair: Vec<(Arr, Arr)>,
    obj_of: FxHashMap<Arr, Obj>,
    pair_of: FxHashMap<(Arr, Arr), Arr>,
}

impl SliceCat {
    pub fn object_of(&self, b: Arr) -> Option<Obj> {
        self.obj_of.get(&b).copied()
    }
    pub fn arrow_of(&self, h: Arr, b: Arr) -> Option<Arr> {
        self.pair_of.get(&(h, b)).copied()
    }
}

pub fn slice(c: &FinCat, apex: Obj) -> SliceCat {
    let mut b = CatBuilder::new();
    let mut obj_arrow = Vec::new();
    let mut obj_of = FxHashMap::default();
    for &a in c.into(apex) {
        obj_of.insert(a, b.object(c.arr_name(a).to_string()));
        obj_arrow.push(a);
    }
    let mut arr_pair = Vec::new();
    let mut pair_of = FxHashMap::default();
    for &bb in c.into(apex) {
        for &h in c.into(c.dom(bb)) {
            let src = obj_of[&c.comp(bb, h)];
            let id = b.arrow(format!("{}|{}", c.arr_name(h), c.arr_name(bb)), src, obj_of[&bb]);
            if c.is_id(h) {
                b.set_identity(obj_of[&bb], id);
            }
            pair_of.insert((h, bb), id);
            arr_pair.push((h, bb));
        }
    }
    if let Some(&t) = obj_of.get(&c.id(apex)) {
        b.set_terminal(t);
    }
    // (h2, B) ∘ (h1, B∘h2) = (h2∘h1, B)
    b.compose_with(|_, f, g| {
        let (h1, _) = arr_pair[f as usize];
        let (h2, bb) = arr_pair[g as usize];
        pair_of.get(&(c.comp(h2, h1), bb)).copied()
    });
    let cat = b.build().expect("slice category is well formed");
    SliceCat { cat, apex, obj_arrow, arr_pair, obj_of, pair_of }
}

/// The inherited stratification `L(dom f) − L(apex)` of a slice.
pub fn slice_stratification(c: &FinCat, s: &Stratification, sl: &SliceCat) -> Result<Stratification, StratFailure> {
    let la = s.level(sl.apex);
    let level: Vec<u32> = sl.obj_arrow.iter().map(|&b| s.level(c.dom(b)) - la).collect();
    check_stratification(&sl.cat, &level)
}

/// The canonical isomorphism between a category and its slice over the terminal:
/// `(d, bang)` with `d : c/1 → c` and `bang : c → c/1`.
pub fn terminal_slice_iso(c: &FinCat, sl: &SliceCat) -> Option<(Functor, Functor)> {
    let t = c.terminal()?;
    if sl.apex != t {
        return None;
    }
    let d = Functor {
        obj: sl.obj_arrow.iter().map(|&b| c.dom(b)).collect(),
        arr: sl.arr_pair.iter().map(|&(h, _)| h).collect(),
    };
    let mut bang = Functor { obj: Vec::new(), arr: Vec::new() };
    for o in c.objects() {
        bang.obj.push(sl.object_of(c.bang(o)?)?);
    }
    for a in c.arrows() {
        bang.arr.push(sl.arrow_of(a, c.bang(c.cod(a))?)?);
    }
    Some((d, bang))
}

impl fmt::Display for FinCat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FinCat({} objects, {} arrows)", self.n_objects(), self.n_arrows())
    }
}
