//! JSON documents for every structure: `{"kind", "version", "payload"}` with
//! sorted keys and explicit arrays, ids being array positions.
//!
//! Loading checks that every id refers to something; it does not run any of
//! the law validators.

use std::path::Path;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::bsys::{BError, BFrame, BHom, BSystem, Ctx, Tm};
use crate::cat::{check_stratification, Arr, CatBuilder, FinCat, Obj, RootedTree};
use crate::cesys::CESystem;
use crate::csys::CSystem;
use crate::esys::{ESys, ESystem, SliceTable, TermId};
use crate::syntax::BindingSignature;

pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("unknown kind `{0}`")]
    UnknownKind(String),
    #[error("unsupported version {found} (expected {VERSION})")]
    Version { found: u32 },
    #[error("dangling reference: {0}")]
    Dangling(String),
    #[error("malformed {kind} payload: {msg}")]
    Payload { kind: &'static str, msg: String },
}

fn dangling(what: impl Into<String>) -> IoError {
    IoError::Dangling(what.into())
}

fn frame_err(e: BError) -> IoError {
    match e {
        BError::Dangling(what) => IoError::Dangling(what),
        other => IoError::Payload { kind: "frame", msg: other.to_string() },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Structure {
    BFrame(BFrame),
    BSystem(BSystem),
    CSystem(CSystem),
    CESystem(CESystem),
    ESystem(ESystem),
    Tree(RootedTree),
    Signature(BindingSignature),
}

impl Structure {
    pub fn kind(&self) -> &'static str {
        match self {
            Structure::BFrame(_) => "bframe",
            Structure::BSystem(_) => "bsystem",
            Structure::CSystem(_) => "csystem",
            Structure::CESystem(_) => "cesystem",
            Structure::ESystem(_) => "esystem",
            Structure::Tree(_) => "tree",
            Structure::Signature(_) => "signature",
        }
    }
}

pub const KINDS: [&str; 7] = ["bframe", "bsystem", "csystem", "cesystem", "esystem", "tree", "signature"];

// ---------------------------------------------------------------------------
// payloads

#[derive(Serialize, Deserialize)]
struct CtxDoc {
    level: u32,
    name: String,
    ft: Option<Ctx>,
}

#[derive(Serialize, Deserialize)]
struct TmDoc {
    level: u32,
    name: String,
    bd: Ctx,
}

#[derive(Serialize, Deserialize)]
struct FrameDoc {
    height: u32,
    contexts: Vec<CtxDoc>,
    terms: Vec<TmDoc>,
}

/// A partial map as sorted `[from, to]` pairs.
#[derive(Serialize, Deserialize)]
struct HomDoc {
    ctx: Vec<[u32; 2]>,
    tm: Vec<[u32; 2]>,
}

#[derive(Serialize, Deserialize)]
struct BSystemDoc {
    frame: FrameDoc,
    subst: Vec<HomDoc>,
    weak: Vec<HomDoc>,
    gen: Vec<Option<Tm>>,
}

#[derive(Serialize, Deserialize)]
struct ArrowDoc {
    name: String,
    dom: Obj,
    cod: Obj,
}

#[derive(Serialize, Deserialize)]
struct CatDoc {
    objects: Vec<String>,
    arrows: Vec<ArrowDoc>,
    identity: Vec<Arr>,
    /// `[f, g, g∘f]`.
    compose: Vec<[Arr; 3]>,
    terminal: Option<Obj>,
}

#[derive(Serialize, Deserialize)]
struct CSystemDoc {
    category: CatDoc,
    one: Obj,
    len: Vec<u32>,
    ft: Vec<Obj>,
    proj: Vec<Option<Arr>>,
    /// `[f, Γ, f*Γ, q(f, Γ)]`.
    pullbacks: Vec<[u32; 4]>,
}

#[derive(Serialize, Deserialize)]
struct CESystemDoc {
    families: CatDoc,
    contexts: CatDoc,
    inclusion: Vec<Arr>,
    root: Obj,
    /// `[f, A, f*A, π₂]`.
    pullbacks: Vec<[u32; 4]>,
}

/// `[h, over, value]` rows for arrows and terms.
#[derive(Serialize, Deserialize)]
struct SliceDoc {
    arr: Vec<[u32; 3]>,
    term: Vec<[u32; 3]>,
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    name: String,
    arrow: Arr,
}

#[derive(Serialize, Deserialize)]
struct ESystemDoc {
    category: CatDoc,
    terms: Vec<TermDoc>,
    subst: Vec<SliceDoc>,
    weak: Vec<SliceDoc>,
    one: Vec<Option<TermId>>,
    levels: Option<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct TreeDoc {
    levels: Vec<Vec<String>>,
    parent: Vec<Vec<usize>>,
}

fn sorted_pairs(m: &FxHashMap<u32, u32>) -> Vec<[u32; 2]> {
    let mut v: Vec<[u32; 2]> = m.iter().map(|(&k, &v)| [k, v]).collect();
    v.sort_unstable();
    v
}

fn frame_doc(f: &BFrame) -> FrameDoc {
    FrameDoc {
        height: f.height(),
        contexts: f.ctxs().map(|x| CtxDoc { level: f.level(x), name: f.ctx_name(x).to_string(), ft: f.ft(x) }).collect(),
        terms: f.tms().map(|t| TmDoc { level: f.tm_level(t), name: f.tm_name(t).to_string(), bd: f.bd(t) }).collect(),
    }
}

fn hom_doc(h: &BHom) -> HomDoc {
    HomDoc { ctx: sorted_pairs(&h.ctx), tm: sorted_pairs(&h.tm) }
}

fn cat_doc(c: &FinCat) -> CatDoc {
    let mut compose: Vec<[Arr; 3]> = c.compose_table().iter().map(|(&(f, g), &h)| [f, g, h]).collect();
    compose.sort_unstable();
    CatDoc {
        objects: c.obj_names().to_vec(),
        arrows: c.arrow_data().iter().map(|a| ArrowDoc { name: a.name.clone(), dom: a.dom, cod: a.cod }).collect(),
        identity: c.objects().map(|o| c.id(o)).collect(),
        compose,
        terminal: c.terminal(),
    }
}

fn slice_doc(t: &SliceTable) -> SliceDoc {
    let mut arr: Vec<[u32; 3]> = t.arr.iter().map(|(&(h, b), &v)| [h, b, v]).collect();
    let mut term: Vec<[u32; 3]> = t.term.iter().map(|(&(x, b), &v)| [x, b, v]).collect();
    arr.sort_unstable();
    term.sort_unstable();
    SliceDoc { arr, term }
}

fn payload(s: &Structure) -> Value {
    let v = match s {
        Structure::BFrame(f) => serde_json::to_value(frame_doc(f)),
        Structure::BSystem(b) => serde_json::to_value(BSystemDoc {
            frame: frame_doc(&b.frame),
            subst: b.subst.iter().map(hom_doc).collect(),
            weak: b.weak.iter().map(hom_doc).collect(),
            gen: b.gen.clone(),
        }),
        Structure::CSystem(c) => {
            let mut pullbacks: Vec<[u32; 4]> = c.pb.iter().map(|(&(f, g), &(o, q))| [f, g, o, q]).collect();
            pullbacks.sort_unstable();
            serde_json::to_value(CSystemDoc {
                category: cat_doc(&c.cat),
                one: c.one,
                len: c.len.clone(),
                ft: c.ft.clone(),
                proj: c.proj.clone(),
                pullbacks,
            })
        }
        Structure::CESystem(a) => {
            let mut pullbacks: Vec<[u32; 4]> = a.pb.iter().map(|(&(f, x), &(y, q))| [f, x, y, q]).collect();
            pullbacks.sort_unstable();
            serde_json::to_value(CESystemDoc {
                families: cat_doc(&a.fam),
                contexts: cat_doc(&a.base),
                inclusion: a.i.clone(),
                root: a.root,
                pullbacks,
            })
        }
        Structure::ESystem(e) => serde_json::to_value(ESystemDoc {
            category: cat_doc(&e.cat),
            terms: e
                .term_names
                .iter()
                .zip(&e.term_arrow)
                .map(|(n, &a)| TermDoc { name: n.clone(), arrow: a })
                .collect(),
            subst: e.subst.iter().map(slice_doc).collect(),
            weak: e.weak.iter().map(slice_doc).collect(),
            one: e.one.clone(),
            levels: e.strat.as_ref().map(|s| s.levels().to_vec()),
        }),
        Structure::Tree(t) => serde_json::to_value(TreeDoc { levels: t.levels.clone(), parent: t.parent.clone() }),
        Structure::Signature(s) => serde_json::to_value(s),
    };
    v.expect("documents serialize")
}

/// Canonical JSON text: sorted keys, two-space indentation, trailing newline.
pub fn to_json(s: &Structure) -> String {
    let doc = serde_json::json!({ "kind": s.kind(), "version": VERSION, "payload": payload(s) });
    let mut out = serde_json::to_string_pretty(&doc).expect("documents serialize");
    out.push('\n');
    out
}

pub fn save_structure(s: &Structure, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, to_json(s))
}

// ---------------------------------------------------------------------------
// loading

fn check_id(what: &str, id: u32, n: usize) -> Result<u32, IoError> {
    if (id as usize) < n {
        Ok(id)
    } else {
        Err(dangling(format!("{what} {id} (only {n})")))
    }
}

fn frame_from(d: FrameDoc) -> Result<BFrame, IoError> {
    let mut f = BFrame::new(d.height);
    for c in d.contexts {
        f.add_ctx(c.level, c.name, c.ft).map_err(frame_err)?;
    }
    for (i, c) in f.ctxs().collect::<Vec<_>>().into_iter().enumerate() {
        if let Some(p) = f.ft(c) {
            if f.level(p) + 1 != f.level(c) {
                return Err(IoError::Payload { kind: "bframe", msg: format!("context {i}: ft is not one level down") });
            }
        }
    }
    for t in d.terms {
        f.add_tm(t.level, t.name, t.bd).map_err(frame_err)?;
    }
    Ok(f)
}

fn hom_from(d: HomDoc, f: &BFrame) -> Result<BHom, IoError> {
    let mut h = BHom::default();
    for [k, v] in d.ctx {
        h.ctx.insert(check_id("context", k, f.n_ctx())?, check_id("context", v, f.n_ctx())?);
    }
    for [k, v] in d.tm {
        h.tm.insert(check_id("term", k, f.n_tm())?, check_id("term", v, f.n_tm())?);
    }
    Ok(h)
}

fn cat_from(d: CatDoc) -> Result<FinCat, IoError> {
    let (n, m) = (d.objects.len(), d.arrows.len());
    if d.identity.len() != n {
        return Err(IoError::Payload { kind: "category", msg: "one identity per object".into() });
    }
    let mut b = CatBuilder::new();
    for o in d.objects {
        b.object(o);
    }
    for a in d.arrows {
        check_id("object", a.dom, n)?;
        check_id("object", a.cod, n)?;
        b.arrow(a.name, a.dom, a.cod);
    }
    for (o, a) in d.identity.into_iter().enumerate() {
        b.set_identity(o as Obj, check_id("arrow", a, m)?);
    }
    for [f, g, h] in d.compose {
        b.set_compose(check_id("arrow", f, m)?, check_id("arrow", g, m)?, check_id("arrow", h, m)?);
    }
    if let Some(t) = d.terminal {
        b.set_terminal(check_id("object", t, n)?);
    }
    b.build().map_err(|e| IoError::Payload { kind: "category", msg: e.to_string() })
}

fn slice_from(d: SliceDoc, m: usize, nt: usize) -> Result<SliceTable, IoError> {
    let mut t = SliceTable::default();
    for [h, b, v] in d.arr {
        t.arr.insert((check_id("arrow", h, m)?, check_id("arrow", b, m)?), check_id("arrow", v, m)?);
    }
    for [x, b, v] in d.term {
        t.term.insert((check_id("term", x, nt)?, check_id("arrow", b, m)?), check_id("term", v, nt)?);
    }
    Ok(t)
}

fn exact_len<T>(kind: &'static str, what: &str, v: &[T], n: usize) -> Result<(), IoError> {
    if v.len() == n {
        Ok(())
    } else {
        Err(IoError::Payload { kind, msg: format!("{what}: {} entries for {n} ids", v.len()) })
    }
}

fn from_payload(kind: &str, v: Value) -> Result<Structure, IoError> {
    fn de<T: for<'a> Deserialize<'a>>(kind: &'static str, v: Value) -> Result<T, IoError> {
        serde_json::from_value(v).map_err(|e| IoError::Payload { kind, msg: e.to_string() })
    }
    Ok(match kind {
        "bframe" => Structure::BFrame(frame_from(de("bframe", v)?)?),
        "bsystem" => {
            let d: BSystemDoc = de("bsystem", v)?;
            let f = frame_from(d.frame)?;
            exact_len("bsystem", "subst", &d.subst, f.n_tm())?;
            exact_len("bsystem", "weak", &d.weak, f.n_ctx())?;
            exact_len("bsystem", "gen", &d.gen, f.n_ctx())?;
            let subst = d.subst.into_iter().map(|h| hom_from(h, &f)).collect::<Result<_, _>>()?;
            let weak = d.weak.into_iter().map(|h| hom_from(h, &f)).collect::<Result<_, _>>()?;
            for g in d.gen.iter().flatten() {
                check_id("term", *g, f.n_tm())?;
            }
            Structure::BSystem(BSystem { frame: f, subst, weak, gen: d.gen })
        }
        "csystem" => {
            let d: CSystemDoc = de("csystem", v)?;
            let cat = cat_from(d.category)?;
            let (n, m) = (cat.n_objects(), cat.n_arrows());
            exact_len("csystem", "len", &d.len, n)?;
            exact_len("csystem", "ft", &d.ft, n)?;
            exact_len("csystem", "proj", &d.proj, n)?;
            check_id("object", d.one, n)?;
            for &o in &d.ft {
                check_id("object", o, n)?;
            }
            for p in d.proj.iter().flatten() {
                check_id("arrow", *p, m)?;
            }
            let mut pb = FxHashMap::default();
            for [f, g, o, q] in d.pullbacks {
                pb.insert((check_id("arrow", f, m)?, check_id("object", g, n)?), (check_id("object", o, n)?, check_id("arrow", q, m)?));
            }
            Structure::CSystem(CSystem { cat, one: d.one, len: d.len, ft: d.ft, proj: d.proj, pb })
        }
        "cesystem" => {
            let d: CESystemDoc = de("cesystem", v)?;
            let (fam, base) = (cat_from(d.families)?, cat_from(d.contexts)?);
            if fam.obj_names() != base.obj_names() {
                return Err(IoError::Payload { kind: "cesystem", msg: "families and contexts must share objects".into() });
            }
            let (n, fm, bm) = (fam.n_objects(), fam.n_arrows(), base.n_arrows());
            exact_len("cesystem", "inclusion", &d.inclusion, fm)?;
            for &x in &d.inclusion {
                check_id("context morphism", x, bm)?;
            }
            check_id("object", d.root, n)?;
            let mut pb = FxHashMap::default();
            for [f, a, y, q] in d.pullbacks {
                pb.insert(
                    (check_id("context morphism", f, bm)?, check_id("family", a, fm)?),
                    (check_id("family", y, fm)?, check_id("context morphism", q, bm)?),
                );
            }
            Structure::CESystem(CESystem { fam, base, i: d.inclusion, root: d.root, pb })
        }
        "esystem" => {
            let d: ESystemDoc = de("esystem", v)?;
            let cat = cat_from(d.category)?;
            let (m, nt) = (cat.n_arrows(), d.terms.len());
            exact_len("esystem", "subst", &d.subst, nt)?;
            exact_len("esystem", "weak", &d.weak, m)?;
            exact_len("esystem", "one", &d.one, m)?;
            let mut names = Vec::with_capacity(nt);
            let mut arrows = Vec::with_capacity(nt);
            for t in d.terms {
                arrows.push(check_id("arrow", t.arrow, m)?);
                names.push(t.name);
            }
            for x in d.one.iter().flatten() {
                check_id("term", *x, nt)?;
            }
            let subst = d.subst.into_iter().map(|s| slice_from(s, m, nt)).collect::<Result<_, _>>()?;
            let weak = d.weak.into_iter().map(|s| slice_from(s, m, nt)).collect::<Result<_, _>>()?;
            let strat = match d.levels {
                None => None,
                Some(l) => {
                    exact_len("esystem", "levels", &l, cat.n_objects())?;
                    let s = check_stratification(&cat, &l)
                        .map_err(|e| IoError::Payload { kind: "esystem", msg: format!("levels: {e}") })?;
                    Some(s)
                }
            };
            Structure::ESystem(ESystem::new(cat, names, arrows, subst, weak, d.one, strat))
        }
        "tree" => {
            let d: TreeDoc = de("tree", v)?;
            let t = RootedTree { levels: d.levels, parent: d.parent };
            t.validate().map_err(|e| IoError::Payload { kind: "tree", msg: e.to_string() })?;
            Structure::Tree(t)
        }
        "signature" => Structure::Signature(de("signature", v)?),
        other => return Err(IoError::UnknownKind(other.to_string())),
    })
}

pub fn from_json(text: &str) -> Result<Structure, IoError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| IoError::Parse { line: e.line(), col: e.column(), msg: e.to_string() })?;
    let field = |k: &str| doc.get(k).ok_or_else(|| IoError::Parse { line: 1, col: 1, msg: format!("missing `{k}`") });
    let kind = field("kind")?.as_str().ok_or_else(|| IoError::Parse { line: 1, col: 1, msg: "`kind` must be a string".into() })?;
    if !KINDS.contains(&kind) {
        return Err(IoError::UnknownKind(kind.to_string()));
    }
    let version = field("version")?.as_u64().ok_or_else(|| IoError::Parse { line: 1, col: 1, msg: "`version` must be a natural number".into() })?;
    if version != u64::from(VERSION) {
        return Err(IoError::Version { found: version.min(u64::from(u32::MAX)) as u32 });
    }
    from_payload(kind, field("payload")?.clone())
}

pub fn load_structure(path: &Path) -> Result<Structure, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read { path: path.display().to_string(), source })?;
    from_json(&text)
}

/// Tabulates any E-system for saving.
pub fn esystem_of(e: &dyn ESys) -> Structure {
    Structure::ESystem(ESystem::materialize(e))
}
