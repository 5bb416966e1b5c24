//! Raw syntax over a restricted two-sorted binding signature, and the
//! B-frame of telescopes and typed terms it generates.
//!
//! Variables are de Bruijn indices (innermost = 0) and only term variables
//! exist; a former may bind term variables in any of its arguments.  The
//! size of an expression is its number of formers.

use std::fmt;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bsys::{validate_partial_bsystem, BError, BFrame, BStructure, BSystem, Ctx, Tm};
use crate::report::{Check, Report};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sort {
    Ty,
    Tm,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Ty => "ty",
            Sort::Tm => "tm",
        })
    }
}

/// An argument place: its sort and how many term variables it binds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArgSpec {
    pub sort: Sort,
    pub binds: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Former {
    pub name: String,
    pub sort: Sort,
    pub args: Vec<ArgSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BindingSignature {
    pub formers: Vec<Former>,
}

impl BindingSignature {
    pub fn of_sort(&self, s: Sort) -> impl Iterator<Item = (u32, &Former)> {
        self.formers.iter().enumerate().filter(move |(_, f)| f.sort == s).map(|(i, f)| (i as u32, f))
    }
}

impl fmt::Display for BindingSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fm in &self.formers {
            write!(f, "{} {}", if fm.sort == Sort::Ty { "type" } else { "term" }, fm.name)?;
            if !fm.args.is_empty() {
                let args: Vec<String> = fm
                    .args
                    .iter()
                    .map(|a| if a.binds == 0 { a.sort.to_string() } else { format!("tm^{}.{}", a.binds, a.sort) })
                    .collect();
                write!(f, "({})", args.join(", "))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: type variables cannot be bound (`{spelling}`)")]
    BindsType { line: usize, col: usize, spelling: String },
    #[error("{line}:{col}: former `{name}` declared twice")]
    Duplicate { line: usize, col: usize, name: String },
}

/// Parses `type Name(arg, …)` / `term Name(arg, …)` declarations separated
/// by newlines or `;`, with `#` comments; `arg ::= ty | tm | tm^k.ty | tm^k.tm`.
pub fn parse_signature(text: &str) -> Result<BindingSignature, SyntaxError> {
    let mut sig = BindingSignature::default();
    for (ln, line) in text.lines().enumerate() {
        let code = line.split('#').next().unwrap_or("");
        let mut off = 0;
        for stmt in code.split(';') {
            parse_decl(stmt, ln + 1, off, &mut sig)?;
            off += stmt.chars().count() + 1;
        }
    }
    Ok(sig)
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
    line: usize,
    base: usize,
}

impl<'a> Cursor<'a> {
    fn col(&self) -> usize {
        self.base + self.s[..self.pos].chars().count() + 1
    }
    fn err(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError::Parse { line: self.line, col: self.col(), msg: msg.into() }
    }
    fn ws(&mut self) {
        let rest = &self.s[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }
    fn eat(&mut self, c: char) -> bool {
        self.ws();
        if self.s[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }
    fn ident(&mut self) -> Option<&'a str> {
        self.ws();
        let rest = &self.s[self.pos..];
        let n = rest.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(rest.len());
        if n == 0 || rest.starts_with(|c: char| c.is_ascii_digit()) {
            return None;
        }
        self.pos += n;
        Some(&rest[..n])
    }
    fn number(&mut self) -> Option<u32> {
        self.ws();
        let rest = &self.s[self.pos..];
        let n = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        let v = rest[..n].parse().ok()?;
        self.pos += n;
        Some(v)
    }
    fn at_end(&mut self) -> bool {
        self.ws();
        self.pos == self.s.len()
    }
}

fn parse_sort(cur: &mut Cursor) -> Result<Sort, SyntaxError> {
    match cur.ident() {
        Some("ty") => Ok(Sort::Ty),
        Some("tm") => Ok(Sort::Tm),
        _ => Err(cur.err("expected `ty` or `tm`")),
    }
}

fn parse_arg(cur: &mut Cursor) -> Result<ArgSpec, SyntaxError> {
    let (line, col) = (cur.line, { cur.ws(); cur.col() });
    let start = cur.pos;
    let sort = parse_sort(cur)?;
    if !cur.eat('^') {
        return Ok(ArgSpec { sort, binds: 0 });
    }
    let binds = cur.number().ok_or_else(|| cur.err("expected a binder count"))?;
    if !cur.eat('.') {
        return Err(cur.err("expected `.` after the binder count"));
    }
    let body = parse_sort(cur)?;
    if sort == Sort::Ty {
        return Err(SyntaxError::BindsType { line, col, spelling: cur.s[start..cur.pos].trim().to_string() });
    }
    Ok(ArgSpec { sort: body, binds })
}

fn parse_decl(stmt: &str, line: usize, base: usize, sig: &mut BindingSignature) -> Result<(), SyntaxError> {
    let mut cur = Cursor { s: stmt, pos: 0, line, base };
    if cur.at_end() {
        return Ok(());
    }
    let sort = match cur.ident() {
        Some("type") => Sort::Ty,
        Some("term") => Sort::Tm,
        _ => return Err(cur.err("expected `type` or `term`")),
    };
    cur.ws();
    let col = cur.col();
    let name = cur.ident().ok_or_else(|| cur.err("expected a former name"))?.to_string();
    let mut args = Vec::new();
    if cur.eat('(') && !cur.eat(')') {
        loop {
            args.push(parse_arg(&mut cur)?);
            if cur.eat(')') {
                break;
            }
            if !cur.eat(',') {
                return Err(cur.err("expected `,` or `)`"));
            }
        }
    }
    if !cur.at_end() {
        return Err(cur.err("unexpected trailing input"));
    }
    if sig.formers.iter().any(|f| f.name == name) {
        return Err(SyntaxError::Duplicate { line, col, name });
    }
    sig.formers.push(Former { name, sort, args });
    Ok(())
}

// ---------------------------------------------------------------------------
// raw expressions

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RawExpr {
    Var(u32),
    /// A former applied to its arguments, each with its binding depth.
    Form { former: u32, args: Vec<(u32, RawExpr)> },
}

impl RawExpr {
    pub fn size(&self) -> u32 {
        match self {
            RawExpr::Var(_) => 0,
            RawExpr::Form { args, .. } => 1 + args.iter().map(|(_, a)| a.size()).sum::<u32>(),
        }
    }

    pub fn sort(&self, sig: &BindingSignature) -> Sort {
        match self {
            RawExpr::Var(_) => Sort::Tm,
            RawExpr::Form { former, .. } => sig.formers[*former as usize].sort,
        }
    }

    /// Adds `d` to every free index `≥ cutoff`.
    pub fn shift(&self, cutoff: u32, d: u32) -> RawExpr {
        match self {
            RawExpr::Var(i) => RawExpr::Var(if *i >= cutoff { i + d } else { *i }),
            RawExpr::Form { former, args } => RawExpr::Form {
                former: *former,
                args: args.iter().map(|(k, a)| (*k, a.shift(cutoff + k, d))).collect(),
            },
        }
    }

    /// Replaces index `j` by `s` (which lives outside the `j` inner variables)
    /// and closes the gap.
    pub fn subst(&self, j: u32, s: &RawExpr) -> RawExpr {
        match self {
            RawExpr::Var(i) if *i < j => RawExpr::Var(*i),
            RawExpr::Var(i) if *i == j => s.shift(0, j),
            RawExpr::Var(i) => RawExpr::Var(i - 1),
            RawExpr::Form { former, args } => RawExpr::Form {
                former: *former,
                args: args.iter().map(|(k, a)| (*k, a.subst(j + k, s))).collect(),
            },
        }
    }

    pub fn render(&self, sig: &BindingSignature) -> String {
        match self {
            RawExpr::Var(i) => i.to_string(),
            RawExpr::Form { former, args } => {
                let name = &sig.formers[*former as usize].name;
                if args.is_empty() {
                    return name.clone();
                }
                let parts: Vec<String> = args
                    .iter()
                    .map(|(k, a)| if *k == 0 { a.render(sig) } else { format!("^{k}.{}", a.render(sig)) })
                    .collect();
                format!("{name}({})", parts.join(","))
            }
        }
    }
}

/// Memoized exact-size enumeration.
struct Enumerator<'a> {
    sig: &'a BindingSignature,
    memo: FxHashMap<(Sort, u32, u32), Vec<RawExpr>>,
}

impl Enumerator<'_> {
    fn exact(&mut self, sort: Sort, n: u32, size: u32) -> Vec<RawExpr> {
        if let Some(v) = self.memo.get(&(sort, n, size)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if size == 0 {
            if sort == Sort::Tm {
                out.extend((0..n).map(RawExpr::Var));
            }
        } else {
            let sig = self.sig;
            for (i, f) in sig.of_sort(sort) {
                for split in compositions(size - 1, f.args.len()) {
                    let mut acc: Vec<Vec<(u32, RawExpr)>> = vec![vec![]];
                    for (a, &s) in f.args.iter().zip(&split) {
                        let choices = self.exact(a.sort, n + a.binds, s);
                        acc = acc
                            .into_iter()
                            .flat_map(|pre| {
                                choices.iter().map(move |c| {
                                    let mut v = pre.clone();
                                    v.push((a.binds, c.clone()));
                                    v
                                })
                            })
                            .collect();
                    }
                    out.extend(acc.into_iter().map(|args| RawExpr::Form { former: i, args }));
                }
            }
        }
        self.memo.insert((sort, n, size), out.clone());
        out
    }
}

/// Ordered ways of writing `total` as a sum of `parts` naturals.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All types and terms over `n` variables with at most `bound` formers,
/// ordered by size, then former, then arguments.
pub fn enumerate_raw(sig: &BindingSignature, n: u32, bound: u32) -> (Vec<RawExpr>, Vec<RawExpr>) {
    let mut en = Enumerator { sig, memo: FxHashMap::default() };
    let mut types = Vec::new();
    let mut terms = Vec::new();
    for s in 0..=bound {
        types.extend(en.exact(Sort::Ty, n, s));
        terms.extend(en.exact(Sort::Tm, n, s));
    }
    (types, terms)
}

// ---------------------------------------------------------------------------
// the syntactic B-frame

/// Contexts are telescopes `(A_0, …, A_{n−1})` with `A_i` a type over `i`
/// variables; term elements of level `n+1` are triples `(Γ, t, A)` with `t`
/// a term and `A` a type over `n` variables, and boundary `Γ.A`.
#[derive(Clone, Debug)]
pub struct SyntacticBFrame {
    pub sig: BindingSignature,
    pub bound: u32,
    pub frame: BFrame,
    /// `types[n]`, `terms[n]`: the enumerated sets over `n` variables.
    pub types: Vec<Vec<RawExpr>>,
    pub terms: Vec<Vec<RawExpr>>,
    pub telescope: Vec<Vec<RawExpr>>,
    pub element: Vec<(Ctx, RawExpr, RawExpr)>,
    ctx_ix: FxHashMap<Vec<RawExpr>, Ctx>,
    tm_ix: FxHashMap<(Ctx, RawExpr, RawExpr), Tm>,
}

pub fn build_syntactic_bframe(sig: &BindingSignature, height: u32, bound: u32) -> Result<SyntacticBFrame, BError> {
    let mut types = Vec::new();
    let mut terms = Vec::new();
    for n in 0..=height {
        let (ty, tm) = enumerate_raw(sig, n, bound);
        types.push(ty);
        terms.push(tm);
    }
    let render_ctx = |tel: &[RawExpr]| {
        let parts: Vec<String> = tel.iter().map(|a| a.render(sig)).collect();
        format!("({})", parts.join(", "))
    };
    let mut frame = BFrame::new(height);
    let mut telescope: Vec<Vec<RawExpr>> = Vec::new();
    let mut ctx_ix = FxHashMap::default();
    let root = frame.add_ctx(0, "()", None)?;
    telescope.push(vec![]);
    ctx_ix.insert(vec![], root);
    let mut level = vec![root];
    for n in 0..height {
        let mut next = Vec::new();
        for &g in &level {
            for a in &types[n as usize] {
                let mut tel = telescope[g as usize].clone();
                tel.push(a.clone());
                let id = frame.add_ctx(n + 1, render_ctx(&tel), Some(g))?;
                ctx_ix.insert(tel.clone(), id);
                telescope.push(tel);
                next.push(id);
            }
        }
        level = next;
    }
    let mut element = Vec::new();
    let mut tm_ix = FxHashMap::default();
    for n in 0..height {
        for g in frame.ctxs().filter(|&g| frame.level(g) == n).collect::<Vec<_>>() {
            for a in &types[n as usize] {
                let mut tel = telescope[g as usize].clone();
                tel.push(a.clone());
                let bd = ctx_ix[&tel];
                for t in &terms[n as usize] {
                    let name = format!("{} ⊢ {} : {}", render_ctx(&telescope[g as usize]), t.render(sig), a.render(sig));
                    let id = frame.add_tm(n + 1, name, bd)?;
                    tm_ix.insert((g, t.clone(), a.clone()), id);
                    element.push((g, t.clone(), a.clone()));
                }
            }
        }
    }
    Ok(SyntacticBFrame { sig: sig.clone(), bound, frame, types, terms, telescope, element, ctx_ix, tm_ix })
}

/// How often each structure map left the enumerated bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Partiality {
    pub subst_defined: u64,
    pub subst_out_of_bound: u64,
}

impl SyntacticBFrame {
    pub fn ctx_of(&self, tel: &[RawExpr]) -> Option<Ctx> {
        self.ctx_ix.get(tel).copied()
    }

    pub fn tm_of(&self, g: Ctx, t: &RawExpr, a: &RawExpr) -> Option<Tm> {
        self.tm_ix.get(&(g, t.clone(), a.clone())).copied()
    }

    /// Substitution of the last variable, weakening by index shift, and the
    /// last variable as generic element.
    pub fn structure(&self) -> (BSystem, Partiality) {
        let b = BSystem::tabulate(self.frame.clone(), self);
        let mut p = Partiality::default();
        for x in self.frame.tms() {
            let bx = self.frame.bd(x);
            let s = b.s(x);
            for y in self.frame.slice_ctx(bx) {
                if s.at(y).is_some() {
                    p.subst_defined += 1;
                } else {
                    p.subst_out_of_bound += 1;
                }
            }
        }
        (b, p)
    }

    /// Validates the structure; substitutions leaving the bound are skipped
    /// by the axiom checks and counted in a `within-bound` entry.
    pub fn structure_report(&self) -> (BSystem, Report) {
        let (b, p) = self.structure();
        let mut r = validate_partial_bsystem(&b);
        let mut c = Check::new("within-bound");
        for _ in 0..p.subst_defined {
            c.ok();
        }
        for _ in 0..p.subst_out_of_bound {
            c.skip();
        }
        c.finish_into(&mut r);
        (b, r)
    }

    fn split_at(&self, y: Ctx, n: usize) -> (&[RawExpr], &[RawExpr]) {
        self.telescope[y as usize].split_at(n)
    }

    fn elem_split(&self, t: Tm, n: usize) -> (&[RawExpr], u32, &RawExpr, &RawExpr) {
        let (g, s, a) = &self.element[t as usize];
        let tel = &self.telescope[*g as usize];
        (&tel[..n], (tel.len() - n) as u32, s, a)
    }
}

impl BStructure for SyntacticBFrame {
    fn subst_ctx(&self, x: Tm, y: Ctx) -> Option<Ctx> {
        let (g, t, _) = &self.element[x as usize];
        let n = self.telescope[*g as usize].len();
        let (pre, rest) = self.split_at(y, n);
        let mut tel = pre.to_vec();
        tel.extend(rest[1..].iter().enumerate().map(|(j, b)| b.subst(j as u32, t)));
        self.ctx_of(&tel)
    }

    fn subst_tm(&self, x: Tm, u: Tm) -> Option<Tm> {
        let (g, t, _) = &self.element[x as usize];
        let n = self.telescope[*g as usize].len();
        let (gu, s, a) = &self.element[u as usize];
        let m = self.telescope[*gu as usize].len() - n - 1;
        let g2 = self.subst_ctx(x, *gu)?;
        self.tm_of(g2, &s.subst(m as u32, t), &a.subst(m as u32, t))
    }

    fn weak_ctx(&self, big_x: Ctx, y: Ctx) -> Option<Ctx> {
        let xt = &self.telescope[big_x as usize];
        let n = xt.len() - 1;
        let (pre, rest) = self.split_at(y, n);
        let mut tel = pre.to_vec();
        tel.push(xt[n].clone());
        tel.extend(rest.iter().enumerate().map(|(j, b)| b.shift(j as u32, 1)));
        self.ctx_of(&tel)
    }

    fn weak_tm(&self, big_x: Ctx, u: Tm) -> Option<Tm> {
        let n = self.telescope[big_x as usize].len() - 1;
        let (_, m, s, a) = self.elem_split(u, n);
        let g2 = self.weak_ctx(big_x, self.element[u as usize].0)?;
        self.tm_of(g2, &s.shift(m, 1), &a.shift(m, 1))
    }

    fn gen(&self, big_x: Ctx) -> Option<Tm> {
        let a = self.telescope[big_x as usize].last()?;
        self.tm_of(big_x, &RawExpr::Var(0), &a.shift(0, 1))
    }
}
