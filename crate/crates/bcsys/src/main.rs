use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use bcsys::bsys::{build_finset_bsystem, validate_bframe, validate_bsystem, validate_partial_bsystem, BSystem};
use bcsys::cat::{free_cat_of_tree, stratify};
use bcsys::cesys::{build_finset_cesystem, validate_cesystem, CEFlags, CESystem};
use bcsys::csys::{validate_csystem, CSystem};
use bcsys::esys::{check_pairing, validate_esystem, ESystem, GroupE, NatE};
use bcsys::io::{esystem_of, from_json, to_json, Structure};
use bcsys::report::{Check, Report};
use bcsys::syntax::{build_syntactic_bframe, parse_signature};
use bcsys::xlate::{b_to_e, c_to_ce, ce_to_c, ce_to_e, comp_iso, counit, e_to_b, e_to_ce, roundtrip_b, roundtrip_c, unit, XlateError};

#[derive(Parser)]
#[command(name = "bcsys", version, about = "Check and translate finite B-, C-, E- and CE-systems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a built-in structure.
    Example {
        name: ExampleName,
        #[arg(long)]
        height: Option<u32>,
        /// Signature file for `syntactic`.
        #[arg(long)]
        sig: Option<PathBuf>,
        /// Size bound for `syntactic`.
        #[arg(long, default_value_t = 2)]
        bound: u32,
        #[arg(short, long, default_value = "-")]
        output: PathBuf,
    },
    /// Validate a structure and print the per-law report.
    Check {
        file: PathBuf,
        /// Require the document to be of this kind.
        #[arg(long = "as")]
        as_kind: Option<String>,
        #[arg(long)]
        rooted: bool,
        #[arg(long)]
        stratified: bool,
        /// Allow B-system substitution and weakening to be undefined.
        #[arg(long)]
        partial: bool,
    },
    /// Translate a B-, C-, E- or CE-system.
    Translate {
        #[arg(long)]
        to: Target,
        file: PathBuf,
        #[arg(short, long, default_value = "-")]
        output: PathBuf,
    },
    /// Run the round trip through the other side and verify the isomorphism.
    Roundtrip { file: PathBuf },
    /// Check that term extension is a bijection onto composite terms.
    Pair { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExampleName {
    FinsetB,
    FinsetCe,
    NatE,
    GroupS3,
    Syntactic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    B,
    C,
    E,
    Ce,
}

fn max_height() -> u32 {
    std::env::var("BCSYS_MAX_HEIGHT").ok().and_then(|v| v.parse().ok()).unwrap_or(8)
}

fn capped(h: u32) -> Result<u32> {
    let cap = max_height();
    if h > cap {
        return Err(anyhow!("height {h} exceeds BCSYS_MAX_HEIGHT={cap}"));
    }
    Ok(h)
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading standard input")?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).with_context(|| path.display().to_string())
    }
}

fn load(path: &Path) -> Result<Structure> {
    from_json(&read_input(path)?).map_err(anyhow::Error::from)
}

fn write_output(path: &Path, text: &str) -> Result<()> {
    if path == Path::new("-") {
        std::io::stdout().write_all(text.as_bytes())?;
    } else {
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn example(name: ExampleName, height: Option<u32>, sig: Option<&Path>, bound: u32) -> Result<Structure> {
    Ok(match name {
        ExampleName::FinsetB => Structure::BSystem(build_finset_bsystem(capped(height.unwrap_or(3))?)),
        ExampleName::FinsetCe => Structure::CESystem(build_finset_cesystem(capped(height.unwrap_or(2))?)),
        ExampleName::NatE => esystem_of(&NatE::new(capped(height.unwrap_or(3))?)),
        ExampleName::GroupS3 => esystem_of(&GroupE::s3()),
        ExampleName::Syntactic => {
            let path = sig.ok_or_else(|| anyhow!("`syntactic` needs --sig FILE"))?;
            let s = parse_signature(&read_input(path)?)?;
            let f = build_syntactic_bframe(&s, capped(height.unwrap_or(3))?, bound)?;
            Structure::BSystem(f.structure().0)
        }
    })
}

fn check(s: &Structure, rooted: bool, stratified: bool, partial: bool) -> Report {
    match s {
        Structure::BFrame(f) => validate_bframe(f),
        Structure::BSystem(b) if partial => validate_partial_bsystem(b),
        Structure::BSystem(b) => validate_bsystem(b),
        Structure::CSystem(c) => validate_csystem(c),
        Structure::CESystem(a) => validate_cesystem(a, CEFlags { rooted, stratified }),
        Structure::ESystem(e) => validate_esystem(e),
        Structure::Tree(t) => {
            let mut r = Report::new();
            let (cat, _) = free_cat_of_tree(t);
            let mut c = Check::new("stratifies");
            let res = stratify(&cat);
            c.test(res.is_ok(), || format!("{:?}", res.err()));
            c.finish_into(&mut r);
            r
        }
        Structure::Signature(_) => Report::new(),
    }
}

fn xlate(e: XlateError) -> anyhow::Error {
    anyhow!(LawFailure).context(e.to_string())
}

/// The input is well formed but fails a law a translation needs.
#[derive(Debug)]
struct LawFailure;
impl std::fmt::Display for LawFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("law failure")
    }
}
impl std::error::Error for LawFailure {}

fn to_b(s: &Structure) -> Result<BSystem> {
    Ok(match s {
        Structure::BSystem(b) => b.clone(),
        Structure::ESystem(e) => e_to_b(e).map_err(xlate)?.b,
        Structure::CESystem(a) => e_to_b(&ce_to_e(a).e).map_err(xlate)?.b,
        Structure::CSystem(c) => e_to_b(&ce_to_e(&c_to_ce(c).ce).e).map_err(xlate)?.b,
        other => bail!("cannot translate a {}", other.kind()),
    })
}

fn to_e(s: &Structure) -> Result<ESystem> {
    Ok(match s {
        Structure::ESystem(e) => e.clone(),
        Structure::BSystem(b) => ESystem::materialize(&b_to_e(b)),
        Structure::CESystem(a) => ce_to_e(a).e,
        Structure::CSystem(c) => ce_to_e(&c_to_ce(c).ce).e,
        other => bail!("cannot translate a {}", other.kind()),
    })
}

fn to_ce(s: &Structure) -> Result<CESystem> {
    Ok(match s {
        Structure::CESystem(a) => a.clone(),
        Structure::CSystem(c) => c_to_ce(c).ce,
        Structure::ESystem(e) => e_to_ce(e).map_err(xlate)?.ce,
        Structure::BSystem(b) => e_to_ce(&b_to_e(b)).map_err(xlate)?.ce,
        other => bail!("cannot translate a {}", other.kind()),
    })
}

fn to_c(s: &Structure) -> Result<CSystem> {
    match s {
        Structure::CSystem(c) => Ok(c.clone()),
        other => ce_to_c(&to_ce(other)?).map_err(xlate),
    }
}

fn roundtrip(s: &Structure) -> Result<Report> {
    let mut r = Report::new();
    match s {
        Structure::BSystem(b) => {
            let rt = roundtrip_b(b).map_err(xlate)?;
            eprintln!("round trip kept levels ≤ {}", rt.target.frame.height());
            r.extend(rt.iso.report);
        }
        Structure::CSystem(c) => {
            let rt = roundtrip_c(c).map_err(xlate)?;
            eprintln!("round trip kept lengths ≤ {}", rt.target.height());
            r.extend(rt.iso.report);
        }
        Structure::ESystem(e) => {
            let u = unit(e).map_err(xlate)?;
            eprintln!("unit on levels ≤ {}", u.ce.m);
            r.extend_prefixed("unit/", u.report);
        }
        Structure::CESystem(a) => {
            let (_, _, w) = comp_iso(a).map_err(xlate)?;
            r.extend_prefixed("comp/", w.report);
            let c = counit(a).map_err(xlate)?;
            r.extend_prefixed("counit/", c.report);
        }
        other => bail!("no round trip for a {}", other.kind()),
    }
    Ok(r)
}

fn finish(r: &Report) -> ExitCode {
    print!("{r}");
    if r.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Example { name, height, sig, bound, output } => {
            let s = example(name, height, sig.as_deref(), bound)?;
            write_output(&output, &to_json(&s))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Check { file, as_kind, rooted, stratified, partial } => {
            let s = load(&file)?;
            if let Some(k) = as_kind {
                if k != s.kind() {
                    bail!("expected a {k} document, found {}", s.kind());
                }
            }
            Ok(finish(&check(&s, rooted, stratified, partial)))
        }
        Cmd::Translate { to, file, output } => {
            let s = load(&file)?;
            let out = match to {
                Target::B => Structure::BSystem(to_b(&s)?),
                Target::E => Structure::ESystem(to_e(&s)?),
                Target::Ce => Structure::CESystem(to_ce(&s)?),
                Target::C => Structure::CSystem(to_c(&s)?),
            };
            write_output(&output, &to_json(&out))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Roundtrip { file } => Ok(finish(&roundtrip(&load(&file)?)?)),
        Cmd::Pair { file } => match load(&file)? {
            Structure::ESystem(e) => Ok(finish(&check_pairing(&e))),
            other => bail!("`pair` needs an esystem, found {}", other.kind()),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<LawFailure>()) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
