use std::io::Write;
use std::process::{Command, Output, Stdio};

fn bcsys(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_bcsys"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn finset_b_checks_clean() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("b.json");
    let b = b.to_str().unwrap();
    assert!(bcsys(&["example", "finset-b", "--height", "3", "-o", b], None).status.success());
    let o = bcsys(&["check", b], None);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for k in 1..=5 {
        assert!(out.contains(&format!("PASS   axiom-{k} ")), "{out}");
    }
}

#[test]
fn group_fails_three_axioms_and_the_terminal() {
    let g = stdout(&bcsys(&["example", "group-s3"], None));
    let o = bcsys(&["check", "-", "--as", "esystem"], Some(&g));
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let bad: Vec<&str> = out
        .lines()
        .filter(|l| !l.starts_with("PASS"))
        .map(|l| l.split_whitespace().nth(1).unwrap())
        .collect();
    assert_eq!(bad, ["terminal", "E-axiom-3", "E-axiom-4", "E-axiom-5"]);
}

#[test]
fn translate_then_check() {
    let b = stdout(&bcsys(&["example", "finset-b", "--height", "3"], None));
    for (to, kind, flags) in [("e", "esystem", vec![]), ("ce", "cesystem", vec!["--rooted", "--stratified"]), ("c", "csystem", vec![]), ("b", "bsystem", vec![])] {
        let o = bcsys(&["translate", "--to", to, "-"], Some(&b));
        assert!(o.status.success(), "{to}");
        let mut args = vec!["check", "-", "--as", kind];
        args.extend(flags);
        assert_eq!(bcsys(&args, Some(&stdout(&o))).status.code(), Some(0), "{to}");
    }
}

#[test]
fn roundtrip_and_pair() {
    let b = stdout(&bcsys(&["example", "finset-b", "--height", "3"], None));
    assert_eq!(bcsys(&["roundtrip", "-"], Some(&b)).status.code(), Some(0));
    let ce = stdout(&bcsys(&["example", "finset-ce", "--height", "2"], None));
    assert_eq!(bcsys(&["roundtrip", "-"], Some(&ce)).status.code(), Some(0));
    let c = stdout(&bcsys(&["translate", "--to", "c", "-"], Some(&ce)));
    assert_eq!(bcsys(&["roundtrip", "-"], Some(&c)).status.code(), Some(0));
    let n = stdout(&bcsys(&["example", "nat-e", "--height", "3"], None));
    assert_eq!(bcsys(&["roundtrip", "-"], Some(&n)).status.code(), Some(0));
    assert_eq!(bcsys(&["pair", "-"], Some(&n)).status.code(), Some(0));
    // the group has no terminal object, hence no stratification to translate along
    let g = stdout(&bcsys(&["example", "group-s3"], None));
    assert_eq!(bcsys(&["translate", "--to", "b", "-"], Some(&g)).status.code(), Some(1));
}

#[test]
fn syntactic_example() {
    let dir = tempfile::tempdir().unwrap();
    let sig = dir.path().join("sig.txt");
    std::fs::write(&sig, "type U\ntype El(tm)\n").unwrap();
    let o = bcsys(&["example", "syntactic", "--sig", sig.to_str().unwrap(), "--height", "3"], None);
    assert!(o.status.success());
    assert_eq!(bcsys(&["check", "-", "--as", "bsystem"], Some(&stdout(&o))).status.code(), Some(0));
    std::fs::write(&sig, "type Bad(ty^1.ty)\n").unwrap();
    assert_eq!(bcsys(&["example", "syntactic", "--sig", sig.to_str().unwrap()], None).status.code(), Some(2));
}

#[test]
fn malformed_input_exits_2() {
    assert_eq!(bcsys(&["check", "-"], Some("{\"kind\":\"widget\",\"version\":1,\"payload\":{}}")).status.code(), Some(2));
    assert_eq!(bcsys(&["check", "-"], Some("not json")).status.code(), Some(2));
    assert_eq!(bcsys(&["check", "/nonexistent/file.json"], None).status.code(), Some(2));
    assert_eq!(bcsys(&["frobnicate"], None).status.code(), Some(2));
    let b = stdout(&bcsys(&["example", "finset-b", "--height", "2"], None));
    assert_eq!(bcsys(&["check", "-", "--as", "csystem"], Some(&b)).status.code(), Some(2));
}

#[test]
fn height_cap() {
    let o = Command::new(env!("CARGO_BIN_EXE_bcsys"))
        .args(["example", "finset-b", "--height", "4"])
        .env("BCSYS_MAX_HEIGHT", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("BCSYS_MAX_HEIGHT"));
}
