use bcsys::bsys::build_finset_bsystem;
use bcsys::cat::RootedTree;
use bcsys::cesys::build_finset_cesystem;
use bcsys::esys::{ESystem, GroupE, NatE};
use bcsys::io::*;
use bcsys::syntax::{build_syntactic_bframe, parse_signature};
use bcsys::xlate::ce_to_c;

fn built_ins() -> Vec<Structure> {
    let sig = parse_signature("type U; type El(tm); type Pi(ty, tm^1.ty)").unwrap();
    let syn = build_syntactic_bframe(&sig, 2, 2).unwrap();
    vec![
        Structure::BFrame(build_finset_bsystem(3).frame),
        Structure::BSystem(build_finset_bsystem(3)),
        Structure::BSystem(syn.structure().0),
        Structure::CSystem(ce_to_c(&build_finset_cesystem(2)).unwrap()),
        Structure::CESystem(build_finset_cesystem(2)),
        esystem_of(&NatE::new(3)),
        esystem_of(&GroupE::s3()),
        Structure::Tree(RootedTree::chain(3)),
        Structure::Signature(sig),
    ]
}

#[test]
fn save_load_is_the_identity() {
    let dir = tempfile::tempdir().unwrap();
    for s in built_ins() {
        let text = to_json(&s);
        let back = from_json(&text).unwrap();
        assert_eq!(back, s, "{}", s.kind());
        // byte-for-byte stable
        assert_eq!(to_json(&back), text);
        let path = dir.path().join(format!("{}.json", s.kind()));
        save_structure(&s, &path).unwrap();
        assert_eq!(load_structure(&path).unwrap(), s);
    }
}

#[test]
fn keys_are_sorted() {
    let text = to_json(&Structure::BSystem(build_finset_bsystem(1)));
    let (k, p, v) = (text.find("\"kind\"").unwrap(), text.find("\"payload\"").unwrap(), text.find("\"version\"").unwrap());
    assert!(k < p && p < v);
}

#[test]
fn materialized_e_system_keeps_its_levels() {
    let e = ESystem::materialize(&NatE::new(2));
    let Structure::ESystem(back) = from_json(&to_json(&Structure::ESystem(e.clone()))).unwrap() else { panic!() };
    assert_eq!(back.strat, e.strat);
}

#[test]
fn rejects_malformed_documents() {
    let good = to_json(&Structure::BFrame(build_finset_bsystem(2).frame));
    let mut v: serde_json::Value = serde_json::from_str(&good).unwrap();
    v["payload"]["terms"][0]["bd"] = serde_json::json!(99);
    assert!(matches!(from_json(&v.to_string()), Err(IoError::Dangling(_))));

    let mut v: serde_json::Value = serde_json::from_str(&good).unwrap();
    v["kind"] = serde_json::json!("widget");
    assert!(matches!(from_json(&v.to_string()), Err(IoError::UnknownKind(k)) if k == "widget"));

    let mut v: serde_json::Value = serde_json::from_str(&good).unwrap();
    v["version"] = serde_json::json!(7);
    assert!(matches!(from_json(&v.to_string()), Err(IoError::Version { found: 7 })));

    match from_json("{\n  \"kind\": \"bframe\",\n  oops\n}") {
        Err(IoError::Parse { line: 3, .. }) => {}
        other => panic!("{other:?}"),
    }

    let c = to_json(&Structure::CSystem(ce_to_c(&build_finset_cesystem(1)).unwrap()));
    let mut v: serde_json::Value = serde_json::from_str(&c).unwrap();
    v["payload"]["pullbacks"][0][3] = serde_json::json!(1000);
    assert!(matches!(from_json(&v.to_string()), Err(IoError::Dangling(_))));
}
