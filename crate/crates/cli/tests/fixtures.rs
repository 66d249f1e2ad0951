use std::path::PathBuf;
use std::process::Command;

use posheaf::io::Document;

fn fixtures() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .expect("fixtures directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    out.sort();
    out
}

fn posheaf(args: &[&str]) -> (Option<i32>, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_posheaf")).args(args).output().unwrap();
    (o.status.code(), String::from_utf8(o.stdout).unwrap())
}

#[test]
fn fixtures_round_trip_byte_for_byte() {
    let files = fixtures();
    assert!(files.len() >= 8);
    for path in files {
        let text = std::fs::read_to_string(&path).unwrap();
        let doc = Document::from_json(&text, true).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(doc.to_json(), text, "{}", path.display());
    }
}

#[test]
fn fixtures_match_their_generators() {
    let cases: [(&str, &[&str]); 7] = [
        ("b2.json", &["gen", "boolean", "2"]),
        ("chain3.json", &["gen", "chain", "3"]),
        (
            "constant-b2-chain2.json",
            &["gen", "constant-bundle", "--base", "boolean", "--base-size", "2", "--fiber", "2"],
        ),
        ("i1.json", &["gen", "i1", "--len", "2"]),
        ("cube.json", &["gen", "cube"]),
        ("random-seed4.json", &["--seed", "4", "gen", "random", "--max-base", "5"]),
        ("random-sheaf-seed1.json", &["--seed", "1", "gen", "random-sheaf", "--elements", "5"]),
    ];
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    for (name, args) in cases {
        let (code, out) = posheaf(args);
        assert_eq!(code, Some(0));
        assert_eq!(out, std::fs::read_to_string(dir.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn bundle_fixtures_certify() {
    for path in fixtures() {
        let text = std::fs::read_to_string(&path).unwrap();
        if Document::from_json(&text, true).unwrap().kind() != "bundle" {
            continue;
        }
        let (code, out) = posheaf(&["verify-main", path.to_str().unwrap()]);
        assert_eq!(code, Some(0), "{}: {out}", path.display());
    }
}
