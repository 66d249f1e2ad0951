use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use posheaf::io::Document;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_posheaf"))
}

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    run_with(bin(), args, stdin)
}

fn run_with(mut cmd: Command, args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = cmd
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary starts");
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn gen(args: &[&str]) -> String {
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    let o = run(&full, None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("report is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn boolean_base_witness_is_first_atom() {
    let o = run(&["admissible"], Some(&gen(&["boolean", "2"])));
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    assert_eq!(r["data"]["witness"], "{1}");
    assert_eq!(r["checks"]["recursively_admissible"], true);
    assert_eq!(r["input_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn antichain_base_violates_admissibility() {
    let o = run(&["admissible"], Some(&gen(&["antichain", "2"])));
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(report(&o)["verdict"], "fail");
}

#[test]
fn constant_bundle_and_cube_pass_verify_main() {
    for fixture in [gen(&["constant-bundle"]), gen(&["cube"]), gen(&["i1", "--len", "2", "--dim", "2"])] {
        let o = run(&["verify-main"], Some(&fixture));
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        let r = report(&o);
        assert_eq!(r["checks"]["certificate"], true);
        assert!(r.get("timing_ms").is_none());
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    let o = run(&["validate", missing.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(report(&o)["exit_code"], 3);

    let o = run(&["validate"], Some("{ not json"));
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["verify-main"], Some(&gen(&["chain", "3"])));
    assert_eq!(o.status.code(), Some(1));
    assert!(report(&o)["error"].as_str().unwrap().contains("expected a bundle"));

    let o = run(&["--out", dir.path().join("no/such/dir.json").to_str().unwrap(), "gen", "cube"], None);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn generated_documents_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures: [&[&str]; 7] = [
        &["boolean", "3"],
        &["chain", "4"],
        &["constant-bundle", "--base", "boolean", "--fiber", "3"],
        &["random", "--max-base", "5"],
        &["random-sheaf"],
        &["i1", "--len", "3"],
        &["cube"],
    ];
    for args in fixtures {
        let text = gen(args);
        let path = write(dir.path(), "doc.json", &text);
        let o = run(&["validate", &path], None);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stdout(&o));
        let doc = Document::from_json(&text, true).unwrap();
        assert_eq!(doc.to_json(), text, "{args:?} is not in canonical form");
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cube.json");
    let o = run(&["--out", path.to_str().unwrap(), "gen", "cube"], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), gen(&["cube"]));
}

#[test]
fn random_generation_is_seeded() {
    assert_eq!(gen(&["--seed", "7", "random"]), gen(&["--seed", "7", "random"]));
    assert_ne!(gen(&["--seed", "7", "random"]), gen(&["--seed", "8", "random"]));
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let input = gen(&["--seed", "11", "random", "--boolean-base", "2"]);
    for command in ["verify-main", "pages", "phi-check", "cohomology"] {
        let outputs: Vec<String> = ["1", "4"]
            .iter()
            .map(|threads| {
                let mut cmd = bin();
                cmd.env("RAYON_NUM_THREADS", threads);
                stdout(&run_with(cmd, &[command], Some(&input)))
            })
            .collect();
        assert_eq!(outputs[0], outputs[1], "{command}");
    }
}

#[test]
fn timings_are_opt_in() {
    let input = gen(&["cube"]);
    let r = report(&run(&["--timings", "pages"], Some(&input)));
    assert!(r["timing_ms"].as_f64().is_some());
}

#[test]
fn missing_arrow_names_the_cover() {
    let mut doc: Value = serde_json::from_str(&gen(&["constant-bundle"])).unwrap();
    doc["arrows"].as_array_mut().unwrap().pop();
    let o = run(&["validate"], Some(&doc.to_string()));
    assert_eq!(o.status.code(), Some(1));
    let error = report(&o)["error"].as_str().unwrap().to_string();
    assert!(error.contains("missing arrow for base cover"), "{error}");
}

fn two_point_sheaf(entry: &str) -> String {
    serde_json::json!({
        "kind": "sheaf",
        "format_version": 1,
        "ring": "rational",
        "sheaf": {
            "elements": ["a", "b"],
            "covers": [["a", "b"]],
            "dims": [1, 1],
            "restrictions": [{ "cover": ["a", "b"], "matrix": [[entry]] }],
        },
    })
    .to_string()
}

#[test]
fn strict_and_lenient_scalars() {
    let text = two_point_sheaf("2/4");
    let o = run(&["validate"], Some(&text));
    assert_eq!(o.status.code(), Some(1));
    let error = report(&o)["error"].as_str().unwrap().to_string();
    assert!(error.contains("$.sheaf.restrictions[0].matrix[0][0]"), "{error}");
    let o = run(&["--lenient", "validate"], Some(&text));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(run(&["validate"], Some(&two_point_sheaf("1/2"))).status.code(), Some(0));
}

#[test]
fn integer_ring_needs_integral_restrictions() {
    let o = run(&["--ring", "integer", "cohomology"], Some(&two_point_sheaf("2")));
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    assert_eq!(r["data"]["ring"], "integer");
    assert_eq!(r["data"]["degrees"][0]["betti"], 1);
    let o = run(&["--ring", "integer", "cohomology"], Some(&two_point_sheaf("1/2")));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn pages_on_singleton_base_has_one_column() {
    let input = gen(&["constant-bundle", "--base", "chain", "--base-size", "1", "--fiber", "2"]);
    let o = run(&["pages"], Some(&input));
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    assert_eq!(r["data"]["columns"], 1);
    assert_eq!(r["data"]["convergence"]["total"], serde_json::json!([1, 0]));
    let text = stdout(&run(&["--format", "text", "pages"], Some(&input)));
    let row = text.lines().find(|l| l.trim_start().starts_with("q=0")).unwrap();
    assert_eq!(row.split_whitespace().count(), 2);
}

#[test]
fn total_sheaf_matches_bundle_cohomology() {
    let bundle = gen(&["cube"]);
    let sheaf = run(&["total-sheaf"], Some(&bundle));
    assert_eq!(sheaf.status.code(), Some(0));
    let via_sheaf = report(&run(&["cohomology"], Some(&stdout(&sheaf))));
    let via_bundle = report(&run(&["cohomology"], Some(&bundle)));
    assert_eq!(via_sheaf["data"], via_bundle["data"]);
    let pages = report(&run(&["pages"], Some(&bundle)));
    let betti: Vec<Value> =
        via_bundle["data"]["degrees"].as_array().unwrap().iter().map(|d| d["betti"].clone()).collect();
    assert_eq!(pages["data"]["convergence"]["total"], Value::Array(betti));
}

#[test]
fn max_degree_truncates() {
    let r = report(&run(&["--max-degree", "0", "cohomology"], Some(&gen(&["boolean", "2"]))));
    assert_eq!(r["data"]["degrees"].as_array().unwrap().len(), 1);
}
