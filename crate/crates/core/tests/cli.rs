use std::path::PathBuf;
use std::process::{Command, Output};

fn bichain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bichain")).args(args).env_remove("BICHAIN_ENDPOINT").output().unwrap()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.pw")).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn prove_exit_codes_follow_the_label() {
    for (name, code, label) in
        [("squirrel_blue", 0, "Proved"), ("bear_not_big", 1, "Disproved"), ("cow_likes_tiger", 2, "Unknown")]
    {
        for engine in ["bi", "forward", "backward"] {
            let out = bichain(&["prove", &fixture(name), "--engine", engine]);
            assert_eq!(out.status.code(), Some(code), "{name} {engine}");
            assert!(stdout(&out).contains(&format!("label: {label}")));
        }
    }
}

#[test]
fn errors_exit_above_two() {
    assert_eq!(bichain(&["prove", "/nonexistent.pw"]).status.code(), Some(3));
    // Free text without a remote endpoint configured.
    let out = bichain(&["prove", &fixture("netflix"), "--backend", "remote"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("BICHAIN_ENDPOINT"));
}

#[test]
fn trace_validate_and_oracle_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.json");
    let trace = trace.to_str().unwrap();
    let out = bichain(&["prove", &fixture("cow_chases_bear"), "--trace", trace]);
    assert_eq!(out.status.code(), Some(0));

    let ok = bichain(&["validate", "--trace", trace, "--problem", &fixture("cow_chases_bear")]);
    assert_eq!((ok.status.code(), stdout(&ok).trim()), (Some(0), "valid"));
    let bad = bichain(&["validate", "--trace", trace, "--problem", &fixture("squirrel_blue")]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).starts_with("invalid:"));

    let oracle = bichain(&["oracle", &fixture("cow_chases_bear")]);
    assert_eq!(oracle.status.code(), Some(0));
    assert!(stdout(&oracle).contains("label: Proved"));
}

#[test]
fn gen_then_bench_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    let corpus = corpus.to_str().unwrap();
    let out = bichain(&["gen", "--count", "12", "--depth", "1,3", "--seed", "5", "--out", corpus]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(corpus).unwrap().lines().count(), 12);

    let report = dir.path().join("report.json");
    let out = bichain(&["bench", "--corpus", corpus, "--report", report.to_str().unwrap(), "--parallel", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    for engine in ["bichainer", "forward", "backward"] {
        let row = text.lines().find(|l| l.starts_with(engine)).unwrap();
        assert!(row.contains("1.000"), "{row}");
    }
    assert!(report.is_file());
    assert!(dir.path().join("traces/bichainer").is_dir());
}
