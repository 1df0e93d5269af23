use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn entnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entnet"))
        .args(args)
        .env_remove("ENTNET_SEED")
        .output()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("entnet-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn success_is_zero_and_json_parses() {
    let out = entnet(&["protocol", "one", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["cbits_used"], 2);
}

#[test]
fn domain_rejections_exit_two() {
    let dir = scratch("reject");
    let split = write(&dir, "split.json", r#"{"n":4,"hyperedges":[[0,1],[2,3]]}"#);
    assert_eq!(entnet(&["protocol", "three", "--input", &split]).status.code(), Some(2));
    let out = entnet(&["qss", "inflate", "--k", "2", "--n", "3", "--new-k", "2", "--new-n", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn usage_and_io_errors_exit_one() {
    assert_eq!(entnet(&["teleport"]).status.code(), Some(1));
    assert_eq!(entnet(&["protocol", "two", "--input", "/nonexistent/graph.json"]).status.code(), Some(1));
    assert_eq!(entnet(&["protocol", "one", "--jobs", "0"]).status.code(), Some(1));
    let dir = scratch("usage");
    let junk = write(&dir, "junk.json", "not json");
    assert_eq!(entnet(&["protocol", "two", "--input", &junk]).status.code(), Some(1));
    assert_eq!(entnet(&["--help"]).status.code(), Some(0));
}

#[test]
fn environment_seed_is_a_fallback() {
    let run = |env: Option<&str>, args: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_entnet"));
        cmd.args(["qkd", "two-group", "--agents", "6", "--rounds", "16"]).args(args);
        match env {
            Some(v) => cmd.env("ENTNET_SEED", v),
            None => cmd.env_remove("ENTNET_SEED"),
        };
        cmd.output().unwrap().stdout
    };
    assert_eq!(run(Some("77"), &[]), run(None, &["--seed", "77"]));
    assert_eq!(run(Some("1"), &["--seed", "77"]), run(None, &["--seed", "77"]));
    assert_ne!(run(None, &["--seed", "77"]), run(None, &["--seed", "78"]));
}

#[test]
fn output_file_and_text_format() {
    let dir = scratch("output");
    let target = dir.join("report.json");
    let out = entnet(&["protocol", "one", "--output", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read(&target).unwrap();
    assert_eq!(written, entnet(&["protocol", "one"]).stdout);

    let text = entnet(&["protocol", "one", "--format", "text"]);
    assert_eq!(text.status.code(), Some(0));
    assert!(serde_json::from_slice::<serde_json::Value>(&text.stdout).is_err());
}

#[test]
fn witness_search_is_independent_of_jobs() {
    let dir = scratch("jobs");
    let h1 = write(&dir, "h1.json", r#"{"n":5,"hyperedges":[[0,1,2],[2,3,4]]}"#);
    let h2 = write(&dir, "h2.json", r#"{"n":5,"hyperedges":[[0,1,3],[2,3,4]]}"#);
    let run = |jobs: &str| entnet(&["locc", "--input", &h1, "--target", &h2, "--jobs", jobs]);
    let one = run("1");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, run("4").stdout);
}
