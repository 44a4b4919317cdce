//! End-to-end checks of the binary: artifacts, determinism, exit codes, and
//! manifest completeness.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_entropygraph"))
}

fn write(dir: &Path, name: &str, contents: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn solve_emits_json_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let degrees = write(tmp.path(), "reg4.txt", "2\n2\n2\n2\n");
    let out = tmp.path().join("out");
    let status = bin()
        .args(["solve", "--degrees"])
        .arg(&degrees)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let solve: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("solve.json")).unwrap()).unwrap();
    let r = solve["r"][0].as_f64().unwrap();
    assert!((r - 2f64.sqrt()).abs() < 1e-9);
    assert_eq!(solve["converged"], serde_json::Value::Bool(true));

    // every artifact is listed in the manifest with its content hash
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap())
            .unwrap();
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 1);
    assert_eq!(outputs[0]["path"], "solve.json");
    assert_eq!(outputs[0]["sha256"].as_str().unwrap().len(), 64);
    assert!(manifest["seed"].is_u64());
    assert!(manifest["config"].is_object());
}

#[test]
fn check_verdict_is_not_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let degrees = write(tmp.path(), "tri.txt", "2,2,2\n");
    let out = tmp.path().join("out");
    let output = bin()
        .args(["check", "--strict", "--degrees"])
        .arg(&degrees)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "verdicts exit 0");
    let check: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("check.json")).unwrap()).unwrap();
    assert_eq!(check["strict_pass"], serde_json::Value::Bool(false));
    assert_eq!(check["nonstrict_pass"], serde_json::Value::Bool(true));
}

#[test]
fn trees_enumerate_cayley_count() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let status = bin()
        .args(["trees", "enumerate", "--k", "4", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("trees.csv")).unwrap();
    let ids: std::collections::HashSet<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(ids.len(), 16);
}

#[test]
fn stats_is_deterministic_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let degrees = write(tmp.path(), "reg4.txt", "2\n2\n2\n2\n");
    let run = |out: &Path, seed: &str| {
        let status = bin()
            .args(["stats", "--statistic", "l", "--k", "2", "--seed", seed, "--degrees"])
            .arg(&degrees)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out.join("stats.csv")).unwrap()
    };
    let a = run(&tmp.path().join("a"), "7");
    let b = run(&tmp.path().join("b"), "7");
    assert_eq!(a, b, "same config + seed must be byte-identical");
}

#[test]
fn sample_manifest_lists_every_file() {
    let tmp = tempfile::tempdir().unwrap();
    let degrees = write(tmp.path(), "reg4.txt", "2\n2\n2\n2\n");
    let out = tmp.path().join("out");
    let status = bin()
        .args(["sample", "--method", "exact", "--count", "4", "--degrees"])
        .arg(&degrees)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap())
            .unwrap();
    let listed: std::collections::HashSet<String> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["path"].as_str().unwrap().to_string())
        .collect();
    for entry in std::fs::read_dir(&out).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        if name != "manifest.json" {
            assert!(listed.contains(&name), "{name} missing from manifest");
        }
    }
    // 4 samples + sampler.json
    assert_eq!(listed.len(), 5);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    // validation error: missing file
    let code = bin()
        .args(["solve", "--degrees", "/nonexistent.txt", "--out"])
        .arg(tmp.path().join("v"))
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(1));

    // size guard: tree enumeration above the supported k
    let code = bin()
        .args(["trees", "enumerate", "--k", "12", "--out"])
        .arg(tmp.path().join("s"))
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(2));

    // numeric: boundary optimum
    let degrees = write(tmp.path(), "tri.txt", "2,2,2\n");
    let outdir = tmp.path().join("n");
    let code = bin()
        .args(["solve", "--degrees"])
        .arg(&degrees)
        .arg("--out")
        .arg(&outdir)
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(3));
    // machine-readable error JSON in the output dir
    let err: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outdir.join("error.json")).unwrap())
            .unwrap();
    assert_eq!(err["exit_code"], serde_json::json!(3));
}

#[test]
fn round_trip_round_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let weights = write(
        tmp.path(),
        "w.txt",
        "#bipartite 2 3\n1 3 0.4\n1 4 0.2\n2 3 0.5\n2 4 0.3\n2 5 0.1\n",
    );
    let out = tmp.path().join("out");
    let status = bin()
        .args(["round", "--weights"])
        .arg(&weights)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let trace: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("trace.json")).unwrap()).unwrap();
    assert!(!trace["augmentations"].as_array().unwrap().is_empty());
    let rounded = std::fs::read_to_string(out.join("rounded.txt")).unwrap();
    assert!(rounded.starts_with("#bipartite 2 3"));
}
