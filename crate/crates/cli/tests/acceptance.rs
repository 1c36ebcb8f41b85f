//! Acceptance criterion 11: the reproduction preset is deterministic.
//! Rerunning with identical seeds produces byte-identical artifacts, and
//! the worker-thread count changes nothing.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

fn run_paper(dir: &Path, extra: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_fbq"))
        .arg("paper")
        .arg("--seed")
        .arg("42")
        .arg("--out")
        .arg(dir)
        .args(extra)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "paper preset failed:\n{}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        files.insert(
            entry.file_name().to_string_lossy().into_owned(),
            std::fs::read(entry.path()).unwrap(),
        );
    }
    files
}

/// Criterion 11: byte-identical artifacts across reruns and thread counts.
#[test]
fn acceptance_11_preset_determinism() {
    let base = std::env::temp_dir().join("fbq_acceptance_11");
    let _ = std::fs::remove_dir_all(&base);
    let (d1, d2, d3) = (base.join("run1"), base.join("run2"), base.join("threads"));

    run_paper(&d1, &[]);
    run_paper(&d2, &[]);
    run_paper(&d3, &["--threads", "3"]);

    let (s1, s2, s3) = (snapshot(&d1), snapshot(&d2), snapshot(&d3));
    assert!(s1.len() >= 11, "expected at least 11 artifacts, found {}", s1.len());
    assert!(s1.contains_key("manifest.json"));

    assert_eq!(
        s1.keys().collect::<Vec<_>>(),
        s2.keys().collect::<Vec<_>>(),
        "rerun produced a different artifact set"
    );
    for (name, bytes) in &s1 {
        assert_eq!(bytes, &s2[name], "rerun changed {name}");
        assert_eq!(bytes, &s3[name], "--threads changed {name}");
    }

    // The manifest anchors every artifact and records the passing checks.
    let manifest: serde_json::Value =
        serde_json::from_slice(&s1["manifest.json"]).unwrap();
    assert_eq!(manifest["all_passed"], true);
    let artifacts = manifest["artifacts"].as_array().unwrap();
    assert!(artifacts.len() >= 10);
    for artifact in artifacts {
        let file = artifact["file"].as_str().unwrap();
        assert!(s1.contains_key(file), "manifest points at missing file {file}");
        assert!(!artifact["description"].as_str().unwrap().is_empty());
    }

    println!(
        "ACCEPTANCE 11 (preset determinism): PASS — {} artifacts byte-identical across reruns and thread counts",
        s1.len()
    );
}
