use std::path::Path;
use std::process::{Command, Output};

fn diffmap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diffmap"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn diffmap")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn stages_chain_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&diffmap(d, &["synth", "--kind", "line1d", "--size", "60", "--seed", "3", "--out", "f.csv", "--parameter-out", "p.csv"]));

    let mut hierarchy = String::from("oa_code,lsoa_code\n");
    for i in 0..60 {
        hierarchy.push_str(&format!("S{i:05},L{:02}\n", i / 4));
    }
    std::fs::write(d.join("h.csv"), hierarchy).unwrap();

    ok(&diffmap(d, &["embed", "--features", "f.csv", "--out", "e.csv", "--k-neighbors", "6"]));
    let embedding = std::fs::read_to_string(d.join("e.csv")).unwrap();
    assert!(embedding.starts_with("area_code,ev1,ev2\n"));
    assert_eq!(embedding.lines().count(), 61);

    ok(&diffmap(d, &["aggregate", "--input", "e.csv", "--hierarchy", "h.csv", "--out", "l.csv"]));
    assert_eq!(std::fs::read_to_string(d.join("l.csv")).unwrap().lines().count(), 16);

    let out = diffmap(d, &["classify", "--embedding", "l.csv", "--target-count", "3"]);
    ok(&out);
    let listed = String::from_utf8(out.stdout).unwrap();
    assert_eq!(listed.lines().count(), 4, "{listed}");
    assert!(listed.starts_with("area_code\n"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&diffmap(d, &["synth", "--size", "40", "--out", "f.csv"]));
    std::fs::write(d.join("c.toml"), "n_eigenvectors = 3\nclassify_eigenvector = 1\n").unwrap();
    ok(&diffmap(d, &["--config", "c.toml", "embed", "--features", "f.csv", "--out", "e3.csv"]));
    let header = std::fs::read_to_string(d.join("e3.csv")).unwrap();
    assert!(header.starts_with("area_code,ev1,ev2,ev3\n"));
    ok(&diffmap(d, &["--config", "c.toml", "embed", "--features", "f.csv", "--out", "e1.csv", "--n-eigenvectors", "1"]));
    assert!(std::fs::read_to_string(d.join("e1.csv")).unwrap().starts_with("area_code,ev1\n"));
}

#[test]
fn run_without_deprivation_writes_embeddings_only() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&diffmap(d, &["synth", "--kind", "circle", "--size", "50", "--out", "f.csv"]));
    ok(&diffmap(d, &["run", "--features", "f.csv", "--out-dir", "out"]));
    for f in ["embedding_oa.csv", "embedding_lsoa.csv", "embedding_oa_lsoa.csv", "summary.json"] {
        assert!(d.join("out").join(f).exists(), "{f}");
    }
    assert!(!d.join("out/correlations.json").exists());
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = diffmap(d, &["embed", "--features", "missing.csv", "--out", "e.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));

    std::fs::write(d.join("bad.csv"), "area_code,a,b\nX,1,N/A\nY,2,3\n").unwrap();
    let out = diffmap(d, &["embed", "--features", "bad.csv", "--out", "e.csv"]);
    assert!(!out.status.success());
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("N/A") && msg.contains("row"), "{msg}");

    let out = diffmap(d, &["synth", "--kind", "torus", "--out", "t.csv"]);
    assert!(!out.status.success());

    let out = diffmap(d, &["embed", "--features", "bad.csv", "--out", "e.csv", "--k-neighbors", "0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("k_neighbors"));
}
