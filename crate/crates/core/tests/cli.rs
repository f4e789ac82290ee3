use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("symmaxent-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symmaxent"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .arg("--no-timestamp")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_target(dir: &Path, weights: &[f64]) -> PathBuf {
    let mut text = String::from("index\tcount\n");
    for (k, w) in weights.iter().enumerate() {
        text.push_str(&format!("{k}\t{w}\n"));
    }
    let path = dir.join("target.tsv");
    fs::write(&path, text).unwrap();
    path
}

fn write_pgm(path: &Path, rows: &[&[u16]]) {
    let mut text = format!("P2\n# test image\n{} {}\n1000\n", rows[0].len(), rows.len());
    for r in rows {
        let line: Vec<String> = r.iter().map(u16::to_string).collect();
        text.push_str(&line.join(" "));
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

#[test]
fn orbits_reports_counts_for_small_lattices() {
    let dir = scratch("orbits");
    let out = run(&dir, &["orbits", "--L", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(dir.join("orbits.json"));
    assert_eq!(summary["M"], 4);
    let table = fs::read_to_string(dir.join("orbits.tsv")).unwrap();
    assert_eq!(table.lines().filter(|l| !l.starts_with('#')).count(), 1 + 4);
}

#[test]
fn check_generators_exit_codes() {
    let dir = scratch("gens");
    assert_eq!(code(&run(&dir, &["check-generators", "--L", "2"])), 0);
    let v = json(dir.join("generators.json"));
    assert_eq!(v["passed"], true);
    // coordinate monomials are not invariant under the microimage group
    let bad = run(&dir, &["check-generators", "--L", "2", "--generators", "coordinates(4)"]);
    assert_eq!(code(&bad), 4);
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = scratch("validation");
    assert_eq!(code(&run(&dir, &["orbits", "--L", "1"])), 2);
    assert_eq!(code(&run(&dir, &["orbits", "--group", "nonsense"])), 2);
    assert_eq!(code(&run(&dir, &["no-such-command"])), 2);
    let target = write_target(&dir, &[1.0; 16]);
    let t = target.to_str().unwrap();
    assert_eq!(code(&run(&dir, &["fit", "--L", "2", "--target", t, "--term", "f9"])), 2);
    // wrong lattice size for the target
    assert_eq!(code(&run(&dir, &["fit", "--L", "4", "--target", t, "--term", "f1"])), 2);
}

#[test]
fn boundary_target_is_a_numerical_failure() {
    let dir = scratch("numerical");
    let mut w = vec![0.0; 256];
    // a point mass on an extreme point of the moment polytope
    w[0] = 1.0;
    let target = write_target(&dir, &w);
    let out = run(
        &dir,
        &["fit", "--target", target.to_str().unwrap(), "--term", "f1", "--term", "f3"],
    );
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn fit_and_greedy_write_reports() {
    let dir = scratch("fit");
    let w: Vec<f64> = (0..256).map(|k| 1.0 + (k % 5) as f64).collect();
    let target = write_target(&dir, &w);
    let t = target.to_str().unwrap();
    let out = run(&dir, &["fit", "--target", t, "--term", "f1", "--term", "f3^2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(fs::read_to_string(dir.join("fit.json")).unwrap().contains("\"kl\""));
    assert!(dir.join("density.tsv").exists());

    let out = run(&dir, &["greedy", "--target", t, "--lookahead-r", "2", "--max-terms", "5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let path = json(dir.join("path.json"));
    assert_eq!(path["halting"]["passed"], true);
}

#[test]
fn reruns_without_timestamp_are_byte_identical() {
    let a = scratch("rerun-a");
    let b = scratch("rerun-b");
    let w: Vec<f64> = (0..256).map(|k| 1.0 + ((k * 7) % 11) as f64).collect();
    // the target path is part of the recorded inputs, so both runs share it
    let t = write_target(&scratch("rerun-input"), &w);
    for dir in [&a, &b] {
        let out = run(
            dir,
            &[
                "greedy", "--target", t.to_str().unwrap(), "--pool", "mixed", "--lookahead-r", "6",
                "--sample", "3", "--seed", "5", "--max-terms", "4", "--threads", "2",
            ],
        );
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["path.tsv", "path.json", "density.tsv"] {
        let x = fs::read(a.join(name)).unwrap();
        let y = fs::read(b.join(name)).unwrap();
        // output directories differ, everything else must match
        let strip = |v: Vec<u8>, d: &Path| String::from_utf8(v).unwrap().replace(d.to_str().unwrap(), "<dir>");
        assert_eq!(strip(x, &a), strip(y, &b), "{name}");
    }
}

#[test]
fn ingest_counts_every_patch() {
    let dir = scratch("ingest");
    let small = dir.join("small.pgm");
    let wide = dir.join("wide.pgm");
    write_pgm(&small, &[&[0, 100], &[300, 900]]);
    write_pgm(&wide, &[&[0, 10, 20], &[30, 40, 50], &[60, 70, 900]]);
    let out = run(
        &dir,
        &["ingest", "--L", "2", "--clip", "0", small.to_str().unwrap(), wide.to_str().unwrap()],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let pooled = fs::read_to_string(dir.join("pooled_counts.tsv")).unwrap();
    let total: u64 = pooled
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("index"))
        .map(|l| l.rsplit('\t').next().unwrap().parse::<u64>().unwrap())
        .sum();
    // one 2x2 patch plus four from the 3x3 image
    assert_eq!(total, 5);
    let missing = run(&dir, &["ingest", dir.join("absent.pgm").to_str().unwrap()]);
    assert_eq!(code(&missing), 2);
}
