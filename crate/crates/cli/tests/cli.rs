use std::fs;
use std::path::Path;

use kicked_cli::{main_with_args, RunManifest, MANIFEST_NAME};

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("kicked").chain(args.iter().copied()))
}

fn csv_column(path: &Path, col: &str) -> Vec<f64> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let idx = rdr.headers().unwrap().iter().position(|h| h == col).unwrap();
    rdr.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn evolve_identity_norm_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("e");
    assert_eq!(run(&["psl2-evolve", "--kicks", "identity", "--tau", "1.5", "--steps", "4", "--out", out.to_str().unwrap()]), 0);
    let norms = csv_column(&out.join("evolve.csv"), "norm");
    assert_eq!(norms.len(), 5);
    for (k, n) in norms.iter().enumerate() {
        let want = (2.0 + (1.5 * k as f64).powi(2)).sqrt();
        assert!((n - want).abs() < 1e-12, "k={k}: {n} vs {want}");
    }
    assert_eq!(header(&out.join("evolve.csv")), "tau,k,norm,log_norm,trace");
}

#[test]
fn burago_hit_frequency_half_at_tau_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("b");
    assert_eq!(run(&["torus-burago", "--tau", "1", "--steps", "100000", "--out", out.to_str().unwrap()]), 0);
    let f = csv_column(&out.join("burago.csv"), "hit_frequency");
    assert!((f[0] - 0.5).abs() < 0.005, "{f:?}");
}

#[test]
fn parabolic_r_infinity_is_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("q");
    assert_eq!(run(&["qm-parabolic", "--n-max", "30", "--out", out.to_str().unwrap()]), 0);
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(out.join("qm.json")).unwrap()).unwrap();
    let r = &doc["r_infinity"];
    let (est, err) = (r["estimate"].as_f64().unwrap(), r["error_bar"].as_f64().unwrap());
    assert!((est - 1.0).abs() <= err.max(1e-3), "{est} ± {err}");
}

#[test]
fn configuration_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let o = out.to_str().unwrap();
    assert_eq!(run(&["psl2-evolve", "--bogus", "1", "--out", o]), 2);
    assert_eq!(run(&["psl2-evolve", "--tau-grid", "1:2", "--out", o]), 2);
    assert_eq!(run(&["psl2-evolve", "--kicks", "nonsense", "--out", o]), 2);
    assert_eq!(run(&["torus-weyl", "--format", "xml", "--out", o]), 2);
    assert_eq!(run(&["top-timereversal", "--theta", "spin", "--out", o]), 2);

    let cfg = tmp.path().join("bad.conf");
    fs::write(&cfg, "tau = 1.5\nnot-a-key = 3\n").unwrap();
    assert_eq!(run(&["psl2-evolve", "--config", cfg.to_str().unwrap(), "--out", o]), 2);
}

#[test]
fn numerical_guard_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("g");
    let code = run(&[
        "psl2-schrodinger",
        "--kicks",
        "nonneg-unipotent",
        "--tau",
        "2",
        "--steps",
        "10000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 3);
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.conf");
    fs::write(&cfg, "# identity kicks\nkicks = identity\ntau = 0.5\nsteps = 3\n").unwrap();
    let out = tmp.path().join("c");
    assert_eq!(run(&["psl2-evolve", "--config", cfg.to_str().unwrap(), "--tau", "1.5", "--out", out.to_str().unwrap()]), 0);
    let taus = csv_column(&out.join("evolve.csv"), "tau");
    assert_eq!(taus, vec![1.5; 4]);
    let m = RunManifest::read(&out.join(MANIFEST_NAME)).unwrap();
    assert_eq!(m.config.steps, Some(3));
    assert_eq!(m.config.params.get("kicks").map(String::as_str), Some("identity"));
}

#[test]
fn json_format_and_manifest_digests() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("j");
    assert_eq!(run(&["torus-burago", "--tau-grid", "1:2:2", "--steps", "1000", "--format", "json", "--out", out.to_str().unwrap()]), 0);
    let m = RunManifest::read(&out.join(MANIFEST_NAME)).unwrap();
    assert!(m.files.iter().any(|f| f.name == "burago.json"));
    for f in &m.files {
        let bytes = fs::read(out.join(&f.name)).unwrap();
        assert_eq!(bytes.len() as u64, f.bytes);
        assert_eq!(kicked_cli::output::sha256_hex(&bytes), f.sha256);
    }
    let text = fs::read_to_string(out.join(MANIFEST_NAME)).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn replay_reproduces_and_detects_tampering() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("r");
    assert_eq!(run(&["torus-weyl", "--tau-grid", "1:2:3", "--steps", "2000", "--seed", "5", "--out", out.to_str().unwrap()]), 0);
    let manifest = out.join(MANIFEST_NAME);
    let again = tmp.path().join("r2");
    assert_eq!(run(&["replay", manifest.to_str().unwrap(), "--out", again.to_str().unwrap()]), 0);
    for name in ["weyl.csv", "discrepancy.csv"] {
        assert_eq!(fs::read(out.join(name)).unwrap(), fs::read(again.join(name)).unwrap());
    }

    let text = fs::read_to_string(&manifest).unwrap();
    let m = RunManifest::read(&manifest).unwrap();
    let tampered = text.replace(&m.files[0].sha256, &"0".repeat(64));
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, tampered).unwrap();
    assert_eq!(run(&["replay", bad.to_str().unwrap(), "--out", tmp.path().join("r3").to_str().unwrap()]), 3);
}

#[test]
fn time_reversal_default_passes_and_half_turn_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    assert_eq!(run(&["top-timereversal", "--out", a.to_str().unwrap()]), 0);
    let m = RunManifest::read(&a.join(MANIFEST_NAME)).unwrap();
    assert!(m.checks.iter().all(|c| c.pass), "{:?}", m.checks);

    let b = tmp.path().join("b");
    assert_eq!(run(&["top-timereversal", "--theta", "half-turn-x", "--out", b.to_str().unwrap()]), 0);
    let m = RunManifest::read(&b.join(MANIFEST_NAME)).unwrap();
    assert!(m.checks.iter().any(|c| c.name == "time_reversal" && !c.pass));
}

#[test]
fn flat_time_reversal_shift_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("f");
    assert_eq!(run(&["top-timereversal", "--arena", "flat", "--out", a.to_str().unwrap()]), 0);
    let m = RunManifest::read(&a.join(MANIFEST_NAME)).unwrap();
    assert!(m.checks.iter().all(|c| c.pass), "{:?}", m.checks);
}
