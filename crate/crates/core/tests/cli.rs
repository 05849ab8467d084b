use std::path::Path;
use std::process::{Command, Output};

fn wgqed(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wgqed")).args(args).current_dir(dir).env_remove("WGQED_THREADS").output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn missing_field_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"evolve": {"model": "qst_spin", "alpha": "1 kHz"}}"#);
    let out = wgqed(&["evolve", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("evolve.n"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn bad_units_and_unknown_keys_are_schema_errors() {
    let dir = tempfile::tempdir().unwrap();
    for (body, path) in [
        (r#"{"evolve": {"model": "qst_spin", "n": 4, "alpha": "3 furlongs"}}"#, "evolve.alpha"),
        (r#"{"evolve": {"model": "qst_spin", "n": 4, "alpah": 1}}"#, "evolve.alpah"),
        (r#"{"evolve": {"model": "qst_spin", "n": 4,}}"#, "line 1"),
    ] {
        let cfg = write(dir.path(), "bad.json", body);
        let out = wgqed(&["validate", "--config", &cfg], dir.path());
        assert_eq!(out.status.code(), Some(2), "{body}");
        assert!(String::from_utf8_lossy(&out.stderr).contains(path), "{body}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn run_writes_manifest_and_full_precision_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = wgqed(&["evolve", "--config", "qst_spin", "--seed", "5", "--threads", "2", "--out", "run"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("run");
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(run.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 5);
    assert_eq!(m["threads"], 2);
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert!(m["wall_seconds"].as_f64().unwrap() >= 0.0);
    let csv = std::fs::read_to_string(run.join("series.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("time,"));
    let row: Vec<&str> = lines.nth(3).unwrap().split(',').collect();
    let digits = row[0].trim_start_matches('-').split(['e', 'E']).next().unwrap().replace('.', "").trim_start_matches('0').len();
    assert_eq!(digits, 17, "{}", row[0]);
}

#[test]
fn threads_env_sets_only_the_default() {
    let dir = tempfile::tempdir().unwrap();
    let run = |extra: &[&str], env: Option<&str>, out: &str| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_wgqed"));
        c.args(["sy", "--config", "sy_su2", "--out", out]).args(extra).current_dir(dir.path());
        match env {
            Some(v) => c.env("WGQED_THREADS", v),
            None => c.env_remove("WGQED_THREADS"),
        };
        assert!(c.output().unwrap().status.success());
        let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join(out).join("manifest.json")).unwrap()).unwrap();
        (m["threads"].as_u64().unwrap(), std::fs::read(dir.path().join(out).join("strobe.csv")).unwrap())
    };
    let (t_env, a) = run(&[], Some("3"), "a");
    let (t_flag, b) = run(&["--threads", "1"], Some("3"), "b");
    assert_eq!((t_env, t_flag), (3, 1));
    assert_eq!(a, b);
}
