use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL_MBL: &str = r#"
experiment = "mbl_scan"
seed = 11
sizes = [6, 8]
chi_list = [1, 2, 3]

[mbl]
h = [1.0, 6.0]
samples = 3
eigenstates_per_sample = 2
"#;

const SMALL_GRID: &str = r#"
experiment = "haldane_grid"
seed = 5
sizes = [6]
chi_list = [1, 2, 3]

[solver]
max_bond = 16

[haldane_grid]
d = [0.0, 2.0]
e = [0.0, 1.0]
edge_field = 0.05
"#;

fn gechi(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gechi"));
    cmd.args(args).env_remove("GECHI_OUT_DIR");
    if let Some(dir) = env_out {
        cmd.env("GECHI_OUT_DIR", dir);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn read(dir: &Path, file: &str) -> Vec<u8> {
    std::fs::read(dir.join(file)).unwrap_or_else(|e| panic!("{}: {e}", dir.join(file).display()))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_config_accepts_the_shipped_configs() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for kind in ["aklt_sweep", "mg_sweep", "haldane_grid", "mbl_scan", "mbl_scatter"] {
        let path = root.join(format!("{kind}.toml"));
        let o = gechi(&["validate-config", path.to_str().unwrap()], None);
        assert!(o.status.success(), "{kind}: {}", stderr(&o));
        assert!(String::from_utf8_lossy(&o.stdout).contains(kind));
    }
}

#[test]
fn missing_chi_list_is_reported_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "bad.toml", &SMALL_MBL.replace("chi_list = [1, 2, 3]\n", ""));
    let o = gechi(&["validate-config", "--config", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("chi_list"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_are_reported_with_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let path =
        write_config(dir.path(), "bad.toml", &SMALL_MBL.replace("samples = 3", "samples = 3\nsamples_per_h = 4"));
    let o = gechi(&["validate-config", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("samples_per_h") && err.contains("line 10"), "{err}");
}

#[test]
fn lists_experiments_and_version() {
    let o = gechi(&["list-experiments"], None);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().count(), 5);
    assert!(text.contains("mbl_scatter"));
    let o = gechi(&["version"], None);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("gechi "));
}

#[test]
fn repeated_runs_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [("mbl.toml", SMALL_MBL), ("grid.toml", SMALL_GRID)] {
        let cfg = write_config(dir.path(), name, text);
        let a = dir.path().join(format!("{name}-a"));
        let b = dir.path().join(format!("{name}-b"));
        let o = gechi(&["run", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()], None);
        assert!(o.status.success(), "{}", stderr(&o));
        let o = gechi(&["run", cfg.to_str().unwrap(), "--workers", "3", "--out", b.to_str().unwrap()], None);
        assert!(o.status.success(), "{}", stderr(&o));
        for file in ["records.jsonl", "records.csv", "manifest.json"] {
            assert_eq!(read(&a, file), read(&b, file), "{name}: {file}");
        }
        assert!(!a.join("records.partial.jsonl").exists());
    }
    let scan = dir.path().join("mbl.toml-a");
    assert_eq!(read(&scan, "summary.csv"), read(&dir.path().join("mbl.toml-b"), "summary.csv"));
    let manifest: serde_json::Value = serde_json::from_slice(&read(&scan, "manifest.json")).unwrap();
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["records"], 2 * 2 * 3 * 2 * 2);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn output_directory_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "mbl.toml", SMALL_MBL);
    let out = dir.path().join("from-env");
    let o = gechi(&["run", cfg.to_str().unwrap()], Some(&out));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("records.jsonl").exists());
}

#[test]
fn resume_completes_an_interrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "mbl.toml", SMALL_MBL);
    let full = dir.path().join("full");
    assert!(gechi(&["run", cfg.to_str().unwrap(), "--out", full.to_str().unwrap()], None).status.success());

    // an interrupted run: header plus the first two tasks, then a torn line
    let partial = dir.path().join("partial");
    std::fs::create_dir_all(&partial).unwrap();
    let config = gechi_harness::ExperimentConfig::from_toml(SMALL_MBL).unwrap();
    let records: Vec<gechi_harness::Record> = String::from_utf8(read(&full, "records.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let mut journal = format!("{{\"experiment\":\"mbl_scan\",\"config_hash\":\"{}\"}}\n", config.hash());
    for (key, sample) in [("n=6,h=1.0,sample=0", 0), ("n=6,h=1.0,sample=1", 1)] {
        let recs: Vec<_> =
            records.iter().filter(|r| r.n == 6 && r.h == Some(1.0) && r.sample == Some(sample)).collect();
        journal.push_str(&serde_json::json!({ "task": key, "records": recs }).to_string());
        journal.push('\n');
    }
    journal.push_str("{\"task\":\"n=6,h=1.0,sam");
    std::fs::write(partial.join("records.partial.jsonl"), journal).unwrap();

    let o = gechi(&["run", cfg.to_str().unwrap(), "--out", partial.to_str().unwrap(), "--resume"], None);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("(2 resumed)"));
    for file in ["records.jsonl", "records.csv", "summary.csv", "manifest.json"] {
        assert_eq!(read(&full, file), read(&partial, file), "{file}");
    }
}

#[test]
fn resume_rejects_a_journal_from_another_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "mbl.toml", SMALL_MBL);
    let out = dir.path().join("out");
    std::fs::create_dir_all(&out).unwrap();
    std::fs::write(out.join("records.partial.jsonl"), "{\"experiment\":\"mbl_scan\",\"config_hash\":\"00\"}\n")
        .unwrap();
    let o = gechi(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--resume"], None);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("different config"));
}

#[test]
fn failing_tasks_leave_completed_work_in_the_journal() {
    let dir = tempfile::tempdir().unwrap();
    // the huge anisotropy overflows inside the solver
    let cfg = write_config(dir.path(), "grid.toml", &SMALL_GRID.replace("d = [0.0, 2.0]", "d = [0.0, 1e308]"));
    let out = dir.path().join("out");
    let o = gechi(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("2 of 4 tasks failed"), "{}", stderr(&o));
    let journal = String::from_utf8(read(&out, "records.partial.jsonl")).unwrap();
    assert_eq!(journal.lines().count(), 3);
    assert!(journal.contains("n=6,d=0.0,e=1.0"));
    assert!(!out.join("records.jsonl").exists());
}
