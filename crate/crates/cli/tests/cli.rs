use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn metapulse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metapulse"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

const SPLIT: &str = r#"
scenario = "split"

[medium]
omega_pe = 1.0
omega_pm = 1.0

[grid]
n = 256
dt = 0.5

[pulse]
carrier = 1.8
width = 8.0
regime = "electric-only"
"#;

#[test]
fn scenarios_lists_every_kind() {
    let o = metapulse(&["scenarios"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in [
        "split",
        "propagate-linear",
        "propagate-kg",
        "propagate-nonlinear",
        "propagate-unidirectional",
        "stationary-linear",
        "stationary-nonlinear",
        "taylor-error",
        "reference-compare",
    ] {
        assert!(text.lines().any(|l| l.starts_with(name)), "missing {name}:\n{text}");
    }
    assert!(text.contains("requires:"));
}

#[test]
fn shipped_configs_validate() {
    let mut seen = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let o = metapulse(&["validate", path.to_str().unwrap()]);
            assert!(o.status.success(), "{}: {}", path.display(), stderr(&o));
            assert!(stdout(&o).contains("valid"));
            seen += 1;
        }
    }
    assert_eq!(seen, 9);
}

#[test]
fn validate_names_the_offending_keys() {
    let dir = tempfile::tempdir().unwrap();
    let bad = SPLIT.replace("width = 8.0", "width = -8.0\nwidht = 3.0");
    let path = write_config(dir.path(), "bad.toml", &bad);
    let o = metapulse(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("pulse.width"), "{err}");
    assert!(err.contains("pulse.widht"), "{err}");
}

#[test]
fn carrier_in_the_stop_band_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = SPLIT.replace("omega_pm = 1.0", "omega_pm = 2.0").replace("carrier = 1.8", "carrier = 1.5");
    let path = write_config(dir.path(), "band.toml", &text);
    let o = metapulse(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("pulse.carrier"), "{}", stderr(&o));
}

#[test]
fn missing_file_fails_cleanly() {
    let o = metapulse(&["validate", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn run_writes_tables_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "split.toml", SPLIT);
    let out = dir.path().join("out");
    let o = metapulse(&["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("pass split_reconstruct_round_trip"));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["scenario"], "split");
    assert_eq!(manifest["passed"], true);
    assert!(out.join("timings.json").exists());
    for file in manifest["files"].as_array().unwrap() {
        assert!(out.join(file.as_str().unwrap()).exists(), "{file}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "split.toml", SPLIT);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = metapulse(&["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    for name in names.iter().filter(|n| *n != "timings.json") {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name:?}");
    }
}

#[test]
fn overrides_replace_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "split.toml", SPLIT);
    let out = dir.path().join("out");
    let o = metapulse(&[
        "run",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--override",
        "grid.n=512",
        "--override",
        "pulse.amplitude=2.5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let toml = manifest["config_toml"].as_str().unwrap();
    assert!(toml.contains("n = 512"), "{toml}");
    assert!(toml.contains("amplitude = 2.5"), "{toml}");
}

#[test]
fn malformed_override_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "split.toml", SPLIT);
    let o = metapulse(&["validate", path.to_str().unwrap(), "--override", "grid.n"]);
    assert_eq!(o.status.code(), Some(1));
    let o = metapulse(&["validate", path.to_str().unwrap(), "--override", "grid.bogus=3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("grid.bogus"));
}

#[test]
fn failed_gating_check_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
scenario = "reference-compare"

[medium]
omega_pe = 1.0
omega_pm = 1.0

[grid]
n = 512
dt = 0.5

[pulse]
carrier = 0.6
width = 16.0
center = 100.0

[run]
dx = 0.1
substeps = 6
x_ref = 2.0
probes = [4.0]
budget = 1e-9
"#;
    let path = write_config(dir.path(), "ref.toml", text);
    let out = dir.path().join("out");
    let o = metapulse(&["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("FAIL"));
    assert!(out.join("manifest.json").exists());
}

#[test]
fn run_failure_leaves_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    // The window is too short for the pulse to decay before the edges.
    let text = SPLIT.replace("width = 8.0", "width = 60.0");
    let path = write_config(dir.path(), "wide.toml", &text);
    let out = dir.path().join("out");
    let o = metapulse(&["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("diagnostic.json"));
    let diag: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("diagnostic.json")).unwrap()).unwrap();
    assert!(diag["error"].is_string());
}

#[test]
fn user_file_resolves_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let sub = dir.path().join("cases");
    fs::create_dir(&sub).unwrap();
    let mut samples = String::from("# t, value\n");
    // Samples on the grid nodes, so resampling is exact.
    for i in 0..256 {
        let t = i as f64 * 0.5;
        let tau = t - 64.0;
        let v = (-tau * tau / (2.0 * 64.0)).exp() * (1.8 * tau).cos();
        samples.push_str(&format!("{t},{v}\n"));
    }
    fs::write(sub.join("pulse.csv"), samples).unwrap();
    let text = SPLIT.replace(
        "carrier = 1.8\nwidth = 8.0",
        "shape = \"user-file\"\nfile = \"pulse.csv\"\ncarrier = 1.8\nwidth = 8.0",
    );
    let path = write_config(&sub, "user.toml", &text);
    let out = dir.path().join("out");
    let o = metapulse(&["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
}
