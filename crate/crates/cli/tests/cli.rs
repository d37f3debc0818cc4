use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn floquet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_floquet")).args(args).output().expect("binary runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write_config(dir: &Path, name: &str, backend: &str) -> PathBuf {
    let path = dir.join(format!("{name}.toml"));
    let text = format!(
        "schema = 1\nname = \"{name}\"\nn_steps = 20\n[graph]\nkind = \"chain\"\nlength = 6\n[pattern]\nkind = \"domain_wall\"\n\
         [params]\ntheta_x = [0.8]\ntheta_z = [0.0, 0.5]\n[backend]\nname = \"{backend}\"\nchi = 2\n[analysis]\nn_max = 20\n"
    );
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn shipped_configs_validate() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let out = floquet(&["validate", path.to_str().unwrap()]);
            assert!(out.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
        }
    }
}

#[test]
fn mps_on_heavy_hex_is_a_validation_error() {
    let path = configs().join("invalid/mps_on_heavy_hex.toml");
    let out = floquet(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot run"));
}

#[test]
fn missing_config_is_a_runtime_error() {
    let out = floquet(&["validate", "no/such/config.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_compare_and_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let (sv, mps) = (write_config(dir.path(), "exact", "sv"), write_config(dir.path(), "coarse", "mps"));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (cfg, out) in [(&sv, &a), (&mps, &b)] {
        let o = floquet(&["run", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(a.join("manifest.json").exists());
    assert!(a.join("points.csv").exists());

    let same = floquet(&["compare", a.to_str().unwrap(), a.to_str().unwrap()]);
    assert!(same.status.success());
    assert!(String::from_utf8_lossy(&same.stdout).contains("PASS"));

    let differ = floquet(&["compare", a.to_str().unwrap(), b.to_str().unwrap(), "--tol", "1e-3"]);
    assert_eq!(differ.status.code(), Some(1));

    let series = a.join("p000_series.csv");
    let spec = floquet(&["spectrum", series.to_str().unwrap(), "--n-max", "20"]);
    assert!(spec.status.success(), "{}", String::from_utf8_lossy(&spec.stderr));
    let stdout = String::from_utf8_lossy(&spec.stdout);
    assert!(stdout.starts_with("k,omega_over_2pi,amplitude"));
    assert_eq!(stdout.lines().count(), 21);
    assert!(String::from_utf8_lossy(&spec.stderr).contains("main_freq"));
}
