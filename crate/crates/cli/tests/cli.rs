use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn shipped_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/ising2_paper.toml")
}

fn spinbath(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinbath"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("SPINBATH_OUT_DIR")
        .output()
        .unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn error_record(out: &Output) -> serde_json::Value {
    serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap()
}

#[test]
fn fig2_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let out = spinbath(&["fig2", "--config", shipped_config().to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let read = |name: &str| std::fs::read_to_string(dir.path().join(name)).unwrap();

    let e = read("fig2e_sweep_T.csv");
    assert!(e.lines().take_while(|l| l.starts_with('#')).any(|l| l.starts_with("# config_sha256 = ")));
    let rows = data_rows(&e);
    assert_eq!(rows.len(), 25);
    let last: f64 = rows[24][1].parse().unwrap();
    assert!((last - 0.4584295167832001).abs() < 0.01);

    let f = data_rows(&read("fig2f_sweep_kappa.csv"));
    let end: f64 = f[24][1].parse().unwrap();
    assert!(end > 0.5 && (end - 0.7017799221155581).abs() < 0.01);

    let c = data_rows(&read("fig2c_thermal_time.csv"));
    assert_eq!(c.len(), 101);
    assert!(c[0][1..].iter().all(|x| x.parse::<f64>().unwrap() == 0.0));
    let d = data_rows(&read("fig2d_coupling_time.csv"));
    assert_eq!(d[0].len(), 5);
}

#[test]
fn run_dispatches_configured_command_and_reads_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_spinbath"))
        .args(["spectrum", "--config", shipped_config().to_str().unwrap()])
        .env("SPINBATH_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let spectrum = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let rows = data_rows(&spectrum);
    assert_eq!(rows[0][1], "↓↓");
    assert_eq!(rows[0][3], "-1.83333333333e0");
    let deg: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("degeneracy.json")).unwrap()).unwrap();
    assert_eq!(deg["gaps_degenerate"], false);
    assert_eq!(deg["frustrated"], false);
}

#[test]
fn blocks_from_json_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("decoupled.json");
    std::fs::write(
        &cfg,
        r#"{"chain": {"fields": [1.0, 0.5], "couplings": [{"sites": [1, 2], "delta": 0.3333333333333333}]},
            "bath": {"temperature": 1.0, "kappa": [0.0, 1.0]},
            "run": {"command": "blocks"}}"#,
    )
    .unwrap();
    let out = spinbath(&["run", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("blocks.json")).unwrap()).unwrap();
    assert_eq!(v["blocks"], serde_json::json!([[1, 2], [3, 4]]));
    assert!(v["provenance"][0].as_str().unwrap().starts_with("# spinbath"));
}

#[test]
fn zeros_scaling_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = spinbath(&["zeros-scaling", "--max-n", "4", "--draws", "20", "--seed", "3"], dir.path());
    assert!(out.status.success());
    let rows = data_rows(&std::fs::read_to_string(dir.path().join("zeros_scaling.csv")).unwrap());
    let head: Vec<&[String]> = rows.iter().map(|r| &r[..3]).collect();
    assert_eq!(head, [["2", "4", "4"], ["3", "32", "32"], ["4", "176", "176"]]);

    let missing_seed = spinbath(&["zeros-scaling", "--max-n", "3"], dir.path());
    assert_eq!(missing_seed.status.code(), Some(2));
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.toml");
    std::fs::write(&empty, "").unwrap();
    let out = spinbath(&["spectrum", "--config", empty.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"], "config");

    let negative = dir.path().join("negative.toml");
    let text = std::fs::read_to_string(shipped_config()).unwrap().replace("kappa = [1e-5, 1.0]", "kappa = [-1.0, 1.0]");
    std::fs::write(&negative, text).unwrap();
    let out = spinbath(&["rates", "--config", negative.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(error_record(&out)["message"].as_str().unwrap().contains("kappa"));

    let out = spinbath(&["rates"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn degenerate_chain_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("chain3.toml");
    std::fs::write(
        &cfg,
        "[chain]\nfields = [1.0, 1.0, 1.0]\ncouplings = [{ sites = [1, 2], delta = 0.2 }, { sites = [2, 3], delta = 0.2 }]\n\
         [bath]\ntemperature = 1.0\nkappa = [1.0, 1.0, 1.0]\n",
    )
    .unwrap();
    let out = spinbath(&["rates", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"], "degeneracy");
}
