use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn stratiwave(args: &[&Path]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stratiwave")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("terminated by signal")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// forward + recover from a shipped config; returns the recover directory.
fn forward_recover(name: &str, dir: &Path) -> (PathBuf, i32) {
    let fwd = dir.join(name);
    let cfg = configs().join(format!("{name}.json"));
    let o = stratiwave(&[Path::new("forward"), &cfg, Path::new("--out"), &fwd]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rec = fwd.join("recover");
    let o = stratiwave(&[Path::new("recover"), &fwd.join("recover.json"), Path::new("--out"), &rec]);
    (rec, code(&o))
}

#[test]
fn laminar_round_trip_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let (rec, c) = forward_recover("laminar", dir.path());
    assert_eq!(c, 0);
    for f in ["psi_series.json", "field.csv", "surface.csv", "report.json"] {
        assert!(rec.join(f).is_file(), "{f} missing");
    }
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(rec.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["exit_code"], 0);
    assert_eq!(report["all_pass"], true);
}

#[test]
fn verify_accepts_recovered_field_and_rejects_corrupted_one() {
    let dir = tempfile::tempdir().unwrap();
    let (rec, c) = forward_recover("manufactured_sinh", dir.path());
    assert_eq!(c, 0);
    let cfg = dir.path().join("manufactured_sinh/recover.json");
    let field = rec.join("field.csv");
    let o = stratiwave(&[Path::new("verify"), &cfg, &field, Path::new("--out"), &dir.path().join("ok")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    // break the mirror symmetry of psi in one row
    let text = fs::read_to_string(&field).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut cols: Vec<String> = lines[5].split(',').map(str::to_string).collect();
    let psi: f64 = cols[2].parse().unwrap();
    cols[2] = format!("{:e}", psi + 1e-3);
    lines[5] = cols.join(",");
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, lines.join("\n") + "\n").unwrap();
    let o = stratiwave(&[Path::new("verify"), &cfg, &bad, Path::new("--out"), &dir.path().join("bad")]);
    assert_eq!(code(&o), 5, "{}", stderr(&o));
    assert!(stderr(&o).contains("FAIL"));
}

#[test]
fn manufactured_cosh_fails_flux_check() {
    let dir = tempfile::tempdir().unwrap();
    let (rec, c) = forward_recover("manufactured", dir.path());
    assert_eq!(c, 5);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(rec.join("report.json")).unwrap()).unwrap();
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["hard"] == true && c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["flux invariance"]);
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ \"profiles\": ").unwrap();
    assert_eq!(code(&stratiwave(&[Path::new("recover"), &bad])), 2);

    let text = fs::read_to_string(configs().join("laminar.json")).unwrap().replacen("\"mode\"", "\"modus\"", 1);
    fs::write(&bad, text).unwrap();
    assert_eq!(code(&stratiwave(&[Path::new("forward"), &bad])), 2);

    let missing = dir.path().join("nope.json");
    assert_eq!(code(&stratiwave(&[Path::new("recover"), &missing])), 2);
}

#[test]
fn stagnation_exits_3_and_names_the_level() {
    let dir = tempfile::tempdir().unwrap();
    let samples: Vec<[f64; 2]> = (0..=20)
        .map(|k| {
            let y = -(k as f64) / 20.0;
            [y, 0.6 + 0.8 * (-(y + 0.5).powi(2) * 20.0).exp()]
        })
        .collect();
    let cfg = serde_json::json!({
        "profiles": { "rho": [1.0], "beta": [] },
        "geometry": { "d": 1.0, "g": 9.8, "P_atm": 0.0 },
        "axis": { "c": 1.0, "eta0": 0.0, "samples": samples },
        "mode": "recover"
    });
    let path = dir.path().join("stag.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let o = stratiwave(&[Path::new("recover"), &path, Path::new("--out"), &dir.path().join("out")]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("stagnation at y ="), "{}", stderr(&o));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_stratiwave"))
        .env("STRATIWAVE_THREADS", "zero")
        .args([Path::new("forward"), &configs().join("laminar.json")])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn output_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, out: &Path| {
        let o = Command::new(env!("CARGO_BIN_EXE_stratiwave"))
            .env("STRATIWAVE_THREADS", threads)
            .args([Path::new("forward"), &configs().join("newton.json"), Path::new("--out"), out])
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        fs::read(out.join("height.csv")).unwrap()
    };
    assert_eq!(run("1", &dir.path().join("a")), run("4", &dir.path().join("b")));
}
