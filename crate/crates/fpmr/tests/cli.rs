use std::path::{Path, PathBuf};
use std::process::Command;

use fpmr::config::{parse_toml, Format};
use fpmr::output::{from_json, to_csv, to_json, to_svg};
use fpmr::{emit_outputs, load_config, run_experiment, Error};

const STATIC: &str = r#"
[spin_system]
field_t = 9.4

[[spin_system.spins]]
isotope = "1H"
shift_principal_ppm = [-3.0, 1.0, 8.0]
shift_euler_deg = [10.0, 40.0, 0.0]

[spin_system.relaxation]
t1_s = [inf]
t2_s = [5e-3]

[experiment]
kind = "static"

[grids]
spherical = { scheme = "spiral", points = 8 }

[detection]
domain = "time"
points = 64
dwell_s = 50e-6
initial = [{ label = "1H", operator = "x" }]
coil = [{ label = "1H", operator = "plus" }]
"#;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn shipped_configs_validate() {
    let mut n = 0;
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 5);
}

#[test]
fn invalid_values_name_their_field() {
    let text = STATIC.replace("t2_s = [5e-3]", "t2_s = [-5e-3]");
    let dir = tempfile::tempdir().unwrap();
    let err = load_config(&write(dir.path(), "bad.toml", &text)).unwrap_err();
    assert!(matches!(err, Error::Invalid { .. }), "{err}");
    assert!(err.to_string().contains("t2_s"), "{err}");
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn unknown_keys_are_parse_errors_with_a_line() {
    let text = STATIC.replace("kind = \"static\"", "kind = \"static\"\nspeed = 3");
    match parse_toml(&text).unwrap_err() {
        Error::Parse { line, .. } => assert!(line.is_some()),
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn outputs_round_trip() {
    let cfg = parse_toml(STATIC).unwrap();
    cfg.validate().unwrap();
    let tables = run_experiment(&cfg).unwrap().tables;
    let t = &tables[0];
    assert_eq!(t.rows(), 64);

    let csv = to_csv(t).unwrap();
    assert_eq!(csv.lines().count(), 65);
    assert_eq!(csv.lines().next().unwrap().split(',').count(), t.columns.len());

    assert_eq!(&from_json(&to_json(t)).unwrap(), t);

    let svg = to_svg(t);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");

    let dir = tempfile::tempdir().unwrap();
    let mut out = cfg.output.clone();
    out.directory = dir.path().join("nested");
    out.formats = vec![Format::Csv, Format::Json];
    out.plot = true;
    let written = emit_outputs(&tables, &out).unwrap();
    assert_eq!(written.len(), 3 * tables.len());
    assert!(written.iter().all(|p| p.exists()));
}

#[test]
fn runs_are_deterministic() {
    let cfg = parse_toml(STATIC).unwrap();
    let a = run_experiment(&cfg).unwrap().tables;
    let b = run_experiment(&cfg).unwrap().tables;
    assert_eq!(a, b);
}

#[test]
fn stopped_rotor_equals_static() {
    let spinning = STATIC.replace("kind = \"static\"", "kind = \"mas\"\nrate_hz = 0.0");
    let a = run_experiment(&parse_toml(STATIC).unwrap()).unwrap().tables;
    let b = run_experiment(&parse_toml(&spinning).unwrap()).unwrap().tables;
    assert_eq!(a, b);
}

fn fpmr(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fpmr")).args(args).output().unwrap()
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.toml", STATIC);
    let out = dir.path().join("out");

    let ok = fpmr(&["run", good.to_str().unwrap(), "--out", out.to_str().unwrap(), "--format", "csv,json"]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let report: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["experiment"], "static");
    assert!(out.join("fid.csv").exists() && out.join("fid.json").exists());

    assert!(fpmr(&["validate", good.to_str().unwrap()]).status.success());

    let bad = write(dir.path(), "bad.toml", &STATIC.replace("points = 64", "points = 0"));
    let res = fpmr(&["validate", bad.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).starts_with("error:"));

    let missing = fpmr(&["run", dir.path().join("none.toml").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn oracle_agrees_with_static_run() {
    let text = format!("{STATIC}\n[oracle]\nstep_s = 50e-6\n");
    let cfg = parse_toml(&text).unwrap();
    let fp = run_experiment(&cfg).unwrap().tables;
    let or = fpmr::run_with(
        &cfg,
        &fpmr::RunOptions {
            converge: None,
            oracle: true,
        },
    )
    .unwrap()
    .tables;
    let a = fp[0].complex_values().unwrap();
    let b = or[0].complex_values().unwrap();
    let worst = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
}
