use std::path::Path;
use std::process::{Command, Output};

use varharm_core::grid::{indicator, Ball, Grid, GridFunction};

fn varharm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varharm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(f: &GridFunction, path: &Path) {
    f.write_csv(std::fs::File::create(path).unwrap()).unwrap();
}

fn read(path: &Path) -> GridFunction {
    GridFunction::read_csv(std::io::BufReader::new(std::fs::File::open(path).unwrap())).unwrap()
}

#[test]
fn list_names_every_target() {
    let o = varharm(&["list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for id in ["ineqmax", "theorem21", "theorem24", "farfield-decay", "rdf-certificate"] {
        assert!(text.lines().any(|l| l.starts_with(id)), "{id} missing");
    }
}

#[test]
fn verify_writes_reports_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"cases": 4, "points": 128}"#).unwrap();
    let out = dir.path().join("report.json");
    let csv = dir.path().join("csv");
    let o = varharm(&[
        "verify",
        "ineqmax",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["target"], "ineqmax");
    assert_eq!(report["settings"]["points"], 128);
    let table = std::fs::read_to_string(csv.join("ineqmax.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 2 * 4);
}

#[test]
fn verify_rejects_bad_input_with_error_code() {
    assert_eq!(varharm(&["verify", "no-such-target"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"target": "ineqmax", "unknown_field": 1}"#).unwrap();
    assert_eq!(
        varharm(&["verify", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(3)
    );
}

#[test]
fn potential_and_maximal_round_trip_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new(1, 4.0, 2048).unwrap();
    let input = dir.path().join("f.csv");
    write(&indicator(&g, &Ball::interval(0.0, 1.0).unwrap()).unwrap(), &input);

    let tf = dir.path().join("tf.csv");
    let o = varharm(&[
        "potential",
        "--alpha",
        "0.5",
        "--in",
        input.to_str().unwrap(),
        "--out",
        tf.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let image = read(&tf);
    let centre = image.values()[g.len() / 2];
    assert!((centre - 4.0).abs() < 0.12, "I(0) = {centre}");

    let mf = dir.path().join("mf.csv");
    let o = varharm(&[
        "maximal",
        "--op",
        "hl",
        "--in",
        input.to_str().unwrap(),
        "--out",
        mf.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let m = read(&mf);
    assert!(m.values().iter().zip(read(&input).values()).all(|(a, b)| a >= b));
}

#[test]
fn potential_spec_must_agree_with_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new(1, 4.0, 256).unwrap();
    let input = dir.path().join("f.csv");
    write(&indicator(&g, &Ball::interval(0.0, 1.0).unwrap()).unwrap(), &input);
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"dim": 1, "alpha": 0.0, "matrices": [[1.0], [-1.0]], "exponents": [0.5, 0.5]}"#,
    )
    .unwrap();
    let out = dir.path().join("tf.csv");
    let args = |alpha: &'static str| {
        varharm(&[
            "potential",
            "--alpha",
            alpha,
            "--spec",
            spec.to_str().unwrap(),
            "--in",
            input.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
    };
    assert_eq!(args("0.5").status.code(), Some(3));
    assert!(args("0").status.success());
}

#[test]
fn atom_and_weights_print_json() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let o = varharm(&[
        "atom",
        "--ball",
        "0.5,1",
        "--p",
        "const:1.3",
        "--q",
        "64",
        "--degree",
        "1",
        "--seed",
        "3",
        "--half-width",
        "8",
        "--points",
        "512",
        "--out",
        a.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(read(&a).grid().len(), 512);

    let g = Grid::new(1, 8.0, 512).unwrap();
    let w = dir.path().join("w.csv");
    write(&GridFunction::constant(g, 2.0), &w);
    let o = varharm(&["weights", "--check", "a1", "--in", w.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(
        varharm(&["weights", "--check", "rh", "--in", w.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn farfield_and_weaktype_emit_csv() {
    let o = varharm(&[
        "farfield",
        "--alpha",
        "0.5",
        "--radius",
        "0.25",
        "--half-width",
        "16",
        "--points",
        "2048",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("radius,value,bound"));
    assert!(text.lines().count() > 5);

    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new(1, 8.0, 1024).unwrap();
    let input = dir.path().join("f.csv");
    write(&indicator(&g, &Ball::interval(0.0, 1.0).unwrap()).unwrap(), &input);
    let o = varharm(&[
        "weaktype",
        "--alpha",
        "0.5",
        "--in",
        input.to_str().unwrap(),
        "--levels",
        "6",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("lambda,value,bound"));
    assert_eq!(text.lines().count(), 7);
}
