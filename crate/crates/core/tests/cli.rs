use std::path::Path;
use std::process::{Command, Output};

use h2xh2::lorentz::{poincare_lift, poincare_project, H2Point};
use serde_json::Value;

fn h2xh2(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_h2xh2")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn verify_m1m1_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = h2xh2(&["verify", "--model", "M_1m1", "--c", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = read_json(&out);
    assert_eq!(v["summary"]["failed"], 0);
    assert!(v["summary"]["passed"].as_u64().unwrap() > 20);
    for r in v["results"].as_array().unwrap() {
        match &r["pass"] {
            Value::Null => assert!(r["notes"].as_str().unwrap().starts_with("skipped")),
            Value::Bool(p) => assert_eq!(*p, r["max_residual"].as_f64().unwrap() <= r["tolerance"].as_f64().unwrap()),
            other => panic!("{other}"),
        }
    }
    let names: Vec<&str> = v["results"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn tanh_isoparametric_failure_is_informational() {
    let o = h2xh2(&["verify", "--model", "M_kk", "--c", "0.5", "--kappa", "tanh", "--samples", "32"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let iso = v["results"].as_array().unwrap().iter().find(|r| r["name"] == "isoparametric").unwrap();
    assert_eq!(iso["pass"], false);
    assert_eq!(iso["informational"], true);
    assert_eq!(v["summary"]["informational_failed"], 1);
}

#[test]
fn configuration_errors_exit_2() {
    let o = h2xh2(&["verify", "--model", "M_1m1", "--c", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("c out of range (0,1)"), "{}", stderr(&o));

    let o = h2xh2(&["parallel", "--model", "M_tau", "--tau", "-2", "--l-grid", "0:1:0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("step"));

    let o = h2xh2(&["verify", "--model", "M_11", "--c", "0.3", "--tol", "gauss=-1"]);
    assert_eq!(o.status.code(), Some(2));

    let o = h2xh2(&["verify", "--model", "M_11", "--c", "0.3", "--samples", "0"]);
    assert_eq!(o.status.code(), Some(2));

    let o = h2xh2(&["table", "nope"]);
    assert_eq!(o.status.code(), Some(2));

    let o = h2xh2(&["verify"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_check_exits_1_and_lists_it() {
    let o = h2xh2(&["verify", "--model", "M_11", "--c", "0.3", "--samples", "16", "--tol", "gauss=1e-30"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gauss"));
}

#[test]
fn reports_are_deterministic_and_csv_has_one_row_per_check() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, fmt: &str| {
        let p = dir.path().join(name);
        let o = h2xh2(&["verify", "--model", "M_tau", "--tau", "-2", "--samples", "40", "--seed", "9", "--format", fmt, "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        std::fs::read(p).unwrap()
    };
    assert_eq!(run("a.json", "json"), run("b.json", "json"));
    let csv = String::from_utf8(run("c.csv", "csv")).unwrap();
    let v = read_json(&dir.path().join("a.json"));
    assert_eq!(csv.lines().count(), v["results"].as_array().unwrap().len() + 1);
    assert!(csv.starts_with("name,max_residual,tolerance,pass"));
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"model":{"kind":"M_11","c":0.5},"samples":24,"seed":3,"tolerances":{"gauss":1e-3},"l_grid":{"start":-0.5,"stop":0.5,"step":0.1}}"#,
    )
    .unwrap();
    let o = h2xh2(&["verify", "--config", cfg.to_str().unwrap(), "--samples", "12"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["samples"], 12);
    assert_eq!(v["config"]["tolerances"]["gauss"], 1e-3);
    let mean = v["results"].as_array().unwrap().iter().find(|r| r["name"] == "minimal_mean").unwrap();
    assert_eq!(mean["pass"], true);

    std::fs::write(&cfg, r#"{"model":{"kind":"M_11","c":0.5},"bogus":1}"#).unwrap();
    let o = h2xh2(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn parallel_flags_tube_focal_rows() {
    let o = h2xh2(&["parallel", "--model", "M_tau", "--tau", "-2", "--l-grid", "-0.5:1.2:0.01", "--samples", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["scan"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 171);
    let focal: Vec<f64> = rows.iter().filter(|r| r["focal"] == true).map(|r| r["l"].as_f64().unwrap()).collect();
    assert!(!focal.is_empty());
    assert!(focal.iter().all(|l| (l - 0.9312).abs() < 0.02), "{focal:?}");
}

#[test]
fn parallel_mean_curvature_column_is_constant() {
    let o = h2xh2(&["parallel", "--model", "M_1m1", "--c", "0.3", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let spread: f64 = f[3].parse().unwrap();
        assert!(spread < 1e-8, "{line}");
    }
}

#[test]
fn tables_render() {
    let o = h2xh2(&["table", "curvature-catalog", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let row = v["rows"].as_array().unwrap().iter().find(|r| r["model"] == "M_11(c=0.5)").unwrap();
    assert!(row["H"].as_f64().unwrap().abs() < 1e-9);
    assert!(row["C"].as_f64().unwrap().abs() < 1e-9);

    let o = h2xh2(&["table", "detq-derivatives", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    for line in text.lines().skip(1).filter(|l| l.split(',').nth(1) == Some("2")) {
        let diff: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(diff < 1e-5, "{line}");
    }

    let o = h2xh2(&["table", "lemma-residuals"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("skipped: hypothesis"));
}

#[test]
fn poincare_dump_is_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("disk.csv");
    let o = h2xh2(&["poincare-dump", "--model", "M_Gamma", "--kappa-gamma", "1", "--out", p.to_str().unwrap(), "--n", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&p).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("factor,u1,u2,u3,disk_x,disk_y"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2 * 64);
    for r in &rows {
        assert!(r[0] == 1.0 || r[0] == 2.0);
        assert!(r[4].hypot(r[5]) < 1.0);
        let back = poincare_project(&poincare_lift([r[4], r[5]]).unwrap());
        assert!((back[0] - r[4]).abs() < 1e-12 && (back[1] - r[5]).abs() < 1e-12);
    }
    assert_eq!(poincare_project(&H2Point::ORIGIN), [0.0, 0.0]);
}
