use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasiextremal"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn help_and_usage_errors() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&run(d.path(), &["--help"])), 0);
    assert_eq!(code(&run(d.path(), &["frobnicate"])), 1);
    assert_eq!(code(&run(d.path(), &["map", "colour=red"])), 1);
    assert_eq!(code(&run(d.path(), &["map", "map=spiral"])), 1);
    assert_eq!(code(&run(d.path(), &["map", "grid=4"])), 1);
    assert_eq!(code(&run(d.path(), &["map", "grid=32", "grid=64"])), 1);
    assert_eq!(code(&run(d.path(), &["ode", "--grid", "32"])), 1);
    assert_eq!(code(&run(d.path(), &["map", "--bogus-flag"])), 1);
}

#[test]
fn config_file_precedence() {
    let d = TempDir::new().unwrap();
    let cfg = d.path().join("run.cfg");
    std::fs::write(&cfg, "# test run\ngrid = 32\nmap = shear:0.1\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();

    assert_eq!(code(&run(d.path(), &["map", "--config", cfg_s])), 0);
    assert_eq!(json(&d.path().join("map.json"))["header"]["n"], 32);
    assert_eq!(code(&run(d.path(), &["map", "--config", cfg_s, "grid=40"])), 0);
    assert_eq!(json(&d.path().join("map.json"))["header"]["n"], 40);
    assert_eq!(
        code(&run(d.path(), &["map", "--config", cfg_s, "grid=40", "--grid", "48"])),
        0
    );
    assert_eq!(json(&d.path().join("map.json"))["header"]["n"], 48);

    std::fs::write(&cfg, "grid = 32\ngrid = 64\n").unwrap();
    let o = run(d.path(), &["map", "--config", cfg_s]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("duplicate"));
}

#[test]
fn field_round_trip_and_determinism() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    assert_eq!(code(&run(p, &["map", "map=smooth", "seed=5", "grid=48"])), 0);
    let first = std::fs::read(p.join("map.csv")).unwrap();
    assert_eq!(code(&run(p, &["map", "map=smooth", "seed=5", "grid=48"])), 0);
    assert_eq!(first, std::fs::read(p.join("map.csv")).unwrap());

    assert_eq!(code(&run(p, &["energy", "map=smooth", "seed=5", "grid=48"])), 0);
    let direct = json(&p.join("energy.json"));
    for file in ["map.csv", "map.json"] {
        let spec = format!("map=file:{}", p.join(file).display());
        assert_eq!(code(&run(p, &["energy", &spec, "grid=48"])), 0);
        let loaded = json(&p.join("energy.json"));
        for form in ["direct", "inverse"] {
            let a = direct[form]["value"].as_f64().unwrap();
            let b = loaded[form]["value"].as_f64().unwrap();
            assert!((a - b).abs() <= 1e-14 * a.abs(), "{file} {form}: {a} vs {b}");
        }
    }
    let spec = format!("map=file:{}", p.join("map.csv").display());
    assert_eq!(code(&run(p, &["energy", &spec, "grid=64"])), 2);
}

#[test]
fn energy_of_linear_stretch() {
    // x + iαy has 𝕂 = (1 + α²)/(2α) and J = α everywhere, so with
    // Ψ(t) = t and unit weight the inverse form is (1 + α²)/2 per unit area.
    let d = TempDir::new().unwrap();
    let alpha = 1.5;
    let spec = format!("map=linear:{alpha}");
    assert_eq!(
        code(&run(
            d.path(),
            &["energy", &spec, "psi=linear", "grid=96", "form=inverse"]
        )),
        0
    );
    let r = json(&d.path().join("energy.json"));
    let got = r["inverse"]["value"].as_f64().unwrap();
    let area = r["inverse"]["nodes_used"].as_f64().unwrap() * (2.0f64 / 96.0).powi(2);
    let expected = (1.0 + alpha * alpha) / 2.0 * area;
    assert!((got - expected).abs() < 1e-10 * expected, "{got} vs {expected}");
    assert!(r["direct"].is_null());
}

#[test]
fn ode_table_matches_harmonic_closed_form() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), &["ode", "psi=linear", "eta=hyp-half", "lambda=-1", "ymax=3"]);
    assert_eq!(code(&o), 0);
    let mut r = csv::Reader::from_path(d.path().join("ode_profile.csv")).unwrap();
    let mut rows = 0;
    for rec in r.deserialize::<(f64, f64, f64, f64, f64)>() {
        let (y, u, up, _, _) = rec.unwrap();
        assert!((u - (2.0 * y).sinh() / 2.0).abs() < 1e-6 * (1.0 + u), "u({y}) = {u}");
        assert!((up - (2.0 * y).cosh()).abs() < 1e-6 * up, "u'({y}) = {up}");
        rows += 1;
    }
    assert!(rows > 10);
    let v = json(&d.path().join("ode.json"));
    assert!(v["surjectivity"]["error"].is_string());
    assert_eq!(v["y_end"], 3.0);
    assert!(v["exhausted_at"].is_null());

    // The unit-weight Laplace branch leaves the range of F at once.
    assert_eq!(code(&run(d.path(), &["ode", "psi=linear", "lambda=1", "ymax=3"])), 0);
    assert!(json(&d.path().join("ode.json"))["exhausted_at"]["y"].is_number());
}

#[test]
fn hopf_divergence_of_conjugated_stretch() {
    let d = TempDir::new().unwrap();
    let args = [
        "hopf",
        "map=g-alpha:2",
        "psi=linear",
        "weight=cayley",
        "grid=64",
        "levels=32,64,128",
    ];
    assert_eq!(code(&run(d.path(), &args)), 0);
    let r = json(&d.path().join("hopf_report.json"));
    assert_eq!(r["verdict"], "Divergent");
    let masses: Vec<f64> = r["l1_masses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m.as_f64().unwrap())
        .collect();
    assert!(masses.windows(2).all(|w| w[1] > 2.0 * w[0]));

    let args = [
        "hopf",
        "map=g-alpha:1",
        "psi=linear",
        "weight=cayley",
        "grid=64",
        "levels=32,64",
    ];
    assert_eq!(code(&run(d.path(), &args)), 0);
    assert_eq!(json(&d.path().join("hopf_report.json"))["max_abs"], 0.0);
}

#[test]
fn verify_batteries() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    assert_eq!(code(&run(p, &["verify", "battery=rs", "count=2", "grid=48"])), 0);
    let reports = json(&p.join("verify_rs.json"));
    assert_eq!(reports.as_array().unwrap().len(), 8);
    assert!(reports.as_array().unwrap().iter().all(|r| r["holds"] == true));

    assert_eq!(
        code(&run(p, &["verify", "battery=rs", "map=conj", "grid=32", "phi=w"])),
        2
    );
    assert!(json(&p.join("verify_rs.json"))[0]["hypothesis_violation"].is_string());

    assert_eq!(code(&run(p, &["verify", "battery=gap", "map=identity", "grid=48"])), 0);
    let gap = &json(&p.join("verify_gap.json"))[0];
    assert!(gap["report"]["gap"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(gap["verdict"], "Coincide");

    assert_eq!(code(&run(p, &["verify", "battery=invariance", "grid=48", "tol=0"])), 3);
    assert_eq!(code(&run(p, &["verify", "battery=invariance", "grid=48"])), 0);
    assert_eq!(code(&run(p, &["verify", "battery=invariance", "count=3"])), 1);
}

#[test]
fn minimize_lowers_energy() {
    let d = TempDir::new().unwrap();
    let args = [
        "minimize",
        "map=bump:0.1,0,0.5,1,0.5,0.3",
        "grid=64",
        "max_iter=2",
        "levels=4",
    ];
    assert_eq!(code(&run(d.path(), &args)), 0);
    let r = json(&d.path().join("minimize.json"));
    assert!(r["final_energy"].as_f64().unwrap() < r["initial_energy"].as_f64().unwrap());
    let trace = std::fs::read_to_string(d.path().join("minimize_trace.csv")).unwrap();
    assert!(trace.starts_with("iter,energy,minJ,dbar,max_derivative,accepted"));
    assert!(d.path().join("minimize_field.csv").exists());
}

#[test]
fn export_table() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&run(d.path(), &["export", "map=shear:0.1", "grid=24"])), 0);
    let mut r = csv::Reader::from_path(d.path().join("export.csv")).unwrap();
    assert_eq!(r.headers().unwrap().len(), 12);
    assert!(r.records().count() > 300);
}

#[test]
fn ode_surjectivity_verdicts() {
    let d = TempDir::new().unwrap();
    let verdict = |args: &[&str]| {
        assert_eq!(code(&run(d.path(), args)), 0);
        json(&d.path().join("ode.json"))["surjectivity"]["verdict"].clone()
    };
    assert_eq!(
        verdict(&["ode", "profile=psi=power:2;eta=hyp-half;lambda=1"]),
        "NotSurjective"
    );
    assert_eq!(
        verdict(&["ode", "profile=psi=power:3;eta=hyp-half;lambda=1"]),
        "Surjective"
    );

    assert_eq!(code(&run(d.path(), &["ode", "lambda=0"])), 0);
    let mut r = csv::Reader::from_path(d.path().join("ode_profile.csv")).unwrap();
    for rec in r.deserialize::<(f64, f64, f64, f64, f64)>() {
        let (y, u, up, k, _) = rec.unwrap();
        assert!((u - y).abs() <= 1e-12 * (1.0 + y) && up == 1.0 && k == 1.0);
    }
    assert_eq!(code(&run(d.path(), &["ode", "profile=psi=power:2", "lambda=1"])), 1);
}

#[test]
fn minimize_rejects_degenerate_start_and_reports_stationarity() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&run(d.path(), &["minimize", "map=conj", "grid=32"])), 2);
    assert_eq!(
        code(&run(d.path(), &["minimize", "map=g-alpha:2", "grid=48", "max_iter=1"])),
        0
    );
    let s = &json(&d.path().join("minimize.json"))["stationarity"];
    assert!(s["max_derivative"].as_f64().unwrap() > 0.0);
    assert!(s["dbar"].is_number());
}

#[test]
fn hopf_of_identity_vanishes() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&run(d.path(), &["hopf", "grid=32", "levels=16,32"])), 0);
    let r = json(&d.path().join("hopf_report.json"));
    assert_eq!(r["max_abs"], 0.0);
    assert_eq!(r["l1_masses"], serde_json::json!([0.0, 0.0]));
    let field = json(&d.path().join("hopf.json"));
    assert_eq!(field["header"]["role"], "differential");
}
