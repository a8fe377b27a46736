use std::path::Path;
use std::process::{Command, Output};

use darcy_upscale::{io, GridShape, Tensor, TensorField};

fn darcyup(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_darcyup"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn darcyup")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generate_solve_upscale_pipeline() {
    let d = tempfile::tempdir().unwrap();
    ok(&darcyup(&["generate", "--n", "64", "--seed", "7", "--xy-mode", "finite", "--out", "m.fld"], d.path()));
    let field = io::read_field(d.path().join("m.fld")).unwrap();
    assert_eq!(field.n(), 64);
    assert!(!field.has_zero_xy());

    ok(&darcyup(&["solve", "--field", "m.fld", "--out", "p.fld", "--report", "s.json"], d.path()));
    let s = json(&d.path().join("s.json"));
    assert!(s["f"].as_f64().unwrap() > 0.0);
    assert!(s["validation_ratio"].as_f64().unwrap() < 1.05);
    for key in ["residual_norm", "flow_profile", "wall_time_s"] {
        assert!(!s[key].is_null(), "{key}");
    }
    assert_eq!(io::read_pressure(d.path().join("p.fld")).unwrap().shape().n(), 64);

    ok(&darcyup(
        &["upscale", "--field", "m.fld", "--method", "mg", "--n-target", "16", "--out", "c.fld", "--timing", "t.json"],
        d.path(),
    ));
    assert_eq!(io::read_field(d.path().join("c.fld")).unwrap().n(), 16);
    assert_eq!(json(&d.path().join("t.json"))["sweeps"].as_array().unwrap().len(), 2);
}

#[test]
fn same_seed_same_bytes() {
    let d = tempfile::tempdir().unwrap();
    for out in ["a.fld", "b.fld"] {
        ok(&darcyup(&["generate", "--n", "64", "--seed", "11", "--out", out], d.path()));
    }
    let a = std::fs::read(d.path().join("a.fld")).unwrap();
    assert_eq!(a, std::fs::read(d.path().join("b.fld")).unwrap());
}

#[test]
fn kk_as_printed_breaks_the_uniform_fixed_point() {
    let d = tempfile::tempdir().unwrap();
    let u = TensorField::uniform(GridShape::new(16).unwrap(), Tensor::isotropic(0.5)).unwrap();
    io::write_field(&u, d.path().join("u.fld")).unwrap();
    for (flag, want) in [(None, 0.5), (Some("--kk-as-printed"), 2.0)] {
        let mut args = vec!["upscale", "--field", "u.fld", "--method", "kk", "--n-target", "8", "--out", "k.fld"];
        args.extend(flag);
        ok(&darcyup(&args, d.path()));
        let k = io::read_field(d.path().join("k.fld")).unwrap();
        assert!(k.a_xx().iter().chain(k.a_yy()).all(|&v| (v - want).abs() < 1e-12), "{flag:?}");
    }
}

#[test]
fn oracle_reports_exactness() {
    let d = tempfile::tempdir().unwrap();
    let f = TensorField::from_fn(GridShape::new(8).unwrap(), |i, j| {
        Tensor::new(1.0 + 0.5 * ((i + 2 * j) % 3) as f64, 0.1, 0.8)
    })
    .unwrap();
    io::write_field(&f, d.path().join("s.fld")).unwrap();
    ok(&darcyup(&["oracle", "--field", "s.fld", "--kc", "2", "--report", "o.json"], d.path()));
    let o = json(&d.path().join("o.json"));
    assert!(o["relative_deviation"].as_f64().unwrap() < 1e-9);
    assert!(o["condition_full"].as_f64().unwrap() > 1.0);

    let big = TensorField::uniform(GridShape::new(64).unwrap(), Tensor::isotropic(1.0)).unwrap();
    io::write_field(&big, d.path().join("big.fld")).unwrap();
    assert!(!darcyup(&["oracle", "--field", "big.fld"], d.path()).status.success());
}

#[test]
fn survey_exit_codes_and_report_regeneration() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("bad.json"), r#"{"n_models": 2, "n": 64, "resolutions": [32], "typo": 1}"#).unwrap();
    assert_eq!(darcyup(&["survey", "--config", "bad.json", "--out", "x"], d.path()).status.code(), Some(2));
    assert_eq!(darcyup(&["survey", "--config", "missing.json", "--out", "x"], d.path()).status.code(), Some(2));

    // The smallest tolerance above 1 rejects every solve with rounding noise.
    std::fs::write(d.path().join("strict.json"), r#"{"n_models": 3, "n": 64, "resolutions": [32], "ratio_tol": 1.0000000000000002}"#)
        .unwrap();
    assert_eq!(darcyup(&["survey", "--config", "strict.json", "--out", "x"], d.path()).status.code(), Some(3));

    std::fs::write(d.path().join("ok.json"), r#"{"n_models": 3, "n": 64, "resolutions": [32], "seed0": 5}"#).unwrap();
    ok(&darcyup(&["survey", "--config", "ok.json", "--out", "r"], d.path()));
    ok(&darcyup(&["report", "--in", "r/report.json", "--out", "r2"], d.path()));
    for name in ["report.json", "histograms.csv", "cdf.csv", "histograms.svg", "cdf.svg"] {
        let a = std::fs::read(d.path().join("r").join(name)).unwrap();
        let b = std::fs::read(d.path().join("r2").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn shipped_presets_match_the_built_in_configs() {
    use darcy_upscale::model_gen::XyMode;
    use darcy_upscale::survey::SurveyConfig;
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets");
    for (mode, tag) in [(XyMode::Zero, "zero"), (XyMode::Finite, "finite")] {
        let paper = SurveyConfig::from_json_file(dir.join(format!("paper-{tag}.json"))).unwrap();
        assert_eq!(paper, SurveyConfig::paper(mode));
        let desk = SurveyConfig::from_json_file(dir.join(format!("desk-{tag}.json"))).unwrap();
        assert_eq!(desk, SurveyConfig::desk(mode));
    }
}
