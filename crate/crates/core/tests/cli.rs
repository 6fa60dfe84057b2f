use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use serde_json::Value;
use wavemap_core::cli::{dispatch, inputs_hash, Command, RunConfig, EXIT_CONFIG, EXIT_NUMERICAL};
use wavemap_core::io::read_columns;
use wavemap_core::Error;

const REFERENCE: &str = include_str!("../docs/config-reference.toml");

fn manifest(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

/// Every file under `dir`, relative to it.
fn files_under(dir: &Path) -> BTreeSet<PathBuf> {
    let mut out = BTreeSet::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out
}

/// Every file is listed by exactly one manifest, and only top-level
/// manifests go unlisted.
fn assert_manifests_cover(dir: &Path, top: &Path) {
    let mut listed = Vec::new();
    for f in files_under(dir) {
        if f.file_name().unwrap() == "manifest.json" {
            let m = manifest(&dir.join(&f));
            let base = f.parent().unwrap().to_path_buf();
            for rec in m["files"].as_array().unwrap() {
                listed.push(base.join(rec["path"].as_str().unwrap()));
            }
        }
    }
    let unique: BTreeSet<_> = listed.iter().cloned().collect();
    assert_eq!(unique.len(), listed.len(), "a file is listed twice");
    let mut expected = files_under(dir);
    expected.remove(top);
    assert_eq!(unique, expected);
}

fn small_sim(cfg: &mut RunConfig) {
    cfg.simulate.dr = 5e-4;
    cfg.simulate.t_end = 0.1;
    cfg.verify_rate.nus = vec![1.0];
}

#[test]
fn reference_file_lists_the_defaults() {
    assert_eq!(RunConfig::from_toml(REFERENCE).unwrap(), RunConfig::default());
    assert!(RunConfig::default().validate().is_empty());
}

#[test]
fn toml_and_json_are_equivalent() {
    let cfg = RunConfig::from_toml(REFERENCE).unwrap();
    let json = serde_json::to_string(&cfg).unwrap();
    assert_eq!(RunConfig::from_json(&json).unwrap(), cfg);
    let partial = RunConfig::from_toml("[simulate]\nnu = 0.25\n").unwrap();
    let partial_json = RunConfig::from_json(r#"{"simulate": {"nu": 0.25}}"#).unwrap();
    assert_eq!(partial, partial_json);
    assert_eq!(partial.simulate.dr, 2e-4);
}

#[test]
fn unknown_keys_are_rejected() {
    for text in ["sed = 3", "[simulate]\nnu = 1\nstep = 2", "[parametrix.zeroth_options]\nxi = 1"] {
        match RunConfig::from_toml(text) {
            Err(Error::Config(m)) => assert!(m[0].contains("unknown field"), "{m:?}"),
            other => panic!("{text:?} gave {other:?}"),
        }
    }
    assert!(matches!(RunConfig::from_json(r#"{"profile": {"k": 2}}"#), Err(Error::Config(_))));
}

#[test]
fn validation_names_every_bad_field() {
    let mut cfg = RunConfig::default();
    cfg.simulate.nu = -1.0;
    cfg.simulate.cfl = 1.5;
    cfg.profile.order = 3;
    cfg.verify_rate.nus.clear();
    let errs = cfg.validate();
    for field in ["simulate.nu", "simulate.cfl", "profile.order", "verify_rate.nus"] {
        assert!(errs.iter().any(|e| e.starts_with(field)), "{field} missing from {errs:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(dispatch(Command::Profile, &cfg, dir.path()), Err(Error::Config(e)) if e.len() == 4));
}

#[test]
fn order_zero_profile_crosses_half_pi_at_unit_scale() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.profile.order = 0;
    let path = dispatch(Command::Profile, &cfg, dir.path()).unwrap();
    let m = manifest(&path);
    assert_eq!(m["results"]["u_at_unit"].as_f64().unwrap(), std::f64::consts::FRAC_PI_2);
    let (h, cols) = read_columns(&dir.path().join("profile.csv")).unwrap();
    assert_eq!(h, ["r", "R", "u", "q", "correction", "t2_residual"]);
    let i = cols[1].iter().position(|&x| x == 1.0).expect("R = 1 node");
    assert!((cols[3][i] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    assert!(cols[4].iter().all(|&c| c == 0.0));
    assert_manifests_cover(dir.path(), Path::new("manifest.json"));
}

#[test]
fn spectral_density_grows_linearly() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.spectral.corpus = false;
    let m = manifest(&dispatch(Command::Spectral, &cfg, dir.path()).unwrap());
    let slope = m["fits"]["rho_slope"]["value"].as_f64().unwrap();
    assert!((slope - 1.0).abs() < 0.05, "slope {slope}");
    assert!(m["fits"]["rho_slope"]["residual"].as_f64().unwrap() < 0.05);
    let (h, cols) = read_columns(&dir.path().join("spectral.csv")).unwrap();
    assert_eq!(h, ["xi", "re_a", "im_a", "rho"]);
    assert_eq!(cols[0].len(), cfg.tolerances.xi_points);
}

#[test]
fn manifest_records_inputs_and_versions() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.profile.order = 1;
    let m = manifest(&dispatch(Command::Profile, &cfg, dir.path()).unwrap());
    assert_eq!(m["command"], "profile");
    assert_eq!(m["inputs_hash"], inputs_hash(Command::Profile, &cfg).unwrap().as_str());
    assert_eq!(m["versions"]["wavemap"], env!("CARGO_PKG_VERSION"));
    assert!(m["wall_seconds"].as_f64().unwrap() >= 0.0);
    for key in ["d1", "d2"] {
        assert!(m["fits"][key]["residual"].as_f64().unwrap() < 1e-3);
    }
    // The output directory does not enter the hash; the seed does.
    let mut moved = cfg.clone();
    moved.out = PathBuf::from("elsewhere");
    assert_eq!(inputs_hash(Command::Profile, &moved).unwrap(), inputs_hash(Command::Profile, &cfg).unwrap());
    moved.seed += 1;
    assert_ne!(inputs_hash(Command::Profile, &moved).unwrap(), inputs_hash(Command::Profile, &cfg).unwrap());
}

#[test]
fn identical_inputs_give_identical_csvs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut cfg = RunConfig::default();
    cfg.parametrix.zeroth = false;
    cfg.parametrix.bound_samples = 200;
    small_sim(&mut cfg);
    for (cmd, sub) in [(Command::Profile, "p"), (Command::Parametrix, "m"), (Command::Simulate, "s")] {
        dispatch(cmd, &cfg, &a.path().join(sub)).unwrap();
        dispatch(cmd, &cfg, &b.path().join(sub)).unwrap();
    }
    let files = files_under(a.path());
    assert_eq!(files, files_under(b.path()));
    for f in files.iter().filter(|f| f.extension().unwrap() == "csv") {
        let (x, y) = (std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
        assert!(x == y, "{} differs", f.display());
    }
    // A new seed moves the symbol sample.
    cfg.seed = 8;
    dispatch(Command::Parametrix, &cfg, &b.path().join("m")).unwrap();
    let f = Path::new("m/symbol_sample.csv");
    assert_ne!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
}

#[test]
fn simulate_writes_snapshots_and_rate_tables() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    small_sim(&mut cfg);
    cfg.simulate.snapshot_times = vec![0.4, 0.2];
    let m = manifest(&dispatch(Command::Simulate, &cfg, dir.path()).unwrap());
    for f in ["samples.csv", "rate.csv", "local_energy.csv", "snapshot_000.csv", "snapshot_001.csv", "final.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let (_, snap) = read_columns(&dir.path().join("snapshot_001.csv")).unwrap();
    assert_eq!(snap[0].len(), snap[1].len());
    assert_eq!(m["results"]["t_stop"].as_f64().unwrap(), 0.1);
    assert_eq!(m["truncated"], false);
    assert!(m["fits"]["p"]["residual"].is_number());
    assert_manifests_cover(dir.path(), Path::new("manifest.json"));
}

#[test]
fn verify_rate_reports_the_exponent_against_one_plus_nu() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    small_sim(&mut cfg);
    cfg.verify_rate.nus = vec![0.5, 1.0];
    let m = manifest(&dispatch(Command::VerifyRate, &cfg, dir.path()).unwrap());
    let runs = m["results"]["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    let mut all = true;
    for r in runs {
        let (nu, p) = (r["nu"].as_f64().unwrap(), r["p"].as_f64().unwrap());
        assert_eq!(r["target_p"].as_f64().unwrap(), 1.0 + nu);
        let ok = (p - 1.0 - nu).abs() / (1.0 + nu) <= 0.1;
        assert_eq!(r["within_tolerance"].as_bool().unwrap(), ok);
        all &= ok;
        let tag = format!("nu{nu}_");
        assert_eq!(m["fits"][format!("{tag}p")]["value"].as_f64().unwrap(), p);
        assert!(dir.path().join(format!("{tag}rate.csv")).exists());
    }
    assert_eq!(m["results"]["passed"].as_bool().unwrap(), all);
}

#[test]
fn test_all_nests_one_manifest_per_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    small_sim(&mut cfg);
    cfg.spectral.corpus = false;
    cfg.parametrix.zeroth = false;
    cfg.parametrix.bound_samples = 100;
    let m = manifest(&dispatch(Command::TestAll, &cfg, dir.path()).unwrap());
    let listed: Vec<&str> = m["files"].as_array().unwrap().iter().map(|f| f["path"].as_str().unwrap()).collect();
    assert_eq!(
        listed,
        ["profile/manifest.json", "spectral/manifest.json", "parametrix/manifest.json", "verify-rate/manifest.json"]
    );
    assert!(m["results"]["verify-rate"]["runs"].is_array());
    assert_manifests_cover(dir.path(), Path::new("manifest.json"));
}

fn wavemap(args: &[&str]) -> (i32, String, String) {
    let out = Process::new(env!("CARGO_BIN_EXE_wavemap")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn exit_codes_and_error_records() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let write = |name: &str, text: &str| {
        let p = d.join(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_owned()
    };
    let out = d.join("out");
    let out = out.to_str().unwrap();

    let ok = write("ok.toml", "[profile]\norder = 0\n");
    let (code, stdout, _) = wavemap(&["profile", "--config", &ok, "--out", out, "--seed", "3"]);
    assert_eq!(code, 0);
    assert_eq!(manifest(Path::new(stdout.trim()))["seed"], 3);

    let bad = write("bad.json", r#"{"simulate": {"dr": -1, "cfl": 2}}"#);
    let (code, _, stderr) = wavemap(&["simulate", "--config", &bad, "--out", out]);
    assert_eq!(code, EXIT_CONFIG);
    let rec: Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(rec["kind"], "config");
    assert_eq!(rec["messages"].as_array().unwrap().len(), 2);

    let unknown = write("unknown.toml", "[simulate]\nnu = 1\nspeed = 2\n");
    let (code, _, stderr) = wavemap(&["simulate", "--config", &unknown]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(stderr.contains("line 3") && stderr.contains("speed"), "{stderr}");

    let coarse = write("coarse.toml", "[simulate]\ndr = 0.05\n");
    let (code, _, stderr) = wavemap(&["simulate", "--config", &coarse, "--out", out]);
    assert_eq!(code, EXIT_NUMERICAL);
    let rec: Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(rec["kind"], "grid_too_coarse");
    assert_eq!(rec["exit_code"], EXIT_NUMERICAL);

    let (code, _, _) = wavemap(&["frobnicate"]);
    assert_eq!(code, EXIT_CONFIG);
    let (code, stdout, _) = wavemap(&["--help"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("verify-rate"));
}
