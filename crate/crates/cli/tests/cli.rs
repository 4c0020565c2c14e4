use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lhy-lab")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn workdir() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("hc.toml"), "type = \"hard_core\"\nradius = 1.0\n").unwrap();
    fs::write(dir.path().join("well.toml"), "type = \"square_well\"\nheight = 200.0\nradius = 1.0\n").unwrap();
    dir
}

/// Value of a `key = value` line.
fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
        .to_owned()
}

fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

#[test]
fn scatter_unit_hard_core() {
    let dir = workdir();
    let o = lab(dir.path(), &["scatter", "--potential", "hc.toml", "--emit-profile", "profile.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(field(&stdout(&o), "a"), "1.0");
    let profile = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(profile.starts_with("r,u,phi,omega,g\n"));
    let (r, u) = (csv_column(&profile, "r"), csv_column(&profile, "u"));
    let last = r.len() - 1;
    assert!((u[last] - (r[last] - 1.0)).abs() < 1e-9);
}

#[test]
fn scatter_square_well_closed_form() {
    let dir = workdir();
    let o = lab(dir.path(), &["scatter", "--potential", "well.toml"]);
    let a: f64 = field(&stdout(&o), "a").parse().unwrap();
    let k = 10f64;
    assert!((a - (1.0 - k.tanh() / k)).abs() < 1e-10);
}

#[test]
fn usage_errors_print_grammar() {
    let dir = workdir();
    for args in [&["scatter"][..], &["frobnicate"], &["params", "check", "--kappa", "x/y"], &[]] {
        let o = lab(dir.path(), args);
        assert_eq!(o.status.code(), Some(64), "{args:?}");
        assert!(stderr(&o).contains("Commands:"), "{args:?}");
    }
    let o = lab(dir.path(), &["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("pipeline"));
}

#[test]
fn validation_and_numerical_exit_codes() {
    let dir = workdir();
    let o = lab(dir.path(), &["scatter", "--potential", "missing.toml"]);
    assert_eq!(o.status.code(), Some(1));

    fs::write(dir.path().join("bad.toml"), "type = \"square_well\"\nheigth = 1.0\n").unwrap();
    let o = lab(dir.path(), &["scatter", "--potential", "bad.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let o = lab(dir.path(), &["approx", "--potential", "hc.toml", "--T", "1", "--emit-cert", "c.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("c.json").exists());

    // two extraction points cannot agree to 1e-18
    let o = lab(dir.path(), &["scatter", "--potential", "well.toml", "--tol", "1e-18"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let o = Command::new(env!("CARGO_BIN_EXE_lhy-lab"))
        .current_dir(dir.path())
        .env("LHYLAB_THREADS", "zero")
        .args(["lhy"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn outputs_checked_before_running() {
    let dir = workdir();
    let o = lab(dir.path(), &["approx", "--potential", "hc.toml", "--T", "10", "--emit-cert", "nodir/c.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).is_empty());
}

#[test]
fn approx_certificate_is_flat_and_faithful() {
    let dir = workdir();
    let o = lab(dir.path(), &["approx", "--potential", "hc.toml", "--T", "10", "--emit-cert", "c.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cert: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();
    let map = cert.as_object().unwrap();
    assert!(map.values().all(|v| !v.is_object() && !v.is_array()));
    let get = |k: &str| map[k].as_str().unwrap().parse::<f64>().unwrap();
    assert_eq!(get("a_original"), 1.0);
    assert!(get("integral_over_8pi") <= 10.0);
    assert!(get("relative_deficit") <= get("deficit_bound"));
    assert!(get("relative_deficit") >= 1.0 / 11.0);
    assert_eq!(map["all_ok"], Value::Bool(true));
}

#[test]
fn approx_with_unreachable_delta_is_numerical() {
    let dir = workdir();
    let o = lab(
        dir.path(),
        &["approx", "--potential", "hc.toml", "--T", "1000", "--delta", "1e-9", "--emit-cert", "c.json"],
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("nodes"));
}

#[test]
fn params_check_quarter() {
    let dir = workdir();
    let o = lab(dir.path(), &["params", "check", "--kappa", "1/4", "--emit-report", "r.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(field(&stdout(&o), "min_margin").starts_with("1/8 at KM * KR^1/2"));
    let rep: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(rep["min_margin"], "1/8");
    assert_eq!(rep["m"], "1/928");
    let rels = rep["relations"].as_array().unwrap();
    assert!(rels.iter().all(|r| r["lhs_exponent"].is_string() || r["lhs_exponent"].is_null()));

    let o = lab(dir.path(), &["params", "check", "--min-margin", "1/4"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn params_custom_relations() {
    let dir = workdir();
    fs::write(dir.path().join("ok.rel"), "# sample\nfirst: d^-2 << KH2\n").unwrap();
    let o = lab(dir.path(), &["params", "check", "--relations", "ok.rel"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    fs::write(dir.path().join("bad.rel"), "KH1 << KH2\n").unwrap();
    let o = lab(dir.path(), &["params", "check", "--relations", "bad.rel"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("failing: KH1 << KH2"));

    fs::write(dir.path().join("broken.rel"), "s << d\nd^ << s\n").unwrap();
    let o = lab(dir.path(), &["params", "check", "--relations", "broken.rel"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2, column 2"), "{}", stderr(&o));
}

#[test]
fn params_concrete_range() {
    let dir = workdir();
    let o = lab(dir.path(), &["params", "check", "--rho-a3", "1e-6", "--r-over-a", "1", "--emit-report", "r.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(field(&stdout(&o), "conditional"), "0");
    let rep: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert!(rep["evaluation"]["ell"].is_string());
}

#[test]
fn bogo_lhy_deviation_shrinks() {
    let dir = workdir();
    let o = lab(dir.path(), &["bogo", "lhy", "--rho-a3", "1e-6,1e-8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let dev = csv_column(&stdout(&o), "rel_deviation");
    assert_eq!(dev.len(), 2);
    assert!(dev[0] <= 1e-2 && dev[1] <= 1e-3 && dev[1] < dev[0], "{dev:?}");
}

#[test]
fn dispersion_is_deterministic_across_thread_counts() {
    let dir = workdir();
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_lhy-lab"))
            .current_dir(dir.path())
            .env("LHYLAB_THREADS", threads)
            .args(["bogo", "dispersion", "--rho", "1e-3", "--potential", "well.toml"])
            .output()
            .unwrap()
    };
    let (one, four) = (run("1"), run("4"));
    assert_eq!(one.status.code(), Some(0), "{}", stderr(&one));
    assert_eq!(one.stdout, four.stdout);
    let text = stdout(&one);
    assert!(text.starts_with("k,g_hat,A,B,D_k,alpha_k\n"));
    // alpha_k falls off once k² dominates ρĝ
    let alpha = csv_column(&text, "alpha_k");
    assert!(alpha.first().unwrap() > &0.9 && alpha.last().unwrap() < &1e-3);
}

#[test]
fn dispersion_reads_grid() {
    let dir = workdir();
    fs::write(dir.path().join("k.csv"), "k\n0.5\n1.0\n").unwrap();
    let o = lab(dir.path(), &["bogo", "dispersion", "--rho", "0.01", "--a", "1", "--grid", "k.csv", "--out", "d.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("d.csv")).unwrap();
    assert_eq!(csv_column(&text, "k"), vec![0.5, 1.0]);
    // k = 1: A = 1 + 8π/100, B = 8π/100
    let b = 8.0 * std::f64::consts::PI / 100.0;
    let d = csv_column(&text, "D_k")[1];
    assert!((d - 0.5 * (1.0 + b + (1.0 + 2.0 * b).sqrt())).abs() < 1e-10);
}

#[test]
fn lhy_constant_matches_closed_form() {
    let dir = workdir();
    let o = lab(dir.path(), &["lhy"]);
    assert_eq!(o.status.code(), Some(0));
    let err: f64 = field(&stdout(&o), "relative_error").parse().unwrap();
    assert!(err < 1e-6);
}

#[test]
fn chi_diagnostics() {
    let dir = workdir();
    let o = lab(dir.path(), &["chi", "--M", "4", "--emit-hat", "hat.csv", "--points", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let norm: f64 = field(&out, "l2_norm_squared").parse().unwrap();
    assert!((norm - 1.0).abs() < 1e-10);
    assert!(field(&out, "decay_slope").parse::<f64>().unwrap() >= 3.5);
    let text = fs::read_to_string(dir.path().join("hat.csv")).unwrap();
    let (hat, bound) = (csv_column(&text, "chi_hat"), csv_column(&text, "decay_bound"));
    assert_eq!(hat.len(), 50);
    assert!(hat.iter().zip(&bound).all(|(h, b)| h.abs() <= *b));
}

#[test]
fn matloc_from_files() {
    let dir = workdir();
    // tridiagonal: 2 on the diagonal, -1 off it
    let mut bands = String::from("k,i,re,im\n");
    for i in 0..6 {
        bands.push_str(&format!("0,{i},2,0\n"));
    }
    for i in 0..5 {
        bands.push_str(&format!("1,{i},-1,0\n"));
    }
    fs::write(dir.path().join("a.csv"), bands).unwrap();
    let entry = format!("{:?}\n", 1.0 / 6f64.sqrt());
    fs::write(dir.path().join("psi.csv"), entry.repeat(6)).unwrap();
    let o = lab(dir.path(), &["matloc", "--matrix", "a.csv", "--psi", "psi.csv", "--mprime", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert_eq!(field(&stdout(&o), "holds"), "true");
    // the lowest window eigenvalue for length 3 is 2 − √2
    let energy: f64 = field(&stdout(&o), "energy").parse().unwrap();
    assert!((energy - (2.0 - 2f64.sqrt())).abs() < 1e-9);

    let o = lab(dir.path(), &["matloc", "--matrix", "a.csv", "--mprime", "3"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn matloc_ensemble_is_seeded() {
    let dir = workdir();
    let run = || {
        lab(
            dir.path(),
            &["matloc", "--ensemble", "60", "--trials", "20", "--seed", "7", "--mprime", "10", "--out", "e.csv"],
        )
    };
    let first = run();
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let a = fs::read(dir.path().join("e.csv")).unwrap();
    run();
    assert_eq!(a, fs::read(dir.path().join("e.csv")).unwrap());
    assert_eq!(field(&stdout(&first), "held"), "20");
}

#[test]
fn matloc_ground_state_ensemble() {
    let dir = workdir();
    let o = lab(dir.path(), &["matloc", "--ensemble", "100", "--trials", "10", "--ground-state", "--mprime", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let c: f64 = field(&stdout(&o), "max_required_C").parse().unwrap();
    assert!(c > 0.0 && c < 4.0);
}

#[test]
fn pipeline_hard_core() {
    let dir = workdir();
    fs::create_dir(dir.path().join("out")).unwrap();
    // T = (ρa³)^(−1/2−η) with η = 1/12 at ρa³ = 10⁻⁴
    let t = 1e-4f64.powf(-0.5 - 1.0 / 12.0).to_string();
    fs::write(
        dir.path().join("run.toml"),
        format!("potential = \"hc.toml\"\nT = {t}\nrho_a3 = [1e-4]\nout_dir = \"out\"\n"),
    )
    .unwrap();
    let o = lab(dir.path(), &["pipeline", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cert: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/certificate.json")).unwrap()).unwrap();
    let get = |k: &str| cert[k].as_str().unwrap().parse::<f64>().unwrap();
    let t: f64 = t.parse().unwrap();
    assert!(get("relative_deficit") <= 2.0 / t);
    assert_eq!(cert["chain_ok"], Value::Bool(true));
    let table = fs::read_to_string(dir.path().join("out/lhy.csv")).unwrap();
    assert_eq!(csv_column(&table, "rho_a3"), vec![1e-4]);
    let params: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/params.json")).unwrap()).unwrap();
    assert_eq!(params[0]["min_margin"], "1/8");
}

#[test]
fn pipeline_rejects_bad_configs() {
    let dir = workdir();
    fs::write(dir.path().join("run.toml"), "potential = \"hc.toml\"\nT = 5.0\nrho_a3 = [1e-6]\ncolour = 1\n").unwrap();
    let o = lab(dir.path(), &["pipeline", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colour"));

    let o = lab(dir.path(), &["pipeline", "--potential", "hc.toml", "--T", "1", "--rho-a3", "1e-6"]);
    assert_eq!(o.status.code(), Some(1));

    let o = lab(dir.path(), &["pipeline", "--potential", "hc.toml", "--rho-a3", "1e-6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`T`"));
}

#[test]
fn pipeline_integrable_input_is_uncut() {
    let dir = workdir();
    fs::write(dir.path().join("soft.toml"), "type = \"square_well\"\nheight = 0.02\nradius = 1.0\n").unwrap();
    fs::create_dir(dir.path().join("out")).unwrap();
    let args = ["pipeline", "--potential", "soft.toml", "--T", "10", "--rho-a3", "1e-6,1e-8", "--out-dir", "out"];
    let o = lab(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cert: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/certificate.json")).unwrap()).unwrap();
    assert_eq!(cert["regime"], "uncut");
    assert_eq!(cert["a_original"], cert["a_approx"]);
    let first = fs::read(dir.path().join("out/lhy.csv")).unwrap();
    lab(dir.path(), &args);
    assert_eq!(first, fs::read(dir.path().join("out/lhy.csv")).unwrap());
}
