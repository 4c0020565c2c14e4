use std::path::PathBuf;

use lhy_core::approximation::approximate;
use lhy_core::params::{check, fmt_rational, Concrete};
use lhy_core::scattering::{default_r_max, solve, DEFAULT_TOL};
use num_rational::Rational64;
use serde_json::{json, Value};

use super::bogo::energy_rows;
use super::params::system_for;
use super::scatter::load_potential;
use crate::args::PipelineArgs;
use crate::config::{PipelineFile, RunConfig};
use crate::output::{self, faithful, num};
use crate::Failure;

struct Settings {
    potential: PathBuf,
    t: f64,
    delta: Option<f64>,
    rho_a3: Vec<f64>,
    kappa: Rational64,
    out_dir: Option<PathBuf>,
}

/// Merge flags over the run file; record which keys the flags overrode.
fn settings(args: PipelineArgs, cfg: &mut RunConfig) -> Result<Settings, Failure> {
    let file = match &args.config {
        Some(p) => PipelineFile::load(p)?,
        None => PipelineFile::default(),
    };
    let mut note = |key: &str, flag: bool, in_file: bool, value: String| {
        if flag && in_file {
            cfg.overrides.push((key.to_owned(), value));
        }
    };
    note("potential", args.potential.is_some(), file.potential.is_some(), format!("{:?}", args.potential));
    note("T", args.t.is_some(), file.t.is_some(), format!("{:?}", args.t));
    note("delta", args.delta.is_some(), file.delta.is_some(), format!("{:?}", args.delta));
    note("rho_a3", args.rho_a3.is_some(), file.rho_a3.is_some(), format!("{:?}", args.rho_a3));
    note("kappa", args.kappa.is_some(), file.kappa.is_some(), format!("{:?}", args.kappa));
    note("out_dir", args.out_dir.is_some(), file.out_dir.is_some(), format!("{:?}", args.out_dir));

    let missing = |k: &str| Failure::Validation(format!("pipeline needs `{k}` (flag or run file)"));
    let file_kappa = file.kappa()?;
    Ok(Settings {
        potential: args.potential.or(file.potential).ok_or_else(|| missing("potential"))?,
        t: args.t.or(file.t).ok_or_else(|| missing("T"))?,
        delta: args.delta.or(file.delta),
        rho_a3: args.rho_a3.or(file.rho_a3).ok_or_else(|| missing("rho_a3"))?,
        kappa: args.kappa.or(file_kappa).unwrap_or(Rational64::new(1, 4)),
        out_dir: args.out_dir.or(file.out_dir),
    })
}

pub fn pipeline(args: PipelineArgs) -> Result<(), Failure> {
    let mut cfg = RunConfig::new("pipeline").input(args.config.as_deref());
    let s = settings(args, &mut cfg)?;
    if let Some(dir) = &s.out_dir {
        if !dir.is_dir() {
            return Err(Failure::Validation(format!("{}: output directory does not exist", dir.display())));
        }
    }
    let outs = s.out_dir.as_ref().map(|d| ["certificate.json", "lhy.csv", "params.json"].map(|f| d.join(f)));
    cfg = cfg.input(Some(&s.potential));
    for p in outs.iter().flatten() {
        cfg = cfg.output(Some(p));
    }
    let cfg = cfg.resolve()?;
    if let Some(&x) = s.rho_a3.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
        return Err(Failure::Validation(format!("rho a^3 must lie in (0, 1), got {x}")));
    }

    let v = load_potential(cfg.inputs.last().expect("potential resolved"))?;
    let delta = s.delta.unwrap_or(s.t.powi(-2));
    let (v_t, cert) = approximate(&v, s.t, delta)?;
    let sol_t = solve(&v_t, default_r_max(v_t.support_radius()), DEFAULT_TOL)?;
    let a = cert.a_original;
    // a ≤ a(v_T) + (deficit bound)·a, with every quantity measured
    let chain_rhs = cert.a_approx + cert.deficit_bound * a;
    let chain_ok = a <= chain_rhs * (1.0 + 1e-12);

    let rows = energy_rows(&s.rho_a3, &sol_t.g(), a)?;
    let r_over_a = v_t.support_radius() / a;
    let system = system_for(s.kappa)?;
    let params: Vec<Value> = s
        .rho_a3
        .iter()
        .map(|&x| {
            let rep = check(&system, system.m, Some(Concrete { rho_a3: x, r_over_a }))?;
            Ok(json!({
                "rho_a3": x,
                "r_over_a": r_over_a,
                "pass": rep.pass,
                "min_margin": rep.min_margin.as_ref().map(fmt_rational),
                "min_margin_relation": rep.min_margin_relation,
                "failing": rep.failing,
            }))
        })
        .collect::<Result<_, lhy_core::Error>>()?;

    println!("a = {:?}", a);
    println!("a_T = {:?}", cert.a_approx);
    println!("relative_deficit = {}", num(cert.relative_deficit));
    println!("deficit_bound = {}", num(cert.deficit_bound));
    println!("chain = {}", if chain_ok && cert.all_ok() { "ok" } else { "FAILED" });
    for r in &rows {
        println!("rho_a3 = {}: rel_deviation = {}", num(r[0]), num(r[5]));
    }

    if let Some([cert_path, lhy_path, params_path]) = outs.map(|_| [0, 1, 2].map(|i| cfg.outputs[i].clone())) {
        let mut bundle = serde_json::to_value(&cert).map_err(|e| Failure::Validation(e.to_string()))?;
        if let Value::Object(map) = &mut bundle {
            map.insert("support_radius_T".into(), v_t.support_radius().into());
            map.insert("chain_rhs".into(), chain_rhs.into());
            map.insert("chain_ok".into(), chain_ok.into());
            map.insert("all_ok".into(), (chain_ok && cert.all_ok()).into());
            let overrides: serde_json::Map<String, Value> =
                cfg.overrides.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
            map.insert("overrides".into(), Value::Object(overrides));
        }
        output::write_json(&cert_path, &faithful(bundle))?;

        let mut w = output::csv_to(Some(&lhy_path))?;
        output::header(&mut w, &["rho_a3", "e_leading", "e_LHY", "integral", "second_order", "rel_deviation"])?;
        for r in &rows {
            output::row(&mut w, r)?;
        }
        output::finish(w)?;

        output::write_json(&params_path, &faithful(Value::Array(params)))?;
    }

    if chain_ok && cert.all_ok() {
        Ok(())
    } else {
        Err(Failure::Validation("approximation certificate does not hold".into()))
    }
}
