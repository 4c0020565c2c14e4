use std::f64::consts::PI;
use std::path::Path;

use lhy_core::approximation::approximate;
use lhy_core::potentials::load_spec;
use lhy_core::scattering::{default_r_max, solve};
use lhy_core::RadialPotential;
use serde_json::Value;

use crate::args::{ApproxArgs, ScatterArgs};
use crate::config::RunConfig;
use crate::output::{self, faithful, num};
use crate::Failure;

pub fn load_potential(path: &Path) -> Result<RadialPotential, Failure> {
    Ok(load_spec(path)?)
}

pub fn scatter(args: ScatterArgs) -> Result<(), Failure> {
    let mut cfg =
        RunConfig::new("scatter").input(Some(&args.potential)).output(args.emit_profile.as_deref()).resolve()?;
    cfg.tolerance = Some(args.tol);
    let v = load_potential(&cfg.inputs[0])?;
    let r_max = args.rmax.unwrap_or_else(|| default_r_max(v.support_radius()));
    let sol = solve(&v, r_max, args.tol)?;

    println!("a = {:?}", sol.a);
    println!("support_radius = {:?}", v.support_radius());
    println!("r_max = {r_max:?}");
    println!("integral_over_8pi = {:?}", v.integral() / (8.0 * PI));
    println!("g_integral_over_8pi = {:?}", sol.g().integral() / (8.0 * PI));
    println!("refinement_change = {:e}", sol.refinement_change);

    if let Some(path) = cfg.outputs.first() {
        let mut w = output::csv_to(Some(path))?;
        output::header(&mut w, &["r", "u", "phi", "omega", "g"])?;
        for r in sol.profile(args.rows) {
            output::row(&mut w, &r)?;
        }
        output::finish(w)?;
    }
    Ok(())
}

pub fn approx(args: ApproxArgs) -> Result<(), Failure> {
    let cfg = RunConfig::new("approx").input(Some(&args.potential)).output(Some(&args.emit_cert)).resolve()?;
    let v = load_potential(&cfg.inputs[0])?;
    let delta = args.delta.unwrap_or(args.t.powi(-2));
    let (v_t, cert) = approximate(&v, args.t, delta)?;

    let mut json = serde_json::to_value(&cert).map_err(|e| Failure::Validation(e.to_string()))?;
    if let Value::Object(map) = &mut json {
        map.insert("support_radius_T".into(), v_t.support_radius().into());
        map.insert("all_ok".into(), cert.all_ok().into());
    }
    output::write_json(&cfg.outputs[0], &faithful(json))?;

    println!("a = {:?}", cert.a_original);
    println!("a_T = {:?}", cert.a_approx);
    println!("relative_deficit = {}", num(cert.relative_deficit));
    println!("deficit_bound = {}", num(cert.deficit_bound));
    println!("integral_over_8pi = {} (bound {})", num(cert.integral_over_8pi), num(cert.t * cert.a_original));
    println!("certificate = {}", if cert.all_ok() { "ok" } else { "FAILED" });
    if cert.all_ok() {
        Ok(())
    } else {
        Err(Failure::Validation("approximation certificate does not hold".into()))
    }
}
