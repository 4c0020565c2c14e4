use lhy_core::params::{
    check, evaluate, fmt_rational, kappa_near_quarter, parse_relations, standard_system, Concrete, System, SystemReport,
};
use num_rational::Rational64;
use serde_json::Value;

use crate::args::{ParamsCheckArgs, ParamsCommand};
use crate::config::RunConfig;
use crate::output::{self, faithful};
use crate::Failure;

/// The standard system; `κ = ¼` is read as the limit from below.
pub fn system_for(kappa: Rational64) -> Result<System, Failure> {
    let kappa = if kappa == Rational64::new(1, 4) { kappa_near_quarter() } else { kappa };
    Ok(standard_system(kappa)?)
}

pub fn params(cmd: ParamsCommand) -> Result<(), Failure> {
    match cmd {
        ParamsCommand::Check(a) => params_check(a),
    }
}

fn print_summary(rep: &SystemReport) {
    println!("m = {}", fmt_rational(&rep.m));
    println!("M = {}", rep.big_m);
    println!("relations = {}", rep.relations.len());
    println!("conditional = {}", rep.conditional);
    match (&rep.min_margin, &rep.min_margin_relation) {
        (Some(m), Some(r)) => println!("min_margin = {} at {r}", fmt_rational(m)),
        _ => println!("min_margin = n/a"),
    }
    for f in &rep.failing {
        println!("failing: {f}");
    }
}

fn params_check(args: ParamsCheckArgs) -> Result<(), Failure> {
    let cfg = RunConfig::new("params check")
        .input(args.relations.as_deref())
        .output(args.emit_report.as_deref())
        .resolve()?;
    let mut system = system_for(args.kappa)?;
    if args.relations.is_some() {
        let text = std::fs::read_to_string(&cfg.inputs[0]).map_err(|e| Failure::io(&cfg.inputs[0], e))?;
        system.relations = parse_relations(&text)?;
    }
    let concrete = args.rho_a3.zip(args.r_over_a).map(|(rho_a3, r_over_a)| Concrete { rho_a3, r_over_a });
    let report = check(&system, system.m, concrete)?;
    print_summary(&report);

    if let Some(path) = cfg.outputs.first() {
        let mut json = serde_json::to_value(&report).map_err(|e| Failure::Validation(e.to_string()))?;
        if let (Some(x), Value::Object(map)) = (args.rho_a3, &mut json) {
            // a = 1 sets the unit; R defaults to 0 when not given
            let ev = evaluate(&system, x, 1.0, args.r_over_a.unwrap_or(0.0))?;
            map.insert("evaluation".into(), serde_json::to_value(ev).map_err(|e| Failure::Validation(e.to_string()))?);
        }
        output::write_json(path, &faithful(json))?;
    }

    let pass = match args.min_margin {
        Some(floor) => report.passes_with_floor(floor),
        None => report.pass,
    };
    if pass {
        Ok(())
    } else {
        Err(Failure::Validation(format!("{} relation(s) fail", report.failing.len().max(1))))
    }
}
