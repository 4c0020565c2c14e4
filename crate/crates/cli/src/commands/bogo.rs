use std::f64::consts::PI;
use std::path::Path;

use lhy_core::bogoliubov::{
    dispersion, ground_state_integral, lhy_coefficient, lhy_constant, lhy_constant_exact, lhy_energy, Kinetic,
    ModeCoefficients,
};
use lhy_core::scattering::{default_r_max, solve, DEFAULT_TOL};
use lhy_core::{RadialFunction, ShellMeasure};
use num_complex::Complex64;
use rayon::prelude::*;

use super::scatter::load_potential;
use crate::args::{BogoCommand, BogoLhyArgs, DispersionArgs, LhyArgs};
use crate::config::RunConfig;
use crate::output::{self, num};
use crate::Failure;

pub fn bogo(cmd: BogoCommand) -> Result<(), Failure> {
    match cmd {
        BogoCommand::Dispersion(a) => dispersion_table(a),
        BogoCommand::Lhy(a) => lhy_table(a),
    }
}

fn read_grid(path: &Path) -> Result<Vec<f64>, Failure> {
    let bad = |m: String| Failure::Validation(format!("{}: {m}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let mut ks = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        match rec.get(0).map(str::parse::<f64>) {
            Some(Ok(k)) if k >= 0.0 && k.is_finite() => ks.push(k),
            // a non-numeric first row is a header
            Some(Err(_)) if i == 0 => {}
            _ => return Err(bad(format!("row {}: expected a nonnegative k", i + 1))),
        }
    }
    if ks.is_empty() {
        return Err(bad("no k values".into()));
    }
    Ok(ks)
}

/// `n` log-spaced momenta spanning four decades around the healing scale.
fn default_grid(rho: f64, a: f64, n: usize) -> Vec<f64> {
    let kc = (8.0 * PI * rho * a).sqrt();
    (0..n).map(|i| kc * 10f64.powf(-2.0 + 4.0 * i as f64 / (n - 1) as f64)).collect()
}

fn dispersion_table(args: DispersionArgs) -> Result<(), Failure> {
    let cfg = RunConfig::new("bogo dispersion")
        .input(args.potential.as_deref())
        .input(args.grid.as_deref())
        .output(args.out.as_deref())
        .resolve()?;
    if !(args.rho > 0.0) {
        return Err(Failure::Validation(format!("rho must be positive, got {}", args.rho)));
    }
    let g = match &args.potential {
        Some(_) => {
            let v = load_potential(&cfg.inputs[0])?;
            Some(solve(&v, default_r_max(v.support_radius()), DEFAULT_TOL)?)
        }
        None => None,
    };
    let a = match (&g, args.a) {
        (Some(sol), _) => sol.a,
        (None, Some(a)) if a > 0.0 => a,
        (None, a) => return Err(Failure::Validation(format!("a must be positive, got {a:?}"))),
    };
    let ks = match &args.grid {
        Some(_) => read_grid(cfg.inputs.last().expect("grid resolved"))?,
        None => default_grid(args.rho, a, 200),
    };
    let g_fn = g.as_ref().map(|s| s.g());
    let rows: Vec<[f64; 6]> = ks
        .par_iter()
        .map(|&k| {
            let g_hat = g_fn.as_ref().map_or(8.0 * PI * a, |g| g.fourier(k));
            let (big_a, big_b) = (k * k + args.rho * g_hat, args.rho * g_hat);
            let d = dispersion(&ModeCoefficients::new(big_a, big_b, Complex64::new(0.0, 0.0))?)?;
            Ok([k, g_hat, big_a, big_b, d.d, d.alpha])
        })
        .collect::<Result<_, lhy_core::Error>>()?;

    let mut w = output::csv_to(cfg.outputs.first().map(|p| p.as_path()))?;
    output::header(&mut w, &["k", "g_hat", "A", "B", "D_k", "alpha_k"])?;
    for r in &rows {
        output::row(&mut w, r)?;
    }
    output::finish(w)
}

fn lhy_table(args: BogoLhyArgs) -> Result<(), Failure> {
    let cfg = RunConfig::new("bogo lhy").input(args.potential.as_deref()).output(args.out.as_deref()).resolve()?;
    if let Some(&x) = args.rho_a3.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
        return Err(Failure::Validation(format!("rho a^3 must lie in (0, 1), got {x}")));
    }
    let (g, a) = match &args.potential {
        Some(_) => {
            let v = load_potential(&cfg.inputs[0])?;
            let sol = solve(&v, default_r_max(v.support_radius()), DEFAULT_TOL)?;
            (sol.g(), sol.a)
        }
        // g = 8π δ(|x| − 1): ∫g = 8π, so a = 1
        None => (RadialFunction::shell_only(vec![ShellMeasure { radius: 1.0, mass: 8.0 * PI }]), 1.0),
    };
    let rows = energy_rows(&args.rho_a3, &g, a)?;
    let mut w = output::csv_to(cfg.outputs.first().map(|p| p.as_path()))?;
    output::header(&mut w, &["rho_a3", "e_leading", "e_LHY", "integral", "second_order", "rel_deviation"])?;
    for r in &rows {
        output::row(&mut w, r)?;
    }
    output::finish(w)
}

/// `(ρa³, 4πρ²a, e_LHY, integral, second-order term, relative deviation of
/// the second-order term from the LHY correction)` for each density.
pub fn energy_rows(rho_a3: &[f64], g: &RadialFunction, a: f64) -> Result<Vec<[f64; 6]>, Failure> {
    let rows = rho_a3
        .par_iter()
        .map(|&x| {
            let rho = x / a.powi(3);
            let r = ground_state_integral(rho, g, 0.0, &Kinetic::Free)?;
            let leading = 4.0 * PI * rho * rho * a;
            let lhy = leading * lhy_coefficient() * x.sqrt();
            let second = r.second_order_term();
            Ok([x, leading, lhy_energy(rho, a), r.value, second, ((second - lhy) / lhy).abs()])
        })
        .collect::<Result<Vec<_>, lhy_core::Error>>()?;
    Ok(rows)
}

pub fn lhy(args: LhyArgs) -> Result<(), Failure> {
    let c = lhy_constant(args.tol)?;
    let exact = lhy_constant_exact();
    println!("constant = {:?}", c.value);
    println!("closed_form = {exact:?}");
    println!("relative_error = {:e}", ((c.value - exact) / exact).abs());
    println!("cutoff = {:?}", c.t0);
    println!("tail = {:e}", c.tail);
    println!("error_estimate = {:e}", c.quadrature_error + c.tail_error);
    if let (Some(rho), Some(a)) = (args.rho, args.a) {
        if !(rho > 0.0 && a > 0.0) {
            return Err(Failure::Validation("rho and a must be positive".into()));
        }
        println!("rho_a3 = {}", num(rho * a.powi(3)));
        println!("e_leading = {}", num(4.0 * PI * rho * rho * a));
        println!("e_LHY = {}", num(lhy_energy(rho, a)));
    }
    Ok(())
}
