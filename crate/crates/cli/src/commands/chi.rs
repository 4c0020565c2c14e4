use lhy_core::localization::{chi_normalization, LocalizationFunction, DECAY_CONSTANT_MAX_M};
use lhy_core::quad::GaussLegendre;

use crate::args::ChiArgs;
use crate::config::RunConfig;
use crate::output::{self, num};
use crate::Failure;

/// `∫χ²` from the one-dimensional profile, which factorises.
fn l2_norm_squared(chi: &LocalizationFunction) -> f64 {
    let rule = GaussLegendre::new(64);
    let pieces = 16;
    let h = 1.0 / pieces as f64;
    let one_d: f64 = (0..pieces)
        .map(|i| {
            let lo = -0.5 + i as f64 * h;
            rule.integrate(lo, lo + h, |y| chi.profile(y).powi(2))
        })
        .sum();
    chi.normalization().powi(2) * one_d.powi(3)
}

pub fn chi(args: ChiArgs) -> Result<(), Failure> {
    let cfg = RunConfig::new("chi").output(args.emit_hat.as_deref()).resolve()?;
    let chi = LocalizationFunction::new(args.m)?;
    let decay = if args.m <= DECAY_CONSTANT_MAX_M { Some(chi.decay_constant()?) } else { None };

    println!("M = {}", args.m);
    println!("C_M = {}", num(chi_normalization(args.m)));
    println!("l2_norm_squared = {}", num(l2_norm_squared(&chi)));
    println!("decay_slope = {}", num(chi.decay_slope(100.0, 1e4)));
    match decay {
        Some(c) => println!("decay_constant = {}", num(c)),
        None => println!("decay_constant = n/a (M > {DECAY_CONSTANT_MAX_M})"),
    }

    if let Some(path) = cfg.outputs.first() {
        if args.points < 2 || !(args.k_max > 0.0) {
            return Err(Failure::Validation("need at least 2 points and a positive k-max".into()));
        }
        let mut w = output::csv_to(Some(path))?;
        output::header(&mut w, &["k", "chi_hat", "decay_bound"])?;
        let half_m = f64::from(args.m) / 2.0;
        for i in 0..args.points {
            let k = args.k_max * i as f64 / (args.points - 1) as f64;
            let bound = decay.map_or(f64::NAN, |c| c * (1.0 + k * k).powf(-half_m));
            output::row(&mut w, &[k, chi.hat([k, 0.0, 0.0]), bound])?;
        }
        output::finish(w)?;
    }
    Ok(())
}
