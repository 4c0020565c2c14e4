use lhy_core::matrixloc::{ensemble, localize, read_bands, read_vector, BandedHermitian, Localized};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::args::MatlocArgs;
use crate::config::RunConfig;
use crate::output::{self, num};
use crate::Failure;

fn print_one(l: &Localized) {
    println!("window_start = {}", l.window_start);
    println!("window_len = {}", l.window_len);
    println!("energy = {}", num(l.energy));
    println!("lambda = {}", num(l.lambda));
    println!("bound = {}", num(l.bound));
    println!("margin = {}", num(l.margin()));
    println!("required_C = {}", num(l.required_constant()));
    println!("holds = {}", l.holds());
}

pub fn matloc(args: MatlocArgs) -> Result<(), Failure> {
    let cfg = RunConfig::new("matloc")
        .input(args.matrix.as_deref())
        .input(args.psi.as_deref())
        .output(args.out.as_deref())
        .resolve()?;
    if args.mprime == 0 {
        return Err(Failure::Validation("--mprime must be positive".into()));
    }
    if let Some(n) = args.ensemble {
        let trial = if args.ground_state { ensemble::ground_state_trial } else { ensemble::trial };
        let out = cfg.outputs.first().map(|p| p.as_path());
        return run_ensemble(n, trial, (args.trials, args.seed), args.mprime, args.c, out);
    }
    let a = read_bands(&cfg.inputs[0])?;
    let psi = read_vector(&cfg.inputs[1])?;
    let l = localize(&a, &psi, args.mprime, args.c)?;
    print_one(&l);
    if l.holds() {
        Ok(())
    } else {
        Err(Failure::Validation("windowed energy exceeds the bound".into()))
    }
}

type Trial = fn(u64, usize) -> (BandedHermitian, Vec<Complex64>);

fn run_ensemble(
    n: usize,
    trial: Trial,
    (trials, seed): (u64, u64),
    mprime: usize,
    c: f64,
    out: Option<&std::path::Path>,
) -> Result<(), Failure> {
    if mprime > n + 1 {
        return Err(Failure::Validation(format!("--mprime {mprime} exceeds the dimension {}", n + 1)));
    }
    let results: Vec<Localized> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let (a, psi) = trial(seed.wrapping_add(t), n + 1);
            localize(&a, &psi, mprime, c)
        })
        .collect::<Result<_, _>>()?;
    let held = results.iter().filter(|l| l.holds()).count();
    let worst = results.iter().map(Localized::required_constant).fold(0.0, f64::max);
    println!("trials = {trials}");
    println!("held = {held}");
    println!("max_required_C = {}", num(worst));
    if let Some(path) = out {
        let mut w = output::csv_to(Some(path))?;
        output::header(&mut w, &["seed", "energy", "lambda", "bound", "required_C", "holds"])?;
        for (t, l) in results.iter().enumerate() {
            let s = seed.wrapping_add(t as u64).to_string();
            let fields =
                [s, num(l.energy), num(l.lambda), num(l.bound), num(l.required_constant()), l.holds().to_string()];
            w.write_record(&fields).map_err(|e| Failure::Validation(e.to_string()))?;
        }
        output::finish(w)?;
    }
    if held as u64 == trials {
        Ok(())
    } else {
        Err(Failure::Validation(format!("bound failed in {} of {trials} trials", trials - held as u64)))
    }
}
