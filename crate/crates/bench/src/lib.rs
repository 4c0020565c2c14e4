//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;

use lhy_core::bogoliubov::ModeCoefficients;
use lhy_core::{RadialFunction, RadialPotential, ShellMeasure};
use num_complex::Complex64;

/// Named potentials covering each solver path: hard core, smooth pieces,
/// a shell and a stiff well.
pub fn potentials() -> Vec<(&'static str, RadialPotential)> {
    vec![
        ("hard_core", RadialPotential::hard_core(1.0).expect("valid")),
        ("square_well_2", RadialPotential::square_well(2.0, 1.0).expect("valid")),
        ("square_well_200", RadialPotential::square_well(200.0, 1.0).expect("valid")),
        ("shell_10", RadialPotential::shell(80.0 * PI, 1.0).expect("valid")),
    ]
}

/// `g = 8π δ(|x| − 1)`, the idealised input with `a = 1`.
pub fn unit_shell_g() -> RadialFunction {
    RadialFunction::shell_only(vec![ShellMeasure { radius: 1.0, mass: 8.0 * PI }])
}

/// A strongly squeezed and displaced mode.
pub fn squeezed_mode() -> ModeCoefficients {
    ModeCoefficients::new(1.0, 0.9, Complex64::new(0.2, 0.1)).expect("stable")
}
