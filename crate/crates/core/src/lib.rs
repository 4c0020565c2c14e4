//! Numerical kernels for the Lee–Huang–Yang lower bound of the dilute Bose gas.

pub mod approximation;
pub mod bogoliubov;
pub mod error;
pub mod localization;
pub mod matrixloc;
pub mod params;
pub mod potentials;
pub mod quad;
pub mod radial;
pub mod scattering;

pub use error::{Error, Result};
pub use potentials::{RadialPotential, ShellMeasure};
pub use radial::RadialFunction;
pub use scattering::{scattering_length, solve, ScatteringSolution};
