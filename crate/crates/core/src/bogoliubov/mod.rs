//! Bogoliubov mode data and the integrals that produce the Lee–Huang–Yang
//! term.
//!
//! A single pair of modes with `A(n₊ + n₋) + B(a₊*a₋* + a₊a₋) + κ(a₊* + a₋) + h.c.`
//! is diagonalised in closed form by [`dispersion`]; [`fock`] checks that
//! identity against a truncated Fock space, and [`lhy`] integrates the
//! ground-state shifts over momentum.

pub mod fock;
pub mod lhy;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use fock::diagonalize_mode_numeric;
pub use lhy::{
    alpha_bound_check, apriori_integral_check, ground_state_integral, lhy_constant, lhy_constant_exact,
    AlphaBoundReport, AprioriHypotheses, AprioriReport, GroundStateIntegral, Kinetic, LhyConstant,
};

/// `128/(15√π)`.
pub fn lhy_coefficient() -> f64 {
    128.0 / (15.0 * std::f64::consts::PI.sqrt())
}

/// `4πaρ²(1 + 128/(15√π)·√(ρa³))`.
pub fn lhy_energy(rho: f64, a: f64) -> f64 {
    4.0 * std::f64::consts::PI * a * rho * rho * (1.0 + lhy_coefficient() * (rho * a.powi(3)).sqrt())
}

/// Localised kinetic multiplier
/// `(1−ε_T)[p − (2sℓ)⁻¹]₊² + ε_T[p − (2dsℓ)⁻¹]₊²`.
pub fn tau(p: f64, eps_t: f64, s: f64, d: f64, ell: f64) -> f64 {
    let pos = |x: f64| if x > 0.0 { x * x } else { 0.0 };
    (1.0 - eps_t) * pos(p - 1.0 / (2.0 * s * ell)) + eps_t * pos(p - 1.0 / (2.0 * d * s * ell))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeCoefficients {
    pub a: f64,
    pub b: f64,
    pub kappa: Complex64,
}

impl ModeCoefficients {
    pub fn new(a: f64, b: f64, kappa: Complex64) -> Result<Self> {
        let m = Self { a, b, kappa };
        m.validate()?;
        Ok(m)
    }

    /// `|B| < A` or `B = A`.
    pub fn validate(&self) -> Result<()> {
        let ok =
            self.a.is_finite() && self.b.is_finite() && (self.b.abs() < self.a || (self.b == self.a && self.a > 0.0));
        if ok || (self.a == 0.0 && self.b == 0.0) {
            Ok(())
        } else {
            Err(Error::UnstableMode { a: self.a, b: self.b })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dispersion {
    /// `½(A + √(A² − B²))`.
    pub d: f64,
    /// `(A − √(A² − B²))/B`, zero for `B = 0`.
    pub alpha: f64,
    /// `2κ̄/(A + B + √(A² − B²))`.
    pub c0: Complex64,
    /// `−(A − √(A² − B²)) − 2|κ|²/(A + B)`.
    pub ground_shift: f64,
}

pub fn dispersion(m: &ModeCoefficients) -> Result<Dispersion> {
    m.validate()?;
    let (a, b) = (m.a, m.b);
    let root = ((a - b) * (a + b)).max(0.0).sqrt();
    // A − √(A²−B²) = B²/(A + √(A²−B²)) avoids cancellation for small B
    let gap = if a + root > 0.0 { b * b / (a + root) } else { 0.0 };
    let alpha = if b == 0.0 { 0.0 } else { gap / b };
    let denom = a + b + root;
    let c0 = if denom > 0.0 { 2.0 * m.kappa.conj() / denom } else { Complex64::new(0.0, 0.0) };
    let pair = a + b;
    let linear = if m.kappa.norm_sqr() == 0.0 { 0.0 } else { 2.0 * m.kappa.norm_sqr() / pair };
    Ok(Dispersion { d: 0.5 * (a + root), alpha, c0, ground_shift: -gap - linear })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mode(a: f64, b: f64) -> ModeCoefficients {
        ModeCoefficients::new(a, b, Complex64::new(0.0, 0.0)).unwrap()
    }

    #[test]
    fn worked_examples() {
        let d = dispersion(&mode(2.0, 1.0)).unwrap();
        let s3 = 3f64.sqrt();
        assert!((d.d - (2.0 + s3) / 2.0).abs() < 1e-15);
        assert!((d.alpha - (2.0 - s3)).abs() < 1e-15);
        assert!((d.ground_shift + (2.0 - s3)).abs() < 1e-15);

        let d = dispersion(&mode(1.5, 0.0)).unwrap();
        assert_eq!((d.d, d.alpha, d.ground_shift), (1.5, 0.0, 0.0));

        let d = dispersion(&mode(1.0, 1.0)).unwrap();
        assert_eq!((d.d, d.alpha, d.ground_shift), (0.5, 1.0, -1.0));
    }

    #[test]
    fn rejects_unstable() {
        assert!(matches!(ModeCoefficients::new(1.0, 1.5, Complex64::new(0.0, 0.0)), Err(Error::UnstableMode { .. })));
        assert!(ModeCoefficients::new(1.0, -1.0, Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn shifted_oscillator() {
        let m = ModeCoefficients::new(1.0, 0.0, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(dispersion(&m).unwrap().ground_shift, -2.0);
    }

    #[test]
    fn tau_limits() {
        assert_eq!(tau(0.0, 0.1, 0.5, 0.2, 10.0), 0.0);
        let (s, ell) = (0.5, 4.0);
        let p = 1.0 / (s * ell);
        assert!((tau(p, 0.0, s, 0.3, ell) - p * p / 4.0).abs() < 1e-15);
        let big = 1e6;
        assert!((tau(big, 0.1, s, 0.3, ell) / (big * big) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn lhy_energy_values() {
        let pi = std::f64::consts::PI;
        assert!((lhy_energy(1.0, 1.0) - 73.066_128_725_267_5).abs() < 1e-10);
        assert!((lhy_energy(2.0, 0.0) - 0.0).abs() < 1e-15);
        // ρa³ → 0 leaves the leading term
        let (rho, a) = (1e-20, 1.0);
        assert!((lhy_energy(rho, a) / (4.0 * pi * a * rho * rho) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn phonon_slope() {
        let g0 = 8.0 * std::f64::consts::PI;
        let rho = 0.01;
        let k = 1e-3;
        let a = k * k + rho * g0;
        let d = dispersion(&mode(a, rho * g0)).unwrap();
        // 2d − A = √(A² − B²) ≈ k√(2ρĝ(0)) in the phonon regime
        let root = 2.0 * d.d - a;
        assert!((root / k / (2.0 * rho * g0).sqrt() - 1.0).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn dispersion_invariants(a in 0.01f64..100.0, frac in 0.0f64..1.0, kr in -3.0f64..3.0, ki in -3.0f64..3.0) {
            let b = a * frac;
            let m = ModeCoefficients::new(a, b, Complex64::new(kr, ki)).unwrap();
            let d = dispersion(&m).unwrap();
            prop_assert!(d.d >= a / 2.0 - 1e-12 * a);
            prop_assert!(d.alpha >= 0.0 && d.alpha <= 1.0 + 1e-12);
            let root = (a * a - b * b).sqrt();
            prop_assert!((d.alpha * (a + root) - b).abs() <= 1e-10 * a);
            prop_assert!(d.ground_shift <= 0.0);
        }

        #[test]
        fn large_k_dispersion(k in 1e2f64..1e5, w in 0.0f64..10.0) {
            let a = k * k + w;
            let d = dispersion(&ModeCoefficients::new(a, w, Complex64::new(0.0, 0.0)).unwrap()).unwrap();
            prop_assert!((d.d / (k * k) - 1.0).abs() < 2.0 * w / (k * k) + 1e-12);
        }
    }
}
