//! Radial functions on ℝ³ given by a piecewise smooth density plus shell
//! measures, with their integrals, radial Fourier transforms and Coulomb
//! pairings.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::potentials::ShellMeasure;
use crate::quad::gl8;

pub type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// A radial function `f(|x|)` with a density that is smooth between
/// consecutive knots (and zero outside them), plus finitely many shells.
#[derive(Clone)]
pub struct RadialFunction {
    knots: Vec<f64>,
    density: Density,
    shells: Vec<ShellMeasure>,
}

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialFunction")
            .field("panels", &self.knots.len().saturating_sub(1))
            .field("support", &self.support_radius())
            .field("shells", &self.shells)
            .finish()
    }
}

impl RadialFunction {
    /// `knots` must be nondecreasing; empty panels are dropped.
    pub fn new(mut knots: Vec<f64>, density: Density, shells: Vec<ShellMeasure>) -> Self {
        knots.dedup();
        debug_assert!(knots.windows(2).all(|w| w[1] > w[0]), "knots must increase");
        Self { knots, density, shells }
    }

    pub fn zero() -> Self {
        Self { knots: Vec::new(), density: Arc::new(|_| 0.0), shells: Vec::new() }
    }

    pub fn shell_only(shells: Vec<ShellMeasure>) -> Self {
        Self { shells, ..Self::zero() }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn shells(&self) -> &[ShellMeasure] {
        &self.shells
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn support_radius(&self) -> f64 {
        let dens = self.knots.last().copied().unwrap_or(0.0);
        self.shells.iter().map(|s| s.radius).fold(dens, f64::max)
    }

    /// Density value (shells have no pointwise value).
    pub fn value(&self, r: f64) -> f64 {
        match (self.knots.first(), self.knots.last()) {
            (Some(&lo), Some(&hi)) if r >= lo && r <= hi => (self.density)(r),
            _ => 0.0,
        }
    }

    /// Same knots and shells with the density multiplied by `factor(r)`;
    /// shell masses are multiplied by `factor(radius)`.
    pub fn multiplied<F>(&self, factor: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let factor = Arc::new(factor);
        let inner = Arc::clone(&self.density);
        let f2 = Arc::clone(&factor);
        let shells = self.shells.iter().map(|s| ShellMeasure { mass: s.mass * factor(s.radius), ..*s }).collect();
        Self { knots: self.knots.clone(), density: Arc::new(move |r| inner(r) * f2(r)), shells }
    }

    fn panels(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.knots.windows(2).map(|w| (w[0], w[1]))
    }

    /// `∫f = 4π∫ f r² dr + Σ masses`.
    pub fn integral(&self) -> f64 {
        let rule = gl8();
        let dens: f64 = self.panels().map(|(a, b)| rule.integrate(a, b, |r| (self.density)(r) * r * r)).sum();
        4.0 * PI * dens + self.shells.iter().map(|s| s.mass).sum::<f64>()
    }

    /// `f̂(k) = 4π∫ f(r) sinc(kr) r² dr + Σ m sinc(kρ)`.
    pub fn fourier(&self, k: f64) -> f64 {
        let rule = gl8();
        let mut acc = 0.0;
        for (a, b) in self.panels() {
            let pieces = ((k * (b - a) / 2.0).ceil() as usize).max(1);
            let h = (b - a) / pieces as f64;
            for j in 0..pieces {
                let lo = a + j as f64 * h;
                let hi = if j + 1 == pieces { b } else { lo + h };
                acc += rule.integrate(lo, hi, |r| (self.density)(r) * sinc(k * r) * r * r);
            }
        }
        4.0 * PI * acc + self.shells.iter().map(|s| s.mass * sinc(k * s.radius)).sum::<f64>()
    }

    /// Newtonian potential `Φ(r) = ∫ f(y)/|x − y| dy` at the given sorted radii.
    fn newton_potential_at(&self, radii: &[f64]) -> Vec<f64> {
        let rule = gl8();
        // Q(r) = 4π∫_0^r f s² ds, P(r) = 4π∫_r^∞ f s ds
        let knots = &self.knots;
        let mut q_knot = vec![0.0; knots.len()];
        let mut p_knot = vec![0.0; knots.len()];
        for i in 1..knots.len() {
            q_knot[i] =
                q_knot[i - 1] + 4.0 * PI * rule.integrate(knots[i - 1], knots[i], |s| (self.density)(s) * s * s);
        }
        for i in (0..knots.len().saturating_sub(1)).rev() {
            p_knot[i] = p_knot[i + 1] + 4.0 * PI * rule.integrate(knots[i], knots[i + 1], |s| (self.density)(s) * s);
        }
        radii
            .iter()
            .map(|&r| {
                let mut phi = 0.0;
                if !knots.is_empty() {
                    let lo = knots[0];
                    let hi = knots[knots.len() - 1];
                    if r <= lo {
                        phi += p_knot[0];
                    } else if r >= hi {
                        phi += q_knot[knots.len() - 1] / r;
                    } else {
                        let i = knots.partition_point(|&x| x <= r) - 1;
                        let q = q_knot[i] + 4.0 * PI * rule.integrate(knots[i], r, |s| (self.density)(s) * s * s);
                        let p = p_knot[i + 1] + 4.0 * PI * rule.integrate(r, knots[i + 1], |s| (self.density)(s) * s);
                        phi += q / r + p;
                    }
                }
                phi + self.shells.iter().map(|s| s.mass / r.max(s.radius)).sum::<f64>()
            })
            .collect()
    }

    /// `(2π)⁻³ ∫ f̂(k) ĥ(k) / (2k²) dk`, evaluated in position space as
    /// `(8π)⁻¹ ∫ f Φ_h` with `Φ_h` the Newtonian potential of `h`.
    pub fn coulomb_energy(&self, h: &RadialFunction) -> f64 {
        let rule = gl8();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        // Φ_h has kinks at the knots and shells of h; split our panels there.
        let mut cuts: Vec<f64> = self.knots.clone();
        if let (Some(&lo), Some(&hi)) = (self.knots.first(), self.knots.last()) {
            cuts.extend(h.knots.iter().chain(h.shells.iter().map(|s| &s.radius)).filter(|&&r| r > lo && r < hi));
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            for (x, w) in rule.mapped(a, b) {
                nodes.push(x);
                weights.push(4.0 * PI * w * x * x * (self.density)(x));
            }
        }
        for s in &self.shells {
            nodes.push(s.radius);
            weights.push(s.mass);
        }
        let phi = h.newton_potential_at(&nodes);
        weights.iter().zip(&phi).map(|(w, p)| w * p).sum::<f64>() / (8.0 * PI)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(height: f64, radius: f64) -> RadialFunction {
        RadialFunction::new(vec![0.0, radius], Arc::new(move |_| height), vec![])
    }

    #[test]
    fn ball_integral_and_transform() {
        let f = ball(3.0, 2.0);
        let vol = 4.0 * PI * 8.0 / 3.0;
        assert!((f.integral() - 3.0 * vol).abs() < 1e-12);
        let k: f64 = 1.7;
        let kr = k * 2.0;
        let exact = 3.0 * 4.0 * PI * (kr.sin() - kr * kr.cos()) / k.powi(3);
        assert!((f.fourier(k) - exact).abs() < 1e-11);
        assert!((f.fourier(0.0) - f.integral()).abs() < 1e-12);
    }

    #[test]
    fn shell_transform_zero() {
        let f = RadialFunction::shell_only(vec![ShellMeasure { radius: 1.0, mass: 8.0 * PI }]);
        assert!(f.fourier(PI).abs() < 1e-13);
    }

    #[test]
    fn shell_self_energy() {
        // (8π)⁻¹ m²/ρ for a shell
        let m = 2.0;
        let f = RadialFunction::shell_only(vec![ShellMeasure { radius: 0.5, mass: m }]);
        let e = f.coulomb_energy(&f);
        assert!((e - m * m / 0.5 / (8.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn ball_self_energy() {
        // uniform ball of charge Q, radius R: ∫∫ ρρ/|x−y| = 6Q²/(5R)
        let f = ball(1.0, 1.0);
        let q = f.integral();
        let e = f.coulomb_energy(&f);
        assert!((e - 6.0 * q * q / 5.0 / (8.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn energy_matches_fourier_side() {
        // direct k-space quadrature of (2π)⁻³∫ f̂ ĥ/(2k²) for a ball and a shell
        let f = ball(1.0, 1.0);
        let h = RadialFunction::shell_only(vec![ShellMeasure { radius: 0.7, mass: 1.3 }]);
        let q = crate::quad::adaptive(
            |k| 4.0 * PI * f.fourier(k) * h.fourier(k) / 2.0,
            &(0..=400).map(|i| i as f64 * 0.5).collect::<Vec<_>>(),
            1e-12,
            1e-12,
            4000,
        );
        // ĥ f̂ ~ k^-3 so the tail beyond 200 is O(1e-6); compare loosely
        let k_side = q.value / (2.0 * PI).powi(3);
        assert!((k_side - f.coulomb_energy(&h)).abs() < 1e-5, "{k_side} vs {}", f.coulomb_energy(&h));
        assert!((f.coulomb_energy(&h) - h.coulomb_energy(&f)).abs() < 1e-13);
    }
}
