//! Momentum integrals of the Bogoliubov ground-state shift.
//!
//! All integrands use the cancellation-free form
//! `𝒜 − √(𝒜² − ℬ²) = ℬ²/(𝒜 + √(𝒜² − ℬ²))`, and the `ℬ²/(2k²)` counterterm is
//! subtracted analytically inside the numerator so that nothing of size
//! `ℬ²/k²` is ever formed and then cancelled.

use std::f64::consts::PI;

use serde::Serialize;

use super::{lhy_coefficient, tau};
use crate::error::{Error, Result};
use crate::quad;
use crate::radial::RadialFunction;

/// `−64π⁴·128/(15√π)`.
pub fn lhy_constant_exact() -> f64 {
    -64.0 * PI.powi(4) * lhy_coefficient()
}

/// `4πk²·[(𝒜 − √(𝒜²−ℬ²)) − ℬ²/(2(1−ε_N)k²)]` for `𝒜 = K + ℬ`,
/// `K = (1 − ε_N)τ`.
fn regularized_radial(k: f64, tau_k: f64, b: f64, eps_n: f64) -> Result<f64> {
    let one = 1.0 - eps_n;
    let kin = one * tau_k;
    if kin + b < b.abs() {
        return Err(Error::NegativeDiscriminant { k });
    }
    if b == 0.0 {
        return Ok(0.0);
    }
    let disc = kin * kin + 2.0 * kin * b;
    let root = disc.max(0.0).sqrt();
    let s = kin + b + root;
    let corr = if kin > 0.0 { 2.0 * kin * b / (kin + root) } else { 0.0 };
    let num = 2.0 * one * (k * k - tau_k) - b - corr;
    Ok(4.0 * PI * b * b * num / (2.0 * one * s))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LhyConstant {
    pub value: f64,
    /// Quadrature cut-off; beyond it the analytic tail is added.
    pub t0: f64,
    pub tail: f64,
    pub tail_error: f64,
    pub quadrature_error: f64,
}

/// `4π∫₀^∞ [t² + 8π − (8π)²/(2t²) − √((t²+8π)² − (8π)²)] t² dt` to relative `tol`.
pub fn lhy_constant(tol: f64) -> Result<LhyConstant> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    let b = 8.0 * PI;
    let integrand = |t: f64| regularized_radial(t, t * t, b, 0.0).expect("A > |B| for τ = t²");
    let mut t0: f64 = 1e3;
    loop {
        let breaks = quad::geometric_breaks(1e-3, t0, 4, true);
        let q = quad::adaptive(integrand, &breaks, 0.0, tol * 1e-3, 100_000);
        // integrand ~ −2πB³/t² + (5π/2)B⁴/t⁴ + O(t⁻⁶)
        let tail = -2.0 * PI * b.powi(3) / t0 + 5.0 * PI / 6.0 * b.powi(4) / t0.powi(3);
        let tail_error = 0.7 * PI * b.powi(5) / t0.powi(5);
        let value = q.value + tail;
        let budget = 0.1 * tol * value.abs();
        if tail_error <= budget && q.error <= budget {
            return Ok(LhyConstant { value, t0, tail, tail_error, quadrature_error: q.error });
        }
        if t0 >= 1e7 {
            return Err(Error::TailBudget { tail: tail_error.max(q.error), budget });
        }
        t0 *= 10.0;
    }
}

/// Kinetic multiplier in `𝒜(k) = (1−ε_N)τ(k) + ρŴ₁(k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kinetic {
    /// `τ(k) = k²`.
    Free,
    /// Box-localised `τ` with parameters `(ε_T, s, d, ℓ)`.
    Localized { eps_t: f64, s: f64, d: f64, ell: f64 },
}

impl Kinetic {
    pub fn tau(&self, k: f64) -> f64 {
        match *self {
            Kinetic::Free => k * k,
            Kinetic::Localized { eps_t, s, d, ell } => tau(k, eps_t, s, d, ell),
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match *self {
            Kinetic::Free => Vec::new(),
            Kinetic::Localized { s, d, ell, .. } => vec![1.0 / (2.0 * s * ell), 1.0 / (2.0 * d * s * ell)],
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GroundStateIntegral {
    /// `½(2π)⁻³∫(𝒜 − √(𝒜² − ℬ²)) dk`.
    pub value: f64,
    /// `(2π)⁻³∫[𝒜 − √(𝒜²−ℬ²) − ℬ²/(2(1−ε_N)k²)] dk`.
    pub regularized: f64,
    /// `ρ²(2π)⁻³∫Ŵ₁²/(2(1−ε_N)k²) dk`, computed in position space.
    pub counterterm: f64,
    pub error_estimate: f64,
}

impl GroundStateIntegral {
    /// `½ĝω(0)ρ² − value` for idealised inputs: the second-order energy.
    pub fn second_order_term(&self) -> f64 {
        -0.5 * self.regularized
    }
}

/// Ground-state energy density of the quadratic Bogoliubov Hamiltonian with
/// `𝒜 = (1−ε_N)τ + ρŴ₁`, `ℬ = ρŴ₁`.
pub fn ground_state_integral(
    rho: f64,
    w1: &RadialFunction,
    eps_n: f64,
    kinetic: &Kinetic,
) -> Result<GroundStateIntegral> {
    if !(rho > 0.0) || !(0.0..1.0).contains(&eps_n) {
        return Err(Error::Precondition(format!("need ρ > 0 and 0 ≤ ε_N < 1 (ρ = {rho}, ε_N = {eps_n})")));
    }
    let support = w1.support_radius();
    if support == 0.0 {
        return Ok(GroundStateIntegral { value: 0.0, regularized: 0.0, counterterm: 0.0, error_estimate: 0.0 });
    }
    let w0 = w1.fourier(0.0);
    let k0 = (rho * w0.abs()).sqrt().max(1e-300);
    let k_osc = 1.0 / support;
    let k_hi = 2000.0 * k_osc;
    let mut breaks = quad::geometric_breaks(k0 * 1e-4, k_osc.max(k0 * 1e2), 6, true);
    let lin_start = *breaks.last().expect("non-empty");
    let n_lin = ((k_hi - lin_start) / (PI * k_osc)).ceil().max(1.0) as usize;
    breaks.extend((1..=n_lin).map(|i| lin_start + (k_hi - lin_start) * i as f64 / n_lin as f64));
    breaks.extend(kinetic.kinks().into_iter().filter(|&k| k > 0.0 && k < k_hi));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut failure = None;
    let q = quad::adaptive(
        |k| match regularized_radial(k, kinetic.tau(k), rho * w1.fourier(k), eps_n) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        &breaks,
        1e-14 * rho * rho * w0.abs() * k0,
        1e-11,
        200_000,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let b_hi = rho * w1.fourier(k_hi);
    let tail = 2.0 * PI * b_hi.abs().powi(3) / k_hi;
    let norm = (2.0 * PI).powi(3);
    let regularized = q.value / norm;
    let counterterm = rho * rho / (1.0 - eps_n) * w1.coulomb_energy(w1);
    Ok(GroundStateIntegral {
        value: 0.5 * (regularized + counterterm),
        regularized,
        counterterm,
        error_estimate: 0.5 * (q.error + tail) / norm,
    })
}

/// Hypotheses `𝒜(p) ≥ κ_A[|p| − P₁]₊² + 2K₁a`, `|ℬ(p)| ≤ K₂a`,
/// `0 < K₂ ≤ K₁`, `0 < P₁ < a⁻¹`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AprioriHypotheses {
    pub kappa_a: f64,
    pub k1: f64,
    pub k2: f64,
    pub p1: f64,
    pub a: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AprioriReport {
    /// `∫(𝒜 − √(𝒜² − ℬ²)) dp` over ℝ³.
    pub lhs: f64,
    /// `½κ_A⁻¹∫ℬ²/p²`, the leading term of the bound.
    pub leading: f64,
    /// Full right-hand side with the supplied constant.
    pub rhs: f64,
    pub c: f64,
    pub ratio: f64,
    /// Smallest constant for which the bound holds on this input.
    pub c_min: f64,
    pub holds: bool,
}

/// Evaluate both sides of the a-priori bound for radial `𝒜, ℬ` that vanish
/// (`ℬ`) beyond `p_max`.
pub fn apriori_integral_check<FA, FB>(
    a_fn: FA,
    b_fn: FB,
    p_max: f64,
    h: AprioriHypotheses,
    c: f64,
) -> Result<AprioriReport>
where
    FA: Fn(f64) -> f64,
    FB: Fn(f64) -> f64,
{
    let AprioriHypotheses { kappa_a, k1, k2, p1, a } = h;
    if !(kappa_a > 0.0 && k2 > 0.0 && k2 <= k1 && p1 > 0.0 && p1 * a < 1.0 && a > 0.0) {
        return Err(Error::Precondition(format!("hypotheses violated: {h:?}")));
    }
    for i in 0..=2000 {
        let p = p_max * i as f64 / 2000.0;
        let lower = kappa_a * (p - p1).max(0.0).powi(2) + 2.0 * k1 * a;
        if a_fn(p) < lower * (1.0 - 1e-12) || b_fn(p).abs() > k2 * a * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!("hypotheses fail at |p| = {p}")));
        }
    }
    let breaks = quad::geometric_breaks(p_max * 1e-6, p_max, 6, true);
    let lhs = quad::adaptive(
        |p| {
            let (aa, bb) = (a_fn(p), b_fn(p));
            4.0 * PI * p * p * bb * bb / (aa + (aa * aa - bb * bb).max(0.0).sqrt())
        },
        &breaks,
        0.0,
        1e-10,
        50_000,
    )
    .value;
    let b2_over_p2 = quad::adaptive(|p| 4.0 * PI * b_fn(p).powi(2), &breaks, 0.0, 1e-12, 50_000).value;
    let leading = 0.5 / kappa_a * b2_over_p2;
    let rest = 0.5 * p1 * a / kappa_a * b2_over_p2
        + k2 * k2 / k1 * a * p1.powi(3)
        + (k2 * a).powi(2) * p1 / kappa_a * (1.0 / (p1 * a)).ln()
        + ((k2 * a).powi(4) / kappa_a.powi(3) / p1.powi(3)).min((k2 / k1).powi(2) / kappa_a * b2_over_p2);
    let rhs = leading + c * rest;
    Ok(AprioriReport {
        lhs,
        leading,
        rhs,
        c,
        ratio: lhs / rhs,
        c_min: ((lhs - leading) / rest).max(0.0),
        holds: lhs <= rhs,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AlphaBoundReport {
    pub k_min: f64,
    pub k_max: f64,
    pub samples: usize,
    /// `max α_k k²/(ρa)` over the grid.
    pub empirical_c: f64,
    pub c: f64,
    pub holds: bool,
}

/// Check `α_k ≤ Cρa|k|⁻²` on a geometric grid of `[k_min, k_max]`.
#[allow(clippy::too_many_arguments)]
pub fn alpha_bound_check(
    rho: f64,
    a: f64,
    w1: &RadialFunction,
    eps_n: f64,
    kinetic: &Kinetic,
    (k_min, k_max): (f64, f64),
    samples: usize,
    c: f64,
) -> Result<AlphaBoundReport> {
    if !(k_min > 0.0 && k_max > k_min && samples >= 2) {
        return Err(Error::Precondition("need 0 < k_min < k_max and at least two samples".into()));
    }
    let mut worst = 0.0f64;
    for i in 0..samples {
        let k = k_min * (k_max / k_min).powf(i as f64 / (samples - 1) as f64);
        let b = rho * w1.fourier(k);
        let kin = (1.0 - eps_n) * kinetic.tau(k);
        let big_a = kin + b;
        if big_a < b.abs() {
            return Err(Error::NegativeDiscriminant { k });
        }
        let root = (kin * kin + 2.0 * kin * b).max(0.0).sqrt();
        let alpha = if b == 0.0 { 0.0 } else { b / (big_a + root) };
        worst = worst.max(alpha.abs() * k * k / (rho * a));
    }
    Ok(AlphaBoundReport { k_min, k_max, samples, empirical_c: worst, c, holds: worst <= c })
}
