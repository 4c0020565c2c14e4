//! Approximation of a (possibly hard-core) potential by an integrable one
//! with `(8π)⁻¹∫v_T ≤ T a` and a certified scattering-length deficit.
//!
//! Integrable inputs are cut to their outer tail `v·1_{|x| > R_T}` carrying
//! exactly `8πTa` of mass. Hard cores are first replaced by the plateau
//! `min{v, n}` with `n` doubled until `a(v_n) ≥ (1 − δ) a(v)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potentials::RadialPotential;
use crate::scattering::{self, ScatteringSolution};

/// Doubling budget for the cap-height search.
pub const CAP_DOUBLINGS: usize = 60;

/// `λ = (√(4T+1) − 1)/(2T)`, the split between the two regimes of the bound.
pub fn optimal_lambda(t: f64) -> f64 {
    ((4.0 * t + 1.0).sqrt() - 1.0) / (2.0 * t)
}

/// `1/(1+T)`: no potential below the unit hard core with `∫ṽ ≤ 8πT` has
/// relative deficit smaller than this.
pub fn hard_core_obstruction(t: f64) -> f64 {
    1.0 / (1.0 + t)
}

/// Relative deficit allowed by the certificate, `(1 + c√5/√T)/T`.
pub fn deficit_bound(t: f64, c: f64) -> f64 {
    (1.0 + c * 5f64.sqrt() / t.sqrt()) / t
}

/// Where the tail cut lands. A shell sitting exactly at `radius` keeps the
/// mass fraction `shell_fraction`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailCut {
    pub radius: f64,
    pub shell_fraction: f64,
}

/// `R_T = inf{R' : ∫_{|x| ≥ R'} v < 8πTa}` by bisection on the cumulative tail.
pub fn tail_cut_radius(v: &RadialPotential, t: f64, a: f64) -> Result<TailCut> {
    if v.has_hard_core() {
        return Err(Error::InfiniteIntegral);
    }
    let target = 8.0 * PI * t * a;
    let total = v.integral();
    if total <= target {
        return Err(Error::NothingToCut { ratio: total / (8.0 * PI * a), t });
    }
    // F(lo) ≥ target > F(hi)
    let (mut lo, mut hi) = (0.0f64, v.support_radius() * (1.0 + 1e-12) + f64::MIN_POSITIVE);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if v.tail_integral(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // a jump of the tail across the target happens only at a shell
    if let Some(shell) = v.shells().iter().find(|s| s.radius >= lo && s.radius <= hi) {
        let outside = v.tail_integral(shell.radius) - shell.mass;
        if outside < target {
            let fraction = ((target - outside) / shell.mass).clamp(0.0, 1.0);
            return Ok(TailCut { radius: shell.radius, shell_fraction: fraction });
        }
    }
    Ok(TailCut { radius: hi, shell_fraction: 1.0 })
}

/// Which of the two estimates of the proof applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `a/R_T ≥ λ`: `(a − a_T)/a ≤ T⁻¹(R_T/(aT) + 1)`.
    ShortCut,
    /// `a/R_T < λ`: `(a − a_T)/a ≤ T⁻¹/(1 − a/R_T)`.
    LongCut,
    /// Nothing was cut.
    Uncut,
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproximationCertificate {
    #[serde(rename = "T")]
    pub t: f64,
    pub delta: f64,
    #[serde(rename = "R_T")]
    pub r_t: Option<f64>,
    pub shell_fraction: Option<f64>,
    /// Cap height used to make a hard core integrable.
    pub cap_height: Option<f64>,
    pub a_original: f64,
    /// `a` of the integrable intermediate (equal to `a_original` without a cap).
    pub a_capped: f64,
    pub a_approx: f64,
    /// `(8π)⁻¹ ∫ v_T`.
    pub integral_over_8pi: f64,
    pub integral_bound_ok: bool,
    /// `c` in the deficit bound: 1 for integrable inputs, 2 after capping.
    pub c: f64,
    pub relative_deficit: f64,
    pub deficit_bound: f64,
    pub length_bound_ok: bool,
    pub lambda_used: f64,
    pub regime: Regime,
    /// Right-hand side of the regime estimate, and whether it held.
    pub regime_bound: Option<f64>,
    pub regime_bound_ok: Option<bool>,
    /// `φ_T(R_T)`, which the proof shows is at most `1/T`.
    pub phi_t_at_r_t: Option<f64>,
}

impl ApproximationCertificate {
    pub fn all_ok(&self) -> bool {
        self.integral_bound_ok && self.length_bound_ok && self.regime_bound_ok.unwrap_or(true)
    }
}

fn solve_default(v: &RadialPotential) -> Result<ScatteringSolution> {
    scattering::solve(v, scattering::default_r_max(v.support_radius()), scattering::DEFAULT_TOL)
}

/// Smallest tried cap height `n` (doubling from `6a/R³`) with `a(v_n) ≥ (1 − δ)a`.
pub fn cap_height_search(v: &RadialPotential, a: f64, delta: f64) -> Result<(f64, RadialPotential, f64)> {
    let r = v.support_radius();
    let mut n = (6.0 * a / r.powi(3)).max(f64::MIN_POSITIVE);
    for _ in 0..=CAP_DOUBLINGS {
        let capped = v.cap_and_cut(n)?;
        let a_n = scattering::scattering_length(&capped)?;
        if a_n >= a * (1.0 - delta) {
            return Ok((n, capped, a_n));
        }
        n *= 2.0;
    }
    Err(Error::CapSearchExhausted { doublings: CAP_DOUBLINGS, height: n })
}

/// Build `v_T` and its certificate. `delta` only matters for hard cores.
pub fn approximate(v: &RadialPotential, t: f64, delta: f64) -> Result<(RadialPotential, ApproximationCertificate)> {
    if !(t > 1.0) {
        return Err(Error::Precondition(format!("T must exceed 1, got {t}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("delta must lie in (0, 1), got {delta}")));
    }
    let a = scattering::scattering_length(v)?;
    let (integrable, cap_height, a1, c) = if v.has_hard_core() {
        let (n, capped, a_n) = cap_height_search(v, a, delta)?;
        (capped, Some(n), a_n, 2.0)
    } else {
        (v.clone(), None, a, 1.0)
    };
    let lambda = optimal_lambda(t);

    let cut = if a1 > 0.0 && integrable.integral() > 8.0 * PI * t * a1 {
        Some(tail_cut_radius(&integrable, t, a1)?)
    } else {
        None
    };
    let (v_t, sol_t) = match cut {
        Some(cut) => {
            let v_t = integrable.restrict_outside(cut.radius, cut.shell_fraction)?;
            let sol = solve_default(&v_t)?;
            (v_t, Some(sol))
        }
        None => (integrable, None),
    };
    let a_t = sol_t.as_ref().map_or(a1, |s| s.a);

    let integral_over_8pi = v_t.integral() / (8.0 * PI);
    let bound = deficit_bound(t, c);
    let relative_deficit = if a > 0.0 { (a - a_t) / a } else { 0.0 };
    let (regime, regime_bound, regime_bound_ok, phi_t) = match (cut, &sol_t) {
        (Some(cut), Some(sol)) => {
            let ratio = a1 / cut.radius;
            let rel = (a1 - a_t) / a1;
            let (regime, rhs) = if ratio >= lambda {
                (Regime::ShortCut, (cut.radius / (a1 * t) + 1.0) / t)
            } else {
                (Regime::LongCut, 1.0 / ((1.0 - ratio) * t))
            };
            (regime, Some(rhs), Some(rel <= rhs * (1.0 + 1e-9)), Some(sol.phi(cut.radius)))
        }
        _ => (Regime::Uncut, None, None, None),
    };
    let cert = ApproximationCertificate {
        t,
        delta,
        r_t: cut.map(|c| c.radius),
        shell_fraction: cut.map(|c| c.shell_fraction),
        cap_height,
        a_original: a,
        a_capped: a1,
        a_approx: a_t,
        integral_over_8pi,
        integral_bound_ok: integral_over_8pi <= t * a * (1.0 + 1e-12),
        c,
        relative_deficit,
        deficit_bound: bound,
        length_bound_ok: a_t >= a * (1.0 - bound) * (1.0 - 1e-12),
        lambda_used: lambda,
        regime,
        regime_bound,
        regime_bound_ok,
        phi_t_at_r_t: phi_t,
    };
    Ok((v_t, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lambda_values() {
        assert!((optimal_lambda(1.0) - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        assert!((optimal_lambda(2.0) - 0.5).abs() < 1e-15);
        assert!((optimal_lambda(1e4) - 0.009_950_124_999_218_760).abs() < 1e-12);
    }

    #[test]
    fn obstruction_values() {
        assert_eq!(hard_core_obstruction(1.0), 0.5);
        assert_eq!(hard_core_obstruction(3.0), 0.25);
        for t in [1.0f64, 2.0, 5.0, 10.0, 100.0] {
            let q = (3.0 * t).sqrt();
            let deficit = q.tanh() / q;
            assert!(deficit >= hard_core_obstruction(t));
            let v = RadialPotential::square_well(6.0 * t, 1.0).unwrap();
            let a = scattering::scattering_length(&v).unwrap();
            assert!((1.0 - a - deficit).abs() < 1e-9);
        }
    }

    #[test]
    fn tail_cut_of_square_well() {
        let t0 = 50.0;
        let v = RadialPotential::square_well(6.0 * t0, 1.0).unwrap();
        let a = 0.9;
        let t = 20.0;
        let cut = tail_cut_radius(&v, t, a).unwrap();
        let expected = (1.0 - t * a / t0).cbrt();
        assert!((cut.radius - expected).abs() < 1e-14);
        assert!((v.restrict_outside(cut.radius, 1.0).unwrap().integral() - 8.0 * PI * t * a).abs() < 1e-9);
    }

    #[test]
    fn tail_cut_lands_on_shell() {
        let v = RadialPotential::shell(8.0 * PI * 40.0, 1.0).unwrap();
        let cut = tail_cut_radius(&v, 10.0, 1.0).unwrap();
        assert_eq!(cut.radius, 1.0);
        assert!((cut.shell_fraction - 0.25).abs() < 1e-14);
    }

    #[test]
    fn nothing_to_cut() {
        let v = RadialPotential::square_well(6.0, 1.0).unwrap();
        assert!(matches!(tail_cut_radius(&v, 2.0, 1.0), Err(Error::NothingToCut { .. })));
        let a = scattering::scattering_length(&v).unwrap();
        let (vt, cert) = approximate(&v, 1e3, 1e-6).unwrap();
        assert_eq!(vt, v);
        assert_eq!(cert.regime, Regime::Uncut);
        assert!(cert.all_ok());
        assert_eq!(cert.a_approx, a);
    }

    #[test]
    fn rejects_t_at_most_one() {
        let v = RadialPotential::hard_core(1.0).unwrap();
        assert!(matches!(approximate(&v, 1.0, 1e-3), Err(Error::Precondition(_))));
    }

    #[test]
    fn hard_core_certificate() {
        let v = RadialPotential::hard_core(1.0).unwrap();
        for t in [2.0, 10.0, 100.0] {
            let (vt, cert) = approximate(&v, t, 1.0 / (t * t)).unwrap();
            assert!(cert.all_ok(), "{cert:?}");
            assert!(cert.relative_deficit >= hard_core_obstruction(t));
            assert!(cert.phi_t_at_r_t.unwrap() <= 1.0 / t + 1e-12);
            for i in 0..100 {
                let r = i as f64 / 99.0 * 1.2;
                assert!(vt.evaluate(r) <= v.evaluate(r));
            }
        }
    }

    #[test]
    fn hard_core_deficit_scales_as_one_over_t() {
        // the thin-shell limit gives T·deficit → T/(1+T), just below 1
        let v = RadialPotential::hard_core(1.0).unwrap();
        for t in [10.0f64, 100.0, 1000.0] {
            // any cap keeps the deficit above 1/(1+T); δ only has to be small next to 1/T
            let (_, cert) = approximate(&v, t, 0.1 / t).unwrap();
            let scaled = cert.relative_deficit * t;
            assert!(scaled >= t / (1.0 + t) && scaled <= 1.0 + 10.0 / t.sqrt(), "T = {t}: {scaled}");
        }
    }

    #[test]
    fn heavy_square_well_certificate() {
        let t0 = 1e4;
        let v = RadialPotential::square_well(6.0 * t0, 1.0).unwrap();
        let (_, cert) = approximate(&v, 10.0, 1e-2).unwrap();
        assert!(cert.all_ok(), "{cert:?}");
        assert!(cert.a_approx / cert.a_original >= 1.0 - (1.0 + 5f64.sqrt() / 10f64.sqrt()) / 10.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn sandwich_for_wells(t0 in 20.0f64..2000.0, inner in 0.0f64..0.5, t in 2.0f64..15.0) {
            let v = RadialPotential::annulus(6.0 * t0, inner, 1.0).unwrap();
            let (vt, cert) = approximate(&v, t, 1e-3).unwrap();
            prop_assert!(cert.all_ok(), "{:?}", cert);
            prop_assert!(cert.a_approx <= cert.a_original + 1e-12);
            if let Some(phi) = cert.phi_t_at_r_t {
                prop_assert!(phi <= 1.0 / t + 1e-10);
            }
            for i in 0..50 {
                let r = i as f64 / 49.0;
                prop_assert!(vt.evaluate(r) <= v.evaluate(r));
            }
        }
    }
}
