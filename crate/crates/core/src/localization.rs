//! The box localisation function `χ(x) = C_M ∏ cos^{M+2}(πxᵢ)` on
//! `[−½, ½]³`, its Fourier transform and autocorrelation, and the
//! potentials renormalised by `χ∗χ(·/ℓ)`.
//!
//! Everything is separable, so the 3-D objects reduce to the 1-D profile
//! `h(y) = cos^n(πy)`, `n = M + 2`, whose cosine series
//! `h = Σ_{r ≤ n/2} a_r cos(2πry)` has binomial coefficients.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{gl16, GaussLegendre};
use crate::radial::{sinc, RadialFunction};
use crate::scattering::ScatteringSolution;

/// Largest `M` for which the decay constant `∫|(1−Δ)^{M/2}χ|` is computed.
pub const DECAY_CONSTANT_MAX_M: u32 = 12;

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// `ln C_M = (3/2)·ln(4ⁿ/binom(2n, n))`.
pub fn chi_log_normalization(m: u32) -> f64 {
    let n = m + 2;
    // 4ⁿ/binom(2n,n) = ∏_{i=1}^{n} i/(i − ½)
    1.5 * (1..=n).map(|i| (f64::from(i) / (f64::from(i) - 0.5)).ln()).sum::<f64>()
}

/// `C_M` with `∫χ² = 1`.
pub fn chi_normalization(m: u32) -> f64 {
    chi_log_normalization(m).exp()
}

#[derive(Clone, Debug)]
pub struct LocalizationFunction {
    m: u32,
    /// Cosine coefficients `a_0, …, a_{n/2}` of `h`.
    coeffs: Vec<f64>,
    log_norm: f64,
    /// `∫h² = A(0)`.
    h_sq: f64,
}

impl LocalizationFunction {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 || !m.is_multiple_of(4) {
            return Err(Error::Precondition(format!("M must be a positive multiple of 4, got {m}")));
        }
        let n = m + 2;
        let j = n / 2;
        let scale = 0.5f64.powi(n as i32);
        let coeffs = (0..=j).map(|r| if r == 0 { 1.0 } else { 2.0 } * binomial(n, j - r) * scale).collect::<Vec<_>>();
        let h_sq = coeffs[0] * coeffs[0] + 0.5 * coeffs[1..].iter().map(|a| a * a).sum::<f64>();
        Ok(Self { m, coeffs, log_norm: chi_log_normalization(m), h_sq })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn exponent(&self) -> u32 {
        self.m + 2
    }

    pub fn normalization(&self) -> f64 {
        self.log_norm.exp()
    }

    pub fn log_normalization(&self) -> f64 {
        self.log_norm
    }

    /// `h(y) = cos^n(πy)` on `|y| ≤ ½`, zero beyond.
    pub fn profile(&self, y: f64) -> f64 {
        if y.abs() > 0.5 {
            0.0
        } else {
            (PI * y).cos().powi(self.exponent() as i32)
        }
    }

    pub fn value(&self, x: [f64; 3]) -> f64 {
        self.normalization() * x.iter().map(|&y| self.profile(y)).product::<f64>()
    }

    /// `ĥ(k) = ∫h(y)e^{−iky}dy = sinc(πc)·∏_{i=1}^{n/2} i(i − ½)/(i² − c²)`, `c = k/2π`.
    ///
    /// The factor with `i` nearest to `c` is paired with the sine so the
    /// removable singularities never appear.
    pub fn hat_1d(&self, k: f64) -> f64 {
        let c = (k / (2.0 * PI)).abs();
        let j = self.exponent() / 2;
        let near = c.round();
        let paired = near >= 1.0 && near <= f64::from(j);
        let mut acc = if paired {
            // sin(πc)/(πc·(i − c)) with sin(πc) = (−1)^i sin(π(c − i))
            let i = near;
            let d = c - i;
            let sign = if (i as u64).is_multiple_of(2) { 1.0 } else { -1.0 };
            -sign * sinc(PI * d) / c
        } else {
            sinc(PI * c)
        };
        for i in 1..=j {
            let fi = f64::from(i);
            let factor =
                if paired && fi == near { fi * (fi - 0.5) / (fi + c) } else { fi * (fi - 0.5) / ((fi - c) * (fi + c)) };
            acc *= factor;
            if acc == 0.0 {
                break;
            }
        }
        acc
    }

    /// `χ̂(k) = C_M ĥ(k₁)ĥ(k₂)ĥ(k₃)`.
    pub fn hat(&self, k: [f64; 3]) -> f64 {
        self.normalization() * k.iter().map(|&x| self.hat_1d(x)).product::<f64>()
    }

    /// `1 − A(t)/A(0)` for the 1-D autocorrelation `A(t) = ∫h(y)h(y + t)dy`.
    ///
    /// Uses `A(t) = P(t) − A(1 − |t|)`, where the periodic autocorrelation gives
    /// `P(0) − P(t) = Σ a_r² sin²(πrt)` without cancellation.
    pub fn autocorrelation_deficit(&self, t: f64) -> f64 {
        let t = t.abs();
        if t >= 1.0 {
            return 1.0;
        }
        if t > 0.5 {
            return 1.0 - self.autocorrelation_direct(t) / self.h_sq;
        }
        let periodic: f64 =
            self.coeffs[1..].iter().enumerate().map(|(i, a)| a * a * (PI * (i + 1) as f64 * t).sin().powi(2)).sum();
        let wrap = if t > 0.0 { self.autocorrelation_direct(1.0 - t) } else { 0.0 };
        (periodic + wrap) / self.h_sq
    }

    /// `A(t)/A(0)`.
    pub fn autocorrelation(&self, t: f64) -> f64 {
        1.0 - self.autocorrelation_deficit(t)
    }

    /// `A(t)` by Gauss–Legendre quadrature over the overlap `[−½, ½ − t]`.
    pub fn autocorrelation_direct(&self, t: f64) -> f64 {
        let t = t.abs();
        if t >= 1.0 {
            return 0.0;
        }
        let (lo, hi) = (-0.5, 0.5 - t);
        let panels = 2 + (self.exponent() as usize) / 8;
        let w = (hi - lo) / panels as f64;
        (0..panels)
            .map(|i| {
                let a = lo + i as f64 * w;
                gl16().integrate(a, a + w, |y| self.profile(y) * self.profile(y + t))
            })
            .sum()
    }

    /// `1 − χ∗χ(x)`, accurate when small.
    pub fn convolution_deficit(&self, x: [f64; 3]) -> f64 {
        let s: f64 = x.iter().map(|&y| (-self.autocorrelation_deficit(y)).ln_1p()).sum();
        -s.exp_m1()
    }

    /// `χ∗χ(x)` from direct quadrature of the three 1-D overlaps.
    pub fn convolution_direct(&self, x: [f64; 3]) -> f64 {
        x.iter().map(|&y| self.autocorrelation_direct(y) / self.h_sq).product()
    }

    /// `max_{i,j} ‖∂ᵢ∂ⱼχ‖_∞`, sampled on a fine 1-D grid.
    pub fn max_second_derivative(&self) -> f64 {
        let n = self.exponent() as i32;
        let nf = f64::from(n);
        let (mut d1, mut d2) = (0.0f64, 0.0f64);
        for i in 0..=4000 {
            let x = PI * (-0.5 + i as f64 / 4000.0);
            let (c, s) = (x.cos(), x.sin());
            d1 = d1.max((PI * nf * c.powi(n - 1) * s).abs());
            let h2 = PI * PI * nf * (c.powi(n) - (nf - 1.0) * c.powi(n - 2) * s * s);
            d2 = d2.max(h2.abs());
        }
        self.normalization() * d2.max(d1 * d1)
    }

    /// `C_χ = ∫|(1−Δ)^{M/2}χ|`, so that `|χ̂(k)| ≤ C_χ(1 + |k|²)^{−M/2}`.
    ///
    /// The cosine series makes `(1−Δ)^{M/2}` diagonal; the absolute value is
    /// integrated on a tensor Gauss–Legendre grid over one octant.
    pub fn decay_constant(&self) -> Result<f64> {
        if self.m > DECAY_CONSTANT_MAX_M {
            return Err(Error::Precondition(format!(
                "decay constant only available for M ≤ {DECAY_CONSTANT_MAX_M}, got {}",
                self.m
            )));
        }
        let rule = GaussLegendre::new(48);
        let pts: Vec<(f64, f64)> = rule.mapped(0.0, 0.5).collect();
        let modes = self.coeffs.len();
        // cos(2πry) at every node
        let basis: Vec<Vec<f64>> =
            pts.iter().map(|&(y, _)| (0..modes).map(|r| (2.0 * PI * r as f64 * y).cos()).collect()).collect();
        let half_m = (self.m / 2) as i32;
        let mut weights = vec![0.0; modes * modes * modes];
        for r1 in 0..modes {
            for r2 in 0..modes {
                for r3 in 0..modes {
                    let q2 = (r1 * r1 + r2 * r2 + r3 * r3) as f64;
                    weights[(r1 * modes + r2) * modes + r3] =
                        self.coeffs[r1] * self.coeffs[r2] * self.coeffs[r3] * (1.0 + 4.0 * PI * PI * q2).powi(half_m);
                }
            }
        }
        let mut total = 0.0;
        for (b1, &(_, w1)) in basis.iter().zip(&pts) {
            for (b2, &(_, w2)) in basis.iter().zip(&pts) {
                for (b3, &(_, w3)) in basis.iter().zip(&pts) {
                    let mut s = 0.0;
                    for r1 in 0..modes {
                        for r2 in 0..modes {
                            let c12 = b1[r1] * b2[r2];
                            let row = &weights[(r1 * modes + r2) * modes..][..modes];
                            s += c12 * row.iter().zip(b3).map(|(w, c)| w * c).sum::<f64>();
                        }
                    }
                    total += w1 * w2 * w3 * s.abs();
                }
            }
        }
        Ok(8.0 * self.normalization() * total)
    }

    /// Least-squares slope of `−ln|χ̂|` against `ln|k|` at the envelope peaks
    /// `k = 2π(i + ½)` along a coordinate axis, for `k` in `[k_lo, k_hi]`.
    pub fn decay_slope(&self, k_lo: f64, k_hi: f64) -> f64 {
        let i0 = (k_lo / (2.0 * PI) - 0.5).ceil().max(0.0) as u64;
        let i1 = (k_hi / (2.0 * PI) - 0.5).floor() as u64;
        let (xs, ys): (Vec<f64>, Vec<f64>) = (i0..=i1)
            .map(|i| 2.0 * PI * (i as f64 + 0.5))
            .map(|k| (k.ln(), -self.hat([k, 0.0, 0.0]).abs().ln()))
            .filter(|(_, y)| y.is_finite())
            .unzip();
        fit_slope(&xs, &ys)
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Octant directions and weights (summing to 1) for angular averages of
/// functions even in each coordinate.
fn octant_directions() -> Vec<([f64; 3], f64)> {
    let rule = gl16();
    let mut out = Vec::with_capacity(256);
    for (mu, wm) in rule.mapped(0.0, 1.0) {
        let st = (1.0 - mu * mu).sqrt();
        for (phi, wp) in rule.mapped(0.0, PI / 2.0) {
            out.push(([st * phi.cos(), st * phi.sin(), mu], wm * wp * 2.0 / PI));
        }
    }
    out
}

/// `⟨F(rω/ℓ)⁻¹⟩_ω − 1` with `F = χ∗χ`, from the deficit so that it stays
/// accurate for `r ≪ ℓ`.
fn mean_inverse_excess(chi: &LocalizationFunction, dirs: &[([f64; 3], f64)], r: f64, ell: f64) -> f64 {
    let s = r / ell;
    dirs.iter()
        .map(|(w, wt)| {
            let d = chi.convolution_deficit([s * w[0], s * w[1], s * w[2]]);
            wt * d / (1.0 - d)
        })
        .sum()
}

/// `W = v/F`, `W₁ = g/F`, `W₂ = g(1 + ω)/F` with `F = χ∗χ(·/ℓ)`, each
/// averaged over directions so that the result is radial.
#[derive(Clone, Debug)]
pub struct Renormalized {
    pub ell: f64,
    /// Absent for a hard core, where `v` is not a function.
    pub w: Option<RadialFunction>,
    pub w1: RadialFunction,
    pub w2: RadialFunction,
    /// `W₁ − g`, computed without cancellation.
    pub w1_excess: RadialFunction,
}

pub fn renormalized_potential(sol: &ScatteringSolution, ell: f64, chi: &LocalizationFunction) -> Result<Renormalized> {
    let support = sol.support_radius();
    if !(ell > 0.0) || support >= ell / 2.0 {
        return Err(Error::SupportTooLarge { radius: support, ell });
    }
    let dirs = Arc::new(octant_directions());
    let chi = Arc::new(chi.clone());
    let excess = {
        let (dirs, chi) = (Arc::clone(&dirs), Arc::clone(&chi));
        move |r: f64| mean_inverse_excess(&chi, &dirs, r, ell)
    };
    let excess = Arc::new(excess);
    let g = sol.g();
    let e1 = Arc::clone(&excess);
    let w1 = g.multiplied(move |r| 1.0 + e1(r));
    let e2 = Arc::clone(&excess);
    let w1_excess = g.multiplied(move |r| e2(r));
    let e3 = Arc::clone(&excess);
    let this = Arc::new(sol.clone());
    let w2 = g.multiplied(move |r| (1.0 + this.omega(r)) * (1.0 + e3(r)));
    let v = sol.potential();
    let w = if v.has_hard_core() {
        None
    } else {
        let knots = v.breakpoints().into_iter().filter(|&r| r <= support).collect::<Vec<_>>();
        let vv = v.clone();
        let e4 = Arc::clone(&excess);
        let shells = v
            .shells()
            .iter()
            .map(|s| crate::potentials::ShellMeasure { mass: s.mass * (1.0 + excess(s.radius)), ..*s })
            .collect();
        let knots = if knots.len() < 2 { Vec::new() } else { knots };
        Some(RadialFunction::new(knots, Arc::new(move |r| vv.evaluate(r) * (1.0 + e4(r))), shells))
    };
    Ok(Renormalized { ell, w, w1, w2, w1_excess })
}

/// `ℓ⁻³∬χ(x/ℓ)χ(y/ℓ)W₁(x − y) = ∫W₁(z)·χ∗χ(z/ℓ)dz`, with `χ∗χ` from direct
/// quadrature so that the check is independent of the deficit formula.
pub fn convolution_identity(ren: &Renormalized, chi: &LocalizationFunction) -> f64 {
    let dirs = octant_directions();
    let ell = ren.ell;
    let mean_f = |r: f64| -> f64 {
        let s = r / ell;
        dirs.iter().map(|(w, wt)| wt * chi.convolution_direct([s * w[0], s * w[1], s * w[2]])).sum()
    };
    let w1 = &ren.w1;
    let rule = crate::quad::gl8();
    let dens: f64 =
        w1.knots().windows(2).map(|p| rule.integrate(p[0], p[1], |r| w1.value(r) * mean_f(r) * r * r)).sum();
    4.0 * PI * dens + w1.shells().iter().map(|s| s.mass * mean_f(s.radius)).sum::<f64>()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResidualReport {
    pub ell: f64,
    pub support: f64,
    pub a: f64,
    /// `(2π)⁻³∫Ŵ₁²/(2k²) − ĝω(0)`.
    pub residual: f64,
    /// `residual/(Ra²/ℓ²)`.
    pub ratio_short: f64,
    /// `residual/(R³a²/ℓ⁴)`.
    pub ratio_long: f64,
    /// Empirical constant in `0 ≤ W₁ − g ≤ C·g·min{r², R²}/ℓ²`.
    pub pointwise_constant: f64,
}

/// Residual of the Coulomb energy of `W₁` against `∫gω`, computed as
/// `E(W₁ − g, W₁ + g)` in position space.
pub fn fourier_residual_check(
    sol: &ScatteringSolution,
    ell: f64,
    chi: &LocalizationFunction,
) -> Result<ResidualReport> {
    let ren = renormalized_potential(sol, ell, chi)?;
    let g = sol.g();
    let sum = RadialFunction::new(
        ren.w1.knots().to_vec(),
        {
            let (w1, g) = (ren.w1.clone(), g.clone());
            Arc::new(move |r| w1.value(r) + g.value(r))
        },
        ren.w1
            .shells()
            .iter()
            .zip(g.shells())
            .map(|(s, t)| crate::potentials::ShellMeasure { mass: s.mass + t.mass, ..*s })
            .collect(),
    );
    let residual = ren.w1_excess.coulomb_energy(&sum);
    let support = sol.support_radius();
    let a = sol.a;
    let dirs = octant_directions();
    // excess/min(r², R²) is largest near r = R, where it is ~ const·R²/ℓ²
    let mut c = 0.0f64;
    for i in 1..=64 {
        let r = support * i as f64 / 64.0;
        let e = mean_inverse_excess(chi, &dirs, r, ell);
        if e < 0.0 {
            return Err(Error::Precondition(format!("W₁ < g at r = {r}")));
        }
        c = c.max(e * ell * ell / (r * r));
    }
    Ok(ResidualReport {
        ell,
        support,
        a,
        residual,
        ratio_short: residual / (support * a * a / (ell * ell)),
        ratio_long: residual / (support.powi(3) * a * a / ell.powi(4)),
        pointwise_constant: c,
    })
}
