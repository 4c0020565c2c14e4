//! Zero-energy radial scattering: `u'' = ½ v u` with `u = r φ`.
//!
//! The solver marches outward from the hard core (or the origin) with
//! classical RK4 on each interval between potential breakpoints, applies the
//! derivative jump `Δu' = m u(ρ)/(8πρ²)` at each shell, and repeats on a
//! doubled grid until the extracted scattering length stops moving.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::potentials::{RadialPotential, ShellMeasure};
use crate::quad;
use crate::radial::RadialFunction;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Largest `q·h` (with `q = √(v/2)`) on the coarsest grid.
const THETA: f64 = 0.02;
const MAX_REFINEMENTS: usize = 14;
/// Largest grid a single march may store (a few hundred MB).
pub const MAX_NODES: usize = 1 << 23;
const RESCALE_ABOVE: f64 = 1e100;
const RESCALE_EXP: i32 = 332; // 2^332 ≈ 1e100

/// Node data of a solved profile, shared between clones.
#[derive(Debug)]
struct Nodes {
    grid: Vec<f64>,
    u: Vec<f64>,
    u_prime: Vec<f64>,
    u_prime_left: Vec<f64>,
    /// `½v` just right and just left of each node, so `u'' = c u` there.
    c_right: Vec<f64>,
    c_left: Vec<f64>,
    /// Indices into `grid` of the interval boundaries.
    breaks: Vec<usize>,
}

/// Solved radial profile. Cloning is cheap; node arrays are shared.
#[derive(Clone, Debug)]
pub struct ScatteringSolution {
    nodes: Arc<Nodes>,
    pub a: f64,
    /// Factor that took the raw solution (`u'(r₀) = 1`) to the normalised one.
    pub normalization: f64,
    /// Change of `a` in the last grid refinement.
    pub refinement_change: f64,
    potential: RadialPotential,
}

struct Interval {
    lo: f64,
    hi: f64,
    v_lo: f64,
    v_hi: f64,
    /// Shell mass sitting at `hi`.
    shell_at_hi: f64,
}

fn intervals(v: &RadialPotential, r_max: f64) -> Vec<Interval> {
    let mut cuts = v.breakpoints();
    cuts.push(r_max);
    cuts.retain(|&r| r >= v.hard_core_radius() && r <= r_max);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let segs = v.segments();
    cuts.windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (lo + hi);
            let (v_lo, v_hi) = segs
                .iter()
                .find(|s| s.r_left <= mid && mid <= s.r_right)
                .map_or((0.0, 0.0), |s| (s.value(lo), s.value(hi)));
            let shell_at_hi = v.shells().iter().filter(|s| s.radius == hi).map(|s| s.mass).sum();
            Interval { lo, hi, v_lo, v_hi, shell_at_hi }
        })
        .collect()
}

fn base_steps(iv: &Interval) -> usize {
    let q = (0.5 * iv.v_lo.max(iv.v_hi)).sqrt();
    let n = (q * (iv.hi - iv.lo) / THETA).ceil();
    if iv.v_lo == 0.0 && iv.v_hi == 0.0 {
        1
    } else {
        (n as usize).max(2)
    }
}

/// Raw march with `u(r₀) = 0`, `u'(r₀) = 1`. Values are stored as mantissas
/// together with a binary exponent so that steep solutions cannot overflow.
struct RawMarch {
    grid: Vec<f64>,
    u: Vec<f64>,
    up: Vec<f64>,
    up_left: Vec<f64>,
    exps: Vec<i32>,
    c_right: Vec<f64>,
    c_left: Vec<f64>,
    breaks: Vec<usize>,
}

fn march(ivs: &[Interval], r0: f64, level: u32, store: bool) -> (f64, f64, i32, Option<RawMarch>) {
    let mut u = 0.0f64;
    let mut p = 1.0f64;
    let mut e = 0i32;
    let mut raw = store.then(|| RawMarch {
        grid: vec![r0],
        u: vec![0.0],
        up: vec![1.0],
        up_left: vec![1.0],
        exps: vec![0],
        c_right: vec![0.0],
        c_left: vec![0.0],
        breaks: vec![0],
    });
    for iv in ivs {
        let n = base_steps(iv) << level;
        let h = (iv.hi - iv.lo) / n as f64;
        let slope = (iv.v_hi - iv.v_lo) / (iv.hi - iv.lo);
        let c = |r: f64| 0.5 * (iv.v_lo + slope * (r - iv.lo));
        let free = iv.v_lo == 0.0 && iv.v_hi == 0.0;
        for j in 0..n {
            let r = iv.lo + j as f64 * h;
            let r_next = if j + 1 == n { iv.hi } else { iv.lo + (j + 1) as f64 * h };
            let h = r_next - r;
            if free {
                u += h * p;
            } else {
                let (c0, c1, c2) = (c(r), c(r + 0.5 * h), c(r_next));
                let k1u = p;
                let k1p = c0 * u;
                let k2u = p + 0.5 * h * k1p;
                let k2p = c1 * (u + 0.5 * h * k1u);
                let k3u = p + 0.5 * h * k2p;
                let k3p = c1 * (u + 0.5 * h * k2u);
                let k4u = p + h * k3p;
                let k4p = c2 * (u + h * k3u);
                u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
                p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            }
            if u.abs() > RESCALE_ABOVE || p.abs() > RESCALE_ABOVE {
                u = libm_ldexp(u, -RESCALE_EXP);
                p = libm_ldexp(p, -RESCALE_EXP);
                e += RESCALE_EXP;
            }
            if let Some(raw) = raw.as_mut() {
                *raw.c_right.last_mut().expect("grid is non-empty") = c(r);
                raw.c_left.push(c(r_next));
                raw.c_right.push(0.0);
                raw.grid.push(r_next);
                raw.u.push(u);
                raw.up_left.push(p);
                raw.up.push(p);
                raw.exps.push(e);
            }
        }
        if iv.shell_at_hi > 0.0 {
            p += iv.shell_at_hi / (8.0 * PI * iv.hi * iv.hi) * u;
            if let Some(raw) = raw.as_mut() {
                *raw.up.last_mut().expect("grid is non-empty") = p;
            }
        }
        if let Some(raw) = raw.as_mut() {
            raw.breaks.push(raw.grid.len() - 1);
        }
    }
    (u, p, e, raw)
}

fn libm_ldexp(x: f64, e: i32) -> f64 {
    // split to stay inside the exponent range of a single powi
    let mut x = x;
    let mut e = e;
    while e != 0 {
        let step = e.clamp(-1000, 1000);
        x *= 2f64.powi(step);
        e -= step;
    }
    x
}

/// Solve the scattering problem out to `r_max` with tolerance `tol` on `a`.
pub fn solve(v: &RadialPotential, r_max: f64, tol: f64) -> Result<ScatteringSolution> {
    let support = v.support_radius();
    if !(r_max > support) {
        return Err(Error::Precondition(format!("r_max = {r_max} must exceed the support radius {support}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    let r0 = v.hard_core_radius();
    let ivs = intervals(v, r_max);
    let extract = |u: f64, p: f64, r: f64| r - u / p;

    let base: usize = ivs.iter().map(base_steps).sum();
    let (u_c, p_c, _, _) = march(&ivs, r0, 0, false);
    let mut a_coarse = extract(u_c, p_c, r_max);
    let mut change = f64::INFINITY;
    let mut fine = None;
    for lvl in 1..=MAX_REFINEMENTS as u32 {
        let nodes = base.saturating_mul(1 << lvl);
        if nodes > MAX_NODES {
            return Err(Error::GridBudget { nodes, limit: MAX_NODES });
        }
        let (u_f, p_f, _, raw) = march(&ivs, r0, lvl, true);
        let a_fine = extract(u_f, p_f, r_max);
        change = (a_fine - a_coarse).abs();
        fine = raw;
        if change <= tol {
            break;
        }
        a_coarse = a_fine;
    }
    if change > tol {
        return Err(Error::NoConvergence { tol, change });
    }
    let raw = fine.expect("at least one refinement ran");
    let last = raw.grid.len() - 1;
    let (p_end, e_end) = (raw.up[last], raw.exps[last]);
    // normalise so that u' = 1 outside the support
    let norm_mantissa = 1.0 / p_end;
    let scale = |m: f64, e: i32| libm_ldexp(m * norm_mantissa, (e - e_end).max(-2100));
    let u: Vec<f64> = raw.u.iter().zip(&raw.exps).map(|(&m, &e)| scale(m, e)).collect();
    let u_prime: Vec<f64> = raw.up.iter().zip(&raw.exps).map(|(&m, &e)| scale(m, e)).collect();
    let u_prime_left: Vec<f64> = raw.up_left.iter().zip(&raw.exps).map(|(&m, &e)| scale(m, e)).collect();
    let normalization = libm_ldexp(norm_mantissa, (-e_end).max(-2100));

    let a = raw.grid[last] - u[last];
    let nodes = Nodes {
        grid: raw.grid,
        u,
        u_prime,
        u_prime_left,
        c_right: raw.c_right,
        c_left: raw.c_left,
        breaks: raw.breaks,
    };
    let mut sol = ScatteringSolution {
        nodes: Arc::new(nodes),
        a,
        normalization,
        refinement_change: change,
        potential: v.clone(),
    };
    // a must be the same just outside the support and at r_max
    let r_near = if support > 0.0 { support * (1.0 + 1e-8) } else { r0.max(1e-300) };
    let r_near = r_near.min(r_max);
    let a_near = r_near - sol.u_at(r_near) / sol.u_prime_at(r_near);
    if (a_near - a).abs() > tol * r_max.max(1.0) {
        return Err(Error::NonConstantScatteringLength { at_support: a_near, at_rmax: a, tol });
    }
    if a.abs() < 1e-15 * r_max {
        sol.a = 0.0;
    }
    Ok(sol)
}

/// Default outer radius for a potential with the given support.
pub fn default_r_max(support: f64) -> f64 {
    if support > 0.0 {
        2.0 * support
    } else {
        1.0
    }
}

/// `a(v)` with the default tolerance.
pub fn scattering_length(v: &RadialPotential) -> Result<f64> {
    Ok(solve(v, default_r_max(v.support_radius()), DEFAULT_TOL)?.a)
}

impl ScatteringSolution {
    /// Radii from the hard-core radius out to `r_max`.
    pub fn grid(&self) -> &[f64] {
        &self.nodes.grid
    }

    /// `u(r) = r φ(r)` at the nodes, normalised so `u(r) = r − a` beyond the support.
    pub fn u(&self) -> &[f64] {
        &self.nodes.u
    }

    /// Right derivative `u'(r⁺)` at the nodes (left and right differ only at shells).
    pub fn u_prime(&self) -> &[f64] {
        &self.nodes.u_prime
    }

    pub fn potential(&self) -> &RadialPotential {
        &self.potential
    }

    pub fn support_radius(&self) -> f64 {
        self.potential.support_radius()
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.grid.last().expect("non-empty grid")
    }

    fn locate(&self, r: f64) -> usize {
        let i = self.nodes.grid.partition_point(|&x| x <= r);
        i.saturating_sub(1).min(self.nodes.grid.len() - 2)
    }

    /// Quintic Hermite interpolation on `[r_i, r_{i+1}]` using `u`, `u'` and
    /// `u'' = ½ v u` at both ends.
    fn hermite(&self, r: f64) -> (f64, f64) {
        let i = self.locate(r);
        let (x0, x1) = (self.nodes.grid[i], self.nodes.grid[i + 1]);
        let h = x1 - x0;
        let (y0, y1) = (self.nodes.u[i], self.nodes.u[i + 1]);
        let (d0, d1) = (h * self.nodes.u_prime[i], h * self.nodes.u_prime_left[i + 1]);
        let (s0, s1) = (h * h * self.nodes.c_right[i] * y0, h * h * self.nodes.c_left[i + 1] * y1);
        let t = (r - x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t2);
        let val = (1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5) * y0
            + (t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5) * d0
            + 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5) * s0
            + 0.5 * (t3 - 2.0 * t4 + t5) * s1
            + (-4.0 * t3 + 7.0 * t4 - 3.0 * t5) * d1
            + (10.0 * t3 - 15.0 * t4 + 6.0 * t5) * y1;
        let der = (-30.0 * t2 + 60.0 * t3 - 30.0 * t4) * y0
            + (1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4) * d0
            + (t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4) * s0
            + (1.5 * t2 - 4.0 * t3 + 2.5 * t4) * s1
            + (-12.0 * t2 + 28.0 * t3 - 15.0 * t4) * d1
            + (30.0 * t2 - 60.0 * t3 + 30.0 * t4) * y1;
        (val, der / h)
    }

    /// `u(r)`; zero inside the hard core, `r − a` beyond the grid.
    pub fn u_at(&self, r: f64) -> f64 {
        if r <= self.nodes.grid[0] {
            0.0
        } else if r >= self.r_max() {
            r - self.a
        } else {
            self.hermite(r).0
        }
    }

    pub fn u_prime_at(&self, r: f64) -> f64 {
        if r < self.nodes.grid[0] {
            0.0
        } else if r >= self.r_max() {
            1.0
        } else {
            self.hermite(r).1
        }
    }

    /// `φ(r) = u(r)/r`, with the limit `u'(0)` at the origin.
    pub fn phi(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return if self.nodes.grid[0] > 0.0 { 0.0 } else { self.nodes.u_prime[0] };
        }
        self.u_at(r) / r
    }

    pub fn omega(&self, r: f64) -> f64 {
        1.0 - self.phi(r)
    }

    /// Knots for panel quadrature of functions built from `u`: every
    /// `stride`-th grid node plus all interval boundaries, up to `r_hi`.
    fn knots(&self, stride: usize, r_hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for w in self.nodes.breaks.windows(2) {
            let (i0, i1) = (w[0], w[1]);
            if self.nodes.grid[i0] >= r_hi {
                break;
            }
            let mut i = i0;
            while i < i1 {
                out.push(self.nodes.grid[i]);
                i += stride;
            }
        }
        let mut end = self.nodes.breaks.iter().map(|&i| self.nodes.grid[i]).filter(|&r| r <= r_hi).collect::<Vec<_>>();
        out.append(&mut end);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out.retain(|&r| r <= r_hi);
        out
    }

    /// `g = v φ` as a radial function. A hard core contributes the shell
    /// `8π r₀ u'(r₀)` at its radius; potential shells contribute `m φ(ρ)`.
    pub fn g(&self) -> RadialFunction {
        let support = self.support_radius();
        let v = self.potential.clone();
        let knots = self.knots(8, support);
        let this = Arc::new(self.clone());
        let density = move |r: f64| {
            let vr = v.evaluate(r);
            if vr == 0.0 || !vr.is_finite() {
                0.0
            } else {
                vr * this.phi(r)
            }
        };
        let mut shells: Vec<ShellMeasure> = self
            .potential
            .shells()
            .iter()
            .map(|s| ShellMeasure { radius: s.radius, mass: s.mass * self.phi(s.radius) })
            .collect();
        let r0 = self.nodes.grid[0];
        if r0 > 0.0 {
            shells.insert(0, ShellMeasure { radius: r0, mass: 8.0 * PI * r0 * self.nodes.u_prime[0] });
        }
        RadialFunction::new(knots, Arc::new(density), shells)
    }

    /// `ω = 1 − φ` as a radial function, truncated at `r_cut`.
    pub fn omega_function(&self, r_cut: f64) -> RadialFunction {
        let this = Arc::new(self.clone());
        let mut knots = if self.nodes.grid[0] > 0.0 { vec![0.0] } else { Vec::new() };
        knots.extend(self.knots(8, r_cut.min(self.r_max())));
        if r_cut > self.r_max() {
            knots.extend(quad::geometric_breaks(self.r_max(), r_cut, 8, false));
        }
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        RadialFunction::new(knots, Arc::new(move |r| this.omega(r)), Vec::new())
    }

    /// Rows `(r, u, φ, ω, g)` at the grid nodes (at most `max_rows`, evenly
    /// subsampled).
    pub fn profile(&self, max_rows: usize) -> Vec<[f64; 5]> {
        let n = self.nodes.grid.len();
        let stride = n.div_ceil(max_rows.max(1)).max(1);
        let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
        if idx.last() != Some(&(n - 1)) {
            idx.push(n - 1);
        }
        idx.into_iter()
            .map(|i| {
                let r = self.nodes.grid[i];
                let phi = self.phi(r);
                let vr = self.potential.evaluate(r);
                let g = if vr.is_finite() { vr * phi } else { 0.0 };
                [r, self.nodes.u[i], phi, 1.0 - phi, g]
            })
            .collect()
    }
}

/// `∫_{|x| ≤ R̃} |∇φ|² + ½ v φ²` for a radial trial function given with its
/// derivative. Shells contribute `½ m φ(ρ)²`. The trial must satisfy
/// `φ(R̃) = 1`; inside a hard core it must vanish.
pub fn variational_energy<P, D>(phi: P, dphi: D, v: &RadialPotential, r_tilde: f64) -> Result<f64>
where
    P: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(r_tilde > v.support_radius()) {
        return Err(Error::Precondition(format!(
            "R̃ = {r_tilde} must exceed the support radius {}",
            v.support_radius()
        )));
    }
    if (phi(r_tilde) - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("trial function has φ(R̃) = {}, expected 1", phi(r_tilde))));
    }
    let r0 = v.hard_core_radius();
    if r0 > 0.0 && phi(r0).abs() > 1e-9 {
        return Ok(f64::INFINITY);
    }
    let mut breaks = v.breakpoints();
    breaks.push(r_tilde);
    breaks.retain(|&r| r >= r0 && r <= r_tilde);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let q = quad::adaptive(
        |r| {
            let p = phi(r);
            let d = dphi(r);
            let vr = v.evaluate(r);
            let vr = if vr.is_finite() { vr } else { 0.0 };
            4.0 * PI * (d * d + 0.5 * vr * p * p) * r * r
        },
        &breaks,
        1e-13,
        1e-13,
        20_000,
    );
    let shells: f64 = v.shells().iter().map(|s| 0.5 * s.mass * phi(s.radius).powi(2)).sum();
    Ok(q.value + shells)
}
