//! Radial, nonnegative, compactly supported interaction potentials.
//!
//! Units: the kinetic operator is `-Δ` (ħ = 2m = 1), so a potential has
//! units of length⁻² and the zero-energy scattering equation reads
//! `-Δφ + ½vφ = 0`.
//!
//! A [`RadialPotential`] is a hard core (possibly of radius zero), followed by
//! an ordered list of non-overlapping pieces with a constant or piecewise
//! linear tabulated profile, plus optional surface measures ("shells")
//! `m·δ_{|x|=ρ}` normalised so that their total mass is `m`.

mod spec_file;

pub use spec_file::{load_spec, parse_spec, PotentialSpec};

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Radial profile of one piece.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    /// Constant height (length⁻²).
    Constant(f64),
    /// Values on a strictly increasing grid, linear in between.
    Tabulated { r: Vec<f64>, v: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub r_left: f64,
    pub r_right: f64,
    pub profile: Profile,
}

/// Surface measure of total mass `mass` on the sphere `|x| = radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellMeasure {
    pub radius: f64,
    pub mass: f64,
}

/// One linear segment `v(r) = v_left + (v_right - v_left)(r - r_left)/(r_right - r_left)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub r_left: f64,
    pub r_right: f64,
    pub v_left: f64,
    pub v_right: f64,
}

impl Segment {
    pub fn value(&self, r: f64) -> f64 {
        let w = self.r_right - self.r_left;
        if w <= 0.0 {
            return self.v_left;
        }
        self.v_left + (self.v_right - self.v_left) * (r - self.r_left) / w
    }

    pub fn max_value(&self) -> f64 {
        self.v_left.max(self.v_right)
    }

    /// `4π ∫_{lo}^{r_right} v(r) r² dr` for `lo` inside the segment.
    fn volume_integral_from(&self, lo: f64) -> f64 {
        let lo = lo.clamp(self.r_left, self.r_right);
        let hi = self.r_right;
        let w = self.r_right - self.r_left;
        let slope = if w > 0.0 { (self.v_right - self.v_left) / w } else { 0.0 };
        let offset = self.v_left - slope * self.r_left;
        4.0 * PI * (offset * (hi.powi(3) - lo.powi(3)) / 3.0 + slope * (hi.powi(4) - lo.powi(4)) / 4.0)
    }
}

impl Piece {
    pub fn segments(&self) -> Vec<Segment> {
        match &self.profile {
            Profile::Constant(h) => {
                vec![Segment { r_left: self.r_left, r_right: self.r_right, v_left: *h, v_right: *h }]
            }
            Profile::Tabulated { r, v } => r
                .windows(2)
                .zip(v.windows(2))
                .map(|(rw, vw)| Segment { r_left: rw[0], r_right: rw[1], v_left: vw[0], v_right: vw[1] })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialPotential {
    hard_core_radius: f64,
    pieces: Vec<Piece>,
    shells: Vec<ShellMeasure>,
    support_radius: f64,
}

impl RadialPotential {
    /// Validate and assemble a potential.
    pub fn new(hard_core_radius: f64, mut pieces: Vec<Piece>, mut shells: Vec<ShellMeasure>) -> Result<Self> {
        if !(hard_core_radius >= 0.0 && hard_core_radius.is_finite()) {
            return Err(Error::InvalidPotential(format!("hard core radius {hard_core_radius}")));
        }
        for p in &pieces {
            if !(p.r_left >= 0.0 && p.r_right.is_finite()) {
                return Err(Error::InvalidPotential(format!("piece [{}, {}]", p.r_left, p.r_right)));
            }
            match &p.profile {
                Profile::Constant(h) => {
                    if !(*h >= 0.0 && h.is_finite()) {
                        return Err(Error::InvalidPotential(format!("height {h} must be finite and >= 0")));
                    }
                }
                Profile::Tabulated { r, v } => {
                    if r.len() < 2 || r.len() != v.len() {
                        return Err(Error::InvalidPotential("tabulated profile needs >= 2 matching points".into()));
                    }
                    if r.windows(2).any(|w| !(w[1] > w[0])) {
                        return Err(Error::InvalidPotential("tabulated grid must be strictly increasing".into()));
                    }
                    if v.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
                        return Err(Error::InvalidPotential("tabulated values must be finite and >= 0".into()));
                    }
                    if r[0] != p.r_left || r[r.len() - 1] != p.r_right {
                        return Err(Error::InvalidPotential("tabulated grid must span its piece".into()));
                    }
                }
            }
        }
        pieces.retain(|p| p.r_right > p.r_left);
        pieces.sort_by(|a, b| a.r_left.total_cmp(&b.r_left));
        for w in pieces.windows(2) {
            if w[1].r_left < w[0].r_right {
                return Err(Error::InvalidPotential(format!(
                    "pieces overlap: [{}, {}] and [{}, {}]",
                    w[0].r_left, w[0].r_right, w[1].r_left, w[1].r_right
                )));
            }
        }
        if let Some(first) = pieces.first() {
            if first.r_left < hard_core_radius {
                return Err(Error::InvalidPotential("piece starts inside the hard core".into()));
            }
        }
        shells.retain(|s| s.mass != 0.0);
        for s in &shells {
            if !(s.radius > 0.0 && s.mass > 0.0 && s.mass.is_finite()) {
                return Err(Error::InvalidPotential(format!("shell mass {} at radius {}", s.mass, s.radius)));
            }
            if s.radius < hard_core_radius {
                return Err(Error::InvalidPotential("shell inside the hard core".into()));
            }
        }
        shells.sort_by(|a, b| a.radius.total_cmp(&b.radius));
        // merge coincident shells
        let mut merged: Vec<ShellMeasure> = Vec::with_capacity(shells.len());
        for s in shells {
            match merged.last_mut() {
                Some(last) if last.radius == s.radius => last.mass += s.mass,
                _ => merged.push(s),
            }
        }
        let support_radius =
            pieces.iter().map(|p| p.r_right).chain(merged.iter().map(|s| s.radius)).fold(hard_core_radius, f64::max);
        Ok(Self { hard_core_radius, pieces, shells: merged, support_radius })
    }

    pub fn zero() -> Self {
        Self { hard_core_radius: 0.0, pieces: Vec::new(), shells: Vec::new(), support_radius: 0.0 }
    }

    /// `v = ∞` for `|x| < radius`, zero outside.
    pub fn hard_core(radius: f64) -> Result<Self> {
        Self::new(radius, Vec::new(), Vec::new())
    }

    /// Constant `height` on the ball of the given radius.
    pub fn square_well(height: f64, radius: f64) -> Result<Self> {
        Self::annulus(height, 0.0, radius)
    }

    /// Constant `height` on `inner < |x| <= outer`.
    pub fn annulus(height: f64, inner: f64, outer: f64) -> Result<Self> {
        Self::new(0.0, vec![Piece { r_left: inner, r_right: outer, profile: Profile::Constant(height) }], Vec::new())
    }

    /// `mass · δ_{|x| = radius}` with the normalised surface measure.
    pub fn shell(mass: f64, radius: f64) -> Result<Self> {
        Self::new(0.0, Vec::new(), vec![ShellMeasure { radius, mass }])
    }

    /// Piecewise linear profile through `(r[i], v[i])`, zero outside `[r[0], r[last]]`.
    pub fn tabulated(r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if r.is_empty() {
            return Err(Error::InvalidPotential("empty tabulated grid".into()));
        }
        let piece = Piece { r_left: r[0], r_right: r[r.len() - 1], profile: Profile::Tabulated { r, v } };
        Self::new(0.0, vec![piece], Vec::new())
    }

    /// Pointwise sum. Hard cores combine by taking the larger radius.
    pub fn sum(parts: &[RadialPotential]) -> Result<Self> {
        let hard_core_radius = parts.iter().map(|p| p.hard_core_radius).fold(0.0, f64::max);
        let mut cuts: Vec<f64> = vec![hard_core_radius];
        for p in parts {
            for s in p.segments() {
                cuts.push(s.r_left);
                cuts.push(s.r_right);
            }
        }
        cuts.retain(|r| *r >= hard_core_radius);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut pieces = Vec::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (lo + hi);
            let mut v_lo = 0.0;
            let mut v_hi = 0.0;
            let mut covered = false;
            for p in parts {
                if let Some(seg) = p.segment_containing(mid) {
                    covered = true;
                    v_lo += seg.value(lo);
                    v_hi += seg.value(hi);
                }
            }
            if !covered {
                continue;
            }
            let profile = if v_lo == v_hi {
                Profile::Constant(v_lo)
            } else {
                Profile::Tabulated { r: vec![lo, hi], v: vec![v_lo, v_hi] }
            };
            pieces.push(Piece { r_left: lo, r_right: hi, profile });
        }
        let shells = parts.iter().flat_map(|p| p.shells.iter().copied()).collect();
        Self::new(hard_core_radius, pieces, shells)
    }

    pub fn hard_core_radius(&self) -> f64 {
        self.hard_core_radius
    }

    pub fn has_hard_core(&self) -> bool {
        self.hard_core_radius > 0.0
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn shells(&self) -> &[ShellMeasure] {
        &self.shells
    }

    /// Smallest `R` with `v = 0` on `|x| > R`.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn is_zero(&self) -> bool {
        !self.has_hard_core()
            && self.shells.is_empty()
            && self.segments().iter().all(|s| s.v_left == 0.0 && s.v_right == 0.0)
    }

    /// All linear segments of the function part, ordered by radius.
    pub fn segments(&self) -> Vec<Segment> {
        self.pieces.iter().flat_map(Piece::segments).collect()
    }

    fn segment_containing(&self, r: f64) -> Option<Segment> {
        self.segments().into_iter().find(|s| s.r_left <= r && r <= s.r_right)
    }

    /// Radii where the profile or its slope may jump (piece ends, grid nodes, shells).
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = vec![self.hard_core_radius];
        for s in self.segments() {
            out.push(s.r_left);
            out.push(s.r_right);
        }
        out.extend(self.shells.iter().map(|s| s.radius));
        out.push(self.support_radius);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// `v(r)` for the function part; `+∞` inside the hard core. Shell measures
    /// have no pointwise value and are not included.
    pub fn evaluate(&self, r: f64) -> f64 {
        if r < self.hard_core_radius {
            return f64::INFINITY;
        }
        if r > self.support_radius {
            return 0.0;
        }
        // pieces are (r_left, r_right]; the first segment is closed on the left
        for seg in self.segments() {
            if r <= seg.r_right && r >= seg.r_left {
                return seg.value(r);
            }
        }
        0.0
    }

    /// Supremum of the function part (`+∞` with a hard core).
    pub fn max_value(&self) -> f64 {
        if self.has_hard_core() {
            return f64::INFINITY;
        }
        self.segments().iter().map(Segment::max_value).fold(0.0, f64::max)
    }

    /// `∫v = 4π∫ v r² dr + Σ shell masses`; `+∞` with a hard core.
    pub fn integral(&self) -> f64 {
        if self.has_hard_core() {
            return f64::INFINITY;
        }
        self.tail_integral(0.0)
    }

    /// `∫_{|x| ≥ r} v`, shells at radius exactly `r` included.
    pub fn tail_integral(&self, r: f64) -> f64 {
        if r < self.hard_core_radius {
            return f64::INFINITY;
        }
        let pieces: f64 = self.segments().iter().filter(|s| s.r_right > r).map(|s| s.volume_integral_from(r)).sum();
        let shells: f64 = self.shells.iter().filter(|s| s.radius >= r).map(|s| s.mass).sum();
        pieces + shells
    }

    /// `𝓡 = (8πa)⁻¹ ∫v`.
    pub fn cal_r(&self, a: f64) -> Result<f64> {
        if !(a > 0.0) {
            if self.is_zero() {
                return Ok(0.0);
            }
            return Err(Error::Precondition(format!("scattering length must be positive, got {a}")));
        }
        if self.has_hard_core() {
            return Err(Error::InfiniteIntegral);
        }
        Ok(self.integral() / (8.0 * PI * a))
    }

    /// `1_{|x| ≤ n} min{v, n}`: caps the height at `n` (hard cores become
    /// plateaus) and cuts the support at radius `n`. Shell measures inside the
    /// cut are kept as they are.
    pub fn cap_and_cut(&self, n: f64) -> Result<Self> {
        if !(n > 0.0) {
            return Err(Error::Precondition(format!("cap height must be positive, got {n}")));
        }
        let mut pieces = Vec::new();
        if self.hard_core_radius > 0.0 {
            let hi = self.hard_core_radius.min(n);
            pieces.push(Piece { r_left: 0.0, r_right: hi, profile: Profile::Constant(n) });
        }
        for seg in self.segments() {
            if seg.r_left >= n {
                break;
            }
            let hi = seg.r_right.min(n);
            let seg = Segment { r_right: hi, v_right: seg.value(hi), ..seg };
            for part in clamp_segment(seg, n) {
                let profile = if part.v_left == part.v_right {
                    Profile::Constant(part.v_left)
                } else {
                    Profile::Tabulated { r: vec![part.r_left, part.r_right], v: vec![part.v_left, part.v_right] }
                };
                pieces.push(Piece { r_left: part.r_left, r_right: part.r_right, profile });
            }
        }
        let shells = self.shells.iter().copied().filter(|s| s.radius <= n).collect();
        Self::new(0.0, coalesce(pieces), shells)
    }

    /// `v·1_{|x| > cut}`. A shell sitting exactly at `cut` keeps the mass
    /// fraction `shell_fraction` (the tie-break used by the tail cut).
    pub fn restrict_outside(&self, cut: f64, shell_fraction: f64) -> Result<Self> {
        if cut < self.hard_core_radius {
            return Err(Error::Precondition("cannot cut inside the hard core".into()));
        }
        let mut pieces = Vec::new();
        for seg in self.segments() {
            if seg.r_right <= cut {
                continue;
            }
            let lo = seg.r_left.max(cut);
            let seg = Segment { r_left: lo, v_left: seg.value(lo), ..seg };
            let profile = if seg.v_left == seg.v_right {
                Profile::Constant(seg.v_left)
            } else {
                Profile::Tabulated { r: vec![seg.r_left, seg.r_right], v: vec![seg.v_left, seg.v_right] }
            };
            pieces.push(Piece { r_left: seg.r_left, r_right: seg.r_right, profile });
        }
        let shells = self
            .shells
            .iter()
            .filter_map(|s| {
                if s.radius > cut {
                    Some(*s)
                } else if s.radius == cut && shell_fraction > 0.0 {
                    Some(ShellMeasure { radius: s.radius, mass: s.mass * shell_fraction })
                } else {
                    None
                }
            })
            .collect();
        Self::new(0.0, coalesce(pieces), shells)
    }

    /// Same potential multiplied by `factor >= 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if self.has_hard_core() && factor > 0.0 {
            return Ok(self.clone());
        }
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                profile: match &p.profile {
                    Profile::Constant(h) => Profile::Constant(h * factor),
                    Profile::Tabulated { r, v } => {
                        Profile::Tabulated { r: r.clone(), v: v.iter().map(|x| x * factor).collect() }
                    }
                },
                ..p.clone()
            })
            .collect();
        let shells = self.shells.iter().map(|s| ShellMeasure { mass: s.mass * factor, ..*s }).collect();
        Self::new(0.0, pieces, shells)
    }
}

/// Split a linear segment where it crosses `cap` and clamp it there.
fn clamp_segment(seg: Segment, cap: f64) -> Vec<Segment> {
    let above_l = seg.v_left > cap;
    let above_r = seg.v_right > cap;
    match (above_l, above_r) {
        (false, false) => vec![seg],
        (true, true) => vec![Segment { v_left: cap, v_right: cap, ..seg }],
        _ => {
            let t = (cap - seg.v_left) / (seg.v_right - seg.v_left);
            let rc = seg.r_left + t * (seg.r_right - seg.r_left);
            let left = Segment { r_right: rc, v_right: cap, v_left: seg.v_left.min(cap), ..seg };
            let right = Segment { r_left: rc, v_left: cap, v_right: seg.v_right.min(cap), ..seg };
            [left, right].into_iter().filter(|s| s.r_right > s.r_left).collect()
        }
    }
}

/// Merge runs of adjacent two-point pieces into tabulated pieces where the
/// profile is continuous, so that transforms preserve the original grid.
fn coalesce(pieces: Vec<Piece>) -> Vec<Piece> {
    let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
    for p in pieces {
        if let (Some(last), Profile::Tabulated { r, v }) = (out.last_mut(), &p.profile) {
            if let Profile::Tabulated { r: lr, v: lv } = &mut last.profile {
                let joined = lr.last() == r.first() && lv.last() == v.first();
                if joined {
                    lr.extend_from_slice(&r[1..]);
                    lv.extend_from_slice(&v[1..]);
                    last.r_right = p.r_right;
                    continue;
                }
            }
        }
        out.push(p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hard_core_evaluation() {
        let v = RadialPotential::hard_core(1.0).unwrap();
        assert_eq!(v.evaluate(0.5), f64::INFINITY);
        assert_eq!(v.evaluate(2.0), 0.0);
        assert_eq!(v.integral(), f64::INFINITY);
        assert!(matches!(v.cal_r(1.0), Err(Error::InfiniteIntegral)));
    }

    #[test]
    fn square_well_lookup_and_integral() {
        let t0 = 3.0;
        let v = RadialPotential::square_well(6.0 * t0, 1.0).unwrap();
        assert_eq!(v.evaluate(0.5), 18.0);
        assert!((v.integral() - 8.0 * PI * t0).abs() < 1e-12);
        let w = RadialPotential::square_well(6.0, 1.0).unwrap();
        assert_eq!(w.evaluate(0.5), 6.0);
    }

    #[test]
    fn shell_integral_is_its_mass() {
        let t = 2.5;
        let v = RadialPotential::shell(8.0 * PI * t, 1.0).unwrap();
        assert!((v.integral() - 8.0 * PI * t).abs() < 1e-12);
        assert_eq!(v.evaluate(1.0), 0.0);
    }

    #[test]
    fn cal_r_definition() {
        // ∫v = 8π with a = 1 gives 1
        let v = RadialPotential::square_well(6.0, 1.0).unwrap();
        assert!((v.cal_r(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(RadialPotential::zero().cal_r(0.0).unwrap(), 0.0);
        assert_eq!(RadialPotential::zero().cal_r(1.0).unwrap(), 0.0);
    }

    #[test]
    fn cap_turns_hard_core_into_plateau() {
        let v = RadialPotential::hard_core(1.0).unwrap();
        let capped = v.cap_and_cut(6.0).unwrap();
        assert_eq!(capped, RadialPotential::square_well(6.0, 1.0).unwrap());
    }

    #[test]
    fn cap_above_max_is_identity() {
        let v = RadialPotential::square_well(2.0, 1.0).unwrap();
        assert_eq!(v.cap_and_cut(6.0).unwrap(), v);
    }

    #[test]
    fn cap_clamps_tabulated_values() {
        let r = vec![0.0, 0.5, 1.0, 1.5];
        let v = RadialPotential::tabulated(r.clone(), vec![10.0, 4.0, 2.0, 0.0]).unwrap();
        let capped = v.cap_and_cut(4.0).unwrap();
        for &x in &r {
            assert!((capped.evaluate(x) - v.evaluate(x).min(4.0)).abs() < 1e-14, "r = {x}");
        }
        // crossing point between 0 and 0.5 lands exactly on the old value 4 at r = 0.5
        assert_eq!(capped.evaluate(0.25), 4.0);
        assert!(capped.breakpoints().contains(&0.5));
    }

    #[test]
    fn cap_cuts_spatially() {
        let v = RadialPotential::square_well(1.0, 5.0).unwrap();
        let capped = v.cap_and_cut(2.0).unwrap();
        assert_eq!(capped.support_radius(), 2.0);
        assert_eq!(capped.evaluate(3.0), 0.0);
    }

    #[test]
    fn tail_integral_of_square_well() {
        let v = RadialPotential::square_well(6.0, 1.0).unwrap();
        let r = 0.7f64;
        let expected = 8.0 * PI * (1.0 - r.powi(3));
        assert!((v.tail_integral(r) - expected).abs() < 1e-12);
    }

    #[test]
    fn sum_merges_breakpoints() {
        let a = RadialPotential::square_well(2.0, 1.0).unwrap();
        let b = RadialPotential::annulus(3.0, 0.5, 2.0).unwrap();
        let c = RadialPotential::shell(1.0, 1.5).unwrap();
        let s = RadialPotential::sum(&[a.clone(), b.clone(), c]).unwrap();
        assert_eq!(s.evaluate(0.25), 2.0);
        assert_eq!(s.evaluate(0.75), 5.0);
        assert_eq!(s.evaluate(1.75), 3.0);
        assert!((s.integral() - (a.integral() + b.integral() + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RadialPotential::square_well(-1.0, 1.0).is_err());
        assert!(RadialPotential::tabulated(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(RadialPotential::new(
            0.0,
            vec![
                Piece { r_left: 0.0, r_right: 1.0, profile: Profile::Constant(1.0) },
                Piece { r_left: 0.5, r_right: 2.0, profile: Profile::Constant(1.0) },
            ],
            vec![]
        )
        .is_err());
    }

    #[test]
    fn restrict_outside_splits_shell() {
        let v = RadialPotential::shell(10.0, 1.0).unwrap();
        let cut = v.restrict_outside(1.0, 0.25).unwrap();
        assert!((cut.integral() - 2.5).abs() < 1e-14);
    }

    fn arb_tabulated() -> impl Strategy<Value = RadialPotential> {
        (2usize..8, prop::collection::vec(0.0f64..20.0, 8), prop::collection::vec(0.05f64..0.5, 8)).prop_map(
            |(n, vals, steps)| {
                let mut r = vec![0.0];
                for s in steps.iter().take(n - 1) {
                    let last = *r.last().unwrap();
                    r.push(last + s);
                }
                RadialPotential::tabulated(r, vals[..n].to_vec()).unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn cap_is_below_and_monotone(v in arb_tabulated(), n1 in 0.5f64..15.0, dn in 0.0f64..10.0) {
            let n2 = n1 + dn;
            let c1 = v.cap_and_cut(n1).unwrap();
            let c2 = v.cap_and_cut(n2).unwrap();
            for i in 0..=200 {
                let r = v.support_radius() * i as f64 / 200.0;
                prop_assert!(c1.evaluate(r) <= v.evaluate(r) + 1e-12);
                prop_assert!(c1.evaluate(r) <= c2.evaluate(r) + 1e-12);
            }
            prop_assert!(c1.integral() <= c2.integral() + 1e-9);
            prop_assert!(c2.integral() <= v.integral() + 1e-9);
        }
    }
}
