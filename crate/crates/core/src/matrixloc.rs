//! Localisation of large banded matrices: given a unit vector `ψ` of a
//! banded Hermitian `A`, find a vector supported on `M′` consecutive indices
//! whose energy is at most `⟨ψ, Aψ⟩` plus band-weighted errors.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Hermitian matrix stored by supra-diagonals: `bands[k][i] = A_{i, i+k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedHermitian {
    dim: usize,
    bands: Vec<Vec<Complex64>>,
}

impl BandedHermitian {
    /// `bands[k]` must have length `dim − k`; the diagonal must be real.
    pub fn new(dim: usize, bands: Vec<Vec<Complex64>>) -> Result<Self> {
        if dim == 0 || bands.is_empty() || bands.len() > dim {
            return Err(Error::Precondition(format!("need 1 ≤ bands ≤ dim, got {} bands for dim {dim}", bands.len())));
        }
        for (k, b) in bands.iter().enumerate() {
            if b.len() != dim - k {
                return Err(Error::Dimension { expected: dim - k, got: b.len() });
            }
        }
        if bands[0].iter().any(|z| z.im != 0.0) {
            return Err(Error::Precondition("diagonal entries must be real".into()));
        }
        Ok(Self { dim, bands })
    }

    pub fn from_real(dim: usize, bands: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(dim, bands.into_iter().map(|b| b.into_iter().map(|x| Complex64::new(x, 0.0)).collect()).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        let (lo, hi, conj) = if i <= j { (i, j, false) } else { (j, i, true) };
        let k = hi - lo;
        match self.bands.get(k) {
            Some(b) if conj => b[lo].conj(),
            Some(b) => b[lo],
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        for (k, b) in self.bands.iter().enumerate() {
            for (i, &a) in b.iter().enumerate() {
                y[i] += a * x[i + k];
                if k > 0 {
                    y[i + k] += a.conj() * x[i];
                }
            }
        }
        y
    }

    /// Principal submatrix on `start..start + len`.
    pub fn window(&self, start: usize, len: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(len, len, |i, j| self.entry(start + i, start + j))
    }

    pub fn dense(&self) -> DMatrix<Complex64> {
        self.window(0, self.dim)
    }
}

fn check_unit(a: &BandedHermitian, psi: &[Complex64]) -> Result<()> {
    if psi.len() != a.dim {
        return Err(Error::Dimension { expected: a.dim, got: psi.len() });
    }
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!("ψ must be a unit vector, ‖ψ‖ = {norm}")));
    }
    Ok(())
}

/// `d_0 = Σ A_ii|ψ_i|²` and `d_k = 2 Re Σ ψ̄_i A_{i,i+k} ψ_{i+k}` for `k ≥ 1`;
/// their sum is `⟨ψ, Aψ⟩`.
pub fn band_weights(a: &BandedHermitian, psi: &[Complex64]) -> Result<Vec<f64>> {
    check_unit(a, psi)?;
    Ok(a.bands
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let s: Complex64 = b.iter().enumerate().map(|(i, &x)| psi[i].conj() * x * psi[i + k]).sum();
            if k == 0 {
                s.re
            } else {
                2.0 * s.re
            }
        })
        .collect())
}

/// `λ + C/M′²·Σ_{1≤k<M′} k²|d_k| + C·Σ_{k≥M′}|d_k|`.
pub fn energy_bound(weights: &[f64], mprime: usize, c: f64) -> f64 {
    let lambda: f64 = weights.iter().sum();
    let mp = mprime as f64;
    let near: f64 =
        weights.iter().enumerate().skip(1).take(mprime.saturating_sub(1)).map(|(k, d)| (k * k) as f64 * d.abs()).sum();
    let far: f64 = weights.iter().skip(mprime.max(1)).map(|d| d.abs()).sum();
    lambda + c * near / (mp * mp) + c * far
}

#[derive(Clone, Debug, Serialize)]
pub struct Localized {
    /// Ground vector of the best window, zero-padded to full length.
    #[serde(skip)]
    pub phi: Vec<Complex64>,
    pub window_start: usize,
    pub window_len: usize,
    pub energy: f64,
    pub lambda: f64,
    pub weights: Vec<f64>,
    pub bound: f64,
    pub c: f64,
}

impl Localized {
    pub fn holds(&self) -> bool {
        self.energy <= self.bound
    }

    pub fn margin(&self) -> f64 {
        self.bound - self.energy
    }

    /// Smallest `C` for which the bound would hold (zero if `energy ≤ λ`).
    pub fn required_constant(&self) -> f64 {
        let excess = self.energy - self.lambda;
        if excess <= 0.0 {
            return 0.0;
        }
        let unit = energy_bound(&self.weights, self.window_len, 1.0) - self.lambda;
        if unit > 0.0 {
            excess / unit
        } else {
            f64::INFINITY
        }
    }
}

/// Lowest eigenvalue of every window of length `mprime`, in order.
pub fn window_minima(a: &BandedHermitian, mprime: usize) -> Vec<f64> {
    (0..=a.dim - mprime).into_par_iter().map(|s| a.window(s, mprime).symmetric_eigenvalues().min()).collect()
}

pub fn localize(a: &BandedHermitian, psi: &[Complex64], mprime: usize, c: f64) -> Result<Localized> {
    if mprime == 0 || mprime > a.dim {
        return Err(Error::Precondition(format!("need 1 ≤ M′ ≤ {}, got {mprime}", a.dim)));
    }
    let weights = band_weights(a, psi)?;
    let minima = window_minima(a, mprime);
    // lowest start wins ties
    let (start, &energy) =
        minima.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1).then(x.0.cmp(&y.0))).expect("at least one window");
    let eig = SymmetricEigen::new(a.window(start, mprime));
    let idx = eig.eigenvalues.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).map(|x| x.0).expect("non-empty");
    let mut phi = vec![Complex64::new(0.0, 0.0); a.dim];
    for i in 0..mprime {
        phi[start + i] = eig.eigenvectors[(i, idx)];
    }
    Ok(Localized {
        phi,
        window_start: start,
        window_len: mprime,
        energy,
        lambda: weights.iter().sum(),
        bound: energy_bound(&weights, mprime, c),
        weights,
        c,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Verification {
    pub holds: bool,
    pub margin: f64,
    pub energy: f64,
    pub bound: f64,
}

pub fn verify(a: &BandedHermitian, psi: &[Complex64], mprime: usize, c: f64) -> Result<Verification> {
    let l = localize(a, psi, mprime, c)?;
    Ok(Verification { holds: l.holds(), margin: l.margin(), energy: l.energy, bound: l.bound })
}

/// Read bands from CSV rows `k,i,re[,im]` meaning `A_{i,i+k}`; the dimension
/// is one more than the largest index touched.
pub fn read_bands(path: &Path) -> Result<BandedHermitian> {
    let rows = read_rows(path, 3, 4)?;
    let mut entries = Vec::with_capacity(rows.len());
    let mut dim = 0;
    for (line, r) in &rows {
        let (k, i) = (r[0], r[1]);
        if k < 0.0 || i < 0.0 || k.fract() != 0.0 || i.fract() != 0.0 {
            return Err(Error::GridFile {
                path: path.display().to_string(),
                message: format!("row {line}: k and i must be non-negative integers"),
            });
        }
        let (k, i) = (k as usize, i as usize);
        dim = dim.max(i + k + 1);
        entries.push((k, i, Complex64::new(r[2], r.get(3).copied().unwrap_or(0.0))));
    }
    let width = entries.iter().map(|e| e.0).max().unwrap_or(0);
    let mut bands: Vec<Vec<Complex64>> = (0..=width).map(|k| vec![Complex64::new(0.0, 0.0); dim - k]).collect();
    for (k, i, z) in entries {
        bands[k][i] = z;
    }
    BandedHermitian::new(dim, bands)
}

/// Read a vector from CSV rows `re[,im]`.
pub fn read_vector(path: &Path) -> Result<Vec<Complex64>> {
    Ok(read_rows(path, 1, 2)?
        .into_iter()
        .map(|(_, r)| Complex64::new(r[0], r.get(1).copied().unwrap_or(0.0)))
        .collect())
}

fn read_rows(path: &Path, min: usize, max: usize) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::GridFile { path: path.display().to_string(), message: e.to_string() })?;
    let mut out = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::GridFile { path: path.display().to_string(), message: e.to_string() })?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) if (min..=max).contains(&v.len()) => out.push((n + 1, v)),
            // a non-numeric first row is a header
            Err(_) if n == 0 => continue,
            _ => {
                return Err(Error::GridFile {
                    path: path.display().to_string(),
                    message: format!("row {}: expected {min} to {max} numeric columns", n + 1),
                })
            }
        }
    }
    Ok(out)
}

/// Random Hermitian matrices with bands 0, 1, 2 and a test vector each.
pub mod ensemble {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn two_banded(n_plus_one: usize, rng: &mut ChaCha8Rng) -> BandedHermitian {
        let mut c = |len: usize, scale: f64, complex: bool| -> Vec<Complex64> {
            (0..len)
                .map(|_| {
                    let re = rng.random_range(-1.0..1.0) * scale;
                    let im = if complex { rng.random_range(-1.0..1.0) * scale } else { 0.0 };
                    Complex64::new(re, im)
                })
                .collect()
        };
        let d0 = c(n_plus_one, 2.0, false);
        let d1 = c(n_plus_one - 1, 1.0, true);
        let d2 = c(n_plus_one - 2, 0.5, true);
        BandedHermitian::new(n_plus_one, vec![d0, d1, d2]).expect("consistent lengths")
    }

    /// A spread-out unit vector: wide envelope, slowly varying phase, noise.
    pub fn spread_vector(n_plus_one: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        let centre = rng.random_range(0.3..0.7) * n_plus_one as f64;
        let width = rng.random_range(0.1..0.5) * n_plus_one as f64;
        let freq = rng.random_range(-0.3..0.3);
        let mut v: Vec<Complex64> = (0..n_plus_one)
            .map(|i| {
                let x = (i as f64 - centre) / width;
                let amp = (-x * x).exp() * (1.0 + 0.2 * rng.random_range(-1.0..1.0));
                Complex64::from_polar(amp, freq * i as f64 + 0.3 * rng.random_range(-1.0..1.0))
            })
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        v
    }

    /// One trial of the calibration ensemble from `seed`.
    pub fn trial(seed: u64, n_plus_one: usize) -> (BandedHermitian, Vec<Complex64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = two_banded(n_plus_one, &mut rng);
        let psi = spread_vector(n_plus_one, &mut rng);
        (a, psi)
    }

    /// Same matrix as [`trial`], paired with its own ground state. Here
    /// `λ` is the global minimum, so every window sits above it and the
    /// bound is as tight as it gets.
    pub fn ground_state_trial(seed: u64, n_plus_one: usize) -> (BandedHermitian, Vec<Complex64>) {
        let (a, _) = trial(seed, n_plus_one);
        let eig = SymmetricEigen::new(a.dense());
        let psi = eig.eigenvectors.column(eig.eigenvalues.imin()).iter().copied().collect();
        (a, psi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn uniform(n: usize) -> Vec<Complex64> {
        vec![c(1.0 / (n as f64).sqrt(), 0.0); n]
    }

    /// Jacobi eigenvalues of the real symmetric embedding `[[Re, −Im], [Im, Re]]`.
    fn jacobi_min(h: &DMatrix<Complex64>) -> f64 {
        let n = h.nrows();
        let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let z = h[(i, j)];
                m[(i, j)] = z.re;
                m[(i + n, j + n)] = z.re;
                m[(i, j + n)] = -z.im;
                m[(i + n, j)] = z.im;
            }
        }
        let n2 = 2 * n;
        for _ in 0..100 {
            let off: f64 = (0..n2)
                .flat_map(|i| (0..n2).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)].powi(2))
                .sum();
            if off < 1e-26 {
                break;
            }
            for p in 0..n2 {
                for q in p + 1..n2 {
                    if m[(p, q)].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let cs = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * cs;
                    for k in 0..n2 {
                        let (akp, akq) = (m[(k, p)], m[(k, q)]);
                        m[(k, p)] = cs * akp - sn * akq;
                        m[(k, q)] = sn * akp + cs * akq;
                    }
                    for k in 0..n2 {
                        let (apk, aqk) = (m[(p, k)], m[(q, k)]);
                        m[(p, k)] = cs * apk - sn * aqk;
                        m[(q, k)] = sn * apk + cs * aqk;
                    }
                }
            }
        }
        (0..n2).map(|i| m[(i, i)]).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn weights_of_tridiagonal_ones() {
        let a = BandedHermitian::from_real(4, vec![vec![1.0; 4], vec![1.0; 3]]).unwrap();
        let d = band_weights(&a, &uniform(4)).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-15);
        assert!((d[1] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_expectation() {
        let (a, psi) = ensemble::trial(3, 30);
        let d = band_weights(&a, &psi).unwrap();
        let ap = a.apply(&psi);
        let lambda: Complex64 = psi.iter().zip(&ap).map(|(x, y)| x.conj() * y).sum();
        assert!(lambda.im.abs() < 1e-14);
        assert!((d.iter().sum::<f64>() - lambda.re).abs() < 1e-13);
    }

    #[test]
    fn diagonal_matrix() {
        let a = BandedHermitian::from_real(5, vec![vec![3.0, 1.0, 2.0, 0.5, 4.0]]).unwrap();
        let psi = uniform(5);
        let d = band_weights(&a, &psi).unwrap();
        assert_eq!(d.len(), 1);
        let l = localize(&a, &psi, 2, 0.0).unwrap();
        assert_eq!(l.energy, 0.5);
        assert!(l.holds());
        let mut at_min = vec![c(0.0, 0.0); 5];
        at_min[3] = c(1.0, 0.0);
        let v = verify(&a, &at_min, 1, 0.0).unwrap();
        assert!(v.holds && v.margin == 0.0);
    }

    #[test]
    fn full_window_recovers_ground_state() {
        let n = 12;
        let a = BandedHermitian::from_real(n, vec![vec![2.0; n], vec![-1.0; n - 1]]).unwrap();
        let eig = SymmetricEigen::new(a.dense());
        let idx = eig.eigenvalues.imin();
        let psi: Vec<Complex64> = eig.eigenvectors.column(idx).iter().copied().collect();
        let l = localize(&a, &psi, n, 1.0).unwrap();
        assert!((l.energy - l.lambda).abs() < 1e-12);
        // tiny C with a smaller window must fail: the window cannot reach λ
        let v = verify(&a, &psi, n / 2, 1e-6).unwrap();
        assert!(!v.holds && v.margin < 0.0);
    }

    #[test]
    fn complex_bands_give_real_weights() {
        let a = BandedHermitian::new(3, vec![vec![c(1.0, 0.0); 3], vec![c(0.0, 1.0), c(0.5, -0.5)]]).unwrap();
        let psi = vec![c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0)];
        let d = band_weights(&a, &psi).unwrap();
        assert!((d[1] - 2.0 * (c(0.6, 0.0) * c(0.0, 1.0) * c(0.0, 0.8)).re).abs() < 1e-15);
        assert!(BandedHermitian::new(2, vec![vec![c(1.0, 1.0), c(0.0, 0.0)]]).is_err());
    }

    #[test]
    fn sweep_matches_brute_force() {
        for seed in 0..30 {
            let n = 10 + (seed as usize % 41);
            let (a, _) = ensemble::trial(seed, n);
            let mp = 1 + (seed as usize * 7) % n;
            let sweep = window_minima(&a, mp).into_iter().fold(f64::INFINITY, f64::min);
            let brute = (0..=n - mp).map(|s| jacobi_min(&a.window(s, mp))).fold(f64::INFINITY, f64::min);
            assert!((sweep - brute).abs() < 1e-10, "seed {seed}: {sweep} vs {brute}");
        }
    }

    #[test]
    fn ground_states_need_a_positive_constant() {
        let cs: Vec<f64> = (0..40)
            .map(|seed| {
                let (a, psi) = ensemble::ground_state_trial(seed, 201);
                localize(&a, &psi, 20, 100.0).unwrap().required_constant()
            })
            .collect();
        // observed maximum is below 0.01; 4 leaves a wide margin
        assert!(cs.iter().all(|&c| c > 0.0 && c <= 4.0), "{cs:?}");
    }

    #[test]
    fn bound_reduces_for_two_bands() {
        let w = [1.0, -0.3, 0.2];
        let b = energy_bound(&w, 10, 2.0);
        assert!((b - (0.9 + 2.0 * (0.3 + 4.0 * 0.2) / 100.0)).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("a.csv");
        std::fs::write(&m, "k,i,re,im\n0,0,1\n0,1,2\n0,2,3\n1,0,0.5,0.25\n2,0,-1\n").unwrap();
        let a = read_bands(&m).unwrap();
        assert_eq!(a.dim(), 3);
        assert_eq!(a.entry(1, 0), c(0.5, -0.25));
        assert_eq!(a.entry(0, 2), c(-1.0, 0.0));
        let p = dir.path().join("psi.csv");
        std::fs::write(&p, "1,0\n0\n0,0\n").unwrap();
        assert_eq!(read_vector(&p).unwrap().len(), 3);
        std::fs::write(&p, "1,0,0,0,0\n").unwrap();
        assert!(read_vector(&p).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn energy_nonincreasing_in_window(seed in 0u64..1000) {
                let (a, psi) = ensemble::trial(seed, 24);
                let mut prev = f64::INFINITY;
                for mp in 1..=24 {
                    let e = localize(&a, &psi, mp, 1.0).unwrap().energy;
                    prop_assert!(e <= prev + 1e-12);
                    prev = e;
                }
            }
        }
    }
}
