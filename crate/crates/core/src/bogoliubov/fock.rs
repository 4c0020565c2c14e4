//! Ground energy of the two-mode quadratic Hamiltonian on a truncated Fock
//! space, by Lanczos iteration with full reorthogonalisation.

use nalgebra::{DMatrix, SymmetricEigen};

use super::ModeCoefficients;
use crate::error::{Error, Result};

const MAX_KRYLOV: usize = 600;
const RESIDUAL_TOL: f64 = 1e-12;

/// Two bosonic modes, each holding at most `n_max` quanta.
struct TwoModeHamiltonian {
    n_max: usize,
    a: f64,
    b: f64,
    /// `|κ|`; the phase of `κ` is removed by `a₊ → e^{iθ}a₊, a₋ → e^{−iθ}a₋`.
    k: f64,
    sqrt: Vec<f64>,
}

impl TwoModeHamiltonian {
    fn dim(&self) -> usize {
        (self.n_max + 1) * (self.n_max + 1)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n1 = self.n_max + 1;
        let s = &self.sqrt;
        for p in 0..n1 {
            for m in 0..n1 {
                let i = p * n1 + m;
                let mut acc = self.a * (p + m) as f64 * x[i];
                if p < self.n_max && m < self.n_max {
                    acc += self.b * s[p + 1] * s[m + 1] * x[i + n1 + 1];
                }
                if p > 0 && m > 0 {
                    acc += self.b * s[p] * s[m] * x[i - n1 - 1];
                }
                if self.k != 0.0 {
                    if p > 0 {
                        acc += self.k * s[p] * x[i - n1];
                    }
                    if p < self.n_max {
                        acc += self.k * s[p + 1] * x[i + n1];
                    }
                    if m > 0 {
                        acc += self.k * s[m] * x[i - 1];
                    }
                    if m < self.n_max {
                        acc += self.k * s[m + 1] * x[i + 1];
                    }
                }
                y[i] = acc;
            }
        }
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn lowest_ritz(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (idx, &theta) =
        eig.eigenvalues.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).expect("non-empty tridiagonal");
    (theta, eig.eigenvectors[(k - 1, idx)])
}

/// Lowest eigenvalue of `A(n₊+n₋) + B(a₊*a₋* + a₊a₋) + κ(a₊* + a₋) + κ̄(a₊ + a₋*)`
/// with at most `n_max` bosons in each mode.
pub fn diagonalize_mode_numeric(m: &ModeCoefficients, n_max: usize) -> Result<f64> {
    if n_max < 2 {
        return Err(Error::Precondition(format!("n_max must be at least 2, got {n_max}")));
    }
    m.validate()?;
    let h = TwoModeHamiltonian {
        n_max,
        a: m.a,
        b: m.b,
        k: m.kappa.norm(),
        sqrt: (0..=n_max + 1).map(|n| (n as f64).sqrt()).collect(),
    };
    let dim = h.dim();
    // deterministic start vector weighted towards low occupations
    let n1 = n_max + 1;
    let mut q: Vec<f64> = (0..dim)
        .map(|i| {
            let (p, mm) = (i / n1, i % n1);
            (1.0 + 0.3 * ((i as f64) * 0.618_033_988_75).fract()) * 0.5f64.powi((p + mm) as i32)
        })
        .collect();
    let norm = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= norm);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut w = vec![0.0; dim];
    let mut theta = f64::NAN;
    let limit = MAX_KRYLOV.min(dim);
    for j in 0..limit {
        h.apply(&q, &mut w);
        let aj = dot(&w, &q);
        alpha.push(aj);
        basis.push(q.clone());
        // two passes of classical Gram–Schmidt against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let c = dot(&w, v);
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let bj = dot(&w, &w).sqrt();
        if j % 5 == 4 || bj < 1e-14 || j + 1 == limit {
            let (t, last) = lowest_ritz(&alpha, &beta);
            theta = t;
            if bj * last.abs() <= RESIDUAL_TOL * t.abs().max(1.0) || bj < 1e-14 {
                return Ok(theta);
            }
        }
        beta.push(bj);
        q = w.iter().map(|x| x / bj).collect();
    }
    Ok(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bogoliubov::dispersion;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mode(a: f64, b: f64, k: Complex64) -> ModeCoefficients {
        ModeCoefficients::new(a, b, k).unwrap()
    }

    #[test]
    fn matches_closed_form_at_40() {
        let m = mode(2.0, 1.0, Complex64::new(0.0, 0.0));
        let e = diagonalize_mode_numeric(&m, 40).unwrap();
        assert!((e + (2.0 - 3f64.sqrt())).abs() < 1e-8, "{e}");
    }

    #[test]
    fn displaced_oscillator_is_exact() {
        let m = mode(1.0, 0.0, Complex64::new(1.0, 0.0));
        let e = diagonalize_mode_numeric(&m, 40).unwrap();
        assert!((e + 2.0).abs() < 1e-9, "{e}");
    }

    #[test]
    fn phase_of_kappa_is_irrelevant() {
        let e1 = diagonalize_mode_numeric(&mode(1.3, 0.4, Complex64::new(0.3, 0.0)), 30).unwrap();
        let e2 = diagonalize_mode_numeric(&mode(1.3, 0.4, Complex64::from_polar(0.3, 1.1)), 30).unwrap();
        assert!((e1 - e2).abs() < 1e-12);
    }

    #[test]
    fn near_degenerate_converges_monotonically() {
        let m = mode(1.0, 0.999, Complex64::new(0.0, 0.0));
        let exact = dispersion(&m).unwrap().ground_shift;
        let mut prev_err = f64::INFINITY;
        for n in [10, 20, 40, 80] {
            let e = diagonalize_mode_numeric(&m, n).unwrap();
            let err = e - exact;
            // truncation is variational: energies decrease towards the limit
            assert!(err >= -1e-9, "n = {n}: {e} below {exact}");
            assert!(err <= prev_err + 1e-12);
            prev_err = err;
        }
    }

    #[test]
    fn random_modes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let a = rng.random_range(0.5..2.0);
            let b = a * rng.random_range(-0.95..0.95);
            let k = Complex64::from_polar(rng.random_range(0.0..0.5) * a, rng.random_range(0.0..6.3));
            let m = mode(a, b, k);
            let e = diagonalize_mode_numeric(&m, 40).unwrap();
            let exact = dispersion(&m).unwrap().ground_shift;
            assert!((e - exact).abs() < 1e-7, "{m:?}: {e} vs {exact}");
        }
    }
}
