//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! This is the single dense factorization the crate needs: PSD checks, PSD
//! projection, operator square roots and the pseudo-inverse inside the
//! feasibility solver all go through it. Jacobi is chosen for its
//! unconditional robustness at desk scale; inputs here are at most a few
//! hundred rows.

use num_complex::Complex;
use num_traits::Zero;

use super::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 60;

/// Eigendecomposition `A = V diag(w) V^dagger` of a Hermitian matrix, with
/// eigenvalues ascending and eigenvectors as the columns of `V`.
#[derive(Debug, Clone)]
pub struct Eigh<T: Scalar> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: ComplexMatrix<T>,
}

impl<T: Scalar> Eigh<T> {
    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues
            .iter()
            .cloned()
            .fold(T::infinity(), |a, b| a.min(b))
    }

    /// Rebuilds `V diag(f(w)) V^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &w) in self.eigenvalues.iter().enumerate() {
            let fw = f(w);
            if fw == T::zero() {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)];
                if vik.re.is_zero() && vik.im.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + vik * v[(j, k)].conj() * fw;
                }
            }
        }
        out
    }
}

impl<T: Scalar> ComplexMatrix<T> {
    /// Eigendecomposition of `self`, which must be Hermitian. Only the lower
    /// triangle is trusted in the sense that the matrix is symmetrized
    /// implicitly by the rotations; callers should pass
    /// [`ComplexMatrix::hermitian_part`] when Hermiticity is approximate.
    pub fn eigh(&self) -> Result<Eigh<T>> {
        if !self.is_square() {
            return Err(Error::ShapeError("eigh needs a square matrix".into()));
        }
        let n = self.rows();
        let mut a = self.clone();
        let mut v = ComplexMatrix::identity(n);
        if n <= 1 {
            let w = if n == 1 { vec![a[(0, 0)].re] } else { vec![] };
            return Ok(Eigh {
                eigenvalues: w,
                eigenvectors: v,
            });
        }

        let norm = self.frobenius_norm();
        let stop = T::epsilon() * T::one().max(norm) * T::from_count(n);
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let mut off = T::zero();
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off + a[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() <= stop {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
        if !converged {
            // One final check; quadratic convergence usually terminates far
            // earlier, so reaching here means genuinely pathological input.
            let mut off = T::zero();
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off + a[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() > stop {
                return Err(Error::NumericalFailure(format!(
                    "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps (off-diagonal {})",
                    off.sqrt()
                )));
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
        order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));
        let eigenvalues: Vec<T> = order.iter().map(|&i| diag[i]).collect();
        let mut eigenvectors = ComplexMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            for i in 0..n {
                eigenvectors[(i, dst)] = v[(i, src)];
            }
        }
        Ok(Eigh {
            eigenvalues,
            eigenvectors,
        })
    }
}

/// One Jacobi rotation annihilating the (p, q) entry of Hermitian `a`,
/// accumulating the rotation into `v`.
fn rotate<T: Scalar>(a: &mut ComplexMatrix<T>, v: &mut ComplexMatrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == T::zero() {
        return;
    }
    let phase = apq / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (r + r);
    let sign = if tau >= T::zero() { T::one() } else { -T::one() };
    let t = sign / (tau.abs() + (T::one() + tau * tau).sqrt());
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;

    let cs = Complex::new(c, T::zero());
    let su = phase * s; // s * e^{i phi}
    let su_conj = su.conj();
    let n = a.rows();

    // Column update: A <- A * G with G = [[c, s u], [-s u*, c]] on (p, q).
    for i in 0..n {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip * cs - aiq * su_conj;
        a[(i, q)] = aip * su + aiq * cs;
    }
    // Row update: A <- G^dagger * A.
    for j in 0..n {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = apj * cs - aqj * su;
        a[(q, j)] = aqj * cs + apj * su_conj;
    }
    // Clean the annihilated pair and enforce real diagonal.
    a[(p, q)] = Complex::zero();
    a[(q, p)] = Complex::zero();
    let dpp = a[(p, p)].re;
    let dqq = a[(q, q)].re;
    a[(p, p)] = Complex::new(dpp, T::zero());
    a[(q, q)] = Complex::new(dqq, T::zero());

    // Accumulate eigenvectors: V <- V * G.
    for i in 0..n {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * cs - viq * su_conj;
        v[(i, q)] = vip * su + viq * cs;
    }
}
