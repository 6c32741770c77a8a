//! Seeded random generators for states, unitaries and channels.
//!
//! Every generator takes an explicit RNG so that property suites and the
//! feasibility solver stay deterministic given their seed.

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::{ComplexMatrix, Tolerance};
use crate::process::{QuantumProcess, State};
use crate::scalar::Scalar;
use crate::system::SystemLabel;

/// Deterministic RNG used across the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for a sub-task; keeps parallel dispatch
/// deterministic regardless of completion order.
pub fn rng_for_subtask(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(index + 1)))
}

fn gaussian<T: Scalar>(rng: &mut impl Rng) -> T {
    let v: f64 = rng.sample(StandardNormal);
    T::from_f64_lossy(v)
}

/// Matrix with iid complex Gaussian entries.
pub fn random_gaussian_matrix<T: Scalar>(
    rows: usize,
    cols: usize,
    rng: &mut impl Rng,
) -> ComplexMatrix<T> {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = Complex::new(gaussian(rng), gaussian(rng));
        }
    }
    m
}

/// Random Hermitian matrix (Gaussian ensemble).
pub fn random_hermitian<T: Scalar>(dim: usize, rng: &mut impl Rng) -> ComplexMatrix<T> {
    random_gaussian_matrix(dim, dim, rng).hermitian_part()
}

/// Haar-ish random unitary: Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<T: Scalar>(dim: usize, rng: &mut impl Rng) -> ComplexMatrix<T> {
    loop {
        let g = random_gaussian_matrix::<T>(dim, dim, rng);
        if let Some(u) = gram_schmidt(&g) {
            return u;
        }
    }
}

fn gram_schmidt<T: Scalar>(m: &ComplexMatrix<T>) -> Option<ComplexMatrix<T>> {
    let n = m.rows();
    let mut cols: Vec<Vec<Complex<T>>> = (0..n)
        .map(|j| (0..n).map(|i| m[(i, j)]).collect())
        .collect();
    for j in 0..n {
        for k in 0..j {
            let proj: Complex<T> = cols[k]
                .iter()
                .zip(cols[j].iter())
                .map(|(a, b)| a.conj() * *b)
                .fold(Complex::new(T::zero(), T::zero()), |x, y| x + y);
            for i in 0..n {
                let sub = cols[k][i] * proj;
                cols[j][i] = cols[j][i] - sub;
            }
        }
        let norm: T = cols[j]
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt();
        if norm < T::from_f64_lossy(1e-8) {
            return None;
        }
        for i in 0..n {
            cols[j][i] = cols[j][i] / norm;
        }
    }
    let mut out = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            out[(i, j)] = cols[j][i];
        }
    }
    Some(out)
}

/// Random density matrix: normalized `G G^dagger`.
pub fn random_density<T: Scalar>(dim: usize, rng: &mut impl Rng) -> ComplexMatrix<T> {
    let g = random_gaussian_matrix::<T>(dim, dim, rng);
    let p = g.matmul(&g.adjoint());
    let tr = p.trace().re;
    p.scale_re(T::one() / tr)
}

/// Random state on a labeled system.
pub fn random_state<T: Scalar>(
    label: &SystemLabel,
    rng: &mut impl Rng,
) -> State<T> {
    State::new_unchecked(label.clone(), random_density(label.dim(), rng))
}

/// Random causal (trace-preserving) channel: Gaussian Kraus operators
/// renormalized by `(sum K^dagger K)^{-1/2}`.
pub fn random_causal_channel<T: Scalar>(
    input: &SystemLabel,
    output: &SystemLabel,
    kraus_count: usize,
    rng: &mut impl Rng,
) -> Result<QuantumProcess<T>> {
    let (d_in, d_out) = (input.dim(), output.dim());
    loop {
        let raw: Vec<ComplexMatrix<T>> = (0..kraus_count.max(1))
            .map(|_| random_gaussian_matrix(d_out, d_in, rng))
            .collect();
        let mut sum = ComplexMatrix::zeros(d_in, d_in);
        for k in &raw {
            sum = &sum + &k.adjoint().matmul(k);
        }
        // Resample the rare near-singular draw instead of regularizing, so
        // the normalized operators are trace-preserving to machine precision.
        let eigh = sum.hermitian_part().eigh()?;
        if eigh.min_eigenvalue() < T::from_f64_lossy(1e-6) {
            continue;
        }
        let inv_sqrt = eigh.reconstruct_with(|w| T::one() / w.sqrt());
        let kraus: Vec<ComplexMatrix<T>> = raw.iter().map(|k| k.matmul(&inv_sqrt)).collect();
        return QuantumProcess::from_kraus(&kraus, input.clone(), output.clone(), &Tolerance::default());
    }
}

/// Random conjugation by a Haar-ish unitary.
pub fn random_unitary_channel<T: Scalar>(
    sys: &SystemLabel,
    rng: &mut impl Rng,
) -> QuantumProcess<T> {
    let u = random_unitary(sys.dim(), rng);
    QuantumProcess::from_parts_unchecked(
        sys.clone(),
        sys.clone(),
        crate::choi::choi_from_kraus(&[u], sys.dim(), sys.dim()),
    )
}

/// Convex mixture of two channels of equal type.
pub fn mix_channels<T: Scalar>(
    a: &QuantumProcess<T>,
    b: &QuantumProcess<T>,
    weight_a: T,
) -> QuantumProcess<T> {
    let choi = &a.choi().scale_re(weight_a) + &b.choi().scale_re(T::one() - weight_a);
    QuantumProcess::from_parts_unchecked(a.input().clone(), a.output().clone(), choi)
}

/// Random row-stochastic matrix (rows sum to one).
pub fn random_stochastic<T: Scalar>(rows: usize, cols: usize, rng: &mut impl Rng) -> Vec<Vec<T>> {
    (0..rows)
        .map(|_| {
            let raw: Vec<T> = (0..cols)
                .map(|_| T::from_f64_lossy(rng.gen_range(0.0..1.0) + 1e-3))
                .collect();
            let total: T = raw.iter().cloned().sum();
            raw.into_iter().map(|v| v / total).collect()
        })
        .collect()
}
