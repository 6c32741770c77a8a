//! Dense complex matrices with explicit numerical-tolerance semantics.
//!
//! Everything downstream (Choi matrices, twirls, the feasibility solver)
//! is built on [`ComplexMatrix`]. Storage is row-major, and Kronecker
//! products put the left factor on the major index; both conventions are
//! fixed here once and relied on everywhere else.

mod eig;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use eig::Eigh;

/// Default cap on the dimension of any composite matrix produced by a
/// tensor product. Keeps every check desk-scale.
pub const DEFAULT_DIM_LIMIT: usize = 4096;

/// Absolute / relative tolerances threaded through all predicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T: Scalar> {
    /// Frobenius tolerance for matrix equality.
    pub eq_atol: T,
    /// Eigenvalue floor for positive-semidefiniteness checks.
    pub psd_atol: T,
    /// Residual accepted by the feasibility solver.
    pub feas_atol: T,
}

impl<T: Scalar> Default for Tolerance<T> {
    fn default() -> Self {
        Self {
            eq_atol: T::from_f64_lossy(1e-9),
            psd_atol: T::from_f64_lossy(1e-9),
            feas_atol: T::from_f64_lossy(1e-7),
        }
    }
}

impl<T: Scalar> Tolerance<T> {
    /// Checks the structural invariants: strictly positive fields and
    /// `feas_atol >= eq_atol`.
    pub fn validate(&self) -> Result<()> {
        if !(self.eq_atol > T::zero() && self.psd_atol > T::zero() && self.feas_atol > T::zero()) {
            return Err(Error::BadConfig(
                "tolerances must be strictly positive".into(),
            ));
        }
        if self.feas_atol < self.eq_atol {
            return Err(Error::BadConfig(
                "feas_atol must be at least eq_atol".into(),
            ));
        }
        Ok(())
    }

    /// Same tolerances but with equality checks relaxed to the feasibility
    /// residual; used when re-verifying solver certificates.
    pub fn relaxed_to_feas(&self) -> Self {
        Self {
            eq_atol: self.feas_atol,
            psd_atol: self.feas_atol,
            feas_atol: self.feas_atol,
        }
    }
}

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix<T: Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> fmt::Debug for ComplexMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4e}{:+.4e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> ComplexMatrix<T> {
    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeError(format!(
                "expected {}x{}={} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::ShapeError("non-finite matrix entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from rows of `(re, im)` pairs.
    pub fn from_rows(rows: &[Vec<(T, T)>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeError("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|&(re, im)| Complex::new(re, im)))
            .collect();
        Self::from_vec(r, c, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    /// Rank-one matrix `|i><j|` in dimension `n`.
    pub fn elementary(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = Complex::one();
        m
    }

    /// Diagonal matrix from real entries.
    pub fn diagonal(entries: &[T]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in entries.iter().enumerate() {
            m[(i, i)] = Complex::new(v, T::zero());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_re(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex<T> {
        debug_assert!(self.is_square());
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .fold(Complex::zero(), |a, b| a + b)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Frobenius norm of `self - other`.
    pub fn distance(&self, other: &Self) -> T {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// `||A - A^dagger||_F`.
    pub fn hermiticity_residual(&self) -> T {
        self.distance(&self.adjoint())
    }

    /// `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::from_f64_lossy(0.5);
        let adj = self.adjoint();
        let mut out = self.clone();
        for (o, a) in out.data.iter_mut().zip(adj.data) {
            *o = (*o + a) * half;
        }
        out
    }

    /// Matrix product.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re.is_zero() && a.im.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    /// `U A U^dagger`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }

    /// Kronecker product with `self` on the major index.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Hilbert-Schmidt inner product `Tr(A^dagger B)`.
    pub fn hs_inner(&self, other: &Self) -> Complex<T> {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * *b)
            .fold(Complex::zero(), |a, b| a + b)
    }

    /// Unitarity residual `||U^dagger U - I||_F`.
    pub fn unitarity_residual(&self) -> T {
        self.adjoint()
            .matmul(self)
            .distance(&Self::identity(self.cols))
    }

    /// Flattens the matrix row-major into a column vector (`rows*cols x 1`).
    pub fn vectorize(&self) -> Self {
        Self {
            rows: self.rows * self.cols,
            cols: 1,
            data: self.data.clone(),
        }
    }

    /// Inverse of [`ComplexMatrix::vectorize`].
    pub fn unvectorize(&self, rows: usize, cols: usize) -> Result<Self> {
        if self.cols != 1 || self.rows != rows * cols {
            return Err(Error::ShapeError(format!(
                "cannot reshape {}x{} into {}x{}",
                self.rows, self.cols, rows, cols
            )));
        }
        Self::from_vec(rows, cols, self.data.clone())
    }
}

impl<T: Scalar> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn add(self, other: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }
}

impl<T: Scalar> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn sub(self, other: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| *a - *b)
                .collect(),
        }
    }
}

impl<T: Scalar> Neg for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn neg(self) -> ComplexMatrix<T> {
        self.map(|z| -z)
    }
}

impl<T: Scalar> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn mul(self, other: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        self.matmul(other)
    }
}

/// Kronecker product guarded by the default composite-dimension cap.
pub fn tensor_product<T: Scalar>(
    a: &ComplexMatrix<T>,
    b: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    tensor_product_capped(a, b, DEFAULT_DIM_LIMIT)
}

/// Kronecker product with an explicit dimension cap.
pub fn tensor_product_capped<T: Scalar>(
    a: &ComplexMatrix<T>,
    b: &ComplexMatrix<T>,
    limit: usize,
) -> Result<ComplexMatrix<T>> {
    let dim = a.rows().max(a.cols()) * b.rows().max(b.cols());
    if dim > limit {
        return Err(Error::DimensionLimit {
            requested: dim,
            limit,
        });
    }
    Ok(a.kron(b))
}

fn decode_index(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for pos in (0..dims.len()).rev() {
        out[pos] = idx % dims[pos];
        idx /= dims[pos];
    }
}

fn encode_index(digits: &[usize], dims: &[usize]) -> usize {
    digits
        .iter()
        .zip(dims)
        .fold(0, |acc, (&d, &dim)| acc * dim + d)
}

/// Partial trace of a square matrix over the factors *not* in `keep`.
///
/// `dims` lists the tensor factor dimensions (left factor major); the result
/// keeps the factors in `keep` in their original order. An empty `keep`
/// yields the 1x1 matrix `[Tr(m)]`.
pub fn partial_trace<T: Scalar>(
    m: &ComplexMatrix<T>,
    dims: &[usize],
    keep: &[usize],
) -> Result<ComplexMatrix<T>> {
    if !m.is_square() {
        return Err(Error::ShapeError("partial trace needs a square matrix".into()));
    }
    let total: usize = dims.iter().product();
    if total != m.rows() {
        return Err(Error::ShapeError(format!(
            "factor dims {:?} do not multiply to matrix dimension {}",
            dims,
            m.rows()
        )));
    }
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::ShapeError(format!(
            "invalid keep set {:?} for {} factors",
            keep,
            dims.len()
        )));
    }
    let keep_in_order: Vec<usize> = (0..dims.len()).filter(|i| keep.contains(i)).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let kept_dims: Vec<usize> = keep_in_order.iter().map(|&i| dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let out_dim: usize = kept_dims.iter().product::<usize>().max(1);
    let traced_total: usize = traced_dims.iter().product::<usize>().max(1);

    let k = dims.len();
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    let mut row_digits = vec![0usize; k];
    let mut col_digits = vec![0usize; k];
    let mut kept_row = vec![0usize; keep_in_order.len()];
    let mut kept_col = vec![0usize; keep_in_order.len()];
    let mut tr_digits = vec![0usize; traced.len()];
    for r in 0..out_dim {
        decode_index(r, &kept_dims, &mut kept_row);
        for c in 0..out_dim {
            decode_index(c, &kept_dims, &mut kept_col);
            let mut acc = Complex::zero();
            for t in 0..traced_total {
                decode_index(t, &traced_dims, &mut tr_digits);
                for (slot, &facet) in keep_in_order.iter().enumerate() {
                    row_digits[facet] = kept_row[slot];
                    col_digits[facet] = kept_col[slot];
                }
                for (slot, &facet) in traced.iter().enumerate() {
                    row_digits[facet] = tr_digits[slot];
                    col_digits[facet] = tr_digits[slot];
                }
                let ri = encode_index(&row_digits, dims);
                let ci = encode_index(&col_digits, dims);
                acc = acc + m[(ri, ci)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Reorders tensor factors of a rectangular matrix.
///
/// Row factor `j` of the result is row factor `row_perm[j]` of the input, and
/// likewise for columns. Pass the same permutation twice for square
/// operators.
pub fn permute_axes<T: Scalar>(
    m: &ComplexMatrix<T>,
    row_dims: &[usize],
    row_perm: &[usize],
    col_dims: &[usize],
    col_perm: &[usize],
) -> Result<ComplexMatrix<T>> {
    let check = |dims: &[usize], perm: &[usize], extent: usize, what: &str| -> Result<()> {
        let mut seen = vec![false; dims.len()];
        if perm.len() != dims.len() || dims.iter().product::<usize>().max(1) != extent {
            return Err(Error::ShapeError(format!("bad {what} dims/permutation")));
        }
        for &p in perm {
            if p >= dims.len() || seen[p] {
                return Err(Error::ShapeError(format!("bad {what} permutation")));
            }
            seen[p] = true;
        }
        Ok(())
    };
    check(row_dims, row_perm, m.rows(), "row")?;
    check(col_dims, col_perm, m.cols(), "column")?;

    let new_row_dims: Vec<usize> = row_perm.iter().map(|&p| row_dims[p]).collect();
    let new_col_dims: Vec<usize> = col_perm.iter().map(|&p| col_dims[p]).collect();
    let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
    let mut new_r = vec![0usize; row_dims.len()];
    let mut new_c = vec![0usize; col_dims.len()];
    let mut old_r = vec![0usize; row_dims.len()];
    let mut old_c = vec![0usize; col_dims.len()];
    for r in 0..m.rows() {
        decode_index(r, &new_row_dims, &mut new_r);
        for (j, &p) in row_perm.iter().enumerate() {
            old_r[p] = new_r[j];
        }
        let ri = encode_index(&old_r, row_dims);
        for c in 0..m.cols() {
            decode_index(c, &new_col_dims, &mut new_c);
            for (j, &p) in col_perm.iter().enumerate() {
                old_c[p] = new_c[j];
            }
            let ci = encode_index(&old_c, col_dims);
            out[(r, c)] = m[(ri, ci)];
        }
    }
    Ok(out)
}

/// Permutation matrix sending basis vector `|i_0 .. i_{k-1}>` (factor dims
/// `dims`) to the basis vector with factors reordered by `perm`.
pub fn permutation_matrix<T: Scalar>(dims: &[usize], perm: &[usize]) -> ComplexMatrix<T> {
    let n: usize = dims.iter().product::<usize>().max(1);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut out = ComplexMatrix::zeros(n, n);
    let mut digits = vec![0usize; dims.len()];
    let mut new_digits = vec![0usize; dims.len()];
    for src in 0..n {
        decode_index(src, dims, &mut digits);
        for (j, &p) in perm.iter().enumerate() {
            new_digits[j] = digits[p];
        }
        let dst = encode_index(&new_digits, &new_dims);
        out[(dst, src)] = Complex::one();
    }
    out
}

/// Frobenius-norm approximate equality with a relative scale floor of one:
/// `||a - b||_F <= eq_atol * max(1, ||a||_F)`.
pub fn approx_eq<T: Scalar>(
    a: &ComplexMatrix<T>,
    b: &ComplexMatrix<T>,
    tol: &Tolerance<T>,
) -> Result<bool> {
    if (a.rows(), a.cols()) != (b.rows(), b.cols()) {
        return Err(Error::ShapeError(format!(
            "approx_eq shape mismatch: {}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let scale = T::one().max(a.frobenius_norm());
    Ok(a.distance(b) <= tol.eq_atol * scale)
}

/// True iff `m` is Hermitian within `eq_atol` and its minimum eigenvalue is
/// at least `-psd_atol`.
pub fn is_psd<T: Scalar>(m: &ComplexMatrix<T>, tol: &Tolerance<T>) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = T::one().max(m.frobenius_norm());
    if m.hermiticity_residual() > tol.eq_atol * scale {
        return false;
    }
    match m.hermitian_part().eigh() {
        Ok(e) => e.min_eigenvalue() >= -tol.psd_atol,
        Err(_) => false,
    }
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue<T: Scalar>(m: &ComplexMatrix<T>) -> Result<T> {
    Ok(m.hermitian_part().eigh()?.min_eigenvalue())
}

/// Projects onto the PSD cone: Hermitian part, then negative eigenvalues
/// clipped to zero.
pub fn psd_project<T: Scalar>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let eigh = m.hermitian_part().eigh()?;
    Ok(eigh.reconstruct_with(|w| w.max(T::zero())))
}

/// `f(M)` for Hermitian `M` through the eigendecomposition.
pub fn hermitian_function<T: Scalar>(
    m: &ComplexMatrix<T>,
    f: impl Fn(T) -> T,
) -> Result<ComplexMatrix<T>> {
    Ok(m.hermitian_part().eigh()?.reconstruct_with(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = ComplexMatrix<f64>;

    fn pauli_x() -> M {
        M::from_rows(&[
            vec![(0.0, 0.0), (1.0, 0.0)],
            vec![(1.0, 0.0), (0.0, 0.0)],
        ])
        .unwrap()
    }

    #[test]
    fn kron_identities() {
        let i2 = M::identity(2);
        assert_eq!(tensor_product(&i2, &i2).unwrap(), M::identity(4));
    }

    #[test]
    fn kron_pauli_x_pair_is_antidiagonal() {
        let xx = tensor_product(&pauli_x(), &pauli_x()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i + j == 3 { 1.0 } else { 0.0 };
                assert!((xx[(i, j)].re - expect).abs() < 1e-15);
                assert_eq!(xx[(i, j)].im, 0.0);
            }
        }
    }

    #[test]
    fn kron_projectors() {
        let p0 = M::elementary(2, 0, 0);
        let p1 = M::elementary(2, 1, 1);
        let m = tensor_product(&p0, &p1).unwrap();
        let expect = M::diagonal(&[0.0, 1.0, 0.0, 0.0]);
        assert!(m.distance(&expect) < 1e-15);
    }

    #[test]
    fn kron_respects_dim_limit() {
        let big = M::identity(70);
        match tensor_product(&big, &big) {
            Err(Error::DimensionLimit { requested, limit }) => {
                assert_eq!(requested, 4900);
                assert_eq!(limit, DEFAULT_DIM_LIMIT);
            }
            other => panic!("expected DimensionLimit, got {other:?}"),
        }
    }

    #[test]
    fn partial_trace_of_product_state() {
        let rho = M::from_rows(&[
            vec![(0.7, 0.0), (0.1, 0.2)],
            vec![(0.1, -0.2), (0.3, 0.0)],
        ])
        .unwrap();
        let sigma = M::diagonal(&[0.4, 0.6]);
        let joint = rho.kron(&sigma);
        let reduced = partial_trace(&joint, &[2, 2], &[0]).unwrap();
        assert!(reduced.distance(&rho) < 1e-14);
        let other = partial_trace(&joint, &[2, 2], &[1]).unwrap();
        assert!(other.distance(&sigma) < 1e-14);
    }

    #[test]
    fn partial_trace_of_bell_state() {
        // |phi+><phi+| on two qubits.
        let mut bell = M::zeros(4, 4);
        for &i in &[0usize, 3] {
            for &j in &[0usize, 3] {
                bell[(i, j)] = Complex::new(0.5, 0.0);
            }
        }
        let reduced = partial_trace(&bell, &[2, 2], &[0]).unwrap();
        assert!(reduced.distance(&M::diagonal(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn partial_trace_empty_keep_is_full_trace() {
        let m = M::from_rows(&[
            vec![(1.0, 0.0), (2.0, 1.0)],
            vec![(0.0, 0.0), (4.0, 0.0)],
        ])
        .unwrap();
        let t = partial_trace(&m, &[2], &[]).unwrap();
        assert_eq!(t.rows(), 1);
        assert!((t[(0, 0)].re - 5.0).abs() < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = M::identity(4);
        assert!(matches!(
            partial_trace(&m, &[3, 2], &[0]),
            Err(Error::ShapeError(_))
        ));
    }

    #[test]
    fn permute_axes_swaps_kron_factors() {
        let a = M::from_rows(&[
            vec![(1.0, 0.0), (2.0, 0.0)],
            vec![(3.0, 0.0), (4.0, 0.0)],
        ])
        .unwrap();
        let b = M::from_rows(&[
            vec![(0.0, 1.0), (5.0, 0.0), (0.0, 0.0)],
            vec![(1.0, 0.0), (0.0, 0.0), (2.0, 0.0)],
            vec![(0.0, 0.0), (1.0, 1.0), (0.0, 0.0)],
        ])
        .unwrap();
        let ab = a.kron(&b);
        let ba = b.kron(&a);
        let swapped = permute_axes(&ab, &[2, 3], &[1, 0], &[2, 3], &[1, 0]).unwrap();
        assert!(swapped.distance(&ba) < 1e-15);
    }

    #[test]
    fn permutation_matrix_swap() {
        let p = permutation_matrix::<f64>(&[2, 3], &[1, 0]);
        let a = M::from_rows(&[vec![(1.0, 0.0)], vec![(2.0, 0.0)]]).unwrap();
        let b = M::from_rows(&[vec![(3.0, 0.0)], vec![(4.0, 0.0)], vec![(5.0, 0.0)]]).unwrap();
        let v = a.kron(&b);
        let swapped = p.matmul(&v);
        assert!(swapped.distance(&b.kron(&a)) < 1e-15);
    }

    #[test]
    fn psd_project_clips_negative_eigenvalues() {
        let m = M::diagonal(&[2.0, -1.0]);
        let p = psd_project(&m).unwrap();
        assert!(p.distance(&M::diagonal(&[2.0, 0.0])) < 1e-12);
    }

    #[test]
    fn psd_project_pauli_x() {
        // Eigenvalues of X are +-1; clipping -1 leaves (X + I)/2.
        let p = psd_project(&pauli_x()).unwrap();
        let expect = (&pauli_x() + &M::identity(2)).scale_re(0.5);
        assert!(p.distance(&expect) < 1e-12);
    }

    #[test]
    fn psd_project_is_idempotent_and_fixes_psd() {
        let tol = Tolerance::default();
        let m = M::from_rows(&[
            vec![(0.8, 0.0), (0.3, 0.4)],
            vec![(0.3, -0.4), (0.9, 0.0)],
        ])
        .unwrap();
        let once = psd_project(&m).unwrap();
        let twice = psd_project(&once).unwrap();
        assert!(approx_eq(&once, &twice, &tol).unwrap());
        assert!(is_psd(&once, &tol));
    }

    #[test]
    fn is_psd_examples() {
        let tol = Tolerance::default();
        assert!(is_psd(&M::identity(2), &tol));
        assert!(!is_psd(&M::diagonal(&[1.0, -0.5]), &tol));
        // |+><+|
        let plus = M::from_rows(&[
            vec![(0.5, 0.0), (0.5, 0.0)],
            vec![(0.5, 0.0), (0.5, 0.0)],
        ])
        .unwrap();
        assert!(is_psd(&plus, &tol));
        // Non-Hermitian matrices are rejected outright.
        assert!(!is_psd(&M::elementary(2, 0, 1), &tol));
    }

    #[test]
    fn approx_eq_examples() {
        let tol = Tolerance::default();
        let i = M::identity(2);
        assert!(approx_eq(&i, &i, &tol).unwrap());
        let nudged = &i + &pauli_x().scale_re(1e-12);
        assert!(approx_eq(&i, &nudged, &tol).unwrap());
        assert!(!approx_eq(&i, &pauli_x(), &tol).unwrap());
        assert!(matches!(
            approx_eq(&i, &M::identity(3), &tol),
            Err(Error::ShapeError(_))
        ));
    }

    #[test]
    fn tolerance_invariants() {
        assert!(Tolerance::<f64>::default().validate().is_ok());
        let bad = Tolerance {
            eq_atol: 1e-6,
            psd_atol: 1e-9,
            feas_atol: 1e-9,
        };
        assert!(bad.validate().is_err());
        let zero = Tolerance {
            eq_atol: 0.0,
            psd_atol: 1e-9,
            feas_atol: 1e-7,
        };
        assert!(zero.validate().is_err());
    }

    #[test]
    fn from_vec_rejects_non_finite() {
        let bad = vec![Complex::new(f64::NAN, 0.0)];
        assert!(M::from_vec(1, 1, bad).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let tol = Tolerance::<f32>::default();
        let i = ComplexMatrix::<f32>::identity(2);
        assert!(is_psd(&i, &tol));
        assert!(approx_eq(&i, &i, &tol).unwrap());
    }
}
