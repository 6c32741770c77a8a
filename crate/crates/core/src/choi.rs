//! Raw Choi-matrix calculus on plain matrices.
//!
//! Conventions, fixed once for the whole crate:
//!
//! * A map `E: d_in -> d_out` has Choi matrix
//!   `J = sum_{ij} |i><j| (x) E(|i><j|)` of dimension `d_in * d_out`, with
//!   the input factor on the major index.
//! * `vec` is row-major: `vec(X)[i * cols + j] = X[i, j]`.
//! * The transfer matrix `S` satisfies `vec(E(rho)) = S vec(rho)` and is
//!   related to the Choi matrix by the index reshuffle
//!   `S[(k,l),(i,j)] = J[(i,k),(j,l)]`.
//!
//! Everything here is linear and unvalidated; `process` wraps these in
//! CPTNI-checked types. The feasibility solver calls these directly because
//! its constraint maps must act on arbitrary (non-CPTNI) Hermitian inputs.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::Result;
use crate::linalg::{partial_trace, permute_axes, ComplexMatrix};
use crate::scalar::Scalar;

/// Choi matrix of the identity channel in dimension `d`: `sum_{ij} |ii><jj|`.
pub fn choi_identity<T: Scalar>(d: usize) -> ComplexMatrix<T> {
    let mut j = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for jj in 0..d {
            j[(i * d + i, jj * d + jj)] = Complex::one();
        }
    }
    j
}

/// Choi matrix of the discarding map `d_in -> 1`: the identity matrix.
pub fn choi_discard<T: Scalar>(d_in: usize) -> ComplexMatrix<T> {
    ComplexMatrix::identity(d_in)
}

/// Choi matrix built from Kraus operators (`d_out x d_in` each).
pub fn choi_from_kraus<T: Scalar>(
    kraus: &[ComplexMatrix<T>],
    d_in: usize,
    d_out: usize,
) -> ComplexMatrix<T> {
    let mut j = ComplexMatrix::zeros(d_in * d_out, d_in * d_out);
    for k_op in kraus {
        for i in 0..d_in {
            for jj in 0..d_in {
                for k in 0..d_out {
                    let a = k_op[(k, i)];
                    if a.re.is_zero() && a.im.is_zero() {
                        continue;
                    }
                    for l in 0..d_out {
                        j[(i * d_out + k, jj * d_out + l)] =
                            j[(i * d_out + k, jj * d_out + l)] + a * k_op[(l, jj)].conj();
                    }
                }
            }
        }
    }
    j
}

/// Reshuffles a Choi matrix into the transfer matrix (`d_out^2 x d_in^2`).
pub fn choi_to_transfer<T: Scalar>(
    j: &ComplexMatrix<T>,
    d_in: usize,
    d_out: usize,
) -> ComplexMatrix<T> {
    let mut s = ComplexMatrix::zeros(d_out * d_out, d_in * d_in);
    for i in 0..d_in {
        for jj in 0..d_in {
            for k in 0..d_out {
                for l in 0..d_out {
                    s[(k * d_out + l, i * d_in + jj)] = j[(i * d_out + k, jj * d_out + l)];
                }
            }
        }
    }
    s
}

/// Inverse of [`choi_to_transfer`].
pub fn transfer_to_choi<T: Scalar>(
    s: &ComplexMatrix<T>,
    d_in: usize,
    d_out: usize,
) -> ComplexMatrix<T> {
    let mut j = ComplexMatrix::zeros(d_in * d_out, d_in * d_out);
    for i in 0..d_in {
        for jj in 0..d_in {
            for k in 0..d_out {
                for l in 0..d_out {
                    j[(i * d_out + k, jj * d_out + l)] = s[(k * d_out + l, i * d_in + jj)];
                }
            }
        }
    }
    j
}

/// Transfer matrix of conjugation by `u` (`rho -> u rho u^dagger`):
/// `u (x) conj(u)`.
pub fn transfer_of_conjugation<T: Scalar>(u: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    u.kron(&u.conj())
}

/// Applies a Choi matrix to a state: `vec(out) = S vec(rho)`.
pub fn apply_choi<T: Scalar>(
    j: &ComplexMatrix<T>,
    d_in: usize,
    d_out: usize,
    rho: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    let s = choi_to_transfer(j, d_in, d_out);
    let v = s.matmul(&rho.vectorize());
    v.unvectorize(d_out, d_out)
}

/// Pullback of an effect along the map: `e' = (Tr_out[(I (x) e) J])^T`,
/// so that `Tr[e' rho] = Tr[e E(rho)]` for all states.
pub fn effect_pullback<T: Scalar>(
    j: &ComplexMatrix<T>,
    d_in: usize,
    d_out: usize,
    effect: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    let lifted = ComplexMatrix::identity(d_in).kron(effect);
    let m = partial_trace(&lifted.matmul(j), &[d_in, d_out], &[0])?;
    Ok(m.transpose())
}

/// Choi matrix of `g . f` (first `f`, then `g`).
pub fn choi_sequential<T: Scalar>(
    j_f: &ComplexMatrix<T>,
    f_dims: (usize, usize),
    j_g: &ComplexMatrix<T>,
    g_dims: (usize, usize),
) -> ComplexMatrix<T> {
    debug_assert_eq!(f_dims.1, g_dims.0, "inner dimensions must agree");
    let s_f = choi_to_transfer(j_f, f_dims.0, f_dims.1);
    let s_g = choi_to_transfer(j_g, g_dims.0, g_dims.1);
    transfer_to_choi(&s_g.matmul(&s_f), f_dims.0, g_dims.1)
}

/// Choi matrix of the parallel composite `f (x) g`, with `f`'s wires before
/// `g`'s on both input and output.
pub fn choi_parallel<T: Scalar>(
    j_f: &ComplexMatrix<T>,
    f_dims: (usize, usize),
    j_g: &ComplexMatrix<T>,
    g_dims: (usize, usize),
) -> Result<ComplexMatrix<T>> {
    let raw = j_f.kron(j_g);
    // kron factor order: [f_in, f_out, g_in, g_out]; Choi wants
    // [f_in, g_in, f_out, g_out].
    let dims = [f_dims.0, f_dims.1, g_dims.0, g_dims.1];
    let perm = [0usize, 2, 1, 3];
    permute_axes(&raw, &dims, &perm, &dims, &perm)
}

/// Transfer matrix of the parallel composite from component transfers.
pub fn transfer_parallel<T: Scalar>(
    s_f: &ComplexMatrix<T>,
    f_dims: (usize, usize),
    s_g: &ComplexMatrix<T>,
    g_dims: (usize, usize),
) -> Result<ComplexMatrix<T>> {
    let raw = s_f.kron(s_g);
    let row_dims = [f_dims.1, f_dims.1, g_dims.1, g_dims.1];
    let col_dims = [f_dims.0, f_dims.0, g_dims.0, g_dims.0];
    let perm = [0usize, 2, 1, 3];
    permute_axes(&raw, &row_dims, &perm, &col_dims, &perm)
}

/// Partial trace of the Choi matrix over the output factor; equals the
/// identity on the input exactly when the map is trace-preserving.
pub fn choi_trace_out<T: Scalar>(
    j: &ComplexMatrix<T>,
    d_in: usize,
    d_out: usize,
) -> Result<ComplexMatrix<T>> {
    partial_trace(j, &[d_in, d_out], &[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Tolerance;

    type M = ComplexMatrix<f64>;

    fn kraus_apply(kraus: &[M], rho: &M) -> M {
        let mut out = M::zeros(kraus[0].rows(), kraus[0].rows());
        for k in kraus {
            out = &out + &k.matmul(rho).matmul(&k.adjoint());
        }
        out
    }

    fn hadamard() -> M {
        let s = 1.0 / 2.0_f64.sqrt();
        M::from_rows(&[vec![(s, 0.0), (s, 0.0)], vec![(s, 0.0), (-s, 0.0)]]).unwrap()
    }

    #[test]
    fn identity_choi_matches_formula() {
        let j = choi_identity::<f64>(2);
        let from_kraus = choi_from_kraus(&[M::identity(2)], 2, 2);
        assert!(j.distance(&from_kraus) < 1e-15);
    }

    #[test]
    fn reshuffle_round_trips() {
        let j = choi_from_kraus(&[hadamard()], 2, 2);
        let s = choi_to_transfer(&j, 2, 2);
        let back = transfer_to_choi(&s, 2, 2);
        assert!(back.distance(&j) < 1e-15);
    }

    #[test]
    fn apply_matches_kraus_application() {
        let kraus = vec![
            M::from_rows(&[vec![(0.9, 0.0), (0.0, 0.1)], vec![(0.1, 0.0), (0.2, 0.0)]]).unwrap(),
            M::from_rows(&[vec![(0.0, 0.0), (0.3, 0.0)], vec![(0.2, 0.1), (0.0, 0.0)]]).unwrap(),
        ];
        let rho = M::from_rows(&[
            vec![(0.6, 0.0), (0.2, -0.1)],
            vec![(0.2, 0.1), (0.4, 0.0)],
        ])
        .unwrap();
        let j = choi_from_kraus(&kraus, 2, 2);
        let via_choi = apply_choi(&j, 2, 2, &rho).unwrap();
        let direct = kraus_apply(&kraus, &rho);
        assert!(via_choi.distance(&direct) < 1e-14);
    }

    #[test]
    fn transfer_of_conjugation_consistent() {
        let u = hadamard();
        let rho = M::from_rows(&[
            vec![(0.7, 0.0), (0.1, 0.2)],
            vec![(0.1, -0.2), (0.3, 0.0)],
        ])
        .unwrap();
        let s = transfer_of_conjugation(&u);
        let out = s.matmul(&rho.vectorize()).unvectorize(2, 2).unwrap();
        assert!(out.distance(&rho.conjugate_by(&u)) < 1e-14);
    }

    #[test]
    fn sequential_matches_kraus_composition() {
        let k1 = vec![hadamard()];
        let k2 = vec![
            M::from_rows(&[vec![(1.0, 0.0), (0.0, 0.0)], vec![(0.0, 0.0), (0.0, 0.0)]]).unwrap(),
            M::from_rows(&[vec![(0.0, 0.0), (0.0, 0.0)], vec![(0.0, 0.0), (1.0, 0.0)]]).unwrap(),
        ];
        let j1 = choi_from_kraus(&k1, 2, 2);
        let j2 = choi_from_kraus(&k2, 2, 2);
        let j = choi_sequential(&j1, (2, 2), &j2, (2, 2));
        let rho = M::from_rows(&[
            vec![(0.8, 0.0), (0.1, 0.1)],
            vec![(0.1, -0.1), (0.2, 0.0)],
        ])
        .unwrap();
        let via_choi = apply_choi(&j, 2, 2, &rho).unwrap();
        let direct = kraus_apply(&k2, &kraus_apply(&k1, &rho));
        assert!(via_choi.distance(&direct) < 1e-14);
    }

    #[test]
    fn parallel_matches_kraus_tensor() {
        let f = vec![hadamard()];
        let g = vec![M::from_rows(&[
            vec![(1.0, 0.0), (0.0, 0.0)],
            vec![(0.0, 0.0), (0.0, 1.0)],
        ])
        .unwrap()];
        let jf = choi_from_kraus(&f, 2, 2);
        let jg = choi_from_kraus(&g, 2, 2);
        let joint = choi_parallel(&jf, (2, 2), &jg, (2, 2)).unwrap();
        let tensored_kraus = vec![f[0].kron(&g[0])];
        let expect = choi_from_kraus(&tensored_kraus, 4, 4);
        assert!(joint.distance(&expect) < 1e-14);
    }

    #[test]
    fn transfer_parallel_matches_choi_parallel() {
        let f = vec![hadamard()];
        let g = vec![M::from_rows(&[vec![(0.0, 0.0), (1.0, 0.0)], vec![(1.0, 0.0), (0.0, 0.0)]])
            .unwrap()];
        let jf = choi_from_kraus(&f, 2, 2);
        let jg = choi_from_kraus(&g, 2, 2);
        let sf = choi_to_transfer(&jf, 2, 2);
        let sg = choi_to_transfer(&jg, 2, 2);
        let s_joint = transfer_parallel(&sf, (2, 2), &sg, (2, 2)).unwrap();
        let j_joint = choi_parallel(&jf, (2, 2), &jg, (2, 2)).unwrap();
        assert!(s_joint.distance(&choi_to_transfer(&j_joint, 4, 4)) < 1e-14);
    }

    #[test]
    fn trace_out_of_unitary_channel_is_identity() {
        let j = choi_from_kraus(&[hadamard()], 2, 2);
        let reduced = choi_trace_out(&j, 2, 2).unwrap();
        let tol = Tolerance::default();
        assert!(crate::linalg::approx_eq(&reduced, &M::identity(2), &tol).unwrap());
    }

    #[test]
    fn effect_pullback_through_identity() {
        let e = M::from_rows(&[
            vec![(0.9, 0.0), (0.1, 0.3)],
            vec![(0.1, -0.3), (0.4, 0.0)],
        ])
        .unwrap();
        let j = choi_identity::<f64>(2);
        let back = effect_pullback(&j, 2, 2, &e).unwrap();
        assert!(back.distance(&e) < 1e-14);
    }

    #[test]
    fn effect_pullback_adjoint_identity() {
        // Tr[e' rho] == Tr[e E(rho)] for a non-unital channel.
        let kraus = vec![
            M::from_rows(&[vec![(1.0, 0.0), (0.0, 0.0)], vec![(0.0, 0.0), (0.5, 0.0)]]).unwrap(),
            M::from_rows(&[vec![(0.0, 0.0), (0.866025403784, 0.0)], vec![(0.0, 0.0), (0.0, 0.0)]])
                .unwrap(),
        ];
        let j = choi_from_kraus(&kraus, 2, 2);
        let e = M::from_rows(&[
            vec![(0.6, 0.0), (0.2, 0.1)],
            vec![(0.2, -0.1), (0.8, 0.0)],
        ])
        .unwrap();
        let rho = M::from_rows(&[
            vec![(0.3, 0.0), (0.1, -0.2)],
            vec![(0.1, 0.2), (0.7, 0.0)],
        ])
        .unwrap();
        let e_back = effect_pullback(&j, 2, 2, &e).unwrap();
        let lhs = e_back.matmul(&rho).trace();
        let rhs = e.matmul(&kraus_apply(&kraus, &rho)).trace();
        assert!((lhs - rhs).norm() < 1e-12);
    }
}
