//! CPTNI processes between labeled systems, stored as Choi matrices.

use num_complex::Complex;

use crate::choi;
use crate::error::{Error, Result};
use crate::linalg::{
    approx_eq, is_psd, partial_trace, permute_axes, permutation_matrix, tensor_product_capped,
    ComplexMatrix, Tolerance, DEFAULT_DIM_LIMIT,
};
use crate::scalar::Scalar;
use crate::system::SystemLabel;

/// A subnormalised density operator on a labeled system.
#[derive(Debug, Clone)]
pub struct State<T: Scalar> {
    pub label: SystemLabel,
    pub rho: ComplexMatrix<T>,
}

impl<T: Scalar> State<T> {
    /// Validates PSD and trace at most one (within tolerance).
    pub fn new(label: SystemLabel, rho: ComplexMatrix<T>, tol: &Tolerance<T>) -> Result<Self> {
        if rho.rows() != label.dim() || !rho.is_square() {
            return Err(Error::ShapeError(format!(
                "state on {} must be {}x{}",
                label,
                label.dim(),
                label.dim()
            )));
        }
        if !is_psd(&rho, tol) {
            return Err(Error::NotCptni("state is not PSD".into()));
        }
        if rho.trace().re > T::one() + tol.eq_atol {
            return Err(Error::NotCptni(format!(
                "state trace {} exceeds one",
                rho.trace().re
            )));
        }
        Ok(Self { label, rho })
    }

    pub fn new_unchecked(label: SystemLabel, rho: ComplexMatrix<T>) -> Self {
        Self { label, rho }
    }

    pub fn dim(&self) -> usize {
        self.label.dim()
    }
}

/// A POVM element (effect) on a labeled system.
#[derive(Debug, Clone)]
pub struct EffectOp<T: Scalar> {
    pub label: SystemLabel,
    pub op: ComplexMatrix<T>,
}

impl<T: Scalar> EffectOp<T> {
    /// Validates PSD and `op <= I` (within tolerance).
    pub fn new(label: SystemLabel, op: ComplexMatrix<T>, tol: &Tolerance<T>) -> Result<Self> {
        if op.rows() != label.dim() || !op.is_square() {
            return Err(Error::ShapeError(format!(
                "effect on {} must be {}x{}",
                label,
                label.dim(),
                label.dim()
            )));
        }
        if !is_psd(&op, tol) {
            return Err(Error::NotCptni("effect is not PSD".into()));
        }
        let slack = &ComplexMatrix::identity(op.rows()) - &op;
        if !is_psd(&slack, tol) {
            return Err(Error::NotCptni("effect exceeds the identity".into()));
        }
        Ok(Self { label, op })
    }

    pub fn new_unchecked(label: SystemLabel, op: ComplexMatrix<T>) -> Self {
        Self { label, op }
    }
}

/// A completely positive trace-non-increasing map between labeled systems,
/// canonically represented by its Choi matrix.
#[derive(Debug, Clone)]
pub struct QuantumProcess<T: Scalar> {
    input: SystemLabel,
    output: SystemLabel,
    choi: ComplexMatrix<T>,
}

impl<T: Scalar> QuantumProcess<T> {
    /// Ingests a Choi matrix, validating complete positivity, trace
    /// non-increase and classical-wire covariance.
    pub fn from_choi(
        input: SystemLabel,
        output: SystemLabel,
        choi: ComplexMatrix<T>,
        tol: &Tolerance<T>,
    ) -> Result<Self> {
        let (d_in, d_out) = (input.dim(), output.dim());
        if choi.rows() != d_in * d_out || !choi.is_square() {
            return Err(Error::ShapeError(format!(
                "Choi matrix for {input} -> {output} must be {n}x{n}",
                n = d_in * d_out
            )));
        }
        if !is_psd(&choi, tol) {
            return Err(Error::NotCptni("Choi matrix is not PSD".into()));
        }
        let reduced = choi::choi_trace_out(&choi, d_in, d_out)?;
        let slack = &ComplexMatrix::identity(d_in) - &reduced;
        if !is_psd(&slack, tol) {
            return Err(Error::NotCptni(
                "partial trace of the Choi matrix exceeds the identity".into(),
            ));
        }
        let process = Self {
            input,
            output,
            choi,
        };
        process.validate_classical_wires(tol)?;
        Ok(process)
    }

    /// Builds the process from Kraus operators (`d_out x d_in` each).
    pub fn from_kraus(
        kraus: &[ComplexMatrix<T>],
        input: SystemLabel,
        output: SystemLabel,
        tol: &Tolerance<T>,
    ) -> Result<Self> {
        let (d_in, d_out) = (input.dim(), output.dim());
        if kraus.is_empty() {
            return Err(Error::NotCptni("empty Kraus list".into()));
        }
        for k in kraus {
            if k.rows() != d_out || k.cols() != d_in {
                return Err(Error::ShapeError(format!(
                    "Kraus operator must be {d_out}x{d_in}, got {}x{}",
                    k.rows(),
                    k.cols()
                )));
            }
        }
        let mut sum = ComplexMatrix::zeros(d_in, d_in);
        for k in kraus {
            sum = &sum + &k.adjoint().matmul(k);
        }
        let slack = &ComplexMatrix::identity(d_in) - &sum;
        if !is_psd(&slack, tol) {
            return Err(Error::NotCptni(
                "Kraus operators sum above the identity".into(),
            ));
        }
        let choi = choi::choi_from_kraus(kraus, d_in, d_out);
        let process = Self {
            input,
            output,
            choi,
        };
        process.validate_classical_wires(tol)?;
        Ok(process)
    }

    /// Internal constructor for matrices known to be valid by construction.
    pub(crate) fn from_parts_unchecked(
        input: SystemLabel,
        output: SystemLabel,
        choi: ComplexMatrix<T>,
    ) -> Self {
        Self {
            input,
            output,
            choi,
        }
    }

    /// The identity channel on a system.
    pub fn identity(sys: SystemLabel) -> Self {
        let d = sys.dim();
        Self {
            input: sys.clone(),
            output: sys,
            choi: choi::choi_identity(d),
        }
    }

    /// The discarding map (trace effect) on a system.
    pub fn discard(sys: SystemLabel) -> Self {
        let d = sys.dim();
        Self {
            input: sys,
            output: SystemLabel::trivial(),
            choi: choi::choi_discard(d),
        }
    }

    /// State preparation as a process from the trivial system.
    pub fn prepare(state: &State<T>) -> Self {
        Self {
            input: SystemLabel::trivial(),
            output: state.label.clone(),
            choi: state.rho.clone(),
        }
    }

    /// Unitary conjugation channel on a system.
    pub fn from_unitary(u: &ComplexMatrix<T>, sys: SystemLabel, tol: &Tolerance<T>) -> Result<Self> {
        if u.rows() != sys.dim() || !u.is_square() {
            return Err(Error::ShapeError(format!(
                "unitary on {sys} must be {d}x{d}",
                d = sys.dim()
            )));
        }
        if u.unitarity_residual() > tol.eq_atol * T::one().max(u.frobenius_norm()) {
            return Err(Error::BadBasis(format!(
                "matrix is not unitary (residual {})",
                u.unitarity_residual()
            )));
        }
        Self::from_kraus(std::slice::from_ref(u), sys.clone(), sys, tol)
    }

    pub fn input(&self) -> &SystemLabel {
        &self.input
    }

    pub fn output(&self) -> &SystemLabel {
        &self.output
    }

    pub fn choi(&self) -> &ComplexMatrix<T> {
        &self.choi
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.input.dim(), self.output.dim())
    }

    /// True iff input and output labels coincide.
    pub fn is_endomorphic(&self) -> bool {
        self.input == self.output
    }

    /// The transfer matrix `S` with `vec(E(rho)) = S vec(rho)`.
    pub fn transfer(&self) -> ComplexMatrix<T> {
        choi::choi_to_transfer(&self.choi, self.input.dim(), self.output.dim())
    }

    /// `||Tr_out(J) - I||_F`, zero exactly for causal (trace-preserving)
    /// processes.
    pub fn causality_residual(&self) -> T {
        let reduced = choi::choi_trace_out(&self.choi, self.input.dim(), self.output.dim())
            .expect("choi dims are consistent by construction");
        reduced.distance(&ComplexMatrix::identity(self.input.dim()))
    }

    /// Causality check: discarding after the process equals discarding.
    pub fn is_causal(&self, tol: &Tolerance<T>) -> bool {
        let scale = T::one().max(T::from_count(self.input.dim()).sqrt());
        self.causality_residual() <= tol.eq_atol * scale
    }

    /// Applies the process to a state on its input system.
    pub fn apply(&self, state: &State<T>) -> Result<State<T>> {
        if state.label != self.input {
            return Err(Error::WireMismatch(format!(
                "state on {} fed into process expecting {}",
                state.label, self.input
            )));
        }
        let rho = choi::apply_choi(&self.choi, self.input.dim(), self.output.dim(), &state.rho)?;
        Ok(State::new_unchecked(self.output.clone(), rho))
    }

    /// Pulls an effect on the output back to an effect on the input
    /// (pre-composition `e . f`).
    pub fn pull_effect(&self, effect: &EffectOp<T>) -> Result<EffectOp<T>> {
        if effect.label != self.output {
            return Err(Error::WireMismatch(format!(
                "effect on {} pulled through process with output {}",
                effect.label, self.output
            )));
        }
        let op = choi::effect_pullback(
            &self.choi,
            self.input.dim(),
            self.output.dim(),
            &effect.op,
        )?;
        Ok(EffectOp::new_unchecked(self.input.clone(), op))
    }

    /// Sequential composition `g . f` (first `self`, then `g`).
    pub fn then(&self, g: &Self) -> Result<Self> {
        if self.output != g.input {
            return Err(Error::WireMismatch(format!(
                "cannot compose {} -> {} with {} -> {}",
                self.input, self.output, g.input, g.output
            )));
        }
        let choi = choi::choi_sequential(&self.choi, self.dims(), &g.choi, g.dims());
        Ok(Self {
            input: self.input.clone(),
            output: g.output.clone(),
            choi,
        })
    }

    /// Parallel composition, `self`'s wires before `other`'s.
    pub fn parallel(&self, other: &Self) -> Result<Self> {
        self.parallel_capped(other, DEFAULT_DIM_LIMIT)
    }

    /// Parallel composition with an explicit composite-dimension cap.
    pub fn parallel_capped(&self, other: &Self, limit: usize) -> Result<Self> {
        let in_dim = self.input.dim() * other.input.dim();
        let out_dim = self.output.dim() * other.output.dim();
        let requested = in_dim.max(out_dim);
        if requested > limit {
            return Err(Error::DimensionLimit { requested, limit });
        }
        let choi = choi::choi_parallel(&self.choi, self.dims(), &other.choi, other.dims())?;
        Ok(Self {
            input: self.input.concat(&other.input),
            output: self.output.concat(&other.output),
            choi,
        })
    }

    /// Conjugates the process by wire permutations: factor `j` of the new
    /// input is factor `perm_in[j]` of the old one, and likewise for outputs.
    pub fn permute_wires(&self, perm_in: &[usize], perm_out: &[usize]) -> Result<Self> {
        let n_in = self.input.factors().len().max(1);
        let n_out = self.output.factors().len().max(1);
        let norm_in: Vec<usize> = if self.input.is_trivial() && perm_in.is_empty() {
            vec![0]
        } else {
            perm_in.to_vec()
        };
        let norm_out: Vec<usize> = if self.output.is_trivial() && perm_out.is_empty() {
            vec![0]
        } else {
            perm_out.to_vec()
        };
        if norm_in.len() != n_in || norm_out.len() != n_out {
            return Err(Error::ShapeError(
                "permutation length does not match factor count".into(),
            ));
        }
        let in_dims = self.input.factor_dims();
        let out_dims = self.output.factor_dims();
        let mut dims = in_dims.clone();
        dims.extend(&out_dims);
        let mut perm = norm_in.clone();
        perm.extend(norm_out.iter().map(|&p| p + in_dims.len()));
        let choi = permute_axes(&self.choi, &dims, &perm, &dims, &perm)?;
        let input = if self.input.is_trivial() {
            self.input.clone()
        } else {
            self.input.permuted(&norm_in)
        };
        let output = if self.output.is_trivial() {
            self.output.clone()
        } else {
            self.output.permuted(&norm_out)
        };
        Ok(Self {
            input,
            output,
            choi,
        })
    }

    /// For processes with trivial input and output: the scalar value.
    pub fn scalar_value(&self) -> Option<T> {
        if self.input.is_trivial() && self.output.is_trivial() {
            Some(self.choi[(0, 0)].re)
        } else {
            None
        }
    }

    /// Processes touching classical wires must commute with the
    /// computational-basis dephasing on those wires.
    fn validate_classical_wires(&self, tol: &Tolerance<T>) -> Result<()> {
        let in_classical = self.input.classical_positions();
        let out_classical = self.output.classical_positions();
        if in_classical.is_empty() && out_classical.is_empty() {
            return Ok(());
        }
        let deph_in = classical_dephasing_transfer(&self.input);
        let deph_out = classical_dephasing_transfer(&self.output);
        let s = self.transfer();
        let lhs = deph_out.matmul(&s);
        let rhs = s.matmul(&deph_in);
        let scale = T::one().max(s.frobenius_norm());
        if lhs.distance(&rhs) > tol.eq_atol * scale {
            return Err(Error::ClassicalWire(format!(
                "process {} -> {} does not commute with classical-basis dephasing (residual {})",
                self.input,
                self.output,
                lhs.distance(&rhs)
            )));
        }
        Ok(())
    }
}

/// Transfer matrix of the dephasing that pins every classical factor of the
/// label to the computational basis and leaves quantum factors alone.
fn classical_dephasing_transfer<T: Scalar>(label: &SystemLabel) -> ComplexMatrix<T> {
    let d = label.dim();
    let dims = label.factor_dims();
    let classical = label.classical_positions();
    let mut s = ComplexMatrix::zeros(d * d, d * d);
    // Transfer of a pinching: diagonal in the (row, col) index pair basis,
    // keeping |i><j| exactly when every classical factor agrees on i and j.
    let mut di = vec![0usize; dims.len()];
    let mut dj = vec![0usize; dims.len()];
    for i in 0..d {
        decode(i, &dims, &mut di);
        for j in 0..d {
            decode(j, &dims, &mut dj);
            let keep = classical.iter().all(|&pos| di[pos] == dj[pos]);
            if keep {
                let idx = i * d + j;
                s[(idx, idx)] = Complex::new(T::one(), T::zero());
            }
        }
    }
    s
}

fn decode(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for pos in (0..dims.len()).rev() {
        out[pos] = idx % dims[pos];
        idx /= dims[pos];
    }
}

/// Frobenius distance between the Choi matrices of two processes with
/// matching wire types.
pub fn process_distance<T: Scalar>(a: &QuantumProcess<T>, b: &QuantumProcess<T>) -> Result<T> {
    if a.input() != b.input() || a.output() != b.output() {
        return Err(Error::WireMismatch(format!(
            "{} -> {} vs {} -> {}",
            a.input(),
            a.output(),
            b.input(),
            b.output()
        )));
    }
    Ok(a.choi().distance(b.choi()))
}

/// Choi-matrix approximate equality for processes of matching types.
pub fn process_approx_eq<T: Scalar>(
    a: &QuantumProcess<T>,
    b: &QuantumProcess<T>,
    tol: &Tolerance<T>,
) -> Result<bool> {
    if a.input() != b.input() || a.output() != b.output() {
        return Err(Error::WireMismatch("process type mismatch".into()));
    }
    approx_eq(a.choi(), b.choi(), tol)
}

/// Permutation unitary on the Hilbert space of `label` reordering its
/// factors by `perm`.
pub fn wire_permutation_unitary<T: Scalar>(label: &SystemLabel, perm: &[usize]) -> ComplexMatrix<T> {
    permutation_matrix(&label.factor_dims(), perm)
}

/// Swaps two halves of a bipartite Choi index; exposed for tests.
pub fn swap_unitary<T: Scalar>(d_a: usize, d_b: usize) -> ComplexMatrix<T> {
    permutation_matrix(&[d_a, d_b], &[1, 0])
}

/// Partial trace over output factors of a process, as a process.
pub fn marginal_on<T: Scalar>(
    process: &QuantumProcess<T>,
    keep_output_factors: &[usize],
) -> Result<QuantumProcess<T>> {
    let out_factors = process.output().factors();
    let new_output = SystemLabel::new(
        keep_output_factors
            .iter()
            .map(|&i| out_factors[i].clone())
            .collect(),
    );
    let discarded: Vec<usize> = (0..out_factors.len())
        .filter(|i| !keep_output_factors.contains(i))
        .collect();
    // Move kept factors to the front, then discard the tail.
    let mut perm: Vec<usize> = keep_output_factors.to_vec();
    perm.extend(&discarded);
    let permuted = process.permute_wires(
        &(0..process.input().factors().len().max(1)).collect::<Vec<_>>(),
        &perm,
    )?;
    let tail = SystemLabel::new(discarded.iter().map(|&i| out_factors[i].clone()).collect());
    let keep_id = QuantumProcess::identity(new_output.clone());
    let drop_tail = keep_id.parallel(&QuantumProcess::discard(tail))?;
    permuted.then(&drop_tail)
}

/// Partial traces `m` down to the factors of `keep` within `label`.
pub fn reduce_state<T: Scalar>(
    state: &State<T>,
    keep_factors: &[usize],
) -> Result<State<T>> {
    let dims = state.label.factor_dims();
    let rho = partial_trace(&state.rho, &dims, keep_factors)?;
    let kept = SystemLabel::new(
        keep_factors
            .iter()
            .map(|&i| state.label.factors()[i].clone())
            .collect(),
    );
    Ok(State::new_unchecked(kept, rho))
}

/// Tensor product of two states.
pub fn state_product<T: Scalar>(a: &State<T>, b: &State<T>) -> Result<State<T>> {
    let rho = tensor_product_capped(&a.rho, &b.rho, DEFAULT_DIM_LIMIT)?;
    Ok(State::new_unchecked(a.label.concat(&b.label), rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::AtomicSystem;

    type M = ComplexMatrix<f64>;

    fn qubit(name: &str) -> SystemLabel {
        SystemLabel::single(AtomicSystem::quantum(name, 2))
    }

    fn tol() -> Tolerance<f64> {
        Tolerance::default()
    }

    fn hadamard() -> M {
        let s = 1.0 / 2.0_f64.sqrt();
        M::from_rows(&[vec![(s, 0.0), (s, 0.0)], vec![(s, 0.0), (-s, 0.0)]]).unwrap()
    }

    fn plus_state(label: SystemLabel) -> State<f64> {
        let rho = M::from_rows(&[
            vec![(0.5, 0.0), (0.5, 0.0)],
            vec![(0.5, 0.0), (0.5, 0.0)],
        ])
        .unwrap();
        State::new(label, rho, &tol()).unwrap()
    }

    fn dephasing_kraus() -> Vec<M> {
        vec![M::elementary(2, 0, 0), M::elementary(2, 1, 1)]
    }

    #[test]
    fn identity_channel_choi_pattern() {
        let id = QuantumProcess::<f64>::identity(qubit("A"));
        // sum_{ij} |ii><jj|
        let mut expect = M::zeros(4, 4);
        for &r in &[0usize, 3] {
            for &c in &[0usize, 3] {
                expect[(r, c)] = Complex::new(1.0, 0.0);
            }
        }
        assert!(id.choi().distance(&expect) < 1e-15);
        assert!(id.is_causal(&tol()));
    }

    #[test]
    fn dephasing_choi_is_diagonal_pattern() {
        let d = QuantumProcess::from_kraus(&dephasing_kraus(), qubit("A"), qubit("A"), &tol())
            .unwrap();
        // sum_i |ii><ii| = diag(1, 0, 0, 1)
        let expect = M::diagonal(&[1.0, 0.0, 0.0, 1.0]);
        assert!(d.choi().distance(&expect) < 1e-15);
        assert!(d.is_causal(&tol()));
    }

    #[test]
    fn filter_is_cptni_but_not_causal() {
        let filter =
            QuantumProcess::from_kraus(&[M::elementary(2, 0, 0)], qubit("A"), qubit("A"), &tol())
                .unwrap();
        assert!(!filter.is_causal(&tol()));
    }

    #[test]
    fn kraus_above_identity_rejected() {
        let too_big = M::identity(2).scale_re(1.1);
        let err = QuantumProcess::from_kraus(&[too_big], qubit("A"), qubit("A"), &tol());
        assert!(matches!(err, Err(Error::NotCptni(_))));
    }

    #[test]
    fn apply_dephasing_to_plus_gives_maximally_mixed() {
        let a = qubit("A");
        let d =
            QuantumProcess::from_kraus(&dephasing_kraus(), a.clone(), a.clone(), &tol()).unwrap();
        let out = d.apply(&plus_state(a)).unwrap();
        assert!(out.rho.distance(&M::diagonal(&[0.5, 0.5])) < 1e-14);
    }

    #[test]
    fn sequential_identity_is_neutral() {
        let a = qubit("A");
        let f = QuantumProcess::from_unitary(&hadamard(), a.clone(), &tol()).unwrap();
        let id = QuantumProcess::identity(a);
        let left = id.then(&f).unwrap();
        let right = f.then(&id).unwrap();
        assert!(process_approx_eq(&left, &f, &tol()).unwrap());
        assert!(process_approx_eq(&right, &f, &tol()).unwrap());
    }

    #[test]
    fn dephasing_is_idempotent() {
        let a = qubit("A");
        let d =
            QuantumProcess::from_kraus(&dephasing_kraus(), a.clone(), a.clone(), &tol()).unwrap();
        let dd = d.then(&d).unwrap();
        assert!(process_approx_eq(&dd, &d, &tol()).unwrap());
    }

    #[test]
    fn prepare_then_discard_is_unit_scalar() {
        let a = qubit("A");
        let zero = State::new(a.clone(), M::diagonal(&[1.0, 0.0]), &tol()).unwrap();
        let scalar = QuantumProcess::prepare(&zero)
            .then(&QuantumProcess::discard(a))
            .unwrap();
        assert!((scalar.scalar_value().unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn discard_respects_composition() {
        let a = qubit("A");
        let b = qubit("B");
        let joint = QuantumProcess::<f64>::discard(a.clone().concat(&b));
        let split = QuantumProcess::<f64>::discard(a)
            .parallel(&QuantumProcess::discard(b))
            .unwrap();
        assert!(joint.choi().distance(split.choi()) < 1e-14);
    }

    #[test]
    fn parallel_identities_merge() {
        let a = qubit("A");
        let b = qubit("B");
        let ab = a.concat(&b);
        let joint = QuantumProcess::<f64>::identity(a.clone())
            .parallel(&QuantumProcess::identity(b))
            .unwrap();
        let direct = QuantumProcess::<f64>::identity(ab);
        assert!(joint.choi().distance(direct.choi()) < 1e-14);
        assert_eq!(joint.input(), direct.input());
    }

    #[test]
    fn parallel_preparations_tensor() {
        let a = qubit("A");
        let b = qubit("B");
        let rho = State::new(a, M::diagonal(&[0.3, 0.7]), &tol()).unwrap();
        let sigma = State::new(b, M::diagonal(&[0.9, 0.1]), &tol()).unwrap();
        let joint = QuantumProcess::prepare(&rho)
            .parallel(&QuantumProcess::prepare(&sigma))
            .unwrap();
        let expect = QuantumProcess::prepare(&state_product(&rho, &sigma).unwrap());
        assert!(joint.choi().distance(expect.choi()) < 1e-14);
    }

    #[test]
    fn apply_discard_gives_trace() {
        let a = qubit("A");
        let rho = State::new(a.clone(), M::diagonal(&[0.4, 0.35]), &tol()).unwrap();
        let out = QuantumProcess::discard(a).apply(&rho).unwrap();
        assert!((out.rho[(0, 0)].re - 0.75).abs() < 1e-14);
    }

    #[test]
    fn unitary_channels_are_causal() {
        let f = QuantumProcess::from_unitary(&hadamard(), qubit("A"), &tol()).unwrap();
        assert!(f.is_causal(&tol()));
    }

    #[test]
    fn wire_mismatch_reported() {
        let a = qubit("A");
        let b = qubit("B");
        let f = QuantumProcess::<f64>::identity(a);
        let g = QuantumProcess::<f64>::identity(b);
        assert!(matches!(f.then(&g), Err(Error::WireMismatch(_))));
    }

    #[test]
    fn permute_wires_identity_noop() {
        let a = qubit("A");
        let b = qubit("B");
        let f = QuantumProcess::<f64>::identity(a.concat(&b));
        let same = f.permute_wires(&[0, 1], &[0, 1]).unwrap();
        assert!(f.choi().distance(same.choi()) < 1e-15);
    }

    #[test]
    fn permute_wires_bell_symmetry() {
        // The Bell state |phi+> is invariant under swapping its two qubits.
        let a = qubit("A");
        let b = qubit("B");
        let mut bell = M::zeros(4, 4);
        for &r in &[0usize, 3] {
            for &c in &[0usize, 3] {
                bell[(r, c)] = Complex::new(0.5, 0.0);
            }
        }
        let prep = QuantumProcess::prepare(
            &State::new(a.concat(&b), bell, &tol()).unwrap(),
        );
        let swapped = prep.permute_wires(&[0], &[1, 0]).unwrap();
        assert!(prep.choi().distance(swapped.choi()) < 1e-14);
        // Swapping twice is the identity on any process.
        let h = QuantumProcess::from_unitary(&hadamard(), qubit("A"), &tol()).unwrap();
        let hx = h.parallel(&QuantumProcess::identity(qubit("B"))).unwrap();
        let double = hx
            .permute_wires(&[1, 0], &[1, 0])
            .unwrap()
            .permute_wires(&[1, 0], &[1, 0])
            .unwrap();
        assert!(hx.choi().distance(double.choi()) < 1e-14);
    }

    #[test]
    fn interchange_law_on_fixed_processes() {
        let a = qubit("A");
        let b = qubit("B");
        let f = QuantumProcess::from_unitary(&hadamard(), a.clone(), &tol()).unwrap();
        let h = QuantumProcess::from_kraus(&dephasing_kraus(), a.clone(), a, &tol()).unwrap();
        let x = M::from_rows(&[vec![(0.0, 0.0), (1.0, 0.0)], vec![(1.0, 0.0), (0.0, 0.0)]])
            .unwrap();
        let g = QuantumProcess::from_unitary(&x, b.clone(), &tol()).unwrap();
        let k = QuantumProcess::from_kraus(&dephasing_kraus(), b.clone(), b, &tol()).unwrap();
        let lhs = f.parallel(&g).unwrap().then(&h.parallel(&k).unwrap()).unwrap();
        let rhs = f.then(&h).unwrap().parallel(&g.then(&k).unwrap()).unwrap();
        assert!(lhs.choi().distance(rhs.choi()) < 1e-13);
    }

    #[test]
    fn classical_wire_validation() {
        let c = SystemLabel::single(AtomicSystem::classical("n", 2));
        // Hadamard on a classical wire must be rejected.
        let err = QuantumProcess::from_kraus(&[hadamard()], c.clone(), c.clone(), &tol());
        assert!(matches!(err, Err(Error::ClassicalWire(_))));
        // A permutation (classical reversible map) is fine.
        let x = M::from_rows(&[vec![(0.0, 0.0), (1.0, 0.0)], vec![(1.0, 0.0), (0.0, 0.0)]])
            .unwrap();
        assert!(QuantumProcess::from_kraus(&[x], c.clone(), c, &tol()).is_ok());
    }

    #[test]
    fn marginal_on_keeps_selected_factor() {
        let a = qubit("A");
        let b = qubit("B");
        let rho = State::new(a.clone(), M::diagonal(&[0.2, 0.8]), &tol()).unwrap();
        let sigma = State::new(b.clone(), M::diagonal(&[0.6, 0.4]), &tol()).unwrap();
        let prep = QuantumProcess::prepare(&state_product(&rho, &sigma).unwrap());
        let only_b = marginal_on(&prep, &[1]).unwrap();
        assert_eq!(only_b.output(), &b);
        assert!(only_b.choi().distance(&sigma.rho) < 1e-14);
    }

    #[test]
    fn scalars_live_in_unit_interval() {
        let a = qubit("A");
        let half = State::new(a.clone(), M::diagonal(&[0.25, 0.25]), &tol()).unwrap();
        let s = QuantumProcess::prepare(&half)
            .then(&QuantumProcess::discard(a))
            .unwrap();
        let v = s.scalar_value().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
}
