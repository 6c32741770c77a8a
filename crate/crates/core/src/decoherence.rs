//! Decoherence processes, mechanisms and per-theory decoherence families.
//!
//! A decoherence process is a causal idempotent endomorphism; a mechanism
//! additionally records the environment state and induces a decoherence
//! process once the environment is discarded. A family assigns decoherence
//! to every system of interest together with a composition rule, and the
//! closure of the decohered subtheory under wiring is checked here as an
//! executable property rather than assumed.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::One;
use rand::Rng;

use crate::choi;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tolerance};
use crate::process::{marginal_on, process_approx_eq, QuantumProcess, State};
use crate::report::{ConstraintResidual, PropertyReport, ValidationReport};
use crate::sampling;
use crate::scalar::Scalar;
use crate::system::SystemLabel;

/// Cap on the size of synthesized conjugation-averaging sets.
const MAX_AVERAGING_SET: usize = 64;

/// Scenario composites in closure suites stay at most this large.
const CLOSURE_DIM_CAP: usize = 32;

/// A causal idempotent endomorphism on a system.
#[derive(Debug, Clone)]
pub struct DecoherenceProcess<T: Scalar> {
    proc: QuantumProcess<T>,
    /// Unitaries whose conjugation average reproduces the process, when the
    /// constructor knows them (dephasing, block pinching, twirl). Member
    /// generators use these to produce commuting channels constructively.
    averaging: Option<Vec<ComplexMatrix<T>>>,
}

/// Residual report for the causal + idempotent validation.
pub fn validate_decoherence<T: Scalar>(
    proc: &QuantumProcess<T>,
    tol: &Tolerance<T>,
) -> Result<ValidationReport<T>> {
    if proc.input() != proc.output() {
        return Err(Error::ShapeError(format!(
            "decoherence process must be endomorphic, got {} -> {}",
            proc.input(),
            proc.output()
        )));
    }
    let causality = proc.causality_residual();
    let twice = proc.then(proc)?;
    let idempotence = twice.choi().distance(proc.choi());
    Ok(ValidationReport::from_residuals(
        vec![
            ConstraintResidual {
                constraint: "causality".into(),
                residual: causality,
            },
            ConstraintResidual {
                constraint: "idempotence".into(),
                residual: idempotence,
            },
        ],
        tol.eq_atol * T::one().max(proc.choi().frobenius_norm()),
    ))
}

impl<T: Scalar> DecoherenceProcess<T> {
    /// Validates and wraps an endomorphic process as a decoherence process.
    pub fn new(proc: QuantumProcess<T>, tol: &Tolerance<T>) -> Result<Self> {
        Self::with_averaging(proc, None, tol)
    }

    fn with_averaging(
        proc: QuantumProcess<T>,
        averaging: Option<Vec<ComplexMatrix<T>>>,
        tol: &Tolerance<T>,
    ) -> Result<Self> {
        let report = validate_decoherence(&proc, tol)?;
        if !report.valid {
            let worst = report.worst_constraint().expect("two constraints");
            return Err(Error::InvalidDecoherence(format!(
                "{} residual {} on {}",
                worst.constraint,
                worst.residual,
                proc.input()
            )));
        }
        Ok(Self { proc, averaging })
    }

    /// The identity channel is always a (trivial) decoherence process.
    pub fn trivial(sys: SystemLabel) -> Self {
        let d = sys.dim();
        Self {
            proc: QuantumProcess::identity(sys),
            averaging: Some(vec![ComplexMatrix::identity(d)]),
        }
    }

    pub fn system(&self) -> &SystemLabel {
        self.proc.input()
    }

    pub fn process(&self) -> &QuantumProcess<T> {
        &self.proc
    }

    pub fn averaging_unitaries(&self) -> Option<&[ComplexMatrix<T>]> {
        self.averaging.as_deref()
    }

    /// Parallel composite of two decoherence processes.
    pub fn parallel(&self, other: &Self) -> Result<Self> {
        let proc = self.proc.parallel(&other.proc)?;
        let averaging = match (&self.averaging, &other.averaging) {
            (Some(a), Some(b)) if a.len() * b.len() <= MAX_AVERAGING_SET => Some(
                a.iter()
                    .flat_map(|u| b.iter().map(move |v| u.kron(v)))
                    .collect(),
            ),
            _ => None,
        };
        Ok(Self { proc, averaging })
    }
}

/// A process from `sys` to `sys ++ env` inducing a decoherence process on
/// `sys` once the environment is discarded.
#[derive(Debug, Clone)]
pub struct DecoherenceMechanism<T: Scalar> {
    sys: SystemLabel,
    env: SystemLabel,
    proc: QuantumProcess<T>,
}

impl<T: Scalar> DecoherenceMechanism<T> {
    pub fn new(
        sys: SystemLabel,
        env: SystemLabel,
        proc: QuantumProcess<T>,
        tol: &Tolerance<T>,
    ) -> Result<Self> {
        if proc.input() != &sys || proc.output() != &sys.concat(&env) {
            return Err(Error::BadMechanism(format!(
                "mechanism must map {} to {}, got {} -> {}",
                sys,
                sys.concat(&env),
                proc.input(),
                proc.output()
            )));
        }
        let mech = Self { sys, env, proc };
        // Def-2 validation: the marginal on the system must be Def-1 valid.
        mech.induced(tol)?;
        Ok(mech)
    }

    pub fn system(&self) -> &SystemLabel {
        &self.sys
    }

    pub fn environment(&self) -> &SystemLabel {
        &self.env
    }

    pub fn process(&self) -> &QuantumProcess<T> {
        &self.proc
    }

    /// Discards the environment; the result must validate as a decoherence
    /// process.
    pub fn induced(&self, tol: &Tolerance<T>) -> Result<DecoherenceProcess<T>> {
        let n_sys = self.sys.factors().len();
        let keep: Vec<usize> = (0..n_sys).collect();
        let marginal = marginal_on(&self.proc, &keep)?;
        DecoherenceProcess::new(marginal, tol).map_err(|e| {
            Error::BadMechanism(format!("induced process failed validation: {e}"))
        })
    }
}

/// A finite group given by labeled elements and a Cayley table
/// (`table[a][b]` is the index of `a * b`).
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    pub elements: Vec<String>,
    pub table: Vec<Vec<usize>>,
}

impl FiniteGroup {
    pub fn new(elements: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = elements.len();
        if n == 0 {
            return Err(Error::BadRepresentation("empty group".into()));
        }
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(Error::BadRepresentation(
                "Cayley table shape does not match element count".into(),
            ));
        }
        if table
            .iter()
            .flatten()
            .any(|&v| v >= n)
        {
            return Err(Error::BadRepresentation("Cayley table index out of range".into()));
        }
        // Latin-square property (cancellation).
        for i in 0..n {
            let mut row_seen = vec![false; n];
            let mut col_seen = vec![false; n];
            for j in 0..n {
                if row_seen[table[i][j]] || col_seen[table[j][i]] {
                    return Err(Error::BadRepresentation(
                        "Cayley table is not a Latin square".into(),
                    ));
                }
                row_seen[table[i][j]] = true;
                col_seen[table[j][i]] = true;
            }
        }
        let group = Self { elements, table };
        if group.identity_index().is_none() {
            return Err(Error::BadRepresentation("group has no identity element".into()));
        }
        Ok(group)
    }

    /// Cyclic group of the given order.
    pub fn cyclic(order: usize) -> Self {
        let elements = (0..order).map(|k| format!("g{k}")).collect();
        let table = (0..order)
            .map(|a| (0..order).map(|b| (a + b) % order).collect())
            .collect();
        Self { elements, table }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn identity_index(&self) -> Option<usize> {
        (0..self.order()).find(|&e| {
            (0..self.order()).all(|a| self.table[e][a] == a && self.table[a][e] == a)
        })
    }
}

/// A unitary representation of a finite group, declared system by system.
/// Composite-system representations are independent data: they need not
/// factorize over the components.
#[derive(Debug, Clone)]
pub struct GroupRepresentation<T: Scalar> {
    pub group: FiniteGroup,
    unitaries: BTreeMap<SystemLabel, Vec<ComplexMatrix<T>>>,
}

impl<T: Scalar> GroupRepresentation<T> {
    pub fn new(group: FiniteGroup) -> Self {
        Self {
            group,
            unitaries: BTreeMap::new(),
        }
    }

    /// Declares the representation on one system, validating unitarity and
    /// channel-level closure (`R_a R_b = phase * R_{ab}`).
    pub fn declare(
        &mut self,
        sys: SystemLabel,
        unitaries: Vec<ComplexMatrix<T>>,
        tol: &Tolerance<T>,
    ) -> Result<()> {
        let n = self.group.order();
        if unitaries.len() != n {
            return Err(Error::BadRepresentation(format!(
                "expected {n} unitaries on {sys}, got {}",
                unitaries.len()
            )));
        }
        let d = sys.dim();
        for (k, u) in unitaries.iter().enumerate() {
            if u.rows() != d || u.cols() != d {
                return Err(Error::BadRepresentation(format!(
                    "unitary {k} on {sys} has wrong shape"
                )));
            }
            let residual = u.unitarity_residual();
            if residual > tol.eq_atol * T::one().max(T::from_count(d)) {
                return Err(Error::BadRepresentation(format!(
                    "element {} is not unitary on {sys} (residual {residual})",
                    self.group.elements[k]
                )));
            }
        }
        // Closure as channels: global phases cancel in the Choi comparison.
        for a in 0..n {
            for b in 0..n {
                let prod = unitaries[a].matmul(&unitaries[b]);
                let lhs = choi::choi_from_kraus(&[prod], d, d);
                let expect =
                    choi::choi_from_kraus(std::slice::from_ref(&unitaries[self.group.table[a][b]]), d, d);
                let scale = T::one().max(lhs.frobenius_norm());
                if lhs.distance(&expect) > tol.eq_atol * scale {
                    return Err(Error::BadRepresentation(format!(
                        "closure fails on {sys}: {} * {} != {} as channels",
                        self.group.elements[a],
                        self.group.elements[b],
                        self.group.elements[self.group.table[a][b]]
                    )));
                }
            }
        }
        self.unitaries.insert(sys, unitaries);
        Ok(())
    }

    pub fn declared_systems(&self) -> impl Iterator<Item = &SystemLabel> {
        self.unitaries.keys()
    }

    pub fn unitaries_for(&self, sys: &SystemLabel) -> Result<&[ComplexMatrix<T>]> {
        self.unitaries
            .get(sys)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingAssignment(format!("no representation declared on {sys}")))
    }

    pub fn has_system(&self, sys: &SystemLabel) -> bool {
        self.unitaries.contains_key(sys)
    }
}

/// How decoherence on composites relates to decoherence on components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositionRule {
    /// Composite decoherence is the parallel composite of the components.
    Product,
    /// Composite decoherence is declared per composite and satisfies the
    /// two global compatibility constraints.
    Global,
}

/// Per-system decoherence assignment plus the composition rule.
#[derive(Debug, Clone)]
pub struct DecoherenceFamily<T: Scalar> {
    assignments: BTreeMap<SystemLabel, DecoherenceProcess<T>>,
    mechanisms: BTreeMap<SystemLabel, DecoherenceMechanism<T>>,
    rule: CompositionRule,
}

impl<T: Scalar> DecoherenceFamily<T> {
    pub fn new(rule: CompositionRule) -> Self {
        Self {
            assignments: BTreeMap::new(),
            mechanisms: BTreeMap::new(),
            rule,
        }
    }

    pub fn rule(&self) -> CompositionRule {
        self.rule
    }

    pub fn assign(&mut self, dec: DecoherenceProcess<T>) {
        self.assignments.insert(dec.system().clone(), dec);
    }

    pub fn assign_mechanism(&mut self, mech: DecoherenceMechanism<T>) {
        self.mechanisms.insert(mech.system().clone(), mech);
    }

    pub fn assigned_systems(&self) -> impl Iterator<Item = &SystemLabel> {
        self.assignments.keys()
    }

    pub fn mechanism_for(&self, sys: &SystemLabel) -> Option<&DecoherenceMechanism<T>> {
        self.mechanisms.get(sys)
    }

    pub fn mechanisms(&self) -> impl Iterator<Item = &DecoherenceMechanism<T>> {
        self.mechanisms.values()
    }

    /// Whether `decoherence_for` can produce a process on this label.
    pub fn covers(&self, label: &SystemLabel) -> bool {
        self.decoherence_for(label).is_ok()
    }

    /// The decoherence process on a label.
    ///
    /// The trivial system always carries the identity. Under the product
    /// rule, unassigned composites are synthesized from their atomic
    /// factors; under the global rule every composite must be declared
    /// explicitly.
    pub fn decoherence_for(&self, label: &SystemLabel) -> Result<DecoherenceProcess<T>> {
        if label.is_trivial() {
            return Ok(DecoherenceProcess::trivial(label.clone()));
        }
        if let Some(dec) = self.assignments.get(label) {
            return Ok(dec.clone());
        }
        match self.rule {
            CompositionRule::Product => {
                let mut acc: Option<DecoherenceProcess<T>> = None;
                for factor in label.factors() {
                    let single = SystemLabel::single(factor.clone());
                    let dec = self.assignments.get(&single).ok_or_else(|| {
                        Error::MissingAssignment(format!(
                            "no decoherence assigned to {single} (needed for {label})"
                        ))
                    })?;
                    acc = Some(match acc {
                        None => dec.clone(),
                        Some(prev) => prev.parallel(dec)?,
                    });
                }
                acc.ok_or_else(|| Error::MissingAssignment("empty label".into()))
            }
            CompositionRule::Global => Err(Error::MissingAssignment(format!(
                "global-rule family has no declared decoherence on {label}"
            ))),
        }
    }

    /// Residual of the decohered-process condition
    /// `dec_out . f . dec_in = f`.
    pub fn decohered_residual(&self, f: &QuantumProcess<T>) -> Result<T> {
        let dec_in = self.decoherence_for(f.input())?;
        let dec_out = self.decoherence_for(f.output())?;
        let sandwiched = dec_in.process().then(f)?.then(dec_out.process())?;
        Ok(sandwiched.choi().distance(f.choi()))
    }

    /// Membership in the decohered subtheory.
    pub fn is_decohered(&self, f: &QuantumProcess<T>, tol: &Tolerance<T>) -> Result<bool> {
        let scale = T::one().max(f.choi().frobenius_norm());
        Ok(self.decohered_residual(f)? <= tol.eq_atol * scale)
    }

    /// Projects a process into the decohered subtheory by sandwiching.
    pub fn decohere(&self, f: &QuantumProcess<T>) -> Result<QuantumProcess<T>> {
        let dec_in = self.decoherence_for(f.input())?;
        let dec_out = self.decoherence_for(f.output())?;
        dec_in.process().then(f)?.then(dec_out.process())
    }

    /// Checks the composition-rule constraints on every assigned composite.
    ///
    /// Product rule: `dec_{LR} = dec_L (x) dec_R` for every split of every
    /// assigned composite whose halves are covered. Global rule, same
    /// splits: (i) the parallel composite `dec_L (x) dec_R` is a decohered
    /// process with respect to `dec_{LR}`, and (ii) composing the global
    /// decoherence with a local one on either half yields the pair of local
    /// decoherences.
    pub fn check_family_rule(&self, tol: &Tolerance<T>) -> Result<ValidationReport<T>> {
        let mut residuals = Vec::new();
        for (label, dec) in &self.assignments {
            let factors = label.factors();
            if factors.len() < 2 {
                continue;
            }
            for split in 1..factors.len() {
                let left = SystemLabel::new(factors[..split].to_vec());
                let right = SystemLabel::new(factors[split..].to_vec());
                let (dec_l, dec_r) = match (self.decoherence_for(&left), self.decoherence_for(&right)) {
                    (Ok(l), Ok(r)) => (l, r),
                    _ => continue,
                };
                let pair = dec_l.parallel(&dec_r)?;
                match self.rule {
                    CompositionRule::Product => {
                        residuals.push(ConstraintResidual {
                            constraint: format!("product: dec_{label} = dec_{left} (x) dec_{right}"),
                            residual: dec.process().choi().distance(pair.process().choi()),
                        });
                    }
                    CompositionRule::Global => {
                        let sandwich = dec
                            .process()
                            .then(pair.process())?
                            .then(dec.process())?;
                        residuals.push(ConstraintResidual {
                            constraint: format!(
                                "global-i: dec_{left} (x) dec_{right} decohered under dec_{label}"
                            ),
                            residual: sandwich.choi().distance(pair.process().choi()),
                        });
                        let left_local = dec_l
                            .process()
                            .parallel(&QuantumProcess::identity(right.clone()))?;
                        let right_local = QuantumProcess::identity(left.clone())
                            .parallel(dec_r.process())?;
                        let via_left = dec.process().then(&left_local)?;
                        let via_right = dec.process().then(&right_local)?;
                        residuals.push(ConstraintResidual {
                            constraint: format!(
                                "global-ii: (dec_{left} (x) id) . dec_{label} = dec_{left} (x) dec_{right}"
                            ),
                            residual: via_left.choi().distance(pair.process().choi()),
                        });
                        residuals.push(ConstraintResidual {
                            constraint: format!(
                                "global-ii: (id (x) dec_{right}) . dec_{label} = dec_{left} (x) dec_{right}"
                            ),
                            residual: via_right.choi().distance(pair.process().choi()),
                        });
                    }
                }
            }
        }
        Ok(ValidationReport::from_residuals(
            residuals,
            tol.eq_atol * T::from_f64_lossy(10.0),
        ))
    }

    /// Labels usable in closure scenarios: assigned labels, plus synthesized
    /// products of assigned atoms under the product rule.
    fn scenario_labels(&self) -> Vec<SystemLabel> {
        let mut labels: Vec<SystemLabel> = self
            .assignments
            .keys()
            .filter(|l| l.dim() <= CLOSURE_DIM_CAP)
            .cloned()
            .collect();
        if self.rule == CompositionRule::Product {
            let atoms: Vec<SystemLabel> = self
                .assignments
                .keys()
                .filter(|l| l.factors().len() == 1)
                .cloned()
                .collect();
            for a in &atoms {
                for b in &atoms {
                    let ab = a.concat(b);
                    if ab.dim() <= CLOSURE_DIM_CAP && !labels.contains(&ab) {
                        labels.push(ab);
                    }
                }
            }
        }
        labels
    }

    /// A random decohered process between covered labels: a random causal
    /// channel sandwiched between the assigned decoherences. Idempotence
    /// makes this sampling complete for the decohered set.
    pub fn random_decohered(
        &self,
        input: &SystemLabel,
        output: &SystemLabel,
        rng: &mut impl Rng,
    ) -> Result<QuantumProcess<T>> {
        let raw = sampling::random_causal_channel(input, output, 2, rng)?;
        self.decohere(&raw)
    }
}

/// Dephasing in an arbitrary orthonormal basis, given as a unitary whose
/// columns are the basis vectors.
pub fn make_dephasing<T: Scalar>(
    basis: &ComplexMatrix<T>,
    sys: SystemLabel,
    tol: &Tolerance<T>,
) -> Result<DecoherenceProcess<T>> {
    let d = sys.dim();
    if basis.rows() != d || basis.cols() != d {
        return Err(Error::BadBasis(format!(
            "basis on {sys} must be {d}x{d}"
        )));
    }
    let residual = basis.unitarity_residual();
    if residual > tol.eq_atol * T::one().max(T::from_count(d)) {
        return Err(Error::BadBasis(format!(
            "basis is not unitary (residual {residual})"
        )));
    }
    // Kraus projectors |u_i><u_i|.
    let kraus: Vec<ComplexMatrix<T>> = (0..d)
        .map(|i| {
            let mut p = ComplexMatrix::zeros(d, d);
            for r in 0..d {
                for c in 0..d {
                    p[(r, c)] = basis[(r, i)] * basis[(c, i)].conj();
                }
            }
            p
        })
        .collect();
    let proc = QuantumProcess::from_kraus(&kraus, sys.clone(), sys.clone(), tol)?;
    // The phase family U diag(w^{jk}) U^dagger averages to this dephasing.
    let averaging = (0..d)
        .map(|k| {
            let phases: Vec<Complex<T>> = (0..d)
                .map(|j| {
                    let angle =
                        T::from_f64_lossy(2.0) * T::PI() * T::from_count(j * k) / T::from_count(d);
                    Complex::new(angle.cos(), angle.sin())
                })
                .collect();
            let mut diag = ComplexMatrix::zeros(d, d);
            for (j, ph) in phases.iter().enumerate() {
                diag[(j, j)] = *ph;
            }
            basis.matmul(&diag).matmul(&basis.adjoint())
        })
        .collect();
    DecoherenceProcess::with_averaging(proc, Some(averaging), tol)
}

/// Dephasing in the computational basis.
pub fn make_computational_dephasing<T: Scalar>(
    sys: SystemLabel,
    tol: &Tolerance<T>,
) -> Result<DecoherenceProcess<T>> {
    make_dephasing(&ComplexMatrix::identity(sys.dim()), sys, tol)
}

/// Block dephasing (pinching) for a partition of the basis indices:
/// coherences between blocks are killed, coherences inside a block survive.
pub fn make_block_dephasing<T: Scalar>(
    blocks: &[Vec<usize>],
    sys: SystemLabel,
    tol: &Tolerance<T>,
) -> Result<DecoherenceProcess<T>> {
    let d = sys.dim();
    let mut seen = vec![false; d];
    for b in blocks {
        for &i in b {
            if i >= d || seen[i] {
                return Err(Error::BadPartition(format!(
                    "blocks must partition 0..{d}"
                )));
            }
            seen[i] = true;
        }
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::BadPartition(format!("blocks must cover 0..{d}")));
    }
    let kraus: Vec<ComplexMatrix<T>> = blocks
        .iter()
        .map(|b| {
            let mut p = ComplexMatrix::zeros(d, d);
            for &i in b {
                p[(i, i)] = Complex::one();
            }
            p
        })
        .collect();
    let proc = QuantumProcess::from_kraus(&kraus, sys.clone(), sys, tol)?;
    // Phase family sum_b w^{kb} Pi_b over k = 0..#blocks.
    let n = blocks.len();
    let averaging = (0..n)
        .map(|k| {
            let mut u = ComplexMatrix::zeros(d, d);
            for (b_idx, b) in blocks.iter().enumerate() {
                let angle =
                    T::from_f64_lossy(2.0) * T::PI() * T::from_count(k * b_idx) / T::from_count(n);
                let ph = Complex::new(angle.cos(), angle.sin());
                for &i in b {
                    u[(i, i)] = ph;
                }
            }
            u
        })
        .collect();
    DecoherenceProcess::with_averaging(proc, Some(averaging), tol)
}

/// The G-twirl over a declared representation:
/// `rho -> (1/|G|) sum_g R_g rho R_g^dagger`.
pub fn make_twirl<T: Scalar>(
    rep: &GroupRepresentation<T>,
    sys: &SystemLabel,
    tol: &Tolerance<T>,
) -> Result<DecoherenceProcess<T>> {
    let unitaries = rep.unitaries_for(sys).map_err(|_| {
        Error::BadRepresentation(format!("representation not declared on {sys}"))
    })?;
    let weight = T::one() / T::from_count(unitaries.len()).sqrt();
    let kraus: Vec<ComplexMatrix<T>> = unitaries.iter().map(|u| u.scale_re(weight)).collect();
    let proc = QuantumProcess::from_kraus(&kraus, sys.clone(), sys.clone(), tol)?;
    DecoherenceProcess::with_averaging(proc, Some(unitaries.to_vec()), tol)
}

/// Reference-frame decoherence mechanism:
/// `rho -> (1/|G|) sum_g (R_g rho R_g^dagger) (x) s_g`, with one pointer
/// state per group element. Discarding the environment recovers the twirl.
pub fn make_reference_frame_mechanism<T: Scalar>(
    rep: &GroupRepresentation<T>,
    pointer_states: &[State<T>],
    sys: &SystemLabel,
    env: &SystemLabel,
    tol: &Tolerance<T>,
) -> Result<DecoherenceMechanism<T>> {
    let unitaries = rep.unitaries_for(sys)?;
    if pointer_states.len() != unitaries.len() {
        return Err(Error::BadMechanism(format!(
            "need {} pointer states, got {}",
            unitaries.len(),
            pointer_states.len()
        )));
    }
    for s in pointer_states {
        if &s.label != env {
            return Err(Error::BadMechanism(format!(
                "pointer state lives on {}, expected {env}",
                s.label
            )));
        }
        if (s.rho.trace().re - T::one()).abs() > tol.eq_atol * T::from_f64_lossy(10.0) {
            return Err(Error::BadMechanism("pointer states must be normalised".into()));
        }
    }
    let d = sys.dim();
    let weight = T::one() / T::from_count(unitaries.len());
    let mut acc: Option<ComplexMatrix<T>> = None;
    for (u, s) in unitaries.iter().zip(pointer_states) {
        let conj = QuantumProcess::from_parts_unchecked(
            sys.clone(),
            sys.clone(),
            choi::choi_from_kraus(std::slice::from_ref(u), d, d),
        );
        let attach = QuantumProcess::identity(sys.clone())
            .parallel(&QuantumProcess::prepare(s))?;
        let branch = conj.then(&attach)?;
        let weighted = branch.choi().scale_re(weight);
        acc = Some(match acc {
            None => weighted,
            Some(prev) => &prev + &weighted,
        });
    }
    let choi = acc.expect("at least one group element");
    let proc = QuantumProcess::from_choi(sys.clone(), sys.concat(env), choi, tol)?;
    DecoherenceMechanism::new(sys.clone(), env.clone(), proc, tol)
}

/// Randomized closure suite for the decohered subtheory: draws decohered
/// processes, wires them sequentially, in parallel and partially, and
/// checks every composite is still decohered. Refuses to run when the
/// family itself violates its composition rule.
pub fn closure_property_test<T: Scalar>(
    fam: &DecoherenceFamily<T>,
    samples: usize,
    seed: u64,
    tol: &Tolerance<T>,
) -> Result<PropertyReport<T>> {
    let rule_report = fam.check_family_rule(tol)?;
    if !rule_report.valid {
        let worst = rule_report
            .worst_constraint()
            .map(|c| c.constraint.clone())
            .unwrap_or_else(|| "unknown".into());
        return Err(Error::Precondition(format!(
            "family violates its composition rule ({worst}, residual {})",
            rule_report.max_residual()
        )));
    }
    let labels = fam.scenario_labels();
    if labels.is_empty() {
        return Err(Error::Precondition("family assigns no usable systems".into()));
    }
    let atol = tol.eq_atol * T::from_f64_lossy(10.0);
    let mut rng = sampling::rng_from_seed(seed);
    let mut failures = Vec::new();
    let mut max_residual = T::zero();
    let mut cases = 0usize;

    let pick = |rng: &mut rand_chacha::ChaCha8Rng, pool: &[SystemLabel]| {
        pool[rng.gen_range(0..pool.len())].clone()
    };

    for case in 0..samples {
        match case % 3 {
            0 => {
                // Sequential wiring f then g.
                let l1 = pick(&mut rng, &labels);
                let l2 = pick(&mut rng, &labels);
                let l3 = pick(&mut rng, &labels);
                let f = fam.random_decohered(&l1, &l2, &mut rng)?;
                let g = fam.random_decohered(&l2, &l3, &mut rng)?;
                let composite = f.then(&g)?;
                let r = fam.decohered_residual(&composite)?;
                max_residual = max_residual.max(r);
                cases += 1;
                if r > atol {
                    failures.push(format!(
                        "sequential {l1}->{l2}->{l3} residual {r}"
                    ));
                }
            }
            1 => {
                // Parallel wiring, when the composite labels are covered.
                let pairs: Vec<(SystemLabel, SystemLabel)> = labels
                    .iter()
                    .flat_map(|a| labels.iter().map(move |b| (a.clone(), b.clone())))
                    .filter(|(a, b)| {
                        let ab = a.concat(b);
                        ab.dim() <= CLOSURE_DIM_CAP && fam.covers(&ab)
                    })
                    .collect();
                if pairs.is_empty() {
                    continue;
                }
                let (la, lb) = pairs[rng.gen_range(0..pairs.len())].clone();
                let f = fam.random_decohered(&la, &la, &mut rng)?;
                let g = fam.random_decohered(&lb, &lb, &mut rng)?;
                let composite = f.parallel(&g)?;
                let r = fam.decohered_residual(&composite)?;
                max_residual = max_residual.max(r);
                cases += 1;
                if r > atol {
                    failures.push(format!("parallel {la} (x) {lb} residual {r}"));
                }
            }
            _ => {
                // Partial wiring: f : L -> M with M = A ++ B covered, then a
                // decohered g on the B half only.
                let composites: Vec<(SystemLabel, SystemLabel, SystemLabel)> = labels
                    .iter()
                    .filter(|m| m.factors().len() >= 2)
                    .flat_map(|m| {
                        let factors = m.factors().to_vec();
                        (1..factors.len()).map(move |s| {
                            (
                                SystemLabel::new(factors[..s].to_vec()),
                                SystemLabel::new(factors[s..].to_vec()),
                                SystemLabel::new(factors.clone()),
                            )
                        })
                    })
                    .filter(|(a, b, _)| fam.covers(a) && fam.covers(b))
                    .collect();
                if composites.is_empty() {
                    continue;
                }
                let (la, lb, m) = composites[rng.gen_range(0..composites.len())].clone();
                let l_in = pick(&mut rng, &labels);
                let f = fam.random_decohered(&l_in, &m, &mut rng)?;
                let g = fam.random_decohered(&lb, &lb, &mut rng)?;
                let partial = QuantumProcess::identity(la.clone()).parallel(&g)?;
                let composite = f.then(&partial)?;
                let r = fam.decohered_residual(&composite)?;
                max_residual = max_residual.max(r);
                cases += 1;
                if r > atol {
                    failures.push(format!(
                        "partial wiring {l_in}->{m} with g on {lb} residual {r}"
                    ));
                }
            }
        }
    }
    Ok(PropertyReport {
        cases,
        failures,
        max_residual,
        seed,
    })
}

/// Convenience equality between decoherence processes.
pub fn decoherence_approx_eq<T: Scalar>(
    a: &DecoherenceProcess<T>,
    b: &DecoherenceProcess<T>,
    tol: &Tolerance<T>,
) -> Result<bool> {
    process_approx_eq(a.process(), b.process(), tol)
}
