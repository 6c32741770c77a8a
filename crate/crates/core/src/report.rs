//! Report types shared by validators and property suites.

use crate::scalar::Scalar;

/// One named residual from a validation run.
#[derive(Debug, Clone)]
pub struct ConstraintResidual<T: Scalar> {
    pub constraint: String,
    pub residual: T,
}

/// Outcome of a structural validation: all residuals, plus the verdict at
/// the tolerance the caller supplied. Residual magnitudes are kept so that
/// tolerance tuning stays auditable.
#[derive(Debug, Clone)]
pub struct ValidationReport<T: Scalar> {
    pub residuals: Vec<ConstraintResidual<T>>,
    pub valid: bool,
}

impl<T: Scalar> ValidationReport<T> {
    pub fn from_residuals(residuals: Vec<ConstraintResidual<T>>, atol: T) -> Self {
        let valid = residuals.iter().all(|r| r.residual <= atol);
        Self { residuals, valid }
    }

    pub fn max_residual(&self) -> T {
        self.residuals
            .iter()
            .map(|r| r.residual)
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// The constraint with the largest residual, if any.
    pub fn worst_constraint(&self) -> Option<&ConstraintResidual<T>> {
        self.residuals.iter().max_by(|a, b| {
            a.residual
                .partial_cmp(&b.residual)
                .expect("finite residuals")
        })
    }

    /// Names of constraints exceeding the tolerance used at construction.
    pub fn failing(&self, atol: T) -> Vec<&str> {
        self.residuals
            .iter()
            .filter(|r| r.residual > atol)
            .map(|r| r.constraint.as_str())
            .collect()
    }
}

/// Outcome of a randomized property suite.
#[derive(Debug, Clone)]
pub struct PropertyReport<T: Scalar> {
    /// Number of composite cases checked.
    pub cases: usize,
    /// Cases whose residual exceeded the tolerance, with a description.
    pub failures: Vec<String>,
    /// Largest residual observed across all cases.
    pub max_residual: T,
    /// Seed the suite ran with.
    pub seed: u64,
}

impl<T: Scalar> PropertyReport<T> {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}
