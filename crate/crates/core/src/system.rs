//! System types: atomic systems and ordered composite labels.

use std::fmt;

/// One atomic system: a name, a Hilbert-space dimension and a flag marking
/// classical wires (whose states are computational-basis diagonal).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomicSystem {
    pub name: String,
    pub dim: usize,
    pub classical: bool,
}

impl AtomicSystem {
    pub fn quantum(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            dim,
            classical: false,
        }
    }

    pub fn classical(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            dim,
            classical: true,
        }
    }
}

/// An ordered list of atomic systems naming a wire type. The empty list is
/// the trivial "no system" system of dimension one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SystemLabel {
    factors: Vec<AtomicSystem>,
}

impl SystemLabel {
    pub fn new(factors: Vec<AtomicSystem>) -> Self {
        Self { factors }
    }

    /// The trivial system.
    pub fn trivial() -> Self {
        Self { factors: vec![] }
    }

    pub fn single(sys: AtomicSystem) -> Self {
        Self { factors: vec![sys] }
    }

    pub fn factors(&self) -> &[AtomicSystem] {
        &self.factors
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    /// Total dimension: product of factor dimensions, one when trivial.
    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product::<usize>().max(1)
    }

    /// Factor dimensions in order; `[1]` for the trivial system so that
    /// index bookkeeping never sees an empty factor list.
    pub fn factor_dims(&self) -> Vec<usize> {
        if self.factors.is_empty() {
            vec![1]
        } else {
            self.factors.iter().map(|f| f.dim).collect()
        }
    }

    /// Concatenation `self ++ other`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self { factors }
    }

    /// Positions of classical factors.
    pub fn classical_positions(&self) -> Vec<usize> {
        self.factors
            .iter()
            .enumerate()
            .filter(|(_, f)| f.classical)
            .map(|(i, _)| i)
            .collect()
    }

    /// Reorders factors; `perm[j]` is the original position of the new
    /// factor `j`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            factors: perm.iter().map(|&p| self.factors[p].clone()).collect(),
        }
    }
}

impl fmt::Display for SystemLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "I");
        }
        let names: Vec<&str> = self.factors.iter().map(|s| s.name.as_str()).collect();
        write!(f, "{}", names.join("*"))
    }
}

impl From<AtomicSystem> for SystemLabel {
    fn from(sys: AtomicSystem) -> Self {
        SystemLabel::single(sys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_label() {
        let t = SystemLabel::trivial();
        assert_eq!(t.dim(), 1);
        assert_eq!(t.factor_dims(), vec![1]);
        assert!(t.is_trivial());
        assert_eq!(t.to_string(), "I");
    }

    #[test]
    fn composite_dims_multiply() {
        let a = AtomicSystem::quantum("A", 2);
        let b = AtomicSystem::quantum("B", 3);
        let ab = SystemLabel::new(vec![a.clone(), b.clone()]);
        assert_eq!(ab.dim(), 6);
        assert_eq!(ab.to_string(), "A*B");
        let ba = SystemLabel::single(b).concat(&SystemLabel::single(a));
        assert_eq!(ba.to_string(), "B*A");
        assert_ne!(ab, ba);
    }

    #[test]
    fn classical_positions() {
        let label = SystemLabel::new(vec![
            AtomicSystem::quantum("A", 2),
            AtomicSystem::classical("n", 3),
        ]);
        assert_eq!(label.classical_positions(), vec![1]);
    }
}
