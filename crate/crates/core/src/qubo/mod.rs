//! Quadratic forms over bits and the MILP → QUBO compiler.

mod artifact;
mod compile;
pub mod poly;
pub mod special;

use std::collections::BTreeMap;

use malachite_base::num::basic::traits::Zero;
use thiserror::Error;

use crate::binarize::BinarizeError;
use crate::num::Rational;

pub use artifact::{read_artifact, write_artifact, ArtifactFile, BitLine};
pub use compile::{
    assemble, compile, compile_equality, compile_inequality, compile_objective, estimate_weight, CompileConfig,
    PenaltyKind, PenaltyPolicy, PenaltyTerm, QuboArtifact,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuboError {
    #[error("penalty has a degree-{degree} monomial over bits {bits:?}; only quadratic terms are allowed")]
    Degree { degree: usize, bits: Vec<usize> },
    #[error(transparent)]
    Binarize(#[from] BinarizeError),
    #[error("assignment has {got} bits, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("artifact line {line}: {message}")]
    Artifact { line: usize, message: String },
}

/// `constant + Σ diag[i]·b[i] + Σ_{i<j} offdiag[i,j]·b[i]·b[j]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QuadForm {
    pub n: usize,
    pub diag: BTreeMap<usize, Rational>,
    pub offdiag: BTreeMap<(usize, usize), Rational>,
    pub constant: Rational,
}

impl QuadForm {
    pub fn new(n: usize) -> Self {
        QuadForm { n, ..Default::default() }
    }

    pub fn add_diag(&mut self, i: usize, c: &Rational) {
        if *c == Rational::ZERO {
            return;
        }
        let e = self.diag.entry(i).or_insert(Rational::ZERO);
        *e += c;
        if *e == Rational::ZERO {
            self.diag.remove(&i);
        }
    }

    /// Adds `c·b[i]·b[j]`; `i == j` lands on the diagonal.
    pub fn add_pair(&mut self, i: usize, j: usize, c: &Rational) {
        if i == j {
            return self.add_diag(i, c);
        }
        if *c == Rational::ZERO {
            return;
        }
        let key = (i.min(j), i.max(j));
        let e = self.offdiag.entry(key).or_insert(Rational::ZERO);
        *e += c;
        if *e == Rational::ZERO {
            self.offdiag.remove(&key);
        }
    }

    /// `self += w·other`, visiting entries in index order.
    pub fn add_scaled(&mut self, other: &QuadForm, w: &Rational) {
        self.n = self.n.max(other.n);
        self.constant += &other.constant * w;
        for (i, c) in &other.diag {
            self.add_diag(*i, &(c * w));
        }
        for ((i, j), c) in &other.offdiag {
            self.add_pair(*i, *j, &(c * w));
        }
    }

    pub fn eval(&self, bits: &[bool]) -> Rational {
        debug_assert_eq!(bits.len(), self.n);
        let mut e = self.constant.clone();
        for (i, c) in &self.diag {
            if bits[*i] {
                e += c;
            }
        }
        for ((i, j), c) in &self.offdiag {
            if bits[*i] && bits[*j] {
                e += c;
            }
        }
        e
    }

    pub fn nnz(&self) -> usize {
        self.diag.len() + self.offdiag.len()
    }

    pub fn is_diagonal(&self) -> bool {
        self.offdiag.is_empty()
    }

    /// All nonzero entries as `(i, j, value)` with `i ≤ j`, lexicographic.
    pub fn entries(&self) -> Vec<(usize, usize, &Rational)> {
        let mut out: Vec<(usize, usize, &Rational)> = self
            .diag
            .iter()
            .map(|(i, c)| (*i, *i, c))
            .chain(self.offdiag.iter().map(|((i, j), c)| (*i, *j, c)))
            .collect();
        out.sort_by_key(|(i, j, _)| (*i, *j));
        out
    }

    /// Structural check: strict upper-triangular storage, indices below `n`,
    /// no stored zeros.
    pub fn is_well_formed(&self) -> bool {
        self.diag.iter().all(|(i, c)| *i < self.n && *c != Rational::ZERO)
            && self
                .offdiag
                .iter()
                .all(|((i, j), c)| i < j && *j < self.n && *c != Rational::ZERO)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    #[test]
    fn pair_storage_is_upper_triangular() {
        let mut q = QuadForm::new(3);
        q.add_pair(2, 0, &rat(4));
        q.add_pair(0, 2, &rat(-1));
        q.add_pair(1, 1, &rat(5));
        assert_eq!(q.offdiag.get(&(0, 2)), Some(&rat(3)));
        assert_eq!(q.diag.get(&1), Some(&rat(5)));
        assert!(q.is_well_formed());
        q.add_pair(0, 2, &rat(-3));
        assert!(q.offdiag.is_empty());
    }

    #[test]
    fn small_energy() {
        let mut q = QuadForm::new(2);
        q.add_diag(0, &rat(1));
        q.add_diag(1, &rat(3));
        q.add_pair(0, 1, &rat(-2));
        assert_eq!(q.eval(&[true, true]), rat(2));
        assert_eq!(q.eval(&[false, false]), rat(0));
    }
}
