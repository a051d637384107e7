//! Classical QUBO solvers: exhaustive search, simulated annealing and an
//! exact solver that minimizes slack bits in closed form.

mod exhaustive;
mod grouped;
mod sa;

use std::ops::{AddAssign, Neg, SubAssign};

use malachite_base::num::basic::traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::binarize::{EncodingPlan, Role};
use crate::num::Rational;
use crate::qubo::QuadForm;

pub use exhaustive::{solve_exhaustive, solve_exhaustive_capped, EXHAUSTIVE_CAP};
pub use grouped::{solve_grouped, GroupedOptions};
pub use sa::{solve_sa, trace_csv, SaParams, TracePoint};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitAssignment(pub Vec<bool>);

impl BitAssignment {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_string_bits(&self) -> String {
        self.0.iter().map(|b| if *b { '1' } else { '0' }).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exhaustive,
    Sa,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exhaustive => "exhaustive",
            Method::Sa => "sa",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverResult {
    pub best: BitAssignment,
    pub energy: Rational,
    pub method: Method,
    pub seed: Option<u64>,
    pub sweeps: Option<usize>,
    pub proven_optimal: bool,
    /// Per-sweep trace of the winning restart (annealing only).
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("{n} bits exceed the exhaustive cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("assignment has {got} bits, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("annealing needs at least one sweep and one restart")]
    BadParams,
}

pub fn energy(q: &QuadForm, a: &BitAssignment) -> Result<Rational, SolveError> {
    if a.len() != q.n {
        return Err(SolveError::LengthMismatch { expected: q.n, got: a.len() });
    }
    Ok(q.eval(&a.0))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    /// Variable values in model order.
    pub values: Vec<Rational>,
    /// `(constraint, slack value)` for every slack group.
    pub slacks: Vec<(String, Rational)>,
}

pub fn decode(plan: &EncodingPlan, a: &BitAssignment) -> Result<Decoded, SolveError> {
    if a.len() != plan.total_bits {
        return Err(SolveError::LengthMismatch { expected: plan.total_bits, got: a.len() });
    }
    Ok(Decoded {
        values: plan.decode_vars(&a.0),
        slacks: plan
            .groups
            .iter()
            .filter(|g| g.role == Role::Slack)
            .map(|g| (g.owner.clone(), g.decode(&a.0)))
            .collect(),
    })
}

/// Arithmetic needed by [`LocalFields`]; implemented by `Rational`, `i128`,
/// `Integer` and `f64`.
pub trait FieldValue:
    Clone + PartialOrd + for<'a> AddAssign<&'a Self> + for<'a> SubAssign<&'a Self> + Neg<Output = Self>
{
}

impl<T> FieldValue for T where
    T: Clone + PartialOrd + for<'a> AddAssign<&'a T> + for<'a> SubAssign<&'a T> + Neg<Output = T>
{
}

/// Incremental single-flip evaluation: `h[i] = diag[i] + Σ_{j≠i} Q[i,j]·b[j]`
/// so flipping bit `i` changes the energy by `±h[i]` in O(degree).
#[derive(Clone, Debug)]
pub struct LocalFields<T> {
    adj: Vec<Vec<(usize, T)>>,
    h: Vec<T>,
    bits: Vec<bool>,
    energy: T,
}

impl<T: FieldValue> LocalFields<T> {
    /// Starts from the all-zero assignment.
    pub fn new(n: usize, zero: T, constant: T, diag: &[(usize, T)], pairs: &[(usize, usize, T)]) -> Self {
        let mut adj: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        let mut h = vec![zero; n];
        for (i, d) in diag {
            h[*i] += d;
        }
        for (i, j, q) in pairs {
            adj[*i].push((*j, q.clone()));
            adj[*j].push((*i, q.clone()));
        }
        LocalFields { adj, h, bits: vec![false; n], energy: constant }
    }

    pub fn delta(&self, i: usize) -> T {
        if self.bits[i] {
            -self.h[i].clone()
        } else {
            self.h[i].clone()
        }
    }

    pub fn flip(&mut self, i: usize) {
        let d = self.delta(i);
        self.energy += &d;
        self.bits[i] = !self.bits[i];
        let on = self.bits[i];
        for (j, q) in &self.adj[i] {
            if on {
                self.h[*j] += q;
            } else {
                self.h[*j] -= q;
            }
        }
    }

    pub fn energy(&self) -> &T {
        &self.energy
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

impl LocalFields<Rational> {
    pub fn exact(q: &QuadForm) -> Self {
        let diag: Vec<(usize, Rational)> = q.diag.iter().map(|(i, c)| (*i, c.clone())).collect();
        let pairs: Vec<(usize, usize, Rational)> = q.offdiag.iter().map(|((i, j), c)| (*i, *j, c.clone())).collect();
        LocalFields::new(q.n, Rational::ZERO, q.constant.clone(), &diag, &pairs)
    }
}
