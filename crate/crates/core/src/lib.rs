//! Deterministic MILP to QUBO compilation and a hybrid Benders solver.
//!
//! The pipeline runs `milp` (model IR) → `binarize` (bit encodings) →
//! `qubo` (penalty compilation) → `solve` (exhaustive or annealing QUBO
//! solvers). The `benders` module splits mixed models into a QUBO master
//! over the discrete variables and an exact LP subproblem (`lp`); `bench`
//! holds instance readers, generators and brute-force oracles.

pub mod num;
pub mod milp;
pub mod binarize;
pub mod qubo;
pub mod solve;
pub mod lp;
pub mod benders;
pub mod bench;
