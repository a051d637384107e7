//! Benders decomposition with a QUBO master and an exact LP subproblem.
//!
//! The model `min f·y + c·x` over rows `A x + B y {≤,=,≥} b` is split into
//! discrete master variables `y` and continuous subproblem variables `x`.
//! For a fixed `y` the subproblem `φ(y) = min c·x` is an LP; its duals give
//! optimality cuts `η ≥ α − β·y` and its Farkas rays give feasibility cuts
//! `g·y ≥ g₀`. The master `min f·y + η` over the cuts is compiled to a QUBO
//! with `η` on a uniform grid and solved exhaustively or by annealing.

mod driver;
mod master;

use malachite_base::num::basic::traits::Zero;
use thiserror::Error;

use crate::binarize::BinarizeError;
use crate::lp::{solve_lp_with, LpMethod, LpProblem, LpSolution, LpStatus};
use crate::milp::{MilpModel, PartitionHint, Sense, VarId, VarKind, Variable};
use crate::num::Rational;
use crate::qubo::QuboError;
use crate::solve::SolveError;

pub use driver::{run, run_partition, BendersConfig, BendersReport, BendersStatus, BoundKind, IterationLog, MasterSolver};
pub use master::{build_master, MasterArtifact};

#[derive(Debug, Error)]
pub enum BendersError {
    #[error("no subproblem; use monolithic path")]
    NoSubproblem,
    #[error("continuous variable {0:?} cannot be placed in the master")]
    ContinuousInMaster(String),
    #[error("discrete variable {0:?} cannot be placed in the subproblem")]
    DiscreteInSub(String),
    #[error("subproblem unbounded: model violates the boundedness assumption")]
    Unbounded,
    #[error("eta bounds are inverted: {hi} < {lo}")]
    EtaBounds { lo: Rational, hi: Rational },
    #[error("master has {bits} bits over the exhaustive limit {cap}")]
    MasterTooLarge { bits: usize, cap: usize },
    #[error("{0}")]
    Compile(#[from] QuboError),
    #[error("{0}")]
    Solve(#[from] SolveError),
    #[error("assignment had {got} master values, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

impl From<BinarizeError> for BendersError {
    fn from(e: BinarizeError) -> Self {
        BendersError::Compile(QuboError::Binarize(e))
    }
}

/// A constraint over master variables only, indexed by master position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MasterRow {
    pub name: String,
    pub coefs: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
    pub weight: Option<Rational>,
}

impl MasterRow {
    pub fn lhs(&self, y: &[Rational]) -> Rational {
        self.coefs.iter().map(|(k, a)| a * &y[*k]).sum()
    }

    pub fn holds(&self, y: &[Rational]) -> bool {
        self.sense.holds(&self.lhs(y), &self.rhs)
    }
}

/// A row `A_i x + B_i y {sense} b_i` touching at least one subproblem variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubRow {
    pub name: String,
    /// Coefficients on subproblem positions.
    pub a: Vec<(usize, Rational)>,
    /// Coefficients on master positions.
    pub b: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub master_vars: Vec<VarId>,
    pub sub_vars: Vec<VarId>,
    pub master_defs: Vec<Variable>,
    pub sub_defs: Vec<Variable>,
    pub master_only: Vec<MasterRow>,
    pub sub_rows: Vec<SubRow>,
    pub f: Vec<Rational>,
    pub c: Vec<Rational>,
    pub constant: Rational,
    pub num_model_vars: usize,
}

pub fn partition(model: &MilpModel) -> Result<Partition, BendersError> {
    let mut master_vars = Vec::new();
    let mut sub_vars = Vec::new();
    let mut pos = vec![(false, 0usize); model.num_vars()];
    for (i, v) in model.variables.iter().enumerate() {
        let to_master = match v.partition {
            Some(PartitionHint::Master) => {
                if v.kind == VarKind::Continuous {
                    return Err(BendersError::ContinuousInMaster(v.name.clone()));
                }
                true
            }
            Some(PartitionHint::Sub) => {
                if v.kind.is_discrete() {
                    return Err(BendersError::DiscreteInSub(v.name.clone()));
                }
                false
            }
            None => v.kind.is_discrete(),
        };
        if to_master {
            pos[i] = (true, master_vars.len());
            master_vars.push(VarId(i));
        } else {
            pos[i] = (false, sub_vars.len());
            sub_vars.push(VarId(i));
        }
    }
    if sub_vars.is_empty() {
        return Err(BendersError::NoSubproblem);
    }
    let mut f = vec![Rational::ZERO; master_vars.len()];
    let mut c = vec![Rational::ZERO; sub_vars.len()];
    for (v, coef) in &model.objective.terms {
        match pos[v.0] {
            (true, k) => f[k] = coef.clone(),
            (false, k) => c[k] = coef.clone(),
        }
    }
    let mut master_only = Vec::new();
    let mut sub_rows = Vec::new();
    for con in &model.constraints {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (v, coef) in &con.lhs.terms {
            match pos[v.0] {
                (true, k) => b.push((k, coef.clone())),
                (false, k) => a.push((k, coef.clone())),
            }
        }
        if a.is_empty() {
            master_only.push(MasterRow {
                name: con.name.clone(),
                coefs: b,
                sense: con.sense,
                rhs: con.rhs.clone(),
                weight: con.weight.clone(),
            });
        } else {
            sub_rows.push(SubRow { name: con.name.clone(), a, b, sense: con.sense, rhs: con.rhs.clone() });
        }
    }
    Ok(Partition {
        master_defs: master_vars.iter().map(|v| model.var(*v).clone()).collect(),
        sub_defs: sub_vars.iter().map(|v| model.var(*v).clone()).collect(),
        master_vars,
        sub_vars,
        master_only,
        sub_rows,
        f,
        c,
        constant: model.objective.constant.clone(),
        num_model_vars: model.num_vars(),
    })
}

impl Partition {
    fn dense(&self, pick: impl Fn(&SubRow) -> &Vec<(usize, Rational)>, width: usize) -> Vec<Vec<Rational>> {
        self.sub_rows
            .iter()
            .map(|r| {
                let mut row = vec![Rational::ZERO; width];
                for (k, v) in pick(r) {
                    row[*k] = v.clone();
                }
                row
            })
            .collect()
    }

    /// Subproblem coefficient matrix `A` (rows × sub vars).
    pub fn a_matrix(&self) -> Vec<Vec<Rational>> {
        self.dense(|r| &r.a, self.sub_vars.len())
    }

    /// Linking matrix `B` (rows × master vars).
    pub fn b_matrix(&self) -> Vec<Vec<Rational>> {
        self.dense(|r| &r.b, self.master_vars.len())
    }

    pub fn b_vector(&self) -> Vec<Rational> {
        self.sub_rows.iter().map(|r| r.rhs.clone()).collect()
    }

    /// `b_i − A_i·lb`: right-hand side after shifting `x` to `x − lb ≥ 0`.
    fn shifted_rhs(&self, r: &SubRow) -> Rational {
        &r.rhs - r.a.iter().map(|(k, v)| v * &self.sub_defs[*k].lb).sum::<Rational>()
    }

    /// Constant part of `φ`: `c·lb`.
    fn sub_constant(&self) -> Rational {
        self.c.iter().zip(&self.sub_defs).map(|(c, v)| c * &v.lb).sum()
    }

    /// The LP for fixed `y`, over shifted variables `x − lb`.
    pub fn sub_problem(&self, y: &[Rational]) -> LpProblem {
        let mut p = LpProblem::new();
        for (k, v) in self.sub_defs.iter().enumerate() {
            p.add_column(v.name.clone(), self.c[k].clone(), Some(v.range()));
        }
        for r in &self.sub_rows {
            let by: Rational = r.b.iter().map(|(k, v)| v * &y[*k]).sum();
            p.add_row(r.name.clone(), r.a.clone(), r.sense, self.shifted_rhs(r) - by);
        }
        p
    }

    /// Lower bound on `φ(y)` over all `y` from the column bounds alone.
    pub fn phi_floor(&self) -> Rational {
        self.sub_constant()
            + self
                .c
                .iter()
                .zip(&self.sub_defs)
                .filter(|(c, _)| **c < 0)
                .map(|(c, v)| c * v.range())
                .sum::<Rational>()
    }

    pub fn master_cost(&self, y: &[Rational]) -> Rational {
        self.f.iter().zip(y).map(|(f, v)| f * v).sum()
    }

    pub fn master_rows_hold(&self, y: &[Rational]) -> bool {
        self.master_only.iter().all(|r| r.holds(y))
    }

    /// Full model vector from master values and unshifted subproblem values.
    pub fn assemble(&self, y: &[Rational], x: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::ZERO; self.num_model_vars];
        for (k, v) in self.master_vars.iter().enumerate() {
            out[v.0] = y[k].clone();
        }
        for (k, v) in self.sub_vars.iter().enumerate() {
            out[v.0] = x[k].clone();
        }
        out
    }

    /// The all-upper-bounds master point (every facility open).
    pub fn bootstrap_point(&self) -> Vec<Rational> {
        self.master_defs.iter().map(|v| v.ub.clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubResult {
    pub problem: LpProblem,
    pub lp: LpSolution,
    /// `φ(y)` when feasible.
    pub cost: Option<Rational>,
    /// Unshifted subproblem values when feasible.
    pub x: Vec<Rational>,
}

pub fn solve_sub(p: &Partition, y: &[Rational], method: LpMethod) -> Result<SubResult, BendersError> {
    if y.len() != p.master_vars.len() {
        return Err(BendersError::LengthMismatch { expected: p.master_vars.len(), got: y.len() });
    }
    let problem = p.sub_problem(y);
    let lp = solve_lp_with(&problem, method);
    match lp.status {
        LpStatus::Unbounded => Err(BendersError::Unbounded),
        LpStatus::Infeasible => Ok(SubResult { problem, lp, cost: None, x: Vec::new() }),
        LpStatus::Optimal => {
            let cost = &lp.objective + p.sub_constant();
            let x = lp.x.iter().zip(&p.sub_defs).map(|(v, d)| v + &d.lb).collect();
            Ok(SubResult { problem, lp, cost: Some(cost), x })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CutKind {
    Optimality,
    Feasibility,
    NoGood,
}

impl CutKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CutKind::Optimality => "optimality",
            CutKind::Feasibility => "feasibility",
            CutKind::NoGood => "no-good",
        }
    }
}

/// Optimality: `η + Σ coefs·y ≥ rhs`. Feasibility and no-good: `Σ coefs·y ≥ rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    pub kind: CutKind,
    pub coefs: Vec<(usize, Rational)>,
    pub rhs: Rational,
    pub iteration: usize,
}

impl Cut {
    pub fn lhs(&self, y: &[Rational]) -> Rational {
        self.coefs.iter().map(|(k, a)| a * &y[*k]).sum()
    }

    /// Lower bound on `η` for optimality cuts.
    pub fn eta_bound(&self, y: &[Rational]) -> Rational {
        &self.rhs - self.lhs(y)
    }

    pub fn holds(&self, y: &[Rational], eta: Option<&Rational>) -> bool {
        match self.kind {
            CutKind::Optimality => eta.map_or(true, |e| *e >= self.eta_bound(y)),
            _ => self.lhs(y) >= self.rhs,
        }
    }
}

/// `Σ_i m_i·B_i` and `Σ_i m_i·(b_i − A_i·lb)` for per-row multipliers `m`.
fn project(p: &Partition, m: &[Rational]) -> (Vec<Rational>, Rational) {
    let mut coefs = vec![Rational::ZERO; p.master_vars.len()];
    let mut constant = Rational::ZERO;
    for (r, mi) in p.sub_rows.iter().zip(m) {
        if *mi == 0 {
            continue;
        }
        for (k, v) in &r.b {
            coefs[*k] += mi * v;
        }
        constant += mi * p.shifted_rhs(r);
    }
    (coefs, constant)
}

fn sparse(v: Vec<Rational>) -> Vec<(usize, Rational)> {
    v.into_iter().enumerate().filter(|(_, c)| *c != 0).collect()
}

/// `η ≥ c·lb + w·u + λ·(b − A·lb − B·y)` from optimal duals.
pub fn optimality_cut(p: &Partition, sub: &SubResult, iteration: usize) -> Cut {
    let (beta, lam_b) = project(p, &sub.lp.duals);
    let wu: Rational = sub
        .lp
        .bound_duals
        .iter()
        .zip(&sub.problem.upper)
        .filter_map(|(w, u)| u.as_ref().map(|u| w * u))
        .sum();
    Cut { kind: CutKind::Optimality, coefs: sparse(beta), rhs: p.sub_constant() + wu + lam_b, iteration }
}

/// `r·(b − A·lb − B·y) + v·u ≥ 0` from a Farkas ray; a no-good cut on `y`
/// when the ray does not involve `y` at all.
pub fn feasibility_cut(p: &Partition, sub: &SubResult, y: &[Rational], iteration: usize) -> Cut {
    let (rb, r_const) = project(p, &sub.lp.ray);
    let vu: Rational = sub
        .lp
        .bound_ray
        .iter()
        .zip(&sub.problem.upper)
        .filter_map(|(v, u)| u.as_ref().map(|u| v * u))
        .sum();
    if rb.iter().all(|c| *c == 0) && p.master_defs.iter().all(|d| d.kind == VarKind::Binary) {
        return no_good(y, iteration);
    }
    Cut {
        kind: CutKind::Feasibility,
        coefs: sparse(rb.into_iter().map(|c| -c).collect()),
        rhs: -(r_const + vu),
        iteration,
    }
}

/// `Σ_{y=0} y + Σ_{y=1} (1 − y) ≥ 1` over binary `y`.
pub fn no_good(y: &[Rational], iteration: usize) -> Cut {
    let mut coefs = Vec::with_capacity(y.len());
    let mut ones = 0i64;
    for (k, v) in y.iter().enumerate() {
        if *v == 0 {
            coefs.push((k, Rational::from(1)));
        } else {
            coefs.push((k, Rational::from(-1)));
            ones += 1;
        }
    }
    Cut { kind: CutKind::NoGood, coefs, rhs: Rational::from(1 - ones), iteration }
}
