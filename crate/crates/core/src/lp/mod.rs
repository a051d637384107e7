//! Exact linear programming for Benders subproblems.
//!
//! Problems are `min c·x` over rows `a·x {≤,=,≥} b` with `0 ≤ x ≤ u`
//! (`u` optional per column). Every answer carries a certificate:
//!
//! * optimal: row duals `y` and bound duals `w` with `c − Aᵀy − w ≥ 0`,
//!   `y ≥ 0` on `≥` rows, `y ≤ 0` on `≤` rows, `w ≤ 0`, complementary
//!   slackness and `c·x = y·b + w·u`;
//! * infeasible: a Farkas ray `(r, v)` with `r ≤ 0` on `≥` rows, `r ≥ 0`
//!   on `≤` rows, `v ≥ 0`, `Aᵀr + v ≥ 0` and `r·b + v·u < 0`;
//! * unbounded: a feasible `x` and a direction `d ≥ 0` with `c·d < 0`.
//!
//! Single-column rows such as `x ≤ y̅` (after fixing `y`) are folded into
//! column bounds before solving; their duals are mapped back to the rows.

mod simplex;
mod transport;

use malachite_base::num::basic::traits::{One, Zero};

use crate::milp::Sense;
use crate::num::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpRow {
    pub name: String,
    pub coefs: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LpProblem {
    pub names: Vec<String>,
    pub cost: Vec<Rational>,
    pub upper: Vec<Option<Rational>>,
    pub rows: Vec<LpRow>,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n(&self) -> usize {
        self.cost.len()
    }

    pub fn add_column(&mut self, name: impl Into<String>, cost: Rational, upper: Option<Rational>) -> usize {
        self.names.push(name.into());
        self.cost.push(cost);
        self.upper.push(upper);
        self.cost.len() - 1
    }

    pub fn add_row(&mut self, name: impl Into<String>, coefs: Vec<(usize, Rational)>, sense: Sense, rhs: Rational) {
        self.rows.push(LpRow { name: name.into(), coefs, sense, rhs });
    }

    pub fn row_activity(&self, row: &LpRow, x: &[Rational]) -> Rational {
        row.coefs.iter().map(|(j, a)| a * &x[*j]).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl LpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum LpMethod {
    /// Transportation path when the problem has that shape, simplex otherwise.
    #[default]
    Auto,
    Simplex,
    Transport,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<Rational>,
    pub objective: Rational,
    /// Per-row duals (optimal only, else empty).
    pub duals: Vec<Rational>,
    /// Duals of the declared upper bounds (optimal only, else empty).
    pub bound_duals: Vec<Rational>,
    /// Per-row Farkas multipliers (infeasible only, else empty).
    pub ray: Vec<Rational>,
    /// Farkas multipliers on the declared upper bounds (infeasible only).
    pub bound_ray: Vec<Rational>,
    /// Improving direction (unbounded only).
    pub direction: Vec<Rational>,
    /// Which algorithm produced the answer.
    pub method: LpMethod,
    pub pivots: usize,
}

/// Where a column's effective upper bound came from.
#[derive(Clone, Debug, PartialEq, Eq)]
enum BoundSource {
    Declared,
    /// Row index and the column's coefficient in it.
    Row(usize, Rational),
}

/// Presolved problem handed to the core algorithms.
pub(crate) struct Core {
    pub n: usize,
    pub cost: Vec<Rational>,
    pub upper: Vec<Option<Rational>>,
    /// Remaining rows with their index in the source problem.
    pub rows: Vec<(usize, LpRow)>,
}

pub(crate) struct CoreSolution {
    pub status: LpStatus,
    pub x: Vec<Rational>,
    pub duals: Vec<Rational>,
    pub bound_duals: Vec<Rational>,
    pub ray: Vec<Rational>,
    pub bound_ray: Vec<Rational>,
    pub direction: Vec<Rational>,
    pub pivots: usize,
}

enum Presolved {
    Core(Core, Vec<Option<BoundSource>>),
    /// `(row multipliers, declared bound multipliers)` proving infeasibility.
    Infeasible(Vec<Rational>, Vec<Rational>),
}

fn presolve(p: &LpProblem) -> Presolved {
    let n = p.n();
    let m = p.rows.len();
    let mut upper = p.upper.clone();
    let mut source: Vec<Option<BoundSource>> = upper.iter().map(|u| u.as_ref().map(|_| BoundSource::Declared)).collect();
    let mut rows = Vec::new();
    for (i, row) in p.rows.iter().enumerate() {
        let nz: Vec<&(usize, Rational)> = row.coefs.iter().filter(|(_, a)| *a != 0).collect();
        if nz.is_empty() {
            if row.sense.holds(&Rational::ZERO, &row.rhs) {
                continue;
            }
            let mut ray = vec![Rational::ZERO; m];
            ray[i] = match row.sense {
                Sense::Le => Rational::ONE,
                Sense::Ge => -Rational::ONE,
                Sense::Eq if row.rhs > 0 => -Rational::ONE,
                Sense::Eq => Rational::ONE,
            };
            return Presolved::Infeasible(ray, vec![Rational::ZERO; n]);
        }
        if nz.len() == 1 {
            let (j, a) = nz[0];
            let is_upper = (row.sense == Sense::Le && *a > 0) || (row.sense == Sense::Ge && *a < 0);
            if is_upper {
                let u = &row.rhs / a;
                if upper[*j].as_ref().map_or(true, |cur| u < *cur) {
                    upper[*j] = Some(u);
                    source[*j] = Some(BoundSource::Row(i, a.clone()));
                }
                continue;
            }
        }
        rows.push((i, row.clone()));
    }
    for j in 0..n {
        if let Some(u) = &upper[j] {
            if *u < 0 {
                let mut ray = vec![Rational::ZERO; m];
                let mut bray = vec![Rational::ZERO; n];
                match source[j].as_ref().unwrap() {
                    BoundSource::Declared => bray[j] = Rational::ONE,
                    BoundSource::Row(i, a) => ray[*i] = Rational::ONE / a,
                }
                return Presolved::Infeasible(ray, bray);
            }
        }
    }
    Presolved::Core(Core { n, cost: p.cost.clone(), upper, rows }, source)
}

pub fn solve_lp(p: &LpProblem) -> LpSolution {
    solve_lp_with(p, LpMethod::Auto)
}

/// Solves with the requested algorithm. `Transport` falls back to the
/// simplex when the problem is not transportation-shaped.
pub fn solve_lp_with(p: &LpProblem, method: LpMethod) -> LpSolution {
    let n = p.n();
    let m = p.rows.len();
    let (core, source) = match presolve(p) {
        Presolved::Core(c, s) => (c, s),
        Presolved::Infeasible(ray, bound_ray) => {
            return LpSolution {
                status: LpStatus::Infeasible,
                x: vec![Rational::ZERO; n],
                objective: Rational::ZERO,
                duals: Vec::new(),
                bound_duals: Vec::new(),
                ray,
                bound_ray,
                direction: Vec::new(),
                method: LpMethod::Simplex,
                pivots: 0,
            }
        }
    };
    let (sol, used) = match method {
        LpMethod::Simplex => (simplex::solve(&core), LpMethod::Simplex),
        LpMethod::Auto | LpMethod::Transport => match transport::solve(&core) {
            Some(s) => (s, LpMethod::Transport),
            None => (simplex::solve(&core), LpMethod::Simplex),
        },
    };

    // Map core certificates back onto source rows and declared bounds.
    let lift = |row_vals: &[Rational], bound_vals: &[Rational]| -> (Vec<Rational>, Vec<Rational>) {
        let mut rows = vec![Rational::ZERO; m];
        let mut bounds = vec![Rational::ZERO; n];
        for ((i, _), v) in core.rows.iter().zip(row_vals) {
            rows[*i] = v.clone();
        }
        for (j, w) in bound_vals.iter().enumerate() {
            if *w == 0 {
                continue;
            }
            match source[j].as_ref() {
                Some(BoundSource::Declared) => bounds[j] = w.clone(),
                Some(BoundSource::Row(i, a)) => rows[*i] = w / a,
                None => unreachable!("bound multiplier on an unbounded column"),
            }
        }
        (rows, bounds)
    };
    let objective: Rational = p.cost.iter().zip(&sol.x).map(|(c, x)| c * x).sum();
    let mut out = LpSolution {
        status: sol.status,
        x: sol.x.clone(),
        objective,
        duals: Vec::new(),
        bound_duals: Vec::new(),
        ray: Vec::new(),
        bound_ray: Vec::new(),
        direction: sol.direction.clone(),
        method: used,
        pivots: sol.pivots,
    };
    match sol.status {
        LpStatus::Optimal => {
            let (d, b) = lift(&sol.duals, &sol.bound_duals);
            out.duals = d;
            out.bound_duals = b;
        }
        LpStatus::Infeasible => {
            let (r, b) = lift(&sol.ray, &sol.bound_ray);
            out.ray = r;
            out.bound_ray = b;
            out.objective = Rational::ZERO;
        }
        LpStatus::Unbounded => {}
    }
    debug_assert!(check_certificates(p, &out), "certificate check failed for {:?}", out.status);
    out
}

fn sign_ok(sense: Sense, v: &Rational, farkas: bool) -> bool {
    // Duals: ≥ rows nonnegative, ≤ rows nonpositive. Rays: the reverse.
    match (sense, farkas) {
        (Sense::Eq, _) => true,
        (Sense::Ge, false) | (Sense::Le, true) => *v >= 0,
        (Sense::Le, false) | (Sense::Ge, true) => *v <= 0,
    }
}

fn primal_feasible(p: &LpProblem, x: &[Rational]) -> bool {
    x.len() == p.n()
        && x.iter().zip(&p.upper).all(|(v, u)| *v >= 0 && u.as_ref().map_or(true, |u| v <= u))
        && p.rows.iter().all(|r| r.sense.holds(&p.row_activity(r, x), &r.rhs))
}

/// `Aᵀv` as a dense column vector.
fn transpose_mul(p: &LpProblem, v: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::ZERO; p.n()];
    for (row, vi) in p.rows.iter().zip(v) {
        if *vi == 0 {
            continue;
        }
        for (j, a) in &row.coefs {
            out[*j] += a * vi;
        }
    }
    out
}

/// Verifies the certificate attached to `s` exactly.
pub fn check_certificates(p: &LpProblem, s: &LpSolution) -> bool {
    let n = p.n();
    let m = p.rows.len();
    let bound = |j: usize| p.upper[j].as_ref();
    match s.status {
        LpStatus::Optimal => {
            if !primal_feasible(p, &s.x) || s.duals.len() != m || s.bound_duals.len() != n {
                return false;
            }
            if !p.rows.iter().zip(&s.duals).all(|(r, y)| sign_ok(r.sense, y, false)) {
                return false;
            }
            for (j, w) in s.bound_duals.iter().enumerate() {
                if *w > 0 || (*w != 0 && bound(j).is_none()) {
                    return false;
                }
                if *w != 0 && Some(&s.x[j]) != bound(j) {
                    return false;
                }
            }
            for (r, y) in p.rows.iter().zip(&s.duals) {
                if *y != 0 && p.row_activity(r, &s.x) != r.rhs {
                    return false;
                }
            }
            let aty = transpose_mul(p, &s.duals);
            for j in 0..n {
                let reduced = &p.cost[j] - &aty[j] - &s.bound_duals[j];
                if reduced < 0 || (reduced != 0 && s.x[j] != 0) {
                    return false;
                }
            }
            let primal: Rational = p.cost.iter().zip(&s.x).map(|(c, x)| c * x).sum();
            let dual: Rational = p.rows.iter().zip(&s.duals).map(|(r, y)| y * &r.rhs).sum::<Rational>()
                + (0..n).filter_map(|j| bound(j).map(|u| u * &s.bound_duals[j])).sum::<Rational>();
            primal == s.objective && primal == dual
        }
        LpStatus::Infeasible => {
            if s.ray.len() != m || s.bound_ray.len() != n {
                return false;
            }
            if !p.rows.iter().zip(&s.ray).all(|(r, v)| sign_ok(r.sense, v, true)) {
                return false;
            }
            for (j, v) in s.bound_ray.iter().enumerate() {
                if *v < 0 || (*v != 0 && bound(j).is_none()) {
                    return false;
                }
            }
            let atr = transpose_mul(p, &s.ray);
            if (0..n).any(|j| &atr[j] + &s.bound_ray[j] < 0) {
                return false;
            }
            let value: Rational = p.rows.iter().zip(&s.ray).map(|(r, v)| v * &r.rhs).sum::<Rational>()
                + (0..n).filter_map(|j| bound(j).map(|u| u * &s.bound_ray[j])).sum::<Rational>();
            value < 0
        }
        LpStatus::Unbounded => {
            let d = &s.direction;
            if !primal_feasible(p, &s.x) || d.len() != n {
                return false;
            }
            if d.iter().enumerate().any(|(j, v)| *v < 0 || (*v != 0 && bound(j).is_some())) {
                return false;
            }
            for r in &p.rows {
                let ad = p.row_activity(r, d);
                let ok = match r.sense {
                    Sense::Le => ad <= 0,
                    Sense::Ge => ad >= 0,
                    Sense::Eq => ad == 0,
                };
                if !ok {
                    return false;
                }
            }
            p.cost.iter().zip(d).map(|(c, v)| c * v).sum::<Rational>() < 0
        }
    }
}
