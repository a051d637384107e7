//! Brute-force reference optima.

use std::sync::Mutex;

use malachite_base::num::basic::traits::Zero;
use rayon::prelude::*;

use super::generate::KnapsackInstance;
use super::BenchError;
use crate::binarize::EncodingPlan;
use crate::lp::{solve_lp, LpProblem, LpStatus};
use crate::milp::{MilpModel, VarKind};
use crate::num::{bit_length, to_integer, Natural, Rational};

/// Default limit on enumerated discrete bits.
pub const ORACLE_CAP: usize = 20;
/// Hard limit even with pruning.
pub const ORACLE_MAX: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    /// Min-form objective.
    pub objective: Rational,
    pub values: Vec<Rational>,
    /// Discrete assignments whose remainder LP was solved.
    pub evaluated: u64,
    pub pruned: u64,
}

struct Discrete {
    var: usize,
    lb: Rational,
    count: u64,
}

/// Exact optimum by enumerating every discrete assignment and solving the
/// continuous remainder as an LP. An assignment is skipped when its
/// discrete cost plus the box bound on the continuous cost cannot beat the
/// incumbent.
pub fn oracle_direct(model: &MilpModel, cap: usize) -> Result<OracleResult, BenchError> {
    let mut discrete = Vec::new();
    let mut continuous = Vec::new();
    let mut bits = 0usize;
    for (i, v) in model.variables.iter().enumerate() {
        if v.kind.is_discrete() {
            let range = Natural::try_from(to_integer(&v.range())).expect("integral range");
            bits += if v.kind == VarKind::Binary { 1 } else { bit_length(&range) };
            let count = u64::try_from(&range).ok().and_then(|r| r.checked_add(1)).unwrap_or(u64::MAX);
            discrete.push(Discrete { var: i, lb: v.lb.clone(), count });
        } else {
            continuous.push(i);
        }
    }
    if bits > cap.min(ORACLE_MAX) {
        return Err(BenchError::OracleTooLarge { bits, cap: cap.min(ORACLE_MAX) });
    }
    let total: u64 = discrete.iter().map(|d| d.count).product();

    let mut col = vec![None; model.num_vars()];
    let mut base = LpProblem::new();
    for &i in &continuous {
        let v = &model.variables[i];
        col[i] = Some(base.add_column(v.name.clone(), model.objective.coef(crate::milp::VarId(i)).cloned().unwrap_or(Rational::ZERO), Some(v.range())));
    }
    let cont_lb: Rational = continuous
        .iter()
        .map(|&i| model.objective.coef(crate::milp::VarId(i)).map_or(Rational::ZERO, |c| c * &model.variables[i].lb))
        .sum();
    let cont_floor: Rational = &cont_lb
        + base.cost.iter().zip(&base.upper).filter(|(c, _)| **c < 0).map(|(c, u)| c * u.as_ref().unwrap()).sum::<Rational>();
    // Per constraint: LP row index or `None` for purely discrete rows.
    let mut lp_rows = Vec::with_capacity(model.constraints.len());
    for c in &model.constraints {
        let coefs: Vec<(usize, Rational)> =
            c.lhs.terms.iter().filter_map(|(v, a)| col[v.0].map(|j| (j, a.clone()))).collect();
        if coefs.is_empty() {
            lp_rows.push(None);
        } else {
            base.add_row(c.name.clone(), coefs, c.sense, Rational::ZERO);
            lp_rows.push(Some(base.rows.len() - 1));
        }
    }

    let best: Mutex<Option<(Rational, u64, Vec<Rational>)>> = Mutex::new(None);
    let counters = Mutex::new((0u64, 0u64));
    let chunk = 256u64;
    (0..total.div_ceil(chunk)).into_par_iter().for_each(|c| {
        let mut values = vec![Rational::ZERO; model.num_vars()];
        let (mut evaluated, mut pruned) = (0u64, 0u64);
        for idx in c * chunk..((c + 1) * chunk).min(total) {
            let mut rest = idx;
            for d in &discrete {
                values[d.var] = &d.lb + Rational::from(rest % d.count);
                rest /= d.count;
            }
            let disc_obj: Rational = model
                .objective
                .terms
                .iter()
                .filter(|(v, _)| col[v.0].is_none())
                .map(|(v, a)| a * &values[v.0])
                .sum::<Rational>()
                + &model.objective.constant;
            if let Some((b, _, _)) = best.lock().unwrap().as_ref() {
                if &disc_obj + &cont_floor > *b {
                    pruned += 1;
                    continue;
                }
            }
            let mut lp = None;
            let mut ok = true;
            for (c, row) in model.constraints.iter().zip(&lp_rows) {
                let fixed: Rational =
                    c.lhs.terms.iter().filter(|(v, _)| col[v.0].is_none()).map(|(v, a)| a * &values[v.0]).sum();
                match row {
                    None => {
                        if !c.sense.holds(&fixed, &c.rhs) {
                            ok = false;
                            break;
                        }
                    }
                    Some(r) => {
                        let lp: &mut LpProblem = lp.get_or_insert_with(|| base.clone());
                        let shift: Rational = lp.rows[*r].coefs.iter().map(|(j, a)| a * &model.variables[continuous[*j]].lb).sum();
                        lp.rows[*r].rhs = &c.rhs - fixed - shift;
                    }
                }
            }
            if !ok {
                continue;
            }
            let objective = if continuous.is_empty() {
                disc_obj
            } else {
                let lp = lp.unwrap_or_else(|| base.clone());
                evaluated += 1;
                let s = solve_lp(&lp);
                match s.status {
                    LpStatus::Optimal => {
                        for (j, &i) in continuous.iter().enumerate() {
                            values[i] = &s.x[j] + &model.variables[i].lb;
                        }
                        disc_obj + &s.objective + &cont_lb
                    }
                    LpStatus::Infeasible => continue,
                    LpStatus::Unbounded => panic!("continuous remainder is unbounded"),
                }
            };
            let mut guard = best.lock().unwrap();
            let better = match guard.as_ref() {
                None => true,
                Some((b, bi, _)) => objective < *b || (objective == *b && idx < *bi),
            };
            if better {
                *guard = Some((objective, idx, values.clone()));
            }
        }
        let mut k = counters.lock().unwrap();
        k.0 += evaluated;
        k.1 += pruned;
    });
    let (evaluated, pruned) = counters.into_inner().unwrap();
    match best.into_inner().unwrap() {
        Some((objective, _, values)) => Ok(OracleResult { objective, values, evaluated, pruned }),
        None => Err(BenchError::NoFeasibleAssignment),
    }
}

/// Best value by the textbook capacity DP.
pub fn knapsack_dp(inst: &KnapsackInstance) -> u64 {
    let cap = inst.capacity as usize;
    let mut best = vec![0u64; cap + 1];
    for (w, v) in inst.weights.iter().zip(&inst.values) {
        let w = *w as usize;
        for c in (w..=cap).rev() {
            best[c] = best[c].max(best[c - w] + v);
        }
    }
    best[cap]
}

/// All min-form optima over the values each variable's encoding can reach.
/// Returns the optimum and the optimal assignments in enumeration order.
pub fn oracle_grid(model: &MilpModel, plan: &EncodingPlan) -> Option<(Rational, Vec<Vec<Rational>>)> {
    let domains: Vec<Vec<Rational>> = (0..model.num_vars()).map(|i| plan.groups[plan.var_groups[i]].reachable()).collect();
    let total: usize = domains.iter().map(|d| d.len()).product();
    let mut best: Option<(Rational, Vec<Vec<Rational>>)> = None;
    let mut values: Vec<Rational> = domains.iter().map(|d| d[0].clone()).collect();
    for idx in 0..total {
        let mut rest = idx;
        for (v, d) in values.iter_mut().zip(&domains) {
            *v = d[rest % d.len()].clone();
            rest /= d.len();
        }
        if !model.is_feasible(&values) {
            continue;
        }
        let obj = model.objective_value(&values);
        match &mut best {
            Some((b, all)) if obj == *b => all.push(values.clone()),
            Some((b, _)) if obj > *b => {}
            _ => best = Some((obj, vec![values.clone()])),
        }
    }
    best
}
