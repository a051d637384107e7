//! The Benders loop.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::time::Instant;

use malachite_base::num::basic::traits::{One, Zero};

use super::master::{build_master, relaxed_exhaustive, relaxed_lp, round_point, MasterArtifact, Relaxed};
use super::{feasibility_cut, optimality_cut, partition, solve_sub, BendersError, Cut, CutKind, Partition};
use crate::binarize::PlanConfig;
use crate::lp::LpMethod;
use crate::milp::{MilpModel, Sense};
use crate::num::{abs, ratio, to_f64, Rational};
use crate::qubo::PenaltyPolicy;
use crate::solve::{solve_grouped, solve_sa, GroupedOptions, SaParams};

#[derive(Clone, Debug, PartialEq)]
pub enum MasterSolver {
    Exhaustive,
    Sa(SaParams),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BendersConfig {
    /// Relative gap `(ub − lb)/max(1, |ub|)` at which the loop stops.
    pub tol: Rational,
    pub max_iter: usize,
    pub master: MasterSolver,
    /// Bits of the uniform `η` grid.
    pub eta_bits: usize,
    /// Overrides the derived `[η_lo, η_hi]`.
    pub eta_bounds: Option<(Rational, Rational)>,
    pub lp_method: LpMethod,
    /// Annealing mode: iterations without an upper-bound improvement.
    pub patience: usize,
    pub penalty: PenaltyPolicy,
    pub budget: Option<usize>,
    /// Largest master enumerated exactly.
    pub master_cap: usize,
}

impl Default for BendersConfig {
    fn default() -> Self {
        BendersConfig {
            tol: ratio(1, 1_000_000),
            max_iter: 50,
            master: MasterSolver::Exhaustive,
            eta_bits: 10,
            eta_bounds: None,
            lp_method: LpMethod::Auto,
            patience: 10,
            penalty: PenaltyPolicy::Auto,
            budget: None,
            master_cap: 25,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BendersStatus {
    Converged,
    MaxIterations,
    Stalled,
    NoIncumbent,
    Infeasible,
}

impl BendersStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BendersStatus::Converged => "converged",
            BendersStatus::MaxIterations => "max-iterations",
            BendersStatus::Stalled => "stalled",
            BendersStatus::NoIncumbent => "no-incumbent",
            BendersStatus::Infeasible => "infeasible",
        }
    }
}

/// How the lower bound is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    /// Exact master with `η` continuous, enumerated.
    ExactMaster,
    LpRelaxation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationLog {
    pub iter: usize,
    pub lb: Rational,
    /// `f·y + φ(y)` at this iteration's point, when feasible.
    pub ub: Option<Rational>,
    pub best_ub: Option<Rational>,
    /// Objective of the decoded QUBO master solution.
    pub master_obj: Option<Rational>,
    pub sub_cost: Option<Rational>,
    pub cut_kind: Option<CutKind>,
    pub master_bits: usize,
    pub elapsed_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BendersReport {
    pub status: BendersStatus,
    /// Full model assignment of the best point found.
    pub incumbent: Option<Vec<Rational>>,
    pub iterations: Vec<IterationLog>,
    pub cuts: Vec<Cut>,
    pub eta_lo: Rational,
    pub eta_hi: Option<Rational>,
    pub eta_step: Option<Rational>,
    pub lb: Rational,
    pub best_ub: Option<Rational>,
    pub gap: Option<Rational>,
    pub lb_kind: BoundKind,
}

impl BendersReport {
    pub fn convergence_csv(&self) -> String {
        let opt = |v: &Option<Rational>| v.as_ref().map(|r| to_f64(r).to_string()).unwrap_or_default();
        let mut out = String::from("iter,lb,ub,best_ub,master_obj,sub_cost,cut_kind,master_bits,elapsed_s\n");
        for l in &self.iterations {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{:.6}",
                l.iter,
                to_f64(&l.lb),
                opt(&l.ub),
                opt(&l.best_ub),
                opt(&l.master_obj),
                opt(&l.sub_cost),
                l.cut_kind.map(|k| k.as_str()).unwrap_or(""),
                l.master_bits,
                l.elapsed_s
            );
        }
        out
    }
}

/// `(ub − lb)/max(1, |ub|)`.
pub fn relative_gap(lb: &Rational, ub: &Rational) -> Rational {
    let denom = abs(ub).max(Rational::ONE);
    (ub - lb) / denom
}

pub fn run(model: &MilpModel, config: &BendersConfig) -> Result<BendersReport, BendersError> {
    let p = partition(model)?;
    run_partition(&p, config)
}

struct State {
    cuts: Vec<Cut>,
    evaluated: HashSet<Vec<Rational>>,
    lb: Option<Rational>,
    best_ub: Option<Rational>,
    incumbent: Option<Vec<Rational>>,
    eta: Option<(Rational, Rational)>,
    eta_step: Option<Rational>,
}

impl State {
    fn valid(&self, p: &Partition, y: &[Rational]) -> bool {
        p.master_rows_hold(y) && self.cuts.iter().filter(|c| c.kind != CutKind::Optimality).all(|c| c.holds(y, None))
    }

    fn gap(&self) -> Option<Rational> {
        match (&self.lb, &self.best_ub) {
            (Some(lb), Some(ub)) => Some(relative_gap(lb, ub)),
            _ => None,
        }
    }
}

fn in_box(p: &Partition, y: &[Rational]) -> Vec<Rational> {
    y.iter().zip(&p.master_defs).map(|(v, d)| v.clone().max(d.lb.clone()).min(d.ub.clone())).collect()
}

/// A master row or non-optimality cut as `lhs (sense) rhs`, with the
/// coefficient of every master position.
struct RepairRow {
    dense: Vec<Rational>,
    sense: Sense,
    rhs: Rational,
}

impl RepairRow {
    fn violation(&self, lhs: &Rational) -> Rational {
        match self.sense {
            Sense::Le => (lhs - &self.rhs).max(Rational::ZERO),
            Sense::Ge => (&self.rhs - lhs).max(Rational::ZERO),
            Sense::Eq => abs(&(lhs - &self.rhs)),
        }
    }
}

/// Greedy unit moves that reduce the total violation of the master rows
/// and non-optimality cuts, cheapest master cost first among equal
/// reductions. `None` when no move helps.
fn repair(p: &Partition, cuts: &[Cut], mut y: Vec<Rational>) -> Option<Vec<Rational>> {
    let m = y.len();
    let dense = |coefs: &[(usize, Rational)]| {
        let mut d = vec![Rational::ZERO; m];
        for (k, a) in coefs {
            d[*k] += a;
        }
        d
    };
    let mut rows: Vec<RepairRow> =
        p.master_only.iter().map(|r| RepairRow { dense: dense(&r.coefs), sense: r.sense, rhs: r.rhs.clone() }).collect();
    rows.extend(
        cuts.iter()
            .filter(|c| c.kind != CutKind::Optimality)
            .map(|c| RepairRow { dense: dense(&c.coefs), sense: Sense::Ge, rhs: c.rhs.clone() }),
    );
    let mut lhs: Vec<Rational> =
        rows.iter().map(|r| r.dense.iter().zip(&y).map(|(a, v)| a * v).sum()).collect();
    let mut v: Rational = rows.iter().zip(&lhs).map(|(r, l)| r.violation(l)).sum();
    for _ in 0..4 * m + 4 {
        if v == 0 {
            return Some(y);
        }
        let mut best: Option<(Rational, Rational, usize, Rational)> = None;
        for k in 0..m {
            let d = &p.master_defs[k];
            for step in [Rational::ONE, -Rational::ONE] {
                let next = &y[k] + &step;
                if next < d.lb || next > d.ub {
                    continue;
                }
                let nv: Rational = rows
                    .iter()
                    .zip(&lhs)
                    .map(|(r, l)| if r.dense[k] == 0 { r.violation(l) } else { r.violation(&(l + &r.dense[k] * &step)) })
                    .sum();
                let cost = &p.f[k] * &step;
                if nv < v && best.as_ref().map_or(true, |(bv, bc, _, _)| (&nv, &cost) < (bv, bc)) {
                    best = Some((nv, cost, k, step.clone()));
                }
            }
        }
        let (nv, _, k, step) = best?;
        for (r, l) in rows.iter().zip(lhs.iter_mut()) {
            *l += &r.dense[k] * &step;
        }
        y[k] += step;
        v = nv;
    }
    (v == 0).then_some(y)
}

/// Lowest `f·y` over the master box.
fn master_floor(p: &Partition) -> Rational {
    p.f.iter()
        .zip(&p.master_defs)
        .map(|(f, d)| if *f < 0 { f * &d.ub } else { f * &d.lb })
        .sum()
}

pub fn run_partition(p: &Partition, config: &BendersConfig) -> Result<BendersReport, BendersError> {
    let start = Instant::now();
    let eta_lo = match &config.eta_bounds {
        Some((lo, hi)) => {
            if hi < lo {
                return Err(BendersError::EtaBounds { lo: lo.clone(), hi: hi.clone() });
            }
            lo.clone()
        }
        None => p.phi_floor(),
    };
    let lb_kind = match config.master {
        MasterSolver::Exhaustive => BoundKind::ExactMaster,
        MasterSolver::Sa(_) => BoundKind::LpRelaxation,
    };
    let plan = PlanConfig { budget: config.budget, ..PlanConfig::default() };
    let plan = PlanConfig { continuous_bits: config.eta_bits, ..plan };
    let mut s = State {
        cuts: Vec::new(),
        evaluated: HashSet::new(),
        lb: None,
        best_ub: None,
        incumbent: None,
        eta: None,
        eta_step: None,
    };
    let mut logs = Vec::new();
    let mut status = BendersStatus::MaxIterations;
    let mut since_improvement = 0usize;
    let bootstrap = p.bootstrap_point();

    for it in 1..=config.max_iter {
        let relaxed: Option<Relaxed> = match lb_kind {
            BoundKind::ExactMaster => relaxed_exhaustive(p, &s.cuts, &eta_lo, config.master_cap)?,
            BoundKind::LpRelaxation => relaxed_lp(p, &s.cuts, &eta_lo),
        };
        let Some(relaxed) = relaxed else {
            status = if s.incumbent.is_some() { BendersStatus::Converged } else { BendersStatus::Infeasible };
            break;
        };
        let lb = match s.lb.take() {
            Some(prev) if prev > relaxed.value => prev,
            _ => relaxed.value.clone(),
        };
        s.lb = Some(lb.clone());
        let mut log = IterationLog {
            iter: it,
            lb,
            ub: None,
            best_ub: s.best_ub.clone(),
            master_obj: None,
            sub_cost: None,
            cut_kind: None,
            master_bits: 0,
            elapsed_s: 0.0,
        };
        if s.gap().map_or(false, |g| g <= config.tol) {
            log.elapsed_s = start.elapsed().as_secs_f64();
            logs.push(log);
            status = BendersStatus::Converged;
            break;
        }

        // Candidate master point.
        let mut candidate;
        if it == 1 && s.valid(p, &bootstrap) {
            candidate = Some(bootstrap.clone());
        } else {
            let eta = s.eta.as_ref().map(|(lo, hi)| (lo, hi));
            let master = build_master(p, &s.cuts, eta, &plan, &config.penalty)?;
            log.master_bits = master.bits();
            if s.eta_step.is_none() {
                s.eta_step = master.eta_step.clone();
            }
            let (y, obj) = solve_master(&master, config, it, p.master_defs.len())?;
            log.master_obj = Some(obj);
            let y = match lb_kind {
                BoundKind::LpRelaxation if !s.valid(p, &y) => repair(p, &s.cuts, y),
                _ => Some(y),
            };
            candidate = y.filter(|y| s.valid(p, y) && !s.evaluated.contains(y));
        }
        if candidate.is_none() {
            let fallback = match lb_kind {
                BoundKind::ExactMaster => Some(relaxed.y.clone()),
                BoundKind::LpRelaxation => repair(p, &s.cuts, in_box(p, &round_point(&relaxed.y))),
            };
            candidate = fallback.filter(|y| s.valid(p, y) && !s.evaluated.contains(y));
        }
        let Some(y) = candidate else {
            log.elapsed_s = start.elapsed().as_secs_f64();
            logs.push(log);
            if lb_kind == BoundKind::ExactMaster {
                status = BendersStatus::Converged;
                break;
            }
            since_improvement += 1;
            if since_improvement >= config.patience {
                status = BendersStatus::Stalled;
                break;
            }
            continue;
        };

        let sub = solve_sub(p, &y, config.lp_method)?;
        s.evaluated.insert(y.clone());
        let improved = match &sub.cost {
            Some(phi) => {
                let ub = p.master_cost(&y) + phi + &p.constant;
                log.sub_cost = Some(phi.clone());
                log.ub = Some(ub.clone());
                let cut = optimality_cut(p, &sub, it);
                log.cut_kind = Some(cut.kind);
                s.cuts.push(cut);
                let better = s.best_ub.as_ref().map_or(true, |b| ub < *b);
                if better {
                    s.best_ub = Some(ub.clone());
                    s.incumbent = Some(p.assemble(&y, &sub.x));
                }
                if s.eta.is_none() {
                    let hi = match &config.eta_bounds {
                        Some((_, hi)) => hi.clone(),
                        None => (&ub - &p.constant - master_floor(p)).max(eta_lo.clone()),
                    };
                    s.eta = Some((eta_lo.clone(), hi));
                }
                better
            }
            None => {
                let cut = feasibility_cut(p, &sub, &y, it);
                log.cut_kind = Some(cut.kind);
                s.cuts.push(cut);
                false
            }
        };
        log.best_ub = s.best_ub.clone();
        log.elapsed_s = start.elapsed().as_secs_f64();
        logs.push(log);
        if s.gap().map_or(false, |g| g <= config.tol) {
            status = BendersStatus::Converged;
            break;
        }
        if improved {
            since_improvement = 0;
        } else if lb_kind == BoundKind::LpRelaxation && s.best_ub.is_some() {
            since_improvement += 1;
            if since_improvement >= config.patience {
                status = BendersStatus::Stalled;
                break;
            }
        }
    }
    if s.incumbent.is_none() && status != BendersStatus::Infeasible {
        status = BendersStatus::NoIncumbent;
    }
    if s.eta_step.is_none() {
        if let Some((lo, hi)) = &s.eta {
            s.eta_step = Some(crate::binarize::continuous_weights(lo, hi, config.eta_bits.max(1))[0].clone());
        }
    }
    let gap = s.gap();
    Ok(BendersReport {
        status,
        incumbent: s.incumbent,
        iterations: logs,
        cuts: s.cuts,
        eta_lo,
        eta_hi: s.eta.map(|(_, hi)| hi),
        eta_step: s.eta_step,
        lb: s.lb.unwrap_or(Rational::ZERO),
        best_ub: s.best_ub,
        gap,
        lb_kind,
    })
}

/// Decoded master point and its objective `f·y + η + constant`.
fn solve_master(
    master: &MasterArtifact,
    config: &BendersConfig,
    it: usize,
    masters: usize,
) -> Result<(Vec<Rational>, Rational), BendersError> {
    let result = match &config.master {
        MasterSolver::Exhaustive => {
            let opts = GroupedOptions { cap: config.master_cap, line_group: master.eta_group };
            solve_grouped(&master.artifact, &opts)?
        }
        MasterSolver::Sa(params) => {
            let params = SaParams { seed: params.seed.wrapping_add(it as u64), ..*params };
            solve_sa(master.artifact.assembled(), &params)?
        }
    };
    let values = master.artifact.plan.decode_vars(&result.best.0);
    let obj = master.model.objective_value(&values);
    let (y, _) = master.decode(&result.best.0, masters);
    Ok((y, obj))
}
