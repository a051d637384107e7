//! Benchmark instances, reference oracles and the three-method harness.
//!
//! Each instance runs under the direct oracle (discrete enumeration plus
//! LP), the monolithic QUBO, and hybrid Benders. Reports carry objectives,
//! the gap against the oracle when it is known, bit counts and timings.

pub mod generate;
pub mod oracle;
pub mod orlib;

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::benders::{self, BendersConfig};
use crate::binarize::Role;
use crate::milp::{MilpModel, VarKind};
use crate::num::{abs, to_f64, Rational};
use crate::qubo::{compile, CompileConfig, QuboArtifact};
use crate::solve::{energy, solve_grouped, solve_sa, trace_csv, BitAssignment, GroupedOptions, SaParams, EXHAUSTIVE_CAP};

pub use generate::{generate, synthetic_cflp, tsp_mtz, Graph, KnapsackInstance, Problem};
pub use oracle::{knapsack_dp, oracle_direct, oracle_grid, OracleResult, ORACLE_CAP, ORACLE_MAX};
pub use orlib::{cflp_to_milp, parse_orlib_cap, write_orlib_cap, CflpInstance, OrlibError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("unsupported problem {0:?}")]
    UnknownProblem(String),
    #[error("size {size} outside 1..={max} for {problem}")]
    BadSize { problem: &'static str, size: usize, max: usize },
    #[error("{bits} discrete bits exceed the oracle limit of {cap}")]
    OracleTooLarge { bits: usize, cap: usize },
    #[error("no feasible assignment")]
    NoFeasibleAssignment,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BenchMethod {
    DirectOracle,
    MonolithicQubo,
    HybridBenders,
}

impl BenchMethod {
    pub const ALL: [BenchMethod; 3] = [BenchMethod::DirectOracle, BenchMethod::MonolithicQubo, BenchMethod::HybridBenders];

    pub fn as_str(self) -> &'static str {
        match self {
            BenchMethod::DirectOracle => "direct-oracle",
            BenchMethod::MonolithicQubo => "monolithic-qubo",
            BenchMethod::HybridBenders => "hybrid-benders",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchInstance {
    pub id: String,
    pub model: MilpModel,
    /// Facility and customer counts for facility-location instances.
    pub cflp: Option<(usize, usize)>,
}

impl BenchInstance {
    pub fn from_cflp(id: impl Into<String>, inst: &CflpInstance) -> Self {
        let id = id.into();
        BenchInstance { model: cflp_to_milp(inst, &id), id, cflp: Some((inst.m(), inst.n())) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MonolithicSolver {
    /// Exact when the decision bits fit the exhaustive cap, annealing otherwise.
    Auto(SaParams),
    Exhaustive,
    Sa(SaParams),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub compile: CompileConfig,
    pub monolithic: MonolithicSolver,
    pub benders: BendersConfig,
    pub oracle_cap: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            compile: CompileConfig::default(),
            monolithic: MonolithicSolver::Auto(SaParams::default()),
            benders: BendersConfig::default(),
            oracle_cap: ORACLE_CAP,
        }
    }
}

/// One (instance, method) run. `gap` is measured against the oracle when
/// it is known and is the method's own bound gap otherwise (Benders only).
#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub instance: String,
    pub method: BenchMethod,
    /// Min-form objective of a feasible solution.
    pub objective: Option<Rational>,
    /// Monolithic QUBO energy of the returned assignment.
    pub energy: Option<Rational>,
    pub oracle: Option<Rational>,
    pub gap: Option<Rational>,
    pub wall_s: f64,
    pub total_bits: usize,
    pub master_bits: usize,
    pub iters: usize,
    pub error: Option<String>,
    /// Benders convergence log.
    pub convergence_csv: Option<String>,
    /// Best-energy trace of annealing runs.
    pub trace_csv: Option<String>,
}

impl BenchReport {
    fn new(instance: &str, method: BenchMethod) -> Self {
        BenchReport {
            instance: instance.to_string(),
            method,
            objective: None,
            energy: None,
            oracle: None,
            gap: None,
            wall_s: 0.0,
            total_bits: 0,
            master_bits: 0,
            iters: 0,
            error: None,
            convergence_csv: None,
            trace_csv: None,
        }
    }
}

/// `(objective − oracle)/|oracle|`, zero when both are zero.
pub fn oracle_gap(objective: &Rational, oracle: &Rational) -> Option<Rational> {
    if *oracle == 0 {
        return (*objective == 0).then(|| Rational::from(0));
    }
    Some((objective - oracle) / abs(oracle))
}

pub fn reports_csv(reports: &[BenchReport]) -> String {
    let opt = |v: &Option<Rational>| v.as_ref().map(|r| to_f64(r).to_string()).unwrap_or_default();
    let mut out = String::from("instance,method,objective,oracle,gap,wall_s,total_bits,master_bits,iters\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6},{},{},{}",
            r.instance,
            r.method.as_str(),
            opt(&r.objective),
            opt(&r.oracle),
            opt(&r.gap),
            r.wall_s,
            r.total_bits,
            r.master_bits,
            r.iters
        );
    }
    out
}

/// Bit accounting of a facility-location monolithic artifact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SizeAudit {
    pub instance: String,
    /// Facilities.
    pub n: usize,
    /// Customers.
    pub m: usize,
    /// Bits per continuous assignment variable.
    pub k: usize,
    pub non_slack_bits: usize,
    pub slack_bits: usize,
}

impl SizeAudit {
    /// `N + N·M·K`.
    pub fn formula(&self) -> usize {
        self.n + self.n * self.m * self.k
    }
}

pub fn size_audit(instance: &str, dims: (usize, usize), artifact: &QuboArtifact) -> SizeAudit {
    let plan = &artifact.plan;
    SizeAudit {
        instance: instance.to_string(),
        n: dims.0,
        m: dims.1,
        k: plan.continuous_bits,
        non_slack_bits: plan.groups.iter().filter(|g| g.role != Role::Slack).map(|g| g.len()).sum(),
        slack_bits: plan.slack_bits(),
    }
}

pub fn size_audit_csv(rows: &[SizeAudit]) -> String {
    let mut out = String::from("instance,n,m,k,non_slack_bits,formula,slack_bits\n");
    for a in rows {
        let _ = writeln!(out, "{},{},{},{},{},{},{}", a.instance, a.n, a.m, a.k, a.non_slack_bits, a.formula(), a.slack_bits);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub reports: Vec<BenchReport>,
    pub audits: Vec<SizeAudit>,
}

/// Runs the monolithic path: compile, solve, decode.
pub fn run_monolithic(inst: &BenchInstance, config: &SuiteConfig) -> (BenchReport, Option<SizeAudit>) {
    let start = Instant::now();
    let mut r = BenchReport::new(&inst.id, BenchMethod::MonolithicQubo);
    let artifact = match compile(&inst.model, &config.compile) {
        Ok(a) => a,
        Err(e) => {
            r.error = Some(e.to_string());
            r.wall_s = start.elapsed().as_secs_f64();
            return (r, None);
        }
    };
    r.total_bits = artifact.n();
    let audit = inst.cflp.map(|d| size_audit(&inst.id, d, &artifact));
    let decision = artifact.decision_bits();
    let exact = match &config.monolithic {
        MonolithicSolver::Auto(p) => (decision <= EXHAUSTIVE_CAP).then_some(()).ok_or(*p),
        MonolithicSolver::Exhaustive => Ok(()),
        MonolithicSolver::Sa(p) => Err(*p),
    };
    let result = match exact {
        Ok(()) => solve_grouped(&artifact, &GroupedOptions::default()),
        Err(p) => solve_sa(artifact.assembled(), &p),
    };
    match result {
        Ok(res) => {
            r.iters = res.sweeps.unwrap_or(1);
            if !res.trace.is_empty() {
                r.trace_csv = Some(trace_csv(&res.trace));
            }
            r.energy = energy(artifact.assembled(), &BitAssignment(res.best.0.clone())).ok();
            let values = artifact.plan.decode_vars(&res.best.0);
            if inst.model.is_feasible(&values) {
                r.objective = Some(inst.model.objective_value(&values));
            } else {
                r.error = Some("decoded assignment is infeasible".into());
            }
        }
        Err(e) => r.error = Some(e.to_string()),
    }
    r.wall_s = start.elapsed().as_secs_f64();
    (r, audit)
}

pub fn run_benders(inst: &BenchInstance, config: &BendersConfig) -> BenchReport {
    let start = Instant::now();
    let mut r = BenchReport::new(&inst.id, BenchMethod::HybridBenders);
    r.total_bits = inst.model.variables.iter().filter(|v| v.kind != VarKind::Continuous).count();
    match benders::run(&inst.model, config) {
        Ok(rep) => {
            r.iters = rep.iterations.len();
            r.master_bits = rep.iterations.iter().map(|l| l.master_bits).max().unwrap_or(0);
            r.objective = rep.best_ub.clone();
            r.gap = rep.gap.clone();
            r.convergence_csv = Some(rep.convergence_csv());
            if rep.best_ub.is_none() {
                r.error = Some(format!("benders finished {}", rep.status.as_str()));
            }
        }
        Err(e) => r.error = Some(e.to_string()),
    }
    r.wall_s = start.elapsed().as_secs_f64();
    r
}

pub fn run_oracle(inst: &BenchInstance, cap: usize) -> BenchReport {
    let start = Instant::now();
    let mut r = BenchReport::new(&inst.id, BenchMethod::DirectOracle);
    r.total_bits = inst.model.variables.iter().filter(|v| v.kind != VarKind::Continuous).count();
    match oracle_direct(&inst.model, cap) {
        Ok(o) => {
            r.objective = Some(o.objective);
            r.iters = o.evaluated as usize;
        }
        Err(e) => r.error = Some(e.to_string()),
    }
    r.wall_s = start.elapsed().as_secs_f64();
    r
}

/// Runs every method on every instance. Instances run concurrently; the
/// reports come back in instance order, then method order.
pub fn run_suite(instances: &[BenchInstance], methods: &[BenchMethod], config: &SuiteConfig) -> SuiteResult {
    let per: Vec<(Vec<BenchReport>, Option<SizeAudit>)> = instances
        .par_iter()
        .map(|inst| {
            let mut reports = Vec::new();
            let mut audit = None;
            for m in methods {
                let r = match m {
                    BenchMethod::DirectOracle => run_oracle(inst, config.oracle_cap),
                    BenchMethod::MonolithicQubo => {
                        let (r, a) = run_monolithic(inst, config);
                        audit = a;
                        r
                    }
                    BenchMethod::HybridBenders => run_benders(inst, &config.benders),
                };
                reports.push(r);
            }
            let oracle = reports
                .iter()
                .find(|r| r.method == BenchMethod::DirectOracle)
                .and_then(|r| r.objective.clone());
            if let Some(o) = &oracle {
                for r in reports.iter_mut() {
                    r.oracle = Some(o.clone());
                    r.gap = r.objective.as_ref().and_then(|v| oracle_gap(v, o));
                }
            }
            (reports, audit)
        })
        .collect();
    let mut reports = Vec::new();
    let mut audits = Vec::new();
    for (r, a) in per {
        reports.extend(r);
        audits.extend(a);
    }
    SuiteResult { reports, audits }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    fn fixture() -> BenchInstance {
        BenchInstance::from_cflp("fixture", &parse_orlib_cap("2 2 10 100 10 100 5 1 2 5 2 1").unwrap())
    }

    #[test]
    fn all_methods_agree_on_fixture() {
        let res = run_suite(&[fixture()], &BenchMethod::ALL, &SuiteConfig::default());
        assert_eq!(res.reports.len(), 3);
        for r in &res.reports {
            assert_eq!(r.objective, Some(rat(103)), "{}", r.method.as_str());
            assert_eq!(r.gap, Some(rat(0)));
        }
        assert_eq!(res.audits.len(), 1);
        assert_eq!(res.audits[0].non_slack_bits, res.audits[0].formula());
    }

    #[test]
    fn csv_layout() {
        let res = run_suite(&[fixture()], &[BenchMethod::DirectOracle], &SuiteConfig::default());
        let csv = reports_csv(&res.reports);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("instance,method,objective,oracle,gap,wall_s,total_bits,master_bits,iters"));
        assert!(lines.next().unwrap().starts_with("fixture,direct-oracle,103,103,0,"));
    }

    #[test]
    fn errors_stay_in_the_report() {
        let mut b = MilpModel::builder("pure");
        let y = b.binary("y");
        b.minimize(vec![(y, rat(1))], rat(0));
        let inst = BenchInstance { id: "pure".into(), model: b.build(), cflp: None };
        let res = run_suite(&[inst], &BenchMethod::ALL, &SuiteConfig::default());
        let benders = &res.reports[2];
        assert_eq!(benders.error.as_deref(), Some("no subproblem; use monolithic path"));
        assert_eq!(res.reports[0].objective, Some(rat(0)));
        assert_eq!(res.reports[1].objective, Some(rat(0)));
    }

    #[test]
    fn oracle_gap_convention() {
        assert_eq!(oracle_gap(&rat(110), &rat(100)), Some(crate::num::ratio(1, 10)));
        assert_eq!(oracle_gap(&rat(-90), &rat(-100)), Some(crate::num::ratio(1, 10)));
        assert_eq!(oracle_gap(&rat(1), &rat(0)), None);
    }
}
