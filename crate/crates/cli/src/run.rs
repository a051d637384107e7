//! Command bodies, exit codes and the run manifest.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use serde::Serialize;
use serde_json::{json, Value};

use quboforge::benders::{self, BendersConfig, BendersError, BendersStatus, MasterSolver};
use quboforge::bench::{
    self, cflp_to_milp, parse_orlib_cap, reports_csv, size_audit_csv, write_orlib_cap, BenchInstance, BenchMethod,
    MonolithicSolver, Problem, SuiteConfig, ORACLE_CAP,
};
use quboforge::binarize::{BinarizeError, PlanConfig};
use quboforge::milp::{parse_model, serialize_model, MilpModel};
use quboforge::num::{parse_decimal, to_f64, Rational};
use quboforge::qubo::{compile, read_artifact, write_artifact, CompileConfig, PenaltyPolicy, QuboError};
use quboforge::solve::{solve_exhaustive, solve_sa, trace_csv, SaParams, SolveError, SolverResult};

use crate::{Command, EncodeArgs, LoopArgs, MethodArg, SolverArgs};

const MANIFEST: &str = "manifest.json";
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;
pub const EXIT_INFEASIBLE: u8 = 4;
pub const EXIT_SOLVER: u8 = 5;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub stage: &'static str,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.message)
    }
}

fn fail(code: u8, stage: &'static str, message: impl fmt::Display) -> Failure {
    Failure { code, stage, message: message.to_string() }
}

fn binarize_code(e: &BinarizeError) -> u8 {
    match e {
        BinarizeError::BudgetUnsatisfiable { .. } | BinarizeError::BudgetExceeded { .. } => EXIT_BUDGET,
        BinarizeError::Infeasible(_) => EXIT_INFEASIBLE,
        BinarizeError::ZeroPrecision => EXIT_USAGE,
    }
}

fn qubo_code(e: &QuboError) -> u8 {
    match e {
        QuboError::Binarize(b) => binarize_code(b),
        QuboError::Artifact { .. } => EXIT_PARSE,
        QuboError::Degree { .. } | QuboError::LengthMismatch { .. } => EXIT_SOLVER,
    }
}

fn benders_code(e: &BendersError) -> u8 {
    match e {
        BendersError::Compile(q) => qubo_code(q),
        _ => EXIT_SOLVER,
    }
}

/// Effective configuration after defaults and validation. Written verbatim
/// to `manifest.json`.
#[derive(Clone, Debug, Serialize)]
struct Effective {
    budget: Option<usize>,
    continuous_bits: usize,
    penalty: String,
    method: Option<&'static str>,
    seed: u64,
    sweeps: usize,
    restarts: usize,
    tol: Option<String>,
    max_iter: Option<usize>,
    eta_bits: Option<usize>,
    patience: Option<usize>,
    master_cap: Option<usize>,
    methods: Option<Vec<&'static str>>,
    oracle_cap: Option<usize>,
    problem: Option<&'static str>,
    size: Option<usize>,
}

impl Effective {
    fn new() -> Self {
        Effective {
            budget: None,
            continuous_bits: quboforge::binarize::DEFAULT_CONTINUOUS_BITS,
            penalty: "auto".into(),
            method: None,
            seed: 0,
            sweeps: SaParams::default().sweeps,
            restarts: SaParams::default().restarts,
            tol: None,
            max_iter: None,
            eta_bits: None,
            patience: None,
            master_cap: None,
            methods: None,
            oracle_cap: None,
            problem: None,
            size: None,
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    input: Option<String>,
    model: Option<String>,
    out: String,
    config: &'a Effective,
    status: &'static str,
    exit_code: u8,
    error: Option<String>,
    outputs: &'a [String],
}

struct Ctx {
    command: &'static str,
    input: Option<PathBuf>,
    model: Option<PathBuf>,
    out: PathBuf,
    config: Effective,
    outputs: Vec<String>,
}

impl Ctx {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.out.join(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| fail(EXIT_USAGE, "output", format!("{}: {e}", dir.display())))?;
        }
        fs::write(&path, contents).map_err(|e| fail(EXIT_USAGE, "output", format!("{}: {e}", path.display())))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn finish(mut self, result: Result<(), Failure>) -> Result<(), Failure> {
        let (status, exit_code, error) = match &result {
            Ok(()) => ("ok", 0, None),
            Err(f) => ("error", f.code, Some(f.to_string())),
        };
        let outputs = std::mem::take(&mut self.outputs);
        let manifest = Manifest {
            tool: "quboforge",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            input: self.input.as_ref().map(|p| p.display().to_string()),
            model: self.model.as_ref().map(|p| p.display().to_string()),
            out: self.out.display().to_string(),
            config: &self.config,
            status,
            exit_code,
            error,
            outputs: &outputs,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        let written = fs::create_dir_all(&self.out).and_then(|_| fs::write(self.out.join(MANIFEST), text));
        match (result, written) {
            (Err(f), _) => Err(f),
            (Ok(()), Err(e)) => Err(fail(EXIT_USAGE, "output", format!("manifest.json: {e}"))),
            (Ok(()), Ok(())) => Ok(()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(EXIT_USAGE, "input", format!("{}: {e}", path.display())))
}

fn is_cap(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "cap")
}

/// A model file: JSON, or an OR-Library facility file when it ends in `.cap`.
fn load_model(path: &Path) -> Result<(MilpModel, Option<(usize, usize)>), Failure> {
    let text = read(path)?;
    if is_cap(path) {
        let inst = parse_orlib_cap(&text).map_err(|e| fail(EXIT_PARSE, "parse", e))?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Ok((cflp_to_milp(&inst, &name), Some((inst.m(), inst.n()))))
    } else {
        Ok((parse_model(&text).map_err(|e| fail(EXIT_PARSE, "parse", e))?, None))
    }
}

fn rat_json(r: &Rational) -> Value {
    Value::String(r.to_string())
}

fn opt_json(r: &Option<Rational>) -> Value {
    r.as_ref().map_or(Value::Null, rat_json)
}

fn encode_config(a: &EncodeArgs, cfg: &mut Effective) -> Result<CompileConfig, Failure> {
    if a.continuous_bits == 0 {
        return Err(fail(EXIT_USAGE, "flags", "--continuous-bits must be at least 1"));
    }
    let penalty = if a.penalty == "auto" {
        PenaltyPolicy::Auto
    } else {
        match parse_decimal(&a.penalty) {
            Some(p) if p > 0 => PenaltyPolicy::Fixed(p),
            _ => return Err(fail(EXIT_USAGE, "flags", format!("--penalty must be `auto` or a positive number, got {:?}", a.penalty))),
        }
    };
    cfg.budget = a.budget;
    cfg.continuous_bits = a.continuous_bits;
    cfg.penalty = match &penalty {
        PenaltyPolicy::Auto => "auto".into(),
        PenaltyPolicy::Fixed(p) => p.to_string(),
    };
    Ok(CompileConfig { plan: PlanConfig { budget: a.budget, continuous_bits: a.continuous_bits }, penalty })
}

fn sa_params(a: &SolverArgs, cfg: &mut Effective) -> Result<SaParams, Failure> {
    if a.sweeps == 0 || a.restarts == 0 {
        return Err(fail(EXIT_USAGE, "flags", "--sweeps and --restarts must be at least 1"));
    }
    cfg.seed = a.seed;
    cfg.sweeps = a.sweeps;
    cfg.restarts = a.restarts;
    Ok(SaParams { seed: a.seed, sweeps: a.sweeps, restarts: a.restarts, ..SaParams::default() })
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Exhaustive => "exhaustive",
        MethodArg::Sa => "sa",
    }
}

fn benders_config(
    compile: &CompileConfig,
    solver: &SolverArgs,
    l: &LoopArgs,
    cfg: &mut Effective,
) -> Result<BendersConfig, Failure> {
    let params = sa_params(solver, cfg)?;
    let tol = match parse_decimal(&l.tol) {
        Some(t) if t >= 0 => t,
        _ => return Err(fail(EXIT_USAGE, "flags", format!("--tol must be a non-negative number, got {:?}", l.tol))),
    };
    if l.max_iter == 0 {
        return Err(fail(EXIT_USAGE, "flags", "--max-iter must be at least 1"));
    }
    if l.eta_bits == 0 || l.eta_bits > 30 {
        return Err(fail(EXIT_USAGE, "flags", "--eta-bits must be in 1..=30"));
    }
    let mut config = BendersConfig {
        tol,
        max_iter: l.max_iter,
        eta_bits: l.eta_bits,
        penalty: compile.penalty.clone(),
        budget: compile.plan.budget,
        ..BendersConfig::default()
    };
    config.master = match solver.method {
        Some(MethodArg::Sa) => MasterSolver::Sa(params),
        _ => MasterSolver::Exhaustive,
    };
    cfg.method = Some(method_name(solver.method.unwrap_or(MethodArg::Exhaustive)));
    cfg.tol = Some(config.tol.to_string());
    cfg.max_iter = Some(config.max_iter);
    cfg.eta_bits = Some(config.eta_bits);
    cfg.patience = Some(config.patience);
    cfg.master_cap = Some(config.master_cap);
    Ok(config)
}

pub fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Compile { model, encode, out } => {
            let mut ctx = Ctx::new("compile", Some(model.clone()), None, out.out);
            let r = cmd_compile(&mut ctx, &model, &encode);
            ctx.finish(r)
        }
        Command::Solve { artifact, model, solver, out } => {
            let mut ctx = Ctx::new("solve", Some(artifact.clone()), model.clone(), out.out);
            let r = cmd_solve(&mut ctx, &artifact, model.as_deref(), &solver);
            ctx.finish(r)
        }
        Command::Benders { model, encode, solver, loop_args, out } => {
            let mut ctx = Ctx::new("benders", Some(model.clone()), None, out.out);
            let r = cmd_benders(&mut ctx, &model, &encode, &solver, &loop_args);
            ctx.finish(r)
        }
        Command::Bench { dir, methods, oracle_cap, encode, solver, loop_args, out } => {
            let mut ctx = Ctx::new("bench", Some(dir.clone()), None, out.out);
            let r = cmd_bench(&mut ctx, &dir, methods.as_deref(), oracle_cap, &encode, &solver, &loop_args);
            ctx.finish(r)
        }
        Command::Generate { problem, size, seed, out } => {
            let mut ctx = Ctx::new("generate", None, None, out.out);
            let r = cmd_generate(&mut ctx, &problem, size, seed);
            ctx.finish(r)
        }
    }
}

impl Ctx {
    fn new(command: &'static str, input: Option<PathBuf>, model: Option<PathBuf>, out: PathBuf) -> Self {
        Ctx { command, input, model, out, config: Effective::new(), outputs: Vec::new() }
    }
}

fn cmd_compile(ctx: &mut Ctx, path: &Path, encode: &EncodeArgs) -> Result<(), Failure> {
    let config = encode_config(encode, &mut ctx.config)?;
    let (model, _) = load_model(path)?;
    info!("compiling {} ({} variables, {} constraints)", model.name, model.num_vars(), model.constraints.len());
    let artifact = compile(&model, &config).map_err(|e| fail(qubo_code(&e), "compile", e))?;
    ctx.write("artifact.qubo", &write_artifact(&artifact))?;
    let plan = &artifact.plan;
    let groups: Vec<Value> = plan
        .groups
        .iter()
        .map(|g| {
            json!({
                "owner": g.owner,
                "role": g.role.as_str(),
                "bits": g.len(),
                "first_bit": g.first_bit,
                "weights": g.weights.iter().map(rat_json).collect::<Vec<_>>(),
                "offset": rat_json(&g.offset),
            })
        })
        .collect();
    let penalties: Vec<Value> = artifact
        .penalties
        .iter()
        .map(|p| json!({"constraint": p.constraint, "kind": format!("{:?}", p.kind).to_lowercase(), "weight": rat_json(&p.weight)}))
        .collect();
    let summary = json!({
        "model": model.name,
        "total_bits": plan.total_bits,
        "variable_bits": plan.variable_bits(),
        "slack_bits": plan.slack_bits(),
        "decision_bits": artifact.decision_bits(),
        "nnz": artifact.assembled().nnz(),
        "default_weight": rat_json(&artifact.default_weight),
        "groups": groups,
        "penalties": penalties,
    });
    ctx.write("plan.json", &(serde_json::to_string_pretty(&summary).unwrap() + "\n"))?;
    println!(
        "{}: {} bits ({} variable, {} slack), {} penalties",
        model.name,
        plan.total_bits,
        plan.variable_bits(),
        plan.slack_bits(),
        artifact.penalties.len()
    );
    Ok(())
}

fn cmd_solve(ctx: &mut Ctx, path: &Path, model_path: Option<&Path>, solver: &SolverArgs) -> Result<(), Failure> {
    let params = sa_params(solver, &mut ctx.config)?;
    let method = solver.method.unwrap_or(MethodArg::Exhaustive);
    ctx.config.method = Some(method_name(method));
    let file = read_artifact(&read(path)?).map_err(|e| fail(qubo_code(&e), "parse", e))?;
    let model = model_path.map(load_model).transpose()?.map(|(m, _)| m);
    info!("solving {} bits with {}", file.n(), method_name(method));
    let result: SolverResult = match method {
        MethodArg::Exhaustive => solve_exhaustive(&file.form),
        MethodArg::Sa => solve_sa(&file.form, &params),
    }
    .map_err(|e: SolveError| fail(EXIT_SOLVER, "solve", e))?;
    let (vars, slacks) = file.decode(&result.best.0).map_err(|e| fail(EXIT_SOLVER, "decode", e))?;
    let mut solution = json!({
        "method": result.method.as_str(),
        "energy": rat_json(&result.energy),
        "energy_f64": to_f64(&result.energy),
        "proven_optimal": result.proven_optimal,
        "seed": result.seed,
        "sweeps": result.sweeps,
        "bits": result.best.to_string_bits(),
        "variables": vars.iter().map(|(n, v)| (n.clone(), rat_json(v))).collect::<serde_json::Map<_, _>>(),
        "slacks": slacks.iter().map(|(n, v)| (n.clone(), rat_json(v))).collect::<serde_json::Map<_, _>>(),
    });
    let mut infeasible = None;
    if let Some(model) = &model {
        let named: BTreeMap<&str, &Rational> = vars.iter().map(|(n, v)| (n.as_str(), v)).collect();
        let values = model
            .variables
            .iter()
            .map(|v| named.get(v.name.as_str()).map(|r| (*r).clone()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| fail(EXIT_USAGE, "decode", "artifact does not match the model's variables"))?;
        let violated: Vec<&str> = model.violated(&values);
        solution["feasible"] = Value::Bool(violated.is_empty());
        solution["violated"] = json!(violated);
        if violated.is_empty() {
            solution["objective"] = rat_json(&model.source_objective_value(&values));
        } else {
            infeasible = Some(violated.len());
        }
    }
    ctx.write("solution.json", &(serde_json::to_string_pretty(&solution).unwrap() + "\n"))?;
    if !result.trace.is_empty() {
        ctx.write("trace.csv", &trace_csv(&result.trace))?;
    }
    println!("energy {} ({}){}", result.energy, result.method.as_str(), if result.proven_optimal { ", optimal" } else { "" });
    match infeasible {
        Some(k) => Err(fail(EXIT_INFEASIBLE, "check", format!("decoded assignment violates {k} constraints"))),
        None => Ok(()),
    }
}

fn cmd_benders(
    ctx: &mut Ctx,
    path: &Path,
    encode: &EncodeArgs,
    solver: &SolverArgs,
    l: &LoopArgs,
) -> Result<(), Failure> {
    let compile = encode_config(encode, &mut ctx.config)?;
    let config = benders_config(&compile, solver, l, &mut ctx.config)?;
    let (model, _) = load_model(path)?;
    info!("benders on {} with {} master", model.name, ctx.config.method.unwrap_or_default());
    let rep = benders::run(&model, &config).map_err(|e| fail(benders_code(&e), "benders", e))?;
    ctx.write("convergence.csv", &rep.convergence_csv())?;
    let incumbent = rep.incumbent.as_ref().map(|x| {
        model.variables.iter().zip(x).map(|(v, r)| (v.name.clone(), rat_json(r))).collect::<serde_json::Map<_, _>>()
    });
    let report = json!({
        "model": model.name,
        "status": rep.status.as_str(),
        "iterations": rep.iterations.len(),
        "cuts": rep.cuts.len(),
        "lb": rat_json(&rep.lb),
        "lb_kind": format!("{:?}", rep.lb_kind),
        "best_ub": opt_json(&rep.best_ub),
        "gap": opt_json(&rep.gap),
        "objective": rep.incumbent.as_ref().map_or(Value::Null, |x| rat_json(&model.source_objective_value(x))),
        "eta_lo": rat_json(&rep.eta_lo),
        "eta_hi": opt_json(&rep.eta_hi),
        "eta_step": opt_json(&rep.eta_step),
        "master_bits": rep.iterations.iter().map(|l| l.master_bits).max().unwrap_or(0),
        "incumbent": incumbent,
    });
    ctx.write("report.json", &(serde_json::to_string_pretty(&report).unwrap() + "\n"))?;
    println!(
        "{}: {} after {} iterations, lb {} ub {} gap {}",
        model.name,
        rep.status.as_str(),
        rep.iterations.len(),
        to_f64(&rep.lb),
        rep.best_ub.as_ref().map_or("none".into(), |u| to_f64(u).to_string()),
        rep.gap.as_ref().map_or("none".into(), |g| to_f64(g).to_string()),
    );
    match rep.status {
        BendersStatus::Infeasible => Err(fail(EXIT_INFEASIBLE, "benders", "model is infeasible")),
        BendersStatus::NoIncumbent => Err(fail(EXIT_SOLVER, "benders", "no feasible point found")),
        _ => Ok(()),
    }
}

fn parse_methods(names: Option<&[String]>) -> Result<Vec<BenchMethod>, Failure> {
    let Some(names) = names else {
        return Ok(BenchMethod::ALL.to_vec());
    };
    names
        .iter()
        .map(|n| {
            BenchMethod::ALL
                .into_iter()
                .find(|m| m.as_str() == n.trim())
                .ok_or_else(|| fail(EXIT_USAGE, "flags", format!("unknown bench method {n:?}")))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    ctx: &mut Ctx,
    dir: &Path,
    methods: Option<&[String]>,
    oracle_cap: Option<usize>,
    encode: &EncodeArgs,
    solver: &SolverArgs,
    l: &LoopArgs,
) -> Result<(), Failure> {
    let compile = encode_config(encode, &mut ctx.config)?;
    let benders = benders_config(&compile, solver, l, &mut ctx.config)?;
    let params = sa_params(solver, &mut ctx.config)?;
    let methods = parse_methods(methods)?;
    let oracle_cap = oracle_cap.unwrap_or(ORACLE_CAP);
    ctx.config.method = solver.method.map(method_name);
    ctx.config.methods = Some(methods.iter().map(|m| m.as_str()).collect());
    ctx.config.oracle_cap = Some(oracle_cap);
    let monolithic = match solver.method {
        None => MonolithicSolver::Auto(params),
        Some(MethodArg::Exhaustive) => MonolithicSolver::Exhaustive,
        Some(MethodArg::Sa) => MonolithicSolver::Sa(params),
    };
    let config = SuiteConfig { compile, monolithic, benders, oracle_cap };

    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| fail(EXIT_USAGE, "input", format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && (is_cap(p) || p.extension().is_some_and(|e| e == "json")))
        // A previous run's manifest may share the directory.
        .filter(|p| p.file_name().is_some_and(|n| n != MANIFEST))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(fail(EXIT_USAGE, "input", format!("no .json or .cap files in {}", dir.display())));
    }
    let mut instances = Vec::with_capacity(paths.len());
    for p in &paths {
        let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let (model, cflp) = load_model(p).map_err(|f| Failure { message: format!("{}: {}", p.display(), f.message), ..f })?;
        instances.push(BenchInstance { id, model, cflp });
    }
    info!("benchmarking {} instances", instances.len());
    let suite = bench::run_suite(&instances, &methods, &config);
    ctx.write("suite.csv", &reports_csv(&suite.reports))?;
    if !suite.audits.is_empty() {
        ctx.write("size_audit.csv", &size_audit_csv(&suite.audits))?;
    }
    for r in &suite.reports {
        if let Some(csv) = &r.convergence_csv {
            ctx.write(&format!("convergence/{}.csv", r.instance), csv)?;
        }
        if let Some(csv) = &r.trace_csv {
            ctx.write(&format!("traces/{}.csv", r.instance), csv)?;
        }
        if let Some(e) = &r.error {
            eprintln!("{} {}: {e}", r.instance, r.method.as_str());
        }
    }
    print!("{}", reports_csv(&suite.reports));
    Ok(())
}

fn cmd_generate(ctx: &mut Ctx, problem: &str, size: usize, seed: u64) -> Result<(), Failure> {
    let p: Problem = problem.parse().map_err(|e| fail(EXIT_USAGE, "flags", e))?;
    ctx.config.seed = seed;
    ctx.config.problem = Some(p.as_str());
    ctx.config.size = Some(size);
    let name = format!("{}_{size}_{seed}", p.as_str());
    if p == Problem::Cflp {
        if size == 0 || size > p.max_size() {
            return Err(fail(EXIT_USAGE, "generate", format!("size {size} outside 1..={}", p.max_size())));
        }
        ctx.write(&format!("{name}.cap"), &write_orlib_cap(&bench::synthetic_cflp(size, size, seed)))?;
    } else {
        let model = bench::generate(p, size, seed).map_err(|e| fail(EXIT_USAGE, "generate", e))?;
        ctx.write(&format!("{name}.json"), &serialize_model(&model))?;
    }
    println!("{name}");
    Ok(())
}
