//! End-to-end acceptance checks. Each test prints one `ACC-n PASS|FAIL` line
//! straight to stderr so the verdicts survive output capture.

use std::collections::{BTreeSet, HashMap};
use std::io::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quboforge::benders::{self, BendersConfig, BendersReport, MasterSolver};
use quboforge::bench::{
    cflp_to_milp, generate, oracle_direct, oracle_grid, size_audit, synthetic_cflp, Problem, ORACLE_MAX,
};
use quboforge::binarize::{plan_model, BitGroup, PlanConfig, Role};
use quboforge::lp::{solve_lp, LpProblem, LpSolution, LpStatus};
use quboforge::milp::{MilpModel, Sense, VarKind};
use quboforge::num::{bit_length, denominator_lcm, rat, to_f64, to_integer, Integer, Natural, Rational};
use quboforge::qubo::{compile, CompileConfig, PenaltyKind, QuadForm, QuboArtifact};
use quboforge::solve::{solve_exhaustive, solve_sa, SaParams};

fn verdict(id: &str, failures: &[String], summary: String) {
    let line = if failures.is_empty() {
        format!("{id} PASS {summary}\n")
    } else {
        format!("{id} FAIL {summary}; {} failure(s), first: {}\n", failures.len(), failures[0])
    };
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(failures.is_empty(), "{id}: {failures:#?}");
}

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.gen_bool(0.5)).collect()
}

fn support(q: &QuadForm) -> BTreeSet<usize> {
    let mut s = BTreeSet::new();
    for (i, j, _) in q.entries() {
        s.insert(i);
        s.insert(j);
    }
    s
}

fn group_bits(g: &BitGroup) -> impl Iterator<Item = usize> {
    g.first_bit..g.first_bit + g.len()
}

fn compile_default(model: &MilpModel, k: usize) -> QuboArtifact {
    let config = CompileConfig { plan: PlanConfig { budget: None, continuous_bits: k }, ..CompileConfig::default() };
    compile(model, &config).unwrap_or_else(|e| panic!("{}: {e}", model.name))
}

/// Guard violations of one compiled instance.
fn guard_violations(model: &MilpModel, a: &QuboArtifact, k: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut bad = Vec::new();
    let plan = &a.plan;
    let n = a.n();
    let name = &model.name;

    // Variable bits sized from each domain.
    for (i, v) in model.variables.iter().enumerate() {
        let g = &plan.groups[plan.var_groups[i]];
        let range = v.range();
        let want = if range == 0 {
            0
        } else {
            match v.kind {
                VarKind::Binary => 1,
                VarKind::Integer => bit_length(&Natural::try_from(to_integer(&range)).unwrap()),
                VarKind::Continuous => k,
            }
        };
        if g.len() != want || g.min_value() != v.lb || g.max_value() != v.ub {
            bad.push(format!("{name}: variable {} has {} bits over [{}, {}]", v.name, g.len(), g.min_value(), g.max_value()));
        }
    }

    // Cost touches only objective variables and reproduces the objective.
    let obj_bits: BTreeSet<usize> = model
        .objective
        .terms
        .iter()
        .flat_map(|(v, _)| group_bits(&plan.groups[plan.var_groups[v.0]]))
        .collect();
    if !support(&a.cost).is_subset(&obj_bits) {
        bad.push(format!("{name}: cost form reaches non-objective bits"));
    }
    let mut claimed: BTreeSet<usize> = BTreeSet::new();
    for p in &a.penalties {
        let c = model.constraints.iter().find(|c| c.name == p.constraint).unwrap();
        if !p.form.is_well_formed() {
            bad.push(format!("{name}: penalty {} is not a well-formed quadratic", c.name));
        }
        let mut allowed: BTreeSet<usize> =
            c.lhs.terms.iter().flat_map(|(v, _)| group_bits(&plan.groups[plan.var_groups[v.0]])).collect();
        if let Some(s) = p.slack_group {
            let g = &plan.groups[s];
            if g.role != Role::Slack || g.owner != c.name {
                bad.push(format!("{name}: slack group of {} is misattributed", c.name));
            }
            let slack: Vec<usize> = group_bits(g).collect();
            if slack.iter().any(|b| !claimed.insert(*b)) {
                bad.push(format!("{name}: slack bits of {} are shared", c.name));
            }
            allowed.extend(slack);
        }
        if !support(&p.form).is_subset(&allowed) {
            bad.push(format!("{name}: penalty {} reaches bits outside its constraint", c.name));
        }
        // Slack sized to the scaled row's range.
        if let (Some(row), Some(s)) = (&p.row, p.slack_group) {
            let g = &plan.groups[s];
            let min_lhs: Integer = row.coefs.iter().filter(|(_, a)| *a < 0).map(|(_, a)| a.clone()).sum();
            let u = Natural::try_from(&row.rhs - min_lhs).unwrap();
            if g.len() != bit_length(&u) || g.min_value() != 0 || g.max_value() != Rational::from(u.clone()) {
                bad.push(format!("{name}: slack of {} has {} bits for range {u}", c.name, g.len()));
            }
        }
    }

    let mut sum = a.cost.clone();
    for p in &a.penalties {
        sum.add_scaled(&p.form, &p.weight);
    }
    for _ in 0..24 {
        let bits = random_bits(rng, n);
        let values = plan.decode_vars(&bits);
        if a.cost.eval(&bits) != model.objective_value(&values) {
            bad.push(format!("{name}: cost form disagrees with the objective"));
            break;
        }
        if sum.eval(&bits) != a.assembled().eval(&bits) {
            bad.push(format!("{name}: assembled form differs from cost plus weighted penalties"));
            break;
        }
        for p in &a.penalties {
            let c = model.constraints.iter().find(|c| c.name == p.constraint).unwrap();
            let ok = c.is_satisfied(&values);
            let pen = p.form.eval(&bits);
            if pen < 0 {
                bad.push(format!("{name}: penalty {} negative", c.name));
            }
            match (&p.row, p.kind) {
                (Some(row), PenaltyKind::Equality | PenaltyKind::Inequality) => {
                    let r = Rational::from(row.residual(&bits));
                    let slack = p.slack_group.map_or(Rational::from(0), |s| plan.groups[s].decode(&bits));
                    let e = &r + slack;
                    if pen != &e * &e {
                        bad.push(format!("{name}: penalty {} is not the squared residual", c.name));
                    }
                    let sat = match p.kind {
                        PenaltyKind::Equality => r == 0,
                        _ => r <= 0,
                    };
                    if sat != ok {
                        bad.push(format!("{name}: row of {} disagrees with the constraint", c.name));
                    }
                }
                (None, PenaltyKind::Exclusion | PenaltyKind::Indicator) => {
                    if (pen == 0) != ok {
                        bad.push(format!("{name}: special penalty of {} misreports violation", c.name));
                    }
                }
                (None, PenaltyKind::Redundant) => {
                    if pen != 0 || !ok {
                        bad.push(format!("{name}: redundant row {} is not constant", c.name));
                    }
                }
                _ => bad.push(format!("{name}: penalty {} has inconsistent kind", c.name)),
            }
        }
    }
    bad
}

#[test]
fn acc1_conversion_matrix() {
    let start = Instant::now();
    let sizes: [(Problem, &[usize]); 5] = [
        (Problem::Knapsack, &[4, 8, 12, 16, 24]),
        (Problem::MaxClique, &[4, 6, 9, 12, 16]),
        (Problem::Mis, &[4, 6, 9, 12, 16]),
        (Problem::Cflp, &[2, 3, 4, 5, 6]),
        (Problem::TspMtz, &[3, 4, 5, 6, 7]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = Vec::new();
    let mut count = 0;
    for (problem, list) in sizes {
        for &size in list {
            for seed in 0..4 {
                let model = generate(problem, size, seed).unwrap();
                let k = 4;
                let config = CompileConfig { plan: PlanConfig { budget: None, continuous_bits: k }, ..Default::default() };
                match compile(&model, &config) {
                    Ok(a) => failures.extend(guard_violations(&model, &a, k, &mut rng)),
                    Err(e) => failures.push(format!("{}: {e}", model.name)),
                }
                count += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 60.0 {
        failures.push(format!("runtime {secs:.1}s exceeds 60s"));
    }
    assert!(count >= 100);
    verdict("ACC-1", &failures, format!("{count} instances over 5 classes, {secs:.1}s"));
}

/// Exact minimum and all minimizers of `q` by Gray-code enumeration over
/// integer-scaled coefficients.
fn all_minimizers(q: &QuadForm) -> (Rational, Vec<Vec<bool>>) {
    let n = q.n;
    assert!(n <= 24);
    let entries = q.entries();
    let lcm = Rational::from(denominator_lcm(entries.iter().map(|(_, _, v)| *v).chain([&q.constant])));
    let int = |v: &Rational| i128::try_from(&to_integer(&(v * &lcm))).unwrap();
    let mut h = vec![0i128; n];
    let mut adj: Vec<Vec<(usize, i128)>> = vec![Vec::new(); n];
    for (i, j, v) in &entries {
        if i == j {
            h[*i] += int(v);
        } else {
            adj[*i].push((*j, int(v)));
            adj[*j].push((*i, int(v)));
        }
    }
    let mut bits = vec![false; n];
    let mut e = int(&q.constant);
    let mut best = e;
    let mut arg: Vec<u64> = vec![0];
    let mut mask = 0u64;
    for step in 1u64..(1u64 << n) {
        let i = step.trailing_zeros() as usize;
        let s: i128 = if bits[i] { -1 } else { 1 };
        e += s * h[i];
        bits[i] = !bits[i];
        mask ^= 1 << i;
        for (j, v) in &adj[i] {
            h[*j] += s * v;
        }
        if e < best {
            best = e;
            arg.clear();
            arg.push(mask);
        } else if e == best {
            arg.push(mask);
        }
    }
    let patterns = arg.into_iter().map(|m| (0..n).map(|i| m >> i & 1 == 1).collect()).collect();
    (Rational::from(Integer::from(best)) / lcm, patterns)
}

/// Instances of every class with at most `max_bits` compiled bits and their
/// continuous precision.
fn small_corpus(max_bits: usize) -> Vec<(MilpModel, usize)> {
    let mut out = Vec::new();
    let mut push = |model: MilpModel, k: usize| {
        let a = compile_default(&model, k);
        if a.n() <= max_bits {
            out.push((model, k));
        }
    };
    for size in 3..=8 {
        for seed in 0..4 {
            push(generate(Problem::Knapsack, size, seed).unwrap(), 4);
        }
    }
    for size in 4..=9 {
        for seed in 0..2 {
            push(generate(Problem::Mis, size, seed).unwrap(), 4);
            push(generate(Problem::MaxClique, size, seed).unwrap(), 4);
        }
    }
    for (m, n) in [(1, 2), (2, 2), (2, 3)] {
        for seed in 0..3 {
            push(cflp_to_milp(&synthetic_cflp(m, n, seed), &format!("cflp_{m}x{n}_{seed}")), 1);
        }
    }
    for seed in 0..6 {
        push(generate(Problem::TspMtz, 3, seed).unwrap(), 4);
    }
    push(hand_mixed(), 2);
    push(hand_fractional(), 2);
    out
}

/// `2y + 3x₁ + x₂ ≥ 4`, `y − x₁ ≤ 2` with integer `y ∈ [0, 5]`.
fn hand_mixed() -> MilpModel {
    let mut b = MilpModel::builder("hand_mixed");
    let y = b.integer("y", rat(0), rat(5));
    let x1 = b.binary("x1");
    let x2 = b.binary("x2");
    b.minimize(vec![(y, rat(3)), (x1, rat(4)), (x2, rat(2))], rat(1));
    b.constraint("cover", vec![(y, rat(2)), (x1, rat(3)), (x2, rat(1))], Sense::Ge, rat(4));
    b.constraint("spread", vec![(y, rat(1)), (x1, rat(-1))], Sense::Le, rat(2));
    b.build()
}

/// Fractional data: `½z + x ≤ 1.25` and `x + w = 1` with continuous `z ∈ [0, 1.5]`.
fn hand_fractional() -> MilpModel {
    let mut b = MilpModel::builder("hand_fractional");
    let z = b.continuous("z", rat(0), quboforge::num::ratio(3, 2));
    let x = b.binary("x");
    let w = b.binary("w");
    b.maximize(vec![(z, rat(2)), (x, rat(1)), (w, quboforge::num::ratio(1, 2))], rat(0));
    b.constraint("budget", vec![(z, quboforge::num::ratio(1, 2)), (x, rat(1))], Sense::Le, quboforge::num::ratio(5, 4));
    b.constraint("pick", vec![(x, rat(1)), (w, rat(1))], Sense::Eq, rat(1));
    b.build()
}

#[test]
fn acc2_optimum_preservation() {
    let start = Instant::now();
    let corpus = small_corpus(22);
    let mut failures = Vec::new();
    for (model, k) in &corpus {
        let a = compile_default(model, *k);
        let name = &model.name;
        let (grid_opt, grid_set) = oracle_grid(model, &a.plan).expect("corpus instances are feasible");
        let grid_set: BTreeSet<Vec<Rational>> = grid_set.into_iter().collect();
        let (min_e, patterns) = all_minimizers(a.assembled());
        let qubo_set: BTreeSet<Vec<Rational>> = patterns.iter().map(|b| a.plan.decode_vars(b)).collect();
        if min_e != grid_opt {
            failures.push(format!("{name}: QUBO minimum {min_e} vs oracle {grid_opt}"));
        }
        if qubo_set != grid_set {
            failures.push(format!("{name}: {} QUBO minimizers vs {} oracle optima", qubo_set.len(), grid_set.len()));
        }
        let ex = solve_exhaustive(a.assembled()).unwrap();
        let decoded = a.plan.decode_vars(&ex.best.0);
        if ex.energy != min_e || !grid_set.contains(&decoded) || model.objective_value(&decoded) != grid_opt {
            failures.push(format!("{name}: exhaustive argmin does not decode to an optimum"));
        }
        if model.variables.iter().all(|v| v.kind.is_discrete()) {
            let direct = oracle_direct(model, ORACLE_MAX).unwrap();
            if direct.objective != grid_opt {
                failures.push(format!("{name}: direct oracle {} vs grid {grid_opt}", direct.objective));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if corpus.len() < 50 {
        failures.push(format!("only {} instances", corpus.len()));
    }
    if secs >= 300.0 {
        failures.push(format!("runtime {secs:.1}s exceeds 300s"));
    }
    verdict("ACC-2", &failures, format!("{} instances of at most 22 bits, {secs:.1}s", corpus.len()));
}

#[test]
fn acc3_penalty_properties() {
    let corpus = small_corpus(16);
    let mut failures = Vec::new();
    let mut checked = 0u64;
    for (model, k) in &corpus {
        let a = compile_default(model, *k);
        let n = a.n();
        for p in &a.penalties {
            let c = model.constraints.iter().find(|c| c.name == p.constraint).unwrap();
            let slack_mask: u64 = p.slack_group.map_or(0, |s| group_bits(&a.plan.groups[s]).map(|b| 1u64 << b).sum());
            let mut best: HashMap<u64, (Rational, bool)> = HashMap::new();
            for m in 0u64..(1 << n) {
                let bits: Vec<bool> = (0..n).map(|i| m >> i & 1 == 1).collect();
                let pen = p.form.eval(&bits);
                let key = m & !slack_mask;
                let entry = best.entry(key).or_insert_with(|| (pen.clone(), c.is_satisfied(&a.plan.decode_vars(&bits))));
                if pen < entry.0 {
                    entry.0 = pen;
                }
                checked += 1;
            }
            for (key, (min, sat)) in best {
                if sat && min != 0 {
                    failures.push(format!("{}: {} satisfied at {key:#b} but penalty {min}", model.name, c.name));
                }
                if !sat && min < 1 {
                    failures.push(format!("{}: {} violated at {key:#b} but penalty {min}", model.name, c.name));
                }
            }
        }
    }
    verdict(
        "ACC-3",
        &failures,
        format!("{} fixtures of at most 16 bits, {checked} (assignment, penalty) pairs", corpus.len()),
    );
}

#[test]
fn acc4_hardware_budget() {
    let mut b = MilpModel::builder("budget");
    let xs: Vec<_> = (0..15).map(|i| b.binary(format!("x{i}"))).collect();
    let y = b.integer("y", rat(0), rat(600));
    let mut obj: Vec<_> = xs.iter().map(|x| (*x, rat(1))).collect();
    obj.push((y, rat(1)));
    b.minimize(obj, rat(0));
    let model = b.build();
    let plan = plan_model(&model, &PlanConfig { budget: Some(24), continuous_bits: 4 }).unwrap();
    let g = plan.group_of(y);
    let mut failures = Vec::new();
    if g.len() != 9 {
        failures.push(format!("integer precision {} bits", g.len()));
    }
    if plan.total_bits > 24 {
        failures.push(format!("plan uses {} bits", plan.total_bits));
    }
    verdict("ACC-4", &failures, format!("15 binaries + integer U=600 under budget 24 -> {} integer bits", g.len()));
}

#[test]
fn acc5_size_law() {
    let mut failures = Vec::new();
    let mut rows = 0;
    for (m, n) in [(2, 3), (5, 5), (8, 12), (10, 10), (20, 20), (16, 50)] {
        for k in [1, 2, 4] {
            let inst = synthetic_cflp(m, n, 1);
            let model = cflp_to_milp(&inst, &format!("cflp_{m}x{n}"));
            let a = compile_default(&model, k);
            let audit = size_audit(&model.name, (m, n), &a);
            let law = m + m * n * k;
            if audit.non_slack_bits != law || a.plan.variable_bits() != law || audit.formula() != law {
                failures.push(format!("{m}x{n} K={k}: {} non-slack bits, law {law}", audit.non_slack_bits));
            }
            if a.n() != law + audit.slack_bits {
                failures.push(format!("{m}x{n} K={k}: total {} != {law} + {}", a.n(), audit.slack_bits));
            }
            rows += 1;
        }
    }
    verdict("ACC-5", &failures, format!("{rows} artifacts match N + N*M*K exactly"));
}

fn monotone_bounds(rep: &BendersReport) -> Vec<String> {
    let mut bad = Vec::new();
    for w in rep.iterations.windows(2) {
        if w[1].lb < w[0].lb {
            bad.push(format!("lb fell at iteration {}", w[1].iter));
        }
        match (&w[0].best_ub, &w[1].best_ub) {
            (Some(a), Some(b)) if b > a => bad.push(format!("best ub rose at iteration {}", w[1].iter)),
            (Some(_), None) => bad.push(format!("best ub lost at iteration {}", w[1].iter)),
            _ => {}
        }
    }
    bad
}

#[test]
fn acc6_monolithic_stagnation() {
    let inst = synthetic_cflp(20, 20, 1);
    let model = cflp_to_milp(&inst, "cflp_20x20_1");
    let rep = benders::run(&model, &BendersConfig::default()).unwrap();
    let ub = rep.best_ub.clone().expect("benders incumbent");

    let a = compile_default(&model, 4);
    let params = SaParams { seed: 1, ..SaParams::default() };
    let res = solve_sa(a.assembled(), &params).unwrap();
    let values = a.plan.decode_vars(&res.best.0);
    let feasible = model.is_feasible(&values);
    // An infeasible decode has no objective; its QUBO energy is the residual.
    let reached = if feasible { model.objective_value(&values) } else { res.energy.clone() };
    let gap = to_f64(&((&reached - &ub) / quboforge::num::abs(&ub).max(rat(1))));

    let trace = &res.trace;
    let at = |s: usize| trace.iter().filter(|t| t.sweep <= s).last().unwrap().best_energy;
    let last = trace.last().unwrap().sweep;
    let (b0, b1) = (at(2 * last / 3), at(last));
    let improvement = (b0 - b1) / b0.abs().max(1.0);

    let mut failures = Vec::new();
    if gap <= 0.25 {
        failures.push(format!("residual gap {gap:.4} not above 25%"));
    }
    if improvement >= 0.01 {
        failures.push(format!("best energy improved {:.2}% over the final third", 100.0 * improvement));
    }
    verdict(
        "ACC-6",
        &failures,
        format!(
            "{} bits, SA {} sweeps x {} restarts; decode feasible={feasible}, gap {gap:.3} vs benders {}, final-third improvement {:.2}%",
            a.n(),
            params.sweeps,
            params.restarts,
            to_f64(&ub),
            100.0 * improvement
        ),
    );
}

#[test]
fn acc7_benders_convergence() {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for (m, n) in [(2, 2), (3, 5), (5, 10), (8, 20), (10, 30), (12, 40), (16, 50)] {
        let start = Instant::now();
        let model = cflp_to_milp(&synthetic_cflp(m, n, 1), &format!("cflp_{m}x{n}_1"));
        let rep = benders::run(&model, &BendersConfig::default()).unwrap();
        let oracle = oracle_direct(&model, ORACLE_MAX).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let tag = format!("{m}x{n}");
        failures.extend(monotone_bounds(&rep).into_iter().map(|e| format!("{tag}: {e}")));
        let Some(ub) = rep.best_ub.clone() else {
            failures.push(format!("{tag}: no incumbent ({})", rep.status.as_str()));
            continue;
        };
        let step = rep.eta_step.clone().unwrap_or(rat(0)) / quboforge::num::abs(&ub).max(rat(1));
        let gap = rep.gap.clone().unwrap();
        if gap > quboforge::num::ratio(1, 1_000_000) + step {
            failures.push(format!("{tag}: gap {} above tolerance", to_f64(&gap)));
        }
        let incumbent = rep.incumbent.as_ref().unwrap();
        if ub != oracle.objective || model.objective_value(incumbent) != oracle.objective || !model.is_feasible(incumbent) {
            failures.push(format!("{tag}: incumbent {} vs oracle {}", to_f64(&ub), to_f64(&oracle.objective)));
        }
        if rep.iterations.len() > 50 {
            failures.push(format!("{tag}: {} iterations", rep.iterations.len()));
        }
        if secs >= 600.0 {
            failures.push(format!("{tag}: {secs:.0}s"));
        }
        notes.push(format!("{tag}:{}it", rep.iterations.len()));
    }
    verdict("ACC-7", &failures, format!("exhaustive master matches oracle; {}", notes.join(" ")));
}

fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=5);
    let mut p = LpProblem::new();
    for j in 0..n {
        let upper = rng.gen_bool(0.4).then(|| rat(rng.gen_range(1..=6)));
        p.add_column(format!("x{j}"), rat(rng.gen_range(-5..=6)), upper);
    }
    for i in 0..m {
        let mut coefs: Vec<(usize, Rational)> = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.7) {
                let a = Rational::from(rng.gen_range(-8..=8)) / Rational::from(rng.gen_range(1..=3));
                if a != 0 {
                    coefs.push((j, a));
                }
            }
        }
        let sense = [Sense::Le, Sense::Ge, Sense::Eq][rng.gen_range(0..3)];
        p.add_row(format!("r{i}"), coefs, sense, rat(rng.gen_range(-6..=10)));
    }
    p
}

fn activity(coefs: &[(usize, Rational)], x: &[Rational]) -> Rational {
    coefs.iter().map(|(j, a)| a * &x[*j]).sum()
}

/// `Aᵀv` over the columns.
fn transpose(p: &LpProblem, v: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::from(0); p.n()];
    for (row, vi) in p.rows.iter().zip(v) {
        for (j, a) in &row.coefs {
            out[*j] += a * vi;
        }
    }
    out
}

/// Optimal: feasible `x`, dual-feasible `(y, w)`, and `c·x = b·y + u·w`.
/// Infeasible: `v` with `Aᵀv + r ≥ 0`, `r ≥ 0`, `b·v + u·r < 0`, signs
/// chosen so that `v·Ax ≤ v·b` for every `x` satisfying the rows.
fn certificate_error(p: &LpProblem, s: &LpSolution) -> Option<&'static str> {
    let n = p.n();
    let u = |j: usize| p.upper[j].clone();
    match s.status {
        LpStatus::Optimal => {
            for (j, x) in s.x.iter().enumerate() {
                if *x < 0 || u(j).is_some_and(|u| *x > u) {
                    return Some("x outside its box");
                }
            }
            for r in &p.rows {
                if !r.sense.holds(&activity(&r.coefs, &s.x), &r.rhs) {
                    return Some("row violated");
                }
            }
            for (r, y) in p.rows.iter().zip(&s.duals) {
                let ok = match r.sense {
                    Sense::Le => *y <= 0,
                    Sense::Ge => *y >= 0,
                    Sense::Eq => true,
                };
                if !ok {
                    return Some("dual sign");
                }
            }
            let aty = transpose(p, &s.duals);
            for j in 0..n {
                let w = &s.bound_duals[j];
                if *w > 0 || (*w != 0 && u(j).is_none()) {
                    return Some("bound dual sign");
                }
                if &p.cost[j] - &aty[j] - w < 0 {
                    return Some("negative reduced cost");
                }
            }
            let primal: Rational = p.cost.iter().zip(&s.x).map(|(c, x)| c * x).sum();
            let dual: Rational = p.rows.iter().zip(&s.duals).map(|(r, y)| y * &r.rhs).sum::<Rational>()
                + (0..n).filter_map(|j| u(j).map(|u| u * &s.bound_duals[j])).sum::<Rational>();
            (primal != dual || primal != s.objective).then_some("duality gap")
        }
        LpStatus::Infeasible => {
            for (r, v) in p.rows.iter().zip(&s.ray) {
                let ok = match r.sense {
                    Sense::Le => *v >= 0,
                    Sense::Ge => *v <= 0,
                    Sense::Eq => true,
                };
                if !ok {
                    return Some("ray sign");
                }
            }
            let atv = transpose(p, &s.ray);
            for j in 0..n {
                let r = &s.bound_ray[j];
                if *r < 0 || (*r != 0 && u(j).is_none()) || &atv[j] + r < 0 {
                    return Some("ray not dual feasible");
                }
            }
            let value: Rational = p.rows.iter().zip(&s.ray).map(|(r, v)| v * &r.rhs).sum::<Rational>()
                + (0..n).filter_map(|j| u(j).map(|u| u * &s.bound_ray[j])).sum::<Rational>();
            (value >= 0).then_some("ray value not negative")
        }
        LpStatus::Unbounded => {
            let d = &s.direction;
            let cd: Rational = p.cost.iter().zip(d).map(|(c, v)| c * v).sum();
            if cd >= 0 || d.iter().enumerate().any(|(j, v)| *v < 0 || (*v != 0 && u(j).is_some())) {
                return Some("direction does not improve");
            }
            for r in &p.rows {
                let a = activity(&r.coefs, d);
                let ok = match r.sense {
                    Sense::Le => a <= 0,
                    Sense::Ge => a >= 0,
                    Sense::Eq => a == 0,
                };
                if !ok {
                    return Some("direction leaves the feasible set");
                }
            }
            None
        }
    }
}

#[test]
fn acc8_lp_certificates() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();
    let mut counts = [0usize; 3];
    for k in 0..1000 {
        let p = random_lp(&mut rng);
        let s = solve_lp(&p);
        counts[match s.status {
            LpStatus::Optimal => 0,
            LpStatus::Infeasible => 1,
            LpStatus::Unbounded => 2,
        }] += 1;
        if let Some(e) = certificate_error(&p, &s) {
            failures.push(format!("lp {k} ({}): {e}", s.status.as_str()));
        }
    }
    if counts[0] < 100 || counts[1] < 100 {
        failures.push(format!("unbalanced sample {counts:?}"));
    }
    verdict(
        "ACC-8",
        &failures,
        format!("1000 LPs: {} optimal, {} infeasible, {} unbounded", counts[0], counts[1], counts[2]),
    );
}

#[test]
fn acc9_large_scale_bounds() {
    let start = Instant::now();
    let model = cflp_to_milp(&synthetic_cflp(100, 1000, 1), "cflp_100x1000_1");
    let config = BendersConfig { master: MasterSolver::Sa(SaParams { seed: 1, ..SaParams::default() }), ..Default::default() };
    let rep = benders::run(&model, &config).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut failures = Vec::new();
    if rep.iterations.len() > 50 {
        failures.push(format!("{} iterations", rep.iterations.len()));
    }
    for l in &rep.iterations {
        if let Some(u) = &l.best_ub {
            if l.lb > *u {
                failures.push(format!("lb above best ub at iteration {}", l.iter));
            }
        }
    }
    for w in rep.iterations.windows(2) {
        if let (Some(a), Some(b)) = (&w[0].best_ub, &w[1].best_ub) {
            if b > a {
                failures.push(format!("best ub rose at iteration {}", w[1].iter));
            }
        }
    }
    let gap = match (&rep.gap, &rep.best_ub) {
        (Some(g), Some(_)) => to_f64(g),
        _ => {
            failures.push("no gap reported".into());
            f64::NAN
        }
    };
    verdict(
        "ACC-9",
        &failures,
        format!(
            "100x1000 {} after {} iterations, lb {:.1} best ub {:.1}, own gap {gap:.4}, {secs:.0}s",
            rep.status.as_str(),
            rep.iterations.len(),
            to_f64(&rep.lb),
            rep.best_ub.as_ref().map_or(f64::NAN, to_f64)
        ),
    );
}
