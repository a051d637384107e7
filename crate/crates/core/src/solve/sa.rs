use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BitAssignment, LocalFields, Method, SolveError, SolverResult};
use crate::num::to_f64;
use crate::qubo::QuadForm;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaParams {
    pub seed: u64,
    pub sweeps: usize,
    pub restarts: usize,
    /// Defaults to the largest row-sum bound on a single-flip |ΔE|.
    pub t_hi: Option<f64>,
    /// Defaults to `1e-3 · t_hi`.
    pub t_lo: Option<f64>,
}

impl Default for SaParams {
    fn default() -> Self {
        SaParams { seed: 0, sweeps: 1000, restarts: 4, t_hi: None, t_lo: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub sweep: usize,
    pub best_energy: f64,
    pub current_energy: f64,
    pub temperature: f64,
}

struct Run {
    bits: Vec<bool>,
    trace: Vec<TracePoint>,
}

/// Single-flip Metropolis annealing with a geometric schedule. Restarts run
/// in parallel, each on its own ChaCha stream; the result is the restart
/// with the lowest exact energy, earliest restart on ties.
pub fn solve_sa(q: &QuadForm, params: &SaParams) -> Result<SolverResult, SolveError> {
    if params.sweeps == 0 || params.restarts == 0 {
        return Err(SolveError::BadParams);
    }
    let n = q.n;
    let diag: Vec<(usize, f64)> = q.diag.iter().map(|(i, c)| (*i, to_f64(c))).collect();
    let pairs: Vec<(usize, usize, f64)> = q.offdiag.iter().map(|((i, j), c)| (*i, *j, to_f64(c))).collect();
    let constant = to_f64(&q.constant);

    let mut row_bound = vec![0.0f64; n];
    for (i, d) in &diag {
        row_bound[*i] += d.abs();
    }
    for (i, j, v) in &pairs {
        row_bound[*i] += v.abs();
        row_bound[*j] += v.abs();
    }
    let bound = row_bound.iter().cloned().fold(0.0, f64::max);
    let t_hi = params.t_hi.unwrap_or(if bound > 0.0 { bound } else { 1.0 });
    let t_lo = params.t_lo.unwrap_or(1e-3 * t_hi);
    let base = LocalFields::new(n, 0.0f64, constant, &diag, &pairs);

    let runs: Vec<Run> = (0..params.restarts)
        .into_par_iter()
        .map(|restart| anneal(&base, n, params, restart as u64, t_hi, t_lo))
        .collect();

    let mut best: Option<(usize, crate::num::Rational)> = None;
    for (k, run) in runs.iter().enumerate() {
        let e = q.eval(&run.bits);
        if best.as_ref().map_or(true, |(_, b)| e < *b) {
            best = Some((k, e));
        }
    }
    let (k, energy) = best.expect("at least one restart");
    let run = runs.into_iter().nth(k).unwrap();
    Ok(SolverResult {
        best: BitAssignment(run.bits),
        energy,
        method: Method::Sa,
        seed: Some(params.seed),
        sweeps: Some(params.sweeps),
        proven_optimal: false,
        trace: run.trace,
    })
}

fn anneal(base: &LocalFields<f64>, n: usize, params: &SaParams, restart: u64, t_hi: f64, t_lo: f64) -> Run {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(restart);
    let mut lf = base.clone();
    for i in 0..n {
        if rng.gen::<bool>() {
            lf.flip(i);
        }
    }
    let mut best_energy = *lf.energy();
    let mut best_bits = lf.bits().to_vec();
    let mut trace = Vec::with_capacity(params.sweeps);
    let ratio = if params.sweeps > 1 { (t_lo / t_hi).powf(1.0 / (params.sweeps - 1) as f64) } else { 1.0 };
    let mut t = t_hi;
    for sweep in 0..params.sweeps {
        for i in 0..n {
            let d = lf.delta(i);
            if d <= 0.0 || rng.gen::<f64>() < (-d / t).exp() {
                lf.flip(i);
                if *lf.energy() < best_energy {
                    best_energy = *lf.energy();
                    best_bits.copy_from_slice(lf.bits());
                }
            }
        }
        trace.push(TracePoint { sweep, best_energy, current_energy: *lf.energy(), temperature: t });
        t *= ratio;
    }
    Run { bits: best_bits, trace }
}

/// Trace rows as CSV with a header line.
pub fn trace_csv(trace: &[TracePoint]) -> String {
    let mut s = String::from("sweep,best_energy,current_energy,temperature\n");
    for p in trace {
        s.push_str(&format!("{},{},{},{}\n", p.sweep, p.best_energy, p.current_energy, p.temperature));
    }
    s
}
