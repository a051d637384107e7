//! Seeded instance generators.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::orlib::{cflp_to_milp, CflpInstance};
use super::BenchError;
use crate::milp::{MilpModel, Sense, VarId};
use crate::num::rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Problem {
    Knapsack,
    MaxClique,
    Mis,
    Cflp,
    TspMtz,
}

impl Problem {
    pub const ALL: [Problem; 5] = [Problem::Knapsack, Problem::MaxClique, Problem::Mis, Problem::Cflp, Problem::TspMtz];

    pub fn as_str(self) -> &'static str {
        match self {
            Problem::Knapsack => "knapsack",
            Problem::MaxClique => "max_clique",
            Problem::Mis => "mis",
            Problem::Cflp => "cflp",
            Problem::TspMtz => "tsp_mtz",
        }
    }

    /// Largest accepted size.
    pub fn max_size(self) -> usize {
        match self {
            Problem::Knapsack => 64,
            Problem::MaxClique | Problem::Mis => 64,
            Problem::Cflp => 1000,
            Problem::TspMtz => 12,
        }
    }
}

impl FromStr for Problem {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        Problem::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| BenchError::UnknownProblem(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnapsackInstance {
    pub weights: Vec<u64>,
    pub values: Vec<u64>,
    pub capacity: u64,
}

impl KnapsackInstance {
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=12)).collect();
        let values = (0..n).map(|_| rng.gen_range(1..=20)).collect();
        let capacity = (weights.iter().sum::<u64>() / 2).max(1);
        KnapsackInstance { weights, values, capacity }
    }

    pub fn to_milp(&self, name: &str) -> MilpModel {
        let mut b = MilpModel::builder(name);
        let x: Vec<VarId> = (0..self.weights.len()).map(|i| b.binary(format!("item{i}"))).collect();
        b.maximize(x.iter().zip(&self.values).map(|(v, c)| (*v, rat(*c as i64))).collect(), rat(0));
        b.constraint(
            "capacity",
            x.iter().zip(&self.weights).map(|(v, w)| (*v, rat(*w as i64))).collect(),
            Sense::Le,
            rat(self.capacity as i64),
        );
        b.build()
    }
}

/// Undirected graph as a sorted edge list over `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn random(n: usize, p: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(p) {
                    edges.push((i, j));
                }
            }
        }
        Graph { n, edges }
    }

    pub fn complete(n: usize) -> Self {
        Graph { n, edges: (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect() }
    }

    pub fn complement(&self) -> Graph {
        let mut edges = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.edges.binary_search(&(i, j)).is_err() {
                    edges.push((i, j));
                }
            }
        }
        Graph { n: self.n, edges }
    }

    /// `max Σ x` with `x_i + x_j ≤ 1` on every edge.
    pub fn independent_set_milp(&self, name: &str) -> MilpModel {
        let mut b = MilpModel::builder(name);
        let x: Vec<VarId> = (0..self.n).map(|i| b.binary(format!("v{i}"))).collect();
        b.maximize(x.iter().map(|v| (*v, rat(1))).collect(), rat(0));
        for (i, j) in &self.edges {
            b.constraint(format!("e{i}_{j}"), vec![(x[*i], rat(1)), (x[*j], rat(1))], Sense::Le, rat(1));
        }
        b.build()
    }

    /// Maximum clique as an independent set of the complement.
    pub fn clique_milp(&self, name: &str) -> MilpModel {
        self.complement().independent_set_milp(name)
    }
}

/// Facilities and customers on a 100×100 grid in the style of the OR-Library
/// `cap` sets: equal capacities totalling 1.4 times the demand, fixed costs
/// around `60·n` that dominate allocation, and allocation cost equal to
/// distance times demand over ten.
pub fn synthetic_cflp(m: usize, n: usize, seed: u64) -> CflpInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fac: Vec<(f64, f64)> = (0..m).map(|_| (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0))).collect();
    let cus: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0))).collect();
    let demand: Vec<i64> = (0..n).map(|_| rng.gen_range(5..=35)).collect();
    let total: i64 = demand.iter().sum();
    let max_d = *demand.iter().max().unwrap();
    let per = ((14 * total) as f64 / (10 * m) as f64).ceil() as i64;
    let capacity = vec![per.max(max_d); m];
    let fixed: Vec<i64> = (0..m).map(|_| (rng.gen_range(0.8..1.2) * 60.0 * n as f64).round() as i64).collect();
    let cost = fac
        .iter()
        .map(|f| {
            cus.iter()
                .zip(&demand)
                .map(|(c, d)| {
                    let dist = ((f.0 - c.0).powi(2) + (f.1 - c.1).powi(2)).sqrt();
                    rat((dist * *d as f64 / 10.0).round() as i64)
                })
                .collect()
        })
        .collect();
    CflpInstance {
        capacity: capacity.into_iter().map(rat).collect(),
        fixed: fixed.into_iter().map(rat).collect(),
        demand: demand.into_iter().map(rat).collect(),
        cost,
    }
}

/// Asymmetric TSP with Miller–Tucker–Zemlin ordering on `u_1..u_{n-1}`.
pub fn tsp_mtz(n: usize, seed: u64) -> MilpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = MilpModel::builder(format!("tsp_mtz_{n}_{seed}"));
    let mut x = vec![vec![None; n]; n];
    let mut obj = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = b.binary(format!("x{i}_{j}"));
                x[i][j] = Some(v);
                obj.push((v, rat(rng.gen_range(1..=20))));
            }
        }
    }
    let top = rat(n as i64 - 1);
    let u: Vec<Option<VarId>> =
        (0..n).map(|i| (i > 0).then(|| b.integer(format!("u{i}"), rat(1), top.clone()))).collect();
    b.minimize(obj, rat(0));
    for i in 0..n {
        b.constraint(format!("out{i}"), (0..n).filter_map(|j| x[i][j].map(|v| (v, rat(1)))).collect(), Sense::Eq, rat(1));
        b.constraint(format!("in{i}"), (0..n).filter_map(|j| x[j][i].map(|v| (v, rat(1)))).collect(), Sense::Eq, rat(1));
    }
    for i in 1..n {
        for j in 1..n {
            if i != j {
                b.constraint(
                    format!("mtz{i}_{j}"),
                    vec![(u[i].unwrap(), rat(1)), (u[j].unwrap(), rat(-1)), (x[i][j].unwrap(), top.clone())],
                    Sense::Le,
                    rat(n as i64 - 2),
                );
            }
        }
    }
    b.build()
}

/// A seeded instance of `problem`. `size` is the item, vertex, city or
/// facility count; CFLP instances are square.
pub fn generate(problem: Problem, size: usize, seed: u64) -> Result<MilpModel, BenchError> {
    let min = if problem == Problem::TspMtz { 3 } else { 1 };
    if size < min || size > problem.max_size() {
        return Err(BenchError::BadSize { problem: problem.as_str(), size, max: problem.max_size() });
    }
    let name = format!("{}_{size}_{seed}", problem.as_str());
    Ok(match problem {
        Problem::Knapsack => KnapsackInstance::random(size, seed).to_milp(&name),
        Problem::MaxClique => Graph::random(size, 0.5, seed).clique_milp(&name),
        Problem::Mis => Graph::random(size, 0.5, seed).independent_set_milp(&name),
        Problem::Cflp => cflp_to_milp(&synthetic_cflp(size, size, seed), &name),
        Problem::TspMtz => tsp_mtz(size, seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::orlib::write_orlib_cap;
    use crate::milp::serialize_model;
    use crate::num::Rational;

    #[test]
    fn names_round_trip() {
        for p in Problem::ALL {
            assert_eq!(p.as_str().parse::<Problem>().unwrap(), p);
        }
        assert!(matches!("vrp".parse::<Problem>(), Err(BenchError::UnknownProblem(_))));
    }

    #[test]
    fn same_seed_same_bytes() {
        for p in Problem::ALL {
            let a = serialize_model(&generate(p, 4, 11).unwrap());
            let b = serialize_model(&generate(p, 4, 11).unwrap());
            assert_eq!(a, b);
        }
        assert_eq!(write_orlib_cap(&synthetic_cflp(16, 50, 3)), write_orlib_cap(&synthetic_cflp(16, 50, 3)));
        assert_ne!(write_orlib_cap(&synthetic_cflp(16, 50, 3)), write_orlib_cap(&synthetic_cflp(16, 50, 4)));
    }

    #[test]
    fn complement_of_complete_is_empty() {
        assert!(Graph::complete(4).complement().edges.is_empty());
        assert_eq!(Graph::complete(3).edges.len(), 3);
    }

    #[test]
    fn tsp_counts() {
        let m = tsp_mtz(4, 1);
        // 12 arcs, 3 order variables; 8 degree rows, 6 ordering rows.
        assert_eq!(m.num_vars(), 12 + 3);
        assert_eq!(m.constraints.len(), 8 + 6);
    }

    #[test]
    fn sizes_are_checked() {
        assert!(matches!(generate(Problem::TspMtz, 2, 0), Err(BenchError::BadSize { .. })));
        assert!(matches!(generate(Problem::Knapsack, 0, 0), Err(BenchError::BadSize { .. })));
    }

    #[test]
    fn synthetic_cflp_has_room() {
        let inst = synthetic_cflp(16, 50, 1);
        let total_cap: Rational = inst.capacity.iter().sum();
        assert!(total_cap > inst.total_demand());
        assert!(inst.capacity.iter().all(|c| *c >= inst.demand.iter().max().unwrap().clone()));
    }
}
