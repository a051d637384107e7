//! Transportation-shaped LPs solved as exact min-cost flows.
//!
//! Recognized shape: every column sits in exactly one `Σ x = r_j` row with
//! unit coefficients (a customer) and one `Σ d·x ≤ C_i` row with positive
//! coefficients (a facility), the facility coefficient of a column depends
//! only on its customer (`d_j`) and costs are nonnegative. Flow on a
//! column is `d_j·x`, so the LP is a transportation problem with supplies
//! `C_i`, demands `d_j·r_j` and unit costs `c/d_j`. Successive shortest
//! paths on i128-scaled data give the optimum; node potentials become the
//! duals and a minimum cut gives the Farkas ray.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use malachite_base::num::basic::traits::{One, Zero};

use super::{Core, CoreSolution, LpStatus};
use crate::milp::Sense;
use crate::num::{denominator_lcm, to_integer, Integer, Rational};

const LIMIT: u128 = 1 << 100;

struct Shape {
    /// Per column: customer index, facility index.
    cust: Vec<usize>,
    fac: Vec<usize>,
    /// Customer → core row position, demand coefficient `d_j`.
    cust_row: Vec<usize>,
    d: Vec<Rational>,
    fac_row: Vec<usize>,
    /// Facilities without a capacity row, numbered after the real ones.
    virtual_fac: usize,
}

fn recognize(core: &Core) -> Option<Shape> {
    let n = core.n;
    let mut cust = vec![usize::MAX; n];
    let mut fac = vec![usize::MAX; n];
    let mut cust_row = Vec::new();
    let mut fac_row = Vec::new();
    let mut coef = vec![Rational::ZERO; n];
    for (pos, (_, row)) in core.rows.iter().enumerate() {
        match row.sense {
            Sense::Eq => {
                if row.rhs < 0 || row.coefs.iter().any(|(_, a)| *a != 1) {
                    return None;
                }
                let k = cust_row.len();
                cust_row.push(pos);
                for (j, _) in &row.coefs {
                    if cust[*j] != usize::MAX {
                        return None;
                    }
                    cust[*j] = k;
                }
            }
            Sense::Le => {
                if row.rhs < 0 || row.coefs.iter().any(|(_, a)| *a <= 0) {
                    return None;
                }
                let k = fac_row.len();
                fac_row.push(pos);
                for (j, a) in &row.coefs {
                    if fac[*j] != usize::MAX {
                        return None;
                    }
                    fac[*j] = k;
                    coef[*j] = a.clone();
                }
            }
            Sense::Ge => return None,
        }
    }
    let mut d: Vec<Option<Rational>> = vec![None; cust_row.len()];
    let mut virtual_fac = 0;
    for j in 0..n {
        if cust[j] == usize::MAX || core.cost[j] < 0 {
            return None;
        }
        if fac[j] == usize::MAX {
            // Its capacity row was folded into a bound: own facility, no row.
            fac[j] = fac_row.len() + virtual_fac;
            virtual_fac += 1;
            continue;
        }
        match &d[cust[j]] {
            None => d[cust[j]] = Some(coef[j].clone()),
            Some(v) if *v == coef[j] => {}
            Some(_) => return None,
        }
    }
    let d = d.into_iter().map(|v| v.unwrap_or(Rational::ONE)).collect();
    Some(Shape { cust, fac, cust_row, d, fac_row, virtual_fac })
}

fn scaled(v: &Rational, scale: &Rational) -> Option<i128> {
    let s = to_integer(&(v * scale));
    let x = i128::try_from(&s).ok()?;
    (x.unsigned_abs() < LIMIT).then_some(x)
}

struct Graph {
    to: Vec<usize>,
    cap: Vec<i128>,
    cost: Vec<i128>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    fn new(nodes: usize) -> Self {
        Graph { to: Vec::new(), cap: Vec::new(), cost: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    /// Adds `u → v`; the reverse residual edge is the id xor 1.
    fn edge(&mut self, u: usize, v: usize, cap: i128, cost: i128) -> usize {
        let id = self.to.len();
        self.to.extend([v, u]);
        self.cap.extend([cap, 0]);
        self.cost.extend([cost, -cost]);
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
        id
    }
}

pub(crate) fn solve(core: &Core) -> Option<CoreSolution> {
    let shape = recognize(core)?;
    let n = core.n;
    let nreal = shape.fac_row.len();
    let nf = nreal + shape.virtual_fac;
    let nc = shape.cust_row.len();
    let row = |pos: usize| &core.rows[pos].1;

    let supply: Vec<Rational> = shape.fac_row.iter().map(|&p| row(p).rhs.clone()).collect();
    let demand: Vec<Rational> = (0..nc).map(|k| &shape.d[k] * &row(shape.cust_row[k]).rhs).collect();
    let edge_cap: Vec<Option<Rational>> =
        (0..n).map(|j| core.upper[j].as_ref().map(|u| &shape.d[shape.cust[j]] * u)).collect();
    let unit_cost: Vec<Rational> = (0..n).map(|j| &core.cost[j] / &shape.d[shape.cust[j]]).collect();

    let flow_scale = Rational::from(denominator_lcm(supply.iter().chain(&demand).chain(edge_cap.iter().flatten())));
    let cost_scale = Rational::from(denominator_lcm(&unit_cost));
    let sup_s: Vec<i128> = supply.iter().map(|v| scaled(v, &flow_scale)).collect::<Option<_>>()?;
    let dem_s: Vec<i128> = demand.iter().map(|v| scaled(v, &flow_scale)).collect::<Option<_>>()?;
    let total: i128 = dem_s.iter().sum();
    if total as u128 >= LIMIT {
        return None;
    }
    let nodes = nf + nc + 2;
    let (s, t) = (0, nodes - 1);
    let cost_s = unit_cost.iter().map(|c| scaled(c, &cost_scale)).collect::<Option<Vec<i128>>>()?;
    if cost_s.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0).saturating_mul(nodes as u128 + 1) >= LIMIT {
        return None;
    }

    let mut g = Graph::new(nodes);
    for i in 0..nf {
        g.edge(s, 1 + i, sup_s.get(i).copied().unwrap_or(total + 1), 0);
    }
    let mut col_edge = vec![usize::MAX; n];
    for j in 0..n {
        let cap = match &edge_cap[j] {
            Some(u) => scaled(u, &flow_scale)?,
            None => total + 1,
        };
        if cap > 0 {
            col_edge[j] = g.edge(1 + shape.fac[j], 1 + nf + shape.cust[j], cap, cost_s[j]);
        }
    }
    for (k, dm) in dem_s.iter().enumerate() {
        g.edge(1 + nf + k, t, *dm, 0);
    }

    let mut pi = vec![0i128; nodes];
    let mut flow = 0i128;
    let mut dist = vec![i128::MAX; nodes];
    let mut prev = vec![usize::MAX; nodes];
    let mut done = vec![false; nodes];
    let mut pivots = 0usize;
    let mut feasible = true;
    while flow < total {
        dist.fill(i128::MAX);
        prev.fill(usize::MAX);
        done.fill(false);
        dist[s] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0i128, s)));
        while let Some(Reverse((du, u))) = heap.pop() {
            if done[u] || du > dist[u] {
                continue;
            }
            done[u] = true;
            if u == t {
                break;
            }
            for &e in &g.adj[u] {
                if g.cap[e] == 0 {
                    continue;
                }
                let v = g.to[e];
                let nd = du + g.cost[e] + pi[u] - pi[v];
                if nd < dist[v] {
                    dist[v] = nd;
                    prev[v] = e;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        if !done[t] {
            feasible = false;
            break;
        }
        let dt = dist[t];
        for v in 0..nodes {
            pi[v] += if done[v] { dist[v].min(dt) } else { dt };
        }
        let mut push = total - flow;
        let mut v = t;
        while v != s {
            let e = prev[v];
            push = push.min(g.cap[e]);
            v = g.to[e ^ 1];
        }
        let mut v = t;
        while v != s {
            let e = prev[v];
            g.cap[e] -= push;
            g.cap[e ^ 1] += push;
            v = g.to[e ^ 1];
        }
        flow += push;
        pivots += 1;
    }

    let m = core.rows.len();
    let d_of = |j: usize| &shape.d[shape.cust[j]];
    if !feasible {
        // `done` now marks everything reachable from the source.
        let mut ray = vec![Rational::ZERO; m];
        let mut bound_ray = vec![Rational::ZERO; n];
        for k in 0..nc {
            if !done[1 + nf + k] {
                ray[shape.cust_row[k]] = -shape.d[k].clone();
            }
        }
        for i in 0..nreal {
            if !done[1 + i] {
                ray[shape.fac_row[i]] = Rational::ONE;
            }
        }
        for j in 0..n {
            if done[1 + shape.fac[j]] && !done[1 + nf + shape.cust[j]] {
                debug_assert!(core.upper[j].is_some());
                bound_ray[j] = d_of(j).clone();
            }
        }
        return Some(CoreSolution {
            status: LpStatus::Infeasible,
            x: vec![Rational::ZERO; n],
            duals: Vec::new(),
            bound_duals: Vec::new(),
            ray,
            bound_ray,
            direction: Vec::new(),
            pivots,
        });
    }

    let x: Vec<Rational> = (0..n)
        .map(|j| match col_edge[j] {
            usize::MAX => Rational::ZERO,
            e => Rational::from(Integer::from(g.cap[e ^ 1])) / &flow_scale / d_of(j),
        })
        .collect();
    let price = |v: i128| Rational::from(Integer::from(v)) / &cost_scale;
    let alpha: Vec<Rational> = (0..nf).map(|i| price((pi[1 + i] - pi[s]).max(0))).collect();
    let beta: Vec<Rational> = (0..nc).map(|k| price(pi[1 + nf + k] - pi[s])).collect();
    let mut duals = vec![Rational::ZERO; m];
    for k in 0..nc {
        duals[shape.cust_row[k]] = &shape.d[k] * &beta[k];
    }
    for i in 0..nreal {
        duals[shape.fac_row[i]] = -alpha[i].clone();
    }
    let mut bound_duals = vec![Rational::ZERO; n];
    for j in 0..n {
        if let Some(u) = &core.upper[j] {
            if x[j] == *u {
                let reduced = &unit_cost[j] + &alpha[shape.fac[j]] - &beta[shape.cust[j]];
                if reduced < 0 {
                    bound_duals[j] = d_of(j) * reduced;
                }
            }
        }
    }
    Some(CoreSolution {
        status: LpStatus::Optimal,
        x,
        duals,
        bound_duals,
        ray: Vec::new(),
        bound_ray: Vec::new(),
        direction: Vec::new(),
        pivots,
    })
}
