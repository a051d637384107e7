//! Dense two-phase primal simplex with native upper bounds.
//!
//! Pricing takes the largest reduced cost. After a run of degenerate pivots it
//! switches to Bland's rule until the objective moves again, which rules out
//! cycling.

use std::cmp::Ordering;

use malachite_base::num::basic::traits::{One, Zero};
use malachite_base::num::comparison::traits::OrdAbs;

use super::{Core, CoreSolution, LpStatus};
use crate::milp::Sense;
use crate::num::Rational;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    /// Reduced costs.
    d: Vec<Rational>,
    beta: Vec<Rational>,
    basis: Vec<usize>,
    /// Column → basic row.
    row_of: Vec<Option<usize>>,
    at_upper: Vec<bool>,
    upper: Vec<Option<Rational>>,
    kind: Vec<Kind>,
    pivots: usize,
    budget: u128,
}

/// Consecutive degenerate pivots before pricing falls back to Bland's rule.
const DEGENERATE_RUN: usize = 8;

enum Outcome {
    Optimal,
    /// Entering column with no blocking bound.
    Unbounded(usize),
}

fn binomial_saturating(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        match acc.checked_mul(n as u128 - i) {
            Some(v) => acc = v / (i + 1),
            None => return u128::MAX,
        }
    }
    acc
}

impl Tableau {
    fn value(&self, col: usize) -> Rational {
        match self.row_of[col] {
            Some(r) => self.beta[r].clone(),
            None if self.at_upper[col] => self.upper[col].clone().unwrap(),
            None => Rational::ZERO,
        }
    }

    fn fixed(&self, col: usize) -> bool {
        self.upper[col].as_ref().map_or(false, |u| *u == 0)
    }

    fn price(&mut self, cost: &[Rational]) {
        let mut d = cost.to_vec();
        for (r, &b) in self.basis.iter().enumerate() {
            if cost[b] == 0 {
                continue;
            }
            for (c, v) in self.rows[r].iter().enumerate() {
                if *v != 0 {
                    d[c] -= &cost[b] * v;
                }
            }
        }
        self.d = d;
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let inv = Rational::ONE / &self.rows[r][col];
        let nz: Vec<usize> = (0..self.rows[r].len()).filter(|&c| self.rows[r][c] != 0).collect();
        for &c in &nz {
            self.rows[r][c] *= &inv;
        }
        let pivot_row: Vec<(usize, Rational)> = nz.iter().map(|&c| (c, self.rows[r][c].clone())).collect();
        for k in 0..self.rows.len() {
            if k == r || self.rows[k][col] == 0 {
                continue;
            }
            let f = self.rows[k][col].clone();
            for (c, v) in &pivot_row {
                self.rows[k][*c] -= &f * v;
            }
        }
        if self.d[col] != 0 {
            let f = self.d[col].clone();
            for (c, v) in &pivot_row {
                self.d[*c] -= &f * v;
            }
        }
        let old = self.basis[r];
        self.row_of[old] = None;
        self.basis[r] = col;
        self.row_of[col] = Some(r);
        self.at_upper[col] = false;
        self.pivots += 1;
        assert!((self.pivots as u128) <= self.budget, "simplex exceeded its pivot budget");
    }

    fn iterate(&mut self) -> Outcome {
        let mut degenerate = 0usize;
        loop {
            let mut eligible = (0..self.d.len()).filter(|&c| {
                self.row_of[c].is_none()
                    && !self.fixed(c)
                    && ((!self.at_upper[c] && self.d[c] < 0) || (self.at_upper[c] && self.d[c] > 0))
            });
            let entering = if degenerate >= DEGENERATE_RUN {
                eligible.next()
            } else {
                eligible.fold(None, |best: Option<usize>, c| match best {
                    Some(b) if self.d[b].cmp_abs(&self.d[c]) != Ordering::Less => Some(b),
                    _ => Some(c),
                })
            };
            let Some(j) = entering else { return Outcome::Optimal };
            let increasing = !self.at_upper[j];

            // Smallest step; ties go to the smallest leaving column index.
            let mut best: Option<(Rational, usize)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][j];
                if *a == 0 {
                    continue;
                }
                let delta = if increasing { -a.clone() } else { a.clone() };
                let b = self.basis[r];
                let limit = if delta < 0 {
                    &self.beta[r] / -&delta
                } else {
                    match &self.upper[b] {
                        Some(u) => (u - &self.beta[r]) / &delta,
                        None => continue,
                    }
                };
                let better = match &best {
                    None => true,
                    Some((l, rb)) => match limit.cmp(l) {
                        Ordering::Less => true,
                        Ordering::Equal => b < self.basis[*rb],
                        Ordering::Greater => false,
                    },
                };
                if better {
                    best = Some((limit, r));
                }
            }
            let own = self.upper[j].clone();
            let flip = match (&own, &best) {
                (None, None) => return Outcome::Unbounded(j),
                (Some(_), None) => true,
                (Some(u), Some((l, _))) => u < l,
                (None, Some(_)) => false,
            };
            let t = if flip { own.unwrap() } else { best.as_ref().unwrap().0.clone() };
            let entering_value = if increasing { t.clone() } else { self.upper[j].clone().unwrap() - &t };
            degenerate = if t == 0 { degenerate + 1 } else { 0 };
            if t != 0 {
                for r in 0..self.rows.len() {
                    let a = &self.rows[r][j];
                    if *a == 0 {
                        continue;
                    }
                    let change = if increasing { -(a * &t) } else { a * &t };
                    self.beta[r] += change;
                }
            }
            if flip {
                self.at_upper[j] = increasing;
                continue;
            }
            let r = best.unwrap().1;
            let leaving = self.basis[r];
            let delta_negative = if increasing { self.rows[r][j] > 0 } else { self.rows[r][j] < 0 };
            self.beta[r] = entering_value;
            self.pivot(r, j);
            self.at_upper[leaving] = !delta_negative;
        }
    }
}

pub(crate) fn solve(core: &Core) -> CoreSolution {
    let n = core.n;
    let m = core.rows.len();
    let mut upper: Vec<Option<Rational>> = core.upper.clone();
    let mut kind = vec![Kind::Structural; n];
    let mut mult = Vec::with_capacity(m);
    // Column whose initial tableau entry is +e_i.
    let mut unit = Vec::with_capacity(m);
    let mut specs = Vec::with_capacity(m);
    for (_, row) in &core.rows {
        let sign = if row.rhs < 0 { -Rational::ONE } else { Rational::ONE };
        let slack = match row.sense {
            Sense::Le => Some(sign.clone()),
            Sense::Ge => Some(-sign.clone()),
            Sense::Eq => None,
        };
        let slack_col = slack.as_ref().map(|_| {
            kind.push(Kind::Slack);
            upper.push(None);
            kind.len() - 1
        });
        specs.push((slack, slack_col));
        mult.push(sign);
    }
    for (slack, slack_col) in &specs {
        let needs_art = slack.as_ref().map_or(true, |s| *s < 0);
        if needs_art {
            kind.push(Kind::Artificial);
            upper.push(None);
            unit.push(kind.len() - 1);
        } else {
            unit.push(slack_col.unwrap());
        }
    }
    let total = kind.len();
    let mut rows = vec![vec![Rational::ZERO; total]; m];
    let mut beta = Vec::with_capacity(m);
    for (i, (_, row)) in core.rows.iter().enumerate() {
        for (j, a) in &row.coefs {
            rows[i][*j] += a * &mult[i];
        }
        if let (Some(s), Some(c)) = &specs[i] {
            rows[i][*c] = s.clone();
        }
        rows[i][unit[i]] = Rational::ONE;
        beta.push(&row.rhs * &mult[i]);
    }
    let basis = unit.clone();
    let mut row_of = vec![None; total];
    for (r, &c) in basis.iter().enumerate() {
        row_of[c] = Some(r);
    }
    let mut t = Tableau {
        rows,
        d: Vec::new(),
        beta,
        basis,
        row_of,
        at_upper: vec![false; total],
        upper,
        kind: kind.clone(),
        pivots: 0,
        budget: binomial_saturating(total, m).saturating_mul(2),
    };

    // Phase 1: minimize the artificial sum.
    let phase1: Vec<Rational> = kind.iter().map(|k| if *k == Kind::Artificial { Rational::ONE } else { Rational::ZERO }).collect();
    t.price(&phase1);
    if let Outcome::Unbounded(_) = t.iterate() {
        unreachable!("phase 1 is bounded below by zero");
    }
    let infeas: Rational = (0..total).filter(|&c| t.kind[c] == Kind::Artificial).map(|c| t.value(c)).sum();
    if infeas > 0 {
        let mut ray = Vec::with_capacity(m);
        for i in 0..m {
            let y = &phase1[unit[i]] - &t.d[unit[i]];
            ray.push(-(y * &mult[i]));
        }
        let bound_ray = (0..n).map(|j| -bound_dual(&t, j)).collect();
        let x = (0..n).map(|j| t.value(j)).collect();
        return CoreSolution {
            status: LpStatus::Infeasible,
            x,
            duals: Vec::new(),
            bound_duals: Vec::new(),
            ray,
            bound_ray,
            direction: Vec::new(),
            pivots: t.pivots,
        };
    }

    // Phase 2: artificials are pinned at zero.
    for c in 0..total {
        if t.kind[c] == Kind::Artificial {
            t.upper[c] = Some(Rational::ZERO);
            t.at_upper[c] = false;
        }
    }
    let mut phase2 = core.cost.clone();
    phase2.resize(total, Rational::ZERO);
    t.price(&phase2);
    let outcome = t.iterate();
    let x: Vec<Rational> = (0..n).map(|j| t.value(j)).collect();
    match outcome {
        Outcome::Unbounded(j) => {
            let mut direction = vec![Rational::ZERO; n];
            if j < n {
                direction[j] = Rational::ONE;
            }
            for (r, &b) in t.basis.iter().enumerate() {
                if b < n && t.rows[r][j] != 0 {
                    direction[b] = -t.rows[r][j].clone();
                }
            }
            CoreSolution {
                status: LpStatus::Unbounded,
                x,
                duals: Vec::new(),
                bound_duals: Vec::new(),
                ray: Vec::new(),
                bound_ray: Vec::new(),
                direction,
                pivots: t.pivots,
            }
        }
        Outcome::Optimal => {
            let duals = (0..m).map(|i| -(&t.d[unit[i]] * &mult[i])).collect();
            let bound_duals = (0..n).map(|j| bound_dual(&t, j)).collect();
            CoreSolution {
                status: LpStatus::Optimal,
                x,
                duals,
                bound_duals,
                ray: Vec::new(),
                bound_ray: Vec::new(),
                direction: Vec::new(),
                pivots: t.pivots,
            }
        }
    }
}

/// Reduced cost carried by an active upper bound.
fn bound_dual(t: &Tableau, j: usize) -> Rational {
    if t.row_of[j].is_some() {
        return Rational::ZERO;
    }
    if t.at_upper[j] || (t.fixed(j) && t.d[j] < 0) {
        t.d[j].clone()
    } else {
        Rational::ZERO
    }
}
