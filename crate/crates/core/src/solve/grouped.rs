//! Exact minimization with slack bits eliminated in closed form.
//!
//! For a generic inequality `r + s ≤ 0` with slack `s ∈ {0, …, U}` the best
//! slack gives `min_s (r + s)² = dist(r, [−U, 0])²`, so only the decision
//! bits need enumerating. Optionally one uniformly spaced group (the Benders
//! `η`) is also taken out of the enumeration: its value enters linearly, so
//! the energy is convex along it and a local minimum is global.

use std::collections::{BTreeMap, HashSet};

use malachite_base::num::arithmetic::traits::{DivRound, Parity, Square};
use malachite_base::num::basic::traits::{One, Zero};
use malachite_base::rounding_modes::RoundingMode;

use super::{BitAssignment, LocalFields, Method, SolveError, SolverResult};
use crate::binarize::{integer_weights, Role};
use crate::num::{denominator_lcm, pow2, to_integer, Integer, Natural, Rational};
use crate::qubo::{PenaltyKind, QuadForm, QuboArtifact};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupedOptions {
    /// Largest number of enumerated decision bits.
    pub cap: usize,
    /// Group index (into `plan.groups`) minimized by line search.
    pub line_group: Option<usize>,
}

impl Default for GroupedOptions {
    fn default() -> Self {
        GroupedOptions { cap: super::EXHAUSTIVE_CAP, line_group: None }
    }
}

struct Row {
    weight: Integer,
    u: Integer,
    neg_rhs: Integer,
    alpha: Integer,
    slack_group: usize,
}

fn dist_sq(r: &Integer, u: &Integer) -> Integer {
    if *r > 0 {
        r.square()
    } else {
        let low = r + u;
        if low < 0 {
            low.square()
        } else {
            Integer::ZERO
        }
    }
}

struct Line {
    group: usize,
    /// `z` ranges over `0..=zmax`.
    zmax: u64,
    /// Scaled cost per unit of `z`.
    lambda: Integer,
    rows: Vec<usize>,
}

impl Line {
    fn h(&self, z: u64, rows: &[Row], r: &[Integer]) -> Integer {
        let zi = Integer::from(z);
        let mut total = &self.lambda * &zi;
        for &j in &self.rows {
            let v = &r[j] + &rows[j].alpha * &zi;
            if v > 0 || v < -&rows[j].u {
                total += &rows[j].weight * dist_sq(&v, &rows[j].u);
            }
        }
        total
    }

    /// Smallest minimizer of the convex `h` and its value.
    fn minimize(&self, rows: &[Row], r: &[Integer]) -> (u64, Integer) {
        if let Some(z) = self.candidate(rows, r) {
            let hz = self.h(z, rows, r);
            let left_ok = z == 0 || self.h(z - 1, rows, r) > hz;
            let right_ok = z == self.zmax || self.h(z + 1, rows, r) >= hz;
            if left_ok && right_ok {
                return (z, hz);
            }
        }
        let (mut lo, mut hi) = (0u64, self.zmax);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.h(mid + 1, rows, r) >= self.h(mid, rows, r) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        (lo, self.h(lo, rows, r))
    }

    /// Endpoint of the interval of `z` satisfying every row, if nonempty.
    fn candidate(&self, rows: &[Row], r: &[Integer]) -> Option<u64> {
        let mut lo = Integer::ZERO;
        let mut hi = Integer::from(self.zmax);
        for &j in &self.rows {
            let row = &rows[j];
            let a = &row.alpha;
            // −U ≤ r + a·z ≤ 0
            let (l, h) = if *a < 0 {
                let na = -a;
                ((&r[j]).div_round(&na, RoundingMode::Ceiling).0, (&r[j] + &row.u).div_round(&na, RoundingMode::Floor).0)
            } else {
                ((-&r[j] - &row.u).div_round(a, RoundingMode::Ceiling).0, (-&r[j]).div_round(a, RoundingMode::Floor).0)
            };
            if l > lo {
                lo = l;
            }
            if h < hi {
                hi = h;
            }
            if lo > hi {
                return None;
            }
        }
        let pick = if self.lambda >= 0 { lo } else { hi };
        u64::try_from(&pick).ok()
    }
}

fn lex_key(mask: u64, n: usize) -> u64 {
    if n == 0 {
        0
    } else {
        mask.reverse_bits() >> (64 - n)
    }
}

/// Group weights of the form `w₀·2^i`, as needed for a line group.
fn is_uniform(weights: &[Rational]) -> bool {
    !weights.is_empty()
        && weights
            .iter()
            .enumerate()
            .all(|(i, w)| *w == &weights[0] * Rational::from(pow2(i)))
}

pub fn solve_grouped(a: &QuboArtifact, opts: &GroupedOptions) -> Result<SolverResult, SolveError> {
    match prepare(a, opts.line_group) {
        Some(p) => run(a, p, opts.cap),
        None => run(a, prepare(a, None).expect("no line group always prepares"), opts.cap),
    }
}

struct Prepared {
    decision: Vec<usize>,
    line: Option<Line>,
    rows: Vec<Row>,
    /// Per local decision bit: `(row, coefficient)`.
    touches: Vec<Vec<(usize, Integer)>>,
    dec: LocalFields<Integer>,
    scale: Integer,
}

fn prepare(a: &QuboArtifact, line_group: Option<usize>) -> Option<Prepared> {
    let plan = &a.plan;
    let line_bits: HashSet<usize> = match line_group {
        Some(g) => {
            let grp = &plan.groups[g];
            if grp.role == Role::Slack || !is_uniform(&grp.weights) || grp.len() > 60 {
                return None;
            }
            grp.bit_ids().collect()
        }
        None => HashSet::new(),
    };

    let ineq: Vec<_> = a
        .penalties
        .iter()
        .filter(|p| p.kind == PenaltyKind::Inequality && p.row.is_some() && p.slack_group.is_some())
        .collect();
    let mut eliminated: HashSet<usize> = line_bits.clone();
    for p in &ineq {
        let g = &plan.groups[p.slack_group.unwrap()];
        let u = p.row.as_ref().unwrap().slack_range();
        assert_eq!(g.weights, integer_weights(&u), "slack group {} does not cover [0, U]", g.owner);
        eliminated.extend(g.bit_ids());
    }
    let decision: Vec<usize> = (0..a.n()).filter(|b| !eliminated.contains(b)).collect();
    let local: BTreeMap<usize, usize> = decision.iter().enumerate().map(|(k, b)| (*b, k)).collect();

    // Quadratic part over decision bits: cost plus slack-free penalties.
    let mut dec = QuadForm::new(decision.len());
    dec.constant = a.cost.constant.clone();
    let mut line_cost = vec![Rational::ZERO; line_bits.len()];
    let line_first = line_group.map(|g| plan.groups[g].first_bit).unwrap_or(0);
    for (i, c) in &a.cost.diag {
        match local.get(i) {
            Some(k) => dec.add_diag(*k, c),
            None if line_bits.contains(i) => line_cost[i - line_first] = c.clone(),
            None => return None,
        }
    }
    for ((i, j), c) in &a.cost.offdiag {
        dec.add_pair(*local.get(i)?, *local.get(j)?, c);
    }
    for p in a.penalties.iter().filter(|p| p.kind != PenaltyKind::Inequality) {
        dec.constant += &p.form.constant * &p.weight;
        for (i, c) in &p.form.diag {
            dec.add_diag(*local.get(i)?, &(c * &p.weight));
        }
        for ((i, j), c) in &p.form.offdiag {
            dec.add_pair(*local.get(i)?, *local.get(j)?, &(c * &p.weight));
        }
    }
    if !line_bits.is_empty() && !is_uniform(&line_cost) && line_cost.iter().any(|c| *c != Rational::ZERO) {
        return None;
    }
    let lambda = line_cost.first().cloned().unwrap_or(Rational::ZERO);

    let scale_src = dec
        .diag
        .values()
        .chain(dec.offdiag.values())
        .chain(std::iter::once(&dec.constant))
        .chain(std::iter::once(&lambda))
        .chain(ineq.iter().map(|p| &p.weight));
    let scale = Rational::from(denominator_lcm(scale_src));
    let to_int = |v: &Rational| to_integer(&(v * &scale));

    let mut rows = Vec::with_capacity(ineq.len());
    let mut touches: Vec<Vec<(usize, Integer)>> = vec![Vec::new(); decision.len()];
    let mut line_rows = Vec::new();
    for (j, p) in ineq.iter().enumerate() {
        let row = p.row.as_ref().unwrap();
        let mut line_coefs = vec![Integer::ZERO; line_bits.len()];
        for (b, c) in &row.coefs {
            match local.get(b) {
                Some(k) => touches[*k].push((j, c.clone())),
                None if line_bits.contains(b) => line_coefs[b - line_first] = c.clone(),
                None => return None,
            }
        }
        let alpha = line_coefs.first().cloned().unwrap_or(Integer::ZERO);
        let uniform = line_coefs
            .iter()
            .enumerate()
            .all(|(i, c)| *c == &alpha * Integer::from(pow2(i)));
        if !uniform {
            return None;
        }
        if alpha != 0 {
            line_rows.push(j);
        }
        rows.push(Row {
            weight: to_int(&p.weight),
            u: Integer::from(row.slack_range()),
            neg_rhs: -row.rhs.clone(),
            alpha,
            slack_group: p.slack_group.unwrap(),
        });
    }

    let line = line_group.filter(|_| !line_bits.is_empty()).map(|g| Line {
        group: g,
        zmax: (1u64 << line_bits.len()) - 1,
        lambda: to_int(&lambda),
        rows: line_rows,
    });
    if line.is_none() && !line_bits.is_empty() {
        return None;
    }

    let diag: Vec<(usize, Integer)> = dec.diag.iter().map(|(i, c)| (*i, to_int(c))).collect();
    let pairs: Vec<(usize, usize, Integer)> = dec.offdiag.iter().map(|((i, j), c)| (*i, *j, to_int(c))).collect();
    let lf = LocalFields::new(decision.len(), Integer::ZERO, to_int(&dec.constant), &diag, &pairs);
    Some(Prepared { decision, line, rows, touches, dec: lf, scale: to_integer(&scale) })
}

fn run(a: &QuboArtifact, p: Prepared, cap: usize) -> Result<SolverResult, SolveError> {
    let Prepared { decision, line, rows, touches, mut dec, scale } = p;
    let d = decision.len();
    if d > cap || d > 60 {
        return Err(SolveError::TooLarge { n: d, cap });
    }
    let on_line: Vec<bool> = {
        let mut v = vec![false; rows.len()];
        if let Some(l) = &line {
            for &j in &l.rows {
                v[j] = true;
            }
        }
        v
    };
    let mut r: Vec<Integer> = rows.iter().map(|row| row.neg_rhs.clone()).collect();
    let mut fixed_pen: Vec<Integer> = rows
        .iter()
        .zip(&r)
        .zip(&on_line)
        .map(|((row, rj), l)| if *l { Integer::ZERO } else { &row.weight * dist_sq(rj, &row.u) })
        .collect();
    let mut fixed_sum: Integer = fixed_pen.iter().sum();
    let line_floor = match &line {
        Some(l) if l.lambda < 0 => &l.lambda * Integer::from(l.zmax),
        _ => Integer::ZERO,
    };

    let evaluate = |dec_e: &Integer, fixed_sum: &Integer, r: &[Integer], best: Option<&Integer>| -> Option<(Integer, u64)> {
        let base = dec_e + fixed_sum;
        if let Some(b) = best {
            if &base + &line_floor > *b {
                return None;
            }
        }
        match &line {
            Some(l) => {
                let (z, hz) = l.minimize(&rows, r);
                Some((base + hz, z))
            }
            None => Some((base, 0)),
        }
    };

    let (mut best, mut best_z) = evaluate(dec.energy(), &fixed_sum, &r, None).unwrap();
    let mut best_mask = 0u64;
    let mut mask = 0u64;
    for k in 1u64..(1u64 << d) {
        let i = k.trailing_zeros() as usize;
        dec.flip(i);
        mask ^= 1 << i;
        let on = dec.bits()[i];
        for (j, c) in &touches[i] {
            if on {
                r[*j] += c;
            } else {
                r[*j] -= c;
            }
            if !on_line[*j] {
                let new = &rows[*j].weight * dist_sq(&r[*j], &rows[*j].u);
                fixed_sum += &new;
                fixed_sum -= &fixed_pen[*j];
                fixed_pen[*j] = new;
            }
        }
        if let Some((e, z)) = evaluate(dec.energy(), &fixed_sum, &r, Some(&best)) {
            if e < best || (e == best && lex_key(mask, d) < lex_key(best_mask, d)) {
                best = e;
                best_z = z;
                best_mask = mask;
            }
        }
    }

    let mut bits = vec![false; a.n()];
    for (k, b) in decision.iter().enumerate() {
        bits[*b] = best_mask >> k & 1 == 1;
    }
    if let Some(l) = &line {
        let g = &a.plan.groups[l.group];
        for (i, b) in g.bit_ids().enumerate() {
            bits[b] = best_z >> i & 1 == 1;
        }
    }
    let z = Integer::from(best_z);
    for (j, row) in rows.iter().enumerate() {
        let mut rj = row.neg_rhs.clone();
        for (k, b) in decision.iter().enumerate() {
            if bits[*b] {
                if let Some((_, c)) = touches[k].iter().find(|(jj, _)| *jj == j) {
                    rj += c;
                }
            }
        }
        rj += &row.alpha * &z;
        // Best slack is clamp(−r, 0, U).
        let s = if rj >= 0 {
            Integer::ZERO
        } else if -&rj > row.u {
            row.u.clone()
        } else {
            -rj
        };
        let g = &a.plan.groups[row.slack_group];
        for (b, on) in g.bit_ids().zip(encode_capped(&Natural::try_from(s).unwrap(), &g.weights)) {
            bits[b] = on;
        }
    }

    let energy = a.assembled().eval(&bits);
    assert_eq!(
        &energy * Rational::from(&scale),
        Rational::from(best),
        "closed-form energy disagrees with the assembled form"
    );
    Ok(SolverResult {
        best: BitAssignment(bits),
        energy,
        method: Method::Exhaustive,
        seed: None,
        sweeps: None,
        proven_optimal: true,
        trace: Vec::new(),
    })
}

/// Bits for `s` under capped weights `1, 2, …, 2^(k-2), L`.
fn encode_capped(s: &Natural, weights: &[Rational]) -> Vec<bool> {
    let k = weights.len();
    if k == 0 {
        return Vec::new();
    }
    let low_max = pow2(k - 1) - Natural::ONE;
    let (mut v, top) = if *s <= low_max {
        (s.clone(), false)
    } else {
        let last = Natural::try_from(to_integer(&weights[k - 1])).unwrap();
        (s - last, true)
    };
    let mut out = Vec::with_capacity(k);
    for _ in 0..k - 1 {
        out.push(v.odd());
        v >>= 1u64;
    }
    out.push(top);
    out
}
