//! Binary encodings of integer, continuous and slack variables.
//!
//! Every variable owns one [`BitGroup`]; its value is
//! `offset + Σ weights[i]·bit[i]`. Integer groups cap their last weight so
//! the largest pattern decodes to the upper bound exactly. Constraints are
//! rewritten over bits and scaled to coprime integer coefficients
//! ([`IntegerRow`]) before slack sizing, which keeps every violation at
//! least one unit away from zero.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use malachite_base::num::arithmetic::traits::Gcd;
use malachite_base::num::basic::traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::{Constraint, MilpModel, Sense, VarId, VarKind};
use crate::num::{bit_length, denominator_lcm, floor, is_integer, pow2, to_integer, Integer, Natural, Rational};
use crate::qubo::special;

pub const DEFAULT_CONTINUOUS_BITS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Binary,
    Integer,
    Continuous,
    Slack,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Binary => "binary",
            Role::Integer => "integer",
            Role::Continuous => "continuous",
            Role::Slack => "slack",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        Some(match s {
            "binary" => Role::Binary,
            "integer" => Role::Integer,
            "continuous" => Role::Continuous,
            "slack" => Role::Slack,
            _ => return None,
        })
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitGroup {
    /// Variable name, or constraint name for slack groups.
    pub owner: String,
    pub role: Role,
    pub weights: Vec<Rational>,
    pub offset: Rational,
    pub first_bit: usize,
}

impl BitGroup {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn bit_ids(&self) -> Range<usize> {
        self.first_bit..self.first_bit + self.weights.len()
    }

    pub fn decode(&self, bits: &[bool]) -> Rational {
        let mut v = self.offset.clone();
        for (w, b) in self.weights.iter().zip(&bits[self.bit_ids()]) {
            if *b {
                v += w;
            }
        }
        v
    }

    /// Decodes from the group's own bits, `local.len() == self.len()`.
    pub fn decode_local(&self, local: &[bool]) -> Rational {
        let mut v = self.offset.clone();
        for (w, b) in self.weights.iter().zip(local) {
            if *b {
                v += w;
            }
        }
        v
    }

    pub fn min_value(&self) -> Rational {
        let mut v = self.offset.clone();
        for w in self.weights.iter().filter(|w| **w < Rational::ZERO) {
            v += w;
        }
        v
    }

    pub fn max_value(&self) -> Rational {
        let mut v = self.offset.clone();
        for w in self.weights.iter().filter(|w| **w > Rational::ZERO) {
            v += w;
        }
        v
    }

    /// Sorted set of decoded values over all patterns. Exponential; for tests
    /// and small groups only.
    pub fn reachable(&self) -> Vec<Rational> {
        assert!(self.len() <= 20, "group too large to enumerate");
        let mut out: Vec<Rational> = (0u32..1 << self.len())
            .map(|mask| {
                let local: Vec<bool> = (0..self.len()).map(|i| mask >> i & 1 == 1).collect();
                self.decode_local(&local)
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Weights for an integer in `[0, u]`: `1, 2, …, 2^(k-2)` then the capped
/// remainder `u - (2^(k-1) - 1)`, with `k = ⌈log₂(u+1)⌉`.
pub fn integer_weights(u: &Natural) -> Vec<Rational> {
    let k = bit_length(u);
    integer_weights_with_bits(u, k)
}

/// Integer weights using `k` bits. For `k` below the full width the grid is
/// coarsened to step `s = ⌈u/(2^k-1)⌉`; the last weight is still capped so
/// the maximum decodes to `u`.
pub fn integer_weights_with_bits(u: &Natural, k: usize) -> Vec<Rational> {
    if k == 0 || *u == Natural::ZERO {
        return Vec::new();
    }
    let full = bit_length(u);
    let k = k.min(full);
    let step = if k == full {
        Natural::ONE
    } else {
        let denom = pow2(k) - Natural::ONE;
        (u + &denom - Natural::ONE) / denom
    };
    let mut weights: Vec<Rational> = (0..k - 1).map(|i| Rational::from(&step * pow2(i))).collect();
    let used = &step * (pow2(k - 1) - Natural::ONE);
    weights.push(Rational::from(u - used));
    weights
}

pub fn plan_integer(owner: &str, u: &Natural) -> BitGroup {
    BitGroup {
        owner: owner.to_string(),
        role: Role::Integer,
        weights: integer_weights(u),
        offset: Rational::ZERO,
        first_bit: 0,
    }
}

/// Uniform grid over `[lb, ub]` with `2^k` points.
pub fn continuous_weights(lb: &Rational, ub: &Rational, k: usize) -> Vec<Rational> {
    if k == 0 || lb == ub {
        return Vec::new();
    }
    let span = ub - lb;
    let denom = Rational::from(pow2(k) - Natural::ONE);
    (0..k).map(|i| &span * Rational::from(pow2(i)) / &denom).collect()
}

pub fn plan_continuous(owner: &str, lb: &Rational, ub: &Rational, k: usize) -> BitGroup {
    BitGroup {
        owner: owner.to_string(),
        role: Role::Continuous,
        weights: continuous_weights(lb, ub, k),
        offset: lb.clone(),
        first_bit: 0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanConfig {
    pub budget: Option<usize>,
    pub continuous_bits: usize,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig { budget: None, continuous_bits: DEFAULT_CONTINUOUS_BITS }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BinarizeError {
    #[error("budget of {budget} bits is below the {binaries} native binary variables")]
    BudgetUnsatisfiable { budget: usize, binaries: usize },
    #[error("budget of {budget} bits cannot hold the model: {needed} bits needed at minimum precision")]
    BudgetExceeded { budget: usize, needed: usize },
    #[error("constraint {0:?} infeasible for all assignments")]
    Infeasible(String),
    #[error("continuous precision must be at least 1 bit")]
    ZeroPrecision,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingPlan {
    pub groups: Vec<BitGroup>,
    /// Group index of each model variable.
    pub var_groups: Vec<usize>,
    pub native_binary: BTreeMap<String, usize>,
    pub total_bits: usize,
    pub budget: Option<usize>,
    pub continuous_bits: usize,
    /// Slack bits reserved for the worst case when the plan was made.
    pub reserved_slack_bits: usize,
}

impl EncodingPlan {
    pub fn group_of(&self, var: VarId) -> &BitGroup {
        &self.groups[self.var_groups[var.0]]
    }

    pub fn variable_bits(&self) -> usize {
        self.groups.iter().filter(|g| g.role != Role::Slack).map(BitGroup::len).sum()
    }

    pub fn slack_bits(&self) -> usize {
        self.groups.iter().filter(|g| g.role == Role::Slack).map(BitGroup::len).sum()
    }

    pub fn slack_groups(&self) -> impl Iterator<Item = &BitGroup> {
        self.groups.iter().filter(|g| g.role == Role::Slack)
    }

    /// Appends a slack group; this is the single allocation point for bits
    /// after planning.
    pub fn push_slack(&mut self, owner: &str, weights: Vec<Rational>) -> usize {
        let group = BitGroup {
            owner: owner.to_string(),
            role: Role::Slack,
            weights,
            offset: Rational::ZERO,
            first_bit: self.total_bits,
        };
        self.total_bits += group.len();
        self.groups.push(group);
        self.groups.len() - 1
    }

    /// Variable values from a full bit vector, in model order.
    pub fn decode_vars(&self, bits: &[bool]) -> Vec<Rational> {
        self.var_groups.iter().map(|&g| self.groups[g].decode(bits)).collect()
    }

    /// Rewrites `Σ coef·var` as `(bit terms, constant)` over this plan.
    pub fn expr_to_bits(&self, terms: &[(VarId, Rational)]) -> (BTreeMap<usize, Rational>, Rational) {
        let mut out: BTreeMap<usize, Rational> = BTreeMap::new();
        let mut constant = Rational::ZERO;
        for (var, coef) in terms {
            let g = self.group_of(*var);
            constant += coef * &g.offset;
            for (bit, w) in g.bit_ids().zip(&g.weights) {
                *out.entry(bit).or_insert(Rational::ZERO) += coef * w;
            }
        }
        out.retain(|_, c| *c != Rational::ZERO);
        (out, constant)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
}

/// A constraint over bits with coprime integer coefficients:
/// `Σ coefs·bits (≤|=) rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerRow {
    pub coefs: Vec<(usize, Integer)>,
    pub sense: RowSense,
    pub rhs: Integer,
}

impl IntegerRow {
    pub fn min_lhs(&self) -> Integer {
        self.coefs.iter().filter(|(_, a)| *a < 0).map(|(_, a)| a.clone()).sum()
    }

    pub fn max_lhs(&self) -> Integer {
        self.coefs.iter().filter(|(_, a)| *a > 0).map(|(_, a)| a.clone()).sum()
    }

    /// `Σ coefs·bits − rhs`.
    pub fn residual(&self, bits: &[bool]) -> Integer {
        let mut r = -self.rhs.clone();
        for (b, a) in &self.coefs {
            if bits[*b] {
                r += a;
            }
        }
        r
    }

    /// Range `[0, U]` a slack must cover, for `≤` rows.
    pub fn slack_range(&self) -> Natural {
        let u = &self.rhs - self.min_lhs();
        Natural::try_from(u).expect("slack range of a satisfiable row is nonnegative")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScaledRow {
    Row(IntegerRow),
    /// A row without bit terms that always holds; needs no penalty.
    Redundant,
    /// Fails for every encoded assignment.
    Infeasible,
}

/// Rewrites a constraint over the plan's bits, mirrors `≥` into `≤`, clears
/// denominators with their LCM, divides by the coefficient GCD and rounds the
/// right-hand side down for inequalities.
pub fn scale_constraint(c: &Constraint, plan: &EncodingPlan) -> ScaledRow {
    let (bits, constant) = plan.expr_to_bits(&c.lhs.terms);
    let mut rhs = &c.rhs - &constant;
    let mut coefs: Vec<(usize, Rational)> = bits.into_iter().collect();
    let sense = match c.sense {
        Sense::Le => RowSense::Le,
        Sense::Eq => RowSense::Eq,
        Sense::Ge => {
            for (_, a) in coefs.iter_mut() {
                *a = -a.clone();
            }
            rhs = -rhs;
            RowSense::Le
        }
    };
    if coefs.is_empty() {
        let holds = match sense {
            RowSense::Le => rhs >= Rational::ZERO,
            RowSense::Eq => rhs == Rational::ZERO,
        };
        return if holds { ScaledRow::Redundant } else { ScaledRow::Infeasible };
    }
    let lcm = denominator_lcm(coefs.iter().map(|(_, a)| a));
    let lcm = Rational::from(lcm);
    let mut ints: Vec<(usize, Integer)> = coefs.iter().map(|(b, a)| (*b, to_integer(&(a * &lcm)))).collect();
    let gcd = ints
        .iter()
        .fold(Natural::ZERO, |g, (_, a)| g.gcd(a.unsigned_abs_ref()));
    let gcd_i = Integer::from(gcd.clone());
    for (_, a) in ints.iter_mut() {
        *a /= &gcd_i;
    }
    let scaled_rhs = rhs * lcm / Rational::from(gcd);
    let rhs = match sense {
        RowSense::Le => floor(&scaled_rhs),
        RowSense::Eq => {
            if !is_integer(&scaled_rhs) {
                return ScaledRow::Infeasible;
            }
            to_integer(&scaled_rhs)
        }
    };
    let row = IntegerRow { coefs: ints, sense, rhs };
    let (lo, hi) = (row.min_lhs(), row.max_lhs());
    match sense {
        RowSense::Le if row.rhs < lo => ScaledRow::Infeasible,
        RowSense::Eq if row.rhs < lo || row.rhs > hi => ScaledRow::Infeasible,
        _ => ScaledRow::Row(row),
    }
}

/// Slack bits the generic penalty of `c` needs under `plan`: zero for
/// equalities, redundant rows and recognized special structures.
pub fn slack_bits_needed(c: &Constraint, plan: &EncodingPlan) -> Result<usize, BinarizeError> {
    match scale_constraint(c, plan) {
        ScaledRow::Infeasible => Err(BinarizeError::Infeasible(c.name.clone())),
        ScaledRow::Redundant => Ok(0),
        ScaledRow::Row(row) => {
            if row.sense == RowSense::Eq || special::classify(&row).is_some() {
                Ok(0)
            } else {
                Ok(bit_length(&row.slack_range()))
            }
        }
    }
}

/// Slack group for an inequality, sized to `[0, rhs − min(lhs)]` in scaled
/// units.
pub fn plan_slack(c: &Constraint, plan: &EncodingPlan) -> Result<Option<BitGroup>, BinarizeError> {
    match scale_constraint(c, plan) {
        ScaledRow::Infeasible => Err(BinarizeError::Infeasible(c.name.clone())),
        ScaledRow::Row(row) if row.sense == RowSense::Le => {
            let mut g = plan_integer(&c.name, &row.slack_range());
            g.role = Role::Slack;
            Ok(Some(g))
        }
        _ => Ok(None),
    }
}

/// Plans all variable encodings and reserves worst-case slack bits. Under a
/// budget, integer and continuous groups lose one bit at a time, largest
/// group first, until the total fits.
pub fn plan_model(model: &MilpModel, config: &PlanConfig) -> Result<EncodingPlan, BinarizeError> {
    if config.continuous_bits == 0 {
        return Err(BinarizeError::ZeroPrecision);
    }
    let binaries = model.count_kind(VarKind::Binary);
    if let Some(budget) = config.budget {
        if budget < binaries {
            return Err(BinarizeError::BudgetUnsatisfiable { budget, binaries });
        }
    }

    // Full precision per variable; zero means the variable is fixed.
    let mut bits: Vec<usize> = model
        .variables
        .iter()
        .map(|v| match v.kind {
            VarKind::Binary => 1,
            VarKind::Integer => bit_length(&integer_range(v)),
            VarKind::Continuous => {
                if v.lb == v.ub {
                    0
                } else {
                    config.continuous_bits
                }
            }
        })
        .collect();

    loop {
        let plan = layout(model, &bits, config);
        let mut slack = 0;
        for c in &model.constraints {
            slack += slack_bits_needed(c, &plan)?;
        }
        let total = plan.total_bits + slack;
        match config.budget {
            Some(budget) if total > budget => {
                let candidate = model
                    .variables
                    .iter()
                    .enumerate()
                    .filter(|(i, v)| v.kind != VarKind::Binary && bits[*i] > 1)
                    .max_by(|(i, _), (j, _)| bits[*i].cmp(&bits[*j]).then(j.cmp(i)))
                    .map(|(i, _)| i);
                match candidate {
                    Some(i) => {
                        bits[i] -= 1;
                        log::debug!("budget {budget}: shaving {} to {} bits", model.variables[i].name, bits[i]);
                    }
                    None => return Err(BinarizeError::BudgetExceeded { budget, needed: total }),
                }
            }
            _ => {
                let mut plan = plan;
                plan.reserved_slack_bits = slack;
                return Ok(plan);
            }
        }
    }
}

fn integer_range(v: &crate::milp::Variable) -> Natural {
    Natural::try_from(to_integer(&v.range())).expect("validated bounds")
}

/// Assigns bit ids: native binaries, then integer, then continuous groups.
fn layout(model: &MilpModel, bits: &[usize], config: &PlanConfig) -> EncodingPlan {
    let mut groups = Vec::with_capacity(model.variables.len());
    let mut var_groups = vec![0; model.variables.len()];
    let mut native_binary = BTreeMap::new();
    let mut next = 0;
    for kind in [VarKind::Binary, VarKind::Integer, VarKind::Continuous] {
        for (i, v) in model.variables.iter().enumerate().filter(|(_, v)| v.kind == kind) {
            let mut g = match kind {
                VarKind::Binary => {
                    native_binary.insert(v.name.clone(), next);
                    BitGroup {
                        owner: v.name.clone(),
                        role: Role::Binary,
                        weights: vec![Rational::ONE],
                        offset: Rational::ZERO,
                        first_bit: 0,
                    }
                }
                VarKind::Integer => BitGroup {
                    owner: v.name.clone(),
                    role: Role::Integer,
                    weights: integer_weights_with_bits(&integer_range(v), bits[i]),
                    offset: v.lb.clone(),
                    first_bit: 0,
                },
                VarKind::Continuous => plan_continuous(&v.name, &v.lb, &v.ub, bits[i]),
            };
            g.first_bit = next;
            next += g.len();
            var_groups[i] = groups.len();
            groups.push(g);
        }
    }
    EncodingPlan {
        groups,
        var_groups,
        native_binary,
        total_bits: next,
        budget: config.budget,
        continuous_bits: config.continuous_bits,
        reserved_slack_bits: 0,
    }
}
