use std::sync::OnceLock;

use malachite_base::num::basic::traits::One;

use super::poly::Poly;
use super::special::{self, Special};
use super::{QuadForm, QuboError};
use crate::binarize::{
    plan_model, plan_slack, scale_constraint, BinarizeError, EncodingPlan, IntegerRow, PlanConfig, RowSense,
    ScaledRow,
};
use crate::milp::{Constraint, MilpModel, Sense};
use crate::num::{abs, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum PenaltyPolicy {
    /// `1 + Σ |c|·(ub − lb)` over the objective.
    #[default]
    Auto,
    /// One weight for every constraint without its own override.
    Fixed(Rational),
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CompileConfig {
    pub plan: PlanConfig,
    pub penalty: PenaltyPolicy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PenaltyKind {
    Equality,
    Inequality,
    Exclusion,
    Indicator,
    /// A constant row that always holds.
    Redundant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PenaltyTerm {
    pub constraint: String,
    pub kind: PenaltyKind,
    pub form: QuadForm,
    pub weight: Rational,
    /// Scaled integer row the penalty squares (equalities and generic
    /// inequalities).
    pub row: Option<IntegerRow>,
    /// Index into `plan.groups` of the slack, for generic inequalities.
    pub slack_group: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuboArtifact {
    pub cost: QuadForm,
    pub penalties: Vec<PenaltyTerm>,
    pub plan: EncodingPlan,
    pub default_weight: Rational,
    assembled: OnceLock<QuadForm>,
}

impl QuboArtifact {
    pub fn new(cost: QuadForm, penalties: Vec<PenaltyTerm>, plan: EncodingPlan, default_weight: Rational) -> Self {
        QuboArtifact { cost, penalties, plan, default_weight, assembled: OnceLock::new() }
    }

    pub fn n(&self) -> usize {
        self.plan.total_bits
    }

    /// Bits that encode model variables; slack bits follow them.
    pub fn decision_bits(&self) -> usize {
        self.plan.variable_bits()
    }

    pub fn assembled(&self) -> &QuadForm {
        self.assembled.get_or_init(|| assemble(self))
    }

    pub fn penalty(&self, constraint: &str) -> Option<&PenaltyTerm> {
        self.penalties.iter().find(|p| p.constraint == constraint)
    }
}

/// Objective over bits. Linear objectives give a diagonal form; variable
/// offsets accumulate into the constant.
pub fn compile_objective(model: &MilpModel, plan: &EncodingPlan) -> QuadForm {
    let (bits, constant) = plan.expr_to_bits(&model.objective.terms);
    let mut q = QuadForm::new(plan.total_bits);
    q.constant = constant + &model.objective.constant;
    for (bit, c) in &bits {
        q.add_diag(*bit, c);
    }
    q
}

/// `1 + Σ |c|·(ub − lb)`: any unit violation outweighs every attainable
/// objective improvement.
pub fn estimate_weight(model: &MilpModel, plan: &EncodingPlan) -> Rational {
    let mut p = Rational::ONE;
    for (var, coef) in &model.objective.terms {
        let g = plan.group_of(*var);
        p += abs(coef) * (g.max_value() - g.min_value());
    }
    p
}

fn square_row(row: &IntegerRow, extra: &[(usize, Rational)], n: usize) -> Result<QuadForm, QuboError> {
    let coefs: Vec<(usize, Rational)> = row
        .coefs
        .iter()
        .map(|(b, a)| (*b, Rational::from(a)))
        .chain(extra.iter().cloned())
        .collect();
    let lin = Poly::linear(coefs.iter().map(|(b, a)| (*b, a)), &-Rational::from(&row.rhs));
    lin.square().to_quad(n)
}

fn scaled(c: &Constraint, plan: &EncodingPlan) -> Result<ScaledRow, QuboError> {
    match scale_constraint(c, plan) {
        ScaledRow::Infeasible => Err(BinarizeError::Infeasible(c.name.clone()).into()),
        other => Ok(other),
    }
}

/// `(LHS − RHS)²` over bits, with `b² = b`.
pub fn compile_equality(c: &Constraint, plan: &EncodingPlan) -> Result<(QuadForm, Option<IntegerRow>), QuboError> {
    assert_eq!(c.sense, Sense::Eq, "compile_equality on {}", c.name);
    match scaled(c, plan)? {
        ScaledRow::Row(row) => Ok((square_row(&row, &[], plan.total_bits)?, Some(row))),
        _ => Ok((QuadForm::new(plan.total_bits), None)),
    }
}

/// `(LHS + s − RHS)²` with a freshly allocated slack group. Returns the form,
/// the scaled row and the slack group index.
pub fn compile_inequality(
    c: &Constraint,
    plan: &mut EncodingPlan,
) -> Result<(QuadForm, Option<IntegerRow>, Option<usize>), QuboError> {
    assert_ne!(c.sense, Sense::Eq, "compile_inequality on {}", c.name);
    let row = match scaled(c, plan)? {
        ScaledRow::Row(row) => row,
        _ => return Ok((QuadForm::new(plan.total_bits), None, None)),
    };
    debug_assert_eq!(row.sense, RowSense::Le);
    let slack = plan_slack(c, plan)?.expect("inequality rows get a slack group");
    let group = plan.push_slack(&c.name, slack.weights);
    let g = &plan.groups[group];
    let extra: Vec<(usize, Rational)> = g.bit_ids().zip(g.weights.iter().cloned()).collect();
    Ok((square_row(&row, &extra, plan.total_bits)?, Some(row), Some(group)))
}

/// Entrywise `cost + Σ P_j·penalty_j`, accumulated in constraint order.
pub fn assemble(artifact: &QuboArtifact) -> QuadForm {
    let mut q = artifact.cost.clone();
    q.n = artifact.n();
    for p in &artifact.penalties {
        q.add_scaled(&p.form, &p.weight);
    }
    q
}

pub fn compile(model: &MilpModel, config: &CompileConfig) -> Result<QuboArtifact, QuboError> {
    let mut plan = plan_model(model, &config.plan)?;
    let default_weight = match &config.penalty {
        PenaltyPolicy::Auto => estimate_weight(model, &plan),
        PenaltyPolicy::Fixed(p) => p.clone(),
    };
    let mut cost = compile_objective(model, &plan);
    let mut penalties = Vec::with_capacity(model.constraints.len());
    for c in &model.constraints {
        let weight = c.weight.clone().unwrap_or_else(|| default_weight.clone());
        let term = match c.sense {
            Sense::Eq => {
                let (form, row) = compile_equality(c, &plan)?;
                let kind = if row.is_some() { PenaltyKind::Equality } else { PenaltyKind::Redundant };
                PenaltyTerm { constraint: c.name.clone(), kind, form, weight, row, slack_group: None }
            }
            _ => match special::detect_special(c, &plan) {
                Some((s, form)) => PenaltyTerm {
                    constraint: c.name.clone(),
                    kind: match s {
                        Special::Exclusion(..) => PenaltyKind::Exclusion,
                        Special::Indicator { .. } => PenaltyKind::Indicator,
                    },
                    form,
                    weight,
                    row: None,
                    slack_group: None,
                },
                None => {
                    let (form, row, slack_group) = compile_inequality(c, &mut plan)?;
                    let kind = if row.is_some() { PenaltyKind::Inequality } else { PenaltyKind::Redundant };
                    PenaltyTerm { constraint: c.name.clone(), kind, form, weight, row, slack_group }
                }
            },
        };
        penalties.push(term);
    }
    let n = plan.total_bits;
    cost.n = n;
    for p in &mut penalties {
        p.form.n = n;
        debug_assert!(p.form.is_well_formed());
    }
    if let Some(budget) = plan.budget {
        assert!(n <= budget, "slack allocation exceeded the reserved budget ({n} > {budget})");
    }
    debug_assert_eq!(n, plan.variable_bits() + plan.reserved_slack_bits);
    Ok(QuboArtifact::new(cost, penalties, plan, default_weight))
}
