//! Mixed-integer linear program intermediate representation.
//!
//! A [`MilpModel`] is always in minimization form: maximization models are
//! negated when they are built or parsed, and the source sense is kept only
//! for reporting. Expressions are canonical: one term per variable, sorted by
//! variable index, no zero coefficients, and constraint constants folded into
//! the right-hand side.

mod document;
mod validate;

use std::collections::HashMap;
use std::fmt;

use malachite_base::num::basic::traits::Zero;
use serde::{Deserialize, Serialize};

use crate::num::{is_integer, Rational};

pub use document::{parse_model, serialize_model, ParseError, ParseErrorKind};
pub use validate::{validate, Diagnostic};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

impl VarKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VarKind::Binary => "binary",
            VarKind::Integer => "integer",
            VarKind::Continuous => "continuous",
        }
    }

    pub fn is_discrete(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionHint {
    Master,
    Sub,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lb: Rational,
    pub ub: Rational,
    pub partition: Option<PartitionHint>,
}

impl Variable {
    /// Width of the domain, `ub - lb`.
    pub fn range(&self) -> Rational {
        &self.ub - &self.lb
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LinExpr {
    pub terms: Vec<(VarId, Rational)>,
    pub constant: Rational,
}

impl LinExpr {
    pub fn new(terms: Vec<(VarId, Rational)>, constant: Rational) -> Self {
        let mut expr = LinExpr { terms, constant };
        expr.canonicalize();
        expr
    }

    pub fn zero() -> Self {
        LinExpr::default()
    }

    /// Merges duplicate variables, drops zeros and sorts by variable index.
    pub fn canonicalize(&mut self) {
        let mut terms = std::mem::take(&mut self.terms);
        terms.sort_by_key(|(v, _)| *v);
        let mut merged: Vec<(VarId, Rational)> = Vec::with_capacity(terms.len());
        for (var, coef) in terms {
            match merged.last_mut() {
                Some((last, acc)) if *last == var => *acc += coef,
                _ => merged.push((var, coef)),
            }
        }
        merged.retain(|(_, c)| *c != Rational::ZERO);
        self.terms = merged;
    }

    pub fn is_canonical(&self) -> bool {
        self.terms.windows(2).all(|w| w[0].0 < w[1].0) && self.terms.iter().all(|(_, c)| *c != Rational::ZERO)
    }

    pub fn coef(&self, var: VarId) -> Option<&Rational> {
        self.terms
            .binary_search_by_key(&var, |(v, _)| *v)
            .ok()
            .map(|i| &self.terms[i].1)
    }

    pub fn eval(&self, values: &[Rational]) -> Rational {
        let mut total = self.constant.clone();
        for (var, coef) in &self.terms {
            total += coef * &values[var.0];
        }
        total
    }

    pub fn negated(&self) -> LinExpr {
        LinExpr {
            terms: self.terms.iter().map(|(v, c)| (*v, -c.clone())).collect(),
            constant: -self.constant.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Sense {
    pub fn as_str(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Sense::Le => lhs <= rhs,
            Sense::Eq => lhs == rhs,
            Sense::Ge => lhs >= rhs,
        }
    }

    pub fn flipped(self) -> Sense {
        match self {
            Sense::Le => Sense::Ge,
            Sense::Eq => Sense::Eq,
            Sense::Ge => Sense::Le,
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub lhs: LinExpr,
    pub sense: Sense,
    pub rhs: Rational,
    pub weight: Option<Rational>,
}

impl Constraint {
    pub fn is_satisfied(&self, values: &[Rational]) -> bool {
        self.sense.holds(&self.lhs.eval(values), &self.rhs)
    }

    /// Moves `lhs.constant` to the right-hand side and canonicalizes terms.
    pub fn canonicalize(&mut self) {
        self.lhs.canonicalize();
        let constant = std::mem::replace(&mut self.lhs.constant, Rational::ZERO);
        self.rhs -= constant;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveSense {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MilpModel {
    pub name: String,
    /// Sense of the source document. `objective` is always the min form.
    pub source_sense: ObjectiveSense,
    pub variables: Vec<Variable>,
    pub objective: LinExpr,
    pub constraints: Vec<Constraint>,
}

impl MilpModel {
    pub fn builder(name: impl Into<String>) -> ModelBuilder {
        ModelBuilder::new(name)
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name).map(VarId)
    }

    pub fn name_index(&self) -> HashMap<&str, VarId> {
        self.variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), VarId(i)))
            .collect()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn count_kind(&self, kind: VarKind) -> usize {
        self.variables.iter().filter(|v| v.kind == kind).count()
    }

    /// Objective of the min form.
    pub fn objective_value(&self, values: &[Rational]) -> Rational {
        self.objective.eval(values)
    }

    /// Objective in the sense of the source document.
    pub fn source_objective_value(&self, values: &[Rational]) -> Rational {
        let v = self.objective_value(values);
        match self.source_sense {
            ObjectiveSense::Min => v,
            ObjectiveSense::Max => -v,
        }
    }

    pub fn in_bounds(&self, values: &[Rational]) -> bool {
        self.variables.iter().zip(values).all(|(var, x)| {
            *x >= var.lb && *x <= var.ub && (var.kind == VarKind::Continuous || is_integer(x))
        })
    }

    pub fn is_feasible(&self, values: &[Rational]) -> bool {
        self.in_bounds(values) && self.constraints.iter().all(|c| c.is_satisfied(values))
    }

    /// Names of the constraints violated by `values`.
    pub fn violated(&self, values: &[Rational]) -> Vec<&str> {
        self.constraints
            .iter()
            .filter(|c| !c.is_satisfied(values))
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// Incremental construction of a canonical model.
#[derive(Clone, Debug)]
pub struct ModelBuilder {
    model: MilpModel,
}

impl ModelBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        ModelBuilder {
            model: MilpModel {
                name: name.into(),
                source_sense: ObjectiveSense::Min,
                variables: Vec::new(),
                objective: LinExpr::zero(),
                constraints: Vec::new(),
            },
        }
    }

    pub fn variable(&mut self, var: Variable) -> VarId {
        self.model.variables.push(var);
        VarId(self.model.variables.len() - 1)
    }

    pub fn binary(&mut self, name: impl Into<String>) -> VarId {
        self.variable(Variable {
            name: name.into(),
            kind: VarKind::Binary,
            lb: Rational::from(0),
            ub: Rational::from(1),
            partition: None,
        })
    }

    pub fn integer(&mut self, name: impl Into<String>, lb: Rational, ub: Rational) -> VarId {
        self.variable(Variable {
            name: name.into(),
            kind: VarKind::Integer,
            lb,
            ub,
            partition: None,
        })
    }

    pub fn continuous(&mut self, name: impl Into<String>, lb: Rational, ub: Rational) -> VarId {
        self.variable(Variable {
            name: name.into(),
            kind: VarKind::Continuous,
            lb,
            ub,
            partition: None,
        })
    }

    pub fn hint(&mut self, var: VarId, hint: PartitionHint) -> &mut Self {
        self.model.variables[var.0].partition = Some(hint);
        self
    }

    pub fn minimize(&mut self, terms: Vec<(VarId, Rational)>, constant: Rational) -> &mut Self {
        self.model.source_sense = ObjectiveSense::Min;
        self.model.objective = LinExpr::new(terms, constant);
        self
    }

    pub fn maximize(&mut self, terms: Vec<(VarId, Rational)>, constant: Rational) -> &mut Self {
        self.model.source_sense = ObjectiveSense::Max;
        self.model.objective = LinExpr::new(terms, constant).negated();
        self
    }

    pub fn constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, Rational)>,
        sense: Sense,
        rhs: Rational,
    ) -> &mut Self {
        let mut c = Constraint {
            name: name.into(),
            lhs: LinExpr::new(terms, Rational::ZERO),
            sense,
            rhs,
            weight: None,
        };
        c.canonicalize();
        self.model.constraints.push(c);
        self
    }

    pub fn weight_last(&mut self, weight: Rational) -> &mut Self {
        if let Some(c) = self.model.constraints.last_mut() {
            c.weight = Some(weight);
        }
        self
    }

    pub fn build(self) -> MilpModel {
        self.model
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{rat, ratio};

    #[test]
    fn canonical_expression_merges_and_sorts() {
        let e = LinExpr::new(
            vec![(VarId(2), rat(1)), (VarId(0), rat(3)), (VarId(2), rat(4)), (VarId(1), rat(0))],
            rat(0),
        );
        assert_eq!(e.terms, vec![(VarId(0), rat(3)), (VarId(2), rat(5))]);
        assert!(e.is_canonical());
    }

    #[test]
    fn cancelling_terms_vanish() {
        let e = LinExpr::new(vec![(VarId(0), rat(2)), (VarId(0), rat(-2))], rat(1));
        assert!(e.terms.is_empty());
    }

    #[test]
    fn constraint_constant_folds_into_rhs() {
        let mut c = Constraint {
            name: "c".into(),
            lhs: LinExpr { terms: vec![(VarId(0), rat(1))], constant: rat(3) },
            sense: Sense::Le,
            rhs: rat(5),
            weight: None,
        };
        c.canonicalize();
        assert_eq!(c.rhs, rat(2));
        assert_eq!(c.lhs.constant, rat(0));
    }

    #[test]
    fn maximize_is_stored_negated() {
        let mut b = MilpModel::builder("m");
        let x = b.binary("x");
        let y = b.integer("y", rat(0), rat(3));
        b.maximize(vec![(x, rat(2)), (y, ratio(1, 2))], rat(0));
        let m = b.build();
        let values = [rat(1), rat(2)];
        assert_eq!(m.objective_value(&values), rat(-3));
        assert_eq!(m.source_objective_value(&values), rat(3));
    }

    #[test]
    fn feasibility_checks_bounds_integrality_and_rows() {
        let mut b = MilpModel::builder("m");
        let x = b.binary("x");
        let y = b.integer("y", rat(0), rat(3));
        b.constraint("c", vec![(x, rat(1)), (y, rat(1))], Sense::Le, rat(3));
        let m = b.build();
        assert!(m.is_feasible(&[rat(1), rat(2)]));
        assert!(!m.is_feasible(&[rat(1), rat(3)]));
        assert!(!m.is_feasible(&[rat(0), ratio(1, 2)]));
        assert_eq!(m.violated(&[rat(1), rat(3)]), vec!["c"]);
    }
}
