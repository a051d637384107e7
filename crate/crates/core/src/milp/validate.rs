use std::collections::HashSet;
use std::fmt;

use malachite_base::num::basic::traits::{One, Zero};

use super::{LinExpr, MilpModel, VarKind};
use crate::num::{is_integer, Rational};

/// One invariant violation, named by the variable or constraint it concerns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

/// Checks every model invariant. An empty list means the model is valid.
pub fn validate(model: &MilpModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |subject: &str, message: String| {
        out.push(Diagnostic { subject: subject.to_string(), message })
    };

    let mut seen = HashSet::new();
    for v in &model.variables {
        if v.name.is_empty() {
            push("<unnamed>", "variable has an empty name".into());
        }
        if !seen.insert(v.name.as_str()) {
            push(&v.name, "duplicate variable name".into());
        }
        if v.lb > v.ub {
            push(&v.name, format!("lower bound {} exceeds upper bound {}", v.lb, v.ub));
        }
        match v.kind {
            VarKind::Binary => {
                if v.lb != Rational::ZERO || v.ub != Rational::ONE {
                    push(&v.name, format!("binary variable must have bounds [0, 1], got [{}, {}]", v.lb, v.ub));
                }
            }
            VarKind::Integer => {
                if !is_integer(&v.lb) || !is_integer(&v.ub) {
                    push(&v.name, format!("integer variable has fractional bounds [{}, {}]", v.lb, v.ub));
                }
            }
            VarKind::Continuous => {}
        }
    }

    let n = model.variables.len();
    let check_expr = |subject: &str, e: &LinExpr, out: &mut Vec<Diagnostic>| {
        for (var, _) in &e.terms {
            if var.0 >= n {
                out.push(Diagnostic {
                    subject: subject.to_string(),
                    message: format!("term references undeclared variable #{}", var.0),
                });
            }
        }
        if !e.is_canonical() {
            out.push(Diagnostic {
                subject: subject.to_string(),
                message: "expression is not canonical (repeated, unsorted or zero terms)".into(),
            });
        }
    };
    check_expr("objective", &model.objective, &mut out);

    let mut names = HashSet::new();
    for c in &model.constraints {
        if !names.insert(c.name.as_str()) {
            out.push(Diagnostic { subject: c.name.clone(), message: "duplicate constraint name".into() });
        }
        check_expr(&c.name, &c.lhs, &mut out);
        if c.lhs.constant != Rational::ZERO {
            out.push(Diagnostic {
                subject: c.name.clone(),
                message: "left-hand constant was not folded into the right-hand side".into(),
            });
        }
        if let Some(w) = &c.weight {
            if *w <= Rational::ZERO {
                out.push(Diagnostic { subject: c.name.clone(), message: format!("weight {w} is not positive") });
            }
        }
    }
    out
}
