//! Constraints with a slack-free quadratic penalty.
//!
//! Rows are matched after [`scale_constraint`] has divided out the
//! coefficient GCD, so `3x + 3y ≤ 4` is recognized as `x + y ≤ 1`.

use malachite_base::num::basic::traits::One;

use super::QuadForm;
use crate::binarize::{scale_constraint, EncodingPlan, IntegerRow, RowSense, ScaledRow};
use crate::milp::Constraint;
use crate::num::{Integer, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Special {
    /// `b_i + b_j ≤ 1`, penalized by `b_i·b_j`.
    Exclusion(usize, usize),
    /// `b_x ≤ b_y`, penalized by `b_x·(1 − b_y)`.
    Indicator { x: usize, y: usize },
}

pub fn classify(row: &IntegerRow) -> Option<Special> {
    if row.sense != RowSense::Le || row.coefs.len() != 2 {
        return None;
    }
    let (i, a) = (&row.coefs[0].0, &row.coefs[0].1);
    let (j, b) = (&row.coefs[1].0, &row.coefs[1].1);
    let one = Integer::from(1);
    let minus_one = Integer::from(-1);
    if *a == one && *b == one && row.rhs == one {
        return Some(Special::Exclusion(*i, *j));
    }
    if row.rhs == Integer::from(0) {
        if *a == one && *b == minus_one {
            return Some(Special::Indicator { x: *i, y: *j });
        }
        if *a == minus_one && *b == one {
            return Some(Special::Indicator { x: *j, y: *i });
        }
    }
    None
}

pub fn penalty(special: Special, n: usize) -> QuadForm {
    let mut q = QuadForm::new(n);
    match special {
        Special::Exclusion(i, j) => q.add_pair(i, j, &Rational::ONE),
        Special::Indicator { x, y } => {
            q.add_diag(x, &Rational::ONE);
            q.add_pair(x, y, &-Rational::ONE);
        }
    }
    q
}

/// Recognizes pairwise exclusion and indicator rows; `None` sends the
/// constraint down the generic slack path.
pub fn detect_special(c: &Constraint, plan: &EncodingPlan) -> Option<(Special, QuadForm)> {
    match scale_constraint(c, plan) {
        ScaledRow::Row(row) => classify(&row).map(|s| (s, penalty(s, plan.total_bits))),
        _ => None,
    }
}
