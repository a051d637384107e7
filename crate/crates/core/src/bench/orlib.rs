//! OR-Library capacitated facility location files (`cap` format).
//!
//! The file is a whitespace-separated token stream with arbitrary line
//! wrapping: `m n`, then `capacity fixed_cost` for each facility, then for
//! each customer its demand followed by `m` allocation costs. Allocation
//! costs are the total cost of serving the customer's whole demand from
//! that facility, so the objective term is `c_ij · x_ij` with `x_ij` the
//! served fraction.

use std::fmt::Write as _;

use thiserror::Error;

use crate::milp::{MilpModel, Sense, VarId};
use crate::num::{parse_decimal, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CflpInstance {
    pub capacity: Vec<Rational>,
    pub fixed: Vec<Rational>,
    pub demand: Vec<Rational>,
    /// `cost[i][j]`: facility `i`, customer `j`.
    pub cost: Vec<Vec<Rational>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrlibError {
    #[error("expected {expected} at token {position}, found end of input")]
    Truncated { expected: &'static str, position: usize },
    #[error("token {position} ({token:?}) is not a number")]
    BadNumber { position: usize, token: String },
    #[error("{extra} trailing tokens after position {position}")]
    Trailing { position: usize, extra: usize },
    #[error("{what} {index} must be positive")]
    NonPositive { what: &'static str, index: usize },
    #[error("header must give positive facility and customer counts")]
    BadHeader,
}

impl CflpInstance {
    pub fn m(&self) -> usize {
        self.capacity.len()
    }

    pub fn n(&self) -> usize {
        self.demand.len()
    }

    pub fn total_demand(&self) -> Rational {
        self.demand.iter().sum()
    }
}

struct Tokens<'a> {
    it: std::iter::Enumerate<std::str::SplitWhitespace<'a>>,
    position: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self, expected: &'static str) -> Result<Rational, OrlibError> {
        let (i, tok) = self.it.next().ok_or(OrlibError::Truncated { expected, position: self.position })?;
        self.position = i + 1;
        parse_decimal(tok).ok_or_else(|| OrlibError::BadNumber { position: i, token: tok.to_string() })
    }

    fn count(&mut self, expected: &'static str) -> Result<usize, OrlibError> {
        let v = self.next(expected)?;
        if v <= 0 || v > 1_000_000 || !crate::num::is_integer(&v) {
            return Err(OrlibError::BadHeader);
        }
        Ok(crate::num::to_f64(&v) as usize)
    }
}

pub fn parse_orlib_cap(text: &str) -> Result<CflpInstance, OrlibError> {
    let mut t = Tokens { it: text.split_whitespace().enumerate(), position: 0 };
    let m = t.count("facility count")?;
    let n = t.count("customer count")?;
    let mut capacity = Vec::with_capacity(m);
    let mut fixed = Vec::with_capacity(m);
    for i in 0..m {
        let c = t.next("capacity")?;
        if c <= 0 {
            return Err(OrlibError::NonPositive { what: "capacity of facility", index: i });
        }
        capacity.push(c);
        fixed.push(t.next("fixed cost")?);
    }
    let mut demand = Vec::with_capacity(n);
    let mut cost = vec![Vec::with_capacity(n); m];
    for j in 0..n {
        let d = t.next("demand")?;
        if d <= 0 {
            return Err(OrlibError::NonPositive { what: "demand of customer", index: j });
        }
        demand.push(d);
        for row in cost.iter_mut() {
            row.push(t.next("allocation cost")?);
        }
    }
    let extra = t.it.count();
    if extra > 0 {
        return Err(OrlibError::Trailing { position: t.position, extra });
    }
    Ok(CflpInstance { capacity, fixed, demand, cost })
}

pub fn write_orlib_cap(inst: &CflpInstance) -> String {
    let mut out = format!("{} {}\n", inst.m(), inst.n());
    for (c, f) in inst.capacity.iter().zip(&inst.fixed) {
        let _ = writeln!(out, "{c} {f}");
    }
    for j in 0..inst.n() {
        let _ = write!(out, "{}", inst.demand[j]);
        for row in &inst.cost {
            let _ = write!(out, " {}", row[j]);
        }
        out.push('\n');
    }
    out
}

/// `min Σ f_i y_i + Σ c_ij x_ij` subject to `Σ_i x_ij = 1`, `x_ij ≤ y_i`
/// and `Σ_j d_j x_ij ≤ C_i y_i`, with `y` binary and `x ∈ [0, 1]`.
pub fn cflp_to_milp(inst: &CflpInstance, name: &str) -> MilpModel {
    let (m, n) = (inst.m(), inst.n());
    let mut b = MilpModel::builder(name);
    let y: Vec<VarId> = (0..m).map(|i| b.binary(format!("y{i}"))).collect();
    let x: Vec<Vec<VarId>> = (0..m)
        .map(|i| (0..n).map(|j| b.continuous(format!("x{i}_{j}"), Rational::from(0), Rational::from(1))).collect())
        .collect();
    let mut obj: Vec<(VarId, Rational)> = y.iter().zip(&inst.fixed).map(|(v, f)| (*v, f.clone())).collect();
    for i in 0..m {
        for j in 0..n {
            obj.push((x[i][j], inst.cost[i][j].clone()));
        }
    }
    b.minimize(obj, Rational::from(0));
    for j in 0..n {
        b.constraint(format!("serve{j}"), (0..m).map(|i| (x[i][j], Rational::from(1))).collect(), Sense::Eq, Rational::from(1));
    }
    for i in 0..m {
        for j in 0..n {
            b.constraint(
                format!("link{i}_{j}"),
                vec![(x[i][j], Rational::from(1)), (y[i], Rational::from(-1))],
                Sense::Le,
                Rational::from(0),
            );
        }
    }
    for i in 0..m {
        let mut terms: Vec<(VarId, Rational)> = (0..n).map(|j| (x[i][j], inst.demand[j].clone())).collect();
        terms.push((y[i], -inst.capacity[i].clone()));
        b.constraint(format!("cap{i}"), terms, Sense::Le, Rational::from(0));
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    const FIXTURE: &str = "2 2\n10 100\n10 100\n5 1 2\n5 2 1\n";

    #[test]
    fn fixture_fields() {
        let inst = parse_orlib_cap(FIXTURE).unwrap();
        assert_eq!((inst.m(), inst.n()), (2, 2));
        assert_eq!(inst.capacity, vec![rat(10), rat(10)]);
        assert_eq!(inst.fixed, vec![rat(100), rat(100)]);
        assert_eq!(inst.demand, vec![rat(5), rat(5)]);
        assert_eq!(inst.cost, vec![vec![rat(1), rat(2)], vec![rat(2), rat(1)]]);
    }

    #[test]
    fn wrapping_is_ignored() {
        let wrapped = "2\n2 10\n100 10 100 5 1\n2\n5 2\n 1";
        assert_eq!(parse_orlib_cap(wrapped).unwrap(), parse_orlib_cap(FIXTURE).unwrap());
    }

    #[test]
    fn decimal_tokens() {
        let inst = parse_orlib_cap("1 1 7.5 10.25 3 4.5").unwrap();
        assert_eq!(inst.fixed[0], crate::num::ratio(41, 4));
        assert_eq!(inst.cost[0][0], crate::num::ratio(9, 2));
    }

    #[test]
    fn truncated_reports_position() {
        let err = parse_orlib_cap("2 2\n10 100\n10 100\n5 1 2\n5 2").unwrap_err();
        assert_eq!(err, OrlibError::Truncated { expected: "allocation cost", position: 11 });
        assert!(err.to_string().contains("token 11"));
    }

    #[test]
    fn trailing_and_nonpositive() {
        assert!(matches!(parse_orlib_cap(&format!("{FIXTURE} 9")), Err(OrlibError::Trailing { extra: 1, .. })));
        assert!(matches!(
            parse_orlib_cap("1 1 0 5 3 1"),
            Err(OrlibError::NonPositive { what: "capacity of facility", index: 0 })
        ));
        assert!(matches!(parse_orlib_cap("1 1 4 5 -3 1"), Err(OrlibError::NonPositive { .. })));
        assert!(matches!(parse_orlib_cap("0 1"), Err(OrlibError::BadHeader)));
        assert!(matches!(parse_orlib_cap("1 x"), Err(OrlibError::BadNumber { position: 1, .. })));
    }

    #[test]
    fn write_round_trips() {
        let inst = parse_orlib_cap(FIXTURE).unwrap();
        assert_eq!(write_orlib_cap(&inst), FIXTURE);
    }

    #[test]
    fn model_counts() {
        let model = cflp_to_milp(&parse_orlib_cap(FIXTURE).unwrap(), "fixture");
        assert_eq!(model.num_vars(), 2 + 4);
        assert_eq!(model.constraints.len(), 2 + 4 + 2);
        assert_eq!(model.count_kind(crate::milp::VarKind::Binary), 2);
    }

    #[test]
    fn single_facility_must_open() {
        let inst = parse_orlib_cap("1 2 20 50 4 3 6 2").unwrap();
        let model = cflp_to_milp(&inst, "one");
        let closed = vec![rat(0), rat(1), rat(1)];
        assert!(!model.is_feasible(&closed));
        let open = vec![rat(1), rat(1), rat(1)];
        assert!(model.is_feasible(&open));
    }
}
