//! Text form of a compiled QUBO.
//!
//! ```text
//! #vars 5
//! #constant 16
//! #weight cap 9
//! #bit 0 x1 binary 1 0
//! #bit 2 cap slack 1 0
//! #fixed z 3
//! 0 0 -55
//! 0 1 12
//! ```
//!
//! `#fixed` lines record variables whose domain is a single point and so own
//! no bits. Body triplets are `i j value` with `i ≤ j`, sorted.

use std::fmt::Write as _;

use super::{QuadForm, QuboArtifact, QuboError};
use crate::binarize::Role;
use crate::num::{parse_number, Number, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitLine {
    pub id: usize,
    pub owner: String,
    pub role: Role,
    pub weight: Rational,
    pub offset: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArtifactFile {
    pub form: QuadForm,
    pub weights: Vec<(String, Rational)>,
    pub bits: Vec<BitLine>,
    pub fixed: Vec<(String, Rational)>,
}

impl ArtifactFile {
    pub fn from_artifact(a: &QuboArtifact) -> Self {
        let mut bits = Vec::with_capacity(a.n());
        let mut fixed = Vec::new();
        for g in &a.plan.groups {
            if g.is_empty() && g.role != Role::Slack {
                fixed.push((g.owner.clone(), g.offset.clone()));
            }
            for (id, w) in g.bit_ids().zip(&g.weights) {
                bits.push(BitLine {
                    id,
                    owner: g.owner.clone(),
                    role: g.role,
                    weight: w.clone(),
                    offset: g.offset.clone(),
                });
            }
        }
        bits.sort_by_key(|b| b.id);
        ArtifactFile {
            form: a.assembled().clone(),
            weights: a.penalties.iter().map(|p| (p.constraint.clone(), p.weight.clone())).collect(),
            bits,
            fixed,
        }
    }

    pub fn n(&self) -> usize {
        self.form.n
    }

    /// Values per owner in order of first appearance, then fixed variables.
    /// Slack owners are returned separately.
    pub fn decode(&self, assignment: &[bool]) -> Result<(Vec<(String, Rational)>, Vec<(String, Rational)>), QuboError> {
        if assignment.len() != self.n() {
            return Err(QuboError::LengthMismatch { expected: self.n(), got: assignment.len() });
        }
        let mut vars: Vec<(String, Rational)> = Vec::new();
        let mut slacks: Vec<(String, Rational)> = Vec::new();
        for b in &self.bits {
            let list = if b.role == Role::Slack { &mut slacks } else { &mut vars };
            let pos = match list.iter().position(|(o, _)| *o == b.owner) {
                Some(p) => p,
                None => {
                    list.push((b.owner.clone(), b.offset.clone()));
                    list.len() - 1
                }
            };
            if assignment[b.id] {
                list[pos].1 += &b.weight;
            }
        }
        vars.extend(self.fixed.iter().cloned());
        Ok((vars, slacks))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "#vars {}", self.form.n).unwrap();
        writeln!(s, "#constant {}", self.form.constant).unwrap();
        for (name, w) in &self.weights {
            writeln!(s, "#weight {name} {w}").unwrap();
        }
        for b in &self.bits {
            writeln!(s, "#bit {} {} {} {} {}", b.id, b.owner, b.role, b.weight, b.offset).unwrap();
        }
        for (name, v) in &self.fixed {
            writeln!(s, "#fixed {name} {v}").unwrap();
        }
        for (i, j, v) in self.form.entries() {
            writeln!(s, "{i} {j} {v}").unwrap();
        }
        s
    }
}

pub fn write_artifact(a: &QuboArtifact) -> String {
    ArtifactFile::from_artifact(a).to_text()
}

pub fn read_artifact(text: &str) -> Result<ArtifactFile, QuboError> {
    let bad = |line: usize, message: String| QuboError::Artifact { line, message };
    let num = |tok: Option<&str>, line: usize| -> Result<Rational, QuboError> {
        let tok = tok.ok_or_else(|| bad(line, "missing value".into()))?;
        match parse_number(tok) {
            Some(Number::Finite(r)) => Ok(r),
            _ => Err(bad(line, format!("invalid number {tok:?}"))),
        }
    };
    let index = |tok: Option<&str>, line: usize| -> Result<usize, QuboError> {
        let tok = tok.ok_or_else(|| bad(line, "missing index".into()))?;
        tok.parse().map_err(|_| bad(line, format!("invalid index {tok:?}")))
    };

    let mut n = None;
    let mut form = QuadForm::default();
    let mut weights = Vec::new();
    let mut bits = Vec::new();
    let mut fixed = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let mut toks = raw.split_whitespace();
        let head = toks.next().unwrap();
        match head {
            "#vars" => n = Some(index(toks.next(), line)?),
            "#constant" => form.constant = num(toks.next(), line)?,
            "#weight" => {
                let name = toks.next().ok_or_else(|| bad(line, "missing constraint name".into()))?;
                weights.push((name.to_string(), num(toks.next(), line)?));
            }
            "#bit" => {
                let id = index(toks.next(), line)?;
                let owner = toks.next().ok_or_else(|| bad(line, "missing owner".into()))?.to_string();
                let role_tok = toks.next().ok_or_else(|| bad(line, "missing role".into()))?;
                let role = Role::parse(role_tok).ok_or_else(|| bad(line, format!("unknown role {role_tok:?}")))?;
                let weight = num(toks.next(), line)?;
                let offset = num(toks.next(), line)?;
                bits.push(BitLine { id, owner, role, weight, offset });
            }
            "#fixed" => {
                let name = toks.next().ok_or_else(|| bad(line, "missing owner".into()))?;
                fixed.push((name.to_string(), num(toks.next(), line)?));
            }
            h if h.starts_with('#') => return Err(bad(line, format!("unknown header {h:?}"))),
            _ => {
                let i = index(Some(head), line)?;
                let j = index(toks.next(), line)?;
                let v = num(toks.next(), line)?;
                if i > j {
                    return Err(bad(line, format!("entry ({i}, {j}) is below the diagonal")));
                }
                form.add_pair(i, j, &v);
            }
        }
        if toks.next().is_some() {
            return Err(bad(line, "trailing tokens".into()));
        }
    }
    let n = n.ok_or_else(|| bad(0, "missing #vars header".into()))?;
    form.n = n;
    if !form.is_well_formed() {
        return Err(bad(0, format!("entry index out of range for {n} bits")));
    }
    bits.sort_by_key(|b: &BitLine| b.id);
    if bits.iter().enumerate().any(|(k, b)| b.id != k) || bits.len() != n {
        return Err(bad(0, format!("#bit lines must cover ids 0..{n} exactly once")));
    }
    Ok(ArtifactFile { form, weights, bits, fixed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{MilpModel, Sense};
    use crate::num::rat;
    use crate::qubo::{compile, CompileConfig};

    fn knapsack() -> QuboArtifact {
        let mut b = MilpModel::builder("k");
        let x1 = b.binary("x1");
        let x2 = b.binary("x2");
        let z = b.integer("z", rat(3), rat(3));
        b.maximize(vec![(x1, rat(2)), (x2, rat(3)), (z, rat(1))], rat(0));
        b.constraint("cap", vec![(x1, rat(2)), (x2, rat(3))], Sense::Le, rat(4));
        compile(&b.build(), &CompileConfig::default()).unwrap()
    }

    #[test]
    fn text_round_trip() {
        let a = knapsack();
        let text = write_artifact(&a);
        assert!(text.starts_with("#vars 5\n"));
        assert!(text.contains("#weight cap 6\n"));
        assert!(text.contains("#bit 2 cap slack 1 0\n"));
        assert!(text.contains("#fixed z 3\n"));
        let file = read_artifact(&text).unwrap();
        assert_eq!(file, ArtifactFile::from_artifact(&a));
        assert_eq!(file.to_text(), text);
    }

    #[test]
    fn decode_reports_slacks_apart() {
        let file = ArtifactFile::from_artifact(&knapsack());
        let (vars, slacks) = file.decode(&[true, false, false, true, false]).unwrap();
        assert_eq!(vars, vec![("x1".into(), rat(1)), ("x2".into(), rat(0)), ("z".into(), rat(3))]);
        assert_eq!(slacks, vec![("cap".into(), rat(2))]);
        assert!(file.decode(&[true]).is_err());
    }

    #[test]
    fn malformed_files() {
        assert!(matches!(read_artifact("0 0 1\n"), Err(QuboError::Artifact { .. })));
        let below = "#vars 2\n#bit 0 a binary 1 0\n#bit 1 b binary 1 0\n1 0 3\n";
        assert!(matches!(read_artifact(below), Err(QuboError::Artifact { line: 4, .. })));
        let gap = "#vars 2\n#bit 0 a binary 1 0\n";
        assert!(read_artifact(gap).is_err());
    }
}
