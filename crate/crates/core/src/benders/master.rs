//! Master problem: the QUBO artifact and the exact relaxed bounds.

use malachite_base::num::basic::traits::{One, Zero};

use super::{BendersError, Cut, CutKind, Partition};
use crate::binarize::{integer_weights, PlanConfig};
use crate::lp::{solve_lp_with, LpMethod, LpProblem, LpStatus};
use crate::milp::{MilpModel, Sense, VarId, VarKind, Variable};
use crate::num::{denominator_lcm, floor, to_integer, Integer, Natural, Rational};
use crate::qubo::{compile, CompileConfig, PenaltyPolicy, QuboArtifact};

#[derive(Clone, Debug)]
pub struct MasterArtifact {
    /// `min f·y + η` over master-only rows and the cut pool.
    pub model: MilpModel,
    pub artifact: QuboArtifact,
    /// Index of `η` in `model.variables`, absent before the first incumbent.
    pub eta: Option<usize>,
    /// Group index of `η` in the encoding plan.
    pub eta_group: Option<usize>,
    pub eta_step: Option<Rational>,
}

impl MasterArtifact {
    pub fn bits(&self) -> usize {
        self.artifact.n()
    }

    /// Master values `y` and `η` decoded from a bit assignment.
    pub fn decode(&self, bits: &[bool], masters: usize) -> (Vec<Rational>, Option<Rational>) {
        let values = self.artifact.plan.decode_vars(bits);
        let eta = self.eta.map(|e| values[e].clone());
        (values[..masters].to_vec(), eta)
    }
}

fn eta_name(p: &Partition) -> String {
    let mut name = String::from("eta");
    while p.master_defs.iter().any(|d| d.name == name) {
        name.insert(0, '_');
    }
    name
}

/// Builds and compiles the master for the current cut pool. `eta` is
/// `Some((η_lo, η_hi))` once an incumbent fixes the grid.
pub fn build_master(
    p: &Partition,
    cuts: &[Cut],
    eta: Option<(&Rational, &Rational)>,
    plan: &PlanConfig,
    penalty: &PenaltyPolicy,
) -> Result<MasterArtifact, BendersError> {
    if let Some((lo, hi)) = eta {
        if hi < lo {
            return Err(BendersError::EtaBounds { lo: lo.clone(), hi: hi.clone() });
        }
    }
    let mut b = MilpModel::builder("master");
    let ys: Vec<VarId> = p
        .master_defs
        .iter()
        .map(|d| b.variable(Variable { partition: None, ..d.clone() }))
        .collect();
    let eta_var = eta.map(|(lo, hi)| b.continuous(eta_name(p), lo.clone(), hi.clone()));
    let mut obj: Vec<(VarId, Rational)> = ys.iter().zip(&p.f).map(|(y, f)| (*y, f.clone())).collect();
    if let Some(e) = eta_var {
        obj.push((e, Rational::ONE));
    }
    b.minimize(obj, p.constant.clone());
    for row in &p.master_only {
        b.constraint(row.name.clone(), row.coefs.iter().map(|(k, a)| (ys[*k], a.clone())).collect(), row.sense, row.rhs.clone());
        if let Some(w) = &row.weight {
            b.weight_last(w.clone());
        }
    }
    for (i, cut) in cuts.iter().enumerate() {
        let mut terms: Vec<(VarId, Rational)> = cut.coefs.iter().map(|(k, a)| (ys[*k], a.clone())).collect();
        if cut.kind == CutKind::Optimality {
            match eta_var {
                Some(e) => terms.push((e, Rational::ONE)),
                None => continue,
            }
        }
        b.constraint(format!("cut{i}_{}", cut.kind.as_str()), terms, Sense::Ge, cut.rhs.clone());
    }
    let model = b.build();
    let config = CompileConfig { plan: *plan, penalty: penalty.clone() };
    let artifact = compile(&model, &config)?;
    let eta_idx = eta_var.map(|v| v.0);
    let eta_group = eta_idx.map(|i| artifact.plan.var_groups[i]);
    let eta_step = eta_group.and_then(|g| artifact.plan.groups[g].weights.first().cloned());
    Ok(MasterArtifact { model, artifact, eta: eta_idx, eta_group, eta_step })
}

/// Optimum of the master with `η` continuous: `f·y + max(η_lo, cuts(y))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relaxed {
    /// Includes the model's objective constant.
    pub value: Rational,
    pub y: Vec<Rational>,
}

/// Exact relaxed master by Gray-code enumeration of the master domain.
/// `None` when no `y` satisfies the master rows and feasibility cuts.
pub fn relaxed_exhaustive(
    p: &Partition,
    cuts: &[Cut],
    eta_lo: &Rational,
    cap: usize,
) -> Result<Option<Relaxed>, BendersError> {
    let m = p.master_defs.len();
    // (master position, weight) per enumerated bit.
    let mut bits: Vec<(usize, Rational)> = Vec::new();
    for (k, d) in p.master_defs.iter().enumerate() {
        match d.kind {
            VarKind::Binary => bits.push((k, Rational::ONE)),
            _ => {
                let u = Natural::try_from(to_integer(&d.range())).expect("integral master range");
                bits.extend(integer_weights(&u).into_iter().map(|w| (k, w)));
            }
        }
    }
    if bits.len() > cap || bits.len() > 60 {
        return Err(BendersError::MasterTooLarge { bits: bits.len(), cap });
    }

    struct Form {
        coefs: Vec<Rational>,
        /// `None` for the objective and optimality cuts.
        check: Option<(Sense, Rational)>,
    }
    let dense = |sparse: &[(usize, Rational)]| {
        let mut v = vec![Rational::ZERO; m];
        for (k, a) in sparse {
            v[*k] += a;
        }
        v
    };
    let mut forms = vec![Form { coefs: p.f.clone(), check: None }];
    let mut opt_rhs = Vec::new();
    for cut in cuts {
        if cut.kind == CutKind::Optimality {
            forms.push(Form { coefs: dense(&cut.coefs), check: None });
            opt_rhs.push((forms.len() - 1, cut.rhs.clone()));
        } else {
            forms.push(Form { coefs: dense(&cut.coefs), check: Some((Sense::Ge, cut.rhs.clone())) });
        }
    }
    for row in &p.master_only {
        forms.push(Form { coefs: dense(&row.coefs), check: Some((row.sense, row.rhs.clone())) });
    }

    let scale_src: Vec<Rational> = forms
        .iter()
        .flat_map(|f| {
            f.coefs.iter().flat_map(|c| {
                std::iter::once(c.clone())
                    .chain(bits.iter().map(move |(_, w)| c * w))
                    .chain(p.master_defs.iter().map(move |d| c * &d.lb))
            })
        })
        .chain(forms.iter().filter_map(|f| f.check.as_ref().map(|(_, r)| r.clone())))
        .chain(opt_rhs.iter().map(|(_, r)| r.clone()))
        .chain(std::iter::once(eta_lo.clone()))
        .collect();
    let scale = Rational::from(denominator_lcm(&scale_src));
    let int = |v: &Rational| to_integer(&(v * &scale));

    let lb: Vec<Rational> = p.master_defs.iter().map(|d| d.lb.clone()).collect();
    let mut vals: Vec<Integer> = forms
        .iter()
        .map(|f| int(&f.coefs.iter().zip(&lb).map(|(c, l)| c * l).sum::<Rational>()))
        .collect();
    let deltas: Vec<Vec<(usize, Integer)>> = bits
        .iter()
        .map(|(k, w)| {
            forms
                .iter()
                .enumerate()
                .filter(|(_, f)| f.coefs[*k] != 0)
                .map(|(i, f)| (i, int(&(&f.coefs[*k] * w))))
                .collect()
        })
        .collect();
    let checks: Vec<Option<(Sense, Integer)>> = forms.iter().map(|f| f.check.as_ref().map(|(s, r)| (*s, int(r)))).collect();
    let holds = |i: usize, v: &Integer| match &checks[i] {
        Some((s, r)) => match s {
            Sense::Le => v <= r,
            Sense::Eq => v == r,
            Sense::Ge => v >= r,
        },
        None => true,
    };
    let mut violated: usize = (0..forms.len()).filter(|&i| !holds(i, &vals[i])).count();
    let opt: Vec<(usize, Integer)> = opt_rhs.iter().map(|(i, r)| (*i, int(r))).collect();
    let floor_s = int(eta_lo);

    let value = |vals: &[Integer]| -> Integer {
        let mut eta = floor_s.clone();
        for (i, r) in &opt {
            let need = r - &vals[*i];
            if need > eta {
                eta = need;
            }
        }
        &vals[0] + eta
    };

    let mut best: Option<(Integer, u64)> = (violated == 0).then(|| (value(&vals), 0));
    let mut mask = 0u64;
    let mut on = vec![false; bits.len()];
    for step in 1u64..(1u64 << bits.len()) {
        let b = step.trailing_zeros() as usize;
        mask ^= 1 << b;
        on[b] = !on[b];
        for (i, d) in &deltas[b] {
            let before = holds(*i, &vals[*i]);
            if on[b] {
                vals[*i] += d;
            } else {
                vals[*i] -= d;
            }
            let after = holds(*i, &vals[*i]);
            if before && !after {
                violated += 1;
            } else if !before && after {
                violated -= 1;
            }
        }
        if violated == 0 {
            let v = value(&vals);
            if best.as_ref().map_or(true, |(bv, _)| v < *bv) {
                best = Some((v, mask));
            }
        }
    }
    Ok(best.map(|(v, mask)| {
        let mut y = lb;
        for (i, (k, w)) in bits.iter().enumerate() {
            if mask >> i & 1 == 1 {
                y[*k] += w;
            }
        }
        Relaxed { value: Rational::from(v) / &scale + &p.constant, y }
    }))
}

/// LP relaxation of the master (`y` continuous within bounds, `η ≥ η_lo`).
pub fn relaxed_lp(p: &Partition, cuts: &[Cut], eta_lo: &Rational) -> Option<Relaxed> {
    let m = p.master_defs.len();
    let mut lp = LpProblem::new();
    for (k, d) in p.master_defs.iter().enumerate() {
        lp.add_column(d.name.clone(), p.f[k].clone(), Some(d.range()));
    }
    let eta = lp.add_column("eta", Rational::ONE, None);
    let shift = |coefs: &[(usize, Rational)]| -> Rational { coefs.iter().map(|(k, a)| a * &p.master_defs[*k].lb).sum() };
    for row in &p.master_only {
        lp.add_row(row.name.clone(), row.coefs.clone(), row.sense, &row.rhs - shift(&row.coefs));
    }
    for (i, cut) in cuts.iter().enumerate() {
        let mut coefs = cut.coefs.clone();
        let mut rhs = &cut.rhs - shift(&cut.coefs);
        if cut.kind == CutKind::Optimality {
            coefs.push((eta, Rational::ONE));
            rhs -= eta_lo;
        }
        lp.add_row(format!("cut{i}"), coefs, Sense::Ge, rhs);
    }
    let s = solve_lp_with(&lp, LpMethod::Simplex);
    if s.status != LpStatus::Optimal {
        return None;
    }
    let y: Vec<Rational> = (0..m).map(|k| &s.x[k] + &p.master_defs[k].lb).collect();
    let value = &s.objective + p.master_cost(&lb_vec(p)) + eta_lo + &p.constant;
    Some(Relaxed { value, y })
}

fn lb_vec(p: &Partition) -> Vec<Rational> {
    p.master_defs.iter().map(|d| d.lb.clone()).collect()
}

/// Nearest integer point, halves rounded up.
pub fn round_point(y: &[Rational]) -> Vec<Rational> {
    let half = Rational::ONE / Rational::from(2);
    y.iter().map(|v| Rational::from(floor(&(v + &half)))).collect()
}
