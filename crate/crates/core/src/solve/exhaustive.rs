use super::{BitAssignment, FieldValue, LocalFields, Method, SolveError, SolverResult};
use crate::num::{abs, denominator_lcm, to_integer, Rational};
use crate::qubo::QuadForm;

pub const EXHAUSTIVE_CAP: usize = 25;

pub fn solve_exhaustive(q: &QuadForm) -> Result<SolverResult, SolveError> {
    solve_exhaustive_capped(q, EXHAUSTIVE_CAP)
}

/// Gray-code enumeration of all `2^n` patterns. Ties resolve to the
/// lexicographically smallest bit vector (bit 0 most significant).
pub fn solve_exhaustive_capped(q: &QuadForm, cap: usize) -> Result<SolverResult, SolveError> {
    let n = q.n;
    if n > cap || n > 60 {
        return Err(SolveError::TooLarge { n, cap });
    }
    let mask = match scaled_i128(q) {
        Some((diag, pairs, constant)) => gray_search(LocalFields::new(n, 0i128, constant, &diag, &pairs), n),
        None => gray_search(LocalFields::exact(q), n),
    };
    let bits: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
    let energy = q.eval(&bits);
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

type Scaled = (Vec<(usize, i128)>, Vec<(usize, usize, i128)>, i128);

/// Integer copy of `q` scaled by the LCM of its denominators, if every
/// reachable partial sum fits comfortably in `i128`.
fn scaled_i128(q: &QuadForm) -> Option<Scaled> {
    let all = || q.diag.values().chain(q.offdiag.values()).chain(std::iter::once(&q.constant));
    let scale = Rational::from(denominator_lcm(all()));
    let total: Rational = all().map(|v| abs(v) * &scale).sum();
    if total >= Rational::from(1u128 << 120) {
        return None;
    }
    let conv = |v: &Rational| -> i128 { i128::try_from(&to_integer(&(v * &scale))).expect("bounded") };
    let diag = q.diag.iter().map(|(i, v)| (*i, conv(v))).collect();
    let pairs = q.offdiag.iter().map(|((i, j), v)| (*i, *j, conv(v))).collect();
    Some((diag, pairs, conv(&q.constant)))
}

fn lex_key(mask: u64, n: usize) -> u64 {
    if n == 0 {
        0
    } else {
        mask.reverse_bits() >> (64 - n)
    }
}

fn gray_search<T: FieldValue>(mut lf: LocalFields<T>, n: usize) -> u64 {
    let mut best = lf.energy().clone();
    let mut best_mask = 0u64;
    let mut mask = 0u64;
    for k in 1u64..(1u64 << n) {
        let i = k.trailing_zeros() as usize;
        lf.flip(i);
        mask ^= 1 << i;
        let e = lf.energy();
        if *e < best || (*e == best && lex_key(mask, n) < lex_key(best_mask, n)) {
            best = e.clone();
            best_mask = mask;
        }
    }
    best_mask
}
