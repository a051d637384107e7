//! Multilinear polynomials over binary variables.
//!
//! Monomials are sets of bit indices, so `b·b = b` holds by construction.
//! Penalties are built here and only converted to a [`QuadForm`] after a
//! degree scan.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use malachite_base::num::basic::traits::Zero;

use super::{QuadForm, QuboError};
use crate::num::Rational;

pub type Monomial = Vec<usize>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    pub terms: BTreeMap<Monomial, Rational>,
}

fn union(a: &[usize], b: &[usize]) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl Poly {
    pub fn constant(c: Rational) -> Self {
        let mut p = Poly::default();
        p.add_term(Vec::new(), c);
        p
    }

    pub fn linear<'a>(coefs: impl IntoIterator<Item = (usize, &'a Rational)>, constant: &Rational) -> Self {
        let mut p = Poly::constant(constant.clone());
        for (bit, c) in coefs {
            p.add_term(vec![bit], c.clone());
        }
        p
    }

    pub fn add_term(&mut self, mono: Monomial, coef: Rational) {
        if coef == Rational::ZERO {
            return;
        }
        match self.terms.entry(mono) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += coef;
                if *e.get() == Rational::ZERO {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(coef);
            }
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut acc: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                *acc.entry(union(ma, mb)).or_insert(Rational::ZERO) += ca * cb;
            }
        }
        acc.retain(|_, c| *c != Rational::ZERO);
        Poly { terms: acc }
    }

    pub fn square(&self) -> Poly {
        self.mul(self)
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn eval(&self, bits: &[bool]) -> Rational {
        let mut total = Rational::ZERO;
        for (mono, c) in &self.terms {
            if mono.iter().all(|&b| bits[b]) {
                total += c;
            }
        }
        total
    }

    /// Converts to a quadratic form over `n` bits, rejecting any monomial of
    /// degree three or more.
    pub fn to_quad(&self, n: usize) -> Result<QuadForm, QuboError> {
        let mut q = QuadForm::new(n);
        for (mono, c) in &self.terms {
            match mono.as_slice() {
                [] => q.constant += c,
                [i] => q.add_diag(*i, c),
                [i, j] => q.add_pair(*i, *j, c),
                _ => return Err(QuboError::Degree { degree: mono.len(), bits: mono.clone() }),
            }
        }
        Ok(q)
    }
}
