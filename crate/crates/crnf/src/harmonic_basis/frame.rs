//! Exact matrices of the frame operators Z, Z̄ and T on the basis.
//!
//! Z and Z̄ shift the bidegree by (−1, +1) and (+1, −1) and the frequencies by
//! ∓(1, 1); since every (p, q, m₁) weight space is one-dimensional each column
//! has a single nonzero entry. The image of every basis function is projected
//! through the exact monomial Gram matrix and the leftover mass is recorded.

use std::collections::BTreeMap;

use super::basis::{Basis, Label};
use super::monomial::{inner_f64, Monomial};
use crate::geometry::{AmbientField, Poly, ReferenceGeometry};
use crate::C64;

/// Weighted injective map on basis labels: e_k ↦ factor[k] · e_{target[k]}.
#[derive(Debug, Clone)]
pub struct LabelMap {
    pub target: Vec<Option<usize>>,
    pub factor: Vec<C64>,
}

impl LabelMap {
    pub fn apply(&self, c: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); c.len()];
        for (k, v) in c.iter().enumerate() {
            if let Some(j) = self.target[k] {
                out[j] += self.factor[k] * v;
            }
        }
        out
    }

    /// Dense block of the map restricted to degree ℓ (row = image index).
    pub fn dense_block(&self, basis: &Basis, l: usize) -> nalgebra::DMatrix<C64> {
        let r = basis.blocks[l].clone();
        let n = r.len();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for k in r.clone() {
            if let Some(j) = self.target[k] {
                m[(j - r.start, k - r.start)] = self.factor[k];
            }
        }
        m
    }
}

type MonoPoly = BTreeMap<Monomial, f64>;

fn apply_real(field: &AmbientField, e: &[(Monomial, f64)]) -> MonoPoly {
    let mut p = Poly::zero();
    for (m, c) in e {
        p.add_term(*m, C64::new(*c, 0.0));
    }
    field.apply(&p).0.into_iter().map(|(m, c)| (m, c.re)).collect()
}

fn gram_poly(a: &MonoPoly, b: &[(Monomial, f64)]) -> f64 {
    let mut s = 0.0;
    for (m, x) in a {
        for (n, y) in b {
            s += x * y * inner_f64(m, n);
        }
    }
    s
}

fn norm2_poly(a: &MonoPoly) -> f64 {
    let v: Vec<(Monomial, f64)> = a.iter().map(|(m, c)| (*m, *c)).collect();
    gram_poly(a, &v)
}

/// Builds the label map of a horizontal frame field with label shift `dp`
/// (−1 for Z, +1 for Z̄). Returns the map and the largest relative mass of
/// an image lying outside its target basis function.
pub fn horizontal_map(basis: &Basis, field: &AmbientField, dp: i32) -> (LabelMap, f64) {
    let mut target = Vec::with_capacity(basis.len());
    let mut factor = Vec::with_capacity(basis.len());
    let mut worst: f64 = 0.0;
    for f in &basis.functions {
        let img = apply_real(field, &f.monomials);
        let p = f.label.p as i32 + dp;
        let q = f.label.q as i32 - dp;
        let tgt = if p >= 0 && q >= 0 {
            basis.index_of(Label { p: p as usize, q: q as usize, m1: f.label.m1 + dp })
        } else {
            None
        };
        let n2 = norm2_poly(&img);
        match tgt {
            Some(j) => {
                let lam = gram_poly(&img, &basis.functions[j].monomials);
                worst = worst.max((n2 - lam * lam).abs() / n2.max(1.0));
                target.push(Some(j));
                factor.push(C64::new(lam, 0.0));
            }
            None => {
                worst = worst.max(n2);
                target.push(None);
                factor.push(C64::new(0.0, 0.0));
            }
        }
    }
    (LabelMap { target, factor }, worst)
}

/// Diagonal of T: T e_{p,q} = iκ(p − q) e_{p,q}.
pub fn t_diagonal(basis: &Basis, geom: &ReferenceGeometry) -> Vec<C64> {
    basis
        .functions
        .iter()
        .map(|f| geom.t_eigenvalue(f.label.p, f.label.q))
        .collect()
}
