//! The tangential Cauchy-Riemann operator suite as exact per-degree matrices.
//!
//! Scalars: ∂̄_b f = (Z̄f) ω̄. Fields V = fT + hZ: ∂̄_b V = π_{1,0}[Z̄, V] with
//! components (p, q) on (ω̄⊗T, ω̄⊗Z). Homotopy operators are pseudo-inverses
//! and orthogonal projections per degree block.

use std::sync::{Arc, Mutex, OnceLock};
use std::collections::HashMap;

use nalgebra::Cholesky;

use crate::harmonic_basis::{SpectralScalar, SpectralSpace};
use crate::linalg::{BlockOp, CMat};
use crate::C64;

/// Relative singular-value cutoff of every pseudo-inverse.
pub const PINV_CUTOFF: f64 = 1e-9;

/// α = a ω̄.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarForm01 {
    pub a: SpectralScalar,
}

/// V = fT + hZ.
#[derive(Debug, Clone, PartialEq)]
pub struct HolField {
    pub f: SpectralScalar,
    pub h: SpectralScalar,
}

/// Φ = (p ω̄)⊗T + (q ω̄)⊗Z.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldForm01 {
    pub p: SpectralScalar,
    pub q: SpectralScalar,
}

impl HolField {
    pub fn add(&self, o: &Self) -> Self {
        HolField { f: self.f.add(&o.f), h: self.h.add(&o.h) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        HolField { f: self.f.sub(&o.f), h: self.h.sub(&o.h) }
    }

    pub fn scale(&self, s: C64) -> Self {
        HolField { f: self.f.scale(s), h: self.h.scale(s) }
    }

    pub fn l2(&self) -> f64 {
        (self.f.l2().powi(2) + self.h.l2().powi(2)).sqrt()
    }
}

impl FieldForm01 {
    /// The H-valued form q ω̄⊗Z.
    pub fn horizontal(q: SpectralScalar) -> Self {
        FieldForm01 { p: SpectralScalar::zeros(q.degree, q.len()), q }
    }

    pub fn add(&self, o: &Self) -> Self {
        FieldForm01 { p: self.p.add(&o.p), q: self.q.add(&o.q) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        FieldForm01 { p: self.p.sub(&o.p), q: self.q.sub(&o.q) }
    }

    pub fn scale(&self, s: C64) -> Self {
        FieldForm01 { p: self.p.scale(s), q: self.q.scale(s) }
    }

    pub fn l2(&self) -> f64 {
        (self.p.l2().powi(2) + self.q.l2().powi(2)).sqrt()
    }
}

/// Exact CR operator matrices for one truncation degree.
#[derive(Debug)]
pub struct OperatorSuite {
    pub space: Arc<SpectralSpace>,
    /// ∂̄_b on scalars.
    pub dbar_s: BlockOp,
    pub p_sc: BlockOp,
    /// Szegő projector H = I − P_sc ∂̄.
    pub szego: BlockOp,
    pub s_sc: BlockOp,
    pub box_b: BlockOp,
    pub delta_q: BlockOp,
    /// Conjugation matrix: conj(f) has coefficients C · conj(c).
    pub conj: BlockOp,
    /// ∂̄_b on HolField (f, h) ↦ (p, q).
    pub dbar_v: BlockOp,
    pub p_vec: BlockOp,
    pub q_vec: BlockOp,
    pub k_harm: BlockOp,
    pub phat: BlockOp,
    pub shat: BlockOp,
    /// Contact homotopy 𝒫 = (I − K) P̂ P_vec.
    pub cal_p: BlockOp,
    /// 𝒬 = ∂̄ Ŝ P_vec + Q_vec.
    pub cal_q: BlockOp,
    /// ♭ on H_{1,0}: multiplication by dη(Z, Z̄).
    pub flat: C64,
    reg_chol: Vec<Cholesky<C64, nalgebra::Dyn>>,
}

impl OperatorSuite {
    pub fn new(space: Arc<SpectralSpace>) -> Self {
        let b = &space.basis;
        let ranges = b.blocks.clone();
        let g = &space.geometry;
        let flat = g.flat_factor;
        let dbar_s = BlockOp::from_fn(&ranges, 1, 1, |l| space.zb.dense_block(b, l));
        let ident = BlockOp::identity(&ranges, 1);
        let p_sc = dbar_s.pinv(PINV_CUTOFF);
        let szego = ident.sub(&p_sc.compose(&dbar_s));
        let s_sc = ident.sub(&dbar_s.compose(&p_sc));
        let box_b = dbar_s.adjoint().compose(&dbar_s);
        let conj = BlockOp::from_fn(&ranges, 1, 1, |l| {
            let r = ranges[l].clone();
            let mut m = CMat::zeros(r.len(), r.len());
            for k in r.clone() {
                let (j, s) = b.conj_of(k);
                m[(j - r.start, k - r.start)] = C64::new(s, 0.0);
            }
            m
        });
        let box_conj = BlockOp {
            blocks: box_b
                .blocks
                .iter()
                .zip(&conj.blocks)
                .map(|(bb, c)| c * bb.map(|x| x.conj()) * c)
                .collect(),
            ..box_b.clone()
        };
        let delta_q = box_b.add(&box_conj).scale(C64::new(2.0, 0.0));
        let reg = ident.add(&delta_q.scale(C64::new(0.25, 0.0)));
        let reg_chol = reg
            .blocks
            .iter()
            .map(|m| {
                let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
                Cholesky::new(herm).expect("I + Δ_Q/4 is positive definite")
            })
            .collect();

        // π_{1,0}[Z̄, fT + hZ] = (Z̄f + α_T f + β_T h) T + (Z̄h + α_Z f + β_Z h) Z
        let alpha = g.bracket_zb_t;
        let beta = g.bracket_z_zb.map(|x| -x);
        let dbar_v = BlockOp::from_fn(&ranges, 2, 2, |l| {
            let n = ranges[l].len();
            let zb = &dbar_s.blocks[l];
            let id = CMat::identity(n, n);
            let mut m = CMat::zeros(2 * n, 2 * n);
            m.view_mut((0, 0), (n, n)).copy_from(&(zb + &id * alpha[0]));
            m.view_mut((0, n), (n, n)).copy_from(&(&id * beta[0]));
            m.view_mut((n, 0), (n, n)).copy_from(&(&id * alpha[1]));
            m.view_mut((n, n), (n, n)).copy_from(&(zb + &id * beta[1]));
            m
        });
        let ident2 = BlockOp::identity(&ranges, 2);
        let p_vec = dbar_v.pinv(PINV_CUTOFF);
        let k_harm = ident2.sub(&p_vec.compose(&dbar_v));
        let q_vec = ident2.sub(&dbar_v.compose(&p_vec));

        // P̂(f, h) = (H f − P_sc(♭h), (∂̄ P_sc ♭h)♯),  Ŝ = I − P̂
        let zero = BlockOp::zero(&ranges, 1, 1);
        let phat_fh = p_sc.scale(-flat);
        let phat_hh = dbar_s.compose(&p_sc);
        let phat = BlockOp::stack(&[vec![&szego, &phat_fh], vec![&zero, &phat_hh]]);
        let shat_ff = p_sc.compose(&dbar_s);
        let shat_fh = p_sc.scale(flat);
        let shat = BlockOp::stack(&[vec![&shat_ff, &shat_fh], vec![&zero, &s_sc]]);
        let cal_p = ident2.sub(&k_harm).compose(&phat).compose(&p_vec);
        let cal_q = dbar_v.compose(&shat).compose(&p_vec).add(&q_vec);
        OperatorSuite {
            space,
            dbar_s,
            p_sc,
            szego,
            s_sc,
            box_b,
            delta_q,
            conj,
            dbar_v,
            p_vec,
            q_vec,
            k_harm,
            phat,
            shat,
            cal_p,
            cal_q,
            flat,
            reg_chol,
        }
    }

    /// Process-wide cached suite for degree n.
    pub fn shared(n: usize) -> Arc<OperatorSuite> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<OperatorSuite>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(s) = cache.lock().expect("suite cache poisoned").get(&n) {
            return s.clone();
        }
        let suite = Arc::new(OperatorSuite::new(SpectralSpace::shared(n)));
        cache.lock().expect("suite cache poisoned").entry(n).or_insert(suite).clone()
    }

    pub fn degree(&self) -> usize {
        self.space.degree()
    }

    fn wrap(&self, c: Vec<C64>) -> SpectralScalar {
        self.space.from_coeffs(c)
    }

    pub fn apply_scalar(&self, op: &BlockOp, f: &SpectralScalar) -> SpectralScalar {
        self.wrap(op.apply(&[&f.coeffs]).remove(0))
    }

    fn apply_pair(&self, op: &BlockOp, a: &SpectralScalar, b: &SpectralScalar) -> (SpectralScalar, SpectralScalar) {
        let mut out = op.apply(&[&a.coeffs, &b.coeffs]);
        let second = out.pop().expect("two outputs");
        let first = out.pop().expect("two outputs");
        (self.wrap(first), self.wrap(second))
    }

    pub fn dbar_scalar(&self, f: &SpectralScalar) -> ScalarForm01 {
        ScalarForm01 { a: self.space.apply(f, crate::harmonic_basis::Letter::Zb) }
    }

    pub fn dbar_field(&self, v: &HolField) -> FieldForm01 {
        let (p, q) = self.apply_pair(&self.dbar_v, &v.f, &v.h);
        FieldForm01 { p, q }
    }

    pub fn box_b(&self, f: &SpectralScalar) -> SpectralScalar {
        self.apply_scalar(&self.box_b, f)
    }

    pub fn delta_q(&self, u: &SpectralScalar) -> SpectralScalar {
        self.apply_scalar(&self.delta_q, u)
    }

    pub fn szego(&self, f: &SpectralScalar) -> SpectralScalar {
        self.apply_scalar(&self.szego, f)
    }

    pub fn p_sc(&self, a: &ScalarForm01) -> SpectralScalar {
        self.apply_scalar(&self.p_sc, &a.a)
    }

    pub fn s_sc(&self, a: &ScalarForm01) -> ScalarForm01 {
        ScalarForm01 { a: self.apply_scalar(&self.s_sc, &a.a) }
    }

    pub fn p_vec(&self, phi: &FieldForm01) -> HolField {
        let (f, h) = self.apply_pair(&self.p_vec, &phi.p, &phi.q);
        HolField { f, h }
    }

    pub fn q_vec(&self, phi: &FieldForm01) -> FieldForm01 {
        let (p, q) = self.apply_pair(&self.q_vec, &phi.p, &phi.q);
        FieldForm01 { p, q }
    }

    pub fn k_harm(&self, v: &HolField) -> HolField {
        let (f, h) = self.apply_pair(&self.k_harm, &v.f, &v.h);
        HolField { f, h }
    }

    pub fn phat(&self, v: &HolField) -> HolField {
        let (f, h) = self.apply_pair(&self.phat, &v.f, &v.h);
        HolField { f, h }
    }

    pub fn shat(&self, v: &HolField) -> HolField {
        let (f, h) = self.apply_pair(&self.shat, &v.f, &v.h);
        HolField { f, h }
    }

    /// 𝒫: T′-valued (0,1)-forms to complex contact fields.
    pub fn cal_p(&self, phi: &FieldForm01) -> HolField {
        let (f, h) = self.apply_pair(&self.cal_p, &phi.p, &phi.q);
        HolField { f, h }
    }

    pub fn cal_q(&self, phi: &FieldForm01) -> FieldForm01 {
        let (p, q) = self.apply_pair(&self.cal_q, &phi.p, &phi.q);
        FieldForm01 { p, q }
    }

    /// ♭: coefficient h of hZ to the coefficient of the (0,1)-form.
    pub fn flat(&self, h: &SpectralScalar) -> ScalarForm01 {
        ScalarForm01 { a: h.scale(self.flat) }
    }

    /// ♯ = ♭⁻¹.
    pub fn sharp(&self, a: &ScalarForm01) -> SpectralScalar {
        a.a.scale(self.flat.inv())
    }

    /// Solves (I + Δ_Q/4) u = r blockwise.
    pub fn solve_reg(&self, r: &SpectralScalar) -> SpectralScalar {
        let mut out = self.space.zero();
        for (l, rg) in self.space.basis.blocks.iter().enumerate() {
            let rhs = nalgebra::DVector::from_iterator(rg.len(), rg.clone().map(|k| r.coeffs[k]));
            let x = self.reg_chol[l].solve(&rhs);
            for (i, k) in rg.clone().enumerate() {
                out.coeffs[k] = x[i];
            }
        }
        out
    }

    pub fn norm_scalar(&self, f: &SpectralScalar, s: usize) -> f64 {
        self.space.fs_norm(f, s)
    }

    pub fn norm_field(&self, v: &HolField, s: usize) -> f64 {
        (self.space.fs_norm2(&v.f, s) + self.space.fs_norm2(&v.h, s)).sqrt()
    }

    pub fn norm_form(&self, phi: &FieldForm01, s: usize) -> f64 {
        (self.space.fs_norm2(&phi.p, s) + self.space.fs_norm2(&phi.q, s)).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_of_dbar_field() {
        let ops = OperatorSuite::shared(3);
        let sp = &ops.space;
        let one = sp.constant(C64::new(1.0, 0.0));
        let zero = sp.zero();
        let t = ops.dbar_field(&HolField { f: one.clone(), h: zero.clone() });
        assert!(t.l2() < 1e-14);
        let z = ops.dbar_field(&HolField { f: zero, h: one });
        assert!((z.p.coeffs[0] - sp.geometry.flat_factor).norm() < 1e-14);
        assert!(z.q.l2() < 1e-14);
    }
}
