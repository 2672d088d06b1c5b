//! Real and complex contact vector fields parameterized by functions.
//!
//! A real contact field X = gT + hZ + h̄Z̄ is determined by g = X⌟η through
//! Z̄g + ♭h = 0. A complex contact field is Z_f = fT − (∂̄f)♯, realized as the
//! HolField (f, −Z̄f/♭). Real parameters give real fields.

use crate::cr_operators::{HolField, OperatorSuite, ScalarForm01};
use crate::error::{Error, Result};
use crate::harmonic_basis::{Letter, SpectralScalar};
use crate::C64;

/// Relative imaginary mass tolerated in a generating function.
pub const REALITY_TOL: f64 = 1e-12;

/// X = gT + hZ + h̄Z̄ with g real.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactField {
    pub g: SpectralScalar,
    pub h: SpectralScalar,
}

/// Z_f = fT − (∂̄f)♯.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexContactField {
    pub f: SpectralScalar,
    pub field: HolField,
}

/// Element of the complement V: π_Re(iY) = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct VField {
    pub y: ComplexContactField,
    /// ‖π_Re(iY)‖ parameter norm at construction.
    pub certificate: f64,
}

impl ContactField {
    /// The (1,0)-part gT + hZ.
    pub fn hol(&self) -> HolField {
        HolField { f: self.g.clone(), h: self.h.clone() }
    }

    pub fn norm(&self, ops: &OperatorSuite, s: usize) -> f64 {
        ops.norm_field(&self.hol(), s)
    }

    pub fn scale(&self, t: f64) -> ContactField {
        ContactField { g: self.g.scale_re(t), h: self.h.scale_re(t) }
    }

    pub fn is_zero(&self) -> bool {
        self.g.is_zero() && self.h.is_zero()
    }
}

impl ComplexContactField {
    pub fn norm(&self, ops: &OperatorSuite, s: usize) -> f64 {
        ops.norm_field(&self.field, s)
    }
}

/// h = −Z̄g / ♭, the horizontal part fixed by the contact condition.
fn horizontal_part(ops: &OperatorSuite, f: &SpectralScalar) -> SpectralScalar {
    let zbf = ops.space.apply(f, Letter::Zb);
    ops.sharp(&ScalarForm01 { a: zbf }).scale(C64::new(-1.0, 0.0))
}

pub fn contact_from_generating(ops: &OperatorSuite, g: &SpectralScalar) -> Result<ContactField> {
    let sp = &ops.space;
    let im = sp.imag_mass(g);
    if im > REALITY_TOL * g.l2().max(1.0) {
        return Err(Error::NotReal(im));
    }
    let g = sp.real_part(g);
    let h = horizontal_part(ops, &g);
    Ok(ContactField { g, h })
}

pub fn complex_contact_from_f(ops: &OperatorSuite, f: &SpectralScalar) -> ComplexContactField {
    let h = horizontal_part(ops, f);
    ComplexContactField { f: f.clone(), field: HolField { f: f.clone(), h } }
}

/// ‖∂̄_b(V⌟η) + π^{(0,1)}(V⌟dη)‖ = ‖Z̄f + ♭h‖ for V = fT + hZ.
pub fn definition_residual(ops: &OperatorSuite, v: &HolField) -> f64 {
    let zbf = ops.space.apply(&v.f, Letter::Zb);
    zbf.add(&ops.flat(&v.h).a).l2()
}

/// ω̄-component of d(X⌟η) + X⌟dη for a real contact field.
pub fn contact_residual(ops: &OperatorSuite, x: &ContactField) -> f64 {
    definition_residual(ops, &x.hol())
}

/// (P̂V, ŜV) with P̂V returned as a complex contact field.
pub fn phat_shat(ops: &OperatorSuite, v: &HolField) -> (ComplexContactField, HolField) {
    let p = ops.phat(v);
    let s = ops.shat(v);
    (ComplexContactField { f: p.f.clone(), field: p }, s)
}

/// u = (I + Δ_Q/4)⁻¹ Re(f + □_b f).
pub fn real_parameter(ops: &OperatorSuite, f: &SpectralScalar) -> SpectralScalar {
    let sp = &ops.space;
    let rhs = sp.real_part(&f.add(&ops.box_b(f)));
    sp.real_part(&ops.solve_reg(&rhs))
}

pub fn pi_re(ops: &OperatorSuite, z: &ComplexContactField) -> ContactField {
    let u = real_parameter(ops, &z.f);
    contact_from_generating(ops, &u).expect("real parameter")
}

pub fn pi_im(ops: &OperatorSuite, z: &ComplexContactField) -> VField {
    let u = real_parameter(ops, &z.f);
    let y = z.f.sub(&u).scale(C64::new(0.0, 1.0));
    v_field(ops, &y)
}

/// Z_f = π_Re(Z_f) − i π_Im(Z_f).
pub fn decompose(ops: &OperatorSuite, z: &ComplexContactField) -> (ContactField, VField) {
    (pi_re(ops, z), pi_im(ops, z))
}

/// Wraps Z_y as a V-field and records ‖π_Re(iZ_y)‖.
pub fn v_field(ops: &OperatorSuite, y: &SpectralScalar) -> VField {
    let iy = y.scale(C64::new(0.0, 1.0));
    let certificate = real_parameter(ops, &iy).l2();
    VField { y: complex_contact_from_f(ops, y), certificate }
}

/// The HolField of X − iY.
pub fn combine(x: &ContactField, y: &VField) -> HolField {
    x.hol().sub(&y.y.field.scale(C64::new(0.0, 1.0)))
}
