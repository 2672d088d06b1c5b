//! The identity suite behind `crnf verify`.

use serde::Serialize;

use crate::contact_fields::complex_contact_from_f;
use crate::cr_operators::{FieldForm01, HolField, OperatorSuite, ScalarForm01};
use crate::geometry::frame_zb;
use crate::harmonic_basis::SpectralScalar;
use crate::random;

pub const IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRow {
    pub identity: &'static str,
    pub trials: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn row(identity: &'static str, trials: usize, residuals: impl IntoIterator<Item = f64>) -> IdentityRow {
    let max_residual = residuals.into_iter().fold(0.0, f64::max);
    IdentityRow { identity, trials, max_residual, tolerance: IDENTITY_TOL, pass: max_residual < IDENTITY_TOL }
}

fn field_l2(v: &HolField) -> f64 {
    v.l2()
}

/// Relative residuals of every homotopy identity on `trials` random inputs.
pub fn identity_suite(ops: &OperatorSuite, trials: usize, seed: u64) -> Vec<IdentityRow> {
    let sp = &ops.space;
    let n = sp.degree();
    let mut rng = random::rng(seed);
    let mut draw = || random::scalar(sp, n, &mut rng);
    let inputs: Vec<[SpectralScalar; 2]> = (0..trials).map(|_| [draw(), draw()]).collect();
    let mut rows = Vec::new();

    // ∂̄α(Z̄, Z̄) = Z̄α(Z̄) − Z̄α(Z̄) − α([Z̄, Z̄]), so ∂̄∘∂̄ = 0 reduces to [Z̄, Z̄] = 0.
    let zb = frame_zb();
    let bracket: f64 = zb.bracket(&zb).0.iter().flat_map(|p| p.0.values()).map(|c| c.norm()).sum();
    rows.push(row("dbar_squared", trials, [bracket]));
    rows.push(row(
        "scalar_homotopy_u",
        trials,
        inputs.iter().map(|[u, _]| {
            let r = u.sub(&ops.p_sc(&ops.dbar_scalar(u))).sub(&ops.szego(u));
            r.l2() / u.l2()
        }),
    ));
    rows.push(row(
        "scalar_homotopy_alpha",
        trials,
        inputs.iter().map(|[a, _]| {
            let alpha = ScalarForm01 { a: a.clone() };
            let back = ops.dbar_scalar(&ops.p_sc(&alpha)).a.add(&ops.s_sc(&alpha).a);
            a.sub(&back).l2() / a.l2()
        }),
    ));
    rows.push(row(
        "field_homotopy_v",
        trials,
        inputs.iter().map(|[f, h]| {
            let v = HolField { f: f.clone(), h: h.clone() };
            let back = ops.p_vec(&ops.dbar_field(&v)).add(&ops.k_harm(&v));
            field_l2(&v.sub(&back)) / field_l2(&v)
        }),
    ));
    rows.push(row(
        "field_homotopy_phi",
        trials,
        inputs.iter().map(|[p, q]| {
            let phi = FieldForm01 { p: p.clone(), q: q.clone() };
            let back = ops.dbar_field(&ops.p_vec(&phi)).add(&ops.q_vec(&phi));
            phi.sub(&back).l2() / phi.l2()
        }),
    ));
    rows.push(row(
        "contact_split",
        trials,
        inputs.iter().map(|[f, h]| {
            let v = HolField { f: f.clone(), h: h.clone() };
            let back = ops.phat(&v).add(&ops.shat(&v));
            field_l2(&v.sub(&back)) / field_l2(&v)
        }),
    ));
    rows.push(row(
        "phat_after_shat",
        trials,
        inputs.iter().map(|[f, h]| {
            let v = HolField { f: f.clone(), h: h.clone() };
            field_l2(&ops.phat(&ops.shat(&v))) / field_l2(&v)
        }),
    ));
    rows.push(row(
        "contact_homotopy_split",
        trials,
        inputs.iter().map(|[q, _]| {
            let phi = FieldForm01::horizontal(q.clone());
            let back = ops.dbar_field(&ops.cal_p(&phi)).add(&ops.cal_q(&phi));
            phi.sub(&back).l2() / phi.l2()
        }),
    ));
    rows.push(row(
        "dbar_p_after_q",
        trials,
        inputs.iter().map(|[q, _]| {
            let phi = FieldForm01::horizontal(q.clone());
            ops.dbar_field(&ops.cal_p(&ops.cal_q(&phi))).l2() / phi.l2()
        }),
    ));
    rows.push(row(
        "q_after_dbar_p",
        trials,
        inputs.iter().map(|[q, _]| {
            let phi = FieldForm01::horizontal(q.clone());
            ops.cal_q(&ops.dbar_field(&ops.cal_p(&phi))).l2() / phi.l2()
        }),
    ));
    rows.push(row(
        "q_after_dbar_contact",
        trials,
        inputs.iter().map(|[f, _]| {
            let z = complex_contact_from_f(ops, f);
            ops.cal_q(&ops.dbar_field(&z.field)).l2() / field_l2(&z.field)
        }),
    ));
    rows.push(row(
        "contact_harmonic_split",
        trials,
        inputs.iter().map(|[f, _]| {
            let z = complex_contact_from_f(ops, f).field;
            let back = ops.cal_p(&ops.dbar_field(&z)).add(&ops.k_harm(&z));
            field_l2(&z.sub(&back)) / field_l2(&z)
        }),
    ));
    rows
}
