use crnf::contact_fields::contact_from_generating;
use crnf::contact_flow::{
    dbar_contact, e_remainder, hopf_error, pullback_deformation, pullback_scalar, ContactDiffeo, DeformationTensor,
    FlowConfig, CONTACT_TOL,
};
use crnf::harmonic_basis::Monomial;
use crnf::normal_form::transverse_contact_field;
use crnf::{random, ContactField, Error, OperatorSuite, C64};

fn slope(ts: &[f64], ys: &[f64]) -> f64 {
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ls: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ls.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ls).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn hopf(ops: &OperatorSuite, c: f64) -> ContactField {
    contact_from_generating(ops, &ops.space.constant(C64::new(c, 0.0))).unwrap()
}

fn field_of_size(ops: &OperatorSuite, seed: u64, size: f64) -> ContactField {
    let g = random::real_scalar(&ops.space, 4, &mut random::rng(seed));
    let x = contact_from_generating(ops, &g).unwrap();
    x.scale(size / x.norm(ops, 6))
}

#[test]
fn zero_field_is_identity() {
    let ops = OperatorSuite::shared(4);
    let sp = &ops.space;
    let x = ContactField { g: sp.zero(), h: sp.zero() };
    let f = ContactDiffeo::flow(sp, &x, FlowConfig::default()).unwrap();
    assert_eq!(f.points, sp.grid.grid.nodes());
    assert!(f.dev.iter().flatten().flatten().all(|c| *c == C64::new(0.0, 0.0)));
}

#[test]
fn reeb_flow_is_hopf_rotation() {
    let ops = OperatorSuite::shared(6);
    let sp = &ops.space;
    for c in [1e-3, 0.05, 0.3] {
        let f = ContactDiffeo::flow(sp, &hopf(&ops, c), FlowConfig::default()).unwrap();
        assert!(hopf_error(sp, &f, c) < 1e-9, "c = {c}");
        assert!(f.contact_ratio < CONTACT_TOL);
    }
}

#[test]
fn rotation_acts_on_coordinates() {
    // z ↦ e^{iκc} z with κ = 2, so z₁∘F = e^{2ic} z₁
    let ops = OperatorSuite::shared(6);
    let sp = &ops.space;
    let c = 0.2;
    let f = ContactDiffeo::flow(sp, &hopf(&ops, c), FlowConfig::default()).unwrap();
    let z1 = sp.monomial(Monomial::new(1, 0, 0, 0));
    let (pulled, mass) = pullback_scalar(sp, &f, &z1);
    let want = z1.scale(C64::from_polar(1.0, 2.0 * c));
    assert!(pulled.sub(&want).l2() < 1e-9);
    assert!(mass < 1e-9);
    let one = sp.constant(C64::new(1.0, 0.0));
    assert!(pullback_scalar(sp, &f, &one).0.sub(&one).l2() < 1e-12);
}

#[test]
fn automorphism_preserves_round_structure() {
    let ops = OperatorSuite::shared(6);
    let sp = &ops.space;
    let f = ContactDiffeo::flow(sp, &hopf(&ops, 0.3), FlowConfig::default()).unwrap();
    let (mu, _) = pullback_deformation(sp, &f, &DeformationTensor::new(sp.zero())).unwrap();
    assert!(mu.sup_abs(sp) < 1e-9);
}

#[test]
fn identity_pullbacks() {
    let ops = OperatorSuite::shared(6);
    let sp = &ops.space;
    let id = ContactDiffeo::identity(sp);
    let phi = DeformationTensor::new(random::scalar(sp, 4, &mut random::rng(1)).scale_re(1e-3));
    assert_eq!(pullback_deformation(sp, &id, &phi).unwrap().0, phi);
    let f = random::scalar(sp, 6, &mut random::rng(2));
    assert_eq!(pullback_scalar(sp, &id, &f).0, f);
}

#[test]
fn inverse_flow_returns_nodes() {
    let ops = OperatorSuite::shared(6);
    let sp = &ops.space;
    for seed in 0..3 {
        let x = field_of_size(&ops, seed, 1e-2);
        let cfg = FlowConfig::default();
        let f = ContactDiffeo::flow(sp, &x, cfg).unwrap();
        let back = f.then(sp, &x.scale(-1.0), cfg).unwrap();
        assert!(back.distance(&ContactDiffeo::identity(sp)) < 1e-8);
        assert!(back.sphere_defect() < 1e-12);
    }
}

#[test]
fn contact_ratio_below_tolerance() {
    let ops = OperatorSuite::shared(6);
    let sp = &ops.space;
    for seed in 0..5 {
        let f = ContactDiffeo::flow(sp, &field_of_size(&ops, seed, 1e-2), FlowConfig::default()).unwrap();
        assert!(f.contact_ratio < CONTACT_TOL, "seed {seed}: {:e}", f.contact_ratio);
    }
}

#[test]
fn linearized_action_slope() {
    let ops = OperatorSuite::shared(6);
    let sp = &ops.space;
    let x = transverse_contact_field(&ops, 6, 6, 1.0, &mut random::rng(3)).unwrap();
    let zero = DeformationTensor::new(sp.zero());
    let ts = [1e-2, 1e-3, 1e-4];
    let errs: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let xt = x.scale(t);
            let f = ContactDiffeo::flow(sp, &xt, FlowConfig::default()).unwrap();
            let (mu, _) = pullback_deformation(sp, &f, &zero).unwrap();
            ops.norm_scalar(&mu.phi.sub(&dbar_contact(&ops, &xt)), 6)
        })
        .collect();
    let p = slope(&ts, &errs);
    assert!((p - 2.0).abs() < 0.1, "slope {p}, errors {errs:?}");
}

#[test]
fn remainder_vanishes_at_zero_field_and_is_quadratic() {
    let ops = OperatorSuite::shared(6);
    let sp = &ops.space;
    let phi = DeformationTensor::new(random::scalar(sp, 4, &mut random::rng(8)).scale_re(1e-3));
    let zero = ContactField { g: sp.zero(), h: sp.zero() };
    let e0 = e_remainder(&ops, &zero, &phi, FlowConfig::default()).unwrap();
    assert_eq!(e0.l2(), 0.0);

    let x = transverse_contact_field(&ops, 6, 6, 1.0, &mut random::rng(4)).unwrap();
    let none = DeformationTensor::new(sp.zero());
    let ts = [1e-2, 1e-3, 1e-4];
    let errs: Vec<f64> = ts
        .iter()
        .map(|&t| ops.norm_form(&e_remainder(&ops, &x.scale(t), &none, FlowConfig::default()).unwrap(), 6))
        .collect();
    let p = slope(&ts, &errs);
    assert!((p - 2.0).abs() < 0.1, "slope {p}");
}

#[test]
fn large_field_leaves_neighbourhood() {
    let ops = OperatorSuite::shared(4);
    let sp = &ops.space;
    let x = field_of_size(&ops, 0, 3000.0);
    let out = ContactDiffeo::flow(sp, &x, FlowConfig::default())
        .and_then(|f| pullback_deformation(sp, &f, &DeformationTensor::new(sp.zero())));
    assert!(matches!(out, Err(Error::Neighbourhood(_)) | Err(Error::ContactDrift { .. })), "{out:?}");
}
