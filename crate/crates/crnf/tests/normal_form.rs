use crnf::contact_fields::{complex_contact_from_f, contact_from_generating};
use crnf::contact_flow::{ContactDiffeo, DeformationTensor, FlowConfig};
use crnf::normal_form::harness::{apriori_harness, estimate_harness, stability, Family, HarnessConfig};
use crnf::normal_form::{
    contraction_t, prefab, pullback_of_zero, random_deformation, slice_check, solve, transverse_contact_field,
    verify_solution,
};
use crnf::{random, Error, FieldForm01, OperatorSuite, SolveConfig, C64};

fn rel(a: f64, b: f64) -> f64 {
    a / b
}

#[test]
fn zero_deformation_has_trivial_normal_form() {
    let ops = OperatorSuite::shared(6);
    let r = solve(&ops, &DeformationTensor::new(ops.space.zero()), &SolveConfig::default()).unwrap();
    assert!(r.converged);
    assert_eq!(r.iterations, 1);
    assert!(r.x.is_zero() && r.y.y.f.is_zero() && r.psi.phi.is_zero());
}

#[test]
fn prefab_is_recovered() {
    let ops = OperatorSuite::shared(6);
    let cfg = SolveConfig::default();
    for seed in 0..3 {
        let pf = prefab(&ops, 5, 6, 5e-3, &mut random::rng(seed));
        let r = solve(&ops, &pf.phi, &cfg).unwrap();
        assert!(r.converged && r.iterations <= cfg.max_iter);
        assert!(r.residual < 1e-9);
        let dy = ops.norm_field(&r.y.y.field.sub(&pf.y0.y.field), 6);
        let dpsi = ops.norm_scalar(&r.psi.phi.sub(&pf.psi0.phi), 6);
        assert!(rel(dy, pf.y0.y.norm(&ops, 6)) < 1e-6, "seed {seed}: Y error {dy:e}");
        assert!(rel(dpsi, ops.norm_scalar(&pf.psi0.phi, 6)) < 1e-6, "seed {seed}: psi error {dpsi:e}");
        assert!(r.x.norm(&ops, 6) < 1e-9);
        assert!(r.harmonic_residual < 1e-10 && r.gauge_residual < 1e-10);
    }
}

#[test]
fn pullback_of_zero_has_no_invariant_part() {
    let ops = OperatorSuite::shared(6);
    let cfg = SolveConfig::default();
    let (phi, x0) = pullback_of_zero(&ops, 5, 6, 5e-3, cfg.flow, &mut random::rng(11)).unwrap();
    let r = solve(&ops, &phi, &cfg).unwrap();
    assert!(r.converged);
    let y = r.y.y.norm(&ops, 6);
    let psi = ops.norm_scalar(&r.psi.phi, 6);
    assert!(y + psi < 1e-6, "‖Y‖ = {y:e}, ‖ψ‖ = {psi:e}");
    // F_X undoes F_{X₀}
    let dx = r.x.hol().add(&x0.hol());
    let e = ops.norm_field(&dx, 6) / x0.norm(&ops, 6);
    assert!(e < 1e-6, "{e:e}");
}

#[test]
fn returned_solution_verifies_independently() {
    let ops = OperatorSuite::shared(6);
    let cfg = SolveConfig::default();
    let phi = random_deformation(&ops, 4, 6, 4e-3, &mut random::rng(2));
    let r = solve(&ops, &phi, &cfg).unwrap();
    assert!(r.converged);
    let again = verify_solution(&ops, &phi, &r.f, &r.psi, &cfg).unwrap();
    assert!(again < cfg.tol, "{again:e}");
}

#[test]
fn oversized_deformation_is_refused() {
    let ops = OperatorSuite::shared(6);
    let phi = random_deformation(&ops, 4, 6, 0.5, &mut random::rng(1));
    assert!(matches!(solve(&ops, &phi, &SolveConfig::default()), Err(Error::Neighbourhood(_))));
}

#[test]
fn first_order_agrees_with_linear_solution() {
    // for φ = tφ₁ the normal form parameter is −𝒫φ + O(t²)
    let ops = OperatorSuite::shared(6);
    let cfg = SolveConfig::default();
    let phi1 = random_deformation(&ops, 4, 6, 1.0, &mut random::rng(6));
    let ts = [4e-3, 1e-3, 2.5e-4];
    let errs: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let phi = DeformationTensor::new(phi1.phi.scale_re(t));
            let r = solve(&ops, &phi, &cfg).unwrap();
            let lin = ops.cal_p(&FieldForm01::horizontal(phi.phi.clone())).f.scale(C64::new(-1.0, 0.0));
            ops.norm_scalar(&r.f.sub(&lin), 6)
        })
        .collect();
    let p = (errs[0] / errs[2]).ln() / (ts[0] / ts[2]).ln();
    assert!((p - 2.0).abs() < 0.15, "slope {p}, errors {errs:?}");
}

#[test]
fn contraction_from_origin() {
    let ops = OperatorSuite::shared(6);
    let sp = &ops.space;
    let zero_phi = DeformationTensor::new(sp.zero());
    let zero_x = contact_from_generating(&ops, &sp.zero()).unwrap();
    for seed in 0..3 {
        let f = random::scalar(sp, 5, &mut random::rng(seed));
        let w = complex_contact_from_f(&ops, &f);
        let w = complex_contact_from_f(&ops, &f.scale_re(2e-3 / w.norm(&ops, 6)));
        let rep = contraction_t(&ops, &zero_phi, &zero_x, &w, 6, 50, FlowConfig::default()).unwrap();
        assert!(rep.ratios.iter().all(|r| *r < 0.5), "{:?}", rep.ratios);
        assert!(rep.z_norm <= 2.0 * rep.w_norm + 1e-9);
    }
}

#[test]
fn slice_with_identity_and_rotation() {
    let ops = OperatorSuite::shared(6);
    let sp = &ops.space;
    let cfg = SolveConfig::default();
    let pf = prefab(&ops, 5, 6, 5e-3, &mut random::rng(3));
    let id = ContactDiffeo::identity(sp);
    let rep = slice_check(&ops, &pf.phi, &id, &cfg).unwrap();
    assert_eq!(rep.dy, 0.0);
    assert_eq!(rep.dpsi, 0.0);

    let hopf = contact_from_generating(&ops, &sp.constant(C64::new(0.2, 0.0))).unwrap();
    let g = ContactDiffeo::flow(sp, &hopf, cfg.flow).unwrap();
    let rep = slice_check(&ops, &DeformationTensor::new(sp.zero()), &g, &cfg).unwrap();
    assert!(rep.second.y.y.norm(&ops, 6) < 1e-9 && ops.norm_scalar(&rep.second.psi.phi, 6) < 1e-9);
}

#[test]
fn slice_with_small_flow() {
    let ops = OperatorSuite::shared(6);
    let sp = &ops.space;
    let cfg = SolveConfig { eps: 2e-2, ..SolveConfig::default() };
    let pf = prefab(&ops, 5, 6, 5e-3, &mut random::rng(4));
    let x = transverse_contact_field(&ops, 5, 6, 5e-3, &mut random::rng(5)).unwrap();
    let g = ContactDiffeo::flow(sp, &x, cfg.flow).unwrap();
    let rep = slice_check(&ops, &pf.phi, &g, &cfg).unwrap();
    assert!(rep.rel_y < 1e-6 && rep.rel_psi < 1e-6, "{:e} {:e}", rep.rel_y, rep.rel_psi);
}

#[test]
fn family_names_round_trip() {
    for f in Family::ALL {
        assert_eq!(f.name().parse::<Family>().unwrap(), f);
    }
    assert!("nonsense".parse::<Family>().is_err());
}

#[test]
fn small_harness_is_finite() {
    let cfg = HarnessConfig { degrees: vec![6], seeds: vec![0, 1], s_min: 1, s_max: 2, ..HarnessConfig::default() };
    let rows = estimate_harness(&Family::ALL, &cfg).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0));
    let st = stability(&rows);
    assert!(st.iter().all(|s| s.all_finite && s.spread == 1.0));
    let ap = apriori_harness(&cfg).unwrap();
    assert_eq!(ap.len(), 2 * 2);
    assert!(ap.iter().all(|r| r.ratio_x.is_finite() && r.ratio_y.is_finite() && r.ratio_psi.is_finite()));
}
