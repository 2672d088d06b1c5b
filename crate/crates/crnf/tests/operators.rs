use crnf::cli::verify::{identity_suite, IDENTITY_TOL};
use crnf::contact_fields::complex_contact_from_f;
use crnf::geometry::{frame_zb, ReferenceGeometry};
use crnf::harmonic_basis::{Letter, Monomial};
use crnf::linalg::BlockOp;
use crnf::{random, FieldForm01, HolField, OperatorSuite, ScalarForm01, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;

const I: C64 = C64::new(0.0, 1.0);

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn idempotence_defect(op: &BlockOp) -> f64 {
    op.compose(op).sub(op).max_abs()
}

fn hermitian_defect(op: &BlockOp) -> f64 {
    op.blocks.iter().map(|m| (m - m.adjoint()).camax()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix through its real symmetric embedding.
fn hermitian_spectrum(m: &DMatrix<C64>) -> Vec<f64> {
    let n = m.nrows();
    let real = DMatrix::<f64>::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let mut ev: Vec<f64> = real.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
    ev
}

#[test]
fn normalization_constants() {
    // η = (a/2i)(z̄·dz − z·dz̄): η(T) = aκ and dη(Z, Z̄) = ia, so dη = (i/2)ω∧ω̄ gives a = 1/2, κ = 2.
    let g = ReferenceGeometry::derive();
    assert!((g.eta_scale - 0.5).abs() < 1e-14);
    assert!((g.kappa - 2.0).abs() < 1e-14);
    assert!((g.flat_factor - I * 0.5).norm() < 1e-14);
    assert!((g.levi - 1.0).abs() < 1e-14);
    // [Z̄, Z] z₁ = −z₁ and T z₁ = 2i z₁, so [Z̄, Z] = (i/2) T
    assert!((g.bracket_z_zb[0] - (-I * 0.5)).norm() < 1e-14);
}

#[test]
fn frame_conditions_at_nodes() {
    let ops = OperatorSuite::shared(6);
    let r = ops.space.geometry.frame_residuals(&ops.space.grid.grid.nodes());
    assert!(r.reeb < 1e-10 && r.reeb_dual < 1e-10 && r.horizontal < 1e-10 && r.coframe < 1e-10);
    assert!(r.tangency < 1e-10);
    assert!((r.min_levi - 0.5).abs() < 1e-10);
}

#[test]
fn zbar_squared_vanishes() {
    let zb = frame_zb();
    assert!(zb.bracket(&zb).0.iter().all(|p| p.0.values().all(|c| c.norm() == 0.0)));
}

#[test]
fn dbar_on_coordinates() {
    let ops = OperatorSuite::shared(4);
    let sp = &ops.space;
    let z1 = sp.monomial(Monomial::new(1, 0, 0, 0));
    assert!(ops.dbar_scalar(&z1).a.l2() < 1e-15);
    let zb1 = sp.monomial(Monomial::new(0, 0, 1, 0));
    let a = ops.dbar_scalar(&zb1).a;
    assert!(a.sub(&sp.monomial(Monomial::new(0, 1, 0, 0))).l2() < 1e-14);
    assert!(a.l2() > 0.1);
    assert!(ops.dbar_scalar(&sp.constant(one())).a.l2() == 0.0);
}

#[test]
fn dbar_field_on_frame() {
    let ops = OperatorSuite::shared(4);
    let sp = &ops.space;
    let t = HolField { f: sp.constant(one()), h: sp.zero() };
    assert!(ops.dbar_field(&t).l2() < 1e-15);
    // π_{1,0}[Z̄, Z] = (i/2) T
    let z = HolField { f: sp.zero(), h: sp.constant(one()) };
    let d = ops.dbar_field(&z);
    assert!(d.p.sub(&sp.constant(I * 0.5)).l2() < 1e-14);
    assert!(d.q.l2() < 1e-14);
}

#[test]
fn box_b_eigenvalue_on_degree_one() {
    let ops = OperatorSuite::shared(4);
    let sp = &ops.space;
    let spectrum = hermitian_spectrum(&ops.box_b.blocks[1]);
    assert_eq!(spectrum.len(), 2);
    assert!(spectrum[0].abs() < 1e-12);
    let lambda = spectrum[1];
    // □ z̄₁ = −Z(Z̄ z̄₁) = −Z z₂ = z̄₁
    assert!((lambda - 1.0).abs() < 1e-12);
    let zb1 = sp.monomial(Monomial::new(0, 0, 1, 0));
    assert!(ops.box_b(&zb1).sub(&zb1.scale_re(lambda)).l2() < 1e-13);
}

#[test]
fn box_b_and_delta_q_kill_constants_and_cr() {
    let ops = OperatorSuite::shared(5);
    let sp = &ops.space;
    let c = sp.constant(C64::new(2.5, 0.0));
    assert!(ops.box_b(&c).l2() < 1e-15 && ops.delta_q(&c).l2() < 1e-15);
    let cr = sp.monomial(Monomial::new(2, 1, 0, 0)).add(&sp.monomial(Monomial::new(0, 3, 0, 0)));
    assert!(ops.box_b(&cr).l2() < 1e-13);
}

#[test]
fn szego_examples() {
    let ops = OperatorSuite::shared(5);
    let sp = &ops.space;
    let f = sp.monomial(Monomial::new(2, 1, 0, 0));
    assert!(ops.szego(&f).sub(&f).l2() < 1e-13);
    let zb1 = sp.monomial(Monomial::new(0, 0, 1, 0));
    assert!(ops.szego(&zb1).l2() < 1e-14);
    let g = random::scalar(sp, 5, &mut random::rng(4));
    assert!(ops.dbar_scalar(&ops.szego(&g)).a.l2() < 1e-12 * g.l2());
}

#[test]
fn projectors_are_idempotent() {
    let ops = OperatorSuite::shared(6);
    for (name, op) in [
        ("szego", &ops.szego),
        ("s_sc", &ops.s_sc),
        ("q_vec", &ops.q_vec),
        ("k_harm", &ops.k_harm),
        ("phat", &ops.phat),
        ("cal_q", &ops.cal_q),
    ] {
        let d = idempotence_defect(op);
        assert!(d < 1e-10, "{name}: {d:e}");
    }
    for (name, op) in [("szego", &ops.szego), ("k_harm", &ops.k_harm), ("q_vec", &ops.q_vec)] {
        let d = hermitian_defect(op);
        assert!(d < 1e-10, "{name} not self-adjoint: {d:e}");
    }
    assert!(ops.shat.compose(&ops.phat).max_abs() < 1e-10);
}

#[test]
fn pseudo_inverse_recovers_preimages() {
    let ops = OperatorSuite::shared(6);
    let sp = &ops.space;
    let mut rng = random::rng(21);
    let w = random::scalar(sp, 6, &mut rng);
    let u = w.sub(&ops.szego(&w));
    let back = ops.p_sc(&ops.dbar_scalar(&u));
    assert!(back.sub(&u).l2() < 1e-12 * u.l2());

    let w = HolField { f: random::scalar(sp, 6, &mut rng), h: random::scalar(sp, 6, &mut rng) };
    let v = w.sub(&ops.k_harm(&w));
    let back = ops.p_vec(&ops.dbar_field(&v));
    assert!(back.sub(&v).l2() < 1e-12 * v.l2());
    assert!(ops.q_vec(&ops.dbar_field(&w)).l2() < 1e-10 * w.l2());
}

#[test]
fn sharp_and_flat() {
    let ops = OperatorSuite::shared(4);
    let sp = &ops.space;
    assert!(ops.sharp(&ScalarForm01 { a: sp.zero() }).l2() == 0.0);
    let h = random::scalar(sp, 4, &mut random::rng(2));
    assert!(ops.sharp(&ops.flat(&h)).sub(&h).l2() < 1e-14 * h.l2());
    // Z⌟dη paired with Z̄ is dη(Z, Z̄)
    let coeff = ScalarForm01 { a: sp.constant(ops.space.geometry.flat_factor) };
    assert!(ops.sharp(&coeff).sub(&sp.constant(one())).l2() < 1e-14);
}

#[test]
fn homotopy_identities_across_degrees() {
    for (n, trials) in [(4usize, 100usize), (6, 100), (8, 20)] {
        let ops = OperatorSuite::shared(n);
        for row in identity_suite(&ops, trials, 7) {
            assert!(row.pass, "N = {n}: {} residual {:e}", row.identity, row.max_residual);
            assert!(row.max_residual < IDENTITY_TOL);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dbar_field_is_linear(seed in any::<u64>(), t in -2.0f64..2.0) {
        let ops = OperatorSuite::shared(5);
        let sp = &ops.space;
        let mut rng = random::rng(seed);
        let mut draw = || HolField { f: random::scalar(sp, 5, &mut rng), h: random::scalar(sp, 5, &mut rng) };
        let (a, b) = (draw(), draw());
        let lhs = ops.dbar_field(&a.add(&b.scale(C64::new(t, 0.0))));
        let rhs = ops.dbar_field(&a).add(&ops.dbar_field(&b).scale(C64::new(t, 0.0)));
        prop_assert!(lhs.sub(&rhs).l2() < 1e-12 * (1.0 + lhs.l2()));
    }

    #[test]
    fn dbar_field_leibniz(seed in any::<u64>()) {
        // ∂̄(uV) = (∂̄u) ⊗ V + u ∂̄V with degrees low enough that products are exact
        let ops = OperatorSuite::shared(6);
        let sp = &ops.space;
        let mut rng = random::rng(seed);
        let u = random::scalar(sp, 3, &mut rng);
        let v = HolField { f: random::scalar(sp, 3, &mut rng), h: random::scalar(sp, 3, &mut rng) };
        let uv = HolField { f: sp.multiply(&u, &v.f), h: sp.multiply(&u, &v.h) };
        let zbu = sp.apply(&u, Letter::Zb);
        let dv = ops.dbar_field(&v);
        let rhs = FieldForm01 {
            p: sp.multiply(&zbu, &v.f).add(&sp.multiply(&u, &dv.p)),
            q: sp.multiply(&zbu, &v.h).add(&sp.multiply(&u, &dv.q)),
        };
        let lhs = ops.dbar_field(&uv);
        prop_assert!(lhs.sub(&rhs).l2() < 1e-11 * (1.0 + lhs.l2()));
    }

    #[test]
    fn contact_splitting(seed in any::<u64>()) {
        let ops = OperatorSuite::shared(6);
        let sp = &ops.space;
        let mut rng = random::rng(seed);
        let v = HolField { f: random::scalar(sp, 6, &mut rng), h: random::scalar(sp, 6, &mut rng) };
        let back = ops.phat(&v).add(&ops.shat(&v));
        prop_assert!(back.sub(&v).l2() < 1e-10 * v.l2());
        let z = complex_contact_from_f(&ops, &random::scalar(sp, 6, &mut rng)).field;
        prop_assert!(ops.shat(&z).l2() < 1e-10 * z.l2());
    }

    #[test]
    fn delta_q_coupling(seed in any::<u64>()) {
        // Re(u + □u) = u + Δ_Q u / 4 for real u
        let ops = OperatorSuite::shared(6);
        let sp = &ops.space;
        let u = random::real_scalar(sp, 6, &mut random::rng(seed));
        let lhs = sp.real_part(&u.add(&ops.box_b(&u)));
        let rhs = u.add(&ops.delta_q(&u).scale_re(0.25));
        prop_assert!(lhs.sub(&rhs).l2() < 1e-12 * (1.0 + u.l2()));
    }
}
