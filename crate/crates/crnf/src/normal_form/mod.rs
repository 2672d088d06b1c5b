//! Normal form F*φ = i∂̄Y + ψ by frozen-linearization iteration, the
//! contraction map T, slice comparisons and forward-constructed instances.

pub mod harness;

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::contact_fields::{
    complex_contact_from_f, contact_from_generating, pi_im, pi_re, ComplexContactField, ContactField, VField,
};
use crate::contact_flow::{
    composition_term, e_remainder_with, pullback_deformation, ContactDiffeo, DeformationTensor, FlowConfig,
};
use crate::cr_operators::{FieldForm01, HolField, OperatorSuite};
use crate::error::{Error, Result};
use crate::harmonic_basis::{Label, SpectralScalar};
use crate::random;
use crate::C64;

pub const DEFAULT_S0: usize = 6;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 25;
pub const DEFAULT_EPS: f64 = 1e-2;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy)]
pub struct SolveConfig {
    pub s0: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub eps: f64,
    pub flow: FlowConfig,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            s0: DEFAULT_S0,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            eps: DEFAULT_EPS,
            flow: FlowConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    pub chi_norm: f64,
    pub xi_norm: f64,
    pub trunc_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormRow {
    pub s: usize,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

#[derive(Debug, Clone)]
pub struct NormalFormResult {
    pub x: ContactField,
    pub y: VField,
    pub psi: DeformationTensor,
    /// Parameter f of X − iY = Z_f.
    pub f: SpectralScalar,
    pub history: Vec<IterRecord>,
    pub norms: Vec<NormRow>,
    pub converged: bool,
    pub iterations: usize,
    /// ‖χ‖ + ‖ξ‖ at the returned state.
    pub residual: f64,
    /// ‖F_X*φ − i∂̄Y − ψ‖.
    pub defining_residual: f64,
    /// ‖K(X − iY)‖.
    pub gauge_residual: f64,
    /// ‖𝒫ψ‖.
    pub harmonic_residual: f64,
    pub trunc_mass: f64,
}

struct Residual {
    chi: FieldForm01,
    xi: HolField,
    chi_norm: f64,
    xi_norm: f64,
    mass: f64,
}

fn split(ops: &OperatorSuite, f: &SpectralScalar) -> (ContactField, VField) {
    let z = complex_contact_from_f(ops, f);
    (pi_re(ops, &z), pi_im(ops, &z))
}

fn residual(
    ops: &OperatorSuite,
    phi: &DeformationTensor,
    f: &SpectralScalar,
    psi: &SpectralScalar,
    cfg: &SolveConfig,
) -> Result<(Residual, ContactField, VField)> {
    let (x, y) = split(ops, f);
    let fx = ContactDiffeo::flow(&ops.space, &x, cfg.flow)?;
    let (mu, mass) = pullback_deformation(&ops.space, &fx, phi)?;
    let dy = ops.dbar_field(&y.y.field).scale(I);
    let chi = FieldForm01 { p: dy.p.scale(C64::new(-1.0, 0.0)), q: mu.phi.sub(&dy.q).sub(psi) };
    let xi = ops.k_harm(&complex_contact_from_f(ops, f).field);
    let chi_norm = ops.norm_form(&chi, cfg.s0);
    let xi_norm = ops.norm_field(&xi, cfg.s0);
    Ok((Residual { chi, xi, chi_norm, xi_norm, mass }, x, y))
}

fn norm_report(ops: &OperatorSuite, x: &ContactField, y: &VField, psi: &SpectralScalar, s_max: usize) -> Vec<NormRow> {
    (0..=s_max)
        .map(|s| NormRow { s, x: x.norm(ops, s), y: y.y.norm(ops, s), psi: ops.norm_scalar(psi, s) })
        .collect()
}

/// Checks the preconditions on φ: ‖φ‖_{s₀} ≤ ε and |φ| < 1 at the nodes.
pub fn check_neighbourhood(ops: &OperatorSuite, phi: &DeformationTensor, cfg: &SolveConfig) -> Result<()> {
    let n = ops.norm_scalar(&phi.phi, cfg.s0);
    if n > cfg.eps {
        return Err(Error::Neighbourhood(format!("‖φ‖_{} = {n:.3e} exceeds ε = {:.3e}", cfg.s0, cfg.eps)));
    }
    let sup = phi.sup_abs(&ops.space);
    if sup >= 1.0 {
        return Err(Error::Neighbourhood(format!("sup |φ| = {sup:.3e} is not below 1")));
    }
    Ok(())
}

/// Solves F_X*φ = i∂̄Y + ψ with K(X − iY) = 0 and 𝒫ψ = 0.
///
/// Each sweep computes χ = F_X*φ − i∂̄Y − ψ and ξ = K(X − iY), then
/// X − iY ← X − iY − (𝒫χ + ξ) and ψ ← ψ + 𝒬χ. A result with
/// `converged = false` is returned when the iteration cap is hit or the
/// residual blows up.
pub fn solve(ops: &OperatorSuite, phi: &DeformationTensor, cfg: &SolveConfig) -> Result<NormalFormResult> {
    check_neighbourhood(ops, phi, cfg)?;
    let sp = &ops.space;
    let mut f = sp.zero();
    let mut psi = sp.zero();
    let mut history = Vec::new();
    let mut first = None;
    let mut total_mass = 0.0;
    for iter in 1..=cfg.max_iter {
        let (r, x, y) = residual(ops, phi, &f, &psi, cfg)?;
        total_mass = r.mass;
        history.push(IterRecord { iter, chi_norm: r.chi_norm, xi_norm: r.xi_norm, trunc_mass: r.mass });
        let res = r.chi_norm + r.xi_norm;
        let r0 = *first.get_or_insert(res);
        let blown_up = !res.is_finite() || res > 1e6 * r0.max(f64::MIN_POSITIVE);
        if res < cfg.tol || blown_up || iter == cfg.max_iter {
            return Ok(finish(ops, f, psi, x, y, history, res < cfg.tol, total_mass, cfg));
        }
        let step = ops.cal_p(&r.chi).add(&r.xi);
        f = f.sub(&step.f);
        psi = psi.add(&ops.cal_q(&r.chi).q);
    }
    let (x, y) = split(ops, &f);
    Ok(finish(ops, f, psi, x, y, history, false, total_mass, cfg))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    ops: &OperatorSuite,
    f: SpectralScalar,
    psi: SpectralScalar,
    x: ContactField,
    y: VField,
    history: Vec<IterRecord>,
    converged: bool,
    trunc_mass: f64,
    cfg: &SolveConfig,
) -> NormalFormResult {
    let last = history.last().copied();
    let residual = last.map_or(f64::NAN, |r| r.chi_norm + r.xi_norm);
    let harmonic_residual = ops.norm_field(&ops.cal_p(&FieldForm01::horizontal(psi.clone())), cfg.s0);
    let norms = norm_report(ops, &x, &y, &psi, cfg.s0);
    NormalFormResult {
        x,
        y,
        psi: DeformationTensor::new(psi),
        f,
        iterations: history.len(),
        defining_residual: last.map_or(f64::NAN, |r| r.chi_norm),
        gauge_residual: last.map_or(f64::NAN, |r| r.xi_norm),
        history,
        norms,
        converged,
        residual,
        harmonic_residual,
        trunc_mass,
    }
}

/// Recomputes ‖χ‖ + ‖ξ‖ for a given (X − iY = Z_f, ψ) independently of any iteration.
pub fn verify_solution(
    ops: &OperatorSuite,
    phi: &DeformationTensor,
    f: &SpectralScalar,
    psi: &DeformationTensor,
    cfg: &SolveConfig,
) -> Result<f64> {
    let (r, _, _) = residual(ops, phi, f, &psi.phi, cfg)?;
    Ok(r.chi_norm + r.xi_norm)
}

/// Outcome of the fixed-point iteration for T.
#[derive(Debug, Clone)]
pub struct ContractionReport {
    pub z: ComplexContactField,
    /// ‖Z_{n+1} − Z_n‖ / ‖Z_n − Z_{n−1}‖ for every step above the noise floor.
    pub ratios: Vec<f64>,
    pub increments: Vec<f64>,
    pub iterations: usize,
    pub w_norm: f64,
    pub z_norm: f64,
}

/// Increments below this fraction of ‖W‖ are treated as converged.
pub const CONTRACTION_TOL: f64 = 1e-12;

/// Solves T(Z) = Z + 𝒫E(π_Re Z, X₀, φ) = W by Z_{n+1} = W − 𝒫E(π_Re Z_n, X₀, φ).
///
/// The composition slot is frozen at F_{X₀}. Norms are Γ^s with s = `s`.
pub fn contraction_t(
    ops: &OperatorSuite,
    phi: &DeformationTensor,
    x0: &ContactField,
    w: &ComplexContactField,
    s: usize,
    max_iter: usize,
    flow: FlowConfig,
) -> Result<ContractionReport> {
    let sp = &ops.space;
    let f0 = ContactDiffeo::flow(sp, x0, flow)?;
    let w_norm = w.norm(ops, s);
    let mut z = complex_contact_from_f(ops, &sp.zero());
    let mut ratios = Vec::new();
    let mut increments: Vec<f64> = Vec::new();
    let floor = CONTRACTION_TOL * w_norm.max(f64::MIN_POSITIVE);
    for iter in 1..=max_iter {
        let x = pi_re(ops, &z);
        let fx = ContactDiffeo::flow(sp, &x, flow)?;
        let e = e_remainder_with(ops, &fx, &x, &f0, phi)?;
        let pe = ops.cal_p(&e);
        let next = ComplexContactField { f: w.f.sub(&pe.f), field: w.field.sub(&pe) };
        let inc = next.field.sub(&z.field);
        let d = ops.norm_field(&inc, s);
        if let Some(&prev) = increments.last() {
            if prev > 1e3 * floor {
                let ratio = d / prev;
                if ratio >= 1.0 {
                    return Err(Error::NotContracting { step: iter, ratio });
                }
                ratios.push(ratio);
            }
        }
        increments.push(d);
        z = next;
        if d <= floor {
            let z_norm = z.norm(ops, s);
            return Ok(ContractionReport { z, ratios, increments, iterations: iter, w_norm, z_norm });
        }
    }
    Err(Error::NotConverged { iterations: max_iter, residual: increments.last().copied().unwrap_or(f64::NAN) })
}

/// Differences between the normal forms of φ and G*φ.
#[derive(Debug, Clone)]
pub struct SliceReport {
    pub dy: f64,
    pub dpsi: f64,
    pub rel_y: f64,
    pub rel_psi: f64,
    pub first: NormalFormResult,
    pub second: NormalFormResult,
}

fn rel(d: f64, base: f64) -> f64 {
    if base > 0.0 {
        d / base
    } else {
        d
    }
}

pub fn slice_check(
    ops: &OperatorSuite,
    phi: &DeformationTensor,
    g: &ContactDiffeo,
    cfg: &SolveConfig,
) -> Result<SliceReport> {
    let first = solve(ops, phi, cfg)?;
    let (pulled, _) = pullback_deformation(&ops.space, g, phi)?;
    let second = solve(ops, &pulled, cfg)?;
    if !first.converged || !second.converged {
        let bad = if first.converged { &second } else { &first };
        return Err(Error::NotConverged { iterations: bad.iterations, residual: bad.residual });
    }
    let s = cfg.s0;
    let dy = ops.norm_field(&first.y.y.field.sub(&second.y.y.field), s);
    let dpsi = ops.norm_scalar(&first.psi.phi.sub(&second.psi.phi), s);
    let rel_y = rel(dy, first.y.y.norm(ops, s));
    let rel_psi = rel(dpsi, ops.norm_scalar(&first.psi.phi, s));
    Ok(SliceReport { dy, dpsi, rel_y, rel_psi, first, second })
}

/// Labels whose generating functions give fields with K X = 0.
pub fn gauge_transverse(l: &Label) -> bool {
    l.p >= 2 && l.q >= 2
}

/// Real scalar on gauge-transverse labels of degree ≤ d.
pub fn transverse_real(ops: &OperatorSuite, d: usize, rng: &mut ChaCha8Rng) -> SpectralScalar {
    let sp = &ops.space;
    sp.real_part(&random::scalar_on(sp, rng, |l| gauge_transverse(l) && l.degree() <= d))
}

/// Random contact field with K X = 0, scaled to ‖X‖_s = size.
pub fn transverse_contact_field(
    ops: &OperatorSuite,
    d: usize,
    s: usize,
    size: f64,
    rng: &mut ChaCha8Rng,
) -> Result<ContactField> {
    let g = transverse_real(ops, d, rng);
    let x = contact_from_generating(ops, &g)?;
    let n = x.norm(ops, s);
    Ok(x.scale(size / n))
}

/// Random H-valued deformation of degree ≤ d with ‖φ‖_s = size.
pub fn random_deformation(ops: &OperatorSuite, d: usize, s: usize, size: f64, rng: &mut ChaCha8Rng) -> DeformationTensor {
    let phi = random::scalar(&ops.space, d, rng);
    let n = ops.norm_scalar(&phi, s);
    DeformationTensor::new(phi.scale_re(size / n))
}

/// A forward-constructed normal form φ = i∂̄Y₀ + ψ₀.
#[derive(Debug, Clone)]
pub struct Prefab {
    pub phi: DeformationTensor,
    pub y0: VField,
    pub psi0: DeformationTensor,
}

/// Y₀ = Z_y with (I + □)y real and gauge-transverse, ψ₀ = 𝒬r, scaled so
/// that ‖φ‖_s = size.
pub fn prefab(ops: &OperatorSuite, d: usize, s: usize, size: f64, rng: &mut ChaCha8Rng) -> Prefab {
    let sp = &ops.space;
    let r = transverse_real(ops, d, rng);
    let mut y = sp.zero();
    for (l, rg) in sp.basis.blocks.iter().enumerate() {
        for (i, k) in rg.clone().enumerate() {
            y.coeffs[k] = r.coeffs[k] / (C64::new(1.0, 0.0) + ops.box_b.blocks[l][(i, i)]);
        }
    }
    let y0 = crate::contact_fields::v_field(ops, &y);
    let raw = random::scalar(sp, d, rng);
    let psi0 = ops.cal_q(&FieldForm01::horizontal(raw)).q;
    let phi = ops.dbar_field(&y0.y.field).q.scale(I).add(&psi0);
    let k = size / ops.norm_scalar(&phi, s);
    let y0 = crate::contact_fields::v_field(ops, &y.scale_re(k));
    Prefab { phi: DeformationTensor::new(phi.scale_re(k)), y0, psi0: DeformationTensor::new(psi0.scale_re(k)) }
}

/// φ = F_{X₀}*0 for a gauge-transverse X₀ with ‖∂̄X₀‖_s = size.
pub fn pullback_of_zero(
    ops: &OperatorSuite,
    d: usize,
    s: usize,
    size: f64,
    flow: FlowConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(DeformationTensor, ContactField)> {
    let g = transverse_real(ops, d, rng);
    let x = contact_from_generating(ops, &g)?;
    let lin = ops.norm_scalar(&crate::contact_flow::dbar_contact(ops, &x), s);
    let x0 = x.scale(size / lin);
    let f = ContactDiffeo::flow(&ops.space, &x0, flow)?;
    let (phi, _) = pullback_deformation(&ops.space, &f, &DeformationTensor::new(ops.space.zero()))?;
    Ok((phi, x0))
}

/// φ∘F_X with its truncation mass.
pub fn compose_with_flow(
    ops: &OperatorSuite,
    phi: &DeformationTensor,
    x: &ContactField,
    flow: FlowConfig,
) -> Result<(DeformationTensor, f64)> {
    let f = ContactDiffeo::flow(&ops.space, x, flow)?;
    Ok(composition_term(&ops.space, phi, &f))
}
