//! Time-1 flows of contact fields and the pullback action on CR structures.
//!
//! Every standard quadrature node is integrated with classical RK4 in C²
//! together with the variational equation for the real frame T, X₁ = Z + Z̄,
//! X₂ = i(Z − Z̄). Pullbacks are nodewise formulas followed by L² projection.

use crate::contact_fields::ContactField;
use crate::cr_operators::{FieldForm01, OperatorSuite};
use crate::error::{Error, Result};
use crate::harmonic_basis::{Jet, PointEvaluator, SpectralScalar, SpectralSpace};
use crate::par::{map_indexed, Exec};
use crate::C64;

/// Default number of RK4 steps on [0, 1].
pub const DEFAULT_STEPS: usize = 32;
/// Step count ceiling for the doubling refinement.
pub const MAX_STEPS: usize = 4096;
/// Largest tolerated |η(F_*Z)| / |η(F_*T)| at a node.
pub const CONTACT_TOL: f64 = 1e-8;
/// Smallest tolerated |A| in the pullback formula.
pub const MIN_TRANSVERSALITY: f64 = 0.1;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// φ ω̄⊗Z.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationTensor {
    pub phi: SpectralScalar,
}

impl DeformationTensor {
    pub fn new(phi: SpectralScalar) -> Self {
        DeformationTensor { phi }
    }

    /// max |φ| over the standard grid.
    pub fn sup_abs(&self, space: &SpectralSpace) -> f64 {
        space.synthesize(&self.phi).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn norm(&self, space: &SpectralSpace, s: usize) -> f64 {
        space.fs_norm(&self.phi, s)
    }

    pub fn as_form(&self) -> FieldForm01 {
        FieldForm01::horizontal(self.phi.clone())
    }
}

/// Integration settings.
#[derive(Debug, Clone, Copy)]
pub struct FlowConfig {
    pub steps: usize,
    pub max_steps: usize,
    pub contact_tol: f64,
    pub exec: Exec,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { steps: DEFAULT_STEPS, max_steps: MAX_STEPS, contact_tol: CONTACT_TOL, exec: Exec::default() }
    }
}

impl FlowConfig {
    pub fn with_steps(steps: usize) -> Self {
        FlowConfig { steps, ..Default::default() }
    }
}

/// Ambient (dz₁, dz₂) components of a real tangent vector.
pub type Tangent = [C64; 2];

/// Node images and pushed-forward frame of a composition of contact flows.
#[derive(Debug, Clone)]
pub struct ContactDiffeo {
    /// Generators applied in order (first one acts first).
    pub generators: Vec<ContactField>,
    pub steps: Vec<usize>,
    /// F(x) at every standard grid node.
    pub points: Vec<[C64; 2]>,
    /// F_*(T, X₁, X₂) minus the reference frame (T, X₁, X₂) at F(x).
    pub dev: Vec<[Tangent; 3]>,
    /// Worst contact ratio |η(F_*Z)| / |η(F_*T)|.
    pub contact_ratio: f64,
}

/// Real frame (T, X₁, X₂) at z.
pub fn frame_at(kappa: f64, z: [C64; 2]) -> [Tangent; 3] {
    let zz = [z[1].conj(), -z[0].conj()];
    [[I * kappa * z[0], I * kappa * z[1]], zz, [I * zz[0], I * zz[1]]]
}

struct Velocity<'a> {
    g: &'a PointEvaluator,
    h: &'a PointEvaluator,
    kappa: f64,
}

impl Velocity<'_> {
    /// v(z) and the rate of change of the frame deviations d, where the
    /// transported frame is frame_at(z) + d.
    fn eval(&self, z: [C64; 2], dev: &[Tangent; 3]) -> ([C64; 2], [Tangent; 3]) {
        let g: Jet = self.g.jet(z);
        let h: Jet = self.h.jet(z);
        let ik = I * self.kappa;
        let j = [z[1].conj(), -z[0].conj()];
        let v = [ik * g.value * z[0] + h.value * j[0], ik * g.value * z[1] + h.value * j[1]];
        let mut a = [[ZERO; 2]; 2];
        let mut b = [[ZERO; 2]; 2];
        for i in 0..2 {
            for k in 0..2 {
                a[i][k] = ik * g.dz[k] * z[i] + h.dz[k] * j[i];
                b[i][k] = ik * g.dzb[k] * z[i] + h.dzb[k] * j[i];
            }
            a[i][i] += ik * g.value;
        }
        b[0][1] += h.value;
        b[1][0] -= h.value;
        let dv = |w: &Tangent| -> Tangent {
            let mut o = [ZERO; 2];
            for i in 0..2 {
                o[i] = a[i][0] * w[0] + a[i][1] * w[1] + b[i][0] * w[0].conj() + b[i][1] * w[1].conj();
            }
            o
        };
        // derivative of the reference frame along v
        let jv = [v[1].conj(), -v[0].conj()];
        let dframe = [[ik * v[0], ik * v[1]], jv, [I * jv[0], I * jv[1]]];
        let frame = frame_at(self.kappa, z);
        let mut out = [[ZERO; 2]; 3];
        for r in 0..3 {
            let w = [frame[r][0] + dev[r][0], frame[r][1] + dev[r][1]];
            let d = dv(&w);
            out[r] = [d[0] - dframe[r][0], d[1] - dframe[r][1]];
        }
        (v, out)
    }
}

fn axpy(z: [C64; 2], s: f64, v: [C64; 2]) -> [C64; 2] {
    [z[0] + v[0] * s, z[1] + v[1] * s]
}

fn axpy3(z: &[Tangent; 3], s: f64, v: &[Tangent; 3]) -> [Tangent; 3] {
    [axpy(z[0], s, v[0]), axpy(z[1], s, v[1]), axpy(z[2], s, v[2])]
}

fn integrate_node(vel: &Velocity, steps: usize, mut z: [C64; 2], mut d: [Tangent; 3]) -> ([C64; 2], [Tangent; 3]) {
    let dt = 1.0 / steps as f64;
    for _ in 0..steps {
        let (k1, l1) = vel.eval(z, &d);
        let (k2, l2) = vel.eval(axpy(z, dt / 2.0, k1), &axpy3(&d, dt / 2.0, &l1));
        let (k3, l3) = vel.eval(axpy(z, dt / 2.0, k2), &axpy3(&d, dt / 2.0, &l2));
        let (k4, l4) = vel.eval(axpy(z, dt, k3), &axpy3(&d, dt, &l3));
        for i in 0..2 {
            z[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
            for v in 0..3 {
                d[v][i] += (l1[v][i] + (l2[v][i] + l3[v][i]) * 2.0 + l4[v][i]) * (dt / 6.0);
            }
        }
        let r = (z[0].norm_sqr() + z[1].norm_sqr()).sqrt();
        z = [z[0] / r, z[1] / r];
        for v in d.iter_mut() {
            let radial = (z[0].conj() * v[0] + z[1].conj() * v[1]).re;
            v[0] -= z[0] * radial;
            v[1] -= z[1] * radial;
        }
    }
    (z, d)
}

/// Pushes points and frame deviations through the time-1 flow of `x`.
pub fn transport(
    space: &SpectralSpace,
    x: &ContactField,
    steps: usize,
    exec: Exec,
    points: &[[C64; 2]],
    dev: &[[Tangent; 3]],
) -> (Vec<[C64; 2]>, Vec<[Tangent; 3]>) {
    let g = space.evaluator(&x.g);
    let h = space.evaluator(&x.h);
    let vel = Velocity { g: &g, h: &h, kappa: space.geometry.kappa };
    let out = map_indexed(exec, points.len(), |i| integrate_node(&vel, steps, points[i], dev[i]));
    out.into_iter().unzip()
}

/// |η(F_*Z)| / |η(F_*T)| at one node, from the frame deviations.
pub fn contact_ratio_at(space: &SpectralSpace, z: [C64; 2], dev: &[Tangent; 3]) -> f64 {
    let g = &space.geometry;
    let t = frame_at(g.kappa, z)[0];
    let eta_t = g.eta_at(z, [t[0] + dev[0][0], t[1] + dev[0][1]]);
    let (dz, dzb) = push_z(dev);
    g.eta_complex(z, dz, dzb).norm() / eta_t.abs()
}

/// (dz, dz̄) components of (V₁ − iV₂)/2 for real vectors V₁, V₂ in slots 1, 2.
fn push_z(w: &[Tangent; 3]) -> ([C64; 2], [C64; 2]) {
    let dz = [(w[1][0] - I * w[2][0]) * 0.5, (w[1][1] - I * w[2][1]) * 0.5];
    let dzb = [(w[1][0].conj() - I * w[2][0].conj()) * 0.5, (w[1][1].conj() - I * w[2][1].conj()) * 0.5];
    (dz, dzb)
}

impl ContactDiffeo {
    pub fn identity(space: &SpectralSpace) -> Self {
        let points = space.grid.grid.nodes();
        let dev = vec![[[ZERO; 2]; 3]; points.len()];
        ContactDiffeo { generators: Vec::new(), steps: Vec::new(), points, dev, contact_ratio: 0.0 }
    }

    /// Time-1 flow of `x` with doubling until the contact invariant holds.
    pub fn flow(space: &SpectralSpace, x: &ContactField, cfg: FlowConfig) -> Result<Self> {
        Self::identity(space).then(space, x, cfg)
    }

    /// (flow of x) ∘ self.
    pub fn then(&self, space: &SpectralSpace, x: &ContactField, cfg: FlowConfig) -> Result<Self> {
        let mut generators = self.generators.clone();
        let mut steps_log = self.steps.clone();
        if x.is_zero() {
            generators.push(x.clone());
            steps_log.push(0);
            return Ok(ContactDiffeo { generators, steps: steps_log, ..self.clone() });
        }
        let mut steps = cfg.steps.max(1);
        loop {
            let (points, dev) = transport(space, x, steps, cfg.exec, &self.points, &self.dev);
            let ratio = points
                .iter()
                .zip(&dev)
                .map(|(z, w)| contact_ratio_at(space, *z, w))
                .fold(0.0, f64::max);
            if ratio < cfg.contact_tol {
                generators.push(x.clone());
                steps_log.push(steps);
                return Ok(ContactDiffeo { generators, steps: steps_log, points, dev, contact_ratio: ratio.max(self.contact_ratio) });
            }
            if steps * 2 > cfg.max_steps {
                return Err(Error::ContactDrift { steps, ratio });
            }
            steps *= 2;
        }
    }

    /// F₂ ∘ F₁ with F₁ = self.
    pub fn compose(&self, space: &SpectralSpace, second: &ContactDiffeo) -> Result<Self> {
        let mut out = self.clone();
        for (x, &s) in second.generators.iter().zip(&second.steps) {
            out = out.then(space, x, FlowConfig::with_steps(s.max(1)))?;
        }
        Ok(out)
    }

    /// max over nodes of ||F(x)|² − 1|.
    pub fn sphere_defect(&self) -> f64 {
        self.points.iter().map(|z| (z[0].norm_sqr() + z[1].norm_sqr() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Largest node displacement from `other`.
    pub fn distance(&self, other: &ContactDiffeo) -> f64 {
        self.points
            .iter()
            .zip(&other.points)
            .map(|(a, b)| ((a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr()).sqrt())
            .fold(0.0, f64::max)
    }

    /// F_*(T, X₁, X₂) at node i.
    pub fn push(&self, kappa: f64, i: usize) -> [Tangent; 3] {
        let f = frame_at(kappa, self.points[i]);
        let d = &self.dev[i];
        [0, 1, 2].map(|r| [f[r][0] + d[r][0], f[r][1] + d[r][1]])
    }

    /// (A, B) of the pulled-back coframe ω + (φ∘F) ω̄ on (Z, Z̄) at node i.
    ///
    /// At the image point ω(Z) = ω̄(Z̄) = 1 and ω(Z̄) = ω̄(Z) = 0, so only the
    /// frame deviations enter beyond those constants.
    pub fn frame_data(&self, i: usize, phi_at_image: C64) -> (C64, C64) {
        let w = self.points[i];
        let (dz, dzb) = push_z(&self.dev[i]);
        let om = |dz: [C64; 2]| w[1] * dz[0] - w[0] * dz[1];
        let omb = |dzb: [C64; 2]| w[1].conj() * dzb[0] - w[0].conj() * dzb[1];
        // deviation of F_*Z̄ is the conjugate of that of F_*Z
        let dz_bar = [dzb[0].conj(), dzb[1].conj()];
        let dzb_bar = [dz[0].conj(), dz[1].conj()];
        let a = C64::new(1.0, 0.0) + om(dz) + phi_at_image * omb(dzb);
        let b = om(dz_bar) + phi_at_image * (C64::new(1.0, 0.0) + omb(dzb_bar));
        (a, b)
    }
}

/// Values of f at the mapped nodes.
pub fn values_at(space: &SpectralSpace, f: &SpectralScalar, points: &[[C64; 2]], exec: Exec) -> Vec<C64> {
    let ev = space.evaluator(f);
    map_indexed(exec, points.len(), |i| ev.value(points[i]))
}

/// f∘F projected to degree ≤ N, with the discarded mass.
pub fn pullback_scalar(space: &SpectralSpace, f_map: &ContactDiffeo, f: &SpectralScalar) -> (SpectralScalar, f64) {
    if f_map.generators.iter().all(|g| g.is_zero()) {
        return (f.clone(), 0.0);
    }
    let vals = values_at(space, f, &f_map.points, Exec::default());
    space.project_values(&vals)
}

/// μ = B/A nodewise with A, B from the pushforward of `frame` and φ sampled
/// at the images of `compose`; projected to degree ≤ N.
pub fn pullback_mixed(
    space: &SpectralSpace,
    frame: &ContactDiffeo,
    compose: &ContactDiffeo,
    phi: &DeformationTensor,
) -> Result<(DeformationTensor, f64)> {
    let vals = if phi.phi.is_zero() {
        vec![ZERO; compose.points.len()]
    } else {
        values_at(space, &phi.phi, &compose.points, Exec::default())
    };
    let mut mu = Vec::with_capacity(vals.len());
    for (i, v) in vals.iter().enumerate() {
        let (a, b) = frame.frame_data(i, *v);
        if a.norm() < MIN_TRANSVERSALITY {
            return Err(Error::Neighbourhood(format!("|A| = {:.3e} at node {i}", a.norm())));
        }
        mu.push(b / a);
    }
    let (m, mass) = space.project_values(&mu);
    Ok((DeformationTensor::new(m), mass))
}

/// F*φ with coefficient μ = B/A.
pub fn pullback_deformation(
    space: &SpectralSpace,
    f_map: &ContactDiffeo,
    phi: &DeformationTensor,
) -> Result<(DeformationTensor, f64)> {
    if f_map.generators.iter().all(|g| g.is_zero()) {
        return Ok((phi.clone(), 0.0));
    }
    pullback_mixed(space, f_map, f_map, phi)
}

/// φ∘F (the frozen composition term).
pub fn composition_term(space: &SpectralSpace, phi: &DeformationTensor, f_map: &ContactDiffeo) -> (DeformationTensor, f64) {
    let (c, m) = pullback_scalar(space, f_map, &phi.phi);
    (DeformationTensor::new(c), m)
}

/// H-part of ∂̄X for a real contact field.
pub fn dbar_contact(ops: &OperatorSuite, x: &ContactField) -> SpectralScalar {
    ops.dbar_field(&x.hol()).q
}

/// E(X, Y, φ) = F_X*φ|_{φ sampled on F_Y} − ∂̄X − φ∘F_Y as an H-valued form.
pub fn e_remainder_with(
    ops: &OperatorSuite,
    fx: &ContactDiffeo,
    x: &ContactField,
    fy: &ContactDiffeo,
    phi: &DeformationTensor,
) -> Result<FieldForm01> {
    let sp = &ops.space;
    let (mu, _) = if x.is_zero() && std::ptr::eq(fx, fy) {
        (phi.clone(), 0.0)
    } else {
        pullback_mixed(sp, fx, fy, phi)?
    };
    let (comp, _) = composition_term(sp, phi, fy);
    let e = mu.phi.sub(&dbar_contact(ops, x)).sub(&comp.phi);
    Ok(FieldForm01::horizontal(e))
}

/// E(X, X, φ).
pub fn e_remainder(ops: &OperatorSuite, x: &ContactField, phi: &DeformationTensor, cfg: FlowConfig) -> Result<FieldForm01> {
    let f = ContactDiffeo::flow(&ops.space, x, cfg)?;
    e_remainder_with(ops, &f, x, &f, phi)
}

/// Largest node error against the Hopf rotation z ↦ e^{iκc}z (generator g ≡ c).
pub fn hopf_error(space: &SpectralSpace, f_map: &ContactDiffeo, c: f64) -> f64 {
    let rot = C64::from_polar(1.0, space.geometry.kappa * c);
    let nodes = space.grid.grid.nodes();
    f_map
        .points
        .iter()
        .zip(&nodes)
        .map(|(p, z)| ((p[0] - rot * z[0]).norm_sqr() + (p[1] - rot * z[1]).norm_sqr()).sqrt())
        .fold(0.0, f64::max)
}
