//! The round CR structure on S³ ⊂ C² in ambient coordinates.
//!
//! Frame:
//!   Z = z̄₂ ∂_{z₁} − z̄₁ ∂_{z₂},  Z̄ = z₂ ∂_{z̄₁} − z₁ ∂_{z̄₂},
//!   T = iκ (z₁∂_{z₁} + z₂∂_{z₂} − z̄₁∂_{z̄₁} − z̄₂∂_{z̄₂}),
//! contact form η = (a/2i)(z̄·dz − z·dz̄), coframe ω = z₂dz₁ − z₁dz₂.
//! The constants a and κ are solved from the Levi normalization
//! dη = (i/2) ω∧ω̄ and the Reeb condition η(T) = 1.

use std::collections::BTreeMap;

use crate::harmonic_basis::Monomial;
use crate::C64;

/// Sparse polynomial in (z, z̄).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly(pub BTreeMap<Monomial, C64>);

impl Poly {
    pub fn zero() -> Self {
        Poly(BTreeMap::new())
    }

    pub fn constant(c: C64) -> Self {
        Poly::term(Monomial::new(0, 0, 0, 0), c)
    }

    pub fn term(m: Monomial, c: C64) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    /// The coordinate z_j (j = 0, 1) or z̄_j (j = 2, 3).
    pub fn coord(j: usize) -> Self {
        let mut e = [0u32; 4];
        e[j] = 1;
        Poly::term(Monomial::new(e[0], e[1], e[2], e[3]), C64::new(1.0, 0.0))
    }

    pub fn add_term(&mut self, m: Monomial, c: C64) {
        let e = self.0.entry(m).or_insert(C64::new(0.0, 0.0));
        *e += c;
        if *e == C64::new(0.0, 0.0) {
            self.0.remove(&m);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(*m, *c);
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            out.add_term(*m, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            for (n, d) in &other.0 {
                let p = Monomial::new(m.a[0] + n.a[0], m.a[1] + n.a[1], m.b[0] + n.b[0], m.b[1] + n.b[1]);
                out.add_term(p, c * d);
            }
        }
        out
    }

    /// ∂/∂z_j for j = 0, 1 and ∂/∂z̄_{j−2} for j = 2, 3.
    pub fn partial(&self, j: usize) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            let mut e = [m.a[0], m.a[1], m.b[0], m.b[1]];
            if e[j] == 0 {
                continue;
            }
            let k = e[j] as f64;
            e[j] -= 1;
            out.add_term(Monomial::new(e[0], e[1], e[2], e[3]), c * k);
        }
        out
    }

    pub fn eval(&self, z: [C64; 2]) -> C64 {
        self.0.iter().map(|(m, c)| c * m.eval(z)).sum()
    }

    pub fn conj(&self) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            out.add_term(m.conj(), c.conj());
        }
        out
    }

    pub fn max_degree(&self) -> usize {
        self.0.keys().map(|m| m.degree()).max().unwrap_or(0)
    }
}

/// First-order operator Σ V^k ∂_k with k over (z₁, z₂, z̄₁, z̄₂).
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientField(pub [Poly; 4]);

impl AmbientField {
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut out = Poly::zero();
        for k in 0..4 {
            out = out.add(&self.0[k].mul(&f.partial(k)));
        }
        out
    }

    pub fn bracket(&self, other: &AmbientField) -> AmbientField {
        AmbientField(std::array::from_fn(|k| self.apply(&other.0[k]).sub(&other.apply(&self.0[k]))))
    }

    pub fn scale(&self, s: C64) -> AmbientField {
        AmbientField(std::array::from_fn(|k| self.0[k].scale(s)))
    }

    pub fn eval(&self, z: [C64; 2]) -> [C64; 4] {
        std::array::from_fn(|k| self.0[k].eval(z))
    }
}

/// One-form Σ α_k dx^k with k over (dz₁, dz₂, dz̄₁, dz̄₂).
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientForm(pub [Poly; 4]);

impl AmbientForm {
    pub fn pair(&self, v: &AmbientField) -> Poly {
        let mut out = Poly::zero();
        for k in 0..4 {
            out = out.add(&self.0[k].mul(&v.0[k]));
        }
        out
    }
}

/// Frame letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    T,
    Z,
    Zb,
}

/// Fixed reference CR geometry with derived normalization constants.
#[derive(Debug, Clone)]
pub struct ReferenceGeometry {
    /// Reeb scale κ in T = iκ(z·∂_z − z̄·∂_z̄).
    pub kappa: f64,
    /// η = (a/2i)(z̄·dz − z·dz̄).
    pub eta_scale: f64,
    /// Levi constant c in dη = (i/2) c ω∧ω̄ on the holomorphic frame.
    pub levi: f64,
    /// dη(Z, Z̄); multiplication by this constant is ♭ on H_{1,0}.
    pub flat_factor: C64,
    /// [Z, Z̄], [Z̄, T], [T, Z] as (T, Z, Z̄) coefficients.
    pub bracket_z_zb: [C64; 3],
    pub bracket_zb_t: [C64; 3],
    pub bracket_t_z: [C64; 3],
}

const I: C64 = C64::new(0.0, 1.0);

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn frame_z() -> AmbientField {
    AmbientField([Poly::coord(3), Poly::coord(2).scale(c(-1.0)), Poly::zero(), Poly::zero()])
}

pub fn frame_zb() -> AmbientField {
    AmbientField([Poly::zero(), Poly::zero(), Poly::coord(1), Poly::coord(0).scale(c(-1.0))])
}

pub fn frame_t(kappa: f64) -> AmbientField {
    let k = I * kappa;
    AmbientField([
        Poly::coord(0).scale(k),
        Poly::coord(1).scale(k),
        Poly::coord(2).scale(-k),
        Poly::coord(3).scale(-k),
    ])
}

pub fn contact_form(a: f64) -> AmbientForm {
    let s = C64::new(a, 0.0) / (I * 2.0);
    AmbientForm([
        Poly::coord(2).scale(s),
        Poly::coord(3).scale(s),
        Poly::coord(0).scale(-s),
        Poly::coord(1).scale(-s),
    ])
}

pub fn omega() -> AmbientForm {
    AmbientForm([Poly::coord(1), Poly::coord(0).scale(c(-1.0)), Poly::zero(), Poly::zero()])
}

pub fn omega_bar() -> AmbientForm {
    AmbientForm([Poly::zero(), Poly::zero(), Poly::coord(3), Poly::coord(2).scale(c(-1.0))])
}

/// dη(U, V) for η = (a/2i)(z̄·dz − z·dz̄), i.e. dη = i a Σ dz_j ∧ dz̄_j.
pub fn d_eta(a: f64, u: &AmbientField, v: &AmbientField) -> Poly {
    let mut out = Poly::zero();
    for j in 0..2 {
        out = out.add(&u.0[j].mul(&v.0[j + 2]).sub(&u.0[j + 2].mul(&v.0[j])));
    }
    out.scale(I * a)
}

/// |z₁|² + |z₂|² − 1.
pub fn defining_function() -> Poly {
    Poly::coord(0)
        .mul(&Poly::coord(2))
        .add(&Poly::coord(1).mul(&Poly::coord(3)))
        .add(&Poly::constant(c(-1.0)))
}

/// Value of a polynomial that must be constant on the sample points.
fn constant_value(p: &Poly, samples: &[[C64; 2]]) -> C64 {
    let v0 = p.eval(samples[0]);
    for z in samples {
        let v = p.eval(*z);
        assert!((v - v0).norm() < 1e-12 * (1.0 + v0.norm()), "expected a constant on S³");
    }
    v0
}

fn sample_points() -> Vec<[C64; 2]> {
    let mut out = Vec::new();
    for k in 0..7 {
        let t = (k as f64 + 0.5) / 7.0;
        let (a, b) = (0.7 * k as f64 + 0.3, 1.9 * k as f64 - 0.4);
        out.push([C64::from_polar(t.sqrt(), a), C64::from_polar((1.0 - t).sqrt(), b)]);
    }
    out
}

impl ReferenceGeometry {
    /// Derives a and κ from the normalizations and computes the structure
    /// constants from the ambient commutators.
    pub fn derive() -> Self {
        let samples = sample_points();
        let (z, zb) = (frame_z(), frame_zb());
        let levi1 = (constant_value(&d_eta(1.0, &z, &zb), &samples) * (-I)).re;
        let a = 1.0 / (2.0 * levi1);
        let reeb1 = constant_value(&contact_form(1.0).pair(&frame_t(1.0)), &samples).re;
        let kappa = 1.0 / (a * reeb1);
        let t = frame_t(kappa);
        let flat_factor = constant_value(&d_eta(a, &z, &zb), &samples);
        let decompose = |v: &AmbientField| -> [C64; 3] {
            [
                constant_value(&contact_form(a).pair(v), &samples),
                constant_value(&omega().pair(v), &samples),
                constant_value(&omega_bar().pair(v), &samples),
            ]
        };
        let bracket_z_zb = decompose(&z.bracket(&zb));
        let levi = 2.0 * (I * bracket_z_zb[0]).re;
        ReferenceGeometry {
            kappa,
            eta_scale: a,
            levi,
            flat_factor,
            bracket_z_zb,
            bracket_zb_t: decompose(&zb.bracket(&t)),
            bracket_t_z: decompose(&t.bracket(&z)),
        }
    }

    pub fn field(&self, letter: Frame) -> AmbientField {
        match letter {
            Frame::T => frame_t(self.kappa),
            Frame::Z => frame_z(),
            Frame::Zb => frame_zb(),
        }
    }

    pub fn eta(&self) -> AmbientForm {
        contact_form(self.eta_scale)
    }

    /// Eigenvalue of T on functions of bidegree (p, q).
    pub fn t_eigenvalue(&self, p: usize, q: usize) -> C64 {
        I * self.kappa * (p as f64 - q as f64)
    }

    /// η(v) for an ambient real tangent vector v = (dz₁, dz₂) at z.
    pub fn eta_at(&self, z: [C64; 2], v: [C64; 2]) -> f64 {
        self.eta_scale * (z[0].conj() * v[0] + z[1].conj() * v[1]).im
    }

    /// η of a complex tangent vector given by its (dz, dz̄) components.
    pub fn eta_complex(&self, z: [C64; 2], dz: [C64; 2], dzb: [C64; 2]) -> C64 {
        let s = C64::new(self.eta_scale, 0.0) / (I * 2.0);
        s * (z[0].conj() * dz[0] + z[1].conj() * dz[1] - z[0] * dzb[0] - z[1] * dzb[1])
    }

    /// Pointwise residuals of the frame conditions at the given points:
    /// (max |η(T) − 1|, max |T⌟dη| on Z, Z̄, min −i dη(Z, Z̄), max tangency defect).
    pub fn frame_residuals(&self, points: &[[C64; 2]]) -> FrameResiduals {
        let (t, z, zb) = (self.field(Frame::T), frame_z(), frame_zb());
        let eta = self.eta();
        let eta_t = eta.pair(&t);
        let eta_z = eta.pair(&z);
        let eta_zb = eta.pair(&zb);
        let om_z = omega().pair(&z);
        let om_zb = omega().pair(&zb);
        let tz = d_eta(self.eta_scale, &t, &z);
        let tzb = d_eta(self.eta_scale, &t, &zb);
        let levi = d_eta(self.eta_scale, &z, &zb);
        let rho = defining_function();
        let tang = [t.apply(&rho), z.apply(&rho), zb.apply(&rho)];
        let mut r = FrameResiduals { min_levi: f64::INFINITY, ..Default::default() };
        for p in points {
            r.reeb = r.reeb.max((eta_t.eval(*p) - 1.0).norm());
            r.reeb_dual = r.reeb_dual.max(tz.eval(*p).norm()).max(tzb.eval(*p).norm());
            r.horizontal = r.horizontal.max(eta_z.eval(*p).norm()).max(eta_zb.eval(*p).norm());
            r.coframe = r.coframe.max((om_z.eval(*p) - 1.0).norm()).max(om_zb.eval(*p).norm());
            r.min_levi = r.min_levi.min((levi.eval(*p) * (-I)).re);
            for q in &tang {
                r.tangency = r.tangency.max(q.eval(*p).norm());
            }
        }
        r
    }
}

/// Worst-case frame-condition residuals over a point set.
#[derive(Debug, Clone, Copy, Default)]
pub struct FrameResiduals {
    pub reeb: f64,
    pub reeb_dual: f64,
    pub horizontal: f64,
    pub coframe: f64,
    pub min_levi: f64,
    pub tangency: f64,
}
