//! Exact truncated spectral calculus on S³.

mod basis;
mod eval;
mod frame;
mod monomial;
mod quadrature;
mod transform;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

pub use basis::{Basis, BasisFunction, Label};
pub use eval::{Jet, PointEvaluator};
pub use frame::LabelMap;
pub use monomial::{exact_inner, inner_f64, moment_f64, monomials_up_to, sphere_moment, Factorials, Monomial};
pub use quadrature::{gauss_legendre_unit, QuadratureGrid};
pub use transform::GridTransform;

pub use crate::geometry::ReferenceGeometry;
use crate::C64;

/// Largest Folland-Stein order with precomputed weights.
pub const MAX_NORM_ORDER: usize = 16;

/// Frame letter for derivative words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Letter {
    T,
    Z,
    Zb,
}

/// Order s of a Folland-Stein norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NormOrder(pub usize);

/// Complex function on S³ as coefficients over the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralScalar {
    pub degree: usize,
    pub coeffs: Vec<C64>,
}

impl SpectralScalar {
    pub fn zeros(degree: usize, len: usize) -> Self {
        SpectralScalar { degree, coeffs: vec![C64::new(0.0, 0.0); len] }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|a| a * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.map(|a| a * s)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        SpectralScalar { degree: self.degree, coeffs: self.coeffs.iter().map(|a| f(*a)).collect() }
    }

    pub fn zip(&self, o: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.coeffs.len(), o.coeffs.len(), "degree mismatch");
        SpectralScalar {
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    /// Coefficient-space L² norm.
    pub fn l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == C64::new(0.0, 0.0))
    }
}

/// Basis, grids and frame operators at a fixed truncation degree.
#[derive(Debug)]
pub struct SpectralSpace {
    pub basis: Basis,
    pub geometry: ReferenceGeometry,
    /// Grid exact to degree 2N + 4.
    pub grid: GridTransform,
    /// Grid exact to degree 4N, used for products.
    pub fine: GridTransform,
    pub z: LabelMap,
    pub zb: LabelMap,
    pub t: Vec<C64>,
    /// Largest relative image mass outside the target function.
    pub frame_defect: f64,
    weights: Vec<Vec<f64>>,
}

/// Standard grid exactness degree at truncation N.
pub fn standard_exactness(n: usize) -> usize {
    2 * n + 4
}

impl SpectralSpace {
    pub fn new(n: usize) -> Self {
        let basis = Basis::build(n);
        let geometry = ReferenceGeometry::derive();
        let (z, dz) = frame::horizontal_map(&basis, &geometry.field(crate::geometry::Frame::Z), -1);
        let (zb, dzb) = frame::horizontal_map(&basis, &geometry.field(crate::geometry::Frame::Zb), 1);
        let t = frame::t_diagonal(&basis, &geometry);
        let grid = GridTransform::new(&basis, QuadratureGrid::new(standard_exactness(n)));
        let fine = GridTransform::new(&basis, QuadratureGrid::new((4 * n).max(standard_exactness(n))));
        let weights = norm_weights(&z, &zb, basis.len());
        SpectralSpace { basis, geometry, grid, fine, z, zb, t, frame_defect: dz.max(dzb), weights }
    }

    /// Process-wide cached space for degree n.
    pub fn shared(n: usize) -> Arc<SpectralSpace> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<SpectralSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("space cache poisoned");
        guard.entry(n).or_insert_with(|| Arc::new(SpectralSpace::new(n))).clone()
    }

    pub fn degree(&self) -> usize {
        self.basis.degree
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn zero(&self) -> SpectralScalar {
        SpectralScalar::zeros(self.degree(), self.dim())
    }

    pub fn constant(&self, c: C64) -> SpectralScalar {
        let mut f = self.zero();
        f.coeffs[0] = c;
        f
    }

    pub fn from_coeffs(&self, coeffs: Vec<C64>) -> SpectralScalar {
        assert_eq!(coeffs.len(), self.dim());
        SpectralScalar { degree: self.degree(), coeffs }
    }

    /// Exact L² projection of a polynomial of degree ≤ N.
    pub fn from_polynomial(&self, terms: &[(Monomial, C64)]) -> SpectralScalar {
        let mut f = self.zero();
        for (k, e) in self.basis.functions.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (m, c) in terms {
                for (n, d) in &e.monomials {
                    acc += c * (d * inner_f64(m, n));
                }
            }
            f.coeffs[k] = acc;
        }
        f
    }

    pub fn monomial(&self, m: Monomial) -> SpectralScalar {
        self.from_polynomial(&[(m, C64::new(1.0, 0.0))])
    }

    pub fn conj(&self, f: &SpectralScalar) -> SpectralScalar {
        let mut out = self.zero();
        for (k, c) in f.coeffs.iter().enumerate() {
            let (j, s) = self.basis.conj_of(k);
            out.coeffs[j] = c.conj() * s;
        }
        out
    }

    pub fn real_part(&self, f: &SpectralScalar) -> SpectralScalar {
        f.add(&self.conj(f)).scale_re(0.5)
    }

    pub fn imag_part(&self, f: &SpectralScalar) -> SpectralScalar {
        f.sub(&self.conj(f)).scale(C64::new(0.0, -0.5))
    }

    /// L² norm of the imaginary part.
    pub fn imag_mass(&self, f: &SpectralScalar) -> f64 {
        self.imag_part(f).l2()
    }

    pub fn apply(&self, f: &SpectralScalar, letter: Letter) -> SpectralScalar {
        let coeffs = match letter {
            Letter::Z => self.z.apply(&f.coeffs),
            Letter::Zb => self.zb.apply(&f.coeffs),
            Letter::T => f.coeffs.iter().zip(&self.t).map(|(a, b)| a * b).collect(),
        };
        SpectralScalar { degree: f.degree, coeffs }
    }

    /// X_I f = X_{i₁}(X_{i₂}(⋯ X_{i_t} f)).
    pub fn frame_derivative(&self, f: &SpectralScalar, word: &[Letter]) -> SpectralScalar {
        word.iter().rev().fold(f.clone(), |acc, l| self.apply(&acc, *l))
    }

    pub fn multiply(&self, f: &SpectralScalar, g: &SpectralScalar) -> SpectralScalar {
        self.multiply_with_mass(f, g).0
    }

    /// Product projected to degree ≤ N together with the discarded L² mass.
    pub fn multiply_with_mass(&self, f: &SpectralScalar, g: &SpectralScalar) -> (SpectralScalar, f64) {
        let a = self.fine.synthesize(&f.coeffs);
        let b = self.fine.synthesize(&g.coeffs);
        let prod: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let coeffs = self.fine.analyze(&prod, self.dim());
        let total: f64 = self.fine.grid.integrate(&prod.iter().map(|v| C64::new(v.norm_sqr(), 0.0)).collect::<Vec<_>>()).re;
        let kept: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        (self.from_coeffs(coeffs), (total - kept).max(0.0).sqrt())
    }

    /// Values at the standard grid nodes.
    pub fn synthesize(&self, f: &SpectralScalar) -> Vec<C64> {
        self.grid.synthesize(&f.coeffs)
    }

    /// L² projection of standard-grid values plus the discarded mass.
    pub fn project_values(&self, values: &[C64]) -> (SpectralScalar, f64) {
        let coeffs = self.grid.analyze(values, self.dim());
        let total = self.grid.grid.integrate(&values.iter().map(|v| C64::new(v.norm_sqr(), 0.0)).collect::<Vec<_>>()).re;
        let kept: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        (self.from_coeffs(coeffs), (total - kept).max(0.0).sqrt())
    }

    pub fn evaluator(&self, f: &SpectralScalar) -> PointEvaluator {
        PointEvaluator::new(&self.basis, &f.coeffs)
    }

    /// Folland-Stein norm: sqrt Σ_{|I| ≤ s} ‖X_I f‖² over words in {Z, Z̄}.
    pub fn fs_norm(&self, f: &SpectralScalar, s: usize) -> f64 {
        assert!(s <= MAX_NORM_ORDER, "norm order above {MAX_NORM_ORDER}");
        let w = &self.weights[s];
        f.coeffs.iter().zip(w).map(|(c, w)| c.norm_sqr() * w).sum::<f64>().sqrt()
    }

    /// Squared Folland-Stein norm.
    pub fn fs_norm2(&self, f: &SpectralScalar, s: usize) -> f64 {
        let w = &self.weights[s];
        f.coeffs.iter().zip(w).map(|(c, w)| c.norm_sqr() * w).sum()
    }

    /// Reference implementation of [`Self::fs_norm`] enumerating every word.
    pub fn fs_norm_by_words(&self, f: &SpectralScalar, s: usize) -> f64 {
        fn walk(space: &SpectralSpace, v: &SpectralScalar, depth: usize, s: usize, acc: &mut f64) {
            *acc += v.l2().powi(2);
            if depth == s || v.is_zero() {
                return;
            }
            for l in [Letter::Z, Letter::Zb] {
                walk(space, &space.apply(v, l), depth + 1, s, acc);
            }
        }
        let mut acc = 0.0;
        walk(self, f, 0, s, &mut acc);
        acc.sqrt()
    }

    /// Scalars supported on blocks of degree ≤ d.
    pub fn band_limit(&self, f: &SpectralScalar, d: usize) -> SpectralScalar {
        let mut out = f.clone();
        for (k, c) in out.coeffs.iter_mut().enumerate() {
            if self.basis.functions[k].label.degree() > d {
                *c = C64::new(0.0, 0.0);
            }
        }
        out
    }
}

/// W_s(k) = Σ_{|I| ≤ s} ‖X_I e_k‖², from the one-entry-per-column structure.
fn norm_weights(z: &LabelMap, zb: &LabelMap, n: usize) -> Vec<Vec<f64>> {
    let mut level = vec![1.0; n];
    let mut total = level.clone();
    let mut out = vec![total.clone()];
    for _ in 1..=MAX_NORM_ORDER {
        let mut next = vec![0.0; n];
        for (k, v) in next.iter_mut().enumerate() {
            for m in [z, zb] {
                if let Some(j) = m.target[k] {
                    *v += m.factor[k].norm_sqr() * level[j];
                }
            }
        }
        level = next;
        for (t, l) in total.iter_mut().zip(&level) {
            *t += l;
        }
        out.push(total.clone());
    }
    out
}
