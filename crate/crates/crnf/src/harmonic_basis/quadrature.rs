//! Product quadrature on S³ in Hopf coordinates.
//!
//! Nodes are z = (√t e^{iα}, √(1−t) e^{iβ}) with Gauss-Legendre t ∈ [0, 1] and
//! uniform α, β. For the normalized measure dσ = dt dα dβ / 4π² the rule is
//! exact on every restricted monomial of degree ≤ D when the angular grids
//! have D + 1 points and the radial rule has ⌈(D/2 + 1)/2⌉ points.

use std::f64::consts::PI;

use crate::C64;

#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    /// Monomial degree integrated exactly.
    pub exact_degree: usize,
    /// Gauss-Legendre nodes on [0, 1].
    pub t: Vec<f64>,
    /// Gauss-Legendre weights on [0, 1] (summing to 1).
    pub wt: Vec<f64>,
    /// Points per angular direction.
    pub m: usize,
}

impl QuadratureGrid {
    pub fn new(exact_degree: usize) -> Self {
        let m = exact_degree + 1;
        let nt = (exact_degree / 2 + 1).div_ceil(2);
        let (t, wt) = gauss_legendre_unit(nt);
        QuadratureGrid { exact_degree, t, wt, m }
    }

    pub fn nt(&self) -> usize {
        self.t.len()
    }

    pub fn len(&self) -> usize {
        self.nt() * self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Decomposes a flat node index into (radial, α, β) indices.
    pub fn split(&self, idx: usize) -> (usize, usize, usize) {
        let mm = self.m * self.m;
        (idx / mm, (idx % mm) / self.m, idx % self.m)
    }

    pub fn angle(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.m as f64
    }

    pub fn node(&self, idx: usize) -> [C64; 2] {
        let (it, ia, ib) = self.split(idx);
        let t = self.t[it];
        [
            C64::from_polar(t.sqrt(), self.angle(ia)),
            C64::from_polar((1.0 - t).sqrt(), self.angle(ib)),
        ]
    }

    pub fn nodes(&self) -> Vec<[C64; 2]> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    pub fn weight(&self, idx: usize) -> f64 {
        let (it, _, _) = self.split(idx);
        self.wt[it] / (self.m * self.m) as f64
    }

    /// Σ w_i f(x_i).
    pub fn integrate(&self, values: &[C64]) -> C64 {
        let mm = self.m * self.m;
        let mut acc = C64::new(0.0, 0.0);
        for (it, w) in self.wt.iter().enumerate() {
            let s: C64 = values[it * mm..(it + 1) * mm].iter().sum();
            acc += s * (*w / mm as f64);
        }
        acc
    }
}

/// Gauss-Legendre rule with n points mapped to [0, 1].
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}
