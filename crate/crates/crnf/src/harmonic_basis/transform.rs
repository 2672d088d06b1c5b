//! Synthesis and analysis between coefficients and grid values.
//!
//! A basis function separates on the grid as R(t) e^{i(m₁α + m₂β)}, so each
//! radial layer is a 2D discrete Fourier transform of a sparse frequency table.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::basis::Basis;
use super::quadrature::QuadratureGrid;
use crate::C64;

pub struct GridTransform {
    pub grid: QuadratureGrid,
    /// R_k(t_i) stored row-major by basis index.
    radial: Vec<f64>,
    /// Frequency slot (m₁ mod M) · M + (m₂ mod M) per basis index.
    slots: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for GridTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridTransform").field("grid", &self.grid).finish()
    }
}

impl GridTransform {
    pub fn new(basis: &Basis, grid: QuadratureGrid) -> Self {
        let m = grid.m;
        assert!(m > 2 * basis.degree, "angular grid too coarse for synthesis");
        let nt = grid.nt();
        let mut radial = vec![0.0; basis.len() * nt];
        let mut slots = Vec::with_capacity(basis.len());
        for (k, f) in basis.functions.iter().enumerate() {
            let (m1, m2) = (f.m1(), f.m2());
            for (i, &t) in grid.t.iter().enumerate() {
                let poly = horner(&f.radial, t);
                let env = t.powf(m1.unsigned_abs() as f64 / 2.0) * (1.0 - t).powf(m2.unsigned_abs() as f64 / 2.0);
                radial[k * nt + i] = env * poly;
            }
            let s1 = m1.rem_euclid(m as i32) as usize;
            let s2 = m2.rem_euclid(m as i32) as usize;
            slots.push(s1 * m + s2);
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        GridTransform { grid, radial, slots, forward, inverse }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Values Σ c_k e_k(x) at every grid node.
    pub fn synthesize(&self, coeffs: &[C64]) -> Vec<C64> {
        let m = self.grid.m;
        let mm = m * m;
        let nt = self.grid.nt();
        let mut out = vec![C64::new(0.0, 0.0); nt * mm];
        for it in 0..nt {
            let layer = &mut out[it * mm..(it + 1) * mm];
            for (k, c) in coeffs.iter().enumerate() {
                layer[self.slots[k]] += c * self.radial[k * nt + it];
            }
            self.fft2(layer, false);
        }
        out
    }

    /// L² projection Σ_x w(x) v(x) conj(e_k(x)) for every basis index k.
    pub fn analyze(&self, values: &[C64], n_coeffs: usize) -> Vec<C64> {
        let m = self.grid.m;
        let mm = m * m;
        let nt = self.grid.nt();
        let mut out = vec![C64::new(0.0, 0.0); n_coeffs];
        let mut layer = vec![C64::new(0.0, 0.0); mm];
        for it in 0..nt {
            layer.copy_from_slice(&values[it * mm..(it + 1) * mm]);
            self.fft2(&mut layer, true);
            let w = self.grid.wt[it] / mm as f64;
            for (k, o) in out.iter_mut().enumerate() {
                *o += layer[self.slots[k]] * (w * self.radial[k * nt + it]);
            }
        }
        out
    }

    fn fft2(&self, layer: &mut [C64], forward: bool) {
        let m = self.grid.m;
        let plan = if forward { &self.forward } else { &self.inverse };
        // rows: fixed α-frequency index, transform over β
        plan.process(layer);
        let mut col = vec![C64::new(0.0, 0.0); m];
        for j in 0..m {
            for i in 0..m {
                col[i] = layer[i * m + j];
            }
            plan.process(&mut col);
            for i in 0..m {
                layer[i * m + j] = col[i];
            }
        }
    }
}

pub fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}
