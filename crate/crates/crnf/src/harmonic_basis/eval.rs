//! Pointwise evaluation of spectral scalars at arbitrary points of C².
//!
//! A scalar is regrouped by torus frequency into y₁^{(m₁)} y₂^{(m₂)} Q(|z₁|²)
//! with y^{(m)} = z^m for m ≥ 0 and z̄^{|m|} otherwise. This is a polynomial
//! extension off the sphere, which is all the flow integrator needs.

use super::basis::Basis;
use crate::C64;

#[derive(Debug, Clone)]
struct Group {
    m1: i32,
    /// Q coefficients in powers of t.
    q: Vec<C64>,
    /// Q' coefficients.
    dq: Vec<C64>,
}

#[derive(Debug, Clone)]
struct Column {
    m2: i32,
    groups: Vec<Group>,
}

/// Value and first derivatives with respect to (z₁, z₂, z̄₁, z̄₂).
#[derive(Debug, Clone, Copy, Default)]
pub struct Jet {
    pub value: C64,
    pub dz: [C64; 2],
    pub dzb: [C64; 2],
}

#[derive(Debug, Clone)]
pub struct PointEvaluator {
    degree: usize,
    columns: Vec<Column>,
}

impl PointEvaluator {
    pub fn new(basis: &Basis, coeffs: &[C64]) -> Self {
        let n = basis.degree as i32;
        let mut columns = Vec::new();
        for m2 in -n..=n {
            let mut groups = Vec::new();
            for m1 in -n..=n {
                if m1.abs() + m2.abs() > n {
                    continue;
                }
                let mut q: Vec<C64> = Vec::new();
                for (k, f) in basis.functions.iter().enumerate() {
                    if f.m1() != m1 || f.m2() != m2 || coeffs[k] == C64::new(0.0, 0.0) {
                        continue;
                    }
                    if q.len() < f.radial.len() {
                        q.resize(f.radial.len(), C64::new(0.0, 0.0));
                    }
                    for (j, r) in f.radial.iter().enumerate() {
                        q[j] += coeffs[k] * r;
                    }
                }
                if q.is_empty() {
                    continue;
                }
                let dq = (1..q.len()).map(|j| q[j] * j as f64).collect();
                groups.push(Group { m1, q, dq });
            }
            if !groups.is_empty() {
                columns.push(Column { m2, groups });
            }
        }
        PointEvaluator { degree: basis.degree, columns }
    }

    pub fn value(&self, z: [C64; 2]) -> C64 {
        let p = Powers::new(z, self.degree);
        let t = z[0].norm_sqr();
        let mut acc = C64::new(0.0, 0.0);
        for col in &self.columns {
            let mut s = C64::new(0.0, 0.0);
            for g in &col.groups {
                s += p.y(0, g.m1) * poly(&g.q, t);
            }
            acc += p.y(1, col.m2) * s;
        }
        acc
    }

    pub fn jet(&self, z: [C64; 2]) -> Jet {
        let p = Powers::new(z, self.degree);
        let t = z[0].norm_sqr();
        let zero = C64::new(0.0, 0.0);
        let mut out = Jet::default();
        for col in &self.columns {
            let (mut s, mut s1, mut d, mut db) = (zero, zero, zero, zero);
            for g in &col.groups {
                let q = poly(&g.q, t);
                let dq = poly(&g.dq, t);
                let y = p.y(0, g.m1);
                s += y * q;
                s1 += y * dq;
                if g.m1 > 0 {
                    d += p.dy(0, g.m1) * q;
                } else if g.m1 < 0 {
                    db += p.dy(0, g.m1) * q;
                }
            }
            let y2 = p.y(1, col.m2);
            out.value += y2 * s;
            out.dz[0] += y2 * (d + z[0].conj() * s1);
            out.dzb[0] += y2 * (db + z[0] * s1);
            if col.m2 > 0 {
                out.dz[1] += p.dy(1, col.m2) * s;
            } else if col.m2 < 0 {
                out.dzb[1] += p.dy(1, col.m2) * s;
            }
        }
        out
    }
}

fn poly(c: &[C64], t: f64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for a in c.iter().rev() {
        acc = acc * t + a;
    }
    acc
}

struct Powers {
    z: [Vec<C64>; 2],
    zb: [Vec<C64>; 2],
}

impl Powers {
    fn new(z: [C64; 2], n: usize) -> Self {
        let table = |w: C64| {
            let mut v = Vec::with_capacity(n + 1);
            let mut acc = C64::new(1.0, 0.0);
            for _ in 0..=n {
                v.push(acc);
                acc *= w;
            }
            v
        };
        Powers {
            z: [table(z[0]), table(z[1])],
            zb: [table(z[0].conj()), table(z[1].conj())],
        }
    }

    /// y^{(m)} for coordinate j.
    fn y(&self, j: usize, m: i32) -> C64 {
        if m >= 0 {
            self.z[j][m as usize]
        } else {
            self.zb[j][(-m) as usize]
        }
    }

    /// ∂y^{(m)}/∂z_j for m > 0, ∂y^{(m)}/∂z̄_j for m < 0.
    fn dy(&self, j: usize, m: i32) -> C64 {
        if m > 0 {
            self.z[j][(m - 1) as usize] * m as f64
        } else {
            self.zb[j][(-m - 1) as usize] * (-m) as f64
        }
    }
}
