//! Monomials z^a z̄^b on C² and their exact sphere integrals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

/// The monomial z₁^{a₁} z₂^{a₂} z̄₁^{b₁} z̄₂^{b₂}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial {
    pub a: [u32; 2],
    pub b: [u32; 2],
}

impl Monomial {
    pub const fn new(a1: u32, a2: u32, b1: u32, b2: u32) -> Self {
        Monomial { a: [a1, a2], b: [b1, b2] }
    }

    pub fn degree(&self) -> usize {
        (self.a[0] + self.a[1] + self.b[0] + self.b[1]) as usize
    }

    /// Holomorphic and antiholomorphic degrees (|a|, |b|).
    pub fn bidegree(&self) -> (usize, usize) {
        ((self.a[0] + self.a[1]) as usize, (self.b[0] + self.b[1]) as usize)
    }

    /// Torus frequencies (a₁ − b₁, a₂ − b₂).
    pub fn frequencies(&self) -> (i32, i32) {
        (
            self.a[0] as i32 - self.b[0] as i32,
            self.a[1] as i32 - self.b[1] as i32,
        )
    }

    /// Radial exponents (min(a₁,b₁), min(a₂,b₂)): on S³ the monomial equals
    /// y₁^{(m₁)} y₂^{(m₂)} t^i (1 − t)^j with t = |z₁|².
    pub fn radial_exponents(&self) -> (u32, u32) {
        (self.a[0].min(self.b[0]), self.a[1].min(self.b[1]))
    }

    /// Rebuilds a monomial from its frequencies and radial exponents.
    pub fn from_chain(m1: i32, m2: i32, i: u32, j: u32) -> Self {
        let (a1, b1) = split(m1, i);
        let (a2, b2) = split(m2, j);
        Monomial::new(a1, a2, b1, b2)
    }

    pub fn conj(&self) -> Self {
        Monomial { a: self.b, b: self.a }
    }

    /// Evaluates the monomial at (z₁, z₂).
    pub fn eval(&self, z: [crate::C64; 2]) -> crate::C64 {
        let mut v = crate::C64::new(1.0, 0.0);
        for k in 0..2 {
            v *= z[k].powu(self.a[k]) * z[k].conj().powu(self.b[k]);
        }
        v
    }
}

fn split(m: i32, i: u32) -> (u32, u32) {
    if m >= 0 {
        (i + m as u32, i)
    } else {
        (i, i + (-m) as u32)
    }
}

/// All monomials of total degree ≤ n in a fixed order.
pub fn monomials_up_to(n: usize) -> Vec<Monomial> {
    let n = n as u32;
    let mut out = Vec::new();
    for d in 0..=n {
        for a1 in 0..=d {
            for a2 in 0..=d - a1 {
                for b1 in 0..=d - a1 - a2 {
                    let b2 = d - a1 - a2 - b1;
                    out.push(Monomial::new(a1, a2, b1, b2));
                }
            }
        }
    }
    out
}

/// Factorials 0!..=n! as big integers.
pub struct Factorials(Vec<BigInt>);

impl Factorials {
    pub fn new(n: usize) -> Self {
        let mut v = vec![BigInt::one()];
        for k in 1..=n {
            let next = &v[k - 1] * BigInt::from(k);
            v.push(next);
        }
        Factorials(v)
    }

    pub fn get(&self, k: usize) -> &BigInt {
        &self.0[k]
    }
}

/// ∫_{S³} |z₁|^{2k₁} |z₂|^{2k₂} dσ for the normalized surface measure.
pub fn sphere_moment(fact: &Factorials, k1: usize, k2: usize) -> BigRational {
    BigRational::new(
        fact.get(k1) * fact.get(k2),
        fact.get(k1 + k2 + 1).clone(),
    )
}

/// Exact ⟨m, n⟩ = ∫ m · conj(n) dσ; zero unless both share their frequencies.
pub fn exact_inner(fact: &Factorials, m: &Monomial, n: &Monomial) -> BigRational {
    let k1 = m.a[0] + n.b[0];
    let k2 = m.a[1] + n.b[1];
    if k1 != m.b[0] + n.a[0] || k2 != m.b[1] + n.a[1] {
        return BigRational::from_integer(BigInt::from(0));
    }
    sphere_moment(fact, k1 as usize, k2 as usize)
}

/// Floating-point version of [`exact_inner`].
pub fn inner_f64(m: &Monomial, n: &Monomial) -> f64 {
    let k1 = m.a[0] + n.b[0];
    let k2 = m.a[1] + n.b[1];
    if k1 != m.b[0] + n.a[0] || k2 != m.b[1] + n.a[1] {
        return 0.0;
    }
    moment_f64(k1 as usize, k2 as usize)
}

/// k₁! k₂! / (k₁ + k₂ + 1)! in double precision.
pub fn moment_f64(k1: usize, k2: usize) -> f64 {
    let (lo, hi) = if k1 < k2 { (k1, k2) } else { (k2, k1) };
    let mut v = 1.0;
    for j in 1..=lo {
        v *= j as f64 / (hi + j) as f64;
    }
    v / (lo + hi + 1) as f64
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_float() {
        let f = Factorials::new(30);
        for k1 in 0..10 {
            for k2 in 0..10 {
                let e = rational_to_f64(&sphere_moment(&f, k1, k2));
                assert!((e - moment_f64(k1, k2)).abs() < 1e-15 * e.max(1e-300) + 1e-300);
            }
        }
    }

    #[test]
    fn chain_roundtrip() {
        for m in monomials_up_to(5) {
            let (m1, m2) = m.frequencies();
            let (i, j) = m.radial_exponents();
            assert_eq!(Monomial::from_chain(m1, m2, i, j), m);
        }
    }

    #[test]
    fn monomial_count() {
        assert_eq!(monomials_up_to(1).len(), 5);
        assert_eq!(monomials_up_to(2).len(), 15);
    }
}
