//! Orthonormal polynomial basis of L²(S³) truncated at total degree N.
//!
//! Monomials are grouped by bidegree (p, q) and torus frequency m₁. Within
//! each group the candidates are orthonormalized against all previously
//! accepted functions sharing their frequencies, in exact rational arithmetic,
//! with pivoting on the residual norm. Candidates whose residual vanishes are
//! dependent through |z₁|² + |z₂|² = 1 and are reported as discarded.

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use sha2::{Digest, Sha256};

use super::monomial::{rational_to_f64, Factorials, Monomial};

/// Rank-revealing pivot threshold on the relative residual ‖r‖²/‖m‖².
const PIVOT_TOL: f64 = 1e-12;

/// Bidegree and frequency label of a basis function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub p: usize,
    pub q: usize,
    pub m1: i32,
}

impl Label {
    pub fn degree(&self) -> usize {
        self.p + self.q
    }

    pub fn m2(&self) -> i32 {
        self.p as i32 - self.q as i32 - self.m1
    }
}

/// One orthonormal basis function.
#[derive(Debug, Clone)]
pub struct BasisFunction {
    pub label: Label,
    /// Monomial chosen as the orthonormalization pivot.
    pub pivot: Monomial,
    /// Expansion over monomials of degree ≤ p + q.
    pub monomials: Vec<(Monomial, f64)>,
    /// Coefficients of P(t) with e = y₁^{(m₁)} y₂^{(m₂)} P(|z₁|²) on S³.
    pub radial: Vec<f64>,
}

impl BasisFunction {
    pub fn m1(&self) -> i32 {
        self.label.m1
    }

    pub fn m2(&self) -> i32 {
        self.label.m2()
    }
}

/// Truncated orthonormal basis.
#[derive(Debug, Clone)]
pub struct Basis {
    pub degree: usize,
    pub functions: Vec<BasisFunction>,
    pub discarded: Vec<Monomial>,
    /// Index ranges of the blocks of fixed total degree ℓ = 0..=N.
    pub blocks: Vec<Range<usize>>,
    index: HashMap<Label, usize>,
    conj: Vec<(usize, f64)>,
    id: String,
}

type RVec = BTreeMap<(u32, u32), BigRational>;

struct ChainEntry {
    coeffs: RVec,
    norm2: BigRational,
}

impl Basis {
    /// Builds the basis for restricted polynomials of degree ≤ n.
    pub fn build(n: usize) -> Basis {
        let fact = Factorials::new(2 * n + 2);
        let mut chains: HashMap<(i32, i32), Vec<ChainEntry>> = HashMap::new();
        let mut functions = Vec::new();
        let mut discarded = Vec::new();
        let mut blocks = Vec::new();
        for l in 0..=n {
            let start = functions.len();
            for p in (0..=l).rev() {
                let q = l - p;
                for m1 in -(q as i32)..=(p as i32) {
                    let m2 = p as i32 - q as i32 - m1;
                    let cands = candidates(p, q, m1);
                    let chain = chains.entry((m1, m2)).or_default();
                    let (accepted, rejected) = orthonormalize(&fact, m1, m2, chain, cands);
                    discarded.extend(rejected);
                    for (pivot, entry) in accepted {
                        functions.push(finish(Label { p, q, m1 }, pivot, &entry, m1, m2));
                        chain.push(entry);
                    }
                }
            }
            blocks.push(start..functions.len());
        }
        let index = functions
            .iter()
            .enumerate()
            .map(|(k, f): (usize, &BasisFunction)| (f.label, k))
            .collect::<HashMap<_, _>>();
        let conj = functions
            .iter()
            .map(|f| {
                let k = index[&Label { p: f.label.q, q: f.label.p, m1: -f.label.m1 }];
                let dot: f64 = f.radial.iter().zip(&functions[k].radial).map(|(a, b)| a * b).sum();
                (k, dot.signum())
            })
            .collect();
        let id = content_hash(n, &functions);
        Basis { degree: n, functions, discarded, blocks, index, conj, id }
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn index_of(&self, label: Label) -> Option<usize> {
        self.index.get(&label).copied()
    }

    /// conj(e_k) = sign · e_{target}.
    pub fn conj_of(&self, k: usize) -> (usize, f64) {
        self.conj[k]
    }

    /// Content hash of the exponent lists and pivots.
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Block of total degree ℓ containing index k.
    pub fn block_of(&self, k: usize) -> usize {
        self.functions[k].label.degree()
    }

    /// dim of the span of restricted polynomials of degree ≤ n.
    pub fn expected_dimension(n: usize) -> usize {
        (n + 1) * (n + 2) * (2 * n + 3) / 6
    }
}

fn candidates(p: usize, q: usize, m1: i32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for a1 in 0..=p as i32 {
        let b1 = a1 - m1;
        if b1 < 0 || b1 > q as i32 {
            continue;
        }
        let a2 = p as i32 - a1;
        let b2 = q as i32 - b1;
        out.push(Monomial::new(a1 as u32, a2 as u32, b1 as u32, b2 as u32));
    }
    out
}

fn chain_gram(fact: &Factorials, m1: i32, m2: i32, x: (u32, u32), y: (u32, u32)) -> BigRational {
    let k1 = (x.0 + y.0) as usize + m1.unsigned_abs() as usize;
    let k2 = (x.1 + y.1) as usize + m2.unsigned_abs() as usize;
    super::monomial::sphere_moment(fact, k1, k2)
}

fn inner_with(fact: &Factorials, m1: i32, m2: i32, v: &RVec, x: (u32, u32)) -> BigRational {
    let mut acc = BigRational::zero();
    for (y, c) in v {
        acc += c * chain_gram(fact, m1, m2, x, *y);
    }
    acc
}

/// Pivoted Gram-Schmidt of the candidates against the chain, exact.
fn orthonormalize(
    fact: &Factorials,
    m1: i32,
    m2: i32,
    chain: &[ChainEntry],
    cands: Vec<Monomial>,
) -> (Vec<(Monomial, ChainEntry)>, Vec<Monomial>) {
    let mut fresh: Vec<ChainEntry> = Vec::new();
    let mut pivots = Vec::new();
    let mut remaining = cands;
    let mut rejected = Vec::new();
    loop {
        if remaining.is_empty() {
            break;
        }
        let mut best: Option<(usize, f64, RVec, BigRational)> = None;
        for (ci, m) in remaining.iter().enumerate() {
            let x = m.radial_exponents();
            let self_norm = chain_gram(fact, m1, m2, x, x);
            let mut resid: RVec = BTreeMap::new();
            resid.insert(x, BigRational::from_integer(BigInt::from(1)));
            let mut norm2 = self_norm.clone();
            for e in chain.iter().chain(fresh.iter()) {
                let ip = inner_with(fact, m1, m2, &e.coeffs, x);
                if ip.is_zero() {
                    continue;
                }
                let factor = &ip / &e.norm2;
                norm2 -= &factor * &ip;
                for (y, c) in &e.coeffs {
                    let entry = resid.entry(*y).or_insert_with(BigRational::zero);
                    *entry -= &factor * c;
                }
            }
            let ratio = rational_to_f64(&(&norm2 / &self_norm)).abs();
            if best.as_ref().is_none_or(|b| ratio > b.1) {
                best = Some((ci, ratio, resid, norm2));
            }
        }
        let (ci, ratio, resid, norm2) = best.expect("nonempty candidate list");
        if ratio < PIVOT_TOL || !norm2.is_positive() {
            rejected.extend(remaining.drain(..));
            break;
        }
        let m = remaining.remove(ci);
        let coeffs = resid.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        fresh.push(ChainEntry { coeffs, norm2 });
        pivots.push(m);
    }
    (pivots.into_iter().zip(fresh).collect(), rejected)
}

fn finish(label: Label, pivot: Monomial, e: &ChainEntry, m1: i32, m2: i32) -> BasisFunction {
    let scale = rational_to_f64(&e.norm2).sqrt().recip();
    let mut monomials = Vec::new();
    let mut radial_exact: BTreeMap<u32, BigRational> = BTreeMap::new();
    for (&(i, j), c) in &e.coeffs {
        monomials.push((Monomial::from_chain(m1, m2, i, j), rational_to_f64(c) * scale));
        // t^i (1 − t)^j = Σ_k C(j, k) (−1)^k t^{i+k}
        let mut binom = BigInt::from(1);
        for k in 0..=j {
            let term = c * BigRational::from_integer(if k % 2 == 0 { binom.clone() } else { -binom.clone() });
            *radial_exact.entry(i + k).or_insert_with(BigRational::zero) += term;
            binom = binom * BigInt::from(j - k) / BigInt::from(k + 1);
        }
    }
    let deg = radial_exact.keys().next_back().copied().unwrap_or(0) as usize;
    let mut radial = vec![0.0; deg + 1];
    for (k, c) in radial_exact {
        radial[k as usize] = rational_to_f64(&c) * scale;
    }
    BasisFunction { label, pivot, monomials, radial }
}

fn content_hash(n: usize, functions: &[BasisFunction]) -> String {
    let mut h = Sha256::new();
    h.update(format!("N={n};").as_bytes());
    for f in functions {
        let Monomial { a, b } = f.pivot;
        h.update(format!("{},{},{}|{},{},{},{}|", f.label.p, f.label.q, f.label.m1, a[0], a[1], b[0], b[1]).as_bytes());
        for (m, _) in &f.monomials {
            h.update(format!("{},{},{},{};", m.a[0], m.a[1], m.b[0], m.b[1]).as_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::super::monomial::{inner_f64, monomials_up_to};
    use super::*;

    fn gram(basis: &Basis, i: usize, j: usize) -> f64 {
        let mut s = 0.0;
        for (m, a) in &basis.functions[i].monomials {
            for (n, b) in &basis.functions[j].monomials {
                s += a * b * inner_f64(m, n);
            }
        }
        s
    }

    #[test]
    fn degree_zero_is_unit_constant() {
        let b = Basis::build(0);
        assert_eq!(b.len(), 1);
        assert_eq!(b.functions[0].monomials, vec![(Monomial::new(0, 0, 0, 0), 1.0)]);
    }

    #[test]
    fn dimensions() {
        for n in 0..=6 {
            assert_eq!(Basis::build(n).len(), Basis::expected_dimension(n));
        }
    }

    #[test]
    fn orthonormal_at_degree_eight() {
        let b = Basis::build(8);
        for i in 0..b.len() {
            for j in 0..b.len() {
                let g = gram(&b, i, j);
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g - e).abs() < 1e-12, "({i},{j}) -> {g}");
            }
        }
    }

    #[test]
    fn discarded_count_matches_rank_deficit() {
        let n = 4;
        let b = Basis::build(n);
        assert_eq!(b.len() + b.discarded.len(), monomials_up_to(n).len());
    }

    #[test]
    fn conjugation_is_signed_involution() {
        let b = Basis::build(5);
        for k in 0..b.len() {
            let (j, s) = b.conj_of(k);
            let (back, s2) = b.conj_of(j);
            assert_eq!(back, k);
            assert_eq!(s * s2, 1.0);
        }
    }
}
