//! Block-diagonal complex operators indexed by total degree.
//!
//! A block operator with input arity a and output arity b maps a tuple of a
//! coefficient vectors to b vectors; block ℓ is a dense (b·n_ℓ) × (a·n_ℓ)
//! matrix acting on the stacked degree-ℓ slices.

use std::ops::Range;

use nalgebra::DMatrix;

use crate::C64;

pub type CMat = DMatrix<C64>;

/// Moore-Penrose pseudo-inverse with singular values below
/// `rel_cutoff · σ_max` treated as zero.
pub fn pinv(m: &CMat, rel_cutoff: f64) -> CMat {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return CMat::zeros(c, r);
    }
    // Real embedding a + ib ↦ [[a, −b], [b, a]]; its pseudo-inverse embeds m⁺.
    let real = DMatrix::<f64>::from_fn(2 * r, 2 * c, |i, j| {
        let z = m[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let svd = real.svd(true, true);
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut inv = DMatrix::<f64>::zeros(2 * c, 2 * r);
    if smax > 0.0 {
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s <= rel_cutoff * smax {
                continue;
            }
            inv += (vt.row(k).transpose() * u.column(k).transpose()) / s;
        }
    }
    CMat::from_fn(c, r, |i, j| C64::new(inv[(i, j)], inv[(i + c, j)]))
}

#[derive(Debug, Clone)]
pub struct BlockOp {
    pub blocks: Vec<CMat>,
    pub ranges: Vec<Range<usize>>,
    pub in_arity: usize,
    pub out_arity: usize,
}

impl BlockOp {
    pub fn from_fn(ranges: &[Range<usize>], in_arity: usize, out_arity: usize, f: impl Fn(usize) -> CMat) -> Self {
        let blocks = (0..ranges.len()).map(&f).collect::<Vec<_>>();
        for (l, b) in blocks.iter().enumerate() {
            let n = ranges[l].len();
            assert_eq!(b.shape(), (out_arity * n, in_arity * n), "block {l} shape");
        }
        BlockOp { blocks, ranges: ranges.to_vec(), in_arity, out_arity }
    }

    pub fn identity(ranges: &[Range<usize>], arity: usize) -> Self {
        Self::from_fn(ranges, arity, arity, |l| CMat::identity(arity * ranges[l].len(), arity * ranges[l].len()))
    }

    pub fn zero(ranges: &[Range<usize>], in_arity: usize, out_arity: usize) -> Self {
        Self::from_fn(ranges, in_arity, out_arity, |l| {
            CMat::zeros(out_arity * ranges[l].len(), in_arity * ranges[l].len())
        })
    }

    pub fn dim(&self) -> usize {
        self.ranges.last().map(|r| r.end).unwrap_or(0)
    }

    pub fn apply(&self, inputs: &[&[C64]]) -> Vec<Vec<C64>> {
        assert_eq!(inputs.len(), self.in_arity);
        let dim = self.dim();
        let mut out = vec![vec![C64::new(0.0, 0.0); dim]; self.out_arity];
        for (l, r) in self.ranges.iter().enumerate() {
            let n = r.len();
            if n == 0 {
                continue;
            }
            let mut x = nalgebra::DVector::zeros(self.in_arity * n);
            for (a, inp) in inputs.iter().enumerate() {
                for (i, k) in r.clone().enumerate() {
                    x[a * n + i] = inp[k];
                }
            }
            let y = &self.blocks[l] * x;
            for (b, o) in out.iter_mut().enumerate() {
                for (i, k) in r.clone().enumerate() {
                    o[k] = y[b * n + i];
                }
            }
        }
        out
    }

    /// self ∘ other.
    pub fn compose(&self, other: &BlockOp) -> BlockOp {
        assert_eq!(self.in_arity, other.out_arity);
        BlockOp {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect(),
            ranges: self.ranges.clone(),
            in_arity: other.in_arity,
            out_arity: self.out_arity,
        }
    }

    pub fn add(&self, other: &BlockOp) -> BlockOp {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &BlockOp) -> BlockOp {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> BlockOp {
        BlockOp { blocks: self.blocks.iter().map(|a| a * s).collect(), ..self.clone() }
    }

    pub fn adjoint(&self) -> BlockOp {
        BlockOp {
            blocks: self.blocks.iter().map(|a| a.adjoint()).collect(),
            ranges: self.ranges.clone(),
            in_arity: self.out_arity,
            out_arity: self.in_arity,
        }
    }

    pub fn pinv(&self, rel_cutoff: f64) -> BlockOp {
        BlockOp {
            blocks: self.blocks.iter().map(|a| pinv(a, rel_cutoff)).collect(),
            ranges: self.ranges.clone(),
            in_arity: self.out_arity,
            out_arity: self.in_arity,
        }
    }

    fn zip(&self, other: &BlockOp, f: impl Fn(&CMat, &CMat) -> CMat) -> BlockOp {
        assert_eq!((self.in_arity, self.out_arity), (other.in_arity, other.out_arity));
        BlockOp {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
            ..self.clone()
        }
    }

    /// Largest entry modulus over all blocks.
    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.iter().map(|x| x.norm()))
            .fold(0.0, f64::max)
    }

    /// Assembles a block operator from a grid of sub-operators of arity 1.
    pub fn stack(parts: &[Vec<&BlockOp>]) -> BlockOp {
        let rows = parts.len();
        let cols = parts[0].len();
        let ranges = parts[0][0].ranges.clone();
        BlockOp::from_fn(&ranges, cols, rows, |l| {
            let n = ranges[l].len();
            let mut m = CMat::zeros(rows * n, cols * n);
            for (i, row) in parts.iter().enumerate() {
                for (j, op) in row.iter().enumerate() {
                    assert_eq!((op.in_arity, op.out_arity), (1, 1));
                    m.view_mut((i * n, j * n), (n, n)).copy_from(&op.blocks[l]);
                }
            }
            m
        })
    }

    /// Sub-operator mapping input component j to output component i.
    pub fn component(&self, i: usize, j: usize) -> BlockOp {
        BlockOp::from_fn(&self.ranges, 1, 1, |l| {
            let n = self.ranges[l].len();
            self.blocks[l].view((i * n, j * n), (n, n)).into_owned()
        })
    }
}
