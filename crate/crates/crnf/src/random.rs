//! Seeded random spectral data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::harmonic_basis::{SpectralScalar, SpectralSpace};
use crate::C64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Complex Gaussian coefficients on every basis function of degree ≤ d.
pub fn scalar(space: &SpectralSpace, d: usize, rng: &mut ChaCha8Rng) -> SpectralScalar {
    let mut f = space.zero();
    for (k, e) in space.basis.functions.iter().enumerate() {
        if e.label.degree() <= d {
            f.coeffs[k] = gaussian(rng);
        }
    }
    f
}

/// Real Gaussian function of degree ≤ d.
pub fn real_scalar(space: &SpectralSpace, d: usize, rng: &mut ChaCha8Rng) -> SpectralScalar {
    space.real_part(&scalar(space, d, rng))
}

/// Random scalar restricted to labels accepted by `keep`.
pub fn scalar_on(
    space: &SpectralSpace,
    rng: &mut ChaCha8Rng,
    keep: impl Fn(&crate::harmonic_basis::Label) -> bool,
) -> SpectralScalar {
    let mut f = space.zero();
    for (k, e) in space.basis.functions.iter().enumerate() {
        if keep(&e.label) {
            f.coeffs[k] = gaussian(rng);
        }
    }
    f
}
