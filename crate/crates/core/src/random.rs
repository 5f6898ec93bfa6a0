//! Seeded random states, unitaries and channels.
//!
//! All generators draw from [`ChaCha8Rng`] seeded through `seed_from_u64`, so every
//! suite in this crate is reproducible from a single `u64`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};
use crate::state::{DensityMatrix, PureState};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for sub-task `index` of a run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> SeededRng {
    // splitmix64 finalizer keeps nearby (seed, index) pairs decorrelated
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(z)
}

/// Standard complex Gaussian (E|z|² = 1).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phase fix on `diag(R)`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(n, n, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_pure_with<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<PureState> {
    let d: usize = dims.iter().product();
    let v = CVector::from_fn(d, |_, _| complex_normal(rng));
    PureState::normalized(dims.to_vec(), v)
}

pub fn random_mixed_with<R: Rng + ?Sized>(
    dims: &[usize],
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let d: usize = dims.iter().product();
    if rank == 0 || rank > d {
        return Err(Error::DimensionMismatch(format!(
            "rank {rank} must lie in 1..={d}"
        )));
    }
    let g = ginibre(d, rank, rng);
    let mut m = &g * g.adjoint();
    let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
    m /= C64::new(tr, 0.0);
    // exact Hermitian symmetry for downstream checks
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    DensityMatrix::validate(m, dims.to_vec())
}

/// Haar-random pure state on `dims`, deterministic in `seed`.
pub fn random_pure(dims: &[usize], seed: u64) -> Result<PureState> {
    random_pure_with(dims, &mut rng_from_seed(seed))
}

/// Ginibre-induced mixed state `GG†/Tr(GG†)` with `G` of shape `d × rank`.
pub fn random_mixed(dims: &[usize], rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_mixed_with(dims, rank, &mut rng_from_seed(seed))
}

/// Uniform point on the probability simplex of size `n`.
pub fn random_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln())
        .collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}
