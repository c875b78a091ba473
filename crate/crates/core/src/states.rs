//! Density matrices and reproducible random generation.
//!
//! Randomness comes from ChaCha20 (`rand_chacha`) seeded with
//! `seed_from_u64`, with standard normals drawn through `rand_distr`'s
//! ziggurat sampler. Matrix entries are filled row-major, real part before
//! imaginary part. A given seed therefore yields byte-identical states on
//! every run and thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{eigh, CMatrix, HermitianMatrix, Projector, C64};

/// Trace tolerance for accepting a density matrix.
pub const TRACE_TOL: f64 = 1e-10;

/// A validated quantum state: Hermitian, PSD and unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn as_matrix(&self) -> &CMatrix {
        self.0.as_matrix()
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        validate_hermitian(HermitianMatrix::from_real_diagonal(probs))
    }

    /// Convex combination `t·self + (1−t)·other`.
    pub fn mix(&self, other: &DensityMatrix, t: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(Self(&self.0.scale(t) + &other.0.scale(1.0 - t)))
    }

    /// `true` when every eigenvalue lies above the clamp threshold.
    pub fn is_faithful(&self) -> bool {
        eigh(&self.0).rank_above_threshold() == self.dim()
    }

    pub fn rank(&self) -> usize {
        eigh(&self.0).rank_above_threshold()
    }
}

/// Checks Hermiticity, positivity and unit trace.
pub fn validate_density(m: CMatrix) -> Result<DensityMatrix> {
    validate_hermitian(HermitianMatrix::new(m)?)
}

pub fn validate_hermitian(h: HermitianMatrix) -> Result<DensityMatrix> {
    let tr = h.trace();
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::TraceNotOne(tr));
    }
    let d = eigh(&h);
    let min = d.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -d.threshold() {
        return Err(Error::NotPsd(min));
    }
    Ok(DensityMatrix(h))
}

/// Valid by construction (PSD with unit trace in exact arithmetic).
pub(crate) fn trusted(h: HermitianMatrix) -> DensityMatrix {
    DensityMatrix(h)
}

/// Prior probabilities of the null and alternative hypotheses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Priors {
    pub pi0: f64,
    pub pi1: f64,
}

impl Priors {
    pub fn new(pi0: f64, pi1: f64) -> Result<Self> {
        if !(pi0 > 0.0 && pi1 > 0.0 && (pi0 + pi1 - 1.0).abs() <= 1e-12) {
            return Err(Error::InvalidPriors(pi0, pi1));
        }
        Ok(Self { pi0, pi1 })
    }

    pub fn from_pi0(pi0: f64) -> Result<Self> {
        Self::new(pi0, 1.0 - pi0)
    }

    pub fn equal() -> Self {
        Self { pi0: 0.5, pi1: 0.5 }
    }
}

/// SplitMix64 mix of `(seed, counter)`, used to give each trial of a suite
/// its own independent generator.
pub fn derive_seed(seed: u64, counter: u64) -> u64 {
    let mut z = seed
        .wrapping_add(counter.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// `rows × cols` complex Ginibre matrix (independent standard normal real
/// and imaginary parts).
pub fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha20Rng) -> CMatrix {
    let mut entries = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        entries.push(C64::new(re, im));
    }
    CMatrix::from_row_slice(rows, cols, &entries)
}

/// Random state `G·G† / Tr[G·G†]` with `G` a `dim × rank` Ginibre matrix.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} must lie in [1, {dim}]"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let g = ginibre(dim, rank, &mut rng);
    let gg = &g * g.adjoint();
    let h = HermitianMatrix::hermitized(gg);
    let tr = h.trace();
    Ok(DensityMatrix(h.scale(1.0 / tr)))
}

/// Random positive semi-definite matrix of the given rank and trace.
pub fn random_psd(dim: usize, rank: usize, trace: f64, seed: u64) -> Result<HermitianMatrix> {
    Ok(random_density(dim, rank, seed)?.0.scale(trace))
}

/// Projector onto a Haar-random `rank`-dimensional subspace.
pub fn random_projector(dim: usize, rank: usize, seed: u64) -> Projector {
    if rank == 0 {
        return Projector::zero(dim);
    }
    let mut rng = rng_from_seed(seed);
    let g = ginibre(dim, rank.min(dim), &mut rng);
    Projector::onto_columns(&g)
}

/// `|v⟩⟨v| / ⟨v|v⟩`.
pub fn pure_state(v: &[C64]) -> Result<DensityMatrix> {
    let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if norm_sq == 0.0 || !norm_sq.is_finite() {
        return Err(Error::ZeroVector);
    }
    let col = CMatrix::from_column_slice(v.len(), 1, v);
    let outer = (&col * col.adjoint()).unscale(norm_sq);
    Ok(DensityMatrix(HermitianMatrix::hermitized(outer)))
}

/// Real-amplitude convenience wrapper around [`pure_state`].
pub fn pure_state_real(v: &[f64]) -> Result<DensityMatrix> {
    let c: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
    pure_state(&c)
}
