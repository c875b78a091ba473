//! Randomized verification of the inequalities underlying the error rates.
//!
//! Every trial draws its own generator from `derive_seed(seed, trial)`, so
//! reports are identical for any thread count. Half of the trials use
//! rank-deficient operators.

use rand::{Rng, RngCore};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chernoff::{chernoff_from_pair, root_product_trace_norm};
use crate::error::{Error, Result};
use crate::linalg::{partial_trace, trace_norm, HermitianMatrix, Subsystem};
use crate::mapping::SpectralPair;
use crate::states::{derive_seed, random_density, random_psd, rng_from_seed, trusted, DensityMatrix};

/// Margins below this count as violations.
pub const VIOLATION_THRESHOLD: f64 = -1e-9;
pub const DEFAULT_TRIALS: usize = 1000;
/// Paper example parameter for the tensor-power counterexample.
pub const COUNTEREXAMPLE_B: f64 = 0.35;
const S_GRID: usize = 21;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub property_name: String,
    pub trials: usize,
    /// Smallest `lhs − rhs` seen, oriented so that non-negative passes.
    pub worst_margin: f64,
    pub failures: usize,
    pub seed: u64,
}

impl VerificationReport {
    fn from_margins(name: &str, seed: u64, margins: &[f64]) -> Self {
        Self {
            property_name: name.to_string(),
            trials: margins.len(),
            worst_margin: margins.iter().copied().fold(f64::INFINITY, f64::min),
            failures: margins.iter().filter(|&&m| !(m >= VIOLATION_THRESHOLD)).count(),
            seed,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn check_dims_list(dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d < 2) {
        return Err(Error::InvalidArgument(format!(
            "dimension list {dims:?} must be non-empty with every entry at least 2"
        )));
    }
    Ok(())
}

/// Per-trial generator, dimension and rank pair. Half the trials are
/// rank-deficient in the first operator, and the second gets any rank.
struct TrialSetup {
    rng: ChaCha20Rng,
    dim: usize,
}

impl TrialSetup {
    fn new(seed: u64, trial: usize, dims: &[usize]) -> Self {
        let mut rng = rng_from_seed(derive_seed(seed, trial as u64));
        let dim = dims[rng.random_range(0..dims.len())];
        Self { rng, dim }
    }

    fn ranks(&mut self) -> (usize, usize) {
        let d = self.dim;
        if self.rng.random_bool(0.5) {
            (self.rng.random_range(1..d), self.rng.random_range(1..=d))
        } else {
            (d, d)
        }
    }

    fn state(&mut self, rank: usize) -> DensityMatrix {
        let seed = self.rng.next_u64();
        random_density(self.dim, rank, seed).expect("rank lies in [1, dim]")
    }

    fn psd(&mut self, rank: usize) -> HermitianMatrix {
        let scale = self.rng.random_range(-2.0..2.0f64).exp();
        let seed = self.rng.next_u64();
        random_psd(self.dim, rank, scale, seed).expect("rank lies in [1, dim]")
    }
}

fn s_grid() -> impl Iterator<Item = f64> {
    (0..S_GRID).map(|k| k as f64 / (S_GRID - 1) as f64)
}

fn run<F>(name: &str, trials: usize, seed: u64, trial: F) -> VerificationReport
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let margins: Vec<f64> = (0..trials).into_par_iter().map(trial).collect();
    VerificationReport::from_margins(name, seed, &margins)
}

/// Margins of `Tr[a^s b^{1−s}] ≥ Tr[a + b − |a − b|]/2` on an `s` grid.
pub fn trace_inequality_margin(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    let sp = SpectralPair::from_psd(b, a);
    let rhs = 0.5 * (a.trace() + b.trace() - trace_norm(&(a - b)));
    s_grid().map(|s| sp.q_s(s) - rhs).fold(f64::INFINITY, f64::min)
}

pub fn check_trace_inequality(trials: usize, seed: u64, dims: &[usize]) -> Result<VerificationReport> {
    check_dims_list(dims)?;
    Ok(run("trace-inequality", trials, seed, |k| {
        let mut t = TrialSetup::new(seed, k, dims);
        let (ra, rb) = t.ranks();
        let a = t.psd(ra);
        let b = t.psd(rb);
        trace_inequality_margin(&a, &b)
    }))
}

/// Margins of `1−√(1−F²) ≤ 1−T ≤ Q ≤ F ≤ √(1−T²)` and `F² ≤ Q`.
pub fn chain_margins(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<[f64; 5]> {
    let sp = SpectralPair::new(rho, sigma)?;
    let q = chernoff_from_pair(&sp).q_star;
    let f = root_product_trace_norm(rho.as_hermitian(), sigma.as_hermitian());
    let t = 0.5 * trace_norm(&(rho.as_hermitian() - sigma.as_hermitian()));
    Ok([
        (1.0 - f * f).max(0.0).sqrt() - t,
        q - (1.0 - t),
        f - q,
        (1.0 - t * t).max(0.0).sqrt() - f,
        q - f * f,
    ])
}

pub fn check_chain(trials: usize, seed: u64, dims: &[usize]) -> Result<VerificationReport> {
    check_dims_list(dims)?;
    Ok(run("chain", trials, seed, |k| {
        let mut t = TrialSetup::new(seed, k, dims);
        let (ra, rb) = t.ranks();
        let rho = t.state(ra);
        let sigma = t.state(rb);
        let m = chain_margins(&rho, &sigma).expect("equal dimensions");
        m.into_iter().fold(f64::INFINITY, f64::min)
    }))
}

/// Margins of the two trace inequalities for general PSD operators:
/// `‖A^{1/2}B^{1/2}‖₁ ≤ (Tr A^s B^{1−s})^{1/2} (Tr A)^{(1−s)/2} (Tr B)^{s/2}`
/// over an `s` grid, and `‖A−B‖₁² + 4(Tr A^{1/2}B^{1/2})² ≤ (Tr(A+B))²`.
pub fn appendix_margins(a: &HermitianMatrix, b: &HermitianMatrix) -> (f64, f64) {
    let sp = SpectralPair::from_psd(b, a);
    let (ta, tb) = (a.trace(), b.trace());
    let lhs = root_product_trace_norm(a, b);
    let first = s_grid()
        .map(|s| sp.q_s(s).sqrt() * ta.powf((1.0 - s) / 2.0) * tb.powf(s / 2.0) - lhs)
        .fold(f64::INFINITY, f64::min);
    let overlap = sp.q_s(0.5);
    let diff = trace_norm(&(a - b));
    let second = (ta + tb).powi(2) - diff * diff - 4.0 * overlap * overlap;
    (first, second)
}

pub fn check_appendix(trials: usize, seed: u64, dims: &[usize]) -> Result<VerificationReport> {
    check_dims_list(dims)?;
    Ok(run("appendix", trials, seed, |k| {
        let mut t = TrialSetup::new(seed, k, dims);
        let (ra, rb) = t.ranks();
        let a = t.psd(ra);
        let b = t.psd(rb);
        let (first, second) = appendix_margins(&a, &b);
        first.min(second)
    }))
}

/// Computed quantities of the tensor-power example at parameter `b`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CounterexampleValues {
    pub b: f64,
    /// `‖ρ − σ‖₁`, `‖ρ' − σ'‖₁`, `‖ρ^{⊗2} − σ^{⊗2}‖₁`, `‖ρ'^{⊗2} − σ'^{⊗2}‖₁`.
    pub norms: [f64; 4],
    /// Chernoff distances of `(ρ, σ)` and `(ρ', σ')`.
    pub xi: [f64; 2],
}

pub fn counterexample_values(b: f64) -> Result<CounterexampleValues> {
    let rho = DensityMatrix::diagonal(&[0.25, 0.75])?;
    let sigma = DensityMatrix::diagonal(&[0.75, 0.25])?;
    let rho_p = DensityMatrix::diagonal(&[0.0, 1.0])?;
    let sigma_p = DensityMatrix::diagonal(&[b, 1.0 - b])?;
    let norm = |x: &DensityMatrix, y: &DensityMatrix| trace_norm(&(x.as_hermitian() - y.as_hermitian()));
    let square = |x: &DensityMatrix| {
        trusted(HermitianMatrix::hermitized(x.as_matrix().kronecker(x.as_matrix())))
    };
    let xi = |x: &DensityMatrix, y: &DensityMatrix| -> Result<f64> {
        Ok(chernoff_from_pair(&SpectralPair::new(x, y)?).xi_qcb.to_f64())
    };
    Ok(CounterexampleValues {
        b,
        norms: [
            norm(&rho, &sigma),
            norm(&rho_p, &sigma_p),
            norm(&square(&rho), &square(&sigma)),
            norm(&square(&rho_p), &square(&sigma_p)),
        ],
        xi: [xi(&rho, &sigma)?, xi(&rho_p, &sigma_p)?],
    })
}

/// Checks the example at the default parameter.
pub fn check_tensor_counterexample() -> Result<VerificationReport> {
    check_tensor_counterexample_with(COUNTEREXAMPLE_B)
}

/// Checks closed forms of all four trace norms and both Chernoff
/// distances. The order reversals between one and two copies, and the
/// ordering of the distances, are asserted only for
/// `b ∈ (1 − 1/√2, 1/2)`, where they hold.
pub fn check_tensor_counterexample_with(b: f64) -> Result<VerificationReport> {
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::InvalidArgument(format!("parameter b = {b} must lie in (0, 1)")));
    }
    let v = counterexample_values(b)?;
    let expected_norms = [1.0, 2.0 * b, 1.0, 2.0 * b * (2.0 - b)];
    let expected_xi = [-(3f64.sqrt() / 2.0).ln(), -(1.0 - b).ln()];
    let mut margins: Vec<f64> = v
        .norms
        .iter()
        .zip(&expected_norms)
        .chain(v.xi.iter().zip(&expected_xi))
        .map(|(x, y)| -(x - y).abs())
        .collect();
    if b > 1.0 - 0.5f64.sqrt() && b < 0.5 {
        margins.push(v.norms[0] - v.norms[1]);
        margins.push(v.norms[3] - v.norms[2]);
        margins.push(v.xi[1] - v.xi[0]);
    }
    let worst = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(VerificationReport {
        property_name: "tensor-counterexample".into(),
        trials: 1,
        worst_margin: worst,
        failures: usize::from(!(worst >= VIOLATION_THRESHOLD)),
        seed: 0,
    })
}

fn chernoff_q(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    chernoff_from_pair(&SpectralPair::new(rho, sigma).expect("equal dimensions")).q_star
}

/// Convexity of `s ↦ Q_s` on the sampled curve.
pub fn convexity_margin(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let curve = chernoff_from_pair(&SpectralPair::new(rho, sigma)?).curve;
    Ok(curve
        .windows(3)
        .map(|w| 0.5 * (w[0].1 + w[2].1) - w[1].1)
        .fold(f64::INFINITY, f64::min))
}

/// Convexity in `s`, joint concavity of `Q` under mixing, and monotonicity
/// of `Q` under a partial trace, on qubit and qutrit pairs (two-qubit pairs
/// for the partial trace).
pub fn check_convexity_concavity(trials: usize, seed: u64) -> VerificationReport {
    let dims = [2, 3];
    run("convexity", trials, seed, |k| {
        let mut t = TrialSetup::new(seed, k, &dims);
        let (r1, r2) = t.ranks();
        let (r3, r4) = t.ranks();
        let rho1 = t.state(r1);
        let sigma1 = t.state(r2);
        let rho2 = t.state(r3);
        let sigma2 = t.state(r4);
        let mut worst = convexity_margin(&rho1, &sigma1).expect("equal dimensions");

        let (q1, q2) = (chernoff_q(&rho1, &sigma1), chernoff_q(&rho2, &sigma2));
        for w in [0.25, 0.5, 0.75] {
            let rho = rho1.mix(&rho2, w).expect("equal dimensions");
            let sigma = sigma1.mix(&sigma2, w).expect("equal dimensions");
            worst = worst.min(chernoff_q(&rho, &sigma) - (w * q1 + (1.0 - w) * q2));
        }

        let mut bipartite = TrialSetup::new(seed, k, &[4]);
        let (ra, rb) = bipartite.ranks();
        let rho = bipartite.state(ra);
        let sigma = bipartite.state(rb);
        let reduce = |x: &DensityMatrix| {
            let m = partial_trace(x.as_matrix(), Subsystem::B, (2, 2)).expect("4 = 2 × 2");
            trusted(HermitianMatrix::hermitized(m))
        };
        worst.min(chernoff_q(&reduce(&rho), &reduce(&sigma)) - chernoff_q(&rho, &sigma))
    })
}
