//! Classical reduction of a state pair and relative entropies.
//!
//! With `ρ = Σ λᵢ|xᵢ⟩⟨xᵢ|` and `σ = Σ μⱼ|yⱼ⟩⟨yⱼ|`, the pair `(ρ, σ)` maps to
//! `p_{ij} = λᵢ wᵢⱼ` and `q_{ij} = μⱼ wᵢⱼ` with `wᵢⱼ = |⟨xᵢ|yⱼ⟩|²`. Outcome
//! `(i, j)` is stored at flat index `i·d + j`, eigenvalues in descending
//! order. The mapping preserves `Tr[ρ^{1−s}σ^s]` and the relative entropy.

use crate::discrimination::{check_dims, check_probability_vector};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::linalg::{eigh, pow_support, support_log, HermitianMatrix, SpectralDecomposition};
use crate::states::DensityMatrix;

/// Support threshold for classical probabilities.
pub const TAU_PROB: f64 = 1e-12;

/// Eigenvalues of both operators together with the overlap weights
/// `wᵢⱼ = |⟨xᵢ|yⱼ⟩|²`, which is everything needed to evaluate `Q_s`.
#[derive(Clone, Debug)]
pub struct SpectralPair {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    /// Row-major `d × d` overlap weights.
    pub w: Vec<f64>,
    pub rho_decomposition: SpectralDecomposition,
    pub sigma_decomposition: SpectralDecomposition,
}

impl SpectralPair {
    pub fn new(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Self> {
        check_dims(rho, sigma)?;
        Ok(Self::from_psd(rho.as_hermitian(), sigma.as_hermitian()))
    }

    /// Same construction for arbitrary PSD operators of equal dimension
    /// (negative round-off below the clamp threshold is zeroed).
    pub fn from_psd(a: &HermitianMatrix, b: &HermitianMatrix) -> Self {
        let da = eigh(a);
        let db = eigh(b);
        let lambda: Vec<f64> = da.clamped_eigenvalues().into_iter().map(|l| l.max(0.0)).collect();
        let mu: Vec<f64> = db.clamped_eigenvalues().into_iter().map(|l| l.max(0.0)).collect();
        let overlap = da.eigenvectors.adjoint() * &db.eigenvectors;
        let d = lambda.len();
        let w = (0..d * d).map(|k| overlap[(k / d, k % d)].norm_sqr()).collect();
        Self {
            lambda,
            mu,
            w,
            rho_decomposition: da,
            sigma_decomposition: db,
        }
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    fn terms(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let d = self.dim();
        self.w
            .iter()
            .enumerate()
            .map(move |(k, &w)| (self.lambda[k / d], self.mu[k % d], w))
    }

    /// `Σ λᵢ^{1−s} μⱼ^s wᵢⱼ` with `0^t = 0`.
    pub fn q_s(&self, s: f64) -> f64 {
        self.terms()
            .map(|(l, m, w)| pow_support(l, 1.0 - s) * pow_support(m, s) * w)
            .sum()
    }

    /// `d Q_s / ds` on the open interval, restricted to the joint support.
    pub fn q_s_derivative(&self, s: f64) -> f64 {
        self.terms()
            .filter(|&(l, m, _)| l > 0.0 && m > 0.0)
            .map(|(l, m, w)| l.powf(1.0 - s) * m.powf(s) * w * (m.ln() - l.ln()))
            .sum()
    }

    /// `Tr[ρ · supp σ]`.
    pub fn psi0(&self) -> f64 {
        self.q_s(0.0)
    }

    /// `Tr[σ · supp ρ]`.
    pub fn psi1(&self) -> f64 {
        self.q_s(1.0)
    }

    pub fn classical_pair(&self) -> ClassicalPair {
        let d = self.dim();
        let (mut p, mut q) = (Vec::with_capacity(d * d), Vec::with_capacity(d * d));
        for (l, m, w) in self.terms() {
            p.push(l * w);
            q.push(m * w);
        }
        ClassicalPair {
            outcomes: (0..d * d).map(|k| (k / d, k % d)).collect(),
            p,
            q,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalPair {
    /// Eigenvector index pair `(i, j)` of each outcome.
    pub outcomes: Vec<(usize, usize)>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl ClassicalPair {
    /// Pair of plain distributions; outcome `k` is labelled `(k, 0)`.
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::DimensionMismatch(p.len(), q.len()));
        }
        check_probability_vector(&p)?;
        check_probability_vector(&q)?;
        Ok(Self {
            outcomes: (0..p.len()).map(|k| (k, 0)).collect(),
            p,
            q,
        })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// `Σ p^{1−s} q^s` with `0^t = 0`.
    pub fn q_s(&self, s: f64) -> f64 {
        self.p
            .iter()
            .zip(&self.q)
            .map(|(&p, &q)| pow_support(p, 1.0 - s) * pow_support(q, s))
            .sum()
    }
}

/// `(p, q)` conditioned on `B = D₀ ∩ D₁`, where `D₀ = {p > τ}` and
/// `D₁ = {q > τ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalPair {
    /// Flat outcome indices forming `B`.
    pub indices: Vec<usize>,
    /// `p(B)`.
    pub psi0: f64,
    /// `q(B)`.
    pub psi1: f64,
    pub p_tilde: Vec<f64>,
    pub q_tilde: Vec<f64>,
    /// `ln(p̃/q̃)` on `B`.
    log_ratio: Vec<f64>,
}

impl ConditionalPair {
    /// `ln Σ_B p̃^{1−s} q̃^s`, accurate near both endpoints.
    ///
    /// Written as `ln(1 + Σ q̃ (e^{(1−s)ℓ} − 1))` with `ℓ = ln(p̃/q̃)` for
    /// `s ≥ ½`, and symmetrically around `p̃` otherwise, so that
    /// `ln Q̃_s / (1−s)` keeps full relative precision as `s → 1`.
    pub fn log_q_tilde(&self, s: f64) -> f64 {
        let sum: f64 = if s >= 0.5 {
            let t = 1.0 - s;
            self.q_tilde
                .iter()
                .zip(&self.log_ratio)
                .map(|(&q, &l)| q * (t * l).exp_m1())
                .sum()
        } else {
            self.p_tilde
                .iter()
                .zip(&self.log_ratio)
                .map(|(&p, &l)| p * (-s * l).exp_m1())
                .sum()
        };
        sum.ln_1p()
    }

    /// `H(p̃‖q̃)`.
    pub fn relent_pq(&self) -> f64 {
        self.p_tilde
            .iter()
            .zip(&self.log_ratio)
            .map(|(&p, &l)| p * l)
            .sum::<f64>()
            .max(0.0)
    }

    /// `H(q̃‖p̃)`.
    pub fn relent_qp(&self) -> f64 {
        self.q_tilde
            .iter()
            .zip(&self.log_ratio)
            .map(|(&q, &l)| -q * l)
            .sum::<f64>()
            .max(0.0)
    }
}

/// Maps a state pair to its classical pair.
pub fn ns_map(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ClassicalPair> {
    Ok(SpectralPair::new(rho, sigma)?.classical_pair())
}

/// `Σ p ln(p/q)`, infinite when `p` charges an outcome that `q` does not.
pub fn classical_relent(p: &[f64], q: &[f64]) -> ExtendedReal {
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi <= TAU_PROB {
            continue;
        }
        if qi <= TAU_PROB {
            return ExtendedReal::Infinite;
        }
        total += pi * (pi.ln() - qi.ln());
    }
    ExtendedReal::Finite(total.max(0.0))
}

/// `Tr[ρ(ln ρ − ln σ)]` via matrix logarithms on the supports; infinite
/// when `Tr[ρ(1 − supp σ)] > τ`.
pub fn quantum_relent(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ExtendedReal> {
    check_dims(rho, sigma)?;
    let ds = eigh(sigma.as_hermitian());
    let tau = ds.threshold();
    let supp_sigma = ds.projector_where(|l| l > tau);
    let leak = 1.0 - supp_sigma.as_hermitian().trace_product(rho.as_hermitian());
    if leak > TAU_PROB {
        return Ok(ExtendedReal::Infinite);
    }
    let log_rho = support_log(rho.as_hermitian())?;
    let log_sigma = support_log(sigma.as_hermitian())?;
    let value = rho.as_hermitian().trace_product(&log_rho) - rho.as_hermitian().trace_product(&log_sigma);
    Ok(ExtendedReal::Finite(value.max(0.0)))
}

/// Restriction to the joint support `B`, renormalized.
pub fn conditionalize(cp: &ClassicalPair) -> Result<ConditionalPair> {
    let indices: Vec<usize> = (0..cp.len())
        .filter(|&k| cp.p[k] > TAU_PROB && cp.q[k] > TAU_PROB)
        .collect();
    let psi0 = indices.iter().map(|&k| cp.p[k]).sum::<f64>().min(1.0);
    let psi1 = indices.iter().map(|&k| cp.q[k]).sum::<f64>().min(1.0);
    if psi0 <= TAU_PROB || psi1 <= TAU_PROB {
        return Err(Error::OrthogonalHypotheses);
    }
    let p_tilde: Vec<f64> = indices.iter().map(|&k| cp.p[k] / psi0).collect();
    let q_tilde: Vec<f64> = indices.iter().map(|&k| cp.q[k] / psi1).collect();
    let log_ratio = p_tilde
        .iter()
        .zip(&q_tilde)
        .map(|(&p, &q)| p.ln() - q.ln())
        .collect();
    Ok(ConditionalPair {
        indices,
        psi0,
        psi1,
        p_tilde,
        q_tilde,
        log_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matrix_power, tensor_power};
    use crate::states::{pure_state_real, random_density, trusted};
    use approx::assert_abs_diff_eq;
    use std::collections::BTreeMap;

    fn assert_vec_eq(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert_abs_diff_eq!(x, y, epsilon = tol);
        }
    }

    #[test]
    fn ns_map_examples() {
        let rho = DensityMatrix::diagonal(&[0.2, 0.5, 0.3]).unwrap();
        let cp = ns_map(&rho, &rho).unwrap();
        let expected = [0.5, 0.0, 0.0, 0.0, 0.3, 0.0, 0.0, 0.0, 0.2];
        assert_vec_eq(&cp.p, &expected, 1e-15);
        assert_vec_eq(&cp.q, &expected, 1e-15);

        let rho = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let plus = pure_state_real(&[1.0, 1.0]).unwrap();
        let cp = ns_map(&rho, &plus).unwrap();
        assert_vec_eq(&cp.p, &[0.5, 0.5, 0.0, 0.0], 1e-12);
        assert_vec_eq(&cp.q, &[0.5, 0.0, 0.5, 0.0], 1e-12);
        assert_eq!(cp.outcomes, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);

        for seed in 0..20 {
            let d = 2 + (seed as usize % 4);
            let a = random_density(d, 1 + seed as usize % d, seed).unwrap();
            let b = random_density(d, d, seed + 1000).unwrap();
            let cp = ns_map(&a, &b).unwrap();
            assert_abs_diff_eq!(cp.p.iter().sum::<f64>(), 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(cp.q.iter().sum::<f64>(), 1.0, epsilon = 1e-10);
            assert!(cp.p.iter().chain(&cp.q).all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn classical_relent_examples() {
        let p = [0.95, 0.05];
        let q = [0.5, 0.5];
        assert_eq!(classical_relent(&p, &p), ExtendedReal::Finite(0.0));
        // 0.95 ln 1.9 + 0.05 ln 0.1 and 0.5 ln(0.5/0.95) + 0.5 ln 10
        let oracle_pq = 0.95 * 1.9f64.ln() + 0.05 * 0.1f64.ln();
        let oracle_qp = 0.5 * (0.5f64 / 0.95).ln() + 0.5 * 10f64.ln();
        assert_abs_diff_eq!(classical_relent(&p, &q).unwrap(), oracle_pq, epsilon = 1e-15);
        assert_abs_diff_eq!(classical_relent(&q, &p).unwrap(), oracle_qp, epsilon = 1e-15);
        assert_abs_diff_eq!(classical_relent(&p, &q).unwrap(), 0.49463, epsilon = 5e-6);
        assert_abs_diff_eq!(classical_relent(&q, &p).unwrap(), 0.83037, epsilon = 5e-6);
        assert_eq!(classical_relent(&[0.5, 0.5], &[1.0, 0.0]), ExtendedReal::Infinite);
        assert!(classical_relent(&[1.0, 0.0], &[0.5, 0.5]).is_finite());
    }

    #[test]
    fn quantum_relent_examples() {
        let rho = random_density(3, 3, 17).unwrap();
        assert_abs_diff_eq!(quantum_relent(&rho, &rho).unwrap().unwrap(), 0.0, epsilon = 1e-12);

        let a = DensityMatrix::diagonal(&[0.5, 0.5]).unwrap();
        let b = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        assert_eq!(quantum_relent(&a, &b).unwrap(), ExtendedReal::Infinite);
        assert_abs_diff_eq!(quantum_relent(&b, &a).unwrap().unwrap(), 2f64.ln(), epsilon = 1e-14);

        for seed in 0..20 {
            let d = 2 + seed as usize % 3;
            let rho = random_density(d, d, seed).unwrap();
            let sigma = random_density(d, d, seed + 50).unwrap();
            let cp = ns_map(&rho, &sigma).unwrap();
            let quantum = quantum_relent(&rho, &sigma).unwrap().unwrap();
            let classical = classical_relent(&cp.p, &cp.q).unwrap();
            assert_abs_diff_eq!(quantum, classical, epsilon = 1e-9);
        }
    }

    #[test]
    fn power_identity_with_matrix_oracle() {
        for seed in 0..30u64 {
            let d = 2 + seed as usize % 3;
            let rho = random_density(d, 1 + seed as usize % d, seed).unwrap();
            let sigma = random_density(d, 1 + (seed as usize / 3) % d, seed + 77).unwrap();
            let cp = ns_map(&rho, &sigma).unwrap();
            for k in 0..=10 {
                let s = k as f64 / 10.0;
                let a = matrix_power(rho.as_hermitian(), 1.0 - s).unwrap();
                let b = matrix_power(sigma.as_hermitian(), s).unwrap();
                assert_abs_diff_eq!(a.trace_product(&b), cp.q_s(s), epsilon = 1e-9);
            }
        }
    }

    fn aggregate(keys: impl Iterator<Item = (f64, f64)>, p: &[f64], q: &[f64]) -> BTreeMap<(i64, i64), (f64, f64)> {
        let mut out = BTreeMap::new();
        for ((kl, km), (&pi, &qi)) in keys.zip(p.iter().zip(q)) {
            let key = ((kl * 1e8).round() as i64, (km * 1e8).round() as i64);
            let e = out.entry(key).or_insert((0.0, 0.0));
            e.0 += pi;
            e.1 += qi;
        }
        out
    }

    #[test]
    fn tensor_powers_map_to_product_distributions() {
        for seed in 0..5u64 {
            let rho = random_density(2, 2, seed).unwrap();
            let sigma = random_density(2, 2, seed + 9).unwrap();
            let sp = SpectralPair::new(&rho, &sigma).unwrap();
            let cp = sp.classical_pair();
            // product distribution keyed by eigenvalue products
            let mut keys = Vec::new();
            let (mut pp, mut qq) = (Vec::new(), Vec::new());
            for (a, &(i1, j1)) in cp.outcomes.iter().enumerate() {
                for (b, &(i2, j2)) in cp.outcomes.iter().enumerate() {
                    keys.push((sp.lambda[i1] * sp.lambda[i2], sp.mu[j1] * sp.mu[j2]));
                    pp.push(cp.p[a] * cp.p[b]);
                    qq.push(cp.q[a] * cp.q[b]);
                }
            }
            let expected = aggregate(keys.into_iter(), &pp, &qq);

            let rho2 = trusted(tensor_power(rho.as_hermitian(), 2).unwrap());
            let sigma2 = trusted(tensor_power(sigma.as_hermitian(), 2).unwrap());
            let sp2 = SpectralPair::new(&rho2, &sigma2).unwrap();
            let cp2 = sp2.classical_pair();
            let keys2 = cp2.outcomes.iter().map(|&(i, j)| (sp2.lambda[i], sp2.mu[j]));
            let got = aggregate(keys2, &cp2.p, &cp2.q);

            assert_eq!(expected.len(), got.len());
            for ((k1, v1), (k2, v2)) in expected.iter().zip(&got) {
                assert_eq!(k1, k2);
                assert_abs_diff_eq!(v1.0, v2.0, epsilon = 1e-9);
                assert_abs_diff_eq!(v1.1, v2.1, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn conditionalize_examples() {
        let cp = ClassicalPair::new(vec![0.2, 0.8], vec![0.6, 0.4]).unwrap();
        let c = conditionalize(&cp).unwrap();
        assert_eq!((c.psi0, c.psi1), (1.0, 1.0));
        assert_vec_eq(&c.p_tilde, &cp.p, 0.0);

        let psi = pure_state_real(&[1.0, 0.0]).unwrap();
        let phi = pure_state_real(&[0.6, 0.8]).unwrap();
        let c = conditionalize(&ns_map(&psi, &phi).unwrap()).unwrap();
        assert_abs_diff_eq!(c.psi0, 0.36, epsilon = 1e-12);
        assert_abs_diff_eq!(c.psi1, 0.36, epsilon = 1e-12);
        assert_vec_eq(&c.p_tilde, &c.q_tilde, 1e-12);

        let b = 0.35;
        let rho = DensityMatrix::diagonal(&[0.0, 1.0]).unwrap();
        let sigma = DensityMatrix::diagonal(&[b, 1.0 - b]).unwrap();
        let c = conditionalize(&ns_map(&rho, &sigma).unwrap()).unwrap();
        assert_abs_diff_eq!(c.psi0, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.psi1, 1.0 - b, epsilon = 1e-15);

        let orth = ClassicalPair::new(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(conditionalize(&orth), Err(Error::OrthogonalHypotheses));
        assert!(matches!(
            ClassicalPair::new(vec![0.5, 0.6], vec![0.5, 0.5]),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn support_overlaps_match_operator_traces() {
        for seed in 0..20u64 {
            let rho = random_density(3, 1 + seed as usize % 3, seed).unwrap();
            let sigma = random_density(3, 1 + (seed as usize / 3) % 3, seed + 5).unwrap();
            let c = conditionalize(&ns_map(&rho, &sigma).unwrap()).unwrap();
            let supp_rho = crate::linalg::support_projection(rho.as_hermitian()).unwrap();
            let supp_sigma = crate::linalg::support_projection(sigma.as_hermitian()).unwrap();
            assert_abs_diff_eq!(
                c.psi0,
                supp_sigma.as_hermitian().trace_product(rho.as_hermitian()),
                epsilon = 1e-10
            );
            assert_abs_diff_eq!(
                c.psi1,
                supp_rho.as_hermitian().trace_product(sigma.as_hermitian()),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn log_q_tilde_matches_direct_sum() {
        let cp = ClassicalPair::new(vec![0.1, 0.3, 0.6], vec![0.5, 0.25, 0.25]).unwrap();
        let c = conditionalize(&cp).unwrap();
        for k in 0..=20 {
            let s = k as f64 / 20.0;
            let direct: f64 = cp.q_s(s).ln();
            assert_abs_diff_eq!(c.log_q_tilde(s), direct, epsilon = 1e-14);
        }
        let oracle: f64 = [0.1f64, 0.3, 0.6]
            .iter()
            .zip([0.5f64, 0.25, 0.25])
            .map(|(p, q)| q * (q / p).ln())
            .sum();
        let t = 1e-9;
        assert_abs_diff_eq!(-c.log_q_tilde(1.0 - t) / t, oracle, epsilon = 1e-7);
        assert_abs_diff_eq!(c.relent_qp(), oracle, epsilon = 1e-15);
    }
}
