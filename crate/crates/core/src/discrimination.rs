//! Optimal single-shot binary discrimination.
//!
//! A test is a POVM `{1−Π, Π}` where `Π` accepts the alternative hypothesis
//! `σ`. The type-I error is `α = Tr[Πρ]` and the type-II error is
//! `β = Tr[(1−Π)σ]`. Optimal tests are projectors onto the strictly positive
//! eigenspace of `Tσ − ρ`; zero eigenvalues are left out of the range, which
//! does not change any error probability.

use crate::error::{Error, Result};
use crate::linalg::{positive_part, range_projector, HermitianMatrix, Projector};
use crate::states::{DensityMatrix, Priors};

/// Tolerance on the normalization of classical probability vectors.
pub const PROB_NORM_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct TestOutcome {
    pub projector: Projector,
    pub alpha: f64,
    pub beta: f64,
    pub bayes_error: f64,
}

pub(crate) fn check_dims(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    Ok(())
}

fn errors_of(projector: &Projector, rho: &DensityMatrix, sigma: &DensityMatrix) -> (f64, f64) {
    let pi = projector.as_hermitian();
    let alpha = pi.trace_product(rho.as_hermitian());
    let beta = 1.0 - pi.trace_product(sigma.as_hermitian());
    (alpha, beta)
}

/// Holevo–Helstrom test: minimal Bayesian error `½(1 − ‖π₁σ − π₀ρ‖₁)`.
pub fn helstrom(rho: &DensityMatrix, sigma: &DensityMatrix, priors: Priors) -> Result<TestOutcome> {
    check_dims(rho, sigma)?;
    let diff = &sigma.as_hermitian().scale(priors.pi1) - &rho.as_hermitian().scale(priors.pi0);
    let d = diff.eigh();
    let tau = d.threshold();
    let projector = d.projector_where(|l| l > tau);
    let norm: f64 = d.eigenvalues.iter().map(|l| l.abs()).sum();
    let (alpha, beta) = errors_of(&projector, rho, sigma);
    Ok(TestOutcome {
        projector,
        alpha,
        beta,
        bayes_error: 0.5 * (1.0 - norm),
    })
}

#[derive(Clone, Debug)]
pub struct NeymanPearsonOutcome {
    /// Errors of the optimal test. `bayes_error` uses the priors implied by
    /// the threshold, `π₀ = 1/(1+T)` and `π₁ = T/(1+T)`.
    pub test: TestOutcome,
    /// `T − Tr[(Tσ − ρ)_+]`, the optimal value of `α + Tβ`.
    pub threshold_value: f64,
}

/// Quantum Neyman–Pearson test minimizing `α + Tβ`.
pub fn neyman_pearson(rho: &DensityMatrix, sigma: &DensityMatrix, t: f64) -> Result<NeymanPearsonOutcome> {
    check_dims(rho, sigma)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("threshold {t} must be positive")));
    }
    let diff = &sigma.as_hermitian().scale(t) - rho.as_hermitian();
    let d = diff.eigh();
    let tau = d.threshold();
    let projector = d.projector_where(|l| l > tau);
    let pos_trace: f64 = d.eigenvalues.iter().map(|l| l.max(0.0)).sum();
    let (alpha, beta) = errors_of(&projector, rho, sigma);
    let (pi0, pi1) = (1.0 / (1.0 + t), t / (1.0 + t));
    Ok(NeymanPearsonOutcome {
        test: TestOutcome {
            projector,
            alpha,
            beta,
            bayes_error: pi0 * alpha + pi1 * beta,
        },
        threshold_value: t - pos_trace,
    })
}

/// Checks that `p` is a non-negative vector summing to 1.
pub fn check_probability_vector(p: &[f64]) -> Result<()> {
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROB_NORM_TOL || p.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::NotNormalized(sum));
    }
    Ok(())
}

/// Minimal classical error `Σ min(η₀pᵢ, η₁qᵢ)`, attained by the
/// maximum-likelihood test.
pub fn classical_ml_error(p: &[f64], q: &[f64], eta0: f64, eta1: f64) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(p.len(), q.len()));
    }
    check_probability_vector(p)?;
    check_probability_vector(q)?;
    Ok(p.iter()
        .zip(q)
        .map(|(&pi, &qi)| (eta0 * pi).min(eta1 * qi))
        .sum())
}

/// Errors of an arbitrary test operator `0 ≤ Π ≤ 1`:
/// `(Tr[Πρ], Tr[(1−Π)σ], η₀α + η₁β)`.
pub fn quantum_error_of_test(
    test: &HermitianMatrix,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    eta0: f64,
    eta1: f64,
) -> Result<(f64, f64, f64)> {
    check_dims(rho, sigma)?;
    if test.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(test.dim(), rho.dim()));
    }
    let alpha = test.trace_product(rho.as_hermitian());
    let beta = 1.0 - test.trace_product(sigma.as_hermitian());
    Ok((alpha, beta, eta0 * alpha + eta1 * beta))
}

/// `Tr[(Tσ − ρ)_+]`, exposed for variational checks.
pub fn positive_part_trace(rho: &DensityMatrix, sigma: &DensityMatrix, t: f64) -> Result<f64> {
    check_dims(rho, sigma)?;
    let diff = &sigma.as_hermitian().scale(t) - rho.as_hermitian();
    Ok(positive_part(&diff).trace())
}

/// Range projector of `(Tσ − ρ)_+` computed from the matrix directly.
pub fn threshold_projector(rho: &DensityMatrix, sigma: &DensityMatrix, t: f64) -> Result<Projector> {
    check_dims(rho, sigma)?;
    let diff = &sigma.as_hermitian().scale(t) - rho.as_hermitian();
    Ok(range_projector(&diff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{pure_state_real, random_density, random_projector};
    use approx::assert_abs_diff_eq;

    fn pair() -> (DensityMatrix, DensityMatrix) {
        (
            DensityMatrix::diagonal(&[0.25, 0.75]).unwrap(),
            DensityMatrix::diagonal(&[0.75, 0.25]).unwrap(),
        )
    }

    #[test]
    fn helstrom_examples() {
        let rho = random_density(3, 3, 5).unwrap();
        let out = helstrom(&rho, &rho, Priors::equal()).unwrap();
        assert_abs_diff_eq!(out.bayes_error, 0.5, epsilon = 1e-12);

        let a = pure_state_real(&[1.0, 0.0]).unwrap();
        let b = pure_state_real(&[0.0, 1.0]).unwrap();
        let out = helstrom(&a, &b, Priors::equal()).unwrap();
        assert_abs_diff_eq!(out.bayes_error, 0.0, epsilon = 1e-15);

        let (rho, sigma) = pair();
        let out = helstrom(&rho, &sigma, Priors::equal()).unwrap();
        assert_abs_diff_eq!(out.bayes_error, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(
            out.bayes_error,
            0.5 * out.alpha + 0.5 * out.beta,
            epsilon = 1e-10
        );

        let other = DensityMatrix::diagonal(&[0.2, 0.3, 0.5]).unwrap();
        assert!(matches!(
            helstrom(&rho, &other, Priors::equal()),
            Err(Error::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn helstrom_recomputed_error_and_symmetry() {
        for seed in 0..10 {
            let rho = random_density(3, 1 + (seed as usize % 3), seed).unwrap();
            let sigma = random_density(3, 3, 100 + seed).unwrap();
            let priors = Priors::from_pi0(0.3).unwrap();
            let out = helstrom(&rho, &sigma, priors).unwrap();
            assert_abs_diff_eq!(
                out.bayes_error,
                priors.pi0 * out.alpha + priors.pi1 * out.beta,
                epsilon = 1e-10
            );
            let swapped = helstrom(&sigma, &rho, Priors::from_pi0(0.7).unwrap()).unwrap();
            assert_abs_diff_eq!(out.bayes_error, swapped.bayes_error, epsilon = 1e-12);
        }
    }

    #[test]
    fn neyman_pearson_identity_and_optimality() {
        let rho = random_density(2, 2, 21).unwrap();
        let sigma = random_density(2, 2, 22).unwrap();
        let t = 2.0;
        let np = neyman_pearson(&rho, &sigma, t).unwrap();
        assert_abs_diff_eq!(
            np.test.alpha + t * np.test.beta,
            np.threshold_value,
            epsilon = 1e-10
        );
        // brute force against random projectors of every rank
        for k in 0..100u64 {
            let proj = random_projector(2, (k % 3) as usize, 500 + k);
            let (a, b, _) = quantum_error_of_test(proj.as_hermitian(), &rho, &sigma, 1.0, t).unwrap();
            assert!(a + t * b >= np.test.alpha + t * np.test.beta - 1e-10);
        }

        let same = neyman_pearson(&rho, &rho, 1.0).unwrap();
        assert_abs_diff_eq!(same.test.alpha + same.test.beta, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn neyman_pearson_with_prior_ratio_is_helstrom() {
        let rho = random_density(3, 2, 1).unwrap();
        let sigma = random_density(3, 3, 2).unwrap();
        let priors = Priors::from_pi0(0.4).unwrap();
        let h = helstrom(&rho, &sigma, priors).unwrap();
        let np = neyman_pearson(&rho, &sigma, priors.pi1 / priors.pi0).unwrap();
        let diff = h.projector.as_hermitian() - np.test.projector.as_hermitian();
        assert!(diff.as_matrix().iter().all(|z| z.norm() < 1e-10));
        assert_abs_diff_eq!(h.bayes_error, np.test.bayes_error, epsilon = 1e-10);
    }

    #[test]
    fn classical_ml_error_examples() {
        let p = [0.3, 0.7];
        assert_abs_diff_eq!(classical_ml_error(&p, &p, 0.5, 0.5).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(
            classical_ml_error(&[1.0, 0.0], &[0.0, 1.0], 0.5, 0.5).unwrap(),
            0.0
        );
        assert_abs_diff_eq!(
            classical_ml_error(&[0.95, 0.05], &[0.5, 0.5], 0.5, 0.5).unwrap(),
            0.275,
            epsilon = 1e-15
        );
        assert!(matches!(
            classical_ml_error(&[0.5, 0.6], &[0.5, 0.5], 0.5, 0.5),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn quantum_error_of_trivial_tests() {
        let (rho, sigma) = pair();
        let zero = HermitianMatrix::zeros(2);
        let (a, b, w) = quantum_error_of_test(&zero, &rho, &sigma, 0.2, 0.8).unwrap();
        assert_eq!((a, b), (0.0, 1.0));
        assert_abs_diff_eq!(w, 0.8, epsilon = 1e-15);
        let one = HermitianMatrix::identity(2);
        let (a, b, w) = quantum_error_of_test(&one, &rho, &sigma, 0.2, 0.8).unwrap();
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w, 0.2, epsilon = 1e-15);

        let h = helstrom(&rho, &sigma, Priors::equal()).unwrap();
        let (_, _, w) =
            quantum_error_of_test(h.projector.as_hermitian(), &rho, &sigma, 0.5, 0.5).unwrap();
        assert_abs_diff_eq!(w, h.bayes_error, epsilon = 1e-12);
    }
}
