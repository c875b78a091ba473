//! Error-exponent functions `e(r)` and `e_Q(r)`, critical points and the
//! Stein rate.
//!
//! Both exponents are evaluated on the conditional pair `(p̃, q̃)`:
//! `e(r) = −ln ψ₀ + ẽ(r + ln ψ₁)`, where `ẽ` is the exponent of the
//! conditional pair. The supremum over `s ∈ [0, 1)` is located on a
//! 2001-point grid, refined by golden-section search around the best grid
//! point, and compared against the analytic `s → 1` limit.

use serde::Serialize;

use crate::discrimination::check_dims;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::linalg::{eigh, support_log, trace_of_product};
use crate::mapping::{conditionalize, quantum_relent, ClassicalPair, ConditionalPair, SpectralPair, TAU_PROB};
use crate::optimize::golden_section_max;
use crate::states::DensityMatrix;

const GRID_POINTS: usize = 2001;
/// Largest `s` evaluated before switching to the analytic limit.
const S_MAX: f64 = 1.0 - 1e-9;
/// Agreement required between the two pseudo-entropy routes.
const PSEUDO_ENTROPY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentPoint {
    pub r: f64,
    pub value: ExtendedReal,
    /// Maximizing `s`; `None` when the value is infinite or attained only
    /// in the limit `s → 1`.
    pub s_achieving: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalPoints {
    pub psi0: f64,
    pub psi1: f64,
    /// `S_σ(ρ‖σ)`, the start of the plateau.
    pub s_sigma_rho: f64,
    /// `S_ρ(σ‖ρ)`, the value at `r = −ln ψ₁`.
    pub s_rho_sigma: f64,
}

/// `(−r s − ln Q̃_s)/(1 − s)`.
fn conditional_objective(c: &ConditionalPair, r: f64, s: f64) -> f64 {
    (-r * s - c.log_q_tilde(s)) / (1.0 - s)
}

/// Supremum of the conditional objective for `r ≥ 0`.
fn conditional_exponent(c: &ConditionalPair, r: f64) -> (f64, Option<f64>) {
    let step = S_MAX / (GRID_POINTS - 1) as f64;
    let (mut k_best, mut v_best) = (0, f64::NEG_INFINITY);
    for k in 0..GRID_POINTS {
        let v = conditional_objective(c, r, k as f64 * step);
        if v > v_best {
            k_best = k;
            v_best = v;
        }
    }
    let lo = k_best.saturating_sub(1) as f64 * step;
    let hi = ((k_best + 1).min(GRID_POINTS - 1)) as f64 * step;
    let (s_ref, v_ref) = golden_section_max(|s| conditional_objective(c, r, s), lo, hi, 1e-13);
    let (mut s_best, mut value) = (k_best as f64 * step, v_best);
    if v_ref > value {
        s_best = s_ref;
        value = v_ref;
    }
    // s → 1 limit: H(q̃‖p̃) at r = 0, −∞ otherwise
    if r <= 0.0 {
        let limit = c.relent_qp();
        if limit >= value {
            return (limit, None);
        }
    }
    (value, Some(s_best))
}

fn exponent_from_conditional(c: &ConditionalPair, r: f64) -> Result<ExponentPoint> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("rate {r} must be a finite non-negative number")));
    }
    let threshold = -c.psi1.ln();
    if r < threshold - TAU_PROB {
        return Ok(ExponentPoint {
            r,
            value: ExtendedReal::Infinite,
            s_achieving: None,
        });
    }
    let shifted = (r + c.psi1.ln()).max(0.0);
    let (tilde, s) = conditional_exponent(c, shifted);
    Ok(ExponentPoint {
        r,
        value: ExtendedReal::Finite((-c.psi0.ln() + tilde).max(0.0)),
        s_achieving: s,
    })
}

/// Classical error exponent `e(r)`.
pub fn e_classical(p: &[f64], q: &[f64], r: f64) -> Result<ExponentPoint> {
    let cp = ClassicalPair::new(p.to_vec(), q.to_vec())?;
    exponent_from_conditional(&conditionalize(&cp)?, r)
}

/// Quantum error exponent `e_Q(r)`, evaluated on the mapped pair and
/// cross-checked against `Q_s` at the maximizing `s`.
pub fn e_quantum(rho: &DensityMatrix, sigma: &DensityMatrix, r: f64) -> Result<ExponentPoint> {
    let sp = SpectralPair::new(rho, sigma)?;
    let c = conditionalize(&sp.classical_pair())?;
    quantum_point(&sp, &c, r)
}

fn quantum_point(sp: &SpectralPair, c: &ConditionalPair, r: f64) -> Result<ExponentPoint> {
    let point = exponent_from_conditional(c, r)?;
    if let (ExtendedReal::Finite(v), Some(s)) = (point.value, point.s_achieving) {
        let direct = (-r * s - sp.q_s(s).ln()) / (1.0 - s);
        // round-off in Q_s is amplified by 1/(1−s)
        let tol = 1e-9 + 1e-14 / (1.0 - s);
        let deviation = (direct.max(0.0) - v).abs();
        if deviation > tol {
            return Err(Error::ConsistencyCheck {
                what: "quantum exponent",
                deviation,
            });
        }
    }
    Ok(point)
}

/// Pseudo-entropies `(S_σ(ρ‖σ), S_ρ(σ‖ρ))` from the operator formulas
/// `Tr[(ρ/ψ₀)(ln(ρ/ψ₀) − ln σ) supp σ]` and its mirror image.
pub fn pseudo_entropies_operator(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<(f64, f64)> {
    check_dims(rho, sigma)?;
    Ok((
        pseudo_entropy_operator(rho, sigma)?,
        pseudo_entropy_operator(sigma, rho)?,
    ))
}

fn pseudo_entropy_operator(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    let da = eigh(a.as_hermitian());
    let db = eigh(b.as_hermitian());
    let supp_a = da.projector_where(|l| l > da.threshold());
    let supp_b = db.projector_where(|l| l > db.threshold());
    let psi = supp_b.as_hermitian().trace_product(a.as_hermitian());
    if psi <= TAU_PROB {
        return Err(Error::OrthogonalHypotheses);
    }
    let log_a = support_log(a.as_hermitian())?;
    let log_b = support_log(b.as_hermitian())?;
    let inner = &(&log_a - &supp_a.as_hermitian().scale(psi.ln())) - &log_b;
    let a_inner = a.as_matrix() * inner.as_matrix();
    Ok(trace_of_product(&a_inner, supp_b.as_hermitian().as_matrix()).re / psi)
}

/// `ψ₀`, `ψ₁` and the pseudo-entropies, computed through the classical
/// identities `H(p̃‖q)`, `H(q̃‖p)` and checked against the operator route.
pub fn critical_points(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<CriticalPoints> {
    let sp = SpectralPair::new(rho, sigma)?;
    let c = conditionalize(&sp.classical_pair())?;
    let cps = critical_from_conditional(&c);
    let (op_sr, op_rs) = pseudo_entropies_operator(rho, sigma)?;
    let deviation = (op_sr - cps.s_sigma_rho).abs().max((op_rs - cps.s_rho_sigma).abs());
    if deviation > PSEUDO_ENTROPY_TOL {
        return Err(Error::ConsistencyCheck {
            what: "pseudo-entropies",
            deviation,
        });
    }
    Ok(cps)
}

fn critical_from_conditional(c: &ConditionalPair) -> CriticalPoints {
    CriticalPoints {
        psi0: c.psi0,
        psi1: c.psi1,
        s_sigma_rho: c.relent_pq() - c.psi1.ln(),
        s_rho_sigma: c.relent_qp() - c.psi0.ln(),
    }
}

/// `e_Q` on `steps` uniformly spaced rates in `[r_min, r_max]`.
pub fn hoeffding_curve(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    r_min: f64,
    r_max: f64,
    steps: usize,
) -> Result<Vec<ExponentPoint>> {
    if !(r_min >= 0.0 && r_max >= r_min && r_max.is_finite()) || steps < 2 {
        return Err(Error::InvalidArgument(format!(
            "need 0 ≤ r_min ≤ r_max and steps ≥ 2, got [{r_min}, {r_max}] with {steps} steps"
        )));
    }
    let sp = SpectralPair::new(rho, sigma)?;
    let c = conditionalize(&sp.classical_pair())?;
    (0..steps)
        .map(|k| {
            let r = r_min + (r_max - r_min) * k as f64 / (steps - 1) as f64;
            quantum_point(&sp, &c, r)
        })
        .collect()
}

/// Largest violation of monotone decrease and convexity among the finite
/// points of a uniform-grid curve. Zero means the shape is right.
pub fn curve_shape_violation(points: &[ExponentPoint]) -> f64 {
    let finite: Vec<f64> = points.iter().filter_map(|p| p.value.finite()).collect();
    let mut worst: f64 = 0.0;
    for w in finite.windows(2) {
        worst = worst.max(w[1] - w[0]);
    }
    for w in finite.windows(3) {
        worst = worst.max(2.0 * w[1] - w[0] - w[2]);
    }
    worst
}

/// Optimal type-II exponent `S(ρ‖σ)` at any fixed type-I level.
pub fn stein_rate(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ExtendedReal> {
    quantum_relent(rho, sigma)
}
