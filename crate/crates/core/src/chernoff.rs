//! `Q_s = Tr[ρ^{1−s}σ^s]`, the Chernoff distance, fidelity, trace distance
//! and the Hellinger arc.

use serde::Serialize;

use crate::discrimination::check_dims;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::linalg::{eigh, matrix_power_from, trace_norm, HermitianMatrix, SpectralDecomposition};
use crate::mapping::{SpectralPair, TAU_PROB};
use crate::optimize::{bisect_sign, golden_section_min};
use crate::states::DensityMatrix;

/// Absolute tolerance in `s` for the Chernoff minimization.
pub const S_TOL: f64 = 1e-10;
/// Number of points on the reported `Q_s` curve.
pub const CURVE_POINTS: usize = 101;
/// Distance from an endpoint within which the minimizer snaps to it.
const ENDPOINT_SNAP: f64 = 1e-8;
/// Half-width of the derivative-sign refinement window.
const POLISH_WINDOW: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct ChernoffResult {
    pub q_star: f64,
    pub xi_qcb: ExtendedReal,
    pub s_star: f64,
    /// `(s, Q_s)` on a uniform grid over `[0, 1]`.
    pub curve: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ArcPoint {
    pub s: f64,
    /// Eigenvalues of `ρ_s`, descending.
    pub spectrum: Vec<f64>,
    pub rel_ent_to_rho: f64,
    pub rel_ent_to_sigma: f64,
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::SOutOfRange(s));
    }
    Ok(())
}

pub fn q_s(rho: &DensityMatrix, sigma: &DensityMatrix, s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(SpectralPair::new(rho, sigma)?.q_s(s))
}

/// Analytic `dQ_s/ds` for faithful states.
pub fn q_s_derivative(rho: &DensityMatrix, sigma: &DensityMatrix, s: f64) -> Result<f64> {
    check_s(s)?;
    let sp = SpectralPair::new(rho, sigma)?;
    if sp.lambda.iter().chain(&sp.mu).any(|&x| x <= 0.0) {
        return Err(Error::NotFaithful);
    }
    Ok(sp.q_s_derivative(s))
}

pub fn chernoff_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ChernoffResult> {
    let sp = SpectralPair::new(rho, sigma)?;
    Ok(chernoff_from_pair(&sp))
}

pub(crate) fn chernoff_from_pair(sp: &SpectralPair) -> ChernoffResult {
    let curve: Vec<(f64, f64)> = (0..CURVE_POINTS)
        .map(|k| {
            let s = k as f64 / (CURVE_POINTS - 1) as f64;
            (s, sp.q_s(s))
        })
        .collect();
    let overlap = sp.q_s(0.5);
    if overlap <= TAU_PROB {
        return ChernoffResult {
            q_star: 0.0,
            xi_qcb: ExtendedReal::Infinite,
            s_star: 0.5,
            curve,
        };
    }
    let (s_star, q_star) = minimize_q(sp);
    ChernoffResult {
        q_star,
        xi_qcb: if q_star <= TAU_PROB {
            ExtendedReal::Infinite
        } else {
            ExtendedReal::Finite((-q_star.ln()).max(0.0))
        },
        s_star,
        curve,
    }
}

fn minimize_q(sp: &SpectralPair) -> (f64, f64) {
    let (mut s, mut best) = golden_section_min(|s| sp.q_s(s), 0.0, 1.0, S_TOL);
    // Q_s is flat near its minimum, so refine on the sign of the derivative
    if s > POLISH_WINDOW && s < 1.0 - POLISH_WINDOW {
        let (lo, hi) = (s - POLISH_WINDOW, s + POLISH_WINDOW);
        let (dlo, dhi) = (sp.q_s_derivative(lo), sp.q_s_derivative(hi));
        if dlo < 0.0 && dhi > 0.0 {
            let root = bisect_sign(|x| sp.q_s_derivative(x), lo, hi, 1e-15);
            let v = sp.q_s(root);
            if v <= best {
                s = root;
                best = v;
            }
        }
    }
    let (q0, q1) = (sp.q_s(0.0), sp.q_s(1.0));
    if s < ENDPOINT_SNAP && q0 <= best {
        return (0.0, q0);
    }
    if s > 1.0 - ENDPOINT_SNAP && q1 <= best {
        return (1.0, q1);
    }
    (s, sp.q_s(s))
}

/// `‖ρ^{1/2}σ^{1/2}‖₁`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    Ok(root_product_trace_norm(rho.as_hermitian(), sigma.as_hermitian()))
}

/// `‖A^{1/2}B^{1/2}‖₁` for PSD operators.
pub fn root_product_trace_norm(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    let ra = sqrt_psd(&eigh(a));
    let rb = sqrt_psd(&eigh(b));
    let product = ra.as_matrix() * rb.as_matrix();
    product.singular_values().iter().sum()
}

fn sqrt_psd(d: &SpectralDecomposition) -> HermitianMatrix {
    let weights: Vec<f64> = d
        .clamped_eigenvalues()
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .collect();
    d.from_weights(&weights)
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    Ok(0.5 * trace_norm(&(rho.as_hermitian() - sigma.as_hermitian())))
}

/// Point `ρ_s = ρ^{1−s}σ^s / Q_s` on the Hellinger arc, for faithful states.
pub fn hellinger_arc(rho: &DensityMatrix, sigma: &DensityMatrix, s: f64) -> Result<ArcPoint> {
    check_dims(rho, sigma)?;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::SOutOfRange(s));
    }
    let dr = eigh(rho.as_hermitian());
    let ds = eigh(sigma.as_hermitian());
    if dr.rank_above_threshold() < dr.dim() || ds.rank_above_threshold() < ds.dim() {
        return Err(Error::NotFaithful);
    }
    let rho_half = matrix_power_from(&dr, (1.0 - s) / 2.0)?;
    let rho_pow = matrix_power_from(&dr, 1.0 - s)?;
    let sigma_pow = matrix_power_from(&ds, s)?;
    let log_rho = dr.map(f64::ln);
    let log_sigma = ds.map(f64::ln);

    let similar = HermitianMatrix::hermitized(
        rho_half.as_matrix() * sigma_pow.as_matrix() * rho_half.as_matrix(),
    );
    let q = similar.trace();
    let spectrum: Vec<f64> = eigh(&similar.scale(1.0 / q))
        .eigenvalues
        .into_iter()
        .map(|l| l.max(0.0))
        .collect();
    let neg_entropy: f64 = spectrum.iter().filter(|&&l| l > 0.0).map(|&l| l * l.ln()).sum();

    // Tr[ρ^{1−s}σ^s ln ρ] = Tr[(ln ρ · ρ^{1−s}) σ^s]
    let rho_log_rho = HermitianMatrix::hermitized(log_rho.as_matrix() * rho_pow.as_matrix());
    let cross_rho = rho_log_rho.trace_product(&sigma_pow) / q;
    let sigma_log_sigma = HermitianMatrix::hermitized(sigma_pow.as_matrix() * log_sigma.as_matrix());
    let cross_sigma = rho_pow.trace_product(&sigma_log_sigma) / q;

    Ok(ArcPoint {
        s,
        spectrum,
        rel_ent_to_rho: neg_entropy - cross_rho,
        rel_ent_to_sigma: neg_entropy - cross_sigma,
    })
}
