//! Exact n-copy error probabilities, rate sequences and the finite-n
//! Hoeffding tests.

use serde::Serialize;

use crate::chernoff::{chernoff_from_pair, ChernoffResult};
use crate::discrimination::{check_dims, check_probability_vector};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::hoeffding::e_quantum;
use crate::linalg::{checked_tensor_dim, dim_cap, eigh, tensor_power_capped, trace_norm, HermitianMatrix};
use crate::mapping::SpectralPair;
use crate::optimize::golden_section_min;
use crate::states::{DensityMatrix, Priors};

/// Errors at or below this value have no meaningful rate.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;
/// Largest support handled by type-class enumeration.
pub const MAX_TYPE_SUPPORT: usize = 16;
/// Numerical slack on the finite-n sandwich.
pub const SANDWICH_SLACK: f64 = 1e-10;
/// Range to which the achieving `s` of a Hoeffding test is clamped.
const S_CLAMP: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct RateEntry {
    pub n: usize,
    /// `P*_{e,n}`.
    pub value: f64,
    /// `−(1/n) ln P*_{e,n}`, absent when the value underflows.
    pub rate: Option<f64>,
    /// `min_s π₀^{1−s}π₁^s Q_s^n`.
    pub upper_bound: f64,
    /// Half the classical ML error of the mapped n-fold pair; absent when
    /// the mapped support is too large to enumerate.
    pub lower_bound: Option<f64>,
    pub sandwich_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateSequence {
    pub entries: Vec<RateEntry>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HoeffdingTestOutcome {
    pub alpha: f64,
    pub beta: f64,
    /// Parameter used to build the test.
    pub s: f64,
    pub x: f64,
    /// `exp[n(−xs + ln Q_s)]`.
    pub alpha_bound: f64,
    /// `exp[n(x(1−s) + ln Q_s)] = e^{−nr}`.
    pub beta_bound: f64,
}

fn tensor_pair(rho: &DensityMatrix, sigma: &DensityMatrix, n: usize) -> Result<(HermitianMatrix, HermitianMatrix)> {
    check_dims(rho, sigma)?;
    if n == 0 {
        return Err(Error::InvalidArgument("number of copies must be at least 1".into()));
    }
    let cap = dim_cap();
    Ok((
        tensor_power_capped(rho.as_hermitian(), n, cap)?,
        tensor_power_capped(sigma.as_hermitian(), n, cap)?,
    ))
}

/// `P*_{e,n} = (1 − ‖π₁σ^{⊗n} − π₀ρ^{⊗n}‖₁)/2`.
pub fn n_copy_error(rho: &DensityMatrix, sigma: &DensityMatrix, priors: Priors, n: usize) -> Result<f64> {
    let (rn, sn) = tensor_pair(rho, sigma, n)?;
    let diff = &sn.scale(priors.pi1) - &rn.scale(priors.pi0);
    Ok((0.5 * (1.0 - trace_norm(&diff))).max(0.0))
}

/// `Σ min(η₀ p^{⊗n}, η₁ q^{⊗n})`, summed over type classes.
pub fn type_class_ml_error(p: &[f64], q: &[f64], eta0: f64, eta1: f64, n: usize) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(p.len(), q.len()));
    }
    check_probability_vector(p)?;
    check_probability_vector(q)?;
    let support: Vec<usize> = (0..p.len()).filter(|&k| p[k] > 0.0 || q[k] > 0.0).collect();
    if support.len() > MAX_TYPE_SUPPORT {
        return Err(Error::SupportTooLarge {
            size: support.len(),
            max: MAX_TYPE_SUPPORT,
        });
    }
    let ln = |x: f64| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY };
    let lp: Vec<f64> = support.iter().map(|&k| ln(p[k])).collect();
    let lq: Vec<f64> = support.iter().map(|&k| ln(q[k])).collect();
    let mut ln_fact = vec![0.0; n + 1];
    for k in 1..=n {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    let mut walker = TypeWalker {
        lp: &lp,
        lq: &lq,
        ln_fact: &ln_fact,
        ln_eta0: eta0.ln(),
        ln_eta1: eta1.ln(),
        total: 0.0,
    };
    walker.visit(0, n, ln_fact[n], 0.0, 0.0);
    Ok(walker.total)
}

struct TypeWalker<'a> {
    lp: &'a [f64],
    lq: &'a [f64],
    ln_fact: &'a [f64],
    ln_eta0: f64,
    ln_eta1: f64,
    total: f64,
}

impl TypeWalker<'_> {
    /// Distributes `left` draws over outcomes `idx..`, accumulating the log
    /// multinomial coefficient and both log-likelihoods.
    fn visit(&mut self, idx: usize, left: usize, ln_mult: f64, acc_p: f64, acc_q: f64) {
        if idx + 1 >= self.lp.len() {
            if self.lp.is_empty() {
                return;
            }
            let c = left as f64;
            let tp = if left == 0 { acc_p } else { acc_p + c * self.lp[idx] };
            let tq = if left == 0 { acc_q } else { acc_q + c * self.lq[idx] };
            let ln_term = ln_mult - self.ln_fact[left] + (self.ln_eta0 + tp).min(self.ln_eta1 + tq);
            self.total += ln_term.exp();
            return;
        }
        for c in 0..=left {
            let cf = c as f64;
            let tp = if c == 0 { acc_p } else { acc_p + cf * self.lp[idx] };
            let tq = if c == 0 { acc_q } else { acc_q + cf * self.lq[idx] };
            if tp == f64::NEG_INFINITY && tq == f64::NEG_INFINITY {
                continue;
            }
            self.visit(idx + 1, left - c, ln_mult - self.ln_fact[c], tp, tq);
        }
    }
}

/// `min_s [(1−s) ln π₀ + s ln π₁ + n ln Q_s]`, the log of the upper bound.
fn log_upper_bound(sp: &SpectralPair, priors: Priors, n: usize) -> f64 {
    let f = |s: f64| {
        let q = sp.q_s(s);
        let lq = if q > 0.0 { q.ln() } else { f64::NEG_INFINITY };
        (1.0 - s) * priors.pi0.ln() + s * priors.pi1.ln() + n as f64 * lq
    };
    let (_, interior) = golden_section_min(f, 0.0, 1.0, 1e-12);
    interior.min(f(0.0)).min(f(1.0))
}

/// Exact `P*_{e,n}` for `n = 1..=n_max`, each checked against the finite-n
/// sandwich, together with the Chernoff distance.
pub fn chernoff_rate_experiment(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    priors: Priors,
    n_max: usize,
) -> Result<(RateSequence, ChernoffResult)> {
    check_dims(rho, sigma)?;
    checked_tensor_dim(rho.dim(), n_max, dim_cap())?;
    let sp = SpectralPair::new(rho, sigma)?;
    let chernoff = chernoff_from_pair(&sp);
    let cp = sp.classical_pair();
    let mut entries = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let value = n_copy_error(rho, sigma, priors, n)?;
        let upper_bound = log_upper_bound(&sp, priors, n).exp();
        let lower_bound = match type_class_ml_error(&cp.p, &cp.q, priors.pi0, priors.pi1, n) {
            Ok(v) => Some(0.5 * v),
            Err(Error::SupportTooLarge { .. }) => None,
            Err(e) => return Err(e),
        };
        let sandwich_ok = value <= upper_bound + SANDWICH_SLACK
            && lower_bound.is_none_or(|lb| lb <= value + SANDWICH_SLACK);
        entries.push(RateEntry {
            n,
            value,
            rate: (value > UNDERFLOW_FLOOR).then(|| -value.ln() / n as f64),
            upper_bound,
            lower_bound,
            sandwich_ok,
        });
    }
    Ok((RateSequence { entries }, chernoff))
}

/// Exact errors of the projector onto the range of
/// `(e^{−nx}σ^{⊗n} − ρ^{⊗n})_+`, with `s` taken from the maximizer of
/// `e_Q(r)` and `x = −(r + ln Q_s)/(1−s)`.
pub fn hoeffding_test(rho: &DensityMatrix, sigma: &DensityMatrix, r: f64, n: usize) -> Result<HoeffdingTestOutcome> {
    let (rn, sn) = tensor_pair(rho, sigma, n)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("rate {r} must be positive")));
    }
    let point = e_quantum(rho, sigma, r)?;
    let sp = SpectralPair::new(rho, sigma)?;
    if point.value == ExtendedReal::Infinite {
        return Err(Error::InfiniteExponentRegion {
            r,
            threshold: -sp.psi1().min(1.0).ln(),
        });
    }
    let s = point
        .s_achieving
        .unwrap_or(1.0 - S_CLAMP)
        .clamp(S_CLAMP, 1.0 - S_CLAMP);
    let ln_q = sp.q_s(s).ln();
    let x = -(r + ln_q) / (1.0 - s);
    let nf = n as f64;

    let diff = &sn.scale((-nf * x).exp()) - &rn;
    let d = eigh(&diff);
    let tau = d.threshold();
    let accept = d.projector_where(|l| l > tau);
    let reject = d.projector_where(|l| l <= tau);
    Ok(HoeffdingTestOutcome {
        alpha: accept.as_hermitian().trace_product(&rn),
        beta: reject.as_hermitian().trace_product(&sn),
        s,
        x,
        alpha_bound: (nf * (-x * s + ln_q)).exp(),
        beta_bound: (nf * (x * (1.0 - s) + ln_q)).exp(),
    })
}
