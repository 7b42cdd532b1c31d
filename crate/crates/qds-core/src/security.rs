//! Attack probability bounds and their composition: forgery, repudiation
//! (with the transcendental equal-risk solver), robustness, and the total
//! security level per protocol variant.

use crate::entropy::{sampling_deviation_g, tail_h, SamplingBoundInputs};
use crate::error::{Error, Result};
use crate::num::Real;

/// Source and estimation variant of the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ProtocolVariant {
    /// Heralded two-photon source, no decoy estimation.
    TwoPhoton,
    /// Weak coherent pulses, one modulator and a 50:50 split.
    Scheme1,
    /// Weak coherent pulses, independent modulators per arm.
    Scheme2,
}

/// Kept-bit bookkeeping. Counts are expected values and may be fractional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolCounts<R> {
    /// Kept bits after discarding no-click rounds.
    pub m: R,
    /// Test bits.
    pub m_t: R,
    /// Untested bits.
    pub m_u: R,
    /// Test fraction `m_t / m`.
    pub beta: R,
}

impl<R: Real> ProtocolCounts<R> {
    pub fn from_kept(m: R, beta: R) -> Result<Self> {
        if m <= R::zero() || !m.is_finite() {
            return Err(Error::domain(format!("kept-bit count {m} must be positive")));
        }
        if beta <= R::zero() || beta >= R::one() {
            return Err(Error::domain(format!("test fraction {beta} outside (0, 1)")));
        }
        let m_t = beta * m;
        Ok(Self { m, m_t, m_u: m - m_t, beta })
    }
}

/// Acceptance thresholds on conclusive mismatch rates.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Thresholds<R> {
    /// Authentication threshold (Bob accepts below it).
    pub t_a: R,
    /// Verification threshold (Charlie accepts below it).
    pub t_v: R,
}

impl<R: Real> Thresholds<R> {
    pub fn new(t_a: R, t_v: R) -> Result<Self> {
        if !(R::zero() <= t_a && t_a < t_v && t_v < R::half()) {
            return Err(Error::domain(format!(
                "thresholds must satisfy 0 <= T_a < T_v < 1/2, got ({t_a}, {t_v})"
            )));
        }
        Ok(Self { t_a, t_v })
    }
}

/// Every bound and intermediate of one security evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityReport<R> {
    pub eps_forge: R,
    pub eps_repud: R,
    /// Sampling failure budget consumed by the forgery error-rate estimate.
    pub eps_sample_forge: R,
    /// Sampling failure budget consumed by the distance estimate.
    pub eps_sample_repud: R,
    /// Total decoy-method failure probability (0 for the two-photon source).
    pub eps_decoy: R,
    pub eps_sec: R,
    pub eps_rob: R,
    pub a_root: R,
    pub s_c: R,
    pub delta: R,
    pub delta_1: R,
    pub delta_2: R,
}

/// Test distance `Delta` between Bob's and Charlie's conclusive strings:
/// observed mismatch sum plus the sampling deviation `delta_2`.
pub fn delta_gap<R: Real>(
    e_b_c: R,
    e_c_c: R,
    p_b_c: R,
    p_c_c: R,
    counts: &ProtocolCounts<R>,
    eps_sample: R,
) -> Result<(R, R)> {
    if counts.m_t < R::one() {
        return Err(Error::Degenerate(format!("test sample {} < 1", counts.m_t)));
    }
    let delta_t = e_b_c + e_c_c;
    let pop = p_c_c * p_b_c;
    let delta_2 = sampling_deviation_g(SamplingBoundInputs {
        n: pop * counts.m_u,
        k: pop * counts.m_t,
        lambda: delta_t,
        eps_bar: eps_sample,
    })?;
    Ok((delta_t + delta_2, delta_2))
}

/// Finds the equal-risk point `A` of the repudiation analysis: the value
/// where Bob's acceptance tail equals Charlie's rejection tail, inside
/// `(P_B^c T_a, P_B^c (T_v - Delta))`. Bisection to relative 1e-12.
pub fn repudiation_solve_a<R: Real>(
    p_b_c: R,
    p_c_c: R,
    th: &Thresholds<R>,
    delta: R,
) -> Result<R> {
    if p_b_c <= R::zero() || p_c_c <= R::zero() {
        return Err(Error::domain("conclusive probabilities must be positive".to_string()));
    }
    if th.t_v - delta <= th.t_a {
        return Err(Error::infeasible(format!(
            "T_v - Delta = {} does not exceed T_a = {}",
            th.t_v - delta,
            th.t_a
        )));
    }
    let lo0 = p_b_c * th.t_a;
    let hi0 = p_b_c * (th.t_v - delta);
    let f = |a: R| -> R {
        let lhs = (a - p_b_c * th.t_a).powi(2) / (R::two() * a);
        let pc = p_c_c * (a / p_b_c + delta);
        let rhs = (p_c_c * th.t_v - pc).powi(2) / (R::of(3.0) * pc);
        lhs - rhs
    };
    // f < 0 at the left endpoint (zero Bob exponent, positive Charlie
    // exponent) and > 0 at the right; interior root by continuity.
    let eps = (hi0 - lo0) * R::of(1e-9);
    if !(f(lo0 + eps) < R::zero() && f(hi0 - eps) > R::zero()) {
        return Err(Error::Solver("equal-risk bracket lost its sign change".to_string()));
    }
    let mut lo = lo0;
    let mut hi = hi0;
    for _ in 0..200 {
        let mid = (lo + hi) * R::half();
        if f(mid) < R::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= R::of(1e-12) * hi {
            break;
        }
    }
    Ok((lo + hi) * R::half())
}

/// Repudiation probability bound at the equal-risk point.
pub fn repudiation_prob<R: Real>(a: R, p_b_c: R, t_a: R, m_u: R) -> Result<R> {
    if a <= p_b_c * t_a {
        return Err(Error::domain(format!("A = {a} must exceed P_B^c T_a = {}", p_b_c * t_a)));
    }
    if m_u < R::one() {
        return Err(Error::domain(format!("untested count {m_u} must be >= 1")));
    }
    Ok((-(a - p_b_c * t_a).powi(2) / (R::two() * a) * m_u).exp())
}

/// Forgery probability bound: Chernoff tail of the optimal forger's
/// mismatch rate `S_c` staying below the effective threshold over
/// `n_conclusive` untested conclusive bits.
pub fn forgery_prob<R: Real>(s_c: R, t_eff: R, n_conclusive: R) -> Result<R> {
    if n_conclusive < R::one() {
        return Err(Error::domain(format!("conclusive count {n_conclusive} must be >= 1")));
    }
    if t_eff >= s_c {
        return Err(Error::infeasible(format!(
            "effective threshold {t_eff} is not below the forgery floor {s_c}"
        )));
    }
    Ok((-(s_c - t_eff).powi(2) / (R::two() * s_c) * n_conclusive).exp())
}

/// Bit error rate fed into the forgery analysis: observed conclusive QBER
/// plus the finite-sample deviation `delta_1`.
pub fn forgery_error_rate<R: Real>(
    e_c_c: R,
    p_c_c: R,
    counts: &ProtocolCounts<R>,
    eps_sample: R,
) -> Result<(R, R)> {
    let delta_1 = sampling_deviation_g(SamplingBoundInputs {
        n: p_c_c * counts.m_u,
        k: p_c_c * counts.m_t,
        lambda: e_c_c,
        eps_bar: eps_sample,
    })?;
    Ok((e_c_c + delta_1, delta_1))
}

/// Robustness bound with the self-referential sample correction: the
/// corrected rate `E_B^c = e_B^c + g(..., eps')` where `eps'` is itself
/// the resulting tail bound. Resolved by fixed-point iteration.
pub fn robustness_prob<R: Real>(
    e_b_c: R,
    p_b_c: R,
    counts: &ProtocolCounts<R>,
    t_a: R,
) -> Result<R> {
    if t_a <= e_b_c {
        return Err(Error::infeasible(format!(
            "T_a = {t_a} does not exceed the channel error rate {e_b_c}"
        )));
    }
    let n = p_b_c * counts.m_u;
    let k = p_b_c * counts.m_t;
    let mut e_corr = e_b_c;
    let mut eps = R::zero();
    for _ in 0..50 {
        if t_a <= e_corr {
            return Err(Error::infeasible(format!(
                "corrected error rate {e_corr} reaches T_a = {t_a}"
            )));
        }
        let eps_new = tail_h(n, k, e_corr, t_a - e_corr)?.min(R::one() - R::of(1e-12));
        let e_next = if eps_new > R::zero() {
            e_b_c
                + sampling_deviation_g(SamplingBoundInputs {
                    n,
                    k,
                    lambda: e_b_c,
                    eps_bar: eps_new.max(R::of(1e-300)),
                })?
        } else {
            e_b_c
        };
        let done = (eps_new - eps).abs() <= R::of(1e-12) * eps_new.max(R::of(1e-300));
        eps = eps_new;
        e_corr = e_next;
        if done {
            return Ok(eps);
        }
    }
    Err(Error::Solver("robustness fixed point did not converge".to_string()))
}

/// Robustness bound without the sample correction: plain tail of Bob's
/// observed mismatch exceeding `T_a` given channel rate `e_B^c`.
pub fn robustness_prob_direct<R: Real>(
    e_b_c: R,
    p_b_c: R,
    counts: &ProtocolCounts<R>,
    t_a: R,
) -> Result<R> {
    if t_a <= e_b_c {
        return Err(Error::infeasible(format!(
            "T_a = {t_a} does not exceed the channel error rate {e_b_c}"
        )));
    }
    tail_h(p_b_c * counts.m_u, p_b_c * counts.m_t, e_b_c, t_a - e_b_c)
}

/// Total security level for a variant. The two-photon source spends both
/// sampling budgets; the decoy variants spend the repudiation sampling
/// budget plus their decoy failure terms.
pub fn compose_security<R: Real>(
    variant: ProtocolVariant,
    eps_forge: R,
    eps_repud: R,
    eps_sample_forge: R,
    eps_sample_repud: R,
    eps_decoy_total: R,
) -> R {
    match variant {
        ProtocolVariant::TwoPhoton => eps_forge + eps_repud + eps_sample_forge + eps_sample_repud,
        ProtocolVariant::Scheme1 | ProtocolVariant::Scheme2 => {
            eps_forge + eps_repud + eps_sample_repud + eps_decoy_total
        }
    }
}
