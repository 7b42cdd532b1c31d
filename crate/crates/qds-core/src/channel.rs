//! Analytic fiber and threshold-detector model: transmittances, dark-count
//! yields, coincidence gains and conclusive-result QBERs for the two-photon
//! source and for both weak-coherent schemes.

use crate::error::{Error, Result};
use crate::num::Real;

/// Six-state or four-state signal encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum StateFamily {
    SixState,
    FourState,
}

impl StateFamily {
    /// Probability `z` that a uniformly chosen measurement basis can give a
    /// conclusive result for a uniformly chosen state set.
    pub fn z<R: Real>(self) -> R {
        match self {
            StateFamily::SixState => R::one() / R::of(3.0),
            StateFamily::FourState => R::half(),
        }
    }

    pub fn set_count(self) -> usize {
        match self {
            StateFamily::SixState => 12,
            StateFamily::FourState => 4,
        }
    }
}

/// Fiber and detector parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChannelParams<R> {
    /// Fiber loss coefficient in dB/km.
    pub alpha: R,
    /// Detector efficiency.
    pub eta_d: R,
    /// Dark count probability per gate.
    pub p_d: R,
    /// Misalignment error probability.
    pub e_d: R,
    /// Alice-to-Bob fiber length in km.
    pub l_ab: R,
    /// Alice-to-Charlie fiber length in km.
    pub l_ac: R,
}

impl<R: Real> ChannelParams<R> {
    /// Symmetric topology: each arm is half the total distance.
    pub fn symmetric(alpha: R, eta_d: R, p_d: R, e_d: R, total_km: R) -> Result<Self> {
        let arm = total_km * R::half();
        Self::new(alpha, eta_d, p_d, e_d, arm, arm)
    }

    pub fn new(alpha: R, eta_d: R, p_d: R, e_d: R, l_ab: R, l_ac: R) -> Result<Self> {
        let unit = |x: R, name: &str| -> Result<()> {
            if x < R::zero() || x > R::one() || !x.is_finite() {
                return Err(Error::domain(format!("{name} = {x} outside [0, 1]")));
            }
            Ok(())
        };
        if alpha < R::zero() || !alpha.is_finite() {
            return Err(Error::domain(format!("alpha = {alpha} must be >= 0")));
        }
        unit(eta_d, "eta_d")?;
        unit(p_d, "p_d")?;
        unit(e_d, "e_d")?;
        if l_ab < R::zero() || l_ac < R::zero() {
            return Err(Error::domain("fiber lengths must be >= 0".to_string()));
        }
        Ok(Self { alpha, eta_d, p_d, e_d, l_ab, l_ac })
    }

    pub fn eta_b(&self) -> R {
        transmittance(self.l_ab, self.alpha, self.eta_d)
    }

    pub fn eta_c(&self) -> R {
        transmittance(self.l_ac, self.alpha, self.eta_d)
    }

    pub fn dark_yield(&self) -> R {
        dark_yield_y0(self.p_d)
    }
}

/// End-to-end transmittance of one arm: detector efficiency times fiber
/// transmission `10^(-alpha L / 10)`.
pub fn transmittance<R: Real>(l_km: R, alpha: R, eta_d: R) -> R {
    eta_d * R::of(10.0).powf(-alpha * l_km / R::of(10.0))
}

/// Background yield `Y_0 = 2 p_d (1 - p_d)` of a gated two-detector
/// receiver with active basis selection.
pub fn dark_yield_y0<R: Real>(p_d: R) -> R {
    R::two() * p_d * (R::one() - p_d)
}

/// Coincidence gain and conclusive-result statistics of one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainTable<R> {
    /// Overall coincidence gain (both sides click).
    pub q: R,
    /// Conclusive-result gains.
    pub q_b_c: R,
    pub q_c_c: R,
    /// Conclusive-result QBERs.
    pub e_b_c: R,
    pub e_c_c: R,
    /// Conclusive probabilities `Q^c / Q`.
    pub p_b_c: R,
    pub p_c_c: R,
    /// Set when a conclusive gain vanished and its QBER was reported as 0.
    pub degenerate: bool,
}

fn ratio_or_zero<R: Real>(num: R, den: R, degenerate: &mut bool) -> R {
    if den <= R::zero() {
        *degenerate = true;
        R::zero()
    } else {
        num / den
    }
}

fn assemble<R: Real>(q: R, q_b_c: R, eq_b_c: R, q_c_c: R, eq_c_c: R) -> GainTable<R> {
    let mut degenerate = false;
    let e_b_c = ratio_or_zero(eq_b_c, q_b_c, &mut degenerate);
    let e_c_c = ratio_or_zero(eq_c_c, q_c_c, &mut degenerate);
    let p_b_c = ratio_or_zero(q_b_c, q, &mut degenerate);
    let p_c_c = ratio_or_zero(q_c_c, q, &mut degenerate);
    GainTable { q, q_b_c, q_c_c, e_b_c, e_c_c, p_b_c, p_c_c, degenerate }
}

/// One receiver arm of the two-photon source: click probability factor,
/// conclusive gain factor and error-weighted factor.
fn two_photon_arm<R: Real>(eta: R, y0: R, e_d: R, z: R) -> (R, R, R) {
    let one = R::one();
    let click = one - (one - y0) * (one - eta);
    let conclusive = z * ((one - eta) * y0 + (R::half() + e_d) * eta);
    let errored = z * (R::half() * (one - eta) * y0 + e_d * eta);
    (click, conclusive, errored)
}

/// Gains for the entangled-pair source: one photon per arm.
pub fn two_photon_gains<R: Real>(params: &ChannelParams<R>, family: StateFamily) -> GainTable<R> {
    let y0 = params.dark_yield();
    let z = family.z();
    let (click_b, con_b, err_b) = two_photon_arm(params.eta_b(), y0, params.e_d, z);
    let (click_c, con_c, err_c) = two_photon_arm(params.eta_c(), y0, params.e_d, z);
    assemble(click_b * click_c, con_b * click_c, err_b * click_c, con_c * click_b, err_c * click_b)
}

/// One weak-coherent arm with mean photon number `m` reaching a detector of
/// transmittance `eta`.
fn coherent_arm<R: Real>(m: R, eta: R, y0: R, e_d: R, z: R) -> (R, R, R) {
    let one = R::one();
    let f = (-m * eta).exp();
    let click = one - (one - y0) * f;
    let conclusive = z * (y0 * f + (R::half() + e_d) * (one - f));
    let errored = z * (R::half() * y0 * f + e_d * (one - f));
    (click, conclusive, errored)
}

/// Gains for Scheme I: a single coherent pulse of intensity `lambda` split
/// 50:50, so each arm sees mean photon number `lambda / 2`.
pub fn scheme1_gains<R: Real>(
    lambda: R,
    params: &ChannelParams<R>,
    family: StateFamily,
) -> Result<GainTable<R>> {
    if lambda < R::zero() || !lambda.is_finite() {
        return Err(Error::domain(format!("lambda = {lambda} must be >= 0")));
    }
    let y0 = params.dark_yield();
    let z = family.z();
    let half = lambda * R::half();
    let (click_b, con_b, err_b) = coherent_arm(half, params.eta_b(), y0, params.e_d, z);
    let (click_c, con_c, err_c) = coherent_arm(half, params.eta_c(), y0, params.e_d, z);
    Ok(assemble(
        click_b * click_c,
        con_b * click_c,
        err_b * click_c,
        con_c * click_b,
        err_c * click_b,
    ))
}

/// Gains for Scheme II: independently modulated pulses, intensity `gamma`
/// toward Bob and `chi` toward Charlie, full intensity per arm.
pub fn scheme2_gains<R: Real>(
    gamma: R,
    chi: R,
    params: &ChannelParams<R>,
    family: StateFamily,
) -> Result<GainTable<R>> {
    if gamma < R::zero() || chi < R::zero() || !gamma.is_finite() || !chi.is_finite() {
        return Err(Error::domain(format!("intensities ({gamma}, {chi}) must be >= 0")));
    }
    let y0 = params.dark_yield();
    let z = family.z();
    let (click_b, con_b, err_b) = coherent_arm(gamma, params.eta_b(), y0, params.e_d, z);
    let (click_c, con_c, err_c) = coherent_arm(chi, params.eta_c(), y0, params.e_d, z);
    Ok(assemble(
        click_b * click_c,
        con_b * click_c,
        err_b * click_c,
        con_c * click_b,
        err_c * click_b,
    ))
}

/// Yield and QBER of Charlie's conclusive results conditioned on photon
/// number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonYield<R> {
    pub yield_c: R,
    pub qber_c: R,
}

/// Per-photon-number conclusive yields for Scheme I on Charlie's side,
/// indices `0..=n_max`.
///
/// Poisson-averaging these with weight `e^(-lambda) lambda^n / n!`
/// reproduces `scheme1_gains(lambda).q_c_c` for any intensity; the yields
/// themselves are intensity-independent.
pub fn photon_yields_scheme1<R: Real>(
    params: &ChannelParams<R>,
    family: StateFamily,
    n_max: usize,
) -> Result<Vec<PhotonYield<R>>> {
    if n_max < 2 {
        return Err(Error::domain(format!("n_max = {n_max} must be >= 2")));
    }
    let y0 = params.dark_yield();
    let z: R = family.z();
    let e_d = params.e_d;
    let one = R::one();
    let c1 = R::half() + e_d;
    // Beam-splitter binomial over the two arms collapses to three geometric
    // factors in (1 - eta/2) per arm and their product.
    let fb = one - params.eta_b() * R::half();
    let fc = one - params.eta_c() * R::half();
    let fbc = one - params.eta_b() * R::half() - params.eta_c() * R::half();
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let pb = fb.powi(n as i32);
        let pc = fc.powi(n as i32);
        let pbc = fbc.powi(n as i32);
        let y = z * (c1 - c1 * (one - y0) * pb + (y0 - c1) * pc - (y0 - c1) * (one - y0) * pbc);
        let ey = z
            * (e_d - e_d * (one - y0) * pb + (y0 * R::half() - e_d) * pc
                - (y0 * R::half() - e_d) * (one - y0) * pbc);
        let qber = if y > R::zero() { ey / y } else { R::zero() };
        out.push(PhotonYield { yield_c: y, qber_c: qber });
    }
    Ok(out)
}

/// Per-photon-pair-number conclusive yields for Scheme II on Charlie's
/// side: `out[n][m]` has `n` photons in Bob's pulse and `m` in Charlie's.
pub fn photon_yields_scheme2<R: Real>(
    params: &ChannelParams<R>,
    family: StateFamily,
    n_max: usize,
) -> Result<Vec<Vec<PhotonYield<R>>>> {
    if n_max < 2 {
        return Err(Error::domain(format!("n_max = {n_max} must be >= 2")));
    }
    let y0 = params.dark_yield();
    let z: R = family.z();
    let e_d = params.e_d;
    let one = R::one();
    let c1 = R::half() + e_d;
    let fb = one - params.eta_b();
    let fc = one - params.eta_c();
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let click_b = one - (one - y0) * fb.powi(n as i32);
        let mut row = Vec::with_capacity(n_max + 1);
        for m in 0..=n_max {
            let pc = fc.powi(m as i32);
            let y = z * (y0 * pc + c1 * (one - pc)) * click_b;
            let ey = z * (y0 * R::half() * pc + e_d * (one - pc)) * click_b;
            let qber = if y > R::zero() { ey / y } else { R::zero() };
            row.push(PhotonYield { yield_c: y, qber_c: qber });
        }
        out.push(row);
    }
    Ok(out)
}
