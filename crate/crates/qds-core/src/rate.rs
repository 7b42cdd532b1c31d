//! Deterministic security pipeline on expected-value statistics, minimal
//! pulse-count search and signature-rate curves.

use crate::channel::{scheme1_gains, scheme2_gains, two_photon_gains, ChannelParams, StateFamily};
use crate::decoy::{
    estimate_two_photon_scheme1, estimate_two_photon_scheme2, observe_scheme1, observe_scheme2,
    DecoyConfigScheme1, DecoyConfigScheme2,
};
use crate::entropy::{gaussian_tail, min_forgery_mismatch_sc, EncodingVariant};
use crate::error::{Error, Result};
use crate::security::{
    compose_security, delta_gap, forgery_error_rate, forgery_prob, repudiation_prob,
    repudiation_solve_a, robustness_prob_direct, ProtocolCounts, ProtocolVariant, SecurityReport,
    Thresholds,
};
use rayon::prelude::*;

/// Security and robustness budgets plus the source clock.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RateTarget {
    pub eps_sec_max: f64,
    pub eps_rob_max: f64,
    /// Pulse pairs per second.
    pub clock_hz: f64,
}

impl RateTarget {
    pub fn validate(&self) -> Result<()> {
        for b in [self.eps_sec_max, self.eps_rob_max] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::domain(format!("budget {b} outside (0, 1)")));
            }
        }
        if self.clock_hz <= 0.0 {
            return Err(Error::domain(format!("clock rate {} must be positive", self.clock_hz)));
        }
        Ok(())
    }
}

/// Everything the deterministic pipeline needs besides the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub variant: ProtocolVariant,
    pub family: StateFamily,
    pub thresholds: Thresholds<f64>,
    /// Test fraction beta.
    pub beta: f64,
    /// Sampling failure budget of the forgery error-rate estimate.
    pub eps_sample_forge: f64,
    /// Sampling failure budget of the distance estimate.
    pub eps_sample_repud: f64,
    /// Deviation count for decoy gain fluctuations.
    pub n_alpha: f64,
    pub decoy1: Option<DecoyConfigScheme1<f64>>,
    pub decoy2: Option<DecoyConfigScheme2<f64>>,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::domain(format!("test fraction {} outside (0, 1)", self.beta)));
        }
        for e in [self.eps_sample_forge, self.eps_sample_repud] {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::domain(format!("sampling budget {e} outside (0, 1)")));
            }
        }
        match self.variant {
            ProtocolVariant::TwoPhoton => {}
            ProtocolVariant::Scheme1 => {
                self.decoy1
                    .ok_or_else(|| Error::Config("missing decoy intensities".to_string()))?
                    .validate()?;
            }
            ProtocolVariant::Scheme2 => {
                self.decoy2
                    .ok_or_else(|| Error::Config("missing decoy intensities".to_string()))?
                    .validate()?;
            }
        }
        Ok(())
    }

    fn encoding(&self) -> EncodingVariant {
        match self.family {
            StateFamily::SixState => EncodingVariant::SixStateTwoPhoton,
            StateFamily::FourState => EncodingVariant::FourStateTwoPhoton,
        }
    }
}

/// One point of a rate curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub l_km: f64,
    /// Minimal pulse count per possible message (expected-value search).
    pub n_min: f64,
    /// Signatures per pulse pair, `1 / (2 N)`.
    pub r: f64,
    /// Signatures per second at the configured clock.
    pub bps: f64,
    pub feasible: bool,
    pub report: Option<SecurityReport<f64>>,
}

struct SignalStats {
    /// Gain of the signal setting (coincidence probability per signal pulse).
    q_signal: f64,
    /// Probability of the signal setting.
    p_signal: f64,
    p_b_c: f64,
    p_c_c: f64,
    e_b_c: f64,
    e_c_c: f64,
    q_c_c: f64,
}

/// Full deterministic evaluation of every bound at pulse count `n`.
pub fn evaluate_at_n(
    cfg: &PipelineConfig,
    channel: &ChannelParams<f64>,
    n: f64,
) -> Result<SecurityReport<f64>> {
    cfg.validate()?;
    if n < 1.0 || !n.is_finite() {
        return Err(Error::domain(format!("pulse count {n} must be >= 1")));
    }

    // signal-setting statistics and, for the decoy variants, the
    // two-photon estimate
    let (stats, two_photon, eps_decoy) = match cfg.variant {
        ProtocolVariant::TwoPhoton => {
            let g = two_photon_gains(channel, cfg.family);
            let s = SignalStats {
                q_signal: g.q,
                p_signal: 1.0,
                p_b_c: g.p_b_c,
                p_c_c: g.p_c_c,
                e_b_c: g.e_b_c,
                e_c_c: g.e_c_c,
                q_c_c: g.q_c_c,
            };
            (s, None, 0.0)
        }
        ProtocolVariant::Scheme1 => {
            let dc = cfg.decoy1.unwrap();
            let g = scheme1_gains(dc.mu, channel, cfg.family)?;
            let obs = observe_scheme1(&dc, channel, cfg.family, n)?;
            let est = estimate_two_photon_scheme1(&obs, &dc, cfg.n_alpha)?;
            let s = SignalStats {
                q_signal: g.q,
                p_signal: dc.p_mu,
                p_b_c: g.p_b_c,
                p_c_c: g.p_c_c,
                e_b_c: g.e_b_c,
                e_c_c: g.e_c_c,
                q_c_c: g.q_c_c,
            };
            (s, Some(est), 7.0 * gaussian_tail(cfg.n_alpha)?)
        }
        ProtocolVariant::Scheme2 => {
            let dc = cfg.decoy2.unwrap();
            let g = scheme2_gains(dc.mu1, dc.mu1, channel, cfg.family)?;
            let obs = observe_scheme2(&dc, channel, cfg.family, n)?;
            let est = estimate_two_photon_scheme2(&obs, &dc, cfg.n_alpha)?;
            let s = SignalStats {
                q_signal: g.q,
                p_signal: dc.p_mu_mu,
                p_b_c: g.p_b_c,
                p_c_c: g.p_c_c,
                e_b_c: g.e_b_c,
                e_c_c: g.e_c_c,
                q_c_c: g.q_c_c,
            };
            (s, Some(est), 11.0 * gaussian_tail(cfg.n_alpha)?)
        }
    };

    let counts = ProtocolCounts::from_kept(stats.q_signal * stats.p_signal * n, cfg.beta)?;
    let th = cfg.thresholds;

    // forgery side
    let (s_c, t_eff, n_conclusive, delta_1) = match &two_photon {
        None => {
            let (e_b, d1) =
                forgery_error_rate(stats.e_c_c, stats.p_c_c, &counts, cfg.eps_sample_forge)?;
            let s_c = min_forgery_mismatch_sc(e_b, cfg.encoding())?;
            (s_c, th.t_v, stats.p_c_c * counts.m_u, d1)
        }
        Some(est) => {
            if est.qber_saturated {
                return Err(Error::infeasible(
                    "two-photon QBER bound reached 1/2".to_string(),
                ));
            }
            let s_c = min_forgery_mismatch_sc(est.e_upper, cfg.encoding())?;
            let t_eff = th.t_v * stats.q_c_c / est.q_lower;
            let n_conc = est.q_lower / stats.q_c_c * stats.p_c_c * counts.m_u;
            (s_c, t_eff, n_conc, 0.0)
        }
    };
    let eps_forge = forgery_prob(s_c, t_eff, n_conclusive)?;

    // repudiation side
    let (delta, delta_2) = delta_gap(
        stats.e_b_c,
        stats.e_c_c,
        stats.p_b_c,
        stats.p_c_c,
        &counts,
        cfg.eps_sample_repud,
    )?;
    let a_root = repudiation_solve_a(stats.p_b_c, stats.p_c_c, &th, delta)?;
    let eps_repud = repudiation_prob(a_root, stats.p_b_c, th.t_a, counts.m_u)?;

    let eps_rob = robustness_prob_direct(stats.e_b_c, stats.p_b_c, &counts, th.t_a)?;

    let eps_sec = compose_security(
        cfg.variant,
        eps_forge,
        eps_repud,
        cfg.eps_sample_forge,
        cfg.eps_sample_repud,
        eps_decoy,
    );
    Ok(SecurityReport {
        eps_forge,
        eps_repud,
        eps_sample_forge: cfg.eps_sample_forge,
        eps_sample_repud: cfg.eps_sample_repud,
        eps_decoy,
        eps_sec,
        eps_rob,
        a_root,
        s_c,
        delta,
        delta_1,
        delta_2,
    })
}

const N_CEILING: f64 = 1e16;

fn meets(cfg: &PipelineConfig, channel: &ChannelParams<f64>, target: &RateTarget, n: f64) -> bool {
    match evaluate_at_n(cfg, channel, n) {
        Ok(r) => r.eps_sec <= target.eps_sec_max && r.eps_rob <= target.eps_rob_max,
        Err(_) => false,
    }
}

/// Smallest pulse count meeting both budgets: exponential doubling to
/// bracket, then bisection. All bounds decrease in `n`, so the search is
/// sound.
pub fn min_n(
    cfg: &PipelineConfig,
    channel: &ChannelParams<f64>,
    target: &RateTarget,
) -> Result<RatePoint> {
    cfg.validate()?;
    target.validate()?;
    let mut n = 1e3;
    while !meets(cfg, channel, target, n) {
        n *= 2.0;
        if n > N_CEILING {
            return Err(Error::infeasible(format!(
                "no pulse count up to {N_CEILING:e} meets the budgets"
            )));
        }
    }
    let mut lo = n / 2.0;
    let mut hi = n;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if meets(cfg, channel, target, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let report = evaluate_at_n(cfg, channel, hi)?;
    let l_km = channel.l_ab + channel.l_ac;
    Ok(RatePoint {
        l_km,
        n_min: hi,
        r: 1.0 / (2.0 * hi),
        bps: target.clock_hz / (2.0 * hi),
        feasible: true,
        report: Some(report),
    })
}

/// Rate curve over total distances `l_min..=l_max` in `step` increments.
/// Infeasible distances are flagged, not fatal.
pub fn sweep(
    cfg: &PipelineConfig,
    base: &ChannelParams<f64>,
    target: &RateTarget,
    l_min: f64,
    l_max: f64,
    step: f64,
) -> Result<Vec<RatePoint>> {
    if step <= 0.0 || l_min > l_max || l_min < 0.0 {
        return Err(Error::domain(format!(
            "invalid sweep range [{l_min}, {l_max}] step {step}"
        )));
    }
    cfg.validate()?;
    target.validate()?;
    let mut distances = Vec::new();
    let mut l = l_min;
    while l <= l_max + 1e-9 {
        distances.push(l);
        l += step;
    }
    Ok(distances
        .into_par_iter()
        .map(|l_km| {
            let channel = ChannelParams::symmetric(base.alpha, base.eta_d, base.p_d, base.e_d, l_km)
                .expect("validated base parameters");
            match min_n(cfg, &channel, target) {
                Ok(p) => p,
                Err(_) => RatePoint {
                    l_km,
                    n_min: 0.0,
                    r: 0.0,
                    bps: 0.0,
                    feasible: false,
                    report: None,
                },
            }
        })
        .collect())
}
