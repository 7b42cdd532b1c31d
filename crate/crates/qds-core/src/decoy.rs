//! Decoy-state estimation of the two-photon conclusive yield and QBER from
//! aggregate weak-coherent statistics, for both source schemes.

use crate::channel::{scheme1_gains, scheme2_gains, ChannelParams, StateFamily};
use crate::error::{Error, Result};
use crate::num::Real;

/// Scheme I decoy settings: one modulated pulse split between the arms,
/// four intensities `mu > nu > omega > 0` plus vacuum.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DecoyConfigScheme1<R> {
    pub mu: R,
    pub nu: R,
    pub omega: R,
    pub p_mu: R,
    pub p_nu: R,
    pub p_omega: R,
    pub p_vacuum: R,
}

impl<R: Real> DecoyConfigScheme1<R> {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > self.nu && self.nu > self.omega && self.omega > R::zero()) {
            return Err(Error::domain(format!(
                "intensities must satisfy mu > nu > omega > 0, got ({}, {}, {})",
                self.mu, self.nu, self.omega
            )));
        }
        check_probs(&[self.p_mu, self.p_nu, self.p_omega, self.p_vacuum])
    }
}

/// Scheme II decoy settings: independently modulated arms, signal set
/// `{mu1, mu1}` plus six decoy sets built from `mu1`, `nu1` and vacuum.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DecoyConfigScheme2<R> {
    pub mu1: R,
    pub nu1: R,
    /// Probability of `{mu1, mu1}` (the signal set).
    pub p_mu_mu: R,
    /// `{mu1, 0}`: signal intensity to Bob, vacuum to Charlie.
    pub p_mu_0: R,
    /// `{0, mu1}`.
    pub p_0_mu: R,
    pub p_nu_nu: R,
    pub p_nu_0: R,
    pub p_0_nu: R,
    pub p_0_0: R,
}

impl<R: Real> DecoyConfigScheme2<R> {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu1 > self.nu1 && self.nu1 > R::zero()) {
            return Err(Error::domain(format!(
                "intensities must satisfy mu1 > nu1 > 0, got ({}, {})",
                self.mu1, self.nu1
            )));
        }
        check_probs(&[
            self.p_mu_mu,
            self.p_mu_0,
            self.p_0_mu,
            self.p_nu_nu,
            self.p_nu_0,
            self.p_0_nu,
            self.p_0_0,
        ])
    }
}

fn check_probs<R: Real>(ps: &[R]) -> Result<()> {
    let mut sum = R::zero();
    for &p in ps {
        if p <= R::zero() || p >= R::one() {
            return Err(Error::domain(format!("selection probability {p} outside (0, 1)")));
        }
        sum = sum + p;
    }
    if (sum - R::one()).abs() > R::of(1e-9) {
        return Err(Error::domain(format!("selection probabilities sum to {sum}, expected 1")));
    }
    Ok(())
}

/// Observed statistics of one intensity (or intensity pair) setting, on
/// Charlie's side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityObservation<R> {
    /// Conclusive-result gain `Q_C^c`.
    pub gain: R,
    /// Conclusive-result QBER `e_C^c`.
    pub qber: R,
    /// Pulses sent with this setting (expected count; may be fractional).
    pub pulses: R,
}

impl<R: Real> IntensityObservation<R> {
    fn check(&self, name: &str) -> Result<()> {
        for (v, what) in [(self.gain, "gain"), (self.qber, "qber")] {
            if v < R::zero() || v > R::one() || !v.is_finite() {
                return Err(Error::domain(format!("{name} {what} = {v} outside [0, 1]")));
            }
        }
        if self.pulses < R::one() {
            return Err(Error::Degenerate(format!("{name}: pulse count {} < 1", self.pulses)));
        }
        Ok(())
    }
}

/// Scheme I observations for the four intensity settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedScheme1<R> {
    pub mu: IntensityObservation<R>,
    pub nu: IntensityObservation<R>,
    pub omega: IntensityObservation<R>,
    pub vacuum: IntensityObservation<R>,
}

/// Scheme II observations for the seven intensity sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedScheme2<R> {
    pub mu_mu: IntensityObservation<R>,
    pub mu_0: IntensityObservation<R>,
    pub zero_mu: IntensityObservation<R>,
    pub nu_nu: IntensityObservation<R>,
    pub nu_0: IntensityObservation<R>,
    pub zero_nu: IntensityObservation<R>,
    pub zero_zero: IntensityObservation<R>,
}

/// Result of a decoy estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhotonEstimate<R> {
    /// Lower bound on the two-photon conclusive yield.
    pub y_lower: R,
    /// Upper bound on the two-photon conclusive QBER, clamped to `[0, 1/2]`.
    pub e_upper: R,
    /// Lower bound on the two-photon conclusive gain in the signal setting.
    pub q_lower: R,
    /// Number of independently fluctuated observed quantities.
    pub failure_terms: u32,
    /// The QBER bound hit the `1/2` ceiling; unusable for forgery bounding.
    pub qber_saturated: bool,
    /// At least one setting had fewer than one expected conclusive event.
    pub degenerate_statistics: bool,
}

/// Statistical fluctuation interval of an observed gain after `n_alpha`
/// standard deviations: `Q (1 ± n_alpha / sqrt(N Q))`, lower clamped at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuatedGain<R> {
    pub upper: R,
    pub lower: R,
    /// Fewer than one expected event: the interval is vacuous.
    pub degenerate: bool,
}

pub fn fluctuate<R: Real>(q: R, n_pulses: R, n_alpha: R) -> Result<FluctuatedGain<R>> {
    if q < R::zero() || q > R::one() || !q.is_finite() {
        return Err(Error::domain(format!("gain {q} outside [0, 1]")));
    }
    if n_pulses < R::one() {
        return Err(Error::Degenerate(format!("pulse count {n_pulses} < 1")));
    }
    if n_alpha < R::zero() {
        return Err(Error::domain(format!("n_alpha = {n_alpha} must be >= 0")));
    }
    let events = n_pulses * q;
    if n_alpha == R::zero() || q == R::zero() {
        return Ok(FluctuatedGain { upper: q, lower: q, degenerate: events < R::one() });
    }
    let dev = n_alpha / events.sqrt();
    Ok(FluctuatedGain {
        upper: q * (R::one() + dev),
        lower: (q * (R::one() - dev)).max(R::zero()),
        degenerate: events < R::one(),
    })
}

struct Interval<R> {
    upper: R,
    lower: R,
    e_upper: R,
    e_lower: R,
    degenerate: bool,
}

/// Fluctuated intervals for a gain and its error-weighted gain `e Q`.
fn intervals<R: Real>(obs: &IntensityObservation<R>, n_alpha: R) -> Result<Interval<R>> {
    let f = fluctuate(obs.gain, obs.pulses, n_alpha)?;
    let fe = fluctuate(obs.qber * obs.gain, obs.pulses, n_alpha)?;
    Ok(Interval {
        upper: f.upper,
        lower: f.lower,
        e_upper: fe.upper,
        e_lower: fe.lower,
        degenerate: f.degenerate || fe.degenerate,
    })
}

fn finish_estimate<R: Real>(
    y_lower: R,
    e_upper: R,
    q_lower: R,
    failure_terms: u32,
    degenerate: bool,
) -> Result<TwoPhotonEstimate<R>> {
    if y_lower <= R::zero() || !y_lower.is_finite() {
        return Err(Error::EstimateInvalid(format!(
            "two-photon yield lower bound {y_lower} is not positive"
        )));
    }
    let half = R::half();
    let clamped = e_upper.max(R::zero()).min(half);
    Ok(TwoPhotonEstimate {
        y_lower,
        e_upper: clamped,
        q_lower,
        failure_terms,
        qber_saturated: e_upper > half,
        degenerate_statistics: degenerate,
    })
}

/// Lower-bound the two-photon yield and upper-bound its QBER for Scheme I.
///
/// Each observed quantity entering the closed-form bound is shifted by
/// `n_alpha` standard deviations in the direction that loosens the bound:
/// lower for positive coefficients in the yield expression, upper for
/// negative ones, and vice versa in the QBER expression. Seven observed
/// quantities are fluctuated in total (four gains, three error products).
pub fn estimate_two_photon_scheme1<R: Real>(
    obs: &ObservedScheme1<R>,
    cfg: &DecoyConfigScheme1<R>,
    n_alpha: R,
) -> Result<TwoPhotonEstimate<R>> {
    cfg.validate()?;
    obs.mu.check("mu")?;
    obs.nu.check("nu")?;
    obs.omega.check("omega")?;
    obs.vacuum.check("vacuum")?;
    let (mu, nu, om) = (cfg.mu, cfg.nu, cfg.omega);
    let i_mu = intervals(&obs.mu, n_alpha)?;
    let i_nu = intervals(&obs.nu, n_alpha)?;
    let i_om = intervals(&obs.omega, n_alpha)?;
    let i_0 = intervals(&obs.vacuum, n_alpha)?;
    let degenerate = i_mu.degenerate || i_nu.degenerate || i_om.degenerate || i_0.degenerate;

    let two = R::two();
    // The vacuum coefficient mu^3(nu-om) + nu^3(om-mu) + om^3(mu-nu)
    // factors as (mu-nu)(mu-om)(nu-om)(mu+nu+om) and is positive under the
    // intensity ordering.
    let c0 = mu.powi(3) * (nu - om) + nu.powi(3) * (om - mu) + om.powi(3) * (mu - nu);
    let y_lower = two / (mu * nu * om * (mu - nu) * (mu - om) * (nu - om))
        * (mu * om * (mu * mu - om * om) * nu.exp() * i_nu.lower
            - mu * nu * (mu * mu - nu * nu) * om.exp() * i_om.upper
            - nu * om * (nu * nu - om * om) * mu.exp() * i_mu.upper
            + c0 * i_0.lower);
    if y_lower <= R::zero() {
        return Err(Error::EstimateInvalid(format!(
            "two-photon yield lower bound {y_lower} is not positive"
        )));
    }
    let e_upper = two / (nu * om * (nu - om) * y_lower)
        * (om * nu.exp() * i_nu.e_upper - nu * om.exp() * i_om.e_lower + (nu - om) * i_0.e_upper);
    let q_lower = (-mu).exp() * mu * mu * R::half() * y_lower;
    finish_estimate(y_lower, e_upper, q_lower, 7, degenerate)
}

/// Lower-bound the `(1, 1)`-photon yield and upper-bound its QBER for
/// Scheme II, from the seven observed intensity sets. Eleven observed
/// quantities are fluctuated (seven gains, four error products).
pub fn estimate_two_photon_scheme2<R: Real>(
    obs: &ObservedScheme2<R>,
    cfg: &DecoyConfigScheme2<R>,
    n_alpha: R,
) -> Result<TwoPhotonEstimate<R>> {
    cfg.validate()?;
    obs.mu_mu.check("mu_mu")?;
    obs.mu_0.check("mu_0")?;
    obs.zero_mu.check("zero_mu")?;
    obs.nu_nu.check("nu_nu")?;
    obs.nu_0.check("nu_0")?;
    obs.zero_nu.check("zero_nu")?;
    obs.zero_zero.check("zero_zero")?;
    let (m1, n1) = (cfg.mu1, cfg.nu1);
    let i_mm = intervals(&obs.mu_mu, n_alpha)?;
    let i_m0 = intervals(&obs.mu_0, n_alpha)?;
    let i_0m = intervals(&obs.zero_mu, n_alpha)?;
    let i_nn = intervals(&obs.nu_nu, n_alpha)?;
    let i_n0 = intervals(&obs.nu_0, n_alpha)?;
    let i_0n = intervals(&obs.zero_nu, n_alpha)?;
    let i_00 = intervals(&obs.zero_zero, n_alpha)?;
    let degenerate = [&i_mm, &i_m0, &i_0m, &i_nn, &i_n0, &i_0n, &i_00]
        .iter()
        .any(|i| i.degenerate);

    let y_lower = R::one() / (m1 * m1 * n1 * n1 * (m1 - n1))
        * (m1.powi(3)
            * ((two_exp(n1)) * i_nn.lower - n1.exp() * i_n0.upper - n1.exp() * i_0n.upper)
            - n1.powi(3)
                * ((two_exp(m1)) * i_mm.upper - m1.exp() * i_m0.lower - m1.exp() * i_0m.lower)
            + (m1.powi(3) - n1.powi(3)) * i_00.lower);
    if y_lower <= R::zero() {
        return Err(Error::EstimateInvalid(format!(
            "two-photon yield lower bound {y_lower} is not positive"
        )));
    }
    let e_upper = R::one() / (n1 * n1 * y_lower)
        * (two_exp(n1) * i_nn.e_upper - n1.exp() * i_n0.e_lower - n1.exp() * i_0n.e_lower
            + i_00.e_upper);
    let q_lower = (-(R::two() * m1)).exp() * m1 * m1 * y_lower;
    finish_estimate(y_lower, e_upper, q_lower, 11, degenerate)
}

fn two_exp<R: Real>(x: R) -> R {
    (R::two() * x).exp()
}

/// Expected Scheme I observations from the analytic channel model with
/// `n_total` pulses split per the configured probabilities.
pub fn observe_scheme1<R: Real>(
    cfg: &DecoyConfigScheme1<R>,
    params: &ChannelParams<R>,
    family: StateFamily,
    n_total: R,
) -> Result<ObservedScheme1<R>> {
    cfg.validate()?;
    let one = |lambda: R, p: R| -> Result<IntensityObservation<R>> {
        let g = scheme1_gains(lambda, params, family)?;
        Ok(IntensityObservation { gain: g.q_c_c, qber: g.e_c_c, pulses: p * n_total })
    };
    Ok(ObservedScheme1 {
        mu: one(cfg.mu, cfg.p_mu)?,
        nu: one(cfg.nu, cfg.p_nu)?,
        omega: one(cfg.omega, cfg.p_omega)?,
        vacuum: one(R::zero(), cfg.p_vacuum)?,
    })
}

/// Expected Scheme II observations from the analytic channel model.
pub fn observe_scheme2<R: Real>(
    cfg: &DecoyConfigScheme2<R>,
    params: &ChannelParams<R>,
    family: StateFamily,
    n_total: R,
) -> Result<ObservedScheme2<R>> {
    cfg.validate()?;
    let one = |gamma: R, chi: R, p: R| -> Result<IntensityObservation<R>> {
        let g = scheme2_gains(gamma, chi, params, family)?;
        Ok(IntensityObservation { gain: g.q_c_c, qber: g.e_c_c, pulses: p * n_total })
    };
    let z = R::zero();
    Ok(ObservedScheme2 {
        mu_mu: one(cfg.mu1, cfg.mu1, cfg.p_mu_mu)?,
        mu_0: one(cfg.mu1, z, cfg.p_mu_0)?,
        zero_mu: one(z, cfg.mu1, cfg.p_0_mu)?,
        nu_nu: one(cfg.nu1, cfg.nu1, cfg.p_nu_nu)?,
        nu_0: one(cfg.nu1, z, cfg.p_nu_0)?,
        zero_nu: one(z, cfg.nu1, cfg.p_0_nu)?,
        zero_zero: one(z, z, cfg.p_0_0)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{photon_yields_scheme1, photon_yields_scheme2};

    fn fig2_scheme1() -> DecoyConfigScheme1<f64> {
        DecoyConfigScheme1 {
            mu: 0.34,
            nu: 0.16,
            omega: 0.01,
            p_mu: 0.55,
            p_nu: 0.25,
            p_omega: 0.18,
            p_vacuum: 0.02,
        }
    }

    fn fig2_scheme2() -> DecoyConfigScheme2<f64> {
        DecoyConfigScheme2 {
            mu1: 0.17,
            nu1: 0.08,
            p_mu_mu: 0.57,
            p_mu_0: 0.01,
            p_0_mu: 0.01,
            p_nu_nu: 0.30,
            p_nu_0: 0.05,
            p_0_nu: 0.05,
            p_0_0: 0.01,
        }
    }

    fn channel(total_km: f64, e_d: f64) -> ChannelParams<f64> {
        ChannelParams::symmetric(0.16, 0.93, 1e-7, e_d, total_km).unwrap()
    }

    #[test]
    fn fluctuate_anchors() {
        let f = fluctuate(0.01f64, 1e10, 0.0).unwrap();
        assert_eq!((f.upper, f.lower), (0.01, 0.01));
        let f = fluctuate(0.01f64, 1e10, 4.753).unwrap();
        assert!((f.upper - 0.010004753).abs() < 1e-15);
        assert!((f.lower - 0.009995247).abs() < 1e-15);
        assert!(!f.degenerate);
        // lower clamps at zero and the interval flags missing statistics
        let f = fluctuate(1e-12f64, 100.0, 4.753).unwrap();
        assert_eq!(f.lower, 0.0);
        assert!(f.degenerate);
        assert!(fluctuate(0.01f64, 0.5, 1.0).is_err());
    }

    #[test]
    fn scheme1_deterministic_matches_closed_form() {
        let obs = observe_scheme1(&fig2_scheme1(), &channel(100.0, 0.00505), StateFamily::SixState, 1e12)
            .unwrap();
        let est = estimate_two_photon_scheme1(&obs, &fig2_scheme1(), 0.0).unwrap();
        assert!((est.y_lower - 0.0017741551501830868).abs() < 1e-12);
        assert!((est.e_upper - 0.012059306189845643).abs() < 1e-12);
        assert_eq!(est.failure_terms, 7);
        let q = (-0.34f64).exp() * 0.34 * 0.34 / 2.0 * est.y_lower;
        assert!((est.q_lower - q).abs() < 1e-18);
    }

    #[test]
    fn scheme2_deterministic_matches_closed_form() {
        let obs = observe_scheme2(&fig2_scheme2(), &channel(100.0, 0.00505), StateFamily::SixState, 1e12)
            .unwrap();
        let est = estimate_two_photon_scheme2(&obs, &fig2_scheme2(), 0.0).unwrap();
        assert!((est.y_lower - 0.0035575112240119339).abs() < 1e-12);
        assert!((est.e_upper - 0.011923647986281269).abs() < 1e-12);
        assert_eq!(est.failure_terms, 11);
    }

    #[test]
    fn deterministic_bounds_bracket_truth() {
        let cfg1 = fig2_scheme1();
        let cfg2 = fig2_scheme2();
        for i in 0..=10 {
            let l = 20.0 * i as f64;
            let p = channel(l, 0.005);
            let y1 = photon_yields_scheme1(&p, StateFamily::SixState, 5).unwrap();
            let obs = observe_scheme1(&cfg1, &p, StateFamily::SixState, 1e12).unwrap();
            let est = estimate_two_photon_scheme1(&obs, &cfg1, 0.0).unwrap();
            assert!(est.y_lower <= y1[2].yield_c * (1.0 + 1e-12), "L = {l}");
            assert!(est.e_upper >= y1[2].qber_c * (1.0 - 1e-12), "L = {l}");

            let y2 = photon_yields_scheme2(&p, StateFamily::SixState, 5).unwrap();
            let obs = observe_scheme2(&cfg2, &p, StateFamily::SixState, 1e12).unwrap();
            let est = estimate_two_photon_scheme2(&obs, &cfg2, 0.0).unwrap();
            assert!(est.y_lower <= y2[1][1].yield_c * (1.0 + 1e-12), "L = {l}");
            assert!(est.e_upper >= y2[1][1].qber_c * (1.0 - 1e-12), "L = {l}");
        }
    }

    #[test]
    fn worst_case_is_looser_and_tightens_with_statistics() {
        let cfg = fig2_scheme1();
        let p = channel(100.0, 0.005);
        let mut prev_y = 0.0f64;
        let mut prev_e = f64::INFINITY;
        for &n in &[1e11f64, 1e12, 1e13, 1e14] {
            let obs = observe_scheme1(&cfg, &p, StateFamily::SixState, n).unwrap();
            let det = estimate_two_photon_scheme1(&obs, &cfg, 0.0).unwrap();
            let wc = estimate_two_photon_scheme1(&obs, &cfg, 4.753).unwrap();
            assert!(wc.y_lower <= det.y_lower);
            assert!(wc.e_upper >= det.e_upper);
            assert!(wc.y_lower >= prev_y, "N = {n}");
            assert!(wc.e_upper <= prev_e, "N = {n}");
            prev_y = wc.y_lower;
            prev_e = wc.e_upper;
        }
    }

    #[test]
    fn degenerate_intensities_rejected() {
        let mut cfg = fig2_scheme1();
        cfg.nu = cfg.omega;
        let obs = observe_scheme1(&fig2_scheme1(), &channel(100.0, 0.005), StateFamily::SixState, 1e12)
            .unwrap();
        assert!(matches!(estimate_two_photon_scheme1(&obs, &cfg, 0.0), Err(Error::Domain(_))));
        let mut cfg2 = fig2_scheme2();
        cfg2.nu1 = cfg2.mu1;
        let obs2 = observe_scheme2(&fig2_scheme2(), &channel(100.0, 0.005), StateFamily::SixState, 1e12)
            .unwrap();
        assert!(estimate_two_photon_scheme2(&obs2, &cfg2, 0.0).is_err());
    }

    #[test]
    fn zero_gains_rejected() {
        let dead = IntensityObservation { gain: 0.0, qber: 0.0, pulses: 1e9 };
        let obs = ObservedScheme2 {
            mu_mu: dead,
            mu_0: dead,
            zero_mu: dead,
            nu_nu: dead,
            nu_0: dead,
            zero_nu: dead,
            zero_zero: dead,
        };
        assert!(matches!(
            estimate_two_photon_scheme2(&obs, &fig2_scheme2(), 0.0),
            Err(Error::EstimateInvalid(_))
        ));
    }

    #[test]
    fn bad_probabilities_rejected() {
        let mut cfg = fig2_scheme1();
        cfg.p_mu = 0.9;
        assert!(cfg.validate().is_err());
        let mut cfg = fig2_scheme2();
        cfg.p_0_0 = -0.01;
        assert!(cfg.validate().is_err());
    }
}
