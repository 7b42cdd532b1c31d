//! Entropies, phase/bit error-rate relations, sampling deviations and tail
//! bounds.
//!
//! Everything here is a pure function of its arguments. Probabilities within
//! `-1e-12` of zero are clamped to zero before any logarithm is taken; the
//! `0 * log2(0) = 0` convention applies throughout.

use crate::error::{Error, Result};
use crate::num::Real;

const NEG_TOL: f64 = 1e-12;

/// Error-rate triple of a two-copy SARG04-style encoding.
///
/// `a` is the probability that bit and phase error occur together; it carries
/// the mutual information between the two error types.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRates<R> {
    /// Bit error rate, in `[0, 1/2]`.
    pub e_b: R,
    /// Phase error rate, in `[0, 1/2]`.
    pub e_p: R,
    /// Joint bit-and-phase error probability, in `[0, min(e_b, e_p)]`.
    pub a: R,
}

impl<R: Real> ErrorRates<R> {
    pub fn new(e_b: R, e_p: R, a: R) -> Result<Self> {
        let half = R::half();
        if !(e_b >= R::zero() && e_b <= half) || !e_b.is_finite() {
            return Err(Error::domain(format!("e_b = {e_b} outside [0, 1/2]")));
        }
        // The closed-form relations can push e_p past 1/2 for bit error
        // rates far beyond the operating regime; cap at the entropy maximum.
        let e_p = e_p.min(half).max(R::zero());
        let a = a.min(e_b).min(e_p).max(R::zero());
        if !e_p.is_finite() || !a.is_finite() {
            return Err(Error::domain("non-finite error rates".to_string()));
        }
        Ok(Self { e_b, e_p, a })
    }
}

/// Quantum-state encoding used for the forgery analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum EncodingVariant {
    SixStateTwoPhoton,
    FourStateTwoPhoton,
    SixStateSinglePhoton,
}

/// Inputs for the random-sampling-without-replacement deviation bound.
#[derive(Debug, Clone, Copy)]
pub struct SamplingBoundInputs<R> {
    /// Untested-population size (may be a real expected count).
    pub n: R,
    /// Test-sample size.
    pub k: R,
    /// Observed rate, in `(0, 1)`.
    pub lambda: R,
    /// Failure probability budget.
    pub eps_bar: R,
}

fn check_prob<R: Real>(x: R, name: &str) -> Result<R> {
    if x < R::of(-NEG_TOL) || x > R::one() + R::of(NEG_TOL) || !x.is_finite() {
        return Err(Error::domain(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(x.max(R::zero()).min(R::one()))
}

/// Binary Shannon entropy `H(x) = -x log2 x - (1-x) log2 (1-x)`.
pub fn binary_entropy<R: Real>(x: R) -> Result<R> {
    let x = check_prob(x, "x")?;
    let mut h = R::zero();
    if x > R::zero() {
        h = h - x * x.log2();
    }
    if x < R::one() {
        let y = R::one() - x;
        h = h - y * y.log2();
    }
    Ok(h)
}

/// Unique `x` in `[0, 1/2]` with `H(x) = y`, by bisection.
pub fn inverse_binary_entropy<R: Real>(y: R) -> Result<R> {
    let y = check_prob(y, "y")?;
    if y == R::zero() {
        return Ok(R::zero());
    }
    if y == R::one() {
        return Ok(R::half());
    }
    // H is strictly increasing on [0, 1/2].
    let mut lo = R::zero();
    let mut hi = R::half();
    for _ in 0..200 {
        let mid = (lo + hi) * R::half();
        if mid <= lo || mid >= hi {
            break; // interval narrowed to one ulp
        }
        if binary_entropy(mid)? < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * R::half())
}

/// Objective of the four-state phase-error minimization at mixing weight `x`.
fn four_state_objective<R: Real>(x: R, e_b: R) -> R {
    let six = R::of(6.0);
    let rad = six - six * R::of(std::f64::consts::SQRT_2) * x + R::of(4.0) * x * x;
    x * e_b + (R::of(3.0) - R::two() * x + rad.sqrt()) / six
}

/// Golden-section minimum of the four-state objective over `x ∈ [-10, 10]`.
fn four_state_minimum<R: Real>(e_b: R) -> Result<R> {
    let golden = R::of((5f64.sqrt() - 1.0) / 2.0);
    let mut a = R::of(-10.0);
    let mut b = R::of(10.0);
    let mut c = b - golden * (b - a);
    let mut d = a + golden * (b - a);
    let tol = R::of(1e-10);
    let mut iters = 0;
    while b - a > tol {
        if four_state_objective(c, e_b) < four_state_objective(d, e_b) {
            b = d;
        } else {
            a = c;
        }
        c = b - golden * (b - a);
        d = a + golden * (b - a);
        iters += 1;
        if iters > 500 {
            return Err(Error::Solver("four-state minimization did not converge".into()));
        }
    }
    Ok(four_state_objective((a + b) * R::half(), e_b))
}

/// Phase error rate (and joint error probability) implied by a bit error
/// rate under the given encoding.
pub fn phase_error_relation<R: Real>(e_b: R, variant: EncodingVariant) -> Result<ErrorRates<R>> {
    let half = R::half();
    if e_b < R::zero() || e_b > half || !e_b.is_finite() {
        return Err(Error::domain(format!("e_b = {e_b} outside [0, 1/2]")));
    }
    let sqrt2 = R::of(std::f64::consts::SQRT_2);
    match variant {
        EncodingVariant::SixStateTwoPhoton => {
            let e_p = (R::two() - sqrt2) / R::of(4.0) + R::of(3.0) / (R::two() * sqrt2) * e_b;
            let a = (R::of(4.0) + sqrt2) / R::of(8.0) * e_b;
            ErrorRates::new(e_b, e_p, a)
        }
        EncodingVariant::FourStateTwoPhoton => {
            let e_p = four_state_minimum(e_b)?;
            // No mutual information between bit and phase errors.
            let a = e_b * e_p;
            ErrorRates::new(e_b, e_p, a)
        }
        EncodingVariant::SixStateSinglePhoton => {
            let e_p = R::of(1.5) * e_b;
            let a = R::of(0.75) * e_b;
            ErrorRates::new(e_b, e_p, a)
        }
    }
}

/// One `p * log2(p / q)` contribution with boundary clamping.
fn ibc_term<R: Real>(p: R, q: R) -> Result<R> {
    if p < R::of(-NEG_TOL) {
        return Err(Error::domain(format!("negative log argument {p}")));
    }
    if p <= R::zero() {
        return Ok(R::zero());
    }
    if q <= R::zero() {
        return Err(Error::domain(format!("p = {p} > 0 with zero denominator")));
    }
    Ok(-(p * (p / q).log2()))
}

/// Conditional Shannon entropy `H(e_p | e_b)`: the adversary's information
/// about the verifier's conclusive bits.
pub fn conditional_entropy_ibc<R: Real>(rates: ErrorRates<R>) -> Result<R> {
    let ErrorRates { e_b, e_p, a } = rates;
    let one = R::one();
    Ok(ibc_term(one + a - e_b - e_p, one - e_b)?
        + ibc_term(e_p - a, one - e_b)?
        + ibc_term(e_b - a, e_b)?
        + ibc_term(a, e_b)?)
}

/// Minimum mismatch rate an optimal collective forger can reach against the
/// verifier's conclusive bits, from `H(S_c) = 1 - I_BC` at equality.
pub fn min_forgery_mismatch_sc<R: Real>(e_b: R, variant: EncodingVariant) -> Result<R> {
    let rates = phase_error_relation(e_b, variant)?;
    let ibc = conditional_entropy_ibc(rates)?;
    inverse_binary_entropy((R::one() - ibc).max(R::zero()))
}

/// Correction factor `C(n, k, λ)` shared by the sampling bounds.
fn correction_c<R: Real>(n: R, k: R, lambda: R) -> R {
    let one = R::one();
    let twelve = R::of(12.0);
    (one / (R::of(8.0) * (n + k)) + one / (twelve * k)
        - one / (twelve * k * lambda + one)
        - one / (twelve * k * (one - lambda) + one))
        .exp()
}

fn check_sampling_inputs<R: Real>(n: R, k: R, lambda: R) -> Result<()> {
    if n < R::one() || k < R::one() || !n.is_finite() || !k.is_finite() {
        return Err(Error::domain(format!("sample sizes n = {n}, k = {k} must be >= 1")));
    }
    if lambda < R::zero() || lambda > R::one() || !lambda.is_finite() {
        return Err(Error::domain(format!("lambda = {lambda} outside [0, 1]")));
    }
    Ok(())
}

/// Deviation bound `g(n, k, λ, ε̄)` of the random sampling without
/// replacement theorem. Clamps to 0 when the logarithm argument drops
/// below 1 (huge ε̄), and at the λ ∈ {0, 1} boundaries where the
/// hypergeometric variance vanishes.
pub fn sampling_deviation_g<R: Real>(inputs: SamplingBoundInputs<R>) -> Result<R> {
    let SamplingBoundInputs { n, k, lambda, eps_bar } = inputs;
    check_sampling_inputs(n, k, lambda)?;
    if eps_bar <= R::zero() || eps_bar >= R::one() {
        return Err(Error::domain(format!("eps_bar = {eps_bar} outside (0, 1)")));
    }
    let var = lambda * (R::one() - lambda);
    if var <= R::zero() {
        return Ok(R::zero());
    }
    let two_pi = R::of(std::f64::consts::TAU);
    let log_arg = (n + k).sqrt() * correction_c(n, k, lambda)
        / ((two_pi * n * k * var).sqrt() * eps_bar);
    let ln = log_arg.ln();
    if ln <= R::zero() {
        return Ok(R::zero());
    }
    Ok((R::two() * (n + k) * var / (n * k)).sqrt() * ln.sqrt())
}

/// Tail bound `h(n, k, λ, t)`; not clamped to `<= 1` (callers interpret it
/// as a bound, which is vacuous above 1).
pub fn tail_h<R: Real>(n: R, k: R, lambda: R, t: R) -> Result<R> {
    check_sampling_inputs(n, k, lambda)?;
    let var = lambda * (R::one() - lambda);
    if var <= R::zero() {
        return Err(Error::domain(format!("lambda = {lambda} must be in (0, 1)")));
    }
    if t < R::zero() {
        return Err(Error::domain(format!("t = {t} must be nonnegative")));
    }
    let two_pi = R::of(std::f64::consts::TAU);
    let exponent = -(n * k * t * t) / (R::two() * (n + k) * var);
    Ok(exponent.exp() * correction_c(n, k, lambda) / (two_pi * n * k * var / (n + k)).sqrt())
}

/// Upper Gaussian tail probability beyond `n_alpha` standard deviations.
pub fn gaussian_tail<R: Real>(n_alpha: R) -> Result<R> {
    if n_alpha < R::zero() || !n_alpha.is_finite() {
        return Err(Error::domain(format!("n_alpha = {n_alpha} must be >= 0")));
    }
    let x = n_alpha.to_f64_lossy() / std::f64::consts::SQRT_2;
    Ok(R::of(0.5 * statrs::function::erf::erfc(x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(e_b: f64, v: EncodingVariant) -> f64 {
        min_forgery_mismatch_sc(e_b, v).unwrap()
    }

    #[test]
    fn binary_entropy_anchors() {
        assert_eq!(binary_entropy(0.5f64).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0f64).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0f64).unwrap(), 0.0);
        // high-precision oracle value for H(0.079135)
        assert!((binary_entropy(0.079135f64).unwrap() - 0.39912395155435184).abs() < 1e-12);
        assert!(binary_entropy(1.5f64).is_err());
        assert!(binary_entropy(-0.1f64).is_err());
    }

    #[test]
    fn inverse_entropy_anchors() {
        assert_eq!(inverse_binary_entropy(1.0f64).unwrap(), 0.5);
        assert_eq!(inverse_binary_entropy(0.0f64).unwrap(), 0.0);
        // oracle: H^-1(0.39904) = 0.0791112904746514
        assert!((inverse_binary_entropy(0.39904f64).unwrap() - 0.07911129047465145).abs() < 1e-10);
        assert!(inverse_binary_entropy(1.2f64).is_err());
    }

    #[test]
    fn inverse_entropy_round_trip() {
        for i in 0..=1000 {
            let y = i as f64 / 1000.0;
            let x = inverse_binary_entropy(y).unwrap();
            assert!((binary_entropy(x).unwrap() - y).abs() < 1e-10, "y = {y}");
        }
    }

    #[test]
    fn six_state_relation_values() {
        let r = phase_error_relation(0.0f64, EncodingVariant::SixStateTwoPhoton).unwrap();
        assert!((r.e_p - 0.14644660940672624).abs() < 1e-15);
        assert_eq!(r.a, 0.0);

        // oracle values at e_b = 0.01
        let r = phase_error_relation(0.01f64, EncodingVariant::SixStateTwoPhoton).unwrap();
        assert!((r.e_p - 0.15705321112452445).abs() < 1e-12);
        assert!((r.a - 0.006767766952966369).abs() < 1e-12);
    }

    #[test]
    fn single_photon_relation() {
        let r = phase_error_relation(0.02f64, EncodingVariant::SixStateSinglePhoton).unwrap();
        assert!((r.e_p - 0.03).abs() < 1e-15);
        assert!((r.a - 0.015).abs() < 1e-15);
    }

    #[test]
    fn four_state_matches_grid_scan() {
        // Independent oracle: dense scan of the objective over x in [-10, 10].
        for &e_b in &[0.0f64, 0.005, 0.01, 0.05, 0.1] {
            let mut best = f64::INFINITY;
            let mut x = -10.0;
            while x <= 10.0 {
                best = best.min(four_state_objective(x, e_b));
                x += 1e-4;
            }
            let r = phase_error_relation(e_b, EncodingVariant::FourStateTwoPhoton).unwrap();
            assert!((r.e_p - best).abs() < 1e-8, "e_b = {e_b}: {} vs {}", r.e_p, best);
        }
    }

    #[test]
    fn ibc_limit_and_maximum() {
        // e_b -> 0 limit for six-state two-photon: H((2 - sqrt2)/4)
        let r = ErrorRates::new(0.0f64, 0.14644660940672624, 0.0).unwrap();
        assert!((conditional_entropy_ibc(r).unwrap() - 0.6008760366928561).abs() < 1e-12);
        // maximal uncertainty
        let r = ErrorRates::new(0.5f64, 0.5, 0.25).unwrap();
        assert!((conditional_entropy_ibc(r).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sc_golden_values() {
        assert!((sc(0.01, EncodingVariant::SixStateTwoPhoton) - 0.074564).abs() < 1e-4);
        assert!((sc(0.01, EncodingVariant::FourStateTwoPhoton) - 0.045035).abs() < 1e-4);
        assert!((sc(0.0, EncodingVariant::SixStateTwoPhoton) - 0.079135).abs() < 1e-4);
    }

    #[test]
    fn relation_monotone_in_e_b() {
        for variant in [
            EncodingVariant::SixStateTwoPhoton,
            EncodingVariant::FourStateTwoPhoton,
            EncodingVariant::SixStateSinglePhoton,
        ] {
            let mut prev = -1.0f64;
            for i in 0..=1000 {
                let e_b = 0.5 * i as f64 / 1000.0;
                let r = phase_error_relation(e_b, variant).unwrap();
                assert!(r.e_p >= prev - 1e-12, "{variant:?} at e_b = {e_b}");
                prev = r.e_p;
            }
        }
    }

    #[test]
    fn six_state_dominates_four_state() {
        for i in 0..=100 {
            let e_b = 0.1 * i as f64 / 100.0;
            let s4 = sc(e_b, EncodingVariant::FourStateTwoPhoton);
            let s6 = sc(e_b, EncodingVariant::SixStateTwoPhoton);
            assert!(s4 <= s6 + 1e-9, "e_b = {e_b}: {s4} > {s6}");
            assert!(s6 <= 0.079135 + 1e-6);
        }
    }

    #[test]
    fn sampling_g_anchor_and_monotone() {
        let g0 = sampling_deviation_g(SamplingBoundInputs {
            n: 1e6f64,
            k: 1e6,
            lambda: 0.01,
            eps_bar: 1e-5,
        })
        .unwrap();
        // oracle: 5.010789622426696e-4
        assert!((g0 - 5.010789622426696e-4).abs() < 1e-12);

        // doubling n and k strictly decreases g
        let mut scale = 1.0f64;
        let mut prev = f64::INFINITY;
        for _ in 0..8 {
            let g = sampling_deviation_g(SamplingBoundInputs {
                n: 1e5 * scale,
                k: 1e5 * scale,
                lambda: 0.01,
                eps_bar: 1e-5,
            })
            .unwrap();
            assert!(g < prev);
            prev = g;
            scale *= 2.0;
        }
    }

    #[test]
    fn sampling_g_clamps_to_zero() {
        // eps_bar so large the log argument drops below 1
        let g = sampling_deviation_g(SamplingBoundInputs {
            n: 100.0f64,
            k: 100.0,
            lambda: 0.3,
            eps_bar: 0.999,
        })
        .unwrap();
        assert_eq!(g, 0.0);
        // boundary lambda handled as zero deviation
        let g = sampling_deviation_g(SamplingBoundInputs {
            n: 100.0f64,
            k: 100.0,
            lambda: 0.0,
            eps_bar: 1e-5,
        })
        .unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn tail_h_anchors() {
        // t = 0 reduces to the prefactor
        let h0 = tail_h(1e6f64, 1e6, 0.01, 0.0).unwrap();
        assert!((h0 - 5.670271761962590e-3).abs() < 1e-12);
        let h = tail_h(1e6f64, 1e6, 0.01, 0.005).unwrap();
        assert!(h < 1e-6);
        assert!((h - 3.782636350035624e-277).abs() < 1e-287);
        assert!(tail_h(1e6f64, 1e6, 0.0, 0.1).is_err());

        // strictly decreasing in t
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let t = i as f64 * 1e-4;
            let h = tail_h(1e6f64, 1e6, 0.01, t).unwrap();
            assert!(h < prev || i == 0);
            prev = h;
        }
    }

    #[test]
    fn gaussian_tail_anchors() {
        assert_eq!(gaussian_tail(0.0f64).unwrap(), 0.5);
        // oracle values for the simulation deviation counts
        assert!((gaussian_tail(4.753f64).unwrap() - 1.0021017399753216e-6).abs() < 1e-14);
        assert!((gaussian_tail(4.845f64).unwrap() - 6.330583939411862e-7).abs() < 1e-15);
        assert!(gaussian_tail(-1.0f64).is_err());
    }
}
