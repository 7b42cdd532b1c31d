//! Monte Carlo simulation of the three-stage signature protocol with
//! honest parties and pluggable adversaries, used to validate the analytic
//! bounds empirically.
//!
//! Every pulse draws from its own counter-derived RNG substream, so runs
//! are bit-identical for a given master seed regardless of how pulses are
//! partitioned across workers.

use crate::channel::{two_photon_gains, ChannelParams, StateFamily};
use crate::error::{Error, Result};
use crate::security::Thresholds;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Single-photon polarization states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    H,
    V,
    Plus,
    Minus,
    R,
    L,
}

impl Polarization {
    /// The orthogonal state in the same basis.
    pub fn orthogonal(self) -> Polarization {
        match self {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
            Polarization::Plus => Polarization::Minus,
            Polarization::Minus => Polarization::Plus,
            Polarization::R => Polarization::L,
            Polarization::L => Polarization::R,
        }
    }

    fn basis(self) -> MeasurementBasis {
        match self {
            Polarization::H | Polarization::V => MeasurementBasis::Z,
            Polarization::Plus | Polarization::Minus => MeasurementBasis::X,
            Polarization::R | Polarization::L => MeasurementBasis::Y,
        }
    }
}

/// Measurement bases; `Y` is used only by the six-state encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementBasis {
    Z,
    X,
    Y,
}

impl MeasurementBasis {
    pub fn eigenstates(self) -> (Polarization, Polarization) {
        match self {
            MeasurementBasis::Z => (Polarization::H, Polarization::V),
            MeasurementBasis::X => (Polarization::Plus, Polarization::Minus),
            MeasurementBasis::Y => (Polarization::R, Polarization::L),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            MeasurementBasis::Z => 0,
            MeasurementBasis::X => 1,
            MeasurementBasis::Y => 2,
        }
    }
}

/// An announced pair of non-orthogonal states; `first` encodes logic 0,
/// `second` logic 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSet {
    pub first: Polarization,
    pub second: Polarization,
    pub index: u8,
}

const SIX_SETS: [(Polarization, Polarization); 12] = [
    (Polarization::H, Polarization::Plus),
    (Polarization::H, Polarization::Minus),
    (Polarization::H, Polarization::R),
    (Polarization::H, Polarization::L),
    (Polarization::V, Polarization::Plus),
    (Polarization::V, Polarization::Minus),
    (Polarization::V, Polarization::R),
    (Polarization::V, Polarization::L),
    (Polarization::Plus, Polarization::R),
    (Polarization::Plus, Polarization::L),
    (Polarization::Minus, Polarization::R),
    (Polarization::Minus, Polarization::L),
];

const FOUR_SETS: [(Polarization, Polarization); 4] = [
    (Polarization::H, Polarization::Plus),
    (Polarization::H, Polarization::Minus),
    (Polarization::V, Polarization::Plus),
    (Polarization::V, Polarization::Minus),
];

impl StateSet {
    pub fn by_index(family: StateFamily, index: u8) -> StateSet {
        let (first, second) = match family {
            StateFamily::SixState => SIX_SETS[index as usize],
            StateFamily::FourState => FOUR_SETS[index as usize],
        };
        StateSet { first, second, index }
    }

    pub fn state_for_bit(&self, bit: u8) -> Polarization {
        if bit == 0 {
            self.first
        } else {
            self.second
        }
    }
}

/// Result of applying the orthogonality rule to one measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Conclusive(u8),
    Inconclusive,
}

/// An outcome orthogonal to one state of the set rules that state out and
/// reveals the other as the one sent.
pub fn conclusive_decision(set: &StateSet, outcome: Polarization) -> Decision {
    if outcome == set.first.orthogonal() {
        Decision::Conclusive(1)
    } else if outcome == set.second.orthogonal() {
        Decision::Conclusive(0)
    } else {
        Decision::Inconclusive
    }
}

/// Born-rule measurement of `state` in `basis`, with misalignment: the
/// outcome flips to the orthogonal eigenstate with probability `e_d`.
pub fn measure(
    state: Polarization,
    basis: MeasurementBasis,
    e_d: f64,
    rng: &mut impl Rng,
) -> Polarization {
    let (a, b) = basis.eigenstates();
    let p_a = if state.basis() == basis {
        if state == a {
            1.0
        } else {
            0.0
        }
    } else {
        0.5
    };
    let mut outcome = if rng.gen_bool(p_a) { a } else { b };
    if e_d > 0.0 && rng.gen_bool(e_d) {
        outcome = outcome.orthogonal();
    }
    outcome
}

/// What the sender does with each pulse pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdversaryStrategy {
    Honest,
    /// Alice sends deliberately mismatched states so that the conclusive
    /// mismatch rates on the two sides hit the given targets (as fractions
    /// of conclusive results).
    IndividualRepudiation { target_b: f64, target_c: f64 },
    /// Bob flips this fraction of the forwarded signature before passing
    /// it to Charlie.
    NaiveForger { flip_fraction: f64 },
}

/// Which stage a kept bit was assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Test,
    Untested,
}

/// One kept pulse (both receivers clicked).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub pulse_index: u64,
    pub set_index: u8,
    pub sent_bit: u8,
    pub bob_click: bool,
    pub charlie_click: bool,
    pub bob_basis: MeasurementBasis,
    pub charlie_basis: MeasurementBasis,
    pub bob_outcome: Option<Polarization>,
    pub charlie_outcome: Option<Polarization>,
    pub bob_conclusive: Decision,
    pub charlie_conclusive: Decision,
    pub role: Role,
}

/// Full protocol configuration for one simulated run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub family: StateFamily,
    pub channel: ChannelParams<f64>,
    pub n_pulses: u64,
    pub beta: f64,
    pub thresholds: Thresholds<f64>,
    pub adversary: AdversaryStrategy,
    pub seed: u64,
    /// Worker threads for the distribution stage; 0 uses the default pool.
    pub workers: usize,
}

const ESTIMATION_STREAM: u64 = u64::MAX;
const MESSAGING_STREAM: u64 = u64::MAX - 1;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-side conclusive mismatch probability targets translate into flip
/// probabilities against the channel's conclusive QBER.
fn repudiation_flip_probs(cfg: &EngineConfig, target_b: f64, target_c: f64) -> Result<(f64, f64)> {
    let g = two_photon_gains(&cfg.channel, cfg.family);
    let flip = |target: f64, e_c: f64| -> Result<f64> {
        if e_c >= 0.5 {
            return Err(Error::Degenerate("channel QBER at 1/2".to_string()));
        }
        let q = (target - e_c) / (1.0 - 2.0 * e_c);
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::domain(format!(
                "mismatch target {target} unreachable from channel QBER {e_c}"
            )));
        }
        Ok(q)
    };
    Ok((flip(target_b, g.e_b_c)?, flip(target_c, g.e_c_c)?))
}

struct SideDraw {
    click: bool,
    basis: MeasurementBasis,
    outcome: Option<Polarization>,
}

fn receive_side(
    sent: Polarization,
    eta: f64,
    y0: f64,
    e_d: f64,
    family: StateFamily,
    rng: &mut ChaCha8Rng,
) -> SideDraw {
    let basis = match family {
        StateFamily::SixState => match rng.gen_range(0..3u8) {
            0 => MeasurementBasis::Z,
            1 => MeasurementBasis::X,
            _ => MeasurementBasis::Y,
        },
        StateFamily::FourState => {
            if rng.gen_range(0..2u8) == 0 {
                MeasurementBasis::Z
            } else {
                MeasurementBasis::X
            }
        }
    };
    let signal = rng.gen_bool(eta);
    let dark = rng.gen_bool(y0);
    if !signal && !dark {
        return SideDraw { click: false, basis, outcome: None };
    }
    let dark_outcome = |rng: &mut ChaCha8Rng| {
        let (a, b) = basis.eigenstates();
        if rng.gen_bool(0.5) {
            a
        } else {
            b
        }
    };
    let outcome = if signal && dark {
        // double click: the squashing assigns one detector at random
        if rng.gen_bool(0.5) {
            measure(sent, basis, e_d, rng)
        } else {
            dark_outcome(rng)
        }
    } else if signal {
        measure(sent, basis, e_d, rng)
    } else {
        dark_outcome(rng)
    };
    SideDraw { click: true, basis, outcome: Some(outcome) }
}

fn simulate_pulse(cfg: &EngineConfig, flips: Option<(f64, f64)>, i: u64) -> Option<TrialRecord> {
    let mut rng = stream_rng(cfg.seed, i);
    let set_count = cfg.family.set_count() as u8;
    let set = StateSet::by_index(cfg.family, rng.gen_range(0..set_count));
    let bit = rng.gen_range(0..2u8);
    let (mut bit_b, mut bit_c) = (bit, bit);
    if let Some((q_b, q_c)) = flips {
        if q_b > 0.0 && rng.gen_bool(q_b) {
            bit_b = 1 - bit_b;
        }
        if q_c > 0.0 && rng.gen_bool(q_c) {
            bit_c = 1 - bit_c;
        }
    }
    let y0 = cfg.channel.dark_yield();
    let e_d = cfg.channel.e_d;
    let bob = receive_side(set.state_for_bit(bit_b), cfg.channel.eta_b(), y0, e_d, cfg.family, &mut rng);
    let charlie =
        receive_side(set.state_for_bit(bit_c), cfg.channel.eta_c(), y0, e_d, cfg.family, &mut rng);
    if !(bob.click && charlie.click) {
        return None;
    }
    let decide = |d: &SideDraw| match d.outcome {
        Some(o) => conclusive_decision(&set, o),
        None => Decision::Inconclusive,
    };
    Some(TrialRecord {
        pulse_index: i,
        set_index: set.index,
        sent_bit: bit,
        bob_click: true,
        charlie_click: true,
        bob_basis: bob.basis,
        charlie_basis: charlie.basis,
        bob_outcome: bob.outcome,
        charlie_outcome: charlie.outcome,
        bob_conclusive: decide(&bob),
        charlie_conclusive: decide(&charlie),
        role: Role::Untested,
    })
}

/// Distribution stage: Alice sends `n_pulses` state pairs; rounds where
/// either receiver saw no click are discarded.
pub fn run_distribution(cfg: &EngineConfig) -> Result<Vec<TrialRecord>> {
    let flips = match cfg.adversary {
        AdversaryStrategy::IndividualRepudiation { target_b, target_c } => {
            Some(repudiation_flip_probs(cfg, target_b, target_c)?)
        }
        _ => None,
    };
    let run = || {
        (0..cfg.n_pulses)
            .into_par_iter()
            .filter_map(|i| simulate_pulse(cfg, flips, i))
            .collect::<Vec<_>>()
    };
    if cfg.workers == 0 {
        Ok(run())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        Ok(pool.install(run))
    }
}

/// Observed statistics of the estimation stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationOutcome {
    pub m: u64,
    pub m_t: u64,
    pub m_u: u64,
    /// Observed conclusive fractions among test bits.
    pub p_b_c: f64,
    pub p_c_c: f64,
    /// Observed conclusive mismatch rates among test bits.
    pub e_b_c: f64,
    pub e_c_c: f64,
}

/// Estimation stage: marks `ceil(beta m)` records as test bits, chosen
/// uniformly without replacement, and tallies conclusive rates and
/// mismatch rates on them.
pub fn run_estimation(records: &mut [TrialRecord], beta: f64, seed: u64) -> Result<EstimationOutcome> {
    let m = records.len() as u64;
    if m == 0 {
        return Err(Error::Degenerate("no kept records".to_string()));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::domain(format!("test fraction {beta} outside [0, 1]")));
    }
    let m_t = (beta * m as f64).ceil() as u64;
    let mut rng = stream_rng(seed, ESTIMATION_STREAM);
    // partial Fisher-Yates: the first m_t slots become the test sample
    let n = records.len();
    for i in 0..(m_t as usize).min(n.saturating_sub(1)) {
        let j = rng.gen_range(i..n);
        records.swap(i, j);
    }
    let mut conc_b = 0u64;
    let mut conc_c = 0u64;
    let mut err_b = 0u64;
    let mut err_c = 0u64;
    for (i, r) in records.iter_mut().enumerate() {
        if (i as u64) < m_t {
            r.role = Role::Test;
            if let Decision::Conclusive(b) = r.bob_conclusive {
                conc_b += 1;
                if b != r.sent_bit {
                    err_b += 1;
                }
            }
            if let Decision::Conclusive(b) = r.charlie_conclusive {
                conc_c += 1;
                if b != r.sent_bit {
                    err_c += 1;
                }
            }
        } else {
            r.role = Role::Untested;
        }
    }
    if m_t > 0 && conc_b == 0 && conc_c == 0 {
        return Err(Error::Degenerate("no conclusive test records".to_string()));
    }
    let rate = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    Ok(EstimationOutcome {
        m,
        m_t,
        m_u: m - m_t,
        p_b_c: rate(conc_b, m_t),
        p_c_c: rate(conc_c, m_t),
        e_b_c: rate(err_b, conc_b),
        e_c_c: rate(err_c, conc_c),
    })
}

/// Outcome of the messaging stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MessagingOutcome {
    pub bob_accepts: bool,
    pub charlie_accepts: bool,
    /// Observed conclusive mismatch rates among untested bits.
    pub e_b_obs: f64,
    pub e_c_obs: f64,
    pub bob_conclusive_untested: u64,
    pub charlie_conclusive_untested: u64,
}

/// Messaging stage: Bob checks his untested conclusive bits against
/// Alice's declared string and accepts below `T_a`; he forwards the string
/// (possibly corrupted by a naive forger) to Charlie, who accepts below
/// `T_v`. Inconclusive bits match automatically.
pub fn run_messaging(
    records: &[TrialRecord],
    th: &Thresholds<f64>,
    forger: &AdversaryStrategy,
    seed: u64,
) -> Result<MessagingOutcome> {
    let untested: Vec<&TrialRecord> = records.iter().filter(|r| r.role == Role::Untested).collect();
    if untested.is_empty() {
        return Err(Error::Degenerate("no untested records".to_string()));
    }
    let mut rng = stream_rng(seed, MESSAGING_STREAM);
    let flip_fraction = match forger {
        AdversaryStrategy::NaiveForger { flip_fraction } => {
            if !(0.0..=1.0).contains(flip_fraction) {
                return Err(Error::domain(format!("flip fraction {flip_fraction} outside [0, 1]")));
            }
            *flip_fraction
        }
        _ => 0.0,
    };
    let mut conc_b = 0u64;
    let mut conc_c = 0u64;
    let mut err_b = 0u64;
    let mut err_c = 0u64;
    for r in &untested {
        if let Decision::Conclusive(b) = r.bob_conclusive {
            conc_b += 1;
            if b != r.sent_bit {
                err_b += 1;
            }
        }
        // Bob forwards Alice's declared bit, flipped with the forger's
        // fraction; Charlie checks his conclusive outcomes against it.
        let forwarded = if flip_fraction > 0.0 && rng.gen_bool(flip_fraction) {
            1 - r.sent_bit
        } else {
            r.sent_bit
        };
        if let Decision::Conclusive(b) = r.charlie_conclusive {
            conc_c += 1;
            if b != forwarded {
                err_c += 1;
            }
        }
    }
    let rate = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let e_b_obs = rate(err_b, conc_b);
    let e_c_obs = rate(err_c, conc_c);
    Ok(MessagingOutcome {
        bob_accepts: e_b_obs <= th.t_a,
        charlie_accepts: e_c_obs <= th.t_v,
        e_b_obs,
        e_c_obs,
        bob_conclusive_untested: conc_b,
        charlie_conclusive_untested: conc_c,
    })
}

/// One full protocol run: distribution, estimation, messaging.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub records: Vec<TrialRecord>,
    pub estimation: EstimationOutcome,
    pub messaging: MessagingOutcome,
}

pub fn run_protocol(cfg: &EngineConfig) -> Result<ProtocolRun> {
    let mut records = run_distribution(cfg)?;
    let estimation = run_estimation(&mut records, cfg.beta, cfg.seed)?;
    let messaging = run_messaging(&records, &cfg.thresholds, &cfg.adversary, cfg.seed)?;
    Ok(ProtocolRun { records, estimation, messaging })
}

/// Empirical attack frequencies over repeated protocol runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyReport {
    pub repetitions: u64,
    pub bob_accept_charlie_reject: u64,
    pub charlie_accept: u64,
    pub bob_reject: u64,
    pub freq_bob_accept_charlie_reject: f64,
    pub freq_charlie_accept: f64,
    pub freq_bob_reject: f64,
    /// Wilson 95% upper limits of the three frequencies.
    pub upper_bob_accept_charlie_reject: f64,
    pub upper_charlie_accept: f64,
    pub upper_bob_reject: f64,
}

/// Upper edge of the Wilson score interval for `k` successes in `n`
/// trials at `z` standard normal quantiles.
pub fn wilson_upper(k: u64, n: u64, z: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = p + z2 / (2.0 * nf);
    let rad = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center + rad) / denom).min(1.0)
}

/// Repeats the full protocol, tallying the attack-relevant event
/// frequencies. Each repetition derives its own master seed so runs stay
/// independent yet reproducible.
pub fn empirical_bound_check(cfg: &EngineConfig, repetitions: u64) -> Result<FrequencyReport> {
    if repetitions == 0 {
        return Err(Error::domain("repetitions must be >= 1".to_string()));
    }
    let reps: Vec<MessagingOutcome> = (0..repetitions)
        .map(|rep| {
            let mut c = *cfg;
            c.seed = cfg.seed.wrapping_add(rep.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            Ok(run_protocol(&c)?.messaging)
        })
        .collect::<Result<_>>()?;
    let mut ba_cr = 0u64;
    let mut ca = 0u64;
    let mut br = 0u64;
    for m in &reps {
        if m.bob_accepts && !m.charlie_accepts {
            ba_cr += 1;
        }
        if m.charlie_accepts {
            ca += 1;
        }
        if !m.bob_accepts {
            br += 1;
        }
    }
    let n = repetitions;
    let z = 1.96;
    Ok(FrequencyReport {
        repetitions: n,
        bob_accept_charlie_reject: ba_cr,
        charlie_accept: ca,
        bob_reject: br,
        freq_bob_accept_charlie_reject: ba_cr as f64 / n as f64,
        freq_charlie_accept: ca as f64 / n as f64,
        freq_bob_reject: br as f64 / n as f64,
        upper_bob_accept_charlie_reject: wilson_upper(ba_cr, n, z),
        upper_charlie_accept: wilson_upper(ca, n, z),
        upper_bob_reject: wilson_upper(br, n, z),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ideal_config(family: StateFamily, n: u64) -> EngineConfig {
        EngineConfig {
            family,
            channel: ChannelParams::new(0.0, 1.0, 0.0, 0.0, 0.0, 0.0).unwrap(),
            n_pulses: n,
            beta: 0.3,
            thresholds: Thresholds::new(0.02, 0.05).unwrap(),
            adversary: AdversaryStrategy::Honest,
            seed: 7,
            workers: 0,
        }
    }

    fn all_states(family: StateFamily) -> Vec<Polarization> {
        match family {
            StateFamily::SixState => vec![
                Polarization::H,
                Polarization::V,
                Polarization::Plus,
                Polarization::Minus,
                Polarization::R,
                Polarization::L,
            ],
            StateFamily::FourState => {
                vec![Polarization::H, Polarization::V, Polarization::Plus, Polarization::Minus]
            }
        }
    }

    #[test]
    fn conclusive_rule_exhaustive() {
        // hand-built orthogonal partner table
        let partner = |p: Polarization| match p {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
            Polarization::Plus => Polarization::Minus,
            Polarization::Minus => Polarization::Plus,
            Polarization::R => Polarization::L,
            Polarization::L => Polarization::R,
        };
        let mut cases = 0;
        for family in [StateFamily::SixState, StateFamily::FourState] {
            for idx in 0..family.set_count() as u8 {
                let set = StateSet::by_index(family, idx);
                assert_ne!(set.first, set.second);
                assert_ne!(partner(set.first), set.second, "orthogonal pair in set {idx:?}");
                for outcome in all_states(family) {
                    let expect = if outcome == partner(set.first) {
                        Decision::Conclusive(1)
                    } else if outcome == partner(set.second) {
                        Decision::Conclusive(0)
                    } else {
                        Decision::Inconclusive
                    };
                    assert_eq!(conclusive_decision(&set, outcome), expect);
                    cases += 1;
                }
            }
        }
        assert_eq!(cases, 72 + 16);
    }

    #[test]
    fn conclusive_rule_examples() {
        let set = StateSet::by_index(StateFamily::SixState, 0); // {H, +}
        assert_eq!(conclusive_decision(&set, Polarization::Minus), Decision::Conclusive(0));
        assert_eq!(conclusive_decision(&set, Polarization::V), Decision::Conclusive(1));
        assert_eq!(conclusive_decision(&set, Polarization::R), Decision::Inconclusive);
    }

    #[test]
    fn born_rule_frequencies() {
        let mut rng = stream_rng(3, 0);
        let n = 100_000;
        let mut plus = 0;
        for _ in 0..n {
            if measure(Polarization::H, MeasurementBasis::X, 0.0, &mut rng) == Polarization::Plus {
                plus += 1;
            }
        }
        let sigma = (0.25f64 / n as f64).sqrt();
        assert!((plus as f64 / n as f64 - 0.5).abs() < 4.0 * sigma);
        // eigenstate is deterministic without misalignment
        for _ in 0..100 {
            assert_eq!(measure(Polarization::H, MeasurementBasis::Z, 0.0, &mut rng), Polarization::H);
        }
    }

    #[test]
    fn ideal_conclusive_fractions() {
        for (family, expect) in [(StateFamily::SixState, 1.0 / 6.0), (StateFamily::FourState, 0.25)] {
            let cfg = ideal_config(family, 200_000);
            let mut records = run_distribution(&cfg).unwrap();
            assert_eq!(records.len() as u64, cfg.n_pulses); // lossless: all kept
            let est = run_estimation(&mut records, 0.5, cfg.seed).unwrap();
            let sigma = (expect * (1.0 - expect) / est.m_t as f64).sqrt();
            assert!((est.p_b_c - expect).abs() < 4.0 * sigma, "{family:?}: {}", est.p_b_c);
            assert!((est.p_c_c - expect).abs() < 4.0 * sigma);
            assert_eq!(est.e_b_c, 0.0);
        }
    }

    #[test]
    fn lossy_channel_matches_analytics() {
        let channel = ChannelParams::symmetric(0.16, 0.93, 1e-7, 0.005, 50.0).unwrap();
        let cfg = EngineConfig {
            family: StateFamily::SixState,
            channel,
            n_pulses: 400_000,
            beta: 0.5,
            thresholds: Thresholds::new(0.015, 0.0645).unwrap(),
            adversary: AdversaryStrategy::Honest,
            seed: 11,
            workers: 0,
        };
        let g = two_photon_gains(&channel, StateFamily::SixState);
        let mut records = run_distribution(&cfg).unwrap();
        let q_emp = records.len() as f64 / cfg.n_pulses as f64;
        let sigma_q = (g.q * (1.0 - g.q) / cfg.n_pulses as f64).sqrt();
        assert!((q_emp - g.q).abs() < 4.0 * sigma_q, "{q_emp} vs {}", g.q);
        let est = run_estimation(&mut records, cfg.beta, cfg.seed).unwrap();
        let sigma_p = (g.p_b_c * (1.0 - g.p_b_c) / est.m_t as f64).sqrt();
        assert!((est.p_b_c - g.p_b_c).abs() < 4.0 * sigma_p);
        assert!((est.p_c_c - g.p_c_c).abs() < 4.0 * sigma_p);
        let n_conc = est.m_t as f64 * g.p_b_c;
        let sigma_e = (g.e_b_c * (1.0 - g.e_b_c) / n_conc).sqrt();
        assert!((est.e_b_c - g.e_b_c).abs() < 4.0 * sigma_e, "{} vs {}", est.e_b_c, g.e_b_c);
        assert!((est.e_c_c - g.e_c_c).abs() < 4.0 * sigma_e);
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let mut cfg = ideal_config(StateFamily::SixState, 20_000);
        cfg.channel = ChannelParams::symmetric(0.16, 0.93, 1e-7, 0.005, 50.0).unwrap();
        cfg.workers = 1;
        let a = run_distribution(&cfg).unwrap();
        cfg.workers = 8;
        let b = run_distribution(&cfg).unwrap();
        assert_eq!(a, b);
        cfg.workers = 0;
        assert_eq!(a, run_distribution(&cfg).unwrap());
    }

    #[test]
    fn honest_run_both_accept() {
        let mut cfg = ideal_config(StateFamily::SixState, 50_000);
        cfg.channel = ChannelParams::symmetric(0.16, 0.93, 1e-7, 0.005, 50.0).unwrap();
        cfg.thresholds = Thresholds::new(0.02, 0.05).unwrap();
        let run = run_protocol(&cfg).unwrap();
        assert!(run.messaging.bob_accepts);
        assert!(run.messaging.charlie_accepts);
        assert!((run.messaging.e_b_obs - 0.0099).abs() < 0.01);
    }

    #[test]
    fn half_flip_forger_gets_rejected() {
        let mut cfg = ideal_config(StateFamily::SixState, 50_000);
        cfg.adversary = AdversaryStrategy::NaiveForger { flip_fraction: 0.5 };
        let run = run_protocol(&cfg).unwrap();
        assert!(run.messaging.bob_accepts); // Bob sees the honest string
        assert!(!run.messaging.charlie_accepts);
        assert!((run.messaging.e_c_obs - 0.5).abs() < 0.05);
    }

    #[test]
    fn repudiation_hits_mismatch_targets() {
        let mut cfg = ideal_config(StateFamily::SixState, 300_000);
        cfg.channel = ChannelParams::symmetric(0.16, 0.93, 1e-7, 0.005, 20.0).unwrap();
        let (tb, tc) = (0.04, 0.02);
        cfg.adversary = AdversaryStrategy::IndividualRepudiation { target_b: tb, target_c: tc };
        let mut records = run_distribution(&cfg).unwrap();
        let est = run_estimation(&mut records, 0.9, cfg.seed).unwrap();
        let n_conc = est.m_t as f64 / 6.0;
        let sigma = |p: f64| (p * (1.0 - p) / n_conc).sqrt();
        assert!((est.e_b_c - tb).abs() < 4.0 * sigma(tb), "{} vs {tb}", est.e_b_c);
        assert!((est.e_c_c - tc).abs() < 4.0 * sigma(tc), "{} vs {tc}", est.e_c_c);
    }

    #[test]
    fn unreachable_target_rejected() {
        let mut cfg = ideal_config(StateFamily::SixState, 100);
        cfg.adversary = AdversaryStrategy::IndividualRepudiation { target_b: 2.0, target_c: 0.01 };
        assert!(run_distribution(&cfg).is_err());
    }

    #[test]
    fn wilson_upper_behavior() {
        assert!(wilson_upper(0, 10_000, 1.96) < 1e-3);
        assert!(wilson_upper(0, 10_000, 1.96) > 0.0);
        assert!((wilson_upper(5000, 10_000, 1.96) - 0.5).abs() < 0.02);
        assert_eq!(wilson_upper(0, 0, 1.96), 1.0);
    }

    #[test]
    fn frequency_report_honest() {
        let mut cfg = ideal_config(StateFamily::SixState, 2_000);
        cfg.channel = ChannelParams::symmetric(0.16, 0.93, 1e-7, 0.005, 20.0).unwrap();
        cfg.thresholds = Thresholds::new(0.05, 0.2).unwrap();
        let rep = empirical_bound_check(&cfg, 200).unwrap();
        assert_eq!(rep.repetitions, 200);
        assert!(rep.freq_charlie_accept > 0.95);
        assert!(rep.freq_bob_reject < 0.05);
        // determinism of the whole harness
        let rep2 = empirical_bound_check(&cfg, 200).unwrap();
        assert_eq!(rep, rep2);
    }

    #[test]
    fn degenerate_inputs() {
        let cfg = ideal_config(StateFamily::SixState, 100);
        let mut records = run_distribution(&cfg).unwrap();
        assert!(run_estimation(&mut [], 0.3, 1).is_err());
        // beta = 1 leaves nothing to sign
        let th = Thresholds::new(0.02, 0.05).unwrap();
        run_estimation(&mut records, 1.0, cfg.seed).unwrap();
        assert!(run_messaging(&records, &th, &AdversaryStrategy::Honest, cfg.seed).is_err());
    }
}
