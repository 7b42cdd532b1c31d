//! Run configuration: TOML parsing, validation and named presets for the
//! benchmark parameter sets.

use crate::channel::{ChannelParams, StateFamily};
use crate::decoy::{DecoyConfigScheme1, DecoyConfigScheme2};
use crate::engine::{AdversaryStrategy, EngineConfig};
use crate::error::{Error, Result};
use crate::rate::{PipelineConfig, RateTarget};
use crate::security::{ProtocolVariant, Thresholds};
use serde::{Deserialize, Serialize};

/// Fiber and detector block; distances are symmetric halves of
/// `distance_km`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub alpha_db_per_km: f64,
    pub detector_efficiency: f64,
    pub dark_count_prob: f64,
    pub misalignment: f64,
    pub distance_km: f64,
}

/// Protocol block: thresholds, sampling budgets, decoy deviation count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub t_a: f64,
    pub t_v: f64,
    pub beta: f64,
    #[serde(default = "default_eps_sample")]
    pub eps_sample_forge: f64,
    #[serde(default = "default_eps_sample")]
    pub eps_sample_repud: f64,
    #[serde(default)]
    pub n_alpha: f64,
}

fn default_eps_sample() -> f64 {
    1e-10
}

/// Monte Carlo block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_pulses")]
    pub pulses: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: u64,
    #[serde(default)]
    pub workers: usize,
}

fn default_seed() -> u64 {
    42
}
fn default_pulses() -> u64 {
    100_000
}
fn default_repetitions() -> u64 {
    1_000
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            pulses: default_pulses(),
            repetitions: default_repetitions(),
            workers: 0,
        }
    }
}

/// Complete run configuration. Unknown keys are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub variant: ProtocolVariant,
    pub family: StateFamily,
    pub channel: ChannelSection,
    pub protocol: ProtocolSection,
    pub target: RateTarget,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoy1: Option<DecoyConfigScheme1<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoy2: Option<DecoyConfigScheme2<f64>>,
    #[serde(default)]
    pub simulation: SimulationSection,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("serialize: {e}")))
    }

    pub fn validate(&self) -> Result<Self> {
        self.channel_params()?;
        self.pipeline_config()?.validate()?;
        self.target.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(*self)
    }

    /// Symmetric channel at the configured total distance.
    pub fn channel_params(&self) -> Result<ChannelParams<f64>> {
        self.channel_params_at(self.channel.distance_km)
    }

    pub fn channel_params_at(&self, total_km: f64) -> Result<ChannelParams<f64>> {
        ChannelParams::symmetric(
            self.channel.alpha_db_per_km,
            self.channel.detector_efficiency,
            self.channel.dark_count_prob,
            self.channel.misalignment,
            total_km,
        )
        .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn thresholds(&self) -> Result<Thresholds<f64>> {
        Thresholds::new(self.protocol.t_a, self.protocol.t_v)
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn pipeline_config(&self) -> Result<PipelineConfig> {
        Ok(PipelineConfig {
            variant: self.variant,
            family: self.family,
            thresholds: self.thresholds()?,
            beta: self.protocol.beta,
            eps_sample_forge: self.protocol.eps_sample_forge,
            eps_sample_repud: self.protocol.eps_sample_repud,
            n_alpha: self.protocol.n_alpha,
            decoy1: self.decoy1,
            decoy2: self.decoy2,
        })
    }

    /// Monte Carlo configuration (two-photon source model) with the given
    /// adversary.
    pub fn engine_config(&self, adversary: AdversaryStrategy) -> Result<EngineConfig> {
        Ok(EngineConfig {
            family: self.family,
            channel: self.channel_params()?,
            n_pulses: self.simulation.pulses,
            beta: self.protocol.beta,
            thresholds: self.thresholds()?,
            adversary,
            seed: self.simulation.seed,
            workers: self.simulation.workers,
        })
    }
}

fn base(variant: ProtocolVariant, family: StateFamily, t_a: f64, t_v: f64, n_alpha: f64) -> RunConfig {
    RunConfig {
        variant,
        family,
        channel: ChannelSection {
            alpha_db_per_km: 0.16,
            detector_efficiency: 0.93,
            dark_count_prob: 1e-7,
            misalignment: 0.005,
            distance_km: 100.0,
        },
        protocol: ProtocolSection {
            t_a,
            t_v,
            beta: 0.30,
            eps_sample_forge: 1e-10,
            eps_sample_repud: 1e-10,
            n_alpha,
        },
        target: RateTarget { eps_sec_max: 1e-5, eps_rob_max: 1e-6, clock_hz: 1e10 },
        decoy1: None,
        decoy2: None,
        simulation: SimulationSection::default(),
    }
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 6] = [
    "fig2-sixstate-twophoton",
    "fig2-fourstate-twophoton",
    "fig2-sixstate-scheme1",
    "fig2-sixstate-scheme2",
    "fig2-fourstate-scheme1",
    "fig2-fourstate-scheme2",
];

/// Benchmark parameter sets: ultralow-loss fiber at 100 km, 10 GHz clock,
/// per-variant thresholds and decoy settings.
pub fn preset(name: &str) -> Result<RunConfig> {
    use ProtocolVariant::*;
    use StateFamily::*;
    let cfg = match name {
        "fig2-sixstate-twophoton" => base(TwoPhoton, SixState, 0.0150, 0.0645, 0.0),
        "fig2-fourstate-twophoton" => base(TwoPhoton, FourState, 0.0120, 0.0405, 0.0),
        "fig2-sixstate-scheme1" => {
            let mut c = base(Scheme1, SixState, 0.0117, 0.0407, 4.753);
            c.decoy1 = Some(DecoyConfigScheme1 {
                mu: 0.34,
                nu: 0.16,
                omega: 0.01,
                p_mu: 0.55,
                p_nu: 0.25,
                p_omega: 0.18,
                p_vacuum: 0.02,
            });
            c
        }
        "fig2-sixstate-scheme2" => {
            let mut c = base(Scheme2, SixState, 0.0120, 0.04275, 4.845);
            c.decoy2 = Some(DecoyConfigScheme2 {
                mu1: 0.17,
                nu1: 0.08,
                p_mu_mu: 0.57,
                p_mu_0: 0.01,
                p_0_mu: 0.01,
                p_nu_nu: 0.30,
                p_nu_0: 0.05,
                p_0_nu: 0.05,
                p_0_0: 0.01,
            });
            c
        }
        "fig2-fourstate-scheme1" => {
            let mut c = base(Scheme1, FourState, 0.0112, 0.0346, 4.753);
            c.decoy1 = Some(DecoyConfigScheme1 {
                mu: 0.12,
                nu: 0.08,
                omega: 0.008,
                p_mu: 0.52,
                p_nu: 0.23,
                p_omega: 0.23,
                p_vacuum: 0.02,
            });
            c
        }
        "fig2-fourstate-scheme2" => {
            let mut c = base(Scheme2, FourState, 0.0112, 0.0344, 4.845);
            c.decoy2 = Some(DecoyConfigScheme2 {
                mu1: 0.075,
                nu1: 0.04,
                p_mu_mu: 0.60,
                p_mu_0: 0.01,
                p_0_mu: 0.01,
                p_nu_nu: 0.27,
                p_nu_0: 0.05,
                p_0_nu: 0.05,
                p_0_0: 0.01,
            });
            c
        }
        other => {
            return Err(Error::Config(format!(
                "unknown preset '{other}'; available: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    cfg.validate()
}
