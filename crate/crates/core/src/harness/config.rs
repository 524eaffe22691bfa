use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adversary::{AttackConfig, AttackStrategy, Topology};
use crate::ghz::{GhzCircuitSpec, PhaseMode, RingDirection};
use crate::optics::DetectorModel;
use crate::protocol::{DecoyConfig, SettingsSampler, SourceKind};
use crate::{Error, Result};

/// Largest ring the harness accepts; the single-photon cache grows as `4^N`.
pub const MAX_PARTIES: usize = 8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    #[default]
    Characterize,
    Keygen,
    Attack,
    Sweep,
}

impl RunMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::Characterize => "characterize",
            RunMode::Keygen => "keygen",
            RunMode::Attack => "attack",
            RunMode::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseKind {
    Fixed,
    #[default]
    Randomized,
    PostSelected,
}

/// A per-party parameter given either once for every party or as a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerParty {
    Uniform(f64),
    Each(Vec<f64>),
}

impl PerParty {
    pub fn resolve(&self, n: usize, field: &str) -> Result<Vec<f64>> {
        match self {
            PerParty::Uniform(x) => Ok(vec![*x; n]),
            PerParty::Each(v) if v.len() == n => Ok(v.clone()),
            PerParty::Each(v) => Err(Error::field(
                field,
                format!("expected {n} entries, got {}", v.len()),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FakeKind {
    #[default]
    FakedMeasurement,
    RandomSignControl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSection {
    #[serde(default)]
    pub colluder: usize,
    #[serde(default)]
    pub strategy: FakeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TamperSection {
    #[serde(default)]
    pub channel: usize,
    #[serde(default = "default_extra_loss")]
    pub extra_loss: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub param: String,
    #[serde(default)]
    pub grid: Vec<f64>,
}

/// Everything that determines a run. Serializing a parsed config yields the
/// effective configuration with every default written out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_parties: usize,
    /// Rounds per input pattern (characterize, sweep) or in total (keygen, attack).
    pub rounds: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: RunMode,
    #[serde(default)]
    pub topology: Topology,
    #[serde(default = "default_source")]
    pub source: SourceKind,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub phase_mode: PhaseKind,
    #[serde(default = "default_window")]
    pub phase_window: f64,
    #[serde(default = "default_half")]
    pub basis_prob_z: f64,
    #[serde(default = "default_zero")]
    pub theta: PerParty,
    #[serde(default = "default_zero")]
    pub phi: PerParty,
    /// Interferometer phase `Φ`; when set, `phi[0]` is shifted to reach it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_phase: Option<f64>,
    #[serde(default = "default_one")]
    pub eta_delay: PerParty,
    #[serde(default = "default_one")]
    pub eta_channel: PerParty,
    #[serde(default = "default_hwp")]
    pub hwp_angle: f64,
    #[serde(default)]
    pub misalignment: f64,
    #[serde(default)]
    pub ring: RingDirection,
    #[serde(default = "default_efficiency")]
    pub detector_efficiency: f64,
    #[serde(default)]
    pub dark_count_prob: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoy: Option<DecoyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack: Option<AttackSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tamper: Option<TamperSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

fn default_source() -> SourceKind {
    SourceKind::SinglePhoton
}
fn default_mu() -> f64 {
    0.1
}
fn default_window() -> f64 {
    FRAC_PI_4
}
fn default_half() -> f64 {
    0.5
}
fn default_zero() -> PerParty {
    PerParty::Uniform(0.0)
}
fn default_one() -> PerParty {
    PerParty::Uniform(1.0)
}
fn default_hwp() -> f64 {
    FRAC_PI_8
}
fn default_efficiency() -> f64 {
    1.0
}
fn default_extra_loss() -> Vec<f64> {
    vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5]
}

/// Sweepable parameters. `eta_channel[j]` addresses one channel; plain
/// `eta_channel` scales every channel.
pub const SWEEP_PARAMS: [&str; 5] = ["mu", "phi", "eta_channel", "extra_loss", "phase_window"];

/// Splits `eta_channel[2]` into `("eta_channel", Some(2))`.
pub fn parse_sweep_param(param: &str) -> Result<(&str, Option<usize>)> {
    let (name, index) = match param.split_once('[') {
        Some((name, rest)) => {
            let idx = rest
                .strip_suffix(']')
                .and_then(|i| i.parse::<usize>().ok())
                .ok_or_else(|| Error::field("sweep.param", format!("malformed index in `{param}`")))?;
            (name, Some(idx))
        }
        None => (param, None),
    };
    if !SWEEP_PARAMS.contains(&name) || (index.is_some() && name != "eta_channel") {
        return Err(Error::field(
            "sweep.param",
            format!("unknown parameter `{param}`; expected one of {}", SWEEP_PARAMS.join(", ")),
        ));
    }
    Ok((name, index))
}

impl ExperimentConfig {
    /// Parses and validates TOML text. Unknown and duplicate keys are rejected.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfiguration(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfiguration(format!("serializing config: {e}")))
    }

    /// First 16 hex digits of the SHA-256 of the effective config as JSON.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes to JSON");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_PARTIES).contains(&self.n_parties) {
            return Err(Error::field(
                "n_parties",
                format!("{} outside 2..={MAX_PARTIES}", self.n_parties),
            ));
        }
        if self.rounds == 0 {
            return Err(Error::field("rounds", "at least one round required"));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::field("mu", format!("{} is not a mean photon number", self.mu)));
        }
        if let Some(g) = self.global_phase {
            if !g.is_finite() {
                return Err(Error::field("global_phase", "not finite"));
            }
        }
        self.phase()?.validate()?;
        self.circuit_spec()?.validate()?;
        self.detector()?;
        self.sampler().validate()?;
        if let Some(attack) = &self.attack {
            self.attack_config(attack).validate(self.n_parties, self.topology)?;
        }
        if let Some(t) = &self.tamper {
            for &x in &t.extra_loss {
                AttackConfig {
                    colluder: 0,
                    strategy: AttackStrategy::ChannelLossTamper { channel: t.channel, extra_loss: x },
                }
                .validate(self.n_parties, Topology::Equitable)?;
            }
        }
        if let Some(s) = &self.sweep {
            let (_, index) = parse_sweep_param(&s.param)?;
            if index.is_some_and(|j| j >= self.n_parties) {
                return Err(Error::field("sweep.param", format!("no channel in `{}`", s.param)));
            }
            if let Some(x) = s.grid.iter().find(|x| !x.is_finite()) {
                return Err(Error::field("sweep.grid", format!("{x} is not finite")));
            }
        }
        if self.mode == RunMode::Attack {
            match self.topology {
                Topology::Localized if self.source != SourceKind::SinglePhoton => {
                    return Err(Error::field("source", "the faked-measurement attack acts on single photons"));
                }
                Topology::Equitable if self.tamper.is_none() => {
                    return Err(Error::field(
                        "tamper",
                        "attack mode on the equitable ring needs a [tamper] table",
                    ));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn circuit_spec(&self) -> Result<GhzCircuitSpec> {
        let n = self.n_parties;
        let spec = GhzCircuitSpec {
            n_parties: n,
            theta: self.theta.resolve(n, "theta")?,
            phi: self.phi.resolve(n, "phi")?,
            eta_delay: self.eta_delay.resolve(n, "eta_delay")?,
            eta_channel: self.eta_channel.resolve(n, "eta_channel")?,
            hwp_angle: self.hwp_angle,
            misalignment: self.misalignment,
            ring: self.ring,
        };
        Ok(match self.global_phase {
            Some(g) => spec.with_global_phase(g),
            None => spec,
        })
    }

    pub fn detector(&self) -> Result<DetectorModel> {
        DetectorModel::new(self.detector_efficiency, self.dark_count_prob)
    }

    pub fn phase(&self) -> Result<PhaseMode> {
        let mode = match self.phase_mode {
            PhaseKind::Fixed => PhaseMode::Fixed,
            PhaseKind::Randomized => PhaseMode::Randomized,
            PhaseKind::PostSelected => PhaseMode::PostSelected { window: self.phase_window },
        };
        mode.validate()?;
        Ok(mode)
    }

    pub fn decoy_config(&self) -> DecoyConfig {
        self.decoy.clone().unwrap_or_else(|| DecoyConfig::single(self.mu))
    }

    pub fn sampler(&self) -> SettingsSampler {
        SettingsSampler {
            source: self.source,
            basis_prob_z: self.basis_prob_z,
            decoy: self.decoy_config(),
        }
    }

    pub fn attack_config(&self, section: &AttackSection) -> AttackConfig {
        AttackConfig {
            colluder: section.colluder,
            strategy: match section.strategy {
                FakeKind::FakedMeasurement => AttackStrategy::FakedMeasurement,
                FakeKind::RandomSignControl => AttackStrategy::RandomSignControl,
            },
        }
    }
}

/// Reads, parses and validates a config file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ExperimentConfig::from_toml_str(&text).map_err(|e| match e {
        Error::InvalidConfiguration(msg) => {
            Error::InvalidConfiguration(format!("{}: {msg}", path.display()))
        }
        other => other,
    })
}
