use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ghz::{classify, GhzOutcome};
use crate::optics::sample_fock_detection;
use crate::protocol::{Basis, PartySetting, ProtocolEngine, RoundRecord, SourceKind};
use crate::rng::RoundRng;
use crate::{Error, Result};

/// Where the GHZ measurement physically happens.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// Shared ring measurement; no single party sees all clicks.
    #[default]
    Equitable,
    /// A single station receives every pulse and announces the result.
    Localized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AttackStrategy {
    /// The measuring station projects every qubit onto the insider's basis
    /// and announces a result consistent with an honest measurement.
    FakedMeasurement,
    /// Like `FakedMeasurement`, but X-basis signs are announced at random.
    /// Detectable by construction; calibrates the detectability test.
    RandomSignControl,
    /// Extra loss inserted on one quantum channel of the ring.
    ChannelLossTamper { channel: usize, extra_loss: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    /// Insider party that colludes with the measuring station.
    pub colluder: usize,
    pub strategy: AttackStrategy,
}

impl AttackConfig {
    pub fn validate(&self, n_parties: usize, topology: Topology) -> Result<()> {
        if self.colluder >= n_parties {
            return Err(Error::field(
                "attack.colluder",
                format!("party {} out of range for {n_parties} parties", self.colluder),
            ));
        }
        match self.strategy {
            AttackStrategy::FakedMeasurement | AttackStrategy::RandomSignControl => {
                if topology != Topology::Localized {
                    return Err(Error::field(
                        "topology",
                        "a faked measurement needs a localized measuring station; \
                         the equitable ring exposes no single point that sees every click",
                    ));
                }
            }
            AttackStrategy::ChannelLossTamper { channel, extra_loss } => {
                if topology != Topology::Equitable {
                    return Err(Error::field("topology", "channel tampering targets the equitable ring"));
                }
                if channel >= n_parties {
                    return Err(Error::field("tamper.channel", format!("channel {channel} out of range")));
                }
                if !(0.0..=1.0).contains(&extra_loss) {
                    return Err(Error::field("tamper.extra_loss", format!("{extra_loss} outside [0, 1]")));
                }
            }
        }
        Ok(())
    }
}

/// A round of the localized protocol together with what the insider learns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackRound {
    pub record: RoundRecord,
    /// Measured bit of every party in the insider's basis; `None` for the
    /// honest protocol.
    pub learned: Option<Vec<u8>>,
}

/// Faked GHZ measurement by a station colluding with one party.
///
/// The station measures every qubit in `insider_basis`. Parties that used
/// that basis are read out exactly; the others give uniform bits. It then
/// announces what its honest apparatus would announce for the measured
/// product state: in the Z basis a conclusive result only for all-equal
/// strings, with a uniform sign; in the X basis the sign equals the parity
/// of the measured bits, with the honest conclusive rate. In matched-basis
/// rounds the announcements are therefore distributed exactly as in the
/// honest protocol.
///
/// `honest` must be the single-photon engine of the localized station.
pub fn faked_measurement_round(
    true_settings: &[PartySetting],
    insider_basis: Basis,
    honest: &ProtocolEngine,
    strategy: AttackStrategy,
    round_id: u64,
    rng: &mut RoundRng,
) -> Result<AttackRound> {
    if true_settings.iter().any(|s| s.source != SourceKind::SinglePhoton) {
        return Err(Error::InvalidConfiguration(
            "the faked-measurement model acts on single-photon qubits".into(),
        ));
    }
    if matches!(strategy, AttackStrategy::ChannelLossTamper { .. }) {
        return Err(Error::InvalidConfiguration(
            "channel tampering is not a faked-measurement strategy".into(),
        ));
    }
    let learned: Vec<u8> = true_settings
        .iter()
        .map(|s| {
            if s.basis == insider_basis {
                s.bit
            } else {
                rng.random_range(0..2u8)
            }
        })
        .collect();
    let reprepared: Vec<PartySetting> = learned
        .iter()
        .map(|&b| PartySetting::single_photon(insider_basis, b))
        .collect();
    let dist = honest.single_photon_distribution(&reprepared)?;
    let event = sample_fock_detection(dist, honest.analyzer().detector(), rng);
    let mut outcome = classify(&event);
    if strategy == AttackStrategy::RandomSignControl
        && insider_basis == Basis::X
        && outcome.is_conclusive()
    {
        outcome = GhzOutcome::from_parity(rng.random_range(0..2u8));
    }
    Ok(AttackRound {
        record: RoundRecord::new(round_id, true_settings.to_vec(), event, outcome, true),
        learned: Some(learned),
    })
}
