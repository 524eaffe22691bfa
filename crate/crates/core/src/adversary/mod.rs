//! Colluding-measurer attack on the localized GHZ measurement, information
//! imbalance metrics, detectability checks and channel-loss tampering on the
//! ring topology.

mod attack;
mod detect;
mod info;
mod tamper;

pub use attack::{
    faked_measurement_round, AttackConfig, AttackRound, AttackStrategy, Topology,
};
pub use detect::{detectability, homogeneity_test, DetectabilityReport, HomogeneityTest, QberDelta};
pub use info::{information_imbalance, plug_in_information, ImbalanceReport, InfoMetrics, VictimInfo, MIN_SIFTED_SAMPLES};
pub use tamper::{channel_loss_tamper_sweep, TamperPoint, TamperSweepConfig};
