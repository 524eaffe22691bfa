//! End-to-end protocol: BB84 encoding, per-round simulation through the ring
//! measurement, sifting, QBER accumulation, decoy-intensity gains and the
//! XOR secret-sharing composition.

mod characterize;
mod decoy;
mod encoding;
mod engine;
mod secret;
mod sifting;
mod stats;

pub use characterize::{
    characterization_patterns, exact_pattern_distribution, expected_qber, run_characterization,
    ExpectedQber, SettingsSampler,
};
pub use decoy::{decoy_bookkeeping, DecoyConfig, GainRow, GainTable};
pub use encoding::{encode, pattern_label, Basis, PartySetting, SourceKind};
pub use engine::{run_round, simulate, simulate_records, ProtocolEngine, RoundRecord};
pub use secret::combine_secret;
pub use sifting::{sift, x_parity_check, SiftedRounds};
pub use stats::{compute_qber_x, compute_qber_z, OutcomeCounts, ProtocolStats, QberEstimate};
