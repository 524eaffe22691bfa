//! Simulation and analysis toolkit for equitable multiparty quantum
//! communication built on a GHZ-state measurement that is shared among all
//! parties instead of being performed by a single measuring station.
//!
//! The crate is layered bottom-up:
//!
//! - [`optics`]: mode bookkeeping, linear-optical elements, exact propagation
//!   of few-photon Fock states and coherent fields, threshold detectors.
//! - [`ghz`]: the ring-exchange GHZ-measurement circuit for `N` parties and
//!   the GHZ⁺ / GHZ⁻ / inconclusive classifier with exact outcome distributions.
//! - [`protocol`]: BB84 encoding, per-round simulation, sifting, QBER,
//!   decoy bookkeeping and the secret-sharing composition.
//! - [`adversary`]: the colluding-measurer attack on the localized topology,
//!   information-imbalance metrics and channel-loss tampering sweeps.
//! - [`harness`]: experiment configuration, seeded (optionally parallel)
//!   execution, result tables and CSV / JSON-lines emission.

pub mod adversary;
pub mod error;
pub mod ghz;
pub mod harness;
pub mod optics;
pub mod protocol;
pub mod rng;

pub use error::{Error, Result};

/// Absolute threshold below which an amplitude is treated as zero.
pub const ZERO_TOL: f64 = 1e-12;
