//! Distributed GHZ-state measurement.
//!
//! Every party splits its pulse by polarization, keeps the `H` amplitude in
//! a local delay line, and forwards the `V` amplitude over the quantum
//! channel to the next party on the ring. Each party then recombines the
//! returning `V` amplitude with its own `H`, rotates with a half-wave plate
//! and detects in the `H/V` basis. A round is conclusive only when every
//! party records exactly one click; the parity of `V` clicks gives the sign.

mod analyzer;
mod circuit;
mod outcome;
mod states;

pub use analyzer::{
    outcome_distribution_coherent, outcome_distribution_coherent_with, outcome_distribution_fock,
    CoherentInput, GhzAnalyzer, PhaseAverage, PhaseIntegration, PhaseMode,
};
pub use circuit::{build_ghz_circuit, global_phase, GhzCircuitSpec, LossModel, RingDirection};
pub use outcome::{classify, outcome_from_click_probabilities, GhzOutcome, OutcomeDistribution};
pub use states::{basis_state, ghz_state, product_state, Jones};
