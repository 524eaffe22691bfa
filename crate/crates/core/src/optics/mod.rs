//! Linear-optics primitives: modes, circuits, Fock and coherent propagation,
//! threshold detection.

mod circuit;
mod coherent;
mod detector;
mod fock;
mod mode;

pub use circuit::{
    compose, element_attenuator, element_hwp, element_permutation, element_phase,
    element_rotator, LinearCircuit,
};
pub use coherent::{propagate_coherent, CoherentField};
pub use detector::{
    click_probabilities, event_distribution, sample_coherent_detection, sample_fock_detection,
    ClickSet, DetectionEvent, DetectorModel, SignalDistribution,
};
pub use fock::{propagate_fock, FockState, Occupation, DEFAULT_PHOTON_CAP};
pub use mode::{build_mode_space, ModeId, ModeKind, ModeSpace, Polarization};

pub use num_complex::Complex64;
