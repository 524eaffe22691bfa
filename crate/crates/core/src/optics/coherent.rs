use num_complex::Complex64;

use super::circuit::LinearCircuit;
use super::mode::ModeSpace;
use crate::{Error, Result};

/// Classical amplitudes of a multimode coherent state; `|α_m|²` is the mean
/// photon number in mode `m` per pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentField {
    amps: Vec<Complex64>,
    n_signal: usize,
}

impl CoherentField {
    /// Input field on `space`. `amps` may cover only the signal modes; any
    /// loss-ancilla entry that is supplied must be zero.
    pub fn input(space: &ModeSpace, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() > space.dim() {
            return Err(Error::InvalidInput(format!(
                "{} amplitudes for a {}-mode space",
                amps.len(),
                space.dim()
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite field amplitude".into()));
        }
        if amps.iter().skip(space.n_signal()).any(|a| a.norm() != 0.0) {
            return Err(Error::InvalidInput(
                "loss-ancilla modes cannot carry input amplitude".into(),
            ));
        }
        let mut amps = amps;
        amps.resize(space.dim(), Complex64::new(0.0, 0.0));
        Ok(CoherentField {
            amps,
            n_signal: space.n_signal(),
        })
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    /// Amplitudes of the detected (signal) modes.
    pub fn signal(&self) -> &[Complex64] {
        &self.amps[..self.n_signal]
    }

    pub fn mean_photons(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        CoherentField {
            amps: self.amps.iter().map(|a| a * factor).collect(),
            n_signal: self.n_signal,
        }
    }
}

/// `U · α`. Exact: linear optics maps coherent states to coherent states.
pub fn propagate_coherent(circuit: &LinearCircuit, field: &CoherentField) -> Result<CoherentField> {
    if field.amps.len() != circuit.dim() || field.n_signal != circuit.space().n_signal() {
        return Err(Error::InvalidInput(format!(
            "{}-mode field through a {}-mode circuit",
            field.amps.len(),
            circuit.dim()
        )));
    }
    Ok(CoherentField {
        amps: circuit.apply(&field.amps),
        n_signal: field.n_signal,
    })
}
