use std::f64::consts::{FRAC_PI_8, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::optics::{
    build_mode_space, element_attenuator, element_hwp, element_permutation, element_phase,
    element_rotator, LinearCircuit, ModeId, ModeSpace, Polarization,
};
use crate::{Error, Result};

/// Direction in which the `V` amplitude travels around the ring.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RingDirection {
    /// party `j` → party `j + 1 mod N`
    #[default]
    Forward,
    /// party `j` → party `j − 1 mod N`
    Backward,
}

impl RingDirection {
    pub fn next(self, party: usize, n: usize) -> usize {
        match self {
            RingDirection::Forward => (party + 1) % n,
            RingDirection::Backward => (party + n - 1) % n,
        }
    }
}

/// How segment loss enters the circuit matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossModel {
    /// Unitary dilation; one loss ancilla per segment. Required for Fock states.
    Dilated,
    /// Sub-unitary `√η` scaling on the signal modes. Exact for coherent fields.
    Direct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GhzCircuitSpec {
    pub n_parties: usize,
    /// Delay-line (kept `H` amplitude) phase per party.
    pub theta: Vec<f64>,
    /// Quantum-channel (forwarded `V` amplitude) phase per sending party.
    pub phi: Vec<f64>,
    pub eta_delay: Vec<f64>,
    pub eta_channel: Vec<f64>,
    pub hwp_angle: f64,
    /// Polarization rotation applied to every prepared pulse before the
    /// first PBS; zero for a perfectly aligned source.
    pub misalignment: f64,
    pub ring: RingDirection,
}

impl GhzCircuitSpec {
    /// Lossless, phase-stabilized (`Φ = 0`) circuit with Hadamard wave plates.
    pub fn ideal(n_parties: usize) -> Self {
        GhzCircuitSpec {
            n_parties,
            theta: vec![0.0; n_parties],
            phi: vec![0.0; n_parties],
            eta_delay: vec![1.0; n_parties],
            eta_channel: vec![1.0; n_parties],
            hwp_angle: FRAC_PI_8,
            misalignment: 0.0,
            ring: RingDirection::Forward,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_parties < 2 {
            return Err(Error::field(
                "n_parties",
                format!("at least 2 parties required, got {}", self.n_parties),
            ));
        }
        let lists: [(&str, &Vec<f64>); 4] = [
            ("theta", &self.theta),
            ("phi", &self.phi),
            ("eta_delay", &self.eta_delay),
            ("eta_channel", &self.eta_channel),
        ];
        for (name, list) in lists {
            if list.len() != self.n_parties {
                return Err(Error::field(
                    name,
                    format!("expected {} entries, got {}", self.n_parties, list.len()),
                ));
            }
            if let Some(x) = list.iter().find(|x| !x.is_finite()) {
                return Err(Error::field(name, format!("{x} is not finite")));
            }
        }
        for (name, list) in [("eta_delay", &self.eta_delay), ("eta_channel", &self.eta_channel)] {
            if let Some(x) = list.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::field(name, format!("{x} outside [0, 1]")));
            }
        }
        if !self.hwp_angle.is_finite() {
            return Err(Error::field("hwp_angle", "not finite"));
        }
        if !self.misalignment.is_finite() {
            return Err(Error::field("misalignment", "not finite"));
        }
        Ok(())
    }

    /// Copy with the channel phase of party 0 shifted so that the global
    /// interferometer phase equals `target`.
    pub fn with_global_phase(&self, target: f64) -> Self {
        let mut spec = self.clone();
        let current: f64 = self.phi.iter().sum::<f64>() - self.theta.iter().sum::<f64>();
        spec.phi[0] += target - current;
        spec
    }

    /// Copy with every delay-line and channel transmittance multiplied by `factor`.
    pub fn with_common_loss(&self, factor: f64) -> Self {
        let mut spec = self.clone();
        spec.eta_delay.iter_mut().for_each(|e| *e *= factor);
        spec.eta_channel.iter_mut().for_each(|e| *e *= factor);
        spec
    }
}

/// Interferometer phase `Φ = Σ_j (φ_j − θ_j)` reduced into `(−π, π]`.
pub fn global_phase(spec: &GhzCircuitSpec) -> f64 {
    let raw: f64 = spec
        .phi
        .iter()
        .zip(&spec.theta)
        .map(|(phi, theta)| phi - theta)
        .sum();
    let mut r = raw.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    // rem_euclid can return values within an ulp of 2π
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

fn scale_element(space: &ModeSpace, idx: usize, eta: f64) -> Result<LinearCircuit> {
    let mut m = DMatrix::identity(space.dim(), space.dim());
    m[(idx, idx)] = Complex64::new(eta.sqrt(), 0.0);
    LinearCircuit::from_matrix(space, m)
}

/// Builds the ring-exchange measurement circuit (dilated loss model).
pub fn build_ghz_circuit(spec: &GhzCircuitSpec) -> Result<LinearCircuit> {
    spec.build(LossModel::Dilated)
}

impl GhzCircuitSpec {
    pub fn mode_space(&self, loss: LossModel) -> Result<ModeSpace> {
        build_mode_space(self.n_parties, loss == LossModel::Dilated)
    }

    /// Stages, in order: source misalignment, per-segment phase and loss,
    /// ring routing of `V` amplitudes, recombination (pure relabeling of the
    /// output ports) and one half-wave plate per party. Output signal modes
    /// are the detectors `(party, H)` and `(party, V)`.
    pub fn build(&self, loss: LossModel) -> Result<LinearCircuit> {
        self.validate()?;
        let n = self.n_parties;
        let space = self.mode_space(loss)?;
        let mut circuit = LinearCircuit::identity(&space);

        if self.misalignment != 0.0 {
            for j in 0..n {
                circuit = circuit.then(&element_rotator(&space, self.misalignment, j)?)?;
            }
        }

        for j in 0..n {
            let h = ModeId::signal(j, Polarization::H);
            let v = ModeId::signal(j, Polarization::V);
            circuit = circuit.then(&element_phase(&space, self.theta[j], h)?)?;
            circuit = circuit.then(&element_phase(&space, self.phi[j], v)?)?;
            for (mode, eta) in [(h, self.eta_delay[j]), (v, self.eta_channel[j])] {
                if eta == 1.0 {
                    continue;
                }
                let stage = match loss {
                    LossModel::Dilated => {
                        element_attenuator(&space, eta, mode, ModeId::ancilla(j, mode.pol))?
                    }
                    LossModel::Direct => scale_element(&space, space.index_of(mode)?, eta)?,
                };
                circuit = circuit.then(&stage)?;
            }
        }

        let mut targets: Vec<usize> = (0..space.dim()).collect();
        for j in 0..n {
            let to = self.ring.next(j, n);
            targets[space.signal_index(j, Polarization::V)] = space.signal_index(to, Polarization::V);
        }
        circuit = circuit.then(&element_permutation(&space, &targets)?)?;

        for j in 0..n {
            circuit = circuit.then(&element_hwp(&space, self.hwp_angle, j)?)?;
        }
        Ok(circuit)
    }
}
