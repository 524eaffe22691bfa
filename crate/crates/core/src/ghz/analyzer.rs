use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::circuit::{GhzCircuitSpec, LossModel};
use super::outcome::{outcome_from_click_probabilities, OutcomeDistribution};
use super::states::Jones;
use crate::optics::{
    propagate_fock, DetectorModel, FockState, LinearCircuit, SignalDistribution,
};
use crate::rng::round_rng;
use crate::{Error, Result};

/// One party's weak coherent pulse: polarization, mean photon number and
/// global optical phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentInput {
    pub jones: Jones,
    pub mu: f64,
    pub phase: f64,
}

/// Treatment of the parties' global pulse phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PhaseMode {
    /// Use the phases carried by the inputs.
    Fixed,
    /// Independent uniform phases.
    Randomized,
    /// Uniform phases, conditioned on every party's phase lying within
    /// `window` of party 0's.
    PostSelected { window: f64 },
}

impl PhaseMode {
    pub fn validate(&self) -> Result<()> {
        if let PhaseMode::PostSelected { window } = *self {
            if !(window > 0.0 && window <= PI) {
                return Err(Error::field(
                    "phase_window",
                    format!("{window} outside (0, π]"),
                ));
            }
        }
        Ok(())
    }

    /// Whether a round with the given announced phases survives post-selection.
    pub fn accepts(&self, phases: &[f64]) -> bool {
        match *self {
            PhaseMode::PostSelected { window } => phases
                .iter()
                .skip(1)
                .all(|&p| wrapped_distance(p, phases[0]) < window),
            _ => true,
        }
    }
}

fn wrapped_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseIntegration {
    /// Product midpoint rule with `points` nodes per party. Only relative
    /// phases matter, so party 0 is pinned and `points^(N−1)` nodes are used.
    Quadrature { points: usize },
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for PhaseIntegration {
    fn default() -> Self {
        PhaseIntegration::Quadrature { points: 16 }
    }
}

/// Phase-averaged outcome probabilities with their standard errors (zero for
/// quadrature).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseAverage {
    pub mean: OutcomeDistribution,
    pub stderr: OutcomeDistribution,
}

/// Precomputed ring circuit and detector, shared by every evaluation.
#[derive(Debug, Clone)]
pub struct GhzAnalyzer {
    spec: GhzCircuitSpec,
    det: DetectorModel,
    dilated: LinearCircuit,
    direct: LinearCircuit,
}

impl GhzAnalyzer {
    pub fn new(spec: &GhzCircuitSpec, det: DetectorModel) -> Result<Self> {
        Ok(GhzAnalyzer {
            spec: spec.clone(),
            det,
            dilated: spec.build(LossModel::Dilated)?,
            direct: spec.build(LossModel::Direct)?,
        })
    }

    pub fn spec(&self) -> &GhzCircuitSpec {
        &self.spec
    }

    pub fn detector(&self) -> &DetectorModel {
        &self.det
    }

    pub fn n_parties(&self) -> usize {
        self.spec.n_parties
    }

    pub fn dilated_circuit(&self) -> &LinearCircuit {
        &self.dilated
    }

    pub fn direct_circuit(&self) -> &LinearCircuit {
        &self.direct
    }

    /// Photon-number distribution at the detectors for a Fock input on the
    /// source modes.
    pub fn signal_distribution(&self, input: &FockState) -> Result<SignalDistribution> {
        if input.dim() != 2 * self.n_parties() {
            return Err(Error::InvalidInput(format!(
                "input covers {} modes, expected the {} source modes",
                input.dim(),
                2 * self.n_parties()
            )));
        }
        let out = propagate_fock(&self.dilated, input)?;
        Ok(SignalDistribution::from_state(&out, 2 * self.n_parties()))
    }

    pub fn fock_outcomes(&self, input: &FockState) -> Result<OutcomeDistribution> {
        let dist = self.signal_distribution(input)?;
        let mut acc = OutcomeDistribution::default();
        for (occ, weight) in dist.entries() {
            let probs: Vec<f64> = occ.iter().map(|&n| self.det.click_given_photons(n)).collect();
            acc.add_scaled(&outcome_from_click_probabilities(&probs), *weight);
        }
        Ok(acc)
    }

    /// Detector click probabilities for coherent inputs with the given
    /// global phases (overriding each input's own phase).
    pub fn coherent_click_probabilities(&self, inputs: &[CoherentInput], phases: &[f64]) -> Vec<f64> {
        let amps: Vec<Complex64> = inputs
            .iter()
            .zip(phases)
            .flat_map(|(inp, &psi)| {
                let a = Complex64::from_polar(inp.mu.sqrt(), psi);
                [a * inp.jones[0], a * inp.jones[1]]
            })
            .collect();
        self.direct
            .apply(&amps)
            .iter()
            .map(|b| self.det.click_given_mean(b.norm_sqr()))
            .collect()
    }

    pub fn coherent_outcomes_at(&self, inputs: &[CoherentInput], phases: &[f64]) -> OutcomeDistribution {
        outcome_from_click_probabilities(&self.coherent_click_probabilities(inputs, phases))
    }

    fn check_inputs(&self, inputs: &[CoherentInput]) -> Result<()> {
        if inputs.len() != self.n_parties() {
            return Err(Error::InvalidInput(format!(
                "{} pulse settings for {} parties",
                inputs.len(),
                self.n_parties()
            )));
        }
        if let Some(bad) = inputs.iter().find(|i| !(i.mu >= 0.0 && i.mu.is_finite())) {
            return Err(Error::InvalidInput(format!("mean photon number {} invalid", bad.mu)));
        }
        Ok(())
    }

    pub fn coherent_outcomes(
        &self,
        inputs: &[CoherentInput],
        mode: PhaseMode,
        integration: PhaseIntegration,
    ) -> Result<PhaseAverage> {
        self.check_inputs(inputs)?;
        mode.validate()?;
        let n = self.n_parties();
        let zero = OutcomeDistribution::default();
        let span = match mode {
            PhaseMode::Fixed => {
                let phases: Vec<f64> = inputs.iter().map(|i| i.phase).collect();
                return Ok(PhaseAverage {
                    mean: self.coherent_outcomes_at(inputs, &phases),
                    stderr: zero,
                });
            }
            PhaseMode::Randomized => None,
            PhaseMode::PostSelected { window } => Some(window),
        };
        match integration {
            PhaseIntegration::Quadrature { points } => {
                if points == 0 {
                    return Err(Error::InvalidInput("quadrature needs at least one node".into()));
                }
                // periodic integrand: equispaced nodes; window: Gauss-Legendre
                let (nodes, weights): (Vec<f64>, Vec<f64>) = match span {
                    None => (0..points)
                        .map(|k| (2.0 * PI * k as f64 / points as f64, 1.0 / points as f64))
                        .unzip(),
                    Some(w) => gauss_legendre(points)
                        .into_iter()
                        .map(|(x, wt)| (w * x, wt / 2.0))
                        .unzip(),
                };
                let total = points.pow((n - 1) as u32);
                let mut acc = OutcomeDistribution::default();
                let mut phases = vec![0.0; n];
                for flat in 0..total {
                    let mut rest = flat;
                    let mut weight = 1.0;
                    for p in phases.iter_mut().skip(1) {
                        let k = rest % points;
                        *p = nodes[k];
                        weight *= weights[k];
                        rest /= points;
                    }
                    acc.add_scaled(&self.coherent_outcomes_at(inputs, &phases), weight);
                }
                Ok(PhaseAverage {
                    mean: acc,
                    stderr: zero,
                })
            }
            PhaseIntegration::MonteCarlo { samples, seed } => {
                if samples < 2 {
                    return Err(Error::InvalidInput("Monte Carlo needs at least two samples".into()));
                }
                let mut rng = round_rng(seed, 0);
                let mut sum = OutcomeDistribution::default();
                let mut sum_sq = OutcomeDistribution::default();
                let mut phases = vec![0.0; n];
                for _ in 0..samples {
                    let base = rng.random::<f64>() * 2.0 * PI;
                    phases[0] = base;
                    for p in phases.iter_mut().skip(1) {
                        *p = match span {
                            None => rng.random::<f64>() * 2.0 * PI,
                            Some(w) => base + (2.0 * rng.random::<f64>() - 1.0) * w,
                        };
                    }
                    let d = self.coherent_outcomes_at(inputs, &phases);
                    sum.add_scaled(&d, 1.0);
                    sum_sq.plus += d.plus * d.plus;
                    sum_sq.minus += d.minus * d.minus;
                    sum_sq.inconclusive += d.inconclusive * d.inconclusive;
                }
                let s = samples as f64;
                let mean = sum.scaled(1.0 / s);
                let se = |m: f64, sq: f64| ((sq / s - m * m).max(0.0) / (s - 1.0)).sqrt();
                Ok(PhaseAverage {
                    mean,
                    stderr: OutcomeDistribution {
                        plus: se(mean.plus, sum_sq.plus),
                        minus: se(mean.minus, sum_sq.minus),
                        inconclusive: se(mean.inconclusive, sum_sq.inconclusive),
                    },
                })
            }
        }
    }
}

/// Gauss-Legendre nodes and weights on `[−1, 1]` (weights sum to 2).
fn gauss_legendre(points: usize) -> Vec<(f64, f64)> {
    let n = points;
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                // three-term recurrence for P_n and its derivative
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    (p0, p1) = (p1, ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf);
                }
                let pn = if n == 1 { x } else { p1 };
                let pn1 = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
                let step = pn / dp;
                x -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Exact outcome probabilities for a Fock input on the source modes.
pub fn outcome_distribution_fock(
    input: &FockState,
    spec: &GhzCircuitSpec,
    det: &DetectorModel,
) -> Result<OutcomeDistribution> {
    GhzAnalyzer::new(spec, *det)?.fock_outcomes(input)
}

/// Outcome probabilities for weak coherent pulses, phase-averaged by the
/// default 16-node quadrature when the phases are not fixed.
pub fn outcome_distribution_coherent(
    inputs: &[CoherentInput],
    spec: &GhzCircuitSpec,
    det: &DetectorModel,
    mode: PhaseMode,
) -> Result<OutcomeDistribution> {
    outcome_distribution_coherent_with(inputs, spec, det, mode, PhaseIntegration::default())
        .map(|avg| avg.mean)
}

pub fn outcome_distribution_coherent_with(
    inputs: &[CoherentInput],
    spec: &GhzCircuitSpec,
    det: &DetectorModel,
    mode: PhaseMode,
    integration: PhaseIntegration,
) -> Result<PhaseAverage> {
    GhzAnalyzer::new(spec, *det)?.coherent_outcomes(inputs, mode, integration)
}
