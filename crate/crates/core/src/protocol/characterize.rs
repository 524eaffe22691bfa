use rand::Rng;
use serde::{Deserialize, Serialize};

use super::decoy::DecoyConfig;
use super::encoding::{Basis, PartySetting, SourceKind};
use super::engine::{simulate, ProtocolEngine};
use super::stats::{parity, ProtocolStats};
use crate::ghz::{CoherentInput, GhzOutcome, OutcomeDistribution, PhaseIntegration};
use crate::rng::{round_rng, RoundRng};
use crate::{Error, Result};

/// Every fixed input pattern of the characterization run: all `2^N` Z-basis
/// bit strings, then all `2^N` X-basis strings, bit of party 0 first.
pub fn characterization_patterns(n: usize) -> Vec<(Basis, Vec<u8>)> {
    let mut out = Vec::with_capacity(2 << n);
    for basis in [Basis::Z, Basis::X] {
        for code in 0..(1u32 << n) {
            let bits = (0..n).map(|j| (code >> (n - 1 - j) & 1) as u8).collect();
            out.push((basis, bits));
        }
    }
    out
}

fn settings_for(source: SourceKind, mu: f64, basis: Basis, bits: &[u8]) -> Vec<PartySetting> {
    bits.iter()
        .map(|&b| match source {
            SourceKind::SinglePhoton => PartySetting::single_photon(basis, b),
            SourceKind::Coherent => PartySetting::coherent(basis, b, mu, 0.0),
        })
        .collect()
}

/// Runs `rounds_per_pattern` rounds of each characterization pattern. Round
/// ids are `pattern_index · rounds_per_pattern + r`.
pub fn run_characterization(
    engine: &ProtocolEngine,
    source: SourceKind,
    mu: f64,
    rounds_per_pattern: u64,
    seed: u64,
    workers: usize,
) -> Result<ProtocolStats> {
    let patterns = characterization_patterns(engine.n_parties());
    let settings: Vec<Vec<PartySetting>> = patterns
        .iter()
        .map(|(b, bits)| settings_for(source, mu, *b, bits))
        .collect();
    let total = rounds_per_pattern * patterns.len() as u64;
    simulate(0..total, workers, |id| {
        let pattern = (id / rounds_per_pattern) as usize;
        engine.run_round(&settings[pattern], id, &mut round_rng(seed, id))
    })
}

/// Exact outcome distribution of one characterization pattern.
pub fn exact_pattern_distribution(
    engine: &ProtocolEngine,
    source: SourceKind,
    mu: f64,
    basis: Basis,
    bits: &[u8],
    integration: PhaseIntegration,
) -> Result<OutcomeDistribution> {
    let settings = settings_for(source, mu, basis, bits);
    match source {
        SourceKind::SinglePhoton => {
            let jones: Vec<_> = settings.iter().map(PartySetting::jones).collect();
            engine.analyzer().fock_outcomes(&crate::ghz::product_state(&jones)?)
        }
        SourceKind::Coherent => {
            let inputs: Vec<CoherentInput> = settings
                .iter()
                .map(|s| CoherentInput { jones: s.jones(), mu: s.mu, phase: s.phase })
                .collect();
            let avg = engine
                .analyzer()
                .coherent_outcomes(&inputs, engine.phase_mode(), integration)?;
            Ok(avg.mean)
        }
    }
}

/// QBERs implied by the exact per-pattern distributions, with every pattern
/// equally likely.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectedQber {
    pub q_z: Option<f64>,
    pub q_x: Option<f64>,
    /// Largest conclusive probability among Z patterns with unequal bits.
    pub max_unequal_z_conclusive: f64,
    /// Mean conclusive probability over X patterns.
    pub x_conclusive: f64,
}

pub fn expected_qber(
    engine: &ProtocolEngine,
    source: SourceKind,
    mu: f64,
    integration: PhaseIntegration,
) -> Result<ExpectedQber> {
    let (mut z_err, mut z_all, mut x_err, mut x_all) = (0.0, 0.0, 0.0, 0.0);
    let mut max_unequal: f64 = 0.0;
    let patterns = characterization_patterns(engine.n_parties());
    let n_x = patterns.iter().filter(|(b, _)| *b == Basis::X).count() as f64;
    for (basis, bits) in &patterns {
        let d = exact_pattern_distribution(engine, source, mu, *basis, bits, integration)?;
        match basis {
            Basis::Z => {
                z_all += d.conclusive();
                if bits.iter().any(|&b| b != bits[0]) {
                    z_err += d.conclusive();
                    max_unequal = max_unequal.max(d.conclusive());
                }
            }
            Basis::X => {
                x_all += d.conclusive();
                x_err += match parity(bits) {
                    0 => d.get(GhzOutcome::Minus),
                    _ => d.get(GhzOutcome::Plus),
                };
            }
        }
    }
    let ratio = |e: f64, a: f64| (a > 0.0).then(|| e / a);
    Ok(ExpectedQber {
        q_z: ratio(z_err, z_all),
        q_x: ratio(x_err, x_all),
        max_unequal_z_conclusive: max_unequal,
        x_conclusive: x_all / n_x,
    })
}

/// Random preparations for key-generation rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingsSampler {
    pub source: SourceKind,
    pub basis_prob_z: f64,
    pub decoy: DecoyConfig,
}

impl SettingsSampler {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.basis_prob_z) {
            return Err(Error::field(
                "basis_prob_z",
                format!("{} outside [0, 1]", self.basis_prob_z),
            ));
        }
        self.decoy.validate()
    }

    /// Draws basis, bit and intensity for each party in turn.
    pub fn draw(&self, n: usize, rng: &mut RoundRng) -> Vec<PartySetting> {
        (0..n)
            .map(|_| {
                let basis = if rng.random::<f64>() < self.basis_prob_z {
                    Basis::Z
                } else {
                    Basis::X
                };
                let bit = rng.random_range(0..2u8);
                match self.source {
                    SourceKind::SinglePhoton => PartySetting::single_photon(basis, bit),
                    SourceKind::Coherent => {
                        let level = self.decoy.sample(rng);
                        PartySetting::coherent(basis, bit, self.decoy.levels[level], 0.0)
                    }
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ghz::{GhzCircuitSpec, PhaseMode};
    use crate::optics::DetectorModel;

    #[test]
    fn pattern_enumeration() {
        let p = characterization_patterns(3);
        assert_eq!(p.len(), 16);
        assert_eq!(p[1], (Basis::Z, vec![0, 0, 1]));
        assert_eq!(p[8], (Basis::X, vec![0, 0, 0]));
        assert_eq!(p[15], (Basis::X, vec![1, 1, 1]));
    }

    #[test]
    fn single_photon_expectations() {
        let engine =
            ProtocolEngine::new(&GhzCircuitSpec::ideal(3), DetectorModel::ideal(), PhaseMode::Fixed).unwrap();
        let e = expected_qber(&engine, SourceKind::SinglePhoton, 0.0, PhaseIntegration::default()).unwrap();
        assert_eq!(e.q_z, Some(0.0));
        assert!(e.q_x.unwrap().abs() < 1e-12);
        assert!(e.max_unequal_z_conclusive < 1e-12);
        assert!((e.x_conclusive - 0.25).abs() < 1e-12);
    }

    #[test]
    fn vacuum_characterization_has_no_conclusive_counts() {
        let engine =
            ProtocolEngine::new(&GhzCircuitSpec::ideal(3), DetectorModel::ideal(), PhaseMode::Randomized)
                .unwrap();
        let stats = run_characterization(&engine, SourceKind::Coherent, 0.0, 50, 1, 1).unwrap();
        assert_eq!(stats.rounds, 800);
        assert!(stats.patterns.values().all(|c| c.conclusive() == 0));
    }
}
