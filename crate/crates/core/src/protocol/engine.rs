use std::f64::consts::PI;
use std::ops::Range;
use std::sync::OnceLock;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::encoding::{Basis, PartySetting, SourceKind};
use super::stats::ProtocolStats;
use crate::ghz::{classify, product_state, CoherentInput, GhzAnalyzer, GhzCircuitSpec, GhzOutcome, PhaseMode};
use crate::optics::{
    sample_coherent_detection, sample_fock_detection, DetectionEvent, DetectorModel, SignalDistribution,
};
use crate::rng::RoundRng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round_id: u64,
    /// Preparations as announced after the round; for coherent sources the
    /// phase field holds the phase actually used.
    pub settings: Vec<PartySetting>,
    pub event: DetectionEvent,
    pub outcome: GhzOutcome,
    /// False when phase post-selection discarded the round.
    pub phase_accepted: bool,
    /// All bases equal, outcome conclusive and phase accepted.
    pub sifted: bool,
}

impl RoundRecord {
    pub fn new(
        round_id: u64,
        settings: Vec<PartySetting>,
        event: DetectionEvent,
        outcome: GhzOutcome,
        phase_accepted: bool,
    ) -> Self {
        let mut record = RoundRecord {
            round_id,
            settings,
            event,
            outcome,
            phase_accepted,
            sifted: false,
        };
        record.sifted =
            record.common_basis().is_some() && outcome.is_conclusive() && phase_accepted;
        record
    }

    /// The shared basis when every party used the same one.
    pub fn common_basis(&self) -> Option<Basis> {
        let first = self.settings.first()?.basis;
        self.settings
            .iter()
            .all(|s| s.basis == first)
            .then_some(first)
    }

    pub fn bits(&self) -> Vec<u8> {
        self.settings.iter().map(|s| s.bit).collect()
    }
}

/// Round simulator for a fixed circuit, detector and phase treatment.
///
/// Single-photon detection distributions depend only on the parties'
/// `(basis, bit)` choices and are computed once per combination.
#[derive(Debug)]
pub struct ProtocolEngine {
    analyzer: GhzAnalyzer,
    phase_mode: PhaseMode,
    cache: Vec<OnceLock<SignalDistribution>>,
}

impl ProtocolEngine {
    pub fn new(spec: &GhzCircuitSpec, det: DetectorModel, phase_mode: PhaseMode) -> Result<Self> {
        phase_mode.validate()?;
        let analyzer = GhzAnalyzer::new(spec, det)?;
        let n = spec.n_parties;
        if n > 8 {
            return Err(Error::Capacity { photons: n, cap: 8 });
        }
        let combos = 1usize << (2 * n);
        Ok(ProtocolEngine {
            analyzer,
            phase_mode,
            cache: (0..combos).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn analyzer(&self) -> &GhzAnalyzer {
        &self.analyzer
    }

    pub fn phase_mode(&self) -> PhaseMode {
        self.phase_mode
    }

    pub fn n_parties(&self) -> usize {
        self.analyzer.n_parties()
    }

    fn check(&self, settings: &[PartySetting]) -> Result<SourceKind> {
        if settings.len() != self.n_parties() {
            return Err(Error::InvalidInput(format!(
                "{} party settings for {} parties",
                settings.len(),
                self.n_parties()
            )));
        }
        let kind = settings[0].source;
        if settings.iter().any(|s| s.source != kind) {
            return Err(Error::InvalidInput("parties use different source kinds".into()));
        }
        if let Some(s) = settings.iter().find(|s| s.bit > 1) {
            return Err(Error::InvalidInput(format!("bit value {} is not 0 or 1", s.bit)));
        }
        Ok(kind)
    }

    /// Detection distribution of single photons prepared as `settings`.
    pub fn single_photon_distribution(&self, settings: &[PartySetting]) -> Result<&SignalDistribution> {
        self.check(settings)?;
        let code = settings.iter().enumerate().fold(0usize, |acc, (j, s)| {
            let local = ((s.basis == Basis::X) as usize) << 1 | s.bit as usize;
            acc | local << (2 * j)
        });
        if let Some(d) = self.cache[code].get() {
            return Ok(d);
        }
        let jones: Vec<_> = settings.iter().map(PartySetting::jones).collect();
        let dist = self.analyzer.signal_distribution(&product_state(&jones)?)?;
        Ok(self.cache[code].get_or_init(|| dist))
    }

    /// Simulates one round. The generator must be the round's own substream.
    pub fn run_round(
        &self,
        settings: &[PartySetting],
        round_id: u64,
        rng: &mut RoundRng,
    ) -> Result<RoundRecord> {
        let kind = self.check(settings)?;
        let mut settings = settings.to_vec();
        let (event, accepted) = match kind {
            SourceKind::SinglePhoton => {
                let dist = self.single_photon_distribution(&settings)?;
                (sample_fock_detection(dist, self.analyzer.detector(), rng), true)
            }
            SourceKind::Coherent => {
                if !matches!(self.phase_mode, PhaseMode::Fixed) {
                    for s in settings.iter_mut() {
                        s.phase = rng.random::<f64>() * 2.0 * PI;
                    }
                }
                let phases: Vec<f64> = settings.iter().map(|s| s.phase).collect();
                let inputs: Vec<CoherentInput> = settings
                    .iter()
                    .map(|s| CoherentInput {
                        jones: s.jones(),
                        mu: s.mu,
                        phase: s.phase,
                    })
                    .collect();
                let probs = self.analyzer.coherent_click_probabilities(&inputs, &phases);
                (sample_coherent_detection(&probs, rng), self.phase_mode.accepts(&phases))
            }
        };
        let outcome = classify(&event);
        Ok(RoundRecord::new(round_id, settings, event, outcome, accepted))
    }
}

/// One-shot round simulation; builds the circuit for this call only.
pub fn run_round(
    settings: &[PartySetting],
    spec: &GhzCircuitSpec,
    det: &DetectorModel,
    phase_mode: PhaseMode,
    round_id: u64,
    rng: &mut RoundRng,
) -> Result<RoundRecord> {
    ProtocolEngine::new(spec, *det, phase_mode)?.run_round(settings, round_id, rng)
}

const BATCH: u64 = 4096;

fn batches(ids: Range<u64>) -> Vec<Range<u64>> {
    let mut out = Vec::new();
    let mut start = ids.start;
    while start < ids.end {
        let end = (start + BATCH).min(ids.end);
        out.push(start..end);
        start = end;
    }
    out
}

fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers <= 1 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfiguration(format!("worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Runs `round(id)` for every id and accumulates the statistics. Totals are
/// independent of `workers` since each round owns its random stream and
/// count merging commutes.
pub fn simulate<F>(ids: Range<u64>, workers: usize, round: F) -> Result<ProtocolStats>
where
    F: Fn(u64) -> Result<RoundRecord> + Sync,
{
    let run_batch = |b: Range<u64>| -> Result<ProtocolStats> {
        let mut stats = ProtocolStats::default();
        for id in b {
            stats.record(&round(id)?);
        }
        Ok(stats)
    };
    let parts = batches(ids);
    let results: Vec<Result<ProtocolStats>> = if workers <= 1 {
        parts.into_iter().map(run_batch).collect()
    } else {
        with_workers(workers, || parts.into_par_iter().map(run_batch).collect())?
    };
    let mut total = ProtocolStats::default();
    for r in results {
        total.merge(&r?);
    }
    Ok(total)
}

/// Like [`simulate`] but keeps every per-round result, in round-id order.
pub fn simulate_records<T, F>(ids: Range<u64>, workers: usize, round: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    if workers <= 1 {
        return ids.map(round).collect();
    }
    with_workers(workers, || ids.into_par_iter().map(&round).collect())?
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::round_rng;

    fn sp(basis: Basis, bits: &[u8]) -> Vec<PartySetting> {
        bits.iter().map(|&b| PartySetting::single_photon(basis, b)).collect()
    }

    fn engine() -> ProtocolEngine {
        ProtocolEngine::new(&GhzCircuitSpec::ideal(3), DetectorModel::ideal(), PhaseMode::Randomized)
            .unwrap()
    }

    #[test]
    fn all_h_round_is_conclusive() {
        let e = engine();
        for id in 0..200 {
            let r = e.run_round(&sp(Basis::Z, &[0, 0, 0]), id, &mut round_rng(9, id)).unwrap();
            assert!(r.outcome.is_conclusive());
            assert!(r.sifted);
        }
    }

    #[test]
    fn unequal_z_round_is_inconclusive() {
        let e = engine();
        for id in 0..200 {
            let r = e.run_round(&sp(Basis::Z, &[0, 1, 0]), id, &mut round_rng(9, id)).unwrap();
            assert_eq!(r.outcome, GhzOutcome::Inconclusive);
            assert!(!r.sifted);
        }
    }

    #[test]
    fn mixed_bases_never_sift() {
        let e = engine();
        let mut settings = sp(Basis::Z, &[0, 0, 0]);
        settings[2].basis = Basis::X;
        for id in 0..200 {
            let r = e.run_round(&settings, id, &mut round_rng(2, id)).unwrap();
            assert!(!r.sifted);
        }
    }

    #[test]
    fn rejects_malformed_settings() {
        let e = engine();
        let mut rng = round_rng(0, 0);
        assert!(e.run_round(&sp(Basis::Z, &[0, 0]), 0, &mut rng).is_err());
        let mut s = sp(Basis::Z, &[0, 0, 0]);
        s[1] = PartySetting::coherent(Basis::Z, 0, 0.1, 0.0);
        assert!(e.run_round(&s, 0, &mut rng).is_err());
    }

    #[test]
    fn coherent_phases_are_announced() {
        let e = engine();
        let s: Vec<_> = (0..3).map(|_| PartySetting::coherent(Basis::X, 0, 0.1, 0.0)).collect();
        let r = e.run_round(&s, 5, &mut round_rng(1, 5)).unwrap();
        assert!(r.settings.iter().all(|p| p.phase != 0.0));
        let again = e.run_round(&s, 5, &mut round_rng(1, 5)).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn worker_count_does_not_change_totals() {
        let e = engine();
        let round = |id: u64| {
            let mut rng = round_rng(77, id);
            let bits: Vec<u8> = (0..3).map(|_| rng.random_range(0..2u8)).collect();
            e.run_round(&sp(Basis::X, &bits), id, &mut rng)
        };
        let serial = simulate(0..20_000, 1, round).unwrap();
        let parallel = simulate(0..20_000, 4, round).unwrap();
        assert_eq!(serial, parallel);
        let recs1 = simulate_records(0..5000, 1, round).unwrap();
        let recs3 = simulate_records(0..5000, 3, round).unwrap();
        assert_eq!(recs1, recs3);
    }
}
