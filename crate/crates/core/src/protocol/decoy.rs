use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::encoding::SourceKind;
use super::engine::RoundRecord;
use super::stats::{OutcomeCounts, ProtocolStats};
use crate::{Error, Result};

/// Intensity levels (e.g. signal, decoy, vacuum) and their selection probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoyConfig {
    pub levels: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl DecoyConfig {
    pub fn single(mu: f64) -> Self {
        DecoyConfig {
            levels: vec![mu],
            probabilities: vec![1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() || self.levels.len() != self.probabilities.len() {
            return Err(Error::field(
                "decoy",
                "levels and probabilities must be non-empty and of equal length",
            ));
        }
        if let Some(mu) = self.levels.iter().find(|m| !(**m >= 0.0 && m.is_finite())) {
            return Err(Error::field("decoy.levels", format!("intensity {mu} invalid")));
        }
        if self.probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::field("decoy.probabilities", "entries must lie in [0, 1]"));
        }
        let sum: f64 = self.probabilities.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::field(
                "decoy.probabilities",
                format!("sum to {sum}, expected 1"),
            ));
        }
        Ok(())
    }

    /// Draws a level index.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (k, p) in self.probabilities.iter().enumerate() {
            acc += p;
            if u < acc {
                return k;
            }
        }
        self.levels.len() - 1
    }

    pub fn level_of(&self, mu: f64) -> Option<usize> {
        self.levels.iter().position(|&m| m.to_bits() == mu.to_bits())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainRow {
    pub mus: Vec<f64>,
    pub counts: OutcomeCounts,
    /// Conclusive fraction: `(N₊ + N₋) / rounds`.
    pub gain: f64,
}

/// Gains per combination of the parties' intensity levels.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GainTable {
    pub rows: BTreeMap<Vec<usize>, GainRow>,
    /// Rounds whose intensities are not levels of the config, or that are
    /// not coherent-source rounds.
    pub unmatched: u64,
}

impl GainTable {
    fn insert(&mut self, config: &DecoyConfig, mus: &[f64], counts: &OutcomeCounts) {
        let levels: Option<Vec<usize>> = mus.iter().map(|&m| config.level_of(m)).collect();
        let Some(levels) = levels else {
            self.unmatched += counts.total();
            return;
        };
        let row = self.rows.entry(levels).or_insert_with(|| GainRow {
            mus: mus.to_vec(),
            counts: OutcomeCounts::default(),
            gain: 0.0,
        });
        row.counts.merge(counts);
        row.gain = row.counts.conclusive() as f64 / row.counts.total() as f64;
    }

    /// Builds the table from accumulated statistics.
    pub fn from_stats(stats: &ProtocolStats, config: &DecoyConfig) -> Self {
        let mut table = GainTable::default();
        for (bits, counts) in &stats.intensities {
            let mus: Vec<f64> = bits.iter().map(|&b| f64::from_bits(b)).collect();
            table.insert(config, &mus, counts);
        }
        table
    }

    pub fn gain(&self, levels: &[usize]) -> Option<f64> {
        self.rows.get(levels).map(|r| r.gain)
    }
}

/// Conclusive-event fraction per intensity combination. No key-rate bound
/// is derived from the gains.
pub fn decoy_bookkeeping<'a, I>(records: I, config: &DecoyConfig) -> GainTable
where
    I: IntoIterator<Item = &'a RoundRecord>,
{
    let mut table = GainTable::default();
    for r in records {
        if !r.phase_accepted {
            continue;
        }
        if r.settings.iter().any(|s| s.source != SourceKind::Coherent) {
            table.unmatched += 1;
            continue;
        }
        let mus: Vec<f64> = r.settings.iter().map(|s| s.mu).collect();
        let mut one = OutcomeCounts::default();
        one.add(r.outcome);
        table.insert(config, &mus, &one);
    }
    table
}
