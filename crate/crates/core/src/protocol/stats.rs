use std::collections::BTreeMap;

use serde::Serialize;

use super::encoding::{Basis, SourceKind};
use super::engine::RoundRecord;
use crate::ghz::GhzOutcome;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OutcomeCounts {
    pub plus: u64,
    pub minus: u64,
    pub inconclusive: u64,
}

impl OutcomeCounts {
    pub fn add(&mut self, outcome: GhzOutcome) {
        match outcome {
            GhzOutcome::Plus => self.plus += 1,
            GhzOutcome::Minus => self.minus += 1,
            GhzOutcome::Inconclusive => self.inconclusive += 1,
        }
    }

    pub fn merge(&mut self, other: &OutcomeCounts) {
        self.plus += other.plus;
        self.minus += other.minus;
        self.inconclusive += other.inconclusive;
    }

    pub fn get(&self, outcome: GhzOutcome) -> u64 {
        match outcome {
            GhzOutcome::Plus => self.plus,
            GhzOutcome::Minus => self.minus,
            GhzOutcome::Inconclusive => self.inconclusive,
        }
    }

    pub fn conclusive(&self) -> u64 {
        self.plus + self.minus
    }

    pub fn total(&self) -> u64 {
        self.plus + self.minus + self.inconclusive
    }

    /// Conclusive outcomes whose sign disagrees with the given bit parity.
    pub fn wrong_sign(&self, parity: u8) -> u64 {
        if parity.is_multiple_of(2) {
            self.minus
        } else {
            self.plus
        }
    }
}

/// Error fraction with its binomial (Wald) standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QberEstimate {
    pub value: f64,
    pub errors: u64,
    pub conclusive: u64,
    pub stderr: f64,
}

impl QberEstimate {
    pub fn new(errors: u64, conclusive: u64, what: &str) -> Result<Self> {
        if conclusive == 0 {
            return Err(Error::UndefinedStatistic(format!(
                "{what}: no conclusive rounds"
            )));
        }
        let n = conclusive as f64;
        let value = errors as f64 / n;
        Ok(QberEstimate {
            value,
            errors,
            conclusive,
            stderr: (value * (1.0 - value) / n).sqrt(),
        })
    }
}

/// Order-independent accumulation of round outcomes.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ProtocolStats {
    /// Same-basis rounds keyed by basis and input bit string.
    pub patterns: BTreeMap<(Basis, Vec<u8>), OutcomeCounts>,
    pub mixed_basis: OutcomeCounts,
    pub phase_rejected: u64,
    /// Coherent-source outcomes keyed by the parties' intensities (`f64::to_bits`).
    pub intensities: BTreeMap<Vec<u64>, OutcomeCounts>,
    pub rounds: u64,
}

impl ProtocolStats {
    pub fn record(&mut self, r: &RoundRecord) {
        self.rounds += 1;
        if !r.phase_accepted {
            self.phase_rejected += 1;
            return;
        }
        if r.settings.iter().all(|s| s.source == SourceKind::Coherent) {
            let key = r.settings.iter().map(|s| s.mu.to_bits()).collect();
            self.intensities.entry(key).or_default().add(r.outcome);
        }
        match r.common_basis() {
            Some(b) => self.patterns.entry((b, r.bits())).or_default().add(r.outcome),
            None => self.mixed_basis.add(r.outcome),
        }
    }

    pub fn merge(&mut self, other: &ProtocolStats) {
        for (k, v) in &other.patterns {
            self.patterns.entry(k.clone()).or_default().merge(v);
        }
        for (k, v) in &other.intensities {
            self.intensities.entry(k.clone()).or_default().merge(v);
        }
        self.mixed_basis.merge(&other.mixed_basis);
        self.phase_rejected += other.phase_rejected;
        self.rounds += other.rounds;
    }

    pub fn pattern(&self, basis: Basis, bits: &[u8]) -> OutcomeCounts {
        self.patterns
            .get(&(basis, bits.to_vec()))
            .copied()
            .unwrap_or_default()
    }

    /// Summed counts over every pattern of one basis.
    pub fn basis_totals(&self, basis: Basis) -> OutcomeCounts {
        let mut acc = OutcomeCounts::default();
        for ((b, _), c) in &self.patterns {
            if *b == basis {
                acc.merge(c);
            }
        }
        acc
    }

    /// `Q_Z = 1 − (N_{0…0} + N_{1…1}) / Σ N`, over conclusive Z-basis counts.
    pub fn qber_z(&self) -> Result<QberEstimate> {
        let (mut good, mut all) = (0u64, 0u64);
        for ((b, bits), c) in &self.patterns {
            if *b != Basis::Z {
                continue;
            }
            all += c.conclusive();
            if bits.iter().all(|&x| x == bits[0]) {
                good += c.conclusive();
            }
        }
        QberEstimate::new(all - good, all, "Q_Z")
    }

    /// `Q_X`: wrong-sign fraction (GHZ⁻ for even-parity inputs, GHZ⁺ for
    /// odd), count-weighted over all X-basis patterns.
    pub fn qber_x(&self) -> Result<QberEstimate> {
        let (mut wrong, mut all) = (0u64, 0u64);
        for ((b, bits), c) in &self.patterns {
            if *b == Basis::X {
                wrong += c.wrong_sign(parity(bits));
                all += c.conclusive();
            }
        }
        QberEstimate::new(wrong, all, "Q_X")
    }

    /// Per-input wrong-sign fraction for one X-basis pattern.
    pub fn pattern_qber_x(&self, bits: &[u8]) -> Result<QberEstimate> {
        let c = self.pattern(Basis::X, bits);
        QberEstimate::new(c.wrong_sign(parity(bits)), c.conclusive(), "pattern Q_X")
    }
}

pub(crate) fn parity(bits: &[u8]) -> u8 {
    bits.iter().fold(0, |p, &b| p ^ (b & 1))
}

pub fn compute_qber_z(stats: &ProtocolStats) -> Result<f64> {
    stats.qber_z().map(|q| q.value)
}

pub fn compute_qber_x(stats: &ProtocolStats) -> Result<f64> {
    stats.qber_x().map(|q| q.value)
}
