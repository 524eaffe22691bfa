use std::fmt;

use serde::{Deserialize, Serialize};

use crate::optics::DetectionEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GhzOutcome {
    Plus,
    Minus,
    Inconclusive,
}

impl GhzOutcome {
    pub const ALL: [GhzOutcome; 3] = [GhzOutcome::Plus, GhzOutcome::Minus, GhzOutcome::Inconclusive];

    pub fn is_conclusive(self) -> bool {
        self != GhzOutcome::Inconclusive
    }

    /// `Some(0)` for GHZ⁺, `Some(1)` for GHZ⁻.
    pub fn parity(self) -> Option<u8> {
        match self {
            GhzOutcome::Plus => Some(0),
            GhzOutcome::Minus => Some(1),
            GhzOutcome::Inconclusive => None,
        }
    }

    pub fn from_parity(parity: u8) -> Self {
        if parity.is_multiple_of(2) {
            GhzOutcome::Plus
        } else {
            GhzOutcome::Minus
        }
    }
}

impl fmt::Display for GhzOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GhzOutcome::Plus => "GHZ+",
            GhzOutcome::Minus => "GHZ-",
            GhzOutcome::Inconclusive => "inconclusive",
        })
    }
}

/// Conclusive only when every party has exactly one click; the sign is the
/// parity of the number of `V` clicks (even → GHZ⁺).
pub fn classify(event: &DetectionEvent) -> GhzOutcome {
    let mut parity = 0u8;
    for c in &event.clicks {
        match (c.h, c.v) {
            (true, false) => {}
            (false, true) => parity ^= 1,
            _ => return GhzOutcome::Inconclusive,
        }
    }
    GhzOutcome::from_parity(parity)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub plus: f64,
    pub minus: f64,
    pub inconclusive: f64,
}

impl OutcomeDistribution {
    pub fn get(&self, outcome: GhzOutcome) -> f64 {
        match outcome {
            GhzOutcome::Plus => self.plus,
            GhzOutcome::Minus => self.minus,
            GhzOutcome::Inconclusive => self.inconclusive,
        }
    }

    pub fn total(&self) -> f64 {
        self.plus + self.minus + self.inconclusive
    }

    pub fn conclusive(&self) -> f64 {
        self.plus + self.minus
    }

    pub(crate) fn add_scaled(&mut self, other: &OutcomeDistribution, weight: f64) {
        self.plus += weight * other.plus;
        self.minus += weight * other.minus;
        self.inconclusive += weight * other.inconclusive;
    }

    pub(crate) fn scaled(&self, factor: f64) -> Self {
        OutcomeDistribution {
            plus: self.plus * factor,
            minus: self.minus * factor,
            inconclusive: self.inconclusive * factor,
        }
    }
}

/// Outcome probabilities for independent detectors with per-detector click
/// probabilities in signal-mode order `(0H, 0V, 1H, ...)`.
pub fn outcome_from_click_probabilities(probs: &[f64]) -> OutcomeDistribution {
    // running mass of "every party so far has exactly one click", split by V parity
    let (mut even, mut odd, mut failed) = (1.0, 0.0, 0.0);
    for pair in probs.chunks(2) {
        let (ph, pv) = (pair[0], pair[1]);
        let only_h = ph * (1.0 - pv);
        let only_v = pv * (1.0 - ph);
        let none_or_both = ph * pv + (1.0 - ph) * (1.0 - pv);
        failed += (even + odd) * none_or_both;
        (even, odd) = (even * only_h + odd * only_v, odd * only_h + even * only_v);
    }
    OutcomeDistribution {
        plus: even,
        minus: odd,
        inconclusive: failed,
    }
}
