use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use super::coherent::CoherentField;
use super::fock::{FockState, Occupation};
use super::mode::Polarization;
use crate::{Error, Result};

/// Threshold (click / no-click) detector shared by every detector in the setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    efficiency: f64,
    dark_count_prob: f64,
}

impl Default for DetectorModel {
    fn default() -> Self {
        DetectorModel::ideal()
    }
}

impl DetectorModel {
    pub fn new(efficiency: f64, dark_count_prob: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(Error::field(
                "detector_efficiency",
                format!("{efficiency} outside [0, 1]"),
            ));
        }
        if !(0.0..1.0).contains(&dark_count_prob) {
            return Err(Error::field(
                "dark_count_prob",
                format!("{dark_count_prob} outside [0, 1)"),
            ));
        }
        Ok(DetectorModel {
            efficiency,
            dark_count_prob,
        })
    }

    pub fn ideal() -> Self {
        DetectorModel {
            efficiency: 1.0,
            dark_count_prob: 0.0,
        }
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn dark_count_prob(&self) -> f64 {
        self.dark_count_prob
    }

    /// Click probability of one detector hit by exactly `photons` photons.
    pub fn click_given_photons(&self, photons: u8) -> f64 {
        1.0 - (1.0 - self.dark_count_prob) * (1.0 - self.efficiency).powi(photons as i32)
    }

    /// Click probability of one detector illuminated by coherent light of
    /// mean photon number `mean`.
    pub fn click_given_mean(&self, mean: f64) -> f64 {
        1.0 - (1.0 - self.dark_count_prob) * (-self.efficiency * mean).exp()
    }
}

/// Which of a party's two detectors fired.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ClickSet {
    pub h: bool,
    pub v: bool,
}

impl ClickSet {
    pub fn get(&self, pol: Polarization) -> bool {
        match pol {
            Polarization::H => self.h,
            Polarization::V => self.v,
        }
    }

    pub fn count(&self) -> usize {
        self.h as usize + self.v as usize
    }
}

/// Click pattern over all parties for one round.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DetectionEvent {
    pub clicks: Vec<ClickSet>,
}

impl DetectionEvent {
    pub fn empty(n_parties: usize) -> Self {
        DetectionEvent {
            clicks: vec![ClickSet::default(); n_parties],
        }
    }

    /// Event from per-detector flags in signal-mode order.
    pub fn from_detectors(fired: &[bool]) -> Self {
        DetectionEvent {
            clicks: fired
                .chunks(2)
                .map(|p| ClickSet { h: p[0], v: p[1] })
                .collect(),
        }
    }

    /// One click per party with the given polarizations.
    pub fn single_clicks(pols: &[Polarization]) -> Self {
        DetectionEvent {
            clicks: pols
                .iter()
                .map(|&p| ClickSet {
                    h: p == Polarization::H,
                    v: p == Polarization::V,
                })
                .collect(),
        }
    }

    pub fn n_parties(&self) -> usize {
        self.clicks.len()
    }

    pub fn total_clicks(&self) -> usize {
        self.clicks.iter().map(ClickSet::count).sum()
    }
}

/// Per-detector click probabilities for a propagated coherent field. Clicks
/// at distinct detectors are independent because coherent states factorize
/// over modes.
pub fn click_probabilities(field: &CoherentField, det: &DetectorModel) -> Vec<f64> {
    field
        .signal()
        .iter()
        .map(|a| det.click_given_mean(a.norm_sqr()))
        .collect()
}

pub fn sample_coherent_detection<R: Rng + ?Sized>(probabilities: &[f64], rng: &mut R) -> DetectionEvent {
    let fired: Vec<bool> = probabilities
        .iter()
        .map(|&p| rng.random::<f64>() < p)
        .collect();
    DetectionEvent::from_detectors(&fired)
}

/// Photon-number distribution of the detected modes, loss ancillas traced out.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalDistribution {
    entries: Vec<(Occupation, f64)>,
}

impl SignalDistribution {
    pub fn from_state(state: &FockState, n_signal: usize) -> Self {
        let mut grouped: BTreeMap<Occupation, f64> = BTreeMap::new();
        for (occ, amp) in state.terms() {
            *grouped.entry(occ[..n_signal].to_vec()).or_default() += amp.norm_sqr();
        }
        SignalDistribution {
            entries: grouped.into_iter().collect(),
        }
    }

    pub fn entries(&self) -> &[(Occupation, f64)] {
        &self.entries
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    fn sample_occupation<R: Rng + ?Sized>(&self, rng: &mut R) -> &[u8] {
        let target = rng.random::<f64>() * self.total();
        let mut acc = 0.0;
        for (occ, p) in &self.entries {
            acc += p;
            if target < acc {
                return occ;
            }
        }
        &self.entries.last().expect("empty distribution").0
    }
}

/// Draws an occupation vector by `|amplitude|²`, thins each photon with the
/// detector efficiency, adds dark counts and thresholds.
pub fn sample_fock_detection<R: Rng + ?Sized>(
    dist: &SignalDistribution,
    det: &DetectorModel,
    rng: &mut R,
) -> DetectionEvent {
    let occ = dist.sample_occupation(rng);
    let fired: Vec<bool> = occ
        .iter()
        .map(|&n| {
            let detected = (0..n).any(|_| rng.random::<f64>() < det.efficiency);
            let dark = det.dark_count_prob > 0.0 && rng.random::<f64>() < det.dark_count_prob;
            detected || dark
        })
        .collect();
    DetectionEvent::from_detectors(&fired)
}

/// Exact probability of every click pattern, by enumeration.
pub fn event_distribution(dist: &SignalDistribution, det: &DetectorModel) -> BTreeMap<DetectionEvent, f64> {
    let mut out: BTreeMap<DetectionEvent, f64> = BTreeMap::new();
    for (occ, weight) in dist.entries() {
        let probs: Vec<f64> = occ.iter().map(|&n| det.click_given_photons(n)).collect();
        let uncertain: Vec<usize> = (0..probs.len())
            .filter(|&k| probs[k] > 0.0 && probs[k] < 1.0)
            .collect();
        for mask in 0u64..(1u64 << uncertain.len()) {
            let mut fired: Vec<bool> = probs.iter().map(|&p| p >= 1.0).collect();
            let mut p = *weight;
            for (bit, &k) in uncertain.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    fired[k] = true;
                    p *= probs[k];
                } else {
                    p *= 1.0 - probs[k];
                }
            }
            *out.entry(DetectionEvent::from_detectors(&fired)).or_default() += p;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::optics::mode::build_mode_space;
    use crate::rng::round_rng;

    #[test]
    fn closed_form_click_probabilities() {
        let space = build_mode_space(2, false).unwrap();
        let ideal = DetectorModel::ideal();
        let amp = 2f64.ln().sqrt();
        let f = CoherentField::input(&space, vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, amp)])
            .unwrap();
        let p = click_probabilities(&f, &ideal);
        assert_eq!(p[0], 0.0);
        assert!((p[1] - 0.5).abs() < 1e-12);

        let dark = DetectorModel::new(1.0, 0.01).unwrap();
        let p = click_probabilities(&f, &dark);
        assert!((p[0] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn detector_ranges() {
        assert!(DetectorModel::new(1.1, 0.0).is_err());
        assert!(DetectorModel::new(0.5, 1.0).is_err());
        assert!(DetectorModel::new(0.0, 0.0).is_ok());
    }

    #[test]
    fn degenerate_coherent_sampling() {
        let mut rng = round_rng(1, 0);
        assert_eq!(sample_coherent_detection(&[0.0; 6], &mut rng), DetectionEvent::empty(3));
        let all = sample_coherent_detection(&[1.0; 6], &mut rng);
        assert_eq!(all.total_clicks(), 6);
    }

    #[test]
    fn sampling_replays_with_seed() {
        let probs = [0.3, 0.6, 0.1, 0.9];
        let a: Vec<_> = (0..20)
            .map(|r| sample_coherent_detection(&probs, &mut round_rng(11, r)))
            .collect();
        let b: Vec<_> = (0..20)
            .map(|r| sample_coherent_detection(&probs, &mut round_rng(11, r)))
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn fock_sampling_thresholds() {
        let state = FockState::from_terms(
            4,
            [(vec![2, 0, 0, 1], Complex64::new(1.0, 0.0))],
            8,
        )
        .unwrap();
        let dist = SignalDistribution::from_state(&state, 4);
        let ev = sample_fock_detection(&dist, &DetectorModel::ideal(), &mut round_rng(0, 0));
        assert_eq!(ev.clicks, vec![ClickSet { h: true, v: false }, ClickSet { h: false, v: true }]);

        let blind = DetectorModel::new(0.0, 0.0).unwrap();
        let ev = sample_fock_detection(&dist, &blind, &mut round_rng(0, 0));
        assert_eq!(ev.total_clicks(), 0);
    }

    #[test]
    fn enumeration_sums_to_one() {
        let state = FockState::from_terms(
            4,
            [
                (vec![1, 0, 0, 1], Complex64::new(0.6, 0.0)),
                (vec![0, 2, 0, 0], Complex64::new(0.0, 0.8)),
            ],
            8,
        )
        .unwrap();
        let dist = SignalDistribution::from_state(&state, 4);
        let det = DetectorModel::new(0.7, 0.02).unwrap();
        let events = event_distribution(&dist, &det);
        let total: f64 = events.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
