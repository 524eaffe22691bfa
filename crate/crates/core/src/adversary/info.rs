use std::collections::BTreeMap;

use serde::Serialize;

use super::attack::AttackRound;
use crate::protocol::{Basis, ProtocolStats};
use crate::{Error, Result};

/// Fewer sifted rounds than this make the plug-in estimate unreliable.
pub const MIN_SIFTED_SAMPLES: usize = 1000;

/// What the insider knows about one victim's sifted bits in one basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VictimInfo {
    pub victim: usize,
    pub basis: Basis,
    pub samples: usize,
    /// `I(knowledge; victim bit)` in bits.
    pub mutual_information: f64,
    pub victim_entropy: f64,
    pub conditional_entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfoMetrics {
    pub victims: Vec<VictimInfo>,
    pub qber_z: Option<f64>,
    pub qber_x: Option<f64>,
}

impl InfoMetrics {
    pub fn get(&self, victim: usize, basis: Basis) -> Option<&VictimInfo> {
        self.victims
            .iter()
            .find(|v| v.victim == victim && v.basis == basis)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImbalanceReport {
    pub colluder: usize,
    pub honest: InfoMetrics,
    pub attacked: InfoMetrics,
}

fn entropy<'a>(counts: impl Iterator<Item = &'a usize>, n: f64) -> f64 {
    counts
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Plug-in estimate `(I(K;V), H(V), H(V|K))` from joint samples of a
/// knowledge label `K` and a bit `V`.
pub fn plug_in_information(samples: &[(u32, u8)]) -> (f64, f64, f64) {
    let n = samples.len() as f64;
    if samples.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let mut joint: BTreeMap<(u32, u8), usize> = BTreeMap::new();
    let mut k_marg: BTreeMap<u32, usize> = BTreeMap::new();
    let mut v_marg: BTreeMap<u8, usize> = BTreeMap::new();
    for &(k, v) in samples {
        *joint.entry((k, v)).or_default() += 1;
        *k_marg.entry(k).or_default() += 1;
        *v_marg.entry(v).or_default() += 1;
    }
    let h_v = entropy(v_marg.values(), n);
    let h_k = entropy(k_marg.values(), n);
    let h_kv = entropy(joint.values(), n);
    let mi = (h_k + h_v - h_kv).max(0.0);
    (mi, h_v, (h_kv - h_k).max(0.0))
}

fn knowledge_label(round: &AttackRound, colluder: usize, victim: usize) -> u32 {
    let own = round.record.settings[colluder].bit as u32;
    let sign = round.record.outcome.parity().unwrap_or(0) as u32;
    let learned = round
        .learned
        .as_ref()
        .map(|l| l[victim] as u32)
        .unwrap_or(2);
    own | sign << 1 | learned << 2
}

fn metrics(rounds: &[AttackRound], colluder: usize) -> Result<InfoMetrics> {
    let n = rounds
        .first()
        .map(|r| r.record.settings.len())
        .ok_or_else(|| Error::UndefinedStatistic("no rounds".into()))?;
    let mut victims = Vec::new();
    for basis in [Basis::Z, Basis::X] {
        let sifted: Vec<&AttackRound> = rounds
            .iter()
            .filter(|r| r.record.sifted && r.record.common_basis() == Some(basis))
            .collect();
        if sifted.len() < MIN_SIFTED_SAMPLES {
            return Err(Error::UndefinedStatistic(format!(
                "{} sifted {basis}-basis rounds, need at least {MIN_SIFTED_SAMPLES}",
                sifted.len()
            )));
        }
        for victim in (0..n).filter(|&v| v != colluder) {
            let samples: Vec<(u32, u8)> = sifted
                .iter()
                .map(|r| (knowledge_label(r, colluder, victim), r.record.settings[victim].bit))
                .collect();
            let (mi, h_v, h_cond) = plug_in_information(&samples);
            victims.push(VictimInfo {
                victim,
                basis,
                samples: samples.len(),
                mutual_information: mi,
                victim_entropy: h_v,
                conditional_entropy: h_cond,
            });
        }
    }
    let mut stats = ProtocolStats::default();
    rounds.iter().for_each(|r| stats.record(&r.record));
    Ok(InfoMetrics {
        victims,
        qber_z: stats.qber_z().ok().map(|q| q.value),
        qber_x: stats.qber_x().ok().map(|q| q.value),
    })
}

/// Compares what the insider learns about each victim's sifted bits in an
/// honest run and in an attacked run. Honest knowledge is the insider's own
/// bit plus the public announcement; under attack it also includes the
/// measuring station's readout.
pub fn information_imbalance(
    honest_run: &[AttackRound],
    attacked_run: &[AttackRound],
    colluder: usize,
) -> Result<ImbalanceReport> {
    Ok(ImbalanceReport {
        colluder,
        honest: metrics(honest_run, colluder)?,
        attacked: metrics(attacked_run, colluder)?,
    })
}
