use std::collections::BTreeSet;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::ghz::GhzOutcome;
use crate::protocol::{ProtocolStats, QberEstimate};
use crate::{Error, Result};

/// Significance threshold in standard errors.
const SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QberDelta {
    pub honest: QberEstimate,
    pub attacked: QberEstimate,
    /// attacked − honest
    pub delta: f64,
    /// Combined binomial standard error of the difference.
    pub sigma: f64,
    pub significant: bool,
}

impl QberDelta {
    fn new(honest: QberEstimate, attacked: QberEstimate) -> Self {
        let delta = attacked.value - honest.value;
        let sigma = (honest.stderr.powi(2) + attacked.stderr.powi(2)).sqrt();
        QberDelta {
            honest,
            attacked,
            delta,
            sigma,
            significant: delta.abs() > SIGMAS * sigma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectabilityReport {
    pub z: QberDelta,
    pub x: QberDelta,
    /// Honest parties would notice the attack from their QBER check.
    pub detectable: bool,
}

/// QBER differences between an honest and an attacked run of equal length.
pub fn detectability(honest: &ProtocolStats, attacked: &ProtocolStats) -> Result<DetectabilityReport> {
    if honest.rounds != attacked.rounds {
        return Err(Error::InvalidInput(format!(
            "runs differ in length ({} vs {} rounds)",
            honest.rounds, attacked.rounds
        )));
    }
    let z = QberDelta::new(honest.qber_z()?, attacked.qber_z()?);
    let x = QberDelta::new(honest.qber_x()?, attacked.qber_x()?);
    Ok(DetectabilityReport {
        z,
        x,
        detectable: z.significant || x.significant,
    })
}

/// Two-sample chi-square homogeneity test over (input pattern, outcome)
/// cells of same-basis rounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomogeneityTest {
    pub chi2: f64,
    pub dof: usize,
    /// Critical value at the one-sided 3σ level (p ≈ 0.00135).
    pub critical: f64,
    pub total_variation: f64,
    pub consistent: bool,
}

/// Chi-square quantile with the same upper tail as a standard normal beyond `z`.
fn chi2_quantile(dof: usize, z: f64) -> f64 {
    let tail = Normal::standard().sf(z);
    ChiSquared::new(dof as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - tail)
}

pub fn homogeneity_test(a: &ProtocolStats, b: &ProtocolStats) -> HomogeneityTest {
    let keys: BTreeSet<_> = a.patterns.keys().chain(b.patterns.keys()).collect();
    let cells: Vec<(u64, u64)> = keys
        .iter()
        .flat_map(|k| {
            let ca = a.patterns.get(*k).copied().unwrap_or_default();
            let cb = b.patterns.get(*k).copied().unwrap_or_default();
            GhzOutcome::ALL.map(|o| (ca.get(o), cb.get(o)))
        })
        .filter(|&(x, y)| x + y > 0)
        .collect();
    let na: u64 = cells.iter().map(|c| c.0).sum();
    let nb: u64 = cells.iter().map(|c| c.1).sum();
    let n = (na + nb) as f64;
    let mut chi2 = 0.0;
    let mut tv = 0.0;
    for &(x, y) in &cells {
        let pooled = (x + y) as f64 / n;
        let ea = pooled * na as f64;
        let eb = pooled * nb as f64;
        chi2 += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
        if na > 0 && nb > 0 {
            tv += (x as f64 / na as f64 - y as f64 / nb as f64).abs();
        }
    }
    let dof = cells.len().saturating_sub(1).max(1);
    let critical = chi2_quantile(dof, SIGMAS);
    HomogeneityTest {
        chi2,
        dof,
        critical,
        total_variation: tv / 2.0,
        consistent: chi2 <= critical,
    }
}
