use serde::{Deserialize, Serialize};

use crate::ghz::{GhzCircuitSpec, PhaseIntegration, PhaseMode};
use crate::optics::DetectorModel;
use crate::protocol::{expected_qber, run_characterization, Basis, ProtocolEngine, ProtocolStats, SourceKind};
use crate::rng::derive_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TamperSweepConfig {
    pub channel: usize,
    pub mu: f64,
    pub phase_mode: PhaseMode,
    pub rounds_per_pattern: u64,
    pub seed: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TamperPoint {
    pub extra_loss: f64,
    pub stats: ProtocolStats,
    pub qber_z: Option<f64>,
    pub qber_x: Option<f64>,
    pub stderr_x: Option<f64>,
    /// Q_X from phase quadrature, no sampling noise.
    pub expected_qber_x: Option<f64>,
    /// Conclusive X rounds per X round.
    pub gain_x: f64,
}

/// Extra attenuation `x` on one ring channel, `η → η(1 − x)`, for each value
/// in `extra_losses`, with coherent inputs on the equitable topology.
pub fn channel_loss_tamper_sweep(
    spec: &GhzCircuitSpec,
    det: DetectorModel,
    config: &TamperSweepConfig,
    extra_losses: &[f64],
) -> Result<Vec<TamperPoint>> {
    if config.channel >= spec.n_parties {
        return Err(Error::field("tamper.channel", format!("no channel {} in a {}-party ring", config.channel, spec.n_parties)));
    }
    extra_losses
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::field("tamper.extra_loss", format!("{x} is outside [0, 1]")));
            }
            let mut tampered = spec.clone();
            tampered.eta_channel[config.channel] *= 1.0 - x;
            let engine = ProtocolEngine::new(&tampered, det, config.phase_mode)?;
            let stats = run_characterization(
                &engine,
                SourceKind::Coherent,
                config.mu,
                config.rounds_per_pattern,
                derive_seed(config.seed, i as u64),
                config.workers,
            )?;
            let exact = expected_qber(&engine, SourceKind::Coherent, config.mu, PhaseIntegration::default())?;
            let x_totals = stats.basis_totals(Basis::X);
            let qx = stats.qber_x().ok();
            Ok(TamperPoint {
                extra_loss: x,
                qber_z: stats.qber_z().ok().map(|q| q.value),
                qber_x: qx.map(|q| q.value),
                stderr_x: qx.map(|q| q.stderr),
                expected_qber_x: exact.q_x,
                gain_x: if x_totals.total() > 0 {
                    x_totals.conclusive() as f64 / x_totals.total() as f64
                } else {
                    0.0
                },
                stats,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn added_loss_raises_expected_x_error() {
        let spec = GhzCircuitSpec::ideal(3);
        let cfg = TamperSweepConfig {
            channel: 0,
            mu: 0.1,
            phase_mode: PhaseMode::Randomized,
            rounds_per_pattern: 200,
            seed: 5,
            workers: 2,
        };
        let pts = channel_loss_tamper_sweep(&spec, DetectorModel::ideal(), &cfg, &[0.0, 0.3, 0.6]).unwrap();
        let q: Vec<f64> = pts.iter().map(|p| p.expected_qber_x.unwrap()).collect();
        assert!(q[0] < q[1] && q[1] < q[2], "{q:?}");
        assert!((q[0] - 0.3702).abs() < 5e-4);
    }

    #[test]
    fn bad_channel_names_field() {
        let cfg = TamperSweepConfig {
            channel: 7,
            mu: 0.1,
            phase_mode: PhaseMode::Randomized,
            rounds_per_pattern: 1,
            seed: 0,
            workers: 1,
        };
        let e = channel_loss_tamper_sweep(&GhzCircuitSpec::ideal(3), DetectorModel::ideal(), &cfg, &[0.1]).unwrap_err();
        assert!(e.to_string().contains("tamper.channel"));
    }
}
