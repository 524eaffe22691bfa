use std::fmt::Display;

use super::config::{parse_sweep_param, AttackSection, ExperimentConfig, RunMode};
use super::table::{ResultRow, ResultTable};
use crate::adversary::{
    channel_loss_tamper_sweep, detectability, faked_measurement_round, homogeneity_test,
    information_imbalance, AttackRound, InfoMetrics, TamperSweepConfig, Topology,
};
use crate::ghz::{PhaseIntegration, PhaseMode};
use crate::protocol::{
    characterization_patterns, combine_secret, exact_pattern_distribution, expected_qber,
    pattern_label, run_characterization, sift, simulate_records, x_parity_check, Basis,
    GainTable, OutcomeCounts, PartySetting, ProtocolEngine, ProtocolStats, QberEstimate,
    SourceKind,
};
use crate::rng::{derive_seed, round_rng};
use crate::{Error, Result};

/// Exact phase averages for coherent sources cost `16^(N−1)` evaluations per
/// pattern; above this ring size they are skipped.
const MAX_EXACT_COHERENT_PARTIES: usize = 4;

/// Runs the mode named in the config.
pub fn run(config: &ExperimentConfig, workers: usize) -> Result<ResultTable> {
    match config.mode {
        RunMode::Characterize => run_characterize(config, workers),
        RunMode::Keygen => run_keygen(config, workers),
        RunMode::Attack => run_attack(config, workers),
        RunMode::Sweep => {
            let sweep = config
                .sweep
                .as_ref()
                .ok_or_else(|| Error::field("sweep", "sweep mode needs a [sweep] table or --param"))?;
            run_sweep(config, &sweep.param, &sweep.grid, workers)
        }
    }
}

fn new_table(config: &ExperimentConfig) -> ResultTable {
    ResultTable::new(config.mode.as_str(), config.seed, config.config_hash())
}

fn run_id(config: &ExperimentConfig) -> String {
    format!("{}-{}", config.mode.as_str(), &config.config_hash()[..8])
}

fn engine_for(config: &ExperimentConfig) -> Result<ProtocolEngine> {
    ProtocolEngine::new(&config.circuit_spec()?, config.detector()?, config.phase()?)
}

fn exact_available(config: &ExperimentConfig) -> bool {
    config.source == SourceKind::SinglePhoton || config.n_parties <= MAX_EXACT_COHERENT_PARTIES
}

fn z_pattern_qber(bits: &[u8], c: &OutcomeCounts) -> Option<QberEstimate> {
    let unequal = bits.iter().any(|&b| b != bits[0]);
    let errors = if unequal { c.conclusive() } else { 0 };
    QberEstimate::new(errors, c.conclusive(), "pattern Q_Z").ok()
}

fn same_basis_totals(stats: &ProtocolStats) -> OutcomeCounts {
    let mut c = stats.basis_totals(Basis::Z);
    c.merge(&stats.basis_totals(Basis::X));
    c
}

fn gain(c: &OutcomeCounts) -> Option<f64> {
    (c.total() > 0).then(|| c.conclusive() as f64 / c.total() as f64)
}

/// Every Z and X input pattern for `rounds` rounds each. One row per
/// pattern, then a `Z` and an `X` summary row.
pub fn run_characterize(config: &ExperimentConfig, workers: usize) -> Result<ResultTable> {
    let engine = engine_for(config)?;
    let stats = run_characterization(&engine, config.source, config.mu, config.rounds, config.seed, workers)?;
    let mut table = new_table(config);
    let id = run_id(config);
    for (basis, bits) in characterization_patterns(config.n_parties) {
        let c = stats.pattern(basis, &bits);
        let row = match basis {
            Basis::Z => ResultRow::new(&id, pattern_label(basis, &bits), c).with_qber(z_pattern_qber(&bits, &c), None),
            Basis::X => ResultRow::new(&id, pattern_label(basis, &bits), c).with_qber(None, stats.pattern_qber_x(&bits).ok()),
        };
        let row = if exact_available(config) {
            let d = exact_pattern_distribution(&engine, config.source, config.mu, basis, &bits, PhaseIntegration::default())?;
            row.with_extra("p_plus", Some(d.plus))
                .with_extra("p_minus", Some(d.minus))
                .with_extra("p_inconclusive", Some(d.inconclusive))
        } else {
            row
        };
        table.rows.push(row);
    }
    push_summaries(&mut table, &id, &stats);
    Ok(table)
}

fn push_summaries(table: &mut ResultTable, id: &str, stats: &ProtocolStats) {
    let z = stats.basis_totals(Basis::Z);
    let x = stats.basis_totals(Basis::X);
    table.rows.push(
        ResultRow::new(id, "Z", z)
            .with_qber(stats.qber_z().ok(), None)
            .with_extra("gain", gain(&z))
            .with_extra("phase_rejected", Some(stats.phase_rejected as f64)),
    );
    table.rows.push(
        ResultRow::new(id, "X", x)
            .with_qber(None, stats.qber_x().ok())
            .with_extra("gain", gain(&x))
            .with_extra("phase_rejected", Some(stats.phase_rejected as f64)),
    );
}

/// Random bases, bits and intensities for `rounds` rounds. Rows: `Z`, `X`
/// (sifted), `mixed`, then one gain row per intensity combination for
/// coherent sources.
pub fn run_keygen(config: &ExperimentConfig, workers: usize) -> Result<ResultTable> {
    let engine = engine_for(config)?;
    let sampler = config.sampler();
    let n = config.n_parties;
    let seed = config.seed;
    let records = simulate_records(0..config.rounds, workers, |id| {
        let mut rng = round_rng(seed, id);
        let settings = sampler.draw(n, &mut rng);
        engine.run_round(&settings, id, &mut rng)
    })?;
    let mut stats = ProtocolStats::default();
    records.iter().for_each(|r| stats.record(r));
    let sifted = sift(&records);
    let mut parity_errors = 0u64;
    for r in &sifted.x {
        if !x_parity_check(r)? {
            parity_errors += 1;
        }
    }
    // Each party's sifted X bits are its share; the XOR is the shared secret.
    let shares: Vec<Vec<u8>> = (0..n)
        .map(|j| sifted.x.iter().map(|r| r.settings[j].bit).collect())
        .collect();
    let secret = combine_secret(&shares)?;

    let id = run_id(config);
    let mut table = new_table(config);
    table.rows.push(
        ResultRow::new(&id, "Z", stats.basis_totals(Basis::Z))
            .with_qber(stats.qber_z().ok(), None)
            .with_extra("sifted", Some(sifted.z.len() as f64)),
    );
    table.rows.push(
        ResultRow::new(&id, "X", stats.basis_totals(Basis::X))
            .with_qber(None, stats.qber_x().ok())
            .with_extra("sifted", Some(sifted.x.len() as f64))
            .with_extra("parity_errors", Some(parity_errors as f64))
            .with_extra("secret_bits", Some(secret.len() as f64)),
    );
    table.rows.push(
        ResultRow::new(&id, "mixed", stats.mixed_basis)
            .with_extra("phase_rejected", Some(stats.phase_rejected as f64)),
    );
    if config.source == SourceKind::Coherent {
        let gains = GainTable::from_stats(&stats, &config.decoy_config());
        for row in gains.rows.values() {
            let label = format!("mu={}", join(&row.mus, "/"));
            table.rows.push(ResultRow::new(&id, label, row.counts).with_extra("gain", Some(row.gain)));
        }
    }
    Ok(table)
}

fn join<T: Display>(xs: &[T], sep: &str) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

/// Localized topology: honest and faked-measurement runs over the same
/// per-round preparations. Equitable topology: channel-loss tamper sweep.
pub fn run_attack(config: &ExperimentConfig, workers: usize) -> Result<ResultTable> {
    match config.topology {
        Topology::Localized => run_faked_measurement(config, workers),
        Topology::Equitable => run_tamper(config, workers),
    }
}

fn run_faked_measurement(config: &ExperimentConfig, workers: usize) -> Result<ResultTable> {
    let section = config.attack.clone().unwrap_or(AttackSection {
        colluder: 0,
        strategy: Default::default(),
    });
    let attack = config.attack_config(&section);
    attack.validate(config.n_parties, Topology::Localized)?;
    let mut sp_config = config.clone();
    sp_config.source = SourceKind::SinglePhoton;
    let sampler = sp_config.sampler();
    let engine = ProtocolEngine::new(&config.circuit_spec()?, config.detector()?, PhaseMode::Fixed)?;
    let n = config.n_parties;
    let seed = config.seed;
    let settings_for = |id: u64| -> Vec<PartySetting> { sampler.draw(n, &mut round_rng(seed, id)) };
    let honest_seed = derive_seed(seed, 1);
    let attack_seed = derive_seed(seed, 2);

    let honest: Vec<AttackRound> = simulate_records(0..config.rounds, workers, |id| {
        let record = engine.run_round(&settings_for(id), id, &mut round_rng(honest_seed, id))?;
        Ok(AttackRound { record, learned: None })
    })?;
    let attacked: Vec<AttackRound> = simulate_records(0..config.rounds, workers, |id| {
        let s = settings_for(id);
        let insider_basis = s[attack.colluder].basis;
        faked_measurement_round(&s, insider_basis, &engine, attack.strategy, id, &mut round_rng(attack_seed, id))
    })?;

    let collect = |rounds: &[AttackRound]| {
        let mut stats = ProtocolStats::default();
        rounds.iter().for_each(|r| stats.record(&r.record));
        stats
    };
    let hs = collect(&honest);
    let ats = collect(&attacked);
    let report = detectability(&hs, &ats).ok();
    let homogeneity = homogeneity_test(&hs, &ats);
    let info = information_imbalance(&honest, &attacked, attack.colluder).ok();

    let id = run_id(config);
    let mut table = new_table(config);
    let mut h_row = ResultRow::new(&id, "honest", same_basis_totals(&hs)).with_qber(hs.qber_z().ok(), hs.qber_x().ok());
    let mut a_row = ResultRow::new(&id, "attacked", same_basis_totals(&ats))
        .with_qber(ats.qber_z().ok(), ats.qber_x().ok())
        .with_extra("delta_qz", report.map(|r| r.z.delta))
        .with_extra("delta_qx", report.map(|r| r.x.delta))
        .with_extra("sigma_qz", report.map(|r| r.z.sigma))
        .with_extra("sigma_qx", report.map(|r| r.x.sigma))
        .with_extra("detectable", report.map(|r| r.detectable as u8 as f64))
        .with_extra("chi2", Some(homogeneity.chi2))
        .with_extra("chi2_critical", Some(homogeneity.critical))
        .with_extra("total_variation", Some(homogeneity.total_variation));
    for victim in (0..n).filter(|&v| v != attack.colluder) {
        let mi = |m: Option<&InfoMetrics>, b: Basis| m.and_then(|m| m.get(victim, b)).map(|v| v.mutual_information);
        h_row = h_row
            .with_extra(&format!("mi_z_party{victim}"), mi(info.as_ref().map(|i| &i.honest), Basis::Z))
            .with_extra(&format!("mi_x_party{victim}"), mi(info.as_ref().map(|i| &i.honest), Basis::X));
        a_row = a_row
            .with_extra(&format!("mi_z_party{victim}"), mi(info.as_ref().map(|i| &i.attacked), Basis::Z))
            .with_extra(&format!("mi_x_party{victim}"), mi(info.as_ref().map(|i| &i.attacked), Basis::X));
    }
    table.rows.push(h_row);
    table.rows.push(a_row);
    Ok(table)
}

fn run_tamper(config: &ExperimentConfig, workers: usize) -> Result<ResultTable> {
    let tamper = config
        .tamper
        .as_ref()
        .ok_or_else(|| Error::field("tamper", "attack mode on the equitable ring needs a [tamper] table"))?;
    let sweep = TamperSweepConfig {
        channel: tamper.channel,
        mu: config.mu,
        phase_mode: config.phase()?,
        rounds_per_pattern: config.rounds,
        seed: config.seed,
        workers,
    };
    let points = channel_loss_tamper_sweep(&config.circuit_spec()?, config.detector()?, &sweep, &tamper.extra_loss)?;
    let id = run_id(config);
    let mut table = new_table(config);
    for p in points {
        table.rows.push(
            ResultRow::new(&id, format!("extra_loss={}", p.extra_loss), same_basis_totals(&p.stats))
                .with_qber(p.stats.qber_z().ok(), p.stats.qber_x().ok())
                .with_extra("expected_q_x", p.expected_qber_x)
                .with_extra("gain_x", Some(p.gain_x)),
        );
    }
    Ok(table)
}

/// Config for one sweep point.
pub fn sweep_point(config: &ExperimentConfig, param: &str, value: f64) -> Result<ExperimentConfig> {
    let (name, index) = parse_sweep_param(param)?;
    let mut c = config.clone();
    c.decoy = None;
    match name {
        "mu" => c.mu = value,
        "phi" => c.global_phase = Some(value),
        "eta_channel" => {
            let mut eta = c.eta_channel.resolve(c.n_parties, "eta_channel")?;
            match index {
                Some(j) if j < eta.len() => eta[j] = value,
                Some(j) => return Err(Error::field("sweep.param", format!("no channel {j}"))),
                None => eta.iter_mut().for_each(|e| *e = value),
            }
            c.eta_channel = super::config::PerParty::Each(eta);
        }
        "extra_loss" => {
            let channel = c.tamper.as_ref().map(|t| t.channel).unwrap_or(0);
            let mut eta = c.eta_channel.resolve(c.n_parties, "eta_channel")?;
            if channel >= eta.len() {
                return Err(Error::field("tamper.channel", format!("no channel {channel}")));
            }
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::field("sweep.grid", format!("extra loss {value} outside [0, 1]")));
            }
            eta[channel] *= 1.0 - value;
            c.eta_channel = super::config::PerParty::Each(eta);
        }
        "phase_window" => {
            c.phase_mode = super::config::PhaseKind::PostSelected;
            c.phase_window = value;
        }
        _ => unreachable!("parse_sweep_param admits only known names"),
    }
    c.validate()?;
    Ok(c)
}

/// One characterization run per grid point. Each row aggregates every
/// same-basis pattern at that point.
pub fn run_sweep(config: &ExperimentConfig, param: &str, grid: &[f64], workers: usize) -> Result<ResultTable> {
    parse_sweep_param(param)?;
    let id = run_id(config);
    let mut table = new_table(config);
    for (i, &value) in grid.iter().enumerate() {
        let point = sweep_point(config, param, value)?;
        let engine = engine_for(&point)?;
        let stats = run_characterization(
            &engine,
            point.source,
            point.mu,
            point.rounds,
            derive_seed(config.seed, i as u64),
            workers,
        )?;
        let exact = if exact_available(&point) {
            Some(expected_qber(&engine, point.source, point.mu, PhaseIntegration::default())?)
        } else {
            None
        };
        let x = stats.basis_totals(Basis::X);
        table.rows.push(
            ResultRow::new(&id, format!("{param}={value}"), same_basis_totals(&stats))
                .with_qber(stats.qber_z().ok(), stats.qber_x().ok())
                .with_extra("value", Some(value))
                .with_extra("expected_q_z", exact.and_then(|e| e.q_z))
                .with_extra("expected_q_x", exact.and_then(|e| e.q_x))
                .with_extra("gain_x", gain(&x))
                .with_extra("phase_rejected", Some(stats.phase_rejected as f64)),
        );
    }
    Ok(table)
}

/// Intercept at `x = 0` of the least-squares line through the points.
pub fn linear_extrapolation(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(my - sxy / sxx * mx)
}
