//! Fock propagation against permanents of unitary submatrices, and the
//! coherent backend against a truncated Fock expansion of the same pulses.

use mpqc::ghz::{CoherentInput, GhzAnalyzer, GhzCircuitSpec, GhzOutcome};
use mpqc::optics::{
    build_mode_space, propagate_fock, Complex64, DetectorModel, FockState, LinearCircuit,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Ryser's formula.
fn permanent(m: &DMatrix<Complex64>) -> Complex64 {
    let n = m.nrows();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for subset in 1u32..(1 << n) {
        let mut prod = Complex64::new(1.0, 0.0);
        for i in 0..n {
            let row_sum: Complex64 = (0..n).filter(|j| subset >> j & 1 == 1).map(|j| m[(i, j)]).sum();
            prod *= row_sum;
        }
        let sign = if (n - subset.count_ones() as usize).is_multiple_of(2) { 1.0 } else { -1.0 };
        total += prod * sign;
    }
    total
}

fn expand(occ: &[u8]) -> Vec<usize> {
    occ.iter().enumerate().flat_map(|(m, &k)| std::iter::repeat_n(m, k as usize)).collect()
}

/// `⟨t|U|s⟩ = Perm(U[t, s]) / √(Π s! Π t!)` with columns as input modes.
fn oracle_amplitude(u: &DMatrix<Complex64>, s: &[u8], t: &[u8]) -> Complex64 {
    let rows = expand(t);
    let cols = expand(s);
    let sub = DMatrix::from_fn(rows.len(), cols.len(), |i, j| u[(rows[i], cols[j])]);
    let norm: f64 = s.iter().chain(t).map(|&k| factorial(k as usize)).product();
    permanent(&sub) / norm.sqrt()
}

fn random_unitary(dim: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    g.qr().q()
}

fn occupations(modes: usize, photons: usize) -> Vec<Vec<u8>> {
    if modes == 1 {
        return vec![vec![photons as u8]];
    }
    (0..=photons)
        .flat_map(|k| {
            occupations(modes - 1, photons - k).into_iter().map(move |mut rest| {
                rest.insert(0, k as u8);
                rest
            })
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn fock_amplitudes_are_permanents(seed in any::<u64>(), pick in 0usize..1000, photons in 1usize..=3) {
        let space = build_mode_space(2, false).unwrap();
        let u = random_unitary(space.dim(), seed);
        let circuit = LinearCircuit::from_matrix(&space, u.clone()).unwrap();
        let inputs = occupations(space.dim(), photons);
        let s = &inputs[pick % inputs.len()];
        let input = FockState::from_terms(space.dim(), [(s.clone(), Complex64::new(1.0, 0.0))], 8).unwrap();
        let out = propagate_fock(&circuit, &input).unwrap();
        for t in occupations(space.dim(), photons) {
            let expected = oracle_amplitude(&u, s, &t);
            prop_assert!((out.amplitude(&t) - expected).norm() < 1e-10, "{s:?} -> {t:?}");
        }
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
    }
}

/// Multimode coherent state truncated at `cap` photons.
fn truncated_coherent(alphas: &[Complex64], cap: usize) -> FockState {
    let mean: f64 = alphas.iter().map(|a| a.norm_sqr()).sum();
    let prefactor = (-mean / 2.0).exp();
    let terms = (0..=cap).flat_map(|n| occupations(alphas.len(), n)).map(|occ| {
        let mut amp = Complex64::new(prefactor, 0.0);
        for (a, &k) in alphas.iter().zip(&occ) {
            amp *= a.powu(k as u32) / factorial(k as usize).sqrt();
        }
        (occ, amp)
    });
    FockState::from_terms(alphas.len(), terms, cap).unwrap()
}

fn backend_agreement(spec: &GhzCircuitSpec, det: DetectorModel, mu: f64, seed: u64) {
    let analyzer = GhzAnalyzer::new(spec, det).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..4 {
        let inputs: Vec<CoherentInput> = (0..spec.n_parties)
            .map(|_| {
                let t: f64 = rng.random::<f64>() * std::f64::consts::PI;
                let p: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                CoherentInput {
                    jones: [Complex64::new(t.cos(), 0.0), Complex64::from_polar(t.sin(), p)],
                    mu,
                    phase: rng.random::<f64>() * std::f64::consts::TAU,
                }
            })
            .collect();
        let phases: Vec<f64> = inputs.iter().map(|i| i.phase).collect();
        let coherent = analyzer.coherent_outcomes_at(&inputs, &phases);
        let alphas: Vec<Complex64> = inputs
            .iter()
            .flat_map(|i| {
                let a = Complex64::from_polar(i.mu.sqrt(), i.phase);
                [a * i.jones[0], a * i.jones[1]]
            })
            .collect();
        let fock = analyzer.fock_outcomes(&truncated_coherent(&alphas, 6)).unwrap();
        for o in [GhzOutcome::Plus, GhzOutcome::Minus] {
            let (c, f) = (coherent.get(o), fock.get(o));
            assert!((c - f).abs() <= 1e-6 * c.max(1e-12), "{o}: coherent {c:e} vs fock {f:e}");
        }
    }
}

#[test]
fn coherent_matches_truncated_fock_lossless() {
    backend_agreement(&GhzCircuitSpec::ideal(3), DetectorModel::ideal(), 0.02, 1);
}

#[test]
fn coherent_matches_truncated_fock_with_loss_and_noise() {
    let mut spec = GhzCircuitSpec::ideal(3);
    spec.eta_delay = vec![0.9, 0.8, 0.95];
    spec.eta_channel = vec![0.7, 0.85, 0.6];
    spec.theta = vec![0.3, -0.2, 1.1];
    spec.phi = vec![0.5, 0.1, -0.7];
    backend_agreement(&spec, DetectorModel::new(0.8, 1e-5).unwrap(), 0.02, 2);
}

#[test]
fn coherent_matches_truncated_fock_at_small_mu() {
    backend_agreement(&GhzCircuitSpec::ideal(3), DetectorModel::ideal(), 1e-3, 3);
}
