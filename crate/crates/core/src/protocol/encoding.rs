use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ghz::Jones;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Z => "Z",
            Basis::X => "X",
        })
    }
}

/// BB84 polarization for a basis and bit: `Z: 0 → H, 1 → V`;
/// `X: 0 → D = (H + V)/√2, 1 → A = (H − V)/√2`.
pub fn encode(basis: Basis, bit: u8) -> Jones {
    let r = |x: f64| Complex64::new(x, 0.0);
    match (basis, bit & 1) {
        (Basis::Z, 0) => [r(1.0), r(0.0)],
        (Basis::Z, _) => [r(0.0), r(1.0)],
        (Basis::X, 0) => [r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)],
        (Basis::X, _) => [r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2)],
    }
}

/// Polarization letters for a bit string, e.g. `HHV` or `DAD`.
pub fn pattern_label(basis: Basis, bits: &[u8]) -> String {
    bits.iter()
        .map(|&b| match (basis, b) {
            (Basis::Z, 0) => 'H',
            (Basis::Z, _) => 'V',
            (Basis::X, 0) => 'D',
            (Basis::X, _) => 'A',
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    SinglePhoton,
    Coherent,
}

/// One party's preparation for one round. `mu` and `phase` are ignored for
/// single-photon sources.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartySetting {
    pub basis: Basis,
    pub bit: u8,
    pub mu: f64,
    pub phase: f64,
    pub source: SourceKind,
}

impl PartySetting {
    pub fn single_photon(basis: Basis, bit: u8) -> Self {
        PartySetting {
            basis,
            bit,
            mu: 1.0,
            phase: 0.0,
            source: SourceKind::SinglePhoton,
        }
    }

    pub fn coherent(basis: Basis, bit: u8, mu: f64, phase: f64) -> Self {
        PartySetting {
            basis,
            bit,
            mu,
            phase,
            source: SourceKind::Coherent,
        }
    }

    pub fn jones(&self) -> Jones {
        encode(self.basis, self.bit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bb84_states() {
        let h = encode(Basis::Z, 0);
        assert_eq!(h, [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let v = encode(Basis::Z, 1);
        assert_eq!(v[0].norm(), 0.0);
        let d = encode(Basis::X, 0);
        assert_eq!(d[0], d[1]);
        let a = encode(Basis::X, 1);
        assert!((a[0].re - FRAC_1_SQRT_2).abs() < 1e-15 && (a[1].re + FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn labels() {
        assert_eq!(pattern_label(Basis::Z, &[0, 0, 1]), "HHV");
        assert_eq!(pattern_label(Basis::X, &[1, 0, 1]), "ADA");
    }
}
