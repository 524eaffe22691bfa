use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::optics::{FockState, Polarization, DEFAULT_PHOTON_CAP};
use crate::{Error, Result};

/// Polarization amplitudes `(H, V)` of a single-mode pulse.
pub type Jones = [Complex64; 2];

fn cap_for(n: usize) -> usize {
    n.max(DEFAULT_PHOTON_CAP)
}

/// `(|H…H⟩ + sign·|V…V⟩)/√2` over the parties' source modes, one photon per party.
pub fn ghz_state(n: usize, sign: i8) -> Result<FockState> {
    if n < 2 {
        return Err(Error::InvalidConfiguration(format!(
            "GHZ state needs at least 2 parties, got {n}"
        )));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidInput(format!("GHZ sign must be ±1, got {sign}")));
    }
    let dim = 2 * n;
    let all_h: Vec<u8> = (0..dim).map(|k| (k % 2 == 0) as u8).collect();
    let all_v: Vec<u8> = (0..dim).map(|k| (k % 2 == 1) as u8).collect();
    FockState::from_terms(
        dim,
        [
            (all_h, Complex64::new(FRAC_1_SQRT_2, 0.0)),
            (all_v, Complex64::new(sign as f64 * FRAC_1_SQRT_2, 0.0)),
        ],
        cap_for(n),
    )
}

/// One photon per party, party `j` in polarization state `jones[j]`.
pub fn product_state(jones: &[Jones]) -> Result<FockState> {
    let n = jones.len();
    let forms: Vec<Vec<(usize, Complex64)>> = jones
        .iter()
        .enumerate()
        .map(|(j, pol)| vec![(2 * j, pol[0]), (2 * j + 1, pol[1])])
        .collect();
    FockState::from_creation_product(2 * n, &forms, cap_for(n))
}

/// Computational basis state such as `|HHV⟩`.
pub fn basis_state(pols: &[Polarization]) -> Result<FockState> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let jones: Vec<Jones> = pols
        .iter()
        .map(|p| match p {
            Polarization::H => [one, zero],
            Polarization::V => [zero, one],
        })
        .collect();
    product_state(&jones)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ghz_amplitudes() {
        let plus = ghz_state(3, 1).unwrap();
        assert_eq!(plus.len(), 2);
        assert!((plus.amplitude(&[1, 0, 1, 0, 1, 0]).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((plus.amplitude(&[0, 1, 0, 1, 0, 1]).re - FRAC_1_SQRT_2).abs() < 1e-15);

        let minus = ghz_state(3, -1).unwrap();
        assert!((minus.amplitude(&[0, 1, 0, 1, 0, 1]).re + FRAC_1_SQRT_2).abs() < 1e-15);

        let four = ghz_state(4, 1).unwrap();
        assert!((four.amplitude(&[1, 0, 1, 0, 1, 0, 1, 0]).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((four.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ghz_rejects_bad_arguments() {
        assert!(ghz_state(1, 1).is_err());
        assert!(ghz_state(3, 0).is_err());
    }

    #[test]
    fn diagonal_product_state() {
        let d = [Complex64::new(FRAC_1_SQRT_2, 0.0); 2];
        let s = product_state(&[d, d]).unwrap();
        assert_eq!(s.len(), 4);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((s.amplitude(&[0, 1, 1, 0]).re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn basis_state_occupation() {
        use Polarization::*;
        let s = basis_state(&[H, V, V]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.amplitude(&[1, 0, 0, 1, 0, 1]), Complex64::new(1.0, 0.0));
    }
}
