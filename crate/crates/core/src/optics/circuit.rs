use nalgebra::DMatrix;
use num_complex::Complex64;

use super::mode::{ModeId, ModeKind, ModeSpace};
use crate::{Error, Result};

const SUBUNITARY_TOL: f64 = 1e-12;

/// One pass through a linear-optical network.
///
/// Column `m` of the matrix holds the image of input mode `m`: a creation
/// operator `a†_m` maps to `Σ_k U[k, m] a†_k`, and a coherent amplitude
/// vector maps to `U · α`. The matrix may be sub-unitary when loss is applied
/// by direct amplitude scaling instead of through ancilla modes.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCircuit {
    matrix: DMatrix<Complex64>,
    space: ModeSpace,
}

impl LinearCircuit {
    pub fn identity(space: &ModeSpace) -> Self {
        LinearCircuit {
            matrix: DMatrix::identity(space.dim(), space.dim()),
            space: space.clone(),
        }
    }

    /// Wraps an arbitrary matrix, checking shape and that no singular value
    /// exceeds one.
    pub fn from_matrix(space: &ModeSpace, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = space.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidConfiguration(format!(
                "matrix is {}x{}, mode space has dimension {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let circuit = LinearCircuit {
            matrix,
            space: space.clone(),
        };
        let smax = circuit.max_singular_value();
        if smax > 1.0 + SUBUNITARY_TOL {
            return Err(Error::InvalidConfiguration(format!(
                "circuit amplifies: largest singular value {smax}"
            )));
        }
        Ok(circuit)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn space(&self) -> &ModeSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn entry(&self, out_mode: usize, in_mode: usize) -> Complex64 {
        self.matrix[(out_mode, in_mode)]
    }

    pub fn max_singular_value(&self) -> f64 {
        self.matrix
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    /// `max |U†U − I|` over all entries.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = self.matrix.adjoint() * &self.matrix;
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((gram[(r, c)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// `U · amps`; `amps` may cover only a prefix of the modes, the rest is vacuum.
    pub fn apply(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let dim = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (m, &a) in amps.iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (k, slot) in out.iter_mut().enumerate() {
                *slot += self.matrix[(k, m)] * a;
            }
        }
        out
    }

    /// Nonzero entries of column `m` as `(output mode, amplitude)`.
    pub fn column_terms(&self, m: usize) -> Vec<(usize, Complex64)> {
        (0..self.dim())
            .filter_map(|k| {
                let v = self.matrix[(k, m)];
                (v != Complex64::new(0.0, 0.0)).then_some((k, v))
            })
            .collect()
    }

    /// Sequential application: `self` first, then `next`.
    pub fn then(&self, next: &LinearCircuit) -> Result<LinearCircuit> {
        compose(self, next)
    }
}

/// Circuit equivalent to applying `first` and then `second` (`second · first`).
pub fn compose(first: &LinearCircuit, second: &LinearCircuit) -> Result<LinearCircuit> {
    if first.space != second.space {
        return Err(Error::InvalidConfiguration(
            "cannot compose circuits over different mode spaces".into(),
        ));
    }
    Ok(LinearCircuit {
        matrix: &second.matrix * &first.matrix,
        space: first.space.clone(),
    })
}

fn pair_element(space: &ModeSpace, a: usize, b: usize, block: [[Complex64; 2]; 2]) -> LinearCircuit {
    let mut matrix = DMatrix::identity(space.dim(), space.dim());
    matrix[(a, a)] = block[0][0];
    matrix[(a, b)] = block[0][1];
    matrix[(b, a)] = block[1][0];
    matrix[(b, b)] = block[1][1];
    LinearCircuit {
        matrix,
        space: space.clone(),
    }
}

fn party_pair(space: &ModeSpace, party: usize) -> Result<(usize, usize)> {
    if party >= space.n_parties() {
        return Err(Error::InvalidInput(format!(
            "party {party} out of range for {} parties",
            space.n_parties()
        )));
    }
    Ok((2 * party, 2 * party + 1))
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Half-wave plate with fast axis at `theta` on one party's `(H, V)` pair:
/// `[[cos 2θ, sin 2θ], [sin 2θ, −cos 2θ]]`. At `θ = π/8` this is a Hadamard.
pub fn element_hwp(space: &ModeSpace, theta: f64, party: usize) -> Result<LinearCircuit> {
    let (h, v) = party_pair(space, party)?;
    let (s, c) = (2.0 * theta).sin_cos();
    Ok(pair_element(space, h, v, [[re(c), re(s)], [re(s), re(-c)]]))
}

/// Polarization rotation by `angle`: `H → cos·H + sin·V`, `V → −sin·H + cos·V`.
pub fn element_rotator(space: &ModeSpace, angle: f64, party: usize) -> Result<LinearCircuit> {
    let (h, v) = party_pair(space, party)?;
    let (s, c) = angle.sin_cos();
    Ok(pair_element(space, h, v, [[re(c), re(-s)], [re(s), re(c)]]))
}

/// Multiplies one mode's amplitude by `e^{iφ}`.
pub fn element_phase(space: &ModeSpace, phi: f64, mode: ModeId) -> Result<LinearCircuit> {
    let idx = space.index_of(mode)?;
    let mut matrix = DMatrix::identity(space.dim(), space.dim());
    matrix[(idx, idx)] = Complex64::from_polar(1.0, phi);
    Ok(LinearCircuit {
        matrix,
        space: space.clone(),
    })
}

/// Beamsplitter dilation of a transmittance `eta`: amplitude `√η` stays in
/// `mode` and `√(1−η)` leaks into `ancilla`. Unitary on the pair.
pub fn element_attenuator(
    space: &ModeSpace,
    eta: f64,
    mode: ModeId,
    ancilla: ModeId,
) -> Result<LinearCircuit> {
    if !(0.0..=1.0).contains(&eta) || eta.is_nan() {
        return Err(Error::InvalidConfiguration(format!(
            "transmittance {eta} outside [0, 1]"
        )));
    }
    if ancilla.kind != ModeKind::LossAncilla {
        return Err(Error::InvalidConfiguration(format!(
            "attenuator ancilla {ancilla} is not a loss-ancilla mode"
        )));
    }
    if mode.kind != ModeKind::Signal {
        return Err(Error::InvalidConfiguration(format!(
            "attenuator target {mode} is not a signal mode"
        )));
    }
    let a = space.index_of(mode)?;
    let b = space.index_of(ancilla)?;
    let t = eta.sqrt();
    let r = (1.0 - eta).sqrt();
    Ok(pair_element(space, a, b, [[re(t), re(-r)], [re(r), re(t)]]))
}

/// Routes input mode `i` to output mode `targets[i]`. `targets` must be a
/// permutation of `0..dim`.
pub fn element_permutation(space: &ModeSpace, targets: &[usize]) -> Result<LinearCircuit> {
    let dim = space.dim();
    if targets.len() != dim {
        return Err(Error::InvalidConfiguration(format!(
            "permutation has {} entries, mode space has {dim}",
            targets.len()
        )));
    }
    let mut seen = vec![false; dim];
    let mut matrix = DMatrix::zeros(dim, dim);
    for (src, &dst) in targets.iter().enumerate() {
        if dst >= dim || seen[dst] {
            return Err(Error::InvalidConfiguration(format!(
                "mode routing is not a permutation (target {dst})"
            )));
        }
        seen[dst] = true;
        matrix[(dst, src)] = re(1.0);
    }
    Ok(LinearCircuit {
        matrix,
        space: space.clone(),
    })
}
