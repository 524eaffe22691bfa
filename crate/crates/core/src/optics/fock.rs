use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;

use super::circuit::LinearCircuit;
use crate::{Error, Result, ZERO_TOL};

/// Photon count per mode, indexed like the owning [`ModeSpace`](super::ModeSpace).
pub type Occupation = Vec<u8>;

pub const DEFAULT_PHOTON_CAP: usize = 8;

const UNITARY_TOL: f64 = 1e-10;

/// Superposition of photon-number basis states over `dim` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    dim: usize,
    terms: BTreeMap<Occupation, Complex64>,
    photon_cap: usize,
}

fn total(occ: &[u8]) -> usize {
    occ.iter().map(|&n| n as usize).sum()
}

fn factorial(n: u8) -> f64 {
    (1..=n as u32).map(f64::from).product()
}

impl FockState {
    pub fn vacuum(dim: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0; dim], Complex64::new(1.0, 0.0));
        FockState {
            dim,
            terms,
            photon_cap: DEFAULT_PHOTON_CAP,
        }
    }

    /// Builds a state from explicit terms. Zero amplitudes are dropped and
    /// repeated occupations are summed.
    pub fn from_terms<I>(dim: usize, terms: I, photon_cap: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (Occupation, Complex64)>,
    {
        let mut map: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "occupation vector of length {} in a {dim}-mode state",
                    occ.len()
                )));
            }
            let n = total(&occ);
            if n > photon_cap {
                return Err(Error::Capacity {
                    photons: n,
                    cap: photon_cap,
                });
            }
            *map.entry(occ).or_default() += amp;
        }
        map.retain(|_, a| a.norm() > ZERO_TOL);
        Ok(FockState {
            dim,
            terms: map,
            photon_cap,
        })
    }

    /// `Π_f (Σ_(m, c) ∈ f  c·a†_m) |0⟩`, one creation form per photon.
    ///
    /// The result is not normalized; forms acting on distinct modes with unit
    /// norm give a normalized product state.
    pub fn from_creation_product(
        dim: usize,
        forms: &[Vec<(usize, Complex64)>],
        photon_cap: usize,
    ) -> Result<Self> {
        if forms.len() > photon_cap {
            return Err(Error::Capacity {
                photons: forms.len(),
                cap: photon_cap,
            });
        }
        if let Some(&(m, _)) = forms.iter().flatten().find(|(m, _)| *m >= dim) {
            return Err(Error::InvalidInput(format!(
                "creation operator on mode {m} in a {dim}-mode state"
            )));
        }
        let mut poly: HashMap<Occupation, Complex64> = HashMap::new();
        poly.insert(vec![0; dim], Complex64::new(1.0, 0.0));
        for form in forms {
            poly = multiply_form(&poly, form.iter().copied());
        }
        let terms = poly.into_iter().map(|(occ, coef)| {
            let amp = coef * occ.iter().map(|&n| factorial(n)).product::<f64>().sqrt();
            (occ, amp)
        });
        FockState::from_terms(dim, terms, photon_cap)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn photon_cap(&self) -> usize {
        self.photon_cap
    }

    pub fn with_photon_cap(mut self, cap: usize) -> Result<Self> {
        if let Some(n) = self.max_photons().filter(|&n| n > cap) {
            return Err(Error::Capacity { photons: n, cap });
        }
        self.photon_cap = cap;
        Ok(self)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self, occ: &[u8]) -> Complex64 {
        self.terms.get(occ).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm <= ZERO_TOL {
            return Err(Error::InvalidInput("cannot normalize the zero state".into()));
        }
        for a in self.terms.values_mut() {
            *a /= norm;
        }
        Ok(self)
    }

    /// Largest total photon number among the terms.
    pub fn max_photons(&self) -> Option<usize> {
        self.terms.keys().map(|o| total(o)).max()
    }

    /// Same state embedded in a larger mode space; new modes are vacuum.
    pub fn padded(&self, dim: usize) -> Result<Self> {
        if dim < self.dim {
            return Err(Error::InvalidInput(format!(
                "cannot embed a {}-mode state in {dim} modes",
                self.dim
            )));
        }
        let terms = self
            .terms
            .iter()
            .map(|(occ, &a)| {
                let mut o = occ.clone();
                o.resize(dim, 0);
                (o, a)
            })
            .collect();
        Ok(FockState {
            dim,
            terms,
            photon_cap: self.photon_cap,
        })
    }
}

fn multiply_form(
    poly: &HashMap<Occupation, Complex64>,
    form: impl Iterator<Item = (usize, Complex64)> + Clone,
) -> HashMap<Occupation, Complex64> {
    let mut next: HashMap<Occupation, Complex64> = HashMap::with_capacity(poly.len() * 2);
    for (mono, &coef) in poly {
        for (k, u) in form.clone() {
            let mut m = mono.clone();
            m[k] += 1;
            *next.entry(m).or_default() += coef * u;
        }
    }
    next
}

/// Propagates a Fock state through a unitary circuit.
///
/// Each input creation operator `a†_m` is replaced by `Σ_k U[k, m] a†_k`,
/// the product is expanded, and monomials are converted back to normalized
/// occupation amplitudes (the `√n!` factors on both sides). Lossy circuits
/// must be given in dilated form, with their loss ancillas; a state defined
/// on the signal modes only is padded with vacuum ancillas.
pub fn propagate_fock(circuit: &LinearCircuit, state: &FockState) -> Result<FockState> {
    let dim = circuit.dim();
    if let Some(n) = state.max_photons().filter(|&n| n > state.photon_cap) {
        return Err(Error::Capacity {
            photons: n,
            cap: state.photon_cap,
        });
    }
    let state = if state.dim < dim {
        state.padded(dim)?
    } else if state.dim > dim {
        return Err(Error::InvalidInput(format!(
            "{}-mode state through a {dim}-mode circuit",
            state.dim
        )));
    } else {
        state.clone()
    };
    if !circuit.is_unitary(UNITARY_TOL) {
        return Err(Error::InvalidConfiguration(
            "Fock propagation needs a unitary circuit; build lossy circuits with loss ancillas"
                .into(),
        ));
    }
    let columns: Vec<Vec<(usize, Complex64)>> = (0..dim).map(|m| circuit.column_terms(m)).collect();

    let mut out: HashMap<Occupation, Complex64> = HashMap::new();
    for (occ, &amp) in state.terms() {
        let norm_in: f64 = occ.iter().map(|&n| factorial(n)).product::<f64>().sqrt();
        let mut poly: HashMap<Occupation, Complex64> = HashMap::new();
        poly.insert(vec![0; dim], amp / norm_in);
        for (m, &n) in occ.iter().enumerate() {
            for _ in 0..n {
                poly = multiply_form(&poly, columns[m].iter().copied());
            }
        }
        for (mono, coef) in poly {
            let norm_out: f64 = mono.iter().map(|&n| factorial(n)).product::<f64>().sqrt();
            *out.entry(mono).or_default() += coef * norm_out;
        }
    }
    FockState::from_terms(dim, out, state.photon_cap)
}
