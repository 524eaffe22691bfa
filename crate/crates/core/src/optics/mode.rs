use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Polarization of a single optical mode. `H` encodes logical 0, `V` logical 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::H, Polarization::V];

    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Polarization::H
        } else {
            Polarization::V
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::H => "H",
            Polarization::V => "V",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeKind {
    Signal,
    /// Environment mode that absorbs the amplitude removed by one lossy
    /// segment. Never carries input amplitude.
    LossAncilla,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeId {
    pub party: usize,
    pub pol: Polarization,
    pub kind: ModeKind,
}

impl ModeId {
    pub fn signal(party: usize, pol: Polarization) -> Self {
        ModeId {
            party,
            pol,
            kind: ModeKind::Signal,
        }
    }

    pub fn ancilla(party: usize, pol: Polarization) -> Self {
        ModeId {
            party,
            pol,
            kind: ModeKind::LossAncilla,
        }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ModeKind::Signal => write!(f, "{}{}", self.party, self.pol),
            ModeKind::LossAncilla => write!(f, "loss{}{}", self.party, self.pol),
        }
    }
}

/// Ordered set of modes defining a circuit's coordinate system.
///
/// Signal modes come first as `(party 0 H, party 0 V, party 1 H, ...)`.
/// When loss ancillas are present there is one per lossy segment: the
/// ancilla `(j, H)` belongs to party `j`'s delay line and `(j, V)` to the
/// quantum channel leaving party `j`. The ancilla block repeats the signal
/// ordering. Because signal modes are a prefix, a state or field defined on
/// the signal modes alone can be padded with vacuum ancillas by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeSpace {
    n_parties: usize,
    modes: Vec<ModeId>,
}

pub fn build_mode_space(n_parties: usize, with_loss_ancillas: bool) -> Result<ModeSpace> {
    if n_parties < 2 {
        return Err(Error::InvalidConfiguration(format!(
            "at least 2 parties are required, got {n_parties}"
        )));
    }
    let mut modes = Vec::with_capacity(4 * n_parties);
    for party in 0..n_parties {
        for pol in Polarization::BOTH {
            modes.push(ModeId::signal(party, pol));
        }
    }
    if with_loss_ancillas {
        for party in 0..n_parties {
            for pol in Polarization::BOTH {
                modes.push(ModeId::ancilla(party, pol));
            }
        }
    }
    Ok(ModeSpace { n_parties, modes })
}

impl ModeSpace {
    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn n_signal(&self) -> usize {
        2 * self.n_parties
    }

    pub fn has_ancillas(&self) -> bool {
        self.modes.len() > self.n_signal()
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn index_of(&self, mode: ModeId) -> Result<usize> {
        if mode.party >= self.n_parties {
            return Err(Error::InvalidInput(format!(
                "mode {mode} refers to party {} of {}",
                mode.party, self.n_parties
            )));
        }
        let local = 2 * mode.party + mode.pol.bit() as usize;
        match mode.kind {
            ModeKind::Signal => Ok(local),
            ModeKind::LossAncilla if self.has_ancillas() => Ok(self.n_signal() + local),
            ModeKind::LossAncilla => Err(Error::InvalidInput(format!(
                "mode space has no loss ancillas, cannot address {mode}"
            ))),
        }
    }

    /// Index of a signal mode; panics on an out-of-range party.
    pub fn signal_index(&self, party: usize, pol: Polarization) -> usize {
        assert!(party < self.n_parties, "party {party} out of range");
        2 * party + pol.bit() as usize
    }
}
