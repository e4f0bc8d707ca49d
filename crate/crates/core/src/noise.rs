//! Error-channel parameters and the spin-model couplings derived from them.
//!
//! All entropies and CI values downstream are in units of log 2, so the
//! maximum CI of an `[[n,k,d]]` code is `k`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("probability {0} outside [0,1]")]
    OutOfRange(f64),
    #[error("total Pauli probability {0} exceeds 1")]
    TotalExceedsOne(f64),
    #[error("coupling undefined: channel has a zero-probability component ({0}); use the coset evaluator")]
    ZeroComponent(&'static str),
}

/// How the per-qubit Pauli probabilities were generated. Structured channels
/// keep their exact factorization available to the evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ChannelKind {
    /// Independent X flips with rate `p1` and Z flips with rate `p2`.
    BitPhaseFlip { p1: f64, p2: f64 },
    /// Isotropic depolarizing with total error rate `p`.
    Depolarizing { p: f64 },
    General,
}

/// Per-qubit Pauli error probabilities, uniform across qubits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliChannel {
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
    pub kind: ChannelKind,
}

fn check_prob(p: f64) -> Result<(), NoiseError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(NoiseError::OutOfRange(p));
    }
    Ok(())
}

impl PauliChannel {
    pub fn general(p_x: f64, p_y: f64, p_z: f64) -> Result<Self, NoiseError> {
        for p in [p_x, p_y, p_z] {
            check_prob(p)?;
        }
        let p = p_x + p_y + p_z;
        if p > 1.0 + 1e-12 {
            return Err(NoiseError::TotalExceedsOne(p));
        }
        Ok(Self {
            p_x,
            p_y,
            p_z,
            kind: ChannelKind::General,
        })
    }

    /// Symmetric uncorrelated bit and phase flips: `p_x = p_z = p1(1-p1)`, `p_y = p1^2`.
    pub fn bit_phase_flip(p1: f64) -> Result<Self, NoiseError> {
        Self::bit_phase_flip_asym(p1, p1)
    }

    /// Independent bit flips at `p1` and phase flips at `p2`.
    pub fn bit_phase_flip_asym(p1: f64, p2: f64) -> Result<Self, NoiseError> {
        check_prob(p1)?;
        check_prob(p2)?;
        Ok(Self {
            p_x: p1 * (1.0 - p2),
            p_y: p1 * p2,
            p_z: p2 * (1.0 - p1),
            kind: ChannelKind::BitPhaseFlip { p1, p2 },
        })
    }

    /// Isotropic depolarizing: each Pauli with probability `p/3`.
    pub fn depolarizing(p: f64) -> Result<Self, NoiseError> {
        check_prob(p)?;
        Ok(Self {
            p_x: p / 3.0,
            p_y: p / 3.0,
            p_z: p / 3.0,
            kind: ChannelKind::Depolarizing { p },
        })
    }

    pub fn identity() -> Self {
        Self {
            p_x: 0.0,
            p_y: 0.0,
            p_z: 0.0,
            kind: ChannelKind::General,
        }
    }

    /// Total error probability `p = p_x + p_y + p_z`.
    pub fn total(&self) -> f64 {
        self.p_x + self.p_y + self.p_z
    }

    pub fn p_identity(&self) -> f64 {
        1.0 - self.total()
    }

    /// Spin-model couplings `J_x = ln[(1-p)/p_x]`, `J_z = ln[(1-p)/p_z]`,
    /// `J_1 = ln[(1-p) p_y / (p_x p_z)]`.
    pub fn couplings(&self) -> Result<Couplings, NoiseError> {
        let pi = self.p_identity();
        if pi <= 0.0 {
            return Err(NoiseError::ZeroComponent("1-p"));
        }
        if self.p_x <= 0.0 {
            return Err(NoiseError::ZeroComponent("p_x"));
        }
        if self.p_z <= 0.0 {
            return Err(NoiseError::ZeroComponent("p_z"));
        }
        if self.p_y <= 0.0 {
            return Err(NoiseError::ZeroComponent("p_y"));
        }
        let j_1 = match self.kind {
            // exactly zero by construction; avoids rounding noise in the product form
            ChannelKind::BitPhaseFlip { .. } => 0.0,
            _ => (pi * self.p_y / (self.p_x * self.p_z)).ln(),
        };
        Ok(Couplings {
            j_x: (pi / self.p_x).ln(),
            j_z: (pi / self.p_z).ln(),
            j_1,
        })
    }
}

/// Couplings of the disordered spin model attached to a Pauli channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub j_x: f64,
    pub j_z: f64,
    pub j_1: f64,
}

/// A Pauli channel combined with an i.i.d. erasure probability per qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub channel: PauliChannel,
    pub erasure: f64,
}

impl NoiseSpec {
    pub fn new(channel: PauliChannel, erasure: f64) -> Result<Self, NoiseError> {
        check_prob(erasure)?;
        Ok(Self { channel, erasure })
    }

    /// Probabilities of the five per-qubit disorder outcomes
    /// `(+1,+1), (-1,+1), (-1,-1), (+1,-1), (0,0)`: no error, X, Y, Z, erased.
    pub fn eta_distribution(&self) -> [f64; 5] {
        let e = self.erasure;
        let c = &self.channel;
        [
            c.p_identity() * (1.0 - e),
            c.p_x * (1.0 - e),
            c.p_y * (1.0 - e),
            c.p_z * (1.0 - e),
            e,
        ]
    }
}
