//! Four-state single-qubit algebra.
//!
//! States are tracked symbolically as `(basis, bit, sign)`. Only the BB84
//! states and the two encoding operations `I` and `U = iσ_y` ever occur, so no
//! amplitude vectors are needed. The global sign is kept so the flip table can
//! be checked against the matrix form of `U`, but it never changes a
//! measurement outcome.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Measurement / preparation basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    /// Eigenbasis of Pauli Z: `|0⟩`, `|1⟩`.
    Z,
    /// Eigenbasis of Pauli X: `|+⟩`, `|−⟩`.
    X,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::Z, Basis::X];

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random::<bool>() {
            Basis::X
        } else {
            Basis::Z
        }
    }
}

/// Global phase of a state, `+1` or `−1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn negate(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// One of `±|0⟩, ±|1⟩, ±|+⟩, ±|−⟩`.
///
/// `bit` is the eigenvalue label within `basis`: `(Z,0)=|0⟩`, `(Z,1)=|1⟩`,
/// `(X,0)=|+⟩`, `(X,1)=|−⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhotonState {
    pub basis: Basis,
    pub bit: u8,
    pub sign: Sign,
}

impl PhotonState {
    pub fn new(basis: Basis, bit: u8) -> Self {
        debug_assert!(bit <= 1);
        Self {
            basis,
            bit: bit & 1,
            sign: Sign::Plus,
        }
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.sign = sign;
        self
    }

    /// All four states with positive sign.
    pub fn all() -> [PhotonState; 4] {
        [
            PhotonState::new(Basis::Z, 0),
            PhotonState::new(Basis::Z, 1),
            PhotonState::new(Basis::X, 0),
            PhotonState::new(Basis::X, 1),
        ]
    }

    /// Uniformly random choice among the four states.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let idx: u8 = rng.random_range(0..4);
        let basis = if idx & 2 == 0 { Basis::Z } else { Basis::X };
        PhotonState::new(basis, idx & 1)
    }

    /// Probability that measuring in `basis` yields 1.
    pub fn prob_one(&self, basis: Basis) -> f64 {
        if basis == self.basis {
            f64::from(self.bit)
        } else {
            0.5
        }
    }
}

/// Encoding operation applied by the receiver before returning a photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FlipOp {
    /// `I = |0⟩⟨0| + |1⟩⟨1|`
    Identity,
    /// `U = iσ_y = |0⟩⟨1| − |1⟩⟨0|`
    Flip,
}

impl FlipOp {
    pub fn from_flip(flip: bool) -> Self {
        if flip {
            FlipOp::Flip
        } else {
            FlipOp::Identity
        }
    }

    pub fn is_flip(self) -> bool {
        matches!(self, FlipOp::Flip)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        FlipOp::from_flip(rng.random::<bool>())
    }
}

/// Draws one of the four states with probability 1/4 each.
pub fn prepare_random<R: Rng + ?Sized>(rng: &mut R) -> PhotonState {
    PhotonState::random(rng)
}

/// Applies `op` to `state`.
///
/// `U` maps `|0⟩ → −|1⟩`, `|1⟩ → |0⟩`, `|+⟩ → |−⟩`, `|−⟩ → −|+⟩`. The basis is
/// preserved and the bit toggled in every case.
pub fn apply(op: FlipOp, state: PhotonState) -> PhotonState {
    match op {
        FlipOp::Identity => state,
        FlipOp::Flip => {
            let negate = matches!(
                (state.basis, state.bit),
                (Basis::Z, 0) | (Basis::X, 1)
            );
            PhotonState {
                basis: state.basis,
                bit: state.bit ^ 1,
                sign: if negate { state.sign.negate() } else { state.sign },
            }
        }
    }
}

/// Projective measurement in `basis`. Deterministic in the preparation basis,
/// a fair coin in the conjugate basis.
pub fn measure<R: Rng + ?Sized>(state: PhotonState, basis: Basis, rng: &mut R) -> u8 {
    if basis == state.basis {
        state.bit
    } else {
        u8::from(rng.random::<bool>())
    }
}
