//! Deterministic simulator for quantum secret sharing between a group of
//! Alices and a group of Bobs using single photons and unitary encodings.
//!
//! Alice 1 prepares a block of qubits in the four conjugate-basis states,
//! Alices 2..m and Bobs 1..n-1 each apply a σ operation and an optional
//! Hadamard, and Bob n measures in the basis given by the XOR of everyone's
//! Hadamard bits. The states Alice m sent become the shared key, which only
//! the full Alice group or the full Bob group can reconstruct.

pub mod channel;
pub mod error;
pub mod experiment;
pub mod parties;
pub mod protocol;
pub mod qubit;
pub mod scalar;

pub use error::{ConfigError, PartyError, ReconstructionError, SecrecyError, StateError};
pub use parties::{Announcement, Group, PartyId, PartySecret};
pub use qubit::{Basis, Gate, QubitState, StateLabel};
pub use scalar::Scalar;

/// Double-precision qubit; the precision the protocol engine runs at by default.
pub type Qubit = qubit::QubitState<f64>;
/// Single-precision qubit.
pub type Qubit32 = qubit::QubitState<f32>;
/// Double-precision photon signal.
pub type Signal = channel::PhotonSignal<f64>;
