//! Single-qubit state vectors, the protocol gate set, projective
//! measurement in the Z and X bases, and the symbolic label algebra that
//! tracks the four conjugate-basis states up to global phase.

use std::fmt;

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::StateError;
use crate::scalar::Scalar;

/// Projective measurement basis. `Z` is {|0⟩, |1⟩}, `X` is {|+⟩, |−⟩}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    pub const fn from_bit(bit: bool) -> Self {
        if bit {
            Basis::X
        } else {
            Basis::Z
        }
    }

    pub const fn bit(self) -> bool {
        matches!(self, Basis::X)
    }

    pub const fn flipped(self) -> Self {
        match self {
            Basis::Z => Basis::X,
            Basis::X => Basis::Z,
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Basis::from_bit(rng.random::<bool>())
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Z => f.write_str("Z"),
            Basis::X => f.write_str("X"),
        }
    }
}

/// Which of the four protocol states a qubit is in, ignoring global phase.
///
/// `(value, basis)` = `(a, b)` identifies |ψ_ab⟩: (0,Z) = |0⟩, (1,Z) = |1⟩,
/// (0,X) = |+⟩, (1,X) = |−⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateLabel {
    pub value: bool,
    pub basis: Basis,
}

impl StateLabel {
    pub const ALL: [StateLabel; 4] = [
        StateLabel::new(false, Basis::Z),
        StateLabel::new(true, Basis::Z),
        StateLabel::new(false, Basis::X),
        StateLabel::new(true, Basis::X),
    ];

    pub const fn new(value: bool, basis: Basis) -> Self {
        Self { value, basis }
    }

    /// Label from the `(a, b)` bit pair; `b = 1` selects the X basis.
    pub const fn from_bits(value: bool, basis_bit: bool) -> Self {
        Self::new(value, Basis::from_bit(basis_bit))
    }

    pub const fn basis_bit(self) -> bool {
        self.basis.bit()
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{})",
            u8::from(self.value),
            u8::from(self.basis_bit())
        )
    }
}

/// The protocol's gate set: σ₀ = I, σ₁ = iσ_y, σ₂ = σ_z, σ₃ = σ_x, H and I.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    Sigma0,
    Sigma1,
    Sigma2,
    Sigma3,
    Hadamard,
    Identity,
}

impl Gate {
    pub const ALL: [Gate; 6] = [
        Gate::Sigma0,
        Gate::Sigma1,
        Gate::Sigma2,
        Gate::Sigma3,
        Gate::Hadamard,
        Gate::Identity,
    ];

    /// σ operation selected by a quaternary symbol.
    pub fn sigma(symbol: u8) -> Option<Gate> {
        match symbol {
            0 => Some(Gate::Sigma0),
            1 => Some(Gate::Sigma1),
            2 => Some(Gate::Sigma2),
            3 => Some(Gate::Sigma3),
            _ => None,
        }
    }

    /// H when the bit is set, I otherwise.
    pub const fn hadamard_if(bit: bool) -> Gate {
        if bit {
            Gate::Hadamard
        } else {
            Gate::Identity
        }
    }

    /// Row-major 2×2 matrix in the computational basis.
    pub fn matrix<T: Scalar>(self) -> [[Complex<T>; 2]; 2] {
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let h = Complex::new(T::frac_1_sqrt_2(), T::zero());
        match self {
            Gate::Sigma0 | Gate::Identity => [[one, zero], [zero, one]],
            // -|1><0| + |0><1|
            Gate::Sigma1 => [[zero, one], [-one, zero]],
            Gate::Sigma2 => [[one, zero], [zero, -one]],
            Gate::Sigma3 => [[zero, one], [one, zero]],
            Gate::Hadamard => [[h, h], [h, -h]],
        }
    }

    /// Action on labels: U|ψ_ab⟩ = e^{iφ}|ψ_a'b'⟩.
    pub const fn apply_label(self, label: StateLabel) -> StateLabel {
        let StateLabel { value, basis } = label;
        match self {
            Gate::Sigma0 | Gate::Identity => label,
            Gate::Sigma1 => StateLabel::new(!value, basis),
            Gate::Sigma2 => StateLabel::new(value ^ basis.bit(), basis),
            Gate::Sigma3 => StateLabel::new(value ^ !basis.bit(), basis),
            Gate::Hadamard => StateLabel::new(value, basis.flipped()),
        }
    }
}

/// Free-function form of [`Gate::apply_label`].
pub const fn apply_label(label: StateLabel, gate: Gate) -> StateLabel {
    gate.apply_label(label)
}

/// Normalized single-qubit state vector `amp0|0⟩ + amp1|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState<T: Scalar = f64> {
    amp0: Complex<T>,
    amp1: Complex<T>,
}

impl<T: Scalar> QubitState<T> {
    pub fn new(amp0: Complex<T>, amp1: Complex<T>) -> Result<Self, StateError> {
        let norm = amp0.norm_sqr() + amp1.norm_sqr();
        if (norm - T::one()).abs() > T::tolerance() {
            return Err(StateError::NotNormalized(norm.to_f64_lossy()));
        }
        Ok(Self { amp0, amp1 })
    }

    pub fn from_real(amp0: T, amp1: T) -> Result<Self, StateError> {
        Self::new(Complex::new(amp0, T::zero()), Complex::new(amp1, T::zero()))
    }

    /// The eigenvector of `basis` with eigen-outcome `outcome`.
    pub fn basis_state(basis: Basis, outcome: bool) -> Self {
        prepare(StateLabel::new(outcome, basis))
    }

    pub fn amp0(&self) -> Complex<T> {
        self.amp0
    }

    pub fn amp1(&self) -> Complex<T> {
        self.amp1
    }

    pub fn norm_sqr(&self) -> T {
        self.amp0.norm_sqr() + self.amp1.norm_sqr()
    }

    pub fn apply(&self, gate: Gate) -> Self {
        let [[u00, u01], [u10, u11]] = gate.matrix::<T>();
        Self {
            amp0: u00 * self.amp0 + u01 * self.amp1,
            amp1: u10 * self.amp0 + u11 * self.amp1,
        }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amp0.conj() * other.amp0 + self.amp1.conj() * other.amp1
    }

    /// True when `other = e^{iφ}·self` within `tol`.
    pub fn eq_up_to_phase(&self, other: &Self, tol: T) -> bool {
        (T::one() - self.inner(other).norm()).abs() <= tol
    }

    /// Born probability of `outcome` when measuring in `basis`.
    pub fn probability(&self, basis: Basis, outcome: bool) -> T {
        let (a0, a1) = basis_amplitudes::<T>(basis, outcome);
        (self.amp0.scale(a0) + self.amp1.scale(a1)).norm_sqr()
    }

    /// The protocol label this state matches up to phase, if any.
    pub fn label(&self) -> Option<StateLabel> {
        StateLabel::ALL
            .into_iter()
            .find(|l| prepare::<T>(*l).eq_up_to_phase(self, T::tolerance()))
    }
}

/// Real amplitudes of the (conjugated) measurement bra for `basis`/`outcome`.
fn basis_amplitudes<T: Scalar>(basis: Basis, outcome: bool) -> (T, T) {
    let h = T::frac_1_sqrt_2();
    match (basis, outcome) {
        (Basis::Z, false) => (T::one(), T::zero()),
        (Basis::Z, true) => (T::zero(), T::one()),
        (Basis::X, false) => (h, h),
        (Basis::X, true) => (h, -h),
    }
}

/// Exact state vector of |ψ_ab⟩ with real amplitudes.
pub fn prepare<T: Scalar>(label: StateLabel) -> QubitState<T> {
    let (amp0, amp1) = basis_amplitudes::<T>(label.basis, label.value);
    QubitState {
        amp0: Complex::new(amp0, T::zero()),
        amp1: Complex::new(amp1, T::zero()),
    }
}

pub fn apply_gate<T: Scalar>(state: &QubitState<T>, gate: Gate) -> QubitState<T> {
    state.apply(gate)
}

/// Samples an outcome with Born-rule probabilities.
///
/// Exactly one `f64` is drawn per call. Probabilities within the scalar
/// tolerance of 0 or 1 are snapped so eigenstates measure deterministically.
pub fn sample_outcome<T: Scalar, R: Rng + ?Sized>(p_zero: T, rng: &mut R) -> bool {
    let u: f64 = rng.random();
    if p_zero >= T::one() - T::tolerance() {
        false
    } else if p_zero <= T::tolerance() {
        true
    } else {
        u >= p_zero.to_f64_lossy()
    }
}

/// Projective measurement; the post-measurement state is discarded.
pub fn measure<T: Scalar, R: Rng + ?Sized>(
    state: &QubitState<T>,
    basis: Basis,
    rng: &mut R,
) -> bool {
    sample_outcome(state.probability(basis, false), rng)
}
