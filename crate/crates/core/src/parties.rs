//! Party identities, their private random strings and the per-qubit
//! encoding each party applies.
//!
//! Alice 1 holds two binary strings (value bits and basis bits) and
//! prepares the block. Every later Alice and Bob 1..n-1 holds a
//! quaternary σ string and a binary Hadamard string and encodes the
//! qubits in transit. Within a party the σ operation is applied first,
//! then H or I. Bob n holds no strings; he only measures.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::PartyError;
use crate::qubit::{prepare, Gate, QubitState, StateLabel};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    Alices,
    Bobs,
}

/// Alice i or Bob j, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartyId {
    pub group: Group,
    pub index: usize,
}

impl PartyId {
    pub const fn alice(index: usize) -> Self {
        Self {
            group: Group::Alices,
            index,
        }
    }

    pub const fn bob(index: usize) -> Self {
        Self {
            group: Group::Bobs,
            index,
        }
    }

    /// Checks `1 <= index <= group size`.
    pub fn checked(self, m: usize, n: usize) -> Result<Self, PartyError> {
        let size = match self.group {
            Group::Alices => m,
            Group::Bobs => n,
        };
        if self.index == 0 || self.index > size {
            return Err(PartyError::IndexOutOfRange {
                index: self.index,
                size,
            });
        }
        Ok(self)
    }

    pub const fn is_preparer(self) -> bool {
        matches!(self.group, Group::Alices) && self.index == 1
    }

    /// Number of σ symbols this party chooses from.
    pub const fn op_alphabet(self) -> u8 {
        if self.is_preparer() {
            2
        } else {
            4
        }
    }

    /// Position in the pipeline Alice 1 → … → Alice m → Bob 1 → … → Bob n.
    pub const fn pipeline_position(self, m: usize) -> usize {
        match self.group {
            Group::Alices => self.index - 1,
            Group::Bobs => m + self.index - 1,
        }
    }

    pub const fn from_pipeline_position(position: usize, m: usize) -> Self {
        if position < m {
            Self::alice(position + 1)
        } else {
            Self::bob(position - m + 1)
        }
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.group {
            Group::Alices => write!(f, "alice-{}", self.index),
            Group::Bobs => write!(f, "bob-{}", self.index),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("invalid party id {0:?}: expected alice-<i> or bob-<j> with index >= 1")]
pub struct ParsePartyIdError(String);

impl FromStr for PartyId {
    type Err = ParsePartyIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParsePartyIdError(s.to_string());
        let (group, index) = s.split_once('-').ok_or_else(err)?;
        let index: usize = index.parse().map_err(|_| err())?;
        if index == 0 {
            return Err(err());
        }
        match group.to_ascii_lowercase().as_str() {
            "alice" => Ok(Self::alice(index)),
            "bob" => Ok(Self::bob(index)),
            _ => Err(err()),
        }
    }
}

impl Serialize for PartyId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PartyId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A party's private strings for one block.
///
/// For Alice 1 `ops` holds her value bits (A₁); for everyone else it
/// holds σ symbols (A_i or C_j). `had` is B_i or D_j.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartySecret {
    party: PartyId,
    ops: Vec<u8>,
    had: Vec<bool>,
}

impl PartySecret {
    pub fn new(party: PartyId, ops: Vec<u8>, had: Vec<bool>) -> Result<Self, PartyError> {
        if ops.is_empty() {
            return Err(PartyError::EmptyBlock);
        }
        if ops.len() != had.len() {
            return Err(PartyError::LengthMismatch {
                party,
                ops: ops.len(),
                had: had.len(),
            });
        }
        let alphabet = party.op_alphabet();
        if let Some((position, &symbol)) = ops.iter().enumerate().find(|(_, &s)| s >= alphabet) {
            return Err(PartyError::InvalidSymbol {
                party,
                position,
                symbol,
            });
        }
        Ok(Self { party, ops, had })
    }

    pub fn party(&self) -> PartyId {
        self.party
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[u8] {
        &self.ops
    }

    pub fn had(&self) -> &[bool] {
        &self.had
    }

    /// Symbols at position `k` (0-based).
    pub fn symbols_at(&self, k: usize) -> (u8, bool) {
        (self.ops[k], self.had[k])
    }

    /// σ then H/I for position `k`. Not meaningful for Alice 1.
    pub fn gates_at(&self, k: usize) -> [Gate; 2] {
        let (op, had) = self.symbols_at(k);
        encoding_gates(op, had)
    }

    /// Reveals this party's symbols at `positions` (0-based).
    pub fn announce(&self, positions: &[usize]) -> Result<Announcement, PartyError> {
        let size = self.len();
        if let Some(&position) = positions.iter().find(|&&p| p >= size) {
            return Err(PartyError::PositionOutOfRange { position, size });
        }
        Ok(Announcement {
            party: self.party,
            positions: positions.to_vec(),
            revealed_ops: positions.iter().map(|&p| self.ops[p]).collect(),
            revealed_had: positions.iter().map(|&p| self.had[p]).collect(),
        })
    }
}

/// Public disclosure of a party's symbols at selected positions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Announcement {
    pub party: PartyId,
    pub positions: Vec<usize>,
    pub revealed_ops: Vec<u8>,
    pub revealed_had: Vec<bool>,
}

impl Announcement {
    /// Checks the revealed symbols against the party's actual secret.
    pub fn matches(&self, secret: &PartySecret) -> bool {
        self.party == secret.party()
            && self.positions.len() == self.revealed_ops.len()
            && self.positions.len() == self.revealed_had.len()
            && self.positions.iter().enumerate().all(|(i, &p)| {
                p < secret.len()
                    && secret.ops[p] == self.revealed_ops[i]
                    && secret.had[p] == self.revealed_had[i]
            })
    }
}

/// Draws a party's strings uniformly from its alphabets.
pub fn generate_secret<R: Rng + ?Sized>(
    party: PartyId,
    block_size: usize,
    rng: &mut R,
) -> Result<PartySecret, PartyError> {
    if block_size == 0 {
        return Err(PartyError::EmptyBlock);
    }
    let alphabet = party.op_alphabet();
    let ops = (0..block_size)
        .map(|_| rng.random_range(0..alphabet))
        .collect();
    let had = (0..block_size).map(|_| rng.random::<bool>()).collect();
    PartySecret::new(party, ops, had)
}

/// Alice 1's block labels (a¹_k, b¹_k).
pub fn initial_prepare(secret: &PartySecret) -> Result<Vec<StateLabel>, PartyError> {
    if !secret.party().is_preparer() {
        return Err(PartyError::NotPreparer(secret.party()));
    }
    Ok(secret
        .ops
        .iter()
        .zip(&secret.had)
        .map(|(&a, &b)| StateLabel::from_bits(a == 1, b))
        .collect())
}

/// Alice 1's block as state vectors.
pub fn initial_states<T: Scalar>(secret: &PartySecret) -> Result<Vec<QubitState<T>>, PartyError> {
    Ok(initial_prepare(secret)?.into_iter().map(prepare).collect())
}

/// The two gates a party applies for symbols `(op, had)`, in order.
///
/// # Panics
///
/// If `op > 3`.
pub fn encoding_gates(op: u8, had: bool) -> [Gate; 2] {
    let sigma = Gate::sigma(op).unwrap_or_else(|| panic!("σ symbol {op} outside 0..=3"));
    [sigma, Gate::hadamard_if(had)]
}

/// `(H or I) · σ_op · state`.
pub fn encode_qubit<T: Scalar>(state: &QubitState<T>, op: u8, had: bool) -> QubitState<T> {
    let [sigma, h] = encoding_gates(op, had);
    state.apply(sigma).apply(h)
}

pub fn encode_block<T: Scalar>(
    states: &[QubitState<T>],
    secret: &PartySecret,
) -> Result<Vec<QubitState<T>>, PartyError> {
    if secret.party().is_preparer() {
        return Err(PartyError::PreparerCannotEncode);
    }
    if states.len() != secret.len() {
        return Err(PartyError::BlockLength {
            expected: secret.len(),
            got: states.len(),
        });
    }
    Ok(states
        .iter()
        .enumerate()
        .map(|(k, state)| {
            let (op, had) = secret.symbols_at(k);
            encode_qubit(state, op, had)
        })
        .collect())
}

/// Symbolic counterpart of [`encode_qubit`].
pub fn label_shift(label: StateLabel, op: u8, had: bool) -> StateLabel {
    let [sigma, h] = encoding_gates(op, had);
    h.apply_label(sigma.apply_label(label))
}

/// Inverse of [`label_shift`]: the label that `(op, had)` maps onto `label`.
///
/// H and every σ label action are involutions, and σ leaves the basis
/// untouched, so undoing H and then re-applying σ inverts the shift.
pub fn label_unshift(label: StateLabel, op: u8, had: bool) -> StateLabel {
    let [sigma, h] = encoding_gates(op, had);
    sigma.apply_label(h.apply_label(label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::Basis;
    use crate::Qubit;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lbl(a: u8, b: u8) -> StateLabel {
        StateLabel::from_bits(a == 1, b == 1)
    }

    #[test]
    fn secret_shapes_follow_alphabets() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a1 = generate_secret(PartyId::alice(1), 4, &mut rng).unwrap();
        assert_eq!(a1.len(), 4);
        assert!(a1.ops().iter().all(|&s| s < 2));
        let a2 = generate_secret(PartyId::alice(2), 4, &mut rng).unwrap();
        assert_eq!(a2.had().len(), 4);
        assert!(a2.ops().iter().all(|&s| s < 4));
        assert_eq!(
            generate_secret(PartyId::bob(1), 0, &mut rng),
            Err(PartyError::EmptyBlock)
        );
    }

    #[test]
    fn secret_symbols_are_uniform() {
        // Chi-square goodness of fit on 10^5 symbols, 3 degrees of freedom;
        // 16.27 is the 0.999 quantile. Each count also sits within 3 sigma.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = 100_000;
        let secret = generate_secret(PartyId::bob(1), n, &mut rng).unwrap();
        let mut counts = [0usize; 4];
        for &s in secret.ops() {
            counts[s as usize] += 1;
        }
        let expected = n as f64 / 4.0;
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 16.27, "chi2 = {chi2}, counts = {counts:?}");
        for c in counts {
            assert!((c as f64 - expected).abs() <= 3.0 * sigma);
        }
        let ones = secret.had().iter().filter(|&&b| b).count() as f64;
        assert!((ones - n as f64 / 2.0).abs() <= 3.0 * (n as f64 * 0.25).sqrt());
    }

    #[test]
    fn rejects_bad_secrets() {
        assert!(matches!(
            PartySecret::new(PartyId::alice(1), vec![2], vec![false]),
            Err(PartyError::InvalidSymbol { symbol: 2, .. })
        ));
        assert!(matches!(
            PartySecret::new(PartyId::bob(1), vec![0, 1], vec![false]),
            Err(PartyError::LengthMismatch { .. })
        ));
        assert!(PartySecret::new(PartyId::alice(2), vec![3], vec![true]).is_ok());
    }

    #[test]
    fn initial_prepare_examples() {
        let s = PartySecret::new(PartyId::alice(1), vec![0], vec![false]).unwrap();
        assert_eq!(initial_prepare(&s).unwrap(), vec![lbl(0, 0)]);
        let s = PartySecret::new(PartyId::alice(1), vec![1], vec![true]).unwrap();
        assert_eq!(initial_prepare(&s).unwrap(), vec![lbl(1, 1)]);
        let s = PartySecret::new(PartyId::alice(1), vec![0, 1], vec![true, false]).unwrap();
        assert_eq!(initial_prepare(&s).unwrap(), vec![lbl(0, 1), lbl(1, 0)]);

        let other = PartySecret::new(PartyId::alice(2), vec![0], vec![false]).unwrap();
        assert_eq!(
            initial_prepare(&other),
            Err(PartyError::NotPreparer(PartyId::alice(2)))
        );
    }

    #[test]
    fn encode_qubit_examples() {
        let zero: Qubit = prepare(lbl(0, 0));
        assert!(encode_qubit(&zero, 3, false).eq_up_to_phase(&prepare(lbl(1, 0)), 1e-12));
        assert!(encode_qubit(&zero, 0, true).eq_up_to_phase(&prepare(lbl(0, 1)), 1e-12));
        let plus: Qubit = prepare(lbl(0, 1));
        assert!(encode_qubit(&plus, 2, true).eq_up_to_phase(&prepare(lbl(1, 0)), 1e-12));
    }

    #[test]
    fn encode_block_examples() {
        let bob = PartyId::bob(1);
        let zero: Qubit = prepare(lbl(0, 0));
        let one: Qubit = prepare(lbl(1, 0));

        let s = PartySecret::new(bob, vec![0], vec![false]).unwrap();
        assert_eq!(encode_block(&[zero], &s).unwrap(), vec![zero]);

        let s = PartySecret::new(bob, vec![3, 3], vec![false, false]).unwrap();
        let out = encode_block(&[zero, one], &s).unwrap();
        assert!(out[0].eq_up_to_phase(&one, 1e-12));
        assert!(out[1].eq_up_to_phase(&zero, 1e-12));

        let s = PartySecret::new(bob, vec![1], vec![true]).unwrap();
        let out = encode_block(&[zero], &s).unwrap();
        assert!(out[0].eq_up_to_phase(&prepare(lbl(1, 1)), 1e-12));

        assert!(matches!(
            encode_block(
                &[zero, one],
                &PartySecret::new(bob, vec![0], vec![false]).unwrap()
            ),
            Err(PartyError::BlockLength {
                expected: 1,
                got: 2
            })
        ));
        let a1 = PartySecret::new(PartyId::alice(1), vec![0], vec![false]).unwrap();
        assert_eq!(
            encode_block(&[zero], &a1),
            Err(PartyError::PreparerCannotEncode)
        );
    }

    #[test]
    fn label_shift_examples() {
        assert_eq!(label_shift(lbl(0, 0), 0, false), lbl(0, 0));
        assert_eq!(label_shift(lbl(0, 0), 1, false), lbl(1, 0));
        assert_eq!(label_shift(lbl(1, 1), 2, true), lbl(0, 0));
    }

    #[test]
    fn unshift_inverts_shift() {
        for label in StateLabel::ALL {
            for op in 0..4 {
                for had in [false, true] {
                    assert_eq!(label_unshift(label_shift(label, op, had), op, had), label);
                }
            }
        }
    }

    #[test]
    fn announcement_reveals_secret_symbols() {
        let s = PartySecret::new(
            PartyId::alice(2),
            vec![0, 1, 2, 3],
            vec![true, false, true, false],
        )
        .unwrap();
        let a = s.announce(&[1, 3]).unwrap();
        assert_eq!(a.revealed_ops, vec![1, 3]);
        assert_eq!(a.revealed_had, vec![false, false]);
        assert!(a.matches(&s));
        assert!(matches!(
            s.announce(&[4]),
            Err(PartyError::PositionOutOfRange {
                position: 4,
                size: 4
            })
        ));
    }

    #[test]
    fn party_id_text_form() {
        assert_eq!("alice-3".parse::<PartyId>().unwrap(), PartyId::alice(3));
        assert_eq!(PartyId::bob(2).to_string(), "bob-2");
        assert!("carol-1".parse::<PartyId>().is_err());
        assert!("bob-0".parse::<PartyId>().is_err());
        assert_eq!(
            PartyId::alice(4).checked(3, 2),
            Err(PartyError::IndexOutOfRange { index: 4, size: 3 })
        );
        for pos in 0..6 {
            assert_eq!(
                PartyId::from_pipeline_position(pos, 3).pipeline_position(3),
                pos
            );
        }
    }

    #[test]
    fn hadamard_only_party_flips_basis() {
        let s = PartySecret::new(PartyId::bob(1), vec![2], vec![true]).unwrap();
        let out = label_shift(lbl(0, 0), s.ops()[0], s.had()[0]);
        assert_eq!(out.basis, Basis::X);
    }
}
