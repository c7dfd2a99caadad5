//! Label bookkeeping shared by the checks and both sides' key
//! reconstruction.

use crate::error::{PartyError, ReconstructionError};
use crate::parties::{label_shift, label_unshift, PartyId, PartySecret};
use crate::protocol::outcome::KeyMeasurements;
use crate::qubit::{Basis, StateLabel};

/// Label produced by a chain of symbol pairs. The first pair is Alice 1's
/// `(a, b)`; each later pair is an encoder's `(σ symbol, Hadamard bit)`.
pub fn compose_symbols<I>(symbols: I) -> Option<StateLabel>
where
    I: IntoIterator<Item = (u8, bool)>,
{
    let mut iter = symbols.into_iter();
    let (a, b) = iter.next()?;
    Some(
        iter.fold(StateLabel::from_bits(a == 1, b), |label, (op, had)| {
            label_shift(label, op, had)
        }),
    )
}

/// XOR of Hadamard bits as a measurement basis.
pub fn reconciled_basis<I: IntoIterator<Item = bool>>(had_bits: I) -> Basis {
    Basis::from_bit(had_bits.into_iter().fold(false, |acc, b| acc ^ b))
}

fn find(secrets: &[PartySecret], party: PartyId) -> Result<&PartySecret, ReconstructionError> {
    secrets
        .iter()
        .find(|s| s.party() == party)
        .ok_or(ReconstructionError::MissingSecret(party))
}

fn check_positions(secret: &PartySecret, positions: &[usize]) -> Result<(), ReconstructionError> {
    match positions.iter().find(|&&p| p >= secret.len()) {
        Some(&position) => Err(PartyError::PositionOutOfRange {
            position,
            size: secret.len(),
        }
        .into()),
        None => Ok(()),
    }
}

/// The labels Alice m sent at `positions`, from all `m` Alices' secrets.
pub fn reconstruct_alice_key(
    alice_secrets: &[PartySecret],
    m: usize,
    positions: &[usize],
) -> Result<Vec<StateLabel>, ReconstructionError> {
    let chain = (1..=m)
        .map(|i| find(alice_secrets, PartyId::alice(i)))
        .collect::<Result<Vec<_>, _>>()?;
    for secret in &chain {
        check_positions(secret, positions)?;
    }
    Ok(positions
        .iter()
        .map(|&k| compose_symbols(chain.iter().map(|s| s.symbols_at(k))).expect("m >= 1"))
        .collect())
}

/// Walks Bob n's measured labels back through Bob n-1 … Bob 1 to the
/// labels Alice m sent.
pub fn reconstruct_bob_key(
    measurements: Option<&KeyMeasurements>,
    bob_secrets: &[PartySecret],
    n: usize,
) -> Result<Vec<StateLabel>, ReconstructionError> {
    let measurements = measurements.ok_or(ReconstructionError::MissingOutcomes)?;
    if measurements.positions.len() != measurements.results.len() {
        return Err(ReconstructionError::MissingOutcomes);
    }
    let chain = (1..n)
        .map(|j| find(bob_secrets, PartyId::bob(j)))
        .collect::<Result<Vec<_>, _>>()?;
    for secret in &chain {
        check_positions(secret, &measurements.positions)?;
    }
    Ok(measurements
        .positions
        .iter()
        .zip(&measurements.results)
        .map(|(&k, &measured)| {
            chain.iter().rev().fold(measured, |label, secret| {
                let (op, had) = secret.symbols_at(k);
                label_unshift(label, op, had)
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lbl(a: u8, b: u8) -> StateLabel {
        StateLabel::from_bits(a == 1, b == 1)
    }

    fn secret(party: PartyId, ops: &[u8], had: &[bool]) -> PartySecret {
        PartySecret::new(party, ops.to_vec(), had.to_vec()).unwrap()
    }

    #[test]
    fn alice_key_examples() {
        let a1 = secret(PartyId::alice(1), &[0], &[false]);
        let a2 = secret(PartyId::alice(2), &[3], &[true]);
        assert_eq!(
            reconstruct_alice_key(&[a1.clone(), a2], 2, &[0]).unwrap(),
            vec![lbl(1, 1)]
        );

        let a1 = secret(PartyId::alice(1), &[1, 0], &[false, true]);
        let identity = secret(PartyId::alice(2), &[0, 0], &[false, false]);
        assert_eq!(
            reconstruct_alice_key(&[a1.clone(), identity], 2, &[0, 1]).unwrap(),
            vec![lbl(1, 0), lbl(0, 1)]
        );

        assert_eq!(
            reconstruct_alice_key(&[a1], 2, &[0]),
            Err(ReconstructionError::MissingSecret(PartyId::alice(2)))
        );
    }

    #[test]
    fn bob_key_examples() {
        let identity = secret(PartyId::bob(1), &[0], &[false]);
        let measured = KeyMeasurements {
            positions: vec![0],
            results: vec![lbl(1, 1)],
        };
        assert_eq!(
            reconstruct_bob_key(Some(&measured), std::slice::from_ref(&identity), 2).unwrap(),
            vec![lbl(1, 1)]
        );

        let flip = secret(PartyId::bob(1), &[1], &[false]);
        let measured = KeyMeasurements {
            positions: vec![0],
            results: vec![lbl(0, 0)],
        };
        assert_eq!(
            reconstruct_bob_key(Some(&measured), &[flip], 2).unwrap(),
            vec![lbl(1, 0)]
        );

        assert_eq!(
            reconstruct_bob_key(None, &[identity], 2),
            Err(ReconstructionError::MissingOutcomes)
        );
        assert_eq!(
            reconstruct_bob_key(Some(&measured), &[], 3),
            Err(ReconstructionError::MissingSecret(PartyId::bob(1)))
        );
    }

    #[test]
    fn xor_basis() {
        assert_eq!(reconciled_basis([false, false, false]), Basis::Z);
        assert_eq!(reconciled_basis([false, true, false]), Basis::X);
        assert_eq!(reconciled_basis([true, true]), Basis::Z);
        assert_eq!(reconciled_basis(std::iter::empty()), Basis::Z);
    }
}
