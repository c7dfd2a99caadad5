//! Exhaustive secrecy analysis of an accepted run.
//!
//! A coalition knows its members' private symbols at the key positions
//! (Bob n contributes his measurement outcomes) plus everything announced
//! publicly: all Hadamard strings and hence every measurement basis. The
//! missing members' symbols are enumerated over their alphabets with a
//! uniform prior, assignments inconsistent with the coalition's knowledge
//! are discarded, and the conditional distribution of each key value bit
//! is tallied. Positions are independent, so the enumeration runs per
//! position.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::SecrecyError;
use crate::parties::{label_shift, PartyId, PartySecret};
use crate::protocol::outcome::ProtocolOutcome;
use crate::qubit::StateLabel;

/// The parties whose private data a coalition pools.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Knowledge {
    parties: BTreeSet<PartyId>,
}

impl Knowledge {
    pub fn new<I: IntoIterator<Item = PartyId>>(parties: I) -> Self {
        Self {
            parties: parties.into_iter().collect(),
        }
    }

    pub fn contains(&self, party: PartyId) -> bool {
        self.parties.contains(&party)
    }

    pub fn parties(&self) -> impl Iterator<Item = PartyId> + '_ {
        self.parties.iter().copied()
    }

    pub fn has_all_alices(&self, m: usize) -> bool {
        (1..=m).all(|i| self.contains(PartyId::alice(i)))
    }

    pub fn has_all_bobs(&self, n: usize) -> bool {
        (1..=n).all(|j| self.contains(PartyId::bob(j)))
    }

    /// Every subset of the `m + n` parties.
    pub fn all_subsets(m: usize, n: usize) -> Vec<Knowledge> {
        let parties: Vec<PartyId> = (1..=m)
            .map(PartyId::alice)
            .chain((1..=n).map(PartyId::bob))
            .collect();
        (0u64..1 << parties.len())
            .map(|mask| {
                Knowledge::new(
                    parties
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, p)| *p),
                )
            })
            .collect()
    }

    /// Subsets containing neither full group.
    pub fn proper_subsets(m: usize, n: usize) -> Vec<Knowledge> {
        Self::all_subsets(m, n)
            .into_iter()
            .filter(|k| !k.has_all_alices(m) && !k.has_all_bobs(n))
            .collect()
    }
}

impl std::fmt::Display for Knowledge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.parties.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

/// Conditional distribution of each key value bit given a coalition's knowledge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecrecyReport {
    pub knowledge: Knowledge,
    pub positions: Vec<usize>,
    /// `[P(v = 0), P(v = 1)]` per key position.
    pub distributions: Vec<[f64; 2]>,
    /// −log₂ max_v P(v) per key position, in bits.
    pub min_entropy: Vec<f64>,
}

impl SecrecyReport {
    pub fn min(&self) -> f64 {
        self.min_entropy
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.min_entropy
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Per-position enumeration of the key value bit; no group restriction.
pub fn conditional_key_distribution(
    outcome: &ProtocolOutcome,
    knowledge: &Knowledge,
) -> Result<SecrecyReport, SecrecyError> {
    if !outcome.accepted() {
        return Err(SecrecyError::NotAccepted);
    }
    let (m, n) = (outcome.m, outcome.n);
    if let Some(p) = knowledge.parties().find(|p| p.checked(m, n).is_err()) {
        return Err(SecrecyError::UnknownParty(p));
    }
    let encoders: Vec<&PartySecret> = outcome.secrets.iter().collect();
    let knows_outcomes = knowledge.contains(PartyId::bob(n));

    let mut distributions = Vec::with_capacity(outcome.key_positions.len());
    let mut min_entropy = Vec::with_capacity(outcome.key_positions.len());
    for (i, &k) in outcome.key_positions.iter().enumerate() {
        let measured = outcome.bob_measurements.results[i];
        let counts = tally_position(
            &encoders,
            m,
            k,
            knowledge,
            knows_outcomes.then_some(measured.value),
        );
        let total = (counts[0] + counts[1]) as f64;
        let dist = [counts[0] as f64 / total, counts[1] as f64 / total];
        min_entropy.push(0.0 - dist[0].max(dist[1]).log2());
        distributions.push(dist);
    }
    Ok(SecrecyReport {
        knowledge: knowledge.clone(),
        positions: outcome.key_positions.clone(),
        distributions,
        min_entropy,
    })
}

/// Secrecy of the key against a coalition that lacks at least one Alice
/// and at least one Bob.
pub fn secrecy_check(
    outcome: &ProtocolOutcome,
    knowledge: &Knowledge,
) -> Result<SecrecyReport, SecrecyError> {
    if knowledge.has_all_alices(outcome.m) {
        return Err(SecrecyError::FullAliceGroup);
    }
    if knowledge.has_all_bobs(outcome.n) {
        return Err(SecrecyError::FullBobGroup);
    }
    conditional_key_distribution(outcome, knowledge)
}

/// Counts of key value 0 and 1 over every completion of the unknown symbols
/// at position `k` consistent with the known outcome.
fn tally_position(
    encoders: &[&PartySecret],
    m: usize,
    k: usize,
    knowledge: &Knowledge,
    known_outcome: Option<bool>,
) -> [u64; 2] {
    // Hadamard bits are public; σ symbols (Alice 1's value bit) are private.
    let had: Vec<bool> = encoders.iter().map(|s| s.had()[k]).collect();
    let actual: Vec<u8> = encoders.iter().map(|s| s.ops()[k]).collect();
    let unknown: Vec<usize> = (0..encoders.len())
        .filter(|&i| !knowledge.contains(encoders[i].party()))
        .collect();
    let radix: Vec<u64> = unknown
        .iter()
        .map(|&i| u64::from(encoders[i].party().op_alphabet()))
        .collect();
    let combinations: u64 = radix.iter().product();

    let mut counts = [0u64; 2];
    let mut ops = actual.clone();
    for mut code in 0..combinations {
        for (&slot, &r) in unknown.iter().zip(&radix) {
            ops[slot] = (code % r) as u8;
            code /= r;
        }
        let mut label = StateLabel::from_bits(ops[0] == 1, had[0]);
        for i in 1..m {
            label = label_shift(label, ops[i], had[i]);
        }
        let key_value = label.value;
        for i in m..encoders.len() {
            label = label_shift(label, ops[i], had[i]);
        }
        if known_outcome.is_some_and(|o| o != label.value) {
            continue;
        }
        counts[usize::from(key_value)] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{run_protocol, ProtocolConfig};

    fn accepted(m: usize, n: usize, block: usize, seed: u64) -> ProtocolOutcome {
        let outcome = run_protocol(&ProtocolConfig::new(m, n, block).with_seed(seed)).unwrap();
        assert!(outcome.accepted());
        outcome
    }

    #[test]
    fn subsets_enumeration() {
        assert_eq!(Knowledge::all_subsets(2, 2).len(), 16);
        // Exclude supersets of {A1,A2} or {B1,B2}: 4 + 4 - 1 = 7.
        assert_eq!(Knowledge::proper_subsets(2, 2).len(), 9);
    }

    #[test]
    fn lone_alice_learns_nothing() {
        let outcome = accepted(2, 2, 32, 4);
        let report = secrecy_check(&outcome, &Knowledge::new([PartyId::alice(1)])).unwrap();
        assert!(report.min_entropy.iter().all(|&h| h == 1.0));
    }

    #[test]
    fn full_groups_know_the_key() {
        let outcome = accepted(2, 2, 32, 4);
        let alices = Knowledge::new([PartyId::alice(1), PartyId::alice(2)]);
        assert_eq!(
            secrecy_check(&outcome, &alices),
            Err(SecrecyError::FullAliceGroup)
        );
        let report = conditional_key_distribution(&outcome, &alices).unwrap();
        assert!(report.min_entropy.iter().all(|&h| h == 0.0));
        for (dist, label) in report.distributions.iter().zip(outcome.final_key()) {
            assert_eq!(dist[usize::from(label.value)], 1.0);
        }
        let bobs = Knowledge::new([PartyId::bob(1), PartyId::bob(2)]);
        assert_eq!(
            secrecy_check(&outcome, &bobs),
            Err(SecrecyError::FullBobGroup)
        );
        assert_eq!(
            conditional_key_distribution(&outcome, &bobs).unwrap().max(),
            0.0
        );
    }

    #[test]
    fn cross_group_pair_learns_nothing() {
        let outcome = accepted(2, 2, 32, 8);
        let report = secrecy_check(
            &outcome,
            &Knowledge::new([PartyId::alice(2), PartyId::bob(1)]),
        )
        .unwrap();
        assert_eq!(report.min(), 1.0);
    }

    #[test]
    fn rejects_aborted_runs_and_strangers() {
        let mut outcome = accepted(2, 2, 32, 8);
        assert_eq!(
            secrecy_check(&outcome, &Knowledge::new([PartyId::alice(3)])),
            Err(SecrecyError::UnknownParty(PartyId::alice(3)))
        );
        outcome.verdict = crate::protocol::Verdict::AbortFinalCheck;
        assert_eq!(
            secrecy_check(&outcome, &Knowledge::default()),
            Err(SecrecyError::NotAccepted)
        );
    }
}
