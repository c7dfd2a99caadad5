use serde::{Deserialize, Serialize};

use std::collections::BTreeSet;

use crate::channel::EveRecord;
use crate::parties::{PartyId, PartySecret};
use crate::protocol::transcript::{EventPayload, Transcript};
use crate::qubit::StateLabel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "party", rename_all = "kebab-case")]
pub enum Verdict {
    Accept,
    AbortAtHop(PartyId),
    AbortFinalCheck,
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbortReason {
    MultiPhoton,
    ErrorRate,
    SignalLost,
}

/// Which sample check produced an error-rate estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStage {
    /// Receive check at Alice 2..m or Bob 1..n-1.
    Hop,
    /// Bob n's check in the XOR-reconciled basis, before key measurement.
    Final,
    /// Comparison of Bob n's key measurements against announced symbols.
    Key,
}

/// Result of one sample check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub party: PartyId,
    pub stage: CheckStage,
    pub samples: usize,
    /// Samples measured in the basis the announced symbols predict.
    pub usable: usize,
    pub errors: usize,
    pub multi_photon: usize,
    pub lost: usize,
}

impl CheckReport {
    /// Errors over usable samples; 0 when nothing was usable.
    pub fn error_rate(&self) -> f64 {
        if self.usable == 0 {
            0.0
        } else {
            self.errors as f64 / self.usable as f64
        }
    }
}

/// Bob n's measured labels (outcome, reconciled basis) at key positions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyMeasurements {
    pub positions: Vec<usize>,
    pub results: Vec<StateLabel>,
}

#[derive(Clone, Debug)]
pub struct ProtocolOutcome {
    pub verdict: Verdict,
    pub abort_reason: Option<AbortReason>,
    pub m: usize,
    pub n: usize,
    pub checks: Vec<CheckReport>,
    /// Positions that were never sampled, in ascending order.
    pub key_positions: Vec<usize>,
    /// What Alice m sent at each key position, from the Alices' secrets.
    pub alice_side_key: Vec<StateLabel>,
    /// The same positions inferred from Bob n's outcomes and the Bobs' secrets.
    pub bob_side_key: Vec<StateLabel>,
    pub bob_measurements: KeyMeasurements,
    /// Secrets of every party that acted, in pipeline order.
    pub secrets: Vec<PartySecret>,
    pub transcript: Transcript,
}

impl ProtocolOutcome {
    pub fn accepted(&self) -> bool {
        self.verdict.is_accept()
    }

    /// The final key: Alice m's sent labels at key positions. Empty on abort.
    pub fn final_key(&self) -> &[StateLabel] {
        &self.alice_side_key
    }

    /// Secret key bits (value bits); basis bits are public after the
    /// Hadamard strings are announced.
    pub fn key_bits(&self) -> Vec<bool> {
        self.alice_side_key.iter().map(|l| l.value).collect()
    }

    pub fn keys_agree(&self) -> bool {
        self.alice_side_key == self.bob_side_key
    }

    /// Key positions where the two reconstructions differ.
    pub fn key_mismatches(&self) -> Vec<usize> {
        self.key_positions
            .iter()
            .zip(self.alice_side_key.iter().zip(&self.bob_side_key))
            .filter(|(_, (a, b))| a != b)
            .map(|(&k, _)| k)
            .collect()
    }

    /// Positions whose state an eavesdropper measured or entangled on any
    /// segment. Riders and Trojan photons leave the signal photon alone.
    pub fn disturbed_positions(&self) -> BTreeSet<usize> {
        self.transcript
            .events()
            .iter()
            .filter_map(|e| match (&e.payload, e.position) {
                (
                    EventPayload::Attacked {
                        record: EveRecord::Measured { .. } | EveRecord::ProbeAttached,
                    },
                    Some(k),
                ) => Some(k),
                _ => None,
            })
            .collect()
    }

    /// Key errors an attack slipped past the checks (accepted runs only).
    /// These are expected below the threshold: there is no error correction.
    pub fn undetected_key_errors(&self) -> usize {
        if self.accepted() {
            self.key_mismatches().len()
        } else {
            0
        }
    }

    /// Accepted with the reconstructions disagreeing at a position no
    /// eavesdropper touched, which the protocol's correctness rules out.
    pub fn key_agreement_violated(&self) -> bool {
        if !self.accepted() {
            return false;
        }
        let disturbed = self.disturbed_positions();
        self.key_mismatches().iter().any(|k| !disturbed.contains(k))
    }

    pub fn hop_checks(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| c.stage == CheckStage::Hop)
    }

    pub fn check(&self, stage: CheckStage) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.stage == stage)
    }

    pub fn secret(&self, party: PartyId) -> Option<&PartySecret> {
        self.secrets.iter().find(|s| s.party() == party)
    }
}
