//! Ordered, replayable event log of a protocol run.
//!
//! Serialized as JSON lines, one event per line, each with the stable
//! fields `seq`, `party`, `position`, `kind` and `payload`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::channel::{AttackKind, EveRecord, PnsResult};
use crate::parties::PartyId;
use crate::protocol::config::ProtocolConfig;
use crate::protocol::outcome::{AbortReason, CheckStage, Verdict};
use crate::qubit::{Basis, StateLabel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "kebab-case")]
pub enum EventPayload {
    RunStarted {
        config: ProtocolConfig,
    },
    SecretGenerated {
        block_size: usize,
    },
    Prepared {
        label: StateLabel,
    },
    /// Label the position carries after this party's encoding, assuming an
    /// undisturbed channel.
    Encoded {
        label: StateLabel,
    },
    Transmitted {
        to: PartyId,
        attack: AttackKind,
        attacked: usize,
    },
    Attacked {
        record: EveRecord,
    },
    Filtered {
        stripped: usize,
        lost: usize,
    },
    SamplesSelected {
        stage: CheckStage,
        positions: Vec<usize>,
    },
    PnsChecked {
        photons: usize,
        result: PnsResult,
    },
    Measured {
        basis: Basis,
        outcome: bool,
    },
    Announced {
        positions: Vec<usize>,
        ops: Vec<u8>,
        had: Vec<bool>,
    },
    HadamardStringsAnnounced {
        positions: usize,
    },
    ErrorRate {
        stage: CheckStage,
        samples: usize,
        usable: usize,
        errors: usize,
        rate: f64,
    },
    KeyExtracted {
        positions: Vec<usize>,
    },
    Finished {
        verdict: Verdict,
        reason: Option<AbortReason>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub party: Option<PartyId>,
    pub position: Option<usize>,
    #[serde(flatten)]
    pub payload: EventPayload,
}

#[derive(Debug, thiserror::Error)]
pub enum TranscriptError {
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Transcript {
    events: Vec<Event>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, party: Option<PartyId>, position: Option<usize>, payload: EventPayload) {
        let seq = self.events.len() as u64;
        self.events.push(Event {
            seq,
            party,
            position,
            payload,
        });
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Configuration recorded by the first event.
    pub fn config(&self) -> Option<&ProtocolConfig> {
        match self.events.first().map(|e| &e.payload) {
            Some(EventPayload::RunStarted { config }) => Some(config),
            _ => None,
        }
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for event in &self.events {
            serde_json::to_writer(&mut out, event)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, TranscriptError> {
        let mut events = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let event = serde_json::from_str(&line).map_err(|source| TranscriptError::Parse {
                line: i + 1,
                source,
            })?;
            events.push(event);
        }
        Ok(Self { events })
    }

    pub fn from_jsonl(text: &str) -> Result<Self, TranscriptError> {
        Self::read_jsonl(text.as_bytes())
    }
}
