//! Orchestration of full protocol runs and the analyses on their outcomes.

pub mod config;
pub mod engine;
pub mod outcome;
pub mod reconstruct;
pub mod secrecy;
pub mod transcript;

pub use config::{ProtocolConfig, SegmentAttack};
pub use engine::{
    final_sample_check, hop_receive_check, reconcile_and_measure, replay, run_protocol,
    run_protocol_with, ReplayCheck, ReplayError,
};
pub use outcome::{
    AbortReason, CheckReport, CheckStage, KeyMeasurements, ProtocolOutcome, Verdict,
};
pub use reconstruct::{reconstruct_alice_key, reconstruct_bob_key};
pub use secrecy::{conditional_key_distribution, secrecy_check, Knowledge, SecrecyReport};
pub use transcript::{Event, EventPayload, Transcript};
