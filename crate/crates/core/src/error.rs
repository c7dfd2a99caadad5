use thiserror::Error;

use crate::parties::PartyId;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("state is not normalized: |amp0|^2 + |amp1|^2 = {0}")]
    NotNormalized(f64),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartyError {
    #[error("block size must be at least 1")]
    EmptyBlock,
    #[error("party index {index} out of range for a group of {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("{party}: op string has length {ops} but Hadamard string has length {had}")]
    LengthMismatch {
        party: PartyId,
        ops: usize,
        had: usize,
    },
    #[error("{party}: symbol {symbol} at position {position} is outside the party's alphabet")]
    InvalidSymbol {
        party: PartyId,
        position: usize,
        symbol: u8,
    },
    #[error("only Alice 1 prepares the initial block, got {0}")]
    NotPreparer(PartyId),
    #[error("Alice 1 prepares states and does not encode")]
    PreparerCannotEncode,
    #[error("block has {got} qubits, secret covers {expected}")]
    BlockLength { expected: usize, got: usize },
    #[error("position {position} outside block of size {size}")]
    PositionOutOfRange { position: usize, size: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("m = {0}: at least two Alices are required (m >= 2)")]
    TooFewAlices(usize),
    #[error("n = {0}: at least two Bobs are required (n >= 2)")]
    TooFewBobs(usize),
    #[error("block_size must be at least 1")]
    EmptyBlock,
    #[error("sample_fraction = {0} must lie strictly between 0 and 1")]
    SampleFraction(f64),
    #[error("error_threshold = {0} must lie in [0, 1)")]
    ErrorThreshold(f64),
    #[error("attack on segment into {to}: coverage {coverage} must lie in [0, 1]")]
    Coverage { to: PartyId, coverage: f64 },
    #[error("attack targets {0}, which is not a receiving party of this pipeline")]
    UnknownSegment(PartyId),
    #[error("segment into {0} has more than one attack configured")]
    DuplicateSegment(PartyId),
    #[error("block_size {block_size} leaves no key positions after all sample checks")]
    NoKeyLeft { block_size: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReconstructionError {
    #[error("missing secret of {0}")]
    MissingSecret(PartyId),
    #[error("Bob n's measurement outcomes are missing")]
    MissingOutcomes,
    #[error(transparent)]
    Party(#[from] PartyError),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SecrecyError {
    #[error("secrecy is only defined for accepted runs")]
    NotAccepted,
    #[error("the subset contains every Alice, so it knows the key")]
    FullAliceGroup,
    #[error("the subset contains every Bob including Bob n's outcomes, so it knows the key")]
    FullBobGroup,
    #[error("{0} is not a party of this run")]
    UnknownParty(PartyId),
}

impl ConfigError {
    /// Name of the configuration field the error is about.
    pub fn field(&self) -> &'static str {
        match self {
            ConfigError::TooFewAlices(_) => "m",
            ConfigError::TooFewBobs(_) => "n",
            ConfigError::EmptyBlock | ConfigError::NoKeyLeft { .. } => "block_size",
            ConfigError::SampleFraction(_) => "sample_fraction",
            ConfigError::ErrorThreshold(_) => "error_threshold",
            ConfigError::Coverage { .. } => "attacks.coverage",
            ConfigError::UnknownSegment(_) | ConfigError::DuplicateSegment(_) => "attacks.to",
        }
    }
}
