use serde::{Deserialize, Serialize};

use crate::channel::{pipeline_segments, AttackKind, AttackStrategy, ChannelSegment, PnsMode};
use crate::error::ConfigError;
use crate::parties::PartyId;

pub const DEFAULT_SAMPLE_FRACTION: f64 = 0.25;
pub const DEFAULT_ERROR_THRESHOLD: f64 = 0.11;

/// An attack running on the segment that delivers into `to`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentAttack {
    pub to: PartyId,
    pub kind: AttackKind,
    #[serde(default = "one")]
    pub coverage: f64,
}

fn one() -> f64 {
    1.0
}

impl SegmentAttack {
    pub fn full(to: PartyId, kind: AttackKind) -> Self {
        Self {
            to,
            kind,
            coverage: 1.0,
        }
    }

    pub fn strategy(&self) -> AttackStrategy {
        AttackStrategy {
            kind: self.kind,
            coverage: self.coverage,
        }
    }
}

/// Parameters of one protocol run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    /// Number of Alices.
    pub m: usize,
    /// Number of Bobs.
    pub n: usize,
    /// Qubits prepared by Alice 1.
    pub block_size: usize,
    /// Fraction of the live block consumed by each sample check.
    #[serde(default = "default_sample_fraction")]
    pub sample_fraction: f64,
    /// Abort when a check's error rate exceeds this value.
    #[serde(default = "default_error_threshold")]
    pub error_threshold: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attacks: Vec<SegmentAttack>,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub pns_mode: PnsMode,
    /// Photon-number-resolving detectors at the splitter.
    #[serde(default = "yes")]
    pub pns_idealized: bool,
}

fn default_sample_fraction() -> f64 {
    DEFAULT_SAMPLE_FRACTION
}

fn default_error_threshold() -> f64 {
    DEFAULT_ERROR_THRESHOLD
}

fn yes() -> bool {
    true
}

impl ProtocolConfig {
    /// Honest configuration with default checking parameters.
    pub fn new(m: usize, n: usize, block_size: usize) -> Self {
        Self {
            m,
            n,
            block_size,
            sample_fraction: DEFAULT_SAMPLE_FRACTION,
            error_threshold: DEFAULT_ERROR_THRESHOLD,
            attacks: Vec::new(),
            rng_seed: 0,
            pns_mode: PnsMode::default(),
            pns_idealized: true,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_attack(mut self, attack: SegmentAttack) -> Self {
        self.attacks.push(attack);
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.m < 2 {
            return Err(ConfigError::TooFewAlices(self.m));
        }
        if self.n < 2 {
            return Err(ConfigError::TooFewBobs(self.n));
        }
        if self.block_size == 0 {
            return Err(ConfigError::EmptyBlock);
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction < 1.0) {
            return Err(ConfigError::SampleFraction(self.sample_fraction));
        }
        if !(0.0..1.0).contains(&self.error_threshold) {
            return Err(ConfigError::ErrorThreshold(self.error_threshold));
        }
        let mut seen = Vec::new();
        for attack in &self.attacks {
            let receiver = attack.to.pipeline_position(self.m);
            let valid_receiver = attack.to.checked(self.m, self.n).is_ok() && receiver >= 1;
            if !valid_receiver {
                return Err(ConfigError::UnknownSegment(attack.to));
            }
            if !attack.strategy().is_valid() {
                return Err(ConfigError::Coverage {
                    to: attack.to,
                    coverage: attack.coverage,
                });
            }
            if seen.contains(&attack.to) {
                return Err(ConfigError::DuplicateSegment(attack.to));
            }
            seen.push(attack.to);
        }
        if self.key_length() == 0 {
            return Err(ConfigError::NoKeyLeft {
                block_size: self.block_size,
            });
        }
        Ok(())
    }

    /// Number of sample checks: one per receiving hop, Bob n's check, and
    /// the closing check on measured positions.
    pub fn check_count(&self) -> usize {
        (self.m - 1) + (self.n - 1) + 2
    }

    /// Sample size drawn from `live` positions by a single check.
    pub fn sample_size(&self, live: usize) -> usize {
        ((self.sample_fraction * live as f64).ceil() as usize).min(live)
    }

    /// Sizes of every check's sample in pipeline order.
    pub fn sample_schedule(&self) -> Vec<usize> {
        let mut live = self.block_size;
        (0..self.check_count())
            .map(|_| {
                let s = self.sample_size(live);
                live -= s;
                s
            })
            .collect()
    }

    /// Positions left as key when no check aborts.
    pub fn key_length(&self) -> usize {
        self.block_size - self.sample_schedule().iter().sum::<usize>()
    }

    /// The pipeline hops with their configured attacks.
    pub fn segments(&self) -> Vec<ChannelSegment> {
        let mut segments = pipeline_segments(self.m, self.n);
        for attack in &self.attacks {
            if let Some(seg) = segments.iter_mut().find(|s| s.to == attack.to) {
                seg.attack = attack.strategy();
            }
        }
        segments
    }

    pub fn alices(&self) -> impl Iterator<Item = PartyId> {
        (1..=self.m).map(PartyId::alice)
    }

    pub fn bobs(&self) -> impl Iterator<Item = PartyId> {
        (1..=self.n).map(PartyId::bob)
    }

    /// Every party that holds encoding strings: Alice 1..m and Bob 1..n-1.
    pub fn encoders(&self) -> impl Iterator<Item = PartyId> {
        let m = self.m;
        (0..self.m + self.n - 1).map(move |p| PartyId::from_pipeline_position(p, m))
    }

    pub fn last_bob(&self) -> PartyId {
        PartyId::bob(self.n)
    }
}
