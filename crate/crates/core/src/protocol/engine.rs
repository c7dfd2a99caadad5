//! One protocol run: preparation, the encoding cascade with a receive
//! check at every hop, Bob n's reconciled-basis check and measurement, the
//! closing check on measured positions, and key extraction on both sides.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{filter_in_band, pns_check, transmit, PhotonSignal, PnsResult};
use crate::error::ConfigError;
use crate::parties::{generate_secret, initial_prepare, label_shift, PartyId, PartySecret};
use crate::protocol::config::ProtocolConfig;
use crate::protocol::outcome::{
    AbortReason, CheckReport, CheckStage, KeyMeasurements, ProtocolOutcome, Verdict,
};
use crate::protocol::reconstruct::{
    compose_symbols, reconciled_basis, reconstruct_alice_key, reconstruct_bob_key,
};
use crate::protocol::transcript::{EventPayload, Transcript};
use crate::qubit::{prepare, Basis, StateLabel};
use crate::scalar::Scalar;

/// Random stream a run with `seed` draws from.
pub fn run_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckDecision {
    Proceed,
    Abort(AbortReason),
}

/// A check's verdict and the live block that survives it.
pub struct CheckOutput<T: Scalar> {
    pub block: Vec<PhotonSignal<T>>,
    pub report: CheckReport,
    pub decision: CheckDecision,
}

/// Runs the protocol at double precision.
pub fn run_protocol(config: &ProtocolConfig) -> Result<ProtocolOutcome, ConfigError> {
    run_protocol_with::<f64>(config)
}

/// Runs the protocol with state vectors in scalar type `T`.
pub fn run_protocol_with<T: Scalar>(
    config: &ProtocolConfig,
) -> Result<ProtocolOutcome, ConfigError> {
    config.validate()?;
    let mut rng = run_rng(config.rng_seed);
    let mut transcript = Transcript::new();
    transcript.push(
        None,
        None,
        EventPayload::RunStarted {
            config: config.clone(),
        },
    );
    Ok(Runner {
        config,
        rng: &mut rng,
        transcript,
        secrets: Vec::new(),
        checks: Vec::new(),
    }
    .run::<T>())
}

struct Runner<'a, R: Rng> {
    config: &'a ProtocolConfig,
    rng: &'a mut R,
    transcript: Transcript,
    secrets: Vec<PartySecret>,
    checks: Vec<CheckReport>,
}

impl<R: Rng> Runner<'_, R> {
    fn run<T: Scalar>(mut self) -> ProtocolOutcome {
        let config = self.config;
        let segments = config.segments();

        // Alice 1 prepares the block.
        let alice1 = PartyId::alice(1);
        let secret = self.new_secret(alice1);
        let labels = initial_prepare(&secret).expect("Alice 1's secret");
        let mut block: Vec<PhotonSignal<T>> = Vec::with_capacity(config.block_size);
        for (k, label) in labels.iter().enumerate() {
            self.transcript.push(
                Some(alice1),
                Some(k),
                EventPayload::Prepared { label: *label },
            );
            block.push(PhotonSignal::single(prepare(*label), k));
        }
        self.secrets.push(secret);
        let mut expected = labels;

        for segment in &segments {
            let tx = transmit(block, segment, self.rng);
            self.transcript.push(
                Some(segment.from),
                None,
                EventPayload::Transmitted {
                    to: segment.to,
                    attack: segment.attack.kind,
                    attacked: tx.events.len(),
                },
            );
            for event in &tx.events {
                let position = tx.block[event.position].origin_index;
                self.transcript.push(
                    None,
                    Some(position),
                    EventPayload::Attacked {
                        record: event.record,
                    },
                );
            }
            block = tx.block;

            let receiver = segment.to;
            if receiver == config.last_bob() {
                break;
            }
            let out = hop_receive_check(
                block,
                receiver,
                &self.secrets,
                config,
                self.rng,
                &mut self.transcript,
            );
            self.checks.push(out.report);
            if let CheckDecision::Abort(reason) = out.decision {
                return self.abort(Verdict::AbortAtHop(receiver), reason);
            }
            block = out.block;

            let secret = self.new_secret(receiver);
            for signal in &mut block {
                let k = signal.origin_index;
                for gate in secret.gates_at(k) {
                    signal.apply(gate);
                }
                let (op, had) = secret.symbols_at(k);
                expected[k] = label_shift(expected[k], op, had);
                self.transcript.push(
                    Some(receiver),
                    Some(k),
                    EventPayload::Encoded { label: expected[k] },
                );
            }
            self.secrets.push(secret);
        }

        let bob_n = config.last_bob();
        let out = final_sample_check(block, &self.secrets, config, self.rng, &mut self.transcript);
        self.checks.push(out.report);
        if let CheckDecision::Abort(reason) = out.decision {
            return self.abort(Verdict::AbortFinalCheck, reason);
        }
        block = out.block;

        // Every encoder publishes its Hadamard string; Bob n measures in the XOR basis.
        for secret in &self.secrets {
            self.transcript.push(
                Some(secret.party()),
                None,
                EventPayload::HadamardStringsAnnounced {
                    positions: block.len(),
                },
            );
        }
        let bases: Vec<Basis> = block
            .iter()
            .map(|s| reconciled_basis(self.secrets.iter().map(|sec| sec.had()[s.origin_index])))
            .collect();
        let outcomes = reconcile_and_measure(&block, &bases, self.rng);
        let mut measured: Vec<(usize, StateLabel)> = Vec::with_capacity(block.len());
        for ((signal, &basis), &outcome) in block.iter().zip(&bases).zip(&outcomes) {
            self.transcript.push(
                Some(bob_n),
                Some(signal.origin_index),
                EventPayload::Measured { basis, outcome },
            );
            measured.push((signal.origin_index, StateLabel::new(outcome, basis)));
        }

        let (report, kept) = self.key_check(measured);
        let decision = decide(&report, config);
        self.checks.push(report);
        if let CheckDecision::Abort(reason) = decision {
            return self.abort(Verdict::AbortFinalCheck, reason);
        }

        let measurements = KeyMeasurements {
            positions: kept.iter().map(|(k, _)| *k).collect(),
            results: kept.iter().map(|(_, l)| *l).collect(),
        };
        self.transcript.push(
            None,
            None,
            EventPayload::KeyExtracted {
                positions: measurements.positions.clone(),
            },
        );
        let alice_side_key =
            reconstruct_alice_key(&self.secrets, config.m, &measurements.positions)
                .expect("all Alices acted in an accepted run");
        let bob_side_key = reconstruct_bob_key(Some(&measurements), &self.secrets, config.n)
            .expect("all Bobs acted in an accepted run");
        self.transcript.push(
            None,
            None,
            EventPayload::Finished {
                verdict: Verdict::Accept,
                reason: None,
            },
        );

        ProtocolOutcome {
            verdict: Verdict::Accept,
            abort_reason: None,
            m: config.m,
            n: config.n,
            checks: self.checks,
            key_positions: measurements.positions.clone(),
            alice_side_key,
            bob_side_key,
            bob_measurements: measurements,
            secrets: self.secrets,
            transcript: self.transcript,
        }
    }

    fn new_secret(&mut self, party: PartyId) -> PartySecret {
        let block_size = self.config.block_size;
        let secret = generate_secret(party, block_size, self.rng).expect("validated block size");
        self.transcript.push(
            Some(party),
            None,
            EventPayload::SecretGenerated { block_size },
        );
        secret
    }

    /// All parties reveal their symbols at a sample of measured positions;
    /// Bob n's outcomes are compared against the predicted value bits.
    fn key_check(
        &mut self,
        measured: Vec<(usize, StateLabel)>,
    ) -> (CheckReport, Vec<(usize, StateLabel)>) {
        let bob_n = self.config.last_bob();
        let count = self.config.sample_size(measured.len());
        let picked = select_samples(measured.len(), count, self.rng);
        let (samples, kept) = split_by_index(measured, &picked);
        let positions: Vec<usize> = samples.iter().map(|(k, _)| *k).collect();
        self.transcript.push(
            Some(bob_n),
            None,
            EventPayload::SamplesSelected {
                stage: CheckStage::Key,
                positions: positions.clone(),
            },
        );
        announce_all(&self.secrets, &positions, &mut self.transcript);
        let errors = samples
            .iter()
            .filter(|(k, label)| {
                let predicted = compose_symbols(self.secrets.iter().map(|s| s.symbols_at(*k)))
                    .expect("Alice 1");
                label.value != predicted.value
            })
            .count();
        let report = CheckReport {
            party: bob_n,
            stage: CheckStage::Key,
            samples: samples.len(),
            usable: samples.len(),
            errors,
            multi_photon: 0,
            lost: 0,
        };
        push_rate(&mut self.transcript, &report);
        (report, kept)
    }

    fn abort(mut self, verdict: Verdict, reason: AbortReason) -> ProtocolOutcome {
        self.transcript.push(
            None,
            None,
            EventPayload::Finished {
                verdict,
                reason: Some(reason),
            },
        );
        ProtocolOutcome {
            verdict,
            abort_reason: Some(reason),
            m: self.config.m,
            n: self.config.n,
            checks: self.checks,
            key_positions: Vec::new(),
            alice_side_key: Vec::new(),
            bob_side_key: Vec::new(),
            bob_measurements: KeyMeasurements::default(),
            secrets: self.secrets,
            transcript: self.transcript,
        }
    }
}

fn select_samples<R: Rng + ?Sized>(len: usize, count: usize, rng: &mut R) -> Vec<usize> {
    let mut picked = index::sample(rng, len, count).into_vec();
    picked.sort_unstable();
    picked
}

/// Splits `items` into (picked, rest); `picked` is sorted ascending.
fn split_by_index<X>(items: Vec<X>, picked: &[usize]) -> (Vec<X>, Vec<X>) {
    let mut samples = Vec::with_capacity(picked.len());
    let mut rest = Vec::with_capacity(items.len() - picked.len());
    let mut next = picked.iter().peekable();
    for (i, item) in items.into_iter().enumerate() {
        if next.peek() == Some(&&i) {
            next.next();
            samples.push(item);
        } else {
            rest.push(item);
        }
    }
    (samples, rest)
}

fn announce_all(secrets: &[PartySecret], positions: &[usize], transcript: &mut Transcript) {
    for secret in secrets {
        let a = secret
            .announce(positions)
            .expect("sample positions lie in the block");
        transcript.push(
            Some(a.party),
            None,
            EventPayload::Announced {
                positions: a.positions,
                ops: a.revealed_ops,
                had: a.revealed_had,
            },
        );
    }
}

fn push_rate(transcript: &mut Transcript, report: &CheckReport) {
    transcript.push(
        Some(report.party),
        None,
        EventPayload::ErrorRate {
            stage: report.stage,
            samples: report.samples,
            usable: report.usable,
            errors: report.errors,
            rate: report.error_rate(),
        },
    );
}

fn decide(report: &CheckReport, config: &ProtocolConfig) -> CheckDecision {
    if report.lost > 0 {
        CheckDecision::Abort(AbortReason::SignalLost)
    } else if report.multi_photon > 0 {
        CheckDecision::Abort(AbortReason::MultiPhoton)
    } else if report.error_rate() > config.error_threshold {
        CheckDecision::Abort(AbortReason::ErrorRate)
    } else {
        CheckDecision::Proceed
    }
}

/// Filters the block, draws the sample, and runs the splitter check on
/// every sampled signal. Returns `(samples, rest, report)`; the report has
/// no error statistics yet.
fn receive_and_sample<T: Scalar, R: Rng + ?Sized>(
    block: Vec<PhotonSignal<T>>,
    receiver: PartyId,
    stage: CheckStage,
    config: &ProtocolConfig,
    rng: &mut R,
    transcript: &mut Transcript,
) -> (Vec<PhotonSignal<T>>, Vec<PhotonSignal<T>>, CheckReport) {
    let before: usize = block.iter().map(|s| s.photon_count()).sum();
    let block = filter_in_band(block);
    let after: usize = block.iter().map(|s| s.photon_count()).sum();
    let lost = block.iter().filter(|s| s.is_lost()).count();
    transcript.push(
        Some(receiver),
        None,
        EventPayload::Filtered {
            stripped: before - after,
            lost,
        },
    );

    let mut report = CheckReport {
        party: receiver,
        stage,
        samples: 0,
        usable: 0,
        errors: 0,
        multi_photon: 0,
        lost,
    };
    if lost > 0 {
        return (Vec::new(), block, report);
    }

    let count = config.sample_size(block.len());
    let picked = select_samples(block.len(), count, rng);
    let (samples, rest) = split_by_index(block, &picked);
    report.samples = samples.len();
    transcript.push(
        Some(receiver),
        None,
        EventPayload::SamplesSelected {
            stage,
            positions: samples.iter().map(|s| s.origin_index).collect(),
        },
    );
    for sample in &samples {
        let result = pns_check(sample, config.pns_mode, config.pns_idealized, rng);
        transcript.push(
            Some(receiver),
            Some(sample.origin_index),
            EventPayload::PnsChecked {
                photons: sample.photon_count(),
                result,
            },
        );
        if result == PnsResult::MultiPhotonDetected {
            report.multi_photon += 1;
        }
    }
    (samples, rest, report)
}

/// Receive check at Alice 2..m or Bob 1..n-1.
///
/// Filters out-of-band photons, samples `⌈sample_fraction · live⌉`
/// positions, runs the splitter check, measures each sample in a random
/// basis, and compares with the label the upstream parties' announced
/// symbols predict. Samples whose random basis differs from the predicted
/// basis carry no information and are left out of the error rate. Sampled
/// positions are removed from the returned block.
pub fn hop_receive_check<T: Scalar, R: Rng + ?Sized>(
    block: Vec<PhotonSignal<T>>,
    receiver: PartyId,
    upstream: &[PartySecret],
    config: &ProtocolConfig,
    rng: &mut R,
    transcript: &mut Transcript,
) -> CheckOutput<T> {
    let (samples, rest, mut report) =
        receive_and_sample(block, receiver, CheckStage::Hop, config, rng, transcript);
    if report.lost == 0 && report.multi_photon == 0 {
        let mut results = Vec::with_capacity(samples.len());
        for sample in &samples {
            let basis = Basis::random(rng);
            let outcome = sample
                .measure(basis, rng)
                .expect("filtered signals keep an in-band photon");
            transcript.push(
                Some(receiver),
                Some(sample.origin_index),
                EventPayload::Measured { basis, outcome },
            );
            results.push((basis, outcome));
        }
        let positions: Vec<usize> = samples.iter().map(|s| s.origin_index).collect();
        announce_all(upstream, &positions, transcript);
        for (&k, &(basis, outcome)) in positions.iter().zip(&results) {
            let predicted = compose_symbols(upstream.iter().map(|s| s.symbols_at(k)))
                .expect("Alice 1 is upstream");
            if predicted.basis == basis {
                report.usable += 1;
                report.errors += usize::from(predicted.value != outcome);
            }
        }
        push_rate(transcript, &report);
    }
    let decision = decide(&report, config);
    CheckOutput {
        block: rest,
        report,
        decision,
    }
}

/// Bob n's check before key measurement.
///
/// Every encoder announces its symbols for each sample, in a fresh random
/// party order per position. Bob n measures each sample in the XOR of the
/// announced Hadamard bits and compares with the predicted value bit.
pub fn final_sample_check<T: Scalar, R: Rng + ?Sized>(
    block: Vec<PhotonSignal<T>>,
    encoders: &[PartySecret],
    config: &ProtocolConfig,
    rng: &mut R,
    transcript: &mut Transcript,
) -> CheckOutput<T> {
    let bob_n = config.last_bob();
    let (samples, rest, mut report) =
        receive_and_sample(block, bob_n, CheckStage::Final, config, rng, transcript);
    if report.lost == 0 && report.multi_photon == 0 {
        let mut order: Vec<usize> = (0..encoders.len()).collect();
        for sample in &samples {
            let k = sample.origin_index;
            order.shuffle(rng);
            for &i in &order {
                let (op, had) = encoders[i].symbols_at(k);
                transcript.push(
                    Some(encoders[i].party()),
                    Some(k),
                    EventPayload::Announced {
                        positions: vec![k],
                        ops: vec![op],
                        had: vec![had],
                    },
                );
            }
            let basis = reconciled_basis(encoders.iter().map(|s| s.had()[k]));
            let outcome = sample
                .measure(basis, rng)
                .expect("filtered signals keep an in-band photon");
            transcript.push(
                Some(bob_n),
                Some(k),
                EventPayload::Measured { basis, outcome },
            );
            let predicted =
                compose_symbols(encoders.iter().map(|s| s.symbols_at(k))).expect("Alice 1");
            report.usable += 1;
            report.errors += usize::from(predicted.value != outcome);
        }
        push_rate(transcript, &report);
    }
    let decision = decide(&report, config);
    CheckOutput {
        block: rest,
        report,
        decision,
    }
}

/// Bob n's measurement of each live signal in its reconciled basis.
pub fn reconcile_and_measure<T: Scalar, R: Rng + ?Sized>(
    block: &[PhotonSignal<T>],
    bases: &[Basis],
    rng: &mut R,
) -> Vec<bool> {
    assert_eq!(block.len(), bases.len(), "one basis per signal");
    block
        .iter()
        .zip(bases)
        .map(|(signal, &basis)| signal.measure(basis, rng).unwrap_or(false))
        .collect()
}

/// Outcome of re-executing a logged run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayCheck {
    pub logged: usize,
    pub replayed: usize,
    /// Sequence number of the first event that differs.
    pub first_divergence: Option<usize>,
}

impl ReplayCheck {
    pub fn identical(&self) -> bool {
        self.first_divergence.is_none() && self.logged == self.replayed
    }
}

/// Re-runs the configuration recorded in `transcript` and compares the
/// regenerated event log against it, event by event and byte for byte.
pub fn replay(transcript: &Transcript) -> Result<ReplayCheck, ReplayError> {
    let config = transcript.config().ok_or(ReplayError::MissingConfig)?;
    let rerun = run_protocol(config)?.transcript;
    let first_divergence = transcript
        .events()
        .iter()
        .zip(rerun.events())
        .position(|(a, b)| a != b || serde_json::to_string(a).ok() != serde_json::to_string(b).ok())
        .or_else(|| (transcript.len() != rerun.len()).then(|| transcript.len().min(rerun.len())));
    Ok(ReplayCheck {
        logged: transcript.len(),
        replayed: rerun.len(),
        first_divergence,
    })
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ReplayError {
    #[error("transcript does not start with a run-started event")]
    MissingConfig,
    #[error("recorded configuration is invalid: {0}")]
    Config(#[from] ConfigError),
}
