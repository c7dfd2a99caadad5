//! Photon-level channel model: signals with out-of-band metadata, the
//! receive-side in-band filter and photon-number check, and the
//! eavesdropping strategies applied on a channel segment.

use std::fmt;

use num_complex::Complex;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::parties::PartyId;
use crate::qubit::{measure, prepare, sample_outcome, Basis, Gate, QubitState, StateLabel};
use crate::scalar::Scalar;

/// Joint state of a signal qubit and an eavesdropper's probe qubit.
///
/// Amplitudes are indexed `signal * 2 + probe`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitState<T: Scalar = f64> {
    amps: [Complex<T>; 4],
}

impl<T: Scalar> TwoQubitState<T> {
    pub fn product(signal: &QubitState<T>, probe: &QubitState<T>) -> Self {
        let s = [signal.amp0(), signal.amp1()];
        let p = [probe.amp0(), probe.amp1()];
        Self {
            amps: [s[0] * p[0], s[0] * p[1], s[1] * p[0], s[1] * p[1]],
        }
    }

    pub fn amplitudes(&self) -> &[Complex<T>; 4] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    /// CNOT with the signal as control and the probe as target.
    pub fn cnot_signal_to_probe(&self) -> Self {
        let [a00, a01, a10, a11] = self.amps;
        Self {
            amps: [a00, a01, a11, a10],
        }
    }

    /// Applies `gate` to the signal qubit only.
    pub fn apply_signal(&self, gate: Gate) -> Self {
        let [[u00, u01], [u10, u11]] = gate.matrix::<T>();
        let [a00, a01, a10, a11] = self.amps;
        Self {
            amps: [
                u00 * a00 + u01 * a10,
                u00 * a01 + u01 * a11,
                u10 * a00 + u11 * a10,
                u10 * a01 + u11 * a11,
            ],
        }
    }

    /// Unnormalized probe vector ⟨e|_signal ψ for the basis eigenvector `e`.
    fn probe_branch(&self, basis: Basis, outcome: bool) -> [Complex<T>; 2] {
        let e = prepare::<T>(StateLabel::new(outcome, basis));
        let (e0, e1) = (e.amp0().conj(), e.amp1().conj());
        let [a00, a01, a10, a11] = self.amps;
        [e0 * a00 + e1 * a10, e0 * a01 + e1 * a11]
    }

    /// Marginal probability of `outcome` when the signal is measured in `basis`.
    pub fn signal_probability(&self, basis: Basis, outcome: bool) -> T {
        let [p0, p1] = self.probe_branch(basis, outcome);
        p0.norm_sqr() + p1.norm_sqr()
    }

    /// Measures the signal and returns the collapsed joint state.
    pub fn measure_signal<R: Rng + ?Sized>(&self, basis: Basis, rng: &mut R) -> (bool, Self) {
        let outcome = sample_outcome(self.signal_probability(basis, false), rng);
        let [p0, p1] = self.probe_branch(basis, outcome);
        let norm = (p0.norm_sqr() + p1.norm_sqr()).sqrt();
        let probe = QubitState::new(p0 / norm, p1 / norm).expect("renormalized probe branch");
        let signal = prepare::<T>(StateLabel::new(outcome, basis));
        (outcome, Self::product(&signal, &probe))
    }
}

/// Quantum state carried by one photon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhotonState<T: Scalar = f64> {
    Single(QubitState<T>),
    /// Signal half of a signal–probe pair; the probe stays with the attacker.
    Entangled(TwoQubitState<T>),
}

impl<T: Scalar> PhotonState<T> {
    pub fn apply(&self, gate: Gate) -> Self {
        match self {
            PhotonState::Single(q) => PhotonState::Single(q.apply(gate)),
            PhotonState::Entangled(j) => PhotonState::Entangled(j.apply_signal(gate)),
        }
    }

    pub fn probability(&self, basis: Basis, outcome: bool) -> T {
        match self {
            PhotonState::Single(q) => q.probability(basis, outcome),
            PhotonState::Entangled(j) => j.signal_probability(basis, outcome),
        }
    }

    pub fn measure<R: Rng + ?Sized>(&self, basis: Basis, rng: &mut R) -> bool {
        match self {
            PhotonState::Single(q) => measure(q, basis, rng),
            PhotonState::Entangled(j) => sample_outcome(j.signal_probability(basis, false), rng),
        }
    }

    pub fn as_single(&self) -> Option<&QubitState<T>> {
        match self {
            PhotonState::Single(q) => Some(q),
            PhotonState::Entangled(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Photon<T: Scalar = f64> {
    pub state: PhotonState<T>,
    /// False marks an out-of-band ("invisible") photon.
    pub in_band: bool,
}

/// One channel message at block position `origin_index`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonSignal<T: Scalar = f64> {
    photons: Vec<Photon<T>>,
    pub origin_index: usize,
}

impl<T: Scalar> PhotonSignal<T> {
    /// Honest signal: one in-band photon.
    pub fn single(state: QubitState<T>, origin_index: usize) -> Self {
        Self::from_photons(
            vec![Photon {
                state: PhotonState::Single(state),
                in_band: true,
            }],
            origin_index,
        )
    }

    pub fn from_photons(photons: Vec<Photon<T>>, origin_index: usize) -> Self {
        Self {
            photons,
            origin_index,
        }
    }

    pub fn photons(&self) -> &[Photon<T>] {
        &self.photons
    }

    pub fn photon_count(&self) -> usize {
        self.photons.len()
    }

    pub fn has_out_of_band(&self) -> bool {
        self.photons.iter().any(|p| !p.in_band)
    }

    /// No photon survived the in-band filter.
    pub fn is_lost(&self) -> bool {
        self.photons.is_empty()
    }

    /// The photon a detector reads: the first in-band photon.
    pub fn primary(&self) -> Option<&PhotonState<T>> {
        self.photons.iter().find(|p| p.in_band).map(|p| &p.state)
    }

    fn primary_mut(&mut self) -> Option<&mut PhotonState<T>> {
        self.photons
            .iter_mut()
            .find(|p| p.in_band)
            .map(|p| &mut p.state)
    }

    /// Applies `gate` to every photon in the signal.
    pub fn apply(&mut self, gate: Gate) {
        for photon in &mut self.photons {
            photon.state = photon.state.apply(gate);
        }
    }

    /// Measures the primary photon; `None` for a lost signal.
    pub fn measure<R: Rng + ?Sized>(&self, basis: Basis, rng: &mut R) -> Option<bool> {
        self.primary().map(|p| p.measure(basis, rng))
    }

    fn push(&mut self, photon: Photon<T>) {
        self.photons.push(photon);
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    #[default]
    None,
    InterceptResendZ,
    InterceptResendX,
    InterceptResendRandom,
    /// Random-basis intercept-resend on every position; coverage is ignored.
    MeasureAll,
    EntanglingProbe,
    InvisiblePhotonRider,
    MultiPhotonTrojan,
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AttackKind::None => "none",
            AttackKind::InterceptResendZ => "intercept-resend-z",
            AttackKind::InterceptResendX => "intercept-resend-x",
            AttackKind::InterceptResendRandom => "intercept-resend-random",
            AttackKind::MeasureAll => "measure-all",
            AttackKind::EntanglingProbe => "entangling-probe",
            AttackKind::InvisiblePhotonRider => "invisible-photon-rider",
            AttackKind::MultiPhotonTrojan => "multi-photon-trojan",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackStrategy {
    pub kind: AttackKind,
    /// Fraction of block positions attacked, in [0, 1].
    #[serde(default = "full_coverage")]
    pub coverage: f64,
}

fn full_coverage() -> f64 {
    1.0
}

impl Default for AttackStrategy {
    fn default() -> Self {
        Self::none()
    }
}

impl AttackStrategy {
    pub const fn none() -> Self {
        Self {
            kind: AttackKind::None,
            coverage: 0.0,
        }
    }

    pub const fn full(kind: AttackKind) -> Self {
        Self {
            kind,
            coverage: 1.0,
        }
    }

    pub fn is_valid(&self) -> bool {
        (0.0..=1.0).contains(&self.coverage)
    }

    pub fn is_none(&self) -> bool {
        self.kind == AttackKind::None
    }
}

/// A hop of the pipeline and the attack running on it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSegment {
    pub from: PartyId,
    pub to: PartyId,
    pub attack: AttackStrategy,
}

/// The `m + n - 1` hops Alice 1 → … → Alice m → Bob 1 → … → Bob n, unattacked.
pub fn pipeline_segments(m: usize, n: usize) -> Vec<ChannelSegment> {
    (0..m + n - 1)
        .map(|pos| ChannelSegment {
            from: PartyId::from_pipeline_position(pos, m),
            to: PartyId::from_pipeline_position(pos + 1, m),
            attack: AttackStrategy::none(),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisChoice {
    Z,
    X,
    Random,
}

/// What the eavesdropper learned at one position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
pub enum EveRecord {
    Measured {
        basis: Basis,
        outcome: bool,
    },
    /// Probe entangled; its measurement is deferred until after announcements.
    ProbeAttached,
    RiderAttached,
    TrojanAttached,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackEvent {
    pub position: usize,
    #[serde(flatten)]
    pub record: EveRecord,
}

pub struct Transmission<T: Scalar = f64> {
    pub block: Vec<PhotonSignal<T>>,
    pub events: Vec<AttackEvent>,
}

/// Measures in the chosen basis and resends the observed eigenstate.
pub fn eavesdrop_intercept_resend<T: Scalar, R: Rng + ?Sized>(
    state: &PhotonState<T>,
    choice: BasisChoice,
    rng: &mut R,
) -> (QubitState<T>, EveRecord) {
    let basis = match choice {
        BasisChoice::Z => Basis::Z,
        BasisChoice::X => Basis::X,
        BasisChoice::Random => Basis::random(rng),
    };
    let outcome = state.measure(basis, rng);
    (
        QubitState::basis_state(basis, outcome),
        EveRecord::Measured { basis, outcome },
    )
}

/// Entangles a |0⟩ probe with the signal through a Z-controlled CNOT.
///
/// A signal that already carries a probe would need a third qubit; the
/// second probe's effect on the signal is Z dephasing, which is applied as
/// a Z measurement that collapses the existing pair.
pub fn eavesdrop_entangling<T: Scalar, R: Rng + ?Sized>(
    state: &PhotonState<T>,
    rng: &mut R,
) -> (PhotonState<T>, EveRecord) {
    let forwarded = match state {
        PhotonState::Single(q) => {
            let probe = prepare::<T>(StateLabel::new(false, Basis::Z));
            TwoQubitState::product(q, &probe).cnot_signal_to_probe()
        }
        PhotonState::Entangled(joint) => joint.measure_signal(Basis::Z, rng).1,
    };
    (PhotonState::Entangled(forwarded), EveRecord::ProbeAttached)
}

fn attacked_positions<R: Rng + ?Sized>(
    len: usize,
    attack: &AttackStrategy,
    rng: &mut R,
) -> Vec<usize> {
    let coverage = match attack.kind {
        AttackKind::None => return Vec::new(),
        AttackKind::MeasureAll => 1.0,
        _ => attack.coverage.clamp(0.0, 1.0),
    };
    let count = ((coverage * len as f64).round() as usize).min(len);
    if count == len {
        return (0..len).collect();
    }
    let mut picked = index::sample(rng, len, count).into_vec();
    picked.sort_unstable();
    picked
}

/// Sends a block across `segment`, applying its attack to a
/// coverage-fraction of positions. An unattacked segment is the identity.
pub fn transmit<T: Scalar, R: Rng + ?Sized>(
    mut block: Vec<PhotonSignal<T>>,
    segment: &ChannelSegment,
    rng: &mut R,
) -> Transmission<T> {
    let positions = attacked_positions(block.len(), &segment.attack, rng);
    let mut events = Vec::with_capacity(positions.len());
    for position in positions {
        let signal = &mut block[position];
        let record = match segment.attack.kind {
            AttackKind::None => unreachable!("no positions are selected without an attack"),
            AttackKind::InterceptResendZ
            | AttackKind::InterceptResendX
            | AttackKind::InterceptResendRandom
            | AttackKind::MeasureAll => {
                let choice = match segment.attack.kind {
                    AttackKind::InterceptResendZ => BasisChoice::Z,
                    AttackKind::InterceptResendX => BasisChoice::X,
                    _ => BasisChoice::Random,
                };
                match signal.primary_mut() {
                    Some(primary) => {
                        let (resent, record) = eavesdrop_intercept_resend(primary, choice, rng);
                        *primary = PhotonState::Single(resent);
                        record
                    }
                    None => continue,
                }
            }
            AttackKind::EntanglingProbe => match signal.primary_mut() {
                Some(primary) => {
                    let (forwarded, record) = eavesdrop_entangling(primary, rng);
                    *primary = forwarded;
                    record
                }
                None => continue,
            },
            AttackKind::InvisiblePhotonRider => {
                signal.push(Photon {
                    state: PhotonState::Single(prepare(StateLabel::ALL[0])),
                    in_band: false,
                });
                EveRecord::RiderAttached
            }
            AttackKind::MultiPhotonTrojan => {
                signal.push(Photon {
                    state: PhotonState::Single(prepare(StateLabel::ALL[0])),
                    in_band: true,
                });
                EveRecord::TrojanAttached
            }
        };
        events.push(AttackEvent { position, record });
    }
    Transmission { block, events }
}

/// Removes every out-of-band photon. A signal left without photons is lost
/// (see [`PhotonSignal::is_lost`]).
pub fn filter_in_band<T: Scalar>(block: Vec<PhotonSignal<T>>) -> Vec<PhotonSignal<T>> {
    block
        .into_iter()
        .map(|mut signal| {
            signal.photons.retain(|p| p.in_band);
            signal
        })
        .collect()
}

/// Photon-count threshold that triggers an abort at the splitter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PnsMode {
    /// Any multi-photon signal.
    #[default]
    Ge2,
    /// Only signals with more than two photons.
    Gt2,
}

impl PnsMode {
    pub const fn threshold(self) -> usize {
        match self {
            PnsMode::Ge2 => 2,
            PnsMode::Gt2 => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PnsResult {
    Ok,
    MultiPhotonDetected,
}

/// 50/50 photon-number splitter check on a sample signal.
///
/// Idealized detectors resolve photon number, so any signal at or above the
/// threshold is caught. Otherwise each photon is routed independently to one
/// of two click detectors and only a coincidence (both fire) reveals the
/// extra photons. A single photon can never produce a coincidence.
pub fn pns_check<T: Scalar, R: Rng + ?Sized>(
    sample: &PhotonSignal<T>,
    mode: PnsMode,
    idealized: bool,
    rng: &mut R,
) -> PnsResult {
    let count = sample.photon_count();
    let observed = if idealized {
        count >= mode.threshold()
    } else {
        let mut fired = [false; 2];
        for _ in 0..count {
            fired[usize::from(rng.random::<bool>())] = true;
        }
        count >= mode.threshold() && fired[0] && fired[1]
    };
    if observed {
        PnsResult::MultiPhotonDetected
    } else {
        PnsResult::Ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Qubit;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn label(a: u8, b: u8) -> StateLabel {
        StateLabel::from_bits(a == 1, b == 1)
    }

    fn segment(kind: AttackKind, coverage: f64) -> ChannelSegment {
        ChannelSegment {
            from: PartyId::alice(1),
            to: PartyId::alice(2),
            attack: AttackStrategy { kind, coverage },
        }
    }

    fn honest_block(len: usize) -> Vec<PhotonSignal<f64>> {
        (0..len)
            .map(|k| PhotonSignal::single(prepare(StateLabel::ALL[k % 4]), k))
            .collect()
    }

    #[test]
    fn unattacked_channel_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let block = honest_block(16);
        let out = transmit(block.clone(), &segment(AttackKind::None, 1.0), &mut rng);
        assert_eq!(out.block, block);
        assert!(out.events.is_empty());
    }

    #[test]
    fn intercept_resend_emits_a_protocol_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let zero = PhotonSignal::single(prepare::<f64>(label(0, 0)), 0);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            let out = transmit(
                vec![zero.clone()],
                &segment(AttackKind::InterceptResendRandom, 1.0),
                &mut rng,
            );
            let state = out.block[0]
                .primary()
                .unwrap()
                .as_single()
                .unwrap()
                .label()
                .unwrap();
            // A Z-basis measurement of |0> can only yield 0.
            if state.basis == Basis::Z {
                assert!(!state.value);
            }
            seen.insert(state);
        }
        assert_eq!(seen.len(), 3, "{seen:?}");
    }

    #[test]
    fn rider_and_trojan_tagging() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = transmit(
            honest_block(8),
            &segment(AttackKind::InvisiblePhotonRider, 1.0),
            &mut rng,
        );
        assert!(out
            .block
            .iter()
            .all(|s| s.photon_count() == 2 && s.has_out_of_band()));
        let out = transmit(
            honest_block(8),
            &segment(AttackKind::MultiPhotonTrojan, 1.0),
            &mut rng,
        );
        assert!(out
            .block
            .iter()
            .all(|s| s.photon_count() == 2 && !s.has_out_of_band()));
    }

    #[test]
    fn partial_coverage_attacks_exact_fraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let out = transmit(
            honest_block(100),
            &segment(AttackKind::InvisiblePhotonRider, 0.3),
            &mut rng,
        );
        assert_eq!(out.events.len(), 30);
        assert_eq!(out.block.iter().filter(|s| s.has_out_of_band()).count(), 30);
    }

    #[test]
    fn filter_examples() {
        let honest = honest_block(1);
        assert_eq!(filter_in_band(honest.clone()), honest);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ridden = transmit(
            honest_block(1),
            &segment(AttackKind::InvisiblePhotonRider, 1.0),
            &mut rng,
        )
        .block;
        let filtered = filter_in_band(ridden);
        assert_eq!(filtered[0].photon_count(), 1);
        assert!(!filtered[0].has_out_of_band());

        let invisible = PhotonSignal::from_photons(
            vec![Photon {
                state: PhotonState::Single(prepare::<f64>(label(0, 0))),
                in_band: false,
            }],
            0,
        );
        assert!(filter_in_band(vec![invisible])[0].is_lost());
    }

    fn signal_with(count: usize) -> PhotonSignal<f64> {
        let photon = Photon {
            state: PhotonState::Single(prepare(label(0, 0))),
            in_band: true,
        };
        PhotonSignal::from_photons(vec![photon; count], 0)
    }

    #[test]
    fn pns_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert_eq!(
            pns_check(&signal_with(1), PnsMode::Ge2, true, &mut rng),
            PnsResult::Ok
        );
        assert_eq!(
            pns_check(&signal_with(2), PnsMode::Ge2, true, &mut rng),
            PnsResult::MultiPhotonDetected
        );
        assert_eq!(
            pns_check(&signal_with(3), PnsMode::Ge2, true, &mut rng),
            PnsResult::MultiPhotonDetected
        );
        assert_eq!(
            pns_check(&signal_with(2), PnsMode::Gt2, true, &mut rng),
            PnsResult::Ok
        );
        assert_eq!(
            pns_check(&signal_with(3), PnsMode::Gt2, true, &mut rng),
            PnsResult::MultiPhotonDetected
        );
    }

    #[test]
    fn probabilistic_splitter_coincidence_rate() {
        // Two photons: routings LL, LR, RL, RR; coincidence in 2 of 4.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trials = 10_000;
        let hits = (0..trials)
            .filter(|_| {
                pns_check(&signal_with(2), PnsMode::Ge2, false, &mut rng)
                    == PnsResult::MultiPhotonDetected
            })
            .count();
        let freq = hits as f64 / trials as f64;
        assert!(
            (freq - 0.5).abs() <= 3.0 * (0.25f64 / trials as f64).sqrt(),
            "{freq}"
        );
        for _ in 0..1000 {
            assert_eq!(
                pns_check(&signal_with(1), PnsMode::Ge2, false, &mut rng),
                PnsResult::Ok
            );
        }
    }

    #[test]
    fn intercept_resend_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let zero = PhotonState::Single(prepare::<f64>(label(0, 0)));
        let (resent, record) = eavesdrop_intercept_resend(&zero, BasisChoice::Z, &mut rng);
        assert_eq!(resent, prepare(label(0, 0)));
        assert_eq!(
            record,
            EveRecord::Measured {
                basis: Basis::Z,
                outcome: false
            }
        );

        let trials = 10_000;
        let sigma3 = 3.0 * (0.25f64 / trials as f64).sqrt();
        let plus = PhotonState::Single(prepare::<f64>(label(0, 1)));
        let ones = (0..trials)
            .filter(|_| {
                eavesdrop_intercept_resend(&plus, BasisChoice::Z, &mut rng).0
                    == prepare(label(1, 0))
            })
            .count();
        assert!((ones as f64 / trials as f64 - 0.5).abs() <= sigma3);

        // P(error) = P(wrong basis) * P(wrong outcome) = 1/2 * 1/2.
        let sigma3 = 3.0 * (0.25f64 * 0.75 / trials as f64).sqrt();
        let errors = (0..trials)
            .filter(|_| {
                let (resent, _) = eavesdrop_intercept_resend(&zero, BasisChoice::Random, &mut rng);
                measure(&resent, Basis::Z, &mut rng)
            })
            .count();
        assert!(
            (errors as f64 / trials as f64 - 0.25).abs() <= sigma3,
            "{errors}"
        );
    }

    #[test]
    fn entangling_probe_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let zero = PhotonState::Single(prepare::<f64>(label(0, 0)));
        let (fwd, record) = eavesdrop_entangling(&zero, &mut rng);
        assert_eq!(record, EveRecord::ProbeAttached);
        assert!((fwd.probability(Basis::Z, false) - 1.0).abs() < 1e-12);

        let plus = PhotonState::Single(prepare::<f64>(label(0, 1)));
        let (fwd, _) = eavesdrop_entangling(&plus, &mut rng);
        assert!((fwd.probability(Basis::X, false) - 0.5).abs() < 1e-12);
        if let PhotonState::Entangled(joint) = fwd {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let expected = [h, 0.0, 0.0, h];
            for (a, e) in joint.amplitudes().iter().zip(expected) {
                assert!((a - Complex::new(e, 0.0)).norm() < 1e-12);
            }
        } else {
            panic!("expected an entangled photon");
        }
    }

    #[test]
    fn entangling_probe_block_error_rate() {
        // Balanced bases: Z-basis inputs never err, X-basis inputs err half the time.
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let (mut errors, mut total) = (0usize, 0usize);
        for _ in 0..40 {
            let labels: Vec<StateLabel> = (0..256).map(|k| StateLabel::ALL[k % 4]).collect();
            let block = labels
                .iter()
                .enumerate()
                .map(|(k, l)| PhotonSignal::single(prepare::<f64>(*l), k))
                .collect();
            let out = transmit(block, &segment(AttackKind::EntanglingProbe, 1.0), &mut rng);
            for (sig, l) in out.block.iter().zip(&labels) {
                total += 1;
                errors += usize::from(sig.measure(l.basis, &mut rng).unwrap() != l.value);
            }
        }
        let rate = errors as f64 / total as f64;
        assert!(
            (rate - 0.25).abs() <= 3.0 * (0.25 * 0.75 / total as f64).sqrt(),
            "{rate}"
        );
    }

    #[test]
    fn repeated_probe_keeps_states_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut state = PhotonState::Single(prepare::<f64>(label(1, 1)));
        for gate in [Gate::Hadamard, Gate::Sigma1, Gate::Hadamard, Gate::Sigma3] {
            state = eavesdrop_entangling(&state, &mut rng).0.apply(gate);
            if let PhotonState::Entangled(j) = state {
                assert!((j.norm_sqr() - 1.0).abs() < 1e-12);
            }
            let total = state.probability(Basis::X, false) + state.probability(Basis::X, true);
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pipeline_segment_order() {
        let segs = pipeline_segments(3, 2);
        let hops: Vec<String> = segs
            .iter()
            .map(|s| format!("{}>{}", s.from, s.to))
            .collect();
        assert_eq!(
            hops,
            [
                "alice-1>alice-2",
                "alice-2>alice-3",
                "alice-3>bob-1",
                "bob-1>bob-2"
            ]
        );
    }

    #[test]
    fn single_qubit_alias_signal() {
        let q: Qubit = prepare(label(0, 1));
        let s = crate::Signal::single(q, 0);
        assert_eq!(s.photon_count(), 1);
    }
}
