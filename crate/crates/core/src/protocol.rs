//! The ping-pong round state machine and Monte Carlo session runner.
//!
//! One round: the receiver of secrets (Bob) prepares the entangled pair and
//! sends the travel photon; the channel (or the eavesdropper's substitute for
//! it) may lose the photon; the sender (Alice) either verifies the photon in
//! control mode or encodes a bit and returns it; the eavesdropper undoes her
//! outbound manipulation, optionally symmetrizes, and reads her ancilla; Bob
//! decodes with a joint Bell readout.
//!
//! Loss model: the physical channel loses the travel photon on the outbound
//! leg with probability `1 - eta`; the return leg is ideal. An active
//! eavesdropper replaces the channel with ideal links and hides her tracks
//! behind an artificial discard tuned so the photon-found rate Alice observes
//! still equals `eta` whenever that is achievable.
//!
//! Rounds draw all randomness from a per-round substream of a seeded
//! generator, so sessions are reproducible and rounds are independent.

use alloc::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::attack::{AttackKind, AttackOps, AttackVariant};
use crate::error::EngineError;
use crate::state::{
    make_initial, make_pair, measure_bell, measure_polarization,
    BellOutcome, MeasurementBasis, ModeOccupancy, OpticalMode, OutcomeValue, Polarization,
    PolarizationOutcome, Register, StateVector,
};

/// Which leg of the round trip the channel loss acts on. The model applies
/// loss only while the photon travels from Bob to Alice; the return leg is
/// ideal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossLeg {
    /// Outbound (Bob to Alice) leg.
    #[default]
    BobToAlice,
}

/// Transmission properties of the quantum channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    /// Probability that a photon survives the lossy leg.
    pub eta: f64,
    /// Which leg the loss acts on.
    pub loss_leg: LossLeg,
}

impl ChannelConfig {
    /// An ideal channel.
    pub fn ideal() -> Self {
        ChannelConfig {
            eta: 1.0,
            loss_leg: LossLeg::BobToAlice,
        }
    }

    /// A channel with the given transmission efficiency.
    pub fn with_eta(eta: f64) -> Self {
        ChannelConfig {
            eta,
            loss_leg: LossLeg::BobToAlice,
        }
    }

    /// Range-checks the configuration.
    pub fn validate(&self) -> Result<(), EngineError> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(EngineError::InvalidConfig("eta must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Protocol and session parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    /// Probability that a round runs in control mode.
    pub control_probability: f64,
    /// The eavesdropping strategy.
    pub attack: AttackVariant,
    /// Fraction of rounds the eavesdropper attacks.
    pub attack_fraction: f64,
    /// Whether control rounds draw the measurement basis uniformly from
    /// {z, x} instead of always using z.
    pub two_basis_control: bool,
    /// Number of rounds in a session.
    pub rounds: u64,
    /// Session seed.
    pub seed: u64,
}

impl ProtocolConfig {
    /// Defaults: balanced control/message split, no attack, full attack
    /// fraction, z-only control.
    pub fn new(attack: AttackVariant) -> Self {
        ProtocolConfig {
            control_probability: 0.5,
            attack,
            attack_fraction: 1.0,
            two_basis_control: false,
            rounds: 100_000,
            seed: 0,
        }
    }

    /// Range-checks the configuration.
    pub fn validate(&self) -> Result<(), EngineError> {
        if !(0.0..=1.0).contains(&self.control_probability) {
            return Err(EngineError::InvalidConfig(
                "control probability must lie in [0, 1]",
            ));
        }
        if !(0.0..=1.0).contains(&self.attack_fraction) {
            return Err(EngineError::InvalidConfig(
                "attack fraction must lie in [0, 1]",
            ));
        }
        if self.rounds == 0 {
            return Err(EngineError::InvalidConfig("rounds must be at least 1"));
        }
        Ok(())
    }
}

/// Mode a round ran in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundMode {
    /// Verification round.
    Control,
    /// Communication round.
    Message,
}

/// Bob's decode result on a message round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeResult {
    /// A Bell readout decoded this bit.
    Bit(u8),
    /// The travel mode arrived empty; the round is lost.
    Loss,
}

/// Everything observed in one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    /// Control or message.
    pub mode: RoundMode,
    /// Alice's message bit (message rounds).
    pub j: Option<u8>,
    /// The eavesdropper's ancilla readout (attacked, delivered message
    /// rounds).
    pub k: Option<u8>,
    /// Bob's decode result (message rounds).
    pub m: Option<DecodeResult>,
    /// Basis of the control measurement (control rounds).
    pub control_basis: Option<MeasurementBasis>,
    /// Alice's control readout (control rounds).
    pub alice_outcome: Option<PolarizationOutcome>,
    /// Bob's home-photon readout (control rounds).
    pub bob_outcome: Option<Polarization>,
    /// Whether the round's readouts expose the eavesdropper.
    pub detection: bool,
    /// Whether the eavesdropper attacked this round.
    pub attacked: bool,
    /// Whether the symmetrization coin came up heads this round.
    pub symmetrized: bool,
    /// Whether the travel photon was lost (channel loss or artificial
    /// discard) before reaching Alice.
    pub photon_lost: bool,
}

/// Aggregated counts over a session. Merging is associative and
/// order-insensitive, so partial sessions can be combined freely.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SessionStats {
    /// Total rounds.
    pub rounds: u64,
    /// Control rounds.
    pub control_rounds: u64,
    /// Control rounds measured in the z basis.
    pub control_z_rounds: u64,
    /// Control rounds measured in the x basis.
    pub control_x_rounds: u64,
    /// Control rounds in which Alice found a photon.
    pub control_photon_found: u64,
    /// Control rounds flagged as eavesdropping.
    pub control_detections: u64,
    /// Detections among z-basis control rounds.
    pub control_z_detections: u64,
    /// Detections among x-basis control rounds.
    pub control_x_detections: u64,
    /// Message rounds.
    pub message_rounds: u64,
    /// Message rounds the eavesdropper attacked.
    pub message_attacked: u64,
    /// Message rounds lost before decoding.
    pub message_lost: u64,
    /// Message rounds Bob decoded to a bit.
    pub message_decoded: u64,
    /// Decoded message rounds with `m != j`.
    pub message_errors: u64,
    /// Rounds on which the symmetrization coin came up heads.
    pub symmetrized_rounds: u64,
    /// Counts over `(j, k, m)` for attacked, delivered message rounds.
    pub jkm_counts: BTreeMap<(u8, u8, u8), u64>,
    /// Counts over `(j, m)` for all delivered message rounds.
    pub jm_counts: BTreeMap<(u8, u8), u64>,
}

impl SessionStats {
    /// Folds one round into the counters.
    pub fn record(&mut self, record: &RoundRecord) {
        self.rounds += 1;
        if record.symmetrized {
            self.symmetrized_rounds += 1;
        }
        match record.mode {
            RoundMode::Control => {
                self.control_rounds += 1;
                match record.control_basis {
                    Some(MeasurementBasis::Z) => self.control_z_rounds += 1,
                    Some(MeasurementBasis::X) => self.control_x_rounds += 1,
                    None => {}
                }
                if matches!(
                    record.alice_outcome,
                    Some(PolarizationOutcome::Found(_)) | Some(PolarizationOutcome::TwoPhoton)
                ) {
                    self.control_photon_found += 1;
                }
                if record.detection {
                    self.control_detections += 1;
                    match record.control_basis {
                        Some(MeasurementBasis::Z) => self.control_z_detections += 1,
                        Some(MeasurementBasis::X) => self.control_x_detections += 1,
                        None => {}
                    }
                }
            }
            RoundMode::Message => {
                self.message_rounds += 1;
                if record.attacked {
                    self.message_attacked += 1;
                }
                match (record.j, record.m) {
                    (Some(j), Some(DecodeResult::Bit(m))) => {
                        self.message_decoded += 1;
                        if m != j {
                            self.message_errors += 1;
                        }
                        *self.jm_counts.entry((j, m)).or_insert(0) += 1;
                        if let Some(k) = record.k {
                            *self.jkm_counts.entry((j, k, m)).or_insert(0) += 1;
                        }
                    }
                    (_, Some(DecodeResult::Loss)) => self.message_lost += 1,
                    _ => {}
                }
            }
        }
    }

    /// Adds another stats block into this one.
    pub fn merge(&mut self, other: &SessionStats) {
        self.rounds += other.rounds;
        self.control_rounds += other.control_rounds;
        self.control_z_rounds += other.control_z_rounds;
        self.control_x_rounds += other.control_x_rounds;
        self.control_photon_found += other.control_photon_found;
        self.control_detections += other.control_detections;
        self.control_z_detections += other.control_z_detections;
        self.control_x_detections += other.control_x_detections;
        self.message_rounds += other.message_rounds;
        self.message_attacked += other.message_attacked;
        self.message_lost += other.message_lost;
        self.message_decoded += other.message_decoded;
        self.message_errors += other.message_errors;
        self.symmetrized_rounds += other.symmetrized_rounds;
        for (key, count) in &other.jkm_counts {
            *self.jkm_counts.entry(*key).or_insert(0) += count;
        }
        for (key, count) in &other.jm_counts {
            *self.jm_counts.entry(*key).or_insert(0) += count;
        }
    }

    /// Fraction of control rounds in which Alice found a photon.
    pub fn photon_found_rate(&self) -> f64 {
        if self.control_rounds == 0 {
            return 0.0;
        }
        self.control_photon_found as f64 / self.control_rounds as f64
    }

    /// Fraction of control rounds flagged as eavesdropping.
    pub fn detection_rate(&self) -> f64 {
        if self.control_rounds == 0 {
            return 0.0;
        }
        self.control_detections as f64 / self.control_rounds as f64
    }

    /// Observed bit error rate over decoded message rounds.
    pub fn qber(&self) -> f64 {
        if self.message_decoded == 0 {
            return 0.0;
        }
        self.message_errors as f64 / self.message_decoded as f64
    }
}

/// Whether a pair of control readouts exposes the eavesdropper.
///
/// The pair state is anticorrelated in the z basis and correlated in the x
/// basis, so identical z outcomes, or differing x outcomes, are evidence of
/// tampering.
pub fn detection_rule(basis: MeasurementBasis, alice: Polarization, bob: Polarization) -> bool {
    match basis {
        MeasurementBasis::Z => alice == bob,
        MeasurementBasis::X => alice != bob,
    }
}

/// The artificial discard probability the eavesdropper applies so the
/// photon-found rate Alice observes matches the channel's `eta`. When the
/// attacked fraction is too large to hide (the reachable rate falls below
/// `eta`), no discard is applied and the loss deficit becomes observable.
pub fn masking_discard_probability(kind: AttackKind, eta: f64, attack_fraction: f64) -> f64 {
    if kind == AttackKind::None {
        return 0.0;
    }
    let survival = kind.intrinsic_survival();
    let reachable = attack_fraction * survival + (1.0 - attack_fraction);
    if reachable > eta {
        1.0 - eta / reachable
    } else {
        0.0
    }
}

/// Absorbs the photon in `mode`: the photon is first collapsed in the z
/// basis with a hidden outcome, then the mode is emptied. The hidden
/// collapse keeps the marginals of every other register basis-independent,
/// which a coherent vacuum substitution would not.
pub fn lose_photon<R: Rng + ?Sized>(
    state: &StateVector,
    mode: OpticalMode,
    rng: &mut R,
) -> Result<StateVector, EngineError> {
    let (outcome, collapsed) =
        measure_polarization(state, Register::from(mode), MeasurementBasis::Z, rng)?;
    match outcome.value {
        OutcomeValue::Polarization(PolarizationOutcome::Vacuum) => Ok(collapsed),
        OutcomeValue::Polarization(PolarizationOutcome::Found(_)) => {
            let map = collapsed
                .iter()
                .map(|(label, amp)| (label.with_mode(mode, ModeOccupancy::Vac), *amp))
                .collect();
            Ok(StateVector::from_map(map))
        }
        _ => Err(EngineError::UnreachableOutcome(
            "photon loss on a doubly occupied mode",
        )),
    }
}

/// Runs a single round with its own generator. Prefer [`run_session`] for
/// many rounds; this convenience entry point rebuilds the attack operators
/// every call.
pub fn run_round<R: Rng + ?Sized>(
    config: &ProtocolConfig,
    channel: &ChannelConfig,
    rng: &mut R,
) -> Result<RoundRecord, EngineError> {
    config.validate()?;
    channel.validate()?;
    let ops = AttackOps::new(config.attack)?;
    run_round_with(config, channel, &ops, rng)
}

fn run_round_with<R: Rng + ?Sized>(
    config: &ProtocolConfig,
    channel: &ChannelConfig,
    ops: &AttackOps,
    rng: &mut R,
) -> Result<RoundRecord, EngineError> {
    let eve_present = config.attack.kind != AttackKind::None;
    let attacked = eve_present && rng.gen_bool(config.attack_fraction);

    // Bob's preparation and the outbound leg. The eavesdropper commits to a
    // round before Alice reveals its mode.
    let mut state = if attacked {
        ops.apply_outbound(&make_initial())?
    } else {
        make_pair()
    };

    let mut photon_lost = false;
    if eve_present {
        // The eavesdropper supplies ideal links and hides behind a tuned
        // artificial discard.
        let discard = masking_discard_probability(config.attack.kind, channel.eta, config.attack_fraction);
        if discard > 0.0 && rng.gen_bool(discard) {
            state = lose_photon(&state, OpticalMode::T, rng)?;
            photon_lost = true;
        }
    } else if channel.eta < 1.0 && rng.gen_bool(1.0 - channel.eta) {
        state = lose_photon(&state, OpticalMode::T, rng)?;
        photon_lost = true;
    }

    if rng.gen_bool(config.control_probability) {
        // Control mode: Alice measures the travel mode and announces; Bob
        // measures the home photon in the same basis.
        let basis = if config.two_basis_control && rng.gen_bool(0.5) {
            MeasurementBasis::X
        } else {
            MeasurementBasis::Z
        };
        let (alice, state) = measure_polarization(&state, Register::T, basis, rng)?;
        let (bob, _) = measure_polarization(&state, Register::H, basis, rng)?;
        let alice_outcome = match alice.value {
            OutcomeValue::Polarization(outcome) => outcome,
            _ => return Err(EngineError::UnreachableOutcome("non-polarization readout")),
        };
        let bob_outcome = match bob.value {
            OutcomeValue::Polarization(PolarizationOutcome::Found(p)) => p,
            _ => {
                return Err(EngineError::UnreachableOutcome(
                    "home register without a photon",
                ))
            }
        };
        let detection = match alice_outcome {
            PolarizationOutcome::Found(p) => detection_rule(basis, p, bob_outcome),
            _ => false,
        };
        return Ok(RoundRecord {
            mode: RoundMode::Control,
            j: None,
            k: None,
            m: None,
            control_basis: Some(basis),
            alice_outcome: Some(alice_outcome),
            bob_outcome: Some(bob_outcome),
            detection,
            attacked,
            symmetrized: false,
            photon_lost,
        });
    }

    // Message mode: encode, return leg, eavesdropper's readout, Bob's decode.
    let j = u8::from(rng.gen_bool(0.5));
    let mut state = ops.encode(&state, j)?;
    let mut k = None;
    let mut symmetrized = false;
    if attacked && !photon_lost {
        state = ops.apply_return(&state)?;
        if config.attack.symmetrize && rng.gen_bool(0.5) {
            state = ops.symmetrize(&state)?;
            symmetrized = true;
        }
        let (bit, collapsed) = crate::attack::eve_measure(&state, rng)?;
        k = Some(bit);
        state = collapsed;
    }
    let (bell, _) = measure_bell(&state, rng)?;
    let m = match bell.value {
        OutcomeValue::Bell(BellOutcome::PsiPlus) => DecodeResult::Bit(0),
        OutcomeValue::Bell(BellOutcome::PsiMinus) => DecodeResult::Bit(1),
        OutcomeValue::Bell(BellOutcome::Loss) => DecodeResult::Loss,
        _ => {
            return Err(EngineError::UnreachableOutcome(
                "correlated Bell outcome on a protocol path",
            ))
        }
    };
    Ok(RoundRecord {
        mode: RoundMode::Message,
        j: Some(j),
        k,
        m: Some(m),
        control_basis: None,
        alice_outcome: None,
        bob_outcome: None,
        detection: false,
        attacked,
        symmetrized,
        photon_lost,
    })
}

/// Runs a full session of independent rounds. Round `i` draws from stream
/// `i` of a generator keyed by the session seed, so equal configurations
/// produce identical statistics and rounds can be re-run in any order.
pub fn run_session(
    config: &ProtocolConfig,
    channel: &ChannelConfig,
) -> Result<SessionStats, EngineError> {
    config.validate()?;
    channel.validate()?;
    let ops = AttackOps::new(config.attack)?;
    let mut stats = SessionStats::default();
    for round in 0..config.rounds {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(round);
        let record = run_round_with(config, channel, &ops, &mut rng)?;
        stats.record(&record);
    }
    Ok(stats)
}
