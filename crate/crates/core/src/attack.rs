//! Eavesdropping operations on the travel photon.
//!
//! Two strategies are modeled. The original attack couples the travel photon
//! to two ancilla modes with the operator `Q = SWAP_tx CPBS_txy H_y` on the
//! outbound leg and undoes it with `Q^-1` on the return leg; it hides half of
//! the travel photons in the ancillas, so the channel looks 50% lossy. The
//! improved attack wraps `Q` into `W = U V Q`, which routes the photon back
//! into the travel mode on every branch: the outbound leg is lossless and the
//! home/travel readouts stay perfectly anticorrelated.
//!
//! Products are read right to left: the rightmost factor acts first.
//!
//! The return leg of the improved attack is specified by its outcomes on the
//! two encoded states (see [`ab_attack`]); the closed-form output states, and
//! the states the symmetrization step turns them into, are available from
//! [`post_ab_state`] and [`symmetrized_post_ab_state`] as oracles for tests
//! and verification.

use num_complex::Complex64;
use rand::Rng;

use core::f64::consts::FRAC_1_SQRT_2;

use crate::error::EngineError;
use crate::state::{
    cnot, cpbs, hadamard, make_initial, pauli_x, pauli_z, polarization_projections, swap,
    BasisLabel, GateSpec, MeasurementBasis, ModeOccupancy, OpticalMode, Polarization,
    PolarizationOutcome, Register, StateVector, NORM_TOLERANCE,
};

/// Which eavesdropping strategy is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttackKind {
    /// No eavesdropper on the line.
    None,
    /// The original lossy attack (`Q` outbound, `Q^-1` on the return).
    Wojcik,
    /// The lossless attack (`W` outbound).
    Improved,
}

impl AttackKind {
    /// Probability that the travel photon reaches the receiver's station on
    /// an attacked round over an otherwise ideal link.
    pub fn intrinsic_survival(self) -> f64 {
        match self {
            AttackKind::Wojcik => 0.5,
            AttackKind::None | AttackKind::Improved => 1.0,
        }
    }

    /// Canonical lowercase name, as used by the CLI and the sweep CSV.
    pub fn as_str(self) -> &'static str {
        match self {
            AttackKind::None => "none",
            AttackKind::Wojcik => "wojcik",
            AttackKind::Improved => "improved",
        }
    }
}

impl core::fmt::Display for AttackKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An attack strategy plus the optional symmetrization step on the return
/// leg. The coin for the symmetrization is drawn by the protocol layer, so
/// the eavesdropper's bookkeeping can condition on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttackVariant {
    /// Which strategy is active.
    pub kind: AttackKind,
    /// Whether the extra `S_ty` operation is applied with probability 1/2
    /// after the return-leg attack.
    pub symmetrize: bool,
}

impl AttackVariant {
    /// Convenience constructor.
    pub fn new(kind: AttackKind, symmetrize: bool) -> Self {
        AttackVariant { kind, symmetrize }
    }

    /// No eavesdropper.
    pub fn none() -> Self {
        AttackVariant::new(AttackKind::None, false)
    }
}

/// The original outbound attack operator `Q = SWAP_tx CPBS_txy H_y`.
pub fn build_q() -> GateSpec {
    hadamard(OpticalMode::Y)
        .then(&cpbs())
        .then(&swap(OpticalMode::T, OpticalMode::X))
        .with_name("Q")
}

/// `U`: swaps the travel and first-ancilla contents exactly when the second
/// ancilla holds a polarization-0 photon; identity otherwise (vacuum included).
pub fn build_u() -> GateSpec {
    conditional_swap("U", ModeOccupancy::Pol0)
}

/// `V`: swaps the travel and first-ancilla contents exactly when the second
/// ancilla holds a polarization-1 photon; identity otherwise.
pub fn build_v() -> GateSpec {
    conditional_swap("V", ModeOccupancy::Pol1)
}

fn conditional_swap(name: &str, trigger: ModeOccupancy) -> GateSpec {
    GateSpec::from_rule(name, move |label| {
        let out = if label.y == trigger {
            label
                .with_mode(OpticalMode::T, label.x)
                .with_mode(OpticalMode::X, label.t)
        } else {
            *label
        };
        Some(alloc::vec![(out, Complex64::new(1.0, 0.0))])
    })
}

/// The improved outbound attack operator `W = U V Q`.
pub fn build_w() -> GateSpec {
    build_q().then(&build_v()).then(&build_u()).with_name("W")
}

/// The inverse of `W`, applied on the return leg.
pub fn build_w_inverse() -> GateSpec {
    build_w().inverse().with_name("W^-1")
}

/// The symmetrization operator `S_ty = X_t Z_t CNOT_ty X_t Z_t`.
pub fn symmetrization_gate() -> GateSpec {
    pauli_z(Register::T)
        .then(&pauli_x(Register::T))
        .then(&cnot(OpticalMode::T, OpticalMode::Y))
        .then(&pauli_z(Register::T))
        .then(&pauli_x(Register::T))
        .with_name("S_ty")
}

/// Applies the sender's phase encoding `Z_t^j` to the travel mode.
pub fn encode(state: &StateVector, j: u8) -> Result<StateVector, EngineError> {
    match j {
        0 => Ok(state.clone()),
        1 => pauli_z(Register::T).apply(state),
        _ => Err(EngineError::InvalidConfig("message bit must be 0 or 1")),
    }
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn label(h: Polarization, t: ModeOccupancy, x: ModeOccupancy, y: ModeOccupancy) -> BasisLabel {
    BasisLabel::new(h, t, x, y)
}

/// Closed form of the improved attack's outbound output `W |initial>`: the
/// travel mode holds exactly one photon anticorrelated with the home photon,
/// and the ancillas carry the which-branch record.
pub fn post_ba_state() -> StateVector {
    use ModeOccupancy::{Pol0, Pol1, Vac};
    use Polarization::{P0, P1};
    StateVector::from_amplitudes([
        (label(P0, Pol1, Vac, Pol0), re(0.5)),
        (label(P0, Pol1, Pol1, Vac), re(0.5)),
        (label(P1, Pol0, Vac, Pol1), re(0.5)),
        (label(P1, Pol0, Pol0, Vac), re(0.5)),
    ])
    .expect("closed-form state is normalized")
}

/// Closed form of the original attack's outbound output `Q |initial>`: on
/// half of the weight the travel mode is empty.
pub fn wojcik_post_ba_state() -> StateVector {
    use ModeOccupancy::{Pol0, Pol1, Vac};
    use Polarization::{P0, P1};
    StateVector::from_amplitudes([
        (label(P0, Vac, Pol1, Pol0), re(0.5)),
        (label(P0, Pol1, Pol1, Vac), re(0.5)),
        (label(P1, Pol0, Pol0, Vac), re(0.5)),
        (label(P1, Vac, Pol0, Pol1), re(0.5)),
    ])
    .expect("closed-form state is normalized")
}

/// Closed form of the improved attack's return-leg output for message bit
/// `j`. For `j = 0` this is exactly the initial configuration; for `j = 1`
/// the second ancilla is entangled with the pair and carries the phase mark.
pub fn post_ab_state(j: u8) -> StateVector {
    use ModeOccupancy::{Pol0, Pol1, Vac};
    use Polarization::{P0, P1};
    let s = FRAC_1_SQRT_2;
    let entries: [(BasisLabel, Complex64); 2] = match j {
        0 => [
            (label(P0, Pol1, Vac, Pol0), re(s)),
            (label(P1, Pol0, Vac, Pol0), re(s)),
        ],
        _ => [
            (label(P0, Pol1, Vac, Pol1), re(-s)),
            (label(P1, Pol0, Vac, Pol0), re(s)),
        ],
    };
    StateVector::from_amplitudes(entries).expect("closed-form state is normalized")
}

/// Closed form of the return-leg output after the symmetrization step was
/// applied (coin = heads) for message bit `j`.
pub fn symmetrized_post_ab_state(j: u8) -> StateVector {
    use ModeOccupancy::{Pol0, Pol1, Vac};
    use Polarization::{P0, P1};
    let s = FRAC_1_SQRT_2;
    let entries: [(BasisLabel, Complex64); 2] = match j {
        0 => [
            (label(P0, Pol1, Vac, Pol0), re(s)),
            (label(P1, Pol0, Vac, Pol1), re(s)),
        ],
        _ => [
            (label(P0, Pol1, Vac, Pol1), re(s)),
            (label(P1, Pol0, Vac, Pol1), re(-s)),
        ],
    };
    StateVector::from_amplitudes(entries).expect("closed-form state is normalized")
}

/// Closed form of the original attack's return-leg output `Q^-1 Z_t^j Q
/// |initial>` for message bit `j`.
pub fn wojcik_post_ab_state(j: u8) -> StateVector {
    use ModeOccupancy::{Pol0, Pol1, Vac};
    use Polarization::{P0, P1};
    let s = FRAC_1_SQRT_2;
    let entries: [(BasisLabel, Complex64); 2] = match j {
        0 => [
            (label(P0, Pol1, Vac, Pol0), re(s)),
            (label(P1, Pol0, Vac, Pol0), re(s)),
        ],
        _ => [
            (label(P0, Pol1, Vac, Pol1), re(s)),
            (label(P1, Pol0, Vac, Pol0), re(s)),
        ],
    };
    StateVector::from_amplitudes(entries).expect("closed-form state is normalized")
}

/// The improved attack's return-leg operation.
///
/// The operation is defined by its action on the two states the protocol can
/// hand it: the outbound output `W |initial>` with the phase encoding `Z_t^j`
/// applied, for `j` in {0, 1}. Those two inputs are orthogonal, and the
/// operation maps each to the closed-form output of [`post_ab_state`]. Any
/// other input is off the attack path and rejected.
pub fn ab_attack(state: &StateVector) -> Result<StateVector, EngineError> {
    let ba = post_ba_state();
    for j in [0u8, 1u8] {
        let expected_input = encode(&ba, j)?;
        if state.max_deviation(&expected_input) < NORM_TOLERANCE {
            return Ok(post_ab_state(j));
        }
    }
    Err(EngineError::OffAttackPath)
}

/// Applies the symmetrization operator when the coin came up heads.
pub fn symmetrize(state: &StateVector, coin: bool) -> Result<StateVector, EngineError> {
    if coin {
        symmetrization_gate().apply(state)
    } else {
        Ok(state.clone())
    }
}

/// The eavesdropper's polarization readout of the second ancilla. Returns
/// the observed bit and the collapsed state.
///
/// On every attack path the second ancilla holds exactly one photon at this
/// point; vacuum or double occupancy with positive weight is reported as an
/// error rather than folded into a bit.
pub fn eve_measure<R: Rng + ?Sized>(
    state: &StateVector,
    rng: &mut R,
) -> Result<(u8, StateVector), EngineError> {
    let branches = polarization_projections(state, Register::Y, MeasurementBasis::Z)?;
    for (outcome, _, _) in &branches {
        if !matches!(outcome, PolarizationOutcome::Found(_)) {
            return Err(EngineError::NoPhoton {
                register: Register::Y,
            });
        }
    }
    let roll: f64 = rng.gen();
    let mut acc = 0.0;
    let last = branches.len() - 1;
    for (i, (outcome, prob, collapsed)) in branches.into_iter().enumerate() {
        acc += prob;
        if roll < acc || i == last {
            let bit = match outcome {
                PolarizationOutcome::Found(p) => p.bit(),
                _ => unreachable!(),
            };
            return Ok((bit, collapsed));
        }
    }
    Err(EngineError::UnreachableOutcome("empty readout distribution"))
}

/// Precomputed gates and reference states for one attack variant, so a
/// session does not rebuild operator tables on every round.
#[derive(Debug, Clone)]
pub struct AttackOps {
    /// The variant these operations realize.
    pub variant: AttackVariant,
    outbound: Option<GateSpec>,
    wojcik_return: Option<GateSpec>,
    encode_gate: GateSpec,
    symmetrization: GateSpec,
    improved_inputs: Option<[StateVector; 2]>,
}

impl AttackOps {
    /// Builds the operator set for a variant.
    pub fn new(variant: AttackVariant) -> Result<Self, EngineError> {
        let (outbound, wojcik_return, improved_inputs) = match variant.kind {
            AttackKind::None => (None, None, None),
            AttackKind::Wojcik => {
                let q = build_q();
                let q_inv = q.inverse();
                (Some(q), Some(q_inv), None)
            }
            AttackKind::Improved => {
                let w = build_w();
                let ba = w.apply(&make_initial())?;
                let inputs = [encode(&ba, 0)?, encode(&ba, 1)?];
                (Some(w), None, Some(inputs))
            }
        };
        Ok(AttackOps {
            variant,
            outbound,
            wojcik_return,
            encode_gate: pauli_z(Register::T),
            symmetrization: symmetrization_gate(),
            improved_inputs,
        })
    }

    /// The outbound (sender-to-receiver leg) manipulation.
    pub fn apply_outbound(&self, state: &StateVector) -> Result<StateVector, EngineError> {
        match &self.outbound {
            None => Ok(state.clone()),
            Some(gate) => gate.apply(state),
        }
    }

    /// The phase encoding `Z_t^j`.
    pub fn encode(&self, state: &StateVector, j: u8) -> Result<StateVector, EngineError> {
        match j {
            0 => Ok(state.clone()),
            1 => self.encode_gate.apply(state),
            _ => Err(EngineError::InvalidConfig("message bit must be 0 or 1")),
        }
    }

    /// The return-leg manipulation.
    pub fn apply_return(&self, state: &StateVector) -> Result<StateVector, EngineError> {
        match self.variant.kind {
            AttackKind::None => Ok(state.clone()),
            AttackKind::Wojcik => self
                .wojcik_return
                .as_ref()
                .expect("return gate present")
                .apply(state),
            AttackKind::Improved => {
                let inputs = self.improved_inputs.as_ref().expect("inputs present");
                for (j, input) in inputs.iter().enumerate() {
                    if state.max_deviation(input) < NORM_TOLERANCE {
                        return Ok(post_ab_state(j as u8));
                    }
                }
                Err(EngineError::OffAttackPath)
            }
        }
    }

    /// Applies the symmetrization operator.
    pub fn symmetrize(&self, state: &StateVector) -> Result<StateVector, EngineError> {
        self.symmetrization.apply(state)
    }
}
