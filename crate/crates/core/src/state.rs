//! Exact state-vector engine for one polarization qubit and three optical
//! modes that may be empty.
//!
//! The composite system consists of the home-photon polarization register `h`
//! and three spatial modes `t` (travel), `x` and `y` (ancillas). Each mode is
//! described by its per-polarization photon content, so a mode can be empty,
//! carry a single photon of either polarization, or carry one photon of each.
//! The composite basis therefore has 2 * 4 * 4 * 4 = 128 labels; states are
//! sparse maps from labels to complex amplitudes, and gates are sparse unitary
//! tables over the labels they are declared on.
//!
//! Everything here is an immutable value: gates and states can be shared
//! freely, and randomness enters only through the caller's generator.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::f64::consts::FRAC_1_SQRT_2;
use core::fmt;
use core::fmt::Write as _;

#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;
use rand::Rng;

use crate::error::EngineError;

/// Norm and probability comparisons tolerate this much drift.
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Algebraic identities built from exact dyadic and sqrt(2) constants must
/// hold to this tolerance.
pub const EXACT_TOLERANCE: f64 = 1e-12;
/// Amplitudes below this magnitude are dropped from state supports.
const PRUNE_TOLERANCE: f64 = 1e-15;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// z-basis polarization of a single photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    /// Polarization 0.
    P0,
    /// Polarization 1.
    P1,
}

impl Polarization {
    /// The opposite polarization.
    pub fn flipped(self) -> Self {
        match self {
            Polarization::P0 => Polarization::P1,
            Polarization::P1 => Polarization::P0,
        }
    }

    /// 0 or 1.
    pub fn bit(self) -> u8 {
        match self {
            Polarization::P0 => 0,
            Polarization::P1 => 1,
        }
    }

    /// Inverse of [`Polarization::bit`].
    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Polarization::P0
        } else {
            Polarization::P1
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

/// Photon content of one optical mode.
///
/// Each polarization holds zero or one photon; any operation that would put a
/// second photon of one polarization into a mode is an error, never a silent
/// wrap-around.
///
/// The variant order fixes the serialization order of basis labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModeOccupancy {
    /// Empty mode.
    Vac,
    /// One photon of polarization 0.
    Pol0,
    /// One photon of polarization 1.
    Pol1,
    /// One photon of each polarization.
    Pair,
}

impl ModeOccupancy {
    fn bits(self) -> (bool, bool) {
        match self {
            ModeOccupancy::Vac => (false, false),
            ModeOccupancy::Pol0 => (true, false),
            ModeOccupancy::Pol1 => (false, true),
            ModeOccupancy::Pair => (true, true),
        }
    }

    fn from_bits(n0: bool, n1: bool) -> Self {
        match (n0, n1) {
            (false, false) => ModeOccupancy::Vac,
            (true, false) => ModeOccupancy::Pol0,
            (false, true) => ModeOccupancy::Pol1,
            (true, true) => ModeOccupancy::Pair,
        }
    }

    /// Whether the mode holds a photon of polarization `p`.
    pub fn contains(self, p: Polarization) -> bool {
        let (n0, n1) = self.bits();
        match p {
            Polarization::P0 => n0,
            Polarization::P1 => n1,
        }
    }

    /// Adds a photon of polarization `p`.
    pub fn with_photon(self, p: Polarization) -> Result<Self, EngineError> {
        if self.contains(p) {
            return Err(EngineError::OccupancyOverflow { polarization: p });
        }
        let (n0, n1) = self.bits();
        Ok(match p {
            Polarization::P0 => Self::from_bits(true, n1),
            Polarization::P1 => Self::from_bits(n0, true),
        })
    }

    /// Removes a photon of polarization `p`.
    pub fn without_photon(self, p: Polarization) -> Result<Self, EngineError> {
        if !self.contains(p) {
            return Err(EngineError::OccupancyUnderflow { polarization: p });
        }
        let (n0, n1) = self.bits();
        Ok(match p {
            Polarization::P0 => Self::from_bits(false, n1),
            Polarization::P1 => Self::from_bits(n0, false),
        })
    }

    /// Total photon count in the mode (0, 1, or 2).
    pub fn photon_count(self) -> u8 {
        let (n0, n1) = self.bits();
        n0 as u8 + n1 as u8
    }

    /// The polarization of the mode's photon, when it holds exactly one.
    pub fn single(self) -> Option<Polarization> {
        match self {
            ModeOccupancy::Pol0 => Some(Polarization::P0),
            ModeOccupancy::Pol1 => Some(Polarization::P1),
            _ => None,
        }
    }

    const ALL: [ModeOccupancy; 4] = [
        ModeOccupancy::Vac,
        ModeOccupancy::Pol0,
        ModeOccupancy::Pol1,
        ModeOccupancy::Pair,
    ];
}

impl fmt::Display for ModeOccupancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModeOccupancy::Vac => "vac",
            ModeOccupancy::Pol0 => "pol0",
            ModeOccupancy::Pol1 => "pol1",
            ModeOccupancy::Pair => "pair",
        };
        f.write_str(s)
    }
}

/// One of the three spatial modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpticalMode {
    /// Travel mode: carries the photon Bob sends to Alice.
    T,
    /// First ancilla mode.
    X,
    /// Second ancilla mode.
    Y,
}

impl fmt::Display for OpticalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OpticalMode::T => "t",
            OpticalMode::X => "x",
            OpticalMode::Y => "y",
        };
        f.write_str(s)
    }
}

/// Any measurable register: the home polarization qubit or a spatial mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Register {
    /// Home photon polarization.
    H,
    /// Travel mode.
    T,
    /// First ancilla mode.
    X,
    /// Second ancilla mode.
    Y,
}

impl From<OpticalMode> for Register {
    fn from(mode: OpticalMode) -> Self {
        match mode {
            OpticalMode::T => Register::T,
            OpticalMode::X => Register::X,
            OpticalMode::Y => Register::Y,
        }
    }
}

impl fmt::Display for Register {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Register::H => "h",
            Register::T => "t",
            Register::X => "x",
            Register::Y => "y",
        };
        f.write_str(s)
    }
}

/// One composite basis label `(h, t, x, y)`.
///
/// The derived ordering (home polarization first, then the three modes, with
/// `Vac < Pol0 < Pol1 < Pair`) is the canonical serialization order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisLabel {
    /// Home photon polarization.
    pub h: Polarization,
    /// Travel mode content.
    pub t: ModeOccupancy,
    /// First ancilla content.
    pub x: ModeOccupancy,
    /// Second ancilla content.
    pub y: ModeOccupancy,
}

impl BasisLabel {
    /// Builds a label from its four registers.
    pub fn new(h: Polarization, t: ModeOccupancy, x: ModeOccupancy, y: ModeOccupancy) -> Self {
        BasisLabel { h, t, x, y }
    }

    /// Content of one spatial mode.
    pub fn mode(&self, mode: OpticalMode) -> ModeOccupancy {
        match mode {
            OpticalMode::T => self.t,
            OpticalMode::X => self.x,
            OpticalMode::Y => self.y,
        }
    }

    /// Copy of the label with one mode's content replaced.
    pub fn with_mode(&self, mode: OpticalMode, occ: ModeOccupancy) -> Self {
        let mut out = *self;
        match mode {
            OpticalMode::T => out.t = occ,
            OpticalMode::X => out.x = occ,
            OpticalMode::Y => out.y = occ,
        }
        out
    }

    /// Total photon count over the three spatial modes.
    pub fn total_photons(&self) -> u8 {
        self.t.photon_count() + self.x.photon_count() + self.y.photon_count()
    }

    /// All 128 labels of the composite basis, in canonical order.
    pub fn all() -> Vec<BasisLabel> {
        let mut labels = Vec::with_capacity(128);
        for h in [Polarization::P0, Polarization::P1] {
            for t in ModeOccupancy::ALL {
                for x in ModeOccupancy::ALL {
                    for y in ModeOccupancy::ALL {
                        labels.push(BasisLabel::new(h, t, x, y));
                    }
                }
            }
        }
        labels
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.h, self.t, self.x, self.y)
    }
}

/// A pure state of the composite system: a sparse map from basis labels to
/// complex amplitudes. Absent labels have amplitude zero.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: BTreeMap<BasisLabel, Complex64>,
}

impl StateVector {
    /// Builds a state from explicit amplitudes, checking normalization.
    pub fn from_amplitudes<I>(entries: I) -> Result<Self, EngineError>
    where
        I: IntoIterator<Item = (BasisLabel, Complex64)>,
    {
        let mut amplitudes = BTreeMap::new();
        for (label, amp) in entries {
            if amp.norm_sqr() > PRUNE_TOLERANCE * PRUNE_TOLERANCE {
                *amplitudes.entry(label).or_insert(ZERO) += amp;
            }
        }
        let state = StateVector { amplitudes };
        let norm_sqr = state.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(EngineError::NormViolation { norm_sqr });
        }
        Ok(state)
    }

    /// The basis state `|label>`.
    pub fn unit(label: BasisLabel) -> Self {
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(label, ONE);
        StateVector { amplitudes }
    }

    pub(crate) fn from_map(mut amplitudes: BTreeMap<BasisLabel, Complex64>) -> Self {
        amplitudes.retain(|_, a| a.norm_sqr() > PRUNE_TOLERANCE * PRUNE_TOLERANCE);
        StateVector { amplitudes }
    }

    /// Amplitude of one basis label (zero when absent).
    pub fn amplitude(&self, label: &BasisLabel) -> Complex64 {
        self.amplitudes.get(label).copied().unwrap_or(ZERO)
    }

    /// Iterates over the support in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&BasisLabel, &Complex64)> {
        self.amplitudes.iter()
    }

    /// Number of labels with nonzero amplitude.
    pub fn support_len(&self) -> usize {
        self.amplitudes.len()
    }

    /// Sum of squared amplitude magnitudes.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// Whether the squared norm is 1 within `tol`.
    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// Largest amplitude difference against `other` over the union of the
    /// two supports.
    pub fn max_deviation(&self, other: &StateVector) -> f64 {
        let mut max = 0.0f64;
        for (label, amp) in &self.amplitudes {
            max = max.max((amp - other.amplitude(label)).norm());
        }
        for (label, amp) in &other.amplitudes {
            if !self.amplitudes.contains_key(label) {
                max = max.max(amp.norm());
            }
        }
        max
    }

    /// Rotates the global phase so the largest-magnitude amplitude is real
    /// and positive. Ties pick the first label in canonical order.
    pub fn aligned_phase(&self) -> StateVector {
        let mut leading: Option<Complex64> = None;
        let mut best = 0.0f64;
        for amp in self.amplitudes.values() {
            let n = amp.norm();
            if n > best {
                best = n;
                leading = Some(*amp);
            }
        }
        match leading {
            None => self.clone(),
            Some(a) => {
                let factor = a.conj() / a.norm();
                let amplitudes = self
                    .amplitudes
                    .iter()
                    .map(|(label, amp)| (*label, amp * factor))
                    .collect();
                StateVector { amplitudes }
            }
        }
    }

    /// Largest amplitude difference after aligning both global phases.
    pub fn max_deviation_up_to_phase(&self, other: &StateVector) -> f64 {
        self.aligned_phase().max_deviation(&other.aligned_phase())
    }

    /// Debug dump: one `h,t,x,y,re,im` line per support label, in canonical
    /// order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (label, amp) in &self.amplitudes {
            let _ = writeln!(out, "{},{},{}", label, amp.re, amp.im);
        }
        out
    }
}

/// The entangled-pair state with the ancilla photon in place: the travel and
/// home polarizations anticorrelated in superposition, `x` empty, one
/// polarization-0 photon in `y`.
pub fn make_initial() -> StateVector {
    let amp = Complex64::new(FRAC_1_SQRT_2, 0.0);
    StateVector::from_map(BTreeMap::from([
        (
            BasisLabel::new(
                Polarization::P0,
                ModeOccupancy::Pol1,
                ModeOccupancy::Vac,
                ModeOccupancy::Pol0,
            ),
            amp,
        ),
        (
            BasisLabel::new(
                Polarization::P1,
                ModeOccupancy::Pol0,
                ModeOccupancy::Vac,
                ModeOccupancy::Pol0,
            ),
            amp,
        ),
    ]))
}

/// The bare entangled pair with both ancilla modes empty, used for rounds in
/// which no eavesdropper is present.
pub fn make_pair() -> StateVector {
    let amp = Complex64::new(FRAC_1_SQRT_2, 0.0);
    StateVector::from_map(BTreeMap::from([
        (
            BasisLabel::new(
                Polarization::P0,
                ModeOccupancy::Pol1,
                ModeOccupancy::Vac,
                ModeOccupancy::Vac,
            ),
            amp,
        ),
        (
            BasisLabel::new(
                Polarization::P1,
                ModeOccupancy::Pol0,
                ModeOccupancy::Vac,
                ModeOccupancy::Vac,
            ),
            amp,
        ),
    ]))
}

/// A unitary given by its amplitude action on each basis label of its
/// declared domain.
///
/// Labels absent from the table are outside the domain; applying the gate to
/// a state supported there is an error. Composition and inversion work on the
/// tables directly.
#[derive(Debug, Clone)]
pub struct GateSpec {
    name: String,
    action: BTreeMap<BasisLabel, Vec<(BasisLabel, Complex64)>>,
}

impl GateSpec {
    /// Builds a gate from a per-label rule over the full 128-label basis.
    /// Returning `None` leaves the label outside the declared domain.
    pub(crate) fn from_rule<F>(name: &str, rule: F) -> Self
    where
        F: Fn(&BasisLabel) -> Option<Vec<(BasisLabel, Complex64)>>,
    {
        let mut action = BTreeMap::new();
        for label in BasisLabel::all() {
            if let Some(outputs) = rule(&label) {
                action.insert(label, outputs);
            }
        }
        GateSpec {
            name: String::from(name),
            action,
        }
    }

    /// Gate name, for diagnostics.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Returns a copy with a different name.
    pub fn with_name(mut self, name: &str) -> Self {
        self.name = String::from(name);
        self
    }

    /// Whether `label` is inside the declared domain.
    pub fn domain_contains(&self, label: &BasisLabel) -> bool {
        self.action.contains_key(label)
    }

    /// Labels of the declared domain, in canonical order.
    pub fn domain(&self) -> impl Iterator<Item = &BasisLabel> {
        self.action.keys()
    }

    /// Applies the gate to a state.
    ///
    /// Fails if any support label lies outside the declared domain, or if a
    /// normalized input comes out with a broken norm.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector, EngineError> {
        let input_normalized = state.is_normalized(NORM_TOLERANCE);
        let mut out: BTreeMap<BasisLabel, Complex64> = BTreeMap::new();
        for (label, amp) in state.iter() {
            let targets = self
                .action
                .get(label)
                .ok_or_else(|| EngineError::DomainViolation {
                    gate: self.name.clone(),
                    label: *label,
                })?;
            for (target, coeff) in targets {
                *out.entry(*target).or_insert(ZERO) += amp * coeff;
            }
        }
        let result = StateVector::from_map(out);
        if input_normalized && !result.is_normalized(NORM_TOLERANCE) {
            return Err(EngineError::NormViolation {
                norm_sqr: result.norm_sqr(),
            });
        }
        Ok(result)
    }

    /// The composition that applies `self` first and `next` second.
    ///
    /// The composed domain keeps only labels whose image under `self` stays
    /// inside the domain of `next`.
    pub fn then(&self, next: &GateSpec) -> GateSpec {
        let mut action = BTreeMap::new();
        'labels: for (label, outputs) in &self.action {
            let mut combined: BTreeMap<BasisLabel, Complex64> = BTreeMap::new();
            for (mid, a) in outputs {
                let Some(next_outputs) = next.action.get(mid) else {
                    continue 'labels;
                };
                for (target, b) in next_outputs {
                    *combined.entry(*target).or_insert(ZERO) += a * b;
                }
            }
            combined.retain(|_, c| c.norm_sqr() > PRUNE_TOLERANCE * PRUNE_TOLERANCE);
            action.insert(*label, combined.into_iter().collect());
        }
        GateSpec {
            name: format!("{}·{}", next.name, self.name),
            action,
        }
    }

    /// The inverse gate: the conjugate transpose of the action table. Its
    /// domain is the image of `self`.
    pub fn inverse(&self) -> GateSpec {
        let mut action: BTreeMap<BasisLabel, Vec<(BasisLabel, Complex64)>> = BTreeMap::new();
        for (label, outputs) in &self.action {
            for (target, coeff) in outputs {
                action.entry(*target).or_default().push((*label, coeff.conj()));
            }
        }
        GateSpec {
            name: format!("{}^-1", self.name),
            action,
        }
    }

    /// Largest deviation of the action's columns from orthonormality. Zero
    /// (up to rounding) exactly when the gate is unitary on its domain.
    pub fn unitarity_defect(&self) -> f64 {
        let columns: Vec<&Vec<(BasisLabel, Complex64)>> = self.action.values().collect();
        let mut defect = 0.0f64;
        for (i, col_i) in columns.iter().enumerate() {
            for (j, col_j) in columns.iter().enumerate().skip(i) {
                let mut inner = ZERO;
                for (label_i, a) in col_i.iter() {
                    for (label_j, b) in col_j.iter() {
                        if label_i == label_j {
                            inner += a.conj() * b;
                        }
                    }
                }
                let expected = if i == j { ONE } else { ZERO };
                defect = defect.max((inner - expected).norm());
            }
        }
        defect
    }
}

/// The identity on all 128 labels.
pub fn identity() -> GateSpec {
    GateSpec::from_rule("I", |label| Some(vec![(*label, ONE)]))
}

/// Hadamard on the polarization of one spatial mode.
///
/// Acts on a single photon's polarization; an empty mode is untouched (it
/// models a waveplate acting on a photon if present), and a doubly occupied
/// mode is outside the declared domain.
pub fn hadamard(mode: OpticalMode) -> GateSpec {
    let amp = Complex64::new(FRAC_1_SQRT_2, 0.0);
    GateSpec::from_rule(&format!("H_{mode}"), move |label| {
        match label.mode(mode) {
            ModeOccupancy::Vac => Some(vec![(*label, ONE)]),
            ModeOccupancy::Pol0 => Some(vec![
                (label.with_mode(mode, ModeOccupancy::Pol0), amp),
                (label.with_mode(mode, ModeOccupancy::Pol1), amp),
            ]),
            ModeOccupancy::Pol1 => Some(vec![
                (label.with_mode(mode, ModeOccupancy::Pol0), amp),
                (label.with_mode(mode, ModeOccupancy::Pol1), -amp),
            ]),
            ModeOccupancy::Pair => None,
        }
    })
}

/// Hadamard on the home polarization qubit, used to realize x-basis readouts
/// of the home photon.
pub(crate) fn hadamard_home() -> GateSpec {
    let amp = Complex64::new(FRAC_1_SQRT_2, 0.0);
    GateSpec::from_rule("H_h", move |label| {
        let mut flipped = *label;
        flipped.h = label.h.flipped();
        let sign = if label.h == Polarization::P1 { -amp } else { amp };
        let (l0, l1) = match label.h {
            Polarization::P0 => (*label, flipped),
            Polarization::P1 => (flipped, *label),
        };
        Some(vec![(l0, amp), (l1, sign)])
    })
}

/// Exchanges the full photon content of two spatial modes.
pub fn swap(a: OpticalMode, b: OpticalMode) -> GateSpec {
    assert!(a != b, "swap needs two distinct modes");
    GateSpec::from_rule(&format!("SWAP_{a}{b}"), move |label| {
        let out = label
            .with_mode(a, label.mode(b))
            .with_mode(b, label.mode(a));
        Some(vec![(out, ONE)])
    })
}

/// Reflection rule of a controlled polarizing beam splitter candidate: the
/// polarization exchanged between the two ports, as a function of the control
/// photon's polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CpbsConvention {
    /// `reflect_for[p]` is the reflected polarization when the control photon
    /// has polarization `p`.
    pub reflect_for: [Polarization; 2],
}

impl fmt::Display for CpbsConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "reflect {} on control 0, {} on control 1",
            self.reflect_for[0], self.reflect_for[1]
        )
    }
}

/// The four candidate reflection rules a polarizing beam splitter controlled
/// by one polarization can follow.
pub const CPBS_CONVENTIONS: [CpbsConvention; 4] = [
    CpbsConvention {
        reflect_for: [Polarization::P0, Polarization::P0],
    },
    CpbsConvention {
        reflect_for: [Polarization::P0, Polarization::P1],
    },
    CpbsConvention {
        reflect_for: [Polarization::P1, Polarization::P0],
    },
    CpbsConvention {
        reflect_for: [Polarization::P1, Polarization::P1],
    },
];

/// Index into [`CPBS_CONVENTIONS`] of the convention the protocol gates use:
/// the reflected polarization equals the control polarization. The
/// verification suite re-derives this choice by brute force.
pub const CPBS_CONVENTION_INDEX: usize = 1;

/// A controlled polarizing beam splitter with an explicit reflection rule.
///
/// The control is the polarization of the photon in `t`; the ports are `x`
/// and `y`. Photons of the reflected polarization change port, photons of the
/// transmitted polarization stay put. An empty control mode leaves the ports
/// untouched; a doubly occupied control is outside the declared domain.
pub fn cpbs_with_convention(convention: CpbsConvention) -> GateSpec {
    let name = format!(
        "CPBS[{}{}]",
        convention.reflect_for[0], convention.reflect_for[1]
    );
    GateSpec::from_rule(&name, move |label| match label.t {
        ModeOccupancy::Vac => Some(vec![(*label, ONE)]),
        ModeOccupancy::Pair => None,
        occ => {
            let control = occ.single().expect("single photon");
            let r = convention.reflect_for[control.bit() as usize];
            let x_has = label.x.contains(r);
            let y_has = label.y.contains(r);
            if x_has == y_has {
                return Some(vec![(*label, ONE)]);
            }
            // Move the reflected-polarization photon to the other port.
            let (new_x, new_y) = if x_has {
                (label.x.without_photon(r), label.y.with_photon(r))
            } else {
                (label.x.with_photon(r), label.y.without_photon(r))
            };
            match (new_x, new_y) {
                (Ok(nx), Ok(ny)) => {
                    let out = label
                        .with_mode(OpticalMode::X, nx)
                        .with_mode(OpticalMode::Y, ny);
                    Some(vec![(out, ONE)])
                }
                // Exchanging a single photon between two ports cannot
                // overflow; excluded labels stay outside the domain.
                _ => None,
            }
        }
    })
}

/// The controlled polarizing beam splitter used by the attack operators.
pub fn cpbs() -> GateSpec {
    cpbs_with_convention(CPBS_CONVENTIONS[CPBS_CONVENTION_INDEX]).with_name("CPBS_txy")
}

/// Phase flip: `-1` on every photon of polarization 1 in the target. An
/// empty mode is untouched; a doubly occupied mode carries exactly one
/// polarization-1 photon and picks up the phase.
pub fn pauli_z(target: Register) -> GateSpec {
    GateSpec::from_rule(&format!("Z_{target}"), move |label| {
        let flip = match target {
            Register::H => label.h == Polarization::P1,
            Register::T => label.t.contains(Polarization::P1),
            Register::X => label.x.contains(Polarization::P1),
            Register::Y => label.y.contains(Polarization::P1),
        };
        let coeff = if flip { -ONE } else { ONE };
        Some(vec![(*label, coeff)])
    })
}

/// Polarization negation: swaps the two polarizations of the target. Empty
/// and doubly occupied modes are fixed points.
pub fn pauli_x(target: Register) -> GateSpec {
    GateSpec::from_rule(&format!("X_{target}"), move |label| {
        let out = match target {
            Register::H => {
                let mut l = *label;
                l.h = label.h.flipped();
                l
            }
            Register::T | Register::X | Register::Y => {
                let mode = match target {
                    Register::T => OpticalMode::T,
                    Register::X => OpticalMode::X,
                    _ => OpticalMode::Y,
                };
                let (n0, n1) = label.mode(mode).bits();
                label.with_mode(mode, ModeOccupancy::from_bits(n1, n0))
            }
        };
        Some(vec![(out, ONE)])
    })
}

/// Controlled negation between two spatial modes: when the control holds a
/// polarization-1 photon the target polarization is flipped; a control with
/// vacuum or a polarization-0 photon leaves the target alone.
///
/// An active control with an empty or doubly occupied target, and a doubly
/// occupied control, are outside the declared domain.
pub fn cnot(control: OpticalMode, target: OpticalMode) -> GateSpec {
    assert!(control != target, "cnot needs two distinct modes");
    GateSpec::from_rule(&format!("CNOT_{control}{target}"), move |label| {
        match label.mode(control) {
            ModeOccupancy::Pair => None,
            ModeOccupancy::Vac | ModeOccupancy::Pol0 => Some(vec![(*label, ONE)]),
            ModeOccupancy::Pol1 => match label.mode(target) {
                ModeOccupancy::Pol0 => {
                    Some(vec![(label.with_mode(target, ModeOccupancy::Pol1), ONE)])
                }
                ModeOccupancy::Pol1 => {
                    Some(vec![(label.with_mode(target, ModeOccupancy::Pol0), ONE)])
                }
                ModeOccupancy::Vac | ModeOccupancy::Pair => None,
            },
        }
    })
}

/// Measurement basis for polarization readouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MeasurementBasis {
    /// Computational (z) basis.
    Z,
    /// Diagonal (x) basis; outcomes 0 and 1 stand for + and -.
    X,
}

impl fmt::Display for MeasurementBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasurementBasis::Z => "z",
            MeasurementBasis::X => "x",
        })
    }
}

/// Result class of a polarization readout on a register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PolarizationOutcome {
    /// No photon in the mode.
    Vacuum,
    /// A single photon with the given (basis-relative) polarization.
    Found(Polarization),
    /// Two photons in the mode.
    TwoPhoton,
}

/// Result of a joint Bell-basis readout of the home and travel photons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BellOutcome {
    /// The symmetric anticorrelated Bell state; decodes message bit 0.
    PsiPlus,
    /// The antisymmetric anticorrelated Bell state; decodes message bit 1.
    PsiMinus,
    /// Correlated Bell state with positive relative phase.
    PhiPlus,
    /// Correlated Bell state with negative relative phase.
    PhiMinus,
    /// The travel mode held no single photon; the round is lost.
    Loss,
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellOutcome::PsiPlus => "psi+",
            BellOutcome::PsiMinus => "psi-",
            BellOutcome::PhiPlus => "phi+",
            BellOutcome::PhiMinus => "phi-",
            BellOutcome::Loss => "loss",
        })
    }
}

/// What a measurement acted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureTarget {
    /// A single register.
    Register(Register),
    /// The home and travel photons jointly.
    HomeTravelPair,
}

/// Basis of a recorded measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeBasis {
    /// Polarization readout in z or x.
    Polarization(MeasurementBasis),
    /// Joint Bell-basis readout.
    Bell,
}

/// Value of a recorded measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeValue {
    /// Polarization readout result.
    Polarization(PolarizationOutcome),
    /// Bell readout result.
    Bell(BellOutcome),
}

/// One sampled measurement: target, basis, outcome, and the Born probability
/// the outcome had.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementOutcome {
    /// What was measured.
    pub target: MeasureTarget,
    /// In which basis.
    pub basis: OutcomeBasis,
    /// The sampled outcome.
    pub value: OutcomeValue,
    /// Born probability of the outcome at sampling time.
    pub probability: f64,
}

fn rotation_for(target: Register) -> GateSpec {
    match target {
        Register::H => hadamard_home(),
        Register::T => hadamard(OpticalMode::T),
        Register::X => hadamard(OpticalMode::X),
        Register::Y => hadamard(OpticalMode::Y),
    }
}

fn outcome_class(label: &BasisLabel, target: Register) -> PolarizationOutcome {
    match target {
        Register::H => PolarizationOutcome::Found(label.h),
        Register::T | Register::X | Register::Y => {
            let mode = match target {
                Register::T => OpticalMode::T,
                Register::X => OpticalMode::X,
                _ => OpticalMode::Y,
            };
            match label.mode(mode) {
                ModeOccupancy::Vac => PolarizationOutcome::Vacuum,
                ModeOccupancy::Pol0 => PolarizationOutcome::Found(Polarization::P0),
                ModeOccupancy::Pol1 => PolarizationOutcome::Found(Polarization::P1),
                ModeOccupancy::Pair => PolarizationOutcome::TwoPhoton,
            }
        }
    }
}

/// All polarization-readout branches of a register: outcome, Born
/// probability, and the collapsed renormalized state. Zero-probability
/// branches are omitted.
pub fn polarization_projections(
    state: &StateVector,
    target: Register,
    basis: MeasurementBasis,
) -> Result<Vec<(PolarizationOutcome, f64, StateVector)>, EngineError> {
    let rotated = match basis {
        MeasurementBasis::Z => state.clone(),
        MeasurementBasis::X => rotation_for(target).apply(state)?,
    };
    let outcomes = [
        PolarizationOutcome::Vacuum,
        PolarizationOutcome::Found(Polarization::P0),
        PolarizationOutcome::Found(Polarization::P1),
        PolarizationOutcome::TwoPhoton,
    ];
    let mut branches = Vec::new();
    for outcome in outcomes {
        let mut kept: BTreeMap<BasisLabel, Complex64> = BTreeMap::new();
        let mut prob = 0.0;
        for (label, amp) in rotated.iter() {
            if outcome_class(label, target) == outcome {
                prob += amp.norm_sqr();
                kept.insert(*label, *amp);
            }
        }
        if prob <= PRUNE_TOLERANCE {
            continue;
        }
        let scale = Complex64::new(1.0 / prob.sqrt(), 0.0);
        for amp in kept.values_mut() {
            *amp *= scale;
        }
        let mut collapsed = StateVector::from_map(kept);
        if basis == MeasurementBasis::X {
            collapsed = rotation_for(target).apply(&collapsed)?;
        }
        branches.push((outcome, prob, collapsed));
    }
    Ok(branches)
}

/// The full outcome distribution of a polarization readout, without sampling.
pub fn polarization_distribution(
    state: &StateVector,
    target: Register,
    basis: MeasurementBasis,
) -> Result<Vec<(PolarizationOutcome, f64)>, EngineError> {
    Ok(polarization_projections(state, target, basis)?
        .into_iter()
        .map(|(outcome, prob, _)| (outcome, prob))
        .collect())
}

/// Samples a polarization readout of one register and collapses the state.
pub fn measure_polarization<R: Rng + ?Sized>(
    state: &StateVector,
    target: Register,
    basis: MeasurementBasis,
    rng: &mut R,
) -> Result<(MeasurementOutcome, StateVector), EngineError> {
    let branches = polarization_projections(state, target, basis)?;
    let (outcome, prob, collapsed) = sample_branch(branches, rng);
    Ok((
        MeasurementOutcome {
            target: MeasureTarget::Register(target),
            basis: OutcomeBasis::Polarization(basis),
            value: OutcomeValue::Polarization(outcome),
            probability: prob,
        },
        collapsed,
    ))
}

/// All Bell-readout branches of the home/travel pair. Components where the
/// travel mode holds no single photon collapse to the `Loss` branch.
pub fn bell_projections(state: &StateVector) -> Vec<(BellOutcome, f64, StateVector)> {
    let half = Complex64::new(FRAC_1_SQRT_2, 0.0);
    // Bell overlap amplitudes per ancilla configuration.
    let mut coefs: BTreeMap<(ModeOccupancy, ModeOccupancy), [Complex64; 4]> = BTreeMap::new();
    let mut loss: BTreeMap<BasisLabel, Complex64> = BTreeMap::new();
    for (label, amp) in state.iter() {
        match label.t.single() {
            None => {
                loss.insert(*label, *amp);
            }
            Some(t_pol) => {
                let entry = coefs.entry((label.x, label.y)).or_insert([ZERO; 4]);
                let a = amp * half;
                match (label.h, t_pol) {
                    (Polarization::P0, Polarization::P1) => {
                        entry[0] += a;
                        entry[1] += a;
                    }
                    (Polarization::P1, Polarization::P0) => {
                        entry[0] += a;
                        entry[1] -= a;
                    }
                    (Polarization::P0, Polarization::P0) => {
                        entry[2] += a;
                        entry[3] += a;
                    }
                    (Polarization::P1, Polarization::P1) => {
                        entry[2] += a;
                        entry[3] -= a;
                    }
                }
            }
        }
    }

    let kinds = [
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
    ];
    let mut branches = Vec::new();
    for (idx, kind) in kinds.into_iter().enumerate() {
        let prob: f64 = coefs.values().map(|c| c[idx].norm_sqr()).sum();
        if prob <= PRUNE_TOLERANCE {
            continue;
        }
        // The pair collapses onto the Bell state; the ancillas keep their
        // conditional amplitudes.
        let (ht0, ht1, sign) = match kind {
            BellOutcome::PsiPlus => (
                (Polarization::P0, ModeOccupancy::Pol1),
                (Polarization::P1, ModeOccupancy::Pol0),
                ONE,
            ),
            BellOutcome::PsiMinus => (
                (Polarization::P0, ModeOccupancy::Pol1),
                (Polarization::P1, ModeOccupancy::Pol0),
                -ONE,
            ),
            BellOutcome::PhiPlus => (
                (Polarization::P0, ModeOccupancy::Pol0),
                (Polarization::P1, ModeOccupancy::Pol1),
                ONE,
            ),
            BellOutcome::PhiMinus => (
                (Polarization::P0, ModeOccupancy::Pol0),
                (Polarization::P1, ModeOccupancy::Pol1),
                -ONE,
            ),
            BellOutcome::Loss => unreachable!(),
        };
        let scale = Complex64::new(1.0 / prob.sqrt(), 0.0);
        let mut map: BTreeMap<BasisLabel, Complex64> = BTreeMap::new();
        for ((x, y), c) in &coefs {
            let c = c[idx];
            if c.norm_sqr() <= PRUNE_TOLERANCE * PRUNE_TOLERANCE {
                continue;
            }
            map.insert(BasisLabel::new(ht0.0, ht0.1, *x, *y), c * half * scale);
            map.insert(
                BasisLabel::new(ht1.0, ht1.1, *x, *y),
                c * half * sign * scale,
            );
        }
        branches.push((kind, prob, StateVector::from_map(map)));
    }

    let loss_prob: f64 = loss.values().map(|a| a.norm_sqr()).sum();
    if loss_prob > PRUNE_TOLERANCE {
        let scale = Complex64::new(1.0 / loss_prob.sqrt(), 0.0);
        for amp in loss.values_mut() {
            *amp *= scale;
        }
        branches.push((BellOutcome::Loss, loss_prob, StateVector::from_map(loss)));
    }
    branches
}

/// The full Bell-readout outcome distribution, without sampling.
pub fn bell_distribution(state: &StateVector) -> Vec<(BellOutcome, f64)> {
    bell_projections(state)
        .into_iter()
        .map(|(outcome, prob, _)| (outcome, prob))
        .collect()
}

/// Samples a joint Bell readout of the home and travel photons.
pub fn measure_bell<R: Rng + ?Sized>(
    state: &StateVector,
    rng: &mut R,
) -> Result<(MeasurementOutcome, StateVector), EngineError> {
    let branches = bell_projections(state);
    if branches.is_empty() {
        return Err(EngineError::UnreachableOutcome("empty Bell distribution"));
    }
    let (outcome, prob, collapsed) = sample_branch(branches, rng);
    Ok((
        MeasurementOutcome {
            target: MeasureTarget::HomeTravelPair,
            basis: OutcomeBasis::Bell,
            value: OutcomeValue::Bell(outcome),
            probability: prob,
        },
        collapsed,
    ))
}

/// Born probabilities of finding 0, 1, or 2 photons in one spatial mode.
pub fn occupancy_distribution(state: &StateVector, mode: OpticalMode) -> [f64; 3] {
    let mut dist = [0.0f64; 3];
    for (label, amp) in state.iter() {
        dist[label.mode(mode).photon_count() as usize] += amp.norm_sqr();
    }
    dist
}

fn sample_branch<T, R: Rng + ?Sized>(branches: Vec<(T, f64, StateVector)>, rng: &mut R) -> (T, f64, StateVector) {
    debug_assert!(!branches.is_empty());
    let roll: f64 = rng.gen();
    let mut acc = 0.0;
    let last = branches.len() - 1;
    let mut iter = branches.into_iter();
    for _ in 0..last {
        let branch = iter.next().expect("branch");
        acc += branch.1;
        if roll < acc {
            return branch;
        }
    }
    iter.next().expect("branch")
}
