//! Exact, sampling-free analysis of the protocol under each attack.
//!
//! All quantities are derived by walking the attack path through the state
//! engine and enumerating measurement branches with their Born weights:
//! the joint distribution of the message bit `j`, the eavesdropper's readout
//! `k`, and the decode result `m`; the pairwise mutual informations; the bit
//! error rate; the eavesdropping-induced loss; control-mode detection
//! probabilities; and the loss-masking limit on the attackable fraction as a
//! function of the channel efficiency.
//!
//! Logarithms are base 2 throughout, with `0 log 0 = 0`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::attack::{AttackKind, AttackOps, AttackVariant};
use crate::error::EngineError;
use crate::protocol::SessionStats;
use crate::state::{
    bell_projections, hadamard, make_initial, make_pair, polarization_projections, BellOutcome,
    GateSpec, MeasurementBasis, OpticalMode, PolarizationOutcome, Register, StateVector,
};

const PROB_FLOOR: f64 = 1e-15;

/// One cell key of the joint table: the message bit, the eavesdropper's
/// readout (absent without an eavesdropper), and the decode result.
pub type JointKey = (u8, Option<u8>, u8);
type JointTable = BTreeMap<JointKey, f64>;

/// Joint probability table over `(j, k, m)`.
///
/// `k` is absent when no eavesdropper is present. For symmetrized attacks the
/// table additionally keeps the two coin-conditional distributions, because
/// the eavesdropper knows when the symmetrization was applied and her
/// information accounting conditions on it.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    entries: JointTable,
    coin_conditionals: Option<[JointTable; 2]>,
}

impl JointDistribution {
    fn new(entries: JointTable) -> Self {
        JointDistribution {
            entries,
            coin_conditionals: None,
        }
    }

    /// Probability of one cell.
    pub fn probability(&self, j: u8, k: Option<u8>, m: u8) -> f64 {
        self.entries.get(&(j, k, m)).copied().unwrap_or(0.0)
    }

    /// Iterates over nonzero cells in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&JointKey, &f64)> {
        self.entries.iter()
    }

    /// Whether the table carries an eavesdropper readout variable.
    pub fn has_eavesdropper(&self) -> bool {
        self.entries.keys().any(|(_, k, _)| k.is_some())
    }

    /// Sum of all cells.
    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Convex mixture of two tables: `weight` of `self`, the rest of
    /// `other`. Used to model sessions in which only a fraction of rounds is
    /// attacked.
    pub fn mix(&self, other: &JointDistribution, weight: f64) -> JointDistribution {
        let mut entries = BTreeMap::new();
        for (key, p) in &self.entries {
            *entries.entry(*key).or_insert(0.0) += weight * p;
        }
        for (key, p) in &other.entries {
            *entries.entry(*key).or_insert(0.0) += (1.0 - weight) * p;
        }
        JointDistribution::new(entries)
    }

    /// Normalized table from empirical `(j, k, m)` counts. `None` when the
    /// session recorded none.
    pub fn from_counts(stats: &SessionStats) -> Option<JointDistribution> {
        let total: u64 = stats.jkm_counts.values().sum();
        if total == 0 {
            return None;
        }
        let entries = stats
            .jkm_counts
            .iter()
            .map(|(&(j, k, m), &count)| ((j, Some(k), m), count as f64 / total as f64))
            .collect();
        Some(JointDistribution::new(entries))
    }
}

/// Total-variation distance between two joint tables.
pub fn total_variation(a: &JointDistribution, b: &JointDistribution) -> f64 {
    let mut keys: Vec<JointKey> = a.entries.keys().copied().collect();
    for key in b.entries.keys() {
        if !a.entries.contains_key(key) {
            keys.push(*key);
        }
    }
    let sum: f64 = keys
        .into_iter()
        .map(|(j, k, m)| (a.probability(j, k, m) - b.probability(j, k, m)).abs())
        .sum();
    0.5 * sum
}

/// Which pair of parties a mutual information refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfoPair {
    /// Sender and eavesdropper: `I(J; K)`.
    AliceEve,
    /// Sender and receiver: `I(J; M)`.
    AliceBob,
    /// Receiver and eavesdropper: `I(M; K)`.
    BobEve,
}

/// Exact joint distribution of `(j, k, m)` for a variant, walking every
/// measurement branch with its Born weight; nothing is sampled. Message bits
/// are equiprobable, and the symmetrization coin (when active) is fair.
pub fn exact_joint(variant: AttackVariant) -> Result<JointDistribution, EngineError> {
    let ops = AttackOps::new(variant)?;
    if variant.kind == AttackKind::None {
        let mut entries = BTreeMap::new();
        let pair = make_pair();
        for j in [0u8, 1u8] {
            let encoded = ops.encode(&pair, j)?;
            for (outcome, p, _) in bell_projections(&encoded) {
                let m = decode_bit(outcome)?;
                *entries.entry((j, None, m)).or_insert(0.0) += 0.5 * p;
            }
        }
        return Ok(JointDistribution::new(entries));
    }

    let outbound = ops.apply_outbound(&make_initial())?;
    let coins: &[(bool, f64)] = if variant.symmetrize {
        &[(false, 0.5), (true, 0.5)]
    } else {
        &[(false, 1.0)]
    };
    let mut entries: JointTable = BTreeMap::new();
    let mut conditionals: [JointTable; 2] = [BTreeMap::new(), BTreeMap::new()];
    for j in [0u8, 1u8] {
        let encoded = ops.encode(&outbound, j)?;
        let returned = ops.apply_return(&encoded)?;
        for &(coin, coin_weight) in coins {
            let state = if coin {
                ops.symmetrize(&returned)?
            } else {
                returned.clone()
            };
            for (readout, p_k, collapsed) in
                polarization_projections(&state, Register::Y, MeasurementBasis::Z)?
            {
                let k = match readout {
                    PolarizationOutcome::Found(p) => p.bit(),
                    _ => {
                        return Err(EngineError::NoPhoton {
                            register: Register::Y,
                        })
                    }
                };
                for (outcome, p_m, _) in bell_projections(&collapsed) {
                    let m = decode_bit(outcome)?;
                    let weight = 0.5 * p_k * p_m;
                    if weight <= PROB_FLOOR {
                        continue;
                    }
                    *entries.entry((j, Some(k), m)).or_insert(0.0) += coin_weight * weight;
                    *conditionals[usize::from(coin)]
                        .entry((j, Some(k), m))
                        .or_insert(0.0) += weight;
                }
            }
        }
    }
    let mut joint = JointDistribution::new(entries);
    if variant.symmetrize {
        joint.coin_conditionals = Some(conditionals);
    }
    Ok(joint)
}

fn decode_bit(outcome: BellOutcome) -> Result<u8, EngineError> {
    match outcome {
        BellOutcome::PsiPlus => Ok(0),
        BellOutcome::PsiMinus => Ok(1),
        _ => Err(EngineError::UnreachableOutcome(
            "non-decodable Bell outcome on an exact path",
        )),
    }
}

/// Shannon mutual information (bits) of one party pair.
///
/// For symmetrized variants the sender/eavesdropper value is the average of
/// the coin-conditional informations (the eavesdropper knows the coin); the
/// other pairs marginalize over it. Degenerate marginals give zero.
pub fn mutual_information(joint: &JointDistribution, pair: InfoPair) -> f64 {
    if pair == InfoPair::AliceEve {
        if let Some(conditionals) = &joint.coin_conditionals {
            return conditionals
                .iter()
                .map(|table| table_mutual_information(table, pair))
                .sum::<f64>()
                / 2.0;
        }
    }
    table_mutual_information(&joint.entries, pair)
}

fn table_mutual_information(table: &JointTable, pair: InfoPair) -> f64 {
    // Project each cell onto the selected pair of variables. The absent
    // eavesdropper readout acts as a single degenerate value.
    let mut pairs: BTreeMap<(i8, i8), f64> = BTreeMap::new();
    for (&(j, k, m), &p) in table {
        if p <= PROB_FLOOR {
            continue;
        }
        let k_val = k.map(|b| b as i8).unwrap_or(-1);
        let key = match pair {
            InfoPair::AliceEve => (j as i8, k_val),
            InfoPair::AliceBob => (j as i8, m as i8),
            InfoPair::BobEve => (m as i8, k_val),
        };
        *pairs.entry(key).or_insert(0.0) += p;
    }
    let total: f64 = pairs.values().sum();
    if total <= PROB_FLOOR {
        return 0.0;
    }
    let mut left: BTreeMap<i8, f64> = BTreeMap::new();
    let mut right: BTreeMap<i8, f64> = BTreeMap::new();
    for (&(a, b), &p) in &pairs {
        *left.entry(a).or_insert(0.0) += p / total;
        *right.entry(b).or_insert(0.0) += p / total;
    }
    let mut info = 0.0;
    for (&(a, b), &p) in &pairs {
        let p = p / total;
        if p <= PROB_FLOOR {
            continue;
        }
        info += p * (p / (left[&a] * right[&b])).log2();
    }
    info.max(0.0)
}

/// Probability that the decode differs from the encoded bit.
pub fn qber(joint: &JointDistribution) -> f64 {
    joint
        .iter()
        .filter(|((j, _, m), _)| j != m)
        .fold(0.0, |acc, (_, p)| acc + p)
}

/// Exact probability that the sender's control readout finds vacuum in the
/// travel mode after the outbound attack over an otherwise ideal link.
pub fn induced_loss(kind: AttackKind) -> Result<f64, EngineError> {
    if kind == AttackKind::None {
        return Ok(0.0);
    }
    let ops = AttackOps::new(AttackVariant::new(kind, false))?;
    let outbound = ops.apply_outbound(&make_initial())?;
    Ok(crate::state::occupancy_distribution(&outbound, OpticalMode::T)[0])
}

/// Exact control-mode detection probability for an attack, averaging over
/// the basis choice when two-basis control is active. Vacuum readouts count
/// as loss, not detection.
pub fn detection_probability(kind: AttackKind, two_basis: bool) -> Result<f64, EngineError> {
    let state = match kind {
        AttackKind::None => make_pair(),
        _ => {
            let ops = AttackOps::new(AttackVariant::new(kind, false))?;
            ops.apply_outbound(&make_initial())?
        }
    };
    let det_z = basis_detection(&state, MeasurementBasis::Z)?;
    if !two_basis {
        return Ok(det_z);
    }
    let det_x = basis_detection(&state, MeasurementBasis::X)?;
    Ok(0.5 * (det_z + det_x))
}

fn basis_detection(state: &StateVector, basis: MeasurementBasis) -> Result<f64, EngineError> {
    let rotated = match basis {
        MeasurementBasis::Z => state.clone(),
        MeasurementBasis::X => {
            let rotate: GateSpec = hadamard(OpticalMode::T);
            let rotated = rotate.apply(state)?;
            crate::state::hadamard_home().apply(&rotated)?
        }
    };
    let mut prob = 0.0;
    for (label, amp) in rotated.iter() {
        if let Some(travel) = label.t.single() {
            let exposed = match basis {
                MeasurementBasis::Z => label.h == travel,
                MeasurementBasis::X => label.h != travel,
            };
            if exposed {
                prob += amp.norm_sqr();
            }
        }
    }
    Ok(prob)
}

/// Largest fraction of rounds the eavesdropper can attack while the
/// photon-found rate the sender observes can still be steered onto `eta` by
/// artificial discard. `survival` is the attack's intrinsic survival
/// probability; unattacked rounds ride the eavesdropper's ideal links.
pub fn attack_fraction_limit(survival: f64, eta: f64) -> f64 {
    if survival >= eta {
        return 1.0;
    }
    ((1.0 - eta) / (1.0 - survival)).min(1.0)
}

/// One row of the efficiency sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    /// Channel transmission efficiency.
    pub eta: f64,
    /// Attack this row describes.
    pub kind: AttackKind,
    /// Largest maskable attack fraction at this efficiency.
    pub f_star: f64,
    /// Eavesdropper information per transmitted message bit: the maskable
    /// fraction times her per-attacked-bit information.
    pub i_ae_eff: f64,
    /// Legitimate information per transmitted message bit: attacked bits
    /// carry the attacked-channel information, unattacked bits decode
    /// perfectly.
    pub i_ab_eff: f64,
    /// Eavesdropping-induced loss of the attack itself.
    pub induced_loss: f64,
}

/// Sweeps the channel efficiency grid for both attacks.
pub fn sweep(eta_grid: &[f64]) -> Result<Vec<SweepPoint>, EngineError> {
    for &eta in eta_grid {
        if !(0.0..=1.0).contains(&eta) {
            return Err(EngineError::InvalidConfig("eta grid must lie in [0, 1]"));
        }
    }
    let mut points = Vec::with_capacity(eta_grid.len() * 2);
    let kinds = [AttackKind::Improved, AttackKind::Wojcik];
    let mut per_bit = Vec::new();
    for kind in kinds {
        let joint = exact_joint(AttackVariant::new(kind, false))?;
        per_bit.push((
            kind,
            mutual_information(&joint, InfoPair::AliceEve),
            mutual_information(&joint, InfoPair::AliceBob),
            induced_loss(kind)?,
        ));
    }
    for &eta in eta_grid {
        for &(kind, i_ae, i_ab, loss) in &per_bit {
            let f_star = attack_fraction_limit(kind.intrinsic_survival(), eta);
            points.push(SweepPoint {
                eta,
                kind,
                f_star,
                i_ae_eff: f_star * i_ae,
                i_ab_eff: f_star * i_ab + (1.0 - f_star),
                induced_loss: loss,
            });
        }
    }
    Ok(points)
}

/// Headline exact quantities for one variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoReport {
    /// Sender/eavesdropper mutual information (bits).
    pub i_ae: f64,
    /// Sender/receiver mutual information (bits).
    pub i_ab: f64,
    /// Receiver/eavesdropper mutual information (bits).
    pub i_be: f64,
    /// Bit error rate the attack induces.
    pub qber: f64,
    /// Eavesdropping-induced loss.
    pub induced_loss: f64,
    /// Control-mode detection probability with z-only control.
    pub detection_z: f64,
    /// Control-mode detection probability with two-basis control.
    pub detection_two_basis: f64,
}

/// Computes the full exact report for a variant.
pub fn info_report(variant: AttackVariant) -> Result<InfoReport, EngineError> {
    let joint = exact_joint(variant)?;
    Ok(InfoReport {
        i_ae: mutual_information(&joint, InfoPair::AliceEve),
        i_ab: mutual_information(&joint, InfoPair::AliceBob),
        i_be: mutual_information(&joint, InfoPair::BobEve),
        qber: qber(&joint),
        induced_loss: induced_loss(variant.kind)?,
        detection_z: detection_probability(variant.kind, false)?,
        detection_two_basis: detection_probability(variant.kind, true)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::EXACT_TOLERANCE;

    const INFO_TOLERANCE: f64 = 1e-9;

    fn improved() -> AttackVariant {
        AttackVariant::new(AttackKind::Improved, false)
    }

    #[test]
    fn improved_joint_matches_the_closed_form() {
        let joint = exact_joint(improved()).unwrap();
        assert!((joint.probability(0, Some(0), 0) - 0.5).abs() < EXACT_TOLERANCE);
        for (k, m) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!((joint.probability(1, Some(k), m) - 0.125).abs() < EXACT_TOLERANCE);
        }
        let pinned: f64 = joint.probability(0, Some(0), 0)
            + [(0, 0), (0, 1), (1, 0), (1, 1)]
                .iter()
                .map(|&(k, m)| joint.probability(1, Some(k), m))
                .sum::<f64>();
        assert!((joint.total() - pinned).abs() < EXACT_TOLERANCE);
        assert!((joint.total() - 1.0).abs() < EXACT_TOLERANCE);
    }

    #[test]
    fn clean_joint_decodes_on_the_diagonal() {
        let joint = exact_joint(AttackVariant::none()).unwrap();
        assert!(!joint.has_eavesdropper());
        assert!((joint.probability(0, None, 0) - 0.5).abs() < EXACT_TOLERANCE);
        assert!((joint.probability(1, None, 1) - 0.5).abs() < EXACT_TOLERANCE);
        assert!(qber(&joint) < EXACT_TOLERANCE);
    }

    #[test]
    fn symmetrized_joint_conditioned_on_heads_and_bit_one() {
        let joint = exact_joint(AttackVariant::new(AttackKind::Improved, true)).unwrap();
        let heads = &joint.coin_conditionals.as_ref().unwrap()[1];
        // Given heads and j = 1, all mass sits on (k, m) = (1, 1).
        let j1: f64 = heads
            .iter()
            .filter(|((j, _, _), _)| *j == 1)
            .map(|(_, p)| *p)
            .sum();
        let pinned = heads.get(&(1, Some(1), 1)).copied().unwrap_or(0.0);
        assert!((j1 - 0.5).abs() < EXACT_TOLERANCE);
        assert!((pinned - j1).abs() < EXACT_TOLERANCE);
    }

    #[test]
    fn mutual_informations_reproduce_the_closed_forms() {
        let joint = exact_joint(improved()).unwrap();
        let expected_ae = 0.75 * (4.0f64 / 3.0).log2();
        let expected_be = 1.0 - 1.5 * 3.0f64.log2() + 0.625 * 5.0f64.log2();
        assert!((mutual_information(&joint, InfoPair::AliceEve) - expected_ae).abs() < INFO_TOLERANCE);
        assert!((mutual_information(&joint, InfoPair::AliceBob) - expected_ae).abs() < INFO_TOLERANCE);
        assert!((mutual_information(&joint, InfoPair::BobEve) - expected_be).abs() < INFO_TOLERANCE);
    }

    #[test]
    fn sender_eavesdropper_and_sender_receiver_tables_coincide() {
        // The (j, k) and (j, m) marginals are the same table, cell by cell.
        let joint = exact_joint(improved()).unwrap();
        for j in [0u8, 1u8] {
            for b in [0u8, 1u8] {
                let jk: f64 = [0u8, 1u8]
                    .iter()
                    .map(|&m| joint.probability(j, Some(b), m))
                    .sum();
                let jm: f64 = [0u8, 1u8]
                    .iter()
                    .map(|&k| joint.probability(j, Some(k), b))
                    .sum();
                assert!((jk - jm).abs() < EXACT_TOLERANCE);
            }
        }
    }

    #[test]
    fn symmetrization_reduces_the_receiver_information_only() {
        let joint = exact_joint(AttackVariant::new(AttackKind::Improved, true)).unwrap();
        let expected_ab = 0.75 * 3.0f64.log2() - 1.0;
        let expected_ae = 0.75 * (4.0f64 / 3.0).log2();
        assert!((mutual_information(&joint, InfoPair::AliceBob) - expected_ab).abs() < INFO_TOLERANCE);
        assert!((mutual_information(&joint, InfoPair::AliceEve) - expected_ae).abs() < INFO_TOLERANCE);
    }

    #[test]
    fn independent_table_has_zero_information() {
        let mut entries = BTreeMap::new();
        for j in [0u8, 1u8] {
            for k in [0u8, 1u8] {
                for m in [0u8, 1u8] {
                    entries.insert((j, Some(k), m), 0.125);
                }
            }
        }
        let joint = JointDistribution::new(entries);
        assert!(mutual_information(&joint, InfoPair::AliceEve).abs() < INFO_TOLERANCE);
        assert!(mutual_information(&joint, InfoPair::AliceBob).abs() < INFO_TOLERANCE);
        assert!(mutual_information(&joint, InfoPair::BobEve).abs() < INFO_TOLERANCE);
    }

    #[test]
    fn qber_values_per_variant() {
        assert!((qber(&exact_joint(improved()).unwrap()) - 0.25).abs() < EXACT_TOLERANCE);
        assert!(qber(&exact_joint(AttackVariant::none()).unwrap()) < EXACT_TOLERANCE);
        let wojcik = exact_joint(AttackVariant::new(AttackKind::Wojcik, false)).unwrap();
        assert!((qber(&wojcik) - 0.25).abs() < EXACT_TOLERANCE);
    }

    #[test]
    fn half_attacked_sessions_halve_the_error_rate() {
        let attacked = exact_joint(improved()).unwrap();
        let clean = exact_joint(AttackVariant::none()).unwrap();
        let mixed = attacked.mix(&clean, 0.5);
        assert!((qber(&mixed) - 0.125).abs() < EXACT_TOLERANCE);
    }

    #[test]
    fn induced_loss_per_variant() {
        assert_eq!(induced_loss(AttackKind::Improved).unwrap(), 0.0);
        assert!((induced_loss(AttackKind::Wojcik).unwrap() - 0.5).abs() < EXACT_TOLERANCE);
        assert_eq!(induced_loss(AttackKind::None).unwrap(), 0.0);
    }

    #[test]
    fn attack_fraction_limit_examples() {
        assert_eq!(attack_fraction_limit(1.0, 0.9), 1.0);
        assert_eq!(attack_fraction_limit(0.5, 0.5), 1.0);
        assert!((attack_fraction_limit(0.5, 0.75) - 0.5).abs() < EXACT_TOLERANCE);
        assert_eq!(attack_fraction_limit(1.0, 1.0), 1.0);
        assert!(attack_fraction_limit(0.5, 1.0).abs() < EXACT_TOLERANCE);
    }

    #[test]
    fn fraction_limit_is_monotone_above_the_threshold() {
        let mut last = 1.0;
        for i in 0..=100 {
            let eta = i as f64 / 100.0;
            let f = attack_fraction_limit(0.5, eta);
            assert!(f <= last + EXACT_TOLERANCE);
            if eta <= 0.5 {
                assert_eq!(f, 1.0);
            }
            last = f;
        }
    }

    #[test]
    fn detection_probabilities() {
        assert_eq!(detection_probability(AttackKind::Improved, false).unwrap(), 0.0);
        let two_basis = detection_probability(AttackKind::Improved, true).unwrap();
        assert!((two_basis - 0.25).abs() < EXACT_TOLERANCE);
        assert!(detection_probability(AttackKind::None, true).unwrap() < EXACT_TOLERANCE);
    }

    #[test]
    fn sweep_rows_follow_the_masking_model() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let points = sweep(&grid).unwrap();
        assert_eq!(points.len(), grid.len() * 2);
        let expected_ae = 0.75 * (4.0f64 / 3.0).log2();
        for point in &points {
            match point.kind {
                AttackKind::Improved => {
                    assert_eq!(point.f_star, 1.0);
                    assert!((point.i_ae_eff - expected_ae).abs() < INFO_TOLERANCE);
                }
                AttackKind::Wojcik => {
                    let expected = attack_fraction_limit(0.5, point.eta);
                    assert!((point.f_star - expected).abs() < EXACT_TOLERANCE);
                }
                AttackKind::None => unreachable!(),
            }
        }
        // At an efficiency below the loss threshold the two attacks differ
        // only in their induced loss.
        let at_quarter: Vec<&SweepPoint> =
            points.iter().filter(|p| (p.eta - 0.25).abs() < 1e-12).collect();
        assert_eq!(at_quarter.len(), 2);
        assert!((at_quarter[0].f_star - at_quarter[1].f_star).abs() < EXACT_TOLERANCE);
        assert!((at_quarter[0].i_ae_eff - at_quarter[1].i_ae_eff).abs() < EXACT_TOLERANCE);
        assert!((at_quarter[0].i_ab_eff - at_quarter[1].i_ab_eff).abs() < EXACT_TOLERANCE);
        assert!(
            (at_quarter[0].induced_loss - at_quarter[1].induced_loss).abs() > 0.4,
            "induced loss should separate the attacks"
        );
    }

    #[test]
    fn wojcik_eavesdropper_gain_vanishes_on_an_ideal_channel() {
        let points = sweep(&[1.0]).unwrap();
        let wojcik = points.iter().find(|p| p.kind == AttackKind::Wojcik).unwrap();
        assert!(wojcik.i_ae_eff.abs() < EXACT_TOLERANCE);
        let improved = points.iter().find(|p| p.kind == AttackKind::Improved).unwrap();
        assert!(improved.i_ae_eff > 0.3);
    }

    #[test]
    fn report_collects_every_headline_quantity() {
        let report = info_report(improved()).unwrap();
        assert!((report.qber - 0.25).abs() < EXACT_TOLERANCE);
        assert_eq!(report.induced_loss, 0.0);
        assert_eq!(report.detection_z, 0.0);
        assert!((report.detection_two_basis - 0.25).abs() < EXACT_TOLERANCE);
        assert!(report.i_ae > report.i_be);
    }
}
