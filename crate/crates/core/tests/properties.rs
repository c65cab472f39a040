//! Property tests over randomly generated states and round streams.

use proptest::prelude::*;

use num_complex::Complex64;
use pingpong_core::analysis::{attack_fraction_limit, exact_joint, qber};
use pingpong_core::attack::{build_q, build_u, build_v, build_w, symmetrization_gate, AttackKind, AttackVariant};
use pingpong_core::protocol::{
    run_round, ChannelConfig, ProtocolConfig, SessionStats,
};
use pingpong_core::state::{
    cnot, cpbs, hadamard, pauli_x, pauli_z, swap, BasisLabel, GateSpec, OpticalMode, Register,
    StateVector,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn named_gate(index: usize) -> GateSpec {
    match index {
        0 => hadamard(OpticalMode::Y),
        1 => swap(OpticalMode::T, OpticalMode::X),
        2 => cpbs(),
        3 => build_u(),
        4 => build_v(),
        5 => build_q(),
        6 => build_w(),
        7 => pauli_z(Register::T),
        8 => pauli_x(Register::T),
        9 => cnot(OpticalMode::T, OpticalMode::Y),
        _ => symmetrization_gate(),
    }
}

/// A normalized random state supported on the given gate's domain.
fn random_domain_state(gate: &GateSpec, seed: u64) -> StateVector {
    let domain: Vec<BasisLabel> = gate.domain().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = std::collections::BTreeMap::new();
    use rand::Rng;
    for _ in 0..5 {
        let label = domain[rng.gen_range(0..domain.len())];
        let amp = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        *entries.entry(label).or_insert(Complex64::new(0.0, 0.0)) += amp;
    }
    let norm: f64 = entries.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(
        entries
            .into_iter()
            .map(|(l, a)| (l, a / Complex64::new(norm, 0.0))),
    )
    .expect("normalized by construction")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gates_preserve_norm_on_their_domains(index in 0usize..11, seed in any::<u64>()) {
        let gate = named_gate(index);
        let state = random_domain_state(&gate, seed);
        let out = gate.apply(&state).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-9, "gate {}", gate.name());
    }

    #[test]
    fn involutions_return_after_two_applications(index in 0usize..5, seed in any::<u64>()) {
        // Hadamard, swap, beam splitter, and the two conditional swaps.
        let gate = named_gate(index);
        let state = random_domain_state(&gate, seed);
        let once = gate.apply(&state).unwrap();
        if once.iter().all(|(label, _)| gate.domain_contains(label)) {
            let twice = gate.apply(&once).unwrap();
            prop_assert!(twice.max_deviation(&state) < 1e-9, "gate {}", gate.name());
        }
    }

    #[test]
    fn inverse_round_trips_random_domain_states(index in 0usize..11, seed in any::<u64>()) {
        let gate = named_gate(index);
        let state = random_domain_state(&gate, seed);
        let back = gate.inverse().apply(&gate.apply(&state).unwrap()).unwrap();
        prop_assert!(back.max_deviation(&state) < 1e-9, "gate {}", gate.name());
    }

    #[test]
    fn mixture_error_rate_is_linear(weight in 0.0f64..=1.0) {
        let attacked = exact_joint(AttackVariant::new(AttackKind::Improved, false)).unwrap();
        let clean = exact_joint(AttackVariant::none()).unwrap();
        let mixed = attacked.mix(&clean, weight);
        prop_assert!((qber(&mixed) - 0.25 * weight).abs() < 1e-12);
        prop_assert!((mixed.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fraction_limit_matches_the_loss_budget(survival in prop_oneof![Just(0.5f64), Just(1.0f64)], eta in 0.0f64..=1.0) {
        let f = attack_fraction_limit(survival, eta);
        prop_assert!((0.0..=1.0).contains(&f));
        let rate = f * survival + (1.0 - f);
        if f < 1.0 {
            // At the limit the reachable rate lands exactly on eta.
            prop_assert!((rate - eta).abs() < 1e-12);
        } else {
            prop_assert!(rate + 1e-12 >= eta);
        }
    }

    #[test]
    fn stats_accumulation_is_order_insensitive(seed in any::<u64>(), split in 1usize..199) {
        let config = ProtocolConfig {
            control_probability: 0.5,
            two_basis_control: true,
            rounds: 200,
            seed,
            ..ProtocolConfig::new(AttackVariant::new(AttackKind::Improved, true))
        };
        let channel = ChannelConfig::with_eta(0.8);
        let mut records = Vec::new();
        for round in 0..200u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(round);
            records.push(run_round(&config, &channel, &mut rng).unwrap());
        }
        let mut whole = SessionStats::default();
        for record in &records {
            whole.record(record);
        }
        let (front, back) = records.split_at(split);
        let mut a = SessionStats::default();
        for record in front {
            a.record(record);
        }
        let mut b = SessionStats::default();
        for record in back {
            b.record(record);
        }
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b;
        ba.merge(&a);
        prop_assert_eq!(&ab, &whole);
        prop_assert_eq!(&ba, &whole);
    }
}
