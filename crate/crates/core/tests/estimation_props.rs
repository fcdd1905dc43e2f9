use levgrav::estimation::{
    angle_diff, estimate_phase, holevo_deviation, holevo_monte_carlo, n_closed_form, required_k, simulate_cycle,
    OffsetRule, ProtocolSchedule, Tally,
};
use levgrav::Error;
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

proptest! {
    #[test]
    fn resource_count_closed_form(k in 0u32..=40) {
        let s = ProtocolSchedule::standard(k).unwrap();
        let direct: u128 = (0..=k).map(|j| ((2 + 3 * (k - j)) as u128) << j).sum();
        prop_assert_eq!(s.n_resource(), direct);
        prop_assert_eq!(n_closed_form(k), direct);
    }

    #[test]
    fn basis_split_covers_every_measurement(k in 0u32..=20, m_k in 1u32..6, mu in 0u32..5, r in 1u32..4) {
        let s = ProtocolSchedule::new(k, m_k, mu).unwrap().with_repeats(r);
        for stage in 0..=k {
            let m = s.counts[stage as usize];
            let (a, b) = s.basis_split(stage);
            prop_assert_eq!(a + b, m);
            prop_assert!(a >= b && a - b <= 1);
            for rule in [OffsetRule::Spread, OffsetRule::TwoBasis] {
                let shots: u32 = s.clone().with_offset_rule(rule).offsets(stage).iter().map(|o| o.1).sum();
                prop_assert_eq!(shots, m * r);
            }
        }
    }

    #[test]
    fn angle_difference_is_wrapped(a in -20.0..20.0f64, b in -20.0..20.0f64) {
        let d = angle_diff(a, b);
        prop_assert!(d > -PI - 1e-12 && d <= PI + 1e-12);
        prop_assert!(((a - b - d) / TAU - ((a - b - d) / TAU).round()).abs() < 1e-9);
    }

    #[test]
    fn required_k_brackets_alpha(alpha in 1.5..1e12f64) {
        let k = required_k(alpha);
        prop_assert!((k as f64).exp2() >= alpha);
        prop_assert!(((k - 1) as f64).exp2() < alpha);
    }

    #[test]
    fn cycles_are_seed_deterministic(phi in 0.0..TAU, seed in any::<u64>()) {
        let s = ProtocolSchedule::standard(5).unwrap();
        let a = simulate_cycle(phi, 0.9, &s, seed).unwrap();
        let b = simulate_cycle(phi, 0.9, &s, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn perfect_fringes_locate_the_phase() {
    // noiseless data: heads fraction equals the ideal probability at every offset
    let phi = 1.234;
    let k = 8;
    let s = ProtocolSchedule::standard(k).unwrap().with_repeats(4000);
    let data: Vec<Vec<Tally>> = (0..=k)
        .map(|stage| {
            s.offsets(stage)
                .into_iter()
                .map(|(offset, shots)| {
                    let p = 0.5 * (1.0 + ((1u64 << stage) as f64 * phi + offset).cos());
                    Tally { offset, shots, heads: (p * shots as f64).round() as u32 }
                })
                .collect()
        })
        .collect();
    let (est, arcs) = estimate_phase(&data, 1.0).unwrap();
    assert!(angle_diff(est, phi).abs() < 1e-3, "{est}");
    assert_eq!(arcs.len(), k as usize + 1);
    for (j, (_, arc)) in arcs.iter().enumerate() {
        assert!(arc.width <= TAU / (1u64 << j) as f64 + 1e-12);
    }
}

#[test]
fn fidelity_domain() {
    let s = ProtocolSchedule::standard(3).unwrap();
    assert!(matches!(simulate_cycle(0.3, 0.0, &s, 1), Err(Error::EstimationImpossible(_))));
    assert!(simulate_cycle(0.3, 1.5, &s, 1).is_err());
    assert!(simulate_cycle(7.0, 1.0, &s, 1).is_err());
}

#[test]
fn holevo_of_constant_errors_is_zero() {
    assert!(holevo_deviation(&[0.3; 10]) < 1e-7);
    let spread = holevo_deviation(&[0.1, -0.1, 0.1, -0.1]);
    let expect = (1.0 / 0.1f64.cos().powi(2) - 1.0).sqrt();
    assert!((spread - expect).abs() < 1e-12);
}

#[test]
fn monte_carlo_is_reproducible_and_heisenberg_bounded() {
    let s = ProtocolSchedule::standard(6).unwrap();
    let a = holevo_monte_carlo(&s, 1.0, 200, 42, None).unwrap();
    let b = holevo_monte_carlo(&s, 1.0, 200, 42, None).unwrap();
    assert_eq!(a, b);
    assert!(a.in_pi_over_n() < 3.0, "{}", a.in_pi_over_n());
    let c = holevo_monte_carlo(&s, 1.0, 200, 43, None).unwrap();
    assert_ne!(a.trials, c.trials);
}
