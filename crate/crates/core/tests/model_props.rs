mod common;

use common::rel;
use levgrav::model::{parse_config, to_config_string, with_recomputed_references};
use levgrav::noise::{budget_with, full_budget, ChannelInputs, ChannelMask};
use levgrav::{derive, validate, SystemConfig};
use proptest::prelude::*;
use std::f64::consts::PI;

fn perturbed(f_hz: f64, ring: f64, density: f64, l_max: f64) -> SystemConfig {
    let mut c = SystemConfig::table1();
    c.pins.trap_frequency_hz = Some(c.pins.trap_frequency_hz.unwrap() * f_hz);
    c.ring.radius *= ring;
    c.ring.density *= density;
    c.l_max *= l_max;
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_point_identity(f in 0.5..2.0f64, r in 0.8..1.2f64, rho in 0.5..2.0f64, l in 0.1..2.0f64) {
        let c = perturbed(f, r, rho, l);
        let d = derive(&c).unwrap();
        prop_assert!(rel(d.z0 * d.z0 * 2.0 * d.mass * d.omega, c.constants.hbar) < 1e-12);
        prop_assert!(rel(d.tau * d.omega, 2.0 * PI) < 1e-14);
        prop_assert!(rel(d.displacement(d.lambda_max), d.l_max) < 1e-12);
    }

    #[test]
    fn doubling_count_brackets_ratio(f in 0.5..2.0f64, r in 0.8..1.2f64, rho in 0.5..2.0f64, l in 0.01..4.0f64) {
        let d = derive(&perturbed(f, r, rho, l)).unwrap();
        let ratio = d.l_max / d.l0_bound;
        prop_assert!((d.k as f64).exp2() >= ratio * (1.0 - 1e-12));
        prop_assert!((d.k as f64 - 1.0).exp2() < ratio);
        prop_assert!(d.l0 <= d.l0_bound * (1.0 + 1e-12));
        prop_assert!(rel(d.l0 * (d.k as f64).exp2(), d.l_max) < 1e-14);
    }

    #[test]
    fn config_text_round_trip(f in 0.5..2.0f64, r in 0.8..1.2f64, rho in 0.5..2.0f64, l in 0.1..2.0f64) {
        let c = perturbed(f, r, rho, l);
        let back = parse_config(&to_config_string(&c)).unwrap().config;
        prop_assert_eq!(back, c);
    }

    #[test]
    fn validate_is_idempotent(f in 0.5..2.0f64, r in 0.8..1.2f64, l in 0.1..2.0f64) {
        let c = perturbed(f, r, 1.0, l);
        let a = validate(&c);
        let b = validate(&c);
        prop_assert_eq!(&a, &b);
        let fixed = with_recomputed_references(&c);
        prop_assert!(validate(&fixed).deviations(1e-12).is_empty());
    }

    #[test]
    fn quality_factor_identity(f in 0.5..2.0f64, l in 0.1..2.0f64) {
        let b = full_budget(&perturbed(f, 1.0, 1.0, l)).unwrap();
        for (_, ch) in b.channels() {
            prop_assert!(rel(ch.gamma * ch.q, b.inputs.omega / (2.0 * PI)) < 1e-12);
            prop_assert!(ch.gamma >= 0.0);
        }
    }

    #[test]
    fn budget_channels_add(f in 0.5..2.0f64) {
        let c = perturbed(f, 1.0, 1.0, 1.0);
        let inp = ChannelInputs::from_derived(&derive(&c).unwrap());
        let all = budget_with(&c, &inp, ChannelMask::ALL).unwrap();
        let parts: f64 = [
            ChannelMask { eddy: true, ..ChannelMask::NONE },
            ChannelMask { dipole: true, ..ChannelMask::NONE },
            ChannelMask { gas: true, ..ChannelMask::NONE },
        ]
        .iter()
        .map(|m| budget_with(&c, &inp, *m).unwrap().gamma_total)
        .sum();
        prop_assert!(rel(all.gamma_total, parts) < 1e-12);
        prop_assert_eq!(budget_with(&c, &inp, ChannelMask::NONE).unwrap().gamma_total, 0.0);
    }

    #[test]
    fn exponent_scales_with_displacement_squared(s in 0.1..3.0f64) {
        let c = SystemConfig::table1();
        let inp = ChannelInputs::from_derived(&derive(&c).unwrap());
        let wider = ChannelInputs { l_max: s * inp.l_max, ..inp };
        prop_assert!(rel(wider.exponent(1e-3), s * s * inp.exponent(1e-3)) < 1e-12);
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let text = to_config_string(&SystemConfig::table1());
    let broken = text
        .lines()
        .map(|l| if l.trim_start().starts_with("ring_radius") { "ring_radius = -1e-6" } else { l })
        .collect::<Vec<_>>()
        .join("\n");
    assert!(parse_config(&broken).is_err());
}

#[test]
fn derive_does_not_mutate() {
    let c = SystemConfig::table1();
    let before = c.clone();
    let _ = derive(&c).unwrap();
    let _ = validate(&c);
    assert_eq!(c, before);
}
