use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::*;

/// Recognised keys: (key, unit, description). Keys marked optional in
/// [`OPTIONAL`] may be omitted.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("sphere_radius", "m", "radius of the magnetised sphere R_s"),
    ("sphere_magnetization", "T", "μ0𝓜 of the sphere"),
    ("sphere_resistivity", "Ω·m", "sphere resistivity ρ"),
    ("ring_radius", "m", "resonator ring radius R_r"),
    ("wire_radius", "m", "resonator wire radius a"),
    ("ring_density", "kg/m³", "resonator material density"),
    ("ring_youngs_modulus", "Pa", "resonator Young's modulus E"),
    ("qubit_radius", "m", "qubit loop radius R_q"),
    ("qubit_wire_radius", "m", "qubit wire radius (sets L_q)"),
    ("qubit_splitting_hz", "Hz", "qubit splitting ω_q/2π"),
    ("qubit_t1", "s", "qubit T1"),
    ("qubit_t2", "s", "qubit T2"),
    ("qubit_temperature", "K", "qubit bath temperature T_q"),
    ("tau_reset", "s", "qubit reset time"),
    ("tau_rot", "s", "single-qubit rotation time"),
    ("tau_meas", "s", "qubit measurement time"),
    ("p_init", "1", "initialisation error probability"),
    ("p_rot", "1", "rotation error probability"),
    ("p_meas", "1", "measurement error probability"),
    ("r0", "m", "sphere surface to ring centre distance"),
    ("qubit_separation", "m", "ring–qubit separation d"),
    ("gas_pressure", "Pa", "background gas pressure"),
    ("gas_temperature", "K", "background gas temperature"),
    ("gas_molecule_mass", "kg", "gas molecule mass m_g"),
    ("l_max", "m", "largest cat displacement"),
    ("g", "m/s²", "local gravity (default 9.81)"),
    ("trap_frequency_hz", "Hz", "pinned ω/2π; omit for geometric mode"),
    ("resonator_inductance", "H", "pinned L_r; omit to use the formula"),
];

const OPTIONAL: &[&str] = &["g", "trap_frequency_hz", "resonator_inductance"];

/// Reference names accepted under the `table.` prefix.
pub const REFERENCE_KEYS: &[&str] = &[
    "mass",
    "trap_frequency_hz",
    "z0",
    "z_eq",
    "volume",
    "magnetization",
    "lambda_max_hz",
    "lambda0_hz",
    "resonator_inductance",
    "qubit_inductance",
    "mutual_inductance",
    "flux",
    "i_qmax",
    "i_q0",
    "i_rmax",
    "tau_exp",
    "gamma_gas_hz",
    "gamma_eddy_hz",
    "gamma_rad_hz",
];

#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: SystemConfig,
    pub warnings: Vec<String>,
}

pub fn load_config(path: impl AsRef<Path>) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let mut values: BTreeMap<String, f64> = BTreeMap::new();
    let mut reference = BTreeMap::new();
    let mut warnings = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let v: f64 = value.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("value for `{key}` is not a number: `{value}`"),
        })?;

        if let Some(name) = key.strip_prefix("table.") {
            if !REFERENCE_KEYS.contains(&name) {
                warnings.push(format!("line {line_no}: unknown reference key `{key}`"));
            }
            if reference.insert(name.to_string(), v).is_some() {
                return Err(duplicate(line_no, key));
            }
        } else if KEYS.iter().any(|(k, _, _)| *k == key) {
            if values.insert(key.to_string(), v).is_some() {
                return Err(duplicate(line_no, key));
            }
        } else {
            warnings.push(format!("line {line_no}: unknown key `{key}` ignored"));
        }
    }

    for (k, _, _) in KEYS {
        if let Some(v) = values.get(*k) {
            if v.is_nan() {
                return Err(Error::InvalidField {
                    field: k.to_string(),
                    reason: "NaN".into(),
                });
            }
        } else if !OPTIONAL.contains(k) {
            return Err(Error::MissingField(k.to_string()));
        }
    }

    let get = |k: &str| values[k];
    let config = SystemConfig {
        sphere: MagnetSphere {
            radius: get("sphere_radius"),
            mu0_magnetization: get("sphere_magnetization"),
            resistivity: get("sphere_resistivity"),
        },
        ring: ResonatorRing {
            radius: get("ring_radius"),
            wire_radius: get("wire_radius"),
            density: get("ring_density"),
            youngs_modulus: get("ring_youngs_modulus"),
        },
        qubit: QubitParams {
            loop_radius: get("qubit_radius"),
            wire_radius: get("qubit_wire_radius"),
            splitting_hz: get("qubit_splitting_hz"),
            t1: get("qubit_t1"),
            t2: get("qubit_t2"),
            temperature: get("qubit_temperature"),
            tau_reset: get("tau_reset"),
            tau_rot: get("tau_rot"),
            tau_meas: get("tau_meas"),
            p_init: get("p_init"),
            p_rot: get("p_rot"),
            p_meas: get("p_meas"),
        },
        geometry: Geometry {
            r0: get("r0"),
            qubit_separation: get("qubit_separation"),
        },
        environment: Environment {
            gas_pressure: get("gas_pressure"),
            gas_temperature: get("gas_temperature"),
            gas_molecule_mass: get("gas_molecule_mass"),
        },
        l_max: get("l_max"),
        constants: Constants::with_g(values.get("g").copied().unwrap_or(crate::constants::STANDARD_G)),
        pins: Pins {
            trap_frequency_hz: values.get("trap_frequency_hz").copied(),
            resonator_inductance: values.get("resonator_inductance").copied(),
        },
        reference,
    };
    config.check()?;
    warnings.extend(config.warnings());
    Ok(LoadedConfig { config, warnings })
}

fn duplicate(line: usize, key: &str) -> Error {
    Error::Parse {
        line,
        message: format!("duplicate key `{key}`"),
    }
}

/// Serialises a configuration in the same format [`parse_config`] reads.
pub fn to_config_string(cfg: &SystemConfig) -> String {
    let mut values: Vec<(&str, Option<f64>)> = vec![
        ("sphere_radius", Some(cfg.sphere.radius)),
        ("sphere_magnetization", Some(cfg.sphere.mu0_magnetization)),
        ("sphere_resistivity", Some(cfg.sphere.resistivity)),
        ("ring_radius", Some(cfg.ring.radius)),
        ("wire_radius", Some(cfg.ring.wire_radius)),
        ("ring_density", Some(cfg.ring.density)),
        ("ring_youngs_modulus", Some(cfg.ring.youngs_modulus)),
        ("qubit_radius", Some(cfg.qubit.loop_radius)),
        ("qubit_wire_radius", Some(cfg.qubit.wire_radius)),
        ("qubit_splitting_hz", Some(cfg.qubit.splitting_hz)),
        ("qubit_t1", Some(cfg.qubit.t1)),
        ("qubit_t2", Some(cfg.qubit.t2)),
        ("qubit_temperature", Some(cfg.qubit.temperature)),
        ("tau_reset", Some(cfg.qubit.tau_reset)),
        ("tau_rot", Some(cfg.qubit.tau_rot)),
        ("tau_meas", Some(cfg.qubit.tau_meas)),
        ("p_init", Some(cfg.qubit.p_init)),
        ("p_rot", Some(cfg.qubit.p_rot)),
        ("p_meas", Some(cfg.qubit.p_meas)),
        ("r0", Some(cfg.geometry.r0)),
        ("qubit_separation", Some(cfg.geometry.qubit_separation)),
        ("gas_pressure", Some(cfg.environment.gas_pressure)),
        ("gas_temperature", Some(cfg.environment.gas_temperature)),
        ("gas_molecule_mass", Some(cfg.environment.gas_molecule_mass)),
        ("l_max", Some(cfg.l_max)),
        ("g", Some(cfg.constants.g)),
        ("trap_frequency_hz", cfg.pins.trap_frequency_hz),
        ("resonator_inductance", cfg.pins.resonator_inductance),
    ];
    debug_assert_eq!(values.len(), KEYS.len());

    let mut out = String::new();
    for (key, v) in values.drain(..) {
        if let Some(v) = v {
            let unit = KEYS.iter().find(|(k, _, _)| *k == key).map(|(_, u, _)| *u).unwrap_or("");
            let _ = writeln!(out, "{key} = {v:e}    # {unit}");
        }
    }
    for (name, v) in &cfg.reference {
        let _ = writeln!(out, "table.{name} = {v:e}");
    }
    out
}

pub fn save_config(cfg: &SystemConfig, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_config_string(cfg))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_loads() {
        let loaded = parse_config(TABLE1_CFG).unwrap();
        let c = loaded.config;
        assert_eq!(c.ring.radius, 5e-6);
        assert_eq!(c.ring.wire_radius, 1.0e-6);
        assert_eq!(c.sphere.radius, 10e-6);
        assert_eq!(c.geometry.qubit_separation, 2e-6);
        assert_eq!(c.geometry.r0, 1e-6);
        assert_eq!(loaded.warnings.len(), 1, "{:?}", loaded.warnings);
        assert!(loaded.warnings[0].contains("critical field"));
    }

    #[test]
    fn missing_wire_radius() {
        let text: String = TABLE1_CFG
            .lines()
            .filter(|l| !l.starts_with("wire_radius"))
            .map(|l| format!("{l}\n"))
            .collect();
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.to_string(), "missing field: wire_radius");
    }

    #[test]
    fn nan_and_negative_name_the_field() {
        let nan = TABLE1_CFG.replace("qubit_t1 = 70e-6", "qubit_t1 = NaN");
        let err = parse_config(&nan).unwrap_err();
        assert!(err.to_string().contains("qubit_t1"), "{err}");
        let neg = TABLE1_CFG.replace("r0 = 1e-6", "r0 = -1e-6");
        let err = parse_config(&neg).unwrap_err();
        assert!(err.to_string().contains("r0"), "{err}");
    }

    #[test]
    fn unknown_keys_warn() {
        let text = format!("{TABLE1_CFG}\nflux_capacitor = 1.21e9\n");
        let loaded = parse_config(&text).unwrap();
        assert!(loaded.warnings.iter().any(|w| w.contains("flux_capacitor")));
    }

    #[test]
    fn round_trip() {
        let a = parse_config(TABLE1_CFG).unwrap().config;
        let b = parse_config(&to_config_string(&a)).unwrap().config;
        assert_eq!(a, b);
    }

    #[test]
    fn duplicate_key_rejected() {
        let text = format!("{TABLE1_CFG}\nr0 = 2e-6\n");
        assert!(matches!(parse_config(&text), Err(Error::Parse { .. })));
    }
}
