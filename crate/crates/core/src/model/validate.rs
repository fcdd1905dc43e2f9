use std::io::Write;

use super::*;
use crate::magnetostatics::ring_flux;
use crate::noise;
use crate::report::sci;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub name: String,
    pub pinned: f64,
    pub recomputed: f64,
    pub rel_dev: f64,
    /// Compared against a reference it is not expected to reproduce; never
    /// counted as a deviation.
    pub diagnostic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub rows: Vec<ConsistencyRow>,
    pub warnings: Vec<String>,
}

impl ConsistencyReport {
    /// Audit rows whose relative deviation exceeds `tol`.
    pub fn deviations(&self, tol: f64) -> Vec<&ConsistencyRow> {
        self.rows.iter().filter(|r| !r.diagnostic && !(r.rel_dev <= tol)).collect()
    }

    pub fn row(&self, name: &str) -> Option<&ConsistencyRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["name", "pinned", "recomputed", "rel_dev"])?;
        for r in &self.rows {
            out.write_record([r.name.clone(), sci(r.pinned), sci(r.recomputed), sci(r.rel_dev)])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Every derivable reference value recomputed from first principles.
fn recomputed(cfg: &SystemConfig) -> Vec<(&'static str, f64)> {
    let c = &cfg.constants;
    let mut v = vec![
        ("mass", cfg.mass()),
        ("z_eq", cfg.z_eq()),
        ("volume", cfg.sphere.volume()),
        ("magnetization", cfg.sphere.magnetization(c.mu0)),
        ("resonator_inductance", cfg.ring.formula_inductance(c.mu0)),
        ("qubit_inductance", cfg.qubit.self_inductance(c.mu0)),
        ("flux", ring_flux(cfg.z_eq(), cfg)),
        ("i_qmax", cfg.qubit.max_current(c)),
        (
            "trap_frequency_hz",
            crate::magnetostatics::trap_frequency(cfg) / (2.0 * std::f64::consts::PI),
        ),
    ];
    if let Ok(m) = cfg.mutual_inductance() {
        v.push(("mutual_inductance", m));
    }
    if let Ok(d) = derive(cfg) {
        let hz = 1.0 / (2.0 * std::f64::consts::PI);
        v.extend([
            ("z0", d.z0),
            ("lambda_max_hz", d.lambda_max * hz),
            ("lambda0_hz", d.lambda0 * hz),
            ("lambda0_bound_hz", d.lambda0_bound * hz),
            ("i_q0", d.i_qmax / (d.k as f64).exp2()),
            ("i_rmax", d.i_rmax),
            ("tau_exp", d.tau_exp),
        ]);
    }
    if let Ok(b) = noise::full_budget(cfg) {
        v.extend([
            ("gamma_gas_hz", b.gas.gamma),
            ("gamma_eddy_hz", b.eddy.gamma),
            ("gamma_rad_hz", b.dipole.gamma),
        ]);
    }
    v
}

/// Reference key a recomputed row is compared against.
fn reference_key(name: &str) -> &str {
    match name {
        "lambda0_bound_hz" => "lambda0_hz",
        other => other,
    }
}

/// Audits `cfg.reference` against recomputed values. Never mutates `cfg`.
pub fn validate(cfg: &SystemConfig) -> ConsistencyReport {
    let rows = recomputed(cfg)
        .into_iter()
        .filter_map(|(name, value)| {
            let pinned = *cfg.reference.get(reference_key(name))?;
            Some(ConsistencyRow {
                name: name.to_string(),
                pinned,
                recomputed: value,
                rel_dev: ((value - pinned) / pinned).abs(),
                diagnostic: reference_key(name) != name,
            })
        })
        .collect();
    ConsistencyReport {
        rows,
        warnings: cfg.warnings(),
    }
}

/// A copy of `cfg` whose reference table equals the recomputed values.
pub fn with_recomputed_references(cfg: &SystemConfig) -> SystemConfig {
    let mut out = cfg.clone();
    out.reference.clear();
    for (name, value) in recomputed(cfg) {
        if reference_key(name) == name {
            out.reference.insert(name.to_string(), value);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_resonator_inductance() {
        let r = validate(&SystemConfig::table1());
        let row = r.row("resonator_inductance").unwrap();
        assert!((row.recomputed / 1.06e-11 - 1.0).abs() < 0.01, "{}", row.recomputed);
        assert_eq!(row.pinned, 2.25e-11);
        assert!(r.deviations(0.05).iter().any(|d| d.name == "resonator_inductance"));
    }

    #[test]
    fn confirms_lambda_max() {
        let r = validate(&SystemConfig::table1());
        assert!(r.row("lambda_max_hz").unwrap().rel_dev < 0.02);
    }

    #[test]
    fn self_consistent_has_no_deviations() {
        let c = with_recomputed_references(&SystemConfig::table1());
        let r = validate(&c);
        assert!(!r.rows.is_empty());
        assert!(r.deviations(1e-12).is_empty(), "{:?}", r.deviations(1e-12));
    }

    #[test]
    fn idempotent() {
        let c = SystemConfig::table1();
        let before = c.clone();
        assert_eq!(validate(&c), validate(&c));
        assert_eq!(c, before);
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        validate(&SystemConfig::table1()).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("name,pinned,recomputed,rel_dev\n"));
    }
}
