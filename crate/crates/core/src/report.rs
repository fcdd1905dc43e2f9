//! Output artifacts: the CSV dialect, run manifests and the report bundle.

use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::cooling::{self, CoolingParams, CoolingRow};
use crate::error::{Error, Result};
use crate::estimation::{self, SensitivityReport, WireRadiusRow};
use crate::inductance::{self, SweepTable, SweepVariable};
use crate::model::SystemConfig;
use crate::noise;

/// Scientific notation with 9 significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.8e}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_path: Option<String>,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub version: String,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` overrides the clock.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(subcommand: &str, config_path: Option<&Path>, seed: Option<u64>) -> Self {
        let timestamp = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or_else(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            });
        Self {
            subcommand: subcommand.to_string(),
            config_path: config_path.map(|p| p.display().to_string()),
            seed,
            outputs: vec![],
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
        }
    }

    pub fn with_outputs<I: IntoIterator<Item = PathBuf>>(mut self, outputs: I) -> Self {
        self.outputs = outputs.into_iter().map(|p| p.display().to_string()).collect();
        self
    }

    /// The `# manifest: {...}` header line.
    pub fn header_line(&self) -> String {
        format!("# manifest: {}", serde_json::to_string(self).expect("manifest serializes"))
    }
}

/// Column names plus rows already formatted in the CSV dialect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&x| sci(x)).collect());
    }
}

pub fn write_csv<W: Write>(mut w: W, manifest: &RunManifest, table: &Table) -> Result<()> {
    writeln!(w, "{}", manifest.header_line())?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(&table.header)?;
    for r in &table.rows {
        out.write_record(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, manifest: &RunManifest, result: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        manifest: &'a RunManifest,
        result: &'a T,
    }
    serde_json::to_writer_pretty(&mut w, &Doc { manifest, result })?;
    writeln!(w)?;
    Ok(())
}

pub fn write_csv_file(path: &Path, manifest: &RunManifest, table: &Table) -> Result<()> {
    write_csv(BufWriter::new(File::create(path)?), manifest, table)
}

pub fn write_json_file<T: Serialize>(path: &Path, manifest: &RunManifest, result: &T) -> Result<()> {
    write_json(BufWriter::new(File::create(path)?), manifest, result)
}

pub fn sweep_table(t: &SweepTable) -> Table {
    let x = match t.variable {
        SweepVariable::QubitRadius => "R_q",
        SweepVariable::SphereRadius => "R_s",
        SweepVariable::SystemScale => "alpha",
    };
    let mut out = Table::new(&[x, "lambda_hz"]);
    for r in &t.rows {
        out.push_numbers(&[r.x, r.lambda / std::f64::consts::TAU]);
    }
    out
}

pub fn cooling_table(rows: &[CoolingRow]) -> Table {
    let mut out = Table::new(&["N_th", "n_LD", "n_f"]);
    for r in rows {
        out.push_numbers(&[r.n_th, r.n_ld, r.n_f]);
    }
    out
}

pub fn fig5_table(rows: &[WireRadiusRow]) -> Table {
    let mut out = Table::new(&["a", "omega_hz", "ideal_prhz"]);
    for r in rows {
        out.push_numbers(&[r.a, r.omega / std::f64::consts::TAU, r.ideal_prhz]);
    }
    out
}

pub fn fig6_table(rows: &[WireRadiusRow]) -> Table {
    let mut out = Table::new(&["a", "corrected_prhz", "measurement_time_s", "fidelity"]);
    for r in rows {
        out.push_numbers(&[r.a, r.corrected_prhz, r.tau_phi_corrected, r.fidelity]);
    }
    out
}

/// Upstream results aggregated by `report`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportBundle {
    /// λ against qubit radius.
    pub fig2: Option<SweepTable>,
    /// λ against system scale.
    pub fig3: Option<SweepTable>,
    pub fig4: Option<Vec<CoolingRow>>,
    /// Wire-radius sweep behind both the fig5 and fig6 tables.
    pub wire: Option<Vec<WireRadiusRow>>,
    pub headline: Option<SensitivityReport>,
}

impl ReportBundle {
    /// Every stage with its default grid.
    pub fn compute(cfg: &SystemConfig) -> Result<Self> {
        let radii: Vec<f64> = (0..=45).map(|i| 1e-7 + 2e-8 * i as f64).collect();
        Ok(Self {
            fig2: Some(inductance::sweep(cfg, SweepVariable::QubitRadius, 1e-6, 1e-5, 91)?),
            fig3: Some(inductance::sweep(cfg, SweepVariable::SystemScale, 0.2, 2.0, 91)?),
            fig4: Some(cooling::cooling_curve(&CoolingParams::fig4(cfg)?, &cooling::log_grid(9.0, 91))?),
            wire: Some(estimation::wire_radius_sweep(cfg, &radii)?),
            headline: Some(estimation::sensitivity(cfg, &noise::full_budget(cfg)?)?),
        })
    }

    pub fn missing(&self) -> Vec<String> {
        [
            ("fig2", self.fig2.is_none()),
            ("fig3", self.fig3.is_none()),
            ("fig4", self.fig4.is_none()),
            ("wire_radius", self.wire.is_none()),
            ("headline", self.headline.is_none()),
        ]
        .into_iter()
        .filter(|(_, m)| *m)
        .map(|(n, _)| n.to_string())
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub figures: Vec<FigureEntry>,
    pub headline: SensitivityReport,
    /// Corrected per-root-Hz Δg/g.
    pub dg_over_g_prhz: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FigureEntry {
    pub figure: String,
    pub file: String,
    pub columns: Vec<String>,
}

/// Writes one CSV per figure plus `report.json` into `dir`.
pub fn emit_report(bundle: &ReportBundle, dir: &Path, manifest: &RunManifest) -> Result<Vec<PathBuf>> {
    let missing = bundle.missing();
    if !missing.is_empty() {
        return Err(Error::MissingStages(missing));
    }
    let (Some(f2), Some(f3), Some(f4), Some(wire), Some(head)) =
        (&bundle.fig2, &bundle.fig3, &bundle.fig4, &bundle.wire, &bundle.headline)
    else {
        unreachable!("checked above")
    };
    std::fs::create_dir_all(dir)?;
    let tables = [
        ("fig2", "fig2_lambda_vs_qubit_radius.csv", sweep_table(f2)),
        ("fig3", "fig3_lambda_vs_scale.csv", sweep_table(f3)),
        ("fig4", "fig4_cooling.csv", cooling_table(f4)),
        ("fig5", "fig5_wire_radius.csv", fig5_table(wire)),
        ("fig6", "fig6_wire_radius.csv", fig6_table(wire)),
    ];
    let mut paths: Vec<PathBuf> = tables.iter().map(|t| dir.join(t.1)).collect();
    let json = dir.join("report.json");
    paths.push(json.clone());
    let manifest = manifest.clone().with_outputs(paths.clone());
    let mut figures = vec![];
    for (fig, name, table) in &tables {
        write_csv_file(&dir.join(name), &manifest, table)?;
        figures.push(FigureEntry {
            figure: fig.to_string(),
            file: name.to_string(),
            columns: table.header.clone(),
        });
    }
    let summary = ReportSummary {
        figures,
        headline: head.clone(),
        dg_over_g_prhz: head.corrected_prhz,
    };
    write_json_file(&json, &manifest, &summary)?;
    Ok(paths)
}
