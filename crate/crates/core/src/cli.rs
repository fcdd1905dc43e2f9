//! The `levgrav` command line.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::calibration::{self, CalibrationParams, RecordDesign};
use crate::cooling::{self, CoolingParams};
use crate::error::{Error, Result};
use crate::estimation::{self, ProtocolSchedule};
use crate::inductance::{self, LambdaSchedule, SweepVariable};
use crate::magnetostatics;
use crate::model::{derive, load_config, parse_config, validate, SystemConfig, TABLE1_CFG};
use crate::noise;
use crate::report::{self, sci, RunManifest, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "levgrav", version, about = "Levitated superconducting ring gravimeter: design, budget and protocol simulation")]
pub struct Cli {
    /// Configuration file; the built-in reference configuration when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for artifacts.
    #[arg(long, global = true, default_value = "levgrav-out")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Print the JSON result on stdout instead of a text summary.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Configuration file (same as --config).
    #[arg(value_name = "CONFIG")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SweepVar {
    QubitRadius,
    SphereRadius,
    SystemScale,
    WireRadius,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Audit the reference table against recomputed values.
    Validate {
        #[command(flatten)]
        cfg: ConfigArg,
    },
    /// Derived chain, trap profile, coupling and λ schedule.
    Design {
        #[command(flatten)]
        cfg: ConfigArg,
        /// Points in the vertical force curve.
        #[arg(long, default_value_t = 201)]
        force_points: usize,
    },
    /// One-dimensional design sweep.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long, value_enum)]
        variable: SweepVar,
        #[arg(long)]
        min: f64,
        #[arg(long)]
        max: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Output CSV; `<out-dir>/sweep_<variable>.csv` by default.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Final resonator occupation against initial thermal occupation.
    Cool {
        #[command(flatten)]
        cfg: ConfigArg,
        /// N_th spans 1 to 10^decades.
        #[arg(long, default_value_t = 9.0)]
        decades: f64,
        #[arg(long, default_value_t = 91)]
        points: usize,
    },
    /// Noise budget, fidelity and the sensitivity ladder.
    Budget {
        #[command(flatten)]
        cfg: ConfigArg,
    },
    /// Monte Carlo of the phase-estimation protocol.
    Protocol {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long = "K", default_value_t = 10)]
        k: u32,
        #[arg(long, default_value_t = 1.0)]
        fidelity: f64,
        #[arg(long, default_value_t = 500)]
        trials: u64,
        /// Repeat every measurement ⌈1/f²⌉ times.
        #[arg(long)]
        inflate: bool,
        /// Simulate at the phase produced by this gravity (m/s²) instead of
        /// uniformly drawn phases.
        #[arg(long = "g-true")]
        g_true: Option<f64>,
    },
    /// Fit (ω_q, ω, λ) to a measurement record.
    Calibrate {
        #[command(flatten)]
        cfg: ConfigArg,
        /// CSV with columns t,sigma_x,shots,theta,phi. Without it a synthetic
        /// record at ω_q = 50ω, λ = 0.3ω is generated from --seed.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Every figure's data plus the headline sensitivity.
    Report {
        #[command(flatten)]
        cfg: ConfigArg,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Validate { .. } => "validate",
            Self::Design { .. } => "design",
            Self::Sweep { .. } => "sweep",
            Self::Cool { .. } => "cool",
            Self::Budget { .. } => "budget",
            Self::Protocol { .. } => "protocol",
            Self::Calibrate { .. } => "calibrate",
            Self::Report { .. } => "report",
        }
    }

    fn config_arg(&self) -> &ConfigArg {
        match self {
            Self::Validate { cfg }
            | Self::Design { cfg, .. }
            | Self::Sweep { cfg, .. }
            | Self::Cool { cfg, .. }
            | Self::Budget { cfg }
            | Self::Protocol { cfg, .. }
            | Self::Calibrate { cfg, .. }
            | Self::Report { cfg } => cfg,
        }
    }
}

/// Exit code for an error: 2 for configuration and validation failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::MissingField(_) | Error::InvalidField { .. } | Error::Parse { .. } => EXIT_VALIDATION,
        _ => EXIT_FAILURE,
    }
}

/// Parses `argv` and runs it, writing the summary to `out`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "levgrav {}: {e}", cli.command.name());
            exit_code(&e)
        }
    }
}

fn config_path(cli: &Cli) -> Result<Option<PathBuf>> {
    match (&cli.config, &cli.command.config_arg().path) {
        (Some(a), Some(b)) if a != b => Err(Error::InvalidField {
            field: "config".into(),
            reason: format!("given twice: {} and {}", a.display(), b.display()),
        }),
        (Some(a), _) => Ok(Some(a.clone())),
        (None, b) => Ok(b.clone()),
    }
}

fn load(path: Option<&Path>, err: &mut Vec<String>) -> Result<SystemConfig> {
    let loaded = match path {
        Some(p) => load_config(p).map_err(|e| match e {
            Error::Io(io) => Error::InvalidField {
                field: "config".into(),
                reason: format!("{}: {io}", p.display()),
            },
            other => other,
        })?,
        None => parse_config(TABLE1_CFG)?,
    };
    err.extend(loaded.warnings);
    Ok(loaded.config)
}

struct Ctx<'a> {
    cli: &'a Cli,
    path: Option<PathBuf>,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn manifest(&self, outputs: &[PathBuf]) -> RunManifest {
        RunManifest::new(self.cli.command.name(), self.path.as_deref(), Some(self.cli.seed))
            .with_outputs(outputs.iter().cloned())
    }

    fn file(&self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.cli.out_dir)?;
        Ok(self.cli.out_dir.join(name))
    }

    /// Writes the JSON document, then either echoes it or prints `text`.
    fn finish<T: Serialize>(&mut self, json: &Path, outputs: &[PathBuf], result: &T, text: &str) -> Result<()> {
        let m = self.manifest(outputs);
        report::write_json_file(json, &m, result)?;
        if self.cli.json {
            report::write_json(&mut *self.out, &m, result)?;
        } else {
            write!(self.out, "{text}")?;
            for p in outputs {
                writeln!(self.out, "wrote {}", p.display())?;
            }
        }
        Ok(())
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let path = config_path(cli)?;
    let mut warnings = vec![];
    let cfg = load(path.as_deref(), &mut warnings)?;
    let mut ctx = Ctx { cli, path, out };
    match &cli.command {
        Command::Validate { .. } => cmd_validate(&mut ctx, &cfg),
        Command::Design { force_points, .. } => cmd_design(&mut ctx, &cfg, *force_points, &warnings),
        Command::Sweep {
            variable,
            min,
            max,
            points,
            out,
            ..
        } => cmd_sweep(&mut ctx, &cfg, *variable, *min, *max, *points, out.clone()),
        Command::Cool { decades, points, .. } => cmd_cool(&mut ctx, &cfg, *decades, *points),
        Command::Budget { .. } => cmd_budget(&mut ctx, &cfg),
        Command::Protocol {
            k,
            fidelity,
            trials,
            inflate,
            g_true,
            ..
        } => cmd_protocol(&mut ctx, &cfg, *k, *fidelity, *trials, *inflate, *g_true),
        Command::Calibrate { input, .. } => cmd_calibrate(&mut ctx, &cfg, input.as_deref()),
        Command::Report { .. } => cmd_report(&mut ctx, &cfg),
    }
}

fn cmd_validate(ctx: &mut Ctx, cfg: &SystemConfig) -> Result<()> {
    let r = validate(cfg);
    let csv = ctx.file("validate.csv")?;
    let json = ctx.file("validate.json")?;
    let outputs = [csv.clone(), json.clone()];
    let mut t = Table::new(&["name", "pinned", "recomputed", "rel_dev"]);
    for row in &r.rows {
        t.rows.push(vec![row.name.clone(), sci(row.pinned), sci(row.recomputed), sci(row.rel_dev)]);
    }
    report::write_csv_file(&csv, &ctx.manifest(&outputs), &t)?;
    let mut text = String::new();
    for d in r.deviations(0.05) {
        text += &format!("deviation {:<24} pinned {} recomputed {} ({:.1}%)\n", d.name, sci(d.pinned), sci(d.recomputed), 100.0 * d.rel_dev);
    }
    for w in &r.warnings {
        text += &format!("warning: {w}\n");
    }
    text += &format!("{} rows audited, {} beyond 5%\n", r.rows.len(), r.deviations(0.05).len());
    ctx.finish(&json, &outputs, &r, &text)
}

#[derive(Serialize)]
struct DesignDoc {
    derived: crate::model::DerivedQuantities,
    trap: magnetostatics::TrapProfile,
    coupling: inductance::CouplingResult,
    schedule: Option<LambdaSchedule>,
    schedule_error: Option<String>,
    warnings: Vec<String>,
}

fn cmd_design(ctx: &mut Ctx, cfg: &SystemConfig, points: usize, warnings: &[String]) -> Result<()> {
    let d = derive(cfg)?;
    let trap = magnetostatics::trap_profile(cfg)?;
    let coupling = inductance::coupling_strength(cfg, d.i_qmax)?;
    let (schedule, schedule_error) = match LambdaSchedule::new(cfg, &d) {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut all_warnings = warnings.to_vec();
    all_warnings.extend(cfg.warnings().into_iter().filter(|w| !warnings.contains(w)));
    let doc = DesignDoc {
        derived: d,
        trap,
        coupling,
        schedule,
        schedule_error,
        warnings: all_warnings,
    };
    let csv = ctx.file("design_force.csv")?;
    let json = ctx.file("design.json")?;
    let outputs = [csv.clone(), json.clone()];
    let z = cfg.z_eq();
    let mut t = Table::new(&["z", "F_z"]);
    for (zi, f) in magnetostatics::force_curve(cfg, 0.9 * z, 1.1 * z, points) {
        t.push_numbers(&[zi, f]);
    }
    report::write_csv_file(&csv, &ctx.manifest(&outputs), &t)?;
    let tau = std::f64::consts::TAU;
    let mut text = format!(
        "omega/2pi = {} Hz ({:?})\nz0 = {} m\nlambda_max/2pi = {} Hz\nK = {}\ntau_exp = {} s\ntau_phi = {} s\n",
        sci(d.omega / tau),
        d.omega_mode,
        sci(d.z0),
        sci(d.lambda_max / tau),
        d.k,
        sci(d.tau_exp),
        sci(d.tau_phi)
    );
    if let Some(e) = &doc.schedule_error {
        text += &format!("schedule: {e}\n");
    }
    ctx.finish(&json, &outputs, &doc, &text)
}

fn cmd_sweep(
    ctx: &mut Ctx,
    cfg: &SystemConfig,
    var: SweepVar,
    min: f64,
    max: f64,
    points: usize,
    out: Option<PathBuf>,
) -> Result<()> {
    let name = match var {
        SweepVar::QubitRadius => "qubit_radius",
        SweepVar::SphereRadius => "sphere_radius",
        SweepVar::SystemScale => "system_scale",
        SweepVar::WireRadius => "wire_radius",
    };
    let csv = match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            p
        }
        None => ctx.file(&format!("sweep_{name}.csv"))?,
    };
    let json = ctx.file(&format!("sweep_{name}.json"))?;
    let outputs = [csv.clone(), json.clone()];
    let m = ctx.manifest(&outputs);
    if var == SweepVar::WireRadius {
        if !(min > 0.0 && max > min && points >= 2) {
            return Err(Error::Domain(format!("sweep needs 0 < min < max and at least 2 points (min = {min}, max = {max}, points = {points})")));
        }
        let radii: Vec<f64> = (0..points).map(|i| min + (max - min) * i as f64 / (points - 1) as f64).collect();
        let rows = estimation::wire_radius_sweep(cfg, &radii)?;
        let mut t = Table::new(&["a", "omega_hz", "ideal_prhz", "corrected_prhz", "tau_phi"]);
        for r in &rows {
            t.push_numbers(&[r.a, r.omega / std::f64::consts::TAU, r.ideal_prhz, r.corrected_prhz, r.tau_phi]);
        }
        report::write_csv_file(&csv, &m, &t)?;
        return ctx.finish(&json, &outputs, &rows, &format!("{} wire radii\n", rows.len()));
    }
    let v = match var {
        SweepVar::QubitRadius => SweepVariable::QubitRadius,
        SweepVar::SphereRadius => SweepVariable::SphereRadius,
        _ => SweepVariable::SystemScale,
    };
    let table = inductance::sweep(cfg, v, min, max, points)?;
    report::write_csv_file(&csv, &m, &report::sweep_table(&table))?;
    let best = table.argmax();
    let text = format!(
        "argmax {name} = {} with lambda/2pi = {} Hz\n",
        sci(best.x),
        sci(best.lambda / std::f64::consts::TAU)
    );
    ctx.finish(&json, &outputs, &table, &text)
}

#[derive(Serialize)]
struct CoolDoc {
    params: CoolingParams,
    at_1e3: cooling::CoolingResult,
    rows: Vec<cooling::CoolingRow>,
}

fn cmd_cool(ctx: &mut Ctx, cfg: &SystemConfig, decades: f64, points: usize) -> Result<()> {
    let p = CoolingParams::fig4(cfg)?;
    let rows = cooling::cooling_curve(&p, &cooling::log_grid(decades, points))?;
    let at = cooling::steady_state_occupation(&p, 1e3)?;
    let csv = ctx.file("cool.csv")?;
    let json = ctx.file("cool.json")?;
    let outputs = [csv.clone(), json.clone()];
    report::write_csv_file(&csv, &ctx.manifest(&outputs), &report::cooling_table(&rows))?;
    let last = rows.last().copied();
    let text = format!(
        "Gamma_cool = {} 1/s\nn_f(N_th = 1e3) = {}\nn_f(N_th = {}) = {}\n",
        sci(at.gamma_cool),
        sci(at.n_f),
        sci(last.map_or(0.0, |r| r.n_th)),
        sci(last.map_or(0.0, |r| r.n_f))
    );
    ctx.finish(&json, &outputs, &CoolDoc { params: p, at_1e3: at, rows }, &text)
}

#[derive(Serialize)]
struct BudgetDoc {
    budget: noise::NoiseBudget,
    sensitivity: estimation::SensitivityReport,
}

fn cmd_budget(ctx: &mut Ctx, cfg: &SystemConfig) -> Result<()> {
    let budget = noise::full_budget(cfg)?;
    let s = estimation::sensitivity(cfg, &budget)?;
    let csv = ctx.file("budget.csv")?;
    let json = ctx.file("budget.json")?;
    let outputs = [csv.clone(), json.clone()];
    let mut t = Table::new(&["channel", "power_w", "q", "gamma", "exponent"]);
    for (name, c) in budget.channels() {
        t.rows.push(vec![
            name.to_string(),
            c.power.map_or_else(|| "nan".to_string(), sci),
            sci(c.q),
            sci(c.gamma),
            sci(c.exponent),
        ]);
    }
    report::write_csv_file(&csv, &ctx.manifest(&outputs), &t)?;
    let text = format!(
        "fidelity f = {:.4}\nideal dg/g = {} Hz^-1/2\ncorrected dg/g = {} Hz^-1/2\ntau_phi = {} s\n",
        s.fidelity.total,
        sci(s.ideal_prhz),
        sci(s.corrected_prhz),
        sci(s.tau_phi)
    );
    ctx.finish(&json, &outputs, &BudgetDoc { budget, sensitivity: s }, &text)
}

#[derive(Serialize)]
struct ProtocolDoc {
    k: u32,
    n_resource: u128,
    fidelity: f64,
    repeats: u32,
    trials: u64,
    seed: u64,
    holevo_deviation: f64,
    holevo_in_pi_over_n: f64,
    median_error: f64,
    phi_true: Option<f64>,
    g_true: Option<f64>,
    g_estimate_median: Option<f64>,
    wall_time_s: f64,
}

fn cmd_protocol(
    ctx: &mut Ctx,
    cfg: &SystemConfig,
    k: u32,
    f: f64,
    trials: u64,
    inflate: bool,
    g_true: Option<f64>,
) -> Result<()> {
    let mut sched = ProtocolSchedule::standard(k)?;
    if inflate {
        sched = sched.inflated_for(f)?;
    }
    let (phi, d) = match g_true {
        Some(g) => {
            let d = derive(cfg)?;
            let phi = estimation::phase_for_gravity(cfg, &d, g);
            if !(0.0..std::f64::consts::TAU).contains(&phi) {
                return Err(Error::Domain(format!("g = {g} gives φ0 = {phi} rad outside [0, 2π)")));
            }
            (Some(phi), Some(d))
        }
        None => (None, None),
    };
    let start = Instant::now();
    let h = estimation::holevo_monte_carlo(&sched, f, trials, ctx.cli.seed, phi)?;
    let wall = start.elapsed().as_secs_f64();
    let g_est = d.as_ref().map(|d| {
        let mut e: Vec<f64> = h.trials.iter().map(|t| estimation::gravity_for_phase(cfg, d, t.estimate)).collect();
        e.sort_by(f64::total_cmp);
        e[e.len() / 2]
    });
    let csv = ctx.file("protocol_trials.csv")?;
    let json = ctx.file("protocol.json")?;
    let outputs = [csv.clone(), json.clone()];
    let mut t = Table::new(&["trial", "phi_true", "estimate", "error"]);
    for r in &h.trials {
        t.rows.push(vec![r.trial.to_string(), sci(r.phi_true), sci(r.estimate), sci(r.error)]);
    }
    report::write_csv_file(&csv, &ctx.manifest(&outputs), &t)?;
    let doc = ProtocolDoc {
        k,
        n_resource: h.n_resource,
        fidelity: f,
        repeats: h.repeats,
        trials,
        seed: ctx.cli.seed,
        holevo_deviation: h.deviation,
        holevo_in_pi_over_n: h.in_pi_over_n(),
        median_error: h.median_error,
        phi_true: phi,
        g_true,
        g_estimate_median: g_est,
        wall_time_s: wall,
    };
    let text = format!(
        "K = {k}, N = {}, trials = {trials}\nHolevo deviation = {} rad = {:.3} pi/N\n",
        h.n_resource,
        sci(h.deviation),
        h.in_pi_over_n()
    );
    ctx.finish(&json, &outputs, &doc, &text)
}

#[derive(Serialize)]
struct CalibrateDoc {
    fit: calibration::CalibrationFit,
    truth: Option<CalibrationParams>,
    samples: usize,
}

fn cmd_calibrate(ctx: &mut Ctx, cfg: &SystemConfig, input: Option<&Path>) -> Result<()> {
    let json = ctx.file("calibration.json")?;
    let mut outputs = vec![json.clone()];
    let rec = match input {
        Some(p) => calibration::read_record(std::fs::File::open(p)?)?,
        None => {
            let omega = derive(cfg)?.omega;
            let truth = CalibrationParams {
                omega_q: 50.0 * omega,
                omega,
                lambda: 0.3 * omega,
            };
            let rec = calibration::synthetic_record(&truth, &RecordDesign::default(), ctx.cli.seed);
            let csv = ctx.file("calibration_record.csv")?;
            outputs.insert(0, csv.clone());
            let m = ctx.manifest(&outputs);
            let mut buf = vec![];
            calibration::write_record(&rec, &mut buf)?;
            let mut f = std::io::BufWriter::new(std::fs::File::create(&csv)?);
            writeln!(f, "{}", m.header_line())?;
            f.write_all(&buf)?;
            rec
        }
    };
    let fit = calibration::fit_parameters(&rec)?;
    let text = format!(
        "omega_q = {} rad/s\nomega = {} rad/s\nlambda = {} rad/s\nresidual norm = {}\n",
        sci(fit.params.omega_q),
        sci(fit.params.omega),
        sci(fit.params.lambda),
        sci(fit.residual_norm)
    );
    let doc = CalibrateDoc {
        truth: rec.truth,
        samples: rec.samples.len(),
        fit,
    };
    ctx.finish(&json, &outputs, &doc, &text)
}

fn cmd_report(ctx: &mut Ctx, cfg: &SystemConfig) -> Result<()> {
    let bundle = report::ReportBundle::compute(cfg)?;
    let m = ctx.manifest(&[]);
    let paths = report::emit_report(&bundle, &ctx.cli.out_dir, &m)?;
    let head = bundle.headline.as_ref().expect("computed");
    if ctx.cli.json {
        let text = std::fs::read_to_string(paths.last().expect("report.json"))?;
        write!(ctx.out, "{text}")?;
    } else {
        writeln!(
            ctx.out,
            "dg/g = {} Hz^-1/2 (ideal {}, f = {:.4})",
            sci(head.corrected_prhz),
            sci(head.ideal_prhz),
            head.fidelity.total
        )?;
        for p in &paths {
            writeln!(ctx.out, "wrote {}", p.display())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_flag_is_usage_error() {
        let (mut o, mut e) = (vec![], vec![]);
        assert_eq!(run(["levgrav", "validate", "--bogus"], &mut o, &mut e), EXIT_USAGE);
        assert_eq!(run(["levgrav", "frobnicate"], &mut o, &mut e), EXIT_USAGE);
    }

    #[test]
    fn help_is_success() {
        let (mut o, mut e) = (vec![], vec![]);
        assert_eq!(run(["levgrav", "--help"], &mut o, &mut e), EXIT_OK);
    }
}
