//! Non-adaptive binary-doubling phase estimation: the measurement schedule,
//! noisy-coin Monte Carlo, the stage-wise likelihood estimator, Holevo
//! scoring and the closed-form sensitivity ladder.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::dynamics::{fidelity_breakdown, DephasingWindow, FidelityBreakdown};
use crate::error::{Error, Result};
use crate::inductance::coupling_strength;
use crate::model::{derive, DerivedQuantities, OmegaMode, SystemConfig};
use crate::noise::{self, NoiseBudget};

/// Hedging parameter β_h of the per-stage proposal.
pub const HEDGE: f64 = 0.5;
/// Hypotheses kept between stages.
pub const BEAM_WIDTH: usize = 4;
const MAX_K: u32 = 120;
const STAGE0_GRID: usize = 512;
const STAGE_GRID: usize = 256;
const REFINE_POINTS: usize = 21;
const REFINE_ITERS: usize = 4;

/// How the M(K,k) measurements of a stage are spread over basis offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OffsetRule {
    /// One measurement at each θ_j = jπ/M, j = 0..M.
    #[default]
    Spread,
    /// ⌈M/2⌉ at θ = 0 and ⌊M/2⌋ at θ = π/M.
    TwoBasis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSchedule {
    pub k: u32,
    pub m_k: u32,
    pub mu: u32,
    /// M(K,k) for k = 0..=K.
    pub counts: Vec<u32>,
    /// Every measurement is repeated this many times.
    pub repeats: u32,
    pub offset_rule: OffsetRule,
}

impl ProtocolSchedule {
    pub fn new(k: u32, m_k: u32, mu: u32) -> Result<Self> {
        if k > MAX_K {
            return Err(Error::Domain(format!("K = {k} exceeds {MAX_K}")));
        }
        if m_k == 0 {
            return Err(Error::Domain("M_K must be positive".into()));
        }
        Ok(Self {
            k,
            m_k,
            mu,
            counts: (0..=k).map(|s| m_k + mu * (k - s)).collect(),
            repeats: 1,
            offset_rule: OffsetRule::default(),
        })
    }

    /// M_K = 2, μ = 3.
    pub fn standard(k: u32) -> Result<Self> {
        Self::new(k, 2, 3)
    }

    pub fn with_repeats(mut self, repeats: u32) -> Self {
        self.repeats = repeats.max(1);
        self
    }

    /// Repeats every measurement ⌈1/f²⌉ times.
    pub fn inflated_for(self, f: f64) -> Result<Self> {
        check_fidelity(f)?;
        let r = (1.0 / (f * f) - 1e-9).ceil();
        Ok(self.with_repeats(r as u32))
    }

    pub fn with_offset_rule(mut self, rule: OffsetRule) -> Self {
        self.offset_rule = rule;
        self
    }

    pub fn stages(&self) -> usize {
        self.counts.len()
    }

    /// (⌈M/2⌉, ⌊M/2⌋): measurements in the ±x basis and the π/M basis.
    pub fn basis_split(&self, stage: u32) -> (u32, u32) {
        let m = self.counts[stage as usize];
        (m.div_ceil(2), m / 2)
    }

    /// (θ, shots) pairs for a stage.
    pub fn offsets(&self, stage: u32) -> Vec<(f64, u32)> {
        let m = self.counts[stage as usize];
        let step = PI / m as f64;
        match self.offset_rule {
            OffsetRule::Spread => (0..m).map(|j| (j as f64 * step, self.repeats)).collect(),
            OffsetRule::TwoBasis => {
                let (a, b) = self.basis_split(stage);
                let mut v = vec![(0.0, a * self.repeats)];
                if b > 0 {
                    v.push((step, b * self.repeats));
                }
                v
            }
        }
    }

    /// N = Σ_k M(K,k)·2^k in units of φ0.
    pub fn n_resource(&self) -> u128 {
        self.counts.iter().enumerate().map(|(s, &m)| (m as u128) << s).sum()
    }

    /// Number of runs in one cycle.
    pub fn total_shots(&self) -> u64 {
        self.counts.iter().map(|&m| m as u64 * self.repeats as u64).sum()
    }
}

/// Closed form 5·2^(K+1) − 3K − 8 for M_K = 2, μ = 3.
pub fn n_closed_form(k: u32) -> u128 {
    5 * (1u128 << (k + 1)) - 3 * k as u128 - 8
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub offset: f64,
    pub shots: u32,
    pub heads: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub center: f64,
    pub width: f64,
}

impl Arc {
    pub fn contains(&self, phi: f64) -> bool {
        angle_diff(phi, self.center).abs() <= self.width / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub k: u32,
    pub tallies: Vec<Tally>,
    /// Hedged-MLE estimate of 2^k φ0 mod 2π from this stage alone.
    pub stage_phase: f64,
    pub arc: Arc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEstimate {
    pub phi_true: f64,
    pub fidelity: f64,
    pub stages: Vec<StageRecord>,
    pub estimate: f64,
    pub final_arc: Arc,
}

impl PhaseEstimate {
    /// φ_true − φ̂0 wrapped to (−π, π].
    pub fn error(&self) -> f64 {
        angle_diff(self.phi_true, self.estimate)
    }
}

/// a − b wrapped to (−π, π].
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

fn check_fidelity(f: f64) -> Result<()> {
    if f == 0.0 {
        return Err(Error::EstimationImpossible(
            "fidelity 0: outcomes carry no information about the phase".into(),
        ));
    }
    if !(f > 0.0 && f <= 1.0) {
        return Err(Error::Domain(format!("fidelity must lie in [0, 1], got {f}")));
    }
    Ok(())
}

fn stage_ll(x: f64, tallies: &[Tally], f: f64, hedge: f64) -> f64 {
    let (s, c) = x.sin_cos();
    tallies
        .iter()
        .map(|t| {
            let (so, co) = t.offset.sin_cos();
            let cv = f * (c * co - s * so);
            let h = t.heads as f64 + hedge;
            let m = (t.shots - t.heads) as f64 + hedge;
            let mut v = 0.0;
            if h > 0.0 {
                v += h * (0.5 * (1.0 + cv)).max(1e-300).ln();
            }
            if m > 0.0 {
                v += m * (0.5 * (1.0 - cv)).max(1e-300).ln();
            }
            v
        })
        .sum()
}

fn joint_ll(phi: f64, data: &[Vec<Tally>], upto: usize, f: f64) -> f64 {
    data[..=upto]
        .iter()
        .enumerate()
        .map(|(k, t)| stage_ll((k as f64).exp2() * phi, t, f, 0.0))
        .sum()
}

fn refine(center: f64, data: &[Vec<Tally>], upto: usize, f: f64, mut w: f64) -> (f64, f64) {
    let mut best = center;
    let mut best_v = f64::NEG_INFINITY;
    for _ in 0..REFINE_ITERS {
        let c = best;
        for i in 0..REFINE_POINTS {
            let x = c - w + 2.0 * w * i as f64 / (REFINE_POINTS - 1) as f64;
            let v = joint_ll(x, data, upto, f);
            if v > best_v {
                best_v = v;
                best = x;
            }
        }
        w /= 8.0;
    }
    (best, best_v)
}

fn grid_argmax(points: usize, tallies: &[Tally], f: f64) -> f64 {
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..points {
        let x = TAU * i as f64 / points as f64;
        let v = stage_ll(x, tallies, f, HEDGE);
        if v > best.1 {
            best = (x, v);
        }
    }
    best.0
}

/// Estimates φ0 from per-stage tallies with known fidelity `f`.
///
/// Returns the estimate in [0, 2π) together with each stage's hedged-MLE
/// phase and arc.
pub fn estimate_phase(data: &[Vec<Tally>], f: f64) -> Result<(f64, Vec<(f64, Arc)>)> {
    check_fidelity(f)?;
    if data.is_empty() {
        return Err(Error::EstimationImpossible("no stages".into()));
    }
    let x0 = grid_argmax(STAGE0_GRID, &data[0], f);
    let mut beam = vec![refine(x0, data, 0, f, TAU / STAGE0_GRID as f64)];
    let mut stages = vec![(x0, Arc { center: beam[0].0.rem_euclid(TAU), width: TAU / 3.0 })];
    for k in 1..data.len() {
        let scale = (k as f64).exp2();
        let xk = grid_argmax(STAGE_GRID, &data[k], f);
        let mut cands = Vec::with_capacity(3 * beam.len());
        for &(p, _) in &beam {
            let j0 = ((p * scale - xk) / TAU).round();
            for j in [j0 - 1.0, j0, j0 + 1.0] {
                cands.push(refine((xk + TAU * j) / scale, data, k, f, PI / scale));
            }
        }
        cands.sort_by(|a, b| b.1.total_cmp(&a.1));
        beam.clear();
        for c in cands {
            if beam.iter().all(|d: &(f64, f64)| angle_diff(c.0, d.0).abs() > 1e-3 / scale) {
                beam.push(c);
                if beam.len() == BEAM_WIDTH {
                    break;
                }
            }
        }
        let best = beam[0].0;
        let j = ((best * scale - xk) / TAU).round();
        let center = ((xk + TAU * j) / scale).rem_euclid(TAU);
        stages.push((xk, Arc { center, width: TAU / (3.0 * scale) }));
    }
    Ok((beam[0].0.rem_euclid(TAU), stages))
}

fn draw_tallies<R: Rng>(phi: f64, f: f64, sched: &ProtocolSchedule, rng: &mut R) -> Vec<Vec<Tally>> {
    (0..=sched.k)
        .map(|k| {
            let x = (k as f64).exp2() * phi;
            sched
                .offsets(k)
                .into_iter()
                .map(|(offset, shots)| {
                    let p = 0.5 * (1.0 + f * (x + offset).cos());
                    let heads = (0..shots).filter(|_| rng.random::<f64>() < p).count() as u32;
                    Tally { offset, shots, heads }
                })
                .collect()
        })
        .collect()
}

fn cycle_with<R: Rng>(phi: f64, f: f64, sched: &ProtocolSchedule, rng: &mut R) -> Result<PhaseEstimate> {
    let data = draw_tallies(phi, f, sched, rng);
    let (estimate, arcs) = estimate_phase(&data, f)?;
    let stages = data
        .into_iter()
        .zip(arcs)
        .enumerate()
        .map(|(k, (tallies, (stage_phase, arc)))| StageRecord {
            k: k as u32,
            tallies,
            stage_phase,
            arc,
        })
        .collect();
    Ok(PhaseEstimate {
        phi_true: phi,
        fidelity: f,
        stages,
        estimate,
        final_arc: Arc {
            center: estimate,
            width: TAU / (3.0 * (sched.k as f64).exp2()),
        },
    })
}

/// One full estimation cycle at true phase `phi` with outcome probability
/// (1 + f cos(2^k φ + θ))/2.
pub fn simulate_cycle(phi: f64, f: f64, sched: &ProtocolSchedule, seed: u64) -> Result<PhaseEstimate> {
    check_fidelity(f)?;
    if !(0.0..TAU).contains(&phi) {
        return Err(Error::Domain(format!("phase must lie in [0, 2π), got {phi}")));
    }
    cycle_with(phi, f, sched, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream of trial `i`: ChaCha8 seeded with seed ⊕ splitmix64(i).
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ splitmix64(trial))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub phi_true: f64,
    pub estimate: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolevoSummary {
    pub k: u32,
    pub n_resource: u128,
    pub fidelity: f64,
    pub repeats: u32,
    pub seed: u64,
    /// √(|⟨e^{i(φ − φ̂)}⟩|⁻² − 1).
    pub deviation: f64,
    pub median_error: f64,
    pub trials: Vec<TrialRecord>,
}

impl HolevoSummary {
    /// Deviation in units of π/N.
    pub fn in_pi_over_n(&self) -> f64 {
        self.deviation * self.n_resource as f64 / PI
    }
}

pub fn holevo_deviation(errors: &[f64]) -> f64 {
    let n = errors.len() as f64;
    let (s, c) = errors.iter().fold((0.0, 0.0), |(s, c), e| (s + e.sin(), c + e.cos()));
    let r2 = (s * s + c * c) / (n * n);
    (1.0 / r2 - 1.0).max(0.0).sqrt()
}

/// Monte Carlo over `trials` cycles. φ_true is uniform on [0, 2π) unless
/// `phi` is given. Trials run in parallel; results do not depend on the
/// thread count.
pub fn holevo_monte_carlo(
    sched: &ProtocolSchedule,
    f: f64,
    trials: u64,
    seed: u64,
    phi: Option<f64>,
) -> Result<HolevoSummary> {
    check_fidelity(f)?;
    if trials == 0 {
        return Err(Error::Domain("at least one trial is needed".into()));
    }
    if let Some(p) = phi {
        if !(0.0..TAU).contains(&p) {
            return Err(Error::Domain(format!("phase must lie in [0, 2π), got {p}")));
        }
    }
    let records = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let phi_true = phi.unwrap_or_else(|| rng.random::<f64>() * TAU);
            let est = cycle_with(phi_true, f, sched, &mut rng)?;
            Ok(TrialRecord {
                trial: i,
                phi_true,
                estimate: est.estimate,
                error: est.error(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let errors: Vec<f64> = records.iter().map(|r| r.error).collect();
    let mut sorted = errors.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median_error = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };
    Ok(HolevoSummary {
        k: sched.k,
        n_resource: sched.n_resource(),
        fidelity: f,
        repeats: sched.repeats,
        seed,
        deviation: holevo_deviation(&errors),
        median_error,
        trials: records,
    })
}

/// φ0 = 2mg l0 τ/ħ for gravity `g`, with ω_qτ already subtracted.
pub fn phase_for_gravity(cfg: &SystemConfig, d: &DerivedQuantities, g: f64) -> f64 {
    2.0 * d.mass * g * d.l0 * d.tau / cfg.constants.hbar
}

/// Inverse of [`phase_for_gravity`].
pub fn gravity_for_phase(cfg: &SystemConfig, d: &DerivedQuantities, phi: f64) -> f64 {
    phi * cfg.constants.hbar / (2.0 * d.mass * d.l0 * d.tau)
}

/// Smallest K with 2^K ≥ α = 2mg l_max/ħω.
pub fn required_k(alpha: f64) -> u32 {
    alpha.log2().ceil().max(0.0) as u32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub k: u32,
    /// log2 α, the lower bound on K.
    pub k_lower_bound: f64,
    pub n_resource: u128,
    /// 2π/N.
    pub dphi0: f64,
    pub l0: f64,
    pub lambda0: f64,
    pub alpha: f64,
    /// ħω/(2mg l0 N).
    pub dg_over_g_cycle: f64,
    /// ħω/(20 mg l_max).
    pub dg_over_g_limit: f64,
    pub tau_exp: f64,
    pub tau_phi: f64,
    /// τ_φ/f², the cycle time with the inflated measurement counts.
    pub tau_phi_corrected: f64,
    pub ideal_prhz: f64,
    pub corrected_prhz: f64,
    /// (1/10α)·√(3τ_exp/2)·log2 α.
    pub asymptotic_prhz: f64,
    pub fidelity: FidelityBreakdown,
}

pub fn sensitivity(cfg: &SystemConfig, budget: &NoiseBudget) -> Result<SensitivityReport> {
    let d = derive(cfg)?;
    Ok(sensitivity_with(cfg, &d, budget, DephasingWindow::default()))
}

pub fn sensitivity_with(
    cfg: &SystemConfig,
    d: &DerivedQuantities,
    budget: &NoiseBudget,
    window: DephasingWindow,
) -> SensitivityReport {
    let c = &cfg.constants;
    let fid = fidelity_breakdown(cfg, d, d.l_max, budget.gamma_total, window);
    let n = n_closed_form(d.k);
    let mg = d.mass * c.g;
    let limit = c.hbar * d.omega / (20.0 * mg * d.l_max);
    let root = d.tau_phi.sqrt();
    SensitivityReport {
        k: d.k,
        k_lower_bound: d.alpha.log2(),
        n_resource: n,
        dphi0: TAU / n as f64,
        l0: d.l0,
        lambda0: d.lambda0,
        alpha: d.alpha,
        dg_over_g_cycle: c.hbar * d.omega / (2.0 * mg * d.l0 * n as f64),
        dg_over_g_limit: limit,
        tau_exp: d.tau_exp,
        tau_phi: d.tau_phi,
        tau_phi_corrected: d.tau_phi / (fid.total * fid.total),
        ideal_prhz: limit * root,
        corrected_prhz: c.hbar * d.omega / (10.0 * fid.total * mg * d.l_max) * root,
        asymptotic_prhz: (1.5 * d.tau_exp).sqrt() * d.alpha.log2() / (10.0 * d.alpha),
        fidelity: fid,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireRadiusRow {
    pub a: f64,
    pub omega: f64,
    pub mass: f64,
    pub l_max: f64,
    pub k: u32,
    pub fidelity: f64,
    pub ideal_prhz: f64,
    pub corrected_prhz: f64,
    pub tau_phi: f64,
    pub tau_phi_corrected: f64,
}

/// `cfg` with resonator wire radius `a` and everything downstream rescaled.
///
/// With a pinned trap frequency the point is anchored to the pinned values:
/// ω ∝ (m L_r)^(−1/2) and λ_max ∝ m^(−1/4) L_r^(−3/4), with L_r scaled by the
/// ratio of formula inductances. Without pins ω and λ_max come from the
/// geometry directly.
pub fn config_for_wire_radius(cfg: &SystemConfig, a: f64) -> Result<SystemConfig> {
    if !(a > 0.0 && a < cfg.ring.radius) {
        return Err(Error::Domain(format!(
            "wire radius {a:.3e} m must lie in (0, R_r = {:.3e} m)",
            cfg.ring.radius
        )));
    }
    let d_ref = derive(cfg)?;
    let mut out = cfg.clone();
    out.ring.wire_radius = a;
    let mu0 = cfg.constants.mu0;
    match d_ref.omega_mode {
        OmegaMode::Pinned => {
            let l_ratio = out.ring.formula_inductance(mu0) / cfg.ring.formula_inductance(mu0);
            let m_ratio = out.mass() / cfg.mass();
            let omega = d_ref.omega / (m_ratio * l_ratio).sqrt();
            let lambda_max = d_ref.lambda_max * m_ratio.powf(-0.25) * l_ratio.powf(-0.75);
            let z0 = (cfg.constants.hbar / (2.0 * out.mass() * omega)).sqrt();
            out.pins.trap_frequency_hz = Some(omega / TAU);
            out.pins.resonator_inductance = cfg.pins.resonator_inductance.map(|l| l * l_ratio);
            out.l_max = lambda_max * z0 / omega;
        }
        OmegaMode::Geometric => {
            let d = derive(&out)?;
            let lambda = coupling_strength(&out, d.i_qmax)?.lambda;
            out.l_max = d.displacement(lambda);
        }
    }
    out.reference.clear();
    Ok(out)
}

/// Ideal and error-corrected sensitivity against resonator wire radius.
pub fn wire_radius_sweep(cfg: &SystemConfig, radii: &[f64]) -> Result<Vec<WireRadiusRow>> {
    radii
        .par_iter()
        .map(|&a| {
            let c = config_for_wire_radius(cfg, a)?;
            let d = derive(&c)?;
            let b = noise::full_budget(&c)?;
            let s = sensitivity_with(&c, &d, &b, DephasingWindow::default());
            Ok(WireRadiusRow {
                a,
                omega: d.omega,
                mass: d.mass,
                l_max: d.l_max,
                k: d.k,
                fidelity: s.fidelity.total,
                ideal_prhz: s.ideal_prhz,
                corrected_prhz: s.corrected_prhz,
                tau_phi: s.tau_phi,
                tau_phi_corrected: s.tau_phi_corrected,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_examples() {
        let s = ProtocolSchedule::standard(0).unwrap();
        assert_eq!(s.counts, vec![2]);
        assert_eq!(s.n_resource(), 2);
        let s = ProtocolSchedule::standard(2).unwrap();
        assert_eq!(s.counts, vec![8, 5, 2]);
        assert_eq!(s.n_resource(), 26);
        assert_eq!(n_closed_form(31), 5 * (1u128 << 32) - 101);
        assert_eq!(ProtocolSchedule::standard(31).unwrap().n_resource(), n_closed_form(31));
    }

    #[test]
    fn offsets_cover_counts() {
        let s = ProtocolSchedule::standard(4).unwrap();
        let two = s.clone().with_offset_rule(OffsetRule::TwoBasis);
        for k in 0..=4 {
            let m = s.counts[k as usize];
            assert_eq!(s.offsets(k).iter().map(|o| o.1).sum::<u32>(), m);
            assert_eq!(two.offsets(k).iter().map(|o| o.1).sum::<u32>(), m);
            let (a, b) = s.basis_split(k);
            assert_eq!(a + b, m);
        }
    }

    #[test]
    fn inflation_factor() {
        let s = ProtocolSchedule::standard(3).unwrap().inflated_for(0.25).unwrap();
        assert_eq!(s.repeats, 16);
        assert_eq!(s.total_shots(), 16 * (3 * 9 + 7 * 3 + 4) / 2);
    }

    #[test]
    fn zero_fidelity_is_explicit() {
        let s = ProtocolSchedule::standard(3).unwrap();
        assert!(matches!(simulate_cycle(1.0, 0.0, &s, 1), Err(Error::EstimationImpossible(_))));
        assert!(matches!(simulate_cycle(1.0, 1.5, &s, 1), Err(Error::Domain(_))));
        assert!(matches!(simulate_cycle(TAU, 1.0, &s, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn perfect_fidelity_at_zero() {
        for k in [0, 3, 7] {
            let s = ProtocolSchedule::standard(k).unwrap();
            for seed in 0..5 {
                let e = simulate_cycle(0.0, 1.0, &s, seed).unwrap();
                assert!(e.final_arc.contains(0.0), "K={k} seed={seed} {}", e.estimate);
                assert!((0.0..TAU).contains(&e.estimate));
                assert_eq!(e.final_arc.width, TAU / (3.0 * (k as f64).exp2()));
            }
        }
    }

    #[test]
    fn reproducible() {
        let s = ProtocolSchedule::standard(5).unwrap();
        assert_eq!(simulate_cycle(2.0, 0.8, &s, 42).unwrap(), simulate_cycle(2.0, 0.8, &s, 42).unwrap());
        let a = holevo_monte_carlo(&s, 1.0, 20, 9, None).unwrap();
        let b = holevo_monte_carlo(&s, 1.0, 20, 9, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn holevo_of_exact_estimates() {
        assert_eq!(holevo_deviation(&[0.0; 10]), 0.0);
        let e = [0.1, -0.1];
        let want = (1.0 / 0.1f64.cos().powi(2) - 1.0).sqrt();
        assert!((holevo_deviation(&e) - want).abs() < 1e-12);
    }

    #[test]
    fn small_k_heisenberg_bound() {
        let s = ProtocolSchedule::standard(6).unwrap();
        let h = holevo_monte_carlo(&s, 1.0, 300, 3, None).unwrap();
        assert!(h.in_pi_over_n() < 3.0, "{}", h.in_pi_over_n());
    }

    #[test]
    fn table1_ladder() {
        let cfg = SystemConfig::table1();
        let b = noise::full_budget(&cfg).unwrap();
        let s = sensitivity(&cfg, &b).unwrap();
        assert!((s.tau_exp / 87.8e-6 - 1.0).abs() < 1e-3, "{}", s.tau_exp);
        assert!((s.corrected_prhz / 2.21e-10 - 1.0).abs() < 0.1, "{}", s.corrected_prhz);
        assert!((s.corrected_prhz / s.ideal_prhz - 2.0 / s.fidelity.total).abs() < 1e-12);
        assert!(s.corrected_prhz >= s.ideal_prhz);
        assert_eq!(s.k, required_k(s.alpha));
    }

    #[test]
    fn wire_sweep_anchor() {
        let cfg = SystemConfig::table1();
        let rows = wire_radius_sweep(&cfg, &[cfg.ring.wire_radius]).unwrap();
        let s = sensitivity(&cfg, &noise::full_budget(&cfg).unwrap()).unwrap();
        assert!((rows[0].corrected_prhz / s.corrected_prhz - 1.0).abs() < 1e-12);
        assert!((rows[0].ideal_prhz / s.ideal_prhz - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gravity_phase_roundtrip() {
        let cfg = SystemConfig::table1();
        let d = derive(&cfg).unwrap();
        let phi = phase_for_gravity(&cfg, &d, cfg.constants.g);
        assert!(phi > 0.0 && phi < TAU);
        assert!((gravity_for_phase(&cfg, &d, phi) / cfg.constants.g - 1.0).abs() < 1e-14);
    }
}
