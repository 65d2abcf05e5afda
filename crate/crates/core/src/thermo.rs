//! Otto-cycle thermodynamics of the driven soliton: stroke work and
//! irreversibility, cycle heats, efficiency and power, quantum-speed-limit
//! bounds and the cost-corrected figures of merit.
//!
//! A cycle is two interaction strokes (compression with `n_c` particles,
//! expansion with `n_e`) joined by instantaneous particle exchanges that act
//! as the hot and cold contacts. All energies are instantaneous: the stroke
//! work is `W = e(T_f) - e(0)` with the coupling evaluated at the same times.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gpe::{
    evolve, fidelity, instantaneous_eigenenergy, overlap_magnitude, prepare_ground_state,
    sech_wavefunction, Drive, EigenEnergy, EvolveSettings, Grid, GroundState, ObservableSeries,
    WaveFunction,
};
use crate::pulse::{
    adiabatic_reference_pulse, sta_pulse, tra_pulse, PulseKind, PulseProfile, StrokeConfig,
};
use crate::variational::{
    ansatz_energy, equilibrium_width, integrate_width_eom, EnergyBreakdown, SolitonParams,
};

const PI: f64 = std::f64::consts::PI;
const PI2: f64 = PI * PI;

/// Which dynamics to run a stroke with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Full split-step integration of the mean-field equation.
    #[default]
    Gpe,
    /// Sech-ansatz width dynamics; orders of magnitude cheaper.
    Variational,
}

impl Backend {
    pub fn label(&self) -> &'static str {
        match self {
            Backend::Gpe => "gpe",
            Backend::Variational => "variational",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gpe" => Ok(Backend::Gpe),
            "variational" => Ok(Backend::Variational),
            other => Err(Error::Parse(format!("unknown backend {other:?}"))),
        }
    }
}

/// State pair entering the Bures angle of a stroke. The second operand is
/// always the target ground state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BuresConvention {
    /// Angle between the state the dynamics actually reached and the target;
    /// vanishes in the adiabatic limit, which keeps the speed-limit bounds
    /// consistent with the measured efficiency everywhere.
    #[default]
    DynamicalFinal,
    /// Angle between the initial ground state and the target: a fixed
    /// geometric distance, independent of the protocol.
    Target,
}

/// Numerical knobs shared by every stroke of a run.
#[derive(Debug, Clone, Copy)]
pub struct SolverSettings {
    pub grid: Grid,
    /// Upper bound on the splitting step; `None` picks
    /// `min(1e-4, T_f/2000)`.
    pub dt: Option<f64>,
    /// Recorded observable samples per stroke.
    pub records: usize,
    pub bures: BuresConvention,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            grid: Grid::default(),
            dt: None,
            records: 101,
            bures: BuresConvention::default(),
        }
    }
}

impl SolverSettings {
    fn step_for(&self, duration: f64) -> f64 {
        self.dt.unwrap_or_else(|| (duration / 2000.0).min(1e-4))
    }
}

/// Memoized ground states, shared across strokes and sweep points. Keyed by
/// the exact bit patterns of the physical and grid parameters.
#[derive(Default)]
pub struct GroundStateCache {
    map: Mutex<HashMap<(u64, u64, u64, usize), Arc<GroundState>>>,
}

impl GroundStateCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, grid: Grid, g: f64, n: f64) -> Result<Arc<GroundState>> {
        let key = (g.to_bits(), n.to_bits(), grid.length.to_bits(), grid.points);
        if let Some(gs) = self.map.lock().unwrap().get(&key) {
            return Ok(gs.clone());
        }
        // solve outside the lock; a racing duplicate is wasteful but harmless
        let gs = Arc::new(prepare_ground_state(grid, g, n)?);
        Ok(self
            .map
            .lock()
            .unwrap()
            .entry(key)
            .or_insert(gs)
            .clone())
    }
}

/// Everything measured along one stroke.
#[derive(Debug, Clone)]
pub struct StrokeRecord {
    pub pulse: PulseProfile,
    pub backend: Backend,
    pub series: ObservableSeries,
    /// Stroke energy at t = 0 with the initial coupling.
    pub initial_energy: f64,
    /// Stroke energy at t = T_f with the final coupling.
    pub final_energy: f64,
    pub work: f64,
    /// Work of the ideal stroke: target ground-state energy minus the
    /// initial energy, both in this backend's energy functional.
    pub adiabatic_work: f64,
    /// `work - adiabatic_work`; nonnegative up to solver noise since the
    /// target ground state minimizes the final-coupling energy.
    pub irreversible_work: f64,
    /// Overlap fidelity of the reached state with the target ground state.
    pub fidelity: f64,
    /// Bures angle of the stroke, radians in `[0, pi/2]`.
    pub bures_angle: f64,
    /// Time-averaged excess eigenenergy of the shortcut over the
    /// time-rescaled ramp; zero for non-shortcut strokes.
    pub shortcut_energy: f64,
    /// State reached at t = T_f. For the variational backend this is the
    /// chirped ansatz sampled on the solver grid.
    pub final_state: WaveFunction,
}

/// Work done in the quasistatic limit: difference of equilibrium-ansatz
/// energies at the stroke's endpoint couplings.
pub fn adiabatic_work(cfg: &StrokeConfig) -> Result<f64> {
    let n = cfg.particle_number;
    let e = |g: f64| -> Result<f64> {
        let a = equilibrium_width(g, n)?;
        Ok(ansatz_energy(&SolitonParams::new(a, n, g)?).total)
    };
    Ok(e(cfg.g_final)? - e(cfg.g_initial)?)
}

/// Time-averaged eigenenergy excess of the shortcut ramp over the
/// time-rescaled ramp for the same stroke,
/// `(1/T_f) integral [e_0(g_sta(t)) - e_0(g_tra(t))] dt`.
///
/// Can be negative for very short strokes, where the shortcut dips to weaker
/// couplings than the rescaled ramp ever visits.
pub fn shortcut_energy(cfg: &StrokeConfig, sta: &PulseProfile) -> Result<f64> {
    let tra = tra_pulse(cfg)?;
    let n = cfg.particle_number;
    let eig = |g: f64| instantaneous_eigenenergy(g, n, EigenEnergy::Variational);
    let mut acc = 0.0;
    let mut prev = eig(sta.g_values[0])? - eig(tra.g_values[0])?;
    for k in 1..sta.times.len() {
        let cur = eig(sta.g_values[k])? - eig(tra.g_values[k])?;
        acc += 0.5 * (prev + cur) * (sta.times[k] - sta.times[k - 1]);
        prev = cur;
    }
    Ok(acc / cfg.duration)
}

fn design_pulse(cfg: &StrokeConfig, kind: PulseKind) -> Result<PulseProfile> {
    match kind {
        PulseKind::Sta => sta_pulse(cfg),
        PulseKind::Tra => tra_pulse(cfg),
        PulseKind::AdiabaticReference => adiabatic_reference_pulse(cfg),
    }
}

fn bures_angle(overlap: f64, n: f64) -> f64 {
    (overlap / n).clamp(0.0, 1.0).acos()
}

/// Runs one stroke: designs the ramp, propagates the initial ground state
/// under it and collects the thermodynamic record.
pub fn run_stroke(
    cfg: &StrokeConfig,
    kind: PulseKind,
    backend: Backend,
    settings: &SolverSettings,
    cache: &GroundStateCache,
) -> Result<StrokeRecord> {
    let pulse = design_pulse(cfg, kind)?;
    let e_sc = if kind == PulseKind::Sta { shortcut_energy(cfg, &pulse)? } else { 0.0 };

    let (series, fid, bures, final_state, target_energy) = match backend {
        Backend::Gpe => gpe_stroke(&pulse, settings, cache)?,
        Backend::Variational => variational_stroke(&pulse, settings)?,
    };

    let initial_energy = series.energies[0].total;
    let final_energy = series.energies.last().unwrap().total;
    let work = final_energy - initial_energy;
    let w_ad = target_energy - initial_energy;
    Ok(StrokeRecord {
        pulse,
        backend,
        series,
        initial_energy,
        final_energy,
        work,
        adiabatic_work: w_ad,
        irreversible_work: work - w_ad,
        fidelity: fid,
        bures_angle: bures,
        shortcut_energy: e_sc,
        final_state,
    })
}

fn gpe_stroke(
    pulse: &PulseProfile,
    settings: &SolverSettings,
    cache: &GroundStateCache,
) -> Result<(ObservableSeries, f64, f64, WaveFunction, f64)> {
    let n = pulse.config.particle_number;
    let g0 = pulse.g_values[0];
    let gf = *pulse.g_values.last().unwrap();
    let initial = cache.get(settings.grid, g0, n)?;
    let target = cache.get(settings.grid, gf, n)?;
    let evs = EvolveSettings {
        dt: settings.step_for(pulse.config.duration),
        records: settings.records,
    };
    let (final_wf, series) = evolve(&initial.wavefunction, Drive::Pulse(pulse), &evs)?;
    let fid = fidelity(&final_wf, &target.wavefunction)?;
    let from: &WaveFunction = match settings.bures {
        BuresConvention::DynamicalFinal => &final_wf,
        BuresConvention::Target => &initial.wavefunction,
    };
    let bures = bures_angle(overlap_magnitude(from, &target.wavefunction)?, n);
    Ok((series, fid, bures, final_wf, target.energy.total))
}

/// Variational stroke energy, including the flow kinetic term
/// `n pi^2 a'^2 / 24` of the breathing ansatz.
fn variational_energy(a: f64, v: f64, g: f64, n: f64) -> EnergyBreakdown {
    EnergyBreakdown::new(
        n / (6.0 * a * a) + n * PI2 * v * v / 24.0,
        n * PI2 * a * a / 24.0,
        g * n * n / (6.0 * a),
    )
}

fn variational_stroke(
    pulse: &PulseProfile,
    settings: &SolverSettings,
) -> Result<(ObservableSeries, f64, f64, WaveFunction, f64)> {
    let cfg = &pulse.config;
    let n = cfg.particle_number;
    let a0 = pulse.a_values[0];
    let a_target = *pulse.a_values.last().unwrap();
    let traj = integrate_width_eom(pulse, a0, 0.0, cfg.duration / 1e4)?;

    let mut series = ObservableSeries::default();
    let rms = PI / (2.0 * 3.0f64.sqrt());
    for (k, &t) in traj.times.iter().enumerate() {
        let (a, v) = (traj.widths[k], traj.velocities[k]);
        let e = variational_energy(a, v, pulse.g_values[k], n);
        let w = if k == 0 { 0.0 } else { e.total - series.energies[0].total };
        series.times.push(t);
        series.norms.push(n);
        series.energies.push(e);
        series.widths_rms.push(rms * a);
        series.work.push(w);
    }

    // overlaps of the chirped final ansatz, evaluated on the solver grid
    let last = traj.times.len() - 1;
    let (af, vf) = (traj.widths[last], traj.velocities[last]);
    let chirp = vf / (2.0 * af);
    let final_wf = sech_wavefunction(settings.grid, n, af, chirp)?;
    let target_wf = sech_wavefunction(settings.grid, n, a_target, 0.0)?;
    let initial_wf = sech_wavefunction(settings.grid, n, a0, 0.0)?;
    let fid = fidelity(&final_wf, &target_wf)?;
    let from = match settings.bures {
        BuresConvention::DynamicalFinal => &final_wf,
        BuresConvention::Target => &initial_wf,
    };
    let bures = bures_angle(overlap_magnitude(from, &target_wf)?, n);
    // the designed final coupling makes the target width its equilibrium
    let target_energy =
        variational_energy(a_target, 0.0, *pulse.g_values.last().unwrap(), n).total;
    Ok((series, fid, bures, final_wf, target_energy))
}

/// Full engine-cycle specification.
#[derive(Debug, Clone, Copy)]
pub struct CycleConfig {
    /// Coupling at the start of compression (negative).
    pub g_initial: f64,
    /// Coupling at the end of compression (negative, stronger).
    pub g_final: f64,
    /// Particles carried through compression.
    pub n_compression: f64,
    /// Particles carried through expansion (fewer than `n_compression` for
    /// an engine).
    pub n_expansion: f64,
    /// Duration of each stroke.
    pub duration: f64,
    pub kind: PulseKind,
    pub backend: Backend,
    /// Pulse samples per stroke.
    pub samples: usize,
}

impl CycleConfig {
    pub fn compression_stroke(&self) -> Result<StrokeConfig> {
        StrokeConfig::new(
            self.g_initial,
            self.g_final,
            self.n_compression,
            self.duration,
            self.samples,
        )
    }

    pub fn expansion_stroke(&self) -> Result<StrokeConfig> {
        StrokeConfig::new(
            self.g_final,
            self.g_initial,
            self.n_expansion,
            self.duration,
            self.samples,
        )
    }
}

/// Quantum-speed-limit bounds of a cycle. `qsl_time_*` and `p_qsl` are NaN
/// when the shortcut energy is not positive; `defined` records that.
#[derive(Debug, Clone, Copy)]
pub struct QslReport {
    pub bures_compression: f64,
    pub bures_expansion: f64,
    pub shortcut_energy_compression: f64,
    pub shortcut_energy_expansion: f64,
    pub qsl_time_compression: f64,
    pub qsl_time_expansion: f64,
    pub eta_qsl: f64,
    pub p_qsl: f64,
    pub defined: bool,
}

/// Speed-limit bounds from the two stroke records.
///
/// The minimal stroke time is the Bures angle over the time-averaged excess
/// energy of the shortcut; the efficiency bound adds the geometric term
/// `(B_c + B_e)/tau` to the extracted heat. Fails with an undefined-bound
/// error when a shortcut energy is not positive.
pub fn qsl_bounds(
    compression: &StrokeRecord,
    expansion: &StrokeRecord,
    q_minus: f64,
    cycle_time: f64,
) -> Result<QslReport> {
    let (bc, be) = (compression.bures_angle, expansion.bures_angle);
    let (ec, ee) = (compression.shortcut_energy, expansion.shortcut_energy);
    // bounds use the protocol-independent (equilibrium-ansatz) ideal works
    let w_ad = adiabatic_work(&compression.pulse.config)?
        + adiabatic_work(&expansion.pulse.config)?;
    let eta_qsl = -w_ad / (q_minus + (bc + be) / cycle_time);
    if ec <= 0.0 {
        return Err(Error::UndefinedBound { shortcut_energy: ec });
    }
    if ee <= 0.0 {
        return Err(Error::UndefinedBound { shortcut_energy: ee });
    }
    let tc = bc / ec;
    let te = be / ee;
    Ok(QslReport {
        bures_compression: bc,
        bures_expansion: be,
        shortcut_energy_compression: ec,
        shortcut_energy_expansion: ee,
        qsl_time_compression: tc,
        qsl_time_expansion: te,
        eta_qsl,
        p_qsl: -w_ad / (tc + te),
        defined: true,
    })
}

/// Cost-corrected efficiency and power: the shortcut's excess energy is
/// billed once as extra heat input and once as spent output.
pub fn cost_corrected(
    total_work: f64,
    q_minus: f64,
    shortcut_energy_total: f64,
    cycle_time: f64,
) -> (f64, f64) {
    let eta = -total_work / (q_minus + shortcut_energy_total);
    let p = -(total_work + shortcut_energy_total) / cycle_time;
    (eta, p)
}

/// One full cycle's thermodynamic output.
#[derive(Debug, Clone)]
pub struct CycleReport {
    pub config: CycleConfig,
    pub compression: StrokeRecord,
    pub expansion: StrokeRecord,
    pub total_work: f64,
    /// Heat extracted at the cold exchange (end of compression to start of
    /// expansion); positive when the cycle operates as an engine.
    pub q_minus: f64,
    /// Heat injected at the hot exchange.
    pub q_plus: f64,
    pub efficiency: f64,
    pub efficiency_adiabatic: f64,
    pub power: f64,
    /// True when net work is extracted and cold heat is positive.
    pub engine_valid: bool,
    pub qsl: QslReport,
    pub eta_cost: f64,
    pub p_cost: f64,
}

/// Runs compression then expansion and assembles the cycle bookkeeping.
///
/// The particle exchanges between strokes are instantaneous, so the heats
/// are fixed by the stroke-boundary energies and the first law
/// `W_c + W_e + Q_minus + Q_plus = 0` closes by construction.
pub fn run_cycle(
    cfg: &CycleConfig,
    settings: &SolverSettings,
    cache: &GroundStateCache,
) -> Result<CycleReport> {
    let comp_cfg = cfg.compression_stroke()?;
    let exp_cfg = cfg.expansion_stroke()?;
    if !(cfg.g_final < cfg.g_initial) {
        return Err(Error::Domain(format!(
            "compression must strengthen the coupling: g_final={} >= g_initial={}",
            cfg.g_final, cfg.g_initial
        )));
    }
    let compression = run_stroke(&comp_cfg, cfg.kind, cfg.backend, settings, cache)?;
    let expansion = run_stroke(&exp_cfg, cfg.kind, cfg.backend, settings, cache)?;

    let total_work = compression.work + expansion.work;
    let q_minus = expansion.initial_energy - compression.final_energy;
    let q_plus = compression.initial_energy - expansion.final_energy;
    let tau = 2.0 * cfg.duration;
    let efficiency = -total_work / q_minus;
    let power = -total_work / tau;
    let engine_valid = total_work < 0.0 && q_minus > 0.0;

    // the adiabatic reference cycle is backend independent: ideal works and
    // heats from the equilibrium-ansatz energies
    let w_ad = adiabatic_work(&comp_cfg)? + adiabatic_work(&exp_cfg)?;
    let q_minus_ad = adiabatic_boundary_energy(cfg.g_final, cfg.n_expansion)?
        - adiabatic_boundary_energy(cfg.g_final, cfg.n_compression)?;
    let efficiency_adiabatic = -w_ad / q_minus_ad;

    let qsl = match qsl_bounds(&compression, &expansion, q_minus, tau) {
        Ok(q) => q,
        Err(Error::UndefinedBound { .. }) => QslReport {
            bures_compression: compression.bures_angle,
            bures_expansion: expansion.bures_angle,
            shortcut_energy_compression: compression.shortcut_energy,
            shortcut_energy_expansion: expansion.shortcut_energy,
            qsl_time_compression: f64::NAN,
            qsl_time_expansion: f64::NAN,
            eta_qsl: -w_ad
                / (q_minus + (compression.bures_angle + expansion.bures_angle) / tau),
            p_qsl: f64::NAN,
            defined: false,
        },
        Err(e) => return Err(e),
    };
    let (eta_cost, p_cost) = cost_corrected(
        total_work,
        q_minus,
        compression.shortcut_energy + expansion.shortcut_energy,
        tau,
    );

    Ok(CycleReport {
        config: *cfg,
        compression,
        expansion,
        total_work,
        q_minus,
        q_plus,
        efficiency,
        efficiency_adiabatic,
        power,
        engine_valid,
        qsl,
        eta_cost,
        p_cost,
    })
}

fn adiabatic_boundary_energy(g: f64, n: f64) -> Result<f64> {
    let a = equilibrium_width(g, n)?;
    Ok(ansatz_energy(&SolitonParams::new(a, n, g)?).total)
}

/// One entry of a stroke-duration sweep.
pub struct SweepPoint {
    pub duration: f64,
    pub report: Result<CycleReport>,
}

/// Runs the cycle at each duration, optionally in parallel. Output order
/// matches the input durations; per-point failures are kept as errors so one
/// broken ramp does not sink the sweep.
pub fn sweep(
    cfg: &CycleConfig,
    durations: &[f64],
    settings: &SolverSettings,
    cache: &GroundStateCache,
    parallel: bool,
) -> Vec<SweepPoint> {
    let run = |&tf: &f64| {
        let point = CycleConfig { duration: tf, ..*cfg };
        SweepPoint { duration: tf, report: run_cycle(&point, settings, cache) }
    };
    if parallel {
        durations.par_iter().map(run).collect()
    } else {
        durations.iter().map(run).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn weak_cycle(kind: PulseKind, backend: Backend, tf: f64) -> CycleConfig {
        CycleConfig {
            g_initial: -0.1,
            g_final: -0.2,
            n_compression: 100.0,
            n_expansion: 90.0,
            duration: tf,
            kind,
            backend,
            samples: 401,
        }
    }

    #[test]
    fn adiabatic_work_frozen_values() {
        let c = StrokeConfig::new(-0.1, -0.2, 100.0, 0.15, 11).unwrap();
        assert_abs_diff_eq!(adiabatic_work(&c).unwrap(), -1251.23, epsilon = 0.01);
        let s = StrokeConfig::new(-0.2, -0.2646, 100.0, 0.15, 11).unwrap();
        assert_abs_diff_eq!(adiabatic_work(&s).unwrap(), -1250.72, epsilon = 0.01);
        // reversing a stroke flips the sign exactly
        let r = StrokeConfig::new(-0.2, -0.1, 100.0, 0.15, 11).unwrap();
        assert_abs_diff_eq!(
            adiabatic_work(&r).unwrap(),
            -adiabatic_work(&c).unwrap(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn adiabatic_efficiency_both_regimes() {
        // independent of dynamics, so any backend/duration works
        let settings = SolverSettings::default();
        let cache = GroundStateCache::new();
        let weak = run_cycle(
            &weak_cycle(PulseKind::Sta, Backend::Variational, 0.15),
            &settings,
            &cache,
        )
        .unwrap();
        assert_abs_diff_eq!(weak.efficiency_adiabatic, 0.74963, epsilon = 1e-4);

        let strong = CycleConfig {
            g_initial: -0.2,
            g_final: -0.2646,
            ..weak_cycle(PulseKind::Sta, Backend::Variational, 0.15)
        };
        let strong = run_cycle(&strong, &settings, &cache).unwrap();
        assert_abs_diff_eq!(strong.efficiency_adiabatic, 0.42864, epsilon = 1e-4);
    }

    #[test]
    fn first_law_closes_identically() {
        let settings = SolverSettings::default();
        let cache = GroundStateCache::new();
        for kind in [PulseKind::Sta, PulseKind::Tra] {
            let r = run_cycle(
                &weak_cycle(kind, Backend::Variational, 0.15),
                &settings,
                &cache,
            )
            .unwrap();
            let closure = r.compression.work + r.expansion.work + r.q_minus + r.q_plus;
            let scale = r.q_minus.abs().max(r.total_work.abs());
            assert!(closure.abs() < 1e-9 * scale, "first law residual {closure}");
        }
    }

    #[test]
    fn variational_shortcut_beats_rescaled_ramp() {
        let settings = SolverSettings::default();
        let cache = GroundStateCache::new();
        let sta = run_cycle(
            &weak_cycle(PulseKind::Sta, Backend::Variational, 0.15),
            &settings,
            &cache,
        )
        .unwrap();
        let tra = run_cycle(
            &weak_cycle(PulseKind::Tra, Backend::Variational, 0.15),
            &settings,
            &cache,
        )
        .unwrap();
        // the shortcut is exact for the ansatz dynamics
        assert!(sta.compression.fidelity > 0.9999, "F = {}", sta.compression.fidelity);
        assert!(
            sta.compression.irreversible_work.abs()
                < 0.1 * tra.compression.irreversible_work.abs()
        );
        assert!(sta.compression.fidelity > tra.compression.fidelity);
        assert!(sta.engine_valid);
    }

    #[test]
    fn gpe_cycle_short_stroke() {
        let settings = SolverSettings::default();
        let cache = GroundStateCache::new();
        let sta =
            run_cycle(&weak_cycle(PulseKind::Sta, Backend::Gpe, 0.15), &settings, &cache).unwrap();
        let tra =
            run_cycle(&weak_cycle(PulseKind::Tra, Backend::Gpe, 0.15), &settings, &cache).unwrap();
        assert!(sta.engine_valid);
        assert!(sta.compression.fidelity > tra.compression.fidelity);
        assert!(
            sta.compression.irreversible_work < tra.compression.irreversible_work,
            "STA {} vs TRA {}",
            sta.compression.irreversible_work,
            tra.compression.irreversible_work
        );
        assert!(sta.efficiency > tra.efficiency);
        // record sanity
        assert_eq!(sta.compression.series.times.len(), settings.records);
        assert!(sta.q_minus > 0.0 && sta.q_plus < 0.0);
    }

    #[test]
    fn cost_corrections_never_flatter_the_engine() {
        let settings = SolverSettings::default();
        let cache = GroundStateCache::new();
        let r = run_cycle(
            &weak_cycle(PulseKind::Sta, Backend::Variational, 1.0),
            &settings,
            &cache,
        )
        .unwrap();
        assert!(r.engine_valid);
        let e_total =
            r.compression.shortcut_energy + r.expansion.shortcut_energy;
        assert!(e_total > 0.0, "shortcut energy {e_total} not positive at this duration");
        assert!(r.eta_cost <= r.efficiency + 1e-12);
        assert!(r.p_cost <= r.power + 1e-12);
        assert!(r.qsl.defined);
        assert!(r.qsl.qsl_time_compression > 0.0 && r.qsl.qsl_time_expansion > 0.0);
    }

    #[test]
    fn undefined_bound_is_partial_not_fatal() {
        // at very short durations the shortcut energy goes negative
        let settings = SolverSettings::default();
        let cache = GroundStateCache::new();
        let r = run_cycle(
            &weak_cycle(PulseKind::Sta, Backend::Variational, 0.06),
            &settings,
            &cache,
        )
        .unwrap();
        if r.qsl.defined {
            // fall back to checking the error path directly
            let bad = StrokeRecord { shortcut_energy: -1.0, ..r.compression.clone() };
            assert!(matches!(
                qsl_bounds(&bad, &r.expansion, r.q_minus, 2.0 * 0.06),
                Err(Error::UndefinedBound { .. })
            ));
        } else {
            assert!(r.qsl.qsl_time_compression.is_nan());
            assert!(r.qsl.p_qsl.is_nan());
            assert!(r.qsl.eta_qsl.is_finite());
        }
    }

    #[test]
    fn cache_returns_shared_states() {
        let cache = GroundStateCache::new();
        let a = cache.get(Grid::default(), -0.1, 100.0).unwrap();
        let b = cache.get(Grid::default(), -0.1, 100.0).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        let c = cache.get(Grid::default(), -0.1, 90.0).unwrap();
        assert!(!Arc::ptr_eq(&a, &c));
    }

    #[test]
    fn sweep_preserves_order_and_parallel_agrees() {
        let cfg = weak_cycle(PulseKind::Sta, Backend::Variational, 0.0);
        let settings = SolverSettings::default();
        let cache = GroundStateCache::new();
        let durations = [0.3, 0.15, 0.6];
        let serial = sweep(&cfg, &durations, &settings, &cache, false);
        let parallel = sweep(&cfg, &durations, &settings, &cache, true);
        assert_eq!(serial.len(), 3);
        for (s, p) in serial.iter().zip(&parallel) {
            assert_eq!(s.duration, p.duration);
            let (sr, pr) = (s.report.as_ref().unwrap(), p.report.as_ref().unwrap());
            assert_relative_eq!(sr.efficiency, pr.efficiency, max_relative = 1e-12);
            assert_relative_eq!(sr.total_work, pr.total_work, max_relative = 1e-12);
        }
    }

    #[test]
    fn breakdown_surfaces_as_sweep_error() {
        let cfg = weak_cycle(PulseKind::Sta, Backend::Variational, 0.0);
        let settings = SolverSettings::default();
        let cache = GroundStateCache::new();
        let points = sweep(&cfg, &[0.01, 0.3], &settings, &cache, false);
        assert!(matches!(
            points[0].report,
            Err(Error::SolitonBreakdown { .. })
        ));
        assert!(points[1].report.is_ok());
    }
}
