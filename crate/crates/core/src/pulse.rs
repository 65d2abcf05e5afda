//! Interaction-strength ramp design for a single stroke: the smooth
//! adiabatic reference, the inverse-engineered shortcut ramp obtained from a
//! quintic width trajectory, and the time-rescaled adiabatic baseline.

use crate::error::{Error, Result};
use crate::variational::{equilibrium_width, weak_trap_width};

const PI: f64 = std::f64::consts::PI;
const PI2: f64 = PI * PI;

/// The sech ansatz loses meaning once `|g n|` drops to this value; designed
/// pulses that cross it are rejected.
pub const BREAKDOWN_GN: f64 = 1.0;

/// Parameters of one compression or expansion stroke.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrokeConfig {
    /// Coupling at t = 0 (negative).
    pub g_initial: f64,
    /// Coupling at t = T_f (negative, different from `g_initial`).
    pub g_final: f64,
    /// Particle number held fixed during the stroke.
    pub particle_number: f64,
    /// Stroke duration T_f.
    pub duration: f64,
    /// Number of samples on the uniform time grid (>= 2).
    pub samples: usize,
}

/// Default time-grid density; resolves the fastest ramp features studied.
pub const DEFAULT_SAMPLES: usize = 1001;

impl StrokeConfig {
    pub fn new(
        g_initial: f64,
        g_final: f64,
        particle_number: f64,
        duration: f64,
        samples: usize,
    ) -> Result<Self> {
        if !(g_initial < 0.0) || !(g_final < 0.0) {
            return Err(Error::Domain(format!(
                "couplings must be negative, got g_initial={g_initial}, g_final={g_final}"
            )));
        }
        if g_initial == g_final {
            return Err(Error::Domain("g_initial and g_final must differ".into()));
        }
        if !(particle_number > 0.0) {
            return Err(Error::Domain(format!(
                "particle number must be positive, got {particle_number}"
            )));
        }
        if !(duration > 0.0) {
            return Err(Error::Domain(format!("duration must be positive, got {duration}")));
        }
        if samples < 2 {
            return Err(Error::Domain(format!("need at least 2 samples, got {samples}")));
        }
        Ok(Self { g_initial, g_final, particle_number, duration, samples })
    }

    /// Uniform time grid `t_k = k T_f / (M-1)`.
    pub fn time_grid(&self) -> Vec<f64> {
        let m = self.samples;
        (0..m).map(|k| self.duration * k as f64 / (m - 1) as f64).collect()
    }
}

/// Which ramp a profile realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseKind {
    Sta,
    Tra,
    AdiabaticReference,
}

impl PulseKind {
    pub fn label(&self) -> &'static str {
        match self {
            PulseKind::Sta => "STA",
            PulseKind::Tra => "TRA",
            PulseKind::AdiabaticReference => "ADIABATIC_REFERENCE",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "STA" | "sta" => Ok(PulseKind::Sta),
            "TRA" | "tra" => Ok(PulseKind::Tra),
            "ADIABATIC_REFERENCE" => Ok(PulseKind::AdiabaticReference),
            other => Err(Error::Parse(format!("unknown pulse kind {other:?}"))),
        }
    }
}

/// Choice of endpoint widths for the quintic trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EndpointWidths {
    /// `-2/(n g)` at both ends; the construction the studied ramps use.
    #[default]
    WeakTrap,
    /// Exact positive root of the width quartic; endpoint couplings then
    /// match `g_initial`/`g_final` exactly.
    ExactQuartic,
}

/// Quintic width trajectory `a_p(t) = sum_i c_i t^i` over `[0, T_f]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialTrajectory {
    pub coefficients: [f64; 6],
    pub duration: f64,
}

impl PolynomialTrajectory {
    pub fn value(&self, t: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn velocity(&self, t: f64) -> f64 {
        let c = &self.coefficients;
        (1..6).rev().fold(0.0, |acc, i| acc * t + i as f64 * c[i])
    }

    pub fn acceleration(&self, t: f64) -> f64 {
        let c = &self.coefficients;
        (2..6).rev().fold(0.0, |acc, i| acc * t + (i * (i - 1)) as f64 * c[i])
    }
}

/// A designed ramp sampled on the stroke's uniform time grid, together with
/// the width trajectory that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseProfile {
    pub kind: PulseKind,
    pub times: Vec<f64>,
    pub g_values: Vec<f64>,
    pub a_values: Vec<f64>,
    pub config: StrokeConfig,
}

impl PulseProfile {
    /// Coupling at an arbitrary time by cubic Hermite interpolation between
    /// samples (centered-difference slopes, one-sided at the ends). Times
    /// outside `[0, T_f]` are clamped.
    pub fn g_at(&self, t: f64) -> f64 {
        interp_cubic(&self.times, &self.g_values, t)
    }

    /// Width at an arbitrary time, same interpolation.
    pub fn a_at(&self, t: f64) -> f64 {
        interp_cubic(&self.times, &self.a_values, t)
    }

    /// Smallest `|g(t) n|` over the sampled grid.
    pub fn min_abs_gn(&self) -> f64 {
        let n = self.config.particle_number;
        self.g_values.iter().map(|g| (g * n).abs()).fold(f64::INFINITY, f64::min)
    }
}

fn interp_cubic(times: &[f64], values: &[f64], t: f64) -> f64 {
    let m = times.len();
    debug_assert!(m >= 2);
    let t0 = times[0];
    let h = times[1] - times[0];
    let x = ((t - t0) / h).clamp(0.0, (m - 1) as f64);
    let j = (x.floor() as usize).min(m - 2);
    let s = x - j as f64;
    let p0 = values[j];
    let p1 = values[j + 1];
    // slopes in units of the grid spacing
    let m0 = if j == 0 { p1 - p0 } else { 0.5 * (p1 - values[j - 1]) };
    let m1 = if j + 2 == m { p1 - p0 } else { 0.5 * (values[j + 2] - p0) };
    let s2 = s * s;
    let s3 = s2 * s;
    p0 * (2.0 * s3 - 3.0 * s2 + 1.0)
        + m0 * (s3 - 2.0 * s2 + s)
        + p1 * (-2.0 * s3 + 3.0 * s2)
        + m1 * (s3 - s2)
}

/// Smooth adiabatic reference ramp
/// `g_c(t) = (g_i+g_f)/2 + 9(g_i-g_f)cos(pi t/T_f)/16 + (g_f-g_i)cos(3 pi t/T_f)/16`.
///
/// Endpoints match `g_initial`/`g_final` and the first and second time
/// derivatives vanish at both ends.
pub fn reference_ramp(cfg: &StrokeConfig, t: f64) -> Result<f64> {
    if !(0.0..=cfg.duration).contains(&t) {
        return Err(Error::Domain(format!(
            "t = {t} outside [0, {}]",
            cfg.duration
        )));
    }
    let (gi, gf) = (cfg.g_initial, cfg.g_final);
    // pin the endpoints so they hold bit-exactly, not just to rounding error
    if t == 0.0 {
        return Ok(gi);
    }
    if t == cfg.duration {
        return Ok(gf);
    }
    let phase = PI * t / cfg.duration;
    Ok((gi + gf) / 2.0 + 9.0 * (gi - gf) * phase.cos() / 16.0
        + (gf - gi) * (3.0 * phase).cos() / 16.0)
}

fn endpoint_width(g: f64, n: f64, endpoints: EndpointWidths) -> Result<f64> {
    match endpoints {
        EndpointWidths::WeakTrap => weak_trap_width(g, n),
        EndpointWidths::ExactQuartic => equilibrium_width(g, n),
    }
}

/// Solves the 6x6 boundary-value system for the quintic width trajectory:
/// value match at both ends, zero first and second derivatives at both ends,
/// with endpoint widths taken from the weak-trap relation.
pub fn design_quintic(cfg: &StrokeConfig) -> Result<PolynomialTrajectory> {
    design_quintic_with(cfg, EndpointWidths::WeakTrap)
}

/// Like [`design_quintic`] with an explicit endpoint-width convention.
pub fn design_quintic_with(
    cfg: &StrokeConfig,
    endpoints: EndpointWidths,
) -> Result<PolynomialTrajectory> {
    let n = cfg.particle_number;
    let a_i = endpoint_width(cfg.g_initial, n, endpoints)?;
    let a_f = endpoint_width(cfg.g_final, n, endpoints)?;
    let tf = cfg.duration;

    // rows: a(0), a'(0), a''(0), a(Tf), a'(Tf), a''(Tf)
    let mut m = [[0.0f64; 6]; 6];
    let mut rhs = [a_i, 0.0, 0.0, a_f, 0.0, 0.0];
    m[0][0] = 1.0;
    m[1][1] = 1.0;
    m[2][2] = 2.0;
    for i in 0..6 {
        m[3][i] = tf.powi(i as i32);
        if i >= 1 {
            m[4][i] = i as f64 * tf.powi(i as i32 - 1);
        }
        if i >= 2 {
            m[5][i] = (i * (i - 1)) as f64 * tf.powi(i as i32 - 2);
        }
    }
    solve6(&mut m, &mut rhs)?;
    Ok(PolynomialTrajectory { coefficients: rhs, duration: tf })
}

/// Gaussian elimination with partial pivoting for the fixed-size boundary
/// system.
fn solve6(m: &mut [[f64; 6]; 6], rhs: &mut [f64; 6]) -> Result<()> {
    for col in 0..6 {
        let pivot = (col..6)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col].abs() < 1e-300 {
            return Err(Error::SingularSystem);
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..6 {
            let f = m[row][col] / m[col][col];
            for k in col..6 {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    for col in (0..6).rev() {
        rhs[col] /= m[col][col];
        for row in 0..col {
            rhs[row] -= m[row][col] * rhs[col];
        }
    }
    Ok(())
}

/// Inverts the width equation of motion along a designed trajectory:
/// `g(t) = [pi^2 a^2 (a'' + a) - 4/a] / (2 n)`, sampled on the stroke grid.
///
/// Fails with a soliton-breakdown error if any sample leaves the attractive
/// regime or drops to `|g n| <= 1`.
pub fn invert_to_pulse(traj: &PolynomialTrajectory, cfg: &StrokeConfig) -> Result<PulseProfile> {
    let n = cfg.particle_number;
    let times = cfg.time_grid();
    let mut g_values = Vec::with_capacity(times.len());
    let mut a_values = Vec::with_capacity(times.len());
    for &t in &times {
        let a = traj.value(t);
        if !(a > 0.0) {
            return Err(Error::AnsatzCollapse { t, width: a });
        }
        let acc = traj.acceleration(t);
        let g = (PI2 * a * a * (acc + a) - 4.0 / a) / (2.0 * n);
        if g >= -BREAKDOWN_GN / n {
            return Err(Error::SolitonBreakdown { t, gn: (g * n).abs() });
        }
        g_values.push(g);
        a_values.push(a);
    }
    Ok(PulseProfile { kind: PulseKind::Sta, times, g_values, a_values, config: *cfg })
}

/// Designs the full shortcut ramp for a stroke: quintic trajectory plus
/// inversion.
pub fn sta_pulse(cfg: &StrokeConfig) -> Result<PulseProfile> {
    invert_to_pulse(&design_quintic(cfg)?, cfg)
}

/// Time-rescaled adiabatic baseline: the smooth reference ramp compressed to
/// the stroke duration, with widths following the instantaneous equilibrium.
pub fn tra_pulse(cfg: &StrokeConfig) -> Result<PulseProfile> {
    sampled_reference(cfg, PulseKind::Tra)
}

/// The reference ramp itself, tagged as the adiabatic-limit profile.
pub fn adiabatic_reference_pulse(cfg: &StrokeConfig) -> Result<PulseProfile> {
    sampled_reference(cfg, PulseKind::AdiabaticReference)
}

fn sampled_reference(cfg: &StrokeConfig, kind: PulseKind) -> Result<PulseProfile> {
    let times = cfg.time_grid();
    let mut g_values = Vec::with_capacity(times.len());
    let mut a_values = Vec::with_capacity(times.len());
    for &t in &times {
        let g = reference_ramp(cfg, t)?;
        if g >= -BREAKDOWN_GN / cfg.particle_number {
            return Err(Error::SolitonBreakdown { t, gn: (g * cfg.particle_number).abs() });
        }
        g_values.push(g);
        a_values.push(equilibrium_width(g, cfg.particle_number)?);
    }
    Ok(PulseProfile { kind, times, g_values, a_values, config: *cfg })
}
