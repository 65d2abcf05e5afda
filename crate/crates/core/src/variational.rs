//! Closed-form physics of the bright-soliton sech ansatz: energies, the
//! equilibrium width, the width equation of motion and its fictitious-particle
//! (perturbed Kepler) picture.
//!
//! Everything here works in harmonic-oscillator units with the trap frequency
//! fixed at 1, so the only parameters are the soliton width `a`, the particle
//! number `n` and the (attractive, negative) interaction strength `g`.

use crate::error::{Error, Result};
use crate::pulse::PulseProfile;

const PI2: f64 = std::f64::consts::PI * std::f64::consts::PI;

/// Parameters of the sech ansatz `A sech(x/a)` with `A = sqrt(n/(2a))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonParams {
    /// Soliton width, harmonic-oscillator length units. Strictly positive.
    pub width: f64,
    /// Number of particles in the soliton. Strictly positive.
    pub particle_number: f64,
    /// Interaction strength; negative in every supported flow.
    pub interaction: f64,
}

impl SolitonParams {
    pub fn new(width: f64, particle_number: f64, interaction: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::Domain(format!("soliton width must be positive, got {width}")));
        }
        if !(particle_number > 0.0) {
            return Err(Error::Domain(format!(
                "particle number must be positive, got {particle_number}"
            )));
        }
        Ok(Self { width, particle_number, interaction })
    }

    /// Amplitude of the normalized ansatz, `sqrt(n/(2a))`.
    pub fn amplitude(&self) -> f64 {
        (self.particle_number / (2.0 * self.width)).sqrt()
    }
}

/// Energy of a state split into its three contributions (units of the trap
/// quantum). `total` is always the sum of the other three.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub trap: f64,
    pub interaction: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(kinetic: f64, trap: f64, interaction: f64) -> Self {
        Self { kinetic, trap, interaction, total: kinetic + trap + interaction }
    }
}

/// Closed-form energy of the sech ansatz.
///
/// Kinetic `n/(6a^2)`, trap `n pi^2 a^2/24`, interaction `g n^2/(6a)`. The
/// interaction term uses the `+g/2 * |psi|^4` convention, so attractive
/// couplings give a negative contribution.
pub fn ansatz_energy(p: &SolitonParams) -> EnergyBreakdown {
    let a = p.width;
    let n = p.particle_number;
    let g = p.interaction;
    EnergyBreakdown::new(n / (6.0 * a * a), n * PI2 * a * a / 24.0, g * n * n / (6.0 * a))
}

fn check_coupling(g: f64, n: f64) -> Result<()> {
    if !(g < 0.0) {
        return Err(Error::Domain(format!("interaction must be negative, got {g}")));
    }
    if !(n > 0.0) {
        return Err(Error::Domain(format!("particle number must be positive, got {n}")));
    }
    Ok(())
}

/// Equilibrium soliton width in the trap: the positive root of
/// `a^4 - 2 g n a / pi^2 = 4 / pi^2`.
///
/// The quartic's left-hand side is strictly increasing in `a` for attractive
/// couplings, so the smallest bracketed root is the unique one; it is the
/// root continuously connected to the weak-trap estimate `-2/(g n)`.
pub fn equilibrium_width(g: f64, n: f64) -> Result<f64> {
    check_coupling(g, n)?;
    let f = |a: f64| a.powi(4) - 2.0 * g * n * a / PI2 - 4.0 / PI2;

    const LO: f64 = 1e-4;
    const HI: f64 = 10.0;
    let mut lo = LO;
    let mut hi = lo;
    // Scan outward for a sign change; f(0+) < 0 always.
    loop {
        hi *= 1.5;
        if hi > HI {
            return Err(Error::NoRoot { lo: LO, hi: HI, g, n });
        }
        if f(hi) > 0.0 {
            break;
        }
        lo = hi;
    }
    // Bisection; the interval shrinks well past 1e-12 relative.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo) < 1e-15 * mid {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Weak-trap estimate of the equilibrium width, `-2/(n g)`.
pub fn weak_trap_width(g: f64, n: f64) -> Result<f64> {
    check_coupling(g, n)?;
    Ok(-2.0 / (n * g))
}

/// Potential of the fictitious classical particle describing the width,
/// `U(a) = 2 g n / (pi^2 a) + 2 / (pi^2 a^2)`.
pub fn kepler_potential(a: f64, g: f64, n: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("width must be positive, got {a}")));
    }
    Ok(2.0 * g * n / (PI2 * a) + 2.0 / (PI2 * a * a))
}

/// Acceleration of the soliton width:
/// `a'' = -a + 4/(pi^2 a^3) + 2 g n/(pi^2 a^2)`.
pub fn width_eom_rhs(a: f64, g: f64, n: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("width must be positive, got {a}")));
    }
    Ok(-a + 4.0 / (PI2 * a * a * a) + 2.0 * g * n / (PI2 * a * a))
}

/// Width and velocity samples produced by [`integrate_width_eom`], on the
/// same time grid as the driving pulse.
#[derive(Debug, Clone)]
pub struct WidthTrajectory {
    pub times: Vec<f64>,
    pub widths: Vec<f64>,
    pub velocities: Vec<f64>,
}

impl WidthTrajectory {
    /// Energy of the fictitious unit-mass particle, `v^2/2 + a^2/2 + U(a)`.
    pub fn fictitious_energy(&self, g: f64, n: f64, index: usize) -> Result<f64> {
        let a = self.widths[index];
        let v = self.velocities[index];
        Ok(0.5 * v * v + 0.5 * a * a + kepler_potential(a, g, n)?)
    }
}

/// Integrates the width equation of motion under a sampled pulse `g(t)` with
/// a classical fixed-step 4th-order scheme, reporting the state on the
/// pulse's own time grid. `dt` is an upper bound on the internal step; each
/// grid interval is subdivided evenly so that samples land exactly on grid
/// nodes.
pub fn integrate_width_eom(
    pulse: &PulseProfile,
    a0: f64,
    v0: f64,
    dt: f64,
) -> Result<WidthTrajectory> {
    if !(a0 > 0.0) {
        return Err(Error::Domain(format!("initial width must be positive, got {a0}")));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    let n = pulse.config.particle_number;
    integrate_width_eom_fn(|t| pulse.g_at(t), n, a0, v0, &pulse.times, dt)
}

/// Same integrator with an arbitrary coupling function; used internally and
/// by tests that drive the equation with a closed-form `g(t)`.
pub fn integrate_width_eom_fn<F: Fn(f64) -> f64>(
    g_of_t: F,
    n: f64,
    a0: f64,
    v0: f64,
    grid: &[f64],
    dt: f64,
) -> Result<WidthTrajectory> {
    let mut widths = Vec::with_capacity(grid.len());
    let mut velocities = Vec::with_capacity(grid.len());
    let mut a = a0;
    let mut v = v0;
    widths.push(a);
    velocities.push(v);

    let rhs = |a: f64, g: f64| -> Result<f64> {
        if !(a > 0.0) {
            // caller reports the time
            return Err(Error::Domain(String::new()));
        }
        Ok(-a + 4.0 / (PI2 * a * a * a) + 2.0 * g * n / (PI2 * a * a))
    };

    for w in grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let span = t1 - t0;
        let steps = (span / dt).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for s in 0..steps {
            let t = t0 + s as f64 * h;
            let step = || -> Result<(f64, f64)> {
                let g0 = g_of_t(t);
                let gm = g_of_t(t + 0.5 * h);
                let g1 = g_of_t(t + h);
                let k1a = v;
                let k1v = rhs(a, g0)?;
                let k2a = v + 0.5 * h * k1v;
                let k2v = rhs(a + 0.5 * h * k1a, gm)?;
                let k3a = v + 0.5 * h * k2v;
                let k3v = rhs(a + 0.5 * h * k2a, gm)?;
                let k4a = v + h * k3v;
                let k4v = rhs(a + h * k3a, g1)?;
                Ok((
                    a + h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a),
                    v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
                ))
            };
            let (na, nv) = step().map_err(|_| Error::AnsatzCollapse { t, width: a })?;
            if !(na > 0.0) || !na.is_finite() {
                return Err(Error::AnsatzCollapse { t: t + h, width: na });
            }
            a = na;
            v = nv;
        }
        widths.push(a);
        velocities.push(v);
    }

    Ok(WidthTrajectory { times: grid.to_vec(), widths, velocities })
}
