//! On-disk formats: CSV for pulses, observable series and sweeps, JSON
//! summaries for strokes and cycles, and a raw binary dump for
//! wavefunctions. All floating-point text uses 17 significant digits so a
//! write/read round trip is bit exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde_json::json;

use crate::error::{Error, Result};
use crate::gpe::{Grid, ObservableSeries, WaveFunction};
use crate::pulse::{PulseKind, PulseProfile, StrokeConfig};
use crate::thermo::{CycleReport, StrokeRecord, SweepPoint};

/// Shortest representation that round-trips any finite f64.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub const SWEEP_HEADER: &str = "T_f,protocol,regime,W_C,W_E,Q_minus,Q_plus,eta,eta_AD,P,\
eta_QSL,P_QSL,eta_cost,P_cost,F_C,F_E,Wirr_C,Wirr_E";

/// Writes a designed pulse: one comment line carrying the stroke parameters,
/// then `t,g,a` rows.
pub fn write_pulse_csv(path: &Path, pulse: &PulseProfile) -> Result<()> {
    let c = &pulse.config;
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "# kind={} gi={} gf={} n={} tf={} samples={}",
        pulse.kind.label(),
        fmt(c.g_initial),
        fmt(c.g_final),
        fmt(c.particle_number),
        fmt(c.duration),
        c.samples
    )?;
    writeln!(w, "t,g,a")?;
    for k in 0..pulse.times.len() {
        writeln!(
            w,
            "{},{},{}",
            fmt(pulse.times[k]),
            fmt(pulse.g_values[k]),
            fmt(pulse.a_values[k])
        )?;
    }
    Ok(())
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad {what}: {s:?}")))
}

/// Reads a pulse written by [`write_pulse_csv`], bit exact.
pub fn read_pulse_csv(path: &Path) -> Result<PulseProfile> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty pulse file".into()))??;
    let header = header
        .strip_prefix("# ")
        .ok_or_else(|| Error::Parse("missing pulse parameter line".into()))?;

    let mut kind = None;
    let (mut gi, mut gf, mut n, mut tf, mut samples) = (None, None, None, None, None);
    for tok in header.split_whitespace() {
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header token {tok:?}")))?;
        match key {
            "kind" => kind = Some(PulseKind::parse(val)?),
            "gi" => gi = Some(parse_f64(val, "gi")?),
            "gf" => gf = Some(parse_f64(val, "gf")?),
            "n" => n = Some(parse_f64(val, "n")?),
            "tf" => tf = Some(parse_f64(val, "tf")?),
            "samples" => {
                samples =
                    Some(val.parse::<usize>().map_err(|_| {
                        Error::Parse(format!("bad samples: {val:?}"))
                    })?)
            }
            other => return Err(Error::Parse(format!("unknown header key {other:?}"))),
        }
    }
    let missing = || Error::Parse("incomplete pulse header".into());
    let config = StrokeConfig::new(
        gi.ok_or_else(missing)?,
        gf.ok_or_else(missing)?,
        n.ok_or_else(missing)?,
        tf.ok_or_else(missing)?,
        samples.ok_or_else(missing)?,
    )?;
    let kind = kind.ok_or_else(missing)?;

    let columns = lines
        .next()
        .ok_or_else(|| Error::Parse("missing column line".into()))??;
    if columns.trim() != "t,g,a" {
        return Err(Error::Parse(format!("unexpected columns {columns:?}")));
    }
    let (mut times, mut g_values, mut a_values) = (Vec::new(), Vec::new(), Vec::new());
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split(',');
        let mut next = |what: &str| -> Result<f64> {
            parse_f64(it.next().ok_or_else(|| Error::Parse(format!("short row {line:?}")))?, what)
        };
        times.push(next("t")?);
        g_values.push(next("g")?);
        a_values.push(next("a")?);
    }
    if times.len() != config.samples {
        return Err(Error::Parse(format!(
            "header says {} samples, file has {}",
            config.samples,
            times.len()
        )));
    }
    Ok(PulseProfile { kind, times, g_values, a_values, config })
}

/// Writes the observables recorded along a propagation.
pub fn write_series_csv(path: &Path, series: &ObservableSeries) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "t,norm,energy_total,energy_kinetic,energy_trap,energy_interaction,width_rms,work"
    )?;
    for k in 0..series.times.len() {
        let e = &series.energies[k];
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            fmt(series.times[k]),
            fmt(series.norms[k]),
            fmt(e.total),
            fmt(e.kinetic),
            fmt(e.trap),
            fmt(e.interaction),
            fmt(series.widths_rms[k]),
            fmt(series.work[k])
        )?;
    }
    Ok(())
}

fn stroke_json(r: &StrokeRecord) -> serde_json::Value {
    json!({
        "kind": r.pulse.kind.label(),
        "backend": r.backend.label(),
        "g_initial": r.pulse.config.g_initial,
        "g_final": r.pulse.config.g_final,
        "particle_number": r.pulse.config.particle_number,
        "duration": r.pulse.config.duration,
        "initial_energy": r.initial_energy,
        "final_energy": r.final_energy,
        "work": r.work,
        "adiabatic_work": r.adiabatic_work,
        "irreversible_work": r.irreversible_work,
        "fidelity": r.fidelity,
        "bures_angle": r.bures_angle,
        "shortcut_energy": r.shortcut_energy,
    })
}

/// Writes a single-stroke summary as JSON.
pub fn write_stroke_summary(path: &Path, record: &StrokeRecord) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &stroke_json(record))
        .map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

fn nan_safe(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        serde_json::Value::Null
    }
}

/// Writes a full cycle summary as JSON. Non-finite bound values (undefined
/// speed limits) are emitted as nulls.
pub fn write_cycle_summary(path: &Path, r: &CycleReport) -> Result<()> {
    let doc = json!({
        "config": {
            "g_initial": r.config.g_initial,
            "g_final": r.config.g_final,
            "n_compression": r.config.n_compression,
            "n_expansion": r.config.n_expansion,
            "duration": r.config.duration,
            "kind": r.config.kind.label(),
            "backend": r.config.backend.label(),
            "samples": r.config.samples,
        },
        "compression": stroke_json(&r.compression),
        "expansion": stroke_json(&r.expansion),
        "total_work": r.total_work,
        "q_minus": r.q_minus,
        "q_plus": r.q_plus,
        "efficiency": r.efficiency,
        "efficiency_adiabatic": r.efficiency_adiabatic,
        "power": r.power,
        "engine_valid": r.engine_valid,
        "eta_cost": r.eta_cost,
        "p_cost": r.p_cost,
        "qsl": {
            "bures_compression": r.qsl.bures_compression,
            "bures_expansion": r.qsl.bures_expansion,
            "shortcut_energy_compression": r.qsl.shortcut_energy_compression,
            "shortcut_energy_expansion": r.qsl.shortcut_energy_expansion,
            "qsl_time_compression": nan_safe(r.qsl.qsl_time_compression),
            "qsl_time_expansion": nan_safe(r.qsl.qsl_time_expansion),
            "eta_qsl": r.qsl.eta_qsl,
            "p_qsl": nan_safe(r.qsl.p_qsl),
            "defined": r.qsl.defined,
        },
    });
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

/// Writes a duration sweep. Failed points become comment rows so the table
/// stays rectangular.
pub fn write_sweep_csv(path: &Path, points: &[SweepPoint], regime: &str) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{SWEEP_HEADER}")?;
    for p in points {
        match &p.report {
            Ok(r) => {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    fmt(p.duration),
                    r.config.kind.label(),
                    regime,
                    fmt(r.compression.work),
                    fmt(r.expansion.work),
                    fmt(r.q_minus),
                    fmt(r.q_plus),
                    fmt(r.efficiency),
                    fmt(r.efficiency_adiabatic),
                    fmt(r.power),
                    fmt(r.qsl.eta_qsl),
                    fmt(r.qsl.p_qsl),
                    fmt(r.eta_cost),
                    fmt(r.p_cost),
                    fmt(r.compression.fidelity),
                    fmt(r.expansion.fidelity),
                    fmt(r.compression.irreversible_work),
                    fmt(r.expansion.irreversible_work)
                )?;
            }
            Err(e) => {
                writeln!(w, "# T_f={}: error[{}]: {}", fmt(p.duration), e.category(), e)?;
            }
        }
    }
    Ok(())
}

/// Raw little-endian dump: point count (u64), grid spacing (f64), then
/// interleaved re/im pairs.
pub fn write_wavefunction(path: &Path, wf: &WaveFunction) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&(wf.values.len() as u64).to_le_bytes())?;
    w.write_all(&wf.grid.dx().to_le_bytes())?;
    for v in &wf.values {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a dump produced by [`write_wavefunction`].
pub fn read_wavefunction(path: &Path) -> Result<WaveFunction> {
    let mut r = BufReader::new(File::open(path)?);
    let mut u = [0u8; 8];
    r.read_exact(&mut u)?;
    let points = u64::from_le_bytes(u) as usize;
    r.read_exact(&mut u)?;
    let dx = f64::from_le_bytes(u);
    if !(dx > 0.0) {
        return Err(Error::Parse(format!("bad grid spacing {dx}")));
    }
    let grid = Grid::new(points, dx * points as f64)?;
    let mut values = Vec::with_capacity(points);
    for _ in 0..points {
        r.read_exact(&mut u)?;
        let re = f64::from_le_bytes(u);
        r.read_exact(&mut u)?;
        let im = f64::from_le_bytes(u);
        values.push(Complex64::new(re, im));
    }
    Ok(WaveFunction { grid, values })
}
