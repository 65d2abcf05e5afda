//! Command-line front end: designs ramps, runs strokes and cycles, sweeps
//! stroke durations. Every invocation writes its artifacts plus a
//! `manifest.json` into the output directory.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use feshbach_engine::error::{Error, Result};
use feshbach_engine::gpe::Grid;
use feshbach_engine::io;
use feshbach_engine::pulse::{sta_pulse, tra_pulse, PulseKind, StrokeConfig};
use feshbach_engine::thermo::{
    run_cycle, run_stroke, sweep, Backend, CycleConfig, GroundStateCache, SolverSettings,
};

#[derive(Parser)]
#[command(
    name = "feshbach-engine",
    version,
    about = "Soliton heat engine: ramp design, stroke and cycle simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a coupling ramp and write it as CSV.
    Design(Common),
    /// Run a single stroke and record work, fidelity and observables.
    Stroke(Common),
    /// Run a full two-stroke cycle.
    Cycle(Common),
    /// Run the cycle over a list of stroke durations.
    Sweep(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Design(_) => "design",
            Command::Stroke(_) => "stroke",
            Command::Cycle(_) => "cycle",
            Command::Sweep(_) => "sweep",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Design(c) | Command::Stroke(c) | Command::Cycle(c) | Command::Sweep(c) => c,
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Initial coupling (negative).
    #[arg(long, allow_negative_numbers = true)]
    gi: Option<f64>,
    /// Final coupling (negative).
    #[arg(long, allow_negative_numbers = true)]
    gf: Option<f64>,
    /// Particle number for design/stroke.
    #[arg(long)]
    n: Option<f64>,
    /// Compression-stroke particle number (cycle/sweep).
    #[arg(long)]
    nc: Option<f64>,
    /// Expansion-stroke particle number (cycle/sweep).
    #[arg(long)]
    ne: Option<f64>,
    /// Stroke duration; a comma-separated list for sweep.
    #[arg(long)]
    tf: Option<String>,
    /// Ramp kind: sta or tra.
    #[arg(long)]
    kind: Option<String>,
    /// Dynamics backend: gpe or variational.
    #[arg(long)]
    backend: Option<String>,
    /// Spatial grid points (power of two).
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    /// Box length.
    #[arg(long = "grid-l")]
    grid_l: Option<f64>,
    /// Splitting time step; defaults to min(1e-4, T_f/2000).
    #[arg(long)]
    dt: Option<f64>,
    /// Pulse samples per stroke.
    #[arg(long)]
    samples: Option<usize>,
    /// Run sweep points concurrently; optional value caps the worker count.
    #[arg(long, num_args = 0..=1, default_missing_value = "0")]
    parallel: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value file supplying defaults for any flag above.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Fully merged parameters: flags beat the config file, which beats the
/// built-in defaults.
#[derive(Debug, Clone)]
struct Resolved {
    gi: f64,
    gf: f64,
    n: f64,
    nc: f64,
    ne: f64,
    tf: Vec<f64>,
    kind: PulseKind,
    backend: Backend,
    grid: Grid,
    dt: Option<f64>,
    samples: usize,
    /// None: serial. Some(0): all cores. Some(w): w workers.
    parallel: Option<usize>,
    out: PathBuf,
}

fn read_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, val) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!("config line {} is not key=value: {line:?}", lineno + 1))
        })?;
        map.insert(key.trim().to_string(), val.trim().to_string());
    }
    Ok(map)
}

fn parse_typed<T: std::str::FromStr>(s: &str, key: &str) -> Result<T> {
    s.parse::<T>()
        .map_err(|_| Error::Parse(format!("bad value for {key}: {s:?}")))
}

fn resolve(common: &Common) -> Result<Resolved> {
    let mut file = match &common.config {
        Some(path) => read_config_file(path)?,
        None => HashMap::new(),
    };
    const KNOWN: &[&str] = &[
        "gi", "gf", "n", "nc", "ne", "tf", "kind", "backend", "grid_n", "grid_l", "dt",
        "samples", "parallel", "out",
    ];
    if let Some(bad) = file.keys().find(|k| !KNOWN.contains(&k.as_str())) {
        return Err(Error::Parse(format!("unknown config key {bad:?}")));
    }

    macro_rules! pick {
        ($flag:expr, $key:literal, $default:expr) => {
            match (&$flag, file.remove($key)) {
                (Some(v), _) => v.clone(),
                (None, Some(s)) => parse_typed(&s, $key)?,
                (None, None) => $default,
            }
        };
    }

    let tf_text: String = pick!(common.tf, "tf", "0.15".to_string());
    let tf: Vec<f64> = tf_text
        .split(',')
        .map(|s| parse_typed::<f64>(s.trim(), "tf"))
        .collect::<Result<_>>()?;
    if tf.is_empty() {
        return Err(Error::Parse("empty duration list".into()));
    }

    let kind_text: String = pick!(common.kind, "kind", "sta".to_string());
    let backend_text: String = pick!(common.backend, "backend", "gpe".to_string());
    let parallel = match (common.parallel, file.remove("parallel")) {
        (Some(w), _) => Some(w),
        (None, Some(s)) => Some(parse_typed::<usize>(&s, "parallel")?),
        (None, None) => None,
    };
    let out_text: String = match (&common.out, file.remove("out")) {
        (Some(p), _) => p.to_string_lossy().into_owned(),
        (None, Some(s)) => s,
        (None, None) => "out".to_string(),
    };

    Ok(Resolved {
        gi: pick!(common.gi, "gi", -0.1),
        gf: pick!(common.gf, "gf", -0.2),
        n: pick!(common.n, "n", 100.0),
        nc: pick!(common.nc, "nc", 100.0),
        ne: pick!(common.ne, "ne", 90.0),
        tf,
        kind: PulseKind::parse(&kind_text)?,
        backend: Backend::parse(&backend_text)?,
        grid: Grid::new(
            pick!(common.grid_n, "grid_n", 1024),
            pick!(common.grid_l, "grid_l", 16.0),
        )?,
        dt: match (common.dt, file.remove("dt")) {
            (Some(v), _) => Some(v),
            (None, Some(s)) => Some(parse_typed(&s, "dt")?),
            (None, None) => None,
        },
        samples: pick!(common.samples, "samples", 1001),
        parallel,
        out: PathBuf::from(out_text),
    })
}

impl Resolved {
    fn single_duration(&self) -> Result<f64> {
        if self.tf.len() != 1 {
            return Err(Error::Parse(format!(
                "this command takes one duration, got {} (use sweep for lists)",
                self.tf.len()
            )));
        }
        Ok(self.tf[0])
    }

    fn settings(&self) -> SolverSettings {
        SolverSettings { grid: self.grid, dt: self.dt, ..SolverSettings::default() }
    }

    fn cycle_config(&self, duration: f64) -> CycleConfig {
        CycleConfig {
            g_initial: self.gi,
            g_final: self.gf,
            n_compression: self.nc,
            n_expansion: self.ne,
            duration,
            kind: self.kind,
            backend: self.backend,
            samples: self.samples,
        }
    }

    fn params_json(&self, command: &str) -> serde_json::Value {
        json!({
            "command": command,
            "gi": self.gi,
            "gf": self.gf,
            "n": self.n,
            "nc": self.nc,
            "ne": self.ne,
            "tf": self.tf,
            "kind": self.kind.label(),
            "backend": self.backend.label(),
            "grid_n": self.grid.points,
            "grid_l": self.grid.length,
            "dt": self.dt,
            "samples": self.samples,
            "parallel": self.parallel.map(|w| w as u64),
        })
    }

    /// Regime label for sweep tables, set by the compression coupling
    /// strength.
    fn regime(&self) -> &'static str {
        if (self.gi * self.nc).abs() < 15.0 {
            "weak"
        } else {
            "strong"
        }
    }
}

fn write_manifest(
    out: &Path,
    params: serde_json::Value,
    files: &[String],
) -> Result<()> {
    let doc = json!({
        "tool": "feshbach-engine",
        "version": env!("CARGO_PKG_VERSION"),
        "created_at": chrono::Utc::now().to_rfc3339(),
        "parameters": params,
        "files": files,
    });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(out.join("manifest.json"), text + "\n")?;
    Ok(())
}

fn cmd_design(r: &Resolved) -> Result<Vec<String>> {
    let tf = r.single_duration()?;
    let cfg = StrokeConfig::new(r.gi, r.gf, r.n, tf, r.samples)?;
    // design always emits both ramps so they can be compared directly
    let sta = sta_pulse(&cfg)?;
    let tra = tra_pulse(&cfg)?;
    io::write_pulse_csv(&r.out.join("pulse_sta.csv"), &sta)?;
    io::write_pulse_csv(&r.out.join("pulse_tra.csv"), &tra)?;
    for pulse in [&sta, &tra] {
        println!(
            "designed {} ramp: {} samples over T_f = {}, g in [{:.6}, {:.6}]",
            pulse.kind.label(),
            pulse.times.len(),
            tf,
            pulse.g_values.iter().cloned().fold(f64::INFINITY, f64::min),
            pulse.g_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
    }
    Ok(vec!["pulse_sta.csv".into(), "pulse_tra.csv".into()])
}

fn cmd_stroke(r: &Resolved) -> Result<Vec<String>> {
    let tf = r.single_duration()?;
    let cfg = StrokeConfig::new(r.gi, r.gf, r.n, tf, r.samples)?;
    let cache = GroundStateCache::new();
    let record = run_stroke(&cfg, r.kind, r.backend, &r.settings(), &cache)?;
    io::write_pulse_csv(&r.out.join("pulse.csv"), &record.pulse)?;
    io::write_series_csv(&r.out.join("series.csv"), &record.series)?;
    io::write_stroke_summary(&r.out.join("stroke.json"), &record)?;
    io::write_wavefunction(&r.out.join("psi_final.bin"), &record.final_state)?;
    println!(
        "stroke done: W = {:.6}, W_irr = {:.6}, F = {:.6}",
        record.work, record.irreversible_work, record.fidelity
    );
    Ok(vec![
        "pulse.csv".into(),
        "series.csv".into(),
        "stroke.json".into(),
        "psi_final.bin".into(),
    ])
}

fn cmd_cycle(r: &Resolved) -> Result<Vec<String>> {
    let tf = r.single_duration()?;
    let cache = GroundStateCache::new();
    let report = run_cycle(&r.cycle_config(tf), &r.settings(), &cache)?;
    io::write_cycle_summary(&r.out.join("cycle.json"), &report)?;
    io::write_pulse_csv(&r.out.join("compression_pulse.csv"), &report.compression.pulse)?;
    io::write_pulse_csv(&r.out.join("expansion_pulse.csv"), &report.expansion.pulse)?;
    io::write_series_csv(&r.out.join("compression_series.csv"), &report.compression.series)?;
    io::write_series_csv(&r.out.join("expansion_series.csv"), &report.expansion.series)?;
    println!(
        "cycle done: W = {:.6}, Q_minus = {:.6}, eta = {:.6}, P = {:.6}, engine_valid = {}",
        report.total_work, report.q_minus, report.efficiency, report.power, report.engine_valid
    );
    Ok(vec![
        "cycle.json".into(),
        "compression_pulse.csv".into(),
        "expansion_pulse.csv".into(),
        "compression_series.csv".into(),
        "expansion_series.csv".into(),
    ])
}

fn cmd_sweep(r: &Resolved) -> Result<Vec<String>> {
    let cache = GroundStateCache::new();
    let run = |par: bool| sweep(&r.cycle_config(r.tf[0]), &r.tf, &r.settings(), &cache, par);
    let points = match r.parallel {
        None => run(false),
        Some(0) => run(true),
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Domain(format!("worker pool: {e}")))?
            .install(|| run(true)),
    };
    let failures = points.iter().filter(|p| p.report.is_err()).count();
    io::write_sweep_csv(&r.out.join("sweep.csv"), &points, r.regime())?;
    println!("sweep done: {} points, {} failed", points.len(), failures);
    Ok(vec!["sweep.csv".into()])
}

fn run(cli: &Cli) -> Result<()> {
    let r = resolve(cli.command.common())?;
    std::fs::create_dir_all(&r.out)?;
    let files = match &cli.command {
        Command::Design(_) => cmd_design(&r)?,
        Command::Stroke(_) => cmd_stroke(&r)?,
        Command::Cycle(_) => cmd_cycle(&r)?,
        Command::Sweep(_) => cmd_sweep(&r)?,
    };
    write_manifest(&r.out, r.params_json(cli.command.name()), &files)?;
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error[{}]: {e}", e.category());
        std::process::exit(e.exit_code());
    }
}
