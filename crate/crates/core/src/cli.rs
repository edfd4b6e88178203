//! Operational surface: scenario files, subcommands, CSV/PGM emission.
//!
//! Scenario files are strict JSON (unknown keys rejected); dBm/dB fields are
//! converted to linear units once at the boundary, and the core only ever
//! sees linear units. Every output file is accompanied by a
//! `<out>.manifest.json` sidecar recording the tool version, scenario hash,
//! seed, and command line so a run can be reproduced bit-exactly.
//!
//! Exit codes: 0 ok, 1 runtime error, 2 usage/validation error. Errors are a
//! single machine-parsable line on stderr (`snapslam: error: <Code>: <msg>`),
//! and partially written outputs are removed.

use crate::forward::{self, NoiseModel, Snapshot};
use crate::imaging::{self, GridSpec};
use crate::montecarlo::{self, Placement, TrialConfig, Variant};
use crate::rng::{self, STREAM_PHASE};
use crate::scene::{
    validate_scenario, AccessPoint, ReflectingSurface, RfParams, ScatterPoint, Scenario, Vec3,
};
use crate::slam::{self, StopRule};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Deserialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// CLI failure, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit code 2: bad arguments, unparseable or invalid inputs.
    Usage { code: &'static str, message: String },
    /// Exit code 1: anything that failed at runtime.
    Runtime { code: &'static str, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => 2,
            CliError::Runtime { .. } => 1,
        }
    }

    fn usage(code: &'static str, message: impl Into<String>) -> Self {
        CliError::Usage { code, message: message.into() }
    }

    fn runtime(code: &'static str, message: impl Into<String>) -> Self {
        CliError::Runtime { code, message: message.into() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (code, message) = match self {
            CliError::Usage { code, message } | CliError::Runtime { code, message } => {
                (code, message)
            }
        };
        // single line, machine parsable
        write!(f, "snapslam: error: {}: {}", code, message.replace('\n', " "))
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::InvalidGrid(_) | crate::Error::GridTooLarge { .. } => {
                CliError::usage("GridError", e.to_string())
            }
            crate::Error::InvalidScenario(_) => CliError::usage("ValidationError", e.to_string()),
            other => CliError::runtime("RuntimeError", other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

// ---------------------------------------------------------------------------
// scenario files
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, untagged)]
enum ApSpecFile {
    /// Explicit positions.
    List(Vec<[f64; 3]>),
    /// Regular ceiling lattice centered on the origin.
    Lattice { nx: usize, ny: usize, spacing: f64, plane_z: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SurfaceFile {
    anchor: [f64; 3],
    normal: [f64; 3],
    attenuation: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScattererFile {
    position: [f64; 3],
    rcs_m2: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RfFile {
    carrier_hz: f64,
    tx_power_dbm: f64,
    symbol_bandwidth_hz: f64,
    noise_psd_dbm_hz: f64,
    noise_figure_db: f64,
}

/// On-disk scenario schema. Powers are dBm here and converted to linear
/// units on load.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    aps: ApSpecFile,
    ue: [f64; 3],
    surfaces: Vec<SurfaceFile>,
    scatterers: Vec<ScattererFile>,
    rf: RfFile,
}

fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

/// Parses and validates a scenario file.
pub fn parse_scenario(path: &Path) -> CliResult<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::usage("ParseError", format!("{}: {e}", path.display()))
    })?;
    parse_scenario_str(&text)
}

/// Parses and validates a scenario from its JSON text.
pub fn parse_scenario_str(text: &str) -> CliResult<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text)
        .map_err(|e| CliError::usage("ParseError", e.to_string()))?;
    let aps = match file.aps {
        ApSpecFile::List(list) => list
            .into_iter()
            .enumerate()
            .map(|(id, p)| AccessPoint { id, position: p.into() })
            .collect(),
        ApSpecFile::Lattice { nx, ny, spacing, plane_z } => {
            if nx == 0 || ny == 0 || !(spacing > 0.0) {
                return Err(CliError::usage("ValidationError", "aps: empty or non-positive lattice"));
            }
            let x0 = -((nx - 1) as f64) * spacing / 2.0;
            let y0 = -((ny - 1) as f64) * spacing / 2.0;
            let mut aps = Vec::with_capacity(nx * ny);
            for j in 0..ny {
                for i in 0..nx {
                    aps.push(AccessPoint {
                        id: aps.len(),
                        position: Vec3::new(
                            x0 + i as f64 * spacing,
                            y0 + j as f64 * spacing,
                            plane_z,
                        ),
                    });
                }
            }
            aps
        }
    };
    let surfaces = file
        .surfaces
        .iter()
        .enumerate()
        .map(|(i, s)| {
            ReflectingSurface::new(s.anchor.into(), s.normal.into(), s.attenuation)
                .map_err(|e| CliError::usage("ValidationError", format!("surfaces[{i}]: {e}")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let scenario = Scenario {
        aps,
        ue: file.ue.into(),
        surfaces,
        scatterers: file
            .scatterers
            .iter()
            .map(|s| ScatterPoint { position: s.position.into(), rcs: s.rcs_m2 })
            .collect(),
        rf: RfParams {
            carrier_hz: file.rf.carrier_hz,
            tx_power_w: dbm_to_watts(file.rf.tx_power_dbm),
            symbol_bandwidth_hz: file.rf.symbol_bandwidth_hz,
            noise_psd_w_per_hz: dbm_to_watts(file.rf.noise_psd_dbm_hz),
            noise_figure_db: file.rf.noise_figure_db,
            pilot: RfParams::UNIT_PILOT,
        },
    };
    let violations = validate_scenario(&scenario);
    if !violations.is_empty() {
        let summary = violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(CliError::usage("ValidationError", summary));
    }
    Ok(scenario)
}

// ---------------------------------------------------------------------------
// argument types
// ---------------------------------------------------------------------------

/// `xmin,xmax,ymin,ymax,z,spacing`
fn parse_grid(arg: &str) -> CliResult<GridSpec> {
    let parts: Vec<f64> = arg
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| CliError::usage("GridError", format!("grid '{arg}': {e}")))?;
    if parts.len() != 6 {
        return Err(CliError::usage(
            "GridError",
            format!("grid '{arg}': expected 6 comma-separated values"),
        ));
    }
    GridSpec::new(parts[0], parts[1], parts[2], parts[3], parts[4], parts[5])
        .map_err(CliError::from)
        .map_err(|e| match e {
            CliError::Usage { message, .. } | CliError::Runtime { message, .. } => {
                CliError::usage("GridError", message)
            }
        })
}

fn parse_point(arg: &str) -> CliResult<Vec3> {
    let parts: Vec<f64> = arg
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| CliError::usage("ParseError", format!("point '{arg}': {e}")))?;
    if parts.len() != 3 {
        return Err(CliError::usage("ParseError", format!("point '{arg}': expected x,y,z")));
    }
    Ok(Vec3::new(parts[0], parts[1], parts[2]))
}

fn parse_resolutions(arg: &str) -> CliResult<Vec<f64>> {
    let out: Vec<f64> = arg
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| CliError::usage("ParseError", format!("resolutions '{arg}': {e}")))?;
    if out.is_empty() || out.iter().any(|&r| !(r > 0.0)) {
        return Err(CliError::usage("ParseError", "resolutions must be positive"));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// command line
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "snapslam",
    version,
    about = "Phase-coherent narrowband snapshot SLAM simulator for distributed-MIMO networks"
)]
pub struct Cli {
    /// Worker threads for the imaging and Monte Carlo kernels
    /// (default: available parallelism). Results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ScenarioArg {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a snapshot and write it as CSV.
    Synth {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Master seed for common phases and noise.
        #[arg(long)]
        seed: u64,
        /// Disable receiver noise.
        #[arg(long)]
        no_noise: bool,
        /// Output snapshot CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the imaging function over a grid.
    Image {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Snapshot CSV produced by `synth`.
        #[arg(long)]
        snapshot: PathBuf,
        /// Search grid: "xmin,xmax,ymin,ymax,z,spacing".
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Output image CSV.
        #[arg(long)]
        out: PathBuf,
        /// Optional 16-bit grayscale heatmap (PGM).
        #[arg(long)]
        heatmap: Option<PathBuf>,
        /// Override the grid cell cap.
        #[arg(long)]
        cell_cap: Option<usize>,
    },
    /// Run the iterative SLAM loop on a snapshot.
    Slam {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Stop after this many targets.
        #[arg(long)]
        max_targets: Option<usize>,
        /// Stop when residual energy falls to this fraction of the initial.
        #[arg(long)]
        residual_eps: Option<f64>,
        /// Output detection CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Map the spatial ambiguity function around a reference point.
    Ambiguity {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Reference (true) location "x,y,z".
        #[arg(long = "ref", allow_hyphen_values = true)]
        reference: String,
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo detection-probability sweep over grid resolutions.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Comma-separated grid spacings in meters, e.g. "0.01,0.05,0.1".
        #[arg(long)]
        resolutions: String,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Removal variant: estimated, pr, or both.
        #[arg(long, default_value = "estimated")]
        variant: String,
        /// Search grid override "xmin,xmax,ymin,ymax,z,spacing"
        /// (spacing ignored; the sweep sets it per resolution).
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        /// Output stats CSV.
        #[arg(long)]
        out: PathBuf,
        /// Optional per-trial diagnostics CSV.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
}

// ---------------------------------------------------------------------------
// output helpers
// ---------------------------------------------------------------------------

/// Writes `content` atomically: temp file in the target directory, then
/// rename. Nothing is left behind on failure.
fn write_output(path: &Path, content: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::runtime("IoError", format!("{}: {e}", path.display())))?;
    std::io::Write::write_all(&mut tmp, content)
        .map_err(|e| CliError::runtime("IoError", format!("{}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| CliError::runtime("IoError", format!("{}: {e}", path.display())))?;
    Ok(())
}

/// `>= 15` significant digits, scientific notation.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn scenario_file_sha256(path: &Path) -> CliResult<String> {
    use sha2::{Digest, Sha256};
    let bytes = fs::read(path)
        .map_err(|e| CliError::usage("ParseError", format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Reproducibility sidecar written next to every output.
fn write_manifest(out: &Path, scenario_path: &Path, seed: Option<u64>) -> CliResult<()> {
    let manifest = serde_json::json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "scenario_sha256": scenario_file_sha256(scenario_path)?,
        "master_seed": seed,
        "command_line": std::env::args().collect::<Vec<_>>(),
        "timestamp": chrono::Utc::now().to_rfc3339(),
    });
    let mut path = out.as_os_str().to_owned();
    path.push(".manifest.json");
    write_output(Path::new(&path), (manifest.to_string() + "\n").as_bytes())
}

fn snapshot_csv(y: &Snapshot) -> String {
    let mut out = String::from("ap_id,re,im\n");
    for (n, s) in y.samples.iter().enumerate() {
        let _ = writeln!(out, "{n},{},{}", fmt_float(s.re), fmt_float(s.im));
    }
    out
}

fn read_snapshot_csv(path: &Path) -> CliResult<Snapshot> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage("ParseError", format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("ap_id,re,im") => {}
        _ => {
            return Err(CliError::usage(
                "ParseError",
                format!("{}: expected header ap_id,re,im", path.display()),
            ))
        }
    }
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(CliError::usage(
                "ParseError",
                format!("{}: row {i}: expected 3 fields", path.display()),
            ));
        }
        let id: usize = fields[0].trim().parse().map_err(|e| {
            CliError::usage("ParseError", format!("{}: row {i}: {e}", path.display()))
        })?;
        if id != samples.len() {
            return Err(CliError::usage(
                "ParseError",
                format!("{}: row {i}: ap ids must be contiguous from 0", path.display()),
            ));
        }
        let re: f64 = fields[1].trim().parse().map_err(|e| {
            CliError::usage("ParseError", format!("{}: row {i}: {e}", path.display()))
        })?;
        let im: f64 = fields[2].trim().parse().map_err(|e| {
            CliError::usage("ParseError", format!("{}: row {i}: {e}", path.display()))
        })?;
        samples.push(Complex64::new(re, im));
    }
    Ok(Snapshot::from_samples(samples))
}

fn image_csv(img: &imaging::SpatialImage) -> String {
    let mut out = String::from("x,y,value\n");
    for (idx, &v) in img.values.iter().enumerate() {
        let p = img.grid.position(idx);
        let _ = writeln!(out, "{},{},{}", fmt_float(p.x), fmt_float(p.y), fmt_float(v));
    }
    out
}

/// 16-bit binary PGM, min-max normalized per image.
fn image_pgm(img: &imaging::SpatialImage) -> Vec<u8> {
    let (nx, ny) = (img.grid.nx(), img.grid.ny());
    let lo = img.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = img.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = format!("P5\n{nx} {ny}\n65535\n").into_bytes();
    for &v in &img.values {
        let level = (((v - lo) / span) * 65535.0).round() as u16;
        out.extend_from_slice(&level.to_be_bytes());
    }
    out
}

fn detections_csv(dets: &[slam::Detection]) -> String {
    let mut out = String::from("iteration,x,y,z,phase,peak_value,residual_energy\n");
    for d in dets {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            d.iteration,
            fmt_float(d.position.x),
            fmt_float(d.position.y),
            fmt_float(d.position.z),
            fmt_float(d.phase),
            fmt_float(d.peak_value),
            fmt_float(d.residual_energy),
        );
    }
    out
}

fn stats_csv(rows: &[montecarlo::StatsRow]) -> String {
    let mut out = String::from("resolution_m,variant,object,trials,successes,p_detect,std_err\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_float(r.resolution),
            r.variant.label(),
            r.object.label(),
            r.trials,
            r.successes,
            fmt_float(r.probability()),
            fmt_float(r.std_err()),
        );
    }
    out
}

fn diagnostics_csv(outcomes: &[montecarlo::TrialOutcome]) -> String {
    let mut out = String::from(
        "trial,object,truth_x,truth_y,truth_z,matched,detections,error\n",
    );
    for o in outcomes {
        let det_list = o
            .detections
            .iter()
            .map(|d| format!("{:.6}/{:.6}/{:.6}", d.position.x, d.position.y, d.position.z))
            .collect::<Vec<_>>()
            .join(";");
        for (class, pos, hit) in &o.truths {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                o.trial_index,
                class.label(),
                fmt_float(pos.x),
                fmt_float(pos.y),
                fmt_float(pos.z),
                hit,
                det_list,
                o.error.as_deref().unwrap_or(""),
            );
        }
    }
    out
}

// ---------------------------------------------------------------------------
// subcommand bodies
// ---------------------------------------------------------------------------

/// Derives every path's common phase from the master seed.
pub fn phases_from_seed(scenario: &Scenario, seed: u64) -> Vec<f64> {
    (0..scenario.num_paths())
        .map(|m| {
            let mut stream = rng::substream(seed, &[STREAM_PHASE, m as u64]);
            rng::uniform_phase(&mut stream)
        })
        .collect()
}

fn default_stop(max_targets: Option<usize>, residual_eps: Option<f64>) -> CliResult<StopRule> {
    let stop = StopRule { max_targets, residual_energy_frac: residual_eps };
    stop.validate().map_err(|_| {
        CliError::usage("UsageError", "need --max-targets and/or --residual-eps")
    })?;
    Ok(stop)
}

/// Runs one parsed command. Pure except for file IO.
pub fn run(cli: Cli) -> CliResult<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::usage("UsageError", e.to_string()))?;
    pool.install(|| dispatch(cli.command))
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Synth { scenario, seed, no_noise, out } => {
            let s = parse_scenario(&scenario.scenario)?;
            let phases = phases_from_seed(&s, seed);
            let noise = if no_noise { NoiseModel::Off } else { NoiseModel::Seeded(seed) };
            let y = forward::synthesize_snapshot(&s, &phases, noise)?;
            write_output(&out, snapshot_csv(&y).as_bytes())?;
            write_manifest(&out, &scenario.scenario, Some(seed))
        }
        Command::Image { scenario, snapshot, grid, out, heatmap, cell_cap } => {
            let s = parse_scenario(&scenario.scenario)?;
            let grid = parse_grid(&grid)?;
            let y = read_snapshot_csv(&snapshot)?;
            let cap = cell_cap.unwrap_or(imaging::DEFAULT_CELL_CAP);
            let img = imaging::compute_image_with_cap(&y, &grid, &s.aps, s.rf.carrier_hz, cap)?;
            write_output(&out, image_csv(&img).as_bytes())?;
            if let Some(pgm) = heatmap {
                write_output(&pgm, &image_pgm(&img))?;
            }
            write_manifest(&out, &scenario.scenario, None)
        }
        Command::Slam { scenario, snapshot, grid, max_targets, residual_eps, out } => {
            let s = parse_scenario(&scenario.scenario)?;
            let grid = parse_grid(&grid)?;
            let y = read_snapshot_csv(&snapshot)?;
            let stop = default_stop(max_targets, residual_eps)?;
            let dets = slam::run_slam(&y, &grid, &s.aps, s.rf.carrier_hz, stop)?;
            write_output(&out, detections_csv(&dets).as_bytes())?;
            write_manifest(&out, &scenario.scenario, None)
        }
        Command::Ambiguity { scenario, reference, grid, out } => {
            let s = parse_scenario(&scenario.scenario)?;
            let grid = parse_grid(&grid)?;
            let reference = parse_point(&reference)?;
            let mut body = String::from("x,y,value\n");
            for idx in 0..grid.num_cells() {
                let p = grid.position(idx);
                let a = imaging::ambiguity(p, reference, &s.aps, s.rf.carrier_hz);
                let _ = writeln!(body, "{},{},{}", fmt_float(p.x), fmt_float(p.y), fmt_float(a));
            }
            write_output(&out, body.as_bytes())?;
            write_manifest(&out, &scenario.scenario, None)
        }
        Command::Sweep {
            scenario,
            resolutions,
            trials,
            seed,
            variant,
            grid,
            out,
            diagnostics,
        } => {
            let s = parse_scenario(&scenario.scenario)?;
            let resolutions = parse_resolutions(&resolutions)?;
            if trials == 0 {
                return Err(CliError::usage("UsageError", "--trials must be >= 1"));
            }
            let variants: Vec<Variant> = match variant.as_str() {
                "estimated" => vec![Variant::Estimated],
                "pr" => vec![Variant::PerfectRemoval],
                "both" => vec![Variant::Estimated, Variant::PerfectRemoval],
                other => {
                    return Err(CliError::usage(
                        "UsageError",
                        format!("variant '{other}': expected estimated, pr, or both"),
                    ))
                }
            };
            let search = match grid {
                Some(g) => parse_grid(&g)?,
                // default search region: the covered floor plus the mirror
                // band behind the y = 10 wall, at the scenario UE height
                None => GridSpec::new(-5.0, 5.0, -10.0, 16.0, s.ue.z, 1.0)
                    .map_err(CliError::from)?,
            };
            let template = TrialConfig {
                base_scenario: s,
                placement: Placement::default(),
                min_separation: TrialConfig::DEFAULT_MIN_SEPARATION,
                grid: search,
                success_radius: TrialConfig::DEFAULT_SUCCESS_RADIUS,
                variant: Variant::Estimated,
                trials,
                master_seed: seed,
            };
            let (stats, outcomes) = montecarlo::sweep(&template, &resolutions, &variants)?;
            write_output(&out, stats_csv(&stats).as_bytes())?;
            if let Some(diag) = diagnostics {
                write_output(&diag, diagnostics_csv(&outcomes).as_bytes())?;
            }
            write_manifest(&out, &scenario.scenario, Some(seed))
        }
    }
}
