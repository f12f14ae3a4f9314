//! `sonoplan` command line: field scans, focus solves, closed-loop runs.
//!
//! Lengths on the command line are millimeters; every file the tool reads or
//! writes stays SI. Exit codes: 0 success, 1 config error, 2 run failure
//! (out-of-area, non-convergence beyond threshold, failed gradient check),
//! 3 I/O error.

// validation deliberately writes `!(x > 0.0)` so NaN fails the check too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use nalgebra::Vector3;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sonoplan::field::{AxisRange, PlaneAxis};
use sonoplan::focus::PHASE_STEP_RAD;
use sonoplan::sim;
use sonoplan::{
    field_scan_grid, quadratic_form, solve_focus, ArrayGeometry, Error, FocusSpec, LoopConfig,
    PhaseVector, Scenario, SolverSettings,
};

const MM: f64 = 1.0e-3;

#[derive(Parser)]
#[command(name = "sonoplan", version, about = "Phased-array manipulation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate |p| on a plane and write the grid as CSV
    FieldScan(FieldScanArgs),
    /// Solve for phases that place a pressure focus at a point
    Focus(FocusArgs),
    /// Run the closed manipulation loop from a JSON config
    Simulate(SimulateArgs),
    /// Check the analytic |p|² gradient against central differences
    Gradcheck(GradcheckArgs),
    /// Print a ready-to-edit scenario configuration
    DefaultConfig(DefaultConfigArgs),
}

#[derive(Args)]
struct GeometryArgs {
    /// Transducer rows
    #[arg(long, default_value_t = 8)]
    rows: usize,
    /// Transducer columns
    #[arg(long, default_value_t = 8)]
    cols: usize,
    /// Grid pitch (mm)
    #[arg(long, default_value_t = 10.5)]
    pitch: f64,
}

impl GeometryArgs {
    fn build(&self) -> sonoplan::Result<ArrayGeometry> {
        ArrayGeometry::grid(self.rows, self.cols, self.pitch * MM)
    }
}

#[derive(Args)]
struct FieldScanArgs {
    /// Normal axis of the scan plane: x, y, or z
    #[arg(long, default_value = "z")]
    axis: String,
    /// Plane offset along that axis (mm)
    #[arg(long, default_value_t = 65.0, allow_negative_numbers = true)]
    value: f64,
    /// First in-plane axis: start (mm)
    #[arg(long, default_value_t = -35.0, allow_negative_numbers = true)]
    u_start: f64,
    /// First in-plane axis: stop (mm)
    #[arg(long, default_value_t = 35.0, allow_negative_numbers = true)]
    u_stop: f64,
    /// First in-plane axis: sample count
    #[arg(long, default_value_t = 71)]
    u_count: usize,
    /// Second in-plane axis: start (mm)
    #[arg(long, default_value_t = -35.0, allow_negative_numbers = true)]
    v_start: f64,
    /// Second in-plane axis: stop (mm)
    #[arg(long, default_value_t = 35.0, allow_negative_numbers = true)]
    v_stop: f64,
    /// Second in-plane axis: sample count
    #[arg(long, default_value_t = 71)]
    v_count: usize,
    /// JSON phase file: an array of radians, or a `focus` output document
    #[arg(long)]
    phases: Option<PathBuf>,
    /// Output CSV path
    #[arg(short, long, default_value = "field_scan.csv")]
    output: PathBuf,
    #[command(flatten)]
    geometry: GeometryArgs,
}

#[derive(Args)]
struct FocusArgs {
    /// Target x (mm)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    x: f64,
    /// Target y (mm)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    y: f64,
    /// Target z (mm)
    #[arg(long, default_value_t = 65.0, allow_negative_numbers = true)]
    z: f64,
    /// Desired amplitude |p| at the target (Pa)
    #[arg(long)]
    p_des: f64,
    /// Random-restart seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of optimizer starts
    #[arg(long, default_value_t = 3)]
    restarts: usize,
    /// Output JSON path; stdout when omitted
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    geometry: GeometryArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Run configuration (JSON, SI units)
    #[arg(long)]
    config: PathBuf,
    /// Per-period CSV output path
    #[arg(long, default_value = "run.csv")]
    csv: PathBuf,
    /// JSON summary output path
    #[arg(long, default_value = "summary.json")]
    summary: PathBuf,
    /// Override the config's master seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct GradcheckArgs {
    /// Number of random instances
    #[arg(long, default_value_t = 100)]
    instances: usize,
    /// Instance seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worst acceptable relative error
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    #[command(flatten)]
    geometry: GeometryArgs,
}

#[derive(Args)]
struct DefaultConfigArgs {
    /// Scenario: fb (floating ball) or bs (ball on surface)
    #[arg(long)]
    scenario: String,
    /// Output path; stdout when omitted
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Serialize)]
struct FocusOutput {
    /// Optimal phases (radians, wrapped to [0, 2π))
    phases_rad: Vec<f64>,
    /// Quantized phases as integer degree steps in [0, 360)
    phases_deg: Vec<u32>,
    achieved_pa: f64,
    residual: f64,
    iterations: usize,
    restarts_used: usize,
    duration_ms: f64,
    /// Whether the returned focus is a strict in-plane local maximum
    local_max: bool,
}

fn main() {
    // die quietly when stdout closes early, e.g. `sonoplan default-config | head`
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version render with exit 0; bad usage is a config error
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::UnachievableTarget { .. }
        | Error::EmptyGrid(_)
        | Error::DimensionMismatch { .. }
        | Error::NonFiniteMeasurement(_)
        | Error::DegeneratePoint { .. } => 1,
        Error::OutOfArea { .. } | Error::NonConvergence { .. } => 2,
        Error::Io { .. } => 3,
    }
}

fn run(cli: Cli) -> sonoplan::Result<i32> {
    match cli.command {
        Command::FieldScan(args) => field_scan(&args),
        Command::Focus(args) => focus(&args),
        Command::Simulate(args) => simulate(&args),
        Command::Gradcheck(args) => gradcheck(&args),
        Command::DefaultConfig(args) => default_config(&args),
    }
}

/// Reads phases from a JSON array of radians or a `focus` output document.
fn read_phases(path: &Path, expected: usize) -> sonoplan::Result<PhaseVector> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let array = match &value {
        serde_json::Value::Array(a) => a.as_slice(),
        serde_json::Value::Object(o) => o
            .get("phases_rad")
            .and_then(|v| v.as_array())
            .map(|a| a.as_slice())
            .ok_or_else(|| {
                Error::Config(format!(
                    "{}: expected an array of radians or an object with phases_rad",
                    path.display()
                ))
            })?,
        _ => {
            return Err(Error::Config(format!(
                "{}: expected an array of radians or an object with phases_rad",
                path.display()
            )))
        }
    };
    let phases: Option<Vec<f64>> = array.iter().map(|v| v.as_f64()).collect();
    let phases = phases.ok_or_else(|| {
        Error::Config(format!("{}: phases must all be numbers", path.display()))
    })?;
    if phases.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: phases.len(),
        });
    }
    Ok(PhaseVector::new(phases))
}

fn field_scan(args: &FieldScanArgs) -> sonoplan::Result<i32> {
    let geo = args.geometry.build()?;
    let axis = PlaneAxis::from_str(&args.axis)?;
    let spec = sonoplan::GridSpec {
        axis,
        value: args.value * MM,
        u: AxisRange {
            start: args.u_start * MM,
            stop: args.u_stop * MM,
            count: args.u_count,
        },
        v: AxisRange {
            start: args.v_start * MM,
            stop: args.v_stop * MM,
            count: args.v_count,
        },
    };
    let phases = match &args.phases {
        Some(path) => read_phases(path, geo.len())?,
        None => PhaseVector::zeros(geo.len()),
    };
    let scan = field_scan_grid(&geo, &phases, &spec)?;
    scan.write_csv(&args.output)?;
    println!(
        "wrote {} ({} x {} points)",
        args.output.display(),
        args.u_count,
        args.v_count
    );
    Ok(0)
}

fn focus(args: &FocusArgs) -> sonoplan::Result<i32> {
    let geo = args.geometry.build()?;
    let spec = FocusSpec::new(
        Vector3::new(args.x * MM, args.y * MM, args.z * MM),
        args.p_des,
    );
    let settings = SolverSettings {
        restarts: args.restarts,
        seed: args.seed,
        ..SolverSettings::default()
    };
    let report = solve_focus(&geo, &spec, &settings)?;
    let quantized = sonoplan::quantize_phases(&report.phases, PHASE_STEP_RAD);
    let phases_deg: Vec<u32> = quantized
        .as_slice()
        .iter()
        .map(|p| (p / PHASE_STEP_RAD).round() as u32 % 360)
        .collect();
    let out = FocusOutput {
        phases_rad: report.phases.as_slice().to_vec(),
        phases_deg,
        achieved_pa: report.achieved,
        residual: report.residual,
        iterations: report.iterations,
        restarts_used: report.restarts_used,
        duration_ms: report.duration.as_secs_f64() * 1e3,
        local_max: report.local_max,
    };
    let text = serde_json::to_string_pretty(&out)
        .map_err(|e| Error::Config(format!("serializing focus report: {e}")))?;
    match &args.output {
        Some(path) => {
            fs::write(path, text + "\n").map_err(|e| Error::io(path, e))?;
            println!(
                "wrote {} (|p| = {:.1} Pa, residual {:.2e}, {} iterations)",
                path.display(),
                out.achieved_pa,
                out.residual,
                out.iterations
            );
        }
        None => println!("{text}"),
    }
    Ok(0)
}

fn simulate(args: &SimulateArgs) -> sonoplan::Result<i32> {
    let text = fs::read_to_string(&args.config).map_err(|e| Error::io(&args.config, e))?;
    let mut config: LoopConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", args.config.display())))?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let log = sonoplan::run_loop(&config)?;
    sim::export_log(&log, &args.csv, &args.summary)?;
    let summary = log.summary();
    println!(
        "steps: {} ({:.2} s at {:.0} Hz)",
        summary.steps,
        summary.steps as f64 * config.dt,
        1.0 / config.dt
    );
    println!("status: {}", summary.status);
    println!(
        "tracking error: rms {:.3} mm, max {:.3} mm",
        summary.rms_tracking_error * 1e3,
        summary.max_tracking_error * 1e3
    );
    println!(
        "saturation duty: {:.1}%, solver failures: {}",
        summary.saturation_duty * 100.0,
        summary.solver_failures
    );
    println!(
        "solver wall clock: p50 {:.2} ms, p95 {:.2} ms",
        summary.solver_ms_p50, summary.solver_ms_p95
    );
    println!("wrote {}, {}", args.csv.display(), args.summary.display());

    let failure_threshold = summary.steps / 4;
    if summary.status != "completed" {
        eprintln!("run failure: ball left the manipulation area");
        return Ok(2);
    }
    if summary.steps > 0 && summary.solver_failures > failure_threshold {
        eprintln!(
            "run failure: solver failed on {} of {} periods",
            summary.solver_failures, summary.steps
        );
        return Ok(2);
    }
    Ok(0)
}

fn gradcheck(args: &GradcheckArgs) -> sonoplan::Result<i32> {
    if args.instances == 0 {
        return Err(Error::Config("instance count must be ≥ 1".into()));
    }
    if !(args.tolerance > 0.0) {
        return Err(Error::Config(format!(
            "tolerance must be positive, got {}",
            args.tolerance
        )));
    }
    let geo = args.geometry.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut worst = 0.0f64;
    let mut worst_instance = 0;
    for instance in 0..args.instances {
        let err = gradcheck_instance(&geo, &mut rng);
        if err > worst {
            worst = err;
            worst_instance = instance;
        }
    }
    let pass = worst < args.tolerance;
    println!(
        "gradient check: {} instances, worst relative error {:.3e} (instance {}), tolerance {:.1e} -> {}",
        args.instances,
        worst,
        worst_instance,
        args.tolerance,
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { 2 })
}

/// One random instance: relative error between the analytic gradient and
/// central differences with h = 1e-6 rad.
fn gradcheck_instance(geo: &ArrayGeometry, rng: &mut ChaCha8Rng) -> f64 {
    let (point, phases) = random_instance(geo, rng);
    let form = quadratic_form(geo, &point).expect("in-area points are non-degenerate");
    let (_, grad) = sonoplan::pressure_sq_and_gradient(&form, phases.as_slice());
    let h = 1e-6;
    let mut fd = vec![0.0; phases.len()];
    let mut probe: Vec<f64> = phases.as_slice().to_vec();
    for i in 0..probe.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let plus = form.value(&probe);
        probe[i] = orig - h;
        let minus = form.value(&probe);
        probe[i] = orig;
        fd[i] = (plus - minus) / (2.0 * h);
    }
    let num: f64 = grad
        .iter()
        .zip(&fd)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let den: f64 = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
    num / den.max(1e-300)
}

/// Uniform point in the 21 mm disc on the manipulation plane plus uniform
/// phases.
fn random_instance(geo: &ArrayGeometry, rng: &mut ChaCha8Rng) -> (Vector3<f64>, PhaseVector) {
    use std::f64::consts::TAU;
    let r = 21.0e-3 * rng.random::<f64>().sqrt();
    let angle = rng.random_range(0.0..TAU);
    let point = Vector3::new(
        r * angle.cos(),
        r * angle.sin(),
        sonoplan::geometry::MANIPULATION_PLANE_Z,
    );
    let phases: Vec<f64> = (0..geo.len()).map(|_| rng.random_range(0.0..TAU)).collect();
    (point, PhaseVector::new(phases))
}

fn default_config(args: &DefaultConfigArgs) -> sonoplan::Result<i32> {
    let scenario = match args.scenario.to_ascii_lowercase().as_str() {
        "fb" => Scenario::Fb,
        "bs" => Scenario::Bs,
        other => {
            return Err(Error::Config(format!(
                "unknown scenario {other:?}, expected fb or bs"
            )))
        }
    };
    let config = sim::default_config(scenario);
    let text = serde_json::to_string_pretty(&config)
        .map_err(|e| Error::Config(format!("serializing config: {e}")))?;
    match &args.output {
        Some(path) => {
            fs::write(path, text + "\n").map_err(|e| Error::io(path, e))?;
            println!("wrote {}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(0)
}
