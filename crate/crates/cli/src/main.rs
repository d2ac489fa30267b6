//! Command line front end: simulate trajectories, classify tops, solve
//! steady states, and emit bifurcation-diagram series as plot-ready files.
//!
//! Exit codes: 0 on success, 1 on usage or parameter validation errors,
//! 2 when a simulation ends in model breakdown (contact loss).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use tippetop::dynamics::FullState;
use tippetop::equilibria::{self, SteadyKind, SteadyState};
use tippetop::model::TopParams;
use tippetop::reduction::ReducedState;
use tippetop::simulate::{
    integrate_full, integrate_reduced, monitor_report, write_full_csv, write_reduced_csv,
    IntegratorConfig, Termination,
};
use tippetop::stability;

const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_BREAKDOWN: i32 = 2;

#[derive(Parser)]
#[command(
    name = "tippetop",
    version,
    about = "Eccentric-sphere tippe top: simulation, steady states, stability, diagrams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the equations of motion and write trajectory + summary files
    Simulate(SimulateArgs),
    /// Print the six-group classification report as JSON
    Classify(ClassifyArgs),
    /// Solve all steady states on one Jellet level
    Equilibria(EquilibriaArgs),
    /// Emit bifurcation-diagram series over a range of squared Jellet values
    Diagram(DiagramArgs),
}

/// Physical parameters, from a preset file and/or individual flags.
/// Flags override preset values; ratio forms are accepted in place of the
/// dimensional ones.
#[derive(Args)]
struct ParamArgs {
    /// JSON preset file with keys m, R, eps, A, C, mu, g
    #[arg(long)]
    preset: Option<PathBuf>,
    /// Mass (kg)
    #[arg(long)]
    m: Option<f64>,
    /// Sphere radius (m)
    #[arg(long = "R")]
    radius: Option<f64>,
    /// Center-of-mass offset (m)
    #[arg(long)]
    eps: Option<f64>,
    /// Transverse moment of inertia (kg m^2)
    #[arg(long = "A")]
    inertia_transverse: Option<f64>,
    /// Axial moment of inertia (kg m^2)
    #[arg(long = "C")]
    inertia_axial: Option<f64>,
    /// Viscous friction coefficient (s/m)
    #[arg(long)]
    mu: Option<f64>,
    /// Gravitational acceleration (m/s^2), default 9.81
    #[arg(long)]
    g: Option<f64>,
    /// Inertia ratio A/C, usable instead of --A
    #[arg(long, conflicts_with = "inertia_transverse")]
    a_over_c: Option<f64>,
    /// Eccentricity ratio eps/R, usable instead of --eps
    #[arg(long, conflicts_with = "eps")]
    eps_over_r: Option<f64>,
}

impl ParamArgs {
    fn resolve(&self) -> Result<TopParams, String> {
        let preset = match &self.preset {
            Some(path) => Some(TopParams::from_preset_file(path).map_err(|e| e.to_string())?),
            None => None,
        };
        let take = |flag: Option<f64>, from_preset: Option<f64>, name: &str| {
            flag.or(from_preset)
                .ok_or_else(|| format!("missing parameter --{name} (or provide --preset)"))
        };
        let mass = take(self.m, preset.map(|p| p.mass), "m")?;
        let radius = take(self.radius, preset.map(|p| p.radius), "R")?;
        let inertia_axial = take(self.inertia_axial, preset.map(|p| p.inertia_axial), "C")?;
        let inertia_transverse = match (self.inertia_transverse, self.a_over_c) {
            (Some(a), _) => a,
            (None, Some(ratio)) => ratio * inertia_axial,
            (None, None) => take(None, preset.map(|p| p.inertia_transverse), "A")?,
        };
        let eccentricity = match (self.eps, self.eps_over_r) {
            (Some(e), _) => e,
            (None, Some(ratio)) => ratio * radius,
            (None, None) => take(None, preset.map(|p| p.eccentricity), "eps")?,
        };
        let friction = take(self.mu, preset.map(|p| p.friction), "mu")?;
        let gravity = self.g.or(preset.map(|p| p.gravity)).unwrap_or(9.81);
        TopParams::new(
            mass,
            radius,
            eccentricity,
            inertia_transverse,
            inertia_axial,
            friction,
            gravity,
        )
        .map_err(|e| e.to_string())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Initial tilt (rad)
    #[arg(long)]
    theta0: f64,
    /// Initial spin n about the symmetry axis (rad/s)
    #[arg(long, conflicts_with = "psidot0", allow_negative_numbers = true)]
    n0: Option<f64>,
    /// Initial precession rate (rad/s), default 0
    #[arg(long, allow_negative_numbers = true)]
    phidot0: Option<f64>,
    /// Initial psi rate (rad/s), alternative to --n0
    #[arg(long, allow_negative_numbers = true)]
    psidot0: Option<f64>,
    /// Initial tilt rate (rad/s), default 0
    #[arg(long, allow_negative_numbers = true)]
    thetadot0: Option<f64>,
    /// End time (s)
    #[arg(long, default_value_t = 10.0)]
    tend: f64,
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
    #[arg(long, default_value_t = 1e-10)]
    atol: f64,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Trajectory file format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Integrate the reduced system on the initial state's Jellet level
    /// instead of the full one
    #[arg(long)]
    reduced: bool,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct EquilibriaArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Jellet level via the upright-spin convention J = C n0 (R - eps)
    #[arg(long, conflicts_with = "jsq", allow_negative_numbers = true)]
    n0: Option<f64>,
    /// Jellet level via its square
    #[arg(long)]
    jsq: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct DiagramArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    jsq_min: f64,
    #[arg(long)]
    jsq_max: f64,
    /// Grid points over [jsq-min, jsq-max]
    #[arg(long, default_value_t = 200)]
    steps: usize,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Simulate(args) => run_simulate(&args),
        Command::Classify(args) => run_classify(&args),
        Command::Equilibria(args) => run_equilibria(&args),
        Command::Diagram(args) => run_diagram(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            EXIT_USAGE
        }
    }
}

fn run_simulate(args: &SimulateArgs) -> Result<i32, String> {
    let params = args.params.resolve()?;
    if args.n0.is_none() && args.psidot0.is_none() {
        return Err(
            "underdetermined initial spin: provide --n0, or --psidot0 (with optional --phidot0)"
                .to_string(),
        );
    }
    let phidot0 = args.phidot0.unwrap_or(0.0);
    let psidot0 = match (args.n0, args.psidot0) {
        (Some(n0), _) => n0 - phidot0 * args.theta0.cos(),
        (None, Some(psidot0)) => psidot0,
        (None, None) => unreachable!(),
    };
    let state0 = FullState {
        theta: args.theta0,
        thetadot: args.thetadot0.unwrap_or(0.0),
        phidot: phidot0,
        psidot: psidot0,
        ..Default::default()
    };
    if !state0.is_finite() || !(0.0..=std::f64::consts::PI).contains(&args.theta0) {
        return Err("initial state must be finite with theta0 in [0, pi]".to_string());
    }
    let cfg = IntegratorConfig {
        rel_tol: args.rtol,
        abs_tol: args.atol,
        t_end: args.tend,
        ..Default::default()
    }
    .validated()
    .map_err(|e| e.to_string())?;

    fs::create_dir_all(&args.out).map_err(|e| e.to_string())?;

    let (termination, summary) = if args.reduced {
        let red0 = tippetop::reduction::to_reduced(&params, &state0);
        let traj = integrate_reduced(&params, &red0, &cfg);
        write_reduced_trajectory(&traj, &args.out, args.format)?;
        (
            traj.termination,
            summary_json(
                &params,
                &traj.termination,
                traj.final_time(),
                traj.final_state().theta,
                &monitor_report(&traj),
            ),
        )
    } else {
        let traj = integrate_full(&params, &state0, &cfg);
        write_full_trajectory(&traj, &args.out, args.format)?;
        (
            traj.termination,
            summary_json(
                &params,
                &traj.termination,
                traj.final_time(),
                traj.final_state().theta,
                &monitor_report(&traj),
            ),
        )
    };

    let summary_path = args.out.join("summary.json");
    fs::write(
        &summary_path,
        serde_json::to_string_pretty(&summary).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    println!("wrote {}", summary_path.display());

    Ok(if termination == Termination::ModelBreakdown {
        EXIT_BREAKDOWN
    } else {
        EXIT_OK
    })
}

fn summary_json(
    params: &TopParams,
    termination: &Termination,
    t_final: f64,
    theta_final: f64,
    report: &tippetop::simulate::MonitorReport,
) -> serde_json::Value {
    json!({
        "params": params,
        "termination": termination,
        "t_final": t_final,
        "theta_final": theta_final,
        "max_jellet_drift": report.max_jellet_drift,
        "max_energy_rate": report.max_energy_rate,
        "min_normal_force": report.min_normal_force,
    })
}

fn write_full_trajectory(
    traj: &tippetop::Trajectory<FullState>,
    out_dir: &Path,
    format: Format,
) -> Result<(), String> {
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_full_csv(traj, &mut buf).map_err(|e| e.to_string())?;
            let path = out_dir.join("trajectory.csv");
            fs::write(&path, buf).map_err(|e| e.to_string())?;
            println!("wrote {}", path.display());
        }
        Format::Json => {
            let columns = [
                "t", "theta", "phi", "psi", "x", "y", "thetadot", "phidot", "psidot", "J", "E",
                "Rn", "vQ",
            ];
            let rows: Vec<Vec<f64>> = traj
                .times
                .iter()
                .zip(&traj.states)
                .zip(&traj.monitors)
                .map(|((t, s), m)| {
                    vec![
                        *t,
                        s.theta,
                        s.phi,
                        s.psi,
                        s.x,
                        s.y,
                        s.thetadot,
                        s.phidot,
                        s.psidot,
                        m.jellet,
                        m.energy,
                        m.normal_force,
                        m.slip_speed,
                    ]
                })
                .collect();
            let path = out_dir.join("trajectory.json");
            let body = json!({"columns": columns, "rows": rows});
            fs::write(&path, serde_json::to_string(&body).unwrap()).map_err(|e| e.to_string())?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn write_reduced_trajectory(
    traj: &tippetop::Trajectory<ReducedState>,
    out_dir: &Path,
    format: Format,
) -> Result<(), String> {
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_reduced_csv(traj, &mut buf).map_err(|e| e.to_string())?;
            let path = out_dir.join("trajectory.csv");
            fs::write(&path, buf).map_err(|e| e.to_string())?;
            println!("wrote {}", path.display());
        }
        Format::Json => {
            let columns = ["t", "theta", "thetadot", "phibardot", "J", "E_red"];
            let rows: Vec<Vec<f64>> = traj
                .times
                .iter()
                .zip(&traj.states)
                .zip(&traj.monitors)
                .map(|((t, s), m)| vec![*t, s.theta, s.thetadot, s.phibardot, m.jellet, m.energy])
                .collect();
            let path = out_dir.join("trajectory.json");
            let body = json!({"columns": columns, "rows": rows});
            fs::write(&path, serde_json::to_string(&body).unwrap()).map_err(|e| e.to_string())?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn run_classify(args: &ClassifyArgs) -> Result<i32, String> {
    let params = args.params.resolve()?;
    let report = stability::classify(&params);
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(EXIT_OK)
}

fn run_equilibria(args: &EquilibriaArgs) -> Result<i32, String> {
    let params = args.params.resolve()?;
    let jellet = match (args.n0, args.jsq) {
        (Some(n0), _) => params.inertia_axial * n0 * (params.radius - params.eccentricity),
        (None, Some(jsq)) if jsq >= 0.0 => jsq.sqrt(),
        (None, Some(_)) => return Err("--jsq must be nonnegative".to_string()),
        (None, None) => return Err("provide the Jellet level via --n0 or --jsq".to_string()),
    };
    let (up, down) = equilibria::vertical_states(&params, jellet);
    let mut states = vec![up, down];
    states.extend(solve_sorted(&params, jellet));

    let stability_label = |s: &SteadyState| match stability::is_linearly_stable(&params, s) {
        Ok(true) => "true".to_string(),
        Ok(false) => "false".to_string(),
        Err(_) => "marginal".to_string(),
    };
    match args.format {
        Format::Csv => {
            println!("kind,theta0,J,n,stable");
            for s in &states {
                println!(
                    "{},{:.16e},{:.16e},{:.16e},{}",
                    s.kind.as_str(),
                    s.theta0,
                    s.jellet,
                    s.spin,
                    stability_label(s)
                );
            }
        }
        Format::Json => {
            let body: Vec<_> = states
                .iter()
                .map(|s| {
                    json!({
                        "kind": s.kind.as_str(),
                        "theta0": s.theta0,
                        "J": s.jellet,
                        "n": s.spin,
                        "stable": stability_label(s),
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&body).unwrap());
        }
    }
    Ok(EXIT_OK)
}

fn solve_sorted(params: &TopParams, jellet: f64) -> Vec<SteadyState> {
    equilibria::solve_intermediate(params, jellet)
}

fn run_diagram(args: &DiagramArgs) -> Result<i32, String> {
    let params = args.params.resolve()?;
    if !(args.jsq_min >= 0.0 && args.jsq_max >= args.jsq_min) || args.steps < 2 {
        return Err("invalid J^2 range: need 0 <= jsq-min <= jsq-max and steps >= 2".to_string());
    }
    let diagram = stability::diagram(&params, args.jsq_min, args.jsq_max, args.steps);
    fs::create_dir_all(&args.out).map_err(|e| e.to_string())?;

    let mut index_series = Vec::new();
    for (k, series) in diagram.series.iter().enumerate() {
        let file = format!("branch_{k:02}_{}.csv", kind_slug(series.kind));
        let mut buf = Vec::new();
        equilibria::write_branch_csv(&series.points, series.kind, &mut buf)
            .map_err(|e| e.to_string())?;
        fs::write(args.out.join(&file), buf).map_err(|e| e.to_string())?;
        index_series.push(json!({
            "file": file,
            "kind": series.kind.as_str(),
            "points": series.points.len(),
        }));
    }
    let report = stability::classify(&params);
    let index = json!({
        "group": report.group,
        "jsq_min": args.jsq_min,
        "jsq_max": args.jsq_max,
        "jsq_upright_threshold": diagram.jsq_upright_threshold,
        "jsq_inverted_threshold": diagram.jsq_inverted_threshold,
        "series": index_series,
    });
    let index_path = args.out.join("index.json");
    fs::write(&index_path, serde_json::to_string_pretty(&index).unwrap())
        .map_err(|e| e.to_string())?;
    println!(
        "wrote {} series to {}",
        diagram.series.len(),
        args.out.display()
    );
    Ok(EXIT_OK)
}

fn kind_slug(kind: SteadyKind) -> &'static str {
    kind.as_str()
}
