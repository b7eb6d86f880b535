//! `robowet`: plan, simulate and compare WET charging missions.

mod plot;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use robowet_core::hil::{hil_iterate_with, HilMode, HilRound};
use robowet_core::pipeline::plan_scenario;
use robowet_core::planner::simplex::LpError;
use robowet_core::report::{run_comparison, ReferenceRow};
use robowet_core::scenario::{generate_scenario, GenParams, PlanFile, Scenario};
use robowet_core::sim::{run_mission, SimTrace, TraceSummary};
use robowet_core::{DistanceMatrix, Error};

/// Stdout line that tolerates a closed pipe.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

/// Directory searched for scenario files given as relative paths that do not
/// exist in the working directory.
const CONFIG_DIR_ENV: &str = "ROBOWET_CONFIG_DIR";

#[derive(Parser)]
#[command(name = "robowet", version, about = "Mission planning and simulation for a mobile WET robot")]
struct Cli {
    /// Worker threads for multi-seed commands (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    parallel: Option<usize>,
    /// Skip SVG rendering.
    #[arg(long, global = true)]
    no_plots: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate anchors and jointly optimize selection, route and charging.
    Plan {
        scenario: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Plan file to write.
        #[arg(long, default_value = "plan.toml")]
        out: PathBuf,
    },
    /// Execute a plan in the dynamic world.
    Simulate {
        scenario: PathBuf,
        plan: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long, default_value = "sim-out")]
        out: PathBuf,
    },
    /// Plan, simulate, refit the distance matrix from measured edge times, repeat.
    Hil {
        scenario: PathBuf,
        #[arg(long, default_value_t = 3)]
        rounds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run this many consecutive seeds starting at --seed.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Replace per-edge refitting by a uniform scale of the matrix.
        #[arg(long, value_name = "F")]
        global_factor: Option<f64>,
        /// Stop tolerance; defaults to the scenario's.
        #[arg(long)]
        improve_tol: Option<f64>,
        #[arg(long, default_value = "hil-out")]
        out: PathBuf,
    },
    /// Run the fixed-transmitter, visit-all, joint and joint+HIL schemes.
    Compare {
        scenario: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive seeds starting at --seed.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        /// HIL rounds for the joint+HIL scheme; defaults to the scenario's.
        #[arg(long)]
        rounds: Option<usize>,
        #[command(flatten)]
        reference: Reference,
        #[arg(long, default_value = "compare-out")]
        out: PathBuf,
    },
    /// Synthesize a random scenario.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "generated")]
        name: String,
        #[arg(long, default_value_t = 20)]
        ehs: usize,
        #[arg(long, default_value_t = 4)]
        blobs: usize,
        /// Side of the square arena, meters.
        #[arg(long, default_value_t = 10.0)]
        arena: f64,
        #[arg(long, default_value_t = 5)]
        movers: usize,
        /// Per-harvester requirement, joules.
        #[arg(long, default_value_t = 0.02)]
        requirement: f64,
        /// Add a harvester in the far corner.
        #[arg(long)]
        far_eh: bool,
        #[arg(long, default_value = "scenario.toml")]
        out: PathBuf,
    },
}

/// Extra energy rows computed from given numbers only.
#[derive(Args)]
struct Reference {
    /// UAV flight time for a reference row, seconds.
    #[arg(long, requires = "uav_power")]
    uav_time: Option<f64>,
    /// UAV power for the reference row, watts.
    #[arg(long, requires = "uav_time")]
    uav_power: Option<f64>,
    /// Robot completion time for a reference row at the scenario's motion power, seconds.
    #[arg(long)]
    robot_time: Option<f64>,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible { .. } | Error::FeasibleBeamNotFound { .. } | Error::Lp(LpError::Infeasible) => 2,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.parallel {
        if n == 0 {
            return Err(Failure::usage("--parallel must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Failure::usage(e.to_string()))?;
    let plots = !cli.no_plots;
    pool.install(|| match cli.command {
        Command::Plan { scenario, seed, out } => cmd_plan(&scenario, seed, &out),
        Command::Simulate { scenario, plan, seed, out } => cmd_simulate(&scenario, &plan, seed, &out, plots),
        Command::Hil {
            scenario,
            rounds,
            seed,
            seeds,
            global_factor,
            improve_tol,
            out,
        } => {
            let mode = match global_factor {
                Some(f) => HilMode::GlobalFactor(f),
                None => HilMode::PerEdge,
            };
            cmd_hil(&scenario, rounds, seed, seeds, mode, improve_tol, &out, plots)
        }
        Command::Compare {
            scenario,
            seed,
            seeds,
            rounds,
            reference,
            out,
        } => cmd_compare(&scenario, seed, seeds, rounds, &reference, &out, plots),
        Command::Gen {
            seed,
            name,
            ehs,
            blobs,
            arena,
            movers,
            requirement,
            far_eh,
            out,
        } => {
            let p = GenParams {
                name,
                ehs,
                blobs,
                arena_size: arena,
                movers,
                requirement_j: requirement,
                far_eh,
                seed,
                ..Default::default()
            };
            let sc = generate_scenario(&p)?;
            write(&out, &sc.to_toml_string()?)?;
            say!("wrote {} ({} harvesters, {} movers)", out.display(), sc.ehs.len(), sc.obstacles.count);
            Ok(())
        }
    })
}

fn resolve(path: &Path) -> PathBuf {
    if path.is_relative() && !path.exists() {
        if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
            let alt = Path::new(&dir).join(path);
            if alt.exists() {
                return alt;
            }
        }
    }
    path.to_path_buf()
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load_scenario(path: &Path) -> Outcome<Scenario> {
    let path = resolve(path);
    Scenario::from_toml_str(&read(&path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_trace(dir: &Path, scenario: &Scenario, plan: &robowet_core::Plan, trace: &SimTrace, seed: u64, plots: bool) -> Outcome {
    let mut csv = Vec::new();
    trace.write_csv(&mut csv)?;
    write(&dir.join("trace.csv"), &String::from_utf8_lossy(&csv))?;
    write(&dir.join("summary.toml"), &TraceSummary::new(trace, &scenario.name, seed).to_toml_string()?)?;
    if plots {
        write(&dir.join("trajectory.svg"), &plot::trajectory_svg(scenario, plan, trace))?;
    }
    Ok(())
}

fn plan_summary(file: &PlanFile) -> String {
    let p = &file.plan;
    let tour: Vec<String> = p.tour.iter().map(usize::to_string).collect();
    format!(
        "anchors {} selected {} tour [{}]\nplanned completion {:.2} s (motion {:.2} s, charging {:.2} s), {} selections evaluated{}",
        p.anchors.len(),
        p.selected().len(),
        tour.join(" "),
        p.planned_completion_s,
        p.motion_s,
        p.charging_s,
        file.evaluations,
        if p.route_optimal { "" } else { ", route search hit its budget" }
    )
}

fn trace_summary(trace: &SimTrace) -> String {
    let completion = match trace.completion_s {
        Some(c) => format!("completion {c:.2} s"),
        None => format!("did not finish by {:.2} s", trace.end_time_s),
    };
    let energy: Vec<String> = trace.harvested_j.iter().map(|j| format!("{:.2}", j * 1e3)).collect();
    format!(
        "{completion}, robot collisions {}, requirements met {}\nharvested mJ [{}]",
        trace.robot_collisions(),
        trace.requirements_met(),
        energy.join(" ")
    )
}

fn cmd_plan(scenario: &Path, seed: u64, out: &Path) -> Outcome {
    let sc = load_scenario(scenario)?;
    let (_, outcome) = plan_scenario(&sc, seed)?;
    let file = PlanFile::new(&sc, seed, outcome.evaluations, outcome.plan);
    write(out, &file.to_toml_string()?)?;
    say!("{}", plan_summary(&file));
    say!("wrote {}", out.display());
    Ok(())
}

fn cmd_simulate(scenario: &Path, plan: &Path, seed: u64, out: &Path, plots: bool) -> Outcome {
    let sc = load_scenario(scenario)?;
    let file = PlanFile::from_toml_str(&read(plan)?).map_err(|e| Failure::usage(format!("{}: {e}", plan.display())))?;
    file.check_compatible(&sc).map_err(|e| Failure::usage(e.to_string()))?;
    let trace = run_mission(&file.plan, &sc, seed, sc.sim.dt).map_err(|e| Failure::usage(e.to_string()))?;
    write_trace(out, &sc, &file.plan, &trace, seed, plots)?;
    say!("{}", trace_summary(&trace));
    say!("wrote {}", out.display());
    Ok(())
}

/// Per-round record in the HIL history document.
#[derive(serde::Serialize)]
struct RoundRow {
    round: usize,
    selected: Vec<usize>,
    tour: Vec<usize>,
    planned_completion_s: f64,
    route_length_m: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    simulated_completion_s: Option<f64>,
    robot_collisions: usize,
}

#[derive(serde::Serialize)]
struct HilDoc {
    format_version: u32,
    scenario: String,
    seed: u64,
    mode: HilMode,
    rounds: Vec<RoundRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    aborted: Option<String>,
}

#[derive(serde::Serialize)]
struct DistanceDoc<'a> {
    format_version: u32,
    distances: &'a DistanceMatrix,
}

/// One seed's full round history under `dir`. Returns (round 0, last round) completions.
fn hil_seed(sc: &Scenario, rounds: usize, tol: f64, seed: u64, mode: HilMode, dir: &Path, plots: bool) -> Outcome<(Option<f64>, Option<f64>, Option<String>)> {
    let history = hil_iterate_with(sc, rounds, tol, seed, mode)?;
    let mut rows = Vec::new();
    for r in &history.rounds {
        let HilRound { round_index, distance_matrix, plan, evaluations, trace, simulated_completion_s } = r;
        let rd = dir.join(format!("round_{round_index}"));
        let file = PlanFile::new(sc, seed, *evaluations, plan.clone());
        write(&rd.join("plan.toml"), &file.to_toml_string()?)?;
        let dd = DistanceDoc {
            format_version: robowet_core::scenario::FORMAT_VERSION,
            distances: distance_matrix,
        };
        write(&rd.join("distances.toml"), &robowet_core::scenario::to_toml(&dd)?)?;
        write_trace(&rd, sc, plan, trace, seed, plots)?;
        rows.push(RoundRow {
            round: *round_index,
            selected: plan.selected(),
            tour: plan.tour.clone(),
            planned_completion_s: plan.planned_completion_s,
            route_length_m: plan.route_length(&history.rounds[0].distance_matrix),
            simulated_completion_s: *simulated_completion_s,
            robot_collisions: trace.robot_collisions(),
        });
    }
    let aborted = history.aborted.as_ref().map(ToString::to_string);
    let doc = HilDoc {
        format_version: robowet_core::scenario::FORMAT_VERSION,
        scenario: sc.name.clone(),
        seed,
        mode,
        rounds: rows,
        aborted: aborted.clone(),
    };
    write(&dir.join("hil.toml"), &robowet_core::scenario::to_toml(&doc)?)?;
    let completions: Vec<Option<f64>> = history.rounds.iter().map(|r| r.simulated_completion_s).collect();
    if plots {
        write(&dir.join("rounds.svg"), &plot::rounds_svg(&format!("{} seed {seed}", sc.name), &completions))?;
    }
    Ok((completions.first().copied().flatten(), completions.last().copied().flatten(), aborted))
}

#[derive(serde::Serialize)]
struct BatchRow {
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    last_s: Option<f64>,
}

#[derive(serde::Serialize)]
struct BatchDoc {
    format_version: u32,
    scenario: String,
    rounds_max: usize,
    /// Seeds whose last round finished no later than round 0.
    nonincreasing: usize,
    mean_improvement_s: f64,
    seeds: Vec<BatchRow>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_hil(scenario: &Path, rounds: usize, seed: u64, seeds: u64, mode: HilMode, tol: Option<f64>, out: &Path, plots: bool) -> Outcome {
    if rounds == 0 {
        return Err(Failure::usage("--rounds must be at least 1"));
    }
    if seeds == 0 {
        return Err(Failure::usage("--seeds must be at least 1"));
    }
    if let HilMode::GlobalFactor(f) = mode {
        if !(f > 0.0 && f.is_finite()) {
            return Err(Failure::usage("--global-factor must be positive"));
        }
    }
    let sc = load_scenario(scenario)?;
    let tol = tol.unwrap_or(sc.hil.improve_tol);
    if tol.is_nan() || tol < 0.0 {
        return Err(Failure::usage("--improve-tol must be nonnegative"));
    }
    if seeds == 1 {
        let (first, last, aborted) = hil_seed(&sc, rounds, tol, seed, mode, out, plots)?;
        say!("round 0 {} -> last round {}", fmt_opt(first), fmt_opt(last));
        if let Some(e) = aborted {
            say!("stopped early: {e}");
        }
        say!("wrote {}", out.display());
        return Ok(());
    }
    // (seed, round 0 completion, last round completion)
    type SeedResult = (u64, Option<f64>, Option<f64>);
    let results: Vec<Outcome<SeedResult>> = (seed..seed + seeds)
        .into_par_iter()
        .map(|s| {
            let (a, b, _) = hil_seed(&sc, rounds, tol, s, mode, &out.join(format!("seed_{s}")), plots)?;
            Ok((s, a, b))
        })
        .collect();
    let rows: Vec<(u64, Option<f64>, Option<f64>)> = results.into_iter().collect::<Outcome<_>>()?;
    let paired: Vec<(f64, f64)> = rows.iter().filter_map(|r| Some((r.1?, r.2?))).collect();
    let nonincreasing = paired.iter().filter(|(a, b)| b <= a).count();
    let mean = if paired.is_empty() { 0.0 } else { paired.iter().map(|(a, b)| a - b).sum::<f64>() / paired.len() as f64 };
    let doc = BatchDoc {
        format_version: robowet_core::scenario::FORMAT_VERSION,
        scenario: sc.name.clone(),
        rounds_max: rounds,
        nonincreasing,
        mean_improvement_s: mean,
        seeds: rows.iter().map(|&(seed, first_s, last_s)| BatchRow { seed, first_s, last_s }).collect(),
    };
    write(&out.join("batch.toml"), &robowet_core::scenario::to_toml(&doc)?)?;
    say!("{nonincreasing}/{seeds} seeds no slower after HIL, mean improvement {mean:.2} s");
    say!("wrote {}", out.display());
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "DNF".into(), |c| format!("{c:.2} s"))
}

fn cmd_compare(scenario: &Path, seed: u64, seeds: u64, rounds: Option<usize>, reference: &Reference, out: &Path, plots: bool) -> Outcome {
    if seeds == 0 {
        return Err(Failure::usage("--seeds must be at least 1"));
    }
    let sc = load_scenario(scenario)?;
    let rounds = rounds.unwrap_or(sc.hil.rounds_max);
    if rounds == 0 {
        return Err(Failure::usage("--rounds must be at least 1"));
    }
    let list: Vec<u64> = (seed..seed + seeds).collect();
    let mut report = run_comparison(&sc, &list, rounds)?;
    if let (Some(t), Some(p)) = (reference.uav_time, reference.uav_power) {
        report.references.push(ReferenceRow::new("UAV", t, p));
    }
    if let Some(t) = reference.robot_time {
        report.references.push(ReferenceRow::new("robot", t, sc.robot.motion_power_w));
    }
    write(&out.join("report.toml"), &report.to_toml_string()?)?;
    if plots {
        write(&out.join("report.svg"), &report.to_svg())?;
    }
    say!("{}", report.to_table().trim_end());
    say!("wrote {}", out.display());
    Ok(())
}
