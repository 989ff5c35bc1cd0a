//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use stabcert_core::constants::{
    exact_controllability_constant, weak_constant_curve, weak_constant_with,
};
use stabcert_core::dualctl::{BISECTION_RTOL, DEFAULT_GRID};
use stabcert_core::gramian::KOMORNIK_RTOL;
use stabcert_core::model::{builtin, KALMAN_REL_TOL};
use stabcert_core::stabilizer::{
    concatenation_plan_with, intermediate_bound, simulate_feedback, FeedbackPlan, SweepOptions,
    FEEDBACK_RATE_TOL, GROWTH_SAMPLES,
};
use stabcert_core::{
    complete_stabilization_via_shift, gramian, komornik_feedback, komornik_gramian,
    null_controllability_constant, run_concatenation, solve_min_norm, wave_heat,
    weak_constant_oracle, LinearSystem, ObservabilityReport, WeakOptions,
};

use crate::csvout::{self, write_table, write_table_file};
use crate::error::CliError;
use crate::report::Report;
use crate::sweep::sweep;
use crate::sysfile::{parse_system_file, write_system, write_system_file};

#[derive(Debug, Parser)]
#[command(
    name = "stabcert",
    version,
    about = "Observability constants, minimal-norm controls and stabilization certificates for y' = Ay + Bu"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// System file, or a built-in name: integrator, rotation, scalar-unstable, wave-heat.
    #[arg(short, long)]
    pub system: String,
    /// CSV artifact to write.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Seed of the randomized optimizer starts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random starts of the weak-constant optimizer.
    #[arg(long, default_value_t = 32)]
    pub random_starts: usize,
    /// Relative threshold for the Kalman rank.
    #[arg(long, default_value_t = KALMAN_REL_TOL)]
    pub kalman_tol: f64,
    /// Relative eigenvalue threshold of the numerical kernel of the Gramian.
    #[arg(long, default_value_t = KALMAN_REL_TOL)]
    pub kernel_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Concatenated minimal-norm controls.
    Concat,
    /// Weighted-Gramian feedback with rate λ.
    Komornik,
    /// Feedback designed on the shifted generator to reach a target rate.
    Shift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Feedback {
    None,
    Komornik,
    Shift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Example {
    WaveHeat,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Controllability Gramian (or the weighted one with --lambda) and Kalman rank.
    Gramian {
        #[command(flatten)]
        common: Common,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Exact, null and weak observability constants.
    Constants {
        #[command(flatten)]
        common: Common,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long)]
        alpha: Option<f64>,
        /// Comma-separated α values for the CSV curve.
        #[arg(long)]
        alphas: Option<String>,
        /// Cross-check the weak constant against this many sphere samples.
        #[arg(long, default_value_t = 0)]
        oracle_samples: usize,
    },
    /// Minimal-norm control into the ball of radius α‖y0‖.
    Minnorm {
        #[command(flatten)]
        common: Common,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long)]
        alpha: f64,
        /// Comma-separated initial state (default: all ones).
        #[arg(long)]
        y0: Option<String>,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
    },
    /// Builds a stabilizing strategy and runs it from y0.
    Stabilize {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Mode::Concat)]
        mode: Mode,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Target rate for --mode shift.
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<f64>,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Simulation length for the feedback modes.
        #[arg(long, default_value_t = 5.0)]
        t_end: f64,
        #[arg(long)]
        y0: Option<String>,
    },
    /// Grid estimate of the best decay rate ω*.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated α grid in (0,1).
        #[arg(long)]
        alphas: String,
        /// Comma-separated T grid.
        #[arg(long)]
        horizons: String,
        #[arg(long, default_value_t = -1e3, allow_hyphen_values = true)]
        floor: f64,
    },
    /// Free or closed-loop trajectory.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Feedback::None)]
        feedback: Feedback,
        #[arg(long = "T", default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<f64>,
        #[arg(long, default_value_t = 5.0)]
        t_end: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        y0: Option<String>,
        /// Only write t and the norm.
        #[arg(long)]
        no_states: bool,
    },
    /// Writes a built-in example as a system file.
    Example {
        #[arg(value_enum)]
        name: Example,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 0.3)]
        lo: f64,
        #[arg(long, default_value_t = 0.7)]
        hi: f64,
        /// Destination file; the system is printed when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Comma-separated numbers; the empty string is the empty list.
pub fn parse_list(flag: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::invalid(format!("--{flag}: cannot parse {s:?} as a number")))
        })
        .collect()
}

pub fn load_system(spec: &str) -> Result<LinearSystem, CliError> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Some(sys) = builtin(spec) {
            return Ok(sys);
        }
    }
    Ok(parse_system_file(path)?)
}

fn initial_state(sys: &LinearSystem, y0: &Option<String>) -> Result<DVector<f64>, CliError> {
    match y0 {
        None => Ok(DVector::from_element(sys.n(), 1.0)),
        Some(text) => {
            let v = parse_list("y0", text)?;
            if v.len() != sys.n() {
                return Err(CliError::invalid(format!(
                    "--y0 has {} entries, system has n = {}",
                    v.len(),
                    sys.n()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(CliError::invalid("--y0 entries must be finite"));
            }
            Ok(DVector::from_vec(v))
        }
    }
}

fn positive(flag: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(CliError::invalid(format!("--{flag} must be positive, got {x}")))
    }
}

fn check_common(c: &Common) -> Result<(), CliError> {
    for (flag, v) in [("kalman-tol", c.kalman_tol), ("kernel-tol", c.kernel_tol)] {
        if !(v.is_finite() && v > 0.0 && v < 1.0) {
            return Err(CliError::invalid(format!("--{flag} must lie in (0,1), got {v}")));
        }
    }
    Ok(())
}

fn weak_options(c: &Common) -> WeakOptions {
    WeakOptions {
        random_starts: c.random_starts,
        seed: c.seed,
        kernel_rel_tol: c.kernel_tol,
        ..WeakOptions::default()
    }
}

fn header(report: &mut Report, command: &str, c: &Common, sys: &LinearSystem) {
    report.put("command", command).put("system", c.system.as_str());
    if let Some(label) = sys.label() {
        report.put("label", label);
    }
    report.put("n", sys.n()).put("m", sys.m());
}

fn thresholds(report: &mut Report, c: &Common) {
    report
        .section("thresholds")
        .put("kalman_rel_tol", c.kalman_tol)
        .put("kernel_rel_tol", c.kernel_tol)
        .put("bisection_rtol", BISECTION_RTOL)
        .put("komornik_rtol", KOMORNIK_RTOL)
        .put("feedback_rate_tol", FEEDBACK_RATE_TOL)
        .put("growth_samples", GROWTH_SAMPLES)
        .put("seed", c.seed)
        .put("random_starts", c.random_starts);
}

fn kalman_section(report: &mut Report, sys: &LinearSystem, tol: f64) -> Result<(), CliError> {
    let k = sys.kalman_decompose_with(tol)?;
    report
        .section("kalman")
        .put("rank", k.rank)
        .put("controllable", k.is_controllable())
        .put(
            "uncontrollable_re",
            k.uncontrollable_spectrum.iter().map(|z| z.0).collect::<Vec<_>>(),
        )
        .put(
            "uncontrollable_im",
            k.uncontrollable_spectrum.iter().map(|z| z.1).collect::<Vec<_>>(),
        );
    Ok(())
}

fn observability(report: &mut Report, name: &str, r: &ObservabilityReport) {
    report
        .section(name)
        .put("alpha", r.alpha)
        .put("value", r.value)
        .put("finite", r.is_finite())
        .put("method", r.method.as_str())
        .put("witness", r.witness.iter().copied().collect::<Vec<_>>());
}

fn emit_csv(
    output: &Option<PathBuf>,
    report: &mut Report,
    table: (Vec<String>, Vec<Vec<String>>),
) -> Result<(), CliError> {
    if let Some(path) = output {
        write_table_file(path, &table.0, &table.1)?;
        report.section("artifact").put("csv", path.display().to_string()).put("rows", table.1.len());
    }
    Ok(())
}

fn feedback_section(report: &mut Report, plan: &FeedbackPlan) {
    let (growth, rate) = plan.lyapunov_bound();
    report
        .section("feedback")
        .put("lambda", plan.lambda)
        .put("horizon", plan.horizon)
        .put("shift", plan.shift)
        .put("certified_rate", plan.certified_rate)
        .put("lyapunov_growth", growth)
        .put("lyapunov_rate", rate)
        .put("gain_rows", plan.gain.nrows())
        .put("gain", plan.gain.transpose().iter().copied().collect::<Vec<_>>())
        .put("method", "weighted-gramian");
}

fn design_feedback(
    sys: &LinearSystem,
    shift: bool,
    omega: Option<f64>,
    horizon: f64,
    lambda: f64,
) -> Result<FeedbackPlan, CliError> {
    positive("T", horizon)?;
    positive("lambda", lambda)?;
    if shift {
        let omega = omega.ok_or_else(|| CliError::invalid("--omega is required for the shift design"))?;
        Ok(complete_stabilization_via_shift(sys, omega, horizon, lambda)?)
    } else {
        Ok(komornik_feedback(sys, horizon, lambda)?)
    }
}

/// Runs one command, writing the report to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let mut report = Report::new();
    match cli.command {
        Command::Example { name: Example::WaveHeat, n, lo, hi, output } => {
            let sys = wave_heat(n, lo, hi)?;
            match output {
                Some(path) => {
                    write_system_file(&path, &sys)?;
                    report
                        .put("command", "example")
                        .put("example", "wave-heat")
                        .put("grid_points", n)
                        .put("control_lo", lo)
                        .put("control_hi", hi)
                        .put("n", sys.n())
                        .put("m", sys.m())
                        .put("path", path.display().to_string());
                }
                None => {
                    out.write_all(write_system(&sys).as_bytes())?;
                    return Ok(());
                }
            }
        }

        Command::Gramian { common, horizon, lambda } => {
            check_common(&common)?;
            positive("T", horizon)?;
            let sys = load_system(&common.system)?;
            header(&mut report, "gramian", &common, &sys);
            let g = match lambda {
                Some(l) => {
                    positive("lambda", l)?;
                    komornik_gramian(&sys, horizon, l)?
                }
                None => gramian(&sys, horizon)?,
            };
            report
                .section("gramian")
                .put("horizon", horizon)
                .put("kind", if lambda.is_some() { "weighted" } else { "controllability" })
                .put(
                    "method",
                    if lambda.is_some() { "adaptive-gauss-legendre" } else { "block-exponential" },
                );
            if let Some(l) = lambda {
                report.put("lambda", l);
            }
            report
                .put("rank", g.rank(common.kernel_tol))
                .put("min_eigenvalue", g.min_eigenvalue())
                .put("max_eigenvalue", g.max_eigenvalue())
                .put("eigenvalues", g.eigenvalues().to_vec());
            kalman_section(&mut report, &sys, common.kalman_tol)?;
            thresholds(&mut report, &common);
            emit_csv(&common.output, &mut report, csvout::matrix_table(g.matrix()))?;
        }

        Command::Constants { common, horizon, alpha, alphas, oracle_samples } => {
            check_common(&common)?;
            positive("T", horizon)?;
            let curve_alphas = match &alphas {
                Some(text) => parse_list("alphas", text)?,
                None => Vec::new(),
            };
            let sys = load_system(&common.system)?;
            header(&mut report, "constants", &common, &sys);
            report.put("horizon", horizon);
            let g = gramian(&sys, horizon)?;
            let opts = weak_options(&common);
            observability(&mut report, "exact", &exact_controllability_constant(&g));
            observability(&mut report, "null", &null_controllability_constant(&sys, &g)?);
            if let Some(a) = alpha {
                let weak = weak_constant_with(&sys, &g, a, &opts)?;
                observability(&mut report, "weak", &weak);
                if oracle_samples > 0 {
                    let oracle = weak_constant_oracle(&sys, &g, a, oracle_samples)?;
                    report
                        .section("oracle")
                        .put("samples", oracle_samples)
                        .put("value", oracle.value)
                        .put("method", oracle.method.as_str());
                }
            }
            thresholds(&mut report, &common);
            let curve_alphas = if curve_alphas.is_empty() {
                alpha.into_iter().collect()
            } else {
                curve_alphas
            };
            if common.output.is_some() {
                if curve_alphas.is_empty() {
                    return Err(CliError::invalid("--output needs --alpha or --alphas"));
                }
                let curve = weak_constant_curve(&sys, &g, &curve_alphas, &opts)?;
                emit_csv(&common.output, &mut report, csvout::curve_table(&curve))?;
            }
        }

        Command::Minnorm { common, horizon, alpha, y0, grid } => {
            check_common(&common)?;
            positive("T", horizon)?;
            if grid == 0 {
                return Err(CliError::invalid("--grid must be positive"));
            }
            let sys = load_system(&common.system)?;
            let y0 = initial_state(&sys, &y0)?;
            header(&mut report, "minnorm", &common, &sys);
            let g = gramian(&sys, horizon)?;
            let sol = solve_min_norm(&sys, &g, &y0, alpha, grid)?;
            report
                .section("minnorm")
                .put("horizon", horizon)
                .put("alpha", alpha)
                .put("y0", y0.iter().copied().collect::<Vec<_>>())
                .put("mu", sol.mu)
                .put("s_value", sol.s_value)
                .put("r_bar", sol.r_bar)
                .put("psi_bar", sol.psi_bar.iter().copied().collect::<Vec<_>>())
                .put("control_l2", sol.control_l2)
                .put("terminal_norm", sol.terminal_state.norm())
                .put("target_radius", alpha * y0.norm())
                .put("grid", grid)
                .put("method", "dual-bisection");
            thresholds(&mut report, &common);
            emit_csv(&common.output, &mut report, csvout::control_table(&sol.times, &sol.control))?;
        }

        Command::Stabilize {
            common,
            mode,
            alpha,
            horizon,
            lambda,
            omega,
            steps,
            grid,
            t_end,
            y0,
        } => {
            check_common(&common)?;
            let sys = load_system(&common.system)?;
            let y0 = initial_state(&sys, &y0)?;
            header(&mut report, "stabilize", &common, &sys);
            let table = match mode {
                Mode::Concat => {
                    let opts = weak_options(&common);
                    let plan = concatenation_plan_with(&sys, alpha, horizon, &opts)?;
                    let run = run_concatenation(&sys, &plan, &y0, steps, grid)?;
                    let y0n = y0.norm();
                    report
                        .section("concatenation")
                        .put("alpha", alpha)
                        .put("period", horizon)
                        .put("constant", plan.constant)
                        .put("certified_rate", plan.certified_rate())
                        .put("steps", steps)
                        .put("grid", grid)
                        .put("measured_rate", run.measured_rate())
                        .put("period_norms", run.period_norms.clone())
                        .put("control_energy", run.control_energy)
                        .put(
                            "energy_bound",
                            plan.constant * plan.constant / (1.0 - alpha * alpha) * y0n * y0n,
                        )
                        .put("intermediate_bound", intermediate_bound(&sys, &plan, y0n)?)
                        .put("max_weighted_norm", run.max_weighted_norm(plan.certified_rate()))
                        .put("method", "optimized");
                    csvout::trajectory_table(&run.times, &run.states, true)
                }
                Mode::Komornik | Mode::Shift => {
                    positive("t-end", t_end)?;
                    let plan = design_feedback(&sys, mode == Mode::Shift, omega, horizon, lambda)?;
                    feedback_section(&mut report, &plan);
                    let samples = steps.max(1) * grid.max(1);
                    let (times, states) = simulate_feedback(&sys, &plan.gain, &y0, t_end, samples)?;
                    let last = states.last().expect("nonempty").norm();
                    report
                        .section("simulation")
                        .put("t_end", t_end)
                        .put("samples", samples)
                        .put("final_norm", last)
                        .put("measured_rate", (last / y0.norm()).ln() / t_end);
                    csvout::trajectory_table(&times, &states, true)
                }
            };
            thresholds(&mut report, &common);
            emit_csv(&common.output, &mut report, table)?;
        }

        Command::Sweep { common, alphas, horizons, floor } => {
            check_common(&common)?;
            let alphas = parse_list("alphas", &alphas)?;
            let horizons = parse_list("horizons", &horizons)?;
            let sys = load_system(&common.system)?;
            header(&mut report, "sweep", &common, &sys);
            let opts = SweepOptions { weak: weak_options(&common), floor };
            let est = sweep(&sys, &alphas, &horizons, &opts)?;
            report
                .section("sweep")
                .put("alphas", alphas.clone())
                .put("horizons", horizons.clone())
                .put("finite_cells", est.grid.iter().filter(|c| c.is_finite()).count())
                .put("cells", est.grid.len());
            if let (Some(w), Some((a, t))) = (est.omega_star_upper, est.argmin) {
                report.put("omega_star_upper", w).put("argmin_alpha", a).put("argmin_T", t);
            }
            report
                .put("unbounded_below", est.unbounded_below)
                .put("null_controllable", est.null_controllable)
                .put("floor", floor)
                .put("method", "grid");
            thresholds(&mut report, &common);
            emit_csv(&common.output, &mut report, csvout::sweep_table(&est.grid))?;
        }

        Command::Simulate {
            common,
            feedback,
            horizon,
            lambda,
            omega,
            t_end,
            samples,
            y0,
            no_states,
        } => {
            check_common(&common)?;
            positive("t-end", t_end)?;
            if samples == 0 {
                return Err(CliError::invalid("--samples must be positive"));
            }
            let sys = load_system(&common.system)?;
            let y0 = initial_state(&sys, &y0)?;
            header(&mut report, "simulate", &common, &sys);
            let gain = match feedback {
                Feedback::None => DMatrix::zeros(sys.m(), sys.n()),
                Feedback::Komornik | Feedback::Shift => {
                    let plan =
                        design_feedback(&sys, feedback == Feedback::Shift, omega, horizon, lambda)?;
                    feedback_section(&mut report, &plan);
                    plan.gain
                }
            };
            let (times, states) = simulate_feedback(&sys, &gain, &y0, t_end, samples)?;
            let last = states.last().expect("nonempty").norm();
            report
                .section("simulation")
                .put("feedback", format!("{feedback:?}").to_lowercase())
                .put("t_end", t_end)
                .put("samples", samples)
                .put("initial_norm", y0.norm())
                .put("final_norm", last);
            thresholds(&mut report, &common);
            emit_csv(&common.output, &mut report, csvout::trajectory_table(&times, &states, !no_states))?;
        }
    }
    out.write_all(report.render().as_bytes())?;
    Ok(())
}

/// Writes a control or trajectory table to standard output.
pub fn print_table(out: &mut dyn Write, table: &(Vec<String>, Vec<Vec<String>>)) -> Result<(), CliError> {
    write_table(out, &table.0, &table.1)?;
    Ok(())
}

/// Process entry: parses `args`, runs, and maps failures to exit statuses.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if code != 0 {
                eprintln!("error[invalid-argument]: command line");
            }
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error[{}]: {}", e.category, e.message);
            ExitCode::from(e.exit_code())
        }
    }
}
