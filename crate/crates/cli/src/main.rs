use std::env;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dnls_core::constants::verify_w_constants;
use dnls_core::experiments::{
    recover_ground_states, resolve_output_dir, run_experiment, ExperimentConfig, GroundStateMethod,
    GROUNDSTATE_CSV_HEADER,
};
use dnls_core::functionals::{
    action_s, constraint_k, critical_cubic, ratio_f, relative_gn_deficit, Gauge, GROUND_STATE_MASS,
    RATIO_SQUARED_TARGET,
};
use dnls_core::gauge::gauge_v_to_u;
use dnls_core::io::{read_field, write_field};
use dnls_core::modulation::{fit_full_orbit, fit_ground_state_orbit, Seminorm, DEFAULT_SCALE_BRACKET, FIT_CSV_HEADER};
use dnls_core::solitons::ground_state_w;
use dnls_core::{make_grid, Error};

const EXIT_FAILURE: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_INTEGRATOR_ABORT: u8 = 3;

#[derive(Parser)]
#[command(name = "dnlslab", version, about = "Derivative NLS soliton laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run { config: PathBuf },
    /// Check the closed-form norms and variational constants of W on a grid.
    VerifyConstants {
        #[arg(long = "L", default_value_t = 400.0)]
        length: f64,
        #[arg(long = "N", default_value_t = 16384)]
        points: usize,
    },
    /// Recover the ground state from several starts.
    Groundstate {
        #[arg(long, value_enum, default_value_t = MethodArg::Shoot)]
        method: MethodArg,
        #[arg(long = "L", default_value_t = 400.0)]
        length: f64,
        #[arg(long = "N", default_value_t = 8192)]
        points: usize,
        /// Directory for the recovered profiles as field files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a stored field to the ground-state or solitary-wave orbit.
    Fit {
        field: PathBuf,
        #[arg(long, value_enum, default_value_t = FitMode::Prop13)]
        mode: FitMode,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        bracket: Option<Vec<f64>>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Shoot,
    Minimize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitMode {
    /// `Hdot^1` distance to the orbit `e^{i theta} W(. - y)`.
    Prop13,
    /// `H^1` distance to the orbit `e^{i theta} R_lambda(t, . - y)`.
    Full,
}

enum Outcome {
    Success,
    Failed,
    Aborted,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => run(&config),
        Command::VerifyConstants { length, points } => verify_constants(length, points),
        Command::Groundstate { method, length, points, out } => groundstate(method, length, points, out.as_deref()),
        Command::Fit { field, mode, bracket } => fit(&field, mode, bracket),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(EXIT_FAILURE),
        Ok(Outcome::Aborted) => ExitCode::from(EXIT_INTEGRATOR_ABORT),
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_precondition() {
                ExitCode::from(EXIT_PRECONDITION)
            } else if matches!(e, Error::IntegratorAbort(_)) {
                ExitCode::from(EXIT_INTEGRATOR_ABORT)
            } else {
                ExitCode::from(EXIT_FAILURE)
            }
        }
    }
}

fn run(path: &Path) -> Result<Outcome, Error> {
    let config = ExperimentConfig::load(path)?;
    let root = env::var_os("DNLSLAB_OUT").map(PathBuf::from);
    let dir = resolve_output_dir(&config.output_dir, root.as_deref());
    let summary = run_experiment(&config, &dir)?;
    println!("kind = {}", summary.kind);
    println!("output = {}", summary.output_dir.display());
    if let Some(t) = summary.terminated {
        println!("terminated = {t}");
    }
    for (k, v) in &summary.entries {
        println!("{k} = {v}");
    }
    Ok(if summary.integrator_aborted() { Outcome::Aborted } else { Outcome::Success })
}

fn report(name: &str, value: f64, target: f64, tol: f64) -> bool {
    let ok = (value - target).abs() <= tol;
    println!("{} {name}: {value:.12} (target {target:.12}, tol {tol:e})", if ok { "PASS" } else { "FAIL" });
    ok
}

fn verify_constants(length: f64, points: usize) -> Result<Outcome, Error> {
    let grid = make_grid(length, points)?;
    let mut all = true;
    for c in verify_w_constants(&grid)? {
        let ok = c.passes(1e-8);
        all &= ok;
        println!(
            "{} {}: grid {:.12} tail-corrected rel err {:.2e} (tol {:.0e}), truncated-integral gap {:.2e}",
            if ok { "PASS" } else { "FAIL" },
            c.constant.name(),
            c.grid_value,
            c.relative_error(),
            c.constant.tolerance(),
            c.truncation_gap()
        );
    }
    let w = ground_state_w(&grid, 1.0)?;
    all &= report("S(W)", action_s(&w), 4.0 * std::f64::consts::PI, 1e-3);
    all &= report("K(W)", constraint_k(&w), 0.0, 1e-3);
    all &= report("relative GN deficit of W", relative_gn_deficit(&w)?, 0.0, 1e-6);
    let f = ratio_f(&w).ok_or(Error::ZeroField("ratio"))?;
    all &= report("f(W)^2", f * f, RATIO_SQUARED_TARGET, 1e-3);
    let m0 = GROUND_STATE_MASS;
    all &= report("critical cubic at 8 pi / 3", critical_cubic(m0, RATIO_SQUARED_TARGET), 0.0, 1e-9 * m0.powi(3));
    Ok(if all { Outcome::Success } else { Outcome::Failed })
}

fn groundstate(method: MethodArg, length: f64, points: usize, out: Option<&Path>) -> Result<Outcome, Error> {
    let grid = make_grid(length, points)?;
    let method = match method {
        MethodArg::Shoot => GroundStateMethod::Shoot,
        MethodArg::Minimize => GroundStateMethod::Minimize,
    };
    let checks = recover_ground_states(&grid, method)?;
    println!("{GROUNDSTATE_CSV_HEADER}");
    for c in &checks {
        println!("{}", c.csv_row());
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        for c in &checks {
            write_field(&dir.join(format!("{}_{}.field", c.method, c.start)), &c.profile, 0.0, Gauge::W)?;
        }
    }
    Ok(if checks.iter().all(|c| c.converged) { Outcome::Success } else { Outcome::Failed })
}

fn fit(path: &Path, mode: FitMode, bracket: Option<Vec<f64>>) -> Result<Outcome, Error> {
    let snapshot = read_field(path)?;
    let fit = match mode {
        FitMode::Prop13 => fit_ground_state_orbit(&snapshot.field, 1.0, Seminorm::HDot1)?,
        FitMode::Full => {
            let u = match snapshot.gauge {
                Gauge::U => snapshot.field,
                Gauge::V => gauge_v_to_u(&snapshot.field),
                Gauge::W => {
                    return Err(Error::Precondition("the full orbit fit needs a u or v field".into()));
                }
            };
            let bracket = bracket.map_or(DEFAULT_SCALE_BRACKET, |b| (b[0], b[1]));
            fit_full_orbit(&u, snapshot.t, bracket)?
        }
    };
    println!("{FIT_CSV_HEADER}");
    println!("{}", fit.csv_row(snapshot.t));
    Ok(Outcome::Success)
}
