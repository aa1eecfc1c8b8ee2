//! Command-line surface.
//!
//! Exit codes: `0` success, `1` usage or configuration error, `2` the
//! assessed or simulated operation point lies in the failure zone, `3`
//! numerical failure (divergence, degenerate geometry, root bracketing).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::flightlog::{self, FlightLog, TRACE_HEADER};
use crate::model::{self, OperationPoint};
use crate::planner::{self, CampaignPlan};
use crate::safety::{self, Assessment};
use crate::sim;

/// Predicts contact force and rotor thrusts for an aerial manipulator
/// pushing on an oriented surface, and grades operation points against
/// actuator saturation.
#[derive(Debug, Parser)]
#[command(name = "pushsafe", version, max_term_width = 100)]
struct Cli {
    /// Configuration file (flat key-value text or JSON).
    #[arg(long, global = true, env = "PUSHSAFE_CONFIG", value_name = "PATH")]
    config: Option<PathBuf>,

    /// Seed for disturbance injection in simulation runs.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify an operation point as SAFE, CRITICAL (with risk ratio) or
    /// FAILURE.
    Assess {
        /// Surface orientation [deg].
        beta0_deg: f64,
        /// Commanded roll [deg].
        phi0_deg: f64,
    },
    /// Emit the zone-boundary table for the given surface orientations as
    /// CSV, side by side with the published reference boundaries.
    Zones {
        /// Surface orientations [deg].
        #[arg(required = true)]
        beta0_deg: Vec<f64>,
    },
    /// Emit predicted force/thrust curves over the roll range as CSV.
    Sweep {
        /// Surface orientations [deg].
        #[arg(long = "betas", num_args = 1.., value_name = "DEG",
              default_values_t = [10.0, 30.0, 60.0, 80.0, 90.0])]
        beta0_deg: Vec<f64>,
        /// Roll step [deg].
        #[arg(long, default_value_t = 1.0, value_name = "DEG")]
        step: f64,
    },
    /// Print the risk ratio of an operation point.
    Risk {
        /// Surface orientation [deg].
        beta0_deg: f64,
        /// Commanded roll [deg].
        phi0_deg: f64,
    },
    /// Build a risk-ordered campaign plan from a case list.
    Plan {
        /// Case list CSV with columns beta0_deg,phi0_deg. Omit to use the
        /// cases from the configuration file.
        cases: Option<PathBuf>,
        /// Emit the plan as JSON instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Run the contact simulator at an operation point and report the
    /// steady state against the closed-form prediction.
    Simulate {
        /// Surface orientation [deg].
        beta0_deg: f64,
        /// Commanded roll [deg].
        phi0_deg: f64,
        /// Write the state trace as CSV to this path.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
    },
    /// Compare a flight log against the closed-form force prediction.
    Validate {
        /// Log CSV with `# beta0_deg=` / `# phi_ref_deg=` metadata.
        log: PathBuf,
    },
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParams(_)
        | Error::InvalidOperationPoint(_)
        | Error::InvalidLimits(_)
        | Error::RiskOutOfRange { .. }
        | Error::Config(_)
        | Error::LogParse { .. }
        | Error::Io(_) => 1,
        Error::DegenerateGeometry { .. }
        | Error::NegativeThrust { .. }
        | Error::NotBracketed { .. }
        | Error::NonMonotone { .. }
        | Error::NumericalBlowup { .. } => 3,
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.sim.seed = seed;
    }
    Ok(config)
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let config = load_config(cli)?;
    match &cli.command {
        Command::Assess {
            beta0_deg,
            phi0_deg,
        } => cmd_assess(*beta0_deg, *phi0_deg, &config),
        Command::Zones { beta0_deg } => cmd_zones(beta0_deg, &config),
        Command::Sweep { beta0_deg, step } => cmd_sweep(beta0_deg, *step, &config),
        Command::Risk {
            beta0_deg,
            phi0_deg,
        } => cmd_risk(*beta0_deg, *phi0_deg, &config),
        Command::Plan { cases, json } => cmd_plan(cases.as_deref(), *json, &config),
        Command::Simulate {
            beta0_deg,
            phi0_deg,
            trace,
        } => cmd_simulate(*beta0_deg, *phi0_deg, trace.as_deref(), &config),
        Command::Validate { log } => cmd_validate(log, &config),
    }
}

/// Risk ratio for display: the published integer boundary where one
/// exists for this surface orientation, the continuous root otherwise.
fn display_lambda(beta0_deg: f64, phi0_deg: f64, phi_u_cont: f64) -> f64 {
    if let Some((_, _, crit_hi)) = safety::reference_zone(beta0_deg) {
        let phi_u_ref = crit_hi as f64;
        if phi0_deg <= phi_u_ref {
            return phi0_deg / phi_u_ref;
        }
    }
    phi0_deg / phi_u_cont
}

fn cmd_assess(beta0_deg: f64, phi0_deg: f64, config: &RunConfig) -> Result<i32> {
    let limits = config.limits()?;
    let assessment = safety::classify(beta0_deg, phi0_deg, &config.vehicle, &limits)?;
    let op = OperationPoint::new(beta0_deg, phi0_deg)?;
    let sol = model::equilibrium_solution(op, &config.vehicle)?;

    let code = match assessment {
        Assessment::Safe => {
            println!("SAFE");
            0
        }
        Assessment::Critical { lambda } => {
            let phi_u = safety::thrust_boundary(beta0_deg, limits.t_max, &config.vehicle)?;
            let shown = display_lambda(beta0_deg, phi0_deg, phi_u);
            println!("CRITICAL λ={shown:.2}");
            println!("lambda_model={lambda:.6} phi_u_model_deg={phi_u:.6}");
            if let Some((_, _, crit_hi)) = safety::reference_zone(beta0_deg) {
                println!(
                    "lambda_table={:.6} phi_u_table_deg={}",
                    phi0_deg / crit_hi as f64,
                    crit_hi
                );
            }
            0
        }
        Assessment::Failure => {
            println!("FAILURE");
            2
        }
    };
    println!(
        "f_e_N={:.6} T_sum_N={:.6} T_in_N={:.6} T_out_N={:.6}",
        sol.f_e, sol.t_sum, sol.t_in, sol.t_out
    );
    println!(
        "limits: T_max_N={:.6} eta_T_max_N={:.6}",
        limits.t_max,
        limits.eta * limits.t_max
    );
    Ok(code)
}

fn cmd_zones(beta_list: &[f64], config: &RunConfig) -> Result<i32> {
    let limits = config.limits()?;
    let zones = safety::zone_table(beta_list, &config.vehicle, &limits)?;
    println!(
        "beta0_deg,phi_safe_hi_deg,phi_crit_hi_deg,safe_hi_deg,crit_lo_deg,crit_hi_deg,\
         ref_safe_hi_deg,ref_crit_lo_deg,ref_crit_hi_deg,dev_safe_deg,dev_crit_deg"
    );
    for z in &zones {
        let (ref_cols, dev_cols) = match safety::reference_zone(z.beta0_deg) {
            Some((s, cl, ch)) => (
                format!("{s},{cl},{ch}"),
                format!(
                    "{:.6},{:.6}",
                    z.phi_safe_hi_deg - s as f64,
                    z.phi_crit_hi_deg - ch as f64
                ),
            ),
            None => (",,".to_string(), ",".to_string()),
        };
        println!(
            "{:.6},{:.6},{:.6},{},{},{},{ref_cols},{dev_cols}",
            z.beta0_deg,
            z.phi_safe_hi_deg,
            z.phi_crit_hi_deg,
            z.table_safe_hi,
            z.table_crit_lo,
            z.table_crit_hi
        );
    }
    Ok(0)
}

fn cmd_sweep(beta_list: &[f64], step: f64, config: &RunConfig) -> Result<i32> {
    let rows = model::sweep_curves(beta_list, step, &config.vehicle)?;
    println!("beta0_deg,phi0_deg,f_e_N,T_sum_N,T_in_N,T_out_N");
    for r in &rows {
        println!(
            "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.beta0_deg, r.phi0_deg, r.f_e, r.t_sum, r.t_in, r.t_out
        );
    }
    Ok(0)
}

fn cmd_risk(beta0_deg: f64, phi0_deg: f64, config: &RunConfig) -> Result<i32> {
    let limits = config.limits()?;
    OperationPoint::new(beta0_deg, phi0_deg)?.check_nondegenerate()?;
    let phi_u = safety::thrust_boundary(beta0_deg, limits.t_max, &config.vehicle)?;
    let lambda = safety::risk(phi0_deg, phi_u)?;
    println!("lambda={lambda:.6} phi_u_deg={phi_u:.6}");
    if let Some((_, _, crit_hi)) = safety::reference_zone(beta0_deg) {
        if phi0_deg <= crit_hi as f64 {
            println!(
                "lambda_table={:.6} phi_u_table_deg={}",
                phi0_deg / crit_hi as f64,
                crit_hi
            );
        }
    }
    Ok(0)
}

/// Parses a case list CSV: optional `beta0_deg,phi0_deg` header, one
/// `beta,phi` pair per line, `#` comments.
fn read_cases(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut cases = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if i == 0 && line.chars().any(|c| c.is_alphabetic()) {
            continue; // header row
        }
        let mut it = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.and_then(|s| s.trim().parse().ok()).ok_or_else(|| {
                Error::Config(format!(
                    "{}:{}: expected 'beta0_deg,phi0_deg'",
                    path.display(),
                    i + 1
                ))
            })
        };
        let beta = parse(it.next())?;
        let phi = parse(it.next())?;
        cases.push((beta, phi));
    }
    Ok(cases)
}

fn print_plan_csv(plan: &CampaignPlan) {
    println!("order,beta0_deg,phi0_deg,zone,lambda,status");
    for (i, c) in plan.cases.iter().enumerate() {
        let (zone, lambda) = match c.assessment {
            Assessment::Safe => ("safe".to_string(), String::new()),
            Assessment::Critical { lambda } => ("critical".to_string(), format!("{lambda:.6}")),
            Assessment::Failure => ("failure".to_string(), String::new()),
        };
        println!(
            "{},{:.6},{:.6},{zone},{lambda},planned",
            i + 1,
            c.beta0_deg,
            c.phi0_deg
        );
    }
    for c in &plan.excluded {
        println!(",{:.6},{:.6},failure,,excluded", c.beta0_deg, c.phi0_deg);
    }
}

fn cmd_plan(cases: Option<&Path>, json: bool, config: &RunConfig) -> Result<i32> {
    let cases: Vec<(f64, f64)> = match cases {
        Some(path) => read_cases(path)?,
        None => config.cases.iter().map(|c| (c[0], c[1])).collect(),
    };
    if cases.is_empty() {
        return Err(Error::Config(
            "no cases given: pass a case list CSV or set 'case = <beta0> <phi0>' in the config"
                .into(),
        ));
    }
    let limits = config.limits()?;
    let plan = planner::build_plan(&cases, &config.vehicle, &limits)?;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&plan).map_err(|e| Error::Config(e.to_string()))?
        );
    } else {
        print_plan_csv(&plan);
    }
    Ok(0)
}

fn write_trace(path: &Path, beta0_deg: f64, phi0_deg: f64, result: &sim::SimResult) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# beta0_deg={beta0_deg}\n"));
    out.push_str(&format!("# phi_ref_deg={phi0_deg}\n"));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &result.trace {
        out.push_str(&format!(
            "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}\n",
            r.t_s,
            r.y_m,
            r.z_m,
            r.phi_deg,
            r.f_n_n,
            r.f_s_n,
            r.t_in_n,
            r.t_out_n,
            u8::from(r.saturated)
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn cmd_simulate(
    beta0_deg: f64,
    phi0_deg: f64,
    trace: Option<&Path>,
    config: &RunConfig,
) -> Result<i32> {
    let limits = config.limits()?;
    let assessment = safety::classify(beta0_deg, phi0_deg, &config.vehicle, &limits)?;
    let op = OperationPoint::new(beta0_deg, phi0_deg)?;
    let result = sim::run_to_equilibrium(op, &config.vehicle, &limits, &config.sim)?;
    let predicted = model::equilibrium_solution(op, &config.vehicle);

    let zone = match assessment {
        Assessment::Safe => "safe".to_string(),
        Assessment::Critical { lambda } => format!("critical (lambda={lambda:.4})"),
        Assessment::Failure => "failure".to_string(),
    };
    println!("zone: {zone}");
    println!("converged: {}", result.converged);
    println!(
        "steady: f_n_N={:.6} f_s_N={:.6} T_in_N={:.6} T_out_N={:.6}",
        result.steady_f_n, result.steady_f_s, result.steady_t_in, result.steady_t_out
    );
    match predicted {
        Ok(p) => println!(
            "predicted: f_e_N={:.6} T_in_N={:.6} T_out_N={:.6}",
            p.f_e, p.t_in, p.t_out
        ),
        Err(e) => println!("predicted: infeasible ({e})"),
    }
    println!(
        "saturation_events={} steps={} final_roll_deg={:.4}",
        result.saturation_events, result.steps, result.final_roll_deg
    );
    if let Some(path) = trace {
        write_trace(path, beta0_deg, phi0_deg, &result)?;
        println!("trace written to {}", path.display());
    }
    Ok(if assessment == Assessment::Failure { 2 } else { 0 })
}

fn cmd_validate(log_path: &Path, config: &RunConfig) -> Result<i32> {
    let log = FlightLog::load(log_path)?;
    let report = flightlog::validate_log(&log, &config.vehicle)?;
    println!(
        "beta0_deg={} phi_ref_deg={} rows={}",
        log.beta0_deg,
        log.phi_ref_deg,
        log.rows.len()
    );
    println!("f_e_pred_N={:.6}", report.f_e_pred);
    println!(
        "mean_abs_err_N={:.6} max_abs_err_N={:.6} steady_err_N={:.6}",
        report.mean_abs_err, report.max_abs_err, report.steady_err
    );
    println!(
        "pointwise_mean_abs_err_N={:.6} pointwise_max_abs_err_N={:.6}",
        report.pointwise_mean_abs_err, report.pointwise_max_abs_err
    );
    Ok(0)
}
