//! Command-line front end: run scenarios, sweep level curves, measure
//! the tensor-approximation ladder, and emit CSV/JSON reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use balaw_core::entropy::{seminorm_pk, BoxTXU, EntropyTX};
use balaw_core::scenario::{
    builtin_scenario, emit, run_scenario, scenario_curves, write_curve_csv, ReportFormat,
    RunReport, ScenarioConfig, BUILTIN_SCENARIOS,
};
use balaw_core::tensor::{entropy_difference, tensor_approximate};

#[derive(Parser)]
#[command(name = "balaw", about = "Entropy production checks for scalar balance laws")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and write its report.
    Run {
        /// Builtin scenario name (see `list`).
        #[arg(long, conflicts_with = "config")]
        scenario: Option<String>,
        /// Path to a scenario config (JSON).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run the full builtin suite; fails if any check fails.
    Check {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Write k -> mu_k sweeps for a scenario (`k,value` CSV per test function).
    Curve {
        #[arg(long, conflicts_with = "config")]
        scenario: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Measure the separable-approximation seminorm ladder.
    Approx {
        /// Kernel orders, ascending.
        #[arg(long, value_delimiter = ',', default_values_t = [4u32, 8, 16, 32])]
        nu: Vec<u32>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// List builtin scenarios and checks.
    List,
}

fn load_config(
    scenario: &Option<String>,
    config: &Option<PathBuf>,
    seed: u64,
) -> Result<ScenarioConfig, String> {
    match (scenario, config) {
        (Some(name), None) => builtin_scenario(name, seed).map_err(|e| e.to_string()),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            ScenarioConfig::from_json(&text).map_err(|e| e.to_string())
        }
        _ => Err("exactly one of --scenario or --config is required".into()),
    }
}

fn emit_report(report: &RunReport, format: &str, out: &Path) -> Result<PathBuf, String> {
    let format: ReportFormat = format.parse().map_err(|e: balaw_core::Error| e.to_string())?;
    emit(report, format, out).map_err(|e| e.to_string())
}

fn cmd_run(
    scenario: &Option<String>,
    config: &Option<PathBuf>,
    out: &Path,
    format: &str,
    seed: u64,
    jobs: usize,
) -> Result<bool, String> {
    let cfg = load_config(scenario, config, seed)?;
    let report = run_scenario(&cfg, jobs).map_err(|e| e.to_string())?;
    let path = emit_report(&report, format, out)?;
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    println!(
        "{}: {}/{} checks passed ({})",
        report.scenario,
        report.checks.len() - failed,
        report.checks.len(),
        path.display()
    );
    Ok(report.all_pass())
}

fn cmd_check(out: &Path, format: &str, seed: u64, jobs: usize) -> Result<bool, String> {
    let mut ok = true;
    for name in BUILTIN_SCENARIOS {
        ok &= cmd_run(&Some((*name).into()), &None, out, format, seed, jobs)?;
    }
    Ok(ok)
}

fn cmd_curve(
    scenario: &Option<String>,
    config: &Option<PathBuf>,
    out: &Path,
    seed: u64,
) -> Result<bool, String> {
    let cfg = load_config(scenario, config, seed)?;
    let curves = scenario_curves(&cfg).map_err(|e| e.to_string())?;
    std::fs::create_dir_all(out).map_err(|e| e.to_string())?;
    for (label, curve) in &curves {
        let path = out.join(format!("{}_curve_{label}.csv", cfg.name));
        let mut f = std::fs::File::create(&path).map_err(|e| e.to_string())?;
        write_curve_csv(curve, &mut f).map_err(|e| e.to_string())?;
        println!(
            "{}: {} samples, total variation {:e}",
            path.display(),
            curve.k_grid.len(),
            curve.total_variation
        );
    }
    Ok(true)
}

fn approx_inputs() -> Vec<(&'static str, EntropyTX)> {
    let sin_cos = EntropyTX {
        e: Arc::new(|t: f64, _, u: f64| t.sin() * u.cos()),
        de_dt: Arc::new(|t: f64, _, u: f64| t.cos() * u.cos()),
        de_dx: Arc::new(|_, _, _| 0.0),
        de_du: Arc::new(|t: f64, _, u: f64| -t.sin() * u.sin()),
        d2e_dtdu: Arc::new(|t: f64, _, u: f64| -t.cos() * u.sin()),
        d2e_dxdu: Arc::new(|_, _, _| 0.0),
        d2e_dudu: Some(Arc::new(|t: f64, _, u: f64| -t.sin() * u.cos())),
        d3e_dtduu: None,
        d3e_dxduu: None,
        t_support: (-2.0, 2.0),
        x_support: (-2.0, 2.0),
    };
    let gauss_like = EntropyTX {
        e: Arc::new(|t: f64, x: f64, u: f64| (-0.5 * (t * t + x * x)).exp() * u * u),
        de_dt: Arc::new(|t: f64, x: f64, u: f64| -t * (-0.5 * (t * t + x * x)).exp() * u * u),
        de_dx: Arc::new(|t: f64, x: f64, u: f64| -x * (-0.5 * (t * t + x * x)).exp() * u * u),
        de_du: Arc::new(|t: f64, x: f64, u: f64| 2.0 * (-0.5 * (t * t + x * x)).exp() * u),
        d2e_dtdu: Arc::new(|t: f64, x: f64, u: f64| {
            -2.0 * t * (-0.5 * (t * t + x * x)).exp() * u
        }),
        d2e_dxdu: Arc::new(|t: f64, x: f64, u: f64| {
            -2.0 * x * (-0.5 * (t * t + x * x)).exp() * u
        }),
        d2e_dudu: Some(Arc::new(|t: f64, x: f64, _| 2.0 * (-0.5 * (t * t + x * x)).exp())),
        d3e_dtduu: None,
        d3e_dxduu: None,
        t_support: (-2.0, 2.0),
        x_support: (-2.0, 2.0),
    };
    vec![("sin_cos", sin_cos), ("gauss_square", gauss_like)]
}

fn cmd_approx(nu: &[u32], out: &Path) -> Result<bool, String> {
    let k = BoxTXU { t: (-1.0, 1.0), x: (-1.0, 1.0), u: (-1.0, 1.0) };
    std::fs::create_dir_all(out).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut csv = String::from("input,nu,seminorm\n");
    for (label, zeta) in approx_inputs() {
        let mut last = f64::INFINITY;
        for &n in nu {
            let s = tensor_approximate(&zeta, &k, n).map_err(|e| e.to_string())?;
            let approx = s.to_entropy_tx(zeta.t_support, zeta.x_support);
            let err = seminorm_pk(&entropy_difference(&zeta, &approx), &k, 9);
            println!("{label}: nu = {n:3}  p_K error = {err:e}");
            csv.push_str(&format!("{label},{n},{err:e}\n"));
            // Ladder contract: non-increasing with 5% slack.
            ok &= err <= last * 1.05;
            last = err;
        }
    }
    let path = out.join("approx_ladder.csv");
    std::fs::write(&path, csv).map_err(|e| e.to_string())?;
    println!("wrote {}", path.display());
    Ok(ok)
}

fn cmd_list() {
    println!("builtin scenarios:");
    for name in BUILTIN_SCENARIOS {
        let cfg = builtin_scenario(name, 0).expect("builtin exists");
        println!("  {name}: checks = {}", cfg.checks.join(", "));
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::Run { scenario, config, out, format, seed, jobs } => {
            cmd_run(scenario, config, out, format, *seed, *jobs)
        }
        Cmd::Check { out, format, seed, jobs } => cmd_check(out, format, *seed, *jobs),
        Cmd::Curve { scenario, config, out, seed } => cmd_curve(scenario, config, out, *seed),
        Cmd::Approx { nu, out } => cmd_approx(nu, out),
        Cmd::List => {
            cmd_list();
            Ok(true)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
