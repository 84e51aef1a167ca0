use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use asmo_drive::benchmark::{run_demo, write_demo_csv, DemoConfig, DemoMode};
use asmo_drive::sim::{run_scenario, sweep, write_metrics_json, write_run_csv, ScenarioConfig};
use asmo_drive::Error;

/// Sensorless induction-motor drive simulator.
#[derive(Debug, Parser)]
#[command(name = "asmo-drive", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write run.csv and metrics.json.
    Simulate {
        /// Scenario config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the second-order sliding-mode benchmark plant.
    Testplant {
        /// 1 = state feedback, 2 = with disturbance, 3 = disturbance plus SMC.
        #[arg(long)]
        mode: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a scenario once per value of one config parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Dotted JSON path, e.g. observer.gains.k_R.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
        /// Directory for sweep.csv (defaults to the current directory).
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

// stdout may be a closed pipe (`| head`); results are already on disk
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

enum Failure {
    Usage(Error),
    Runtime(Error),
}

fn prepare_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Runtime(e.into()))
}

fn create(path: PathBuf) -> Result<File, Failure> {
    File::create(&path).map_err(|e| Failure::Runtime(Error::Io(format!("{}: {e}", path.display()))))
}

fn simulate(config: &Path, out: &Path) -> Result<bool, Failure> {
    let cfg = ScenarioConfig::load(config).map_err(Failure::Usage)?;
    let result = run_scenario(&cfg).map_err(Failure::Runtime)?;
    prepare_dir(out)?;
    write_run_csv(&result, create(out.join("run.csv"))?).map_err(Failure::Runtime)?;
    write_metrics_json(&result, create(out.join("metrics.json"))?).map_err(Failure::Runtime)?;
    let pass = result.verdict();
    if let Some(f) = &result.failure {
        eprintln!("scenario aborted at t = {}: {}", f.t, f.reason);
    }
    if let Some(m) = &result.metrics {
        say!(
            "speed_rms_error={} convergence_time={} flux_rms_error={} Rr_final_error={} stability={}",
            m.speed_rms_error,
            m.convergence_time.map_or("none".to_string(), |t| t.to_string()),
            m.flux_rms_error,
            m.rr_final_error,
            m.stability_classification
                .map_or("n/a".to_string(), |c| c.to_string()),
        );
    }
    say!("verdict: {}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

fn testplant(mode: &str, out: &Path) -> Result<bool, Failure> {
    let mode: DemoMode = mode.parse().map_err(Failure::Usage)?;
    let result = run_demo(mode, &DemoConfig::default()).map_err(Failure::Runtime)?;
    prepare_dir(out)?;
    let path = out.join(format!("testplant_mode{}.csv", mode.number()));
    write_demo_csv(&result.samples, create(path)?).map_err(Failure::Runtime)?;
    let v = &result.verdict;
    say!(
        "verdict: {} mode={} terminal_norm={} steady_amplitude={} ultimate_bound={} rms_x1={}",
        if v.pass { "PASS" } else { "FAIL" },
        v.mode,
        v.terminal_norm,
        v.steady_amplitude,
        v.ultimate_bound,
        v.rms_x1
    );
    Ok(v.pass)
}

fn run_sweep(config: &Path, param: &str, values: &[f64], out: &Path) -> Result<bool, Failure> {
    use std::io::Write;
    if values.is_empty() {
        return Err(Failure::Usage(Error::Config("--values is empty".into())));
    }
    let cfg = ScenarioConfig::load(config).map_err(Failure::Usage)?;
    let points = sweep(&cfg, param, values).map_err(|e| match e {
        Error::Config(_) => Failure::Usage(e),
        other => Failure::Runtime(other),
    })?;
    prepare_dir(out)?;
    let mut w = create(out.join("sweep.csv"))?;
    let io = |e: std::io::Error| Failure::Runtime(e.into());
    writeln!(
        w,
        "{param},speed_rms_error,speed_max_error,convergence_time,flux_rms_error,Rr_final_error,stability_classification,verdict"
    )
    .map_err(io)?;
    let mut all = true;
    for p in &points {
        let pass = p.result.verdict();
        all &= pass;
        let line = match &p.result.metrics {
            Some(m) => format!(
                "{},{},{},{},{},{},{},{}",
                p.value,
                m.speed_rms_error,
                m.speed_max_error,
                m.convergence_time.map_or(String::new(), |t| t.to_string()),
                m.flux_rms_error,
                m.rr_final_error,
                m.stability_classification
                    .map_or(String::new(), |c| c.to_string()),
                if pass { "pass" } else { "fail" }
            ),
            None => format!("{},,,,,,,fail", p.value),
        };
        writeln!(w, "{line}").map_err(io)?;
        say!("{line}");
    }
    Ok(all)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Simulate { config, out } => simulate(config, out),
        Command::Testplant { mode, out } => testplant(mode, out),
        Command::Sweep {
            config,
            param,
            values,
            out,
        } => run_sweep(config, param, values, out),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
