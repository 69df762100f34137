use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hemtsq::config::CircuitConfig;
use hemtsq::response::{settling_time_of, step_response};
use hemtsq::sweep::{
    antibunching_width, emit_csv, emit_panels, format_csv, run_sweep, var_y2_minimum, PathSelection, SweepParam,
    SweepSpec,
};
use hemtsq::{selfcheck, Error};

/// Consulted when `--config` is not given.
const CONFIG_ENV: &str = "HEMTSQ_CONFIG";

/// Window used when the transfer function has no settling time to size it.
const UNSETTLED_WINDOW: f64 = 200e-9;
const STEP_SAMPLES: f64 = 20_000.0;

#[derive(Parser)]
#[command(name = "hemtsq", version, about = "Squeezing and photon statistics of a transistor-coupled resonator pair")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the resolved config and every derived coefficient with units.
    Coeffs {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Sweep one parameter and write one CSV row per point.
    Sweep {
        /// g_m, g_m2, g_m3, C_f, V_RF or kappa (kappa is the ratio kappa/omega).
        #[arg(long)]
        param: SweepParam,
        #[arg(long, allow_negative_numbers = true)]
        start: f64,
        #[arg(long, allow_negative_numbers = true)]
        stop: f64,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output CSV; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "full")]
        path: PathSelection,
        /// Also write two-column `<stem>_<column>.csv` files next to `--out`.
        #[arg(long, requires = "out")]
        panels: bool,
    },
    /// Step response of the small-signal amplifier, written as `t,v_out` CSV.
    StepResponse {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Simulated time in seconds.
        #[arg(long)]
        duration: Option<f64>,
        /// Output sample spacing in seconds.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Run the invariant self-test suite.
    Check,
}

fn load(path: Option<PathBuf>) -> hemtsq::Result<CircuitConfig> {
    let path = path.or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let cfg = match path {
        Some(p) => CircuitConfig::load(&p)?,
        None => CircuitConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn coeffs(config: Option<PathBuf>) -> hemtsq::Result<()> {
    let cfg = load(config)?;
    let c = cfg.coefficients()?;
    let mut out = std::io::stdout().lock();
    write!(out, "{}", cfg.echo())?;
    writeln!(out, "# derived coefficients")?;
    for (name, value, unit) in c.fields() {
        writeln!(out, "{name} = {value:.12e} {unit}")?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    parameter: SweepParam,
    start: f64,
    stop: f64,
    points: usize,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    paths: PathSelection,
    panels: bool,
) -> hemtsq::Result<()> {
    let fixed = load(config)?;
    let spec = SweepSpec { parameter, start, stop, points, fixed, paths };
    spec.validate()?;
    eprint!("{}", spec.fixed.echo());
    let rows = run_sweep(&spec)?;
    match &out {
        Some(p) => emit_csv(&rows, p)?,
        None => print!("{}", format_csv(&rows)),
    }
    if panels {
        let base = out.as_deref().unwrap_or(Path::new("sweep.csv"));
        for p in emit_panels(&rows, parameter.name(), base)? {
            eprintln!("wrote {}", p.display());
        }
    }
    for r in rows.iter().filter(|r| !r.warnings.is_empty()) {
        eprintln!("warning at {} = {:e}: {}", parameter.name(), r.param_value, r.warnings.join("; "));
    }
    eprintln!("g2 < 1 over a {} width of {:e}", parameter.name(), antibunching_width(&rows));
    if let Some(i) = var_y2_minimum(&rows) {
        eprintln!("smallest var_y2 = {:.6} at {} = {:e}", rows[i].var_y2, parameter.name(), rows[i].param_value);
    }
    Ok(())
}

fn step(config: Option<PathBuf>, out: PathBuf, duration: Option<f64>, dt: Option<f64>) -> hemtsq::Result<()> {
    let cfg = load(config)?;
    let tf = cfg.transfer_function()?;
    if cfg.r_damp.is_none() {
        eprintln!(
            "note: s^3 and s^1 denominator terms used as printed (no resistance divisor); set R_damp to insert one"
        );
    }
    let duration = match duration {
        Some(d) => d,
        None => tf.suggested_duration().unwrap_or(UNSETTLED_WINDOW),
    };
    let dt = dt.unwrap_or(duration / STEP_SAMPLES);
    let series = step_response(&tf, duration, dt)?;
    series.write_csv(&out)?;
    eprintln!("wrote {} samples to {}", series.t.len(), out.display());
    for p in tf.poles() {
        eprintln!("pole {:+.6e} {:+.6e}i rad/s", p.re, p.im);
    }
    let ts = settling_time_of(&tf, cfg.settle_band)?;
    println!("settling time ({}% band) = {ts:.6e} s", cfg.settle_band * 100.0);
    Ok(())
}

fn check() -> hemtsq::Result<bool> {
    let start = std::time::Instant::now();
    let results = selfcheck::run_all();
    let mut out = std::io::stdout().lock();
    for r in &results {
        writeln!(out, "{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail)?;
    }
    let elapsed = start.elapsed().as_secs_f64();
    let fast = elapsed < 60.0;
    writeln!(out, "{} runtime: {elapsed:.2} s", if fast { "PASS" } else { "FAIL" })?;
    Ok(fast && results.iter().all(|r| r.passed))
}

fn exit_code(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    if e.is_validation() {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Coeffs { config } => coeffs(config),
        Command::Sweep { param, start, stop, points, config, out, path, panels } => {
            sweep(param, start, stop, points, config, out, path, panels)
        }
        Command::StepResponse { config, out, duration, dt } => step(config, out, duration, dt),
        Command::Check => match check() {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(2),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_code(&e),
    }
}
