//! `dst` — direct tomography of a single qubit in non-orthogonal bases:
//! bases and probabilities, linear-inversion reconstruction, Cramér–Rao
//! error bounds, finite-shot simulation and ensemble sweeps.

#![allow(clippy::needless_range_loop)]

mod files;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dst_core::crb::{crb_closed, crb_numeric, pure_average, sic_crb, sic_probabilities, CrbReport};
use dst_core::model::{
    biorthogonal_states, effective_states, probabilities, reconstruct, BasisSet,
    MeasurementStrength,
};
use dst_core::qubit::RealMatrix3;
use dst_core::sampling::RandomStream;
use dst_core::sim::empirical_mse;
use dst_core::sweep::{
    find_crossover, find_crossover_mixed, lambda_grid, run_sweep, sic_ensemble_average, Ensemble,
    EnsembleStats, SweepConfig,
};

#[derive(Debug)]
enum CliError {
    Core(dst_core::Error),
    Json(serde_json::Error),
    Io(std::io::Error),
    Usage(String),
    /// stdout went away (e.g. piped into `head`); exit quietly.
    Pipe,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Json(e) => write!(f, "invalid JSON: {e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Pipe => write!(f, "stdout closed"),
        }
    }
}

impl From<dst_core::Error> for CliError {
    fn from(e: dst_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            CliError::Pipe
        } else {
            CliError::Io(e)
        }
    }
}

impl CliError {
    /// 2 = validation error, 3 = numerical degeneracy, 4 = I/O failure.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Pipe => 0,
            CliError::Usage(_) | CliError::Json(_) => 2,
            CliError::Io(_) => 4,
            CliError::Core(dst_core::Error::Io(_)) => 4,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "dst",
    version,
    about = "Single-qubit direct state tomography: non-orthogonal bases, linear inversion, Cramér–Rao error bounds and Monte-Carlo sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Closed,
    Numeric,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnsembleArg {
    Pure,
    Bures,
    PaperLiteral,
}

impl From<EnsembleArg> for Ensemble {
    fn from(value: EnsembleArg) -> Self {
        match value {
            EnsembleArg::Pure => Ensemble::PureHaar,
            EnsembleArg::Bures => Ensemble::BuresMixed,
            EnsembleArg::PaperLiteral => Ensemble::PaperLiteralMixed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the effective and biorthogonal basis vectors at a strength
    Bases {
        /// Overlap parameter λ = cos 2θ in [0, 1)
        #[arg(long)]
        lambda: f64,
        /// Emit machine-readable JSON instead of the table
        #[arg(long)]
        json: bool,
    },
    /// Outcome probabilities of a state; output feeds `reconstruct`
    Probabilities {
        /// State file (JSON, "bloch" or "matrix" form)
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        lambda: f64,
    },
    /// Linear inversion of a probability file back to a density matrix
    Reconstruct {
        /// Probability file (JSON with "lambda" and "p")
        #[arg(long)]
        probs: PathBuf,
        /// Must match the file's lambda when given
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Cramér–Rao bound of one state at one strength
    Crb {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long, value_enum)]
        method: MethodArg,
    },
    /// SIC-POVM baseline: one state, or an ensemble average
    Sic {
        #[arg(long, conflicts_with_all = ["ensemble", "samples", "seed"])]
        state: Option<PathBuf>,
        #[arg(long, value_enum)]
        ensemble: Option<EnsembleArg>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Draw random states; one state-file JSON object per line
    Sample {
        #[arg(long, value_enum)]
        ensemble: EnsembleArg,
        #[arg(long)]
        count: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Finite-shot experiments: empirical MSE against the bound
    Simulate {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        shots: u64,
        #[arg(long)]
        runs: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Ensemble-averaged error bound over a λ grid; writes CSV (and SVG)
    Sweep {
        /// Grid as START:END:POINTS, e.g. 0:0.9:10
        #[arg(long)]
        grid: String,
        #[arg(long, value_enum)]
        ensemble: EnsembleArg,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// CSV output path
        #[arg(long)]
        out: PathBuf,
        /// Optional SVG chart path
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Worker threads; the output is identical for any value
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Strength at which the scheme stops beating SIC tomography
    Crossover {
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Also locate the Bures-mixed crossover with this many samples
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Pipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// All stdout goes through here so a closed pipe ends the run cleanly.
fn emit(text: impl fmt::Display) -> Result<(), CliError> {
    use std::io::Write;
    writeln!(std::io::stdout().lock(), "{text}")?;
    Ok(())
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Bases { lambda, json } => bases(lambda, json),
        Command::Probabilities { state, lambda } => {
            let rho = files::load_state(&state)?;
            let strength = MeasurementStrength::from_lambda(lambda)?;
            let probs = probabilities(&rho, strength)?;
            print_json(&files::probability_json(strength, &probs))
        }
        Command::Reconstruct { probs, lambda } => {
            let (strength, set) = files::load_probabilities(&probs)?;
            if let Some(l) = lambda {
                if (l - strength.lambda()).abs() > 1e-12 {
                    return Err(CliError::Usage(format!(
                        "--lambda {l} disagrees with the file's lambda {}",
                        strength.lambda()
                    )));
                }
            }
            let rho = reconstruct(&set, strength)?;
            let ev = rho.eigenvalues();
            let mut value = files::state_json(&rho);
            value["bloch"] = serde_json::json!(rho.bloch_vector());
            value["eigenvalues"] = serde_json::json!(ev);
            print_json(&value)
        }
        Command::Crb {
            state,
            lambda,
            method,
        } => {
            let rho = files::load_state(&state)?;
            let strength = MeasurementStrength::from_lambda(lambda)?;
            let probs = probabilities(&rho, strength)?;
            let (report, name) = match method {
                MethodArg::Closed => (crb_closed(&probs, strength)?, "closed"),
                MethodArg::Numeric => (crb_numeric(&probs, strength)?, "numeric"),
            };
            print_json(&report_json(strength, &report, name))
        }
        Command::Sic {
            state,
            ensemble,
            samples,
            seed,
            workers,
        } => sic(state, ensemble, samples, seed, workers),
        Command::Sample {
            ensemble,
            count,
            seed,
        } => sample(ensemble.into(), count, seed),
        Command::Simulate {
            state,
            lambda,
            shots,
            runs,
            seed,
        } => simulate(state, lambda, shots, runs, seed),
        Command::Sweep {
            grid,
            ensemble,
            samples,
            seed,
            out,
            svg,
            workers,
        } => sweep(&grid, ensemble.into(), samples, seed, out, svg, workers),
        Command::Crossover {
            tol,
            samples,
            seed,
            workers,
        } => crossover(tol, samples, seed, workers),
    }
}

fn print_json(value: &serde_json::Value) -> Result<(), CliError> {
    emit(serde_json::to_string_pretty(value)?)
}

fn basis_amplitudes(set: &BasisSet) -> Vec<Vec<[[f64; 2]; 2]>> {
    (0..3)
        .map(|t| {
            (0..2)
                .map(|k| {
                    let v = set.get(t, k);
                    [[v.amp0().re, v.amp0().im], [v.amp1().re, v.amp1().im]]
                })
                .collect()
        })
        .collect()
}

fn bases(lambda: f64, json: bool) -> Result<(), CliError> {
    let strength = MeasurementStrength::from_lambda(lambda)?;
    let eff = effective_states(strength);
    let duals = biorthogonal_states(strength);
    if json {
        return print_json(&serde_json::json!({
            "lambda": strength.lambda(),
            "theta": strength.theta(),
            "effective": basis_amplitudes(&eff),
            "biorthogonal": basis_amplitudes(&duals),
        }));
    }
    emit(format!(
        "lambda = {lambda}  (theta = {:.6} rad)",
        strength.theta()
    ))?;
    for (label, set) in [("effective", &eff), ("biorthogonal", &duals)] {
        emit(format!("{label} states:"))?;
        for t in 0..3 {
            for k in 0..2 {
                let v = set.get(t, k);
                emit(format!(
                    "  t={t} k={k}:  ({:+.6}{:+.6}i)|0> + ({:+.6}{:+.6}i)|1>",
                    v.amp0().re,
                    v.amp0().im,
                    v.amp1().re,
                    v.amp1().im
                ))?;
            }
        }
    }
    Ok(())
}

fn matrix_json(m: &RealMatrix3) -> serde_json::Value {
    serde_json::json!(m.rows())
}

fn report_json(
    strength: MeasurementStrength,
    report: &CrbReport,
    method: &str,
) -> serde_json::Value {
    serde_json::json!({
        "lambda": strength.lambda(),
        "method": method,
        "bound": report.bound,
        "e_min": report.e_min(),
        "q": matrix_json(&report.q),
        "fisher": report.fisher.as_ref().map(matrix_json),
    })
}

fn stats_json(stats: &EnsembleStats) -> serde_json::Value {
    serde_json::json!({
        "mean_e2": stats.mean_e2,
        "stderr": stats.stderr,
        "e_min": stats.e_min(),
        "samples": stats.samples,
        "excluded": stats.excluded,
    })
}

fn sic(
    state: Option<PathBuf>,
    ensemble: Option<EnsembleArg>,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<(), CliError> {
    match (state, ensemble) {
        (Some(path), None) => {
            let rho = files::load_state(&path)?;
            let probs = sic_probabilities(&rho)?;
            let bound = sic_crb(&rho)?;
            print_json(&serde_json::json!({
                "p": probs.values(),
                "bound": bound,
                "e_min": bound.sqrt(),
            }))
        }
        (None, Some(ens)) => {
            let stream = RandomStream::new(seed);
            let stats = sic_ensemble_average(ens.into(), samples, &stream, workers)?;
            let mut value = stats_json(&stats);
            value["ensemble"] = serde_json::json!(Ensemble::from(ens).label());
            value["seed"] = serde_json::json!(seed);
            print_json(&value)
        }
        _ => Err(CliError::Usage(
            "sic needs exactly one of --state or --ensemble".into(),
        )),
    }
}

fn sample(ensemble: Ensemble, count: u64, seed: u64) -> Result<(), CliError> {
    let stream = RandomStream::new(seed);
    for i in 0..count {
        let rho = dst_core::sweep::ensemble_state(ensemble, &stream, i);
        emit(serde_json::to_string(&files::state_json(&rho))?)?;
    }
    Ok(())
}

fn simulate(state: PathBuf, lambda: f64, shots: u64, runs: u64, seed: u64) -> Result<(), CliError> {
    let rho = files::load_state(&state)?;
    let strength = MeasurementStrength::from_lambda(lambda)?;
    let result = empirical_mse(&rho, strength, shots, runs, &RandomStream::new(seed))?;
    let bound = crb_closed(&probabilities(&rho, strength)?, strength)?.bound;
    print_json(&serde_json::json!({
        "lambda": strength.lambda(),
        "shots": shots,
        "runs": runs,
        "seed": seed,
        "mean_e2": result.mean_e2,
        "stderr": result.stderr,
        "per_trial_e2": result.per_trial_e2(),
        "crb_closed": bound,
        "saturation_ratio": result.per_trial_e2() / bound,
    }))
}

fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "grid must be START:END:POINTS, got {text}"
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad grid start {}", parts[0])))?;
    let end: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad grid end {}", parts[1])))?;
    let points: u64 = parts[2]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad grid point count {}", parts[2])))?;
    Ok(lambda_grid(start, end, points)?)
}

fn sweep(
    grid: &str,
    ensemble: Ensemble,
    samples: u64,
    seed: u64,
    out: PathBuf,
    svg: Option<PathBuf>,
    workers: usize,
) -> Result<(), CliError> {
    let config = SweepConfig {
        lambda_grid: parse_grid(grid)?,
        ensemble,
        samples,
        seed,
        output_path: out.clone(),
        svg_path: svg.clone(),
        workers,
    };
    let rows = run_sweep(&config)?;
    for row in &rows {
        emit(format!(
            "lambda {:>6.4}  e_min {:.5} ± {:.5}  (SIC pure 2.0, SIC mixed {:.4})",
            row.lambda,
            row.e_min_mc,
            row.e2_mc_stderr / (2.0 * row.e_min_mc),
            row.e_sic_mixed
        ))?;
    }
    eprintln!("wrote {}", out.display());
    if let Some(path) = svg {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn crossover(tol: f64, samples: Option<u64>, seed: u64, workers: usize) -> Result<(), CliError> {
    let pure_root = find_crossover(tol)?;
    let mut value = serde_json::json!({
        "pure_root": pure_root,
        "pure_value_at_root": pure_average(MeasurementStrength::from_lambda(pure_root)?)?,
        "tol": tol,
    });
    if let Some(samples) = samples {
        let mixed = find_crossover_mixed(samples, tol, &RandomStream::new(seed), workers)?;
        value["mixed"] = serde_json::json!({
            "root": mixed.lambda,
            "uncertainty": mixed.uncertainty,
            "samples": samples,
            "seed": seed,
        });
    }
    print_json(&value)
}
