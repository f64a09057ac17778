//! Ensemble averaging over strength grids, crossover location against the
//! SIC baseline, and figure-data generation (CSV, minimal SVG).
//!
//! Sample i of every ensemble loop draws from the substream at
//! `counter = i·SAMPLE_STRIDE`, and all reductions are fixed-order
//! pairwise, so results are bitwise independent of the worker count.

use std::path::PathBuf;

use crate::crb::{crb_closed, pure_average, sic_crb};
use crate::error::{Error, Result};
use crate::model::{probabilities, MeasurementStrength};
use crate::qubit::DensityMatrix;
use crate::sampling::{sample_bures, sample_mixed_param, sample_pure, RandomStream, SAMPLE_STRIDE};
use crate::util::pairwise_sum;

/// Analytic per-trial √MSE of SIC tomography averaged over Haar pure
/// states.
pub const SIC_PURE_E_MIN: f64 = 2.0;

/// Which random ensemble a sweep averages over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ensemble {
    /// Haar-uniform pure states.
    PureHaar,
    /// Bures-measure mixed states (eigenvalue density + Haar eigenframe).
    BuresMixed,
    /// The angle-and-phase mixture with generally non-orthogonal
    /// components; kept for comparison, not used for pinned numbers.
    PaperLiteralMixed,
}

impl Ensemble {
    pub fn label(&self) -> &'static str {
        match self {
            Ensemble::PureHaar => "pure",
            Ensemble::BuresMixed => "bures",
            Ensemble::PaperLiteralMixed => "paper-literal",
        }
    }
}

/// The state of sample `index`: a pure function of (seed, ensemble, index).
pub fn ensemble_state(ensemble: Ensemble, stream: &RandomStream, index: u64) -> DensityMatrix {
    let mut s = stream.at(stream.counter() + index * SAMPLE_STRIDE);
    match ensemble {
        Ensemble::PureHaar => sample_pure(&mut s).projector(),
        Ensemble::BuresMixed => sample_bures(&mut s),
        Ensemble::PaperLiteralMixed => sample_mixed_param(&mut s).density_matrix(),
    }
}

/// Monte-Carlo mean with standard error and an exclusion count for draws
/// a bound could not be evaluated on.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleStats {
    pub mean_e2: f64,
    pub stderr: f64,
    pub samples: u64,
    pub excluded: u64,
}

impl EnsembleStats {
    pub fn e_min(&self) -> f64 {
        self.mean_e2.sqrt()
    }
}

/// Fills `values[i] = f(i)` for i < n, splitting the index range over
/// `workers` threads. Each value depends only on its index.
fn parallel_fill<F>(n: u64, workers: usize, f: F) -> Vec<f64>
where
    F: Fn(u64) -> f64 + Sync,
{
    let mut values = vec![0.0f64; n as usize];
    let workers = workers.max(1).min(n.max(1) as usize);
    if workers == 1 {
        for (i, slot) in values.iter_mut().enumerate() {
            *slot = f(i as u64);
        }
        return values;
    }
    let chunk = values.len().div_ceil(workers);
    std::thread::scope(|scope| {
        for (w, slice) in values.chunks_mut(chunk).enumerate() {
            let f = &f;
            let start = (w * chunk) as u64;
            scope.spawn(move || {
                for (off, slot) in slice.iter_mut().enumerate() {
                    *slot = f(start + off as u64);
                }
            });
        }
    });
    values
}

fn stats_from_values(values: &[f64]) -> Result<EnsembleStats> {
    // NaN marks excluded draws; filtering preserves index order, so the
    // reduction stays deterministic.
    let kept: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    let excluded = (values.len() - kept.len()) as u64;
    if kept.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "only {} of {} draws were usable",
            kept.len(),
            values.len()
        )));
    }
    let n = kept.len() as f64;
    let mean = pairwise_sum(&kept) / n;
    let sq: Vec<f64> = kept.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    Ok(EnsembleStats {
        mean_e2: mean,
        stderr: (var / n).sqrt(),
        samples: kept.len() as u64,
        excluded,
    })
}

/// Mean of the closed-form bound over `samples` random states. The closed
/// form needs no Fisher inversion, so boundary-touching states (pure
/// states aligned with a basis vector) are included rather than dropped.
pub fn ensemble_average(
    strength: MeasurementStrength,
    ensemble: Ensemble,
    samples: u64,
    stream: &RandomStream,
    workers: usize,
) -> Result<EnsembleStats> {
    if samples < 2 {
        return Err(Error::InvalidConfig("need at least 2 samples".into()));
    }
    // surface DegenerateStrength before spawning workers
    crb_closed(
        &probabilities(&DensityMatrix::maximally_mixed(), strength)?,
        strength,
    )?;
    let values = parallel_fill(samples, workers, |i| {
        let rho = ensemble_state(ensemble, stream, i);
        let probs = probabilities(&rho, strength).expect("sampled state is physical");
        crb_closed(&probs, strength)
            .expect("strength validated above")
            .bound
    });
    stats_from_values(&values)
}

/// Mean of the SIC bound over the ensemble; strength-independent. Draws
/// with an outcome probability at zero (Fisher singular) are excluded and
/// counted — a measure-zero event for both ensembles.
pub fn sic_ensemble_average(
    ensemble: Ensemble,
    samples: u64,
    stream: &RandomStream,
    workers: usize,
) -> Result<EnsembleStats> {
    if samples < 2 {
        return Err(Error::InvalidConfig("need at least 2 samples".into()));
    }
    let values = parallel_fill(samples, workers, |i| {
        let rho = ensemble_state(ensemble, stream, i);
        sic_crb(&rho).unwrap_or(f64::NAN)
    });
    stats_from_values(&values)
}

const CROSSOVER_BRACKET: (f64, f64) = (0.5, 0.95);

/// The strength at which the pure-state analytic average meets the SIC
/// pure-state value 4 (squared-error units): bisection of
/// `pure_average(λ) − 4` over [0.5, 0.95]. Closed forms only, no Monte
/// Carlo noise.
pub fn find_crossover(tol: f64) -> Result<f64> {
    if !tol.is_finite() || tol < 1e-6 {
        return Err(Error::InvalidConfig(format!(
            "crossover tolerance must be at least 1e-6, got {tol}"
        )));
    }
    let g = |lambda: f64| -> Result<f64> {
        Ok(pure_average(MeasurementStrength::from_lambda(lambda)?)? - SIC_PURE_E_MIN.powi(2))
    };
    let (mut lo, mut hi) = CROSSOVER_BRACKET;
    if !(g(lo)? < 0.0 && g(hi)? > 0.0) {
        return Err(Error::NoCrossover);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Monte-Carlo crossover of the Bures-mixed curve against the SIC mixed
/// average, with a propagated 1σ uncertainty.
#[derive(Debug, Clone, Copy)]
pub struct MixedCrossover {
    pub lambda: f64,
    pub uncertainty: f64,
}

/// Locates where the Bures-mixed ensemble average meets the SIC mixed
/// average. Every bisection step reuses the same sampled states (common
/// random numbers), so the bracketed function is deterministic and the
/// bisection is well posed; the uncertainty propagates the Monte-Carlo
/// standard errors through the local slope.
pub fn find_crossover_mixed(
    samples: u64,
    tol: f64,
    stream: &RandomStream,
    workers: usize,
) -> Result<MixedCrossover> {
    if !tol.is_finite() || tol < 1e-6 {
        return Err(Error::InvalidConfig(format!(
            "crossover tolerance must be at least 1e-6, got {tol}"
        )));
    }
    let tol = tol.max(1e-4);
    let sic_base = stream.at(stream.counter());
    let sic = sic_ensemble_average(Ensemble::BuresMixed, samples, &sic_base, workers)?;
    let dst_base = stream.at(stream.counter() + samples * SAMPLE_STRIDE);
    let h = |lambda: f64| -> Result<EnsembleStats> {
        ensemble_average(
            MeasurementStrength::from_lambda(lambda)?,
            Ensemble::BuresMixed,
            samples,
            &dst_base,
            workers,
        )
    };
    let (mut lo, mut hi) = CROSSOVER_BRACKET;
    let g_lo = h(lo)?.mean_e2 - sic.mean_e2;
    let g_hi = h(hi)?.mean_e2 - sic.mean_e2;
    if !(g_lo < 0.0 && g_hi > 0.0) {
        return Err(Error::NoCrossover);
    }
    let mut dst_stderr = 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let stats = h(mid)?;
        dst_stderr = stats.stderr;
        if stats.mean_e2 - sic.mean_e2 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let delta = 0.01;
    let slope = (h((root + delta).min(0.99))?.mean_e2 - h((root - delta).max(0.0))?.mean_e2)
        / (2.0 * delta);
    let noise = (dst_stderr * dst_stderr + sic.stderr * sic.stderr).sqrt();
    let uncertainty = if slope.abs() > 0.0 {
        noise / slope.abs()
    } else {
        f64::INFINITY
    };
    Ok(MixedCrossover {
        lambda: root,
        uncertainty,
    })
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// Full description of a sweep; the CSV output is a pure function of this
/// struct.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Strictly increasing λ values in [0, 1).
    pub lambda_grid: Vec<f64>,
    pub ensemble: Ensemble,
    pub samples: u64,
    pub seed: u64,
    pub output_path: PathBuf,
    /// Also render the curve chart when set.
    pub svg_path: Option<PathBuf>,
    /// Thread count for sample evaluation; any value gives identical output.
    pub workers: usize,
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if self.lambda_grid.is_empty() {
            return Err(Error::InvalidConfig("empty lambda grid".into()));
        }
        for pair in self.lambda_grid.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidConfig(
                    "lambda grid must be strictly increasing".into(),
                ));
            }
        }
        for &l in &self.lambda_grid {
            MeasurementStrength::from_lambda(l)?;
        }
        if self.samples < 2 {
            return Err(Error::InvalidConfig("need at least 2 samples".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub lambda: f64,
    /// Analytic pure-state average; absent for mixed ensembles, which have
    /// no closed form here.
    pub e2_closed: Option<f64>,
    pub e2_mc: f64,
    pub e2_mc_stderr: f64,
    /// √e2_mc — the plotted per-trial error.
    pub e_min_mc: f64,
    pub e_sic_pure: f64,
    pub e_sic_mixed: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Builds one row per grid point and writes the CSV (and optional SVG).
///
/// Counter layout: grid point j draws samples from counters
/// [j·samples·STRIDE, (j+1)·samples·STRIDE); the SIC mixed reference uses
/// the block after the last grid point. Identical configs therefore give
/// identical files for any worker count.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let stream = RandomStream::new(config.seed);
    let block = config.samples * SAMPLE_STRIDE;
    let sic_base = stream.at(config.lambda_grid.len() as u64 * block);
    let sic_mixed = sic_ensemble_average(
        Ensemble::BuresMixed,
        config.samples,
        &sic_base,
        config.workers,
    )?;
    let mut rows = Vec::with_capacity(config.lambda_grid.len());
    for (j, &lambda) in config.lambda_grid.iter().enumerate() {
        let strength = MeasurementStrength::from_lambda(lambda)?;
        let base = stream.at(j as u64 * block);
        let stats = ensemble_average(
            strength,
            config.ensemble,
            config.samples,
            &base,
            config.workers,
        )?;
        let e2_closed = match config.ensemble {
            Ensemble::PureHaar => Some(pure_average(strength)?),
            _ => None,
        };
        rows.push(SweepRow {
            lambda,
            e2_closed,
            e2_mc: stats.mean_e2,
            e2_mc_stderr: stats.stderr,
            e_min_mc: stats.e_min(),
            e_sic_pure: SIC_PURE_E_MIN,
            e_sic_mixed: sic_mixed.e_min(),
            samples: config.samples,
            seed: config.seed,
        });
    }
    std::fs::write(&config.output_path, rows_to_csv(&rows))?;
    if let Some(svg_path) = &config.svg_path {
        let crossover = find_crossover(1e-6)?;
        std::fs::write(svg_path, render_svg(&rows, config.ensemble, crossover))?;
    }
    Ok(rows)
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV serialization: fixed column order, floats at 17 significant digits.
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "lambda,e2_closed,e2_mc,e2_mc_stderr,e_min_mc,e_sic_pure,e_sic_mixed,samples,seed\n",
    );
    for row in rows {
        let closed = row.e2_closed.map(fmt17).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt17(row.lambda),
            closed,
            fmt17(row.e2_mc),
            fmt17(row.e2_mc_stderr),
            fmt17(row.e_min_mc),
            fmt17(row.e_sic_pure),
            fmt17(row.e_sic_mixed),
            row.samples,
            row.seed
        ));
    }
    out
}

/// Minimal self-contained chart: the √MSE curve over λ, the two SIC
/// reference levels and the crossover strength.
pub fn render_svg(rows: &[SweepRow], ensemble: Ensemble, crossover: f64) -> String {
    let (width, height) = (720.0, 480.0);
    let (left, right, top, bottom) = (70.0, 20.0, 30.0, 50.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;

    let x_min = rows.first().map_or(0.0, |r| r.lambda);
    let x_max = rows.last().map_or(1.0, |r| r.lambda).max(x_min + 1e-6);
    let mut y_max = rows
        .iter()
        .map(|r| r.e_min_mc.max(r.e_sic_mixed))
        .fold(SIC_PURE_E_MIN, f64::max);
    y_max *= 1.1;

    let x_px = |l: f64| left + (l - x_min) / (x_max - x_min) * plot_w;
    let y_px = |v: f64| top + (1.0 - v / y_max) * plot_h;

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    );
    // axes
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        top + plot_h,
        left + plot_w,
        top + plot_h
    ));
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{}\" stroke=\"black\"/>\n",
        top + plot_h
    ));
    // x ticks every 0.1
    let mut tick = (x_min * 10.0).ceil() / 10.0;
    while tick <= x_max + 1e-9 {
        let x = x_px(tick);
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{0}\" x2=\"{x}\" y2=\"{1}\" stroke=\"black\"/>\n\
             <text x=\"{x}\" y=\"{2}\" text-anchor=\"middle\">{tick:.1}</text>\n",
            top + plot_h,
            top + plot_h + 5.0,
            top + plot_h + 18.0
        ));
        tick += 0.1;
    }
    // y ticks: 6 divisions
    for i in 0..=6 {
        let v = y_max * i as f64 / 6.0;
        let y = y_px(v);
        svg.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{y}\" x2=\"{left}\" y2=\"{y}\" stroke=\"black\"/>\n\
             <text x=\"{1}\" y=\"{2}\" text-anchor=\"end\">{v:.2}</text>\n",
            left - 5.0,
            left - 8.0,
            y + 4.0
        ));
    }
    // axis labels
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">lambda = cos 2θ</text>\n",
        left + plot_w / 2.0,
        height - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">E_min per trial</text>\n",
        top + plot_h / 2.0
    ));
    // SIC reference levels
    let y_sic_pure = y_px(SIC_PURE_E_MIN);
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{y_sic_pure}\" x2=\"{}\" y2=\"{y_sic_pure}\" stroke=\"crimson\" stroke-dasharray=\"6 4\"/>\n\
         <text x=\"{}\" y=\"{}\" fill=\"crimson\">SIC pure</text>\n",
        left + plot_w,
        left + 6.0,
        y_sic_pure - 5.0
    ));
    if let Some(row) = rows.first() {
        let y_sic_mixed = y_px(row.e_sic_mixed);
        svg.push_str(&format!(
            "<line x1=\"{left}\" y1=\"{y_sic_mixed}\" x2=\"{}\" y2=\"{y_sic_mixed}\" stroke=\"steelblue\"/>\n\
             <text x=\"{}\" y=\"{}\" fill=\"steelblue\">SIC mixed</text>\n",
            left + plot_w,
            left + 6.0,
            y_sic_mixed - 5.0
        ));
    }
    // crossover strength
    if crossover >= x_min && crossover <= x_max {
        let x = x_px(crossover);
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{top}\" x2=\"{x}\" y2=\"{}\" stroke=\"magenta\" stroke-dasharray=\"2 4\"/>\n\
             <text x=\"{}\" y=\"{}\" fill=\"magenta\">crossover {crossover:.3}</text>\n",
            top + plot_h,
            x + 4.0,
            top + 14.0
        ));
    }
    // the curve itself
    let points: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.2},{:.2}", x_px(r.lambda), y_px(r.e_min_mc)))
        .collect();
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n",
        points.join(" ")
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\">{} ensemble</text>\n",
        left + 6.0,
        top + plot_h - 8.0,
        ensemble.label()
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Inclusive linear grid with `steps` points from `start` to `end`
/// (a single point when steps = 1).
pub fn lambda_grid(start: f64, end: f64, steps: u64) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::InvalidConfig("grid needs at least one point".into()));
    }
    if !start.is_finite() || !end.is_finite() || end < start {
        return Err(Error::InvalidConfig(format!(
            "bad grid bounds {start}..{end}"
        )));
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    let h = (end - start) / (steps - 1) as f64;
    Ok((0..steps).map(|i| start + h * i as f64).collect())
}
