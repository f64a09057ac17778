//! Finite-shot measurement simulation and the plug-in estimator.
//!
//! Each basis is post-selected the same number of times N, so the count
//! n₀ₜ of a basis is binomial with N trials and success probability
//! p₀ₜ/S (S = 1 for the computational basis). The estimator inverts the
//! observed frequencies through the constrained probability model and the
//! linear-inversion formula; it is exactly unbiased in the probabilities
//! and saturates the Cramér–Rao bound as N grows.

use crate::error::{Error, Result};
use crate::model::{
    probabilities, reconstruct, s_value, MeasurementStrength, ProbabilitySet, LAMBDA_DEGENERACY_TOL,
};
use crate::qubit::{hs_distance_sq, DensityMatrix, RealMatrix3};
use crate::sampling::RandomStream;
use crate::util::{mean_and_stderr, pairwise_sum};

/// Counter budget reserved per simulated experiment (3 draws used).
pub const RUN_STRIDE: u64 = 4;

/// Outcome counts n_kt for one experiment: per basis t the two outcomes
/// sum to the same shot number N.
#[derive(Debug, Clone, Copy)]
pub struct CountRecord {
    n: [[u64; 2]; 3],
    shots: u64,
}

impl CountRecord {
    pub fn new(n: [[u64; 2]; 3], shots: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidCounts("shots must be at least 1".into()));
        }
        for (t, row) in n.iter().enumerate() {
            if row[0] + row[1] != shots {
                return Err(Error::InvalidCounts(format!(
                    "basis {t}: {} + {} ≠ {shots}",
                    row[0], row[1]
                )));
            }
        }
        Ok(Self { n, shots })
    }

    pub fn get(&self, t: usize, k: usize) -> u64 {
        self.n[t][k]
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }
}

/// Empirical mean-square error over repeated experiments.
#[derive(Debug, Clone, Copy)]
pub struct EmpiricalResult {
    /// Mean of Tr[(ρ−ρ̂)²] across runs.
    pub mean_e2: f64,
    /// Standard error of that mean.
    pub stderr: f64,
    pub runs: u64,
    pub shots: u64,
}

impl EmpiricalResult {
    /// shots·mean — the per-trial scale that the Cramér–Rao bound lives on.
    pub fn per_trial_e2(&self) -> f64 {
        self.shots as f64 * self.mean_e2
    }
}

/// Inverse-CDF binomial draw from a single uniform. The cumulative walk
/// starts at k = 0, in log space while the pmf is below the normal f64
/// range (the skipped lower-tail mass is < n·e⁻⁷⁰⁰, far beyond the 2⁻⁵³
/// resolution of `u`), then switches to the exact linear recurrence. The
/// switch waits for a *normal* pmf: subnormal arithmetic would silently
/// shed significand bits and bias the accumulated mass.
fn binomial_from_uniform(n: u64, p: f64, u: f64) -> u64 {
    debug_assert!((0.0..=1.0).contains(&p));
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    let ratio = |k: u64| (n - k) as f64 / (k + 1) as f64 * (p / (1.0 - p));
    let mut ln_pmf = n as f64 * (1.0 - p).ln();
    let mut k = 0u64;
    while k < n && ln_pmf < -700.0 {
        ln_pmf += ratio(k).ln();
        k += 1;
    }
    let mut pmf = ln_pmf.exp();
    let mut cdf = 0.0f64;
    loop {
        cdf += pmf;
        if u < cdf || k == n {
            return k;
        }
        pmf *= ratio(k);
        k += 1;
    }
}

/// Simulates one experiment: three independent binomial draws, one per
/// basis, each from a single uniform (3 draws total).
pub fn simulate_counts(
    rho: &DensityMatrix,
    strength: MeasurementStrength,
    shots: u64,
    stream: &mut RandomStream,
) -> Result<CountRecord> {
    if shots == 0 {
        return Err(Error::InvalidCounts("shots must be at least 1".into()));
    }
    let probs = probabilities(rho, strength)?;
    let mut n = [[0u64; 2]; 3];
    for (t, row) in n.iter_mut().enumerate() {
        let success = if t == 0 {
            probs.get(0, 0)
        } else {
            probs.get(t, 0) / probs.s()
        };
        let n0 = binomial_from_uniform(shots, success.clamp(0.0, 1.0), stream.next_uniform());
        *row = [n0, shots - n0];
    }
    CountRecord::new(n, shots)
}

/// The plug-in (constrained maximum-likelihood) estimator:
/// p̂₀₀ = n₀₀/N, Ŝ = 1 − λ + 2λ·p̂₀₀, p̂_kt = Ŝ·n_kt/N for t = 1, 2, and
/// ρ̂ by linear inversion. ρ̂ is Hermitian with unit trace but may be
/// non-positive; it is deliberately not projected back onto physical
/// states, which would break comparability with the bound.
pub fn estimate_state(
    counts: &CountRecord,
    strength: MeasurementStrength,
) -> Result<(ProbabilitySet, DensityMatrix)> {
    if strength.lambda() >= 1.0 - LAMBDA_DEGENERACY_TOL {
        return Err(Error::DegenerateStrength);
    }
    let n = counts.shots() as f64;
    let p00 = counts.get(0, 0) as f64 / n;
    let s_hat = s_value(p00, strength);
    let mut p = [[0.0f64; 2]; 3];
    p[0] = [p00, 1.0 - p00];
    for (t, row) in p.iter_mut().enumerate().skip(1) {
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = s_hat * counts.get(t, k) as f64 / n;
        }
    }
    let probs = ProbabilitySet::new(p, strength)?;
    let rho_hat = reconstruct(&probs, strength)?;
    Ok((probs, rho_hat))
}

/// Mean and standard error of the squared Hilbert–Schmidt error of the
/// plug-in estimate over independent simulated experiments. Run i draws
/// from the substream at `counter + i·RUN_STRIDE`, so the result does not
/// depend on evaluation order; the reduction is fixed-order pairwise.
pub fn empirical_mse(
    rho: &DensityMatrix,
    strength: MeasurementStrength,
    shots: u64,
    runs: u64,
    stream: &RandomStream,
) -> Result<EmpiricalResult> {
    if runs < 2 {
        return Err(Error::InvalidCounts("need at least 2 runs".into()));
    }
    let base = stream.counter();
    let mut errors = Vec::with_capacity(runs as usize);
    for i in 0..runs {
        let mut run_stream = stream.at(base + i * RUN_STRIDE);
        let counts = simulate_counts(rho, strength, shots, &mut run_stream)?;
        let (_, rho_hat) = estimate_state(&counts, strength)?;
        errors.push(hs_distance_sq(rho, &rho_hat));
    }
    let (mean_e2, stderr) = mean_and_stderr(&errors);
    Ok(EmpiricalResult {
        mean_e2,
        stderr,
        runs,
        shots,
    })
}

/// Monte-Carlo estimate of the per-trial Fisher matrix: the covariance of
/// the likelihood score evaluated at the true probabilities, over
/// simulated experiments. Converges entrywise to `fisher_matrix` and
/// validates it independently of the analytic derivation.
pub fn empirical_fisher(
    rho: &DensityMatrix,
    strength: MeasurementStrength,
    shots: u64,
    runs: u64,
    stream: &RandomStream,
) -> Result<RealMatrix3> {
    let probs = probabilities(rho, strength)?;
    let mut min_p = f64::INFINITY;
    for t in 0..3 {
        for k in 0..2 {
            min_p = min_p.min(probs.get(t, k));
        }
    }
    if min_p < 1e-6 {
        return Err(Error::SingularFisher(min_p));
    }
    if runs < 2 {
        return Err(Error::InvalidCounts("need at least 2 runs".into()));
    }
    let base = stream.counter();
    let mut products: Vec<Vec<f64>> = (0..6).map(|_| Vec::with_capacity(runs as usize)).collect();
    for i in 0..runs {
        let mut run_stream = stream.at(base + i * RUN_STRIDE);
        let counts = simulate_counts(rho, strength, shots, &mut run_stream)?;
        let score = score_vector(&counts, &probs, strength);
        let mut slot = 0;
        for a in 0..3 {
            for b in a..3 {
                products[slot].push(score[a] * score[b]);
                slot += 1;
            }
        }
    }
    let n_norm = shots as f64 * runs as f64;
    let mut f = [[0.0f64; 3]; 3];
    let mut slot = 0;
    for a in 0..3 {
        for b in a..3 {
            let mean = pairwise_sum(&products[slot]) / n_norm;
            f[a][b] = mean;
            f[b][a] = mean;
            slot += 1;
        }
    }
    RealMatrix3::new(f)
}

/// ∂ln L/∂(p₀₀, p₀₁, p₀₂) for one experiment, with the sum rules
/// p₁₀ = 1 − p₀₀, p₁ₜ = S − p₀ₜ and the S^{−2N} normalization substituted:
///
///   s₀ = n₀₀/p₀₀ − n₁₀/p₁₀ + 2λ(n₁₁/p₁₁ + n₁₂/p₁₂) − 4Nλ/S
///   sₜ = n₀ₜ/p₀ₜ − n₁ₜ/p₁ₜ
fn score_vector(
    counts: &CountRecord,
    probs: &ProbabilitySet,
    strength: MeasurementStrength,
) -> [f64; 3] {
    let lambda = strength.lambda();
    let n = counts.shots() as f64;
    let s = probs.s();
    let s0 = counts.get(0, 0) as f64 / probs.get(0, 0) - counts.get(0, 1) as f64 / probs.get(0, 1)
        + 2.0
            * lambda
            * (counts.get(1, 1) as f64 / probs.get(1, 1)
                + counts.get(2, 1) as f64 / probs.get(2, 1))
        - 4.0 * n * lambda / s;
    let s1 = counts.get(1, 0) as f64 / probs.get(1, 0) - counts.get(1, 1) as f64 / probs.get(1, 1);
    let s2 = counts.get(2, 0) as f64 / probs.get(2, 0) - counts.get(2, 1) as f64 / probs.get(2, 1);
    [s0, s1, s2]
}
