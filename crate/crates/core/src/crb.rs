//! Error-estimation engine: the quadratic cost matrix Q that expresses the
//! squared Hilbert–Schmidt reconstruction error in the three independent
//! probability deviations, the per-trial Fisher matrix of the constrained
//! outcome statistics, and the Cramér–Rao bound Tr(Q F⁻¹) — numerically
//! through exact 3×3 inversion and through the equivalent closed form.
//! A tetrahedron SIC-POVM scheme provides the comparison baseline.

use crate::error::{Error, Result};
use crate::model::{MeasurementStrength, ProbabilitySet, LAMBDA_DEGENERACY_TOL};
use crate::qubit::{Complex, DensityMatrix, RealMatrix3};

/// Outcome probabilities below this floor make the Fisher matrix singular.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// How a bound was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrbMethod {
    /// Tr(Q F⁻¹) with F inverted by exact adjugate.
    NumericInversion,
    /// The equivalent closed form in the probabilities; needs no division
    /// by any p and therefore tolerates boundary states.
    ClosedForm,
}

/// The minimum mean-square-error bound for one state and strength.
#[derive(Debug, Clone, Copy)]
pub struct CrbReport {
    pub q: RealMatrix3,
    /// Present whenever all probabilities clear `PROBABILITY_FLOOR`; the
    /// closed form stays defined on the boundary where F does not exist.
    pub fisher: Option<RealMatrix3>,
    /// Squared Hilbert–Schmidt error per trial.
    pub bound: f64,
    pub method: CrbMethod,
}

impl CrbReport {
    /// √bound, the per-trial error in distance units.
    pub fn e_min(&self) -> f64 {
        self.bound.sqrt()
    }
}

fn check_strength(strength: MeasurementStrength) -> Result<f64> {
    let lambda = strength.lambda();
    if lambda >= 1.0 - LAMBDA_DEGENERACY_TOL {
        return Err(Error::DegenerateStrength);
    }
    Ok(lambda)
}

/// A probability set only makes sense together with the strength it was
/// measured at; catch mismatched pairings through the S sum rule.
fn check_pairing(probs: &ProbabilitySet, lambda: f64) -> Result<()> {
    let expected = 1.0 - lambda + 2.0 * lambda * probs.get(0, 0);
    if (probs.s() - expected).abs() > 1e-10 {
        return Err(Error::ConstraintViolation {
            expected,
            got: probs.s(),
        });
    }
    Ok(())
}

/// Cost matrix over (Δp₀₀, Δp₀₁, Δp₀₂) after the sum rules eliminate the
/// k = 1 deviations:
///
///   Q = 2/(1−λ²) · [[1+λ², −λ, −λ], [−λ, 1, 0], [−λ, 0, 1]]
pub fn q_matrix(strength: MeasurementStrength) -> Result<RealMatrix3> {
    let lambda = check_strength(strength)?;
    let f = 2.0 / (1.0 - lambda * lambda);
    RealMatrix3::new([
        [f * (1.0 + lambda * lambda), -f * lambda, -f * lambda],
        [-f * lambda, f, 0.0],
        [-f * lambda, 0.0, f],
    ])
}

/// Per-trial Fisher matrix of the constrained binomial likelihood in the
/// independent parameters (p₀₀, p₀₁, p₀₂):
///
///   F₀₀ = 1/p₀₀ + 1/p₁₀ + (4λ²/S)(1/p₁₁ + 1/p₁₂) − 8λ²/S²
///   F₀ₜ = −2λ/(S p₁ₜ)                                t = 1, 2
///   Fₜᵣ = δₜᵣ (1/p₀ₜ + 1/p₁ₜ)/S
pub fn fisher_matrix(probs: &ProbabilitySet, strength: MeasurementStrength) -> Result<RealMatrix3> {
    let lambda = check_strength(strength)?;
    check_pairing(probs, lambda)?;
    let mut min_p = f64::INFINITY;
    for t in 0..3 {
        for k in 0..2 {
            min_p = min_p.min(probs.get(t, k));
        }
    }
    if min_p < PROBABILITY_FLOOR {
        return Err(Error::SingularFisher(min_p));
    }
    let s = probs.s();
    let l2 = lambda * lambda;
    let f00 = 1.0 / probs.get(0, 0)
        + 1.0 / probs.get(0, 1)
        + (4.0 * l2 / s) * (1.0 / probs.get(1, 1) + 1.0 / probs.get(2, 1))
        - 8.0 * l2 / (s * s);
    let f01 = -2.0 * lambda / (s * probs.get(1, 1));
    let f02 = -2.0 * lambda / (s * probs.get(2, 1));
    let f11 = (1.0 / probs.get(1, 0) + 1.0 / probs.get(1, 1)) / s;
    let f22 = (1.0 / probs.get(2, 0) + 1.0 / probs.get(2, 1)) / s;
    RealMatrix3::new([[f00, f01, f02], [f01, f11, 0.0], [f02, 0.0, f22]])
}

/// Bound by explicit inversion: Tr(Q F⁻¹).
pub fn crb_numeric(probs: &ProbabilitySet, strength: MeasurementStrength) -> Result<CrbReport> {
    let q = q_matrix(strength)?;
    let fisher = fisher_matrix(probs, strength)?;
    let bound = q.mul(&fisher.inverse()?).trace();
    Ok(CrbReport {
        q,
        fisher: Some(fisher),
        bound,
        method: CrbMethod::NumericInversion,
    })
}

/// The same bound written out in the probabilities,
///
///   2/(1−λ²) · [ (1+λ²)p₀₀p₁₀ + p₀₁p₁₁ + p₀₂p₁₂
///                − (4λ²/S²)·p₀₀p₁₀·(p₀₁p₁₁ + p₀₂p₁₂) ],
///
/// free of divisions by individual probabilities.
pub fn crb_closed(probs: &ProbabilitySet, strength: MeasurementStrength) -> Result<CrbReport> {
    let lambda = check_strength(strength)?;
    check_pairing(probs, lambda)?;
    let q = q_matrix(strength)?;
    let s = probs.s();
    let l2 = lambda * lambda;
    let prod0 = probs.get(0, 0) * probs.get(0, 1);
    let prod12 = probs.get(1, 0) * probs.get(1, 1) + probs.get(2, 0) * probs.get(2, 1);
    let bound =
        2.0 / (1.0 - l2) * ((1.0 + l2) * prod0 + prod12 - 4.0 * l2 / (s * s) * prod0 * prod12);
    let fisher = fisher_matrix(probs, strength).ok();
    Ok(CrbReport {
        q,
        fisher,
        bound,
        method: CrbMethod::ClosedForm,
    })
}

/// The bound of a pure state with ground-state weight x = |⟨0|ψ⟩|²:
/// S²/(1−λ²) + 8λ²x²(1−x)²/S² with S = 1 − λ + 2λx.
pub fn pure_crb(x: f64, strength: MeasurementStrength) -> Result<f64> {
    let lambda = check_strength(strength)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidProbability(x));
    }
    let s = 1.0 - lambda + 2.0 * lambda * x;
    let x1 = x * (1.0 - x);
    Ok(s * s / (1.0 - lambda * lambda) + 8.0 * lambda * lambda * x1 * x1 / (s * s))
}

/// Average of `pure_crb` over Haar pure states (x uniform on [0, 1]):
///
///   (3+λ²)/(3(1−λ²)) + 2(3−2λ²)/(3λ²) − 2(1−λ²)·artanh(λ)/λ³.
///
/// The λ-form has a removable singularity at 0 (value exactly 1) and
/// cancels catastrophically for tiny λ, where the equivalent power series
/// 1 + (8/5)λ² + … of the artanh terms is used instead.
pub fn pure_average(strength: MeasurementStrength) -> Result<f64> {
    let lambda = check_strength(strength)?;
    if lambda == 0.0 {
        return Ok(1.0);
    }
    let l2 = lambda * lambda;
    let head = (3.0 + l2) / (3.0 * (1.0 - l2));
    if lambda < 0.05 {
        // Σ_{k≥1} 4 λ^{2k} / ((2k+1)(2k+3)); ten terms reach ~1e-28 here,
        // while the artanh form loses ~λ⁻² digits to cancellation.
        let mut tail = 0.0;
        let mut pow = l2;
        for k in 1..=10u32 {
            let d = ((2 * k + 1) * (2 * k + 3)) as f64;
            tail += 4.0 * pow / d;
            pow *= l2;
        }
        return Ok(head + tail);
    }
    let artanh = 0.5 * ((1.0 + lambda) / (1.0 - lambda)).ln();
    Ok(head + 2.0 * (3.0 - 2.0 * l2) / (3.0 * l2) - 2.0 * (1.0 - l2) * artanh / (l2 * lambda))
}

// ---------------------------------------------------------------------------
// SIC-POVM baseline
// ---------------------------------------------------------------------------

/// The four tetrahedron projectors Π_k = (I + n_k·σ)/2 with
/// Tr(Π_k Π_l) = 1/3 for k ≠ l and Σ_k Π_k = 2I.
#[derive(Debug, Clone)]
pub struct SicFrame {
    projectors: [DensityMatrix; 4],
}

/// Bloch directions of the canonical tetrahedron.
pub const TETRAHEDRON_DIRECTIONS: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

impl SicFrame {
    pub fn projector(&self, k: usize) -> &DensityMatrix {
        &self.projectors[k]
    }

    pub fn projectors(&self) -> &[DensityMatrix; 4] {
        &self.projectors
    }
}

/// Builds the canonical tetrahedron frame. All qubit SIC frames are
/// unitarily equivalent, so ensemble averages do not depend on the choice.
pub fn sic_frame() -> SicFrame {
    let inv = 1.0 / 3.0f64.sqrt();
    let proj = TETRAHEDRON_DIRECTIONS.map(|n| {
        DensityMatrix::from_bloch([n[0] * inv, n[1] * inv, n[2] * inv]).expect("unit Bloch vector")
    });
    SicFrame { projectors: proj }
}

/// The four SIC outcome probabilities p_k = Tr(ρ Π_k)/2; each lies in
/// [0, 1/2] and they sum to 1.
#[derive(Debug, Clone, Copy)]
pub struct SicProbabilities {
    p: [f64; 4],
}

impl SicProbabilities {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        let mut sum = 0.0;
        for &v in &p {
            if !v.is_finite() {
                return Err(Error::NonFinite("SIC probability"));
            }
            if !(-1e-12..=0.5 + 1e-12).contains(&v) {
                return Err(Error::InvalidProbability(v));
            }
            sum += v;
        }
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::ConstraintViolation {
                expected: 1.0,
                got: sum,
            });
        }
        Ok(Self { p })
    }

    pub fn get(&self, k: usize) -> f64 {
        self.p[k]
    }

    pub fn values(&self) -> [f64; 4] {
        self.p
    }
}

/// p_k = Tr(ρ Π_k)/2.
pub fn sic_probabilities(rho: &DensityMatrix) -> Result<SicProbabilities> {
    rho.check_psd()?;
    let frame = sic_frame();
    let mut p = [0.0f64; 4];
    for (slot, proj) in p.iter_mut().zip(frame.projectors()) {
        let mut tr = Complex::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                tr += rho.entry(i, j) * proj.entry(j, i);
            }
        }
        *slot = (0.5 * tr.re).clamp(0.0, 0.5);
    }
    SicProbabilities::new(p)
}

/// Frame inversion ρ = 3 Σ_k p_k Π_k − I; exact inverse of
/// `sic_probabilities` on states.
pub fn sic_reconstruct(probs: &SicProbabilities) -> DensityMatrix {
    let frame = sic_frame();
    let mut m = [[Complex::new(0.0, 0.0); 2]; 2];
    for (k, proj) in frame.projectors().iter().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += proj.entry(i, j) * (3.0 * probs.get(k));
            }
        }
    }
    m[0][0] -= Complex::new(1.0, 0.0);
    m[1][1] -= Complex::new(1.0, 0.0);
    DensityMatrix::trusted(m)
}

/// Cramér–Rao bound of SIC tomography at a state: Tr(Q_sic F_sic⁻¹) with
/// q_kl = 6(1+δ_kl) and F_kl = 1/p₄ + δ_kl/p_k over the independent
/// outcomes p₁, p₂, p₃. Strength-independent.
pub fn sic_crb(rho: &DensityMatrix) -> Result<f64> {
    let probs = sic_probabilities(rho)?;
    let p = probs.values();
    let min_p = p.iter().copied().fold(f64::INFINITY, f64::min);
    if min_p < PROBABILITY_FLOOR {
        return Err(Error::SingularFisher(min_p));
    }
    let mut q = [[6.0f64; 3]; 3];
    let mut f = [[1.0 / p[3]; 3]; 3];
    for i in 0..3 {
        q[i][i] = 12.0;
        f[i][i] += 1.0 / p[i];
    }
    let q = RealMatrix3::new(q)?;
    let f = RealMatrix3::new(f)?;
    Ok(q.mul(&f.inverse()?).trace())
}
