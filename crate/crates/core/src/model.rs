//! The direct-tomography measurement model.
//!
//! A system qubit in an unknown state ρ couples to a pointer qubit through
//! U(θ) = exp(−iθ σ_x⊗σ_x), is post-selected in |0⟩, and the pointer is
//! read out in three fixed bases. The outcome probabilities are exactly
//! the expectation values of ρ in six *effective* pure states: the
//! computational pair plus two bases whose elements overlap with modulus
//! λ = cos 2θ. λ = 0 (θ = π/4) reproduces the three mutually unbiased
//! bases of strong tomography; λ → 1 is the weak-coupling limit of nearly
//! parallel states.
//!
//! For λ < 1 the six projectors are informationally complete and ρ is
//! recovered by linear inversion against the biorthogonal duals
//! |φ_k^t(λ)⟩ = |ψ_k^t(−λ)⟩.

use crate::error::{Error, Result};
use crate::qubit::{Complex, DensityMatrix, PureState, TwoQubitUnitary};

/// λ values this close to 1 are rejected by the inversion and the bound
/// formulas, which carry (1−λ)⁻¹ poles.
pub const LAMBDA_DEGENERACY_TOL: f64 = 1e-12;
/// Tolerance on the probability sum rules.
pub const PROBABILITY_TOL: f64 = 1e-10;

/// Measurement strength, stored both as the coupling angle θ ∈ (0, π/4]
/// and as λ = cos 2θ ∈ [0, 1). λ = 1 (zero coupling) is rejected: the
/// effective bases collapse onto |0⟩ and stop being informationally
/// complete.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementStrength {
    theta: f64,
    lambda: f64,
}

impl MeasurementStrength {
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::NonFinite("lambda"));
        }
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::StrengthOutOfRange(lambda));
        }
        Ok(Self {
            theta: 0.5 * lambda.acos(),
            lambda,
        })
    }

    pub fn from_theta(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::NonFinite("theta"));
        }
        if theta <= 0.0 || theta > std::f64::consts::FRAC_PI_4 + 1e-15 {
            return Err(Error::StrengthOutOfRange(theta));
        }
        let lambda = (2.0 * theta).cos().clamp(0.0, 1.0);
        if lambda >= 1.0 {
            return Err(Error::StrengthOutOfRange(theta));
        }
        Ok(Self { theta, lambda })
    }

    /// Test-only escape hatch for evaluating closed forms at the λ = 1
    /// parallel limit, which public constructors reject.
    #[cfg(test)]
    pub(crate) fn parallel_limit() -> Self {
        Self {
            theta: 0.0,
            lambda: 1.0,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Which family a basis set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Effective projection states |ψ_k^t⟩ of the coupled measurement.
    Effective,
    /// Duals |φ_k^t⟩ used by the linear inversion.
    Biorthogonal,
    /// The raw pointer readout bases |e_k^t⟩.
    Pointer,
}

/// Six pure states indexed by basis t ∈ {0,1,2} and outcome k ∈ {0,1}.
#[derive(Debug, Clone)]
pub struct BasisSet {
    kind: BasisKind,
    vectors: [[PureState; 2]; 3],
}

impl BasisSet {
    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn get(&self, t: usize, k: usize) -> &PureState {
        &self.vectors[t][k]
    }
}

/// Amplitudes of the effective state (t, k) at strength λ:
/// t = 0 is the computational pair; for t = 1, 2 the amplitudes are
/// (√((1+λ)/2), (−1)^k (−i)^{t+2} √((1−λ)/2)). Valid for any λ ∈ [−1, 1],
/// which also serves the biorthogonal construction through λ → −λ.
fn effective_amplitudes(lambda: f64, t: usize, k: usize) -> (Complex, Complex) {
    match t {
        0 => {
            if k == 0 {
                (Complex::new(1.0, 0.0), Complex::new(0.0, 0.0))
            } else {
                (Complex::new(0.0, 0.0), Complex::new(1.0, 0.0))
            }
        }
        _ => {
            let a = ((1.0 + lambda) / 2.0).sqrt();
            let b = ((1.0 - lambda) / 2.0).sqrt();
            // (−i)^{t+2}: i for t = 1, 1 for t = 2
            let unit = if t == 1 {
                Complex::new(0.0, 1.0)
            } else {
                Complex::new(1.0, 0.0)
            };
            let sign = if k == 0 { 1.0 } else { -1.0 };
            (Complex::new(a, 0.0), unit * sign * b)
        }
    }
}

fn basis_from_amplitudes(lambda: f64, kind: BasisKind) -> BasisSet {
    let mut vectors = [[PureState::zero(); 2]; 3];
    for (t, row) in vectors.iter_mut().enumerate() {
        for (k, slot) in row.iter_mut().enumerate() {
            let (a0, a1) = effective_amplitudes(lambda, t, k);
            *slot = PureState::new(a0, a1).expect("unit vector by construction");
        }
    }
    BasisSet { kind, vectors }
}

/// The effective projection states at a given strength. Within each of
/// the t = 1, 2 bases the two elements overlap with modulus exactly λ
/// (equidistant bases); t = 0 stays the orthogonal computational pair.
pub fn effective_states(strength: MeasurementStrength) -> BasisSet {
    basis_from_amplitudes(strength.lambda(), BasisKind::Effective)
}

#[cfg(test)]
fn effective_states_unchecked(lambda: f64) -> BasisSet {
    basis_from_amplitudes(lambda, BasisKind::Effective)
}

/// The dual (biorthogonal) states |φ_k^t(λ)⟩ = |ψ_k^t(−λ)⟩ for t = 1, 2;
/// the computational pair is self-dual. Satisfies
/// ⟨φ_k^t|ψ_l^t⟩ = √(1−λ²) δ_kl for t = 1, 2.
pub fn biorthogonal_states(strength: MeasurementStrength) -> BasisSet {
    basis_from_amplitudes(-strength.lambda(), BasisKind::Biorthogonal)
}

/// The three pointer readout bases: computational, σ_x eigenstates and
/// σ_y eigenstates.
pub fn pointer_bases() -> BasisSet {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex::new(re, im);
    let v = |a0: Complex, a1: Complex| PureState::new(a0, a1).expect("unit vector");
    BasisSet {
        kind: BasisKind::Pointer,
        vectors: [
            [PureState::zero(), PureState::one()],
            [
                v(c(inv_sqrt2, 0.0), c(inv_sqrt2, 0.0)),
                v(c(inv_sqrt2, 0.0), c(-inv_sqrt2, 0.0)),
            ],
            [
                v(c(inv_sqrt2, 0.0), c(0.0, -inv_sqrt2)),
                v(c(inv_sqrt2, 0.0), c(0.0, inv_sqrt2)),
            ],
        ],
    }
}

/// Derives the effective states from first principles instead of the
/// closed form: builds U(θ), contracts
/// (I_s ⊗ ⟨0|_p) U†(θ) (|0⟩_s ⊗ |e_k^t⟩_p), normalizes and fixes the
/// global phase. Agrees with `effective_states` at λ = cos 2θ vector by
/// vector.
///
/// At θ = 0 the (t, k) = (0, 1) contraction vanishes identically (the
/// pointer never flips without coupling), so exactly θ = 0 reports
/// `DegenerateProjection`.
pub fn coupling_oracle(theta: f64) -> Result<BasisSet> {
    if !theta.is_finite() {
        return Err(Error::NonFinite("theta"));
    }
    if !(0.0..=std::f64::consts::FRAC_PI_4 + 1e-15).contains(&theta) {
        return Err(Error::StrengthOutOfRange(theta));
    }
    let u_dag = TwoQubitUnitary::coupling(theta).adjoint();
    let pointer = pointer_bases();
    let zero = Complex::new(0.0, 0.0);
    let mut vectors = [[PureState::zero(); 2]; 3];
    for (t, row) in vectors.iter_mut().enumerate() {
        for (k, slot) in row.iter_mut().enumerate() {
            let e = pointer.get(t, k);
            // |0⟩_s ⊗ |e⟩_p with basis index 2s + p
            let joint = [e.amp0(), e.amp1(), zero, zero];
            let out = u_dag.apply(&joint);
            // contract ⟨0|_p: keep the p = 0 components of each system row
            let raw = [out[0], out[2]];
            let norm = (raw[0].norm_sqr() + raw[1].norm_sqr()).sqrt();
            if norm < 1e-12 {
                return Err(Error::DegenerateProjection);
            }
            *slot = PureState::new(raw[0] / norm, raw[1] / norm)
                .expect("normalized")
                .canonical_phase();
        }
    }
    Ok(BasisSet {
        kind: BasisKind::Effective,
        vectors,
    })
}

/// The constrained sum S = p₀ₜ + p₁ₜ = 1 − λ + 2λ·p₀₀ shared by the two
/// non-orthogonal bases.
pub fn s_value(p00: f64, strength: MeasurementStrength) -> f64 {
    1.0 - strength.lambda() + 2.0 * strength.lambda() * p00
}

/// The six outcome probabilities p_kt plus their constrained sum S.
///
/// Invariants: every p ∈ [0, 1]; p₀₀ + p₁₀ = 1; the t = 1 and t = 2
/// columns both sum to S = 1 − λ + 2λ·p₀₀.
#[derive(Debug, Clone, Copy)]
pub struct ProbabilitySet {
    p: [[f64; 2]; 3],
    s: f64,
}

impl ProbabilitySet {
    /// Validates ranges and both sum rules against the strength.
    pub fn new(p: [[f64; 2]; 3], strength: MeasurementStrength) -> Result<Self> {
        for row in &p {
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::NonFinite("probability"));
                }
                if !(-PROBABILITY_TOL..=1.0 + PROBABILITY_TOL).contains(&v) {
                    return Err(Error::InvalidProbability(v));
                }
            }
        }
        let t0_sum = p[0][0] + p[0][1];
        if (t0_sum - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::ConstraintViolation {
                expected: 1.0,
                got: t0_sum,
            });
        }
        let s = s_value(p[0][0], strength);
        for t in 1..3 {
            let got = p[t][0] + p[t][1];
            if (got - s).abs() > PROBABILITY_TOL {
                return Err(Error::ConstraintViolation { expected: s, got });
            }
        }
        Ok(Self {
            p,
            s: p[1][0] + p[1][1],
        })
    }

    /// p_kt for basis t ∈ {0,1,2}, outcome k ∈ {0,1}.
    pub fn get(&self, t: usize, k: usize) -> f64 {
        self.p[t][k]
    }

    pub fn rows(&self) -> [[f64; 2]; 3] {
        self.p
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

/// Born-rule probabilities p_kt = ⟨ψ_k^t|ρ|ψ_k^t⟩ of a physical state.
/// Rounding residue down to −1e-14 is clamped to 0 (and symmetrically at
/// 1); the S sum rule is then verified as an internal consistency check.
pub fn probabilities(rho: &DensityMatrix, strength: MeasurementStrength) -> Result<ProbabilitySet> {
    rho.check_psd()?;
    let bases = effective_states(strength);
    let mut p = [[0.0f64; 2]; 3];
    for (t, row) in p.iter_mut().enumerate() {
        for (k, slot) in row.iter_mut().enumerate() {
            let raw = bases.get(t, k).expectation(rho);
            *slot = if (-1e-14..0.0).contains(&raw) {
                0.0
            } else if raw > 1.0 && raw <= 1.0 + 1e-14 {
                1.0
            } else {
                raw
            };
            if !(0.0..=1.0).contains(slot) {
                return Err(Error::InvalidProbability(*slot));
            }
        }
    }
    let s = s_value(p[0][0], strength);
    for t in 1..3 {
        let got = p[t][0] + p[t][1];
        if (got - s).abs() > PROBABILITY_TOL {
            return Err(Error::ConstraintViolation { expected: s, got });
        }
    }
    ProbabilitySet::new(p, strength)
}

/// Linear inversion: rebuilds the density matrix from the six outcome
/// probabilities,
///
///   ρ = (1−λ²)⁻¹ Σ_{t=1,2} Σ_k p_kt |φ_k^t⟩⟨φ_k^t|
///       + (1−λ)/(1+λ)·(p₀₀−1)·|0⟩⟨0| − (1+λ)/(1−λ)·p₀₀·|1⟩⟨1|.
///
/// The output is Hermitian with unit trace by construction; for noisy
/// (estimated) probabilities it may have a negative eigenvalue.
pub fn reconstruct(probs: &ProbabilitySet, strength: MeasurementStrength) -> Result<DensityMatrix> {
    let lambda = strength.lambda();
    if lambda >= 1.0 - LAMBDA_DEGENERACY_TOL {
        return Err(Error::DegenerateStrength);
    }
    let duals = biorthogonal_states(strength);
    let zero = Complex::new(0.0, 0.0);
    let mut m = [[zero; 2]; 2];
    let mut add = |proj: &DensityMatrix, w: f64| {
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += proj.entry(i, j) * w;
            }
        }
    };
    let inv = 1.0 / (1.0 - lambda * lambda);
    for t in 1..3 {
        for k in 0..2 {
            add(&duals.get(t, k).projector(), probs.get(t, k) * inv);
        }
    }
    add(
        &PureState::zero().projector(),
        (1.0 - lambda) / (1.0 + lambda) * (probs.get(0, 0) - 1.0),
    );
    add(
        &PureState::one().projector(),
        -(1.0 + lambda) / (1.0 - lambda) * probs.get(0, 0),
    );
    // Hermiticity is exact by construction (conjugate projector entries,
    // real weights); the trace follows from the sum rules up to their
    // residual amplified by (1−λ²)⁻¹, checked here at the contract level.
    let trace = m[0][0].re + m[1][1].re;
    if (trace - 1.0).abs() > PROBABILITY_TOL {
        return Err(Error::ConstraintViolation {
            expected: 1.0,
            got: trace,
        });
    }
    Ok(DensityMatrix::trusted(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::hs_distance_sq;
    use crate::sampling::{sample_bures, RandomStream, SAMPLE_STRIDE};

    const LAMBDA_GRID: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99];

    #[test]
    fn strength_constructors_validate() {
        assert!(MeasurementStrength::from_lambda(0.0).is_ok());
        assert!(MeasurementStrength::from_lambda(0.999999).is_ok());
        assert!(MeasurementStrength::from_lambda(1.0).is_err());
        assert!(MeasurementStrength::from_lambda(-0.1).is_err());
        assert!(MeasurementStrength::from_theta(std::f64::consts::FRAC_PI_4).is_ok());
        assert!(MeasurementStrength::from_theta(0.0).is_err());
        assert!(MeasurementStrength::from_theta(1.0).is_err());
        let s = MeasurementStrength::from_theta(0.3).unwrap();
        assert!((s.lambda() - (0.6f64).cos()).abs() < 1e-15);
        let t = MeasurementStrength::from_lambda(0.5).unwrap();
        assert!(((2.0 * t.theta()).cos() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn effective_states_match_closed_form_amplitudes() {
        let s = MeasurementStrength::from_lambda(0.5).unwrap();
        let bases = effective_states(s);
        let a = (0.75f64).sqrt();
        let b = (0.25f64).sqrt();
        // t = 1 carries the ±i amplitude, t = 2 the real one
        let psi01 = bases.get(1, 0);
        assert!((psi01.amp0() - Complex::new(a, 0.0)).norm() < 1e-15);
        assert!((psi01.amp1() - Complex::new(0.0, b)).norm() < 1e-15);
        let psi12 = bases.get(2, 1);
        assert!((psi12.amp1() - Complex::new(-b, 0.0)).norm() < 1e-15);
        // computational pair at t = 0
        assert!((bases.get(0, 0).overlap(&PureState::zero()).norm() - 1.0).abs() < 1e-15);
        assert!((bases.get(0, 1).overlap(&PureState::one()).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equidistance_overlap_equals_lambda() {
        for lambda in LAMBDA_GRID {
            let s = MeasurementStrength::from_lambda(lambda).unwrap();
            let bases = effective_states(s);
            for t in 1..3 {
                let ov = bases.get(t, 0).overlap(bases.get(t, 1));
                assert!(
                    (ov.norm() - lambda).abs() < 1e-12,
                    "equidistance broken at λ={lambda}, t={t}"
                );
            }
            let ov0 = bases.get(0, 0).overlap(bases.get(0, 1));
            assert!(ov0.norm() < 1e-15);
        }
        // the derived example: real overlap (1+λ)/2 − (1−λ)/2 = λ at λ = 0.5
        let s = MeasurementStrength::from_lambda(0.5).unwrap();
        let bases = effective_states(s);
        let ov = bases.get(1, 0).overlap(bases.get(1, 1));
        assert!((ov - Complex::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn parallel_limit_collapses_onto_ground_state() {
        let bases = effective_states_unchecked(1.0);
        for t in 1..3 {
            for k in 0..2 {
                let ov = bases.get(t, k).overlap(&PureState::zero());
                assert!((ov.norm() - 1.0).abs() < 1e-15);
            }
        }
        // and the public constructor refuses the degenerate point
        assert!(MeasurementStrength::from_lambda(1.0).is_err());
        // the escape hatch used by closed-form limit tests
        assert_eq!(MeasurementStrength::parallel_limit().lambda(), 1.0);
    }

    #[test]
    fn strong_limit_is_a_mub_triple() {
        // At λ = 0 the effective vectors are the pointer MUB vectors up to
        // a relabeling of (t, k); check set membership and unbiasedness.
        let s = MeasurementStrength::from_lambda(0.0).unwrap();
        let eff = effective_states(s);
        let e = pointer_bases();
        for t in 0..3 {
            for k in 0..2 {
                let v = eff.get(t, k);
                let mut matched = false;
                for te in 0..3 {
                    for ke in 0..2 {
                        if (v.overlap(e.get(te, ke)).norm() - 1.0).abs() < 1e-12 {
                            matched = true;
                        }
                    }
                }
                assert!(matched, "effective state (t={t},k={k}) not in the MUB set");
            }
        }
        for t in 0..3 {
            for r in 0..3 {
                if t == r {
                    continue;
                }
                for k in 0..2 {
                    for l in 0..2 {
                        let ov2 = eff.get(t, k).overlap(eff.get(r, l)).norm_sqr();
                        assert!((ov2 - 0.5).abs() < 1e-12, "not unbiased at t={t},r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn oracle_matches_closed_form_on_theta_grid() {
        // θ = 0 is excluded: the (0,1) projection vanishes there.
        for j in 1..=100 {
            let theta = j as f64 * std::f64::consts::FRAC_PI_4 / 100.0;
            let strength = MeasurementStrength::from_theta(theta).unwrap();
            let from_oracle = coupling_oracle(theta).unwrap();
            let from_formula = effective_states(strength);
            for t in 0..3 {
                for k in 0..2 {
                    let a = from_oracle.get(t, k);
                    let b = from_formula.get(t, k).canonical_phase();
                    let dev = (a.amp0() - b.amp0())
                        .norm()
                        .max((a.amp1() - b.amp1()).norm());
                    assert!(
                        dev < 1e-12,
                        "oracle deviates at θ={theta}, t={t}, k={k}: {dev}"
                    );
                }
            }
        }
    }

    #[test]
    fn oracle_examples() {
        // θ = 0 leaves the (1, 0) projection on |0⟩
        let weak = coupling_oracle(1e-3).unwrap();
        assert!((weak.get(1, 0).overlap(&PureState::zero()).norm() - 1.0).abs() < 1e-6);
        // θ = π/4, (t,k) = (2,0) → (|0⟩+|1⟩)/√2
        let strong = coupling_oracle(std::f64::consts::FRAC_PI_4).unwrap();
        let target = PureState::new(
            Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        )
        .unwrap();
        assert!((strong.get(2, 0).overlap(&target).norm() - 1.0).abs() < 1e-12);
        // (t,k) = (0,1) is |1⟩ up to phase at any strength
        for theta in [0.1, 0.4, std::f64::consts::FRAC_PI_4] {
            let set = coupling_oracle(theta).unwrap();
            assert!((set.get(0, 1).overlap(&PureState::one()).norm() - 1.0).abs() < 1e-12);
        }
        // exactly zero coupling cannot produce the flipped-pointer state
        assert!(matches!(
            coupling_oracle(0.0),
            Err(Error::DegenerateProjection)
        ));
    }

    #[test]
    fn biorthogonal_relations() {
        // λ = 0: duals coincide with the effective set
        let s0 = MeasurementStrength::from_lambda(0.0).unwrap();
        let eff = effective_states(s0);
        let duals = biorthogonal_states(s0);
        for t in 0..3 {
            for k in 0..2 {
                assert!((eff.get(t, k).overlap(duals.get(t, k)).norm() - 1.0).abs() < 1e-15);
            }
        }
        // ⟨φ_0^1|ψ_0^1⟩ = √(1−λ²) at λ = 0.5
        let s = MeasurementStrength::from_lambda(0.5).unwrap();
        let eff = effective_states(s);
        let duals = biorthogonal_states(s);
        let diag = duals.get(1, 0).overlap(eff.get(1, 0));
        assert!((diag - Complex::new((0.75f64).sqrt(), 0.0)).norm() < 1e-12);
        let cross = duals.get(1, 0).overlap(eff.get(1, 1));
        assert!(cross.norm() < 1e-12);
        // full δ_kl relation across the grid, t = 1, 2
        for lambda in LAMBDA_GRID {
            let s = MeasurementStrength::from_lambda(lambda).unwrap();
            let eff = effective_states(s);
            let duals = biorthogonal_states(s);
            let root = (1.0 - lambda * lambda).sqrt();
            for t in 1..3 {
                for k in 0..2 {
                    for l in 0..2 {
                        let ov = duals.get(t, k).overlap(eff.get(t, l));
                        let expected = if k == l { root } else { 0.0 };
                        assert!((ov.norm() - expected).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn dual_overlap_table() {
        for lambda in LAMBDA_GRID {
            let s = MeasurementStrength::from_lambda(lambda).unwrap();
            let duals = biorthogonal_states(s);
            let l2 = lambda * lambda;
            for i in 1..3 {
                for k in 0..2 {
                    for l in 0..2 {
                        let within = duals.get(i, k).overlap(duals.get(i, l)).norm_sqr();
                        let expected = if k == l { 1.0 } else { l2 };
                        assert!((within - expected).abs() < 1e-12);
                    }
                }
            }
            for k in 0..2 {
                for l in 0..2 {
                    let across = duals.get(1, k).overlap(duals.get(2, l)).norm_sqr();
                    assert!((across - (1.0 + l2) / 2.0).abs() < 1e-12);
                }
            }
            for i in 1..3 {
                for l in 0..2 {
                    let from0 = duals.get(0, 0).overlap(duals.get(i, l)).norm_sqr();
                    assert!((from0 - (1.0 - lambda) / 2.0).abs() < 1e-12);
                    let from1 = duals.get(0, 1).overlap(duals.get(i, l)).norm_sqr();
                    assert!((from1 - (1.0 + lambda) / 2.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn probabilities_examples() {
        let mixed = DensityMatrix::maximally_mixed();
        for lambda in [0.0, 0.3, 0.9] {
            let s = MeasurementStrength::from_lambda(lambda).unwrap();
            let p = probabilities(&mixed, s).unwrap();
            for t in 0..3 {
                for k in 0..2 {
                    assert!((p.get(t, k) - 0.5).abs() < 1e-14);
                }
            }
            assert!((p.s() - 1.0).abs() < 1e-14);
        }

        let ground = PureState::zero().projector();
        let s = MeasurementStrength::from_lambda(0.5).unwrap();
        let p = probabilities(&ground, s).unwrap();
        assert!((p.get(0, 0) - 1.0).abs() < 1e-14);
        assert!(p.get(0, 1).abs() < 1e-14);
        for t in 1..3 {
            for k in 0..2 {
                assert!((p.get(t, k) - 0.75).abs() < 1e-14);
            }
        }
        assert!((p.s() - 1.5).abs() < 1e-14);

        let excited = PureState::one().projector();
        for lambda in [0.2, 0.7] {
            let s = MeasurementStrength::from_lambda(lambda).unwrap();
            let p = probabilities(&excited, s).unwrap();
            assert!(p.get(0, 0).abs() < 1e-14);
            assert!((p.s() - (1.0 - lambda)).abs() < 1e-12);
        }
    }

    #[test]
    fn probabilities_rejects_nonpositive_state() {
        let m = [
            [Complex::new(1.1, 0.0), Complex::new(0.0, 0.0)],
            [Complex::new(0.0, 0.0), Complex::new(-0.1, 0.0)],
        ];
        let rho = DensityMatrix::new_estimate(m).unwrap();
        let s = MeasurementStrength::from_lambda(0.4).unwrap();
        assert!(matches!(probabilities(&rho, s), Err(Error::NotPsd(_))));
    }

    #[test]
    fn s_value_examples() {
        let s5 = MeasurementStrength::from_lambda(0.5).unwrap();
        let s9 = MeasurementStrength::from_lambda(0.9).unwrap();
        assert_eq!(s_value(0.5, s5), 1.0);
        assert_eq!(s_value(0.5, s9), 1.0);
        assert!((s_value(1.0, s5) - 1.5).abs() < 1e-15);
        assert!((s_value(0.0, s9) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn probability_set_validation() {
        let s = MeasurementStrength::from_lambda(0.5).unwrap();
        // breaks the t = 0 sum rule
        let bad = ProbabilitySet::new([[0.6, 0.6], [0.5, 0.5], [0.5, 0.5]], s);
        assert!(matches!(bad, Err(Error::ConstraintViolation { .. })));
        // breaks the S rule on t = 2
        let bad = ProbabilitySet::new([[0.5, 0.5], [0.5, 0.5], [0.9, 0.5]], s);
        assert!(matches!(bad, Err(Error::ConstraintViolation { .. })));
        // out-of-range entry
        let bad = ProbabilitySet::new([[1.2, -0.2], [0.7, 0.7], [0.7, 0.7]], s);
        assert!(matches!(bad, Err(Error::InvalidProbability(_))));
        // a consistent set passes
        let ok = ProbabilitySet::new([[0.7, 0.3], [0.6, 0.6], [0.55, 0.65]], s);
        assert!(ok.is_ok());
        assert!((ok.unwrap().s() - 1.2).abs() < 1e-15);
    }

    #[test]
    fn reconstruct_inverts_probabilities() {
        let base = RandomStream::new(2024);
        let mut worst = 0.0f64;
        for i in 0..1000u64 {
            let mut stream = base.at(SAMPLE_STRIDE * i);
            let rho = sample_bures(&mut stream);
            for lambda in LAMBDA_GRID {
                let s = MeasurementStrength::from_lambda(lambda).unwrap();
                let p = probabilities(&rho, s).unwrap();
                let back = reconstruct(&p, s).unwrap();
                worst = worst.max(hs_distance_sq(&rho, &back));
            }
        }
        assert!(worst < 1e-20, "worst squared HS distance {worst:e}");
    }

    #[test]
    fn reconstruct_known_cases() {
        // uniform outcomes at λ = 0 give the maximally mixed state
        let s0 = MeasurementStrength::from_lambda(0.0).unwrap();
        let p = ProbabilitySet::new([[0.5, 0.5], [0.5, 0.5], [0.5, 0.5]], s0).unwrap();
        let rho = reconstruct(&p, s0).unwrap();
        assert!(hs_distance_sq(&rho, &DensityMatrix::maximally_mixed()) < 1e-28);

        // exact inversion of the ground state at λ = 0.5
        let s = MeasurementStrength::from_lambda(0.5).unwrap();
        let ground = PureState::zero().projector();
        let p = probabilities(&ground, s).unwrap();
        let back = reconstruct(&p, s).unwrap();
        assert!(hs_distance_sq(&ground, &back) < 1e-24);
    }

    #[test]
    fn reconstruct_at_zero_strength_is_projector_sum() {
        // At λ = 0 the inversion reduces to Σ p_kt |e_k^t⟩⟨e_k^t| − I with
        // the e's taken as the λ = 0 effective vectors.
        let s0 = MeasurementStrength::from_lambda(0.0).unwrap();
        let rho = DensityMatrix::from_bloch([0.23, -0.41, 0.55]).unwrap();
        let p = probabilities(&rho, s0).unwrap();
        let eff = effective_states(s0);
        let mut m = [[Complex::new(0.0, 0.0); 2]; 2];
        for t in 0..3 {
            for k in 0..2 {
                let proj = eff.get(t, k).projector();
                for i in 0..2 {
                    for j in 0..2 {
                        m[i][j] += proj.entry(i, j) * p.get(t, k);
                    }
                }
            }
        }
        m[0][0] -= Complex::new(1.0, 0.0);
        m[1][1] -= Complex::new(1.0, 0.0);
        let direct = DensityMatrix::new_estimate(m).unwrap();
        let inverted = reconstruct(&p, s0).unwrap();
        assert!(hs_distance_sq(&direct, &inverted) < 1e-24);
    }

    #[test]
    fn reconstruct_rejects_near_parallel_strength() {
        let s = MeasurementStrength::from_lambda(1.0 - 1e-13).unwrap();
        let p = ProbabilitySet::new([[0.5, 0.5], [0.5, 0.5], [0.5, 0.5]], s).unwrap();
        assert!(matches!(reconstruct(&p, s), Err(Error::DegenerateStrength)));
    }
}
