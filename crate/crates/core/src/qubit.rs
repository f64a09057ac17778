//! Exact small-dimension complex linear algebra for a single qubit:
//! pure states, 2×2 Hermitian density matrices, the 4×4 system–pointer
//! coupling unitary and small real matrices used by the error analysis.
//!
//! All decompositions are closed-form (quadratic eigensolve, adjugate
//! inversion); there are no iterative solvers and no tolerance cascades.

use crate::error::{Error, Result};

pub use num_complex::Complex64 as Complex;

/// Tolerance for normalization, Hermiticity and trace checks.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Eigenvalues of a density matrix may dip this far below zero before the
/// matrix is rejected as non-positive; admits round-trip float noise.
pub const PSD_TOL: f64 = -1e-9;

fn check_finite_c(z: Complex, what: &'static str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

// ---------------------------------------------------------------------------
// Pure states
// ---------------------------------------------------------------------------

/// A normalized single-qubit pure state `amp0·|0⟩ + amp1·|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    amps: [Complex; 2],
}

impl PureState {
    /// Builds a state from computational-basis amplitudes. Rejects
    /// non-finite entries and vectors whose norm² differs from 1 by more
    /// than `ALGEBRA_TOL`.
    pub fn new(amp0: Complex, amp1: Complex) -> Result<Self> {
        check_finite_c(amp0, "pure state amplitude")?;
        check_finite_c(amp1, "pure state amplitude")?;
        let norm_sq = amp0.norm_sqr() + amp1.norm_sqr();
        if (norm_sq - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::NotNormalized(norm_sq));
        }
        Ok(Self { amps: [amp0, amp1] })
    }

    /// |0⟩
    pub fn zero() -> Self {
        Self {
            amps: [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
        }
    }

    /// |1⟩
    pub fn one() -> Self {
        Self {
            amps: [Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)],
        }
    }

    pub fn amp0(&self) -> Complex {
        self.amps[0]
    }

    pub fn amp1(&self) -> Complex {
        self.amps[1]
    }

    /// ⟨self|other⟩
    pub fn overlap(&self, other: &PureState) -> Complex {
        self.amps[0].conj() * other.amps[0] + self.amps[1].conj() * other.amps[1]
    }

    /// ⟨self|ρ|self⟩ — real by Hermiticity of ρ.
    pub fn expectation(&self, rho: &DensityMatrix) -> f64 {
        let mut acc = Complex::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                acc += self.amps[i].conj() * rho.m[i][j] * self.amps[j];
            }
        }
        acc.re
    }

    /// The rank-1 projector |ψ⟩⟨ψ| as a density matrix.
    pub fn projector(&self) -> DensityMatrix {
        let mut m = [[Complex::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = self.amps[i] * self.amps[j].conj();
            }
        }
        DensityMatrix::trusted(m)
    }

    /// Fixes the global phase so the first amplitude of modulus above
    /// `ALGEBRA_TOL` becomes real and nonnegative.
    pub fn canonical_phase(self) -> Self {
        let pivot = if self.amps[0].norm() > ALGEBRA_TOL {
            self.amps[0]
        } else {
            self.amps[1]
        };
        let modulus = pivot.norm();
        if modulus == 0.0 {
            return self;
        }
        let phase = pivot / modulus;
        Self {
            amps: [self.amps[0] * phase.conj(), self.amps[1] * phase.conj()],
        }
    }

    /// The orthogonal complement (−amp1*, amp0*), phase-fixed.
    pub fn orthogonal(&self) -> Self {
        Self {
            amps: [-self.amps[1].conj(), self.amps[0].conj()],
        }
        .canonical_phase()
    }
}

// ---------------------------------------------------------------------------
// Density matrices
// ---------------------------------------------------------------------------

/// A 2×2 Hermitian, trace-1 matrix. Physical states are also positive
/// semidefinite; linear-inversion estimates may not be, so positivity is
/// checked at construction of physical states and again by consumers that
/// require it, not carried as a type invariant.
#[derive(Debug, Clone, Copy)]
pub struct DensityMatrix {
    m: [[Complex; 2]; 2],
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity. This is the
    /// constructor for physical states.
    pub fn new(m: [[Complex; 2]; 2]) -> Result<Self> {
        let rho = Self::new_estimate(m)?;
        let min = rho.eigenvalues()[1];
        if min < PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(rho)
    }

    /// Validates Hermiticity and unit trace only. Linear-inversion
    /// estimates are built through this path since they may have a
    /// negative eigenvalue.
    pub fn new_estimate(m: [[Complex; 2]; 2]) -> Result<Self> {
        for row in &m {
            for &z in row {
                check_finite_c(z, "density matrix entry")?;
            }
        }
        let asym = (m[0][1] - m[1][0].conj())
            .norm()
            .max(m[0][0].im.abs())
            .max(m[1][1].im.abs());
        if asym > ALGEBRA_TOL {
            return Err(Error::NotHermitian(asym));
        }
        let trace = m[0][0].re + m[1][1].re;
        if (trace - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::InvalidTrace(trace));
        }
        Ok(Self { m })
    }

    /// Internal constructor for matrices Hermitian and trace-1 by
    /// construction (projectors, convex mixtures, inversion output).
    pub(crate) fn trusted(m: [[Complex; 2]; 2]) -> Self {
        debug_assert!(
            (m[0][0].re + m[1][1].re - 1.0).abs() < 1e-9,
            "trace drifted"
        );
        debug_assert!(
            (m[0][1] - m[1][0].conj()).norm() < 1e-9,
            "hermiticity drifted"
        );
        Self { m }
    }

    /// ρ = (I + b·σ)/2 for a Bloch vector inside the unit ball.
    pub fn from_bloch(b: [f64; 3]) -> Result<Self> {
        for &c in &b {
            if !c.is_finite() {
                return Err(Error::NonFinite("Bloch component"));
            }
        }
        let len = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        if len > 1.0 + ALGEBRA_TOL {
            return Err(Error::BlochOutOfBall(len));
        }
        let m = [
            [
                Complex::new(0.5 * (1.0 + b[2]), 0.0),
                Complex::new(0.5 * b[0], -0.5 * b[1]),
            ],
            [
                Complex::new(0.5 * b[0], 0.5 * b[1]),
                Complex::new(0.5 * (1.0 - b[2]), 0.0),
            ],
        ];
        Ok(Self { m })
    }

    pub fn maximally_mixed() -> Self {
        Self::from_bloch([0.0, 0.0, 0.0]).expect("origin is inside the ball")
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex {
        self.m[i][j]
    }

    pub fn entries(&self) -> [[Complex; 2]; 2] {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0].re + self.m[1][1].re
    }

    /// Tr ρ² — 1 for pure states, 1/2 for the maximally mixed state.
    pub fn purity(&self) -> f64 {
        let b = self.bloch_vector();
        0.5 * (1.0 + b[0] * b[0] + b[1] * b[1] + b[2] * b[2])
    }

    /// b_i = Tr(ρ σ_i)
    pub fn bloch_vector(&self) -> [f64; 3] {
        [
            2.0 * self.m[0][1].re,
            -2.0 * self.m[0][1].im,
            self.m[0][0].re - self.m[1][1].re,
        ]
    }

    /// Eigenvalues in descending order, from the closed-form quadratic.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let half_diff = 0.5 * (a - d);
        let disc = (half_diff * half_diff + self.m[0][1].norm_sqr()).sqrt();
        let mid = 0.5 * (a + d);
        [mid + disc, mid - disc]
    }

    /// Errors unless both eigenvalues clear the `PSD_TOL` floor.
    pub fn check_psd(&self) -> Result<()> {
        let min = self.eigenvalues()[1];
        if min < PSD_TOL {
            Err(Error::NotPsd(min))
        } else {
            Ok(())
        }
    }

    /// Spectral decomposition ρ = x·v0 v0† + (1−x)·v1 v1† with x the larger
    /// eigenvalue. For a degenerate spectrum any orthonormal eigenpair is
    /// valid; the computational basis is returned.
    pub fn spectral_decompose(&self) -> (f64, PureState, PureState) {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let c = self.m[0][1];
        let half_diff = 0.5 * (a - d);
        let disc = (half_diff * half_diff + c.norm_sqr()).sqrt();
        let x = (0.5 * (a + d) + disc).clamp(0.0, 1.0);
        if disc < ALGEBRA_TOL {
            return (x, PureState::zero(), PureState::one());
        }
        let top = 0.5 * (a + d) + disc;
        // Two algebraically equivalent eigenvector expressions; pick the
        // better-conditioned branch.
        let cand_a = (c, Complex::new(top - a, 0.0));
        let cand_b = (Complex::new(top - d, 0.0), c.conj());
        let (v0, v1) = if cand_a.0.norm_sqr() + cand_a.1.norm_sqr()
            >= cand_b.0.norm_sqr() + cand_b.1.norm_sqr()
        {
            cand_a
        } else {
            cand_b
        };
        let norm = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
        let major = PureState {
            amps: [v0 / norm, v1 / norm],
        }
        .canonical_phase();
        let minor = major.orthogonal();
        (x, major, minor)
    }
}

/// Squared Hilbert–Schmidt distance Tr[(a−b)²]. Defined for any pair of
/// Hermitian matrices; positivity of the arguments is not required.
pub fn hs_distance_sq(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let mut acc = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            acc += (a.m[i][j] - b.m[i][j]).norm_sqr();
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// Two-qubit unitaries
// ---------------------------------------------------------------------------

/// A 4×4 unitary on the system⊗pointer space, row-major with basis index
/// `2·s + p`.
#[derive(Debug, Clone)]
pub struct TwoQubitUnitary {
    m: [[Complex; 4]; 4],
}

impl TwoQubitUnitary {
    /// Validates U U† = I to `ALGEBRA_TOL`.
    pub fn new(m: [[Complex; 4]; 4]) -> Result<Self> {
        for row in &m {
            for &z in row {
                check_finite_c(z, "unitary entry")?;
            }
        }
        let u = Self { m };
        let dev = u.unitarity_deviation();
        if dev > ALGEBRA_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(u)
    }

    /// exp(−iθ σ_x⊗σ_x) = cosθ·I − i sinθ·σ_x⊗σ_x, the system–pointer
    /// coupling. Unitary by construction for any real θ.
    pub fn coupling(theta: f64) -> Self {
        let c = Complex::new(theta.cos(), 0.0);
        let s = Complex::new(0.0, -theta.sin());
        let zero = Complex::new(0.0, 0.0);
        let mut m = [[zero; 4]; 4];
        for i in 0..4 {
            m[i][i] = c;
            m[i][3 - i] = s; // σ_x⊗σ_x flips both qubits
        }
        Self { m }
    }

    pub fn adjoint(&self) -> Self {
        let mut m = [[Complex::new(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = self.m[j][i].conj();
            }
        }
        Self { m }
    }

    pub fn apply(&self, v: &[Complex; 4]) -> [Complex; 4] {
        let mut out = [Complex::new(0.0, 0.0); 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i] += self.m[i][j] * v[j];
            }
        }
        out
    }

    pub fn matrix(&self) -> &[[Complex; 4]; 4] {
        &self.m
    }

    fn unitarity_deviation(&self) -> f64 {
        let mut max = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = Complex::new(0.0, 0.0);
                for k in 0..4 {
                    acc += self.m[i][k] * self.m[j][k].conj();
                }
                let target = if i == j { 1.0 } else { 0.0 };
                max = max.max((acc - Complex::new(target, 0.0)).norm());
            }
        }
        max
    }
}

// ---------------------------------------------------------------------------
// Small real matrices
// ---------------------------------------------------------------------------

/// 3×3 real matrix: carrier for the cost matrix Q and the Fisher matrix F.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealMatrix3 {
    m: [[f64; 3]; 3],
}

impl RealMatrix3 {
    pub fn new(m: [[f64; 3]; 3]) -> Result<Self> {
        for row in &m {
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::NonFinite("matrix entry"));
                }
            }
        }
        Ok(Self { m })
    }

    pub fn identity() -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self { m }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        self.m
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut m = self.m;
        for row in &mut m {
            for v in row {
                *v *= k;
            }
        }
        Self { m }
    }

    pub fn mul(&self, other: &RealMatrix3) -> Self {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for (k, other_row) in other.m.iter().enumerate() {
                    m[i][j] += self.m[i][k] * other_row[j];
                }
            }
        }
        Self { m }
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Exact inverse through the adjugate. Errors with `IllConditioned`
    /// when the determinant is too small to divide by.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.determinant();
        if det.abs() < 1e-300 {
            return Err(Error::IllConditioned(det));
        }
        let m = &self.m;
        let cof = |r1: usize, c1: usize, r2: usize, c2: usize| {
            m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]
        };
        // adj(A)[i][j] = cofactor C_ji
        let adj = [
            [cof(1, 1, 2, 2), -cof(0, 1, 2, 2), cof(0, 1, 1, 2)],
            [-cof(1, 0, 2, 2), cof(0, 0, 2, 2), -cof(0, 0, 1, 2)],
            [cof(1, 0, 2, 1), -cof(0, 0, 2, 1), cof(0, 0, 1, 1)],
        ];
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = adj[i][j] / det;
            }
        }
        Ok(Self { m: out })
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut max = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                max = max.max((self.m[i][j] - self.m[j][i]).abs());
            }
        }
        max
    }
}
