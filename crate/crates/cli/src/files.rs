//! JSON file schemas accepted and emitted by the CLI.
//!
//! State file — exactly one of the two keys:
//!   {"bloch": [bx, by, bz]}
//!   {"matrix": {"re": [[..],[..]], "im": [[..],[..]]}}
//!
//! Probability file:
//!   {"lambda": L, "p": [[p00,p10],[p01,p11],[p02,p12]], "s": S?}

use std::path::Path;

use dst_core::model::{MeasurementStrength, ProbabilitySet};
use dst_core::qubit::{Complex, DensityMatrix};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixEntries {
    pub re: [[f64; 2]; 2],
    pub im: [[f64; 2]; 2],
}

impl MatrixEntries {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let mut re = [[0.0; 2]; 2];
        let mut im = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                re[i][j] = rho.entry(i, j).re;
                im[i][j] = rho.entry(i, j).im;
            }
        }
        Self { re, im }
    }

    pub fn entries(&self) -> [[Complex; 2]; 2] {
        let mut m = [[Complex::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = Complex::new(self.re[i][j], self.im[i][j]);
            }
        }
        m
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    bloch: Option<[f64; 3]>,
    matrix: Option<MatrixEntries>,
}

/// Loads and validates a physical state (Hermitian, trace 1, positive).
pub fn load_state(path: &Path) -> Result<DensityMatrix, CliError> {
    let text = std::fs::read_to_string(path)?;
    let file: StateFile = serde_json::from_str(&text)?;
    match (file.bloch, file.matrix) {
        (Some(b), None) => Ok(DensityMatrix::from_bloch(b)?),
        (None, Some(m)) => Ok(DensityMatrix::new(m.entries())?),
        _ => Err(CliError::Usage(format!(
            "{}: state file needs exactly one of \"bloch\" or \"matrix\"",
            path.display()
        ))),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbabilityFile {
    lambda: f64,
    p: [[f64; 2]; 3],
    s: Option<f64>,
}

/// Loads a probability file; the sum rules are checked at construction.
pub fn load_probabilities(path: &Path) -> Result<(MeasurementStrength, ProbabilitySet), CliError> {
    let text = std::fs::read_to_string(path)?;
    let file: ProbabilityFile = serde_json::from_str(&text)?;
    let strength = MeasurementStrength::from_lambda(file.lambda)?;
    let probs = ProbabilitySet::new(file.p, strength)?;
    if let Some(s) = file.s {
        if (s - probs.s()).abs() > 1e-10 {
            return Err(CliError::Usage(format!(
                "{}: declared S = {s} disagrees with the probabilities (S = {})",
                path.display(),
                probs.s()
            )));
        }
    }
    Ok((strength, probs))
}

/// State as an emittable JSON value (matrix form; feeds back into
/// `load_state` when the state is physical).
pub fn state_json(rho: &DensityMatrix) -> serde_json::Value {
    let m = MatrixEntries::from_density(rho);
    serde_json::json!({ "matrix": { "re": m.re, "im": m.im } })
}

pub fn probability_json(
    strength: MeasurementStrength,
    probs: &ProbabilitySet,
) -> serde_json::Value {
    serde_json::json!({
        "lambda": strength.lambda(),
        "p": probs.rows(),
        "s": probs.s(),
    })
}
