use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    Coexistence,
    SemiTrivial,
}

/// Spatially homogeneous steady state `(u, v, w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub kind: EquilibriumKind,
}

impl Equilibrium {
    /// Residuals of the three homogeneous balance equations, each divided by
    /// the sum of the magnitudes of its terms.
    ///
    /// For the semi-trivial state the `u` balance is trivially satisfied by
    /// `u = 0`, so its residual is reported as zero.
    pub fn relative_residuals(&self, p: &Params) -> [f64; 3] {
        let m = p.omega_measure;
        let rel = |terms: &[f64]| {
            let sum: f64 = terms.iter().sum();
            let scale: f64 = terms.iter().map(|t| t.abs()).sum();
            if scale == 0.0 {
                0.0
            } else {
                sum.abs() / scale
            }
        };
        let ru = match self.kind {
            EquilibriumKind::SemiTrivial => 0.0,
            EquilibriumKind::Coexistence => rel(&[
                p.a0,
                -p.a1 * self.u,
                -p.a2 * self.v,
                -p.a3 * m * self.u,
                -p.a4 * m * self.v,
            ]),
        };
        let rv = rel(&[
            p.b0,
            -p.b1 * self.u,
            -p.b2 * self.v,
            -p.b3 * m * self.u,
            -p.b4 * m * self.v,
        ]);
        let rw = rel(&[-p.lambda * self.w, p.k * self.u, p.l * self.v]);
        [ru, rv, rw]
    }
}

/// The positive constant state of the weak competition regime.
pub fn coexistence_equilibrium(p: &Params) -> Result<Equilibrium, AnalysisError> {
    let (a_self, a_cross, b_cross, b_self) = p.effective_rows();
    let det = b_self * a_self - a_cross * b_cross;
    if det == 0.0 || !det.is_finite() {
        return Err(AnalysisError::SingularSystem);
    }
    let u = (p.a0 * b_self - p.b0 * a_cross) / det;
    let v = (p.a0 * b_cross - p.b0 * a_self) / -det;
    if !(u > 0.0 && v > 0.0) {
        return Err(AnalysisError::NonpositiveEquilibrium { u, v });
    }
    let w = (p.k * u + p.l * v) / p.lambda;
    Ok(Equilibrium {
        u,
        v,
        w,
        kind: EquilibriumKind::Coexistence,
    })
}

/// The state `(0, v⋆, w⋆)` where only the `v` species survives.
pub fn semitrivial_equilibrium(p: &Params) -> Result<Equilibrium, AnalysisError> {
    let (.., b_self) = p.effective_rows();
    if b_self <= 0.0 || !b_self.is_finite() {
        return Err(AnalysisError::SingularSystem);
    }
    let v = p.b0 / b_self;
    Ok(Equilibrium {
        u: 0.0,
        v,
        w: p.l * p.b0 / (p.lambda * b_self),
        kind: EquilibriumKind::SemiTrivial,
    })
}
