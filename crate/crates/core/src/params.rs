//! Model coefficients of the two-species chemotaxis system
//!
//! ```text
//! u_t = d1 Δu - chi1 ∇·(u∇w) + u (a0 - a1 u - a2 v - a3 ∫u - a4 ∫v)
//! v_t = d2 Δv - chi2 ∇·(v∇w) + v (b0 - b1 u - b2 v - b3 ∫u - b4 ∫v)
//! w_t = d3 Δw - lambda w + k u + l v
//! ```
//!
//! with homogeneous Neumann boundaries on a domain of measure `omega_measure`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{field}: {reason}")]
pub struct ParamsError {
    pub field: &'static str,
    pub reason: String,
}

/// All coefficients of the system plus the domain measure |Ω|.
///
/// `a3`, `a4`, `b3`, `b4` weigh the nonlocal terms and may take either sign:
/// positive values model competition felt across the whole habitat, negative
/// values model cooperation. Every other coefficient is strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub lambda: f64,
    pub k: f64,
    pub l: f64,
    pub omega_measure: f64,
}

impl Params {
    /// Field names in declaration order, paired with their values.
    pub fn named_values(&self) -> [(&'static str, f64); 19] {
        [
            ("d1", self.d1),
            ("d2", self.d2),
            ("d3", self.d3),
            ("chi1", self.chi1),
            ("chi2", self.chi2),
            ("a0", self.a0),
            ("a1", self.a1),
            ("a2", self.a2),
            ("a3", self.a3),
            ("a4", self.a4),
            ("b0", self.b0),
            ("b1", self.b1),
            ("b2", self.b2),
            ("b3", self.b3),
            ("b4", self.b4),
            ("lambda", self.lambda),
            ("k", self.k),
            ("l", self.l),
            ("omega_measure", self.omega_measure),
        ]
    }

    /// Checks finiteness and the sign constraints of the model.
    pub fn validate(&self) -> Result<(), ParamsError> {
        for (field, value) in self.named_values() {
            if !value.is_finite() {
                return Err(ParamsError {
                    field,
                    reason: format!("must be finite, got {value}"),
                });
            }
            let signed = matches!(field, "a3" | "a4" | "b3" | "b4");
            if !signed && value <= 0.0 {
                return Err(ParamsError {
                    field,
                    reason: format!("must be positive, got {value}"),
                });
            }
        }
        Ok(())
    }

    /// Kinetic coefficient rows with the nonlocal weights folded in:
    /// `(a1 + a3|Ω|, a2 + a4|Ω|, b1 + b3|Ω|, b2 + b4|Ω|)`.
    pub fn effective_rows(&self) -> (f64, f64, f64, f64) {
        let m = self.omega_measure;
        (
            self.a1 + self.a3 * m,
            self.a2 + self.a4 * m,
            self.b1 + self.b3 * m,
            self.b2 + self.b4 * m,
        )
    }

    /// Sets every kinetic coefficient (`a0..a4`, `b0..b4`) to zero.
    pub fn without_kinetics(mut self) -> Self {
        self.a0 = 0.0;
        self.a1 = 0.0;
        self.a2 = 0.0;
        self.a3 = 0.0;
        self.a4 = 0.0;
        self.b0 = 0.0;
        self.b1 = 0.0;
        self.b2 = 0.0;
        self.b3 = 0.0;
        self.b4 = 0.0;
        self
    }
}

impl Default for Params {
    /// Unit coefficients with weak local competition and no nonlocal terms.
    fn default() -> Self {
        Self {
            d1: 1.0,
            d2: 1.0,
            d3: 1.0,
            chi1: 0.5,
            chi2: 0.5,
            a0: 1.0,
            a1: 1.0,
            a2: 0.5,
            a3: 0.0,
            a4: 0.0,
            b0: 1.0,
            b1: 0.5,
            b2: 1.0,
            b3: 0.0,
            b4: 0.0,
            lambda: 1.0,
            k: 1.0,
            l: 1.0,
            omega_measure: 1.0,
        }
    }
}
