use serde::{Deserialize, Serialize};

use crate::params::Params;

/// Kinetic coefficients that turn the nonlocal system into the classical
/// two-species competition model
/// `u (μ1 (1 - u - ā1 v))`, `v (μ2 (1 - v - ā2 u))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelloWinklerPatch {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a3: f64,
    pub a4: f64,
    pub b3: f64,
    pub b4: f64,
}

impl TelloWinklerPatch {
    /// Overwrites the kinetic coefficients of `p`, leaving the rest untouched.
    pub fn apply(&self, p: Params) -> Params {
        Params {
            a0: self.a0,
            a1: self.a1,
            a2: self.a2,
            a3: self.a3,
            a4: self.a4,
            b0: self.b0,
            b1: self.b1,
            b2: self.b2,
            b3: self.b3,
            b4: self.b4,
            ..p
        }
    }
}

pub fn reduce_tello_winkler(mu1: f64, mu2: f64, abar1: f64, abar2: f64) -> TelloWinklerPatch {
    debug_assert!(mu1 > 0.0 && mu2 > 0.0 && abar1 > 0.0 && abar2 > 0.0);
    TelloWinklerPatch {
        a0: mu1,
        a1: mu1,
        a2: mu1 * abar1,
        b0: mu2,
        b1: mu2 * abar2,
        b2: mu2,
        a3: 0.0,
        a4: 0.0,
        b3: 0.0,
        b4: 0.0,
    }
}
