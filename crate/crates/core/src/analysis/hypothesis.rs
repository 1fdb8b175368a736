use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::params::Params;

/// Regularity constant used when the caller does not supply one.
pub const DEFAULT_C_P: f64 = 1.0;

/// `(max{0, a}, max{0, -a})`
pub fn signed_parts(a: f64) -> (f64, f64) {
    (a.max(0.0), (-a).max(0.0))
}

fn neg(a: f64) -> f64 {
    signed_parts(a).1
}

/// One strict inequality `lhs > rhs`, with `margin = lhs - rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub margin: f64,
}

impl ConditionRecord {
    pub fn strict(id: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            id: id.into(),
            lhs,
            rhs,
            satisfied: lhs > rhs,
            margin: lhs - rhs,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub conditions: Vec<ConditionRecord>,
    pub overall: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl HypothesisReport {
    pub fn new(conditions: Vec<ConditionRecord>) -> Self {
        let overall = conditions.iter().all(|c| c.satisfied);
        Self {
            conditions,
            overall,
            notes: Vec::new(),
        }
    }

    pub fn get(&self, id: &str) -> Option<&ConditionRecord> {
        self.conditions.iter().find(|c| c.id == id)
    }
}

/// Inputs of the boundedness check beyond the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundednessOptions {
    pub dim: usize,
    /// Integrability exponent, must exceed `dim`; defaults to `dim + 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_exp: Option<f64>,
    /// Maximal-regularity constant of the Neumann heat semigroup; defaults to
    /// [`DEFAULT_C_P`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_p: Option<f64>,
}

impl BoundednessOptions {
    pub fn for_dim(dim: usize) -> Self {
        Self {
            dim,
            p_exp: None,
            c_p: None,
        }
    }
}

/// Ids of the conditions emitted by [`check_boundedness`].
pub mod ids {
    pub const LOCAL_OVER_COOPERATION: &str = "local_over_cooperation";
    pub const HIGH_DIM_U: &str = "high_dim_u";
    pub const HIGH_DIM_V: &str = "high_dim_v";
}

/// Sufficient conditions for a global bounded solution.
///
/// In one and two dimensions only the local self-limitation has to beat the
/// strongest nonlocal cooperation. From three dimensions on, `a1` and `b2`
/// must in addition dominate the chemotactic sensitivities through the
/// exponent `p > dim` and the maximal-regularity constant `C_p`.
pub fn check_boundedness(
    p: &Params,
    opts: &BoundednessOptions,
) -> Result<HypothesisReport, AnalysisError> {
    let dim = opts.dim;
    if dim == 0 {
        return Err(AnalysisError::InvalidDimension);
    }
    let m = p.omega_measure;
    let coop = neg(p.a3).max(neg(p.b4)).max(neg(p.a4)).max(neg(p.b3));
    let mut conditions = vec![ConditionRecord::strict(
        ids::LOCAL_OVER_COOPERATION,
        p.a1.min(p.b2),
        coop * m,
    )];
    let mut notes = Vec::new();

    if dim >= 3 {
        let p_exp = opts.p_exp.unwrap_or(dim as f64 + 1.0);
        if !(p_exp > dim as f64) || !p_exp.is_finite() {
            return Err(AnalysisError::InvalidExponent { p_exp, dim });
        }
        let c_p = match opts.c_p {
            Some(c) => c,
            None => {
                notes.push(format!(
                    "regularity constant C_p not supplied; using default {DEFAULT_C_P}"
                ));
                DEFAULT_C_P
            }
        };
        if !(c_p > 0.0) || !c_p.is_finite() {
            return Err(AnalysisError::InvalidConstant(c_p));
        }
        let root = m.powf(1.0 / p_exp);
        let power = m.powf(p_exp);
        let chi_sum = p.chi1 + p.chi2;

        let rhs_u = (p_exp - 1.0) * p.chi1
            + p_exp * (neg(p.a3) + neg(p.a4)) * root
            + (neg(p.a3) + neg(p.b3)) * power
            + (2.0 * p.k).powf(p_exp + 1.0) * chi_sum * c_p;
        let rhs_v = (p_exp - 1.0) * p.chi2
            + p_exp * (neg(p.b4) + neg(p.b3)) * root
            + (neg(p.a4) + neg(p.b4)) * power
            + (2.0 * p.l).powf(p_exp + 1.0) * chi_sum * c_p;
        conditions.push(ConditionRecord::strict(ids::HIGH_DIM_U, p.a1, rhs_u));
        conditions.push(ConditionRecord::strict(ids::HIGH_DIM_V, p.b2, rhs_v));
    }

    let mut report = HypothesisReport::new(conditions);
    report.notes = notes;
    Ok(report)
}
