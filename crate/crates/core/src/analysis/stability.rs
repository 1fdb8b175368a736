//! Sufficient conditions for global stability of the homogeneous states and
//! the explicit Lyapunov certificate behind them.
//!
//! The Lyapunov functional of the weak case dissipates at a rate bounded by
//! two quadratic forms, one in `(u - u*, v - v*, w - w*)` and one in the
//! gradients. Both weight matrices depend on a free parameter `δ > 0` that
//! enters as the coefficient of `∫(w - w*)²`. The first matrix stays positive
//! definite for `δ` below an upper bound, the second for `δ` above a lower
//! bound, and the stability hypotheses say precisely that this window is
//! non-empty. The strongly asymmetric case is the same construction around
//! `(0, v⋆, w⋆)`, where the `u`-gradient row drops out.

use serde::{Deserialize, Serialize};

use super::equilibrium::{coexistence_equilibrium, semitrivial_equilibrium, Equilibrium};
use super::hypothesis::{ConditionRecord, HypothesisReport};
use super::matrix::{is_positive_definite, SymMatrix};
use super::regime::{classify_regime, RegimeKind};
use super::AnalysisError;
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityCase {
    /// Coexistence state in the weak competition regime.
    Weak,
    /// Semi-trivial state in the strongly asymmetric regime.
    Asymmetric,
}

/// Ids of the conditions emitted by [`check_stability`].
pub mod ids {
    pub const SIGNAL_COUPLING: &str = "signal_coupling";
    pub const WEAK_DOMINANCE: &str = "weak_dominance";
    pub const ASYMMETRIC_DOMINANCE: &str = "asymmetric_dominance";
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Varpi {
    /// `a1 - a4|Ω| - b3|Ω|`
    pub varpi1: f64,
    /// `b2 - a4|Ω| - b3|Ω|`
    pub varpi2: f64,
    /// Chemotactic penalty at the coexistence state; absent when that state
    /// does not exist.
    pub varpi3: Option<f64>,
    /// Chemotactic penalty at the semi-trivial state.
    pub varpi3_bar: Option<f64>,
}

pub fn compute_varpi(p: &Params) -> Varpi {
    let m = p.omega_measure;
    let varpi3 = coexistence_equilibrium(p).ok().map(|eq| varpi3(p, &eq));
    let varpi3_bar = semitrivial_equilibrium(p).ok().map(|eq| varpi3_bar(p, &eq));
    Varpi {
        varpi1: p.a1 - p.a4 * m - p.b3 * m,
        varpi2: p.b2 - p.a4 * m - p.b3 * m,
        varpi3,
        varpi3_bar,
    }
}

fn varpi3(p: &Params, eq: &Equilibrium) -> f64 {
    (p.d1 * p.a2 * p.chi2.powi(2) * eq.v + p.d2 * p.b1 * p.chi1.powi(2) * eq.u)
        / (16.0 * p.d1 * p.d2 * p.d3 * p.a2 * p.b1 * p.lambda)
}

fn varpi3_bar(p: &Params, eq: &Equilibrium) -> f64 {
    p.chi2.powi(2) * eq.v / (16.0 * p.d2 * p.d3 * p.b1 * p.lambda)
}

/// `b1 l² ϖ1 + a2 k² ϖ2 - 2 a2 b1 k l`
fn coupling_excess(p: &Params, varpi1: f64, varpi2: f64) -> f64 {
    p.b1 * p.l * p.l * varpi1 + p.a2 * p.k * p.k * varpi2 - 2.0 * p.a2 * p.b1 * p.k * p.l
}

fn reference_equilibrium(p: &Params, case: StabilityCase) -> Result<Equilibrium, AnalysisError> {
    match case {
        StabilityCase::Weak => coexistence_equilibrium(p),
        StabilityCase::Asymmetric => semitrivial_equilibrium(p),
    }
}

/// Open interval of admissible `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaWindow {
    pub lo: f64,
    pub hi: f64,
}

impl DeltaWindow {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, delta: f64) -> bool {
        self.lo < delta && delta < self.hi
    }
}

/// Window of `δ` for which both weight matrices are positive definite.
///
/// `hi` makes the determinant of the state matrix vanish; `lo` makes the
/// determinant of the gradient matrix vanish.
pub fn delta_interval(p: &Params, case: StabilityCase) -> Result<DeltaWindow, AnalysisError> {
    let eq = reference_equilibrium(p, case)?;
    let Varpi { varpi1, varpi2, .. } = compute_varpi(p);
    let excess = coupling_excess(p, varpi1, varpi2);
    let hi = 4.0 * p.lambda * p.a2 * (varpi1 * varpi2 - p.b1 * p.a2) / excess;
    let lo = match case {
        StabilityCase::Weak => {
            (p.d1 * p.a2 * p.chi2.powi(2) * eq.v + p.d2 * p.b1 * p.chi1.powi(2) * eq.u)
                / (4.0 * p.d1 * p.d2 * p.d3 * p.b1)
        }
        StabilityCase::Asymmetric => p.a2 * p.chi2.powi(2) * eq.v / (4.0 * p.d2 * p.d3 * p.b1),
    };
    if !(excess > 0.0) || !(lo < hi) {
        return Err(AnalysisError::EmptyWindow { lo, hi });
    }
    Ok(DeltaWindow { lo, hi })
}

/// The state-deviation matrix and the gradient matrix of the Lyapunov
/// dissipation estimate, both symmetric by construction.
///
/// The gradient matrix is 3×3 in the weak case and 2×2 in the asymmetric
/// case.
pub fn build_matrices(
    p: &Params,
    delta: f64,
    case: StabilityCase,
) -> Result<(SymMatrix, SymMatrix), AnalysisError> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(AnalysisError::InvalidDelta(delta));
    }
    let eq = reference_equilibrium(p, case)?;
    let Varpi { varpi1, varpi2, .. } = compute_varpi(p);
    let ratio = p.a2 / p.b1;

    let kd = -p.k * delta / 2.0;
    let ld = -p.l * delta / 2.0;
    let state = SymMatrix::from_rows(vec![
        vec![varpi1, p.a2, kd],
        vec![p.a2, ratio * varpi2, ld],
        vec![kd, ld, p.lambda * delta],
    ]);

    let vv = ratio * p.d2 * eq.v;
    let vw = -ratio * p.chi2 * eq.v / 2.0;
    let gradient = match case {
        StabilityCase::Weak => {
            let uw = -p.chi1 * eq.u / 2.0;
            SymMatrix::from_rows(vec![
                vec![p.d1 * eq.u, 0.0, uw],
                vec![0.0, vv, vw],
                vec![uw, vw, p.d3 * delta],
            ])
        }
        StabilityCase::Asymmetric => {
            SymMatrix::from_rows(vec![vec![vv, vw], vec![vw, p.d3 * delta]])
        }
    };
    Ok((state, gradient))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    pub varpi: Varpi,
    pub delta_interval: DeltaWindow,
    pub delta_chosen: f64,
    pub p_matrix: SymMatrix,
    pub s_matrix: SymMatrix,
    pub minors_p: Vec<f64>,
    pub minors_s: Vec<f64>,
    pub positive_definite: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCheck {
    pub case: StabilityCase,
    pub equilibrium: Equilibrium,
    pub report: HypothesisReport,
    pub certificate: Option<StabilityCertificate>,
}

/// Evaluates the stability hypotheses for `case` and, when they hold, builds
/// the Lyapunov certificate at the midpoint of the admissible `δ` window.
///
/// Nonlocal coefficients must be nonnegative and the regime must match the
/// case; the asymmetric case additionally needs `ϖ1 > 0`.
pub fn check_stability(p: &Params, case: StabilityCase) -> Result<StabilityCheck, AnalysisError> {
    let regime = classify_regime(p);
    let wanted = match case {
        StabilityCase::Weak => RegimeKind::Weak,
        StabilityCase::Asymmetric => RegimeKind::StronglyAsymmetric,
    };
    if regime.kind != wanted {
        return Err(AnalysisError::RegimeMismatch(format!(
            "{case:?} case needs the {wanted:?} regime, parameters are {:?}",
            regime.kind
        )));
    }
    if [p.a3, p.a4, p.b3, p.b4].iter().any(|&c| c < 0.0) {
        return Err(AnalysisError::RegimeMismatch(
            "nonlocal coefficients a3, a4, b3, b4 must be nonnegative".into(),
        ));
    }
    let varpi = compute_varpi(p);
    if case == StabilityCase::Asymmetric && !(varpi.varpi1 > 0.0) {
        return Err(AnalysisError::RegimeMismatch(format!(
            "asymmetric case needs varpi1 > 0, got {}",
            varpi.varpi1
        )));
    }
    let equilibrium = reference_equilibrium(p, case)?;

    let excess = coupling_excess(p, varpi.varpi1, varpi.varpi2);
    let penalty = match case {
        StabilityCase::Weak => varpi3(p, &equilibrium),
        StabilityCase::Asymmetric => varpi3_bar(p, &equilibrium),
    };
    let dominance_id = match case {
        StabilityCase::Weak => ids::WEAK_DOMINANCE,
        StabilityCase::Asymmetric => ids::ASYMMETRIC_DOMINANCE,
    };
    let mut report = HypothesisReport::new(vec![
        ConditionRecord::strict(
            ids::SIGNAL_COUPLING,
            p.b1 * p.l * p.l * varpi.varpi1 + p.a2 * p.k * p.k * varpi.varpi2,
            2.0 * p.a2 * p.b1 * p.k * p.l,
        ),
        ConditionRecord::strict(
            dominance_id,
            varpi.varpi1 * varpi.varpi2,
            p.a2 * p.b1 + excess * penalty,
        ),
    ]);

    let mut certificate = None;
    if report.overall {
        match delta_interval(p, case) {
            Ok(window) => {
                let delta = window.midpoint();
                let (pm, sm) = build_matrices(p, delta, case)?;
                let (p_pd, minors_p) = is_positive_definite(&pm)?;
                let (s_pd, minors_s) = is_positive_definite(&sm)?;
                certificate = Some(StabilityCertificate {
                    varpi,
                    delta_interval: window,
                    delta_chosen: delta,
                    p_matrix: pm,
                    s_matrix: sm,
                    minors_p,
                    minors_s,
                    positive_definite: p_pd && s_pd,
                });
            }
            Err(e) => report.notes.push(format!("no certificate: {e}")),
        }
    }

    Ok(StabilityCheck {
        case,
        equilibrium,
        report,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::reduce_tello_winkler;
    use proptest::prelude::*;

    fn w1_family(a1: f64) -> Params {
        Params {
            a0: 1.0,
            b0: 1.0,
            a1,
            b2: a1,
            a2: 1.0,
            b1: 1.0,
            a3: 0.1,
            a4: 0.1,
            b3: 0.1,
            b4: 0.1,
            d1: 1.0,
            d2: 1.0,
            d3: 1.0,
            chi1: 0.5,
            chi2: 0.5,
            k: 1.0,
            l: 1.0,
            lambda: 1.0,
            omega_measure: 1.0,
        }
    }

    #[test]
    fn varpi_direct_substitution() {
        let p = Params {
            a1: 10.0,
            b2: 10.0,
            a4: 1.0,
            b3: 1.0,
            omega_measure: 1.0,
            ..Params::default()
        };
        let v = compute_varpi(&p);
        assert_eq!(v.varpi1, 8.0);
        assert_eq!(v.varpi2, 8.0);
    }

    #[test]
    fn w1_varpi_by_hand() {
        // a1 = b2 = 1.5: u* = v* = 1 / (1.6 + 1.1) = 1/2.7, varpi3 = u*/32.
        let p = w1_family(1.5);
        let v = compute_varpi(&p);
        assert!((v.varpi1 - 1.3).abs() < 1e-15);
        assert!((v.varpi2 - 1.3).abs() < 1e-15);
        let expect3 = (1.0 / 2.7) / 32.0;
        assert!((v.varpi3.unwrap() - expect3).abs() < 1e-15);
        // semi-trivial: v⋆ = 1/1.6, varpi3_bar = 0.25 v⋆ / 16
        assert!((v.varpi3_bar.unwrap() - 0.25 / 1.6 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn w1_window_by_hand() {
        let p = w1_family(1.5);
        let w = delta_interval(&p, StabilityCase::Weak).unwrap();
        // hi = 4 (1.69 - 1) / (1.3 + 1.3 - 2), lo = 0.25 (v* + u*) / 4 = u*/8
        assert!((w.hi - 4.0 * 0.69 / 0.6).abs() < 1e-13);
        assert!((w.lo - (1.0 / 2.7) / 8.0).abs() < 1e-15);
    }

    #[test]
    fn w1_family_passes_with_margins() {
        let check = check_stability(&w1_family(1.5), StabilityCase::Weak).unwrap();
        assert!(check.report.overall);
        let coupling = check.report.get(ids::SIGNAL_COUPLING).unwrap();
        assert!((coupling.margin - 0.6).abs() < 1e-14);
        let dom = check.report.get(ids::WEAK_DOMINANCE).unwrap();
        let expect = 1.69 - (1.0 + 0.6 * (1.0 / 2.7) / 32.0);
        assert!((dom.margin - expect).abs() < 1e-14);
        let cert = check.certificate.unwrap();
        assert!(cert.positive_definite);
        assert_eq!(cert.p_matrix.get(0, 0), cert.varpi.varpi1);
        assert!(cert.delta_interval.contains(cert.delta_chosen));
    }

    #[test]
    fn coupling_fails_just_above_weak_threshold() {
        // a1 = 1.1 is weak (r_low = 1.1/1.2 < 1) but 2 varpi1 = 1.8 < 2.
        let check = check_stability(&w1_family(1.1), StabilityCase::Weak).unwrap();
        assert!(!check.report.get(ids::SIGNAL_COUPLING).unwrap().satisfied);
        assert!(!check.report.overall);
        assert!(check.certificate.is_none());
    }

    #[test]
    fn matrices_symmetric_and_shaped() {
        let p = w1_family(3.0);
        let (pm, sm) = build_matrices(&p, 0.7, StabilityCase::Weak).unwrap();
        assert!(pm.is_exactly_symmetric() && sm.is_exactly_symmetric());
        assert_eq!((pm.dim(), sm.dim()), (3, 3));
        let (pm, sm) = build_matrices(&p, 0.7, StabilityCase::Asymmetric).unwrap();
        assert!(pm.is_exactly_symmetric() && sm.is_exactly_symmetric());
        assert_eq!((pm.dim(), sm.dim()), (3, 2));
        assert_eq!(
            build_matrices(&p, 0.0, StabilityCase::Weak),
            Err(AnalysisError::InvalidDelta(0.0))
        );
    }

    #[test]
    fn window_edges_zero_the_determinants() {
        let p = w1_family(2.0);
        let w = delta_interval(&p, StabilityCase::Weak).unwrap();
        let (pm, _) = build_matrices(&p, w.hi, StabilityCase::Weak).unwrap();
        assert!(pm.leading_minor(3).abs() < 1e-12);
        let (_, sm) = build_matrices(&p, w.lo, StabilityCase::Weak).unwrap();
        assert!(sm.leading_minor(3).abs() < 1e-14);
    }

    #[test]
    fn lo_vanishes_with_sensitivities() {
        let mut p = w1_family(2.0);
        let hi0 = delta_interval(&p, StabilityCase::Weak).unwrap().hi;
        for chi in [1e-2, 1e-4, 1e-8] {
            p.chi1 = chi;
            p.chi2 = chi;
            let w = delta_interval(&p, StabilityCase::Weak).unwrap();
            assert!(w.lo <= chi * chi);
            assert_eq!(w.hi, hi0);
        }
    }

    #[test]
    fn empty_window_reported() {
        let mut p = w1_family(1.5);
        p.chi1 = 40.0;
        p.chi2 = 40.0;
        assert!(matches!(
            delta_interval(&p, StabilityCase::Weak),
            Err(AnalysisError::EmptyWindow { .. })
        ));
        let check = check_stability(&p, StabilityCase::Weak).unwrap();
        assert!(!check.report.overall);
    }

    #[test]
    fn large_self_limitation_passes() {
        // Start from a weak configuration that fails the dominance condition.
        let mut p = w1_family(1.5);
        p.chi1 = 8.0;
        p.chi2 = 8.0;
        assert!(
            !check_stability(&p, StabilityCase::Weak)
                .unwrap()
                .report
                .overall
        );
        p.a1 *= 100.0;
        p.b2 *= 100.0;
        let check = check_stability(&p, StabilityCase::Weak).unwrap();
        assert!(check.report.overall);
        assert!(check.certificate.unwrap().positive_definite);
    }

    #[test]
    fn regime_preconditions() {
        let p = w1_family(1.5);
        assert!(matches!(
            check_stability(&p, StabilityCase::Asymmetric),
            Err(AnalysisError::RegimeMismatch(_))
        ));
        let mut q = p;
        q.a3 = -0.01;
        assert!(matches!(
            check_stability(&q, StabilityCase::Weak),
            Err(AnalysisError::RegimeMismatch(_))
        ));
    }

    fn a1_scenario() -> Params {
        Params {
            a1: 2.0,
            b2: 2.0,
            b0: 4.0,
            ..w1_family(2.0)
        }
    }

    #[test]
    fn asymmetric_certificate() {
        let p = a1_scenario();
        let check = check_stability(&p, StabilityCase::Asymmetric).unwrap();
        assert!(check.report.overall);
        assert!(check.report.get(ids::ASYMMETRIC_DOMINANCE).is_some());
        let cert = check.certificate.unwrap();
        assert!(cert.positive_definite);
        assert_eq!(cert.minors_s.len(), 2);
        assert_eq!(check.equilibrium.u, 0.0);
    }

    #[test]
    fn asymmetric_requires_positive_varpi1() {
        let p = Params {
            a1: 1.0,
            a2: 1.0,
            a3: 0.1,
            a4: 0.6,
            b0: 10.0,
            b1: 1.0,
            b2: 10.0,
            b3: 0.5,
            b4: 0.1,
            ..w1_family(1.0)
        };
        // r_low = 1.5/1.1 < r_high = 10.1/1.6 <= r_mid = 10, but varpi1 = -0.1
        assert_eq!(classify_regime(&p).kind, RegimeKind::StronglyAsymmetric);
        match check_stability(&p, StabilityCase::Asymmetric) {
            Err(AnalysisError::RegimeMismatch(msg)) => assert!(msg.contains("varpi1")),
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn reduction_always_satisfies_coupling(
            mu1 in 0.1f64..50.0, mu2 in 0.1f64..50.0,
            ab1 in 0.01f64..0.99, ab2 in 0.01f64..0.99,
        ) {
            let p = reduce_tello_winkler(mu1, mu2, ab1, ab2).apply(Params {
                k: 1.0,
                l: 1.0,
                ..Params::default()
            });
            let check = check_stability(&p, StabilityCase::Weak).unwrap();
            prop_assert!(check.report.get(ids::SIGNAL_COUPLING).unwrap().satisfied);
        }

        #[test]
        fn passing_checks_certify(
            a1 in 1.2f64..200.0,
            chi in 0.01f64..5.0,
            nonlocal in 0.0f64..0.5,
            d3 in 0.1f64..5.0,
        ) {
            let p = Params {
                a3: nonlocal, a4: nonlocal, b3: nonlocal, b4: nonlocal,
                chi1: chi, chi2: chi, d3,
                ..w1_family(a1)
            };
            if let Ok(check) = check_stability(&p, StabilityCase::Weak) {
                if check.report.overall {
                    let cert = check.certificate.expect("certificate when hypotheses pass");
                    prop_assert!(cert.positive_definite);
                    prop_assert!(cert.minors_p.iter().chain(&cert.minors_s).all(|&m| m > 0.0));
                }
            }
        }
    }
}
