//! Norms, Lyapunov functionals and decay checks along a trajectory.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{signed_parts, Equilibrium, EquilibriumKind};
use crate::grid::{grad_sq_integral, integrate, Field};
use crate::integrator::SimState;
use crate::params::Params;

/// Densities at or below this are refused by the logarithmic terms.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Samples with a dissipation below this are left out of the rate fit.
pub const DISSIPATION_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagError {
    #[error("{species} has a nonpositive cell value {value:e}")]
    NonpositiveDensity { species: &'static str, value: f64 },
    #[error("expected a {expected:?} equilibrium")]
    WrongEquilibrium { expected: EquilibriumKind },
    #[error("delta must be positive and finite, got {0}")]
    InvalidDelta(f64),
    #[error("need at least 3 samples, got {0}")]
    InsufficientData(usize),
    #[error("sample times must increase strictly (index {0})")]
    NonIncreasingTime(usize),
    #[error("sample {0} carries no Lyapunov value")]
    MissingLyapunov(usize),
}

/// One time sample of a trajectory.
///
/// Distances and Lyapunov values are present only when the probe knows a
/// reference equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagRecord {
    pub t: f64,
    pub mass_u: f64,
    pub mass_v: f64,
    pub linf_u: f64,
    pub linf_v: f64,
    pub linf_w: f64,
    pub l2_dist_u: Option<f64>,
    pub l2_dist_v: Option<f64>,
    pub l2_dist_w: Option<f64>,
    pub grad_w_sq: f64,
    pub e: Option<f64>,
    pub f: Option<f64>,
}

impl DiagRecord {
    pub const COLUMNS: [&'static str; 12] = [
        "t",
        "mass_u",
        "mass_v",
        "linf_u",
        "linf_v",
        "linf_w",
        "l2_dist_u",
        "l2_dist_v",
        "l2_dist_w",
        "grad_w_sq",
        "E",
        "F",
    ];

    /// Values in [`Self::COLUMNS`] order; absent entries are `None`.
    pub fn columns(&self) -> [Option<f64>; 12] {
        [
            Some(self.t),
            Some(self.mass_u),
            Some(self.mass_v),
            Some(self.linf_u),
            Some(self.linf_v),
            Some(self.linf_w),
            self.l2_dist_u,
            self.l2_dist_v,
            self.l2_dist_w,
            Some(self.grad_w_sq),
            self.e,
            self.f,
        ]
    }
}

/// `s - s* - s* ln(s / s*)` summed over cells, evaluated without
/// cancellation near `s = s*`.
fn relative_entropy(f: &Field, star: f64, species: &'static str) -> Result<f64, DiagError> {
    let mut acc = 0.0;
    for &s in f.values() {
        if !(s > DENSITY_FLOOR) {
            return Err(DiagError::NonpositiveDensity { species, value: s });
        }
        let r = (s - star) / star;
        let phi = if r.abs() < 1e-3 {
            r * r * (0.5 - r * (1.0 / 3.0 - r * (0.25 - r * (0.2 - r / 6.0))))
        } else {
            r - r.ln_1p()
        };
        acc += star * phi;
    }
    Ok(acc * f.grid().cell_volume())
}

fn sq_dist(f: &Field, c: f64) -> f64 {
    f.values().iter().map(|x| (x - c) * (x - c)).sum::<f64>() * f.grid().cell_volume()
}

fn check_delta(delta: f64) -> Result<(), DiagError> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(DiagError::InvalidDelta(delta))
    }
}

/// `(E1, F1)` around a coexistence equilibrium.
pub fn lyapunov_weak(
    state: &SimState,
    eq: &Equilibrium,
    delta: f64,
) -> Result<(f64, f64), DiagError> {
    if eq.kind != EquilibriumKind::Coexistence {
        return Err(DiagError::WrongEquilibrium {
            expected: EquilibriumKind::Coexistence,
        });
    }
    check_delta(delta)?;
    let hu = relative_entropy(&state.u, eq.u, "u")?;
    let hv = relative_entropy(&state.v, eq.v, "v")?;
    let (du, dv, dw) = (
        sq_dist(&state.u, eq.u),
        sq_dist(&state.v, eq.v),
        sq_dist(&state.w, eq.w),
    );
    Ok((hu + hv + 0.5 * delta * dw, du + dv + dw))
}

/// `(E2, F2)` around the semi-trivial equilibrium `(0, v⋆, w⋆)`.
pub fn lyapunov_asym(
    state: &SimState,
    eq: &Equilibrium,
    delta2: f64,
) -> Result<(f64, f64), DiagError> {
    if eq.kind != EquilibriumKind::SemiTrivial {
        return Err(DiagError::WrongEquilibrium {
            expected: EquilibriumKind::SemiTrivial,
        });
    }
    check_delta(delta2)?;
    let hv = relative_entropy(&state.v, eq.v, "v")?;
    let (du, dv, dw) = (
        sq_dist(&state.u, 0.0),
        sq_dist(&state.v, eq.v),
        sq_dist(&state.w, eq.w),
    );
    Ok((integrate(&state.u) + hv + 0.5 * delta2 * dw, du + dv + dw))
}

/// Whether every component is within `tol` of `eq` in L∞.
pub fn detect_convergence(state: &SimState, eq: &Equilibrium, tol: f64) -> bool {
    state.u.linf_dist_to(eq.u) < tol
        && state.v.linf_dist_to(eq.v) < tol
        && state.w.linf_dist_to(eq.w) < tol
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayVerdict {
    pub monotone: bool,
    pub epsilon_hat: Option<f64>,
    pub violations: usize,
}

/// Checks `E` for monotone decay and fits the smallest discrete rate
/// `(E_n - E_{n+1}) / ((t_{n+1} - t_n) F_n)`.
pub fn check_decay(series: &[DiagRecord]) -> Result<DecayVerdict, DiagError> {
    if series.len() < 3 {
        return Err(DiagError::InsufficientData(series.len()));
    }
    let mut ef = Vec::with_capacity(series.len());
    for (i, r) in series.iter().enumerate() {
        match (r.e, r.f) {
            (Some(e), Some(f)) => ef.push((r.t, e, f)),
            _ => return Err(DiagError::MissingLyapunov(i)),
        }
        if i > 0 && !(r.t > series[i - 1].t) {
            return Err(DiagError::NonIncreasingTime(i));
        }
    }
    let tol = 1e-8 * ef[0].1.max(1.0);
    let mut violations = 0;
    let mut eps: Option<f64> = None;
    for w in ef.windows(2) {
        let ((t0, e0, f0), (t1, e1, _)) = (w[0], w[1]);
        if e1 > e0 + tol {
            violations += 1;
        }
        if f0 > DISSIPATION_FLOOR {
            let rate = (e0 - e1) / ((t1 - t0) * f0);
            eps = Some(eps.map_or(rate, |m| m.min(rate)));
        }
    }
    Ok(DecayVerdict {
        monotone: violations == 0,
        epsilon_hat: eps,
        violations,
    })
}

/// Upper bound on `∫(u + v)` implied by the kinetics, for initial mass `m0`.
///
/// `None` when local self-limitation does not beat the nonlocal
/// cooperation, in which case no bound is available.
pub fn mass_ceiling(p: &Params, m0: f64) -> Option<f64> {
    let neg = |a: f64| signed_parts(a).1;
    let c3 = neg(p.a3).max(neg(p.b4)).max(0.5 * (neg(p.a4) + neg(p.b3)));
    let c4 = p.a1.min(p.b2) / p.omega_measure - c3;
    (c4 > 0.0).then(|| m0.max(p.a0.max(p.b0) / c4))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LyapunovKind {
    Weak,
    Asymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSpec {
    pub kind: LyapunovKind,
    pub delta: f64,
}

/// What to measure at each sample.
#[derive(Debug, Clone, Default)]
pub struct Probe {
    pub reference: Option<Equilibrium>,
    pub lyapunov: Option<LyapunovSpec>,
}

impl Probe {
    pub fn new(reference: Option<Equilibrium>, lyapunov: Option<LyapunovSpec>) -> Self {
        Self {
            reference,
            lyapunov,
        }
    }

    /// A Lyapunov value that cannot be evaluated, for instance because a
    /// density touched zero, is recorded as absent.
    pub fn sample(&self, s: &SimState) -> DiagRecord {
        let dists = self.reference.map(|eq| {
            (
                sq_dist(&s.u, eq.u),
                sq_dist(&s.v, eq.v),
                sq_dist(&s.w, eq.w),
            )
        });
        let ef = match (self.reference, self.lyapunov) {
            (Some(eq), Some(spec)) => match spec.kind {
                LyapunovKind::Weak => lyapunov_weak(s, &eq, spec.delta).ok(),
                LyapunovKind::Asymmetric => lyapunov_asym(s, &eq, spec.delta).ok(),
            },
            _ => None,
        };
        DiagRecord {
            t: s.t,
            mass_u: integrate(&s.u),
            mass_v: integrate(&s.v),
            linf_u: s.u.linf(),
            linf_v: s.v.linf(),
            linf_w: s.w.linf(),
            l2_dist_u: dists.map(|d| d.0),
            l2_dist_v: dists.map(|d| d.1),
            l2_dist_w: dists.map(|d| d.2),
            grad_w_sq: grad_sq_integral(&s.w),
            e: ef.map(|x| x.0),
            f: ef.map(|x| x.1),
        }
    }

    pub fn converged(&self, s: &SimState, tol: f64) -> bool {
        self.reference
            .is_some_and(|eq| detect_convergence(s, &eq, tol))
    }
}

/// Receives records as a run produces them.
pub trait DiagSink {
    fn record(&mut self, r: DiagRecord);
}

impl DiagSink for Vec<DiagRecord> {
    fn record(&mut self, r: DiagRecord) {
        self.push(r);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn coex() -> Equilibrium {
        Equilibrium {
            u: 0.6,
            v: 0.4,
            w: 1.0,
            kind: EquilibriumKind::Coexistence,
        }
    }

    fn semi() -> Equilibrium {
        Equilibrium {
            u: 0.0,
            v: 1.9,
            w: 1.9,
            kind: EquilibriumKind::SemiTrivial,
        }
    }

    fn grid() -> Grid {
        Grid::new_1d(32, 2.0).unwrap()
    }

    fn constant(u: f64, v: f64, w: f64) -> SimState {
        let g = grid();
        SimState::new(
            0.0,
            Field::constant(g, u),
            Field::constant(g, v),
            Field::constant(g, w),
        )
        .unwrap()
    }

    fn record(t: f64, e: f64, f: f64) -> DiagRecord {
        DiagRecord {
            t,
            mass_u: 0.0,
            mass_v: 0.0,
            linf_u: 0.0,
            linf_v: 0.0,
            linf_w: 0.0,
            l2_dist_u: None,
            l2_dist_v: None,
            l2_dist_w: None,
            grad_w_sq: 0.0,
            e: Some(e),
            f: Some(f),
        }
    }

    #[test]
    fn weak_zero_at_equilibrium() {
        let eq = coex();
        let (e, f) = lyapunov_weak(&constant(eq.u, eq.v, eq.w), &eq, 0.7).unwrap();
        assert_eq!((e, f), (0.0, 0.0));
    }

    #[test]
    fn weak_doubled_u() {
        let eq = coex();
        let (e, f) = lyapunov_weak(&constant(2.0 * eq.u, eq.v, eq.w), &eq, 0.7).unwrap();
        let want = eq.u * (1.0 - 2f64.ln()) * 2.0;
        assert!((e - want).abs() < 1e-14, "{e} vs {want}");
        assert!((f - eq.u * eq.u * 2.0).abs() < 1e-14);
    }

    #[test]
    fn weak_rejects_nonpositive() {
        let eq = coex();
        assert_eq!(
            lyapunov_weak(&constant(0.0, eq.v, eq.w), &eq, 1.0),
            Err(DiagError::NonpositiveDensity {
                species: "u",
                value: 0.0
            })
        );
        assert!(matches!(
            lyapunov_weak(&constant(1.0, 1.0, 1.0), &semi(), 1.0),
            Err(DiagError::WrongEquilibrium { .. })
        ));
        assert_eq!(
            lyapunov_weak(&constant(1.0, 1.0, 1.0), &eq, 0.0),
            Err(DiagError::InvalidDelta(0.0))
        );
    }

    #[test]
    fn asym_cases() {
        let eq = semi();
        assert_eq!(
            lyapunov_asym(&constant(0.0, eq.v, eq.w), &eq, 1.0).unwrap(),
            (0.0, 0.0)
        );
        let c = 0.3;
        let (e, f) = lyapunov_asym(&constant(c, eq.v, eq.w), &eq, 1.0).unwrap();
        assert!((e - c * 2.0).abs() < 1e-15);
        assert!((f - c * c * 2.0).abs() < 1e-15);
        assert!(matches!(
            lyapunov_asym(&constant(c, -0.0, eq.w), &eq, 1.0),
            Err(DiagError::NonpositiveDensity { species: "v", .. })
        ));
    }

    #[test]
    fn asym_matches_trapezoid_quadrature() {
        // Smooth profiles; the oracle integrates the same integrands with the
        // composite trapezoid rule on a much finer node set.
        let eq = semi();
        let delta = 0.8;
        let u = |x: f64| 0.2 + 0.1 * (PI * x).cos();
        let v = |x: f64| eq.v + 0.3 * (2.0 * PI * x).cos() + 0.1 * x * x;
        let w = |x: f64| eq.w + 0.2 * (PI * x).sin();
        let integrand = |x: f64| {
            let (uu, vv, ww) = (u(x), v(x), w(x));
            let e = uu + vv - eq.v - eq.v * (vv / eq.v).ln() + 0.5 * delta * (ww - eq.w).powi(2);
            let f = uu * uu + (vv - eq.v).powi(2) + (ww - eq.w).powi(2);
            (e, f)
        };
        let nodes = 20_000;
        let hh = 1.0 / nodes as f64;
        let (mut e_ref, mut f_ref) = (0.0, 0.0);
        for i in 0..=nodes {
            let wgt = if i == 0 || i == nodes { 0.5 } else { 1.0 };
            let (e, f) = integrand(i as f64 * hh);
            e_ref += wgt * e * hh;
            f_ref += wgt * f * hh;
        }

        let mut errs = Vec::new();
        for n in [32, 64] {
            let g = Grid::new_1d(n, 1.0).unwrap();
            let s = SimState::new(
                0.0,
                Field::from_fn(g, |[x, _]| u(x)),
                Field::from_fn(g, |[x, _]| v(x)),
                Field::from_fn(g, |[x, _]| w(x)),
            )
            .unwrap();
            let (e, f) = lyapunov_asym(&s, &eq, delta).unwrap();
            let h = 1.0 / n as f64;
            assert!((e - e_ref).abs() < h * h, "n {n}: E {e} vs {e_ref}");
            assert!((f - f_ref).abs() < h * h, "n {n}: F {f} vs {f_ref}");
            errs.push((e - e_ref).abs());
        }
        assert!(errs[0] / errs[1] > 3.0);
    }

    #[test]
    fn entropy_series_branch_is_continuous() {
        let g = Grid::new_1d(4, 1.0).unwrap();
        for r in [0.000999, 0.001001, -0.000999, -0.001001] {
            let s = 1.0 + r;
            let got = relative_entropy(&Field::constant(g, s), 1.0, "u").unwrap();
            let want = r - r.ln_1p();
            assert!((got - want).abs() < 1e-11 * want, "{r}: {got} vs {want}");
        }
    }

    proptest! {
        #[test]
        fn weak_nonnegative_and_f_is_sum(
            vals in proptest::collection::vec((1e-3f64..5.0, 1e-3f64..5.0, -3.0f64..3.0), 8),
            delta in 1e-3f64..10.0,
        ) {
            let g = Grid::new_1d(8, 1.3).unwrap();
            let u: Vec<f64> = vals.iter().map(|x| x.0).collect();
            let v: Vec<f64> = vals.iter().map(|x| x.1).collect();
            let w: Vec<f64> = vals.iter().map(|x| x.2).collect();
            let s = SimState::new(
                0.0,
                Field::from_values(g, u).unwrap(),
                Field::from_values(g, v).unwrap(),
                Field::from_values(g, w).unwrap(),
            ).unwrap();
            let eq = coex();
            let (e, f) = lyapunov_weak(&s, &eq, delta).unwrap();
            prop_assert!(e >= 0.0 && f >= 0.0);
            let r = Probe::new(Some(eq), Some(LyapunovSpec { kind: LyapunovKind::Weak, delta })).sample(&s);
            let sum = r.l2_dist_u.unwrap() + r.l2_dist_v.unwrap() + r.l2_dist_w.unwrap();
            prop_assert!((r.f.unwrap() - sum).abs() <= 1e-13 * sum.max(1.0));
            prop_assert_eq!(r.e.unwrap(), e);
        }

        #[test]
        fn weak_zero_only_at_equilibrium(cell in 0usize..8, rel in prop_oneof![-0.5f64..-1e-6, 1e-6f64..0.5], which in 0usize..3) {
            let eq = coex();
            let mut s = constant(eq.u, eq.v, eq.w);
            let target = match which { 0 => &mut s.u, 1 => &mut s.v, _ => &mut s.w };
            target.values_mut()[cell] *= 1.0 + rel;
            let (e, _) = lyapunov_weak(&s, &eq, 1.0).unwrap();
            prop_assert!(e > 0.0);
        }
    }

    #[test]
    fn decay_exponential_oracle() {
        let series: Vec<_> = (0..=500)
            .map(|i| {
                let t = i as f64 * 0.01;
                record(t, (-t).exp(), (-t).exp())
            })
            .collect();
        let v = check_decay(&series).unwrap();
        assert!(v.monotone);
        assert_eq!(v.violations, 0);
        let eps = v.epsilon_hat.unwrap();
        assert!((eps - 1.0).abs() < 0.01, "{eps}");
    }

    #[test]
    fn decay_degenerate_and_increasing() {
        let flat: Vec<_> = (0..5).map(|i| record(i as f64, 0.0, 0.0)).collect();
        let v = check_decay(&flat).unwrap();
        assert!(v.monotone);
        assert_eq!(v.epsilon_hat, None);

        let up: Vec<_> = (0..5).map(|i| record(i as f64, i as f64, 1.0)).collect();
        let v = check_decay(&up).unwrap();
        assert!(!v.monotone);
        assert_eq!(v.violations, 4);
        assert_eq!(v.epsilon_hat, Some(-1.0));
    }

    #[test]
    fn decay_tolerance_absorbs_roundoff() {
        let s = vec![
            record(0.0, 2.0, 1.0),
            record(1.0, 2.0 + 1e-9, 1.0),
            record(2.0, 1.0, 1.0),
        ];
        assert!(check_decay(&s).unwrap().monotone);
    }

    #[test]
    fn decay_input_errors() {
        let two = vec![record(0.0, 1.0, 1.0), record(1.0, 1.0, 1.0)];
        assert_eq!(check_decay(&two), Err(DiagError::InsufficientData(2)));
        let bad = vec![
            record(0.0, 1.0, 1.0),
            record(1.0, 1.0, 1.0),
            record(1.0, 1.0, 1.0),
        ];
        assert_eq!(check_decay(&bad), Err(DiagError::NonIncreasingTime(2)));
        let mut missing = vec![record(0.0, 1.0, 1.0); 3];
        missing[1].t = 1.0;
        missing[2].t = 2.0;
        missing[1].e = None;
        assert_eq!(check_decay(&missing), Err(DiagError::MissingLyapunov(1)));
    }

    #[test]
    fn convergence_detection() {
        let eq = coex();
        let tol = 1e-3;
        assert!(detect_convergence(&constant(eq.u, eq.v, eq.w), &eq, tol));
        let mut s = constant(eq.u, eq.v, eq.w);
        s.u.values_mut()[5] += 2.0 * tol;
        assert!(!detect_convergence(&s, &eq, tol));
    }

    #[test]
    fn mass_ceiling_cases() {
        let p = Params {
            a1: 2.0,
            b2: 3.0,
            a3: -0.5,
            b4: 0.2,
            a4: -0.4,
            b3: -0.8,
            a0: 1.0,
            b0: 3.0,
            omega_measure: 1.0,
            ..Params::default()
        };
        // C3 = max(0.5, 0, 0.6) = 0.6, C4 = 2 - 0.6 = 1.4
        let c = mass_ceiling(&p, 0.1).unwrap();
        assert!((c - 3.0 / 1.4).abs() < 1e-15);
        assert_eq!(mass_ceiling(&p, 10.0), Some(10.0));
        let p = Params { a3: -3.0, ..p };
        assert_eq!(mass_ceiling(&p, 1.0), None);
    }

    #[test]
    fn probe_without_reference() {
        let s = constant(1.0, 2.0, 3.0);
        let r = Probe::default().sample(&s);
        assert_eq!(r.mass_u, 2.0);
        assert_eq!(r.mass_v, 4.0);
        assert_eq!(r.linf_w, 3.0);
        assert_eq!(r.grad_w_sq, 0.0);
        assert!(r.l2_dist_u.is_none() && r.e.is_none());
        assert!(!Probe::default().converged(&s, 1.0));
    }
}
