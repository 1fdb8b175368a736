//! First-order IMEX time stepping for the coupled system.
//!
//! Chemotaxis, reaction and the nonlocal integrals are advanced explicitly
//! from the current time level; diffusion and signal decay are treated by
//! backward Euler, one decoupled linear solve per component.

mod solve;

pub use solve::{implicit_helmholtz_solve, solve_tridiagonal, SolverDiverged, CG_RTOL};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::Equilibrium;
use crate::diagnostics::{DiagSink, Probe};
use crate::grid::{chemo_divergence, integrate, max_face_gradient, Field, Grid};
use crate::params::Params;

/// Cells of `u` or `v` below `-TOL_NEG` count as a genuine undershoot.
pub const TOL_NEG: f64 = 1e-10;

/// Consecutive accepted steps before the step size is allowed to grow.
const GROWTH_AFTER: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("u, v and w must share one grid")]
    GridMismatch,
    #[error("{0} has a non-finite value")]
    NonFinite(&'static str),
    #[error("{name} has value {min} below the negativity tolerance")]
    Negative { name: &'static str, min: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub u: Field,
    pub v: Field,
    pub w: Field,
}

impl SimState {
    pub fn new(t: f64, u: Field, v: Field, w: Field) -> Result<Self, StateError> {
        if u.grid() != v.grid() || u.grid() != w.grid() {
            return Err(StateError::GridMismatch);
        }
        for (name, f) in [("u", &u), ("v", &v), ("w", &w)] {
            if !f.is_finite() {
                return Err(StateError::NonFinite(name));
            }
        }
        for (name, f) in [("u", &u), ("v", &v)] {
            let min = f.min();
            if min < -TOL_NEG {
                return Err(StateError::Negative { name, min });
            }
        }
        Ok(Self { t, u, v, w })
    }

    /// Homogeneous state equal to `eq` everywhere, at `t = 0`.
    pub fn from_equilibrium(grid: Grid, eq: &Equilibrium) -> Self {
        Self {
            t: 0.0,
            u: Field::constant(grid, eq.u),
            v: Field::constant(grid, eq.v),
            w: Field::constant(grid, eq.w),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn linf(&self) -> f64 {
        self.u.linf().max(self.v.linf()).max(self.w.linf())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Largest step the run will take.
    pub dt_init: f64,
    pub t_end: f64,
    /// The run gives up once rejections push the step below this.
    pub dt_min: f64,
    /// Growth factor is `1 / safety` after a streak of clean steps.
    pub safety: f64,
    /// L∞ bound on any component beyond which the run is declared blown up.
    pub blowup_threshold: f64,
    /// Diagnostic cadence in accepted steps.
    pub record_every: usize,
    /// L∞ distance to the reference equilibrium that ends the run as converged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conv_tol: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt_init: 1e-2,
            t_end: 10.0,
            dt_min: 1e-10,
            safety: 0.8,
            blowup_threshold: 1e8,
            record_every: 1,
            conv_tol: None,
        }
    }
}

impl SimConfig {
    /// Returns the offending field name and reason.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        let positive = [
            ("dt_init", self.dt_init),
            ("t_end", self.t_end),
            ("dt_min", self.dt_min),
            ("blowup_threshold", self.blowup_threshold),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err((name, format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.dt_min < self.dt_init) {
            return Err(("dt_min", "must be smaller than dt_init".into()));
        }
        if !(self.dt_init <= self.t_end) {
            return Err(("dt_init", "must not exceed t_end".into()));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(("safety", format!("must lie in (0, 1], got {}", self.safety)));
        }
        if self.record_every == 0 {
            return Err(("record_every", "must be at least 1".into()));
        }
        if let Some(tol) = self.conv_tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err((
                    "conv_tol",
                    format!("must be positive and finite, got {tol}"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("density dropped to {min:e}")]
    NegativityBreach { min: f64 },
    #[error("L-infinity norm {linf:e} exceeded the blow-up threshold")]
    BlowUpGuard { linf: f64 },
    #[error(transparent)]
    SolverDiverged(#[from] SolverDiverged),
}

/// Local kinetics `u (a0 - a1 u - a2 v - a3 ∫u - a4 ∫v)` and its `v`
/// counterpart, with both integrals taken once from the current state.
pub fn reaction_rhs(state: &SimState, p: &Params) -> (Field, Field) {
    let iu = integrate(&state.u);
    let iv = integrate(&state.v);
    let a_shift = p.a0 - p.a3 * iu - p.a4 * iv;
    let b_shift = p.b0 - p.b3 * iu - p.b4 * iv;
    let ru = state
        .u
        .zip_map(&state.v, |u, v| u * (a_shift - p.a1 * u - p.a2 * v));
    let rv = state
        .u
        .zip_map(&state.v, |u, v| v * (b_shift - p.b1 * u - p.b2 * v));
    (ru, rv)
}

/// One IMEX step of size `dt`.
pub fn step(
    state: &SimState,
    p: &Params,
    dt: f64,
    blowup_threshold: f64,
) -> Result<SimState, StepError> {
    let (ru, rv) = reaction_rhs(state, p);
    let div_u = chemo_divergence(&state.u, &state.w);
    let div_v = chemo_divergence(&state.v, &state.w);

    let explicit = |s: &Field, div: &Field, r: &Field, chi: f64| {
        let vals = s
            .values()
            .iter()
            .zip(div.values())
            .zip(r.values())
            .map(|((si, di), ri)| si + dt * (ri - chi * di))
            .collect();
        Field::from_raw(*s.grid(), vals)
    };
    let u_expl = explicit(&state.u, &div_u, &ru, p.chi1);
    let v_expl = explicit(&state.v, &div_v, &rv, p.chi2);
    let w_expl = Field::from_raw(
        *state.w.grid(),
        state
            .w
            .values()
            .iter()
            .zip(state.u.values().iter().zip(state.v.values()))
            .map(|(w, (u, v))| w + dt * (p.k * u + p.l * v))
            .collect(),
    );

    let u = implicit_helmholtz_solve(&u_expl, p.d1, 0.0, dt)?;
    let v = implicit_helmholtz_solve(&v_expl, p.d2, 0.0, dt)?;
    let w = implicit_helmholtz_solve(&w_expl, p.d3, p.lambda, dt)?;

    let next = SimState {
        t: state.t + dt,
        u,
        v,
        w,
    };
    let linf = next.linf();
    if !(linf <= blowup_threshold) {
        return Err(StepError::BlowUpGuard { linf });
    }
    let min = next.u.min().min(next.v.min());
    if min < -TOL_NEG {
        return Err(StepError::NegativityBreach { min });
    }
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Converged,
    ReachedTEnd,
    BlowUp,
    StepUnderflow,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub state: SimState,
    pub outcome: Outcome,
    pub accepted: usize,
    pub rejected: usize,
    /// First step size tried, from [`initial_dt`].
    pub dt_start: f64,
    pub last_dt: f64,
}

/// First step size: the configured `dt_init`, further limited by an
/// advective guess `0.1 h / max χ / (1 + max|∇w0|)`.
pub fn initial_dt(state: &SimState, p: &Params, cfg: &SimConfig) -> f64 {
    let chi = p.chi1.max(p.chi2);
    let advective = 0.1 * state.grid().min_spacing() / chi / (1.0 + max_face_gradient(&state.w));
    cfg.dt_init.min(advective)
}

/// Integrates from `state0` until `t_end`, convergence to the probe's
/// reference equilibrium, blow-up, or step underflow.
///
/// Steps that produce negative densities or stall the linear solver are
/// rejected and retried with half the step size. After ten consecutive
/// accepted steps the step grows by `1 / safety`, up to `dt_init`. The
/// first step comes from [`initial_dt`]. A record is emitted at the start, every `record_every`
/// accepted steps, and at the end.
pub fn run(
    state0: &SimState,
    p: &Params,
    cfg: &SimConfig,
    probe: &Probe,
    sink: &mut dyn DiagSink,
) -> RunSummary {
    let dt_start = initial_dt(state0, p, cfg);
    let mut dt = dt_start;
    let mut state = state0.clone();
    let (mut accepted, mut rejected, mut streak) = (0usize, 0usize, 0usize);
    let converged = |s: &SimState| match cfg.conv_tol {
        Some(tol) => probe.converged(s, tol),
        None => false,
    };

    sink.record(probe.sample(&state));
    let mut recorded_last = true;
    let outcome = if converged(&state) {
        Outcome::Converged
    } else {
        loop {
            let remaining = cfg.t_end - state.t;
            if remaining <= 0.0 {
                break Outcome::ReachedTEnd;
            }
            let last = dt >= remaining;
            let h = if last { remaining } else { dt };
            match step(&state, p, h, cfg.blowup_threshold) {
                Ok(mut next) => {
                    if last {
                        next.t = cfg.t_end;
                    }
                    state = next;
                    accepted += 1;
                    streak += 1;
                    recorded_last = accepted % cfg.record_every == 0;
                    if recorded_last {
                        sink.record(probe.sample(&state));
                    }
                    if converged(&state) {
                        break Outcome::Converged;
                    }
                    if streak >= GROWTH_AFTER {
                        dt = (dt / cfg.safety).min(cfg.dt_init);
                        streak = 0;
                    }
                }
                Err(StepError::BlowUpGuard { .. }) => break Outcome::BlowUp,
                Err(StepError::NegativityBreach { .. } | StepError::SolverDiverged(_)) => {
                    rejected += 1;
                    streak = 0;
                    dt *= 0.5;
                    if dt < cfg.dt_min {
                        break Outcome::StepUnderflow;
                    }
                }
            }
        }
    };
    if !recorded_last {
        sink.record(probe.sample(&state));
    }

    RunSummary {
        state,
        outcome,
        accepted,
        rejected,
        dt_start,
        last_dt: dt,
    }
}
