use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use super::output::{write_series_csv, write_snapshot};
use super::Scenario;
use crate::analysis::{
    check_boundedness, check_stability, classify_regime, coexistence_equilibrium,
    semitrivial_equilibrium, BoundednessOptions, Equilibrium, EquilibriumKind, HypothesisReport,
    Regime, StabilityCase, StabilityCheck,
};
use crate::diagnostics::{
    check_decay, mass_ceiling, DecayVerdict, DiagRecord, LyapunovKind, LyapunovSpec, Probe,
};
use crate::integrator::{run, Outcome, SimState};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Process exit status of a scenario run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitStatus {
    Success,
    Validation,
    BlowUp,
    StepUnderflow,
    HypothesisFailure,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            Self::Success => 0,
            Self::Validation => 2,
            Self::BlowUp => 3,
            Self::StepUnderflow => 4,
            Self::HypothesisFailure => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Analyze,
    Simulate,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub outcome: Outcome,
    pub t_final: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub dt_start: f64,
    pub records: usize,
    /// L∞ distances of `(u, v, w)` to the reference equilibrium.
    pub final_linf_dist: Option<[f64; 3]>,
    pub mass_u_initial: f64,
    pub mass_u_final: f64,
    pub mass_v_final: f64,
    /// Largest sampled `∫(u + v)`.
    pub mass_max: f64,
    pub mass_ceiling: Option<f64>,
    pub lyapunov: Option<LyapunovSpec>,
    /// Decay check over the records after the first 5%.
    pub decay: Option<DecayVerdict>,
    pub decay_error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub name: Option<String>,
    pub mode: Mode,
    pub regime: Option<Regime>,
    pub coexistence: Option<Equilibrium>,
    pub semi_trivial: Option<Equilibrium>,
    pub reference: Option<Equilibrium>,
    pub boundedness: Option<HypothesisReport>,
    pub stability: Option<StabilityCheck>,
    pub stability_error: Option<String>,
    /// Every requested hypothesis check passed.
    pub hypotheses_passed: bool,
    pub simulation: Option<SimulationReport>,
    pub status: ExitStatus,
    pub exit_code: i32,
    #[serde(skip)]
    pub series: Vec<DiagRecord>,
    #[serde(skip)]
    pub final_state: Option<SimState>,
}

fn write_with<F>(path: PathBuf, f: F) -> Result<(), RunError>
where
    F: FnOnce(&Path) -> std::io::Result<()>,
{
    f(&path).map_err(|source| RunError::Io { path, source })
}

/// Runs the requested analyses and, in [`Mode::Simulate`], the simulation.
///
/// With `out` set, writes `report.json` and, after a simulation,
/// `series.csv`, `snapshot_initial.txt` and `snapshot_final.txt`.
pub fn run_scenario(s: &Scenario, mode: Mode, out: Option<&Path>) -> Result<Report, RunError> {
    if let Some(dir) = out {
        write_with(dir.to_path_buf(), |d| fs::create_dir_all(d))?;
    }
    let p = &s.params;
    let grid = s.grid();
    let req = &s.analysis;

    let boundedness = req.boundedness.map(|b| {
        let opts = BoundednessOptions {
            dim: b.dim.unwrap_or(grid.dim()),
            p_exp: b.p_exp,
            c_p: b.c_p,
        };
        check_boundedness(p, &opts)
    });
    let (boundedness, mut stability_error) = match boundedness {
        Some(Ok(r)) => (Some(r), None),
        Some(Err(e)) => (None, Some(format!("boundedness: {e}"))),
        None => (None, None),
    };
    let bounded_ok = req.boundedness.is_none() || boundedness.as_ref().is_some_and(|r| r.overall);

    let stability = match req.stability.map(|st| check_stability(p, st.case)) {
        Some(Ok(c)) => Some(c),
        Some(Err(e)) => {
            stability_error = Some(e.to_string());
            None
        }
        None => None,
    };
    let stable_ok = req.stability.is_none()
        || stability
            .as_ref()
            .is_some_and(|c| c.report.overall && c.certificate.is_some());
    let hypotheses_passed = bounded_ok && stable_ok;

    let reference = s.reference_equilibrium();
    let mut report = Report {
        name: s.name.clone(),
        mode,
        regime: req.regime.then(|| classify_regime(p)),
        coexistence: coexistence_equilibrium(p).ok(),
        semi_trivial: semitrivial_equilibrium(p).ok(),
        reference,
        boundedness,
        stability,
        stability_error,
        hypotheses_passed,
        simulation: None,
        status: ExitStatus::Success,
        exit_code: 0,
        series: Vec::new(),
        final_state: None,
    };

    if s.require_certificate && !hypotheses_passed {
        report.status = ExitStatus::HypothesisFailure;
    } else if mode == Mode::Simulate {
        let lyapunov = lyapunov_spec(report.stability.as_ref(), reference);
        let probe = Probe::new(reference, lyapunov);
        let state0 = s.initial_state().expect("validated scenario");
        let mut series: Vec<DiagRecord> = Vec::new();
        let summary = run(&state0, p, &s.sim, &probe, &mut series);
        let end = &summary.state;

        let (decay, decay_error) = if lyapunov.is_some() {
            match check_decay(&series[series.len() / 20..]) {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e.to_string())),
            }
        } else {
            (None, None)
        };
        let first = &series[0];
        report.simulation = Some(SimulationReport {
            outcome: summary.outcome,
            t_final: end.t,
            steps_accepted: summary.accepted,
            steps_rejected: summary.rejected,
            dt_start: summary.dt_start,
            records: series.len(),
            final_linf_dist: reference.map(|eq| {
                [
                    end.u.linf_dist_to(eq.u),
                    end.v.linf_dist_to(eq.v),
                    end.w.linf_dist_to(eq.w),
                ]
            }),
            mass_u_initial: first.mass_u,
            mass_u_final: series.last().map_or(first.mass_u, |r| r.mass_u),
            mass_v_final: series.last().map_or(first.mass_v, |r| r.mass_v),
            mass_max: series
                .iter()
                .map(|r| r.mass_u + r.mass_v)
                .fold(f64::NEG_INFINITY, f64::max),
            mass_ceiling: mass_ceiling(p, first.mass_u + first.mass_v),
            lyapunov,
            decay,
            decay_error,
        });
        report.status = match summary.outcome {
            Outcome::Converged | Outcome::ReachedTEnd => ExitStatus::Success,
            Outcome::BlowUp => ExitStatus::BlowUp,
            Outcome::StepUnderflow => ExitStatus::StepUnderflow,
        };

        if let Some(dir) = out {
            write_with(dir.join("series.csv"), |path| {
                write_series_csv(path, &series)
            })?;
            write_with(dir.join("snapshot_initial.txt"), |path| {
                write_snapshot(path, &state0)
            })?;
            write_with(dir.join("snapshot_final.txt"), |path| {
                write_snapshot(path, end)
            })?;
        }
        report.series = series;
        report.final_state = Some(summary.state);
    }
    report.exit_code = report.status.code();

    if let Some(dir) = out {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        write_with(dir.join("report.json"), |path| fs::write(path, json + "\n"))?;
    }
    Ok(report)
}

/// Lyapunov functional matching the certified case, provided the reference
/// is the equilibrium that case is about.
fn lyapunov_spec(
    check: Option<&StabilityCheck>,
    reference: Option<Equilibrium>,
) -> Option<LyapunovSpec> {
    let check = check?;
    let cert = check.certificate.as_ref()?;
    let (kind, eq_kind) = match check.case {
        StabilityCase::Weak => (LyapunovKind::Weak, EquilibriumKind::Coexistence),
        StabilityCase::Asymmetric => (LyapunovKind::Asymmetric, EquilibriumKind::SemiTrivial),
    };
    (reference?.kind == eq_kind).then_some(LyapunovSpec {
        kind,
        delta: cert.delta_chosen,
    })
}
