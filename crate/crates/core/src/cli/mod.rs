//! Scenario files, report generation, parameter sweeps and built-in presets.

mod output;
mod presets;
mod run;
mod sweep;

pub use output::{write_series_csv, write_snapshot};
pub use presets::{preset, preset_document, PRESETS};
pub use run::{run_scenario, ExitStatus, Mode, Report, RunError, SimulationReport};
pub use sweep::{parse_sweep, run_sweep, SweepAxis, SweepRow, SweepSpec, SweepTable};

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::analysis::{
    classify_regime, coexistence_equilibrium, semitrivial_equilibrium, Equilibrium, RegimeKind,
    StabilityCase,
};
use crate::grid::{Field, Grid};
use crate::integrator::{SimConfig, SimState};
use crate::params::Params;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("malformed scenario at `{path}`: {reason}")]
    Parse { path: String, reason: String },
    #[error("invalid `{path}`: {reason}")]
    Validation { path: String, reason: String },
}

impl ScenarioError {
    fn invalid(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Validation {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub fn path(&self) -> &str {
        match self {
            Self::Parse { path, .. } | Self::Validation { path, .. } => path,
        }
    }
}

fn one_or_many<'de, D, T>(d: D) -> Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

/// Grid description; `n` and `L` may be scalars, which apply to every axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    #[serde(deserialize_with = "one_or_many")]
    pub n: Vec<usize>,
    #[serde(rename = "L", deserialize_with = "one_or_many")]
    pub len: Vec<f64>,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid, ScenarioError> {
        let expand = |len: usize| if len == 1 { self.dim } else { len };
        if !(1..=2).contains(&self.dim) {
            return Err(ScenarioError::invalid("grid.dim", "must be 1 or 2"));
        }
        if expand(self.n.len()) != self.dim {
            return Err(ScenarioError::invalid(
                "grid.n",
                "one entry per axis required",
            ));
        }
        if expand(self.len.len()) != self.dim {
            return Err(ScenarioError::invalid(
                "grid.L",
                "one entry per axis required",
            ));
        }
        let n: Vec<usize> = (0..self.dim)
            .map(|i| self.n[i.min(self.n.len() - 1)])
            .collect();
        let len: Vec<f64> = (0..self.dim)
            .map(|i| self.len[i.min(self.len.len() - 1)])
            .collect();
        Grid::new(&n, &len).map_err(|e| ScenarioError::invalid("grid", e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Triple {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

fn default_modes() -> Vec<usize> {
    vec![1]
}

/// Initial data, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Constant(Triple),
    /// `base + amplitude · Π cos(m_i π x_i / L_i)`, or with `relative`
    /// `base · (1 + amplitude · Π cos(...))`. `base` defaults to the
    /// reference equilibrium.
    Perturbed {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base: Option<Triple>,
        amplitude: f64,
        #[serde(default = "default_modes")]
        modes: Vec<usize>,
        #[serde(default)]
        relative: bool,
    },
    /// Row-major cell values.
    Arrays {
        u: Vec<f64>,
        v: Vec<f64>,
        w: Vec<f64>,
    },
    /// Cellwise uniform noise in `[-amplitude, amplitude]` around `base`,
    /// drawn from the scenario seed.
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base: Option<Triple>,
        amplitude: f64,
        #[serde(default)]
        relative: bool,
    },
}

impl Default for InitialData {
    fn default() -> Self {
        Self::Perturbed {
            base: None,
            amplitude: 0.1,
            modes: default_modes(),
            relative: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundednessRequest {
    /// Defaults to the grid dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_exp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityRequest {
    pub case: StabilityCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisRequest {
    #[serde(default = "yes")]
    pub regime: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundedness: Option<BoundednessRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilityRequest>,
}

fn yes() -> bool {
    true
}

impl Default for AnalysisRequest {
    fn default() -> Self {
        Self {
            regime: true,
            boundedness: Some(BoundednessRequest::default()),
            stability: None,
        }
    }
}

/// Which homogeneous state distances and Lyapunov values refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceChoice {
    /// Semi-trivial in the strongly asymmetric regime, otherwise the
    /// coexistence state when it is positive.
    #[default]
    Auto,
    Coexistence,
    SemiTrivial,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub params: Params,
    pub grid: GridSpec,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default)]
    pub analysis: AnalysisRequest,
    #[serde(default)]
    pub reference: ReferenceChoice,
    /// Skip the simulation and fail when a requested hypothesis check does
    /// not pass.
    #[serde(default)]
    pub require_certificate: bool,
    #[serde(default)]
    pub seed: u64,
}

fn from_value<T: serde::de::DeserializeOwned>(v: Value, prefix: &str) -> Result<T, ScenarioError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix, inner.as_str()) {
            (p, ".") => p.to_string(),
            ("", i) => i.to_string(),
            (p, i) => format!("{p}.{i}"),
        };
        ScenarioError::Parse {
            path,
            reason: e.into_inner().to_string(),
        }
    })
}

/// Parses and validates a scenario document.
///
/// `params.omega_measure` may be omitted, in which case it is taken from the
/// grid.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        path: String::new(),
        reason: e.to_string(),
    })?;
    scenario_from_value(doc)
}

pub fn scenario_from_value(mut doc: Value) -> Result<Scenario, ScenarioError> {
    let Some(obj) = doc.as_object_mut() else {
        return Err(ScenarioError::Parse {
            path: String::new(),
            reason: "expected a JSON object".into(),
        });
    };
    let grid_value = obj
        .get("grid")
        .cloned()
        .ok_or_else(|| ScenarioError::Parse {
            path: "grid".into(),
            reason: "missing field".into(),
        })?;
    let grid: GridSpec = from_value(grid_value, "grid")?;
    let measure = grid.build()?.measure();
    if let Some(Value::Object(params)) = obj.get_mut("params") {
        params
            .entry("omega_measure")
            .or_insert_with(|| measure.into());
    }
    let s: Scenario = from_value(doc, "")?;
    s.validate()?;
    Ok(s)
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.params
            .validate()
            .map_err(|e| ScenarioError::invalid(format!("params.{}", e.field), e.reason))?;
        let grid = self.grid.build()?;
        let m = self.params.omega_measure;
        if (grid.measure() - m).abs() > 1e-12 * m.max(1.0) {
            return Err(ScenarioError::invalid(
                "params.omega_measure",
                format!("{m} differs from the grid measure {}", grid.measure()),
            ));
        }
        self.sim
            .validate()
            .map_err(|(field, reason)| ScenarioError::invalid(format!("sim.{field}"), reason))?;
        if let Some(b) = self.analysis.boundedness {
            if b.dim == Some(0) {
                return Err(ScenarioError::invalid(
                    "analysis.boundedness.dim",
                    "must be at least 1",
                ));
            }
        }
        self.initial_state().map(|_| ())
    }

    pub fn grid(&self) -> Grid {
        self.grid.build().expect("validated grid")
    }

    /// The equilibrium chosen by [`Scenario::reference`], if it exists.
    pub fn reference_equilibrium(&self) -> Option<Equilibrium> {
        let p = &self.params;
        match self.reference {
            ReferenceChoice::None => None,
            ReferenceChoice::Coexistence => coexistence_equilibrium(p).ok(),
            ReferenceChoice::SemiTrivial => semitrivial_equilibrium(p).ok(),
            ReferenceChoice::Auto => match classify_regime(p).kind {
                RegimeKind::StronglyAsymmetric => semitrivial_equilibrium(p).ok(),
                _ => coexistence_equilibrium(p).ok(),
            },
        }
    }

    fn base(&self, base: Option<Triple>) -> Result<Triple, ScenarioError> {
        match (base, self.reference_equilibrium()) {
            (Some(b), _) => Ok(b),
            (None, Some(eq)) => Ok(Triple {
                u: eq.u,
                v: eq.v,
                w: eq.w,
            }),
            (None, None) => Err(ScenarioError::invalid(
                "initial.base",
                "required when no reference equilibrium exists",
            )),
        }
    }

    /// Builds the initial fields and checks them.
    pub fn initial_state(&self) -> Result<SimState, ScenarioError> {
        let grid = self.grid.build()?;
        let shape = |b: f64, amp: f64, relative: bool, xi: f64| {
            if relative {
                b * (1.0 + amp * xi)
            } else {
                b + amp * xi
            }
        };
        let (u, v, w) = match &self.initial {
            InitialData::Constant(c) => (
                Field::constant(grid, c.u),
                Field::constant(grid, c.v),
                Field::constant(grid, c.w),
            ),
            InitialData::Perturbed {
                base,
                amplitude,
                modes,
                relative,
            } => {
                let b = self.base(*base)?;
                if modes.is_empty() || modes.len() > grid.dim() {
                    return Err(ScenarioError::invalid(
                        "initial.modes",
                        "give one mode per axis, or one for all",
                    ));
                }
                let mode = |axis: usize| modes[axis.min(modes.len() - 1)] as f64;
                let profile = move |x: [f64; 2]| {
                    (0..grid.dim())
                        .map(|a| (mode(a) * PI * x[a] / grid.length(a)).cos())
                        .product::<f64>()
                };
                let make =
                    |c: f64| Field::from_fn(grid, |x| shape(c, *amplitude, *relative, profile(x)));
                (make(b.u), make(b.v), make(b.w))
            }
            InitialData::Arrays { u, v, w } => {
                let field = |name: &str, vals: &Vec<f64>| {
                    Field::from_values(grid, vals.clone()).map_err(|e| {
                        ScenarioError::invalid(format!("initial.{name}"), e.to_string())
                    })
                };
                (field("u", u)?, field("v", v)?, field("w", w)?)
            }
            InitialData::Random {
                base,
                amplitude,
                relative,
            } => {
                let b = self.base(*base)?;
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut make = |c: f64| {
                    let vals = (0..grid.cell_count())
                        .map(|_| shape(c, *amplitude, *relative, rng.gen_range(-1.0..=1.0)))
                        .collect();
                    Field::from_values(grid, vals).expect("finite samples")
                };
                let u = make(b.u);
                let v = make(b.v);
                let w = make(b.w);
                (u, v, w)
            }
        };
        for (name, f) in [("u", &u), ("v", &v), ("w", &w)] {
            if !f.is_finite() {
                return Err(ScenarioError::invalid(
                    format!("initial.{name}"),
                    "non-finite value",
                ));
            }
            if f.min() < 0.0 {
                return Err(ScenarioError::invalid(
                    format!("initial.{name}"),
                    format!("negative value {}", f.min()),
                ));
            }
        }
        Ok(SimState::new(0.0, u, v, w).expect("checked fields"))
    }
}
