//! Scenario files (JSON, schema version 1), validation and the built-in experiments.
//!
//! A [`Scenario`] is plain data and round-trips through JSON unchanged.
//! [`Scenario::prepare`] checks it and produces a [`PreparedScenario`]. That step checks
//! rigidity, selects the initial bounds and builds the closed-loop [`Plant`].
//! Agent indices are 0-based throughout.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{ControllerConfig, ControllerVariant, ConventionalParams};
use crate::error::FormationError;
use crate::performance::{
    connectivity_distance, omega_i_check, safety_distance, EdgeGeometry, EdgeSpec,
    PerformanceFunction, RigidityMarginCheck, PERMISSIVE_VARTHETA,
};
use crate::rigidity::{
    is_infinitesimally_rigid, is_minimally_rigid, rigid_rank, Framework, RigidGraph,
    DEFAULT_RANK_TOL,
};
use crate::signal::{DisturbanceSignal, SinusoidTerm, VelocityCommand};
use crate::simulation::{simulate, Plant, SimConfig, SimulationTrace, DEFAULT_SHAPE_TOL};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario `{name}`: {message}")]
    Validation { name: String, message: String },
    #[error("unknown built-in scenario `{0}`")]
    UnknownBuiltin(String),
}

/// A value given once for every edge (or agent), or individually.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerItem {
    Uniform(f64),
    Each(Vec<f64>),
}

impl PerItem {
    pub fn expand(&self, count: usize, what: &str) -> Result<Vec<f64>, String> {
        match self {
            PerItem::Uniform(x) => Ok(vec![*x; count]),
            PerItem::Each(v) if v.len() == count => Ok(v.clone()),
            PerItem::Each(v) => Err(format!("{what}: expected {count} values, got {}", v.len())),
        }
    }
}

impl From<f64> for PerItem {
    fn from(x: f64) -> Self {
        PerItem::Uniform(x)
    }
}

/// The target formation: desired edge lengths, a realization, or both.
/// A realization is needed for shape classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DesiredShape {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Radii {
    /// Geometric radius `r_si` per agent.
    pub safety: PerItem,
    /// Sensing radius `r_ci` per agent.
    pub sensing: PerItem,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSelection {
    pub mu: f64,
    pub mu_bar: PerItem,
    pub mu_underbar: PerItem,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerformanceParams {
    #[serde(default = "unit")]
    pub rho0: PerItem,
    pub rho_inf: PerItem,
    pub decay: PerItem,
}

fn unit() -> PerItem {
    PerItem::Uniform(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConventionalSpec {
    pub k: f64,
    pub epsilon: f64,
    pub theta: f64,
    pub w: PerItem,
    #[serde(default)]
    pub dhat0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSpec {
    pub variant: ControllerVariant,
    pub gains: PerItem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leader: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<VelocityCommand>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conventional: Option<ConventionalSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checks {
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
    /// Enforced rigidity margin; when absent the margin is reported only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vartheta_bar: Option<f64>,
    #[serde(default = "default_shape_tol")]
    pub shape_tol: f64,
}

fn default_rank_tol() -> f64 {
    DEFAULT_RANK_TOL
}

fn default_shape_tol() -> f64 {
    DEFAULT_SHAPE_TOL
}

impl Default for Checks {
    fn default() -> Self {
        Self {
            rank_tol: DEFAULT_RANK_TOL,
            vartheta_bar: None,
            shape_tol: DEFAULT_SHAPE_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub dimension: usize,
    pub edges: Vec<[usize; 2]>,
    pub desired: DesiredShape,
    pub initial_positions: Vec<Vec<f64>>,
    /// Uniform perturbation of every initial coordinate in `[-jitter, jitter]`,
    /// drawn from `sim.seed` (0 when unset).
    #[serde(default, skip_serializing_if = "is_zero")]
    pub initial_jitter: f64,
    pub radii: Radii,
    pub bounds: BoundSelection,
    pub performance: PerformanceParams,
    pub controller: ControllerSpec,
    #[serde(default, skip_serializing_if = "DisturbanceSignal::is_zero")]
    pub disturbance: DisturbanceSignal,
    pub sim: SimConfig,
    #[serde(default)]
    pub checks: Checks,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// Command-line style adjustments applied before validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub duration: Option<f64>,
    pub variant: Option<ControllerVariant>,
    pub disturbance_scale: Option<f64>,
    pub seed: Option<u64>,
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct PreparedScenario {
    pub scenario: Scenario,
    pub desired_distances: Vec<f64>,
    pub desired: Option<Framework>,
    pub initial: Framework,
    pub plant: Plant,
    pub margin: RigidityMarginCheck,
}

impl PreparedScenario {
    pub fn name(&self) -> &str {
        &self.scenario.name
    }

    pub fn specs(&self) -> &[EdgeSpec] {
        self.plant.specs()
    }

    pub fn run(&self) -> SimulationTrace {
        simulate(&self.plant, self.initial.positions(), &self.scenario.sim)
            .expect("simulation config validated during preparation")
    }
}

impl Scenario {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|err| ScenarioError::Parse {
            path: origin.to_string(),
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn save(&self, path: &Path) -> Result<(), ScenarioError> {
        fs::write(path, self.to_json() + "\n").map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(dt) = overrides.dt {
            self.sim.dt = dt;
        }
        if let Some(duration) = overrides.duration {
            self.sim.duration = duration;
        }
        if let Some(variant) = overrides.variant {
            self.controller.variant = variant;
        }
        if let Some(scale) = overrides.disturbance_scale {
            self.disturbance.scale = scale;
        }
        if let Some(seed) = overrides.seed {
            self.sim.seed = Some(seed);
        }
    }

    fn invalid(&self, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Validation {
            name: self.name.clone(),
            message: message.into(),
        }
    }

    fn initial_points(&self) -> Vec<Vec<f64>> {
        if self.initial_jitter <= 0.0 {
            return self.initial_positions.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.sim.seed.unwrap_or(0));
        self.initial_positions
            .iter()
            .map(|p| {
                p.iter()
                    .map(|x| x + rng.random_range(-self.initial_jitter..=self.initial_jitter))
                    .collect()
            })
            .collect()
    }

    /// Validates everything and selects the per-edge bounds from the initial errors.
    pub fn prepare(&self) -> Result<PreparedScenario, ScenarioError> {
        let fail = |err: FormationError| self.invalid(err.to_string());
        if self.schema_version != SCHEMA_VERSION {
            return Err(self.invalid(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        let m = self.dimension;
        let n = self.initial_positions.len();
        if let Some((i, p)) = self
            .initial_positions
            .iter()
            .enumerate()
            .find(|(_, p)| p.len() != m)
        {
            return Err(self.invalid(format!(
                "initial position of agent {i} has {} coordinates, expected {m}",
                p.len()
            )));
        }
        let graph =
            RigidGraph::new(n, self.edges.iter().map(|e| (e[0], e[1])).collect()).map_err(fail)?;
        if !graph.is_connected() {
            return Err(self.invalid("graph is not connected"));
        }
        let l = graph.edge_count();
        if rigid_rank(n, m) != Some(l) {
            return Err(self.invalid(format!(
                "{l} edges on {n} agents in {m}-D cannot be minimally rigid (need {:?})",
                rigid_rank(n, m)
            )));
        }
        let tol = self.checks.rank_tol;

        let desired = match &self.desired.positions {
            Some(points) => {
                if points.len() != n {
                    return Err(self.invalid(format!(
                        "desired realization has {} agents, expected {n}",
                        points.len()
                    )));
                }
                let fw = Framework::from_points(graph.clone(), points).map_err(fail)?;
                if fw.dim() != m {
                    return Err(self.invalid("desired realization has the wrong dimension"));
                }
                if !is_minimally_rigid(&fw, tol) {
                    return Err(self
                        .invalid("desired formation is not minimally and infinitesimally rigid"));
                }
                Some(fw)
            }
            None => None,
        };
        let desired_distances = match (&self.desired.distances, &desired) {
            (Some(d), realized) => {
                if d.len() != l {
                    return Err(
                        self.invalid(format!("expected {l} desired distances, got {}", d.len()))
                    );
                }
                if let Some(fw) = realized {
                    for (k, (&dk, lk)) in d.iter().zip(fw.edge_lengths()).enumerate() {
                        if (dk - lk).abs() > 1e-9 * dk.max(1.0) {
                            return Err(self.invalid(format!(
                                "edge {k}: desired distance {dk} disagrees with the realization ({lk})"
                            )));
                        }
                    }
                }
                d.clone()
            }
            (None, Some(fw)) => fw.edge_lengths(),
            (None, None) => return Err(self.invalid("desired shape needs distances or positions")),
        };

        let initial =
            Framework::from_points(graph.clone(), &self.initial_points()).map_err(fail)?;
        if !is_infinitesimally_rigid(&initial, tol) {
            return Err(self.invalid("initial framework is not infinitesimally rigid"));
        }

        let safety = self
            .radii
            .safety
            .expand(n, "radii.safety")
            .map_err(|e| self.invalid(e))?;
        let sensing = self
            .radii
            .sensing
            .expand(n, "radii.sensing")
            .map_err(|e| self.invalid(e))?;
        if let Some(i) = (0..n).find(|&i| !(sensing[i] > safety[i] && safety[i] > 0.0)) {
            return Err(self.invalid(format!(
                "agent {i}: need sensing radius > safety radius > 0"
            )));
        }
        let per_edge = |p: &PerItem, what: &str| p.expand(l, what).map_err(|e| self.invalid(e));
        let mu_bar = per_edge(&self.bounds.mu_bar, "bounds.mu_bar")?;
        let mu_underbar = per_edge(&self.bounds.mu_underbar, "bounds.mu_underbar")?;
        let rho0 = per_edge(&self.performance.rho0, "performance.rho0")?;
        let rho_inf = per_edge(&self.performance.rho_inf, "performance.rho_inf")?;
        let decay = per_edge(&self.performance.decay, "performance.decay")?;

        let mut specs = Vec::with_capacity(l);
        for (k, &(i, j)) in graph.edges().iter().enumerate() {
            let geom = EdgeGeometry {
                d: desired_distances[k],
                r_s: safety_distance(safety[i], safety[j]),
                r_c: connectivity_distance(sensing[i], safety[i], sensing[j], safety[j]),
                mu_bar: mu_bar[k],
                mu_underbar: mu_underbar[k],
            };
            let perf = PerformanceFunction::new(rho0[k], rho_inf[k], decay[k]).map_err(fail)?;
            let e0 = initial.edge_length(k) - geom.d;
            let spec =
                EdgeSpec::build(k, geom, perf, e0, self.bounds.mu).map_err(|err| match err {
                    FormationError::InvalidGeometry { edge, reason } => self.invalid(format!(
                        "edge ({}, {}) [#{edge}]: {reason}",
                        graph.edges()[edge].0,
                        graph.edges()[edge].1
                    )),
                    other => fail(other),
                })?;
            specs.push(spec);
        }

        let margin = omega_i_check(
            &specs,
            self.checks.vartheta_bar.unwrap_or(PERMISSIVE_VARTHETA),
        );
        if self.checks.vartheta_bar.is_some() && !margin.within {
            return Err(self.invalid(format!(
                "initial bound sum {} exceeds the rigidity margin {}",
                margin.sum, margin.threshold
            )));
        }

        let controller = self.controller_config(n, m, l)?;
        let plant =
            Plant::new(graph, m, specs, controller, self.disturbance.clone()).map_err(fail)?;
        self.sim.validate().map_err(fail)?;
        Ok(PreparedScenario {
            scenario: self.clone(),
            desired_distances,
            desired,
            initial,
            plant,
            margin,
        })
    }

    fn controller_config(
        &self,
        n: usize,
        m: usize,
        l: usize,
    ) -> Result<ControllerConfig, ScenarioError> {
        let spec = &self.controller;
        let gains = spec
            .gains
            .expand(l, "controller.gains")
            .map_err(|e| self.invalid(e))?;
        let maneuver = spec.variant == ControllerVariant::PpcManeuver;
        let conventional = match &spec.conventional {
            Some(c) => Some(ConventionalParams {
                k: c.k,
                epsilon: c.epsilon,
                theta: c.theta,
                w: c.w
                    .expand(l, "controller.conventional.w")
                    .map_err(|e| self.invalid(e))?,
            }),
            None => None,
        };
        let dhat0 = spec
            .conventional
            .as_ref()
            .map(|c| DVector::from_element(n * m, c.dhat0));
        Ok(ControllerConfig {
            variant: spec.variant,
            gains,
            leader: if maneuver { spec.leader } else { None },
            velocity: if maneuver {
                spec.velocity.clone()
            } else {
                None
            },
            conventional,
            dhat0,
        })
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<PreparedScenario, ScenarioError> {
    read_scenario(path)?.prepare()
}

/// Reads a scenario file without validating it.
pub fn read_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Scenario::from_json(&text, &path.display().to_string())
}

/// A file path, or the name of a built-in scenario when no such file exists.
pub fn resolve_scenario(arg: &str) -> Result<Scenario, ScenarioError> {
    let path = PathBuf::from(arg);
    if !path.exists() {
        if let Some(s) = builtin(arg) {
            return Ok(s);
        }
    }
    read_scenario(&path)
}

// ---------------------------------------------------------------------------
// Built-in experiments

pub const BUILTIN_NAMES: [&str; 10] = [
    "tetra_acquisition",
    "tetra_nominal",
    "pentagon_nominal_conventional",
    "pentagon_case1_ppc",
    "pentagon_case1_robust",
    "pentagon_case2_ppc",
    "pentagon_case2_robust",
    "pentagon_case3_ppc",
    "pentagon_case3_robust",
    "pentagon_maneuver",
];

pub fn builtin(name: &str) -> Option<Scenario> {
    let s = match name {
        "tetra_acquisition" => tetra(name, true, 10.0),
        "tetra_nominal" => tetra(name, false, 20.0),
        "pentagon_nominal_conventional" => {
            let mut s = pentagon(name, ControllerVariant::Conventional, 0.0);
            s.description =
                "pentagon acquisition with the plain gradient law and no disturbance".into();
            s
        }
        "pentagon_case1_ppc" => pentagon(name, ControllerVariant::Ppc, 1.0),
        "pentagon_case1_robust" => pentagon(name, ControllerVariant::RobustConventional, 1.0),
        "pentagon_case2_ppc" => pentagon(name, ControllerVariant::Ppc, 2.0),
        "pentagon_case2_robust" => pentagon(name, ControllerVariant::RobustConventional, 2.0),
        "pentagon_case3_ppc" => pentagon(name, ControllerVariant::Ppc, 4.0),
        "pentagon_case3_robust" => pentagon(name, ControllerVariant::RobustConventional, 4.0),
        "pentagon_maneuver" => pentagon_maneuver(name),
        _ => return None,
    };
    Some(s)
}

pub fn builtins() -> Vec<Scenario> {
    BUILTIN_NAMES
        .iter()
        .map(|n| builtin(n).expect("listed"))
        .collect()
}

fn sin(amp: f64, cycles_per_2s: f64) -> SinusoidTerm {
    SinusoidTerm::sin(amp, cycles_per_2s * PI)
}

fn cos(amp: f64, cycles_per_2s: f64) -> SinusoidTerm {
    SinusoidTerm::cos(amp, cycles_per_2s * PI)
}

/// Tetrahedron with three 2.5 edges from agent 0 and a 1.5 base triangle.
pub fn tetra_realization() -> Vec<Vec<f64>> {
    let r = 1.5 / 3f64.sqrt();
    let h = (2.5f64 * 2.5 - r * r).sqrt();
    let base = |k: f64| {
        let a = 2.0 * PI * k / 3.0;
        vec![r * a.cos(), r * a.sin(), 0.0]
    };
    vec![vec![0.0, 0.0, h], base(0.0), base(1.0), base(2.0)]
}

fn tetra(name: &str, disturbed: bool, duration: f64) -> Scenario {
    let disturbance = if disturbed {
        DisturbanceSignal::new(vec![
            vec![
                vec![sin(0.4, 0.8), cos(0.25, 2.0)],
                vec![cos(0.5, 1.0)],
                vec![sin(0.4, 2.0), cos(0.2, 1.2)],
            ],
            vec![
                vec![sin(0.8, 1.2), cos(0.3, 0.5)],
                vec![sin(0.4, 0.8), cos(0.25, 2.0)],
                vec![sin(0.35, 0.6), cos(0.6, 1.2)],
            ],
            vec![
                vec![sin(0.2, 1.2), cos(0.4, 0.5)],
                vec![sin(0.2, 1.2)],
                vec![sin(0.5, 1.5), cos(0.4, 2.0)],
            ],
            vec![
                vec![sin(0.35, 0.6), cos(0.6, 1.2)],
                vec![sin(0.4, 0.8), cos(0.25, 2.0)],
                vec![sin(0.5, 0.8), cos(0.7, 1.0)],
            ],
        ])
    } else {
        DisturbanceSignal::zero()
    };
    Scenario {
        schema_version: SCHEMA_VERSION,
        name: name.into(),
        description: if disturbed {
            "3-D tetrahedron acquisition under sinusoidal disturbances".into()
        } else {
            "3-D tetrahedron acquisition without disturbances".into()
        },
        dimension: 3,
        edges: vec![[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]],
        desired: DesiredShape {
            distances: Some(vec![2.5, 2.5, 2.5, 1.5, 1.5, 1.5]),
            positions: Some(tetra_realization()),
        },
        initial_positions: vec![
            vec![2.0610, 1.9605, 3.8940],
            vec![0.3424, 0.3424, 0.3424],
            vec![2.9121, 1.4121, 1.4121],
            vec![0.8137, 1.3627, 0.0637],
        ],
        initial_jitter: 0.0,
        radii: Radii {
            safety: 0.2.into(),
            sensing: 5.0.into(),
        },
        bounds: BoundSelection {
            mu: 0.12,
            mu_bar: 0.3.into(),
            mu_underbar: 0.3.into(),
        },
        performance: PerformanceParams {
            rho0: 1.0.into(),
            rho_inf: 0.03.into(),
            decay: 0.6.into(),
        },
        controller: ControllerSpec {
            variant: ControllerVariant::Ppc,
            gains: 0.1.into(),
            leader: None,
            velocity: None,
            conventional: None,
        },
        disturbance,
        sim: SimConfig {
            duration,
            ..SimConfig::default()
        },
        checks: Checks::default(),
    }
}

/// Regular pentagon with unit circumradius, agents in cyclic order.
pub fn pentagon_realization() -> Vec<Vec<f64>> {
    (0..5)
        .map(|i| {
            let a = PI / 2.0 + 2.0 * PI * i as f64 / 5.0;
            vec![a.cos(), a.sin()]
        })
        .collect()
}

/// Side and diagonal of the unit-circumradius regular pentagon.
pub fn pentagon_lengths() -> (f64, f64) {
    let side = (2.0 * (1.0 - (2.0 * PI / 5.0).cos())).sqrt();
    let diagonal = (2.0 * (1.0 + (PI / 5.0).cos())).sqrt();
    (side, diagonal)
}

fn pentagon_base(name: &str) -> Scenario {
    let (side, diag) = pentagon_lengths();
    Scenario {
        schema_version: SCHEMA_VERSION,
        name: name.into(),
        description: String::new(),
        dimension: 2,
        edges: vec![[0, 1], [0, 2], [0, 3], [0, 4], [1, 2], [2, 3], [3, 4]],
        desired: DesiredShape {
            distances: Some(vec![side, diag, diag, side, side, side, side]),
            positions: Some(pentagon_realization()),
        },
        initial_positions: vec![
            vec![-0.8049, 0.6951],
            vec![-1.3941, -0.1340],
            vec![-0.4940, -0.7153],
            vec![1.5028, 0.1060],
            vec![1.8808, 1.2388],
        ],
        initial_jitter: 0.0,
        radii: Radii {
            safety: 0.2.into(),
            sensing: 5.0.into(),
        },
        bounds: BoundSelection {
            mu: 0.12,
            mu_bar: 0.3.into(),
            mu_underbar: 0.3.into(),
        },
        performance: PerformanceParams {
            rho0: 1.0.into(),
            rho_inf: 0.03.into(),
            decay: 1.0.into(),
        },
        controller: ControllerSpec {
            variant: ControllerVariant::Ppc,
            gains: 0.3.into(),
            leader: None,
            velocity: None,
            conventional: Some(ConventionalSpec {
                k: 0.3,
                epsilon: 0.01,
                theta: 0.01,
                w: 1.5.into(),
                dhat0: 0.0,
            }),
        },
        disturbance: DisturbanceSignal::zero(),
        // The prescribed-performance loop stiffens like 1/rho^2: at rho_inf its fastest mode
        // is ~3.6e4 1/s, so RK4 needs dt < 7.8e-5. Traces are still logged every 1 ms.
        sim: SimConfig {
            dt: 5e-5,
            duration: 20.0,
            log_stride: 20,
            ..SimConfig::default()
        },
        checks: Checks::default(),
    }
}

/// Disturbance acting on agents 1 and 2 only.
pub fn pentagon_disturbance() -> DisturbanceSignal {
    DisturbanceSignal::new(vec![
        vec![],
        vec![vec![sin(0.6, 1.2), sin(-0.3, 0.6)], vec![sin(0.5, 1.0)]],
        vec![vec![sin(0.3, 0.6), sin(-0.6, 1.2)], vec![sin(-0.5, 1.0)]],
    ])
}

fn pentagon(name: &str, variant: ControllerVariant, scale: f64) -> Scenario {
    let mut s = pentagon_base(name);
    s.controller.variant = variant;
    if scale != 0.0 {
        s.disturbance = pentagon_disturbance().scaled(scale);
        s.description = format!(
            "pentagon acquisition, {} under {scale}x disturbance",
            variant.name()
        );
    }
    s
}

fn pentagon_maneuver(name: &str) -> Scenario {
    let mut s = pentagon_base(name);
    s.description = "pentagon centroid maneuvering along a circle, agent 4 leads".into();
    s.initial_positions = vec![
        vec![-0.3639, 0.6361],
        vec![-1.7126, -0.4526],
        vec![0.4919, 0.2706],
        vec![2.0789, -0.0179],
        vec![0.9100, 0.2679],
    ];
    s.controller = ControllerSpec {
        variant: ControllerVariant::PpcManeuver,
        gains: 0.2.into(),
        leader: Some(4),
        velocity: Some(VelocityCommand::new(vec![
            vec![SinusoidTerm::sin(1.0, 0.5)],
            vec![SinusoidTerm::cos(1.0, 0.5)],
        ])),
        conventional: None,
    };
    s
}
